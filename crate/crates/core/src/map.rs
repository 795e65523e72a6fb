//! Discrete maps of an interval onto itself.
//!
//! Every map carries its own domain `[lo, hi]` and is clipped back into it.
//! Analytic variants are evaluated in the unit coordinate `u = (x - lo) / width`
//! so that a surrogate and its logistic conjugate share the exact same
//! floating-point recurrence; [`MapDescriptor::eval_map`] wraps that in volts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabulated::TabulatedCurve;

/// Tolerance used when checking that an input voltage lies in a domain.
pub const DOMAIN_TOLERANCE: f64 = 1e-12;

/// Closed interval `[lo, hi]` in volts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(
                "interval",
                format!("bounds must be finite, got [{lo}, {hi}]"),
            ));
        }
        if lo >= hi {
            return Err(Error::invalid("interval", format!("lo must be < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// The unit interval `[0, 1]`.
    pub const fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        self.from_unit(0.5)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    /// True when `other` lies entirely inside `self`.
    pub fn covers(&self, other: &Interval) -> bool {
        self.lo <= other.lo && self.hi >= other.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.lo) / self.width()
    }

    pub fn from_unit(&self, u: f64) -> f64 {
        self.lo + self.width() * u
    }
}

/// The three bifurcation parameters of the G4FET-NDR map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnmParams {
    /// Transimpedance gain in MΩ.
    pub mu1: f64,
    /// n-channel top-gate voltage in V.
    pub mu2: f64,
    /// p-channel top-gate voltage in V.
    pub mu3: f64,
}

impl GnmParams {
    pub fn new(mu1: f64, mu2: f64, mu3: f64) -> Self {
        Self { mu1, mu2, mu3 }
    }
}

impl Default for GnmParams {
    fn default() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }
}

/// Constants of the smooth surrogate that stands in for the measured NDR
/// transfer curve.
///
/// `V_c = vc0 + a_n·mu2 − a_p·mu3` sets the cutoff (and the domain upper bound),
/// `k = k0·(1 + b_n·mu2)·(1 − b_p·mu3)` sets the current scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateConstants {
    /// Cutoff voltage at zero top-gate bias (V).
    pub vc0: f64,
    /// Peak-current scale (A).
    pub k0: f64,
    pub a_n: f64,
    pub a_p: f64,
    pub b_n: f64,
    pub b_p: f64,
    /// Asymmetry coefficient; 0 keeps the map exactly conjugate to the logistic map.
    pub gamma: f64,
    /// Allowed top-gate bias range for mu2 and mu3 (V).
    pub bias_min: f64,
    pub bias_max: f64,
}

impl Default for SurrogateConstants {
    fn default() -> Self {
        Self {
            vc0: 2.63,
            k0: 10e-6,
            a_n: 0.5,
            a_p: 0.5,
            b_n: 0.3,
            b_p: 0.3,
            gamma: 0.0,
            bias_min: -0.5,
            bias_max: 0.5,
        }
    }
}

impl SurrogateConstants {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.vc0,
            self.k0,
            self.a_n,
            self.a_p,
            self.b_n,
            self.b_p,
            self.gamma,
            self.bias_min,
            self.bias_max,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("surrogate constants", "all constants must be finite"));
        }
        if self.vc0 <= 0.0 {
            return Err(Error::invalid("vc0", format!("must be > 0, got {}", self.vc0)));
        }
        if self.k0 <= 0.0 {
            return Err(Error::invalid("k0", format!("must be > 0, got {}", self.k0)));
        }
        for (name, v) in [
            ("a_n", self.a_n),
            ("a_p", self.a_p),
            ("b_n", self.b_n),
            ("b_p", self.b_p),
            ("gamma", self.gamma),
        ] {
            if v < 0.0 {
                return Err(Error::invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        if self.bias_min > self.bias_max {
            return Err(Error::invalid(
                "bias bounds",
                format!("empty range [{}, {}]", self.bias_min, self.bias_max),
            ));
        }
        Ok(())
    }

    /// Cutoff voltage `V_c(mu2, mu3)`.
    pub fn cutoff(&self, p: &GnmParams) -> f64 {
        self.vc0 + self.a_n * p.mu2 - self.a_p * p.mu3
    }

    /// Current scale `k(mu2, mu3)` in amperes.
    pub fn current_scale(&self, p: &GnmParams) -> f64 {
        self.k0 * (1.0 + self.b_n * p.mu2) * (1.0 - self.b_p * p.mu3)
    }
}

fn gnm_r(p: &GnmParams, c: &SurrogateConstants) -> f64 {
    p.mu1 * 1e6 * c.current_scale(p) / c.cutoff(p)
}

/// Logistic parameter of the surrogate's conjugate, `mu1·k / V_c`.
pub fn gnm_effective_r(p: &GnmParams, c: &SurrogateConstants) -> Result<f64> {
    if c.gamma != 0.0 {
        return Err(Error::NotConjugate { gamma: c.gamma });
    }
    Ok(gnm_r(p, c))
}

/// A validated surrogate map with its derived quantities cached.
#[derive(Debug, Clone, PartialEq)]
pub struct GnmMap {
    params: GnmParams,
    constants: SurrogateConstants,
    r: f64,
    cutoff: f64,
}

impl GnmMap {
    pub fn new(params: GnmParams, constants: SurrogateConstants) -> Result<Self> {
        constants.validate()?;
        if !(params.mu1.is_finite() && params.mu1 > 0.0) {
            return Err(Error::invalid("mu1", format!("must be > 0 MΩ, got {}", params.mu1)));
        }
        for (name, v) in [("mu2", params.mu2), ("mu3", params.mu3)] {
            if !(v.is_finite() && v >= constants.bias_min && v <= constants.bias_max) {
                return Err(Error::invalid(
                    name,
                    format!(
                        "must lie in [{}, {}] V, got {v}",
                        constants.bias_min, constants.bias_max
                    ),
                ));
            }
        }
        let cutoff = constants.cutoff(&params);
        if cutoff <= 0.0 {
            return Err(Error::invalid(
                "mu2/mu3",
                format!("cutoff voltage {cutoff} V is not positive"),
            ));
        }
        if constants.current_scale(&params) <= 0.0 {
            return Err(Error::invalid("mu2/mu3", "current scale is not positive"));
        }
        Ok(Self {
            params,
            constants,
            r: gnm_r(&params, &constants),
            cutoff,
        })
    }

    pub fn params(&self) -> &GnmParams {
        &self.params
    }

    pub fn constants(&self) -> &SurrogateConstants {
        &self.constants
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Height parameter of the normalized map, `mu1·k / V_c`.
    pub fn shape_r(&self) -> f64 {
        self.r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Logistic { r: f64 },
    Tent { m: f64 },
    Sine { a: f64 },
    Gnm(GnmMap),
    Tabulated(TabulatedCurve),
}

/// Result of a single clipped evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eval {
    pub value: f64,
    /// The unclipped value left the domain.
    pub clipped: bool,
}

/// Derivative of a map at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slope {
    pub value: f64,
    /// Set at a kink, in a clipped plateau, or where a finite difference had to
    /// fall back to a one-sided stencil.
    pub one_sided: bool,
}

impl Slope {
    fn smooth(value: f64) -> Self {
        Self {
            value,
            one_sided: false,
        }
    }

    fn flagged(value: f64) -> Self {
        Self { value, one_sided: true }
    }
}

/// A discrete map `f: [lo, hi] -> [lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapDescriptor {
    kind: MapKind,
    domain: Interval,
}

fn check_non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

fn clip_unit(raw: f64) -> Eval {
    if raw > 1.0 {
        Eval {
            value: 1.0,
            clipped: true,
        }
    } else if raw < 0.0 {
        Eval {
            value: 0.0,
            clipped: true,
        }
    } else {
        Eval {
            value: raw,
            clipped: false,
        }
    }
}

impl MapDescriptor {
    /// `r·x·(1 − x)` on `[0, 1]`.
    pub fn logistic(r: f64) -> Result<Self> {
        check_non_negative("r", r)?;
        Ok(Self {
            kind: MapKind::Logistic { r },
            domain: Interval::unit(),
        })
    }

    /// `m·min(x, 1 − x)` on `[0, 1]`.
    pub fn tent(m: f64) -> Result<Self> {
        check_non_negative("m", m)?;
        Ok(Self {
            kind: MapKind::Tent { m },
            domain: Interval::unit(),
        })
    }

    /// `a·sin(πx)` on `[0, 1]`.
    pub fn sine(a: f64) -> Result<Self> {
        check_non_negative("a", a)?;
        Ok(Self {
            kind: MapKind::Sine { a },
            domain: Interval::unit(),
        })
    }

    /// The G4FET-NDR surrogate on `[0, V_c(mu2, mu3)]`.
    pub fn gnm(params: GnmParams, constants: SurrogateConstants) -> Result<Self> {
        let map = GnmMap::new(params, constants)?;
        let domain = Interval::new(0.0, map.cutoff)?;
        Ok(Self {
            kind: MapKind::Gnm(map),
            domain,
        })
    }

    pub fn tabulated(curve: TabulatedCurve) -> Self {
        let domain = curve.knot_range();
        Self {
            kind: MapKind::Tabulated(curve),
            domain,
        }
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            MapKind::Logistic { .. } => "logistic",
            MapKind::Tent { .. } => "tent",
            MapKind::Sine { .. } => "sine",
            MapKind::Gnm(_) => "gnm",
            MapKind::Tabulated(_) => "tabulated",
        }
    }

    fn check_input(&self, x: f64) -> Result<f64> {
        if x.is_finite() && self.domain.contains(x, DOMAIN_TOLERANCE) {
            return Ok(self.domain.clamp(x));
        }
        let (lo, hi) = (self.domain.lo, self.domain.hi);
        Err(match self.kind {
            MapKind::Tabulated(_) => Error::Extrapolation { x, lo, hi },
            _ => Error::InputOutOfRange { x, lo, hi },
        })
    }

    /// `f(x)` in volts, clipped into the domain.
    pub fn eval_map(&self, x: f64) -> Result<f64> {
        let x = self.check_input(x)?;
        Ok(self.eval_clamped(x).value)
    }

    /// Evaluates at an in-domain voltage, reporting whether the output was clipped.
    pub(crate) fn eval_clamped(&self, x: f64) -> Eval {
        match &self.kind {
            MapKind::Tabulated(curve) => self.eval_tabulated(curve, x),
            _ => {
                let e = self.eval_unit(self.domain.to_unit(x));
                Eval {
                    value: self.domain.from_unit(e.value),
                    clipped: e.clipped,
                }
            }
        }
    }

    fn eval_tabulated(&self, curve: &TabulatedCurve, x: f64) -> Eval {
        let raw = curve.interpolate(x);
        let value = self.domain.clamp(raw);
        Eval {
            value,
            clipped: value != raw,
        }
    }

    /// The map in unit coordinates, `u ∈ [0, 1]`.
    pub fn eval_unit(&self, u: f64) -> Eval {
        match &self.kind {
            MapKind::Logistic { r } => clip_unit(r * u * (1.0 - u)),
            MapKind::Tent { m } => clip_unit(m * u.min(1.0 - u)),
            MapKind::Sine { a } => clip_unit(a * (std::f64::consts::PI * u).sin()),
            MapKind::Gnm(g) => {
                let gamma = g.constants.gamma;
                clip_unit(g.r * u * (1.0 - u) * (1.0 + gamma * u))
            }
            MapKind::Tabulated(curve) => {
                let e = self.eval_tabulated(curve, self.domain.from_unit(u));
                Eval {
                    value: self.domain.to_unit(e.value),
                    clipped: e.clipped,
                }
            }
        }
    }

    /// `f'(x)`. Input and output share the same scale, so this is also the
    /// derivative in unit coordinates.
    pub fn map_derivative(&self, x: f64) -> Result<Slope> {
        let x = self.check_input(x)?;
        Ok(self.derivative_unit(self.domain.to_unit(x)))
    }

    pub fn derivative_unit(&self, u: f64) -> Slope {
        match &self.kind {
            MapKind::Logistic { r } => {
                if self.eval_unit(u).clipped {
                    Slope::flagged(0.0)
                } else {
                    Slope::smooth(r * (1.0 - 2.0 * u))
                }
            }
            MapKind::Tent { m } => {
                if self.eval_unit(u).clipped {
                    Slope::flagged(0.0)
                } else if u < 0.5 {
                    Slope::smooth(*m)
                } else if u > 0.5 {
                    Slope::smooth(-m)
                } else {
                    // Left branch at the apex.
                    Slope::flagged(*m)
                }
            }
            MapKind::Sine { a } => {
                if self.eval_unit(u).clipped {
                    Slope::flagged(0.0)
                } else {
                    Slope::smooth(a * std::f64::consts::PI * (std::f64::consts::PI * u).cos())
                }
            }
            MapKind::Gnm(g) => {
                if self.eval_unit(u).clipped {
                    return Slope::flagged(0.0);
                }
                let gamma = g.constants.gamma;
                let d = (1.0 - 2.0 * u) * (1.0 + gamma * u) + gamma * u * (1.0 - u);
                Slope::smooth(g.r * d)
            }
            MapKind::Tabulated(curve) => self.tabulated_derivative(curve, self.domain.from_unit(u)),
        }
    }

    fn tabulated_derivative(&self, curve: &TabulatedCurve, x: f64) -> Slope {
        let (lo, hi) = (self.domain.lo, self.domain.hi);
        let h = 1e-6 * self.domain.width();
        let f = |x: f64| self.eval_tabulated(curve, x);
        let centre = f(x);
        if x - h >= lo && x + h <= hi {
            let (a, b) = (f(x - h), f(x + h));
            let value = (b.value - a.value) / (2.0 * h);
            Slope {
                value,
                one_sided: a.clipped || b.clipped || centre.clipped,
            }
        } else if x + h <= hi {
            Slope::flagged((f(x + h).value - centre.value) / h)
        } else {
            Slope::flagged((centre.value - f(x - h).value) / h)
        }
    }
}
