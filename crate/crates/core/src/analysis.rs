//! Bifurcation sweeps, Lyapunov exponents and chaotic/periodic classification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{GnmParams, MapDescriptor, SurrogateConstants};
use crate::oscillator::{check_seed, iterate, Driver, Topology};

/// Derivatives below this magnitude make the exponent the `-inf` sentinel.
pub const SUPERSTABLE_SLOPE: f64 = 1e-300;

/// Fraction of clipped steps above which an estimate carries a warning.
pub const CLIP_WARNING_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    /// Nats per iteration; `f64::NEG_INFINITY` for a superstable orbit.
    pub lambda: f64,
    pub clipped_fraction: f64,
    pub warning: Option<String>,
}

/// Time average of `ln|f'(x_i)|` over `n` iterations after `burn`.
///
/// With map feedback each composite step contributes `ln|fw'(x)| + ln|fb'(y)|`.
pub fn lyapunov_exponent(
    fw: &MapDescriptor,
    topo: &Topology,
    x0: f64,
    n: usize,
    burn: usize,
) -> Result<LyapunovEstimate> {
    if n == 0 {
        return Err(Error::Config("lyapunov iteration count must be positive".into()));
    }
    check_seed(fw, x0)?;
    topo.check_against(&fw.domain())?;
    let fb = topo.feedback_map();
    let mut driver = Driver::new(|_| fw, topo, x0);
    for _ in 0..burn {
        driver.step();
    }
    let mut sum = 0.0;
    let mut clipped = 0usize;
    let mut superstable = false;
    for _ in 0..n {
        let step = driver.step();
        if step.clipped {
            clipped += 1;
        }
        if superstable {
            continue;
        }
        let mut slopes = [fw.derivative_unit(step.fw_in).value, 1.0];
        if let (Some(fb), Some(v)) = (fb, step.fb_in) {
            slopes[1] = fb.derivative_unit(v).value;
        }
        for s in slopes {
            let s = s.abs();
            if s < SUPERSTABLE_SLOPE {
                superstable = true;
            } else {
                sum += s.ln();
            }
        }
    }
    let clipped_fraction = clipped as f64 / n as f64;
    let warning = (clipped_fraction > CLIP_WARNING_FRACTION)
        .then(|| format!("orbit clipped on {:.1}% of steps", 100.0 * clipped_fraction));
    Ok(LyapunovEstimate {
        lambda: if superstable { f64::NEG_INFINITY } else { sum / n as f64 },
        clipped_fraction,
        warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Mu1,
    Mu2,
    Mu3,
    R,
    M,
    A,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Mu1 => "mu1",
            Axis::Mu2 => "mu2",
            Axis::Mu3 => "mu3",
            Axis::R => "r",
            Axis::M => "m",
            Axis::A => "a",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Axis::Mu1 => "MΩ",
            Axis::Mu2 | Axis::Mu3 => "V",
            _ => "",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "mu1" => Axis::Mu1,
            "mu2" => Axis::Mu2,
            "mu3" => Axis::Mu3,
            "r" => Axis::R,
            "m" => Axis::M,
            "a" => Axis::A,
            other => return Err(Error::Config(format!("unknown axis {other:?}"))),
        })
    }
}

/// A parameterised family of maps that a sweep can move along one axis.
#[derive(Debug, Clone, PartialEq)]
pub enum MapFamily {
    Logistic {
        r: f64,
    },
    Tent {
        m: f64,
    },
    Sine {
        a: f64,
    },
    Gnm {
        params: GnmParams,
        constants: SurrogateConstants,
    },
}

impl MapFamily {
    pub fn build(&self) -> Result<MapDescriptor> {
        match self {
            MapFamily::Logistic { r } => MapDescriptor::logistic(*r),
            MapFamily::Tent { m } => MapDescriptor::tent(*m),
            MapFamily::Sine { a } => MapDescriptor::sine(*a),
            MapFamily::Gnm { params, constants } => MapDescriptor::gnm(*params, *constants),
        }
    }

    /// The family member with `axis` set to `value`.
    pub fn with_axis(&self, axis: Axis, value: f64) -> Result<MapDescriptor> {
        let mut f = self.clone();
        match (&mut f, axis) {
            (MapFamily::Logistic { r }, Axis::R) => *r = value,
            (MapFamily::Tent { m }, Axis::M) => *m = value,
            (MapFamily::Sine { a }, Axis::A) => *a = value,
            (MapFamily::Gnm { params, .. }, Axis::Mu1) => params.mu1 = value,
            (MapFamily::Gnm { params, .. }, Axis::Mu2) => params.mu2 = value,
            (MapFamily::Gnm { params, .. }, Axis::Mu3) => params.mu3 = value,
            _ => {
                let name = f.build().map(|m| m.name()).unwrap_or("map");
                return Err(Error::Config(format!(
                    "axis {} does not apply to the {name} map",
                    axis.name()
                )));
            }
        }
        f.build()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub family: MapFamily,
    pub axis: Axis,
    pub range: (f64, f64),
    pub steps: usize,
    /// Seed in volts; `None` seeds each map at its domain midpoint.
    pub x0: Option<f64>,
    pub transient: usize,
    pub retained: usize,
    pub lyapunov_iterations: usize,
    pub topology: Topology,
}

impl SweepSpec {
    pub const DEFAULT_TRANSIENT: usize = 1000;
    pub const DEFAULT_RETAINED: usize = 3000;
    pub const DEFAULT_LYAPUNOV_ITERATIONS: usize = 100_000;

    pub fn new(family: MapFamily, axis: Axis, range: (f64, f64), steps: usize) -> Self {
        Self {
            family,
            axis,
            range,
            steps,
            x0: None,
            transient: Self::DEFAULT_TRANSIENT,
            retained: Self::DEFAULT_RETAINED,
            lyapunov_iterations: Self::DEFAULT_LYAPUNOV_ITERATIONS,
            topology: Topology::BufferFeedback,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(
                "range",
                format!("need finite lo < hi, got ({lo}, {hi})"),
            ));
        }
        if self.steps < 2 {
            return Err(Error::invalid("steps", format!("must be >= 2, got {}", self.steps)));
        }
        if self.transient == 0 {
            return Err(Error::invalid("transient", "must be > 0"));
        }
        if self.retained == 0 {
            return Err(Error::invalid("retained", "must be > 0"));
        }
        if self.lyapunov_iterations == 0 {
            return Err(Error::invalid("lyapunov_iterations", "must be > 0"));
        }
        // surface axis/map mismatches before any work is scheduled
        self.family.with_axis(self.axis, lo).map(|_| ()).or_else(|e| match e {
            Error::Config(_) => Err(e),
            _ => Ok(()),
        })
    }

    /// Evenly spaced axis values, both ends included.
    pub fn axis_values(&self) -> Vec<f64> {
        let (lo, hi) = self.range;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / last
                }
            })
            .collect()
    }

    fn map_and_seed(&self, value: f64) -> Result<(MapDescriptor, f64)> {
        let map = self.family.with_axis(self.axis, value)?;
        let x0 = self.x0.unwrap_or_else(|| map.domain().midpoint());
        Ok((map, x0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationRow {
    pub axis_value: f64,
    pub samples: Vec<f64>,
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationData {
    pub axis: Axis,
    pub rows: Vec<BifurcationRow>,
}

impl BifurcationData {
    /// First axis value whose steady state is not a single fixed point, judged on
    /// the last samples of each row (the early retained samples may still carry
    /// slow convergence near the bifurcation).
    pub fn first_period_doubling(&self, tol: f64) -> Option<f64> {
        let mut seen_fixed = false;
        for row in &self.rows {
            match estimate_period(&row.samples, tol, 64) {
                Some(1) => seen_fixed = true,
                _ if seen_fixed => return Some(row.axis_value),
                _ => {}
            }
        }
        None
    }
}

/// Smallest `p <= max_period` such that the tail of `samples` repeats with
/// period `p` to within `tol`. `None` means no short period was found.
pub fn estimate_period(samples: &[f64], tol: f64, max_period: usize) -> Option<usize> {
    let window = 4 * max_period;
    if samples.len() < window + max_period {
        return None;
    }
    let tail = &samples[samples.len() - window - max_period..];
    (1..=max_period).find(|&p| (max_period..tail.len()).all(|i| (tail[i] - tail[i - p]).abs() <= tol))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovPoint {
    pub axis_value: f64,
    pub lambda: f64,
    pub clipped_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovCurve {
    pub axis: Axis,
    pub rows: Vec<LyapunovPoint>,
}

impl LyapunovCurve {
    pub fn from_pairs(axis: Axis, pairs: &[(f64, f64)]) -> Self {
        Self {
            axis,
            rows: pairs
                .iter()
                .map(|&(axis_value, lambda)| LyapunovPoint {
                    axis_value,
                    lambda,
                    clipped_fraction: 0.0,
                })
                .collect(),
        }
    }

    /// First axis value with a strictly positive exponent.
    pub fn chaos_onset(&self) -> Option<f64> {
        self.rows.iter().find(|p| p.lambda > 0.0).map(|p| p.axis_value)
    }
}

/// Steady-state orbit samples for every axis value, computed in parallel and
/// merged in axis order.
pub fn bifurcation_sweep(spec: &SweepSpec) -> Result<BifurcationData> {
    spec.validate()?;
    let n = spec.transient + spec.retained;
    let rows = spec
        .axis_values()
        .into_par_iter()
        .map(|value| {
            let (map, x0) = spec.map_and_seed(value)?;
            let orbit = iterate(&map, &spec.topology, x0, n, spec.transient)?;
            Ok(BifurcationRow {
                axis_value: value,
                samples: orbit.samples,
                clipped: orbit.clipped,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BifurcationData { axis: spec.axis, rows })
}

pub fn lyapunov_sweep(spec: &SweepSpec) -> Result<LyapunovCurve> {
    spec.validate()?;
    let rows = spec
        .axis_values()
        .into_par_iter()
        .map(|value| {
            let (map, x0) = spec.map_and_seed(value)?;
            let est = lyapunov_exponent(&map, &spec.topology, x0, spec.lyapunov_iterations, spec.transient)?;
            Ok(LyapunovPoint {
                axis_value: value,
                lambda: est.lambda,
                clipped_fraction: est.clipped_fraction,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LyapunovCurve { axis: spec.axis, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionLabel {
    Chaotic,
    Periodic,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
    pub label: RegionLabel,
}

pub fn label_for(lambda: f64, tol: f64) -> RegionLabel {
    if lambda > tol {
        RegionLabel::Chaotic
    } else if lambda < -tol {
        RegionLabel::Periodic
    } else {
        RegionLabel::Marginal
    }
}

/// Maximal runs of consecutive rows sharing a label.
pub fn classify_regions(curve: &LyapunovCurve, tol: f64) -> Vec<Region> {
    let mut regions: Vec<Region> = Vec::new();
    for p in &curve.rows {
        let label = label_for(p.lambda, tol);
        match regions.last_mut() {
            Some(last) if last.label == label => last.hi = p.axis_value,
            _ => regions.push(Region {
                lo: p.axis_value,
                hi: p.axis_value,
                label,
            }),
        }
    }
    regions
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logistic_lambda(r: f64) -> f64 {
        let m = MapDescriptor::logistic(r).unwrap();
        lyapunov_exponent(&m, &Topology::BufferFeedback, 0.3, 100_000, 1000)
            .unwrap()
            .lambda
    }

    #[test]
    fn closed_form_exponents() {
        assert!((logistic_lambda(4.0) - std::f64::consts::LN_2).abs() < 0.005);
        assert!((logistic_lambda(2.5) - 0.5f64.ln()).abs() < 0.01);
        assert!((logistic_lambda(3.2) - 0.5 * 0.16f64.ln()).abs() < 0.01);
    }

    #[test]
    fn superstable_orbit_gives_sentinel() {
        // r = 2 has its fixed point on the critical point
        let m = MapDescriptor::logistic(2.0).unwrap();
        let est = lyapunov_exponent(&m, &Topology::BufferFeedback, 0.5, 100, 0).unwrap();
        assert_eq!(est.lambda, f64::NEG_INFINITY);
    }

    #[test]
    fn clipping_warning() {
        let m = MapDescriptor::logistic(4.3).unwrap();
        let est = lyapunov_exponent(&m, &Topology::BufferFeedback, 0.3, 1000, 10).unwrap();
        assert!(est.warning.is_some() || est.clipped_fraction <= CLIP_WARNING_FRACTION);
    }

    #[test]
    fn regions_follow_sign() {
        let curve = LyapunovCurve::from_pairs(Axis::R, &[(1.0, -0.5), (2.0, -0.1), (3.0, 0.4)]);
        let regions = classify_regions(&curve, 0.0);
        assert_eq!(
            regions,
            vec![
                Region {
                    lo: 1.0,
                    hi: 2.0,
                    label: RegionLabel::Periodic
                },
                Region {
                    lo: 3.0,
                    hi: 3.0,
                    label: RegionLabel::Chaotic
                },
            ]
        );
    }

    #[test]
    fn all_negative_is_one_region() {
        let curve = LyapunovCurve::from_pairs(Axis::R, &[(1.0, -0.5), (2.0, -0.1), (3.0, f64::NEG_INFINITY)]);
        let regions = classify_regions(&curve, 0.0);
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].label, RegionLabel::Periodic);
        assert_eq!((regions[0].lo, regions[0].hi), (1.0, 3.0));
    }

    #[test]
    fn marginal_band() {
        let curve = LyapunovCurve::from_pairs(Axis::R, &[(1.0, -0.5), (2.0, 0.005), (3.0, 0.4)]);
        let labels: Vec<_> = classify_regions(&curve, 0.01).iter().map(|r| r.label).collect();
        assert_eq!(
            labels,
            [RegionLabel::Periodic, RegionLabel::Marginal, RegionLabel::Chaotic]
        );
    }

    #[test]
    fn period_estimation() {
        let fixed = vec![0.5; 400];
        assert_eq!(estimate_period(&fixed, 1e-9, 64), Some(1));
        let two: Vec<f64> = (0..400).map(|i| if i % 2 == 0 { 0.51 } else { 0.8 }).collect();
        assert_eq!(estimate_period(&two, 1e-9, 64), Some(2));
        assert_eq!(estimate_period(&two[..10], 1e-9, 64), None);
    }

    #[test]
    fn incompatible_axis_is_rejected() {
        let spec = SweepSpec::new(MapFamily::Logistic { r: 3.0 }, Axis::Mu1, (0.6, 1.0), 10);
        assert!(matches!(bifurcation_sweep(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn spec_validation() {
        let mut spec = SweepSpec::new(MapFamily::Logistic { r: 3.0 }, Axis::R, (2.0, 3.0), 1);
        assert!(matches!(
            spec.validate(),
            Err(Error::InvalidParameter { name: "steps", .. })
        ));
        spec.steps = 5;
        spec.range = (3.0, 2.0);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn axis_values_hit_both_ends() {
        let spec = SweepSpec::new(MapFamily::Logistic { r: 3.0 }, Axis::R, (0.6, 1.05), 200);
        let v = spec.axis_values();
        assert_eq!(v.len(), 200);
        assert_eq!(v[0], 0.6);
        assert_eq!(v[199], 1.05);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}
