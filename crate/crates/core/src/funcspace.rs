//! Functionality-space sizes of chaos-based gate designs.
//!
//! All counts are exact arbitrary-precision integers.
//!
//! | design | size |
//! |---|---|
//! | single μ, control bits | `2^c · N_μ · n` |
//! | per-iteration μ, threshold | `N_vref · N_μ^n · n` |
//! | three μ, one map | `N_vref · 2^c · (N_μ1·N_μ2·N_μ3)^n · n` |
//! | three μ, forward and feedback maps | `N_vref · 2^c · (N_μ1·N_μ2·N_μ3)^(2n) · n` |

use std::ops::RangeInclusive;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceParams {
    /// Control-bit count.
    pub c: u32,
    pub n_mu: u64,
    pub n_mu1: u64,
    pub n_mu2: u64,
    pub n_mu3: u64,
    pub n_vref: u64,
    pub n: u32,
}

impl Default for SpaceParams {
    fn default() -> Self {
        Self {
            c: 0,
            n_mu: 1,
            n_mu1: 1,
            n_mu2: 1,
            n_mu3: 1,
            n_vref: 1,
            n: 1,
        }
    }
}

impl SpaceParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_mu", self.n_mu),
            ("n_mu1", self.n_mu1),
            ("n_mu2", self.n_mu2),
            ("n_mu3", self.n_mu3),
            ("n_vref", self.n_vref),
        ] {
            if v == 0 {
                return Err(Error::invalid(name, "level count must be >= 1"));
            }
        }
        if self.n == 0 {
            return Err(Error::invalid("n", "iteration count must be >= 1"));
        }
        Ok(())
    }

    pub fn with_n(self, n: u32) -> Self {
        Self { n, ..self }
    }

    fn control(&self) -> BigUint {
        BigUint::one() << self.c as usize
    }

    fn mu_product(&self) -> BigUint {
        BigUint::from(self.n_mu1) * self.n_mu2 * self.n_mu3
    }
}

/// `2^c · N_μ · n`
pub fn f1(p: &SpaceParams) -> BigUint {
    p.control() * p.n_mu * p.n
}

/// `N_vref · N_μ^n · n`
pub fn f2(p: &SpaceParams) -> BigUint {
    BigUint::from(p.n_vref) * BigUint::from(p.n_mu).pow(p.n) * p.n
}

/// `N_vref · 2^c · N_μ1^n · N_μ2^n · N_μ3^n · n`
pub fn f3(p: &SpaceParams) -> BigUint {
    BigUint::from(p.n_vref) * p.control() * p.mu_product().pow(p.n) * p.n
}

/// `N_vref · 2^c · N_μ1^2n · N_μ2^2n · N_μ3^2n · n`
pub fn f4(p: &SpaceParams) -> BigUint {
    BigUint::from(p.n_vref) * p.control() * p.mu_product().pow(2 * p.n) * p.n
}

/// `log10` of an arbitrarily large integer, accurate to f64 precision.
pub fn log10_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).log10();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.log10() + shift as f64 * std::f64::consts::LOG10_2
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceRow {
    pub n: u32,
    pub f: [BigUint; 4],
    pub log10: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTable {
    pub params: SpaceParams,
    pub rows: Vec<SpaceRow>,
}

impl SpaceTable {
    /// `2^c < N_vref·N_μ^(n−1)` is what places the threshold-varying design above
    /// the control-bit design; the other orderings need only level counts >= 2.
    pub fn ordering_expected(&self, n: u32) -> bool {
        let p = self.params.with_n(n);
        n >= 2
            && [p.n_vref, p.n_mu1, p.n_mu2, p.n_mu3].iter().all(|&v| v >= 2)
            && p.n_mu == p.n_mu1
            && p.control() < BigUint::from(p.n_vref) * BigUint::from(p.n_mu).pow(n - 1)
    }

    /// Rows where `F4 > F3 > F2 > F1` holds.
    pub fn strictly_ordered(row: &SpaceRow) -> bool {
        row.f[3] > row.f[2] && row.f[2] > row.f[1] && row.f[1] > row.f[0]
    }
}

/// `F1..F4` for every `n` in `n_range`, with `log10` columns for plotting.
pub fn compare_spaces(p: &SpaceParams, n_range: RangeInclusive<u32>) -> Result<SpaceTable> {
    if n_range.is_empty() || *n_range.start() == 0 {
        return Err(Error::invalid(
            "n range",
            format!("need 1 <= n_min <= n_max, got {n_range:?}"),
        ));
    }
    p.validate()?;
    let rows = n_range
        .map(|n| {
            let q = p.with_n(n);
            let f = [f1(&q), f2(&q), f3(&q), f4(&q)];
            let log10 = [log10_big(&f[0]), log10_big(&f[1]), log10_big(&f[2]), log10_big(&f[3])];
            SpaceRow { n, f, log10 }
        })
        .collect();
    Ok(SpaceTable { params: *p, rows })
}
