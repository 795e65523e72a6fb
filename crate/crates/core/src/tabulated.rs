//! Tabulated transfer curves and their shape-preserving cubic interpolant.
//!
//! Knot slopes start from the three-point (parabolic) estimate and are then
//! limited so that every interval whose neighbouring secants agree in sign stays
//! monotone (`|d| <= 3·min|secant|`). Where the data turns over, the parabolic
//! estimate is kept so a peak between two equal-valued knots stays rounded
//! instead of flattening into a false plateau.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::map::{Interval, MapDescriptor};

/// Knots plus precomputed Hermite slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCurve {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedCurve {
    pub const MIN_KNOTS: usize = 4;

    /// `knots` must have strictly increasing x and at least four entries.
    pub fn new(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < Self::MIN_KNOTS {
            return Err(Error::InsufficientKnots { found: knots.len() });
        }
        for (i, &(x, y)) in knots.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Parse {
                    row: i as u64 + 1,
                    message: "non-finite knot".into(),
                });
            }
            if i > 0 && x <= knots[i - 1].0 {
                return Err(Error::Parse {
                    row: i as u64 + 1,
                    message: format!("x = {x} does not increase (previous {})", knots[i - 1].0),
                });
            }
        }
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let slopes = knot_slopes(&xs, &ys);
        Ok(Self { xs, ys, slopes })
    }

    /// Samples `f` at `count` uniformly spaced knots over `[lo, hi]`.
    pub fn sample(lo: f64, hi: f64, count: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if count < 2 {
            return Err(Error::InsufficientKnots { found: count });
        }
        let knots: Vec<(f64, f64)> = (0..count)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / (count - 1) as f64;
                (x, f(x))
            })
            .collect();
        Self::new(&knots)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn knot_range(&self) -> Interval {
        // Construction guarantees at least four strictly increasing finite knots.
        Interval::new(self.xs[0], self.xs[self.xs.len() - 1]).expect("validated knots")
    }

    /// Cubic Hermite interpolation; `x` is clamped to the knot range.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let x = x.clamp(self.xs[0], self.xs[n - 1]);
        let i = self.xs.partition_point(|&k| k <= x).saturating_sub(1).min(n - 2);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

fn limit(d: f64, secant: f64) -> f64 {
    if d * secant <= 0.0 {
        0.0
    } else {
        d.signum() * d.abs().min(3.0 * secant.abs())
    }
}

/// Knot `i` borders a zero-secant interval whose outer neighbours slope in
/// opposite directions, i.e. an extremum falls between two equal knots.
fn flat_top(s: &[f64], i: usize) -> bool {
    let (sl, sr) = (s[i - 1], s[i]);
    if sr == 0.0 {
        s.get(i + 1).is_some_and(|&next| next * sl < 0.0)
    } else {
        i >= 2 && s[i - 2] * sr < 0.0
    }
}

fn knot_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    // differences at rounding level count as flat
    let s: Vec<f64> = (0..n - 1)
        .map(|i| {
            let dy = ys[i + 1] - ys[i];
            if dy.abs() <= 4.0 * f64::EPSILON * ys[i].abs().max(ys[i + 1].abs()) {
                0.0
            } else {
                dy / h[i]
            }
        })
        .collect();
    let mut d = vec![0.0; n];

    for i in 1..n - 1 {
        let (sl, sr) = (s[i - 1], s[i]);
        let centred = (h[i] * sl + h[i - 1] * sr) / (h[i - 1] + h[i]);
        d[i] = if sl == 0.0 && sr == 0.0 {
            0.0
        } else if sl * sr > 0.0 {
            centred.signum() * centred.abs().min(3.0 * sl.abs().min(sr.abs()))
        } else if centred == 0.0 {
            0.0
        } else if (sl == 0.0 || sr == 0.0) && !flat_top(&s, i) {
            // edge of a plateau
            0.0
        } else {
            // turning point: bound against the side that shares the slope's sign
            let side = if centred * sl > 0.0 { sl } else { sr };
            limit(centred, side)
        };
    }

    let end = |h0: f64, h1: f64, s0: f64, s1: f64| {
        let raw = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        limit(raw, s0)
    };
    d[0] = end(h[0], h[1], s[0], s[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
    d
}

fn parse_cell(cell: &str, row: u64, column: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| Error::Parse {
        row,
        message: format!("non-numeric {column} cell {cell:?}"),
    })
}

/// Parses a two-column `x_volts,y_volts` CSV. A single non-numeric first row is
/// treated as a header. Row numbers in errors are 1-based file lines.
pub fn parse_tabulated(reader: impl Read) -> Result<TabulatedCurve> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut knots: Vec<(f64, f64)> = Vec::new();
    for (index, record) in rdr.records().enumerate() {
        let record = record?;
        let row = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.len() != 2 {
            return Err(Error::Parse {
                row,
                message: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let x = record[0].trim().parse::<f64>();
        let y = record[1].trim().parse::<f64>();
        if index == 0 && x.is_err() && y.is_err() {
            continue;
        }
        let x = parse_cell(&record[0], row, "x")?;
        let y = parse_cell(&record[1], row, "y")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Parse {
                row,
                message: "non-finite value".into(),
            });
        }
        if let Some(&(prev, _)) = knots.last() {
            if x <= prev {
                let what = if x == prev { "duplicate" } else { "non-monotonic" };
                return Err(Error::Parse {
                    row,
                    message: format!("{what} x = {x} (previous row has {prev})"),
                });
            }
        }
        knots.push((x, y));
    }
    TabulatedCurve::new(&knots)
}

/// Loads a tabulated transfer curve; the map domain is the knot range.
pub fn load_tabulated(path: impl AsRef<Path>) -> Result<MapDescriptor> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(MapDescriptor::tabulated(parse_tabulated(file)?))
}
