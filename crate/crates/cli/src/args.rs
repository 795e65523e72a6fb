//! Command-line flags. Every flag is optional here so that values from a
//! `--config` file survive unless explicitly overridden.

use std::path::PathBuf;

use chaogate_core::gate::AxisSpec;
use clap::{Args, Parser, Subcommand};

use crate::config::{
    FeedbackKind, FeedbackParams, Format, GridParams, MapDumpParams, MapName, MapParams, OrbitParams, SearchParams,
    SpaceParamsFile, SweepParams,
};

#[derive(Debug, Parser)]
#[command(
    name = "chaogate",
    version,
    about = "Chaotic-map oscillators, sweeps and chaos-based logic gates"
)]
pub struct Cli {
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output directory (default: `out`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads for sweeps and searches (default: one per core).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Data file format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Iterate a map and write the orbit.
    #[command(allow_negative_numbers = true)]
    Orbit(OrbitArgs),
    /// Steady-state samples across a parameter sweep.
    #[command(allow_negative_numbers = true)]
    Bifurcation(SweepArgs),
    /// Lyapunov exponent across a parameter sweep.
    #[command(allow_negative_numbers = true)]
    Lyapunov(SweepArgs),
    /// Search a parameter grid for configurations realising a logic function.
    #[command(allow_negative_numbers = true)]
    GateSearch(SearchArgs),
    /// Compare functionality-space sizes over a range of iteration counts.
    Funcspace(SpaceArgs),
    /// Sample a map's transfer curve.
    #[command(allow_negative_numbers = true)]
    MapDump(MapDumpArgs),
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(long, value_enum)]
    pub map: Option<MapName>,
    /// Logistic parameter.
    #[arg(long)]
    pub r: Option<f64>,
    /// Tent slope.
    #[arg(long)]
    pub m: Option<f64>,
    /// Sine amplitude.
    #[arg(long)]
    pub a: Option<f64>,
    /// Transimpedance gain (MΩ).
    #[arg(long)]
    pub mu1: Option<f64>,
    /// n-channel top-gate bias (V).
    #[arg(long)]
    pub mu2: Option<f64>,
    /// p-channel top-gate bias (V).
    #[arg(long)]
    pub mu3: Option<f64>,
    /// Transfer-curve CSV for `--map tabulated`.
    #[arg(long, value_name = "FILE")]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeedbackArgs {
    #[arg(long, value_enum)]
    pub feedback: Option<FeedbackKind>,
    #[arg(long)]
    pub fb_mu1: Option<f64>,
    #[arg(long)]
    pub fb_mu2: Option<f64>,
    #[arg(long)]
    pub fb_mu3: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub feedback: FeedbackArgs,
    /// Seed (V); defaults to the domain midpoint.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Total iterations.
    #[arg(long)]
    pub n: Option<usize>,
    /// Leading iterations to discard.
    #[arg(long)]
    pub transient: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub feedback: FeedbackArgs,
    /// Swept parameter: mu1, mu2, mu3, r, m or a.
    #[arg(long)]
    pub axis: Option<String>,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub transient: Option<usize>,
    /// Samples kept per axis value.
    #[arg(long)]
    pub retained: Option<usize>,
    /// Iterations averaged per exponent.
    #[arg(long)]
    pub lyapunov_iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Mnemonic (AND, OR, XOR, NAND, NOR, XNOR) or decimal function id.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub min_margin: Option<f64>,
    #[arg(long)]
    pub limit: Option<usize>,
    /// Grid axis as `a,b,c` or `from:to:steps`.
    #[arg(long, value_parser = parse_axis, allow_hyphen_values = true)]
    pub mu1: Option<AxisSpec>,
    #[arg(long, value_parser = parse_axis, allow_hyphen_values = true)]
    pub mu2: Option<AxisSpec>,
    #[arg(long, value_parser = parse_axis, allow_hyphen_values = true)]
    pub mu3: Option<AxisSpec>,
    #[arg(long, value_parser = parse_axis, allow_hyphen_values = true)]
    pub vref: Option<AxisSpec>,
    /// Control-bit levels, e.g. `0,1`.
    #[arg(long, value_delimiter = ',')]
    pub cb: Option<Vec<u8>>,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Keep configurations whose orbits saturate.
    #[arg(long)]
    pub allow_clipped: bool,
    #[command(flatten)]
    pub feedback: FeedbackArgs,
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    /// Control bits.
    #[arg(long)]
    pub c: Option<u32>,
    #[arg(long)]
    pub nmu: Option<u64>,
    #[arg(long)]
    pub nmu1: Option<u64>,
    #[arg(long)]
    pub nmu2: Option<u64>,
    #[arg(long)]
    pub nmu3: Option<u64>,
    #[arg(long)]
    pub nvref: Option<u64>,
    #[arg(long)]
    pub n_min: Option<u32>,
    #[arg(long)]
    pub n_max: Option<u32>,
}

#[derive(Debug, Args)]
pub struct MapDumpArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long)]
    pub points: Option<usize>,
}

fn parse_axis(s: &str) -> Result<AxisSpec, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("{t:?} is not a number"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [from, to, steps] => Ok(AxisSpec::Linspace {
            from: num(from)?,
            to: num(to)?,
            steps: steps
                .trim()
                .parse()
                .map_err(|_| format!("{steps:?} is not a step count"))?,
        }),
        [list] => list
            .split(',')
            .map(num)
            .collect::<Result<Vec<_>, _>>()
            .map(AxisSpec::Values),
        _ => Err("expected `a,b,c` or `from:to:steps`".into()),
    }
}

fn set<T>(dst: &mut T, src: Option<T>) {
    if let Some(v) = src {
        *dst = v;
    }
}

impl MapArgs {
    pub fn apply(self, p: &mut MapParams) {
        set(&mut p.kind, self.map);
        set(&mut p.r, self.r);
        set(&mut p.m, self.m);
        set(&mut p.a, self.a);
        set(&mut p.mu1, self.mu1);
        set(&mut p.mu2, self.mu2);
        set(&mut p.mu3, self.mu3);
        if self.table.is_some() {
            p.table = self.table;
        }
    }
}

impl FeedbackArgs {
    pub fn apply(self, p: &mut FeedbackParams) {
        set(&mut p.kind, self.feedback);
        set(&mut p.mu1, self.fb_mu1);
        set(&mut p.mu2, self.fb_mu2);
        set(&mut p.mu3, self.fb_mu3);
    }
}

impl OrbitArgs {
    pub fn apply(self, p: &mut OrbitParams) {
        self.map.apply(&mut p.map);
        self.feedback.apply(&mut p.feedback);
        if self.x0.is_some() {
            p.x0 = self.x0;
        }
        set(&mut p.n, self.n);
        set(&mut p.transient, self.transient);
    }
}

impl SweepArgs {
    pub fn apply(self, p: &mut SweepParams) {
        self.map.apply(&mut p.map);
        self.feedback.apply(&mut p.feedback);
        for (dst, src) in [(&mut p.from, self.from), (&mut p.to, self.to), (&mut p.x0, self.x0)] {
            if src.is_some() {
                *dst = src;
            }
        }
        if self.axis.is_some() {
            p.axis = self.axis;
        }
        set(&mut p.steps, self.steps);
        set(&mut p.transient, self.transient);
        set(&mut p.retained, self.retained);
        set(&mut p.lyapunov_iterations, self.lyapunov_iterations);
    }
}

impl SearchArgs {
    pub fn apply(self, p: &mut SearchParams) {
        if self.target.is_some() {
            p.target = self.target;
        }
        set(&mut p.min_margin, self.min_margin);
        set(&mut p.limit, self.limit);
        let g: &mut GridParams = &mut p.grid;
        set(&mut g.mu1, self.mu1);
        set(&mut g.mu2, self.mu2);
        set(&mut g.mu3, self.mu3);
        set(&mut g.vref, self.vref);
        set(&mut g.cb, self.cb);
        set(&mut g.n_min, self.n_min);
        set(&mut g.n_max, self.n_max);
        g.allow_clipped |= self.allow_clipped;
        self.feedback.apply(&mut p.feedback);
    }
}

impl SpaceArgs {
    pub fn apply(self, p: &mut SpaceParamsFile) {
        set(&mut p.c, self.c);
        set(&mut p.nmu, self.nmu);
        set(&mut p.nvref, self.nvref);
        set(&mut p.n_min, self.n_min);
        for (dst, src) in [
            (&mut p.nmu1, self.nmu1),
            (&mut p.nmu2, self.nmu2),
            (&mut p.nmu3, self.nmu3),
        ] {
            if src.is_some() {
                *dst = src;
            }
        }
        if self.n_max.is_some() {
            p.n_max = self.n_max;
        }
    }
}

impl MapDumpArgs {
    pub fn apply(self, p: &mut MapDumpParams) {
        self.map.apply(&mut p.map);
        set(&mut p.points, self.points);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_lists_and_ranges() {
        assert_eq!(
            parse_axis("-0.3,0,0.3").unwrap(),
            AxisSpec::Values(vec![-0.3, 0.0, 0.3])
        );
        assert_eq!(
            parse_axis("0.9:1.05:16").unwrap(),
            AxisSpec::Linspace {
                from: 0.9,
                to: 1.05,
                steps: 16
            }
        );
        assert!(parse_axis("1:2").is_err());
        assert!(parse_axis("a,b").is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let mut p = OrbitParams {
            n: 50,
            transient: 10,
            ..OrbitParams::default()
        };
        let cli = Cli::parse_from(["chaogate", "orbit", "--n", "200", "--mu1", "-1"]);
        let Sub::Orbit(args) = cli.command else { panic!() };
        args.apply(&mut p);
        assert_eq!((p.n, p.transient, p.map.mu1), (200, 10, -1.0));
    }
}
