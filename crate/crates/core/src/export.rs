//! File emitters: CSV data, JSON search results and gnuplot scripts.
//!
//! Floats are written with Rust's shortest round-trip formatting, so emitted
//! files are byte-identical for identical results.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::{Axis, BifurcationData, LyapunovCurve};
use crate::error::Result;
use crate::funcspace::SpaceTable;
use crate::gate::SearchResult;
use crate::map::MapDescriptor;
use crate::oscillator::Orbit;

/// `k,x_volts`, with `k` starting at the transient count.
pub fn write_orbit_csv(mut w: impl Write, orbit: &Orbit) -> Result<()> {
    writeln!(w, "k,x_volts")?;
    for (i, x) in orbit.samples.iter().enumerate() {
        writeln!(w, "{},{}", orbit.transient_count + i, x)?;
    }
    Ok(())
}

/// `axis_value,sample`, one row per retained sample.
pub fn write_bifurcation_csv(mut w: impl Write, data: &BifurcationData) -> Result<()> {
    writeln!(w, "axis_value,sample")?;
    for row in &data.rows {
        for s in &row.samples {
            writeln!(w, "{},{}", row.axis_value, s)?;
        }
    }
    Ok(())
}

/// `axis_value,lambda`; superstable points are written as `-inf`.
pub fn write_lyapunov_csv(mut w: impl Write, curve: &LyapunovCurve) -> Result<()> {
    writeln!(w, "axis_value,lambda")?;
    for p in &curve.rows {
        writeln!(w, "{},{}", p.axis_value, p.lambda)?;
    }
    Ok(())
}

/// `x_volts,y_volts` samples of `f` over its domain; loadable as a tabulated map.
pub fn write_transfer_csv(mut w: impl Write, map: &MapDescriptor, points: usize) -> Result<()> {
    let d = map.domain();
    writeln!(w, "x_volts,y_volts")?;
    for i in 0..points {
        let x = if i + 1 == points {
            d.hi()
        } else {
            d.lo() + d.width() * i as f64 / (points - 1) as f64
        };
        writeln!(w, "{},{}", x, map.eval_map(x)?)?;
    }
    Ok(())
}

fn axis_label(axis: Axis) -> String {
    match axis.unit() {
        "" => axis.name().to_string(),
        unit => format!("{} ({unit})", axis.name()),
    }
}

pub fn bifurcation_script(data_file: &str, axis: Axis) -> String {
    format!(
        "set datafile separator ','\n\
         set key off\n\
         set xlabel '{}'\n\
         set ylabel 'x (V)'\n\
         set title 'Bifurcation diagram'\n\
         plot '{data_file}' using 1:2 every ::1 with dots lc rgb 'black'\n",
        axis_label(axis)
    )
}

pub fn lyapunov_script(data_file: &str, axis: Axis) -> String {
    format!(
        "set datafile separator ','\n\
         set key off\n\
         set xlabel '{}'\n\
         set ylabel 'lambda (nats/iteration)'\n\
         set title 'Lyapunov exponent'\n\
         set xzeroaxis lt -1\n\
         plot '{data_file}' using 1:2 every ::1 with lines lc rgb 'blue'\n",
        axis_label(axis)
    )
}

pub fn space_script(data_file: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key left top\n\
         set xlabel 'iterations n'\n\
         set ylabel 'log10 functionality space'\n\
         plot for [i=6:9] '{data_file}' using 1:i every ::1 with linespoints title columnheader(i)\n"
    )
}

/// Flat record used for search-result JSON and CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub mu1_mohm: f64,
    pub mu2_v: f64,
    pub mu3_v: f64,
    pub cb: u8,
    pub vref_v: f64,
    pub n: usize,
    pub function: u32,
    pub margin_v: f64,
}

impl From<&SearchResult> for SearchRecord {
    fn from(r: &SearchResult) -> Self {
        let p = r.params();
        Self {
            mu1_mohm: p.mu1,
            mu2_v: p.mu2,
            mu3_v: p.mu3,
            cb: r.config.cb,
            vref_v: r.config.vref,
            n: r.config.n,
            function: r.function.value(),
            margin_v: r.margin,
        }
    }
}

pub fn write_search_json(mut w: impl Write, results: &[SearchResult]) -> Result<()> {
    let records: Vec<SearchRecord> = results.iter().map(SearchRecord::from).collect();
    serde_json::to_writer_pretty(&mut w, &records)?;
    writeln!(w)?;
    Ok(())
}

pub fn write_search_csv(w: impl Write, results: &[SearchResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if results.is_empty() {
        out.write_record([
            "mu1_mohm", "mu2_v", "mu3_v", "cb", "vref_v", "n", "function", "margin_v",
        ])?;
    }
    for r in results {
        out.serialize(SearchRecord::from(r))?;
    }
    out.flush()?;
    Ok(())
}

/// `n,f1,f2,f3,f4,log10_f1,log10_f2,log10_f3,log10_f4`
pub fn write_space_csv(mut w: impl Write, table: &SpaceTable) -> Result<()> {
    writeln!(w, "n,f1,f2,f3,f4,log10_f1,log10_f2,log10_f3,log10_f4")?;
    for row in &table.rows {
        let [a, b, c, d] = &row.f;
        let [la, lb, lc, ld] = row.log10;
        writeln!(w, "{},{a},{b},{c},{d},{la},{lb},{lc},{ld}", row.n)?;
    }
    Ok(())
}
