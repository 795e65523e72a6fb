use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chaogate_core::export::{
    bifurcation_script, lyapunov_script, space_script, write_bifurcation_csv, write_lyapunov_csv, write_orbit_csv,
    write_search_csv, write_search_json, write_space_csv, write_transfer_csv,
};
use chaogate_core::{
    bifurcation_sweep, compare_spaces, iterate, load_tabulated, lyapunov_sweep, search_configurations, Axis, Error,
    FunctionId, GnmParams, MapDescriptor, MapFamily, SearchGrid, SpaceParams, SweepSpec, Topology,
};
use serde_json::json;

use crate::config::{
    Command, FeedbackKind, FeedbackParams, Format, MapDumpParams, MapName, MapParams, OrbitParams, RunConfig,
    SearchParams, SpaceParamsFile, SweepParams,
};
use crate::error::CliError;

type CliResult<T> = Result<T, CliError>;

/// Files written by one command.
pub struct Written(pub Vec<PathBuf>);

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn emit(
    out: &Path,
    name: &str,
    files: &mut Vec<PathBuf>,
    body: impl FnOnce(&mut BufWriter<File>) -> CliResult<()>,
) -> CliResult<()> {
    let path = out.join(name);
    let mut w = create(&path)?;
    body(&mut w)?;
    w.flush()
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    files.push(path);
    Ok(())
}

fn emit_json(out: &Path, name: &str, files: &mut Vec<PathBuf>, value: &serde_json::Value) -> CliResult<()> {
    emit(out, name, files, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::Runtime(e.to_string()))?;
        writeln!(w).map_err(|e| CliError::Runtime(e.to_string()))
    })
}

fn build_map(p: &MapParams) -> CliResult<MapDescriptor> {
    Ok(match p.kind {
        MapName::Logistic => MapDescriptor::logistic(p.r)?,
        MapName::Tent => MapDescriptor::tent(p.m)?,
        MapName::Sine => MapDescriptor::sine(p.a)?,
        MapName::Gnm => MapDescriptor::gnm(GnmParams::new(p.mu1, p.mu2, p.mu3), p.constants)?,
        MapName::Tabulated => {
            let path = p
                .table
                .as_ref()
                .ok_or_else(|| CliError::Usage("--table is required with --map tabulated".into()))?;
            load_tabulated(path)?
        }
    })
}

fn family(p: &MapParams) -> CliResult<MapFamily> {
    Ok(match p.kind {
        MapName::Logistic => MapFamily::Logistic { r: p.r },
        MapName::Tent => MapFamily::Tent { m: p.m },
        MapName::Sine => MapFamily::Sine { a: p.a },
        MapName::Gnm => MapFamily::Gnm {
            params: GnmParams::new(p.mu1, p.mu2, p.mu3),
            constants: p.constants,
        },
        MapName::Tabulated => return Err(CliError::flag("--map", "a tabulated map has no parameter to sweep")),
    })
}

fn topology(fb: &FeedbackParams, map: &MapParams) -> CliResult<Topology> {
    match fb.kind {
        FeedbackKind::Buffer => Ok(Topology::BufferFeedback),
        FeedbackKind::Gnm => MapDescriptor::gnm(GnmParams::new(fb.mu1, fb.mu2, fb.mu3), map.constants)
            .map(Topology::MapFeedback)
            .map_err(|e| match e {
                Error::InvalidParameter { name, reason } => {
                    CliError::flag(&format!("--fb-{}", name.replace('/', "/--fb-")), reason)
                }
                other => other.into(),
            }),
    }
}

fn orbit(p: &OrbitParams, format: Format, out: &Path) -> CliResult<Written> {
    if p.n == 0 {
        return Err(CliError::flag("--n", "must be >= 1"));
    }
    if p.transient >= p.n {
        return Err(CliError::flag(
            "--transient",
            format!("must be below --n ({}), got {}", p.n, p.transient),
        ));
    }
    let map = build_map(&p.map)?;
    let topo = topology(&p.feedback, &p.map)?;
    let x0 = p.x0.unwrap_or_else(|| map.domain().midpoint());
    let orbit = iterate(&map, &topo, x0, p.n, p.transient)?;
    if orbit.clipped {
        eprintln!("warning: orbit saturated at the map cutoff");
    }
    let mut files = Vec::new();
    match format {
        Format::Csv => emit(out, "orbit.csv", &mut files, |w| Ok(write_orbit_csv(w, &orbit)?))?,
        Format::Json => {
            let rows: Vec<_> = orbit
                .samples
                .iter()
                .enumerate()
                .map(|(i, x)| json!({"k": orbit.transient_count + i, "x_volts": x}))
                .collect();
            emit_json(out, "orbit.json", &mut files, &json!(rows))?
        }
    }
    Ok(Written(files))
}

fn sweep_spec(p: &SweepParams) -> CliResult<SweepSpec> {
    let axis: Axis = p
        .axis
        .as_deref()
        .ok_or_else(|| CliError::Usage("missing required --axis".into()))?
        .parse()
        .map_err(|e: Error| CliError::flag("--axis", e))?;
    let from = p
        .from
        .ok_or_else(|| CliError::Usage("missing required --from".into()))?;
    let to = p.to.ok_or_else(|| CliError::Usage("missing required --to".into()))?;
    let mut spec = SweepSpec::new(family(&p.map)?, axis, (from, to), p.steps);
    spec.x0 = p.x0;
    spec.transient = p.transient;
    spec.retained = p.retained;
    spec.lyapunov_iterations = p.lyapunov_iterations;
    spec.topology = topology(&p.feedback, &p.map)?;
    spec.validate()?;
    Ok(spec)
}

fn bifurcation(p: &SweepParams, format: Format, out: &Path) -> CliResult<Written> {
    let spec = sweep_spec(p)?;
    let data = bifurcation_sweep(&spec)?;
    let clipped = data.rows.iter().filter(|r| r.clipped).count();
    if clipped > 0 {
        eprintln!(
            "warning: {clipped} of {} axis values saturated at the map cutoff",
            data.rows.len()
        );
    }
    let mut files = Vec::new();
    match format {
        Format::Csv => {
            emit(out, "bifurcation.csv", &mut files, |w| {
                Ok(write_bifurcation_csv(w, &data)?)
            })?;
            emit(out, "bifurcation.gp", &mut files, |w| {
                w.write_all(bifurcation_script("bifurcation.csv", spec.axis).as_bytes())
                    .map_err(|e| CliError::Runtime(e.to_string()))
            })?;
        }
        Format::Json => {
            let rows: Vec<_> = data
                .rows
                .iter()
                .map(|r| json!({"axis_value": r.axis_value, "samples": r.samples, "clipped": r.clipped}))
                .collect();
            emit_json(
                out,
                "bifurcation.json",
                &mut files,
                &json!({"axis": spec.axis.name(), "rows": rows}),
            )?
        }
    }
    Ok(Written(files))
}

fn lyapunov(p: &SweepParams, format: Format, out: &Path) -> CliResult<Written> {
    let spec = sweep_spec(p)?;
    let curve = lyapunov_sweep(&spec)?;
    let noisy = curve.rows.iter().filter(|r| r.clipped_fraction > 0.01).count();
    if noisy > 0 {
        eprintln!("warning: {noisy} axis values clipped on more than 1% of steps");
    }
    match curve.chaos_onset() {
        Some(v) => println!("first positive exponent at {} = {v}", spec.axis.name()),
        None => println!("no positive exponent in the sweep"),
    }
    let mut files = Vec::new();
    match format {
        Format::Csv => {
            emit(out, "lyapunov.csv", &mut files, |w| Ok(write_lyapunov_csv(w, &curve)?))?;
            emit(out, "lyapunov.gp", &mut files, |w| {
                w.write_all(lyapunov_script("lyapunov.csv", spec.axis).as_bytes())
                    .map_err(|e| CliError::Runtime(e.to_string()))
            })?;
        }
        Format::Json => {
            // JSON has no infinities; superstable points are written as null
            let rows: Vec<_> = curve
                .rows
                .iter()
                .map(
                    |r| json!({"axis_value": r.axis_value, "lambda": r.lambda, "clipped_fraction": r.clipped_fraction}),
                )
                .collect();
            emit_json(
                out,
                "lyapunov.json",
                &mut files,
                &json!({"axis": spec.axis.name(), "rows": rows}),
            )?
        }
    }
    Ok(Written(files))
}

fn gate_search(p: &SearchParams, format: Format, out: &Path) -> CliResult<Written> {
    let g = &p.grid;
    let raw = p
        .target
        .as_deref()
        .ok_or_else(|| CliError::Usage("missing required --target".into()))?;
    let target = FunctionId::parse(raw, g.dac.data_inputs()).map_err(|e| match e {
        Error::InvalidParameter { reason, .. } => CliError::flag("--target", reason),
        other => other.into(),
    })?;
    if !(p.min_margin.is_finite() && p.min_margin >= 0.0) {
        return Err(CliError::flag(
            "--min-margin",
            format!("must be finite and >= 0, got {}", p.min_margin),
        ));
    }
    let grid = SearchGrid {
        mu1: g.mu1.clone(),
        mu2: g.mu2.clone(),
        mu3: g.mu3.clone(),
        cb: g.cb.clone(),
        vref: g.vref.clone(),
        n_min: g.n_min,
        n_max: g.n_max,
        constants: g.constants,
        dac: g.dac,
        topology: topology(
            &p.feedback,
            &MapParams {
                constants: g.constants,
                ..MapParams::default()
            },
        )?,
        allow_clipped: g.allow_clipped,
        cap: g.cap,
    };
    let results = search_configurations(target, &grid, p.min_margin, p.limit)?;
    println!(
        "{} configurations realise {target} over {} grid cells",
        results.len(),
        grid.size()
    );
    let mut files = Vec::new();
    match format {
        Format::Json => emit(out, "gate_search.json", &mut files, |w| {
            Ok(write_search_json(w, &results)?)
        })?,
        Format::Csv => emit(out, "gate_search.csv", &mut files, |w| {
            Ok(write_search_csv(w, &results)?)
        })?,
    }
    Ok(Written(files))
}

fn funcspace(p: &SpaceParamsFile, format: Format, out: &Path) -> CliResult<Written> {
    let n_max = p
        .n_max
        .ok_or_else(|| CliError::Usage("missing required --n-max".into()))?;
    if p.n_min == 0 || p.n_min > n_max {
        return Err(CliError::flag(
            "--n-min",
            format!("need 1 <= --n-min <= --n-max, got {}..={n_max}", p.n_min),
        ));
    }
    let params = SpaceParams {
        c: p.c,
        n_mu: p.nmu,
        n_mu1: p.nmu1.unwrap_or(p.nmu),
        n_mu2: p.nmu2.unwrap_or(p.nmu),
        n_mu3: p.nmu3.unwrap_or(p.nmu),
        n_vref: p.nvref,
        n: 1,
    };
    let table = compare_spaces(&params, p.n_min..=n_max)?;
    let mut files = Vec::new();
    match format {
        Format::Csv => {
            emit(out, "funcspace.csv", &mut files, |w| Ok(write_space_csv(w, &table)?))?;
            emit(out, "funcspace.gp", &mut files, |w| {
                w.write_all(space_script("funcspace.csv").as_bytes())
                    .map_err(|e| CliError::Runtime(e.to_string()))
            })?;
        }
        Format::Json => {
            // exact counts as decimal strings; they routinely exceed 2^64
            let rows: Vec<_> = table
                .rows
                .iter()
                .map(|r| {
                    let f: Vec<String> = r.f.iter().map(|v| v.to_string()).collect();
                    json!({"n": r.n, "f": f, "log10": r.log10})
                })
                .collect();
            emit_json(out, "funcspace.json", &mut files, &json!(rows))?
        }
    }
    Ok(Written(files))
}

fn map_dump(p: &MapDumpParams, format: Format, out: &Path) -> CliResult<Written> {
    if p.points < 2 {
        return Err(CliError::flag("--points", format!("must be >= 2, got {}", p.points)));
    }
    let map = build_map(&p.map)?;
    let mut files = Vec::new();
    match format {
        Format::Csv => emit(out, "map_dump.csv", &mut files, |w| {
            Ok(write_transfer_csv(w, &map, p.points)?)
        })?,
        Format::Json => {
            let d = map.domain();
            let last = (p.points - 1) as f64;
            let rows = (0..p.points)
                .map(|i| {
                    let x = if i + 1 == p.points {
                        d.hi()
                    } else {
                        d.lo() + d.width() * i as f64 / last
                    };
                    Ok(json!({"x_volts": x, "y_volts": map.eval_map(x)?}))
                })
                .collect::<CliResult<Vec<_>>>()?;
            emit_json(out, "map_dump.json", &mut files, &json!(rows))?
        }
    }
    Ok(Written(files))
}

fn dispatch(cfg: &RunConfig) -> CliResult<Written> {
    let out = cfg.out.as_path();
    let fmt = |natural: Format| cfg.format.unwrap_or(natural);
    match &cfg.command {
        Command::Orbit(p) => orbit(p, fmt(Format::Csv), out),
        Command::Bifurcation(p) => bifurcation(p, fmt(Format::Csv), out),
        Command::Lyapunov(p) => lyapunov(p, fmt(Format::Csv), out),
        Command::GateSearch(p) => gate_search(p, fmt(Format::Json), out),
        Command::Funcspace(p) => funcspace(p, fmt(Format::Csv), out),
        Command::MapDump(p) => map_dump(p, fmt(Format::Csv), out),
    }
}

/// Runs the configured command and records the configuration beside its outputs.
pub fn run(cfg: &RunConfig) -> CliResult<Written> {
    if cfg.workers == Some(0) {
        return Err(CliError::flag("--workers", "must be >= 1"));
    }
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::Runtime(format!("{}: {e}", cfg.out.display())))?;
    let mut written = match cfg.workers {
        Some(n) => chaogate_core::with_workers(n, || dispatch(cfg))??,
        None => dispatch(cfg)?,
    };
    let path = cfg.out.join(crate::config::CONFIG_FILE);
    cfg.save(&path)?;
    written.0.push(path);
    Ok(written)
}
