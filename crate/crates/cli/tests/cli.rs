use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaogate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(out: &Path, args: &[&str]) -> Output {
    let mut full = vec!["--out", out.to_str().unwrap()];
    full.extend_from_slice(args);
    run(&full)
}

fn ok(out: &Path, args: &[&str]) {
    let o = run_in(out, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn orbit_row_count() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["orbit", "--map", "gnm", "--mu1", "1.0", "--x0", "1.0", "--n", "100"],
    );
    let rows = csv_rows(&dir.path().join("orbit.csv"));
    assert_eq!(rows.len(), 100);
    assert!(dir.path().join("run_config.json").exists());
}

#[test]
fn orbit_reaches_fixed_point() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "orbit",
            "--map",
            "logistic",
            "--r",
            "2",
            "--x0",
            "0.3",
            "--n",
            "100",
            "--transient",
            "99",
        ],
    );
    let rows = csv_rows(&dir.path().join("orbit.csv"));
    assert_eq!(rows.len(), 1);
    let x: f64 = rows[0][1].parse().unwrap();
    assert!((x - 0.5).abs() < 1e-9);
}

#[test]
fn invalid_mu1_names_the_flag() {
    let dir = TempDir::new().unwrap();
    let o = run_in(dir.path(), &["orbit", "--mu1", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--mu1"), "{}", stderr(&o));
}

#[test]
fn seed_outside_domain_names_x0() {
    let dir = TempDir::new().unwrap();
    let o = run_in(dir.path(), &["orbit", "--map", "logistic", "--r", "3", "--x0", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--x0"));
}

#[test]
fn bifurcation_size_contract() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "bifurcation",
            "--axis",
            "mu1",
            "--from",
            "0.6",
            "--to",
            "1.05",
            "--steps",
            "100",
        ],
    );
    assert_eq!(csv_rows(&dir.path().join("bifurcation.csv")).len(), 100 * 3000);
    let script = fs::read_to_string(dir.path().join("bifurcation.gp")).unwrap();
    assert!(script.contains("'bifurcation.csv'"));
}

#[test]
fn lyapunov_sweep_signs() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "lyapunov", "--axis", "mu1", "--from", "0.6", "--to", "1.05", "--steps", "100",
        ],
    );
    let rows: Vec<(f64, f64)> = csv_rows(&dir.path().join("lyapunov.csv"))
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert_eq!(rows.len(), 100);
    let near = |v: f64| {
        rows.iter()
            .min_by(|a, b| (a.0 - v).abs().total_cmp(&(b.0 - v).abs()))
            .unwrap()
            .1
    };
    assert!(near(0.70) < 0.0);
    assert!(near(1.05) > 0.0);
    assert!(fs::read_to_string(dir.path().join("lyapunov.gp"))
        .unwrap()
        .contains("'lyapunov.csv'"));
}

#[test]
fn single_step_sweep_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = run_in(
        dir.path(),
        &[
            "lyapunov", "--axis", "mu1", "--from", "0.6", "--to", "1.05", "--steps", "1",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--steps"));
}

#[test]
fn sweep_requires_axis_and_matching_map() {
    let dir = TempDir::new().unwrap();
    let o = run_in(dir.path(), &["bifurcation", "--from", "0.6", "--to", "1.0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--axis"));
    let o = run_in(
        dir.path(),
        &[
            "bifurcation",
            "--map",
            "logistic",
            "--axis",
            "mu1",
            "--from",
            "0.6",
            "--to",
            "1.0",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gate_search_finds_and() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["gate-search", "--target", "AND"]);
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("gate_search.json")).unwrap()).unwrap();
    let results = v.as_array().unwrap();
    assert!(!results.is_empty());
    assert!(results.iter().all(|r| r["function"] == 1));
}

#[test]
fn gate_search_rejects_out_of_range_id() {
    let dir = TempDir::new().unwrap();
    let o = run_in(dir.path(), &["gate-search", "--target", "16"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--target"));
}

#[test]
fn gate_search_limit_and_order() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["gate-search", "--limit", "3", "--target", "NAND"]);
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("gate_search.json")).unwrap()).unwrap();
    let margins: Vec<f64> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["margin_v"].as_f64().unwrap())
        .collect();
    assert!(margins.len() <= 3 && !margins.is_empty());
    assert!(margins.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn empty_search_is_success() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "--format",
            "csv",
            "gate-search",
            "--target",
            "XOR",
            "--vref",
            "5",
            "--mu2=-0.3,0",
        ],
    );
    let text = fs::read_to_string(dir.path().join("gate_search.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("mu1_mohm,"));
}

#[test]
fn funcspace_dominance() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["funcspace", "--nmu", "10", "--nvref", "5", "--c", "1", "--n-max", "10"],
    );
    let rows = csv_rows(&dir.path().join("funcspace.csv"));
    assert_eq!(rows.len(), 10);
    for r in &rows[1..] {
        let log: Vec<f64> = r[5..9].iter().map(|s| s.parse().unwrap()).collect();
        assert!(log[3] > log[2] && log[3] > log[1] && log[3] > log[0], "row {r:?}");
    }
}

#[test]
fn funcspace_of_ones() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["funcspace", "--n-max", "1"]);
    assert_eq!(
        csv_rows(&dir.path().join("funcspace.csv")),
        vec![vec!["1", "1", "1", "1", "1", "0", "0", "0", "0"]]
    );
}

#[test]
fn funcspace_requires_n_max() {
    let dir = TempDir::new().unwrap();
    let o = run_in(dir.path(), &["funcspace", "--nmu", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--n-max"));
}

#[test]
fn map_dump_samples_domain() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["map-dump", "--map", "logistic", "--r", "4", "--points", "3"],
    );
    assert_eq!(
        csv_rows(&dir.path().join("map_dump.csv")),
        vec![vec!["0", "0"], vec!["0.5", "1"], vec!["1", "0"]]
    );
}

#[test]
fn dumped_map_reloads_as_tabulated() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["map-dump", "--map", "logistic", "--r", "3.9", "--points", "2048"],
    );
    let table = dir.path().join("map_dump.csv");
    let sub = dir.path().join("t");
    ok(
        &sub,
        &[
            "orbit",
            "--map",
            "tabulated",
            "--table",
            table.to_str().unwrap(),
            "--x0",
            "0.3",
            "--n",
            "10",
        ],
    );
    assert_eq!(csv_rows(&sub.join("orbit.csv")).len(), 10);
}

#[test]
fn runtime_failures_exit_1() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.csv");
    let o = run_in(
        dir.path(),
        &["orbit", "--map", "tabulated", "--table", missing.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(1));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = run_in(&blocker.join("sub"), &["funcspace", "--n-max", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run_in(dir.path(), &["orbit", "--bogus", "1"]).status.code(), Some(2));
    assert_eq!(run_in(dir.path(), &["--workers", "0", "orbit"]).status.code(), Some(2));
    assert_eq!(
        run_in(dir.path(), &["orbit", "--transient", "5", "--n", "5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn emitted_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let cases: [&[&str]; 4] = [
        &[
            "orbit",
            "--map",
            "sine",
            "--a",
            "0.9",
            "--n",
            "50",
            "--feedback",
            "gnm",
            "--fb-mu1",
            "0.7",
        ],
        &[
            "lyapunov",
            "--axis",
            "r",
            "--map",
            "logistic",
            "--from",
            "3",
            "--to",
            "4",
            "--steps",
            "5",
            "--lyapunov-iterations",
            "2000",
        ],
        &[
            "gate-search",
            "--target",
            "XNOR",
            "--mu1",
            "0.95:1.05:3",
            "--cb",
            "0",
            "--limit",
            "4",
        ],
        &["funcspace", "--nmu", "3", "--nmu2", "4", "--n-max", "6"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let out = dir.path().join(i.to_string());
        ok(&out, args);
        let cfg = out.join("run_config.json");
        let first = fs::read_to_string(&cfg).unwrap();
        let outputs: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        let before: Vec<Vec<u8>> = outputs.iter().map(|p| fs::read(p).unwrap()).collect();

        // re-run from the emitted file alone
        let o = run(&["--config", cfg.to_str().unwrap(), args[0]]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(fs::read_to_string(&cfg).unwrap(), first);
        let after: Vec<Vec<u8>> = outputs.iter().map(|p| fs::read(p).unwrap()).collect();
        assert_eq!(before, after, "outputs differ for {args:?}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["orbit", "--map", "logistic", "--r", "3.5", "--n", "40"]);
    let cfg = dir.path().join("run_config.json");
    let other = dir.path().join("b");
    let o = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        other.to_str().unwrap(),
        "orbit",
        "--n",
        "20",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(other.join("run_config.json")).unwrap()).unwrap();
    assert_eq!(v["command"]["orbit"]["n"], 20);
    assert_eq!(v["command"]["orbit"]["map"]["r"], 3.5);
    assert_eq!(csv_rows(&other.join("orbit.csv")).len(), 20);
}

#[test]
fn bad_config_files_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    };
    let unknown = write(
        "unknown.json",
        r#"{"schema_version":1,"out":"o","command":{"orbit":{"nn":3}}}"#,
    );
    let version = write(
        "version.json",
        r#"{"schema_version":99,"out":"o","command":{"orbit":{}}}"#,
    );
    let other = write(
        "other.json",
        r#"{"schema_version":1,"out":"o","command":{"funcspace":{"n_max":2}}}"#,
    );
    for (path, sub) in [(&unknown, "orbit"), (&version, "orbit"), (&other, "orbit")] {
        let o = run(&["--config", path.to_str().unwrap(), sub]);
        assert_eq!(o.status.code(), Some(2), "{}", path.display());
    }
}

#[test]
fn outputs_do_not_depend_on_workers() {
    let dir = TempDir::new().unwrap();
    let cases: [&[&str]; 4] = [
        &["orbit", "--mu1", "1.03", "--n", "500"],
        &[
            "bifurcation",
            "--axis",
            "mu1",
            "--from",
            "0.8",
            "--to",
            "1.05",
            "--steps",
            "30",
            "--retained",
            "200",
        ],
        &[
            "lyapunov",
            "--axis",
            "mu2",
            "--from=-0.3",
            "--to",
            "0.3",
            "--steps",
            "30",
            "--lyapunov-iterations",
            "5000",
        ],
        &["gate-search", "--target", "XOR", "--limit", "50"],
    ];
    for args in cases {
        let mut runs = Vec::new();
        for w in ["1", "4", "8"] {
            let out = dir.path().join(format!("{}-{w}", args[0]));
            let mut full = vec!["--workers", w];
            full.extend_from_slice(args);
            ok(&out, &full);
            let mut files: Vec<_> = fs::read_dir(&out)
                .unwrap()
                .map(|e| e.unwrap().path())
                .filter(|p| p.file_name().unwrap() != "run_config.json")
                .collect();
            files.sort();
            runs.push(files.iter().map(|p| fs::read(p).unwrap()).collect::<Vec<_>>());
        }
        assert_eq!(runs[0], runs[1], "{args:?}");
        assert_eq!(runs[0], runs[2], "{args:?}");
    }
}

#[test]
fn json_format_is_valid() {
    let dir = TempDir::new().unwrap();
    for (args, file) in [
        (&["orbit", "--n", "10"][..], "orbit.json"),
        (&["funcspace", "--nmu", "10", "--n-max", "3"][..], "funcspace.json"),
        (&["map-dump", "--points", "4"][..], "map_dump.json"),
        (
            &[
                "bifurcation",
                "--axis",
                "mu1",
                "--from",
                "0.6",
                "--to",
                "1",
                "--steps",
                "3",
                "--retained",
                "4",
            ][..],
            "bifurcation.json",
        ),
    ] {
        let mut full = vec!["--format", "json"];
        full.extend_from_slice(args);
        ok(dir.path(), &full);
        let text = fs::read_to_string(dir.path().join(file)).unwrap();
        serde_json::from_str::<Value>(&text).unwrap_or_else(|e| panic!("{file}: {e}"));
    }
}
