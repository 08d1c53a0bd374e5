use std::path::Path;
use std::process::{Command, Output};

use cfmm::io::{parse_boundary_csv, BoundaryMeta};

fn cfmm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfmm"))
        .args(args)
        .current_dir(dir)
        .env_remove("CFMM_LOG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn derive_power_writes_hyperbola_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = cfmm(&["derive", "--family", "power", "--w", "0.5", "--out", "sqrt.csv"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let points = parse_boundary_csv(&read(&dir.path().join("sqrt.csv"))).unwrap();
    assert!(points.len() >= 512);
    for (r1, r2) in &points {
        assert!((r1 * r2 - 0.25).abs() <= 1e-10, "{r1} * {r2}");
    }
    let meta = BoundaryMeta::read(&dir.path().join("sqrt.meta.json")).unwrap();
    assert_eq!(meta.family, "power");
    assert_eq!(meta.construction, "traced");
    assert_eq!(meta.rows, points.len());
    assert_eq!(meta.grid.unwrap().points, 512);
}

#[test]
fn derive_linear_is_a_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = cfmm(&["derive", "--family", "linear", "--a", "1,2"], dir.path());
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "R1,R2\n1,2\n");
    assert!(stderr(&out).contains("null trade"), "{}", stderr(&out));
}

#[test]
fn derive_reports_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let missing = cfmm(&["derive", "--family", "power"], dir.path());
    assert_eq!(code(&missing), 2);
    assert!(stderr(&missing).contains("`w`"));
    assert_eq!(code(&cfmm(&["derive"], dir.path())), 2);
    assert_eq!(code(&cfmm(&["derive", "--family", "cubic"], dir.path())), 2);
    assert_eq!(code(&cfmm(&["derive", "--params", "nope.json"], dir.path())), 2);
    std::fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    assert_eq!(code(&cfmm(&["derive", "--params", "bad.json"], dir.path())), 2);
    let traced_quadratic = cfmm(
        &["derive", "--family", "quadratic", "--curvature", "1", "--a", "2", "--construction", "traced"],
        dir.path(),
    );
    assert_eq!(code(&traced_quadratic), 1);
    assert!(stderr(&traced_quadratic).contains("not consistent"));
}

#[test]
fn derive_from_params_file_with_aliases() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("put.json"),
        r#"{"family": "perpetual_put", "params": {"K": 1, "sigma": 0.25, "r": 0.1}, "n": 2}"#,
    )
    .unwrap();
    let out = cfmm(&["derive", "--params", "put.json", "--construction", "closed", "--out", "put.csv"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let points = parse_boundary_csv(&read(&dir.path().join("put.csv"))).unwrap();
    let (first, last) = (points[0], points[points.len() - 1]);
    assert!(first.0 < 1e-6 && (first.1 - 1.0).abs() < 1e-6, "{first:?}");
    assert!((last.0 - 1.0).abs() < 1e-12 && last.1.abs() < 1e-12, "{last:?}");
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bs = cfmm(
        &["verify", "--family", "bs_covered_call", "--strike", "1", "--sigma", "0.1", "--tau", "10", "--out", "rt.csv"],
        dir.path(),
    );
    assert_eq!(code(&bs), 0, "{}", stdout(&bs));
    assert!(stdout(&bs).contains("result: PASS"));
    let report = read(&dir.path().join("rt.csv"));
    assert!(report.starts_with("c1,c2,target,forward,rel_error\n"));
    assert_eq!(report.lines().count(), 257);

    let quad = cfmm(&["verify", "--family", "quadratic", "--curvature", "1", "--a", "2", "--b", "0.5"], dir.path());
    assert_eq!(code(&quad), 1);
    let text = stdout(&quad);
    assert!(text.contains("result: FAIL") && text.contains("max_rel_error"));
    let table: Vec<&str> = text.lines().skip_while(|l| !l.contains(" gap ")).skip(1).collect();
    assert!(!table.is_empty());
    for line in table.iter().filter(|l| !l.starts_with("...")) {
        let cols: Vec<f64> = line.split_whitespace().map(|x| x.parse().unwrap()).collect();
        assert!(cols[0] > 2.0, "failure below a/A: {line}");
        assert!(cols[3] >= 0.0, "negative gap: {line}");
    }

    assert_eq!(code(&cfmm(&["verify", "--family", "log_contract", "--k", "1", "--tol", "0"], dir.path())), 2);
    assert_eq!(code(&cfmm(&["verify", "--family", "log_contract", "--k", "1", "--range", "5,1"], dir.path())), 2);
}

#[test]
fn verify_three_coin_mean() {
    let dir = tempfile::tempdir().unwrap();
    let out = cfmm(&["verify", "--family", "power", "--w", "0.2,0.3,0.5", "--grid", "8"], dir.path());
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn simulate_log_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = cfmm(
        &[
            "simulate",
            "--family",
            "log_contract",
            "--k",
            "2",
            "--sigma",
            "0.2",
            "--T",
            "1",
            "--paths",
            "100000",
            "--seed",
            "7",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("theoretical -0.02"), "{text}");
    assert!(text.contains("result: PASS"));
}

#[test]
fn simulate_zero_volatility_and_bad_specs() {
    let dir = tempfile::tempdir().unwrap();
    let flat = cfmm(
        &["simulate", "--family", "log_contract", "--k", "2", "--sigma", "0", "--paths", "50", "--out", "ledger.csv"],
        dir.path(),
    );
    assert_eq!(code(&flat), 0);
    assert!(stdout(&flat).contains("cfmm         mean_pnl 0  std_error 0"), "{}", stdout(&flat));
    let ledger = read(&dir.path().join("ledger.csv"));
    assert!(ledger.starts_with("path,terminal_price,cfmm_pnl,rebal_pnl\n0,1,0,0\n"), "{ledger}");
    assert_eq!(code(&cfmm(&["simulate", "--family", "log_contract", "--k", "2", "--paths", "0"], dir.path())), 2);
    assert_eq!(code(&cfmm(&["simulate", "--family", "log_contract", "--k", "2", "--steps", "0"], dir.path())), 2);
}

#[test]
fn simulate_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("payoff.json"), r#"{"family": "log_contract", "params": {"k": 2}}"#).unwrap();
    std::fs::write(
        dir.path().join("sim.json"),
        r#"{"sigma": 0.2, "T": 1, "steps": 50, "paths": 2000, "seed": 3, "c0": 1, "set": "payoff.json"}"#,
    )
    .unwrap();
    let a = cfmm(&["simulate", "--params", "sim.json", "--out", "a.csv"], dir.path());
    assert_eq!(code(&a), 0, "{}{}", stdout(&a), stderr(&a));
    assert!(stdout(&a).contains("paths 2000"));
    let b = cfmm(&["simulate", "--params", "sim.json", "--out", "b.csv"], dir.path());
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(read(&dir.path().join("a.csv")), read(&dir.path().join("b.csv")));
    // flags win over the file
    let c = cfmm(&["simulate", "--params", "sim.json", "--paths", "100"], dir.path());
    assert!(stdout(&c).contains("paths 100 "));
}

#[test]
fn plot_curves() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for sigma in ["0.05", "0.1", "0.2"] {
        let name = format!("bs{sigma}.csv");
        let out = cfmm(
            &[
                "derive",
                "--family",
                "bs_covered_call",
                "--strike",
                "1",
                "--tau",
                "10",
                "--sigma",
                sigma,
                "--out",
                &name,
            ],
            dir.path(),
        );
        assert_eq!(code(&out), 0);
        files.push(name);
    }
    // lower volatility stays closer to the straight constant-sum line
    let bulge: Vec<f64> = files
        .iter()
        .map(|f| {
            let pts = parse_boundary_csv(&read(&dir.path().join(f))).unwrap();
            let mid = pts.iter().min_by(|a, b| (a.0 - 0.5).abs().total_cmp(&(b.0 - 0.5).abs())).unwrap();
            (1.0 - mid.0) - mid.1
        })
        .collect();
    assert!(bulge[0] < bulge[1] && bulge[1] < bulge[2], "{bulge:?}");

    let mut args = vec!["plot", "--out", "fig.svg", "--xmax", "1", "--ymax", "1"];
    args.extend(files.iter().map(String::as_str));
    let out = cfmm(&args, dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let svg = read(&dir.path().join("fig.svg"));
    assert_eq!(svg.matches("<path").count(), 3);
    assert!(svg.contains("sigma=0.05"));

    let again = cfmm(&args, dir.path());
    assert_eq!(code(&again), 0);
    assert_eq!(svg, read(&dir.path().join("fig.svg")));

    let single = cfmm(&["plot", &files[0]], dir.path());
    assert_eq!(code(&single), 0);
    assert_eq!(stdout(&single).matches("<path").count(), 1);
}

#[test]
fn plot_presets_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["covered-call-vol", "covered-call-tau", "put-vol", "put-rate", "log-contract"] {
        let out = cfmm(&["plot", "--preset", preset], dir.path());
        assert_eq!(code(&out), 0, "{preset}");
        assert!(stdout(&out).matches("<path").count() >= 3, "{preset}");
    }
    std::fs::write(dir.path().join("empty.csv"), "").unwrap();
    assert_eq!(code(&cfmm(&["plot", "empty.csv"], dir.path())), 2);
    std::fs::write(dir.path().join("header.csv"), "R1,R2\n").unwrap();
    assert_eq!(code(&cfmm(&["plot", "header.csv"], dir.path())), 2);
    assert_eq!(code(&cfmm(&["plot"], dir.path())), 2);
    assert_eq!(code(&cfmm(&["plot", "missing.csv"], dir.path())), 2);
}

#[test]
fn derive_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["derive", "--family", "log_contract", "--k", "1"];
    let a = cfmm(&args, dir.path());
    let b = cfmm(&args, dir.path());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn log_level_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cfmm"))
        .args(["derive", "--family", "linear", "--a", "1,2"])
        .current_dir(dir.path())
        .env("CFMM_LOG", "off")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).is_empty(), "{}", stderr(&out));
}
