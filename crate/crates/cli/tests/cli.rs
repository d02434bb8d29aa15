use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spherecover"))
        .args(args)
        .env_remove("SPHERECOVER_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    let prefix = format!("{key} = ");
    text.lines()
        .find_map(|l| l.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
}

const E2E: [&str; 13] = [
    "cover", "--n", "3", "--r", "1.5", "--mode", "engineering", "--eps", "0.1", "--mu", "0.3",
    "--seed", "7",
];

fn cover_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args: Vec<&str> = E2E.to_vec();
    args.extend(["--out-dir", dir.to_str().unwrap()]);
    args.extend(extra);
    run(&args)
}

#[test]
fn params_v2_at_100() {
    let o = run(&["params", "--n", "100", "--mode", "v2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "s"), "21");
    let d: f64 = field(&text, "d").parse().unwrap();
    assert!((d - 0.997827).abs() < 1e-6);
    assert_eq!(field(&text, "b_exponent"), "none");
}

#[test]
fn params_csv_has_header_and_one_row() {
    let o = run(&["params", "--n", "50", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("mode,n,r,"));
    assert!(lines[1].starts_with("v2,50,"));
}

#[test]
fn bounds_row_at_100() {
    let o = run(&["bounds", "--n-from", "100", "--n-to", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,lower(c1),d-sphe,est0,d-sph,d-ball,psi,phi,omega_relaxed"
    );
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 100.0);
    assert!((row[4] - 1035.6944).abs() < 1e-3);
    assert!((row[6] + 0.2571).abs() < 1e-3);
    assert!((row[7] + 0.7538).abs() < 1e-3);
    assert!(lines.next().is_none());
}

#[test]
fn bounds_crossover_goes_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = run(&[
        "bounds", "--n-from", "3600", "--n-to", "3700", "--step", "50", "--crossover-to", "4000",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("first at n = 3681"));
    assert_eq!(fs::read_to_string(out).unwrap().lines().count(), 4);
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        &["params", "--n", "100", "--eps", "0.1"][..],
        &["params", "--n", "100", "--mode", "asymptotic"],
        &["params", "--n", "2"],
        &["bounds", "--n-from", "10", "--n-to", "5"],
        &["params", "--n", "100", "--unknown"],
        &["nothing"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn infeasible_construction_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "cover", "--n", "4", "--r", "1.5", "--mode", "engineering", "--eps", "0.05", "--mu", "0.2",
        "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn end_to_end_cover_is_deterministic_and_round_trips() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = cover_into(a.path(), &["--save-net"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(cover_into(b.path(), &["--save-net"]).status.code(), Some(0));
    for name in ["covering.txt", "report-net.txt", "report-mc.txt", "net-eps.txt", "net-mu.txt"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs between identical runs");
    }
    let net = fs::read_to_string(a.path().join("report-net.txt")).unwrap();
    assert_eq!(field(&net, "uncovered_count"), "0");
    assert_eq!(field(&net, "passed"), "true");
    let mc = fs::read_to_string(a.path().join("report-mc.txt")).unwrap();
    assert_eq!(field(&mc, "uncovered_count"), "0");

    let v = tempfile::tempdir().unwrap();
    let cov = a.path().join("covering.txt");
    let eps = a.path().join("net-eps.txt");
    let o = cover_into(
        v.path(),
        &["--verify-only", cov.to_str().unwrap(), "--eps-net", eps.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    for name in ["report-net.txt", "report-mc.txt"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(v.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn out_dir_defaults_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_spherecover"))
        .args([
            "cover", "--n", "3", "--r", "1.5", "--mode", "engineering", "--eps", "0.3", "--seed",
            "1", "--mc-samples", "10000", "--net", "grid",
        ])
        .env("SPHERECOVER_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("covering.txt").exists());
}

#[test]
fn broken_covering_verifies_as_failure() {
    // a single cap cannot cover the sphere
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.txt");
    fs::write(
        &path,
        "spherecover-covering\nformat_version = 1\nn = 3\nr = 1.5\nhalf_chord = 1.0\nmode = fixture\nseed = 0\ncenter_count = 1\ncenters\n1.5 0 0 0\n",
    )
    .unwrap();
    let o = run(&[
        "cover", "--n", "3", "--r", "1.5", "--mode", "engineering", "--eps", "0.3", "--net", "grid",
        "--mc-samples", "10000", "--verify-only", path.to_str().unwrap(),
        "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = fs::read_to_string(dir.path().join("report-mc.txt")).unwrap();
    assert_eq!(field(&rep, "passed"), "false");
}

#[test]
fn lemma_passes_at_100() {
    let o = run(&["lemma", "--n", "100", "--mode", "v2", "--samples", "20000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "holds"), "true");
    assert_eq!(field(&text, "dominates_on_grid"), "true");
}

#[test]
fn lemma_rejects_single_level_mode() {
    assert_eq!(run(&["lemma", "--n", "100", "--mode", "v1"]).status.code(), Some(1));
}

#[test]
fn oracle_agrees_with_exact_fraction() {
    let o = run(&["oracle", "--n", "10", "--r", "2", "--rho", "1.5", "--samples", "200000", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let z: f64 = field(&text, "z").parse().unwrap();
    assert!(z.abs() <= 3.0);
}

#[test]
fn oracle_flags_an_impossible_tolerance() {
    // a vanishing tolerance turns any sampling noise into a failure
    let o = run(&[
        "oracle", "--n", "3", "--r", "1", "--rho", "0.7", "--samples", "100000", "--sigmas", "1e-9",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
