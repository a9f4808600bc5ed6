use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn layerpot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_layerpot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = "[grid]\nn = 2\nrefinements = 1\n";

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.ini");
    assert_eq!(
        layerpot(&["solve", "-c", s(&missing)]).status.code(),
        Some(2)
    );

    let typo = write(dir.path(), "typo.ini", "[grid]\nnn = 4\n");
    let out = layerpot(&["solve", "-c", s(&typo)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nn"));

    let degree = write(
        dir.path(),
        "deg.ini",
        "[basis]\nfamily = bspline\ndegree = 5\n",
    );
    assert_eq!(
        layerpot(&["study", "-c", s(&degree)]).status.code(),
        Some(2)
    );
}

#[test]
fn coarse_grid_is_a_solver_failure() {
    let dir = TempDir::new().unwrap();
    // accepted by the parser for degree 2 only when n >= 2, rejected by the solver below 3
    let cfg = write(
        dir.path(),
        "c.ini",
        "[basis]\nfamily = lagrange\ndegree = 2\n[grid]\nn = 2\n",
    );
    assert_eq!(layerpot(&["solve", "-c", s(&cfg)]).status.code(), Some(3));
}

#[test]
fn dump_header_and_payload() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "g.ini", SMALL);
    let dump = dir.path().join("sys.bin");
    let out = layerpot(&["solve", "-c", s(&cfg), "--dump", s(&dump)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let bytes = std::fs::read(&dump).unwrap();
    let word = |i: usize| u64::from_le_bytes(bytes[8 * i..8 * i + 8].try_into().unwrap());
    let n = word(0) as usize;
    assert_eq!(n, 6 * 2 * 2);
    assert_eq!(word(1), 1, "galerkin code");
    assert_eq!(bytes.len(), 16 + 8 * (n * n + n));

    let value = |k: usize| f64::from_le_bytes(bytes[16 + 8 * k..24 + 8 * k].try_into().unwrap());
    // row-major and symmetric, positive diagonal
    for i in 0..n {
        assert!(value(i * n + i) > 0.0);
        for j in 0..i {
            assert!((value(i * n + j) - value(j * n + i)).abs() <= 1e-12 * value(0));
        }
    }
    // the right-hand side of f = 1 is the panel areas, which sum to 4π
    let total: f64 = (0..n).map(|i| value(n * n + i)).sum();
    assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-8, "{total}");

    let colloc = write(
        dir.path(),
        "c.ini",
        &format!("{SMALL}[method]\nkind = collocation\n"),
    );
    let out = layerpot(&["solve", "-c", s(&colloc), "--dump", s(&dump)]);
    assert!(out.status.success());
    let bytes = std::fs::read(&dump).unwrap();
    assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 2);
}

#[test]
fn density_round_trip_through_eval_potential() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "g.ini", SMALL);
    let density = dir.path().join("u.csv");
    let out = layerpot(&[
        "solve",
        "-c",
        s(&cfg),
        "--level",
        "1",
        "--density-out",
        s(&density),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("relative residual"));

    let points = write(dir.path(), "p.csv", "# probes\n0.1,0.2,-0.1\n3,0,0\n");
    let out = layerpot(&[
        "eval-potential",
        "-c",
        s(&cfg),
        "--level",
        "1",
        "--density",
        s(&density),
        "--points",
        s(&points),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let value = |r: &csv::StringRecord| r[5].parse::<f64>().unwrap();
    // unit data: potential 1 inside, 1/|x| outside the unit sphere
    assert_eq!(&rows[0][3], "interior");
    assert!((value(&rows[0]) - 1.0).abs() < 1e-4);
    assert_eq!(&rows[1][3], "exterior");
    assert!((value(&rows[1]) - 1.0 / 3.0).abs() < 1e-4);

    // a density of the wrong length is rejected
    let out = layerpot(&[
        "eval-potential",
        "-c",
        s(&cfg),
        "--density",
        s(&density),
        "--points",
        s(&points),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn study_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("out/report.csv");
    let cfg = write(
        dir.path(),
        "h.ini",
        &format!(
            "{SMALL}[problem]\nkind = harmonic\nharmonic_n = 1\n[output]\ncsv_path = {}\n",
            s(&csv_path)
        ),
    );
    let out = layerpot(&["study", "-c", s(&cfg), "--check"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "level,h_edge,h_area,N,l2_density_err,order_edge,order_area,pot_err_interior,pot_err_exterior,bound43_ok,assemble_s,solve_s"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,") && lines[2].starts_with("1,"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS"));

    // without a path the CSV goes to stdout
    let plain = write(dir.path(), "p.ini", SMALL);
    let out = layerpot(&["study", "-c", s(&plain)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("level,h_edge"));
}

#[test]
fn failed_check_exits_with_four() {
    let dir = TempDir::new().unwrap();
    // one cell per chart face cannot resolve a degree-2 harmonic: no decrease
    let cfg = write(
        dir.path(),
        "f.ini",
        "[grid]\nn = 1\nrefinements = 1\n[problem]\nkind = harmonic\nharmonic_n = 2\n",
    );
    let out = layerpot(&["study", "-c", s(&cfg), "--check"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL density error decreases"));
    // without --check the same run succeeds
    assert_eq!(layerpot(&["study", "-c", s(&cfg)]).status.code(), Some(0));
}
