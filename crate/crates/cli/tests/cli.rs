use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use tempfile::TempDir;

const SMALL: [&str; 4] = ["--n-max", "120", "--m-max", "100"];

fn knotfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knotfield")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_loop(dir: &Path, name: &str, points: impl Iterator<Item = [f64; 3]>, sign: &str) -> PathBuf {
    let mut text = String::from("# test loop\n");
    for p in points {
        text.push_str(&format!("{} {} {}\n", p[0], p[1], p[2]));
    }
    text.push_str(&format!("closed {sign}\n"));
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

/// Full-size default cache, shared by the tests that need one.
fn default_cache() -> &'static (TempDir, PathBuf) {
    static CACHE: OnceLock<(TempDir, PathBuf)> = OnceLock::new();
    CACHE.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("trefoil.cache");
        let out = knotfield(&["coeffs", "-o", path_str(&path)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        (dir, path)
    })
}

#[test]
fn sample_grid_has_one_row_per_point_and_is_repeatable() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let mut args = SMALL.to_vec();
    args.extend(["sample", "--resolution", "17", "17", "17", "--threads", "1", "-o", path_str(&a)]);
    let first = knotfield(&args);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    *args.iter_mut().find(|s| **s == "1").unwrap() = "4";
    *args.last_mut().unwrap() = path_str(&b);
    let second = knotfield(&args);
    assert_eq!(code(&second), 0);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4913 + 1);
    assert_eq!(lines[0], "x,y,z,Ax,Ay,Az,masked");
    // the grid runs through the tube, so some rows are masked and reported
    let masked = lines[1..].iter().filter(|l| l.ends_with(",1")).count();
    assert!(masked > 0);
    assert!(stderr(&first).contains(&format!("{masked} masked")), "{}", stderr(&first));
    for l in lines[1..].iter().filter(|l| l.ends_with(",1")) {
        assert!(l.contains("NaN"));
    }
    // x runs fastest and values carry 17 significant digits
    assert!(lines[1].starts_with("-4.0000000000000000e0,-4.0000000000000000e0,-2.0000000000000000e0,"));
    assert!(lines[2].starts_with("-3.5000000000000000e0,-4.0000000000000000e0,"));
}

#[test]
fn sample_with_hertz_columns() {
    let mut args = SMALL.to_vec();
    args.extend(["sample", "--min", "3", "3", "1", "--max", "4", "4", "2", "--resolution", "2", "2", "2", "--hertz"]);
    let out = knotfield(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,z,Ax,Ay,Az,Hx,Hy,Hz,masked"));
    for l in lines {
        assert_eq!(l.split(',').count(), 10);
        assert!(l.ends_with(",0"));
    }
}

#[test]
fn holonomy_counts_linking_with_the_knot() {
    let dir = TempDir::new().unwrap();
    let core = |n: usize| (0..n).map(move |k| {
        let t = TAU * k as f64 / n as f64;
        [2.0 * t.cos(), 2.0 * t.sin(), 0.0]
    });
    let linked = write_loop(dir.path(), "core.loop", core(64), "-1");
    let mut args = SMALL.to_vec();
    args.extend(["holonomy", path_str(&linked)]);
    let out = knotfield(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("linking   3"), "{text}");
    let row = text.lines().last().unwrap();
    let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields[2], 3.0);
    assert!((fields[0] - 3.0 * fields[1]).abs() < 1e-4 * fields[1]);
    assert!((fields[1] - 2.0 * TAU).abs() < 1e-8);

    let forward = write_loop(dir.path(), "fwd.loop", core(64), "+1");
    let report = dir.path().join("report.csv");
    let mut args = SMALL.to_vec();
    args.extend(["holonomy", path_str(&forward), "-o", path_str(&report)]);
    let out = knotfield(&args);
    assert_eq!(code(&out), 0);
    assert!(fs::read_to_string(&report).unwrap().lines().nth(1).unwrap().contains(",-3,"));
}

#[test]
fn unlinked_loop_has_no_holonomy() {
    let dir = TempDir::new().unwrap();
    let pts = (0..32).map(|k| {
        let t = TAU * k as f64 / 32.0;
        [4.0 + 0.5 * t.cos(), 0.0, 0.5 * t.sin()]
    });
    let path = write_loop(dir.path(), "far.loop", pts, "+1");
    let mut args = SMALL.to_vec();
    args.extend(["holonomy", path_str(&path), "--evaluator", "oracle"]);
    let out = knotfield(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let row = stdout(&out).lines().last().unwrap().to_owned();
    let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields[2], 0.0);
    assert!(fields[0].abs() < 1e-8);
}

#[test]
fn malformed_loop_files_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("short.loop", "0 0 0\n1 0 0\n1 2\nclosed +1\n", ":3:"),
        ("word.loop", "0 0 0\n1 zero 0\n1 1 0\nclosed +1\n", ":2:"),
        ("open.loop", "0 0 0\n1 0 0\n1 1 0\n", "missing"),
        ("sign.loop", "0 0 0\n1 0 0\n1 1 0\nclosed 0\n", ":4:"),
    ];
    for (name, text, needle) in cases {
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        let out = knotfield(&["holonomy", path_str(&path), "--evaluator", "oracle"]);
        assert_eq!(code(&out), 2, "{name}");
        assert!(stderr(&out).contains(needle), "{name}: {}", stderr(&out));
    }
    let out = knotfield(&["holonomy", "/nonexistent/loop"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn loops_touching_the_knot_are_rejected() {
    let dir = TempDir::new().unwrap();
    // circles the knot point at s = 0, (2.5, 0, 0), at radius 0.01
    let pts = (0..24).map(|k| {
        let t = TAU * k as f64 / 24.0;
        [2.5 + 0.01 * t.cos(), 0.0, 0.01 * t.sin()]
    });
    let path = write_loop(dir.path(), "tight.loop", pts, "+1");
    let out = knotfield(&["holonomy", path_str(&path), "--evaluator", "oracle"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let bad_key = dir.path().join("bad.toml");
    fs::write(&bad_key, "[knot]\np = 3\nq = 2\ncolour = 1\n").unwrap();
    let bad_type = dir.path().join("type.toml");
    fs::write(&bad_type, "[truncation]\nn_max = \"many\"\n").unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["--p", "2", "--q", "4", "sample"],
        vec!["--p", "1", "--q", "0", "sample"],
        vec!["--minor-radius", "3", "sample"],
        vec!["--tail-tol", "-1", "sample"],
        vec!["--config", path_str(&bad_key), "sample"],
        vec!["--config", path_str(&bad_type), "sample"],
        vec!["--config", "/nonexistent.toml", "sample"],
        vec!["sample", "--resolution", "0", "2", "2"],
        vec!["sample", "--min", "1", "0", "0", "--max", "0", "1", "1"],
        vec!["holonomy"],
        vec!["frobnicate"],
    ];
    for args in runs {
        let out = knotfield(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "seed = 5\n[knot]\np = 2\nq = 4\n[truncation]\nn_max = 120\nm_max = 100\n[compare]\ncount = 4\n",
    )
    .unwrap();
    assert_eq!(code(&knotfield(&["--config", path_str(&cfg), "compare"])), 2);
    let out = knotfield(&["--config", path_str(&cfg), "--q", "3", "compare"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 5);
    let direct = knotfield(&[&SMALL[..], &["--seed", "5", "compare", "--count", "4"]].concat());
    assert_eq!(stdout(&direct), stdout(&out));
}

#[test]
fn compare_at_listed_points() {
    let dir = TempDir::new().unwrap();
    let pts = dir.path().join("points.txt");
    fs::write(&pts, "# inside and outside the tube\n0.4 1.0 0.7\n3.5 0.2 -0.4\n0 0 1.5\n1.5 0 0\n").unwrap();
    let out = knotfield(&[&SMALL[..], &["compare", "--points", path_str(&pts)]].concat());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y,z,Ax,Ay,Az,Ax_oracle,Ay_oracle,Az_oracle,err_A,err_H,masked");
    assert_eq!(lines.len(), 5);
    // the last point lies on the knot torus and is masked
    assert!(lines[4].ends_with(",1"));
    for l in &lines[1..4] {
        let err: f64 = l.split(',').nth(9).unwrap().parse().unwrap();
        assert!(err < 1e-6, "{l}");
    }
    let empty = dir.path().join("none.txt");
    fs::write(&empty, "# nothing\n").unwrap();
    assert_eq!(code(&knotfield(&["compare", "--points", path_str(&empty)])), 2);
}

#[test]
fn compare_fails_beyond_tolerance() {
    let out = knotfield(&[&SMALL[..], &["compare", "--count", "4", "--tolerance", "1e-30"]].concat());
    assert_eq!(code(&out), 1);
}

#[test]
fn coeffs_report_and_cache_reload() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("small.cache");
    let out = knotfield(&[&SMALL[..], &["coeffs", "-o", path_str(&cache)]].concat());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout(&out);
    let figure: f64 = report
        .split("): ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse().ok())
        .expect("discrepancy printed");
    assert!(figure <= 1e-8, "{report}");
    let text = fs::read_to_string(&cache).unwrap();
    assert_eq!(text.matches("# knotfield coefficient cache v1").count(), 2);

    let fresh = knotfield(&[&SMALL[..], &["compare", "--count", "6"]].concat());
    let cached = knotfield(&[&SMALL[..], &["--cache", path_str(&cache), "compare", "--count", "6"]].concat());
    assert_eq!(code(&cached), 0);
    assert_eq!(stdout(&fresh), stdout(&cached));

    // a cache for another knot is refused
    let other = knotfield(&[&SMALL[..], &["--density", "2", "--cache", path_str(&cache), "compare"]].concat());
    assert_eq!(code(&other), 2);
    let garbage = dir.path().join("garbage.cache");
    fs::write(&garbage, "hello\n").unwrap();
    assert_eq!(code(&knotfield(&["--cache", path_str(&garbage), "compare"])), 2);
}

#[test]
fn coeffs_fail_when_routes_disagree() {
    let out = knotfield(&["--n-max", "20", "--m-max", "20", "coeffs", "--tolerance", "1e-30"]);
    assert_eq!(code(&out), 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn unknot_tables_are_axisymmetric() {
    let out = knotfield(&["--p", "1", "--q", "0", "--unknot", "--n-max", "60", "--m-max", "40", "coeffs"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stderr(&out);
    assert_eq!(report.matches("breaking axial symmetry 0.000e0").count(), 2, "{report}");
}

#[test]
fn quick_verification_passes_from_a_cache() {
    let (_, cache) = default_cache();
    let out = knotfield(&["--cache", path_str(cache), "verify", "--quick"]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 10, "{text}");
}

#[test]
fn tampered_cache_fails_the_oracle_check() {
    let (dir, cache) = default_cache();
    let text = fs::read_to_string(cache).unwrap();
    let tampered: String = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() == 7 && f[..3] == ["0", "2", "0"] {
                let v: f64 = f[3].parse().unwrap();
                format!("0 2 0 {:.16e} {} {} {}\n", 1.5 * v + 1.0, f[4], f[5], f[6])
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    let bad = dir.path().join("tampered.cache");
    fs::write(&bad, tampered).unwrap();
    let out = knotfield(&["--cache", path_str(&bad), "verify", "--quick"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).lines().any(|l| l.starts_with("FAIL [ 6] series vs oracle")), "{}", stdout(&out));
    assert!(stderr(&out).contains("first failing check"));
}
