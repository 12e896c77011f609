//! End-to-end runs of the `ibcurve` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ibcurve_core::io::{parse_bounds_csv, parse_scan_csv, Table};
use tempfile::TempDir;

const UNIFORM4: &str = "x,y0,y1,y2,y3\na,0.25,0,0,0\nb,0,0.25,0,0\nc,0,0,0.25,0\nd,0,0,0,0.25\n";

fn ibcurve(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ibcurve"))
        .current_dir(dir)
        .env_remove("IBCURVE_SEED")
        .env_remove("IBCURVE_WORKERS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn workspace(files: &[(&str, &str)]) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in files {
        fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

fn class_joint(inputs: usize, classes: usize) -> String {
    let p = 1.0 / inputs as f64;
    let mut s = String::from("x");
    for k in 0..classes {
        s += &format!(",y{k}");
    }
    s.push('\n');
    for i in 0..inputs {
        s += &format!("x{i}");
        for k in 0..classes {
            let cell = if i % classes == k { format!(",{p}") } else { ",0".into() };
            s += &cell;
        }
        s.push('\n');
    }
    s
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn column(table: &Table, name: &str) -> Vec<f64> {
    let j = table.header.iter().position(|h| h == name).unwrap();
    table.rows.iter().map(|r| r[j].parse().unwrap()).collect()
}

#[test]
fn squared_ib_log_scan_has_one_row_per_beta() {
    let dir = workspace(&[("u4.csv", UNIFORM4)]);
    let o = ibcurve(dir.path(), &["curve", "--input", "u4.csv", "--objective", "squared-ib", "--beta-log", "0.1:5:15", "--out", "s.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_scan_csv(&read(dir.path(), "s.csv")).unwrap();
    assert_eq!(rows.len(), 15);
    assert_eq!(rows[0].beta, 0.1);
    assert_eq!(rows[14].beta, 5.0);
    assert!(rows.iter().all(|r| r.converged));
}

#[test]
fn lagrangian_scan_sits_on_the_corner() {
    let dir = workspace(&[("u4.csv", UNIFORM4)]);
    let o = ibcurve(dir.path(), &["curve", "--input", "u4.csv", "--beta-lin", "0.1:0.9:9", "--out", "l.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_scan_csv(&read(dir.path(), "l.csv")).unwrap();
    assert_eq!(rows.len(), 9);
    let h = 4f64.ln();
    for r in rows {
        assert!((r.i_xt - h).abs() < 1e-6 && (r.i_yt - h).abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn json_mirror_and_encoders() {
    let dir = workspace(&[("u4.csv", UNIFORM4)]);
    let o = ibcurve(
        dir.path(),
        &["curve", "--input", "u4.csv", "--objective", "dib", "--beta-lin", "0.2:0.8:3", "--out", "d.csv", "--json", "d.json", "--with-encoders"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&read(dir.path(), "d.json")).unwrap();
    let text = doc.to_string();
    assert!(text.contains("encoder"), "{text}");
}

#[test]
fn bad_grids_and_files_exit_1() {
    let dir = workspace(&[("u4.csv", UNIFORM4), ("bad.csv", "x,y0,y1\na,0.5,zz\nb,0,0.5\n")]);
    let empty = ibcurve(dir.path(), &["curve", "--input", "u4.csv", "--beta-lin", "0.1:0.9:0", "--out", "e.csv"]);
    assert_eq!(code(&empty), 1);
    assert!(stderr(&empty).contains("empty"));

    let two = ibcurve(dir.path(), &["curve", "--input", "u4.csv", "--beta-lin", "0.1:0.9:3", "--beta-log", "0.1:1:3", "--out", "e.csv"]);
    assert_eq!(code(&two), 1);

    let parse = ibcurve(dir.path(), &["curve", "--input", "bad.csv", "--beta-lin", "0.1:0.9:3", "--out", "e.csv"]);
    assert_eq!(code(&parse), 1);
    let msg = stderr(&parse);
    assert!(msg.contains("row 2") && msg.contains("column 3"), "{msg}");
    assert!(!dir.path().join("e.csv").exists());
}

#[test]
fn unconverged_points_exit_2() {
    let dir = workspace(&[("u4.csv", UNIFORM4)]);
    let o = ibcurve(dir.path(), &["curve", "--input", "u4.csv", "--objective", "squared-dib", "--beta-log", "0.1:5:3", "--max-iters", "1", "--out", "m.csv"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let rows = parse_scan_csv(&read(dir.path(), "m.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().any(|r| !r.converged));
}

#[test]
fn talpha_family_lies_on_the_diagonal() {
    let dir = workspace(&[("u4.csv", UNIFORM4)]);
    let o = ibcurve(dir.path(), &["analytic", "--input", "u4.csv", "--talpha-grid", "11", "--out", "t.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = Table::parse(&read(dir.path(), "t.csv")).unwrap();
    assert_eq!(t.rows.len(), 11);
    let (alpha, ix, iy) = (column(&t, "alpha"), column(&t, "i_xt"), column(&t, "i_yt"));
    for k in 0..11 {
        assert!((alpha[k] - k as f64 / 10.0).abs() < 1e-12);
        assert!((ix[k] - alpha[k] * 4f64.ln()).abs() < 1e-10);
        assert_eq!(ix[k], iy[k]);
    }
}

#[test]
fn dib_envelope_levels_of_uniform4() {
    let dir = workspace(&[("u4.csv", UNIFORM4)]);
    let o = ibcurve(dir.path(), &["analytic", "--input", "u4.csv", "--dib-envelope", "--out", "d.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = Table::parse(&read(dir.path(), "d.csv")).unwrap();
    // entropies of the partitions of 4 equal classes: {4}, {3,1}, {2,2}, {2,1,1}, {1,1,1,1}
    let q = |p: &[f64]| -p.iter().map(|x| x * x.ln()).sum::<f64>();
    let expect = [0.0, q(&[0.75, 0.25]), 2f64.ln(), q(&[0.5, 0.25, 0.25]), 4f64.ln()];
    let h = column(&t, "h_t");
    assert_eq!(h.len(), expect.len());
    for (a, b) in h.iter().zip(expect) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
    assert_eq!(column(&t, "i_yt"), h);
}

#[test]
fn hard_front_lists_every_clustering() {
    let dir = workspace(&[("c3.csv", &class_joint(3, 3))]);
    let o = ibcurve(dir.path(), &["analytic", "--input", "c3.csv", "--hard-front", "--out", "h.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = Table::parse(&read(dir.path(), "h.csv")).unwrap();
    // Bell number B3
    assert_eq!(t.rows.len(), 5);
}

#[test]
fn analytic_rejects_non_deterministic_input() {
    let dir = workspace(&[("nd.csv", "x,y0,y1\na,0.25,0.25\nb,0,0.5\n")]);
    let o = ibcurve(dir.path(), &["analytic", "--input", "nd.csv", "--dib-envelope", "--out", "d.csv"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("'a'"), "{}", stderr(&o));
}

#[test]
fn a1_a2_hold_on_every_trial() {
    let dir = workspace(&[("u4.csv", UNIFORM4)]);
    let o = ibcurve(dir.path(), &["verify", "--input", "u4.csv", "--theorems", "a1,a2", "--eps", "0.01,0.1", "--trials", "200", "--out", "v.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_bounds_csv(&read(dir.path(), "v.csv")).unwrap();
    assert_eq!(rows.len(), 800);
    assert!(rows.iter().all(|r| r.holds));
    assert_eq!(rows.iter().filter(|r| r.theorem.as_str() == "a1").count(), 400);
}

#[test]
fn issue3_bound_for_ten_classes() {
    let dir = workspace(&[("c10.csv", &class_joint(20, 10))]);
    let o = ibcurve(dir.path(), &["verify", "--input", "c10.csv", "--theorems", "issue3", "--eps", "0.1", "--trials", "10", "--out", "i.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_bounds_csv(&read(dir.path(), "i.csv")).unwrap();
    assert_eq!(rows.len(), 30);
    // −0.1 ln(0.1/10)
    let cap = -0.1 * (0.01f64).ln();
    for r in rows.iter().filter(|r| r.theorem.as_str() == "issue3-trade-off") {
        assert!((r.bound - cap).abs() < 1e-11);
        assert!(r.holds);
    }
}

#[test]
fn oracle_checks_on_small_joints() {
    let dir = workspace(&[("c3.csv", &class_joint(4, 3)), ("u4.csv", UNIFORM4)]);
    let o = ibcurve(dir.path(), &["verify", "--input", "c3.csv", "--theorems", "a3,a5", "--eps", "0.05", "--trials", "2", "--out", "o.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_bounds_csv(&read(dir.path(), "o.csv")).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 4);
    assert!(rows.iter().all(|r| r.holds));

    // four labels are beyond the oracle's bottleneck size
    let o = ibcurve(dir.path(), &["verify", "--input", "u4.csv", "--theorems", "a3", "--eps", "0.05", "--out", "o4.csv"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn a4_sandwich_holds() {
    let dir = workspace(&[("c3.csv", &class_joint(6, 3))]);
    let o = ibcurve(dir.path(), &["verify", "--input", "c3.csv", "--theorems", "a4", "--eps", "0.01,0.05", "--trials", "3", "--restarts", "5", "--out", "a4.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_bounds_csv(&read(dir.path(), "a4.csv")).unwrap();
    // 2 ε × 3 trials × 3 β × 4 sides
    assert_eq!(rows.len(), 72);
}

#[test]
fn verify_rejects_bad_epsilon() {
    let dir = workspace(&[("u4.csv", UNIFORM4)]);
    for eps in ["0.6", "-0.1", ""] {
        let o = ibcurve(dir.path(), &["verify", "--input", "u4.csv", "--eps", eps, "--out", "x.csv"]);
        assert_eq!(code(&o), 1, "eps {eps:?}");
    }
}

#[test]
fn demo_shows_collapse_and_coverage() {
    let dir = workspace(&[]);
    let o = ibcurve(dir.path(), &["demo", "--out-dir", "out"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = dir.path().join("out");
    for f in ["joint.csv", "plane.csv", "summary.txt", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let plane = Table::parse(&read(&out, "plane.csv")).unwrap();
    let ix = column(&plane, "i_xt");
    let of = |src: &str| -> Vec<f64> {
        plane.rows.iter().zip(&ix).filter(|(r, _)| r[0] == src).map(|(_, v)| *v).collect()
    };
    let lag = of("ib-lagrangian");
    let span = lag.iter().cloned().fold(f64::MIN, f64::max) - lag.iter().cloned().fold(f64::MAX, f64::min);
    assert_eq!(lag.len(), 9);
    assert!(span < 0.1, "span {span}");

    let mut sq = of("squared-ib");
    assert_eq!(sq.len(), 15);
    sq.sort_by(f64::total_cmp);
    let mut levels = 1;
    let mut last = sq[0];
    for v in &sq[1..] {
        if v - last >= 0.01 {
            levels += 1;
            last = *v;
        }
    }
    assert!(levels >= 5, "levels {levels}");
    assert_eq!(fs::read_to_string(out.join("summary.txt")).unwrap(), String::from_utf8_lossy(&o.stdout));
}

#[test]
fn small_demo_cross_checks_the_oracle() {
    let dir = workspace(&[]);
    let o = ibcurve(dir.path(), &["demo", "--classes", "2", "--inputs", "4", "--out-dir", "out"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("oracle cross-check"));
    let plane = read(&dir.path().join("out"), "plane.csv");
    assert!(plane.lines().any(|l| l.starts_with("oracle,")));
}

#[test]
fn demo_rejects_degenerate_sizes() {
    let dir = workspace(&[]);
    assert_eq!(code(&ibcurve(dir.path(), &["demo", "--classes", "1", "--out-dir", "o"])), 1);
    assert_eq!(code(&ibcurve(dir.path(), &["demo", "--classes", "5", "--inputs", "3", "--out-dir", "o"])), 1);
}

/// Parse → serialize must reproduce every emitted table byte for byte.
#[test]
fn emitted_tables_round_trip() {
    let dir = workspace(&[("u4.csv", UNIFORM4)]);
    let p = dir.path();
    let runs: [&[&str]; 4] = [
        &["curve", "--input", "u4.csv", "--objective", "squared-ib", "--beta-log", "0.1:5:7", "--out", "s.csv"],
        &["verify", "--input", "u4.csv", "--eps", "0.01,0.2", "--trials", "5", "--out", "v.csv"],
        &["analytic", "--input", "u4.csv", "--talpha-grid", "5", "--out", "t.csv"],
        &["demo", "--classes", "3", "--inputs", "6", "--out-dir", "demo"],
    ];
    for args in runs {
        assert_eq!(code(&ibcurve(p, args)), 0, "{args:?}");
    }
    let s = read(p, "s.csv");
    assert_eq!(ibcurve_core::io::scan_rows_to_csv(&parse_scan_csv(&s).unwrap()).unwrap(), s);
    let v = read(p, "v.csv");
    assert_eq!(ibcurve_core::io::bound_rows_to_csv(&parse_bounds_csv(&v).unwrap()).unwrap(), v);
    for f in [p.join("t.csv"), p.join("demo/plane.csv"), p.join("demo/joint.csv")] {
        let text = fs::read_to_string(&f).unwrap();
        assert_eq!(Table::parse(&text).unwrap().to_csv().unwrap(), text, "{}", f.display());
    }
}

fn snapshot(dir: &Path, files: &[&str]) -> Vec<Vec<u8>> {
    files.iter().map(|f| fs::read(dir.join(f)).unwrap()).collect()
}

#[test]
fn replay_reproduces_outputs_exactly() {
    let dir = workspace(&[("u4.csv", UNIFORM4)]);
    let p = dir.path();
    let o = ibcurve(p, &["curve", "--input", "u4.csv", "--objective", "ib-lagrangian", "--beta-lin", "0.1:0.9:5", "--restarts", "4", "--seed", "11", "--out", "c.csv", "--json", "c.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = ibcurve(p, &["demo", "--classes", "3", "--inputs", "9", "--seed", "5", "--out-dir", "d"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let curve_files = ["c.csv", "c.json"];
    let demo_files = ["d/plane.csv", "d/summary.txt", "d/joint.csv"];
    let before = (snapshot(p, &curve_files), snapshot(p, &demo_files));
    for f in curve_files.iter().chain(&demo_files) {
        fs::remove_file(p.join(f)).unwrap();
    }
    for m in ["c.manifest.json", "d/manifest.json"] {
        let o = ibcurve(p, &["replay", m]);
        assert_eq!(code(&o), 0, "{m}: {}", stderr(&o));
    }
    assert_eq!((snapshot(p, &curve_files), snapshot(p, &demo_files)), before);
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = workspace(&[("u4.csv", UNIFORM4)]);
    let run = |seed: Option<&str>, out: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_ibcurve"));
        c.current_dir(dir.path()).env_remove("IBCURVE_SEED");
        if let Some(s) = seed {
            c.env("IBCURVE_SEED", s);
        }
        let o = c.args(["curve", "--input", "u4.csv", "--beta-lin", "0.1:0.9:2", "--restarts", "2", "--out", out]).output().unwrap();
        assert_eq!(code(&o), 0);
        let m: serde_json::Value = serde_json::from_str(&read(dir.path(), &out.replace(".csv", ".manifest.json"))).unwrap();
        m["seed"].as_u64().unwrap()
    };
    assert_eq!(run(Some("7"), "a.csv"), 7);
    assert_eq!(run(None, "b.csv"), 0);
}

#[test]
fn zero_workers_is_rejected() {
    let dir = workspace(&[("u4.csv", UNIFORM4)]);
    let o = ibcurve(dir.path(), &["--workers", "0", "analytic", "--input", "u4.csv", "--dib-envelope", "--out", "d.csv"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn help_exits_0_and_usage_errors_exit_1() {
    let dir = workspace(&[]);
    assert_eq!(code(&ibcurve(dir.path(), &["--help"])), 0);
    assert_eq!(code(&ibcurve(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&ibcurve(dir.path(), &["analytic", "--input", "x.csv", "--out", "o.csv"])), 1);
}
