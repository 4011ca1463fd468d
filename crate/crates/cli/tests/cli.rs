use std::path::Path;
use std::process::{Command, Output};

use qalr_core::lrbound::{global_bound, BoundParams};
use qalr_core::ratio::RatioCertificate;
use qalr_core::schedule::Schedule;
use qalr_core::BallDatabase;

fn qalr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qalr"))
        .args(args)
        .current_dir(dir)
        .env_remove("QALR_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn text(o: &Output) -> (String, String) {
    (String::from_utf8_lossy(&o.stdout).into_owned(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn ok(o: Output) -> String {
    let (out, err) = text(&o);
    assert!(o.status.success(), "exit {:?}\nstdout:\n{out}\nstderr:\n{err}", o.status.code());
    out
}

fn b1_db(dir: &Path) -> String {
    ok(qalr(dir, &["enumerate", "--d", "3", "--p", "1", "--out", "b1.jsonl"]));
    "b1.jsonl".into()
}

#[test]
fn enumerate_reports_counts_and_guards_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(qalr(dir.path(), &["enumerate", "--d", "3", "--p", "2"]));
    assert!(out.contains("radius 1: 3 balls"), "{out}");
    assert!(out.contains("radius 2: 123 balls"), "{out}");
    let path = dir.path().join("qalr-out/balls_d3_p2.jsonl");
    assert_eq!(BallDatabase::load(&path).unwrap().len(), 123);

    let again = qalr(dir.path(), &["enumerate", "--d", "3", "--p", "2"]);
    assert_eq!(again.status.code(), Some(1));
    assert!(text(&again).1.contains("--force"));
    ok(qalr(dir.path(), &["enumerate", "--d", "3", "--p", "1", "--out", "qalr-out/balls_d3_p2.jsonl", "--force"]));
    assert_eq!(BallDatabase::load(&path).unwrap().len(), 3);
}

#[test]
fn simulate_zero_time_then_warm_cache() {
    let dir = tempfile::tempdir().unwrap();
    let db = b1_db(dir.path());
    let out = ok(qalr(dir.path(), &["simulate", "--db", &db, "--T", "0", "--alpha", "1.53", "--cache", "e.csv"]));
    assert!(out.starts_with("3 simulated, 0 cached, 0 failed"), "{out}");
    let csv = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let energy: f64 = r.split(',').nth(4).unwrap().parse().unwrap();
        assert!((energy - 0.5).abs() < 1e-12, "{r}");
    }
    let out = ok(qalr(dir.path(), &["simulate", "--db", &db, "--T", "0", "--alpha", "1.53", "--cache", "e.csv"]));
    assert!(out.starts_with("0 simulated, 3 cached, 0 failed"), "{out}");
    assert_eq!(std::fs::read_to_string(dir.path().join("e.csv")).unwrap(), csv);
}

#[test]
fn over_cap_ball_is_a_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let db = b1_db(dir.path());
    let o = qalr(dir.path(), &["simulate", "--db", &db, "--T", "0.5", "--alpha", "1", "--hilbert-cap", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let (out, err) = text(&o);
    assert!(out.starts_with("2 simulated, 0 cached, 1 failed"), "{out}");
    assert!(err.contains("cap"), "{err}");
    let csv = std::fs::read_to_string(dir.path().join("qalr-out/energies.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

fn data_rows(out: &str) -> Vec<Vec<String>> {
    out.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn global_bound_row_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(qalr(dir.path(), &["bound", "--global", "--d", "3", "--k", "4", "--T", "3.33", "--alpha", "1.53"]));
    assert!(out.contains("# d=3") && out.contains("# k=4") && out.contains("# schedule=linear"));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 1);
    let total: f64 = rows[0].last().unwrap().parse().unwrap();
    let want = global_bound(&BoundParams::new(3, 4, 3.33, 1.53, Schedule::linear()).unwrap()).unwrap().total;
    assert_eq!(total, want);

    let out = ok(qalr(dir.path(), &["bound", "--d", "3", "--k", "3", "--T", "0", "--alpha", "1.53"]));
    for v in &data_rows(&out)[0][3..] {
        assert_eq!(v.parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn local_bound_needs_a_known_ball() {
    let dir = tempfile::tempdir().unwrap();
    let db = b1_db(dir.path());
    let loaded = BallDatabase::load(&dir.path().join(&db)).unwrap();
    let id = loaded.balls().next().unwrap().id().to_string();
    let out = ok(qalr(
        dir.path(),
        &["bound", "--local", "--ball", &id, "--db", &db, "--d", "3", "--q", "1", "--T", "1,2", "--alpha", "1.5"],
    ));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], id);
    let missing = qalr(dir.path(), &["bound", "--local", "--ball", "nope", "--db", &db, "--k", "2", "--T", "1", "--alpha", "1"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn certify_with_cubic_schedule_and_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let db = b1_db(dir.path());
    let out = ok(qalr(
        dir.path(),
        &[
            "certify",
            "--db",
            &db,
            "--q",
            "1",
            "--T",
            "0.5,1.0",
            "--alpha",
            "1.2",
            "--schedule",
            "cubic:3.2,-4.8,2.6",
            "--simulate",
        ],
    ));
    assert!(out.contains("ratio ="), "{out}");
    let cert = RatioCertificate::load_json(&dir.path().join("qalr-out/certificate.json")).unwrap();
    cert.verify().unwrap();
    assert_eq!(cert.schedule_id, "cubic:3.2,-4.8,2.6");
    assert_eq!(cert.q, 1);
    assert!(dir.path().join("qalr-out/certificate.txt").exists());
    let grid = std::fs::read_to_string(dir.path().join("qalr-out/certify_grid.csv")).unwrap();
    assert!(grid.contains("# schedule=cubic:3.2,-4.8,2.6"));
    assert_eq!(data_rows(&grid).len(), 2);
    let best = data_rows(&grid).iter().map(|r| r[2].parse::<f64>().unwrap()).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(cert.ratio, best);
}

#[test]
fn certify_lists_missing_energies() {
    let dir = tempfile::tempdir().unwrap();
    let db = b1_db(dir.path());
    let o = qalr(dir.path(), &["certify", "--db", &db, "--q", "1", "--T", "1", "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o).1;
    let loaded = BallDatabase::load(&dir.path().join(&db)).unwrap();
    for b in loaded.balls() {
        assert!(err.contains(b.id()), "{err}");
    }
}

#[test]
fn scan_single_point_with_worst_selection() {
    let dir = tempfile::tempdir().unwrap();
    let db = b1_db(dir.path());
    let out = ok(qalr(
        dir.path(),
        &["scan", "--db", &db, "--q", "1", "--T", "1", "--alpha", "1.5", "--worst", "2", "--simulate", "--out", "s.csv"],
    ));
    assert!(out.starts_with("2 rows for 2 balls"), "{out}");
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.contains("# worst_n=2"));
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.contains("global_max") && header.contains("local_max"));
}

#[test]
fn config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# desk run\nd = 3\np = 1\noutput_dir = from-config\n").unwrap();
    ok(qalr(dir.path(), &["--config", "run.cfg", "enumerate"]));
    assert!(dir.path().join("from-config/balls_d3_p1.jsonl").exists());

    let o = Command::new(env!("CARGO_BIN_EXE_qalr"))
        .args(["--config", "run.cfg", "enumerate"])
        .current_dir(dir.path())
        .env("QALR_OUTPUT_DIR", "from-env")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("from-env/balls_d3_p1.jsonl").exists());

    ok(qalr(dir.path(), &["--config", "run.cfg", "enumerate", "--p", "0", "--output-dir", "from-flag"]));
    assert_eq!(BallDatabase::load(&dir.path().join("from-flag/balls_d3_p0.jsonl")).unwrap().len(), 1);
}

#[test]
fn usage_and_config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "colour = blue\n").unwrap();
    assert_eq!(qalr(dir.path(), &["--config", "bad.cfg", "enumerate"]).status.code(), Some(1));
    assert_eq!(qalr(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(qalr(dir.path(), &["bound", "--k", "2", "--T", "1", "--alpha", "1", "--schedule", "cubic:5,0,0"]).status.code(), Some(1));
    assert_eq!(qalr(dir.path(), &["bound", "--k", "2", "--T", "1", "--alpha", "0"]).status.code(), Some(1));
    assert_eq!(qalr(dir.path(), &["--help"]).status.code(), Some(0));
}
