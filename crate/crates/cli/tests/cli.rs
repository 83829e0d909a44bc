use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn reserve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reserve"))
        .args(args)
        .env_remove("RESERVE_CONFIG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = reserve(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn golden() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.example.json")
}

const GOLDEN_ARGS: [&str; 13] = [
    "simulate",
    "--seed",
    "7",
    "--setting",
    "S2",
    "--variant",
    "M1",
    "--auctions",
    "2000",
    "--users",
    "200",
    "--placements",
    "10",
];

#[test]
fn simulate_is_deterministic_and_matches_the_golden_report() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let mut args = GOLDEN_ARGS.to_vec();
        args.extend(["--out", path(out)]);
        ok(&args);
    }
    for file in ["report.json", "report.txt"] {
        assert_eq!(
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap()
        );
    }
    assert_eq!(
        std::fs::read_to_string(a.join("report.json")).unwrap(),
        std::fs::read_to_string(golden()).unwrap()
    );
}

#[test]
fn m3_report_counts_skipped_auctions() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "simulate",
        "--variant",
        "M3",
        "--auctions",
        "1000",
        "--out",
        path(dir.path()),
    ]);
    let report = json(&dir.path().join("report.json"));
    let m3 = &report["result"]["methods"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["method"] == "M3")
        .unwrap()["metrics"];
    assert!(m3["full_censored_rate"].as_f64().unwrap() > 0.0);
    assert!(m3["skipped"].as_u64().unwrap() > 0);
}

#[test]
fn usage_and_config_errors_exit_nonzero() {
    let out = reserve(&["simulate", "--variant", "M1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--out"));

    let dir = tempfile::tempdir().unwrap();
    let out = reserve(&["simulate", "--variant", "M9", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"stream": {"scale": -1.0}}"#).unwrap();
    let out = reserve(&[
        "--config",
        path(&bad),
        "simulate",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scales"));
}

#[test]
fn config_from_environment_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"seed": 3, "engine": {"grid": {"levels": 10}}, "stream": {"n_users": 50, "n_placements": 4, "n_auctions": 400}, "experiment": {"variants": ["M2"]}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_reserve"))
        .args(["simulate", "--auctions", "600", "--out", path(&out)])
        .env("RESERVE_CONFIG", &config)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let r = json(&out.join("report.json"));
    assert_eq!(r["seed"], 3);
    assert_eq!(r["result"]["levels"], 10);
    assert_eq!(
        r["result"]["train_auctions"].as_u64().unwrap()
            + r["result"]["test_auctions"].as_u64().unwrap(),
        600
    );
    assert_eq!(r["config"]["engine"]["variant"], "M2");
}

fn write_log(dir: &Path) -> PathBuf {
    let log = dir.join("log.jsonl");
    ok(&[
        "simulate",
        "--seed",
        "2",
        "--variant",
        "M1",
        "--auctions",
        "1200",
        "--users",
        "80",
        "--placements",
        "6",
        "--out",
        path(&dir.join("sim")),
        "--log-out",
        path(&log),
    ]);
    log
}

#[test]
fn replay_split_equals_one_shot() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_log(dir.path());
    let text = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1200);
    let (first, second) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    std::fs::write(&first, lines[..500].join("\n") + "\n").unwrap();
    std::fs::write(&second, lines[500..].join("\n") + "\n").unwrap();
    let (whole, half, rest) = (
        dir.path().join("w.ckpt"),
        dir.path().join("h.ckpt"),
        dir.path().join("r.ckpt"),
    );

    ok(&[
        "replay",
        "--log",
        path(&log),
        "--checkpoint-out",
        path(&whole),
        "--out",
        path(&dir.path().join("w.json")),
    ]);
    ok(&[
        "replay",
        "--log",
        path(&first),
        "--checkpoint-out",
        path(&half),
    ]);
    ok(&[
        "replay",
        "--log",
        path(&second),
        "--checkpoint-in",
        path(&half),
        "--checkpoint-out",
        path(&rest),
    ]);
    assert_eq!(
        std::fs::read(&whole).unwrap(),
        std::fs::read(&rest).unwrap()
    );

    let report = json(&dir.path().join("w.json"));
    assert_eq!(report["diagnostics"]["events"], 1200);
    assert_eq!(report["diagnostics"]["comparable"], 1200);

    let header: serde_json::Value =
        serde_json::from_str(&ok(&["checkpoint", "inspect", path(&rest)])).unwrap();
    assert_eq!(header["counters"]["events"], 1200);
    assert_eq!(header["levels"], 32);

    let out = reserve(&[
        "replay",
        "--log",
        path(&second),
        "--checkpoint-in",
        path(&half),
        "--levels",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("levels"));
}

#[test]
fn replay_modes() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.jsonl");
    std::fs::write(
        &log,
        concat!(
            r#"{"ts":10,"user":"a","placement":"p","floor":0,"outcome":{"b1":900000,"close":100000}}"#,
            "\n",
            r#"{"ts":9,"user":"b","placement":"p","floor":0,"outcome":"lost"}"#,
            "\n",
            "not json\n",
            r#"{"ts":12,"user":"a","placement":"p","floor":50000,"outcome":"lost"}"#,
            "\n",
        ),
    )
    .unwrap();
    let out = reserve(&["replay", "--log", path(&log)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let r: serde_json::Value =
        serde_json::from_str(&ok(&["replay", "--log", path(&log), "--lenient"])).unwrap();
    let d = &r["diagnostics"];
    assert_eq!(d["events"], 2);
    let lines: Vec<u64> = d["rejected"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["line"].as_u64().unwrap())
        .collect();
    assert_eq!(lines, vec![2, 3]);
}

#[test]
fn empty_log_gives_the_initial_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("empty.jsonl");
    std::fs::write(&log, "").unwrap();
    let (a, b) = (dir.path().join("a.ckpt"), dir.path().join("b.ckpt"));
    let r: serde_json::Value = serde_json::from_str(&ok(&[
        "replay",
        "--log",
        path(&log),
        "--checkpoint-out",
        path(&a),
    ]))
    .unwrap();
    assert_eq!(r["diagnostics"]["events"], 0);
    ok(&[
        "replay",
        "--log",
        path(&log),
        "--checkpoint-in",
        path(&a),
        "--checkpoint-out",
        path(&b),
    ]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let header: serde_json::Value =
        serde_json::from_str(&ok(&["checkpoint", "inspect", path(&a)])).unwrap();
    assert_eq!(header["users"], 0);
    assert_eq!(header["last_update"], serde_json::Value::Null);
}

#[test]
fn bench_reports_both_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    let table = ok(&[
        "bench",
        "--levels",
        "20",
        "--users",
        "50",
        "--placements",
        "5",
        "--warmup",
        "50",
        "--iterations",
        "300",
        "--out",
        path(&out),
    ]);
    assert!(table.contains("censored total") && table.contains("uncensored total"));
    let r = json(&out);
    for p in ["censored", "uncensored"] {
        assert_eq!(r[p]["total"]["samples"], 300);
        assert!(r[p]["total"]["p99_us"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn tune_reports_the_surface() {
    let r: serde_json::Value = serde_json::from_str(&ok(&[
        "tune",
        "--auctions",
        "600",
        "--users",
        "40",
        "--placements",
        "4",
        "--rates",
        "1e-6,1e-3,1e-1",
        "--precisions",
        "1,100",
    ]))
    .unwrap();
    let cells = r["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 6);
    let best = cells
        .iter()
        .map(|c| c["average_revenue"].as_f64().unwrap())
        .fold(f64::MIN, f64::max);
    assert_eq!(r["best_cell"]["average_revenue"].as_f64().unwrap(), best);
}
