use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use heraldsim::scenario::{ScenarioConfig, PRESETS};

fn heraldsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heraldsim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn command_for(preset: &str) -> &'static str {
    match preset {
        p if p.starts_with("fig3") => "fringe",
        "contamination" => "contamination",
        "coincidence-window" => "coincidence",
        _ => "simulate",
    }
}

fn dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn every_preset_runs() {
    let tmp = tempfile::tempdir().unwrap();
    for p in PRESETS {
        let out = tmp.path().join(p);
        let start = Instant::now();
        let o = heraldsim(&[command_for(p), "--preset", p, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{p}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(start.elapsed() < Duration::from_secs(60));
        assert!(!dir_files(&out).is_empty());
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, preset) in [("simulate", "fig2a"), ("fringe", "fig3b"), ("contamination", "contamination")] {
        let a = tmp.path().join(format!("{preset}-a"));
        let b = tmp.path().join(format!("{preset}-b"));
        for d in [&a, &b] {
            assert!(heraldsim(&[cmd, "--preset", preset, "--seed", "7", "--out", d.to_str().unwrap()]).status.success());
        }
        assert_eq!(dir_files(&a), dir_files(&b), "{preset}");
    }
    let c = tmp.path().join("c");
    heraldsim(&["simulate", "--preset", "fig2a", "--seed", "8", "--out", c.to_str().unwrap()]);
    let a = tmp.path().join("fig2a-a");
    assert_ne!(fs::read(a.join("sampled.csv")).unwrap(), fs::read(c.join("sampled.csv")).unwrap());
    assert_eq!(fs::read(a.join("distribution.csv")).unwrap(), fs::read(c.join("distribution.csv")).unwrap());
}

#[test]
fn simulate_reports_paper_rates() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig4");
    let o = heraldsim(&["simulate", "--preset", "fig4", "--format", "json", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let h: serde_json::Value = serde_json::from_slice(&fs::read(out.join("herald.json")).unwrap()).unwrap();
    assert!((h["probability"].as_f64().unwrap() - 4.0 / 243.0).abs() < 1e-12);
    let d: serde_json::Value = serde_json::from_slice(&fs::read(out.join("distribution.json")).unwrap()).unwrap();
    let rows = d.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!(["0,4", "4,0"].contains(&r["outcome"].as_str().unwrap()));
        assert!((r["probability"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn config_files_and_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let circuit = r#"{"modes": 2, "elements": [{"type": "dc", "eta": 0.5, "modes": [0, 1]}]}"#;
    fs::write(tmp.path().join("bs.json"), circuit).unwrap();
    let cfg = r#"{"circuit": {"file": "bs.json"}, "input": {"fock": [1, 1]}, "seed": 3}"#;
    let cfg_path = tmp.path().join("hom.json");
    fs::write(&cfg_path, cfg).unwrap();

    let parsed = ScenarioConfig::from_file(&cfg_path).unwrap();
    let again = ScenarioConfig::from_json(&parsed.to_json().unwrap()).unwrap();
    assert_eq!(ScenarioConfig { base_dir: None, ..parsed }, again);

    let out = tmp.path().join("out");
    let o = heraldsim(&["simulate", "--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dist = fs::read_to_string(out.join("distribution.csv")).unwrap();
    assert!(!dist.contains("\"1,1\""), "{dist}");

    fs::remove_file(tmp.path().join("bs.json")).unwrap();
    let o = heraldsim(&["simulate", "--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"circuit": {"matrix": {"re": [[1, 0], [0, 2]], "im": [[0, 0], [0, 0]]}}, "input": {"fock": [1, 0]}}"#).unwrap();
    assert_eq!(heraldsim(&["simulate", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.code(), Some(3));

    fs::write(&bad, "{not json").unwrap();
    assert_eq!(heraldsim(&["simulate", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(heraldsim(&["simulate", "--out", out.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(heraldsim(&["simulate", "--preset", "nope"]).status.code(), Some(2));
}

#[test]
fn contamination_edge_cases() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = ScenarioConfig::preset("contamination").unwrap();
    let run = |cfg: &ScenarioConfig, name: &str| {
        let path = tmp.path().join(format!("{name}.json"));
        fs::write(&path, cfg.to_json().unwrap()).unwrap();
        heraldsim(&["contamination", "--config", path.to_str().unwrap(), "--out", tmp.path().join(name).to_str().unwrap()])
    };
    let o = run(&cfg, "base");
    assert!(stdout(&o).contains("sector 4 can read as heralded 2,2"));

    if let Some(heraldsim::scenario::InputSpec::Spdc(p)) = &mut cfg.input {
        p.xi = 0.0;
    }
    let o = run(&cfg, "zero");
    assert!(o.status.success());
    assert!(stdout(&o).contains("no sector"));

    if let Some(heraldsim::scenario::InputSpec::Spdc(p)) = &mut cfg.input {
        p.xi = 0.085;
        p.n_max = 2;
    }
    let o = run(&cfg, "trunc");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("truncation"));
}

#[test]
fn coincidence_streams() {
    let tmp = tempfile::tempdir().unwrap();
    let write_stream = |name: &str, delay: f64| {
        let mut s = String::from("channel,t_ns\n");
        for k in 0..200 {
            let t = 1000.0 + k as f64 * 100.0;
            s += &format!("A,{t}\nB,{}\n", t + delay);
        }
        let p = tmp.path().join(name);
        fs::write(&p, s).unwrap();
        p
    };
    let read_count = |dir: &Path| -> u64 {
        let text = fs::read_to_string(dir.join("coincidences.csv")).unwrap();
        text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum()
    };
    for (delay, expected) in [(0.0, 200), (9.0, 0)] {
        let p = write_stream(&format!("d{delay}.csv"), delay);
        let out = tmp.path().join(format!("o{delay}"));
        let o = heraldsim(&["coincidence", "--pulses", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(read_count(&out), expected);
    }
}

#[test]
fn fidelity_command() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    let c = tmp.path().join("c.csv");
    fs::write(&a, "outcome,probability\nA,0.5\nB,0.5\n").unwrap();
    fs::write(&b, "outcome,probability\nA,1\nB,0\n").unwrap();
    fs::write(&c, "outcome,probability\nC,1\n").unwrap();
    let f = |x: &Path, y: &Path| -> f64 {
        let o = heraldsim(&["fidelity", x.to_str().unwrap(), y.to_str().unwrap(), "--out", tmp.path().join("f").to_str().unwrap()]);
        assert!(o.status.success());
        stdout(&o).trim().parse().unwrap()
    };
    assert!((f(&a, &a) - 1.0).abs() < 1e-12);
    assert_eq!(f(&a, &c), 0.0);
    assert!((f(&a, &b) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

    // simulate output feeds straight back in
    let out = tmp.path().join("sim");
    heraldsim(&["simulate", "--preset", "fig2a", "--out", out.to_str().unwrap()]);
    let d = out.join("distribution.csv");
    assert!((f(&d, &d) - 1.0).abs() < 1e-12);
}

#[test]
fn four_point_fringe_is_not_fitted() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = heraldsim(&["fringe", "--preset", "fig3b-4pt", "--out", out.to_str().unwrap()]);
    assert!(stdout(&o).contains("insufficient for fit"));
    assert_eq!(fs::read_to_string(out.join("fringe.csv")).unwrap().lines().count(), 5);
}
