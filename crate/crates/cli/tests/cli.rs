use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hubsim_core::config::{parse_config, serialize_config};

fn hubsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hubsim")).args(args).output().expect("binary runs")
}

fn configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut v: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).filter(|p| p.extension().is_some_and(|e| e == "toml")).collect();
    v.sort();
    v
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn print_defaults_round_trips() {
    let o = hubsim(&["print-defaults"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let cfg = parse_config(&text).unwrap();
    assert_eq!(serialize_config(&cfg), text);
}

#[test]
fn shipped_configs_round_trip() {
    let all = configs();
    assert!(all.len() >= 7);
    for p in all {
        let cfg = parse_config(&std::fs::read_to_string(&p).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(parse_config(&serialize_config(&cfg)).unwrap(), cfg, "{}", p.display());
    }
}

#[test]
fn validation_failure_exits_2_with_every_message() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "[devices]\ndroop_mp = -0.01\ngfl_tau_v = 0.05\n[scenario]\nlink = 9\n").unwrap();
    let o = hubsim(&["simulate", "--config", p.to_str().unwrap(), "--mode", "phasor", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("droop_mp: must be > 0"), "{err}");
    assert!(err.contains("gfl_tau_v: needs a unit"), "{err}");
    assert!(!dir.path().join("s1-power-request_zero_phasor.csv").exists());

    let o = hubsim(&["tco", "--distance", "-3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_is_not_a_validation_error() {
    let o = hubsim(&["powerflow", "--config", "/nonexistent/hub.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tco_sweep_writes_report_and_figures() {
    let dir = tempfile::tempdir().unwrap();
    let o = hubsim(&["tco", "--sweep", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("66 kV crossover 50 Hz -> 16.67 Hz at 33.3 km"));
    let fig4 = std::fs::read_to_string(dir.path().join("figure4.csv")).unwrap();
    let lines: Vec<_> = fig4.lines().collect();
    assert_eq!(lines[0], "length_km,66kV_50Hz,66kV_16.67Hz,220kV_50Hz,220kV_16.67Hz");
    assert_eq!(lines.len(), 102);
    assert!(lines[101].starts_with("100.0,"));
    let md = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
    assert!(md.contains("| Total | 115.68 | 115.68 | 38.56 | 38.56 |"));
    assert!(dir.path().join("figure3.csv").exists());

    let o = hubsim(&["tco", "--distance", "40", "--power", "400"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn simulate_is_deterministic_and_has_the_channel_contract() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s2.toml");
    std::fs::write(&cfg, "[scenario]\nscenario = \"s2-converter-trip\"\nt_event = \"0.2 s\"\nt_end = \"0.5 s\"\n").unwrap();
    let mut outputs = vec![];
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = hubsim(&["simulate", "--config", cfg.to_str().unwrap(), "--mode", "emt", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let mut files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        outputs.push(files.iter().map(|f| (f.file_name().unwrap().to_owned(), std::fs::read(f).unwrap())).collect::<Vec<_>>());
    }
    assert_eq!(outputs[0].len(), 4);
    assert_eq!(outputs[0], outputs[1]);
    let trace = hubsim_core::report::read_trace(&dir.path().join("a/s2-converter-trip_zero_emt.csv")).unwrap();
    for ch in ["v_hub_pu", "f_offshore_hz", "p_conv1_pu", "p_conv2_pu", "p_conv3_pu", "p_conv4_pu", "p_conv5_pu"] {
        assert!(trace.channel(ch).is_some(), "{ch}");
    }
    assert_eq!(trace.len(), 5001);
    assert_eq!(trace.events[0].1, "trip conv1");
}

#[test]
fn powerflow_and_linearize_run() {
    let o = hubsim(&["powerflow"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("conv5: P"));
    let o = hubsim(&["linearize", "--cutoff", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("max Re -0.1000"));
}

#[test]
fn shipped_configs_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    for p in configs() {
        let name = p.file_stem().unwrap().to_str().unwrap().to_string();
        let out = dir.path().join(&name);
        let args: Vec<&str> = if name.starts_with("tco") {
            vec!["tco", "--sweep", "--config", p.to_str().unwrap(), "--out", out.to_str().unwrap()]
        } else {
            vec!["compare", "--config", p.to_str().unwrap(), "--out", out.to_str().unwrap()]
        };
        let o = hubsim(&args);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        assert!(std::fs::read_dir(&out).unwrap().count() >= 3, "{name}");
    }
}
