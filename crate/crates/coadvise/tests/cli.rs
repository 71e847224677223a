use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use coadvise::catalog;
use coadvise::core::engine::{run_episode, AlgorithmId, AlgorithmSpec};
use coadvise::sinks::{self, FailureRecord, SummaryRecord};

fn coadvise(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coadvise")).args(args).current_dir(cwd).env_remove("COADVISE_OUT").output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
  "instances": [{"bundled": "tabular_3x4"}, {"bundled": "defer_4"}],
  "algorithms": ["p2exp4", "indep_pair"],
  "horizon": 300,
  "seeds": [7]
}"#;

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let res = coadvise(&["run", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    for f in [sinks::TRANSCRIPTS, sinks::SUMMARY, sinks::PLOT] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    assert!(!out.join(sinks::PARTIAL).exists());
    assert!(!out.join(sinks::FAILURES).exists());

    // one seed: the summary is that episode's final regret
    let summary: Vec<SummaryRecord> = sinks::read_jsonl(&out.join(sinks::SUMMARY)).unwrap();
    assert_eq!(summary.len(), 4);
    let inst = catalog::lookup("defer_4").unwrap().build(300).unwrap();
    let ep = run_episode(&inst, &AlgorithmSpec::new(AlgorithmId::IndepPair), 300, 7).unwrap();
    let cell = summary.iter().find(|s| s.instance == "defer_4" && s.algo == "indep_pair").unwrap();
    assert_eq!(cell.mean_final_regret, ep.final_regret());
    assert_eq!(cell.ci95, 0.0);
    assert_eq!(cell.seeds, 1);

    let transcript = fs::read_to_string(out.join(sinks::TRANSCRIPTS)).unwrap();
    assert!(transcript.starts_with("run_id,algo,instance,seed,t,"));
    assert_eq!(transcript.lines().count(), 1 + 4 * 300);
}

#[test]
fn emit_reproduces_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    assert!(coadvise(&["run", "--config", &cfg, "--out", out_s], dir.path()).status.success());
    let plot = fs::read(out.join(sinks::PLOT)).unwrap();
    fs::remove_file(out.join(sinks::PLOT)).unwrap();
    assert!(coadvise(&["emit", "--out", out_s], dir.path()).status.success());
    assert_eq!(fs::read(out.join(sinks::PLOT)).unwrap(), plot);
}

#[test]
fn failing_verdict_exits_one_with_failure_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"instances": [{"bundled": "tabular_4x8_shared"}, {"bundled": "defer_4"}], "algo": "p2exp4", "horizon": 50}"#,
    );
    let out = dir.path().join("v");
    let res = coadvise(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(res.status.code(), Some(1));
    let failures: Vec<FailureRecord> = sinks::read_jsonl(&out.join(sinks::FAILURES)).unwrap();
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0].instance, "tabular_4x8_shared");
    assert_eq!(failures[0].command, "verify");
    assert!(!out.join(sinks::PARTIAL).exists());
}

#[test]
fn bad_config_exits_two_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"instance": {"bundled": "tabular_4x8"}, "algo": "joint_exp4", "horizon": 5}"#);
    let res = coadvise(&["run", "--config", &cfg], dir.path());
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("algo: "), "{err}");
    assert!(!dir.path().join("results").exists());

    assert_eq!(coadvise(&["run"], dir.path()).status.code(), Some(2));
}

#[test]
fn out_dir_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"instance": {"bundled": "defer_4"}, "algo": "indep_pair", "horizon": 20, "seeds": 2}"#);
    let env_out = dir.path().join("from_env");
    let res = Command::new(env!("CARGO_BIN_EXE_coadvise"))
        .args(["run", "--config", &cfg])
        .current_dir(dir.path())
        .env("COADVISE_OUT", &env_out)
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(env_out.join(sinks::SUMMARY).exists());
    assert!(!dir.path().join("results").exists());

    assert!(coadvise(&["run", "--config", &cfg], dir.path()).status.success());
    assert!(dir.path().join("results").join(sinks::SUMMARY).exists());

    let flag = dir.path().join("flag");
    let res = Command::new(env!("CARGO_BIN_EXE_coadvise"))
        .args(["run", "--config", &cfg, "--out", flag.to_str().unwrap()])
        .current_dir(dir.path())
        .env("COADVISE_OUT", &env_out)
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(flag.join(sinks::SUMMARY).exists());
}

#[test]
fn couple_and_verify_run_without_config() {
    let dir = tempfile::tempdir().unwrap();
    let res = coadvise(&["couple", "--seeds", "2", "--out", "c"], dir.path());
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(dir.path().join("c").join(sinks::COUPLE).exists());
    let res = coadvise(&["verify", "--out", "v"], dir.path());
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(dir.path().join("v").join(sinks::VERIFY).exists());
}
