use std::fs;
use std::path::Path;

use coadvise::core::engine::{run_episode, AlgorithmId};
use coadvise::{parse_config, parse_config_str};

fn parse(text: &str) -> Result<coadvise::ExperimentConfig, coadvise::ConfigError> {
    parse_config_str(text, Path::new("."))
}

#[test]
fn default_rate_resolves_per_instance() {
    let cfg = parse(
        r#"{"instance": {"generator": "private_info_lb", "params": {"means": [0.6, 0.5]}},
            "algo": "p2exp4", "T": 10000, "seeds": 1}"#,
    )
    .unwrap();
    assert_eq!(cfg.algorithms[0].params.eta, None);
    let inst = cfg.instances[0].build(cfg.horizon).unwrap();
    let (eta, machine) = cfg.rates(0, &inst, cfg.horizon);
    assert!((eta.unwrap() - 0.005887).abs() < 5e-7, "{eta:?}");
    assert_eq!(machine, None);
}

#[test]
fn explicit_rate_wins() {
    let cfg = parse(
        r#"{"instance": {"bundled": "private_info_2"},
            "algorithms": [{"id": "p2exp4", "params": {"eta": 0.25}}], "horizon": 100}"#,
    )
    .unwrap();
    let inst = cfg.instances[0].build(100).unwrap();
    assert_eq!(cfg.rates(0, &inst, 100).0, Some(0.25));
    assert_eq!(cfg.seeds.len(), 50);
}

#[test]
fn joint_learner_rejected_on_private_context() {
    let err = parse(r#"{"instance": {"bundled": "tabular_4x8"}, "algo": "joint_exp4", "horizon": 100}"#).unwrap_err();
    assert_eq!(err.path, "algo");
    assert!(err.message.contains("Open"), "{err}");
    parse(r#"{"instance": {"bundled": "tabular_4x8_shared"}, "algo": "joint_exp4", "horizon": 100}"#).unwrap();
}

#[test]
fn errors_carry_field_paths() {
    let cases = [
        (
            r#"{"instance": {"generator": "conjecture", "params": {"n1": 3, "delta": 0.7}}, "algo": "exp4", "horizon": 10}"#,
            "instance.params.delta",
        ),
        (
            r#"{"instances": [{"generator": "conjecture", "params": {"n1": 3, "deltaa": 0.2}}], "algo": "exp4", "horizon": 10}"#,
            "instances[0].params",
        ),
        (r#"{"instance": {"bundled": "nope"}, "algo": "exp4", "horizon": 10}"#, "instance.bundled"),
        (r#"{"instance": {"bundled": "defer_4"}, "algo": "exp5", "horizon": 10}"#, "algo"),
        (
            r#"{"instance": {"bundled": "defer_4"}, "algorithms": ["exp4", {"id": "exp4", "params": {"eta": -1}}], "horizon": 10}"#,
            "algorithms[1].params.eta",
        ),
        (r#"{"instance": {"bundled": "defer_4"}, "algo": "exp4", "horizon": 10, "seeds": [1, 1]}"#, "seeds"),
        (r#"{"instance": {"bundled": "defer_4"}, "algo": "exp4"}"#, "horizon"),
        (r#"{"instance": {"bundled": "defer_4"}, "algo": "exp4", "horizon": 10, "colour": 1}"#, "colour"),
    ];
    for (text, path) in cases {
        let err = parse(text).unwrap_err();
        assert!(err.to_string().starts_with(path), "expected `{path}`, got `{err}`");
    }
}

#[test]
fn canonical_form_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("mine.json"),
        r#"{"generator": "random_tabular", "params": {"n1": 2, "n2": 3, "contexts": 3}, "env_seed": 11}"#,
    )
    .unwrap();
    let text = r#"{
        "instances": ["mine.json", {"bundled": "defer_4"}, {"bundled": "defer_4"},
                      {"generator": "opacity_lb", "params": {"means": [0.7, 0.4]}}],
        "algorithms": ["p2exp4", {"id": "indep_pair", "params": {"machine_eta": 0.1}}],
        "horizon": 300, "seeds": [4, 2, 9],
        "emit": {"csv": false},
        "sweep": {"horizons": [100, 300]}
    }"#;
    let cfg = parse_config_str(text, dir.path()).unwrap();
    let names: Vec<_> = cfg.instances.iter().map(|s| s.label().to_string()).collect();
    assert_eq!(names, ["mine", "defer_4", "defer_4#2", "opacity_lb"]);
    assert_eq!(cfg.seeds, [4, 2, 9]);
    assert!(!cfg.emit.csv && cfg.emit.jsonl);

    let canonical = cfg.to_canonical_json();
    let again = parse_config_str(&canonical, Path::new("/nonexistent")).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(again.to_canonical_json(), canonical);

    let path = dir.path().join("cfg.json");
    fs::write(&path, text).unwrap();
    assert_eq!(parse_config(&path).unwrap(), cfg);
}

#[test]
fn bundled_and_inline_agree() {
    let a = parse(r#"{"instance": {"bundled": "conjecture_3"}, "algo": "moss_pairs", "horizon": 200, "seeds": 1}"#)
        .unwrap();
    let b = parse(
        r#"{"instance": {"name": "conjecture_3", "generator": "conjecture", "params": {"n1": 3, "delta": 0.2}, "env_seed": 3},
            "algo": "moss_pairs", "horizon": 200, "seeds": 1}"#,
    )
    .unwrap();
    assert_eq!(a, b);
    let (ia, ib) = (a.instances[0].build(200).unwrap(), b.instances[0].build(200).unwrap());
    let spec = a.algorithms[0].spec();
    assert_eq!(spec.id, AlgorithmId::MossPairs);
    assert_eq!(run_episode(&ia, &spec, 200, 0).unwrap().trace, run_episode(&ib, &spec, 200, 0).unwrap().trace);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 5);
}
