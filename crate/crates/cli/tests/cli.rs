use std::path::Path;
use std::process::{Command, Output};

/// Runs the binary with whitespace-separated arguments.
fn fastslow(args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fastslow"))
        .args(args.split_whitespace())
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", stderr(out));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn gen_data(dir: &Path) -> String {
    let path = dir.join("toy.csv").display().to_string();
    let out = fastslow(&format!(
        "gen-data --samples 300 --features 10 --significant 3 --seed 7 -o {path}"
    ));
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

#[test]
fn gen_data_writes_the_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.csv");
    let out = fastslow(&format!(
        "gen-data --samples 10000 --features 50 --significant 10 --seed 7 -o {}",
        path.display()
    ));
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 51);
    assert_eq!(header[50], "y");
    assert_eq!(lines.count(), 10_000);
}

#[test]
fn fast_slow_run_writes_a_report_and_names_features() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_data(dir.path());
    let report = dir.path().join("report.json");
    let out = fastslow(&format!(
        "run-fastslow --data {data} --target y --mu-slow 0.1 --mu-fast 1.0 --alpha 0.9 --pop 8 --rounds 2 --inner 2 \
         --seed 1 -o {}",
        report.display()
    ));
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = stdout(&out);
    assert_eq!(summary.lines().count(), 1);
    assert!(summary.contains("best score") && summary.contains("f0"), "{summary}");

    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(value["algorithm"], "fast_slow");
    assert_eq!(value["config"]["fast_slow"]["outer_rounds"], 2);
    assert_eq!(value["trajectory"].as_array().unwrap().len(), 3);
    assert!(value.get("duration_secs").is_none());
}

#[test]
fn invalid_mutation_rate_is_a_usage_error() {
    let out = fastslow("run-ga --mu 1.5 --samples 100");
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("[0, 1]"), "{}", stderr(&out));
}

#[test]
fn unknown_flags_and_subcommands_exit_with_usage() {
    for args in ["run-ga --bogus", "frobnicate", ""] {
        let out = fastslow(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(stderr(&out).contains("Usage"), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn semantic_validation_is_a_usage_error() {
    let out = fastslow("run-ga --pop 1 --samples 100");
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("population size"));
    let out = fastslow("baseline --folds 1 --samples 100");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn runtime_failures_exit_with_two() {
    let out = fastslow("baseline --data /definitely/missing.csv");
    assert_eq!(out.status.code(), Some(2));
    let out = fastslow("baseline --samples 100 --features 5 --significant 2 -o /proc/nope/out.json");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_arguments_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_data(dir.path());
    let run = |name: &str, extra: &str| {
        let path = dir.path().join(name);
        let out = fastslow(&format!(
            "run-ga --data {data} --pop 6 --generations 4 --seed 3 {extra} -o {}",
            path.display()
        ));
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.json", ""), run("b.json", ""));
    assert_eq!(run("c.json", "--serial"), run("a.json", ""));
    assert_eq!(run("d.csv", ""), run("e.csv", ""));
}

#[test]
fn timing_is_opt_in() {
    let out = fastslow("run-ga --samples 120 --features 6 --significant 2 --pop 4 --generations 2 --timing");
    assert!(json(&out)["duration_secs"].as_f64().unwrap() >= 0.0);
    assert!(stderr(&out).contains("best score"));
}

#[test]
fn command_line_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(
        &config,
        "# small problem\nsamples = 150\nfeatures = 8\nsignificant = 2\npop = 7\nalpha = 0.7\nserial = true\n\
         distinct_parents = false\n",
    )
    .unwrap();
    let value = json(&fastslow(&format!(
        "run-ga --config {} --pop 5 --generations 2",
        config.display()
    )));
    assert_eq!(value["config"]["ga"]["population_size"], 5);
    assert_eq!(value["config"]["ga"]["alpha"], 0.7);
    assert_eq!(value["dataset"]["n_features"], 8);

    std::fs::write(&config, "pop 7\n").unwrap();
    let out = fastslow(&format!("run-ga --config {}", config.display()));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn preset_fills_unset_flags_only() {
    let value = json(&fastslow("baseline --preset quick --features 6 --significant 2"));
    assert_eq!(value["n_samples"], 1000);
    let value = json(&fastslow(
        "baseline --preset quick --samples 200 --features 6 --significant 2",
    ));
    assert_eq!(value["n_samples"], 200);
}

#[test]
fn sweeps_write_one_csv_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_data(dir.path());
    let path = dir.path().join("sweep.csv");
    let out = fastslow(&format!(
        "sweep-mu --data {data} --values 0.05,0.5 --runs 2 --pop 4 --generations 2 -o {}",
        path.display()
    ));
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("best mean score"));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("mutation_rate,"));

    let value = json(&fastslow(&format!(
        "sweep-alpha --data {data} --values 0.6,1 --runs 2 --pop 4 --rounds 1 --inner 1 --format json"
    )));
    assert_eq!(value["axis"], "alpha");
    assert_eq!(value["points"].as_array().unwrap().len(), 2);
}

#[test]
fn help_lists_flags_with_defaults() {
    let cases: [(&str, &[&str]); 6] = [
        (
            "gen-data",
            &["--samples", "[default: 10000]", "--significant", "--seed"],
        ),
        (
            "run-ga",
            &[
                "--mu ",
                "[default: 0.1]",
                "--alpha",
                "[default: 0.9]",
                "--pop",
                "--generations",
                "--folds",
                "--distinct-parents",
                "--serial",
            ],
        ),
        (
            "run-fastslow",
            &[
                "--mu-fast",
                "[default: 1]",
                "--mu-slow",
                "--inner",
                "[default: 5]",
                "--rounds",
                "[default: 4]",
            ],
        ),
        ("sweep-mu", &["--values", "--runs", "[default: 50]"]),
        ("sweep-alpha", &["--values", "[default: 0.5,0.7,0.9,1]"]),
        (
            "baseline",
            &[
                "--estimator",
                "[default: logistic]",
                "--lr-solver",
                "[default: newton]",
                "--config",
            ],
        ),
    ];
    for (sub, expected) in cases {
        let out = fastslow(&format!("{sub} --help"));
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        for needle in expected {
            assert!(text.contains(needle), "{sub} --help lacks {needle}:\n{text}");
        }
    }
}

#[test]
fn baseline_on_a_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_data(dir.path());
    let out = fastslow(&format!(
        "baseline --data {data} --stratified --estimator forest --rf-trees 5"
    ));
    let value = json(&out);
    assert_eq!(value["estimator"]["kind"], "random_forest");
    assert!(value["score"].as_f64().unwrap() > 0.5);
    assert!(stderr(&out).contains("baseline score"));
}
