use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logitdyn"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(dir: &Path, args: &[&str]) -> serde_json::Value {
    let mut a = args.to_vec();
    a.push("--json");
    serde_json::from_str(&ok(dir, &a)).unwrap()
}

fn report_without_timestamp(path: &Path) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("generated_at");
    v
}

const SYNTH: &[&str] = &[
    "synth",
    "--n",
    "5000",
    "--classes",
    "10",
    "--depth",
    "6",
    "--error-rate",
    "0.2",
    "--seed",
    "7",
    "--out",
    "d.ltrj",
];

#[test]
fn synth_then_eval_produces_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, SYNTH);
    let ds = logitdyn::dataset::load_trajectories(d.join("d.ltrj")).unwrap();
    assert_eq!((ds.n_examples(), ds.n_classes(), ds.depth()), (5000, 10, 6));
    assert!(d.join("d.manifest.json").exists());

    let v = json(
        d,
        &[
            "eval",
            "--data",
            "d.ltrj",
            "--methods",
            "all",
            "--k",
            "3",
            "--last-l",
            "5",
            "--probe-epochs",
            "10",
            "--out",
            "reports",
        ],
    );
    let row = &v["test_aucpr"]["d"];
    for m in [
        "logit-dynamics",
        "max-logit",
        "entropy",
        "margin",
        "energy",
        "top-k-logits",
    ] {
        let a = row[m].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&a), "{m}: {a}");
    }
    assert!(row["delta"].is_number());

    let report = report_without_timestamp(&d.join("reports/run/report.json"));
    let skipped = &report["in_distribution"][0]["skipped"];
    assert_eq!(skipped, &serde_json::json!(["mahalanobis", "linear-probe"]));
    assert!(d.join("reports/run/in_distribution.csv").exists());
}

#[test]
fn same_seed_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args =
        |out: &'static str| -> Vec<&'static str> { vec!["synth", "--n", "800", "--seed", "3", "--out", out] };
    ok(d, &args("a.ltrj"));
    ok(d, &args("b.ltrj"));
    assert_eq!(
        std::fs::read(d.join("a.ltrj")).unwrap(),
        std::fs::read(d.join("b.ltrj")).unwrap()
    );

    for (out, jobs) in [("r1", "1"), ("r2", "3")] {
        ok(
            d,
            &[
                "eval",
                "--data",
                "a.ltrj",
                "--seed",
                "5",
                "--probe-epochs",
                "8",
                "--k",
                "1,3",
                "--last-l",
                "1,3",
                "--jobs",
                jobs,
                "--out",
                out,
                "--quiet",
            ],
        );
    }
    assert_eq!(
        report_without_timestamp(&d.join("r1/run/report.json")),
        report_without_timestamp(&d.join("r2/run/report.json"))
    );
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let usage = run(d, &["eval", "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("Usage"));
    assert!(usage.stdout.is_empty());

    assert_eq!(run(d, &["inspect", "missing.ltrj"]).status.code(), Some(2));
    std::fs::write(d.join("junk.ltrj"), b"NOTAFILE").unwrap();
    assert_eq!(run(d, &["inspect", "junk.ltrj"]).status.code(), Some(2));

    ok(
        d,
        &["synth", "--hidden", "--n", "200", "--out", "h.lhid", "--quiet"],
    );
    let diverged = run(
        d,
        &[
            "train-heads",
            "--hidden",
            "h.lhid",
            "--last-l",
            "2",
            "--lr",
            "1e300",
            "--out",
            "x.lhed",
        ],
    );
    assert_eq!(diverged.status.code(), Some(3));

    assert_eq!(run(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn hidden_state_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth",
            "--hidden",
            "--n",
            "1500",
            "--classes",
            "5",
            "--layers",
            "6",
            "--out",
            "h.lhid",
            "--quiet",
        ],
    );
    let info = json(d, &["inspect", "h.lhid"]);
    assert_eq!(info["format"], "LHID1");
    assert_eq!(info["n_examples"], 1500);

    ok(
        d,
        &[
            "train-heads",
            "--hidden",
            "h.lhid",
            "--last-l",
            "3",
            "--batch-size",
            "64",
            "--out",
            "heads.lhed",
            "--quiet",
        ],
    );
    assert_eq!(json(d, &["inspect", "heads.lhed"])["format"], "LHED1");
    ok(
        d,
        &[
            "project",
            "--hidden",
            "h.lhid",
            "--heads",
            "heads.lhed",
            "--last-l",
            "3",
            "--out",
            "t.ltrj",
            "--quiet",
        ],
    );
    assert_eq!(json(d, &["inspect", "t.ltrj"])["depth"], 4);

    ok(
        d,
        &[
            "features", "--data", "t.ltrj", "--last-l", "3", "--k", "2", "--out", "f.lfea", "--quiet",
        ],
    );
    let feats = json(d, &["inspect", "f.lfea"]);
    assert_eq!(feats["format"], "LFEA1");
    assert_eq!(feats["n_features"], 4 * 3 + 7);

    let probe = json(
        d,
        &[
            "train-probe",
            "--features",
            "f.lfea",
            "--epochs",
            "10",
            "--out",
            "probe.json",
        ],
    );
    assert!(probe.is_object());
    assert!(d.join("probe.json").exists());

    ok(
        d,
        &[
            "baselines",
            "--hidden",
            "h.lhid",
            "--out",
            "scores.csv",
            "--quiet",
        ],
    );
    let csv = std::fs::read_to_string(d.join("scores.csv")).unwrap();
    assert!(csv.starts_with("example_id,method,error_score"));
    assert_eq!(csv.lines().count(), 1 + 4 * 1500);

    let v = json(
        d,
        &[
            "eval",
            "--hidden",
            "h.lhid",
            "--methods",
            "mahalanobis,linear-probe,logit-dynamics",
            "--k",
            "2",
            "--last-l",
            "1,3",
            "--probe-epochs",
            "8",
            "--out",
            "r",
        ],
    );
    assert!(v["test_aucpr"]["h"]["mahalanobis"].is_number());
    assert!(v["test_aucpr"]["h"]["linear-probe"].is_number());
}

#[test]
fn cross_eval_and_ablate_write_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth",
            "--n",
            "1500",
            "--classes",
            "10",
            "--seed",
            "1",
            "--out",
            "a.ltrj",
            "--quiet",
        ],
    );
    ok(
        d,
        &[
            "synth",
            "--n",
            "1500",
            "--classes",
            "20",
            "--noise-scale",
            "2",
            "--seed",
            "2",
            "--out",
            "b.ltrj",
            "--quiet",
        ],
    );
    let common = [
        "--data",
        "a.ltrj",
        "--data",
        "b.ltrj",
        "--k",
        "3",
        "--last-l",
        "3",
        "--probe-epochs",
        "8",
        "--quiet",
    ];

    let mut cross = vec![
        "cross-eval",
        "--methods",
        "logit-dynamics,max-logit",
        "--out",
        "c",
    ];
    cross.extend(common);
    ok(d, &cross);
    for f in [
        "cross_aucpr_logit-dynamics.csv",
        "cross_diff_max-logit.svg",
        "cross_diff_max-logit.csv",
    ] {
        assert!(d.join("c/run").join(f).exists(), "{f}");
    }

    let mut abl = vec!["ablate", "--out", "a"];
    abl.extend(common);
    ok(d, &abl);
    let m = logitdyn::experiments::Matrix::read_csv(d.join("a/run/ablation_difference.csv")).unwrap();
    assert_eq!(m.row_labels, vec!["a", "b"]);
    assert!(d.join("a/run/ablation_difference.svg").exists());
}

#[test]
fn config_file_drives_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--n", "1000", "--out", "a.ltrj", "--quiet"]);
    std::fs::write(
        d.join("exp.toml"),
        r#"run_id = "from-config"
methods = ["logit-dynamics", "entropy"]
last_l = [2]
top_k = [3]
out_dir = "out"

[probe]
epochs = 5

[[datasets]]
name = "alpha"
trajectories = "a.ltrj"
"#,
    )
    .unwrap();
    let v = json(d, &["eval", "--config", "exp.toml"]);
    assert!(v["test_aucpr"]["alpha"]["entropy"].is_number());
    assert!(d.join("out/from-config/report.json").exists());
}
