use std::path::Path;
use std::process::{Command, Output};

use advsurv::io::{load_trials, persist_trials};
use advsurv::{HyperParams, TrialRecord, TrialStatus};

fn advsurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_advsurv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL_STUDY: &str = r#"
schema_version = 1
n_trials = 12
seed = 3

[dataset]
seed = 3
n_classes = 3
n_dims = 2
n_samples = 300

[tpe]
n_startup = 4
"#;

fn small_study(dir: &Path, name: &str) -> std::path::PathBuf {
    let config = dir.join("study.toml");
    std::fs::write(&config, SMALL_STUDY).unwrap();
    let log = dir.join(name);
    let out = advsurv(&["study", "run", "--config", p(&config), "--out", p(&log)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    log
}

fn record(i: u64, acc_adv: f64) -> TrialRecord {
    TrialRecord {
        trial_id: i,
        dataset_tag: "blobs".into(),
        hardware_tag: "cpu".into(),
        random_state: i % 3,
        hyperparams: HyperParams {
            learning_rate: 0.01,
            batch_size: 16 << (i % 3),
            epochs: 2 + i % 4,
            bit_depth: None,
        },
        epsilon: 0.2 * (1 + i % 5) as f64,
        n_train: 500,
        n_test: 100,
        n_attack: 50,
        t_train_total: 1.0 + 0.1 * i as f64,
        t_predict_total: 0.01,
        t_attack_total: 0.02 + 0.001 * (i % 7) as f64,
        acc_benign: 0.9,
        acc_adv,
        status: TrialStatus::Ok,
        error: None,
    }
}

#[test]
fn study_run_is_reproducible_and_never_overwrites() {
    let dir = tempfile::tempdir().unwrap();
    let a = small_study(dir.path(), "a.log");
    let b = small_study(dir.path(), "b.log");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(load_trials(&a).unwrap().len(), 12);

    let before = std::fs::read(&a).unwrap();
    let config = dir.path().join("study.toml");
    let again = advsurv(&["study", "run", "--config", p(&config), "--out", p(&a)]);
    assert_eq!(again.status.code(), Some(1));
    assert_eq!(std::fs::read(&a).unwrap(), before);
}

#[test]
fn compare_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let log = small_study(dir.path(), "t.log");
    let run = || {
        let out = advsurv(&["aft", "compare", "--trials", p(&log), "--seed", "7"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let first = run();
    assert_eq!(first, run());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("# schema_version: 1, kind: compare\nmodel,AIC,BIC,Conc,Test Conc,ICI,Test ICI,E50,Test E50\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = advsurv(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert_eq!(advsurv(&["--help"]).status.code(), Some(0));
}

#[test]
fn fit_without_events_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("t.log");
    let records: Vec<TrialRecord> = (0..10).map(|i| record(i, 1.0)).collect();
    persist_trials(&records, &log).unwrap();
    let out = advsurv(&["aft", "fit", "--trials", p(&log)]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("event"), "{msg}");
}

#[test]
fn import_fit_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ext.csv");
    let mut text = String::from("id,random_state,learning_rate,batch_size,epochs,epsilon,n_train,n_test,n_attack,t_train_total,t_predict_total,t_attack_total,acc_benign,robust_acc\n");
    for i in 0..30u64 {
        let r = record(i, ((i * 7) % 40) as f64 / 50.0);
        text += &format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.trial_id,
            r.random_state,
            r.hyperparams.learning_rate,
            r.hyperparams.batch_size,
            r.hyperparams.epochs,
            r.epsilon,
            r.n_train,
            r.n_test,
            r.n_attack,
            r.t_train_total,
            r.t_predict_total,
            r.t_attack_total,
            r.acc_benign,
            r.acc_adv
        );
    }
    text += "30,0,0.01,16,2,0.2,500,100,50,1,0.01,0.02,0.9,1.3\n";
    std::fs::write(&csv, text).unwrap();

    let log = dir.path().join("t.log");
    let missing = advsurv(&["trials", "import", p(&csv), "--out", p(&log)]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("missing: acc_adv"));

    let out = advsurv(&["trials", "import", p(&csv), "--map", "acc_adv=robust_acc", "--map", "trial_id=id", "--out", p(&log)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(load_trials(&log).unwrap().len(), 30);

    let model = dir.path().join("m.json");
    let out = advsurv(&["aft", "fit", "--trials", p(&log), "--family", "log_logistic", "--out", p(&model)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    for (kind, first_column) in [("trash", "trial_id"), ("cost", "trial_id"), ("calibration", "t0")] {
        let out = advsurv(&["report", kind, "--trials", p(&log), "--model", p(&model)]);
        assert!(out.status.success(), "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with(first_column), "{kind}");
    }
    let out = advsurv(&["report", "coefficients", "--model", p(&model)]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("log_logistic,random_state,")));
    assert_eq!(advsurv(&["report", "histogram"]).status.code(), Some(1));
}
