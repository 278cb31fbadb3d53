use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ftcal::data::{load_dataset, read_dataset};
use ftcal::metrics::{report, EvalReport};
use ftcal::model::{CalibrationModel, EFFECTIVE_THRESHOLD};
use tempfile::TempDir;

fn ftcal(args: &[&str]) -> Output {
    ftcal_env(args, &[])
}

fn ftcal_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ftcal"));
    cmd.args(args).env_remove("FTCAL_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const AFFINE_CONFIG: &str = "nonlinearity = 0.0\nnoise = 0.0\ndrift = 0.0\nseed = 4\n";

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: TempDir::new().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn simulate(&self, name: &str, config: Option<&str>, samples: usize, seed: u64) -> PathBuf {
        let out = self.path(name);
        let mut args = vec![
            "simulate".to_string(),
            "--samples".into(),
            samples.to_string(),
            "--seed".into(),
            seed.to_string(),
            "--out".into(),
            p(&out).into(),
        ];
        if let Some(text) = config {
            let cfg = self.path(&format!("{name}.toml"));
            fs::write(&cfg, text).unwrap();
            args.push("--config".into());
            args.push(p(&cfg).into());
        }
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        ok(ftcal(&args));
        out
    }
}

#[test]
fn affine_fit_validates_near_perfectly() {
    let ws = Workspace::new();
    let train = ws.simulate("train.csv", Some(AFFINE_CONFIG), 400, 1);
    let val = ws.simulate("val.csv", Some(AFFINE_CONFIG), 200, 2);
    let model = ws.path("m.json");
    let out = ok(ftcal(&[
        "fit", "--train", p(&train), "--val", p(&val), "--degree", "1", "--lambda", "0",
        "--out", p(&model),
    ]));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for bf in summary["validation"]["channel_best_fit"].as_array().unwrap() {
        assert!(bf.as_f64().unwrap() > 0.99);
    }

    // Evaluating on its own noiseless generating data.
    let report_path = ws.path("r.json");
    ok(ftcal(&["eval", "--model", p(&model), "--data", p(&train), "--out", p(&report_path)]));
    let r: EvalReport = serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(r.channel_rmse.iter().all(|&e| e <= 1e-6), "{:?}", r.channel_rmse);
}

#[test]
fn lasso_fit_is_sparse_and_inspect_lists_survivors() {
    let ws = Workspace::new();
    let data = ws.simulate("d.csv", None, 1500, 3);
    let model = ws.path("m.json");
    ok(ftcal(&[
        "fit", "--data", p(&data), "--split", "0.8", "--degree", "4", "--lambda", "50",
        "--prune", "1e-9", "--deterministic", "--out", p(&model),
    ]));
    let m = CalibrationModel::load(&model).unwrap();
    let effective = m.count_effective(EFFECTIVE_THRESHOLD);
    assert_eq!(m.total_coefficients(), 1980);
    assert!(effective < 1980, "{effective}");
    assert!(m.metadata.fitted_at.is_none());

    let out = ok(ftcal(&["inspect", "--model", p(&model)]));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = text.lines().skip_while(|l| !l.starts_with("output")).skip(1).count();
    assert_eq!(rows, effective);
    assert!(text.contains('·') || text.contains('²'));
}

#[test]
fn predict_then_score_matches_eval() {
    let ws = Workspace::new();
    let train = ws.simulate("train.csv", None, 500, 5);
    let val = ws.simulate("val.csv", None, 150, 6);
    let model = ws.path("m.json");
    ok(ftcal(&["fit", "--train", p(&train), "--degree", "2", "--out", p(&model)]));

    let predictions = ws.path("pred.csv");
    ok(ftcal(&["predict", "--model", p(&model), "--data", p(&val), "--out", p(&predictions)]));
    let eval = ok(ftcal(&["eval", "--model", p(&model), "--data", p(&val)]));
    let from_eval: EvalReport = serde_json::from_slice(&eval.stdout).unwrap();

    // Score the prediction file against the dataset outside the tool.
    let truth = load_dataset(&val).unwrap();
    let mut reader = csv::Reader::from_path(&predictions).unwrap();
    let predicted: Vec<ftcal::Wrench> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            let v: Vec<f64> = r.iter().skip(1).map(|c| c.parse().unwrap()).collect();
            ftcal::Wrench::from_slice(&v).unwrap()
        })
        .collect();
    let external = report(
        truth.wrenches(),
        &predicted,
        from_eval.effective_coefficients,
        from_eval.total_coefficients,
    )
    .unwrap();
    assert_eq!(external, from_eval);

    let csv_out = ok(ftcal(&["eval", "--model", p(&model), "--data", p(&val), "--format", "csv"]));
    let text = String::from_utf8(csv_out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), EvalReport::CSV_HEADER);
    assert_eq!(text.lines().nth(1).unwrap(), from_eval.csv_row());
}

#[test]
fn sweeps_are_byte_identical_across_runs_and_thread_counts() {
    let ws = Workspace::new();
    let train = ws.simulate("train.csv", None, 300, 7);
    let val = ws.simulate("val.csv", None, 100, 8);
    let run = |name: &str, threads: &str| {
        let out = ws.path(name);
        ok(ftcal_env(
            &[
                "fit", "--sweep", "--deterministic", "--train", p(&train), "--val", p(&val),
                "--degree", "3", "--no-temperature", "--out", p(&out),
            ],
            &[("FTCAL_THREADS", threads)],
        ));
        fs::read(out).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "1");
    let c = run("c.csv", "3");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], ftcal::cli::SWEEP_HEADER);
    // Degrees 1..=3, then six λ values at degree 3.
    assert_eq!(lines.len(), 1 + 3 + 6);
    assert!(lines[4].starts_with("3,0.5,"));
}

#[test]
fn simulate_is_deterministic() {
    let ws = Workspace::new();
    let a = ws.simulate("a.csv", None, 50, 9);
    let b = ws.simulate("b.csv", None, 50, 9);
    let c = ws.simulate("c.csv", None, 50, 10);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    let d = read_dataset(fs::File::open(&a).unwrap()).unwrap();
    assert_eq!(d.len(), 50);
    assert!(d.has_temperature());

    for trajectory in ["grid", "lifting"] {
        let out = ws.path(&format!("{trajectory}.csv"));
        ok(ftcal(&["simulate", "--trajectory", trajectory, "--out", p(&out)]));
        assert!(load_dataset(&out).unwrap().len() > 1);
    }
}

#[test]
fn exit_codes() {
    let ws = Workspace::new();
    let data = ws.simulate("d.csv", None, 60, 11);
    let model = ws.path("m.json");
    let code = |args: &[&str]| ftcal(args).status.code().unwrap();

    // Usage and specification errors.
    assert_eq!(code(&["fit", "--train", p(&data), "--degree", "0", "--out", p(&model)]), 1);
    assert_eq!(code(&["fit", "--train", p(&data), "--lambda", "-1", "--out", p(&model)]), 1);
    assert_eq!(code(&["fit", "--train", p(&data)]), 1);
    assert_eq!(code(&["fit", "--bogus"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["fit", "--sweep", "--lambda", "1", "--train", p(&data)]), 1);
    let threads = ftcal_env(&["simulate", "--samples", "5"], &[("FTCAL_THREADS", "zero")]);
    assert_eq!(threads.status.code(), Some(1));

    // Data errors.
    assert_eq!(code(&["fit", "--train", p(&ws.path("missing.csv")), "--out", p(&model)]), 2);
    let broken = ws.path("broken.csv");
    fs::write(&broken, "u1,u2,u3,u4,u5,u6,fx,fy,fz,tx,ty\n1,2,3,4,5,6,1,2,3,4,5\n").unwrap();
    let out = ftcal(&["fit", "--train", p(&broken), "--out", p(&model)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tz"));
    fs::write(&model, "{\"format\": \"ftcal-model\", \"version\": 9}").unwrap();
    assert_eq!(code(&["eval", "--model", p(&model), "--data", p(&data)]), 2);

    // Help is not an error.
    assert_eq!(code(&["--help"]), 0);
}
