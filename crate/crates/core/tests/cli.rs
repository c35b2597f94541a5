//! The `freqdenoise` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use freqdenoise::data::{load_segments, LoadOptions, SegmentFormat, SignalKind};
use freqdenoise::model::load_weights;
use freqdenoise::tensor::fft;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_freqdenoise"));
    c.env_remove("FREQDENOISE_THREADS");
    c
}

fn run(c: &mut Command) -> Output {
    c.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = r#"{
    "seed": 3,
    "signal_length": 64,
    "model": {
        "steps": 2,
        "channel_progression": [1, 2, 1],
        "branch_layers": 2,
        "branch_hidden_channels": 3,
        "branch_kernel_size": 3
    },
    "train": {"epochs": 5, "batch_size": 2, "steps_per_epoch": 1, "test_examples": 2, "checkpoint_every": 2},
    "data": {"synthetic_count": 8},
    "eval": {"per_level_count": 2}
}"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn train(dir: &Path) -> PathBuf {
    let cfg = write_config(dir, "run.json", SMALL);
    let o = run(bin().args(["train", "--config"]).arg(&cfg));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    cfg
}

#[test]
fn synth_writes_three_reproducible_files() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        let o = run(bin()
            .args(["synth", "--count", "16", "--seed", "4", "--out"])
            .arg(dir.path().join(sub)));
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for kind in [SignalKind::Eeg, SignalKind::Eog, SignalKind::Emg] {
        let name = format!("{kind}.ednb");
        let a = std::fs::read(dir.path().join("a").join(&name)).unwrap();
        assert_eq!(a, std::fs::read(dir.path().join("b").join(&name)).unwrap());
        let opts = LoadOptions {
            signal_length: 512,
            kind: Some(kind),
        };
        let segs = load_segments(dir.path().join("a").join(&name), SegmentFormat::Ednb, &opts).unwrap();
        assert_eq!(segs.len(), 16);
    }
}

#[test]
fn synth_rejects_zero_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().args(["synth", "--count", "0", "--out"]).arg(dir.path()));
    assert_eq!(code(&o), 2);
    let o = run(bin().args(["synth", "--count", "2", "--length", "100", "--out"]).arg(dir.path()));
    assert_eq!(code(&o), 2);
}

#[test]
fn train_resume_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = train(dir.path());
    let out = dir.path().join("run");
    let history = std::fs::read_to_string(out.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 6);
    assert!(history.starts_with("epoch,train_loss,test_loss,seconds\n"));
    let weights = std::fs::read(out.join("weights.ednw")).unwrap();
    for e in [2, 4, 5] {
        assert!(out.join(format!("checkpoints/checkpoint_epoch{e:04}.ednw")).exists());
    }

    // resuming epoch 4 to 5 reproduces the uninterrupted weights
    let o = run(bin()
        .args(["train", "--config"])
        .arg(&cfg)
        .arg("--resume")
        .arg(out.join("checkpoints/checkpoint_epoch0004.ednw")));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(std::fs::read(out.join("weights.ednw")).unwrap(), weights);

    let eval = |dest: &str, threads: &str| {
        let o = run(bin()
            .args(["eval", "--artifact", "both", "--threads", threads, "--weights"])
            .arg(out.join("weights.ednw"))
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(dest)));
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    };
    eval("e1", "1");
    eval("e2", "3");
    for kind in ["eog", "emg"] {
        let csv = std::fs::read_to_string(dir.path().join("e1").join(format!("{kind}_report.csv"))).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 12);
        assert_eq!(lines[0], "artifact,snr_db,rrmse_t,rrmse_f,cc,n");
        assert!(lines[11].starts_with(&format!("{kind},summary,")));
        for f in ["report.csv", "report.json", "comparison.csv"] {
            let name = format!("{kind}_{f}");
            assert_eq!(
                std::fs::read(dir.path().join("e1").join(&name)).unwrap(),
                std::fs::read(dir.path().join("e2").join(&name)).unwrap(),
                "{name}"
            );
        }
        let json: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("e1").join(format!("{kind}_report.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(json["rows"].as_array().unwrap().len(), 10);
    }
}

#[test]
fn invalid_configs_exit_with_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SMALL.replace(r#""epochs": 5"#, r#""epochs": 5, "loss_weights": {"a": 0, "b": 0, "c": 0}"#);
    let cfg = write_config(dir.path(), "bad.json", &bad);
    let o = run(bin().args(["train", "--config"]).arg(&cfg));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("loss_weights"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "unknown.json", r#"{"trian": {}}"#);
    assert_eq!(code(&run(bin().args(["train", "--config"]).arg(&cfg))), 2);
    assert_eq!(code(&run(bin().arg("frobnicate"))), 2);
}

#[test]
fn runtime_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", SMALL);
    let o = run(bin()
        .args(["eval", "--artifact", "eog", "--weights"])
        .arg(dir.path().join("missing.ednw"))
        .arg("--config")
        .arg(&cfg));
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("missing.ednw"));
    let o = run(bin().args(["train", "--config"]).arg(dir.path().join("nope.json")));
    assert_eq!(code(&o), 1);
}

#[test]
fn denoise_writes_segments_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    train(dir.path());
    let weights = dir.path().join("run/weights.ednw");
    let (_, cfg) = load_weights(&weights).unwrap();
    let n = cfg.signal_length;

    let rows: Vec<Vec<f64>> = (0..3)
        .map(|s| (0..n).map(|t| ((t * (s + 2)) as f64 * 0.3).sin() + 0.1 * t as f64).collect())
        .collect();
    let noisy_csv: String = rows
        .iter()
        .map(|r| r.iter().map(f64::to_string).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    std::fs::write(dir.path().join("noisy.csv"), noisy_csv).unwrap();
    let psd_row = |r: &[f64]| {
        let p = fft::periodogram(&r.iter().map(|v| 0.1 * v).collect::<Vec<_>>()).unwrap();
        p.iter().map(f64::to_string).collect::<Vec<_>>().join(",") + "\n"
    };
    let psd: String = rows.iter().map(|r| psd_row(r)).collect();
    std::fs::write(dir.path().join("psd.csv"), &psd).unwrap();

    let o = run(bin()
        .args(["denoise", "--weights"])
        .arg(&weights)
        .arg("--in")
        .arg(dir.path().join("noisy.csv"))
        .arg("--noise-psd")
        .arg(dir.path().join("psd.csv"))
        .arg("--out")
        .arg(dir.path().join("clean.ednb"))
        .arg("--trace-dir")
        .arg(dir.path().join("traces")));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let opts = LoadOptions {
        signal_length: n,
        kind: None,
    };
    let clean = load_segments(dir.path().join("clean.ednb"), SegmentFormat::Ednb, &opts).unwrap();
    assert_eq!(clean.len(), 3);
    for i in 0..3 {
        let trace = std::fs::read_to_string(dir.path().join(format!("traces/segment_{i:04}.csv"))).unwrap();
        let lines: Vec<&str> = trace.lines().collect();
        assert_eq!(lines.len(), n + 1);
        assert_eq!(lines[0], "timestep,noisy,denoised");
    }

    // two PSD rows for three segments
    let two: String = psd.lines().take(2).map(|l| format!("{l}\n")).collect();
    std::fs::write(dir.path().join("psd2.csv"), two).unwrap();
    let o = run(bin()
        .args(["denoise", "--weights"])
        .arg(&weights)
        .arg("--in")
        .arg(dir.path().join("noisy.csv"))
        .arg("--noise-psd")
        .arg(dir.path().join("psd2.csv"))
        .arg("--out")
        .arg(dir.path().join("x.ednb")));
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("pairing"));
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let synth = |env: Option<&str>, flag: Option<&str>| {
        let mut c = bin();
        c.args(["synth", "--count", "1", "--length", "16", "--out"]).arg(dir.path());
        if let Some(v) = env {
            c.env("FREQDENOISE_THREADS", v);
        }
        if let Some(v) = flag {
            c.args(["--threads", v]);
        }
        code(&run(&mut c))
    };
    assert_eq!(synth(Some("4"), None), 0);
    assert_eq!(synth(Some("many"), None), 2);
    assert_eq!(synth(Some("0"), None), 2);
    assert_eq!(synth(Some("many"), Some("2")), 0);
    assert_eq!(synth(None, Some("0")), 2);
}
