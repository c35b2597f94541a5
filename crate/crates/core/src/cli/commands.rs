use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{ArtifactChoice, CliError, RunConfig};
use crate::data::io::parse_csv_rows;
use crate::data::{
    generate_synthetic_corpus, load_segments, save_segments, standardize_signal, LoadOptions,
    Segment, SegmentFormat, SignalKind,
};
use crate::metrics::{
    comparison_csv, evaluate, evaluate_method, report_csv, report_json, Method, MetricsReport,
};
use crate::model::{closed_form_param_count, denoise, load_weights, save_weights};
use crate::tensor::{fft, Tensor};
use crate::training::{history_csv, load_checkpoint, TrainRecord, Trainer};

pub fn cmd_synth(out: &Path, count: usize, seed: u64, length: usize) -> Result<(), CliError> {
    if count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    if !(length >= 4 && length.is_power_of_two()) {
        return Err(CliError::Usage(format!(
            "--length {length} is not a power of two >= 4"
        )));
    }
    fs::create_dir_all(out).map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
    let corpus = generate_synthetic_corpus(count, length, seed);
    for kind in [SignalKind::Eeg, SignalKind::Eog, SignalKind::Emg] {
        let segs: Vec<Segment> = corpus.iter().filter(|s| s.kind == kind).cloned().collect();
        let path = out.join(format!("{kind}.ednb"));
        save_segments(&path, SegmentFormat::Ednb, &segs)?;
        println!("{kind}: {} segments -> {}", segs.len(), path.display());
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub param_count: usize,
    pub weights: PathBuf,
    pub history: Vec<TrainRecord>,
}

pub fn cmd_train(config: &Path, resume: Option<&Path>, threads: usize) -> Result<TrainSummary, CliError> {
    let cfg = RunConfig::load(config)?;
    let model = cfg.model_config();
    let (train, test) = cfg.split_corpus()?;
    let param_count = closed_form_param_count(&model);
    println!("parameters: {param_count}");

    let mut trainer = match resume {
        Some(path) => {
            let ck = load_checkpoint(path)?;
            println!("resuming from epoch {}", ck.epoch);
            Trainer::resume(ck, model.clone(), cfg.train.clone(), cfg.seed, &train, &test)?
        }
        None => Trainer::new(model.clone(), cfg.train.clone(), cfg.seed, &train, &test)?,
    };
    trainer.set_threads(threads)?;

    let ck_dir = cfg.output_dir.join("checkpoints");
    fs::create_dir_all(&ck_dir)?;
    let (epochs, every) = (cfg.train.epochs, cfg.train.checkpoint_every);
    trainer.run_until(epochs, |t, r| {
        println!(
            "epoch {:>4}  train {:.6}  test {:.6}  {:.1}s",
            r.epoch, r.train_loss, r.test_loss, r.seconds
        );
        if (every > 0 && r.epoch % every == 0) || r.epoch == epochs {
            t.save_checkpoint(ck_dir.join(format!("checkpoint_epoch{:04}.ednw", r.epoch)))?;
        }
        Ok(())
    })?;

    let weights = cfg.output_dir.join("weights.ednw");
    save_weights(trainer.params(), &model, &weights)?;
    fs::write(cfg.output_dir.join("history.csv"), history_csv(trainer.history()))?;
    println!("weights -> {}", weights.display());
    Ok(TrainSummary {
        param_count,
        weights,
        history: trainer.history().to_vec(),
    })
}

pub fn cmd_eval(
    weights: &Path,
    config: &Path,
    artifact: ArtifactChoice,
    seed: Option<u64>,
    out: Option<&Path>,
    threads: usize,
) -> Result<Vec<MetricsReport>, CliError> {
    let cfg = RunConfig::load(config)?;
    let (params, wcfg) =
        load_weights(weights).map_err(|e| CliError::Runtime(format!("{}: {e}", weights.display())))?;
    if wcfg != cfg.model_config() {
        return Err(CliError::Runtime(format!(
            "weights in {} were trained with a different model config",
            weights.display()
        )));
    }
    let (_, test) = cfg.split_corpus()?;
    let eeg: Vec<Segment> = test.iter().filter(|s| s.kind == SignalKind::Eeg).cloned().collect();
    let seed = seed.unwrap_or(cfg.seed);
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.join("eval"));
    fs::create_dir_all(&out)?;

    let kinds: &[SignalKind] = match artifact {
        ArtifactChoice::Eog => &[SignalKind::Eog],
        ArtifactChoice::Emg => &[SignalKind::Emg],
        ArtifactChoice::Both => &[SignalKind::Eog, SignalKind::Emg],
    };
    let mut reports = Vec::new();
    for &kind in kinds {
        let report = evaluate(&params, &wcfg, &eeg, &test, kind, &cfg.eval, seed, threads)?;
        let baselines = [Method::Identity, Method::OracleSpectral]
            .into_iter()
            .map(|m| evaluate_method(m, &eeg, &test, kind, &cfg.eval, seed, threads))
            .collect::<Result<Vec<_>, _>>()?;
        fs::write(out.join(format!("{kind}_report.csv")), report_csv(&report))?;
        fs::write(
            out.join(format!("{kind}_report.json")),
            serde_json::to_string_pretty(&report_json(&report, &baselines))? + "\n",
        )?;
        fs::write(
            out.join(format!("{kind}_comparison.csv")),
            comparison_csv(&report, &baselines),
        )?;
        let s = &report.summary;
        println!(
            "{kind}: rrmse_t {:.4}  rrmse_f {:.4}  cc {:.4}  ({} examples)",
            s.rrmse_t, s.rrmse_f, s.cc, s.n_examples
        );
        reports.push(report);
    }
    println!("reports -> {}", out.display());
    Ok(reports)
}

pub fn cmd_denoise(
    weights: &Path,
    input: &Path,
    noise_psd: &Path,
    out: &Path,
    trace_dir: Option<&Path>,
) -> Result<(), CliError> {
    let (params, cfg) =
        load_weights(weights).map_err(|e| CliError::Runtime(format!("{}: {e}", weights.display())))?;
    let format = SegmentFormat::from_path(input);
    let opts = LoadOptions {
        signal_length: cfg.signal_length,
        kind: (format == SegmentFormat::Csv).then_some(SignalKind::Eeg),
    };
    let noisy = load_segments(input, format, &opts)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", input.display())))?;
    let psd_text = fs::read_to_string(noise_psd)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", noise_psd.display())))?;
    let psds = parse_csv_rows(&psd_text, cfg.spectrum_len())
        .map_err(|e| CliError::Runtime(format!("{}: {e}", noise_psd.display())))?;
    if psds.len() != noisy.len() {
        return Err(CliError::Runtime(format!(
            "pairing error: {} segments but {} noise PSD rows",
            noisy.len(),
            psds.len()
        )));
    }
    if let Some(dir) = trace_dir {
        fs::create_dir_all(dir)?;
    }

    let mut cleaned = Vec::with_capacity(noisy.len());
    for (i, (seg, psd)) in noisy.iter().zip(psds).enumerate() {
        let (y_hat, mean, std) = standardize_signal(seg.data())?;
        let psd_noisy = fft::periodogram(&y_hat)?;
        let pred = denoise(
            &cfg,
            &params,
            &Tensor::vector(y_hat)?,
            &Tensor::vector(psd)?,
            &Tensor::vector(psd_noisy)?,
        )?;
        let restored: Vec<f64> = pred.data().iter().map(|v| v * std + mean).collect();
        if let Some(dir) = trace_dir {
            let mut s = String::from("timestep,noisy,denoised\n");
            for (t, (a, b)) in seg.data().iter().zip(&restored).enumerate() {
                let _ = writeln!(s, "{t},{a},{b}");
            }
            fs::write(dir.join(format!("segment_{i:04}.csv")), s)?;
        }
        cleaned.push(Segment::new(
            Tensor::vector(restored)?,
            SignalKind::Eeg,
            seg.source_id.clone(),
        ));
    }
    save_segments(out, SegmentFormat::from_path(out), &cleaned)?;
    println!("{} segments -> {}", cleaned.len(), out.display());
    Ok(())
}
