//! Lesion-screening commands: synthetic data, training and evaluation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use memristim_core::dr::synth::{
    detect_candidates, label_candidates, separable_dataset, synth_images, DetectorConfig, SynthSpec, SyntheticImage,
};
use memristim_core::dr::{
    evaluate, extract_features, LesionCandidate, LesionType, MetricsReport, Mlp, Normalizer, RasterImage, Sample,
    TrainConfig, TrainMode,
};
use memristim_core::SCHEMA_VERSION;
use serde::{Deserialize, Serialize};

use super::array::variation;
use super::invalid;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{feature_header, feature_rows, num, read_features, read_manifest, OutDir, MANIFEST_HEADER};
use crate::pnm::{extension, read_image, write_image};

fn detector(cfg: &RunConfig) -> CliResult<DetectorConfig> {
    Ok(DetectorConfig {
        bright_threshold: cfg.f64("bright_threshold")?,
        red_threshold: cfg.f64("red_threshold")?,
        se_radius: cfg.usize("se_radius")?,
        min_area: cfg.usize("min_area")?,
    })
}

fn from_manifest(path: &Path, det: &DetectorConfig) -> CliResult<Vec<Sample>> {
    let rows = read_manifest(path)?;
    let mut cache: BTreeMap<PathBuf, (RasterImage, Vec<LesionCandidate>)> = BTreeMap::new();
    let mut out = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        if !cache.contains_key(&row.image) {
            let img = read_image(&row.image)?;
            let cands = detect_candidates(&img, det)?;
            cache.insert(row.image.clone(), (img, cands));
        }
        let (img, cands) = &cache[&row.image];
        let cand = cands.get(row.candidate_id).ok_or_else(|| {
            CliError::Runtime(format!(
                "{}: row {}: {} has {} candidates, no id {}",
                path.display(),
                k + 1,
                row.image.display(),
                cands.len(),
                row.candidate_id
            ))
        })?;
        let fv = extract_features(img, cand)?;
        out.push(Sample { features: fv.values, label: row.label, lesion_type: row.lesion_type });
    }
    Ok(out)
}

/// Samples from exactly one of the `manifest` / `features` keys.
fn load_dataset(cfg: &RunConfig) -> CliResult<Vec<Sample>> {
    let (data, path) = match (cfg.path("manifest"), cfg.path("features")) {
        (Some(m), None) => (from_manifest(&m, &detector(cfg)?)?, m),
        (None, Some(f)) => (read_features(&f)?, f),
        (None, None) => return Err(CliError::Config("set `manifest` or `features`".into())),
        (Some(_), Some(_)) => return Err(CliError::Config("set only one of `manifest` and `features`".into())),
    };
    if data.is_empty() {
        return Err(CliError::Runtime(format!("{}: dataset is empty", path.display())));
    }
    Ok(data)
}

#[derive(Serialize)]
struct SynthSummary<'a> {
    dataset: &'a str,
    images: usize,
    samples: usize,
    lesions: usize,
    /// Samples per lesion type, split into (lesion, non-lesion).
    per_type: BTreeMap<&'static str, (usize, usize)>,
}

fn summarize<'a>(dataset: &'a str, images: usize, data: &[Sample]) -> SynthSummary<'a> {
    let mut per_type: BTreeMap<&'static str, (usize, usize)> =
        LesionType::ALL.iter().map(|t| (t.name(), (0, 0))).collect();
    for s in data {
        let e = per_type.get_mut(s.lesion_type.name()).expect("all types present");
        if s.label {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
    }
    SynthSummary { dataset, images, samples: data.len(), lesions: data.iter().filter(|s| s.label).count(), per_type }
}

pub fn synth_data(cfg: &RunConfig, out: &OutDir) -> CliResult<()> {
    let dataset = cfg.text("dataset");
    if dataset == "separable" {
        let data = separable_dataset(cfg.usize("n_samples")?, cfg.seed(), cfg.f64("margin")?);
        out.write_csv("features.csv", &feature_header(), feature_rows(&data))?;
        return out.write_report("summary.json", "synth-data", &summarize(dataset, 0, &data));
    }
    let spec = SynthSpec {
        n_images: cfg.usize("n_images")?,
        width: cfg.usize("width")?,
        height: cfg.usize("height")?,
        color: cfg.bool("color"),
        lesions_per_image: cfg.usize("lesions_per_image")?,
        distractors_per_image: cfg.usize("distractors_per_image")?,
        bright_intensity: (cfg.f64("bright_min")?, cfg.f64("bright_max")?),
        red_intensity: (cfg.f64("red_min")?, cfg.f64("red_max")?),
        texture: cfg.f64("texture")?,
        noise: cfg.f64("noise")?,
        seed: cfg.seed(),
    };
    spec.validate().map_err(invalid)?;
    let det = detector(cfg)?;
    let images_dir = out.path("images");
    fs::create_dir_all(&images_dir).map_err(|e| CliError::io(&images_dir, e))?;
    let mut manifest = Vec::new();
    let mut data = Vec::new();
    let rendered = synth_images(&spec)?;
    for (k, img) in rendered.iter().enumerate() {
        let name = format!("images/img_{k:03}.{}", extension(img.image.channels()));
        let path = out.path(&name);
        write_image(&path, &img.image)?;
        // label and describe what was written, so training sees the same pixels
        let stored = SyntheticImage { image: read_image(&path)?, objects: img.objects.clone() };
        for lc in label_candidates(&stored, &det)? {
            let fv = extract_features(&stored.image, &lc.candidate)?;
            manifest.push([
                name.clone(),
                lc.candidate.id.to_string(),
                u8::from(lc.label).to_string(),
                lc.lesion_type.name().to_string(),
            ]);
            data.push(Sample { features: fv.values, label: lc.label, lesion_type: lc.lesion_type });
        }
    }
    out.write_csv("manifest.csv", &MANIFEST_HEADER, manifest)?;
    out.write_csv("features.csv", &feature_header(), feature_rows(&data))?;
    out.write_report("summary.json", "synth-data", &summarize(dataset, rendered.len(), &data))
}

/// Saved network with the input scaling fitted at training time.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema_version: u32,
    command: String,
    mode: TrainMode,
    confidence: f64,
    normalizer: Normalizer,
    mlp: Mlp,
}

/// Every `1/f`-th sample goes to the test split, spread evenly over the data.
fn split(data: Vec<Sample>, f: f64) -> (Vec<Sample>, Vec<Sample>) {
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, s) in data.into_iter().enumerate() {
        if ((i + 1) as f64 * f).floor() > (i as f64 * f).floor() {
            test.push(s);
        } else {
            train.push(s);
        }
    }
    (train, test)
}

fn normalize(norm: &Normalizer, data: &mut [Sample]) -> CliResult<()> {
    for s in data {
        s.features = norm.apply(&s.features)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TrainMetrics {
    mode: TrainMode,
    n_train: usize,
    n_test: usize,
    epochs_run: usize,
    final_loss: f64,
    final_accuracy: f64,
    reached_target_at: Option<usize>,
    pulses: u64,
    skipped_pulses: u64,
    refreshes: u64,
    train: MetricsReport,
    test: Option<MetricsReport>,
}

pub fn train_dr(cfg: &RunConfig, out: &OutDir) -> CliResult<()> {
    let f = cfg.f64("test_fraction")?;
    if !(0.0..1.0).contains(&f) {
        return Err(CliError::Config(format!("key `test_fraction` must lie in [0, 1), got {f}")));
    }
    let tc = TrainConfig {
        epochs: cfg.usize("epochs")?,
        batch_size: cfg.usize("batch_size")?,
        float_step: cfg.f64("float_step")?,
        confidence: cfg.f64("confidence")?,
        seed: cfg.seed(),
        target_accuracy: cfg.opt_f64("target_accuracy"),
        sign_threshold: cfg.f64("sign_threshold")?,
        refresh_level: cfg.f64("refresh_level")?,
    };
    tc.validate().map_err(invalid)?;
    let gain = [cfg.f64("gain_1")?, cfg.f64("gain_2")?];
    let init_scale = cfg.f64("init_scale")?;
    let mode = if cfg.text("mode") == "device" { TrainMode::Device } else { TrainMode::Float };
    let mlp = match mode {
        TrainMode::Float => Mlp::new_float(cfg.seed(), init_scale),
        TrainMode::Device => {
            Mlp::new_sampled(cfg.seed(), init_scale, &variation(cfg)?, cfg.f64("v_read")?).map_err(invalid)?
        }
    };
    let mut mlp = mlp.with_gain(gain).map_err(invalid)?;

    let (mut train, mut test) = split(load_dataset(cfg)?, f);
    if train.is_empty() {
        return Err(CliError::Runtime("training split is empty".into()));
    }
    let rows: Vec<&[f64]> = train.iter().map(|s| s.features.as_slice()).collect();
    let normalizer = Normalizer::fit(&rows)?;
    normalize(&normalizer, &mut train)?;
    normalize(&normalizer, &mut test)?;

    let rep = mlp.train(&train, &tc)?;
    out.write_csv(
        "training_log.csv",
        &["epoch", "loss", "accuracy"],
        rep.log.iter().map(|e| [e.epoch.to_string(), num(e.loss), num(e.accuracy)]),
    )?;
    let metrics = TrainMetrics {
        mode,
        n_train: train.len(),
        n_test: test.len(),
        epochs_run: rep.log.last().map_or(0, |e| e.epoch),
        final_loss: rep.final_loss,
        final_accuracy: rep.final_accuracy,
        reached_target_at: rep.reached_target_at,
        pulses: rep.pulses,
        skipped_pulses: rep.skipped_pulses,
        refreshes: rep.refreshes,
        train: evaluate(&mlp, &train, tc.confidence)?,
        test: if test.is_empty() { None } else { Some(evaluate(&mlp, &test, tc.confidence)?) },
    };
    let model = ModelFile {
        schema_version: SCHEMA_VERSION,
        command: "train-dr".into(),
        mode,
        confidence: tc.confidence,
        normalizer,
        mlp,
    };
    out.write_json("model.json", &model)?;
    out.write_report("metrics.json", "train-dr", &metrics)
}

fn read_model(path: &Path) -> CliResult<ModelFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let m: ModelFile = serde_json::from_str(&text).map_err(|e| CliError::io(path, e))?;
    if m.schema_version != SCHEMA_VERSION {
        return Err(CliError::io(path, format!("schema version {} is not {SCHEMA_VERSION}", m.schema_version)));
    }
    m.mlp.validate().map_err(|e| CliError::io(path, e))?;
    Ok(m)
}

#[derive(Serialize)]
struct EvalMetrics {
    mode: TrainMode,
    n: usize,
    #[serde(flatten)]
    metrics: MetricsReport,
}

pub fn eval_dr(cfg: &RunConfig, out: &OutDir) -> CliResult<()> {
    let path = cfg.path("model").ok_or_else(|| CliError::Config("set `model`".into()))?;
    let confidence = cfg.f64("confidence")?;
    if !(0.0..=1.0).contains(&confidence) {
        return Err(CliError::Config(format!("key `confidence` must lie in [0, 1], got {confidence}")));
    }
    let model = read_model(&path)?;
    let mut data = load_dataset(cfg)?;
    normalize(&model.normalizer, &mut data)?;
    let mut rows = Vec::with_capacity(data.len());
    for (k, s) in data.iter().enumerate() {
        let p = model.mlp.lesion_probability(&s.features)?;
        rows.push([
            k.to_string(),
            u8::from(s.label).to_string(),
            s.lesion_type.name().to_string(),
            num(p),
            u8::from(p >= confidence).to_string(),
        ]);
    }
    out.write_csv("predictions.csv", &["id", "label", "lesion_type", "p_lesion", "predicted"], rows)?;
    let metrics = EvalMetrics { mode: model.mode, n: data.len(), metrics: evaluate(&model.mlp, &data, confidence)? };
    out.write_report("metrics.json", "eval-dr", &metrics)
}
