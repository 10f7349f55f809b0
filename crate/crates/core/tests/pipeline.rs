use memristim_core::dr::synth::{label_candidates, synth_images, DetectorConfig, ObjectKind, SynthSpec};
use memristim_core::dr::{evaluate, extract_features, LesionType, Mlp, Normalizer, Sample, TrainConfig};

fn samples(spec: &SynthSpec) -> Vec<Sample> {
    let det = DetectorConfig::default();
    let mut out = Vec::new();
    for img in synth_images(spec).unwrap() {
        for lc in label_candidates(&img, &det).unwrap() {
            let fv = extract_features(&img.image, &lc.candidate).unwrap();
            out.push(Sample { features: fv.values, label: lc.label, lesion_type: lc.lesion_type });
        }
    }
    out
}

#[test]
fn most_planted_lesions_are_detected() {
    let spec = SynthSpec { n_images: 4, seed: 2, ..SynthSpec::default() };
    let det = DetectorConfig::default();
    let (mut planted, mut found) = (0, 0);
    for img in synth_images(&spec).unwrap() {
        let labeled = label_candidates(&img, &det).unwrap();
        for o in &img.objects {
            if let ObjectKind::Lesion(_) = o.kind {
                planted += 1;
                let hit = labeled.iter().any(|lc| lc.label && lc.candidate.pixels.iter().any(|p| o.pixels.contains(p)));
                found += usize::from(hit);
            }
        }
    }
    assert!(planted > 0);
    assert!(found as f64 >= 0.8 * planted as f64, "{found}/{planted}");
}

#[test]
fn dataset_is_deterministic_and_covers_every_type() {
    let spec = SynthSpec { n_images: 4, seed: 9, ..SynthSpec::default() };
    let a = samples(&spec);
    assert_eq!(a, samples(&spec));
    for t in LesionType::ALL {
        assert!(a.iter().any(|s| s.lesion_type == t && s.label), "{t:?}");
    }
    assert!(a.iter().any(|s| !s.label));
    assert!(a.iter().all(|s| s.features.iter().all(|v| v.is_finite())));
}

#[test]
fn float_training_separates_synthetic_candidates() {
    let raw = samples(&SynthSpec { n_images: 6, seed: 4, ..SynthSpec::default() });
    let rows: Vec<&[f64]> = raw.iter().map(|s| s.features.as_slice()).collect();
    let norm = Normalizer::fit(&rows).unwrap();
    let data: Vec<Sample> =
        raw.iter().map(|s| Sample { features: norm.apply(&s.features).unwrap(), ..s.clone() }).collect();
    let cfg = TrainConfig { epochs: 300, ..TrainConfig::default() };
    let mut mlp = Mlp::new_float(1, 0.1);
    mlp.train(&data, &cfg).unwrap();
    let report = evaluate(&mlp, &data, cfg.confidence).unwrap();
    let acc = report.overall.accuracy.unwrap();
    assert!(acc >= 0.9, "{acc}");
}
