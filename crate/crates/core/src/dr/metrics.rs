//! Confusion-matrix metrics per lesion type.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, Sample};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LesionType {
    Hemorrhage,
    Microaneurysm,
    HardExudate,
    SoftExudate,
}

impl LesionType {
    pub const ALL: [LesionType; 4] =
        [LesionType::Hemorrhage, LesionType::Microaneurysm, LesionType::HardExudate, LesionType::SoftExudate];

    pub fn name(self) -> &'static str {
        match self {
            LesionType::Hemorrhage => "hemorrhage",
            LesionType::Microaneurysm => "microaneurysm",
            LesionType::HardExudate => "hard_exudate",
            LesionType::SoftExudate => "soft_exudate",
        }
    }

    /// Bright lesions are the exudates; red lesions the rest.
    pub fn is_bright(self) -> bool {
        matches!(self, LesionType::HardExudate | LesionType::SoftExudate)
    }
}

impl fmt::Display for LesionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LesionType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LesionType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidInput(alloc::format!("unknown lesion type '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn add(&mut self, predicted: bool, truth: bool) {
        match (predicted, truth) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn n(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Metrics of one group; `None` marks a metric with no samples behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeMetrics {
    /// Lesion type, or `"overall"`.
    pub group: String,
    pub confusion: Confusion,
    pub accuracy: Option<f64>,
    pub specificity: Option<f64>,
    pub sensitivity: Option<f64>,
}

impl TypeMetrics {
    pub fn from_confusion(group: &str, c: Confusion) -> Self {
        TypeMetrics {
            group: group.into(),
            confusion: c,
            accuracy: ratio(c.tp + c.tn, c.n()),
            specificity: ratio(c.tn, c.tn + c.fp),
            sensitivity: ratio(c.tp, c.tp + c.fn_),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub confidence: f64,
    pub overall: TypeMetrics,
    /// One entry per lesion type, in [`LesionType::ALL`] order.
    pub per_type: Vec<TypeMetrics>,
}

/// Metrics from `(predicted, truth, type)` triples.
pub fn metrics_from_predictions(preds: &[(bool, bool, LesionType)], confidence: f64) -> MetricsReport {
    let mut overall = Confusion::default();
    let mut per = [Confusion::default(); 4];
    for &(p, t, ty) in preds {
        overall.add(p, t);
        per[ty as usize].add(p, t);
    }
    MetricsReport {
        confidence,
        overall: TypeMetrics::from_confusion("overall", overall),
        per_type: LesionType::ALL.iter().map(|&ty| TypeMetrics::from_confusion(ty.name(), per[ty as usize])).collect(),
    }
}

/// Classifies every sample (lesion iff `P(lesion) ≥ confidence`) and scores it.
pub fn evaluate(model: &Mlp, data: &[Sample], confidence: f64) -> Result<MetricsReport> {
    if !(0.0..=1.0).contains(&confidence) {
        return Err(Error::Domain { name: "confidence", value: confidence, domain: "[0, 1]" });
    }
    let mut preds = Vec::with_capacity(data.len());
    for s in data {
        preds.push((model.lesion_probability(&s.features)? >= confidence, s.label, s.lesion_type));
    }
    Ok(metrics_from_predictions(&preds, confidence))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_and_constant_predictors() {
        let truth: Vec<(bool, LesionType)> = (0..40).map(|k| (k % 3 == 0, LesionType::ALL[k % 4])).collect();
        let perfect: Vec<_> = truth.iter().map(|&(t, ty)| (t, t, ty)).collect();
        let r = metrics_from_predictions(&perfect, 0.75);
        for m in r.per_type.iter().chain([&r.overall]) {
            assert_eq!((m.accuracy, m.specificity, m.sensitivity), (Some(1.0), Some(1.0), Some(1.0)));
        }
        let never: Vec<_> = truth.iter().map(|&(t, ty)| (false, t, ty)).collect();
        let r = metrics_from_predictions(&never, 0.75);
        assert_eq!(r.overall.specificity, Some(1.0));
        assert_eq!(r.overall.sensitivity, Some(0.0));
    }

    #[test]
    fn empty_type_is_not_available() {
        let r = metrics_from_predictions(&[(true, true, LesionType::Hemorrhage)], 0.75);
        let soft = &r.per_type[LesionType::SoftExudate as usize];
        assert_eq!((soft.accuracy, soft.specificity, soft.sensitivity), (None, None, None));
        assert_eq!(r.per_type[0].specificity, None);
        assert_eq!(r.per_type[0].sensitivity, Some(1.0));
    }

    #[test]
    fn random_labels_match_counting_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let preds: Vec<(bool, bool, LesionType)> = (0..1000)
            .map(|_| (rng.random::<bool>(), rng.random::<bool>(), LesionType::ALL[rng.random_range(0..4)]))
            .collect();
        let r = metrics_from_predictions(&preds, 0.75);
        let agree = preds.iter().filter(|p| p.0 == p.1).count();
        assert_eq!(r.overall.accuracy, Some(agree as f64 / 1000.0));
        let c = r.overall.confusion;
        assert_eq!(r.overall.accuracy.unwrap(), (c.tp + c.tn) as f64 / c.n() as f64);
        for ty in LesionType::ALL {
            let sub: Vec<_> = preds.iter().filter(|p| p.2 == ty).collect();
            let neg = sub.iter().filter(|p| !p.1).count();
            let tn = sub.iter().filter(|p| !p.1 && !p.0).count();
            assert_eq!(r.per_type[ty as usize].specificity, Some(tn as f64 / neg as f64));
        }
    }

    #[test]
    fn names_round_trip() {
        for t in LesionType::ALL {
            assert_eq!(t.name().parse::<LesionType>().unwrap(), t);
        }
        assert!("cotton".parse::<LesionType>().is_err());
    }
}
