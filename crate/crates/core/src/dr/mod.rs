//! Lesion screening pipeline: candidate extraction, features and an MLP
//! trained with sign updates, optionally through a crossbar.

pub mod components;
pub mod features;
pub mod image;
pub mod metrics;
pub mod mlp;
pub mod morph;
pub mod synth;

pub use components::{connected_components, ClassHint, LesionCandidate};
pub use features::{extract_features, FeatureVector, Normalizer, FEATURE_DIM, FEATURE_NAMES};
pub use image::{BinaryImage, RasterImage};
pub use metrics::{evaluate, LesionType, MetricsReport, TypeMetrics};
pub use mlp::{Mlp, Sample, TrainConfig, TrainMode, TrainingReport};
pub use morph::{binarize, dilate, erode, morph_close, morph_open};
