//! Point cloud registration toolkit built around multi-scale feature
//! consistency.
//!
//! The pipeline extracts FPFH descriptors at several neighborhood radii,
//! matches each scale independently in feature space, and keeps a
//! correspondence only when adjacent scales vote for agreeing target
//! candidates. Surviving correspondences feed a seeded RANSAC estimator
//! with a closed-form Kabsch refit. The crate also ships the evaluation
//! metric suite (IR / FMR / RR / RRE / RTE / RMSE), scalar loss evaluators
//! for overlap- and saliency-supervised training objectives, PLY/XYZ I/O,
//! synthetic benchmark generation and a manifest-driven suite runner.
//!
//! ```no_run
//! use gcreg_core::pipeline::{run_pair, PipelineConfig};
//! use gcreg_core::synth::{synth_pair, SynthConfig};
//!
//! let pair = synth_pair(&SynthConfig::default()).unwrap();
//! let config = PipelineConfig::default();
//! let report = run_pair("demo", &pair.source, &pair.target, Some(&pair.gt), &config).unwrap();
//! println!("RRE = {:?} deg", report.rre_deg);
//! ```

// Validation deliberately writes `!(x > 0.0)` instead of `x <= 0.0`: the
// negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cloud;
pub mod descriptors;
mod error;
pub mod io;
pub mod losses;
pub mod matching;
pub mod metrics;
pub mod pipeline;
pub mod pose;
pub mod synth;

pub use cloud::{apply_transform, PointCloud, RigidTransform, SpatialIndex};
pub use descriptors::{DescriptorSet, MultiScaleDescriptors, PpfQuadruple};
pub use error::{Error, Result};
pub use matching::{CandidateTable, Correspondence, CorrespondenceSet};
pub use metrics::{EvalThresholds, RecallMode, RegistrationReport};
pub use pose::{PoseResult, RansacConfig};
