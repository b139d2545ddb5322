//! Registration evaluation: inlier ratio, feature matching recall,
//! registration recall (RMSE- and RRE/RTE-based), rotation/translation
//! errors and aligned-cloud RMSE.

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::cloud::{PointCloud, RigidTransform};
use crate::error::{Error, Result};

/// Success thresholds for the metric suite. Defaults follow the common
/// indoor-benchmark convention; the RRE/RTE pair is the outdoor-style rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalThresholds {
    /// Correspondence inlier distance for IR.
    pub inlier_dist: f64,
    /// Minimum IR for a pair to count toward FMR (strict `>`).
    pub fmr_min_ir: f64,
    /// RMSE bound for RMSE-mode registration recall.
    pub rr_rmse: f64,
    /// Rotation bound (degrees) for RRE/RTE-mode recall.
    pub rr_rre_deg: f64,
    /// Translation bound for RRE/RTE-mode recall.
    pub rr_rte: f64,
}

impl Default for EvalThresholds {
    fn default() -> Self {
        Self {
            inlier_dist: 0.10,
            fmr_min_ir: 0.05,
            rr_rmse: 0.20,
            rr_rre_deg: 5.0,
            rr_rte: 2.0,
        }
    }
}

impl EvalThresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("inlier_dist", self.inlier_dist),
            ("fmr_min_ir", self.fmr_min_ir),
            ("rr_rmse", self.rr_rmse),
            ("rr_rre_deg", self.rr_rre_deg),
            ("rr_rte", self.rr_rte),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "threshold {name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Which per-pair success rule registration recall uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecallMode {
    /// `rmse < rr_rmse` over ground-truth correspondences.
    Rmse,
    /// `rre < rr_rre_deg && rte < rr_rte`.
    RreRte,
}

/// Per-pair stage timings in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingBreakdown {
    pub descriptors_ms: f64,
    pub matching_ms: f64,
    pub voting_ms: f64,
    pub ransac_ms: f64,
    pub total_ms: f64,
}

/// The serialized per-pair output record.
///
/// Metric fields are `None` when no ground truth was available or the pair
/// failed before pose estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationReport {
    pub pair_id: String,
    /// `None` on success; otherwise the stage that failed and why.
    pub failure: Option<FailureRecord>,
    pub transform: Option<RigidTransform>,
    pub source_points: usize,
    pub target_points: usize,
    pub source_down: usize,
    pub target_down: usize,
    /// Correspondences proposed to the voter (sampled source points).
    pub proposed: usize,
    /// Correspondences surviving voting (and the mutual filter if enabled).
    pub accepted: usize,
    /// RANSAC consensus size.
    pub inliers: usize,
    pub ir: Option<f64>,
    pub rre_deg: Option<f64>,
    pub rte: Option<f64>,
    pub rmse: Option<f64>,
    pub success_rmse: Option<bool>,
    pub success_rre_rte: Option<bool>,
    pub timings: TimingBreakdown,
}

impl RegistrationReport {
    pub fn is_success(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub stage: String,
    pub message: String,
}

/// Fraction of pairs within `inlier_dist` of exactness under `gt`
/// (strict `<`). Defined as 0 for an empty list.
pub fn inlier_ratio(
    pairs: &[(Point3<f64>, Point3<f64>)],
    gt: &RigidTransform,
    inlier_dist: f64,
) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let hits = pairs
        .iter()
        .filter(|(x, y)| (gt.transform_point(x) - y).norm() < inlier_dist)
        .count();
    hits as f64 / pairs.len() as f64
}

/// Geodesic rotation distance in degrees, the angle
/// `arccos((trace(R_gtᵀ·R_est) − 1) / 2)`.
///
/// Evaluated as `atan2(‖skew(M)‖/2, (trace(M) − 1)/2)` — the same value,
/// but conditioned well at 0° and 180° where the arccos form loses eight
/// digits. Total on any input (no clamping needed).
pub fn rre_degrees(est: &RigidTransform, gt: &RigidTransform) -> f64 {
    let m = gt.rotation().transpose() * est.rotation();
    let sin = 0.5
        * nalgebra::Vector3::new(
            m[(2, 1)] - m[(1, 2)],
            m[(0, 2)] - m[(2, 0)],
            m[(1, 0)] - m[(0, 1)],
        )
        .norm();
    let cos = (m.trace() - 1.0) / 2.0;
    sin.atan2(cos).to_degrees()
}

/// Euclidean distance between the translation components.
pub fn rte(est: &RigidTransform, gt: &RigidTransform) -> f64 {
    (est.translation() - gt.translation()).norm()
}

/// Root-mean-square alignment error of `est` over ground-truth
/// correspondence pairs `(i into src, j into target)`.
pub fn registration_rmse(
    src: &PointCloud,
    target: &PointCloud,
    est: &RigidTransform,
    gt_pairs: &[(usize, usize)],
) -> Result<f64> {
    if gt_pairs.is_empty() {
        return Err(Error::UndefinedMetric(
            "registration RMSE needs at least one ground-truth pair".into(),
        ));
    }
    let mut sq = 0.0;
    for &(i, j) in gt_pairs {
        sq += (est.transform_point(&src.points()[i]) - target.points()[j]).norm_squared();
    }
    Ok((sq / gt_pairs.len() as f64).sqrt())
}

/// Fraction of pairs whose IR strictly exceeds `fmr_min_ir`.
pub fn feature_matching_recall(per_pair_irs: &[f64], fmr_min_ir: f64) -> Result<f64> {
    if per_pair_irs.is_empty() {
        return Err(Error::InvalidParameter(
            "feature matching recall over an empty list".into(),
        ));
    }
    let hits = per_pair_irs.iter().filter(|&&ir| ir > fmr_min_ir).count();
    Ok(hits as f64 / per_pair_irs.len() as f64)
}

/// Per-report success under the chosen rule; missing metrics fail.
pub fn report_succeeds(
    report: &RegistrationReport,
    thresholds: &EvalThresholds,
    mode: RecallMode,
) -> bool {
    match mode {
        RecallMode::Rmse => report.rmse.is_some_and(|v| v < thresholds.rr_rmse),
        RecallMode::RreRte => {
            let rot_ok = report.rre_deg.is_some_and(|v| v < thresholds.rr_rre_deg);
            let tr_ok = report.rte.is_some_and(|v| v < thresholds.rr_rte);
            rot_ok && tr_ok
        }
    }
}

/// Fraction of reports passing the chosen per-pair success rule.
pub fn registration_recall(
    reports: &[RegistrationReport],
    thresholds: &EvalThresholds,
    mode: RecallMode,
) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::InvalidParameter(
            "registration recall over an empty report list".into(),
        ));
    }
    let hits = reports
        .iter()
        .filter(|r| report_succeeds(r, thresholds, mode))
        .count();
    Ok(hits as f64 / reports.len() as f64)
}
