//! The end-to-end registration pipeline and its configuration: voxel
//! downsampling, normal estimation and smoothing, multi-scale FPFH,
//! seeded sampling, per-level matching, consistent voting, RANSAC with a
//! refit pass, and metric evaluation against optional ground truth.

mod manifest;
mod suite;

pub use manifest::{ManifestPair, ManifestSettings, PairManifest, MANIFEST_SCHEMA_VERSION};
pub use suite::{
    csv_header, report_csv_row, run_suite, write_csv, PairEstimate, SuiteReport, SuiteSummary,
    REPORT_SCHEMA_VERSION,
};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cloud::{
    estimate_normals, smooth_normals, voxel_downsample, PointCloud, RigidTransform, SpatialIndex,
};
use crate::descriptors::multiscale_fpfh;
use crate::error::{Error, Result};
use crate::matching::{
    build_candidates, consistent_vote, mutual_filter, sample_points, Correspondence,
    CorrespondenceSet,
};
use crate::metrics::{
    inlier_ratio, registration_rmse, rre_degrees, rte, EvalThresholds, FailureRecord, RecallMode,
    RegistrationReport, TimingBreakdown,
};
use crate::pose::{ransac, refine, RansacConfig};

/// Fully resolved pipeline parameters.
///
/// Lengths are in the clouds' units; radii and tolerances are derived from
/// `voxel_size` through the multiplier fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub voxel_size: f64,
    /// FPFH radius per level as multiples of the voxel size, strictly
    /// decreasing; level 1 is the largest.
    pub radius_multipliers: Vec<f64>,
    /// Voting tolerance `d` as a multiple of the voxel size.
    pub dtol_multiplier: f64,
    /// Points sampled per cloud before matching.
    pub sample_count: usize,
    pub normal_neighbors: usize,
    /// Normal smoothing radius as a multiple of the voxel size.
    pub smooth_radius_multiplier: f64,
    /// Multi-level consistency filter; disabling falls back to plain
    /// level-1 matching.
    pub voting: bool,
    /// Optional mutual (forward∩backward) post-filter.
    pub mutual: bool,
    pub ransac_iterations: usize,
    pub ransac_confidence: f64,
    pub ransac_sample_size: usize,
    /// RANSAC inlier threshold; `None` derives 2 × voxel_size.
    pub inlier_threshold: Option<f64>,
    /// The final refit pass re-selects inliers at this multiple of the
    /// RANSAC threshold; tighter selection polishes the pose.
    pub refine_threshold_multiplier: f64,
    pub thresholds: EvalThresholds,
    pub recall_mode: RecallMode,
    /// Circle-loss sample count (K) bundled by dataset presets; not used
    /// by registration itself.
    pub loss_sample_count: usize,
    pub seed: u64,
    /// Worker threads for suite runs; 0 means all available cores.
    pub threads: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            voxel_size: 0.025,
            radius_multipliers: vec![15.0, 10.0, 5.0],
            dtol_multiplier: 2.0,
            sample_count: 5000,
            normal_neighbors: 33,
            smooth_radius_multiplier: 2.0,
            voting: true,
            mutual: false,
            ransac_iterations: 50_000,
            ransac_confidence: 0.999,
            ransac_sample_size: 3,
            inlier_threshold: None,
            refine_threshold_multiplier: 0.5,
            thresholds: EvalThresholds::default(),
            recall_mode: RecallMode::Rmse,
            loss_sample_count: 256,
            seed: 0,
            threads: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.voxel_size > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "voxel_size must be positive, got {}",
                self.voxel_size
            )));
        }
        if self.radius_multipliers.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one radius multiplier required".into(),
            ));
        }
        for m in &self.radius_multipliers {
            if !(*m > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "radius multipliers must be positive, got {m}"
                )));
            }
        }
        for w in self.radius_multipliers.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidParameter(format!(
                    "radius multipliers must be strictly decreasing, got {:?}",
                    self.radius_multipliers
                )));
            }
        }
        if self.voting && self.radius_multipliers.len() < 2 {
            return Err(Error::InvalidParameter(
                "consistent voting needs at least 2 descriptor levels; \
                 disable voting or add radius multipliers"
                    .into(),
            ));
        }
        if !(self.dtol_multiplier >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dtol_multiplier must be non-negative, got {}",
                self.dtol_multiplier
            )));
        }
        if self.sample_count == 0 {
            return Err(Error::InvalidParameter("sample_count must be >= 1".into()));
        }
        if self.normal_neighbors < 3 {
            return Err(Error::InvalidParameter(format!(
                "normal_neighbors must be >= 3, got {}",
                self.normal_neighbors
            )));
        }
        if !(self.smooth_radius_multiplier > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "smooth_radius_multiplier must be positive, got {}",
                self.smooth_radius_multiplier
            )));
        }
        if let Some(t) = self.inlier_threshold {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "inlier_threshold must be positive, got {t}"
                )));
            }
        }
        if !(self.refine_threshold_multiplier > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "refine_threshold_multiplier must be positive, got {}",
                self.refine_threshold_multiplier
            )));
        }
        self.thresholds.validate()?;
        self.ransac_config().validate()?;
        if self.loss_sample_count < 2 {
            return Err(Error::InvalidParameter(
                "loss_sample_count must be >= 2".into(),
            ));
        }
        Ok(())
    }

    pub fn resolved_inlier_threshold(&self) -> f64 {
        self.inlier_threshold.unwrap_or(2.0 * self.voxel_size)
    }

    pub fn d_tol(&self) -> f64 {
        self.dtol_multiplier * self.voxel_size
    }

    fn ransac_config(&self) -> RansacConfig {
        RansacConfig {
            max_iterations: self.ransac_iterations,
            inlier_threshold: self.resolved_inlier_threshold(),
            sample_size: self.ransac_sample_size,
            confidence: self.ransac_confidence,
            seed: mix_seed(self.seed, SEED_RANSAC),
        }
    }
}

const SEED_SAMPLE_SOURCE: u64 = 0xA1;
const SEED_SAMPLE_TARGET: u64 = 0xB2;
const SEED_RANSAC: u64 = 0xC3;

/// splitmix64 mixing so derived seeds are decorrelated from the base seed.
pub fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

macro_rules! stage {
    ($report:expr, $start:expr, $stage:literal, $expr:expr) => {
        match $expr {
            Ok(v) => v,
            Err(e) => {
                $report.failure = Some(FailureRecord {
                    stage: $stage.to_string(),
                    message: e.to_string(),
                });
                $report.timings.total_ms = ms_since($start);
                return Ok($report);
            }
        }
    };
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs the full pipeline on one cloud pair. Stage failures are recorded
/// in the returned report rather than propagated; only configuration
/// errors return `Err`.
pub fn run_pair(
    pair_id: &str,
    source: &PointCloud,
    target: &PointCloud,
    gt: Option<&RigidTransform>,
    config: &PipelineConfig,
) -> Result<RegistrationReport> {
    config.validate()?;
    let start = Instant::now();
    let mut report = RegistrationReport {
        pair_id: pair_id.to_string(),
        failure: None,
        transform: None,
        source_points: source.len(),
        target_points: target.len(),
        source_down: 0,
        target_down: 0,
        proposed: 0,
        accepted: 0,
        inliers: 0,
        ir: None,
        rre_deg: None,
        rte: None,
        rmse: None,
        success_rmse: None,
        success_rre_rte: None,
        timings: TimingBreakdown::default(),
    };

    // Downsample.
    let down_src = stage!(
        report,
        start,
        "downsample",
        voxel_downsample(source, config.voxel_size)
    );
    let down_tgt = stage!(
        report,
        start,
        "downsample",
        voxel_downsample(target, config.voxel_size)
    );
    report.source_down = down_src.len();
    report.target_down = down_tgt.len();

    // Normals, estimated on the downsampled clouds and smoothed in place.
    let oriented = |cloud: &PointCloud| -> Result<PointCloud> {
        let k = config.normal_neighbors.min(cloud.len());
        if k < 3 {
            return Err(Error::InvalidParameter(format!(
                "only {} points after downsampling",
                cloud.len()
            )));
        }
        let est = estimate_normals(cloud, k)?;
        smooth_normals(
            cloud,
            &est.cloud,
            config.smooth_radius_multiplier * config.voxel_size,
        )
    };
    let down_src = stage!(report, start, "normals", oriented(&down_src));
    let down_tgt = stage!(report, start, "normals", oriented(&down_tgt));

    // Multi-scale descriptors.
    let desc_start = Instant::now();
    let ms_src = stage!(
        report,
        start,
        "descriptors",
        multiscale_fpfh(&down_src, config.voxel_size, &config.radius_multipliers)
    );
    let ms_tgt = stage!(
        report,
        start,
        "descriptors",
        multiscale_fpfh(&down_tgt, config.voxel_size, &config.radius_multipliers)
    );
    report.timings.descriptors_ms = ms_since(desc_start);

    // Seeded sampling.
    let sampled_src = stage!(
        report,
        start,
        "sampling",
        sample_points(
            &down_src,
            config.sample_count,
            mix_seed(config.seed, SEED_SAMPLE_SOURCE)
        )
    );
    let sampled_tgt = stage!(
        report,
        start,
        "sampling",
        sample_points(
            &down_tgt,
            config.sample_count,
            mix_seed(config.seed, SEED_SAMPLE_TARGET)
        )
    );
    let src_cloud = down_src.select(&sampled_src);
    let tgt_cloud = down_tgt.select(&sampled_tgt);
    let src_desc = ms_src.select(&sampled_src);
    let tgt_desc = ms_tgt.select(&sampled_tgt);

    // Per-level matching.
    let match_start = Instant::now();
    let table = stage!(
        report,
        start,
        "matching",
        build_candidates(&src_desc, &tgt_desc)
    );
    report.timings.matching_ms = ms_since(match_start);
    report.proposed = table.source_count();

    // Voting (or plain level-1 matching), plus the optional mutual filter.
    let vote_start = Instant::now();
    let correspondences = if config.voting {
        stage!(
            report,
            start,
            "voting",
            consistent_vote(&table, &tgt_cloud, config.d_tol())
        )
    } else {
        level_one_matches(table.column(1))
    };
    let correspondences = if config.mutual {
        let backward_table = stage!(
            report,
            start,
            "voting",
            build_candidates(&tgt_desc, &src_desc)
        );
        let backward = if config.voting {
            stage!(
                report,
                start,
                "voting",
                consistent_vote(&backward_table, &src_cloud, config.d_tol())
            )
        } else {
            level_one_matches(backward_table.column(1))
        };
        mutual_filter(&correspondences, &backward)
    } else {
        correspondences
    };
    report.timings.voting_ms = ms_since(vote_start);
    report.accepted = correspondences.accepted_len();

    // Pose estimation over the accepted pairs.
    let ransac_start = Instant::now();
    let src_pts: Vec<_> = correspondences
        .pairs
        .iter()
        .map(|c| src_cloud.points()[c.source])
        .collect();
    let tgt_pts: Vec<_> = correspondences
        .pairs
        .iter()
        .map(|c| tgt_cloud.points()[c.target])
        .collect();
    let ransac_config = config.ransac_config();
    let pose = stage!(
        report,
        start,
        "ransac",
        ransac(&src_pts, &tgt_pts, &ransac_config)
    );
    let polished = stage!(
        report,
        start,
        "ransac",
        refine(
            &src_pts,
            &tgt_pts,
            &pose.transform,
            config.refine_threshold_multiplier * ransac_config.inlier_threshold
        )
    );
    report.timings.ransac_ms = ms_since(ransac_start);
    report.inliers = polished.pose.inlier_indices.len();
    report.transform = Some(polished.pose.transform.clone());

    // Metrics need ground truth.
    if let Some(gt) = gt {
        let est = &polished.pose.transform;
        let pairs: Vec<_> = src_pts
            .iter()
            .cloned()
            .zip(tgt_pts.iter().cloned())
            .collect();
        report.ir = Some(inlier_ratio(&pairs, gt, config.thresholds.inlier_dist));
        report.rre_deg = Some(rre_degrees(est, gt));
        report.rte = Some(rte(est, gt));
        let gt_pairs = ground_truth_pairs(&down_src, &down_tgt, gt, config.thresholds.inlier_dist);
        report.rmse = registration_rmse(&down_src, &down_tgt, est, &gt_pairs).ok();
        report.success_rmse = report.rmse.map(|v| v < config.thresholds.rr_rmse);
        report.success_rre_rte = Some(
            report.rre_deg.unwrap() < config.thresholds.rr_rre_deg
                && report.rte.unwrap() < config.thresholds.rr_rte,
        );
    }

    report.timings.total_ms = ms_since(start);
    Ok(report)
}

/// Without voting every sampled point keeps its level-1 candidate.
fn level_one_matches(column: &[crate::matching::Candidate]) -> CorrespondenceSet {
    CorrespondenceSet {
        pairs: column
            .iter()
            .enumerate()
            .map(|(i, c)| Correspondence {
                source: i,
                target: c.target,
                level: 1,
            })
            .collect(),
        rejected: Vec::new(),
    }
}

/// Ground-truth correspondences for RMSE: each downsampled source point is
/// paired with the nearest target point of its ground-truth image, kept
/// when within `max_dist`.
fn ground_truth_pairs(
    src: &PointCloud,
    tgt: &PointCloud,
    gt: &RigidTransform,
    max_dist: f64,
) -> Vec<(usize, usize)> {
    let index = match SpatialIndex::build(tgt) {
        Ok(i) => i,
        Err(_) => return Vec::new(),
    };
    src.points()
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let (j, d) = index.nearest(&gt.transform_point(p));
            (d < max_dist).then_some((i, j))
        })
        .collect()
}
