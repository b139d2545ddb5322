use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::RigidTransform;
use crate::error::Result;
use crate::io::{read_cloud, CloudFormat};
use crate::metrics::{
    feature_matching_recall, registration_recall, report_succeeds, FailureRecord, RecallMode,
    RegistrationReport, TimingBreakdown,
};
use crate::pipeline::{run_pair, PairManifest, PipelineConfig};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Suite-level aggregates. RRE/RTE means follow the scene-evaluation
/// convention of averaging over successfully registered pairs only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub pair_count: usize,
    pub completed: usize,
    pub recall_mode: RecallMode,
    pub registration_recall: Option<f64>,
    pub ir_mean: Option<f64>,
    pub ir_median: Option<f64>,
    pub feature_matching_recall: Option<f64>,
    pub rre_mean_deg: Option<f64>,
    pub rte_mean: Option<f64>,
    pub rmse_mean: Option<f64>,
}

/// The one-document JSON output: resolved configuration, aggregates and
/// every per-pair report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub config: PipelineConfig,
    pub summary: SuiteSummary,
    pub pairs: Vec<RegistrationReport>,
}

/// Per-pair estimated transform, consumed by the eval command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairEstimate {
    pub id: String,
    pub transform: Option<RigidTransform>,
}

impl SuiteReport {
    pub fn estimates(&self) -> Vec<PairEstimate> {
        self.pairs
            .iter()
            .map(|r| PairEstimate {
                id: r.pair_id.clone(),
                transform: r.transform.clone(),
            })
            .collect()
    }
}

/// Runs every manifest pair through [`run_pair`], in manifest order.
/// Unreadable files become per-pair failure records; the suite continues.
pub fn run_suite(manifest: &PairManifest, config: &PipelineConfig) -> Result<SuiteReport> {
    manifest.validate()?;
    config.validate()?;

    let pairs: Vec<RegistrationReport> = manifest
        .pairs
        .par_iter()
        .map(|pair| {
            let loaded = read_cloud(&pair.source, CloudFormat::Auto)
                .and_then(|s| read_cloud(&pair.target, CloudFormat::Auto).map(|t| (s, t)));
            match loaded {
                Ok((source, target)) => {
                    run_pair(&pair.id, &source, &target, Some(&pair.gt), config)
                        .expect("config validated above")
                }
                Err(e) => failed_report(&pair.id, "load", &e.to_string()),
            }
        })
        .collect();

    let summary = summarize(&pairs, config);
    Ok(SuiteReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: config.clone(),
        summary,
        pairs,
    })
}

fn failed_report(pair_id: &str, stage: &str, message: &str) -> RegistrationReport {
    RegistrationReport {
        pair_id: pair_id.to_string(),
        failure: Some(FailureRecord {
            stage: stage.to_string(),
            message: message.to_string(),
        }),
        transform: None,
        source_points: 0,
        target_points: 0,
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
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

pub(crate) fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mid = sorted.len() / 2;
    Some(if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

fn summarize(pairs: &[RegistrationReport], config: &PipelineConfig) -> SuiteSummary {
    let irs: Vec<f64> = pairs.iter().filter_map(|r| r.ir).collect();
    let successes: Vec<&RegistrationReport> = pairs
        .iter()
        .filter(|r| report_succeeds(r, &config.thresholds, config.recall_mode))
        .collect();
    let rre: Vec<f64> = successes.iter().filter_map(|r| r.rre_deg).collect();
    let rte_vals: Vec<f64> = successes.iter().filter_map(|r| r.rte).collect();
    let rmse: Vec<f64> = pairs.iter().filter_map(|r| r.rmse).collect();

    SuiteSummary {
        pair_count: pairs.len(),
        completed: pairs.iter().filter(|r| r.is_success()).count(),
        recall_mode: config.recall_mode,
        registration_recall: registration_recall(pairs, &config.thresholds, config.recall_mode)
            .ok(),
        ir_mean: mean(&irs),
        ir_median: median(&irs),
        feature_matching_recall: feature_matching_recall(&irs, config.thresholds.fmr_min_ir).ok(),
        rre_mean_deg: mean(&rre),
        rte_mean: mean(&rte_vals),
        rmse_mean: mean(&rmse),
    }
}

/// Fixed CSV column set. Timings are deliberately excluded so identical
/// runs produce byte-identical files.
pub fn csv_header() -> &'static str {
    "pair_id,failure_stage,source_points,target_points,source_down,target_down,\
proposed,accepted,inliers,ir,rre_deg,rte,rmse,success_rmse,success_rre_rte"
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_bool(v: Option<bool>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn report_csv_row(r: &RegistrationReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.pair_id,
        r.failure
            .as_ref()
            .map(|f| f.stage.clone())
            .unwrap_or_default(),
        r.source_points,
        r.target_points,
        r.source_down,
        r.target_down,
        r.proposed,
        r.accepted,
        r.inliers,
        opt_num(r.ir),
        opt_num(r.rre_deg),
        opt_num(r.rte),
        opt_num(r.rmse),
        opt_bool(r.success_rmse),
        opt_bool(r.success_rre_rte),
    )
}

/// One row per pair, in input order, plus the header line.
pub fn write_csv(pairs: &[RegistrationReport]) -> String {
    let mut out = String::from(csv_header());
    out.push('\n');
    for r in pairs {
        out.push_str(&report_csv_row(r));
        out.push('\n');
    }
    out
}
