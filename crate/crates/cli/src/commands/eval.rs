use std::path::PathBuf;

use clap::Args;
use gcreg_core::cloud::{voxel_downsample, PointCloud, RigidTransform, SpatialIndex};
use gcreg_core::io::{read_cloud, CloudFormat};
use gcreg_core::metrics::{registration_rmse, rre_degrees, rte, RecallMode};
use gcreg_core::pipeline::{PairEstimate, PairManifest};

use crate::config::{self, PipelineFlags};
use crate::{Failure, EXIT_OK};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// JSON file of per-pair estimated transforms (from `bench`)
    #[arg(long)]
    pub estimates: PathBuf,
    /// Manifest the estimates were produced from
    #[arg(long)]
    pub manifest: PathBuf,
    /// Optional output path for the metrics table (JSON)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(serde::Serialize)]
struct EvalRow {
    id: String,
    rre_deg: Option<f64>,
    rte: Option<f64>,
    rmse: Option<f64>,
    success_rmse: Option<bool>,
    success_rre_rte: Option<bool>,
}

#[derive(serde::Serialize)]
struct EvalTable {
    recall_mode: RecallMode,
    registration_recall: f64,
    rre_mean_deg: Option<f64>,
    rte_mean: Option<f64>,
    rmse_mean: Option<f64>,
    rows: Vec<EvalRow>,
}

pub fn run(args: EvalArgs) -> Result<i32, Failure> {
    let manifest = PairManifest::load(&args.manifest).map_err(Failure::from)?;
    let config = config::resolve(&args.pipeline, Some(&manifest.settings))?;
    if config::maybe_dump(&args.pipeline, &config) {
        return Ok(EXIT_OK);
    }

    let text = std::fs::read_to_string(&args.estimates)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.estimates.display())))?;
    let estimates: Vec<PairEstimate> = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.estimates.display())))?;

    if estimates.len() != manifest.pairs.len() {
        return Err(Failure::usage(format!(
            "{} estimates for {} manifest pairs",
            estimates.len(),
            manifest.pairs.len()
        )));
    }
    for (est, pair) in estimates.iter().zip(&manifest.pairs) {
        if est.id != pair.id {
            return Err(Failure::usage(format!(
                "estimate id {:?} does not match manifest pair {:?}",
                est.id, pair.id
            )));
        }
    }

    let mut rows = Vec::with_capacity(estimates.len());
    for (est, pair) in estimates.iter().zip(&manifest.pairs) {
        let row = match &est.transform {
            None => EvalRow {
                id: est.id.clone(),
                rre_deg: None,
                rte: None,
                rmse: None,
                success_rmse: None,
                success_rre_rte: None,
            },
            Some(t) => {
                let rre = rre_degrees(t, &pair.gt);
                let rt = rte(t, &pair.gt);
                let rmse = pair_rmse(pair, t, &config.thresholds.inlier_dist, config.voxel_size)?;
                EvalRow {
                    id: est.id.clone(),
                    rre_deg: Some(rre),
                    rte: Some(rt),
                    rmse,
                    success_rmse: rmse.map(|v| v < config.thresholds.rr_rmse),
                    success_rre_rte: Some(
                        rre < config.thresholds.rr_rre_deg && rt < config.thresholds.rr_rte,
                    ),
                }
            }
        };
        rows.push(row);
    }

    let succeeded: Vec<&EvalRow> = rows
        .iter()
        .filter(|r| match config.recall_mode {
            RecallMode::Rmse => r.success_rmse == Some(true),
            RecallMode::RreRte => r.success_rre_rte == Some(true),
        })
        .collect();
    let mean = |vals: Vec<f64>| -> Option<f64> {
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    };
    let table = EvalTable {
        recall_mode: config.recall_mode,
        registration_recall: succeeded.len() as f64 / rows.len() as f64,
        rre_mean_deg: mean(succeeded.iter().filter_map(|r| r.rre_deg).collect()),
        rte_mean: mean(succeeded.iter().filter_map(|r| r.rte).collect()),
        rmse_mean: mean(rows.iter().filter_map(|r| r.rmse).collect()),
        rows,
    };

    let json = serde_json::to_string_pretty(&table).expect("table serializes");
    if let Some(out) = &args.out {
        std::fs::write(out, &json)
            .map_err(|e| Failure::usage(format!("{}: {e}", out.display())))?;
    }
    if args.pipeline.json {
        println!("{json}");
    } else {
        println!(
            "RR ({:?}) = {:.1}% over {} pairs",
            table.recall_mode,
            100.0 * table.registration_recall,
            table.rows.len()
        );
        if let (Some(rre), Some(rt)) = (table.rre_mean_deg, table.rte_mean) {
            println!("RRE mean {rre:.3}°, RTE mean {rt:.4} (over successes)");
        }
        for row in &table.rows {
            match (row.rre_deg, row.rte) {
                (Some(rre), Some(rt)) => println!("{}: RRE {rre:.3}° RTE {rt:.4}", row.id),
                _ => println!("{}: no estimate", row.id),
            }
        }
    }
    Ok(EXIT_OK)
}

/// RMSE over ground-truth nearest-neighbor pairs of the downsampled
/// clouds, mirroring the pipeline's convention.
fn pair_rmse(
    pair: &gcreg_core::pipeline::ManifestPair,
    est: &RigidTransform,
    inlier_dist: &f64,
    voxel: f64,
) -> Result<Option<f64>, Failure> {
    let source = read_cloud(&pair.source, CloudFormat::Auto).map_err(Failure::from)?;
    let target = read_cloud(&pair.target, CloudFormat::Auto).map_err(Failure::from)?;
    let down_src = voxel_downsample(&source, voxel).map_err(Failure::from)?;
    let down_tgt = voxel_downsample(&target, voxel).map_err(Failure::from)?;
    let gt_pairs = gt_nn_pairs(&down_src, &down_tgt, &pair.gt, *inlier_dist);
    Ok(registration_rmse(&down_src, &down_tgt, est, &gt_pairs).ok())
}

fn gt_nn_pairs(
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
