use std::path::PathBuf;

use clap::Args;
use gcreg_core::io::{read_cloud, CloudFormat};
use gcreg_core::pipeline::run_pair;

use crate::config::{self, PipelineFlags};
use crate::{Failure, EXIT_NO_REGISTRATION, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Args)]
pub struct RegisterArgs {
    /// Source cloud (PLY or XYZ)
    pub source: PathBuf,
    /// Target cloud (PLY or XYZ)
    pub target: PathBuf,
    /// Report output path
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

pub fn run(args: RegisterArgs) -> Result<i32, Failure> {
    let config = config::resolve(&args.pipeline, None)?;
    if config::maybe_dump(&args.pipeline, &config) {
        return Ok(EXIT_OK);
    }
    config::init_threads(&config);

    let source = read_cloud(&args.source, CloudFormat::Auto).map_err(Failure::from)?;
    let target = read_cloud(&args.target, CloudFormat::Auto).map_err(Failure::from)?;

    let stem = |p: &PathBuf| -> String {
        p.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "cloud".to_string())
    };
    let pair_id = format!("{}__{}", stem(&args.source), stem(&args.target));
    let report = run_pair(&pair_id, &source, &target, None, &config).map_err(Failure::from)?;

    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&args.out, &json)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.out.display())))?;

    if args.pipeline.json {
        println!("{json}");
    } else if let Some(t) = &report.transform {
        let m = t.to_matrix4();
        println!(
            "{pair_id}: accepted {}/{} correspondences, {} inliers; \
             t = ({:.4}, {:.4}, {:.4}); report → {}",
            report.accepted,
            report.proposed,
            report.inliers,
            m[0][3],
            m[1][3],
            m[2][3],
            args.out.display()
        );
    }

    match &report.failure {
        None => Ok(EXIT_OK),
        Some(f) => {
            eprintln!("registration failed at stage {}: {}", f.stage, f.message);
            if f.stage == "ransac" {
                Ok(EXIT_NO_REGISTRATION)
            } else {
                Ok(EXIT_USAGE)
            }
        }
    }
}
