use std::path::PathBuf;

use clap::Args;
use gcreg_core::pipeline::{run_suite, write_csv, PairManifest};

use crate::config::{self, PipelineFlags};
use crate::{Failure, EXIT_NO_REGISTRATION, EXIT_OK};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Manifest of cloud pairs with ground truth
    pub manifest: PathBuf,
    /// Output directory for report.json, pairs.csv and estimates.json
    #[arg(long, default_value = "bench_out")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

pub fn run(args: BenchArgs) -> Result<i32, Failure> {
    let manifest = PairManifest::load(&args.manifest).map_err(Failure::from)?;
    let config = config::resolve(&args.pipeline, Some(&manifest.settings))?;
    if config::maybe_dump(&args.pipeline, &config) {
        return Ok(EXIT_OK);
    }
    config::init_threads(&config);

    let report = run_suite(&manifest, &config).map_err(Failure::from)?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.out_dir.display())))?;
    let write = |name: &str, data: &str| -> Result<(), Failure> {
        let path = args.out_dir.join(name);
        std::fs::write(&path, data).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
    };
    write(
        "report.json",
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    write("pairs.csv", &write_csv(&report.pairs))?;
    write(
        "estimates.json",
        &serde_json::to_string_pretty(&report.estimates()).expect("estimates serialize"),
    )?;

    let s = &report.summary;
    if args.pipeline.json {
        println!(
            "{}",
            serde_json::to_string_pretty(s).expect("summary serializes")
        );
    } else {
        let pct = |v: Option<f64>| {
            v.map(|x| format!("{:.1}%", 100.0 * x))
                .unwrap_or_else(|| "-".into())
        };
        println!("pairs      : {} ({} completed)", s.pair_count, s.completed);
        println!("RR ({:?}): {}", s.recall_mode, pct(s.registration_recall));
        println!(
            "IR mean    : {}   median: {}",
            pct(s.ir_mean),
            pct(s.ir_median)
        );
        println!("FMR        : {}", pct(s.feature_matching_recall));
        if let (Some(rre), Some(rte)) = (s.rre_mean_deg, s.rte_mean) {
            println!("RRE mean   : {rre:.3}°   RTE mean: {rte:.4}");
        }
        println!("outputs    : {}", args.out_dir.display());
    }

    if report.summary.completed == 0 {
        eprintln!("no pair produced a registration");
        return Ok(EXIT_NO_REGISTRATION);
    }
    Ok(EXIT_OK)
}
