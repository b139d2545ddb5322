//! Flag-to-configuration resolution.
//!
//! Precedence, lowest to highest: built-in defaults, `--preset`, manifest
//! settings (bench only), `--config` file, individual flags. A config file
//! is total: it is parsed into a complete configuration (missing fields
//! take built-in defaults), so re-ingesting `--dump-config` output
//! reproduces the run exactly.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gcreg_core::pipeline::{ManifestSettings, PipelineConfig};
use gcreg_core::RecallMode;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Room-scale scans: voxel 0.025, RMSE-based recall, K = 256.
    Indoor,
    /// LIDAR sweeps: voxel 0.3, RRE/RTE recall (5°, 2 m), K = 512.
    Outdoor,
    /// Object-scale clouds: voxel 0.02, RRE/RTE recall (5°, 0.1), K = 768.
    Object,
}

/// Pipeline flags shared by the register, bench and eval commands.
/// Every flag maps onto exactly one [`PipelineConfig`] field.
#[derive(Debug, Args)]
pub struct PipelineFlags {
    /// Downsampling voxel size in cloud units
    #[arg(long)]
    pub voxel: Option<f64>,

    /// Descriptor radius multipliers (× voxel), largest first
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,

    /// Voting tolerance d as a multiple of the voxel size
    #[arg(long)]
    pub dtol_mult: Option<f64>,

    /// Points sampled per cloud before matching
    #[arg(long)]
    pub samples: Option<usize>,

    /// RANSAC iteration budget
    #[arg(long)]
    pub ransac_iters: Option<usize>,

    /// RANSAC inlier threshold (default: 2 × voxel)
    #[arg(long)]
    pub inlier_thresh: Option<f64>,

    /// Base seed for sampling and RANSAC
    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads (0 = all cores)
    #[arg(long, env = "GC_REGISTER_THREADS")]
    pub threads: Option<usize>,

    /// Machine-readable output: JSON on stdout, JSON errors on stderr
    #[arg(long)]
    pub json: bool,

    /// Parameter bundle for a dataset family
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,

    /// Skip consistent voting; match with level-1 descriptors only
    #[arg(long)]
    pub no_voting: bool,

    /// Extract a single descriptor scale (implies no voting)
    #[arg(long)]
    pub single_scale: bool,

    /// Keep only mutually consistent correspondences
    #[arg(long)]
    pub mutual: bool,

    /// Read the full configuration from a JSON file
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Print the resolved configuration as JSON and exit
    #[arg(long)]
    pub dump_config: bool,

    /// Registration recall rule: rmse or rre-rte
    #[arg(long, value_enum)]
    pub recall: Option<RecallFlag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecallFlag {
    Rmse,
    RreRte,
}

fn apply_preset(config: &mut PipelineConfig, preset: Preset) {
    match preset {
        Preset::Indoor => {
            config.voxel_size = 0.025;
            config.recall_mode = RecallMode::Rmse;
            config.thresholds.rr_rmse = 0.2;
            config.thresholds.inlier_dist = 0.10;
            config.loss_sample_count = 256;
        }
        Preset::Outdoor => {
            config.voxel_size = 0.30;
            config.recall_mode = RecallMode::RreRte;
            config.thresholds.rr_rre_deg = 5.0;
            config.thresholds.rr_rte = 2.0;
            config.thresholds.inlier_dist = 0.60;
            config.loss_sample_count = 512;
        }
        Preset::Object => {
            config.voxel_size = 0.02;
            config.recall_mode = RecallMode::RreRte;
            config.thresholds.rr_rre_deg = 5.0;
            config.thresholds.rr_rte = 0.1;
            config.thresholds.inlier_dist = 0.08;
            config.loss_sample_count = 768;
        }
    }
}

/// Builds the effective configuration for a command invocation.
pub fn resolve(
    flags: &PipelineFlags,
    manifest_settings: Option<&ManifestSettings>,
) -> Result<PipelineConfig, Failure> {
    let mut config = PipelineConfig::default();
    if let Some(preset) = flags.preset {
        apply_preset(&mut config, preset);
    }
    if let Some(settings) = manifest_settings {
        if let Some(v) = settings.voxel_size {
            config.voxel_size = v;
        }
        if let Some(s) = settings.seed {
            config.seed = s;
        }
        if let Some(t) = &settings.thresholds {
            config.thresholds = t.clone();
        }
    }
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        config = serde_json::from_str(&text)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    }

    if let Some(v) = flags.voxel {
        config.voxel_size = v;
    }
    if let Some(radii) = &flags.radii {
        config.radius_multipliers = radii.clone();
    }
    if let Some(d) = flags.dtol_mult {
        config.dtol_multiplier = d;
    }
    if let Some(s) = flags.samples {
        config.sample_count = s;
    }
    if let Some(n) = flags.ransac_iters {
        config.ransac_iterations = n;
    }
    if let Some(t) = flags.inlier_thresh {
        config.inlier_threshold = Some(t);
    }
    if let Some(s) = flags.seed {
        config.seed = s;
    }
    if let Some(t) = flags.threads {
        config.threads = t;
    }
    if let Some(mode) = flags.recall {
        config.recall_mode = match mode {
            RecallFlag::Rmse => RecallMode::Rmse,
            RecallFlag::RreRte => RecallMode::RreRte,
        };
    }
    if flags.single_scale {
        config.radius_multipliers.truncate(1);
        config.voting = false;
    }
    if flags.no_voting {
        config.voting = false;
    }
    if flags.mutual {
        config.mutual = true;
    }

    config.validate().map_err(Failure::from)?;
    Ok(config)
}

/// Handles `--dump-config`: prints the resolved configuration and reports
/// whether the caller should exit.
pub fn maybe_dump(flags: &PipelineFlags, config: &PipelineConfig) -> bool {
    if flags.dump_config {
        println!(
            "{}",
            serde_json::to_string_pretty(config).expect("config serializes")
        );
        true
    } else {
        false
    }
}

/// Installs the global rayon pool sized per the configuration. Safe to
/// call once per process; later calls are ignored.
pub fn init_threads(config: &PipelineConfig) {
    if config.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global();
    }
}
