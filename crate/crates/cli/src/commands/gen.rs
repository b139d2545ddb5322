use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gcreg_core::io::{write_cloud, CloudFormat};
use gcreg_core::pipeline::{mix_seed, ManifestPair, ManifestSettings, PairManifest};
use gcreg_core::synth::{synth_pair, SynthConfig, SynthShape};

use crate::{Failure, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeFlag {
    Sphere,
    BoxRoom,
    RandomSurface,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Directory to create the fixture files and manifest in
    pub out_dir: PathBuf,
    /// Number of pairs
    #[arg(long, default_value_t = 10)]
    pub pairs: usize,
    #[arg(long, value_enum, default_value_t = ShapeFlag::RandomSurface)]
    pub shape: ShapeFlag,
    #[arg(long, default_value_t = 4096)]
    pub n_points: usize,
    /// Shared-point fraction between the two views, in (0, 1]
    #[arg(long, default_value_t = 0.7)]
    pub overlap: f64,
    /// Gaussian noise sigma (cloud units)
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Maximum rotation magnitude in degrees
    #[arg(long, default_value_t = 45.0)]
    pub max_rotation: f64,
    /// Maximum translation magnitude
    #[arg(long, default_value_t = 0.5)]
    pub max_translation: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Voxel size recorded in the manifest settings
    #[arg(long, default_value_t = 0.025)]
    pub voxel: f64,
    /// JSON errors on stderr
    #[arg(long)]
    pub json: bool,
}

pub fn run(args: GenArgs) -> Result<i32, Failure> {
    if args.pairs == 0 {
        return Err(Failure::usage("--pairs must be at least 1"));
    }
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.out_dir.display())))?;

    let shape = match args.shape {
        ShapeFlag::Sphere => SynthShape::Sphere,
        ShapeFlag::BoxRoom => SynthShape::BoxRoom,
        ShapeFlag::RandomSurface => SynthShape::RandomSurface,
    };

    let mut pairs = Vec::with_capacity(args.pairs);
    for i in 0..args.pairs {
        let config = SynthConfig {
            n_points: args.n_points,
            overlap_frac: args.overlap,
            noise_sigma: args.noise,
            max_rotation_deg: args.max_rotation,
            max_translation: args.max_translation,
            shape,
            seed: mix_seed(args.seed, i as u64),
        };
        let pair = synth_pair(&config).map_err(Failure::from)?;
        let source = args.out_dir.join(format!("src_{i:03}.ply"));
        let target = args.out_dir.join(format!("tgt_{i:03}.ply"));
        write_cloud(&pair.source, &source, CloudFormat::Ply).map_err(Failure::from)?;
        write_cloud(&pair.target, &target, CloudFormat::Ply).map_err(Failure::from)?;
        pairs.push(ManifestPair {
            id: format!("pair_{i:03}"),
            // Keep manifest paths relative so the directory is relocatable.
            source: PathBuf::from(format!("src_{i:03}.ply")),
            target: PathBuf::from(format!("tgt_{i:03}.ply")),
            gt: pair.gt,
        });
    }

    let manifest = PairManifest::new(
        ManifestSettings {
            voxel_size: Some(args.voxel),
            seed: Some(args.seed),
            thresholds: None,
        },
        pairs,
    );
    let path = args.out_dir.join("manifest.json");
    manifest.save(&path).map_err(Failure::from)?;
    println!(
        "{} pairs → {} (manifest: {})",
        args.pairs,
        args.out_dir.display(),
        path.display()
    );
    Ok(EXIT_OK)
}
