//! Rigid pose estimation: closed-form weighted Kabsch alignment and a
//! seeded RANSAC estimator over putative correspondences.

use nalgebra::{Matrix3, Point3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::RigidTransform;
use crate::error::{Error, Result};

/// Triangle area below which a 3-point RANSAC sample is considered
/// collinear and skipped.
const MIN_SAMPLE_AREA: f64 = 1e-12;
/// Relative singular-value cutoff for the cross-covariance rank test.
const RANK_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RansacConfig {
    pub max_iterations: usize,
    /// Correspondences within this distance of exactness count as inliers.
    pub inlier_threshold: f64,
    pub sample_size: usize,
    /// Early-stop confidence for the standard `1 − (1 − w^s)^k` bound.
    pub confidence: f64,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            inlier_threshold: 0.05,
            sample_size: 3,
            confidence: 0.999,
            seed: 0,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_size < 3 {
            return Err(Error::InvalidParameter(format!(
                "sample_size must be >= 3, got {}",
                self.sample_size
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "confidence must be in (0,1), got {}",
                self.confidence
            )));
        }
        if !(self.inlier_threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inlier_threshold must be positive, got {}",
                self.inlier_threshold
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PoseResult {
    pub transform: RigidTransform,
    /// Indices into the input correspondence list; every entry satisfies
    /// `‖R·x + t − y‖ ≤ inlier_threshold` under `transform`.
    pub inlier_indices: Vec<usize>,
    pub iterations_run: usize,
    pub inlier_rmse: f64,
}

/// [`refine`] output; `refit` is false when the input transform was kept
/// because fewer than 3 inliers supported a refit.
#[derive(Debug, Clone)]
pub struct Refined {
    pub pose: PoseResult,
    pub refit: bool,
}

/// Weighted least-squares rigid alignment (Kabsch): centroid subtraction,
/// 3×3 cross-covariance, SVD with determinant-sign correction.
///
/// Needs at least 3 pairs spanning a rank-2 configuration; collinear input
/// yields a degenerate-input error naming the observed rank.
pub fn kabsch(
    src: &[Point3<f64>],
    dst: &[Point3<f64>],
    weights: Option<&[f64]>,
) -> Result<RigidTransform> {
    if src.len() != dst.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} source points vs {} destination points",
            src.len(),
            dst.len()
        )));
    }
    if src.len() < 3 {
        return Err(Error::DegenerateInput {
            rank: src.len().saturating_sub(1),
            context: format!("{} correspondences, at least 3 required", src.len()),
        });
    }
    let w_sum = match weights {
        Some(w) => {
            if w.len() != src.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} weights for {} pairs",
                    w.len(),
                    src.len()
                )));
            }
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidParameter(
                    "kabsch weights must be finite and non-negative".into(),
                ));
            }
            let s: f64 = w.iter().sum();
            if s <= 0.0 {
                return Err(Error::InvalidParameter("kabsch weights sum to zero".into()));
            }
            s
        }
        None => src.len() as f64,
    };
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);

    let mut c_src = Vector3::zeros();
    let mut c_dst = Vector3::zeros();
    for i in 0..src.len() {
        c_src += weight(i) * src[i].coords;
        c_dst += weight(i) * dst[i].coords;
    }
    c_src /= w_sum;
    c_dst /= w_sum;

    // H = Σ w · (s − c_src)(d − c_dst)ᵀ
    let mut h = Matrix3::zeros();
    for i in 0..src.len() {
        let s = src[i].coords - c_src;
        let d = dst[i].coords - c_dst;
        h += weight(i) * s * d.transpose();
    }

    let svd = nalgebra::SVD::new(h, true, true);
    let sigma = svd.singular_values;
    let sigma_max = sigma.max();
    let rank = sigma
        .iter()
        .filter(|&&s| s > sigma_max * RANK_REL_TOL && s > 0.0)
        .count();
    if rank < 2 {
        return Err(Error::DegenerateInput {
            rank,
            context: "correspondence cross-covariance is rank-deficient (collinear points)"
                .to_string(),
        });
    }

    let u = svd.u.expect("SVD with u requested");
    let v_t = svd.v_t.expect("SVD with v_t requested");
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant();
    let correction =
        Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, if d < 0.0 { -1.0 } else { 1.0 }));
    let rotation = v * correction * u.transpose();
    let translation = c_dst - rotation * c_src;
    Ok(RigidTransform::from_parts_unchecked(rotation, translation))
}

/// RANSAC over paired points: repeatedly fits minimal samples, scores by
/// inlier count (ties by RMSE), then refits on the best consensus set.
///
/// Deterministic for a fixed seed. Degenerate (near-collinear) samples are
/// skipped without ever becoming the best hypothesis. Errors with
/// [`Error::NoConsensus`] when no hypothesis collects a single inlier,
/// carrying the best-scoring transform (if any) for diagnostics.
pub fn ransac(
    src: &[Point3<f64>],
    dst: &[Point3<f64>],
    config: &RansacConfig,
) -> Result<PoseResult> {
    config.validate()?;
    if src.len() != dst.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} source points vs {} destination points",
            src.len(),
            dst.len()
        )));
    }
    let n = src.len();
    if n < config.sample_size {
        return Err(Error::DegenerateInput {
            rank: n.saturating_sub(1),
            context: format!(
                "{n} correspondences, RANSAC sample size is {}",
                config.sample_size
            ),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let thr2 = config.inlier_threshold * config.inlier_threshold;

    struct Best {
        transform: RigidTransform,
        inliers: usize,
        rmse: f64,
    }
    let mut best: Option<Best> = None;
    let mut iterations_run = 0usize;

    for k in 0..config.max_iterations {
        iterations_run = k + 1;
        let sample = rand::seq::index::sample(&mut rng, n, config.sample_size);
        let s_pts: Vec<Point3<f64>> = sample.iter().map(|i| src[i]).collect();
        let d_pts: Vec<Point3<f64>> = sample.iter().map(|i| dst[i]).collect();

        if config.sample_size == 3 {
            let area = (s_pts[1] - s_pts[0]).cross(&(s_pts[2] - s_pts[0])).norm() / 2.0;
            if area < MIN_SAMPLE_AREA {
                continue;
            }
        }
        let hypothesis = match kabsch(&s_pts, &d_pts, None) {
            Ok(t) => t,
            Err(_) => continue,
        };

        let mut inliers = 0usize;
        let mut sq_sum = 0.0;
        for i in 0..n {
            let d2 = (hypothesis.transform_point(&src[i]) - dst[i]).norm_squared();
            if d2 <= thr2 {
                inliers += 1;
                sq_sum += d2;
            }
        }
        let rmse = if inliers > 0 {
            (sq_sum / inliers as f64).sqrt()
        } else {
            f64::INFINITY
        };

        let better = match &best {
            None => true,
            Some(b) => inliers > b.inliers || (inliers == b.inliers && rmse < b.rmse),
        };
        if better {
            best = Some(Best {
                transform: hypothesis,
                inliers,
                rmse,
            });
        }

        // Standard early stop: enough iterations that a pure-inlier sample
        // was drawn with probability >= confidence.
        if let Some(b) = &best {
            if b.inliers > 0 {
                let w = b.inliers as f64 / n as f64;
                let p_bad = 1.0 - w.powi(config.sample_size as i32);
                if p_bad <= 0.0 {
                    break;
                }
                let needed = (1.0 - config.confidence).ln() / p_bad.ln();
                if (k + 1) as f64 >= needed {
                    break;
                }
            }
        }
    }

    let best = match best {
        Some(b) if b.inliers > 0 => b,
        other => {
            return Err(Error::NoConsensus {
                iterations: iterations_run,
                best_inliers: 0,
                best: other.map(|b| Box::new(b.transform)),
            })
        }
    };

    // Refit on the full consensus set, then re-select inliers under the
    // refit transform so the reported set is consistent with it.
    let hyp_inliers: Vec<usize> = (0..n)
        .filter(|&i| (best.transform.transform_point(&src[i]) - dst[i]).norm_squared() <= thr2)
        .collect();
    let refit_src: Vec<Point3<f64>> = hyp_inliers.iter().map(|&i| src[i]).collect();
    let refit_dst: Vec<Point3<f64>> = hyp_inliers.iter().map(|&i| dst[i]).collect();
    let transform = kabsch(&refit_src, &refit_dst, None).unwrap_or(best.transform);

    let (inlier_indices, inlier_rmse) =
        select_inliers(src, dst, &transform, config.inlier_threshold);
    if inlier_indices.is_empty() {
        return Err(Error::NoConsensus {
            iterations: iterations_run,
            best_inliers: 0,
            best: Some(Box::new(transform)),
        });
    }
    Ok(PoseResult {
        transform,
        inlier_indices,
        iterations_run,
        inlier_rmse,
    })
}

/// One polish pass: re-selects inliers under `transform`, refits Kabsch on
/// them once, and reports the RMSE of the refit transform over that same
/// inlier set (never larger than the input transform's). Keeps the input
/// transform when fewer than 3 inliers support a refit (`refit == false`).
pub fn refine(
    src: &[Point3<f64>],
    dst: &[Point3<f64>],
    transform: &RigidTransform,
    inlier_threshold: f64,
) -> Result<Refined> {
    if src.len() != dst.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} source points vs {} destination points",
            src.len(),
            dst.len()
        )));
    }
    if !(inlier_threshold > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inlier_threshold must be positive, got {inlier_threshold}"
        )));
    }
    let (inliers, rmse_before) = select_inliers(src, dst, transform, inlier_threshold);
    if inliers.len() < 3 {
        return Ok(Refined {
            pose: PoseResult {
                transform: transform.clone(),
                inlier_indices: inliers,
                iterations_run: 0,
                inlier_rmse: rmse_before,
            },
            refit: false,
        });
    }
    let s: Vec<Point3<f64>> = inliers.iter().map(|&i| src[i]).collect();
    let d: Vec<Point3<f64>> = inliers.iter().map(|&i| dst[i]).collect();
    match kabsch(&s, &d, None) {
        Ok(refit_transform) => {
            let mut sq = 0.0;
            for (a, b) in s.iter().zip(&d) {
                sq += (refit_transform.transform_point(a) - b).norm_squared();
            }
            let rmse = (sq / s.len() as f64).sqrt();
            Ok(Refined {
                pose: PoseResult {
                    transform: refit_transform,
                    inlier_indices: inliers,
                    iterations_run: 1,
                    inlier_rmse: rmse,
                },
                refit: true,
            })
        }
        Err(_) => Ok(Refined {
            pose: PoseResult {
                transform: transform.clone(),
                inlier_indices: inliers,
                iterations_run: 0,
                inlier_rmse: rmse_before,
            },
            refit: false,
        }),
    }
}

fn select_inliers(
    src: &[Point3<f64>],
    dst: &[Point3<f64>],
    transform: &RigidTransform,
    threshold: f64,
) -> (Vec<usize>, f64) {
    let thr2 = threshold * threshold;
    let mut indices = Vec::new();
    let mut sq_sum = 0.0;
    for i in 0..src.len() {
        let d2 = (transform.transform_point(&src[i]) - dst[i]).norm_squared();
        if d2 <= thr2 {
            indices.push(i);
            sq_sum += d2;
        }
    }
    let rmse = if indices.is_empty() {
        f64::INFINITY
    } else {
        (sq_sum / indices.len() as f64).sqrt()
    };
    (indices, rmse)
}
