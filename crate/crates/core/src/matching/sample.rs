use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Uniformly samples `count` distinct point indices without replacement,
/// deterministic for a fixed seed. Asking for at least `cloud.len()`
/// indices returns all of them.
///
/// Sampling is uniform here because the learned per-point matchability
/// scores are produced elsewhere; [`sample_points_weighted`] is the hook
/// for plugging such scores in.
pub fn sample_points(cloud: &PointCloud, count: usize, seed: u64) -> Result<Vec<usize>> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let n = cloud.len();
    if count >= n {
        return Ok((0..n).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, n, count).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Weighted sampling without replacement (Efraimidis–Spirakis keys
/// `u^(1/w)`), deterministic for a fixed seed. Zero-weight points are only
/// drawn once every positive-weight point has been.
pub fn sample_points_weighted(
    cloud: &PointCloud,
    count: usize,
    seed: u64,
    weights: &[f64],
) -> Result<Vec<usize>> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let n = cloud.len();
    if weights.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} points",
            weights.len(),
            n
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidParameter(
            "sampling weights must be finite and non-negative".into(),
        ));
    }
    if count >= n {
        return Ok((0..n).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u: f64 = rand::Rng::random_range(&mut rng, 0.0..1.0);
            let key = if w > 0.0 { u.powf(1.0 / w) } else { 0.0 };
            (key, i)
        })
        .collect();
    keyed.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut picked: Vec<usize> = keyed.into_iter().take(count).map(|(_, i)| i).collect();
    picked.sort_unstable();
    Ok(picked)
}
