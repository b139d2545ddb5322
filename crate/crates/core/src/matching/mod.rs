//! Feature-space matching and the multi-level consistent voting filter.
//!
//! Matching runs per level: each source descriptor gets its exact nearest
//! neighbor among the target descriptors. Voting then scans adjacent level
//! pairs and keeps a source point only when two neighboring levels nominate
//! agreeing candidates, which strips points whose features are not stable
//! across receptive-field sizes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::descriptors::{DescriptorSet, MultiScaleDescriptors};
use crate::error::{Error, Result};

mod sample;

pub use sample::{sample_points, sample_points_weighted};

/// A per-source-point nominee: target index plus feature-space distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub target: usize,
    pub distance: f64,
}

/// Per-level candidates for every source point: `L` columns of length
/// `source_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateTable {
    columns: Vec<Vec<Candidate>>,
}

impl CandidateTable {
    /// Builds a table from per-level candidate columns. All columns must
    /// share one length.
    pub fn new(columns: Vec<Vec<Candidate>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidParameter(
                "candidate table needs at least one level".into(),
            ));
        }
        let n = columns[0].len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::DimensionMismatch(
                "candidate columns differ in length".into(),
            ));
        }
        Ok(Self { columns })
    }

    pub fn level_count(&self) -> usize {
        self.columns.len()
    }

    pub fn source_count(&self) -> usize {
        self.columns[0].len()
    }

    /// Candidate of 1-based `level` for source point `i`.
    pub fn candidate(&self, level: usize, i: usize) -> Candidate {
        self.columns[level - 1][i]
    }

    pub fn column(&self, level: usize) -> &[Candidate] {
        &self.columns[level - 1]
    }
}

/// An accepted pair together with the level whose candidate was emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    pub source: usize,
    pub target: usize,
    /// 1-based lower level of the first consistent pair; in `1..=L-1`.
    pub level: usize,
}

/// Voting output: accepted pairs plus the rejected source indices.
/// Together they partition the queried source indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceSet {
    pub pairs: Vec<Correspondence>,
    pub rejected: Vec<usize>,
}

impl CorrespondenceSet {
    pub fn accepted_len(&self) -> usize {
        self.pairs.len()
    }

    pub fn queried_len(&self) -> usize {
        self.pairs.len() + self.rejected.len()
    }
}

/// Exact feature-space nearest neighbor for every source descriptor.
/// Ties go to the smallest target index.
pub fn match_level(source: &DescriptorSet, target: &DescriptorSet) -> Result<Vec<Candidate>> {
    if source.dimension() != target.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "source dimension {} vs target dimension {}",
            source.dimension(),
            target.dimension()
        )));
    }
    if target.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot match against an empty target descriptor set".into(),
        ));
    }
    let out = (0..source.len())
        .into_par_iter()
        .map(|i| {
            let v = source.vector(i);
            let mut best = (f64::INFINITY, usize::MAX);
            for (j, w) in target.rows().enumerate() {
                let mut d2 = 0.0;
                for (a, b) in v.iter().zip(w) {
                    let diff = a - b;
                    d2 += diff * diff;
                }
                if d2 < best.0 || (d2 == best.0 && j < best.1) {
                    best = (d2, j);
                }
            }
            Candidate {
                target: best.1,
                distance: best.0.sqrt(),
            }
        })
        .collect();
    Ok(out)
}

/// Runs [`match_level`] once per level and stacks the columns.
pub fn build_candidates(
    source: &MultiScaleDescriptors,
    target: &MultiScaleDescriptors,
) -> Result<CandidateTable> {
    if source.level_count() != target.level_count() {
        return Err(Error::DimensionMismatch(format!(
            "source has {} levels, target has {}",
            source.level_count(),
            target.level_count()
        )));
    }
    let columns = source
        .levels()
        .iter()
        .zip(target.levels())
        .map(|(s, t)| match_level(s, t))
        .collect::<Result<Vec<_>>>()?;
    CandidateTable::new(columns)
}

/// The multi-level consistency vote.
///
/// For each source point the adjacent level pairs `(l, l+1)` are scanned in
/// ascending `l`. A pair agrees when the two candidates share the target
/// index or when their target points lie within `d_tol` of each other. The
/// first agreeing pair emits the lower level's candidate; a point with no
/// agreeing pair is rejected.
pub fn consistent_vote(
    candidates: &CandidateTable,
    target_points: &PointCloud,
    d_tol: f64,
) -> Result<CorrespondenceSet> {
    if !(d_tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "d_tol must be non-negative, got {d_tol}"
        )));
    }
    for level in 1..=candidates.level_count() {
        for c in candidates.column(level) {
            if c.target >= target_points.len() {
                return Err(Error::InvalidParameter(format!(
                    "candidate target index {} out of range for {} target points",
                    c.target,
                    target_points.len()
                )));
            }
        }
    }

    let levels = candidates.level_count();
    let pts = target_points.points();
    let mut set = CorrespondenceSet::default();
    for i in 0..candidates.source_count() {
        let mut emitted = None;
        for l in 1..levels {
            let a = candidates.candidate(l, i);
            let b = candidates.candidate(l + 1, i);
            let agree = a.target == b.target || (pts[a.target] - pts[b.target]).norm() <= d_tol;
            if agree {
                emitted = Some(Correspondence {
                    source: i,
                    target: a.target,
                    level: l,
                });
                break;
            }
        }
        match emitted {
            Some(c) => set.pairs.push(c),
            None => set.rejected.push(i),
        }
    }
    Ok(set)
}

/// Keeps `(i, j)` only when the backward set maps `j` back to `i`.
/// Dropped pairs move to the rejected list so the partition invariant
/// holds. Disabled by default in the pipeline.
pub fn mutual_filter(
    forward: &CorrespondenceSet,
    backward: &CorrespondenceSet,
) -> CorrespondenceSet {
    let mut back = std::collections::HashMap::with_capacity(backward.pairs.len());
    for c in &backward.pairs {
        back.entry(c.source).or_insert(c.target);
    }
    let mut out = CorrespondenceSet {
        pairs: Vec::with_capacity(forward.pairs.len()),
        rejected: forward.rejected.clone(),
    };
    for c in &forward.pairs {
        if back.get(&c.target) == Some(&c.source) {
            out.pairs.push(*c);
        } else {
            out.rejected.push(c.source);
        }
    }
    out.rejected.sort_unstable();
    out
}
