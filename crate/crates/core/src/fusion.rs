//! Shared-partition hierarchical fusion of several views into a
//! co-association affinity matrix.
//!
//! All views start from the same singleton partition. At every step each
//! view proposes its closest cluster pair under its own linkage; the pair with
//! the globally smallest height is merged in the shared partition and every
//! view updates its inter-cluster distances. A pair of samples earns one count
//! for every step (within every iteration) in which the two share a cluster.

use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hclust::Agglomerator;
use crate::par::{self, Execution};
use crate::seed::{derive_seed, rng};
use crate::types::{AffinityMatrix, DistanceMatrix, MethodId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    pub iterations: usize,
    /// Linkage used for inter-cluster distances inside every view.
    pub inner_linkage: MethodId,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            iterations: 30,
            inner_linkage: MethodId::Average,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

/// Co-association counts of a single fusion iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationCounts {
    /// `counts[[u, v]]` = number of steps in which `u` and `v` were
    /// co-clustered (`n - s` if they first met at step `s`).
    pub counts: Array2<u32>,
    /// Whether a random tie-break was drawn.
    pub used_tie_break: bool,
}

/// Seed of the `i`-th fusion iteration.
pub fn iteration_seed(seed: u64, i: usize) -> u64 {
    derive_seed(seed, i as u64)
}

fn validate(views: &[(&DistanceMatrix, MethodId)]) -> Result<usize> {
    let (first, _) = views
        .first()
        .ok_or_else(|| Error::input("fusion needs at least one view"))?;
    let n = first.n();
    if n < 2 {
        return Err(Error::input("fusion needs at least 2 samples"));
    }
    for (v, _) in &views[1..] {
        if v.sample_ids() != first.sample_ids() {
            return Err(Error::input("views do not share the same sample ids"));
        }
    }
    Ok(n)
}

/// Runs one fusion iteration. Ties between distinct candidate pairs (across
/// all views) are broken uniformly at random from `iter_seed`; the RNG is
/// never touched when the minimum is unique.
pub fn fuse_iteration(
    views: &[(&DistanceMatrix, MethodId)],
    iter_seed: u64,
) -> Result<IterationCounts> {
    let n = validate(views)?;
    let mut aggs: Vec<Agglomerator> = views
        .iter()
        .map(|(d, m)| Agglomerator::new(d, *m))
        .collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut counts = Array2::<u32>::zeros((n, n));
    let mut rand = None;
    let mut used_tie_break = false;
    let mut buf = Vec::new();
    let mut candidates: Vec<(usize, usize)> = Vec::new();

    for step in 1..n {
        let mut global = f64::INFINITY;
        candidates.clear();
        for agg in &aggs {
            let h = agg.minimal_pairs(&mut buf);
            if h < global {
                global = h;
                candidates.clear();
                candidates.extend_from_slice(&buf);
            } else if h == global {
                candidates.extend_from_slice(&buf);
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        let (a, b) = match candidates.len() {
            0 => unreachable!("at least two active clusters remain"),
            1 => candidates[0],
            len => {
                used_tie_break = true;
                let r = rand.get_or_insert_with(|| rng(iter_seed));
                candidates[r.random_range(0..len)]
            }
        };
        for agg in &mut aggs {
            agg.merge(a, b);
        }
        let weight = (n - step) as u32;
        let moved = std::mem::take(&mut members[b]);
        for &u in &members[a] {
            for &v in &moved {
                counts[[u, v]] = weight;
                counts[[v, u]] = weight;
            }
        }
        members[a].extend(moved);
    }
    Ok(IterationCounts {
        counts,
        used_tie_break,
    })
}

/// Fuses views that each carry their own inner linkage method.
/// `cfg.inner_linkage` is ignored.
pub fn hc_fuse_views(
    views: &[(&DistanceMatrix, MethodId)],
    cfg: &FusionConfig,
) -> Result<AffinityMatrix> {
    let n = validate(views)?;
    if cfg.iterations == 0 {
        return Err(Error::config("fusion iterations must be at least 1"));
    }
    let first = fuse_iteration(views, iteration_seed(cfg.seed, 0))?;
    let mut total = first.counts.mapv(u64::from);
    if first.used_tie_break {
        let rest = par::map_range(cfg.exec, cfg.iterations - 1, |i| {
            fuse_iteration(views, iteration_seed(cfg.seed, i + 1)).map(|c| c.counts)
        });
        for counts in rest {
            total.zip_mut_with(&counts?, |t, c| *t += u64::from(*c));
        }
    } else {
        // without ties every iteration replays the same merge schedule
        total.mapv_inplace(|t| t * cfg.iterations as u64);
    }
    let denom = (cfg.iterations * (n - 1)) as f64;
    let mut values = total.mapv(|t| t as f64 / denom);
    values.diag_mut().fill(1.0);
    AffinityMatrix::new(views[0].0.sample_ids().to_vec(), values)
}

/// Fuses views under a common inner linkage.
pub fn hc_fuse(views: &[DistanceMatrix], cfg: &FusionConfig) -> Result<AffinityMatrix> {
    let tagged: Vec<(&DistanceMatrix, MethodId)> =
        views.iter().map(|d| (d, cfg.inner_linkage)).collect();
    hc_fuse_views(&tagged, cfg)
}
