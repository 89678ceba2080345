//! The two hierarchical ensemble workflows.
//!
//! *Pair ensemble* (`parea_hc1`): every view is fused twice, once under each
//! of two linkage methods; the two fused affinities are fused again, the
//! result is clustered with both methods and the two labelings are combined
//! by consensus.
//!
//! *Per-view ensemble* (`parea_hc2`): a single fusion pass in which each view
//! uses its own linkage method, followed by up to three clusterings of the
//! fused affinity and a consensus.

use crate::consensus::{coassociation, consensus, LabelingSet};
use crate::error::{Error, Result};
use crate::fusion::{hc_fuse_views, FusionConfig};
use crate::hclust::{cluster, euclidean_distances};
use crate::metrics::{best_k, silhouette};
use crate::optimizer::{evolve, Evolution, GaParams, Genome};
use crate::par;
use crate::seed::derive_seed_str;
use crate::types::{
    affinity_to_distance, AffinityMatrix, DistanceMatrix, Labeling, MethodId, ViewMatrix,
};

/// Node ids of the fusion stages. The matching nodes of an
/// [`EnsembleGraph`](crate::graph::EnsembleGraph) receive the same derived
/// seeds.
pub const STAGE_FIRST: &str = "E1";
pub const STAGE_SECOND: &str = "E2";
pub const STAGE_TOP: &str = "E3";

/// Default upper bound for automatic k selection.
pub const DEFAULT_K_MAX: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Fixed(usize),
    /// Silhouette scan over `2..=k_max` (capped at `n - 1`).
    Auto {
        k_max: usize,
    },
}

impl Default for KChoice {
    fn default() -> Self {
        KChoice::Auto {
            k_max: DEFAULT_K_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub labels: Labeling,
    pub k: usize,
    /// The final fused affinity that was clustered.
    pub fused: AffinityMatrix,
    pub methods: Genome,
    /// Silhouette of `labels` on `1 - fused`; NaN when `k == 1`.
    pub fitness: f64,
}

/// Euclidean distances of every view, after checking that all views cover
/// the same samples in the same order.
pub fn view_distances(views: &[ViewMatrix], exec: par::Execution) -> Result<Vec<DistanceMatrix>> {
    let first = views
        .first()
        .ok_or_else(|| Error::input("at least one view is required"))?;
    if let Some(v) = views.iter().find(|v| v.sample_ids() != first.sample_ids()) {
        return Err(Error::input(format!(
            "views disagree on sample ids ({} vs {} samples)",
            first.n_samples(),
            v.n_samples()
        )));
    }
    Ok(par::map_slice(exec, views, euclidean_distances))
}

fn stage_config(cfg: &FusionConfig, stage: &str) -> FusionConfig {
    FusionConfig {
        seed: derive_seed_str(cfg.seed, stage),
        ..*cfg
    }
}

fn resolve_k(d: &DistanceMatrix, method: MethodId, k: KChoice) -> Result<usize> {
    let n = d.n();
    match k {
        KChoice::Fixed(k) if (1..=n).contains(&k) => Ok(k),
        KChoice::Fixed(k) => Err(Error::input(format!("k = {k} outside 1..={n}"))),
        KChoice::Auto { k_max } => {
            if n < 3 {
                return Err(Error::input("automatic k needs at least 3 samples"));
            }
            best_k(d, method, k_max.min(n - 1).max(2))
        }
    }
}

/// Clusters `fused` with every method in `finals` and returns the consensus.
fn finish(
    fused: AffinityMatrix,
    finals: &[MethodId],
    k: KChoice,
    genome: Genome,
) -> Result<PipelineResult> {
    let d = affinity_to_distance(&fused);
    let k = resolve_k(&d, finals[0], k)?;
    let members = finals
        .iter()
        .map(|&m| cluster(&d, m, k))
        .collect::<Result<Vec<_>>>()?;
    let labels = consensus(&LabelingSet::new(members)?, k)?;
    let fitness = if k >= 2 {
        silhouette(&d, &labels)?
    } else {
        f64::NAN
    };
    Ok(PipelineResult {
        labels,
        k,
        fused,
        methods: genome,
        fitness,
    })
}

/// Pair ensemble on precomputed view distances.
pub fn parea_hc1_distances(
    dists: &[DistanceMatrix],
    hc1: MethodId,
    hc2: MethodId,
    k: KChoice,
    cfg: &FusionConfig,
) -> Result<PipelineResult> {
    if dists.is_empty() {
        return Err(Error::input("at least one view is required"));
    }
    let branch = |method: MethodId, stage: &str| -> Result<AffinityMatrix> {
        let tagged: Vec<(&DistanceMatrix, MethodId)> = dists.iter().map(|d| (d, method)).collect();
        hc_fuse_views(&tagged, &stage_config(cfg, stage))
    };
    let (first, second) = par::join(
        cfg.exec,
        || branch(hc1, STAGE_FIRST),
        || branch(hc2, STAGE_SECOND),
    );
    let (d1, d2) = (
        affinity_to_distance(&first?),
        affinity_to_distance(&second?),
    );
    let top = hc_fuse_views(&[(&d1, hc1), (&d2, hc2)], &stage_config(cfg, STAGE_TOP))?;
    finish(top, &[hc1, hc2], k, Genome(vec![hc1, hc2]))
}

/// Pair ensemble with linkage methods `hc1` and `hc2`.
pub fn parea_hc1(
    views: &[ViewMatrix],
    hc1: MethodId,
    hc2: MethodId,
    k: KChoice,
    cfg: &FusionConfig,
) -> Result<PipelineResult> {
    parea_hc1_distances(&view_distances(views, cfg.exec)?, hc1, hc2, k, cfg)
}

/// Methods that cluster the fused matrix in the per-view ensemble: the
/// first `min(3, N)` entries of the genome's distinct methods, cycling
/// when fewer than that are distinct.
pub fn final_stage_methods(methods: &[MethodId]) -> Vec<MethodId> {
    let mut distinct: Vec<MethodId> = Vec::new();
    for &m in methods {
        if !distinct.contains(&m) {
            distinct.push(m);
        }
    }
    let count = methods.len().min(3);
    (0..count).map(|i| distinct[i % distinct.len()]).collect()
}

/// Per-view ensemble on precomputed view distances.
pub fn parea_hc2_distances(
    dists: &[DistanceMatrix],
    methods: &[MethodId],
    k: KChoice,
    cfg: &FusionConfig,
) -> Result<PipelineResult> {
    if dists.is_empty() {
        return Err(Error::input("at least one view is required"));
    }
    if methods.len() != dists.len() {
        return Err(Error::input(format!(
            "{} methods for {} views",
            methods.len(),
            dists.len()
        )));
    }
    let tagged: Vec<(&DistanceMatrix, MethodId)> =
        dists.iter().zip(methods.iter().copied()).collect();
    let fused = hc_fuse_views(&tagged, &stage_config(cfg, STAGE_FIRST))?;
    finish(
        fused,
        &final_stage_methods(methods),
        k,
        Genome(methods.to_vec()),
    )
}

/// Per-view ensemble; `methods[i]` is the linkage used for view `i`.
pub fn parea_hc2(
    views: &[ViewMatrix],
    methods: &[MethodId],
    k: KChoice,
    cfg: &FusionConfig,
) -> Result<PipelineResult> {
    parea_hc2_distances(&view_distances(views, cfg.exec)?, methods, k, cfg)
}

/// Features of all views side by side (views must share sample ids).
pub fn concatenate_views(views: &[ViewMatrix]) -> Result<ViewMatrix> {
    let first = views
        .first()
        .ok_or_else(|| Error::input("at least one view is required"))?;
    if views.iter().any(|v| v.sample_ids() != first.sample_ids()) {
        return Err(Error::input("views disagree on sample ids"));
    }
    let blocks: Vec<_> = views.iter().map(|v| v.values().view()).collect();
    let joined =
        ndarray::concatenate(ndarray::Axis(1), &blocks).map_err(|e| Error::input(e.to_string()))?;
    ViewMatrix::new(first.sample_ids().to_vec(), joined)
}

/// Clusters the concatenated-feature distance with each of `methods` and
/// combines the labelings by consensus. With one method this is plain
/// hierarchical clustering. `fused` holds the members' co-association.
pub fn concatenated_consensus(
    views: &[ViewMatrix],
    methods: &[MethodId],
    k: KChoice,
) -> Result<PipelineResult> {
    if methods.is_empty() {
        return Err(Error::config("at least one linkage method is required"));
    }
    let d = euclidean_distances(&concatenate_views(views)?);
    let k = resolve_k(&d, methods[0], k)?;
    let members = methods
        .iter()
        .map(|&m| cluster(&d, m, k))
        .collect::<Result<Vec<_>>>()?;
    let set = LabelingSet::new(members)?;
    let labels = if methods.len() == 1 {
        set.members()[0].clone()
    } else {
        consensus(&set, k)?
    };
    let fitness = if k >= 2 {
        silhouette(&d, &labels)?
    } else {
        f64::NAN
    };
    Ok(PipelineResult {
        labels,
        k,
        fused: coassociation(&set),
        methods: Genome(methods.to_vec()),
        fitness,
    })
}

/// Consensus of all eight linkage methods on the concatenated features.
pub fn consensus_baseline(views: &[ViewMatrix], k: KChoice) -> Result<PipelineResult> {
    concatenated_consensus(views, &MethodId::ALL, k)
}

fn fitness_or_nan(r: Result<PipelineResult>, genome: &Genome) -> f64 {
    match r {
        Ok(r) => r.fitness,
        Err(e) => {
            log::warn!("pipeline failed for {genome}: {e}");
            f64::NAN
        }
    }
}

/// Pair ensemble with `(hc1, hc2)` chosen by silhouette-driven search.
/// Also returns the search trace.
pub fn parea_hc1_search(
    views: &[ViewMatrix],
    k: KChoice,
    cfg: &FusionConfig,
    ga: &GaParams,
) -> Result<(PipelineResult, Evolution)> {
    let dists = view_distances(views, cfg.exec)?;
    let search = evolve(
        2,
        |g| fitness_or_nan(parea_hc1_distances(&dists, g.0[0], g.0[1], k, cfg), g),
        ga,
    )?;
    let best = &search.best;
    let result = parea_hc1_distances(&dists, best.0[0], best.0[1], k, cfg)?;
    Ok((result, search))
}

pub fn parea_hc1_opt(
    views: &[ViewMatrix],
    k: KChoice,
    cfg: &FusionConfig,
    ga: &GaParams,
) -> Result<PipelineResult> {
    parea_hc1_search(views, k, cfg, ga).map(|(r, _)| r)
}

/// Per-view ensemble with one method per view chosen by search.
pub fn parea_hc2_search(
    views: &[ViewMatrix],
    k: KChoice,
    cfg: &FusionConfig,
    ga: &GaParams,
) -> Result<(PipelineResult, Evolution)> {
    let dists = view_distances(views, cfg.exec)?;
    let search = evolve(
        dists.len(),
        |g| fitness_or_nan(parea_hc2_distances(&dists, g.genes(), k, cfg), g),
        ga,
    )?;
    let result = parea_hc2_distances(&dists, search.best.genes(), k, cfg)?;
    Ok((result, search))
}

pub fn parea_hc2_opt(
    views: &[ViewMatrix],
    k: KChoice,
    cfg: &FusionConfig,
    ga: &GaParams,
) -> Result<PipelineResult> {
    parea_hc2_search(views, k, cfg, ga).map(|(r, _)| r)
}
