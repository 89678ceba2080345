//! Cluster validity and agreement statistics.

mod gamma;
mod survival;

pub use gamma::{chi2_sf, gamma_q, ln_gamma};
pub use survival::{logrank_test, LogRank, SurvivalRecord};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::hclust::{cut, linkage};
use crate::types::{DistanceMatrix, Labeling, MethodId};

/// Mean silhouette width. Samples in singleton clusters score 0.
pub fn silhouette(d: &DistanceMatrix, l: &Labeling) -> Result<f64> {
    let n = d.n();
    if l.len() != n {
        return Err(Error::input(format!("{} labels for {n} samples", l.len())));
    }
    let k = l.k();
    if k < 2 {
        return Err(Error::input("silhouette needs at least 2 clusters"));
    }
    let labels = l.labels();
    let mut sizes = vec![0usize; k];
    for &c in labels {
        sizes[c] += 1;
    }
    let mut sums = vec![0.0; k];
    let mut total = 0.0;
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if j != i {
                sums[labels[j]] += d.get(i, j);
            }
        }
        let own = labels[i];
        if sizes[own] == 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / n as f64)
}

/// Number of clusters in `2..=k_max` maximising the silhouette of the
/// `method` dendrogram cut; ties go to the smaller k.
pub fn best_k(d: &DistanceMatrix, method: MethodId, k_max: usize) -> Result<usize> {
    let n = d.n();
    if k_max < 2 || k_max + 1 > n {
        return Err(Error::input(format!(
            "k_max = {k_max} outside 2..={}",
            n.saturating_sub(1)
        )));
    }
    let tree = linkage(d, method)?;
    let mut best = (2, f64::NEG_INFINITY);
    for k in 2..=k_max {
        let s = silhouette(d, &cut(&tree, k)?)?;
        if s > best.1 {
            best = (k, s);
        }
    }
    Ok(best.0)
}

/// Cell counts, row sums, column sums.
type Table = (Vec<Vec<u64>>, Vec<u64>, Vec<u64>);

fn contingency(a: &Labeling, b: &Labeling) -> Result<Table> {
    if a.len() != b.len() {
        return Err(Error::input(format!(
            "labelings have different lengths ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let mut table = vec![vec![0u64; b.k()]; a.k()];
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        table[x][y] += 1;
    }
    let rows = table.iter().map(|r| r.iter().sum()).collect();
    let cols = (0..b.k())
        .map(|j| table.iter().map(|r| r[j]).sum())
        .collect();
    Ok((table, rows, cols))
}

fn comb2_int(x: u64) -> i128 {
    i128::from(x) * (i128::from(x) - 1) / 2
}

/// Adjusted Rand index, evaluated in integer arithmetic up to one final
/// division.
pub fn ari(a: &Labeling, b: &Labeling) -> Result<f64> {
    let (table, rows, cols) = contingency(a, b)?;
    let total = comb2_int(a.len() as u64);
    if total == 0 {
        return Ok(1.0);
    }
    let index: i128 = table.iter().flatten().map(|&c| comb2_int(c)).sum();
    let sum_a: i128 = rows.iter().map(|&c| comb2_int(c)).sum();
    let sum_b: i128 = cols.iter().map(|&c| comb2_int(c)).sum();
    // (index - E) / (max - E) with E = sa*sb/total and max = (sa+sb)/2,
    // both scaled by 2*total
    let num = 2 * (index * total - sum_a * sum_b);
    let den = (sum_a + sum_b) * total - 2 * sum_a * sum_b;
    if den == 0 {
        // both partitions trivial (one cluster, or all singletons)
        return Ok(if a.labels() == b.labels() { 1.0 } else { 0.0 });
    }
    Ok(num as f64 / den as f64)
}

/// Normaliser for mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NmiNorm {
    #[default]
    Arithmetic,
    Geometric,
    Min,
    Max,
}

/// NMI normalised by the arithmetic mean of the two entropies.
pub fn nmi(a: &Labeling, b: &Labeling) -> Result<f64> {
    nmi_with(a, b, NmiNorm::Arithmetic)
}

pub fn nmi_with(a: &Labeling, b: &Labeling, norm: NmiNorm) -> Result<f64> {
    let (table, rows, cols) = contingency(a, b)?;
    let n = a.len() as f64;
    let entropy = |counts: &[u64]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let (ha, hb) = (entropy(&rows), entropy(&cols));
    match (ha == 0.0, hb == 0.0) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (n * c / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    let denom = match norm {
        NmiNorm::Arithmetic => 0.5 * (ha + hb),
        NmiNorm::Geometric => (ha * hb).sqrt(),
        NmiNorm::Min => ha.min(hb),
        NmiNorm::Max => ha.max(hb),
    };
    Ok((mi.max(0.0) / denom).clamp(0.0, 1.0))
}

/// Labels indexed by sample id, for joining files keyed by id.
pub fn labels_by_id(l: &Labeling) -> HashMap<&str, usize> {
    l.sample_ids()
        .iter()
        .map(String::as_str)
        .zip(l.labels().iter().copied())
        .collect()
}
