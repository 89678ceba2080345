//! Agglomerative hierarchical clustering with Lance–Williams updates.
//!
//! Cluster ids follow the usual convention: leaves are `0..n`, the cluster
//! created by merge `s` (0-based) gets id `n + s`.

use crate::error::{Error, Result};
use crate::types::{DistanceMatrix, Labeling, MethodId, ViewMatrix};
use ndarray::Array2;

/// One agglomeration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// Full merge tree over `n` leaves (`n - 1` merges, in merge order).
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    sample_ids: Vec<String>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn n_leaves(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.height)
    }
}

/// Working state of a Lance–Williams agglomeration over one dissimilarity
/// matrix. Slots index the original rows; a merged cluster lives in the
/// smaller of its two slots.
#[derive(Debug, Clone)]
pub(crate) struct Agglomerator {
    method: MethodId,
    n: usize,
    work: Vec<f64>,
    size: Vec<usize>,
    cluster_id: Vec<usize>,
    active: Vec<usize>,
    next_id: usize,
}

impl Agglomerator {
    pub(crate) fn new(d: &DistanceMatrix, method: MethodId) -> Self {
        let n = d.n();
        let squared = method.uses_squared();
        let work = d
            .values()
            .iter()
            .map(|&v| if squared { v * v } else { v })
            .collect();
        Self {
            method,
            n,
            work,
            size: vec![1; n],
            cluster_id: (0..n).collect(),
            active: (0..n).collect(),
            next_id: n,
        }
    }

    #[inline]
    fn w(&self, i: usize, j: usize) -> f64 {
        self.work[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.work[i * self.n + j] = v;
        self.work[j * self.n + i] = v;
    }

    /// Maps a working value back to the reported height scale.
    #[inline]
    pub(crate) fn height_of(&self, w: f64) -> f64 {
        if self.method.uses_squared() {
            w.max(0.0).sqrt()
        } else {
            w
        }
    }

    pub(crate) fn n_active(&self) -> usize {
        self.active.len()
    }

    /// Closest active pair; exact ties go to the smallest
    /// (min cluster id, max cluster id).
    pub(crate) fn nearest_pair(&self) -> Option<(usize, usize)> {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for (ai, &a) in self.active.iter().enumerate() {
            for &b in &self.active[ai + 1..] {
                let w = self.w(a, b);
                let (ia, ib) = (self.cluster_id[a], self.cluster_id[b]);
                let key = (ia.min(ib), ia.max(ib));
                let better = match best {
                    None => true,
                    Some((bw, _, _, k0, k1)) => w < bw || (w == bw && key < (k0, k1)),
                };
                if better {
                    best = Some((w, a, b, key.0, key.1));
                }
            }
        }
        best.map(|(_, a, b, _, _)| (a, b))
    }

    /// Height of the closest pair and every slot pair attaining it exactly.
    pub(crate) fn minimal_pairs(&self, out: &mut Vec<(usize, usize)>) -> f64 {
        out.clear();
        let mut wmin = f64::INFINITY;
        for (ai, &a) in self.active.iter().enumerate() {
            let row = &self.work[a * self.n..(a + 1) * self.n];
            for &b in &self.active[ai + 1..] {
                let w = row[b];
                if w < wmin {
                    wmin = w;
                    out.clear();
                    out.push((a, b));
                } else if w == wmin {
                    out.push((a, b));
                }
            }
        }
        self.height_of(wmin)
    }

    /// Merges slots `a` and `b` and applies the Lance–Williams update.
    pub(crate) fn merge(&mut self, a: usize, b: usize) -> Merge {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let (ni, nj) = (self.size[a] as f64, self.size[b] as f64);
        let dij = self.w(a, b);
        let height = self.height_of(dij);
        let method = self.method;
        for idx in 0..self.active.len() {
            let k = self.active[idx];
            if k == a || k == b {
                continue;
            }
            let (dki, dkj) = (self.w(k, a), self.w(k, b));
            let nk = self.size[k] as f64;
            let updated = match method {
                MethodId::Single => dki.min(dkj),
                MethodId::Complete => dki.max(dkj),
                MethodId::Average => (ni * dki + nj * dkj) / (ni + nj),
                MethodId::Weighted => 0.5 * (dki + dkj),
                MethodId::Centroid => {
                    let s = ni + nj;
                    (ni * dki + nj * dkj) / s - ni * nj * dij / (s * s)
                }
                MethodId::Median => 0.5 * (dki + dkj) - 0.25 * dij,
                MethodId::WardD | MethodId::WardD2 => {
                    ((ni + nk) * dki + (nj + nk) * dkj - nk * dij) / (ni + nj + nk)
                }
            };
            self.set(k, a, updated);
        }
        let merge = {
            let (ia, ib) = (self.cluster_id[a], self.cluster_id[b]);
            Merge {
                left: ia.min(ib),
                right: ia.max(ib),
                height,
                size: self.size[a] + self.size[b],
            }
        };
        self.size[a] += self.size[b];
        self.cluster_id[a] = self.next_id;
        self.next_id += 1;
        self.active.retain(|&s| s != b);
        merge
    }
}

/// Euclidean distances between the rows of a view.
pub fn euclidean_distances(v: &ViewMatrix) -> DistanceMatrix {
    let x = v.values();
    let n = x.nrows();
    let mut d = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        let xi = x.row(i);
        for j in (i + 1)..n {
            let s: f64 = xi
                .iter()
                .zip(x.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let e = s.sqrt();
            d[[i, j]] = e;
            d[[j, i]] = e;
        }
    }
    DistanceMatrix::new(v.sample_ids().to_vec(), d).expect("euclidean distances are valid")
}

/// Full agglomerative clustering of `d` under `method`.
pub fn linkage(d: &DistanceMatrix, method: MethodId) -> Result<Dendrogram> {
    let n = d.n();
    if n < 2 {
        return Err(Error::input("linkage needs at least 2 samples"));
    }
    if d.values().iter().any(|v| v.is_nan() || *v < 0.0) {
        return Err(Error::input("distances must be non-negative numbers"));
    }
    let mut agg = Agglomerator::new(d, method);
    let mut merges = Vec::with_capacity(n - 1);
    while agg.n_active() > 1 {
        let (a, b) = agg.nearest_pair().expect("two active clusters");
        merges.push(agg.merge(a, b));
    }
    Ok(Dendrogram {
        sample_ids: d.sample_ids().to_vec(),
        merges,
    })
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Flat partition with exactly `k` clusters: replays the first `n - k`
/// merges. Labels are numbered by first appearance in sample order.
pub fn cut(t: &Dendrogram, k: usize) -> Result<Labeling> {
    let n = t.n_leaves();
    if k == 0 || k > n {
        return Err(Error::input(format!("k = {k} outside 1..={n}")));
    }
    let mut parent: Vec<usize> = (0..n).collect();
    // representative leaf of every cluster id
    let mut rep: Vec<usize> = (0..n).collect();
    rep.reserve(n - 1);
    for m in &t.merges[..n - k] {
        let (ra, rb) = (
            find(&mut parent, rep[m.left]),
            find(&mut parent, rep[m.right]),
        );
        parent[rb] = ra;
        rep.push(ra);
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    Labeling::from_assignments(t.sample_ids.clone(), &roots)
}

/// `cut(linkage(d, method), k)`.
pub fn cluster(d: &DistanceMatrix, method: MethodId, k: usize) -> Result<Labeling> {
    if k == 0 || k > d.n() {
        return Err(Error::input(format!("k = {k} outside 1..={}", d.n())));
    }
    cut(&linkage(d, method)?, k)
}
