//! Evidence-accumulation consensus: co-association of member labelings,
//! then an average-linkage cut.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::hclust::cluster;
use crate::types::{affinity_to_distance, AffinityMatrix, Labeling, MethodId};

/// Labelings of the same samples.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelingSet {
    members: Vec<Labeling>,
}

impl LabelingSet {
    pub fn new(members: Vec<Labeling>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::input("a labeling set needs at least one member"))?;
        if members[1..]
            .iter()
            .any(|m| m.sample_ids() != first.sample_ids())
        {
            return Err(Error::input("members do not share the same sample ids"));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Labeling] {
        &self.members
    }

    pub fn n(&self) -> usize {
        self.members[0].len()
    }
}

/// Fraction of members that put each pair of samples in the same cluster.
pub fn coassociation(ls: &LabelingSet) -> AffinityMatrix {
    let n = ls.n();
    let mut counts = Array2::<u32>::zeros((n, n));
    for m in ls.members() {
        let l = m.labels();
        for i in 0..n {
            for j in (i + 1)..n {
                if l[i] == l[j] {
                    counts[[i, j]] += 1;
                }
            }
        }
    }
    let total = ls.members().len() as f64;
    let mut a = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        a[[i, i]] = 1.0;
        for j in (i + 1)..n {
            let v = f64::from(counts[[i, j]]) / total;
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
    AffinityMatrix::new(ls.members()[0].sample_ids().to_vec(), a)
        .expect("co-association is a valid affinity")
}

/// Combines member labelings into one labeling with `k` clusters.
pub fn consensus(ls: &LabelingSet, k: usize) -> Result<Labeling> {
    let n = ls.n();
    if k == 0 || k > n {
        return Err(Error::input(format!("k = {k} outside 1..={n}")));
    }
    cluster(
        &affinity_to_distance(&coassociation(ls)),
        MethodId::Average,
        k,
    )
}
