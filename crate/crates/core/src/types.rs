//! Shared domain types: data views, pairwise matrices, labelings and linkage
//! method identifiers.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

fn check_unique(ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::input(format!("duplicate sample id '{id}'")));
        }
    }
    Ok(())
}

/// An n×p sample-by-feature data view without missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewMatrix {
    sample_ids: Vec<String>,
    values: Array2<f64>,
}

impl ViewMatrix {
    pub fn new(sample_ids: Vec<String>, values: Array2<f64>) -> Result<Self> {
        let (n, p) = values.dim();
        if n != sample_ids.len() {
            return Err(Error::input(format!(
                "{} sample ids for {} rows",
                sample_ids.len(),
                n
            )));
        }
        if n < 2 {
            return Err(Error::input("a view needs at least 2 samples"));
        }
        if p < 1 {
            return Err(Error::input("a view needs at least 1 feature"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("view contains missing or non-finite values"));
        }
        check_unique(&sample_ids)?;
        Ok(Self { sample_ids, values })
    }

    /// Builds a view with ids `"0".."n-1"` from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::input("ragged rows"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values =
            Array2::from_shape_vec((n, p), flat).map_err(|e| Error::input(e.to_string()))?;
        Self::new((0..n).map(|i| i.to_string()).collect(), values)
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    /// Restricts the view to the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let ids = rows.iter().map(|&r| self.sample_ids[r].clone()).collect();
        let values = self.values.select(ndarray::Axis(0), rows);
        Self::new(ids, values)
    }

    pub fn into_parts(self) -> (Vec<String>, Array2<f64>) {
        (self.sample_ids, self.values)
    }
}

fn check_square(ids: &[String], values: &Array2<f64>) -> Result<usize> {
    let (r, c) = values.dim();
    if r != c {
        return Err(Error::input(format!("matrix is {r}x{c}, expected square")));
    }
    if r != ids.len() {
        return Err(Error::input(format!(
            "{} sample ids for {r} rows",
            ids.len()
        )));
    }
    check_unique(ids)?;
    for i in 0..r {
        for j in (i + 1)..r {
            let (a, b) = (values[[i, j]], values[[j, i]]);
            if a.is_nan() || b.is_nan() {
                return Err(Error::input(format!("NaN entry at ({i}, {j})")));
            }
            if (a - b).abs() > SYMMETRY_TOL {
                return Err(Error::input(format!("matrix not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(r)
}

/// Symmetric n×n pairwise dissimilarities with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    sample_ids: Vec<String>,
    values: Array2<f64>,
}

impl DistanceMatrix {
    pub fn new(sample_ids: Vec<String>, values: Array2<f64>) -> Result<Self> {
        let n = check_square(&sample_ids, &values)?;
        for i in 0..n {
            if values[[i, i]] != 0.0 {
                return Err(Error::input(format!("non-zero diagonal at {i}")));
            }
        }
        if let Some(v) = values.iter().find(|v| **v < 0.0 || !v.is_finite()) {
            return Err(Error::input(format!("invalid distance {v}")));
        }
        Ok(Self { sample_ids, values })
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    /// Sub-matrix over `rows` (in that order).
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let ids = rows.iter().map(|&r| self.sample_ids[r].clone()).collect();
        let values = Array2::from_shape_fn((rows.len(), rows.len()), |(i, j)| {
            self.values[[rows[i], rows[j]]]
        });
        Self::new(ids, values)
    }

    /// Multiplies every entry by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.sample_ids.clone(), self.values.mapv(|v| v * c))
    }
}

/// Symmetric n×n pairwise similarities in [0,1] with a unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    sample_ids: Vec<String>,
    values: Array2<f64>,
}

impl AffinityMatrix {
    pub fn new(sample_ids: Vec<String>, values: Array2<f64>) -> Result<Self> {
        let n = check_square(&sample_ids, &values)?;
        for i in 0..n {
            if values[[i, i]] != 1.0 {
                return Err(Error::input(format!("diagonal entry {i} is not 1")));
            }
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::input(format!("affinity {v} outside [0,1]")));
        }
        Ok(Self { sample_ids, values })
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }
}

/// `d = 1 - a`, the dissimilarity handed to linkage.
pub fn affinity_to_distance(a: &AffinityMatrix) -> DistanceMatrix {
    let values = a.values.mapv(|v| 1.0 - v);
    // 1 - 1 is exactly 0 and entries stay in [0,1], so the invariants carry over
    DistanceMatrix {
        sample_ids: a.sample_ids.clone(),
        values,
    }
}

/// A flat partition: labels are the contiguous range `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling {
    sample_ids: Vec<String>,
    labels: Vec<usize>,
    k: usize,
}

impl Labeling {
    /// Validates that `labels` already use every value in `0..k`.
    pub fn new(sample_ids: Vec<String>, labels: Vec<usize>) -> Result<Self> {
        if sample_ids.len() != labels.len() {
            return Err(Error::input(format!(
                "{} labels for {} samples",
                labels.len(),
                sample_ids.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::input("empty labeling"));
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut used = vec![false; k];
        for &l in &labels {
            used[l] = true;
        }
        if used.iter().any(|u| !u) {
            return Err(Error::input("labels are not a contiguous range 0..k"));
        }
        check_unique(&sample_ids)?;
        Ok(Self {
            sample_ids,
            labels,
            k,
        })
    }

    /// Renumbers arbitrary cluster tags to `0..k` in order of first appearance.
    pub fn from_assignments<T: Eq + std::hash::Hash + Clone>(
        sample_ids: Vec<String>,
        tags: &[T],
    ) -> Result<Self> {
        let mut map = std::collections::HashMap::new();
        let labels = tags
            .iter()
            .map(|t| {
                let next = map.len();
                *map.entry(t.clone()).or_insert(next)
            })
            .collect();
        Self::new(sample_ids, labels)
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Restriction to `rows`, renumbered by first appearance.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let ids = rows.iter().map(|&r| self.sample_ids[r].clone()).collect();
        let tags: Vec<usize> = rows.iter().map(|&r| self.labels[r]).collect();
        Self::from_assignments(ids, &tags)
    }
}

/// The eight admissible agglomerative linkage methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    Single,
    Complete,
    Average,
    Weighted,
    Centroid,
    Median,
    WardD,
    WardD2,
}

impl MethodId {
    pub const ALL: [MethodId; 8] = [
        MethodId::Single,
        MethodId::Complete,
        MethodId::Average,
        MethodId::Weighted,
        MethodId::Centroid,
        MethodId::Median,
        MethodId::WardD,
        MethodId::WardD2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::Single => "single",
            MethodId::Complete => "complete",
            MethodId::Average => "average",
            MethodId::Weighted => "weighted",
            MethodId::Centroid => "centroid",
            MethodId::Median => "median",
            MethodId::WardD => "ward_d",
            MethodId::WardD2 => "ward_d2",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Methods whose recurrence runs on squared distances.
    pub fn uses_squared(self) -> bool {
        matches!(
            self,
            MethodId::Centroid | MethodId::Median | MethodId::WardD2
        )
    }

    /// Methods that never produce height inversions.
    pub fn is_monotone(self) -> bool {
        !matches!(self, MethodId::Centroid | MethodId::Median)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let m = match s.trim().to_ascii_lowercase().as_str() {
            "single" => MethodId::Single,
            "complete" => MethodId::Complete,
            "average" | "upgma" => MethodId::Average,
            "weighted" | "wpgma" | "mcquitty" => MethodId::Weighted,
            "centroid" | "upgmc" => MethodId::Centroid,
            "median" | "wpgmc" => MethodId::Median,
            "ward_d" | "ward.d" | "ward" => MethodId::WardD,
            "ward_d2" | "ward.d2" => MethodId::WardD2,
            other => return Err(Error::config(format!("unknown linkage method '{other}'"))),
        };
        Ok(m)
    }
}
