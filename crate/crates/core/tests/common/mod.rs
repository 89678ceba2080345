#![allow(dead_code)]

use std::path::PathBuf;

use mvhc_core::preprocess::{load_csv, zscore_normalize};
use mvhc_core::{Labeling, ViewMatrix};
use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i:03}")).collect()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |_| StandardNormal.sample(rng))
}

/// `k` well separated spherical clusters of `per` points each, in `p`
/// dimensions. Centres sit on scaled coordinate axes.
pub fn planted(
    rng: &mut ChaCha8Rng,
    k: usize,
    per: usize,
    p: usize,
    sep: f64,
) -> (ViewMatrix, Vec<usize>) {
    let n = k * per;
    let mut x = gaussian_matrix(rng, n, p);
    let mut truth = Vec::with_capacity(n);
    for i in 0..n {
        let c = i / per;
        truth.push(c);
        x[[i, c % p]] += sep * (1 + c / p) as f64;
    }
    (ViewMatrix::new(ids(n), x).unwrap(), truth)
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

pub fn labeling(labels: &[usize]) -> Labeling {
    Labeling::from_assignments(ids(labels.len()), labels).unwrap()
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/iris")
}

/// Z-scored IRIS features and species labels.
pub fn iris() -> (ViewMatrix, Labeling) {
    let raw = load_csv(data_dir().join("iris.csv"), true).unwrap();
    let view = zscore_normalize(&raw.into_view().unwrap());
    let mut rdr = csv::Reader::from_path(data_dir().join("iris_labels.csv")).unwrap();
    let labels: Vec<usize> = rdr
        .records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect();
    let truth = Labeling::new(view.sample_ids().to_vec(), labels).unwrap();
    (view, truth)
}
