//! Data preparation: CSV ingestion, missing-value filtering, k-NN
//! imputation, variance-based feature selection and z-scoring.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::types::ViewMatrix;

/// k used for imputation when none is configured.
pub const DEFAULT_KNN: usize = 5;

/// A view as read from disk, possibly with missing entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RawViewMatrix {
    pub sample_ids: Vec<String>,
    pub feature_ids: Vec<String>,
    /// Row-major, `None` for missing.
    pub values: Array2<Option<f64>>,
}

impl RawViewMatrix {
    pub fn new(
        sample_ids: Vec<String>,
        feature_ids: Vec<String>,
        values: Array2<Option<f64>>,
    ) -> Result<Self> {
        if values.dim() != (sample_ids.len(), feature_ids.len()) {
            return Err(Error::input(format!(
                "shape {:?} does not match {} samples x {} features",
                values.dim(),
                sample_ids.len(),
                feature_ids.len()
            )));
        }
        unique(&sample_ids, "sample")?;
        unique(&feature_ids, "feature")?;
        Ok(Self {
            sample_ids,
            feature_ids,
            values,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn n_missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Converts a complete matrix into a `ViewMatrix`.
    pub fn into_view(self) -> Result<ViewMatrix> {
        if self.n_missing() > 0 {
            return Err(Error::input("matrix still has missing values"));
        }
        ViewMatrix::new(self.sample_ids, self.values.mapv(|v| v.unwrap_or(f64::NAN)))
    }
}

fn unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::input(format!("duplicate {what} id '{id}'")));
        }
    }
    Ok(())
}

fn parse_cell(cell: &str, row: usize) -> Result<Option<f64>> {
    let t = cell.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    t.parse::<f64>().map(Some).map_err(|_| Error::Parse {
        row,
        msg: format!("not a number: '{t}'"),
    })
}

/// Reads a comma-separated view. The first column holds sample ids; empty
/// cells and `NA` are missing. Without a header, features are named `f0..`.
pub fn read_csv<R: Read>(reader: R, has_header: bool) -> Result<RawViewMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut header: Option<Vec<String>> = None;
    let mut ids = Vec::new();
    let mut flat = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, rec) in rdr.records().enumerate() {
        let row = idx + 1;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            msg: e.to_string(),
        })?;
        if has_header && idx == 0 {
            header = Some(rec.iter().skip(1).map(|s| s.trim().to_string()).collect());
            width = Some(rec.len());
            continue;
        }
        if rec.len() == 1 && rec.get(0).is_some_and(|s| s.trim().is_empty()) {
            continue;
        }
        match width {
            None => width = Some(rec.len()),
            Some(w) if w != rec.len() => {
                return Err(Error::Parse {
                    row,
                    msg: format!("expected {w} fields, found {}", rec.len()),
                })
            }
            _ => {}
        }
        ids.push(rec.get(0).unwrap_or_default().trim().to_string());
        for cell in rec.iter().skip(1) {
            flat.push(parse_cell(cell, row)?);
        }
    }
    let width = width.ok_or(Error::Parse {
        row: 0,
        msg: "empty file".into(),
    })?;
    if ids.is_empty() {
        return Err(Error::Parse {
            row: 0,
            msg: "no data rows".into(),
        });
    }
    if width < 2 {
        return Err(Error::Parse {
            row: 1,
            msg: "need a sample id column and at least one feature".into(),
        });
    }
    let p = width - 1;
    let features = header.unwrap_or_else(|| (0..p).map(|j| format!("f{j}")).collect());
    let values =
        Array2::from_shape_vec((ids.len(), p), flat).map_err(|e| Error::input(e.to_string()))?;
    RawViewMatrix::new(ids, features, values)
}

pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<RawViewMatrix> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(std::io::BufReader::new(file), has_header)
}

/// Writes a complete view as CSV with a header row. Values use Rust's
/// shortest round-trip formatting.
pub fn write_view_csv<W: std::io::Write>(
    out: W,
    feature_ids: &[String],
    view: &ViewMatrix,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header = std::iter::once("sample_id".to_string()).chain(feature_ids.iter().cloned());
    w.write_record(header).map_err(csv_io)?;
    for (id, row) in view.sample_ids().iter().zip(view.values().rows()) {
        let rec = std::iter::once(id.clone()).chain(row.iter().map(|v| v.to_string()));
        w.write_record(rec).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Drops samples, then features, whose missing fraction strictly exceeds
/// `max_frac`. Feature fractions are computed after the row drop. The two
/// passes repeat until nothing changes, since dropping features can push a
/// retained sample over the threshold.
pub fn filter_missing(m: &RawViewMatrix, max_frac: f64) -> Result<RawViewMatrix> {
    if !(0.0..=1.0).contains(&max_frac) {
        return Err(Error::config(format!("max_frac {max_frac} outside [0,1]")));
    }
    let mut rows: Vec<usize> = (0..m.n_samples()).collect();
    let mut cols: Vec<usize> = (0..m.n_features()).collect();
    loop {
        let p = cols.len();
        let kept_rows: Vec<usize> = rows
            .iter()
            .copied()
            .filter(|&i| {
                let missing = cols.iter().filter(|&&j| m.values[[i, j]].is_none()).count();
                (missing as f64 / p as f64) <= max_frac
            })
            .collect();
        if kept_rows.is_empty() {
            return Err(Error::Degenerate(
                "every sample exceeds the missing-value threshold".into(),
            ));
        }
        let n = kept_rows.len();
        let kept_cols: Vec<usize> = cols
            .iter()
            .copied()
            .filter(|&j| {
                let missing = kept_rows
                    .iter()
                    .filter(|&&i| m.values[[i, j]].is_none())
                    .count();
                (missing as f64 / n as f64) <= max_frac
            })
            .collect();
        if kept_cols.is_empty() {
            return Err(Error::Degenerate(
                "every feature exceeds the missing-value threshold".into(),
            ));
        }
        let stable = kept_rows.len() == rows.len() && kept_cols.len() == cols.len();
        rows = kept_rows;
        cols = kept_cols;
        if stable {
            break;
        }
    }
    RawViewMatrix::new(
        rows.iter().map(|&i| m.sample_ids[i].clone()).collect(),
        cols.iter().map(|&j| m.feature_ids[j].clone()).collect(),
        m.values.select(Axis(0), &rows).select(Axis(1), &cols),
    )
}

/// Euclidean distance over coordinates observed in both rows; `None` if the
/// rows share none.
fn partial_distance(
    a: ndarray::ArrayView1<Option<f64>>,
    b: ndarray::ArrayView1<Option<f64>>,
) -> Option<f64> {
    let mut shared = 0usize;
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        if let (Some(x), Some(y)) = (x, y) {
            shared += 1;
            s += (x - y) * (x - y);
        }
    }
    (shared > 0).then(|| s.sqrt())
}

/// Fills every missing cell `(i, j)` with the mean of column `j` over the
/// `k` nearest rows observed at `j`. Rows sharing no observed coordinate
/// with row `i` rank after all others. Falls back to the column mean when
/// no row is observed at `j`.
pub fn knn_impute(m: &RawViewMatrix, k: usize) -> Result<ViewMatrix> {
    let n = m.n_samples();
    if k == 0 {
        return Err(Error::config("k for imputation must be positive"));
    }
    if n >= 2 && k >= n {
        return Err(Error::config(format!(
            "k = {k} must be below the sample count {n}"
        )));
    }
    if let Some(i) = (0..n).find(|&i| m.values.row(i).iter().all(Option::is_none)) {
        return Err(Error::input(format!(
            "sample '{}' has no observed values",
            m.sample_ids[i]
        )));
    }
    let col_means: Vec<Option<f64>> = m
        .values
        .columns()
        .into_iter()
        .map(|c| {
            let obs: Vec<f64> = c.iter().flatten().copied().collect();
            (!obs.is_empty()).then(|| obs.iter().sum::<f64>() / obs.len() as f64)
        })
        .collect();

    let mut out = m.values.mapv(|v| v.unwrap_or(f64::NAN));
    for i in 0..n {
        let row = m.values.row(i);
        if row.iter().all(Option::is_some) {
            continue;
        }
        // (distance, index) for every other row; unreachable rows last
        let mut ranked: Vec<(f64, usize)> = (0..n)
            .filter(|&r| r != i)
            .map(|r| {
                (
                    partial_distance(row, m.values.row(r)).unwrap_or(f64::INFINITY),
                    r,
                )
            })
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (j, cell) in row.iter().enumerate() {
            if cell.is_some() {
                continue;
            }
            let donors: Vec<f64> = ranked
                .iter()
                .filter_map(|&(_, r)| m.values[[r, j]])
                .take(k)
                .collect();
            out[[i, j]] = if donors.is_empty() {
                col_means[j].ok_or_else(|| {
                    Error::Degenerate(format!(
                        "feature '{}' has no observed values",
                        m.feature_ids[j]
                    ))
                })?
            } else {
                donors.iter().sum::<f64>() / donors.len() as f64
            };
        }
    }
    ViewMatrix::new(m.sample_ids.clone(), out)
}

/// Unbiased (n−1) sample variance of each column.
pub fn column_variances(x: &Array2<f64>) -> Vec<f64> {
    let n = x.nrows() as f64;
    x.columns()
        .into_iter()
        .map(|c| {
            if x.nrows() < 2 {
                return 0.0;
            }
            let mean = c.sum() / n;
            c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        })
        .collect()
}

/// Indices of the `n_keep` highest-variance columns, in original column order.
pub fn top_variance_columns(m: &ViewMatrix, n_keep: usize) -> Vec<usize> {
    let var = column_variances(m.values());
    let mut order: Vec<usize> = (0..var.len()).collect();
    // stable sort keeps the lower column index first on ties
    order.sort_by(|&a, &b| var[b].total_cmp(&var[a]));
    order.truncate(n_keep.min(var.len()));
    order.sort_unstable();
    order
}

/// Keeps the `min(n_keep, p)` features of largest sample variance.
pub fn top_variance_select(m: &ViewMatrix, n_keep: usize) -> Result<ViewMatrix> {
    if n_keep == 0 {
        return Err(Error::config("n_keep must be positive"));
    }
    let cols = top_variance_columns(m, n_keep);
    ViewMatrix::new(m.sample_ids().to_vec(), m.values().select(Axis(1), &cols))
}

/// Centres every column and scales it to unit (n−1) standard deviation.
/// Zero-variance columns are only centred.
pub fn zscore_normalize(m: &ViewMatrix) -> ViewMatrix {
    let x = m.values();
    let n = x.nrows() as f64;
    let var = column_variances(x);
    let mut out = x.clone();
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        let mean = col.sum() / n;
        let sd = var[j].sqrt();
        let scale = if sd > 0.0 { sd } else { 1.0 };
        col.mapv_inplace(|v| (v - mean) / scale);
    }
    ViewMatrix::new(m.sample_ids().to_vec(), out).expect("z-scoring keeps the view valid")
}

/// Settings for [`prepare_view`].
#[derive(Debug, Clone, PartialEq)]
pub struct PrepareOptions {
    pub max_missing: f64,
    pub knn: usize,
    pub top_variance: Option<usize>,
    pub zscore: bool,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        Self {
            max_missing: 0.2,
            knn: DEFAULT_KNN,
            top_variance: None,
            zscore: true,
        }
    }
}

/// Summary of what [`prepare_view`] removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrepareReport {
    pub rows_dropped: usize,
    pub columns_dropped_missing: usize,
    pub columns_dropped_variance: usize,
    pub cells_imputed: usize,
}

/// Filter → impute → select → normalise. Returns the view, the retained
/// feature ids and a report.
pub fn prepare_view(
    raw: &RawViewMatrix,
    opts: &PrepareOptions,
) -> Result<(ViewMatrix, Vec<String>, PrepareReport)> {
    let filtered = filter_missing(raw, opts.max_missing)?;
    let cells_imputed = filtered.n_missing();
    let knn = opts.knn.min(filtered.n_samples().saturating_sub(1)).max(1);
    let mut view = knn_impute(&filtered, knn)?;
    let mut features = filtered.feature_ids.clone();
    let mut columns_dropped_variance = 0;
    if let Some(keep) = opts.top_variance {
        let cols = top_variance_columns(&view, keep);
        columns_dropped_variance = features.len() - cols.len();
        features = cols.iter().map(|&j| features[j].clone()).collect();
        view = top_variance_select(&view, keep)?;
    }
    if opts.zscore {
        view = zscore_normalize(&view);
    }
    let report = PrepareReport {
        rows_dropped: raw.n_samples() - filtered.n_samples(),
        columns_dropped_missing: raw.n_features() - filtered.n_features(),
        columns_dropped_variance,
        cells_imputed,
    };
    Ok((view, features, report))
}
