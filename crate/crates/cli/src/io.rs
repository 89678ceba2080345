//! File formats used by the commands.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mvhc_core::preprocess::{load_csv, prepare_view, write_view_csv};
use mvhc_core::{AffinityMatrix, Error, Labeling, ViewMatrix};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    let row = e.position().map_or(0, |p| p.line() as usize);
    CliError::Input(Error::Parse {
        row,
        msg: format!("{}: {e}", path.display()),
    })
}

fn open(path: &Path) -> CliResult<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))
}

fn output_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.display().to_string(),
        source,
    }
}

/// Reads `sample_id,label` rows in file order. Labels may be any strings.
pub fn read_labels(path: &Path) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, rec) in open(path)?.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() < 2 {
            return Err(Error::Parse {
                row: i + 2,
                msg: "expected sample_id,label".into(),
            }
            .into());
        }
        if !seen.insert(rec[0].to_string()) {
            return Err(Error::Input(format!(
                "duplicate sample id '{}' in {}",
                &rec[0],
                path.display()
            ))
            .into());
        }
        out.push((rec[0].to_string(), rec[1].to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalEntry {
    pub time: f64,
    pub event: bool,
}

/// Reads `sample_id,time,event` rows; events are `1`/`0` or `true`/`false`.
pub fn read_survival(path: &Path) -> CliResult<HashMap<String, SurvivalEntry>> {
    let mut out = HashMap::new();
    for (i, rec) in open(path)?.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let row = i + 2;
        if rec.len() < 3 {
            return Err(Error::Parse {
                row,
                msg: "expected sample_id,time,event".into(),
            }
            .into());
        }
        let time: f64 = rec[1].parse().map_err(|_| Error::Parse {
            row,
            msg: format!("bad time '{}'", &rec[1]),
        })?;
        let event = match rec[2].to_ascii_lowercase().as_str() {
            "1" | "true" => true,
            "0" | "false" => false,
            other => {
                return Err(Error::Parse {
                    row,
                    msg: format!("bad event '{other}'"),
                }
                .into())
            }
        };
        out.insert(rec[0].to_string(), SurvivalEntry { time, event });
    }
    Ok(out)
}

/// Looks up every id, failing on the first one that is absent.
pub fn lookup<'a, T>(
    map: &'a HashMap<String, T>,
    ids: &[String],
    what: &str,
) -> CliResult<Vec<&'a T>> {
    ids.iter()
        .map(|id| {
            map.get(id)
                .ok_or_else(|| Error::Input(format!("sample '{id}' missing from {what}")).into())
        })
        .collect()
}

/// Ground truth for `ids` as a labeling.
pub fn truth_labeling(truth: &HashMap<String, String>, ids: &[String]) -> CliResult<Labeling> {
    let tags: Vec<String> = lookup(truth, ids, "truth labels")?
        .into_iter()
        .cloned()
        .collect();
    Ok(Labeling::from_assignments(ids.to_vec(), &tags)?)
}

/// Loads every view, optionally preprocesses it, and aligns all views to
/// the sample order of the first. With preprocessing, samples dropped from
/// any view are dropped from all of them.
pub fn load_views(cfg: &RunConfig) -> CliResult<Vec<ViewMatrix>> {
    let opts = cfg.prepare_options();
    let mut views = Vec::with_capacity(cfg.views.len());
    for p in &cfg.views {
        let raw = load_csv(p, cfg.header).map_err(|e| match e {
            Error::Io(io) => Error::Input(format!("cannot read {}: {io}", p.display())),
            other => other,
        })?;
        let view = if cfg.preprocess {
            let (v, _, report) = prepare_view(&raw, &opts)?;
            log::info!("{}: {report:?}", p.display());
            v
        } else if raw.n_missing() > 0 {
            return Err(Error::Input(format!(
                "{} has missing values; enable preprocess",
                p.display()
            ))
            .into());
        } else {
            raw.into_view()?
        };
        views.push(view);
    }
    align(views, cfg.preprocess)
}

fn align(views: Vec<ViewMatrix>, intersect: bool) -> CliResult<Vec<ViewMatrix>> {
    let index: Vec<HashMap<&str, usize>> = views
        .iter()
        .map(|v| {
            v.sample_ids()
                .iter()
                .enumerate()
                .map(|(i, s)| (s.as_str(), i))
                .collect()
        })
        .collect();
    let mut keep = Vec::new();
    for id in views[0].sample_ids() {
        let present = index.iter().all(|m| m.contains_key(id.as_str()));
        if present {
            keep.push(id.as_str());
        } else if !intersect {
            return Err(Error::Input(format!("sample '{id}' is missing from some views")).into());
        }
    }
    if !intersect && views.iter().any(|v| v.n_samples() != keep.len()) {
        return Err(Error::Input("views cover different samples".into()).into());
    }
    if keep.len() < 2 {
        return Err(Error::Degenerate("fewer than two samples shared by all views".into()).into());
    }
    views
        .iter()
        .zip(&index)
        .map(|(v, m)| {
            let rows: Vec<usize> = keep.iter().map(|id| m[id]).collect();
            Ok(v.select_rows(&rows)?)
        })
        .collect()
}

pub fn write_labels(path: &Path, labels: &Labeling) -> CliResult<()> {
    let err = output_err(path);
    let mut w = BufWriter::new(File::create(path).map_err(&err)?);
    writeln!(w, "sample_id,label").map_err(&err)?;
    for (id, l) in labels.sample_ids().iter().zip(labels.labels()) {
        writeln!(w, "{id},{l}").map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn write_affinity(path: &Path, a: &AffinityMatrix) -> CliResult<()> {
    let err = output_err(path);
    let file = File::create(path).map_err(&err)?;
    let view = ViewMatrix::new(a.sample_ids().to_vec(), a.values().clone())?;
    write_view_csv(BufWriter::new(file), a.sample_ids(), &view).map_err(|e| match e {
        Error::Io(io) => err(io),
        other => CliError::Input(other),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let err = output_err(path);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| err(e.into()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(err)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(output_err(path))
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(output_err(path))
}
