//! The four subcommands. Each returns its report; `main` maps errors to
//! exit codes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mvhc_core::hclust::euclidean_distances;
use mvhc_core::metrics::{ari, logrank_test, nmi, silhouette, SurvivalRecord};
use mvhc_core::pipeline::{
    concatenated_consensus, consensus_baseline, parea_hc1, parea_hc1_opt, parea_hc2, parea_hc2_opt,
    PipelineResult,
};
use mvhc_core::preprocess::{
    load_csv, prepare_view, write_view_csv, PrepareOptions, PrepareReport,
};
use mvhc_core::seed::{derive_seed, derive_seed_str, rng};
use mvhc_core::{par, Labeling, ViewMatrix};
use rand::seq::index::sample;
use serde::Serialize;

use crate::config::{MethodSpec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io;

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    /// Chosen k (`cluster`) or the fixed k requested (`benchmark`, `null` for auto).
    pub k: Option<usize>,
    /// Linkages behind the labels (`cluster`) or the workflows compared (`benchmark`).
    pub methods: Vec<String>,
    pub fitness: Option<f64>,
    pub seed: u64,
    pub runtime_ms: Option<u64>,
    pub per_repeat: Vec<RepeatRow>,
    pub workflow: Option<String>,
    pub n_samples: usize,
    pub summary: Vec<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatRow {
    pub repeat: usize,
    pub method: String,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub linkages: String,
    pub fitness: Option<f64>,
    pub ari: Option<f64>,
    pub nmi: Option<f64>,
    pub logrank_chi2: Option<f64>,
    pub logrank_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub repeats: usize,
    pub median_fitness: Option<f64>,
    pub median_ari: Option<f64>,
    pub median_nmi: Option<f64>,
    pub median_logrank_p: Option<f64>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Median of the finite values, averaging the middle pair.
pub fn median(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let mut v: Vec<f64> = values
        .into_iter()
        .flatten()
        .filter(|x| x.is_finite())
        .collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}

/// Runs one workflow on aligned views.
pub fn run_method(
    views: &[ViewMatrix],
    spec: MethodSpec,
    cfg: &RunConfig,
    seed: u64,
) -> CliResult<PipelineResult> {
    let k = cfg.k_choice();
    let fusion = cfg.fusion_config(seed);
    let ga = cfg.ga_params(derive_seed_str(seed, "ga"));
    let r = match spec {
        MethodSpec::Parea1 => match (cfg.hc1, cfg.hc2) {
            (Some(a), Some(b)) => parea_hc1(views, a, b, k, &fusion),
            _ => parea_hc1_opt(views, k, &fusion, &ga),
        },
        MethodSpec::Parea2 => match &cfg.view_methods {
            Some(m) => parea_hc2(views, m, k, &fusion),
            None => parea_hc2_opt(views, k, &fusion, &ga),
        },
        MethodSpec::ConsensusBaseline => consensus_baseline(views, k),
        MethodSpec::Single(m) => concatenated_consensus(views, &[m], k),
    };
    r.map_err(CliError::Pipeline)
}

fn start(cfg: &RunConfig, command: &str) -> CliResult<()> {
    cfg.validate()?;
    log::info!("{command} with resolved configuration:\n{}", cfg.resolved());
    io::create_dir(&cfg.output)
}

fn elapsed(cfg: &RunConfig, t0: Instant) -> Option<u64> {
    cfg.record_runtime.then(|| t0.elapsed().as_millis() as u64)
}

/// Clusters the configured views and writes `labels.csv`,
/// `fused_affinity.csv`, `report.json` and `config.resolved`.
pub fn cmd_cluster(cfg: &RunConfig) -> CliResult<Report> {
    let spec = match cfg.methods.as_slice() {
        [one] => *one,
        _ => return Err(CliError::config("cluster takes exactly one method")),
    };
    start(cfg, "cluster")?;
    let t0 = Instant::now();
    let views = io::load_views(cfg)?;
    let result = run_method(&views, spec, cfg, cfg.seed)?;
    let report = Report {
        command: "cluster".into(),
        k: Some(result.k),
        methods: result
            .methods
            .genes()
            .iter()
            .map(|m| m.to_string())
            .collect(),
        fitness: finite(result.fitness),
        seed: cfg.seed,
        runtime_ms: elapsed(cfg, t0),
        per_repeat: Vec::new(),
        workflow: Some(spec.to_string()),
        n_samples: result.labels.len(),
        summary: Vec::new(),
    };
    io::write_labels(&cfg.output.join("labels.csv"), &result.labels)?;
    io::write_affinity(&cfg.output.join("fused_affinity.csv"), &result.fused)?;
    io::write_json(&cfg.output.join("report.json"), &report)?;
    io::write_text(&cfg.output.join("config.resolved"), &cfg.resolved())?;
    Ok(report)
}

struct Outcomes {
    truth: Option<HashMap<String, String>>,
    survival: Option<HashMap<String, io::SurvivalEntry>>,
}

#[derive(Default)]
struct Scores {
    ari: Option<f64>,
    nmi: Option<f64>,
    chi2: Option<f64>,
    p: Option<f64>,
}

impl Outcomes {
    fn score(&self, labels: &Labeling) -> CliResult<Scores> {
        let mut out = Scores::default();
        if let Some(t) = &self.truth {
            let truth = io::truth_labeling(t, labels.sample_ids())?;
            out.ari = Some(ari(labels, &truth).map_err(CliError::Pipeline)?);
            out.nmi = Some(nmi(labels, &truth).map_err(CliError::Pipeline)?);
        }
        if let Some(s) = &self.survival {
            let records = survival_records(s, labels)?;
            let lr = logrank_test(&records).map_err(CliError::Pipeline)?;
            out.chi2 = finite(lr.chi2);
            out.p = finite(lr.p);
        }
        Ok(out)
    }
}

fn survival_records(
    s: &HashMap<String, io::SurvivalEntry>,
    labels: &Labeling,
) -> CliResult<Vec<SurvivalRecord>> {
    let entries = io::lookup(s, labels.sample_ids(), "survival table")?;
    Ok(entries
        .iter()
        .zip(labels.labels())
        .map(|(e, &group)| SurvivalRecord {
            time: e.time,
            event: e.event,
            group,
        })
        .collect())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn repeat_csv(rows: &[RepeatRow]) -> String {
    let mut out =
        String::from("repeat,method,seed,n,k,linkages,fitness,ari,nmi,logrank_chi2,logrank_p\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},\"{}\",{},{},{},{},{}",
            r.repeat,
            r.method,
            r.seed,
            r.n,
            r.k,
            r.linkages,
            fmt_opt(r.fitness),
            fmt_opt(r.ari),
            fmt_opt(r.nmi),
            fmt_opt(r.logrank_chi2),
            fmt_opt(r.logrank_p)
        );
    }
    out
}

fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out =
        String::from("method,repeats,median_fitness,median_ari,median_nmi,median_logrank_p\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.method,
            r.repeats,
            fmt_opt(r.median_fitness),
            fmt_opt(r.median_ari),
            fmt_opt(r.median_nmi),
            fmt_opt(r.median_logrank_p)
        );
    }
    out
}

/// Sorted row indices of the subsample used by repeat `r`.
pub fn subsample_rows(seed: u64, r: usize, n: usize, m: usize) -> Vec<usize> {
    let mut rows = sample(&mut rng(derive_seed(seed, r as u64)), n, m).into_vec();
    rows.sort_unstable();
    rows
}

/// Repeated subsampling benchmark. Each repeat draws `subsample` samples
/// without replacement, runs every configured workflow on them and scores
/// the labels against the truth and/or survival table. Writes
/// `per_repeat.csv`, `summary.csv`, `report.json` and `config.resolved`.
pub fn cmd_benchmark(cfg: &RunConfig) -> CliResult<Report> {
    if cfg.truth.is_none() && cfg.survival.is_none() {
        return Err(CliError::config("benchmark needs a truth or survival file"));
    }
    start(cfg, "benchmark")?;
    let t0 = Instant::now();
    let outcomes = Outcomes {
        truth: cfg
            .truth
            .as_deref()
            .map(|p| io::read_labels(p).map(|v| v.into_iter().collect()))
            .transpose()?,
        survival: cfg.survival.as_deref().map(io::read_survival).transpose()?,
    };
    let views = io::load_views(cfg)?;
    let n = views[0].n_samples();
    if cfg.subsample > n {
        return Err(CliError::config(format!(
            "subsample {} exceeds the {n} available samples",
            cfg.subsample
        )));
    }
    let per_repeat = par::map_range(cfg.exec(), cfg.repeats, |r| -> CliResult<Vec<RepeatRow>> {
        let seed = derive_seed(cfg.seed, r as u64);
        let rows = subsample_rows(cfg.seed, r, n, cfg.subsample);
        let sub = views
            .iter()
            .map(|v| v.select_rows(&rows))
            .collect::<mvhc_core::Result<Vec<_>>>()?;
        let mut out = Vec::with_capacity(cfg.methods.len());
        for &spec in &cfg.methods {
            let res = run_method(&sub, spec, cfg, seed)?;
            let scores = outcomes.score(&res.labels)?;
            out.push(RepeatRow {
                repeat: r,
                method: spec.to_string(),
                seed,
                n: rows.len(),
                k: res.k,
                linkages: res.methods.to_string(),
                fitness: finite(res.fitness),
                ari: scores.ari,
                nmi: scores.nmi,
                logrank_chi2: scores.chi2,
                logrank_p: scores.p,
            });
        }
        log::debug!("repeat {r} done");
        Ok(out)
    });
    let per_repeat: Vec<RepeatRow> = per_repeat
        .into_iter()
        .collect::<CliResult<Vec<_>>>()?
        .concat();
    let summary: Vec<SummaryRow> = cfg
        .methods
        .iter()
        .map(|spec| {
            let name = spec.to_string();
            let rows: Vec<&RepeatRow> = per_repeat.iter().filter(|r| r.method == name).collect();
            SummaryRow {
                repeats: rows.len(),
                median_fitness: median(rows.iter().map(|r| r.fitness)),
                median_ari: median(rows.iter().map(|r| r.ari)),
                median_nmi: median(rows.iter().map(|r| r.nmi)),
                median_logrank_p: median(rows.iter().map(|r| r.logrank_p)),
                method: name,
            }
        })
        .collect();
    let report = Report {
        command: "benchmark".into(),
        k: cfg.k,
        methods: cfg.methods.iter().map(|m| m.to_string()).collect(),
        fitness: None,
        seed: cfg.seed,
        runtime_ms: elapsed(cfg, t0),
        per_repeat,
        workflow: None,
        n_samples: n,
        summary,
    };
    io::write_text(
        &cfg.output.join("per_repeat.csv"),
        &repeat_csv(&report.per_repeat),
    )?;
    io::write_text(
        &cfg.output.join("summary.csv"),
        &summary_csv(&report.summary),
    )?;
    io::write_json(&cfg.output.join("report.json"), &report)?;
    io::write_text(&cfg.output.join("config.resolved"), &cfg.resolved())?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct PreprocessArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    pub header: bool,
    pub options: PrepareOptions,
}

/// Filters, imputes, selects and normalises one view.
pub fn cmd_preprocess(args: &PreprocessArgs) -> CliResult<PrepareReport> {
    let raw = load_csv(&args.input, args.header).map_err(|e| match e {
        mvhc_core::Error::Io(io) => {
            mvhc_core::Error::Input(format!("cannot read {}: {io}", args.input.display()))
        }
        other => other,
    })?;
    let (view, features, report) = prepare_view(&raw, &args.options)?;
    let file = std::fs::File::create(&args.output).map_err(|source| CliError::Output {
        path: args.output.display().to_string(),
        source,
    })?;
    write_view_csv(std::io::BufWriter::new(file), &features, &view).map_err(|e| match e {
        mvhc_core::Error::Io(source) => CliError::Output {
            path: args.output.display().to_string(),
            source,
        },
        other => CliError::Input(other),
    })?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct MetricsArgs {
    pub labels: PathBuf,
    pub truth: Option<PathBuf>,
    pub survival: Option<PathBuf>,
    /// View for the silhouette (Euclidean distances).
    pub view: Option<PathBuf>,
    pub header: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub n: usize,
    pub k: usize,
    pub ari: Option<f64>,
    pub nmi: Option<f64>,
    pub silhouette: Option<f64>,
    pub logrank_chi2: Option<f64>,
    pub logrank_p: Option<f64>,
    pub logrank_df: Option<usize>,
}

/// Scores a labeling against whichever references are given.
pub fn cmd_metrics(args: &MetricsArgs) -> CliResult<MetricsReport> {
    let rows = io::read_labels(&args.labels)?;
    let (ids, tags): (Vec<String>, Vec<String>) = rows.into_iter().unzip();
    let labels = Labeling::from_assignments(ids.clone(), &tags)?;
    let mut report = MetricsReport {
        n: labels.len(),
        k: labels.k(),
        ari: None,
        nmi: None,
        silhouette: None,
        logrank_chi2: None,
        logrank_p: None,
        logrank_df: None,
    };
    if let Some(p) = &args.truth {
        let truth: HashMap<String, String> = io::read_labels(p)?.into_iter().collect();
        let t = io::truth_labeling(&truth, &ids)?;
        report.ari = Some(ari(&labels, &t)?);
        report.nmi = Some(nmi(&labels, &t)?);
    }
    if let Some(p) = &args.survival {
        let lr = logrank_test(&survival_records(&io::read_survival(p)?, &labels)?)?;
        report.logrank_chi2 = Some(lr.chi2);
        report.logrank_p = Some(lr.p);
        report.logrank_df = Some(lr.df);
    }
    if let Some(p) = &args.view {
        let view = load_csv(p, args.header)?.into_view()?;
        let index: HashMap<&str, usize> = view
            .sample_ids()
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let rows = ids
            .iter()
            .map(|id| {
                index.get(id.as_str()).copied().ok_or_else(|| {
                    mvhc_core::Error::Input(format!("sample '{id}' missing from {}", p.display()))
                })
            })
            .collect::<mvhc_core::Result<Vec<_>>>()?;
        let d = euclidean_distances(&view.select_rows(&rows)?);
        report.silhouette = Some(silhouette(&d, &labels)?);
    }
    Ok(report)
}

/// Writes a metrics report as pretty JSON, or returns it as text when no
/// path is given.
pub fn metrics_json(report: &MetricsReport, out: Option<&Path>) -> CliResult<String> {
    match out {
        Some(p) => io::write_json(p, report).map(|_| String::new()),
        None => Ok(serde_json::to_string_pretty(report).expect("metrics report serialises") + "\n"),
    }
}
