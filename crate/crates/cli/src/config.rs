//! Run configuration: a flat `key = value` file, overridable key by key.
//!
//! Lines starting with `#` and blank lines are ignored. Relative paths in a
//! file resolve against the file's directory; paths given as overrides
//! resolve against the working directory.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mvhc_core::fusion::FusionConfig;
use mvhc_core::optimizer::GaParams;
use mvhc_core::pipeline::{KChoice, DEFAULT_K_MAX};
use mvhc_core::preprocess::PrepareOptions;
use mvhc_core::{Execution, MethodId};

use crate::error::{CliError, CliResult};

/// Which workflow produces the labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSpec {
    Parea1,
    Parea2,
    ConsensusBaseline,
    /// One linkage on the concatenated views.
    Single(MethodId),
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSpec::Parea1 => f.write_str("parea1"),
            MethodSpec::Parea2 => f.write_str("parea2"),
            MethodSpec::ConsensusBaseline => f.write_str("consensus-baseline"),
            MethodSpec::Single(m) => write!(f, "single:{m}"),
        }
    }
}

impl FromStr for MethodSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim() {
            "parea1" => Ok(MethodSpec::Parea1),
            "parea2" => Ok(MethodSpec::Parea2),
            "consensus-baseline" => Ok(MethodSpec::ConsensusBaseline),
            other => match other.strip_prefix("single:") {
                Some(m) => m
                    .parse::<MethodId>()
                    .map(MethodSpec::Single)
                    .map_err(|e| CliError::config(e.to_string())),
                None => Err(CliError::config(format!(
                    "unknown method '{other}' (expected parea1, parea2, consensus-baseline or single:<linkage>)"
                ))),
            },
        }
    }
}

/// Parses a comma-separated method list; `single:*` expands to all eight
/// linkages.
pub fn parse_method_list(s: &str) -> CliResult<Vec<MethodSpec>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if item == "single:*" {
            out.extend(MethodId::ALL.iter().map(|&m| MethodSpec::Single(m)));
        } else {
            out.push(item.parse()?);
        }
    }
    if out.is_empty() {
        return Err(CliError::config("method list is empty"));
    }
    Ok(out)
}

fn parse_linkages(s: &str) -> CliResult<Vec<MethodId>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<MethodId>()
                .map_err(|e| CliError::config(e.to_string()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub views: Vec<PathBuf>,
    /// Whether view CSVs start with a header row.
    pub header: bool,
    pub methods: Vec<MethodSpec>,
    /// Fixed pair for `parea1`; searched when unset.
    pub hc1: Option<MethodId>,
    pub hc2: Option<MethodId>,
    /// Fixed per-view linkages for `parea2`; searched when unset.
    pub view_methods: Option<Vec<MethodId>>,
    /// `None` selects k by silhouette.
    pub k: Option<usize>,
    pub k_max: usize,
    pub iterations: usize,
    pub inner_linkage: MethodId,
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub mutation_rate: f64,
    pub elitism: usize,
    pub seed: u64,
    /// Ground-truth labels (`sample_id,label`).
    pub truth: Option<PathBuf>,
    /// Survival table (`sample_id,time,event`).
    pub survival: Option<PathBuf>,
    pub output: PathBuf,
    /// Run filtering/imputation/selection/z-scoring on every view first.
    pub preprocess: bool,
    pub max_missing: f64,
    pub knn: usize,
    pub top_variance: Option<usize>,
    pub zscore: bool,
    pub subsample: usize,
    pub repeats: usize,
    pub parallel: bool,
    /// Wall-clock time makes reports differ between runs, so it is opt-in.
    pub record_runtime: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let prep = PrepareOptions::default();
        let ga = GaParams::default();
        let fusion = FusionConfig::default();
        Self {
            views: Vec::new(),
            header: true,
            methods: vec![MethodSpec::Parea1],
            hc1: None,
            hc2: None,
            view_methods: None,
            k: None,
            k_max: DEFAULT_K_MAX,
            iterations: fusion.iterations,
            inner_linkage: fusion.inner_linkage,
            population: ga.population,
            generations: ga.generations,
            tournament: ga.tournament,
            mutation_rate: ga.mutation_rate,
            elitism: ga.elitism,
            seed: 0,
            truth: None,
            survival: None,
            output: PathBuf::from("out"),
            preprocess: false,
            max_missing: prep.max_missing,
            knn: prep.knn,
            top_variance: prep.top_variance,
            zscore: prep.zscore,
            subsample: 100,
            repeats: 50,
            parallel: true,
            record_runtime: false,
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse()
        .map_err(|_| CliError::config(format!("invalid value for '{key}': '{v}'")))
}

fn flag(key: &str, v: &str) -> CliResult<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::config(format!(
            "invalid boolean for '{key}': '{v}'"
        ))),
    }
}

fn optional(v: &str) -> Option<&str> {
    match v {
        "" | "none" => None,
        s => Some(s),
    }
}

fn path(base: &Path, v: &str) -> PathBuf {
    let p = PathBuf::from(v);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

/// Splits config text into `(line, key, value)` triples.
pub fn parse_pairs(text: &str) -> CliResult<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected 'key = value'", i + 1)))?;
        let key = k.trim().to_string();
        if !seen.insert(key.clone()) {
            return Err(CliError::config(format!(
                "line {}: duplicate key '{key}'",
                i + 1
            )));
        }
        out.push((i + 1, key, v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn from_text(text: &str, base: &Path) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (line, key, value) in parse_pairs(text)? {
            cfg.set(&key, &value, base).map_err(|e| match e {
                CliError::Config(m) => CliError::config(format!("line {line}: {m}")),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    pub fn from_file(file: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(file)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", file.display())))?;
        let base = file.parent().unwrap_or(Path::new(""));
        Self::from_text(&text, base)
    }

    /// Sets one option from its textual form.
    pub fn set(&mut self, key: &str, v: &str, base: &Path) -> CliResult<()> {
        match key {
            "views" => {
                self.views = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| path(base, s))
                    .collect()
            }
            "header" => self.header = flag(key, v)?,
            "method" => self.methods = parse_method_list(v)?,
            "hc1" => {
                self.hc1 = optional(v)
                    .map(|s| parse_linkages(s).map(|m| m[0]))
                    .transpose()?
            }
            "hc2" => {
                self.hc2 = optional(v)
                    .map(|s| parse_linkages(s).map(|m| m[0]))
                    .transpose()?
            }
            "view_methods" => self.view_methods = optional(v).map(parse_linkages).transpose()?,
            "k" => {
                self.k = match v {
                    "auto" => None,
                    s => Some(num(key, s)?),
                }
            }
            "k_max" => self.k_max = num(key, v)?,
            "iterations" => self.iterations = num(key, v)?,
            "inner_linkage" => {
                self.inner_linkage = v
                    .parse()
                    .map_err(|e: mvhc_core::Error| CliError::config(e.to_string()))?
            }
            "population" => self.population = num(key, v)?,
            "generations" => self.generations = num(key, v)?,
            "tournament" => self.tournament = num(key, v)?,
            "mutation_rate" => self.mutation_rate = num(key, v)?,
            "elitism" => self.elitism = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "truth" => self.truth = optional(v).map(|s| path(base, s)),
            "survival" => self.survival = optional(v).map(|s| path(base, s)),
            "output" => self.output = path(base, v),
            "preprocess" => self.preprocess = flag(key, v)?,
            "max_missing" => self.max_missing = num(key, v)?,
            "knn" => self.knn = num(key, v)?,
            "top_variance" => self.top_variance = optional(v).map(|s| num(key, s)).transpose()?,
            "zscore" => self.zscore = flag(key, v)?,
            "subsample" => self.subsample = num(key, v)?,
            "repeats" => self.repeats = num(key, v)?,
            "parallel" => self.parallel = flag(key, v)?,
            "record_runtime" => self.record_runtime = flag(key, v)?,
            other => return Err(CliError::config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.views.is_empty() {
            return Err(CliError::config("at least one view path is required"));
        }
        if self.k_max < 2 {
            return Err(CliError::config("k_max must be at least 2"));
        }
        if self.k == Some(0) {
            return Err(CliError::config("k must be positive"));
        }
        if self.iterations == 0 {
            return Err(CliError::config("iterations must be positive"));
        }
        if self.hc1.is_some() != self.hc2.is_some() {
            return Err(CliError::config("hc1 and hc2 must be given together"));
        }
        if let Some(m) = &self.view_methods {
            if m.len() != self.views.len() {
                return Err(CliError::config(format!(
                    "view_methods has {} entries for {} views",
                    m.len(),
                    self.views.len()
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.max_missing) {
            return Err(CliError::config("max_missing must lie in [0,1]"));
        }
        if self.knn == 0 {
            return Err(CliError::config("knn must be positive"));
        }
        if self.subsample < 2 || self.repeats == 0 {
            return Err(CliError::config(
                "subsample must be at least 2 and repeats positive",
            ));
        }
        Ok(())
    }

    pub fn k_choice(&self) -> KChoice {
        match self.k {
            Some(k) => KChoice::Fixed(k),
            None => KChoice::Auto { k_max: self.k_max },
        }
    }

    pub fn exec(&self) -> Execution {
        if self.parallel {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }

    pub fn fusion_config(&self, seed: u64) -> FusionConfig {
        FusionConfig {
            iterations: self.iterations,
            inner_linkage: self.inner_linkage,
            seed,
            exec: self.exec(),
        }
    }

    pub fn ga_params(&self, seed: u64) -> GaParams {
        GaParams {
            population: self.population,
            generations: self.generations,
            tournament: self.tournament,
            mutation_rate: self.mutation_rate,
            elitism: self.elitism,
            seed,
            exec: self.exec(),
        }
    }

    pub fn prepare_options(&self) -> PrepareOptions {
        PrepareOptions {
            max_missing: self.max_missing,
            knn: self.knn,
            top_variance: self.top_variance,
            zscore: self.zscore,
        }
    }

    /// Every option in `key = value` form, in a fixed order. Parsing the
    /// output yields the same configuration.
    pub fn resolved(&self) -> String {
        fn opt<T: fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(|| "none".to_string(), T::to_string)
        }
        fn join<T: fmt::Display>(v: &[T]) -> String {
            v.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
        }
        let views: Vec<String> = self.views.iter().map(|p| p.display().to_string()).collect();
        let lines = [
            ("views", views.join(", ")),
            ("header", self.header.to_string()),
            ("method", join(&self.methods)),
            ("hc1", opt(&self.hc1)),
            ("hc2", opt(&self.hc2)),
            (
                "view_methods",
                self.view_methods.as_deref().map_or("none".into(), join),
            ),
            ("k", self.k.map_or("auto".into(), |k| k.to_string())),
            ("k_max", self.k_max.to_string()),
            ("iterations", self.iterations.to_string()),
            ("inner_linkage", self.inner_linkage.to_string()),
            ("population", self.population.to_string()),
            ("generations", self.generations.to_string()),
            ("tournament", self.tournament.to_string()),
            ("mutation_rate", self.mutation_rate.to_string()),
            ("elitism", self.elitism.to_string()),
            ("seed", self.seed.to_string()),
            ("truth", opt(&self.truth.as_ref().map(|p| p.display()))),
            (
                "survival",
                opt(&self.survival.as_ref().map(|p| p.display())),
            ),
            ("output", self.output.display().to_string()),
            ("preprocess", self.preprocess.to_string()),
            ("max_missing", self.max_missing.to_string()),
            ("knn", self.knn.to_string()),
            ("top_variance", opt(&self.top_variance)),
            ("zscore", self.zscore.to_string()),
            ("subsample", self.subsample.to_string()),
            ("repeats", self.repeats.to_string()),
            ("parallel", self.parallel.to_string()),
            ("record_runtime", self.record_runtime.to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
