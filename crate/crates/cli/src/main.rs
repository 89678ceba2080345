use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mvhc_cli::commands::{metrics_json, MetricsArgs, PreprocessArgs};
use mvhc_cli::{cmd_benchmark, cmd_cluster, cmd_metrics, cmd_preprocess, CliResult, RunConfig};
use mvhc_core::preprocess::PrepareOptions;

#[derive(Parser)]
#[command(
    name = "mvhc",
    version,
    about = "Multi-view hierarchical ensemble clustering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter, impute, select and z-score one view.
    Preprocess {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        max_missing: f64,
        #[arg(long, default_value_t = 5)]
        knn: usize,
        #[arg(long)]
        top_variance: Option<usize>,
        /// Z-score features (the default).
        #[arg(long, overrides_with = "no_zscore")]
        zscore: bool,
        #[arg(long)]
        no_zscore: bool,
        #[arg(long)]
        no_header: bool,
    },
    /// Cluster the configured views.
    Cluster(RunArgs),
    /// Score workflows over repeated subsamples.
    Benchmark(RunArgs),
    /// Compare a labeling with ground truth, survival data or its view.
    Metrics {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        survival: Option<PathBuf>,
        #[arg(long)]
        view: Option<PathBuf>,
        #[arg(long)]
        no_header: bool,
        /// Write JSON here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Options shared by `cluster` and `benchmark`. Flags override the config
/// file; `--set key=value` overrides both.
#[derive(Args)]
struct RunArgs {
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// View CSV; repeat for several views.
    #[arg(long = "view")]
    views: Vec<String>,
    #[arg(long)]
    method: Option<String>,
    /// Number of clusters or `auto`.
    #[arg(short)]
    k: Option<String>,
    #[arg(long)]
    k_max: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long)]
    hc1: Option<String>,
    #[arg(long)]
    hc2: Option<String>,
    #[arg(long)]
    view_methods: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    population: Option<String>,
    #[arg(long)]
    generations: Option<String>,
    #[arg(long)]
    truth: Option<String>,
    #[arg(long)]
    survival: Option<String>,
    #[arg(short, long)]
    output: Option<String>,
    #[arg(long)]
    subsample: Option<String>,
    #[arg(long)]
    repeats: Option<String>,
    #[arg(long)]
    preprocess: bool,
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    record_runtime: bool,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn into_config(self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let cwd = Path::new("");
        let mut pairs: Vec<(String, String)> = Vec::new();
        if !self.views.is_empty() {
            pairs.push(("views".into(), self.views.join(",")));
        }
        let named = [
            ("method", self.method),
            ("k", self.k),
            ("k_max", self.k_max),
            ("iterations", self.iterations),
            ("hc1", self.hc1),
            ("hc2", self.hc2),
            ("view_methods", self.view_methods),
            ("seed", self.seed),
            ("population", self.population),
            ("generations", self.generations),
            ("truth", self.truth),
            ("survival", self.survival),
            ("output", self.output),
            ("subsample", self.subsample),
            ("repeats", self.repeats),
        ];
        pairs.extend(
            named
                .into_iter()
                .filter_map(|(k, v)| v.map(|v| (k.to_string(), v))),
        );
        if self.preprocess {
            pairs.push(("preprocess".into(), "true".into()));
        }
        if self.sequential {
            pairs.push(("parallel".into(), "false".into()));
        }
        if self.record_runtime {
            pairs.push(("record_runtime".into(), "true".into()));
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                mvhc_cli::CliError::config(format!("--set expects KEY=VALUE, got '{kv}'"))
            })?;
            pairs.push((k.trim().into(), v.trim().into()));
        }
        for (k, v) in pairs {
            cfg.set(&k, &v, cwd)?;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Preprocess {
            input,
            output,
            max_missing,
            knn,
            top_variance,
            zscore: _,
            no_zscore,
            no_header,
        } => {
            let args = PreprocessArgs {
                input,
                output,
                header: !no_header,
                options: PrepareOptions {
                    max_missing,
                    knn,
                    top_variance,
                    zscore: !no_zscore,
                },
            };
            let r = cmd_preprocess(&args)?;
            println!("rows dropped: {}", r.rows_dropped);
            println!("columns dropped (missing): {}", r.columns_dropped_missing);
            println!("columns dropped (variance): {}", r.columns_dropped_variance);
            println!("cells imputed: {}", r.cells_imputed);
        }
        Command::Cluster(a) => {
            let r = cmd_cluster(&a.into_config()?)?;
            println!(
                "k = {}, methods = {}, fitness = {:?}",
                r.k.unwrap_or(0),
                r.methods.join(","),
                r.fitness
            );
        }
        Command::Benchmark(a) => {
            let r = cmd_benchmark(&a.into_config()?)?;
            for s in &r.summary {
                println!(
                    "{}: repeats {}, median ARI {:?}, median NMI {:?}, median log-rank p {:?}",
                    s.method, s.repeats, s.median_ari, s.median_nmi, s.median_logrank_p
                );
            }
        }
        Command::Metrics {
            labels,
            truth,
            survival,
            view,
            no_header,
            output,
        } => {
            let args = MetricsArgs {
                labels,
                truth,
                survival,
                view,
                header: !no_header,
            };
            let r = cmd_metrics(&args)?;
            print!("{}", metrics_json(&r, output.as_deref())?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
