use std::path::PathBuf;
use std::process::ExitCode;

use acfkit::acf::AcfMethod;
use acfkit::pipeline::{run_eval, run_extract, run_plot, run_synth, run_train, Layout, PipelineConfig};
use acfkit::vote::{
    brute_force_pv_recall, monte_carlo_session_eval, theorem_sweep, AggregationPolicy, SweepGrid, VoteParams,
    VoteReport,
};
use acfkit::{Error, ErrorKind};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "acfkit", version, about = "Channel-delay correlation features, segment classifier and plurality-vote analysis")]
struct Cli {
    /// Pipeline configuration (JSON, schema version 1). Defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output root; overrides `paths.out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the labelled synthetic corpus and its manifest.
    Synth,
    /// Compute ACF matrices for every segment of every manifest session.
    Extract {
        /// Manifest to read; defaults to the one written by `synth`.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Split sessions and train the segment classifier.
    Train,
    /// Evaluate the trained classifier on the test sessions.
    Eval {
        #[arg(long, value_enum)]
        policy: Option<Policy>,
    },
    /// Run synth, extract, train and eval in sequence.
    Run,
    /// Plurality-vote recall analysis.
    Vote {
        #[command(subcommand)]
        command: VoteCommand,
    },
    /// Render SVG charts from metrics or theorem-sweep JSON files.
    Plot {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct VoteArgs {
    /// Segment-level recall of the true class.
    #[arg(long)]
    p0: f64,
    /// Segments per session.
    #[arg(long)]
    n: usize,
}

#[derive(Subcommand)]
enum VoteCommand {
    /// Closed-form session recall.
    Exact(VoteArgs),
    /// Enumerate all 2^N segment outcomes.
    Brute(VoteArgs),
    /// Monte-Carlo estimate with a Wilson 95% interval.
    Simulate {
        #[command(flatten)]
        params: VoteArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Check session recall >= segment recall over a (p0, N) grid; exits 4 on failure.
    Check {
        #[arg(long, default_value_t = 50)]
        p0_min_pct: u32,
        #[arg(long, default_value_t = 100)]
        p0_max_pct: u32,
        #[arg(long, default_value_t = 50)]
        n_max: usize,
        /// Also write the report to this file (input for `plot`).
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Fast,
    Naive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Pv,
    MeanProb,
}

enum Failure {
    Error(Error),
    Config(Error),
    Theorem(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path).map_err(Failure::Config)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.paths.out_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serialisable report"));
}

fn vote_params(a: &VoteArgs) -> Result<VoteParams<f64>, Failure> {
    VoteParams::new(a.p0, a.n).map_err(Failure::Config)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = load_config(&cli)?;
    let layout = Layout::new(cfg.out_dir());
    match cli.command {
        Command::Synth => {
            let manifest = run_synth(&cfg, &layout.data_dir())?;
            print_json(&serde_json::json!({ "manifest": manifest }));
        }
        Command::Extract { manifest, method } => {
            if let Some(m) = method {
                cfg.acf_method = match m {
                    Method::Fast => AcfMethod::Fast,
                    Method::Naive => AcfMethod::Naive,
                };
            }
            let manifest = manifest.or(cfg.paths.manifest.clone()).unwrap_or_else(|| layout.manifest());
            let index = run_extract(&cfg, &manifest, &layout.features_dir())?;
            let segments: usize = index.sessions.iter().map(|s| s.segments.len()).sum();
            print_json(&serde_json::json!({
                "features": layout.features_dir(),
                "sessions": index.sessions.len(),
                "usable_sessions": index.usable().count(),
                "segments": segments,
            }));
        }
        Command::Train => {
            let summary = run_train(&cfg, &layout.features_dir(), &layout.model_dir())?;
            print_json(&summary);
        }
        Command::Eval { policy } => {
            if let Some(p) = policy {
                cfg.aggregation = match p {
                    Policy::Pv => AggregationPolicy::Pv,
                    Policy::MeanProb => AggregationPolicy::MeanProb,
                };
            }
            let report = run_eval(&cfg, &layout.features_dir(), &layout.model_dir(), &layout.eval_dir())?;
            print!("{}", report.to_text());
        }
        Command::Run => {
            let report = acfkit::pipeline::run_all(&cfg)?;
            print!("{}", report.to_text());
        }
        Command::Vote { command } => match command {
            VoteCommand::Exact(a) => print_json(&VoteReport::exact(&vote_params(&a)?)),
            VoteCommand::Brute(a) => {
                let params = vote_params(&a)?;
                let brute = brute_force_pv_recall(&params)?;
                print_json(&VoteReport { brute_force: Some(brute), ..VoteReport::exact(&params) });
            }
            VoteCommand::Simulate { params, trials } => {
                let params = vote_params(&params)?;
                if trials == 0 {
                    return Err(Failure::Config(Error::Config("--trials must be >= 1".into())));
                }
                let mc = monte_carlo_session_eval(&params, trials, cfg.seed);
                print_json(&VoteReport {
                    mc_estimate: Some(mc.recall),
                    ci_low: Some(mc.ci_low),
                    ci_high: Some(mc.ci_high),
                    ..VoteReport::exact(&params)
                });
            }
            VoteCommand::Check { p0_min_pct, p0_max_pct, n_max, report } => {
                let sweep = theorem_sweep(SweepGrid { p0_min_pct, p0_max_pct, n_max }).map_err(Failure::Config)?;
                if let Some(path) = report {
                    let text = serde_json::to_string_pretty(&sweep).expect("serialisable report") + "\n";
                    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
                }
                print_json(&serde_json::json!({
                    "cases": sweep.cases,
                    "min_margin": sweep.min_margin,
                    "violations": sweep.violations,
                    "unexpected_equalities": sweep.unexpected_equalities,
                    "missing_equalities": sweep.missing_equalities,
                    "odd_n_monotone": sweep.odd_n_monotone,
                    "passed": sweep.passed(),
                }));
                if !sweep.passed() {
                    return Err(Failure::Theorem(format!(
                        "{} violations, {} unexpected and {} missing equalities, odd-N monotone: {}",
                        sweep.violations.len(),
                        sweep.unexpected_equalities.len(),
                        sweep.missing_equalities.len(),
                        sweep.odd_n_monotone
                    )));
                }
            }
        },
        Command::Plot { files } => {
            let written = run_plot(&files, &layout.plots_dir())?;
            print_json(&serde_json::json!({ "written": written }));
        }
    }
    Ok(())
}

fn report(code: &str, kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": code, "kind": kind, "message": message }));
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ACFKIT_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            report("ConfigError", "config", &e.to_string());
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Theorem(msg)) => {
            report("TheoremViolation", "theorem", &msg);
            ExitCode::from(4)
        }
        Err(Failure::Config(e)) => {
            report(e.code(), "config", &e.to_string());
            ExitCode::from(2)
        }
        Err(Failure::Error(e)) => {
            let (kind, status) = match e.kind() {
                ErrorKind::Config => ("config", 2),
                ErrorKind::Data => ("data", 3),
            };
            report(e.code(), kind, &e.to_string());
            ExitCode::from(status)
        }
    }
}
