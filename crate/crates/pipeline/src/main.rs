use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cutqaoa::error::{Error, Result};
use cutqaoa::generate::generate_instance;
use cutqaoa::graph::parse_instance;
use cutqaoa::qaoa::{train, QaoaParams, TrainOptions};
use cutqaoa::separator::{find_separator, SeparatorDecomposition, DEFAULT_BALANCE_FRACTION};
use cutqaoa::shrink::{shrink_separator, ShrinkTrace};
use cutqaoa::{ExactInstance, Rational};
use cutqaoa_pipeline::config::{InstanceSource, Mode, OracleKind, RunConfig, OUT_DIR_ENV};
use cutqaoa_pipeline::run::{
    self, analyze, compare_runs, run_pipeline, sample_stage, sample_with_params, RunSummary, SampleOutput,
};

#[derive(Parser)]
#[command(name = "cutqaoa", version, about = "QAOA MaxCut sampling with wire-cut circuit fragments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Planted two-community instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        separator: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum balanced vertex separator.
    Separate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BALANCE_FRACTION)]
        balance_fraction: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge the separator into one vertex.
    Shrink {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        decomposition: PathBuf,
        #[arg(long, default_value = "auto")]
        oracle: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Train QAOA parameters from the annealing schedule.
    Train {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 2)]
        p: usize,
        #[arg(long, default_value_t = 0.75)]
        dt: f64,
        #[arg(long, default_value_t = 500)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the shrunk instance (cut, uncut or classical-cut).
    Sample {
        #[arg(long)]
        instance: PathBuf,
        /// Shrunk decomposition; required for cut and classical-cut.
        #[arg(long)]
        decomposition: Option<PathBuf>,
        /// Trained parameters; required for cut and uncut.
        #[arg(long)]
        params: Option<PathBuf>,
        #[command(flatten)]
        run: RunFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Histograms and summary of a sample file.
    Analyze {
        #[arg(long)]
        samples: PathBuf,
        /// Original instance.
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        shrunk_instance: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Every stage, writing all artifacts.
    RunAll {
        /// Flat key = value configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Extra key=value settings applied after the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        settings: Vec<String>,
        #[command(flatten)]
        run: RunFlags,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Comparison table of several summaries.
    Compare {
        summaries: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Sampling settings shared by `sample` and `run-all`.
#[derive(Args)]
struct RunFlags {
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `none` or `default`.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    #[arg(long)]
    p_ro: Option<f64>,
    #[arg(long)]
    reuse: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    budget: Option<usize>,
}

impl RunFlags {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        let pairs: [(&str, Option<String>); 11] = [
            ("mode", self.mode.clone()),
            ("shots", self.shots.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("noise", self.noise.clone()),
            ("p1", self.p1.map(|v| v.to_string())),
            ("p2", self.p2.map(|v| v.to_string())),
            ("p_ro", self.p_ro.map(|v| v.to_string())),
            ("reuse", self.reuse.map(|v| v.to_string())),
            ("p", self.p.map(|v| v.to_string())),
            ("dt", self.dt.map(|v| v.to_string())),
            ("budget", self.budget.map(|v| v.to_string())),
        ];
        for (key, value) in pairs {
            if let Some(value) = value {
                cfg.set(key, &value)?;
            }
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<ExactInstance> {
    parse_instance(&read(path)?)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { n, m, separator, seed, out } => {
            let g = generate_instance::<Rational>(n, m, separator, seed)?;
            emit(out.as_deref(), &g.instance.to_text())
        }
        Command::Separate { instance, balance_fraction, out } => {
            let dec = find_separator(&load(&instance)?, balance_fraction)?;
            emit(out.as_deref(), &(dec.to_json() + "\n"))
        }
        Command::Shrink { instance, decomposition, oracle, seed, out_dir } => {
            let inst = load(&instance)?;
            let dec = SeparatorDecomposition::from_json(&read(&decomposition)?)?;
            let mut cfg = RunConfig::default();
            cfg.set("oracle", &oracle)?;
            let corr = run::correlations(&inst, &dec, cfg.oracle, seed)?;
            let (shrunk, trace) = shrink_separator(&inst, &dec, &corr)?;
            fs::create_dir_all(&out_dir)?;
            fs::write(out_dir.join(run::SHRUNK_INSTANCE_FILE), shrunk.to_text())?;
            fs::write(out_dir.join(run::TRACE_FILE), trace.to_json())?;
            fs::write(out_dir.join(run::SHRUNK_DECOMPOSITION_FILE), trace.map_decomposition(&dec).to_json())?;
            Ok(())
        }
        Command::Train { instance, p, dt, budget, out } => {
            let trained = train::<f64, _>(&load(&instance)?, p, dt, &TrainOptions { budget, ..Default::default() })?;
            eprintln!("expectation {:.6} -> {:.6}", trained.initial_expectation, trained.final_expectation);
            emit(out.as_deref(), &(trained.params.to_json()? + "\n"))
        }
        Command::Sample { instance, decomposition, params, run, out } => {
            let mut cfg = RunConfig::default();
            run.apply(&mut cfg)?;
            cfg.instance = InstanceSource::File(instance.clone());
            cfg.validate()?;
            let shrunk = load(&instance)?;
            let dec = match &decomposition {
                Some(path) => SeparatorDecomposition::from_json(&read(path)?)?,
                None if cfg.mode == Mode::Uncut => SeparatorDecomposition { a: vec![], b: vec![], s: vec![], balance_bound: 0 },
                None => return Err(Error::InvalidArgument(format!("{} mode needs --decomposition", cfg.mode))),
            };
            let samples = match (cfg.mode, &params) {
                (Mode::ClassicalCut, _) => sample_stage(cfg.mode, &shrunk, &dec, &cfg)?.samples,
                (_, Some(path)) => {
                    let params = QaoaParams::<f64>::from_json(&read(path)?)?;
                    let seed = cutqaoa::rng::derive_seed(cfg.seed, "sample");
                    let noise = cfg.effective_noise();
                    sample_with_params(cfg.mode, &shrunk, &dec, &params, noise.as_ref(), seed, cfg.shots, cfg.reuse)?
                }
                (_, None) => sample_stage(cfg.mode, &shrunk, &dec, &cfg)?.samples,
            };
            emit(out.as_deref(), &samples.to_csv())
        }
        Command::Analyze { samples, instance, shrunk_instance, trace, out_dir } => {
            let samples = SampleOutput::from_csv(&read(&samples)?)?;
            let original = load(&instance)?;
            let shrunk = load(&shrunk_instance)?;
            let trace = ShrinkTrace::<Rational>::from_json(&read(&trace)?)?;
            let a = analyze(&samples, &original, &shrunk, &trace)?;
            fs::create_dir_all(&out_dir)?;
            fs::write(out_dir.join(run::HISTOGRAM_FILE), a.original.to_csv(&original.digest(), samples.kappa()))?;
            fs::write(out_dir.join(run::SHRUNK_HISTOGRAM_FILE), a.shrunk.to_csv(&shrunk.digest(), samples.kappa()))?;
            let json = serde_json::json!({ "original": a.original_summary, "shrunk": a.shrunk_summary });
            println!("{}", serde_json::to_string_pretty(&json)?);
            Ok(())
        }
        Command::RunAll { config, settings, run, out_dir } => {
            let mut cfg = match &config {
                Some(path) => RunConfig::parse(&read(path)?)?,
                None => RunConfig::default(),
            };
            for kv in &settings {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidArgument(format!("--set expects KEY=VALUE, got {kv:?}")))?;
                cfg.set(k, v)?;
            }
            run.apply(&mut cfg)?;
            cfg.apply_env();
            if let Some(dir) = out_dir {
                cfg.out_dir = dir;
            }
            if cfg.oracle == OracleKind::Auto {
                log::debug!("correlation backend chosen by instance size");
            }
            let report = run_pipeline(&cfg)?;
            print!("{}", report.summary.to_json());
            Ok(())
        }
        Command::Compare { summaries, out } => {
            let runs = summaries.iter().map(|p| RunSummary::from_json(&read(p)?)).collect::<Result<Vec<_>>>()?;
            emit(out.as_deref(), &compare_runs(&runs)?)
        }
    }
}

/// 2: invalid input, 3: no feasible separator, 1: anything else.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Infeasible(_) => 3,
        Error::Parse { .. }
        | Error::LengthMismatch { .. }
        | Error::InvalidArgument(_)
        | Error::QubitOverflow { .. }
        | Error::Json(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
