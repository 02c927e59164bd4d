//! Pipeline stages and the end-to-end driver.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use cutqaoa::analysis::{histogram_from_samples, summarize, ObjectiveHistogram, Samples, Summary};
use cutqaoa::error::{invalid, Error, Result};
use cutqaoa::exact::solve_exact;
use cutqaoa::generate::generate_instance;
use cutqaoa::graph::{format_bits, parse_bits, parse_instance};
use cutqaoa::qaoa::{build_qaoa, train, QaoaEvaluator, QaoaParams, TrainOptions};
use cutqaoa::rng::{derive_seed, stream_rng, CdfSampler};
use cutqaoa::separator::{find_separator, SeparatorDecomposition};
use cutqaoa::shrink::{
    estimate_correlations, separator_pairs, shrink_separator, CorrelationOracle, Correlations, ExhaustiveOracle,
    LocalSearchOracle, ShrinkTrace, EXHAUSTIVE_MAX_VERTICES,
};
use cutqaoa::sim::{sample_register, NoiseModel};
use cutqaoa::wirecut::{build_cut_plan, sample_cut, SignedSampleSet};
use cutqaoa::{Bits, ExactInstance, Rational};

use crate::classical::{classical_cut_run, ClassicalOptions, ClassicalTraining};
use crate::config::{InstanceSource, Mode, OracleKind, RunConfig};

pub fn load_instance(source: &InstanceSource) -> Result<ExactInstance> {
    match source {
        InstanceSource::File(path) => parse_instance(&fs::read_to_string(path)?),
        InstanceSource::Generated { n, m, separator, seed } => {
            Ok(generate_instance::<Rational>(*n, *m, *separator, *seed)?.instance)
        }
    }
}

/// Separator correlations from the configured backend.
pub fn correlations(
    inst: &ExactInstance,
    dec: &SeparatorDecomposition,
    oracle: OracleKind,
    seed: u64,
) -> Result<Correlations> {
    let pairs = separator_pairs(&dec.s);
    let local = |restarts, keep| LocalSearchOracle { restarts, keep, seed: derive_seed(seed, "correlations") };
    let backend: Box<dyn CorrelationOracle<Rational>> = match oracle {
        OracleKind::Exhaustive => Box::new(ExhaustiveOracle),
        OracleKind::Auto if inst.num_vertices() <= EXHAUSTIVE_MAX_VERTICES => Box::new(ExhaustiveOracle),
        OracleKind::Auto => Box::new(local(200, 32)),
        OracleKind::LocalSearch { restarts, keep } => Box::new(local(restarts, keep)),
    };
    estimate_correlations(inst, &pairs, backend.as_ref())
}

/// Separator and shrinking artifacts of one instance.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub original: ExactInstance,
    pub decomposition: SeparatorDecomposition,
    pub correlations: Correlations,
    pub shrunk: ExactInstance,
    pub shrunk_decomposition: SeparatorDecomposition,
    pub trace: ShrinkTrace<Rational>,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let original = load_instance(&cfg.instance)?;
    info!("instance {} with {} vertices, {} edges", original.digest(), original.num_vertices(), original.num_edges());
    let decomposition = find_separator(&original, cfg.balance_fraction)?;
    info!("separator {:?} for instance {}", decomposition.s, original.digest());
    let correlations = correlations(&original, &decomposition, cfg.oracle, cfg.seed)?;
    let (shrunk, trace) = shrink_separator(&original, &decomposition, &correlations)?;
    let shrunk_decomposition = trace.map_decomposition(&decomposition);
    info!("shrunk {} -> {} ({} vertices)", original.digest(), shrunk.digest(), shrunk.num_vertices());
    Ok(Prepared { original, decomposition, correlations, shrunk, shrunk_decomposition, trace })
}

/// Unsigned shots of the QAOA circuit on `inst`.
///
/// Without noise all shots come from one statevector on stream 0 of
/// `seed`; with noise, `reuse` shots share each gate-noise trajectory.
pub fn sample_uncut(
    inst: &ExactInstance,
    params: &QaoaParams<f64>,
    noise: Option<&NoiseModel>,
    seed: u64,
    shots: usize,
    reuse: usize,
) -> Result<Vec<Bits>> {
    match noise.filter(|nm| !nm.is_noiseless()) {
        None => {
            let state = QaoaEvaluator::new(inst)?.state(params)?;
            let sampler = CdfSampler::new(state.amplitudes().iter().map(|a| a.norm_sqr()));
            let mut rng = stream_rng(seed, 0);
            Ok((0..shots).map(|_| sampler.sample(&mut rng) as Bits).collect())
        }
        Some(nm) => sample_register(&build_qaoa(inst, params, None)?, Some(nm), seed, shots, reuse),
    }
}

/// Unsigned shots with provenance, stored as one bitstring per row.
#[derive(Clone, Debug, PartialEq)]
pub struct PlainSampleSet {
    pub num_vertices: usize,
    pub seed: u64,
    pub mode: String,
    pub samples: Vec<Bits>,
}

impl PlainSampleSet {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * (self.num_vertices + 1) + 64);
        let _ = writeln!(out, "# mode={}", self.mode);
        let _ = writeln!(out, "# shots={}", self.samples.len());
        let _ = writeln!(out, "# seed={}", self.seed);
        out.push_str("bitstring\n");
        for &x in &self.samples {
            out.push_str(&format_bits(x, self.num_vertices));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut set = Self { num_vertices: 0, seed: 0, mode: String::new(), samples: Vec::new() };
        let mut width = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line == "bitstring" {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                match meta.trim().split_once('=') {
                    Some(("mode", v)) => set.mode = v.trim().to_string(),
                    Some(("seed", v)) => {
                        set.seed = v.trim().parse().map_err(|_| Error::Parse { line: i + 1, message: "bad seed".into() })?
                    }
                    _ => {}
                }
                continue;
            }
            let (x, len) = parse_bits(line).ok_or_else(|| Error::Parse { line: i + 1, message: format!("bad bitstring {line:?}") })?;
            if *width.get_or_insert(len) != len {
                return Err(Error::Parse { line: i + 1, message: "inconsistent bitstring length".into() });
            }
            set.samples.push(x);
        }
        set.num_vertices = width.unwrap_or(0);
        Ok(set)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SampleOutput {
    Signed(SignedSampleSet),
    Plain(PlainSampleSet),
}

impl SampleOutput {
    pub fn as_samples(&self) -> Samples<'_> {
        match self {
            SampleOutput::Signed(set) => Samples::Signed(set),
            SampleOutput::Plain(set) => Samples::Plain { num_vertices: set.num_vertices, bits: &set.samples },
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            SampleOutput::Signed(set) => set.to_csv(),
            SampleOutput::Plain(set) => set.to_csv(),
        }
    }

    /// Signed files carry a `kappa` header; everything else is plain.
    pub fn from_csv(text: &str) -> Result<Self> {
        if text.lines().any(|l| l.trim_start().starts_with("# kappa=")) {
            Ok(SampleOutput::Signed(SignedSampleSet::from_csv(text)?))
        } else {
            Ok(SampleOutput::Plain(PlainSampleSet::from_csv(text)?))
        }
    }

    pub fn kappa(&self) -> Option<f64> {
        match self {
            SampleOutput::Signed(set) => Some(set.kappa),
            SampleOutput::Plain(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub label: String,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub initial_expectation: f64,
    pub final_expectation: f64,
}

#[derive(Clone, Debug)]
pub struct StageOutput {
    pub samples: SampleOutput,
    pub training: Vec<TrainingReport>,
    /// Shared cut/uncut parameters; `None` for classical cutting.
    pub params: Option<QaoaParams<f64>>,
}

/// Shrunk-level shots for `mode`, plus the training behind them.
pub fn sample_stage(
    mode: Mode,
    shrunk: &ExactInstance,
    shrunk_dec: &SeparatorDecomposition,
    cfg: &RunConfig,
) -> Result<StageOutput> {
    let noise = cfg.effective_noise();
    let seed = derive_seed(cfg.seed, "sample");
    match mode {
        Mode::Cut | Mode::Uncut => {
            let trained = train::<f64, _>(shrunk, cfg.p, cfg.dt, &TrainOptions { budget: cfg.budget, ..Default::default() })?;
            info!(
                "trained p = {} on {}: {:.6} -> {:.6} in {} evaluations",
                cfg.p,
                shrunk.digest(),
                trained.initial_expectation,
                trained.final_expectation,
                trained.evaluations
            );
            let report = TrainingReport {
                label: "shrunk".into(),
                gammas: trained.params.gammas.clone(),
                betas: trained.params.betas.clone(),
                initial_expectation: trained.initial_expectation,
                final_expectation: trained.final_expectation,
            };
            let out = sample_with_params(mode, shrunk, shrunk_dec, &trained.params, noise.as_ref(), seed, cfg.shots, cfg.reuse)?;
            Ok(StageOutput { samples: out, training: vec![report], params: Some(trained.params) })
        }
        Mode::ClassicalCut => {
            let opts = ClassicalOptions { p: cfg.p, dt: cfg.dt, budget: cfg.budget, shots: cfg.shots, seed, reuse: cfg.reuse };
            let run = classical_cut_run(shrunk, shrunk_dec, &opts, noise.as_ref())?;
            let reports = run.training.iter().map(classical_report).collect();
            let set = PlainSampleSet {
                num_vertices: shrunk.num_vertices(),
                seed,
                mode: mode.as_str().into(),
                samples: run.samples,
            };
            Ok(StageOutput { samples: SampleOutput::Plain(set), training: reports, params: None })
        }
    }
}

fn classical_report(t: &ClassicalTraining) -> TrainingReport {
    TrainingReport {
        label: format!("x_s={} side {}", t.value as u8, t.side),
        gammas: t.params.gammas.clone(),
        betas: t.params.betas.clone(),
        initial_expectation: t.initial_expectation,
        final_expectation: t.final_expectation,
    }
}

/// Cut or uncut shots at fixed parameters.
#[allow(clippy::too_many_arguments)]
pub fn sample_with_params(
    mode: Mode,
    shrunk: &ExactInstance,
    shrunk_dec: &SeparatorDecomposition,
    params: &QaoaParams<f64>,
    noise: Option<&NoiseModel>,
    seed: u64,
    shots: usize,
    reuse: usize,
) -> Result<SampleOutput> {
    match mode {
        Mode::Cut => {
            let plan = build_cut_plan(shrunk, shrunk_dec, params)?;
            info!("cut plan {}: fragments of {} and {} qubits", plan.digest(), plan.fragment_a_qubits(), plan.fragment_b_qubits());
            Ok(SampleOutput::Signed(sample_cut(&plan, noise, seed, shots)?))
        }
        Mode::Uncut => Ok(SampleOutput::Plain(PlainSampleSet {
            num_vertices: shrunk.num_vertices(),
            seed,
            mode: mode.as_str().into(),
            samples: sample_uncut(shrunk, params, noise, seed, shots, reuse)?,
        })),
        Mode::ClassicalCut => Err(invalid("classical cutting trains its own parameters")),
    }
}

/// Histograms and metrics on both levels.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub original: ObjectiveHistogram<Rational>,
    pub shrunk: ObjectiveHistogram<Rational>,
    pub original_summary: Summary,
    pub shrunk_summary: Summary,
}

pub fn analyze(
    samples: &SampleOutput,
    original: &ExactInstance,
    shrunk: &ExactInstance,
    trace: &ShrinkTrace<Rational>,
) -> Result<Analysis> {
    let c_star = optimum(original)?;
    let c_star_shrunk = optimum(shrunk)?;
    let h_orig = histogram_from_samples(samples.as_samples(), original, Some(trace))?;
    let h_shrunk = histogram_from_samples(samples.as_samples(), shrunk, None)?;
    Ok(Analysis {
        original_summary: summarize(&h_orig, original, &c_star)?,
        shrunk_summary: summarize(&h_shrunk, shrunk, &c_star_shrunk)?,
        original: h_orig,
        shrunk: h_shrunk,
    })
}

fn optimum(inst: &ExactInstance) -> Result<Rational> {
    let sol = solve_exact(inst, None);
    if !sol.proven {
        return Err(Error::Infeasible("exact solver did not finish".into()));
    }
    Ok(sol.best_value)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub p1: f64,
    pub p2: f64,
    pub p_ro: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: String,
    pub noise: Option<NoiseReport>,
    pub seed: u64,
    pub shots: usize,
    pub instance_digest: String,
    pub n_original: usize,
    pub n_shrunk: usize,
    pub separator_size: usize,
    pub kappa: Option<f64>,
    pub training: Vec<TrainingReport>,
    pub original: Summary,
    pub shrunk: Summary,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub summary: RunSummary,
    pub prepared: Prepared,
    pub samples: SampleOutput,
    pub analysis: Analysis,
    pub out_dir: PathBuf,
}

pub const INSTANCE_FILE: &str = "instance.txt";
pub const SHRUNK_INSTANCE_FILE: &str = "shrunk_instance.txt";
pub const DECOMPOSITION_FILE: &str = "decomposition.json";
pub const SHRUNK_DECOMPOSITION_FILE: &str = "shrunk_decomposition.json";
pub const TRACE_FILE: &str = "trace.json";
pub const PARAMS_FILE: &str = "params.json";
pub const CLASSICAL_PARAMS_FILE: &str = "classical_params.json";
pub const SAMPLES_FILE: &str = "samples.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const SHRUNK_HISTOGRAM_FILE: &str = "histogram_shrunk.csv";
pub const SUMMARY_FILE: &str = "summary.json";

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Runs every stage and writes the artifacts to `cfg.out_dir`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let prepared = prepare(cfg)?;
    let StageOutput { samples, training, params } =
        sample_stage(cfg.mode, &prepared.shrunk, &prepared.shrunk_decomposition, cfg)?;
    let analysis = analyze(&samples, &prepared.original, &prepared.shrunk, &prepared.trace)?;
    let noise = cfg.effective_noise().map(|nm| NoiseReport { p1: nm.p1, p2: nm.p2, p_ro: nm.p_ro });
    let summary = RunSummary {
        mode: cfg.mode.as_str().into(),
        noise,
        seed: cfg.seed,
        shots: cfg.shots,
        instance_digest: prepared.original.digest(),
        n_original: prepared.original.num_vertices(),
        n_shrunk: prepared.shrunk.num_vertices(),
        separator_size: prepared.decomposition.s.len(),
        kappa: samples.kappa(),
        training,
        original: analysis.original_summary.clone(),
        shrunk: analysis.shrunk_summary.clone(),
    };

    let dir = &cfg.out_dir;
    fs::create_dir_all(dir)?;
    let digest = prepared.original.digest();
    write(dir, INSTANCE_FILE, &prepared.original.to_text())?;
    write(dir, SHRUNK_INSTANCE_FILE, &prepared.shrunk.to_text())?;
    write(dir, DECOMPOSITION_FILE, &prepared.decomposition.to_json())?;
    write(dir, SHRUNK_DECOMPOSITION_FILE, &prepared.shrunk_decomposition.to_json())?;
    write(dir, TRACE_FILE, &prepared.trace.to_json())?;
    match &params {
        Some(params) => write(dir, PARAMS_FILE, &(params.to_json()? + "\n"))?,
        None => write(dir, CLASSICAL_PARAMS_FILE, &(serde_json::to_string_pretty(&summary.training)? + "\n"))?,
    }
    write(dir, SAMPLES_FILE, &samples.to_csv())?;
    write(dir, HISTOGRAM_FILE, &analysis.original.to_csv(&digest, samples.kappa()))?;
    write(dir, SHRUNK_HISTOGRAM_FILE, &analysis.shrunk.to_csv(&prepared.shrunk.digest(), samples.kappa()))?;
    write(dir, SUMMARY_FILE, &summary.to_json())?;
    info!("wrote artifacts of {} to {}", digest, dir.display());
    Ok(RunReport { summary, prepared, samples, analysis, out_dir: dir.clone() })
}

/// One row per run: size, mode, noise and the original-level metrics.
/// Runs of equal size on different instances are marked in the last column.
pub fn compare_runs(runs: &[RunSummary]) -> Result<String> {
    if runs.len() < 2 {
        return Err(invalid("comparison needs at least two runs"));
    }
    let mut out = String::from("n,mode,noise,instance,p95_objective,p95_r,best_r,mean_r,instance_match\n");
    for r in runs {
        let matched = runs.iter().filter(|o| o.n_original == r.n_original).all(|o| o.instance_digest == r.instance_digest);
        let noise = if r.noise.is_some() { "noisy" } else { "noiseless" };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n_original,
            r.mode,
            noise,
            r.instance_digest,
            r.original.p95_objective,
            r.original.p95_r,
            r.original.best_r,
            r.original.mean_r,
            matched
        );
    }
    Ok(out)
}
