//! The sequential shot protocol and signed sample sets.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::graph::{format_bits, parse_bits, Bits};
use crate::rng::{stream_rng, CdfSampler};
use crate::scalar::Real;
use crate::sim::{run_shot, NoiseModel};
use crate::wirecut::plan::{CutPlan, HARADA_TAG, PENG_TAG, REGISTER_A, REGISTER_B};
use crate::wirecut::qpd::{one_norm, QpdTerm};
use crate::wirecut::tables::FragmentTables;

/// Signed shots over the shrunk vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedSampleSet {
    pub num_vertices: usize,
    pub kappa: f64,
    pub seed: u64,
    pub plan_digest: String,
    pub samples: Vec<(Bits, i8)>,
}

impl SignedSampleSet {
    pub fn shots(&self) -> usize {
        self.samples.len()
    }

    /// `q(x) = kappa / N * sum_i sign_i [x_i = x]`.
    pub fn reconstruct(&self) -> BTreeMap<Bits, f64> {
        let mut q = BTreeMap::new();
        if self.samples.is_empty() {
            return q;
        }
        let unit = self.kappa / self.samples.len() as f64;
        for &(x, sign) in &self.samples {
            *q.entry(x).or_insert(0.0) += unit * f64::from(sign);
        }
        q
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * (self.num_vertices + 4) + 64);
        let _ = writeln!(out, "# kappa={}", self.kappa);
        let _ = writeln!(out, "# shots={}", self.samples.len());
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(out, "# plan={}", self.plan_digest);
        out.push_str("bitstring,sign\n");
        for &(x, sign) in &self.samples {
            out.push_str(&format_bits(x, self.num_vertices));
            out.push_str(if sign < 0 { ",-1\n" } else { ",1\n" });
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut set = Self { num_vertices: 0, kappa: f64::NAN, seed: 0, plan_digest: String::new(), samples: Vec::new() };
        let mut declared = None;
        let mut width = None;
        for (i, line) in text.lines().enumerate() {
            let err = |message: String| Error::Parse { line: i + 1, message };
            let line = line.trim();
            if line.is_empty() || line == "bitstring,sign" {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let Some((key, value)) = meta.trim().split_once('=') else { continue };
                let value = value.trim();
                match key.trim() {
                    "kappa" => set.kappa = value.parse().map_err(|_| err(format!("bad kappa {value:?}")))?,
                    "shots" => declared = Some(value.parse::<usize>().map_err(|_| err(format!("bad shot count {value:?}")))?),
                    "seed" => set.seed = value.parse().map_err(|_| err(format!("bad seed {value:?}")))?,
                    "plan" => set.plan_digest = value.to_string(),
                    _ => {}
                }
                continue;
            }
            let (bits, sign) = line.split_once(',').ok_or_else(|| err("expected bitstring,sign".into()))?;
            let (x, len) = parse_bits(bits.trim()).ok_or_else(|| err(format!("bad bitstring {bits:?}")))?;
            if *width.get_or_insert(len) != len {
                return Err(err(format!("bitstring length {len} differs from earlier rows")));
            }
            let sign = match sign.trim() {
                "1" | "+1" => 1,
                "-1" => -1,
                other => return Err(err(format!("bad sign {other:?}"))),
            };
            set.samples.push((x, sign));
        }
        set.num_vertices = width.unwrap_or(0);
        if !set.kappa.is_finite() || set.kappa <= 0.0 {
            return Err(invalid("sample file lacks a positive kappa header"));
        }
        if let Some(n) = declared {
            if n != set.samples.len() {
                return Err(Error::LengthMismatch { expected: n, actual: set.samples.len() });
            }
        }
        Ok(set)
    }
}

/// Term pair drawn with probability `|c_h| |c_p| / kappa`.
fn draw_terms<'a, R: Rng + ?Sized>(
    harada: &'a [QpdTerm],
    peng: &'a [QpdTerm],
    samplers: &(CdfSampler, CdfSampler),
    rng: &mut R,
) -> (&'a QpdTerm, &'a QpdTerm) {
    (&harada[samplers.0.sample(rng)], &peng[samplers.1.sample(rng)])
}

fn term_samplers<F: Real>(plan: &CutPlan<F>) -> (CdfSampler, CdfSampler) {
    let weights = |terms: &[QpdTerm]| {
        let norm = one_norm(terms);
        CdfSampler::new(terms.iter().map(|t| t.probability(norm)).collect::<Vec<_>>())
    };
    (weights(plan.harada_terms()), weights(plan.peng_terms()))
}

/// One shot by direct simulation of both fragments. Fragment B is built
/// from the Harada term and the reported `m1` only.
pub fn sample_cut_shot<F: Real, R: Rng + ?Sized>(
    plan: &CutPlan<F>,
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> Result<(Bits, i8)> {
    sample_shot_with(plan, &term_samplers(plan), noise, rng)
}

fn sample_shot_with<F: Real, R: Rng + ?Sized>(
    plan: &CutPlan<F>,
    samplers: &(CdfSampler, CdfSampler),
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> Result<(Bits, i8)> {
    let (h, p) = draw_terms(plan.harada_terms(), plan.peng_terms(), samplers, rng);
    let shot_a = run_shot(plan.fragment_a(h.basis, p.prepared(false)), noise, rng)?;
    let m1 = shot_a.bit(HARADA_TAG).ok_or_else(|| Error::Circuit("missing m1".into()))?;
    let reg_a = shot_a.register(REGISTER_A).ok_or_else(|| Error::Circuit("missing register a".into()))?;
    let shot_b = run_shot(plan.fragment_b(h.prepared(m1), p.basis), noise, rng)?;
    let m2 = shot_b.bit(PENG_TAG).ok_or_else(|| Error::Circuit("missing m2".into()))?;
    let reg_b = shot_b.register(REGISTER_B).ok_or_else(|| Error::Circuit("missing register b".into()))?;
    Ok((plan.assemble(reg_a, reg_b), h.shot_sign(m1) * p.shot_sign(m2)))
}

/// Noiseless shots drawn from precomputed fragment tables; same
/// distribution as [`sample_cut_shot`] without noise.
struct TableSampler<'a, F> {
    plan: &'a CutPlan<F>,
    terms: (CdfSampler, CdfSampler),
    a: Vec<CdfSampler>,
    b: Vec<CdfSampler>,
    width_a: usize,
    width_b: usize,
}

impl<'a, F: Real> TableSampler<'a, F> {
    fn new(plan: &'a CutPlan<F>) -> Result<Self> {
        let (a, b) = FragmentTables::new(plan)?.samplers();
        Ok(Self {
            plan,
            terms: term_samplers(plan),
            a,
            b,
            width_a: plan.fragment_a_qubits(),
            width_b: plan.fragment_b_qubits(),
        })
    }

    fn shot<R: Rng + ?Sized>(&self, rng: &mut R) -> (Bits, i8) {
        let (h, p) = draw_terms(self.plan.harada_terms(), self.plan.peng_terms(), &self.terms, rng);
        let ia = self.a[h.basis.index() * 6 + p.prepared(false).index()].sample(rng);
        let (m1, reg_a) = (ia >> self.width_a == 1, (ia & ((1 << self.width_a) - 1)) as u64);
        let ib = self.b[h.prepared(m1).index() * 3 + p.basis.index()].sample(rng);
        let (m2, reg_b) = (ib >> self.width_b == 1, (ib & ((1 << self.width_b) - 1)) as u64);
        (self.plan.assemble(reg_a, reg_b), h.shot_sign(m1) * p.shot_sign(m2))
    }
}

/// `shots` independent shots; shot `k` uses stream `k` of `seed`, so the
/// result does not depend on the worker count.
pub fn sample_cut<F: Real>(
    plan: &CutPlan<F>,
    noise: Option<&NoiseModel>,
    seed: u64,
    shots: usize,
) -> Result<SignedSampleSet> {
    if let Some(nm) = noise {
        nm.validate()?;
    }
    let noise = noise.filter(|nm| !nm.is_noiseless());
    let samples: Vec<(Bits, i8)> = match noise {
        None => {
            let sampler = TableSampler::new(plan)?;
            (0..shots).into_par_iter().map(|k| sampler.shot(&mut stream_rng(seed, k as u64))).collect()
        }
        Some(nm) => {
            let terms = term_samplers(plan);
            (0..shots)
                .into_par_iter()
                .map(|k| sample_shot_with(plan, &terms, Some(nm), &mut stream_rng(seed, k as u64)))
                .collect::<Result<_>>()?
        }
    };
    Ok(SignedSampleSet {
        num_vertices: plan.num_vertices(),
        kappa: plan.kappa_f64(),
        seed,
        plan_digest: plan.digest().to_string(),
        samples,
    })
}

/// Signed estimate of the uncut output distribution.
pub fn reconstruct_distribution(set: &SignedSampleSet) -> Result<BTreeMap<Bits, f64>> {
    if set.samples.is_empty() {
        return Err(invalid("reconstruction needs at least one shot"));
    }
    Ok(set.reconstruct())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qaoa::{build_qaoa, QaoaParams};
    use crate::separator::SeparatorDecomposition;
    use crate::sim::exact_distribution;
    use crate::wirecut::plan::build_cut_plan;
    use crate::ExactInstance;

    fn set(samples: Vec<(Bits, i8)>) -> SignedSampleSet {
        SignedSampleSet { num_vertices: 3, kappa: 12.0, seed: 0, plan_digest: "x".into(), samples }
    }

    fn path_plan(gammas: Vec<f64>, betas: Vec<f64>) -> (ExactInstance, CutPlan<f64>) {
        let inst = ExactInstance::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let dec = SeparatorDecomposition { a: vec![0], b: vec![2], s: vec![1], balance_bound: 1 };
        let plan = build_cut_plan(&inst, &dec, &QaoaParams::new(gammas, betas).unwrap()).unwrap();
        (inst, plan)
    }

    #[test]
    fn estimator_examples() {
        assert_eq!(set(vec![(5, 1)]).reconstruct(), BTreeMap::from([(5, 12.0)]));
        let q = set(vec![(5, 1), (5, -1), (2, 1), (2, 1)]).reconstruct();
        assert_eq!(q[&5], 0.0);
        assert_eq!(q[&2], 6.0);
        assert!(reconstruct_distribution(&set(vec![])).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = set(vec![(0b101, 1), (0b010, -1), (0b111, 1)]);
        let text = s.to_csv();
        assert!(text.starts_with("# kappa=12\n# shots=3\n"));
        assert!(text.contains("\n101,1\n010,-1\n"));
        assert_eq!(SignedSampleSet::from_csv(&text).unwrap(), s);
        assert!(SignedSampleSet::from_csv("# kappa=12\n# shots=2\nbitstring,sign\n01,1\n").is_err());
        assert!(SignedSampleSet::from_csv("# kappa=12\n01,1\n011,1\n").is_err());
        assert!(SignedSampleSet::from_csv("01,1\n").is_err());
    }

    fn linf(set: &SignedSampleSet, exact: &[f64]) -> f64 {
        let q = set.reconstruct();
        exact.iter().enumerate().map(|(x, p)| (q.get(&(x as u64)).copied().unwrap_or(0.0) - p).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_wire_converges_to_uniform() {
        let (_, plan) = path_plan(vec![0.0, 0.0], vec![0.0, 0.0]);
        let s = sample_cut(&plan, None, 7, 1_000_000).unwrap();
        assert_eq!(s.shots(), 1_000_000);
        assert!(linf(&s, &[0.125; 8]) <= 0.01);
    }

    /// Largest `|q(x) - p(x)| / sigma(x)` with the per-bitstring standard
    /// error `sqrt((kappa^2 raw(x) - p(x)^2) / N)` of the signed estimator.
    fn max_z(set: &SignedSampleSet, exact: &[f64], raw: &[f64]) -> f64 {
        let q = set.reconstruct();
        let n = set.shots() as f64;
        exact
            .iter()
            .zip(raw)
            .enumerate()
            .map(|(x, (p, r))| {
                let sigma = ((144.0 * r - p * p).max(1e-300) / n).sqrt();
                (q.get(&(x as u64)).copied().unwrap_or(0.0) - p).abs() / sigma
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn table_and_direct_shots_agree_with_the_uncut_circuit() {
        let (inst, plan) = path_plan(vec![0.5, 0.9], vec![0.6, 0.3]);
        let exact = exact_distribution(&build_qaoa(&inst, plan.params(), None).unwrap(), &BTreeMap::new(), None).unwrap();
        let raw = crate::wirecut::exact_cut_distribution(&plan).unwrap().raw;
        let fast = sample_cut(&plan, None, 11, 1_000_000).unwrap();
        assert!(max_z(&fast, &exact, &raw) < 4.5);
        // direct simulation of both fragments
        let terms = term_samplers(&plan);
        let samples: Vec<(Bits, i8)> = (0..200_000)
            .into_par_iter()
            .map(|k| sample_shot_with(&plan, &terms, None, &mut stream_rng(12, k)).unwrap())
            .collect();
        let direct = SignedSampleSet { samples, ..fast.clone() };
        assert!(max_z(&direct, &exact, &raw) < 4.5);
        let zero = sample_cut(&plan, Some(&NoiseModel::noiseless()), 11, 1000).unwrap();
        assert_eq!(zero.samples, sample_cut(&plan, None, 11, 1000).unwrap().samples);
    }

    #[test]
    fn trained_path_estimate_is_within_a_hundredth() {
        let (inst, _) = path_plan(vec![0.0, 0.0], vec![0.0, 0.0]);
        let trained = crate::qaoa::train::<f64, _>(&inst, 2, 0.75, &Default::default()).unwrap();
        let dec = SeparatorDecomposition { a: vec![0], b: vec![2], s: vec![1], balance_bound: 1 };
        let plan = build_cut_plan(&inst, &dec, &trained.params).unwrap();
        let exact = exact_distribution(&build_qaoa(&inst, &trained.params, None).unwrap(), &BTreeMap::new(), None).unwrap();
        let s = sample_cut(&plan, None, 5, 1_000_000).unwrap();
        let err = linf(&s, &exact);
        assert!(err <= 0.01, "{err}");
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let (_, plan) = path_plan(vec![0.5, 0.9], vec![0.6, 0.3]);
        let noise = NoiseModel::default();
        let a = sample_cut(&plan, Some(&noise), 3, 2000).unwrap();
        let b = sample_cut(&plan, Some(&noise), 3, 2000).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples, sample_cut(&plan, Some(&noise), 4, 2000).unwrap().samples);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = single.install(|| sample_cut(&plan, Some(&noise), 3, 2000).unwrap());
        assert_eq!(a, c);
    }
}
