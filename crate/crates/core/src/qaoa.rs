//! QAOA circuits, annealing-schedule initialization and training.

use std::collections::HashMap;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::MaxCutInstance;
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::scalar::{Real, Weight};
use crate::sim::{Circuit, StateVector, MAX_QUBITS};

/// Register tag of the final measurement in [`build_qaoa`] circuits.
pub const REGISTER_TAG: &str = "x";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams<F> {
    pub p: usize,
    pub gammas: Vec<F>,
    pub betas: Vec<F>,
}

impl<F: Real> QaoaParams<F> {
    pub fn new(gammas: Vec<F>, betas: Vec<F>) -> Result<Self> {
        let params = Self { p: gammas.len(), gammas, betas };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(invalid("QAOA needs at least one layer"));
        }
        if self.gammas.len() != self.p || self.betas.len() != self.p {
            return Err(invalid(format!(
                "p = {} but {} gammas and {} betas",
                self.p,
                self.gammas.len(),
                self.betas.len()
            )));
        }
        if self.gammas.iter().chain(&self.betas).any(|a| !a.is_finite()) {
            return Err(invalid("QAOA angles must be finite"));
        }
        Ok(())
    }

    /// `(gamma_1..gamma_p, beta_1..beta_p)`.
    pub fn to_vec(&self) -> Vec<F> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_slice(x: &[F]) -> Result<Self> {
        if x.is_empty() || !x.len().is_multiple_of(2) {
            return Err(invalid(format!("flat QAOA parameter vector has odd or zero length {}", x.len())));
        }
        let p = x.len() / 2;
        Self::new(x[..p].to_vec(), x[p..].to_vec())
    }
}

impl<F: Real + Serialize + for<'de> Deserialize<'de>> QaoaParams<F> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let params: Self = serde_json::from_str(text)?;
        params.validate()?;
        Ok(params)
    }
}

/// Linear-ramp Trotterization of an annealing schedule with step `dt`.
pub fn init_schedule<F: Real>(p: usize, dt: F) -> Result<QaoaParams<F>> {
    if p == 0 {
        return Err(invalid("QAOA needs at least one layer"));
    }
    if dt <= F::zero() || !dt.is_finite() {
        return Err(invalid(format!("annealing step must be positive, got {dt}")));
    }
    let frac = |k: usize| F::of((k as f64 + 0.5) / p as f64);
    let gammas = (0..p).map(|k| frac(k) * dt).collect();
    let betas = (0..p).map(|k| (F::one() - frac(k)) * dt).collect();
    QaoaParams::new(gammas, betas)
}

/// `H` on every qubit, then per layer the cost phases (edges in
/// `edge_order`, default sorted; then linear terms) and `RX(2 beta)` on every
/// qubit; ends with `MeasureAll` tagged [`REGISTER_TAG`].
pub fn build_qaoa<F: Real, W: Weight>(
    inst: &MaxCutInstance<W>,
    params: &QaoaParams<F>,
    edge_order: Option<&[usize]>,
) -> Result<Circuit<F>> {
    params.validate()?;
    let n = inst.num_vertices();
    let edges = inst.edges();
    let order: Vec<usize> = match edge_order {
        None => (0..edges.len()).collect(),
        Some(order) => {
            let mut seen = vec![false; edges.len()];
            for &e in order {
                if e >= edges.len() || std::mem::replace(&mut seen[e], true) {
                    return Err(invalid("edge order must be a permutation of the edge indices"));
                }
            }
            if order.len() != edges.len() {
                return Err(Error::LengthMismatch { expected: edges.len(), actual: order.len() });
            }
            order.to_vec()
        }
    };
    let mut c = Circuit::new(n)?;
    for q in 0..n {
        c.h(q)?;
    }
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        for &e in &order {
            let edge = &edges[e];
            c.zz_phase(edge.u, edge.v, gamma * F::of(edge.w.as_f64()))?;
        }
        for (v, h) in inst.linear().iter().enumerate() {
            if !h.is_zero() {
                c.rz(v, gamma * F::of(h.as_f64()))?;
            }
        }
        for q in 0..n {
            c.rx(q, F::of(2.0) * beta)?;
        }
    }
    c.measure_all(REGISTER_TAG)?;
    Ok(c)
}

/// Statevector evaluation of QAOA with the cost layer applied as one
/// diagonal.
///
/// The cost layer of [`build_qaoa`] multiplies `|x>` by `exp(-i gamma (c(x) -
/// offset))`; the offset only contributes a global phase, so the diagonal is
/// `exp(-i gamma c(x))` looked up per distinct objective value.
#[derive(Clone, Debug)]
pub struct QaoaEvaluator {
    n: usize,
    values: Vec<f64>,
    class: Vec<u32>,
}

impl QaoaEvaluator {
    pub fn new<W: Weight>(inst: &MaxCutInstance<W>) -> Result<Self> {
        let n = inst.num_vertices();
        if n > MAX_QUBITS {
            return Err(Error::QubitOverflow { requested: n, limit: MAX_QUBITS });
        }
        let edges: Vec<(usize, usize, f64)> = inst.edges().iter().map(|e| (e.u, e.v, e.w.as_f64())).collect();
        let linear: Vec<(usize, f64)> = inst
            .linear()
            .iter()
            .enumerate()
            .filter(|(_, h)| !h.is_zero())
            .map(|(v, h)| (v, h.as_f64()))
            .collect();
        let offset = inst.offset().as_f64();
        let cost: Vec<f64> = (0..1usize << n)
            .into_par_iter()
            .map(|x| {
                let mut c = offset;
                for &(u, v, w) in &edges {
                    if ((x >> u) ^ (x >> v)) & 1 == 1 {
                        c += w;
                    }
                }
                for &(v, h) in &linear {
                    if (x >> v) & 1 == 1 {
                        c += h;
                    }
                }
                c
            })
            .collect();
        let mut index: HashMap<u64, u32> = HashMap::new();
        let mut values = Vec::new();
        let class = cost
            .iter()
            .map(|&c| {
                *index.entry(c.to_bits()).or_insert_with(|| {
                    values.push(c);
                    (values.len() - 1) as u32
                })
            })
            .collect();
        Ok(Self { n, values, class })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Objective value of basis state `x`.
    pub fn cost(&self, x: usize) -> f64 {
        self.values[self.class[x] as usize]
    }

    /// Pre-measurement QAOA state.
    pub fn state<F: Real>(&self, params: &QaoaParams<F>) -> Result<StateVector<F>> {
        params.validate()?;
        let mut state = StateVector::<F>::uniform(self.n)?;
        for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
            let phases: Vec<Complex<F>> =
                self.values.iter().map(|&c| Complex::from_polar(F::one(), -gamma * F::of(c))).collect();
            state
                .amplitudes_mut()
                .par_iter_mut()
                .zip(self.class.par_iter())
                .for_each(|(a, &k)| *a = *a * phases[k as usize]);
            for q in 0..self.n {
                state.rx(q, F::of(2.0) * beta);
            }
        }
        Ok(state)
    }

    /// `sum_x |<x|psi>|^2 c(x)`.
    pub fn expectation<F: Real>(&self, params: &QaoaParams<F>) -> Result<f64> {
        let state = self.state(params)?;
        // Fixed chunking keeps the floating-point sum independent of scheduling.
        const CHUNK: usize = 1 << 12;
        let partial: Vec<f64> = state
            .amplitudes()
            .par_chunks(CHUNK)
            .zip(self.class.par_chunks(CHUNK))
            .map(|(amps, class)| {
                amps.iter().zip(class).map(|(a, &k)| a.norm_sqr().f64() * self.values[k as usize]).sum::<f64>()
            })
            .collect();
        Ok(partial.iter().sum())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TrainOptions {
    /// Objective evaluations; 0 returns the schedule unchanged.
    pub budget: usize,
    pub xtol: f64,
    pub initial_step: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { budget: 500, xtol: 1e-4, initial_step: 0.1 }
    }
}

#[derive(Clone, Debug)]
pub struct TrainResult<F> {
    pub params: QaoaParams<F>,
    pub initial_expectation: f64,
    pub final_expectation: f64,
    pub evaluations: usize,
}

/// Maximizes the noiseless expectation from `init_schedule(p, dt)`.
pub fn train<F: Real, W: Weight>(
    inst: &MaxCutInstance<W>,
    p: usize,
    dt: F,
    opts: &TrainOptions,
) -> Result<TrainResult<F>> {
    let init = init_schedule(p, dt)?;
    let eval = QaoaEvaluator::new(inst)?;
    let initial_expectation = eval.expectation(&init)?;
    if opts.budget == 0 {
        return Ok(TrainResult { params: init, initial_expectation, final_expectation: initial_expectation, evaluations: 0 });
    }
    let nm = NelderMeadOptions {
        max_evals: opts.budget,
        xtol: F::of(opts.xtol),
        ftol: F::of(1e-12),
        initial_step: F::of(opts.initial_step),
    };
    let mut failure = None;
    let best = nelder_mead(
        |x: &[F]| match QaoaParams::from_slice(x).and_then(|p| eval.expectation(&p)) {
            Ok(e) => F::of(-e),
            Err(err) => {
                failure.get_or_insert(err);
                F::infinity()
            }
        },
        &init.to_vec(),
        &nm,
    );
    if let Some(err) = failure {
        return Err(err);
    }
    let candidate = QaoaParams::from_slice(&best.x)?;
    let final_expectation = -best.value.f64();
    let (params, final_expectation) = if final_expectation >= initial_expectation {
        (candidate, final_expectation)
    } else {
        (init, initial_expectation)
    };
    Ok(TrainResult { params, initial_expectation, final_expectation, evaluations: best.evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::exact_distribution;
    use crate::{ExactInstance, Rational};
    use rand::seq::SliceRandom;
    use std::collections::BTreeMap;

    fn k2() -> ExactInstance {
        ExactInstance::unweighted(2, &[(0, 1)]).unwrap()
    }

    #[test]
    fn schedule_examples() {
        let s = init_schedule(2, 0.75f64).unwrap();
        assert_eq!(s.gammas, vec![0.1875, 0.5625]);
        assert_eq!(s.betas, vec![0.5625, 0.1875]);
        let s = init_schedule(1, 1.0f64).unwrap();
        assert_eq!((s.gammas[0], s.betas[0]), (0.5, 0.5));
        let s = init_schedule(3, 0.6f64).unwrap();
        for (got, want) in s.gammas.iter().zip([0.1, 0.3, 0.5]).chain(s.betas.iter().zip([0.5, 0.3, 0.1])) {
            assert!((got - want).abs() < 1e-15);
        }
        for p in 1..6 {
            let s = init_schedule(p, 0.9f64).unwrap();
            assert!(s.gammas.windows(2).all(|w| w[0] < w[1]));
            assert!(s.betas.windows(2).all(|w| w[0] > w[1]));
            assert!(s.gammas.iter().zip(&s.betas).all(|(g, b)| (g + b - 0.9).abs() < 1e-12));
        }
        assert!(init_schedule::<f64>(0, 1.0).is_err());
        assert!(init_schedule(2, 0.0f64).is_err());
    }

    #[test]
    fn params_json_and_validation() {
        let s = init_schedule(2, 0.75f64).unwrap();
        assert_eq!(QaoaParams::from_json(&s.to_json().unwrap()).unwrap(), s);
        assert!(QaoaParams::<f64>::from_json(r#"{"p":2,"gammas":[0.1],"betas":[0.1,0.2]}"#).is_err());
        assert!(QaoaParams::<f64>::from_slice(&[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn zero_angles_give_uniform() {
        let params = QaoaParams::<f64>::new(vec![0.0], vec![0.0]).unwrap();
        let c = build_qaoa(&k2(), &params, None).unwrap();
        let d = exact_distribution(&c, &BTreeMap::new(), None).unwrap();
        assert!(d.iter().all(|p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn gate_count_is_structural() {
        let inst = ExactInstance::with_terms(
            4,
            vec![(0, 1, Rational::from_integer(1)), (1, 2, Rational::new(1, 2)), (2, 3, Rational::from_integer(-2))],
            vec![Rational::from_integer(1), Rational::from_integer(0), Rational::from_integer(0), Rational::new(3, 2)],
            Rational::from_integer(0),
        )
        .unwrap();
        let c = build_qaoa(&inst, &init_schedule(2, 0.75f64).unwrap(), None).unwrap();
        assert_eq!(c.gate_count(), 4 + 2 * (3 + 2 + 4));
        assert_eq!(c.ops().len(), c.gate_count() + 1);
    }

    #[test]
    fn edge_order_invariance() {
        let g = crate::generate::generate_instance::<Rational>(9, 14, 2, 5).unwrap().instance;
        let params = QaoaParams::<f64>::new(vec![0.4, 0.9], vec![0.7, 0.2]).unwrap();
        let base = exact_distribution(&build_qaoa(&g, &params, None).unwrap(), &BTreeMap::new(), None).unwrap();
        let mut rng = crate::rng::stream_rng(3, 0);
        for _ in 0..2 {
            let mut order: Vec<usize> = (0..g.num_edges()).collect();
            order.shuffle(&mut rng);
            let c = build_qaoa(&g, &params, Some(&order)).unwrap();
            let d = exact_distribution(&c, &BTreeMap::new(), None).unwrap();
            let diff = base.iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff <= 1e-10, "{diff}");
        }
        assert!(build_qaoa(&g, &params, Some(&[0, 0])).is_err());
    }

    #[test]
    fn evaluator_matches_gate_level_simulation() {
        let inst = ExactInstance::with_terms(
            5,
            vec![
                (0, 1, Rational::from_integer(1)),
                (1, 2, Rational::new(-3, 2)),
                (2, 3, Rational::from_integer(2)),
                (3, 4, Rational::new(1, 3)),
                (0, 4, Rational::from_integer(1)),
            ],
            vec![Rational::new(1, 2), Rational::from_integer(0), Rational::from_integer(-1), Rational::from_integer(0), Rational::from_integer(0)],
            Rational::from_integer(3),
        )
        .unwrap();
        let params = QaoaParams::<f64>::new(vec![0.3, 1.1], vec![0.8, 0.25]).unwrap();
        let eval = QaoaEvaluator::new(&inst).unwrap();
        let fast: Vec<f64> = eval.state(&params).unwrap().probabilities();
        let slow = exact_distribution(&build_qaoa(&inst, &params, None).unwrap(), &BTreeMap::new(), None).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
        for x in 0..32u64 {
            assert!((eval.cost(x as usize) - inst.cut_value_f64(x)).abs() < 1e-12);
        }
        let via_circuit = crate::sim::expectation_of_objective(&build_qaoa(&inst, &params, None).unwrap(), &inst).unwrap();
        assert!((eval.expectation(&params).unwrap() - via_circuit).abs() < 1e-12);
    }

    /// Independent p = 1 oracle on K2: dense 4x4 operators.
    fn k2_expectation_dense(gamma: f64, beta: f64) -> f64 {
        type C = Complex<f64>;
        let mut psi = [C::new(0.5, 0.0); 4];
        // cost diag: c = x0 xor x1
        for (x, a) in psi.iter_mut().enumerate() {
            let c = ((x ^ (x >> 1)) & 1) as f64;
            *a *= C::from_polar(1.0, -gamma * c);
        }
        let rx = [[C::new(beta.cos(), 0.0), C::new(0.0, -beta.sin())], [C::new(0.0, -beta.sin()), C::new(beta.cos(), 0.0)]];
        // kron(rx, rx) as a 4x4 matrix, qubit 0 = low bit
        let mut out = [C::new(0.0, 0.0); 4];
        for (i, o) in out.iter_mut().enumerate() {
            for (j, a) in psi.iter().enumerate() {
                *o += rx[i & 1][j & 1] * rx[i >> 1][j >> 1] * a;
            }
        }
        out[1].norm_sqr() + out[2].norm_sqr()
    }

    #[test]
    fn k2_training_reaches_the_grid_optimum() {
        let steps = 200;
        let grid_best = (0..steps)
            .flat_map(|i| (0..steps).map(move |j| (i, j)))
            .map(|(i, j)| {
                k2_expectation_dense(std::f64::consts::PI * i as f64 / steps as f64, std::f64::consts::PI * j as f64 / steps as f64)
            })
            .fold(0.0, f64::max);
        assert!(grid_best >= 0.99);
        let trained = train::<f64, _>(&k2(), 1, 0.75, &TrainOptions::default()).unwrap();
        assert!(trained.final_expectation >= 0.99, "{}", trained.final_expectation);
        assert!(trained.final_expectation >= grid_best - 1e-3);
        let dense = k2_expectation_dense(trained.params.gammas[0], trained.params.betas[0]);
        assert!((dense - trained.final_expectation).abs() < 1e-12);
        let c = build_qaoa(&k2(), &trained.params, None).unwrap();
        let d = exact_distribution(&c, &BTreeMap::new(), None).unwrap();
        assert!(d[1] + d[2] >= 0.99);
    }

    #[test]
    fn training_is_monotone_and_budget_zero_is_identity() {
        let tri = ExactInstance::unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let r = train::<f64, _>(&tri, 2, 0.75, &TrainOptions::default()).unwrap();
        assert!(r.final_expectation >= r.initial_expectation);
        assert!(r.evaluations <= 500);
        let check = QaoaEvaluator::new(&tri).unwrap().expectation(&r.params).unwrap();
        assert!((check - r.final_expectation).abs() < 1e-12);

        let r0 = train::<f64, _>(&tri, 2, 0.75, &TrainOptions { budget: 0, ..Default::default() }).unwrap();
        assert_eq!(r0.params, init_schedule(2, 0.75f64).unwrap());
        assert_eq!(r0.evaluations, 0);
    }

    #[test]
    fn schedule_beats_random_guessing() {
        let g = crate::generate::generate_instance::<Rational>(10, 13, 2, 7).unwrap().instance;
        let e = QaoaEvaluator::new(&g).unwrap().expectation(&init_schedule(2, 0.75f64).unwrap()).unwrap();
        assert!(e > g.random_expectation().as_f64());
    }
}
