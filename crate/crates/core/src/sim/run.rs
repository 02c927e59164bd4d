//! Shot execution.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, CdfSampler};
use crate::scalar::Real;
use crate::sim::circuit::{Basis, Circuit, Op, PrepState};
use crate::sim::noise::NoiseModel;
use crate::sim::state::{prep_vector, Qubit, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Bit(bool),
    /// Full register, bit `q` = qubit `q`.
    Register(u64),
}

/// Reported outcomes of one shot, by measurement tag.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShotResult {
    pub outcomes: BTreeMap<String, Outcome>,
}

impl ShotResult {
    pub fn bit(&self, tag: &str) -> Option<bool> {
        match self.outcomes.get(tag) {
            Some(Outcome::Bit(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn register(&self, tag: &str) -> Option<u64> {
        match self.outcomes.get(tag) {
            Some(Outcome::Register(r)) => Some(*r),
            _ => None,
        }
    }
}

/// Product-state knowledge per wire, needed to execute `ResetTo`.
#[derive(Clone)]
pub(crate) struct WireTracker<F> {
    known: Vec<Option<Qubit<F>>>,
}

impl<F: Real> WireTracker<F> {
    pub(crate) fn new(n: usize) -> Self {
        Self { known: vec![Some(prep_vector(PrepState::Z0)); n] }
    }

    pub(crate) fn touch(&mut self, q: usize) {
        self.known[q] = None;
    }

    pub(crate) fn measured(&mut self, q: usize, basis: Basis, outcome: bool) {
        self.known[q] = Some(prep_vector(basis.eigenstate(outcome)));
    }

    pub(crate) fn reset(&mut self, state: &mut StateVector<F>, q: usize, target: PrepState) -> Result<()> {
        let current = self.known[q]
            .ok_or_else(|| Error::Circuit(format!("ResetTo on qubit {q} without a preceding measurement")))?;
        let target_vec = prep_vector(target);
        state.replace_qubit(q, &current, &target_vec);
        self.known[q] = Some(target_vec);
        Ok(())
    }
}

/// Applies a unitary gate, followed by sampled Pauli noise when `noise` is given.
pub(crate) fn apply_gate<F: Real, R: Rng + ?Sized>(
    state: &mut StateVector<F>,
    op: &Op<F>,
    noise: Option<&NoiseModel>,
    rng: &mut R,
) {
    match *op {
        Op::H(q) => state.h(q),
        Op::Rx(q, t) => state.rx(q, t),
        Op::Rz(q, t) => state.rz(q, t),
        Op::ZzPhase(a, b, p) => state.zz_phase(a, b, p),
        _ => unreachable!("not a gate"),
    }
    if let Some(noise) = noise {
        match *op {
            Op::ZzPhase(a, b, _) => noise.after_two_qubit_gate(state, a, b, rng),
            Op::H(q) | Op::Rx(q, _) | Op::Rz(q, _) => noise.after_one_qubit_gate(state, q, rng),
            _ => {}
        }
    }
}

fn sample_index<F: Real, R: Rng + ?Sized>(state: &StateVector<F>, rng: &mut R) -> usize {
    let u = rng.gen::<f64>();
    let mut acc = 0.0;
    let amps = state.amplitudes();
    for (i, a) in amps.iter().enumerate() {
        acc += a.norm_sqr().f64();
        if u < acc {
            return i;
        }
    }
    // Rounding: fall back to the last index with nonzero weight.
    amps.iter().rposition(|a| a.norm_sqr() > F::zero()).unwrap_or(0)
}

fn measure_single<F: Real, R: Rng + ?Sized>(
    state: &mut StateVector<F>,
    q: usize,
    basis: Basis,
    rng: &mut R,
) -> Result<bool> {
    let p1 = state.outcome_probability(q, basis, true).f64();
    let outcome = rng.gen::<f64>() < p1;
    state.project(q, basis, outcome)?;
    Ok(outcome)
}

/// Executes one shot on `|0...0>`.
///
/// Single-qubit measurements collapse the state onto the measured
/// eigenstate; `MeasureAll` samples the full register and collapses onto
/// it. Noise, when given, inserts Pauli errors after gates and flips reported
/// bits. A noise model with all probabilities zero draws no random numbers,
/// so it reproduces the noiseless shot exactly.
pub fn run_shot<F: Real, R: Rng + ?Sized>(
    circuit: &Circuit<F>,
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> Result<ShotResult> {
    let n = circuit.num_qubits();
    let mut state = StateVector::<F>::zero(n)?;
    let mut wires = WireTracker::new(n);
    let mut result = ShotResult::default();
    for op in circuit.ops() {
        match op {
            Op::H(q) | Op::Rx(q, _) | Op::Rz(q, _) => {
                wires.touch(*q);
                apply_gate(&mut state, op, noise, rng);
            }
            Op::ZzPhase(a, b, _) => {
                wires.touch(*a);
                wires.touch(*b);
                apply_gate(&mut state, op, noise, rng);
            }
            Op::MeasureZ(q, tag) | Op::MeasureBasis(q, _, tag) => {
                let basis = match op {
                    Op::MeasureBasis(_, b, _) => *b,
                    _ => Basis::Z,
                };
                let outcome = measure_single(&mut state, *q, basis, rng)?;
                wires.measured(*q, basis, outcome);
                let reported = noise.map_or(outcome, |nm| nm.readout(outcome, rng));
                result.outcomes.insert(tag.clone(), Outcome::Bit(reported));
            }
            Op::ResetTo(q, target) => wires.reset(&mut state, *q, *target)?,
            Op::MeasureAll(tag) => {
                let idx = sample_index(&state, rng);
                state.collapse_to(idx);
                for q in 0..n {
                    wires.measured(q, Basis::Z, (idx >> q) & 1 == 1);
                }
                let reported = noise.map_or(idx as u64, |nm| nm.readout_register(idx as u64, n, rng));
                result.outcomes.insert(tag.clone(), Outcome::Register(reported));
            }
        }
    }
    Ok(result)
}

/// Runs `shots` shots; shot `k` uses stream `k` of `master_seed`.
pub fn run_shots<F: Real>(
    circuit: &Circuit<F>,
    noise: Option<&NoiseModel>,
    master_seed: u64,
    shots: usize,
) -> Result<Vec<ShotResult>> {
    (0..shots)
        .into_par_iter()
        .map(|k| run_shot(circuit, noise, &mut stream_rng(master_seed, k as u64)))
        .collect()
}

/// Applies every op of a measurement-free prefix and returns the state.
pub fn final_state<F: Real, R: Rng + ?Sized>(
    circuit: &Circuit<F>,
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> Result<StateVector<F>> {
    let mut state = StateVector::<F>::zero(circuit.num_qubits())?;
    for op in circuit.ops() {
        match op {
            op if op.is_gate() => apply_gate(&mut state, op, noise, rng),
            Op::MeasureAll(_) => break,
            _ => return Err(Error::Circuit("expected a circuit without mid-circuit operations".into())),
        }
    }
    Ok(state)
}

/// Samples the final register of a circuit whose only measurement is a
/// trailing `MeasureAll`.
///
/// Noiseless: one statevector, `shots` draws from stream 0. Noisy: one
/// gate-noise trajectory per `reuse` draws (trajectory `t` on stream `t`),
/// with independent readout flips per draw. Gate-noise randomness is shared
/// within a trajectory, which approximates independent shots.
pub fn sample_register<F: Real>(
    circuit: &Circuit<F>,
    noise: Option<&NoiseModel>,
    master_seed: u64,
    shots: usize,
    reuse: usize,
) -> Result<Vec<u64>> {
    if circuit.final_register().is_none() || circuit.mid_circuit_measurements() > 0 {
        return Err(Error::Circuit("sample_register needs a single trailing MeasureAll".into()));
    }
    let n = circuit.num_qubits();
    let reuse = reuse.max(1);
    let noise = noise.filter(|nm| !nm.is_noiseless());
    let Some(noise) = noise else {
        let mut rng = stream_rng(master_seed, 0);
        let state = final_state(circuit, None, &mut rng)?;
        let sampler = CdfSampler::new(state.amplitudes().iter().map(|a| a.norm_sqr().f64()));
        return Ok((0..shots).map(|_| sampler.sample(&mut rng) as u64).collect());
    };
    let trajectories = shots.div_ceil(reuse);
    let chunks: Vec<Vec<u64>> = (0..trajectories)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(master_seed, t as u64);
            let state = final_state(circuit, Some(noise), &mut rng)?;
            let sampler = CdfSampler::new(state.amplitudes().iter().map(|a| a.norm_sqr().f64()));
            let draws = reuse.min(shots - t * reuse);
            Ok((0..draws)
                .map(|_| {
                    let idx = sampler.sample(&mut rng) as u64;
                    noise.readout_register(idx, n, &mut rng)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}
