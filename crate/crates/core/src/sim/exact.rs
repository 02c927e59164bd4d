//! Exact (sampling-free) output distributions.

use std::collections::BTreeMap;

use rand::rngs::mock::StepRng;

use crate::error::{invalid, Error, Result};
use crate::graph::MaxCutInstance;
use crate::scalar::{Real, Weight};
use crate::sim::circuit::{Basis, Circuit, Op};
use crate::sim::noise::NoiseModel;
use crate::sim::run::{apply_gate, WireTracker};
use crate::sim::state::StateVector;

/// Mid-circuit measurements enumerated by [`exact_distribution`].
pub const MAX_BRANCH_POINTS: usize = 2;

/// Final-register distribution of a noiseless circuit ending in `MeasureAll`,
/// indexed by bitstring (bit `q` = qubit `q`).
///
/// Mid-circuit outcomes listed in `conditioning` are fixed and the result is
/// renormalized on that event; the others are marginalized.
pub fn exact_distribution<F: Real>(
    circuit: &Circuit<F>,
    conditioning: &BTreeMap<String, bool>,
    noise: Option<&NoiseModel>,
) -> Result<Vec<F>> {
    if noise.is_some_and(|nm| !nm.is_noiseless()) {
        return Err(invalid("exact distributions are only defined without noise"));
    }
    let mut acc = vec![F::zero(); 1 << circuit.num_qubits()];
    for branch in exact_branches(circuit)? {
        if conditioning.iter().any(|(tag, v)| branch.outcomes.get(tag).is_some_and(|o| o != v)) {
            continue;
        }
        for (slot, p) in acc.iter_mut().zip(&branch.weights) {
            *slot = *slot + *p;
        }
    }
    let total: F = acc.iter().copied().sum();
    if total <= F::zero() {
        return Err(invalid("conditioning event has zero probability"));
    }
    if !conditioning.is_empty() {
        acc.iter_mut().for_each(|p| *p = *p / total);
    }
    Ok(acc)
}

/// One assignment of mid-circuit outcomes with the joint probabilities
/// `P(outcomes, register = x)`.
#[derive(Clone, Debug)]
pub struct Branch<F> {
    pub outcomes: BTreeMap<String, bool>,
    pub weights: Vec<F>,
}

impl<F: Real> Branch<F> {
    pub fn probability(&self) -> F {
        self.weights.iter().copied().sum()
    }
}

/// Enumerates every nonzero-probability assignment of the mid-circuit
/// measurements of a noiseless circuit ending in `MeasureAll`.
pub fn exact_branches<F: Real>(circuit: &Circuit<F>) -> Result<Vec<Branch<F>>> {
    if circuit.final_register().is_none() {
        return Err(Error::Circuit("circuit must end with MeasureAll".into()));
    }
    if circuit.mid_circuit_measurements() > MAX_BRANCH_POINTS {
        return Err(invalid(format!(
            "{} mid-circuit measurements exceed the branching limit of {MAX_BRANCH_POINTS}",
            circuit.mid_circuit_measurements()
        )));
    }
    let n = circuit.num_qubits();
    let mut out = Vec::new();
    let state = StateVector::<F>::zero(n)?;
    walk(circuit.ops(), state, WireTracker::new(n), F::one(), BTreeMap::new(), &mut out)?;
    Ok(out)
}

fn walk<F: Real>(
    ops: &[Op<F>],
    mut state: StateVector<F>,
    mut wires: WireTracker<F>,
    weight: F,
    outcomes: BTreeMap<String, bool>,
    out: &mut Vec<Branch<F>>,
) -> Result<()> {
    // Never consulted: no noise is applied on this path.
    let mut rng = StepRng::new(0, 0);
    for (k, op) in ops.iter().enumerate() {
        match op {
            Op::MeasureAll(_) => break,
            Op::ResetTo(q, target) => wires.reset(&mut state, *q, *target)?,
            Op::MeasureZ(q, tag) | Op::MeasureBasis(q, _, tag) => {
                let basis = match op {
                    Op::MeasureBasis(_, b, _) => *b,
                    _ => Basis::Z,
                };
                for outcome in [false, true] {
                    let p = state.outcome_probability(*q, basis, outcome);
                    if p <= F::zero() {
                        continue;
                    }
                    let mut branch = state.clone();
                    branch.project(*q, basis, outcome)?;
                    let mut branch_wires = wires.clone();
                    branch_wires.measured(*q, basis, outcome);
                    let mut seen = outcomes.clone();
                    seen.insert(tag.clone(), outcome);
                    walk(&ops[k + 1..], branch, branch_wires, weight * p, seen, out)?;
                }
                return Ok(());
            }
            gate => {
                match gate {
                    Op::ZzPhase(a, b, _) => {
                        wires.touch(*a);
                        wires.touch(*b);
                    }
                    Op::H(q) | Op::Rx(q, _) | Op::Rz(q, _) => wires.touch(*q),
                    _ => {}
                }
                apply_gate(&mut state, gate, None, &mut rng);
            }
        }
    }
    let weights = state.amplitudes().iter().map(|a| weight * a.norm_sqr()).collect();
    out.push(Branch { outcomes, weights });
    Ok(())
}

/// `sum_x p(x) c(x)` over the exact output distribution of `circuit`.
pub fn expectation_of_objective<F: Real, W: Weight>(
    circuit: &Circuit<F>,
    inst: &MaxCutInstance<W>,
) -> Result<f64> {
    if circuit.num_qubits() != inst.num_vertices() {
        return Err(Error::LengthMismatch { expected: inst.num_vertices(), actual: circuit.num_qubits() });
    }
    let dist = exact_distribution(circuit, &BTreeMap::new(), None)?;
    Ok(dist.iter().enumerate().map(|(x, p)| p.f64() * inst.cut_value_f64(x as u64)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::circuit::PrepState;
    use crate::ExactInstance;

    #[test]
    fn hadamard_and_empty_circuits() {
        let mut c = Circuit::<f64>::new(1).unwrap();
        c.h(0).unwrap().measure_all("m").unwrap();
        let d = exact_distribution(&c, &BTreeMap::new(), None).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-15 && (d[1] - 0.5).abs() < 1e-15);

        let mut empty = Circuit::<f64>::new(2).unwrap();
        empty.measure_all("m").unwrap();
        assert_eq!(exact_distribution(&empty, &BTreeMap::new(), None).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn conditioning_and_marginalizing() {
        // Bell-like correlation through a mid-circuit X measurement.
        let mut c = Circuit::<f64>::new(2).unwrap();
        c.h(0).unwrap().h(1).unwrap().zz_phase(0, 1, std::f64::consts::FRAC_PI_2).unwrap();
        c.measure(0, Basis::X, "m").unwrap().reset_to(0, PrepState::Z1).unwrap();
        c.h(1).unwrap().measure_all("all").unwrap();
        let marginal = exact_distribution(&c, &BTreeMap::new(), None).unwrap();
        assert!((marginal.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let c0 = exact_distribution(&c, &BTreeMap::from([("m".to_string(), false)]), None).unwrap();
        let c1 = exact_distribution(&c, &BTreeMap::from([("m".to_string(), true)]), None).unwrap();
        for d in [&c0, &c1] {
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            // qubit 0 was reset to |1>
            assert!(d[0] + d[2] < 1e-12);
        }
        let mut s = StateVector::<f64>::uniform(2).unwrap();
        s.zz_phase(0, 1, std::f64::consts::FRAC_PI_2);
        let p0 = s.outcome_probability(0, Basis::X, false);
        for i in 0..4 {
            assert!((marginal[i] - (p0 * c0[i] + (1.0 - p0) * c1[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_noise_and_deep_branching() {
        let mut c = Circuit::<f64>::new(3).unwrap();
        c.measure_z(0, "a").unwrap().measure_z(1, "b").unwrap().measure_z(2, "c").unwrap().measure_all("m").unwrap();
        assert!(exact_distribution(&c, &BTreeMap::new(), None).is_err());
        let mut ok = Circuit::<f64>::new(1).unwrap();
        ok.measure_all("m").unwrap();
        assert!(exact_distribution(&ok, &BTreeMap::new(), Some(&NoiseModel::default())).is_err());
        assert!(exact_distribution(&ok, &BTreeMap::new(), Some(&NoiseModel::noiseless())).is_ok());
    }

    #[test]
    fn branches_partition_the_marginal() {
        let mut c = Circuit::<f64>::new(2).unwrap();
        c.h(0).unwrap().rx(1, 0.7).unwrap().zz_phase(0, 1, 0.4).unwrap();
        c.measure(0, Basis::Y, "a").unwrap().reset_to(0, PrepState::XMinus).unwrap();
        c.rx(0, 0.3).unwrap().zz_phase(0, 1, 1.1).unwrap().measure(1, Basis::X, "b").unwrap();
        c.measure_all("m").unwrap();
        let branches = exact_branches(&c).unwrap();
        assert_eq!(branches.len(), 4);
        let total: f64 = branches.iter().map(|b| b.probability()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let marginal = exact_distribution(&c, &BTreeMap::new(), None).unwrap();
        for (x, p) in marginal.iter().enumerate() {
            let sum: f64 = branches.iter().map(|b| b.weights[x]).sum();
            assert!((sum - p).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_superposition_expectation_is_half_weight() {
        let inst = ExactInstance::new(
            3,
            vec![(0, 1, crate::Rational::from_integer(1)), (1, 2, crate::Rational::new(3, 2))],
        )
        .unwrap();
        let mut c = Circuit::<f64>::new(3).unwrap();
        for q in 0..3 {
            c.h(q).unwrap();
        }
        c.measure_all("m").unwrap();
        let e = expectation_of_objective(&c, &inst).unwrap();
        assert!((e - 1.25).abs() < 1e-12);

        let k2 = ExactInstance::unweighted(2, &[(0, 1)]).unwrap();
        let mut c2 = Circuit::<f64>::new(2).unwrap();
        c2.h(0).unwrap().h(1).unwrap().measure_all("m").unwrap();
        assert!((expectation_of_objective(&c2, &k2).unwrap() - 0.5).abs() < 1e-12);
        assert!(expectation_of_objective(&c, &k2).is_err());
    }
}
