//! Exact fragment statistics of a noiseless cut plan.

use crate::error::{Error, Result};
use crate::rng::CdfSampler;
use crate::scalar::Real;
use crate::sim::{exact_branches, Basis, Circuit, PrepState};
use crate::wirecut::plan::{CutPlan, HARADA_TAG, PENG_TAG};

/// Largest shrunk instance accepted by [`exact_cut_distribution`].
pub const EXACT_CUT_MAX_VERTICES: usize = 16;

/// Joint probabilities `P(m, register)` laid out as `m * 2^width + register`.
#[derive(Clone, Debug)]
pub struct JointTable {
    pub width: usize,
    pub probs: Vec<f64>,
}

impl JointTable {
    fn of<F: Real>(circuit: &Circuit<F>, tag: &str) -> Result<Self> {
        let width = circuit.num_qubits();
        let mut probs = vec![0.0; 2 << width];
        for branch in exact_branches(circuit)? {
            let m = *branch
                .outcomes
                .get(tag)
                .ok_or_else(|| Error::Circuit(format!("fragment lacks measurement {tag:?}")))?;
            let base = (m as usize) << width;
            for (slot, p) in probs[base..base + (1 << width)].iter_mut().zip(&branch.weights) {
                *slot += p.f64();
            }
        }
        Ok(Self { width, probs })
    }

    pub fn split(&self, index: usize) -> (bool, u64) {
        (index >> self.width == 1, (index & ((1 << self.width) - 1)) as u64)
    }

    pub fn get(&self, m: bool, register: u64) -> f64 {
        self.probs[((m as usize) << self.width) | register as usize]
    }
}

/// `P(m1, register A)` per (Harada basis, Peng preparation) and
/// `P(m2, register B)` per (Harada preparation, Peng basis).
#[derive(Clone, Debug)]
pub struct FragmentTables {
    a: Vec<JointTable>,
    b: Vec<JointTable>,
}

impl FragmentTables {
    pub fn new<F: Real>(plan: &CutPlan<F>) -> Result<Self> {
        let mut a = Vec::with_capacity(18);
        for basis in Basis::ALL {
            for prep in PrepState::ALL {
                a.push(JointTable::of(plan.fragment_a(basis, prep), HARADA_TAG)?);
            }
        }
        let mut b = Vec::with_capacity(18);
        for prep in PrepState::ALL {
            for basis in Basis::ALL {
                b.push(JointTable::of(plan.fragment_b(prep, basis), PENG_TAG)?);
            }
        }
        Ok(Self { a, b })
    }

    pub fn a(&self, harada_basis: Basis, peng_prep: PrepState) -> &JointTable {
        &self.a[harada_basis.index() * 6 + peng_prep.index()]
    }

    pub fn b(&self, harada_prep: PrepState, peng_basis: Basis) -> &JointTable {
        &self.b[harada_prep.index() * 3 + peng_basis.index()]
    }

    /// Inverse-CDF samplers in the same layout.
    pub fn samplers(&self) -> (Vec<CdfSampler>, Vec<CdfSampler>) {
        let build = |tables: &[JointTable]| tables.iter().map(|t| CdfSampler::new(t.probs.iter().copied())).collect();
        (build(&self.a), build(&self.b))
    }
}

/// Exact outputs of the sampling protocol, indexed by shrunk bitstring.
#[derive(Clone, Debug)]
pub struct CutDistribution {
    /// Expectation of the signed estimator; equals the uncut distribution.
    pub signed: Vec<f64>,
    /// Probability that a shot emits each bitstring, signs ignored.
    pub raw: Vec<f64>,
}

/// Enumerates all term pairs and mid-circuit outcomes of a noiseless plan.
pub fn exact_cut_distribution<F: Real>(plan: &CutPlan<F>) -> Result<CutDistribution> {
    let n = plan.num_vertices();
    if n > EXACT_CUT_MAX_VERTICES {
        return Err(Error::QubitOverflow { requested: n, limit: EXACT_CUT_MAX_VERTICES });
    }
    let tables = FragmentTables::new(plan)?;
    let mut signed = vec![0.0; 1 << n];
    let mut raw = vec![0.0; 1 << n];
    let h_norm = crate::wirecut::qpd::one_norm(plan.harada_terms());
    let p_norm = crate::wirecut::qpd::one_norm(plan.peng_terms());
    let kappa = plan.kappa_f64();
    for h in plan.harada_terms() {
        for p in plan.peng_terms() {
            let q = h.probability(h_norm) * p.probability(p_norm);
            // Peng preparations do not depend on the outcome.
            let ta = tables.a(h.basis, p.prepared(false));
            for (ia, &pa) in ta.probs.iter().enumerate() {
                if pa == 0.0 {
                    continue;
                }
                let (m1, reg_a) = ta.split(ia);
                let tb = tables.b(h.prepared(m1), p.basis);
                for (ib, &pb) in tb.probs.iter().enumerate() {
                    if pb == 0.0 {
                        continue;
                    }
                    let (m2, reg_b) = tb.split(ib);
                    let x = plan.assemble(reg_a, reg_b) as usize;
                    let w = q * pa * pb;
                    raw[x] += w;
                    signed[x] += kappa * f64::from(h.shot_sign(m1) * p.shot_sign(m2)) * w;
                }
            }
        }
    }
    Ok(CutDistribution { signed, raw })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qaoa::{build_qaoa, QaoaParams};
    use crate::separator::SeparatorDecomposition;
    use crate::sim::exact_distribution;
    use crate::wirecut::plan::build_cut_plan;
    use crate::{ExactInstance, Rational};
    use std::collections::BTreeMap;

    fn check(inst: &ExactInstance, dec: &SeparatorDecomposition, params: &QaoaParams<f64>) {
        let plan = build_cut_plan(inst, dec, params).unwrap();
        let cut = exact_cut_distribution(&plan).unwrap();
        let uncut = exact_distribution(&build_qaoa(inst, params, None).unwrap(), &BTreeMap::new(), None).unwrap();
        let linf = cut.signed.iter().zip(&uncut).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(linf <= 1e-9, "{linf}");
        assert!((cut.raw.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (r, p) in cut.raw.iter().zip(&uncut) {
            assert!(*r >= p / 12.0 - 1e-9);
        }
    }

    #[test]
    fn path_with_linear_terms() {
        let inst = ExactInstance::with_terms(
            3,
            vec![(0, 1, Rational::from_integer(1)), (1, 2, Rational::new(-3, 2))],
            vec![Rational::new(1, 2), Rational::from_integer(2), Rational::from_integer(0)],
            Rational::from_integer(1),
        )
        .unwrap();
        let dec = SeparatorDecomposition { a: vec![0], b: vec![2], s: vec![1], balance_bound: 1 };
        check(&inst, &dec, &QaoaParams::new(vec![0.7, 1.3], vec![0.4, 0.9]).unwrap());
    }

    #[test]
    fn identity_wire_is_uniform() {
        let inst = ExactInstance::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let dec = SeparatorDecomposition { a: vec![0], b: vec![2], s: vec![1], balance_bound: 1 };
        let plan = build_cut_plan(&inst, &dec, &QaoaParams::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap()).unwrap();
        let cut = exact_cut_distribution(&plan).unwrap();
        assert!(cut.signed.iter().all(|p| (p - 0.125).abs() < 1e-12));
    }

    #[test]
    fn generated_instance() {
        let g = crate::generate::generate_instance::<Rational>(9, 13, 1, 11).unwrap();
        let dec = SeparatorDecomposition {
            a: g.community_a.clone(),
            b: g.community_b.clone(),
            s: g.separator.clone(),
            balance_bound: 9,
        };
        check(&g.instance, &dec, &QaoaParams::new(vec![0.35, 0.8], vec![0.6, 0.2]).unwrap());
    }
}
