//! Fragment circuits for one separator qubit cut once per QAOA layer.
//!
//! With the separator wire `s`, the three segments of `s` are:
//!
//! 1. `H`, layer-1 phases with A-neighbors (fragment A), ending in the
//!    Harada measurement;
//! 2. layer-1 phases with B-neighbors, `RX(2 beta_1)`, layer-2 phases with
//!    B-neighbors (fragment B), from the Harada preparation to the Peng
//!    measurement;
//! 3. layer-2 phases with A-neighbors, `RX(2 beta_2)`, final readout
//!    (fragment A again, after a reset to the Peng preparation).
//!
//! Linear terms on `s` commute with the phases and are applied in segments
//! 1 and 3.

use num_rational::Rational64;

use crate::error::{invalid, Error, Result};
use crate::graph::{short_digest, Bits, MaxCutInstance};
use crate::qaoa::QaoaParams;
use crate::scalar::{Real, Weight};
use crate::separator::{verify_separator, SeparatorDecomposition};
use crate::sim::{Basis, Circuit, PrepState};
use crate::wirecut::qpd::{harada_terms, kappa, peng_terms, QpdTerm};

pub const HARADA_TAG: &str = "m1";
pub const PENG_TAG: &str = "m2";
pub const REGISTER_A: &str = "a";
pub const REGISTER_B: &str = "b";

#[derive(Clone, Debug)]
pub struct CutPlan<F> {
    n: usize,
    s: usize,
    a: Vec<usize>,
    b: Vec<usize>,
    params: QaoaParams<F>,
    harada: Vec<QpdTerm>,
    peng: Vec<QpdTerm>,
    kappa: Rational64,
    /// Indexed by `harada basis * 6 + peng prep`.
    fragments_a: Vec<Circuit<F>>,
    /// Indexed by `harada prep * 3 + peng basis`.
    fragments_b: Vec<Circuit<F>>,
    digest: String,
}

/// Local gate list of one fragment: qubits are the side's vertices in
/// increasing order followed by `s`.
struct Side<F> {
    width: usize,
    /// `(local s-neighbor, phase weight)`.
    s_edges: Vec<(usize, F)>,
    inner_edges: Vec<(usize, usize, F)>,
    linear: Vec<(usize, F)>,
}

impl<F: Real> Side<F> {
    fn new<W: Weight>(inst: &MaxCutInstance<W>, s: usize, side: &[usize]) -> Self {
        let mut local = vec![usize::MAX; inst.num_vertices()];
        for (i, &v) in side.iter().enumerate() {
            local[v] = i;
        }
        local[s] = side.len();
        let mut s_edges = Vec::new();
        let mut inner_edges = Vec::new();
        for e in inst.edges() {
            let (lu, lv) = (local[e.u], local[e.v]);
            if lu == usize::MAX || lv == usize::MAX {
                continue;
            }
            let w = F::of(e.w.as_f64());
            if e.u == s {
                s_edges.push((lv, w));
            } else if e.v == s {
                s_edges.push((lu, w));
            } else {
                inner_edges.push((lu, lv, w));
            }
        }
        let linear = side
            .iter()
            .enumerate()
            .filter(|(_, &v)| !inst.linear()[v].is_zero())
            .map(|(i, &v)| (i, F::of(inst.linear()[v].as_f64())))
            .collect();
        Self { width: side.len(), s_edges, inner_edges, linear }
    }

    fn s(&self) -> usize {
        self.width
    }

    fn s_phases(&self, c: &mut Circuit<F>, gamma: F) -> Result<()> {
        for &(q, w) in &self.s_edges {
            c.zz_phase(q.min(self.s()), q.max(self.s()), gamma * w)?;
        }
        Ok(())
    }

    fn inner_cost(&self, c: &mut Circuit<F>, gamma: F) -> Result<()> {
        for &(u, v, w) in &self.inner_edges {
            c.zz_phase(u, v, gamma * w)?;
        }
        for &(q, h) in &self.linear {
            c.rz(q, gamma * h)?;
        }
        Ok(())
    }

    fn mixer(&self, c: &mut Circuit<F>, beta: F) -> Result<()> {
        for q in 0..self.width {
            c.rx(q, F::of(2.0) * beta)?;
        }
        Ok(())
    }
}

impl<F: Real> CutPlan<F> {
    pub fn build<W: Weight>(
        inst: &MaxCutInstance<W>,
        dec: &SeparatorDecomposition,
        params: &QaoaParams<F>,
    ) -> Result<Self> {
        params.validate()?;
        if params.p != 2 {
            return Err(invalid(format!("wire cutting needs p = 2, got p = {}", params.p)));
        }
        if dec.s.len() != 1 {
            return Err(invalid(format!("wire cutting needs a single separator vertex, got {}", dec.s.len())));
        }
        if dec.a.is_empty() || dec.b.is_empty() || !verify_separator(inst, dec) {
            return Err(invalid("decomposition is not a separator of the instance"));
        }
        let s = dec.s[0];
        let mut a = dec.a.clone();
        let mut b = dec.b.clone();
        a.sort_unstable();
        b.sort_unstable();
        let side_a = Side::<F>::new(inst, s, &a);
        let side_b = Side::<F>::new(inst, s, &b);
        if side_a.s_edges.is_empty() || side_b.s_edges.is_empty() {
            return Err(invalid(format!("separator vertex {s} has no neighbor on one side")));
        }
        let h_s = F::of(inst.linear()[s].as_f64());
        let (g, bt) = (&params.gammas, &params.betas);

        let fragment_a = |basis: Basis, prep: PrepState| -> Result<Circuit<F>> {
            let mut c = Circuit::new(side_a.width + 1)?;
            let s = side_a.s();
            for q in 0..=side_a.width {
                c.h(q)?;
            }
            side_a.s_phases(&mut c, g[0])?;
            if !h_s.is_zero() {
                c.rz(s, g[0] * h_s)?;
            }
            side_a.inner_cost(&mut c, g[0])?;
            side_a.mixer(&mut c, bt[0])?;
            side_a.inner_cost(&mut c, g[1])?;
            c.measure(s, basis, HARADA_TAG)?;
            c.reset_to(s, prep)?;
            side_a.s_phases(&mut c, g[1])?;
            if !h_s.is_zero() {
                c.rz(s, g[1] * h_s)?;
            }
            c.rx(s, F::of(2.0) * bt[1])?;
            side_a.mixer(&mut c, bt[1])?;
            c.measure_all(REGISTER_A)?;
            Ok(c)
        };
        let fragment_b = |prep: PrepState, basis: Basis| -> Result<Circuit<F>> {
            let mut c = Circuit::new(side_b.width + 1)?;
            let s = side_b.s();
            c.reset_to(s, prep)?;
            for q in 0..side_b.width {
                c.h(q)?;
            }
            side_b.s_phases(&mut c, g[0])?;
            side_b.inner_cost(&mut c, g[0])?;
            c.rx(s, F::of(2.0) * bt[0])?;
            side_b.mixer(&mut c, bt[0])?;
            side_b.s_phases(&mut c, g[1])?;
            side_b.inner_cost(&mut c, g[1])?;
            side_b.mixer(&mut c, bt[1])?;
            c.measure(s, basis, PENG_TAG)?;
            c.measure_all(REGISTER_B)?;
            Ok(c)
        };
        let mut fragments_a = Vec::with_capacity(18);
        for basis in Basis::ALL {
            for prep in PrepState::ALL {
                fragments_a.push(fragment_a(basis, prep)?);
            }
        }
        let mut fragments_b = Vec::with_capacity(18);
        for prep in PrepState::ALL {
            for basis in Basis::ALL {
                fragments_b.push(fragment_b(prep, basis)?);
            }
        }
        let digest = short_digest(
            format!("{}|{s}|{:?}|{:?}|{:?}|{:?}", inst.to_text(), a, b, params.gammas, params.betas).as_bytes(),
        );
        Ok(Self {
            n: inst.num_vertices(),
            s,
            a,
            b,
            params: params.clone(),
            harada: harada_terms(),
            peng: peng_terms(),
            kappa: kappa(),
            fragments_a,
            fragments_b,
            digest,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn separator(&self) -> usize {
        self.s
    }

    pub fn side_a(&self) -> &[usize] {
        &self.a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.b
    }

    pub fn params(&self) -> &QaoaParams<F> {
        &self.params
    }

    pub fn harada_terms(&self) -> &[QpdTerm] {
        &self.harada
    }

    pub fn peng_terms(&self) -> &[QpdTerm] {
        &self.peng
    }

    pub fn kappa(&self) -> Rational64 {
        self.kappa
    }

    pub fn kappa_f64(&self) -> f64 {
        *self.kappa.numer() as f64 / *self.kappa.denom() as f64
    }

    /// Short hash of instance, partition and angles.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn fragment_a_qubits(&self) -> usize {
        self.a.len() + 1
    }

    pub fn fragment_b_qubits(&self) -> usize {
        self.b.len() + 1
    }

    /// Fragment A for a Harada measurement basis and a Peng preparation.
    pub fn fragment_a(&self, harada_basis: Basis, peng_prep: PrepState) -> &Circuit<F> {
        &self.fragments_a[harada_basis.index() * 6 + peng_prep.index()]
    }

    /// Fragment B for a Harada preparation and a Peng measurement basis.
    pub fn fragment_b(&self, harada_prep: PrepState, peng_basis: Basis) -> &Circuit<F> {
        &self.fragments_b[harada_prep.index() * 3 + peng_basis.index()]
    }

    /// Full bitstring from the two fragment registers; `s` comes from A.
    pub fn assemble(&self, register_a: u64, register_b: u64) -> Bits {
        let mut x: Bits = 0;
        for (i, &v) in self.a.iter().enumerate() {
            x |= ((register_a >> i) & 1) << v;
        }
        x |= ((register_a >> self.a.len()) & 1) << self.s;
        for (j, &v) in self.b.iter().enumerate() {
            x |= ((register_b >> j) & 1) << v;
        }
        x
    }
}

/// Builds the plan or reports why the decomposition cannot be cut.
pub fn build_cut_plan<F: Real, W: Weight>(
    inst: &MaxCutInstance<W>,
    dec: &SeparatorDecomposition,
    params: &QaoaParams<F>,
) -> Result<CutPlan<F>> {
    CutPlan::build(inst, dec, params).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::InvalidArgument(format!("cut plan: {msg}")),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qaoa::init_schedule;
    use crate::ExactInstance;

    fn dec(a: &[usize], s: &[usize], b: &[usize]) -> SeparatorDecomposition {
        SeparatorDecomposition { a: a.to_vec(), b: b.to_vec(), s: s.to_vec(), balance_bound: a.len().max(b.len()) }
    }

    #[test]
    fn path_fragments_have_two_qubits() {
        let path = ExactInstance::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let plan = build_cut_plan(&path, &dec(&[0], &[1], &[2]), &init_schedule(2, 0.75f64).unwrap()).unwrap();
        assert_eq!((plan.fragment_a_qubits(), plan.fragment_b_qubits()), (2, 2));
        assert_eq!(plan.kappa(), Rational64::from_integer(12));
        assert_eq!(plan.assemble(0b10, 0b1), 0b110);
        assert_eq!(plan.assemble(0b01, 0b0), 0b001);
    }

    #[test]
    fn fragment_widths_follow_the_partition() {
        let n = 22;
        let s = 10;
        let mut edges: Vec<(usize, usize)> = (0..9).map(|v| (v, v + 1)).collect();
        edges.extend((11..21).map(|v| (v, v + 1)));
        edges.extend([(9, s), (s, 11), (0, s)]);
        let inst = ExactInstance::unweighted(n, &edges).unwrap();
        let d = dec(&(0..10).collect::<Vec<_>>(), &[s], &(11..22).collect::<Vec<_>>());
        let plan = build_cut_plan(&inst, &d, &init_schedule(2, 0.75f64).unwrap()).unwrap();
        assert_eq!((plan.fragment_a_qubits(), plan.fragment_b_qubits()), (11, 12));
    }

    #[test]
    fn rejects_unsupported_plans() {
        let path = ExactInstance::unweighted(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let p2 = init_schedule(2, 0.75f64).unwrap();
        // s = 2 has no neighbor in A = {0}
        assert!(build_cut_plan(&path, &dec(&[0], &[1, 2], &[3]), &p2).is_err());
        let tri_path = ExactInstance::unweighted(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(build_cut_plan(&tri_path, &dec(&[0, 1], &[2], &[3]), &init_schedule(1, 0.75f64).unwrap()).is_err());
        // degenerate: s = 0 touches only B
        let star = ExactInstance::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(build_cut_plan(&star, &dec(&[2], &[0], &[1]), &p2).is_err());
        // not a separator
        let k3 = ExactInstance::unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(build_cut_plan(&k3, &dec(&[0], &[1], &[2]), &p2).is_err());
    }

    #[test]
    fn gates_are_split_without_loss() {
        let inst = crate::generate::generate_instance::<crate::Rational>(8, 11, 1, 3).unwrap();
        let d = dec(&inst.community_a, &inst.separator, &inst.community_b);
        let params = init_schedule(2, 0.75f64).unwrap();
        let plan = build_cut_plan(&inst.instance, &d, &params).unwrap();
        let uncut = crate::qaoa::build_qaoa(&inst.instance, &params, None).unwrap();
        let frag = plan.fragment_a(Basis::X, PrepState::YPlus).gate_count()
            + plan.fragment_b(PrepState::Z1, Basis::Y).gate_count();
        assert_eq!(frag, uncut.gate_count());
    }
}
