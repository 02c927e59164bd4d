use std::io::Write;
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sim::circuit::{Basis, PrepState};

/// Memory bound on simulated width.
pub const MAX_QUBITS: usize = 26;

pub type Amplitude<F> = Complex<F>;
pub type Qubit<F> = [Complex<F>; 2];
pub type Matrix2<F> = [[Complex<F>; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Amplitude vector; index bit `q` is the value of qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<F> {
    num_qubits: usize,
    amps: Vec<Complex<F>>,
}

pub fn prep_vector<F: Real>(state: PrepState) -> Qubit<F> {
    let h = F::FRAC_1_SQRT_2();
    let z = F::zero();
    let one = Complex::new(F::one(), z);
    let zero = Complex::new(z, z);
    match state {
        PrepState::Z0 => [one, zero],
        PrepState::Z1 => [zero, one],
        PrepState::XPlus => [Complex::new(h, z), Complex::new(h, z)],
        PrepState::XMinus => [Complex::new(h, z), Complex::new(-h, z)],
        PrepState::YPlus => [Complex::new(h, z), Complex::new(z, h)],
        PrepState::YMinus => [Complex::new(h, z), Complex::new(z, -h)],
    }
}

impl<F: Real> StateVector<F> {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(Error::QubitOverflow { requested: num_qubits, limit: MAX_QUBITS });
        }
        let mut amps = vec![Complex::new(F::zero(), F::zero()); 1 << num_qubits];
        amps[0] = Complex::new(F::one(), F::zero());
        Ok(Self { num_qubits, amps })
    }

    /// Uniform superposition, i.e. `H` on every qubit of `|0...0>`.
    pub fn uniform(num_qubits: usize) -> Result<Self> {
        let mut state = Self::zero(num_qubits)?;
        let a = F::one() / F::of((1u64 << num_qubits) as f64).sqrt();
        state.amps.fill(Complex::new(a, F::zero()));
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<F>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<F>] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> F {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<F> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Calls `f(i0, i1)` for every index pair differing only in bit `q`.
    fn for_pairs(&mut self, q: usize, mut f: impl FnMut(&mut Complex<F>, &mut Complex<F>)) {
        let stride = 1usize << q;
        for block in self.amps.chunks_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a0, a1);
            }
        }
    }

    pub fn apply_matrix(&mut self, q: usize, m: &Matrix2<F>) {
        let m = *m;
        self.for_pairs(q, |a0, a1| {
            let (x, y) = (*a0, *a1);
            *a0 = m[0][0] * x + m[0][1] * y;
            *a1 = m[1][0] * x + m[1][1] * y;
        });
    }

    pub fn h(&mut self, q: usize) {
        let s = F::FRAC_1_SQRT_2();
        self.for_pairs(q, |a0, a1| {
            let (x, y) = (*a0, *a1);
            *a0 = (x + y).scale(s);
            *a1 = (x - y).scale(s);
        });
    }

    /// `exp(-i theta X / 2)`.
    pub fn rx(&mut self, q: usize, theta: F) {
        let half = theta / F::of(2.0);
        let c = half.cos();
        let ms = Complex::new(F::zero(), -half.sin());
        self.for_pairs(q, |a0, a1| {
            let (x, y) = (*a0, *a1);
            *a0 = x.scale(c) + ms * y;
            *a1 = ms * x + y.scale(c);
        });
    }

    /// Multiplies the `|1>` component of `q` by `exp(-i theta)`.
    pub fn rz(&mut self, q: usize, theta: F) {
        let phase = Complex::from_polar(F::one(), -theta);
        self.for_pairs(q, |_, a1| *a1 = *a1 * phase);
    }

    /// Multiplies basis states with `x_a != x_b` by `exp(-i phi)`.
    pub fn zz_phase(&mut self, a: usize, b: usize, phi: F) {
        let phase = Complex::from_polar(F::one(), -phi);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if ((i >> a) ^ (i >> b)) & 1 == 1 {
                *amp = *amp * phase;
            }
        }
    }

    pub fn pauli(&mut self, q: usize, p: Pauli) {
        let i = Complex::new(F::zero(), F::one());
        match p {
            Pauli::I => {}
            Pauli::X => self.for_pairs(q, std::mem::swap),
            Pauli::Y => self.for_pairs(q, |a0, a1| {
                let (x, y) = (*a0, *a1);
                *a0 = -i * y;
                *a1 = i * x;
            }),
            Pauli::Z => self.for_pairs(q, |_, a1| *a1 = -*a1),
        }
    }

    /// Multiplies each amplitude by `phases[i]`.
    pub fn apply_diagonal(&mut self, phases: impl Fn(usize) -> Complex<F>) {
        for (i, amp) in self.amps.iter_mut().enumerate() {
            *amp = *amp * phases(i);
        }
    }

    /// Probability of reporting `outcome` when measuring `q` in `basis`.
    pub fn outcome_probability(&self, q: usize, basis: Basis, outcome: bool) -> F {
        let e = prep_vector::<F>(basis.eigenstate(outcome));
        let (c0, c1) = (e[0].conj(), e[1].conj());
        let stride = 1usize << q;
        let mut p = F::zero();
        for block in self.amps.chunks(2 * stride) {
            let (lo, hi) = block.split_at(stride);
            for (x, y) in lo.iter().zip(hi) {
                p = p + (c0 * x + c1 * y).norm_sqr();
            }
        }
        p
    }

    /// Collapses `q` onto the eigenstate of `basis` labelled `outcome` and
    /// renormalizes. Returns the probability of that outcome.
    pub fn project(&mut self, q: usize, basis: Basis, outcome: bool) -> Result<F> {
        let p = self.outcome_probability(q, basis, outcome);
        if p <= F::zero() {
            return Err(Error::Circuit(format!("projection of qubit {q} onto a zero-probability outcome")));
        }
        let e = prep_vector::<F>(basis.eigenstate(outcome));
        let (c0, c1) = (e[0].conj(), e[1].conj());
        let scale = F::one() / p.sqrt();
        self.for_pairs(q, |a0, a1| {
            let overlap = (c0 * *a0 + c1 * *a1).scale(scale);
            *a0 = e[0] * overlap;
            *a1 = e[1] * overlap;
        });
        Ok(p)
    }

    /// Replaces qubit `q`, known to be in the product state `current`, by
    /// `target`.
    pub fn replace_qubit(&mut self, q: usize, current: &Qubit<F>, target: &Qubit<F>) {
        let (c0, c1) = (current[0].conj(), current[1].conj());
        let t = *target;
        self.for_pairs(q, |a0, a1| {
            let rest = c0 * *a0 + c1 * *a1;
            *a0 = t[0] * rest;
            *a1 = t[1] * rest;
        });
    }

    /// Collapses the whole register onto a basis state.
    pub fn collapse_to(&mut self, index: usize) {
        self.amps.fill(Complex::new(F::zero(), F::zero()));
        self.amps[index] = Complex::new(F::one(), F::zero());
    }

    /// Writes the amplitudes as little-endian complex64 pairs (re, im), in
    /// index order.
    pub fn write_dump(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(self.amps.len() * 8);
        for a in &self.amps {
            bytes.extend_from_slice(&(a.re.f64() as f32).to_le_bytes());
            bytes.extend_from_slice(&(a.im.f64() as f32).to_le_bytes());
        }
        std::fs::File::create(path)?.write_all(&bytes)?;
        Ok(())
    }
}
