use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;
use crate::sim::state::{Pauli, StateVector};

const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

/// Stochastic Pauli gate noise plus classical readout flips.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing probability after each single-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after each two-qubit gate.
    pub p2: f64,
    /// Flip probability of each reported bit.
    pub p_ro: f64,
}

/// Twice the starting rates 0.002, 0.015 and 0.02: the smallest multiple
/// on the grid 1, 1.5, 2, ... that pushes the 20-node uncut 95th-percentile
/// ratio below 0.8 of its noiseless value.
impl Default for NoiseModel {
    fn default() -> Self {
        Self { p1: 0.004, p2: 0.03, p_ro: 0.04 }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self { p1: 0.0, p2: 0.0, p_ro: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("p_ro", self.p_ro)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("noise probability {name} = {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.p_ro == 0.0
    }

    /// With probability `p1`, a uniformly random non-identity Pauli on `q`.
    /// Draws nothing from `rng` when `p1 = 0`.
    pub fn after_one_qubit_gate<F: Real, R: Rng + ?Sized>(&self, state: &mut StateVector<F>, q: usize, rng: &mut R) {
        if self.p1 > 0.0 && rng.gen::<f64>() < self.p1 {
            state.pauli(q, PAULIS[rng.gen_range(1..4)]);
        }
    }

    /// With probability `p2`, one of the 15 non-identity two-qubit Paulis.
    pub fn after_two_qubit_gate<F: Real, R: Rng + ?Sized>(
        &self,
        state: &mut StateVector<F>,
        a: usize,
        b: usize,
        rng: &mut R,
    ) {
        if self.p2 > 0.0 && rng.gen::<f64>() < self.p2 {
            let k = rng.gen_range(1..16);
            state.pauli(a, PAULIS[k % 4]);
            state.pauli(b, PAULIS[k / 4]);
        }
    }

    pub fn readout<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> bool {
        if self.p_ro > 0.0 && rng.gen::<f64>() < self.p_ro {
            !bit
        } else {
            bit
        }
    }

    pub fn readout_register<R: Rng + ?Sized>(&self, bits: u64, width: usize, rng: &mut R) -> u64 {
        if self.p_ro == 0.0 {
            return bits;
        }
        (0..width).fold(bits, |acc, q| if rng.gen::<f64>() < self.p_ro { acc ^ (1 << q) } else { acc })
    }
}
