use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sim::state::MAX_QUBITS;

/// Single-qubit measurement basis. Outcome 0 is the `+1` eigenstate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Eigenstate reported as `outcome`.
    pub fn eigenstate(self, outcome: bool) -> PrepState {
        match (self, outcome) {
            (Basis::X, false) => PrepState::XPlus,
            (Basis::X, true) => PrepState::XMinus,
            (Basis::Y, false) => PrepState::YPlus,
            (Basis::Y, true) => PrepState::YMinus,
            (Basis::Z, false) => PrepState::Z0,
            (Basis::Z, true) => PrepState::Z1,
        }
    }
}

/// Pure single-qubit states available to `ResetTo`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrepState {
    Z0,
    Z1,
    XPlus,
    XMinus,
    YPlus,
    YMinus,
}

impl PrepState {
    pub const ALL: [PrepState; 6] =
        [PrepState::Z0, PrepState::Z1, PrepState::XPlus, PrepState::XMinus, PrepState::YPlus, PrepState::YMinus];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn basis(self) -> Basis {
        match self {
            PrepState::Z0 | PrepState::Z1 => Basis::Z,
            PrepState::XPlus | PrepState::XMinus => Basis::X,
            PrepState::YPlus | PrepState::YMinus => Basis::Y,
        }
    }

    /// Outcome bit this state yields when measured in its own basis.
    pub fn outcome(self) -> bool {
        matches!(self, PrepState::Z1 | PrepState::XMinus | PrepState::YMinus)
    }

    /// The orthogonal state of the same basis.
    pub fn flipped(self) -> PrepState {
        self.basis().eigenstate(!self.outcome())
    }
}

/// Gate-list operation.
///
/// Phase conventions carry no global phase: `Rz(q, t)` multiplies the `|1>`
/// component of `q` by `exp(-i t)`, and `ZzPhase(a, b, p)` multiplies basis
/// states with `x_a != x_b` by `exp(-i p)`. `Rx(q, t)` is `exp(-i t X / 2)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Op<F> {
    H(usize),
    Rx(usize, F),
    Rz(usize, F),
    ZzPhase(usize, usize, F),
    MeasureZ(usize, String),
    MeasureBasis(usize, Basis, String),
    ResetTo(usize, PrepState),
    MeasureAll(String),
}

impl<F> Op<F> {
    pub fn is_measurement(&self) -> bool {
        matches!(self, Op::MeasureZ(..) | Op::MeasureBasis(..) | Op::MeasureAll(_))
    }

    pub fn is_gate(&self) -> bool {
        matches!(self, Op::H(_) | Op::Rx(..) | Op::Rz(..) | Op::ZzPhase(..))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum WireState {
    Fresh,
    Measured,
    Used,
}

/// Validated gate list.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit<F> {
    num_qubits: usize,
    ops: Vec<Op<F>>,
    tags: BTreeSet<String>,
    wires: Vec<WireState>,
}

impl<F: Real> Circuit<F> {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(Error::QubitOverflow { requested: num_qubits, limit: MAX_QUBITS });
        }
        Ok(Self { num_qubits, ops: Vec::new(), tags: BTreeSet::new(), wires: vec![WireState::Fresh; num_qubits] })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[Op<F>] {
        &self.ops
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.tags.iter().map(String::as_str)
    }

    pub fn gate_count(&self) -> usize {
        self.ops.iter().filter(|op| op.is_gate()).count()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::Circuit(format!("qubit {q} out of range for {} qubits", self.num_qubits)));
        }
        Ok(())
    }

    fn claim_tag(&mut self, tag: &str) -> Result<()> {
        if !self.tags.insert(tag.to_string()) {
            return Err(Error::Circuit(format!("duplicate measurement tag {tag:?}")));
        }
        Ok(())
    }

    /// Appends an operation after checking qubit indices, tag uniqueness and
    /// that `ResetTo` follows a single-qubit measurement (or nothing) on its
    /// wire.
    pub fn push(&mut self, op: Op<F>) -> Result<&mut Self> {
        match &op {
            Op::H(q) | Op::Rx(q, _) | Op::Rz(q, _) => {
                self.check_qubit(*q)?;
                self.wires[*q] = WireState::Used;
            }
            Op::ZzPhase(a, b, _) => {
                self.check_qubit(*a)?;
                self.check_qubit(*b)?;
                if a == b {
                    return Err(Error::Circuit(format!("ZZPhase needs two distinct qubits, got {a}")));
                }
                self.wires[*a] = WireState::Used;
                self.wires[*b] = WireState::Used;
            }
            Op::MeasureZ(q, tag) | Op::MeasureBasis(q, _, tag) => {
                self.check_qubit(*q)?;
                self.claim_tag(tag)?;
                self.wires[*q] = WireState::Measured;
            }
            Op::ResetTo(q, _) => {
                self.check_qubit(*q)?;
                if self.wires[*q] == WireState::Used {
                    return Err(Error::Circuit(format!(
                        "ResetTo on qubit {q} must follow a single-qubit measurement"
                    )));
                }
                self.wires[*q] = WireState::Used;
            }
            Op::MeasureAll(tag) => {
                self.claim_tag(tag)?;
                self.wires.fill(WireState::Used);
            }
        }
        self.ops.push(op);
        Ok(self)
    }

    pub fn h(&mut self, q: usize) -> Result<&mut Self> {
        self.push(Op::H(q))
    }

    pub fn rx(&mut self, q: usize, theta: F) -> Result<&mut Self> {
        self.push(Op::Rx(q, theta))
    }

    pub fn rz(&mut self, q: usize, theta: F) -> Result<&mut Self> {
        self.push(Op::Rz(q, theta))
    }

    pub fn zz_phase(&mut self, a: usize, b: usize, phi: F) -> Result<&mut Self> {
        self.push(Op::ZzPhase(a, b, phi))
    }

    pub fn measure_z(&mut self, q: usize, tag: &str) -> Result<&mut Self> {
        self.push(Op::MeasureZ(q, tag.to_string()))
    }

    pub fn measure(&mut self, q: usize, basis: Basis, tag: &str) -> Result<&mut Self> {
        self.push(Op::MeasureBasis(q, basis, tag.to_string()))
    }

    pub fn reset_to(&mut self, q: usize, state: PrepState) -> Result<&mut Self> {
        self.push(Op::ResetTo(q, state))
    }

    pub fn measure_all(&mut self, tag: &str) -> Result<&mut Self> {
        self.push(Op::MeasureAll(tag.to_string()))
    }

    /// Number of single-qubit measurements.
    pub fn mid_circuit_measurements(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, Op::MeasureZ(..) | Op::MeasureBasis(..))).count()
    }

    /// Tag of the final `MeasureAll`, if the circuit ends with one.
    pub fn final_register(&self) -> Option<&str> {
        match self.ops.last() {
            Some(Op::MeasureAll(tag)) => Some(tag),
            _ => None,
        }
    }
}
