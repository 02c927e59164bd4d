//! Dense statevector simulation with mid-circuit measurement, reset and
//! stochastic Pauli noise.

pub mod circuit;
pub mod exact;
pub mod noise;
pub mod run;
pub mod state;

pub use circuit::{Basis, Circuit, Op, PrepState};
pub use exact::{exact_branches, exact_distribution, expectation_of_objective, Branch};
pub use noise::NoiseModel;
pub use run::{run_shot, run_shots, sample_register, Outcome, ShotResult};
pub use state::{StateVector, MAX_QUBITS};
