//! Quantum state and process tomography by linear inversion and by a
//! feed-forward neural network trained on simulated NMR readouts.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`]: density matrices, unitaries, Kraus channels, the Pauli
//!   basis and the χ matrix.
//! * [`measurement`]: the NMR readout model, the coefficient matrix `A` of
//!   `A X = B`, linear inversion and data reduction.
//! * [`process`]: λ vectors, the β matrix of `β χ = λ`, the gates and noise
//!   channels under study and the one-ancilla duality circuit.
//! * [`ffnn`]: a from-scratch multilayer perceptron with adagrad training
//!   and tomography prediction heads.
//! * [`datasets`]: random ensembles, training sets and their file format.
//! * [`metrics`]: the fidelity statistics reported by the experiments.

mod binio;
pub mod datasets;
pub mod error;
pub mod ffnn;
pub mod linalg;
pub mod measurement;
pub mod metrics;
pub mod process;
pub mod quantum;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use quantum::{fidelity, ChiMatrix, DensityMatrix, KrausSet, PauliCoefficients, UnitaryOp};
