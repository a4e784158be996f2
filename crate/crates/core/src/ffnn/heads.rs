use super::{Head, NetworkParams};
use crate::error::{check_dim, Error, Result};
use crate::linalg::ComplexMatrix;
use crate::measurement::ReducedVector;
use crate::quantum::{
    pauli_reconstruct, project_to_physical, ChiMatrix, DensityMatrix, PauliCoefficients,
};

/// A network's state estimate.
#[derive(Debug, Clone)]
pub struct StatePrediction {
    pub coeffs: PauliCoefficients,
    /// Hermitian but otherwise unconstrained reconstruction; its trace need
    /// not be 1 and it may have negative eigenvalues.
    pub raw: ComplexMatrix,
    /// `raw` with negative eigenvalues clipped and the trace renormalized.
    pub physical: DensityMatrix,
}

fn run_head(params: &NetworkParams, input: &ReducedVector) -> Result<Vec<f64>> {
    check_dim(params.input_len(), input.len())?;
    let head = params.config.head;
    let x: Vec<f64> = input.values.iter().map(|v| v * head.input_scale()).collect();
    let mut y = params.forward(&x)?;
    for v in &mut y {
        *v /= head.output_scale();
    }
    Ok(y)
}

/// Reconstructs a state from a (possibly reduced) readout vector.
pub fn predict_state(params: &NetworkParams, input: &ReducedVector) -> Result<StatePrediction> {
    let Head::State { n_qubits } = params.config.head else {
        return Err(Error::InvalidConfig("network is not a state-tomography model".into()));
    };
    let coeffs = PauliCoefficients::new(n_qubits, run_head(params, input)?)?;
    let raw = pauli_reconstruct(&coeffs)?;
    let physical = project_to_physical(&raw)?;
    Ok(StatePrediction { coeffs, raw, physical })
}

/// Reconstructs χ from a (possibly reduced) compact λ vector. The compact
/// parametrization is Hermitian by construction.
pub fn predict_process(params: &NetworkParams, input: &ReducedVector) -> Result<ChiMatrix> {
    let Head::Process { n_qubits } = params.config.head else {
        return Err(Error::InvalidConfig("network is not a process-tomography model".into()));
    };
    Ok(ChiMatrix::from_compact(n_qubits, &run_head(params, input)?)?.hermitized())
}
