//! Quantum objects: density matrices, unitaries, Kraus channels, the Pauli
//! basis and the process (χ) matrix.

mod chi;
mod pauli;

pub use chi::{chi_from_kraus, ChiMatrix};
pub use pauli::{
    pauli_expand, pauli_matrices, pauli_reconstruct, qubits_of, PauliCoefficients, PauliString,
};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, hs_inner, identity, is_hermitian, max_abs_diff, trace, ComplexMatrix,
    C64,
};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const UNITARY_TOL: f64 = 1e-10;
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Density matrix of an `n`-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let n_qubits = qubits_of(&mat)?;
        if !is_hermitian(&mat, HERMITIAN_TOL) {
            return Err(Error::OutOfRange("density matrix is not Hermitian".into()));
        }
        let tr = trace(&mat);
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::OutOfRange(format!("trace {tr} is not 1")));
        }
        let min_ev = hermitian_eigenvalues(&mat)[0];
        if min_ev < -PSD_TOL {
            return Err(Error::OutOfRange(format!("negative eigenvalue {min_ev:e}")));
        }
        Ok(Self { n_qubits, mat })
    }

    /// Wraps a matrix already known to be a physical state.
    pub(crate) fn from_trusted(mat: ComplexMatrix) -> Self {
        let n_qubits = qubits_of(&mat).expect("square power-of-two matrix");
        Self { n_qubits, mat }
    }

    /// `|ψ⟩⟨ψ|` for a state vector, normalized.
    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Empty("state vector"));
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|c| c / norm));
        let mat = &v * v.adjoint();
        qubits_of(&mat)?;
        Ok(Self::from_trusted(mat))
    }

    /// Computational basis state `|index⟩⟨index|`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let d = 1 << n_qubits;
        let mut mat = ComplexMatrix::zeros(d, d);
        mat[(index, index)] = C64::new(1.0, 0.0);
        Self { n_qubits, mat }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        Self { n_qubits, mat: identity(d) / C64::new(d as f64, 0.0) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn purity(&self) -> f64 {
        hs_inner(&self.mat, &self.mat).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    pub fn pauli(&self) -> PauliCoefficients {
        pauli_expand(&self.mat).expect("valid dimensions")
    }
}

/// Nearest physical state to a Hermitian matrix: eigenvalues clipped at zero,
/// then renormalized to unit trace.
pub fn project_to_physical(m: &ComplexMatrix) -> Result<DensityMatrix> {
    qubits_of(m)?;
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let d = m.nrows();
    if total <= 0.0 {
        return Ok(DensityMatrix::maximally_mixed(qubits_of(m)?));
    }
    let mut out = ComplexMatrix::zeros(d, d);
    for (k, &l) in clipped.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        out += (v * v.adjoint()) * C64::new(l / total, 0.0);
    }
    let out = (&out + out.adjoint()) * C64::new(0.5, 0.0);
    Ok(DensityMatrix::from_trusted(out))
}

/// Unitary operator on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    n_qubits: usize,
    mat: ComplexMatrix,
}

impl UnitaryOp {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let n_qubits = qubits_of(&mat)?;
        let d = mat.nrows();
        if max_abs_diff(&(mat.adjoint() * &mat), &identity(d)) > UNITARY_TOL {
            return Err(Error::OutOfRange("matrix is not unitary".into()));
        }
        Ok(Self { n_qubits, mat })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self { n_qubits, mat: identity(1 << n_qubits) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn kron(&self, other: &UnitaryOp) -> UnitaryOp {
        UnitaryOp { n_qubits: self.n_qubits + other.n_qubits, mat: self.mat.kronecker(&other.mat) }
    }

    pub fn compose(&self, after: &UnitaryOp) -> UnitaryOp {
        UnitaryOp { n_qubits: self.n_qubits, mat: &after.mat * &self.mat }
    }
}

/// Kraus representation `ρ ↦ Σ_k E_k ρ E_k†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    n_qubits: usize,
    ops: Vec<ComplexMatrix>,
    trace_preserving: bool,
}

impl KrausSet {
    /// Builds a trace-preserving set; fails if `Σ E_k†E_k ≠ I`.
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let ks = Self::new_unchecked(ops, true)?;
        let dev = ks.completeness_error();
        if dev > COMPLETENESS_TOL {
            return Err(Error::OutOfRange(format!("Kraus completeness violated by {dev:e}")));
        }
        Ok(ks)
    }

    /// Skips the completeness check; `trace_preserving` is recorded as given.
    pub fn new_unchecked(ops: Vec<ComplexMatrix>, trace_preserving: bool) -> Result<Self> {
        let first = ops.first().ok_or(Error::Empty("Kraus operator list"))?;
        let n_qubits = qubits_of(first)?;
        for op in &ops {
            check_dim(first.nrows(), op.nrows())?;
            check_dim(first.ncols(), op.ncols())?;
        }
        Ok(Self { n_qubits, ops, trace_preserving })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self { n_qubits, ops: vec![identity(1 << n_qubits)], trace_preserving: true }
    }

    pub fn from_unitary(u: &UnitaryOp) -> Self {
        Self { n_qubits: u.n_qubits, ops: vec![u.mat.clone()], trace_preserving: true }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `max |Σ E_k†E_k − I|`.
    pub fn completeness_error(&self) -> f64 {
        let d = 1 << self.n_qubits;
        let sum = self.ops.iter().fold(ComplexMatrix::zeros(d, d), |acc, e| acc + e.adjoint() * e);
        max_abs_diff(&sum, &identity(d))
    }

    /// Tensor product of two channels: Kraus operators `A_i ⊗ B_j`.
    pub fn tensor(&self, other: &KrausSet) -> KrausSet {
        let ops =
            self.ops.iter().flat_map(|a| other.ops.iter().map(move |b| a.kronecker(b))).collect();
        KrausSet {
            n_qubits: self.n_qubits + other.n_qubits,
            ops,
            trace_preserving: self.trace_preserving && other.trace_preserving,
        }
    }

    /// Channel `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &KrausSet) -> KrausSet {
        let ops = other.ops.iter().flat_map(|b| self.ops.iter().map(move |a| b * a)).collect();
        KrausSet {
            n_qubits: self.n_qubits,
            ops,
            trace_preserving: self.trace_preserving && other.trace_preserving,
        }
    }

    /// Applies the map to an arbitrary matrix (used for basis operators).
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let d = m.nrows();
        self.ops.iter().fold(ComplexMatrix::zeros(d, d), |acc, e| acc + e * m * e.adjoint())
    }
}

/// Normalized Hilbert–Schmidt overlap `|Tr(a b†)| / √(Tr(a†a) Tr(b†b))`.
///
/// Works unchanged for density and process matrices, and for unnormalized
/// network outputs.
pub fn fidelity(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    check_dim(a.nrows(), b.nrows())?;
    check_dim(a.ncols(), b.ncols())?;
    let na = hs_inner(a, a).re;
    let nb = hs_inner(b, b).re;
    if na <= 0.0 || nb <= 0.0 {
        return Err(Error::UndefinedFidelity);
    }
    Ok(hs_inner(a, b).norm() / (na * nb).sqrt())
}

/// `U ρ U†`.
pub fn apply_unitary(rho: &DensityMatrix, u: &UnitaryOp) -> Result<DensityMatrix> {
    check_dim(rho.dim(), u.mat.nrows())?;
    let out = &u.mat * &rho.mat * u.mat.adjoint();
    Ok(DensityMatrix { n_qubits: rho.n_qubits, mat: out })
}

/// `Σ_k E_k ρ E_k†`.
pub fn apply_kraus(rho: &DensityMatrix, ks: &KrausSet) -> Result<DensityMatrix> {
    check_dim(rho.dim(), 1 << ks.n_qubits)?;
    Ok(DensityMatrix { n_qubits: rho.n_qubits, mat: ks.apply_matrix(&rho.mat) })
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal folded into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> UnitaryOp {
    assert!(n_qubits >= 1, "random_unitary needs at least one qubit");
    let d = 1 << n_qubits;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = ComplexMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    UnitaryOp { n_qubits, mat: q }
}
