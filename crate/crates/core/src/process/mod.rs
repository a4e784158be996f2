//! Linear-inversion process tomography (`β χ = λ`) and the library of
//! processes used to exercise it.

mod channels;
mod gates;

pub use channels::{
    decoherence_channel, dsa_simulate, gradient_channel, noise_channel, ChannelSpec,
    DsaChannelSpec, NoiseKind, D1_DELAY, D2_DELAY, GRADIENT_DECAY_RATE, GRADIENT_STRENGTH, NMR_T1,
    NMR_T2,
};
pub use gates::{gate_library, GateLibrary};

pub use crate::quantum::ChiMatrix;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{pinv_full_column_rank, ComplexMatrix, C64};
use crate::measurement::{add_gaussian_noise, coefficient_matrix, standard_settings};
use crate::quantum::{pauli_expand, pauli_matrices, DensityMatrix, KrausSet};

/// `{|0⟩, |1⟩, |+⟩, |+i⟩}^{⊗n}` in lexicographic factor order.
#[derive(Debug, Clone)]
pub struct InputStateBasis {
    n_qubits: usize,
    states: Vec<DensityMatrix>,
}

impl InputStateBasis {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Output states of a channel, in basis order.
    pub fn outputs(&self, ks: &KrausSet) -> Result<Vec<DensityMatrix>> {
        check_dim(self.n_qubits, ks.n_qubits())?;
        Ok(self
            .states
            .iter()
            .map(|s| DensityMatrix::from_trusted(ks.apply_matrix(s.matrix())))
            .collect())
    }
}

pub fn input_basis(n_qubits: usize) -> Result<InputStateBasis> {
    if !(1..=3).contains(&n_qubits) {
        return Err(Error::UnsupportedQubits(n_qubits));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let single: [[C64; 2]; 4] = [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        [C64::new(h, 0.0), C64::new(h, 0.0)],
        [C64::new(h, 0.0), C64::new(0.0, h)],
    ];
    let count = 1usize << (2 * n_qubits);
    let mut states = Vec::with_capacity(count);
    for idx in 0..count {
        let mut psi = vec![C64::new(1.0, 0.0)];
        for q in 0..n_qubits {
            let f = &single[(idx >> (2 * (n_qubits - 1 - q))) & 3];
            psi = psi.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect();
        }
        states.push(DensityMatrix::from_pure(&psi)?);
    }
    Ok(InputStateBasis { n_qubits, states })
}

/// Per-output-state content of λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    /// Re then Im of all `4^n` density-matrix entries, row-major.
    Default,
    /// The `4^n` Pauli coefficients of the output state.
    Compact,
    /// The full readout vector under the standard tomography settings.
    Measurement,
}

impl LambdaMode {
    pub fn block_len(self, n_qubits: usize) -> Result<usize> {
        let d = 1usize << n_qubits;
        Ok(match self {
            LambdaMode::Default => 2 * d * d,
            LambdaMode::Compact => d * d,
            LambdaMode::Measurement => {
                coefficient_matrix(&standard_settings(n_qubits)?)?.matrix().nrows()
            }
        })
    }

    /// Offsets within a block that carry the trace datum (never noised).
    fn is_trace_slot(self, offset: usize, block_len: usize) -> bool {
        match self {
            LambdaMode::Default => false,
            LambdaMode::Compact => offset == 0,
            LambdaMode::Measurement => offset + 1 == block_len,
        }
    }
}

/// Stacked output-state data over the input-state basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaVector {
    pub n_qubits: usize,
    pub mode: LambdaMode,
    pub values: Vec<f64>,
}

impl LambdaVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Gaussian noise on every entry except per-block trace data.
    pub fn add_noise<R: Rng + ?Sized>(&mut self, sigma: f64, rng: &mut R) -> Result<()> {
        let block = self.mode.block_len(self.n_qubits)?;
        let mode = self.mode;
        add_gaussian_noise(
            &mut self.values,
            sigma,
            |i, _| mode.is_trace_slot(i % block, block),
            rng,
        )
    }
}

fn push_block(m: &ComplexMatrix, mode: LambdaMode, out: &mut Vec<f64>) -> Result<()> {
    match mode {
        LambdaMode::Default => {
            let d = m.nrows();
            for r in 0..d {
                for c in 0..d {
                    out.push(m[(r, c)].re);
                }
            }
            for r in 0..d {
                for c in 0..d {
                    out.push(m[(r, c)].im);
                }
            }
        }
        LambdaMode::Compact => out.extend(pauli_expand(m)?.coeffs),
        LambdaMode::Measurement => {
            let n = crate::quantum::qubits_of(m)?;
            let a = coefficient_matrix(&standard_settings(n)?)?;
            out.extend(a.apply(&pauli_expand(m)?)?);
        }
    }
    Ok(())
}

fn stack_matrices<'a>(
    n_qubits: usize,
    outputs: impl ExactSizeIterator<Item = &'a ComplexMatrix>,
    mode: LambdaMode,
) -> Result<LambdaVector> {
    check_dim(1 << (2 * n_qubits), outputs.len())?;
    let mut values = Vec::with_capacity(outputs.len() * mode.block_len(n_qubits)?);
    for m in outputs {
        check_dim(1 << n_qubits, m.nrows())?;
        push_block(m, mode, &mut values)?;
    }
    Ok(LambdaVector { n_qubits, mode, values })
}

/// Stacks `4^n` output states (in input-basis order) into λ.
pub fn stack_lambda(outputs: &[DensityMatrix], mode: LambdaMode) -> Result<LambdaVector> {
    let first = outputs.first().ok_or(Error::Empty("output state list"))?;
    stack_matrices(first.n_qubits(), outputs.iter().map(|o| o.matrix()), mode)
}

/// λ of a channel, computed exactly.
pub fn channel_lambda(ks: &KrausSet, mode: LambdaMode) -> Result<LambdaVector> {
    let basis = input_basis(ks.n_qubits())?;
    stack_lambda(&basis.outputs(ks)?, mode)
}

/// Coefficient matrix β mapping the Hermitian parametrization of χ
/// ([`ChiMatrix::to_compact`]) to λ.
#[derive(Debug)]
pub struct BetaMatrix {
    n_qubits: usize,
    mode: LambdaMode,
    beta: DMatrix<f64>,
    pinv: OnceLock<std::result::Result<DMatrix<f64>, String>>,
}

impl BetaMatrix {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn mode(&self) -> LambdaMode {
        self.mode
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.beta
    }

    /// `β · vec(χ)`.
    pub fn apply(&self, chi: &ChiMatrix) -> Result<Vec<f64>> {
        check_dim(self.n_qubits, chi.n_qubits())?;
        let x = DVector::from_vec(chi.to_compact());
        Ok((&self.beta * x).iter().copied().collect())
    }

    fn pseudo_inverse(&self) -> Result<&DMatrix<f64>> {
        self.pinv
            .get_or_init(|| pinv_full_column_rank(&self.beta).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::IllPosed(e.clone()))
    }
}

/// Builds β column by column: each column is λ of the map
/// `ρ ↦ Σ_ab H_ab P_a ρ P_b†` for one Hermitian basis element `H`.
pub fn build_beta(n_qubits: usize, mode: LambdaMode) -> Result<BetaMatrix> {
    let basis = input_basis(n_qubits)?;
    let ps = pauli_matrices(n_qubits);
    let dd = ps.len();
    let rows = dd * mode.block_len(n_qubits)?;
    let mut beta = DMatrix::zeros(rows, dd * dd);
    let i = C64::new(0.0, 1.0);
    for a in 0..dd {
        for b in 0..dd {
            let outputs: Vec<ComplexMatrix> = basis
                .states
                .iter()
                .map(|s| {
                    let rho = s.matrix();
                    match a.cmp(&b) {
                        std::cmp::Ordering::Equal => &ps[a] * rho * &ps[a],
                        // Re χ_ab (a < b)
                        std::cmp::Ordering::Less => &ps[a] * rho * &ps[b] + &ps[b] * rho * &ps[a],
                        // Im χ_ba (b < a): χ_ba = i t, χ_ab = -i t
                        std::cmp::Ordering::Greater => {
                            (&ps[b] * rho * &ps[a]) * i - (&ps[a] * rho * &ps[b]) * i
                        }
                    }
                })
                .collect();
            let col = stack_matrices(n_qubits, outputs.iter(), mode)?;
            beta.set_column(a * dd + b, &DVector::from_vec(col.values));
        }
    }
    Ok(BetaMatrix { n_qubits, mode, beta, pinv: OnceLock::new() })
}

type BetaMemo = RwLock<HashMap<(usize, LambdaMode), Arc<BetaMatrix>>>;

/// Memoized [`build_beta`].
pub fn beta_matrix(n_qubits: usize, mode: LambdaMode) -> Result<Arc<BetaMatrix>> {
    static MEMO: OnceLock<BetaMemo> = OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    if let Some(b) = memo.read().expect("memo poisoned").get(&(n_qubits, mode)) {
        return Ok(Arc::clone(b));
    }
    let built = Arc::new(build_beta(n_qubits, mode)?);
    let mut w = memo.write().expect("memo poisoned");
    Ok(Arc::clone(w.entry((n_qubits, mode)).or_insert(built)))
}

/// Least-squares χ from a full λ (truncated pseudo-inverse, then Hermitized).
pub fn linear_inversion_qpt(lambda: &LambdaVector, beta: &BetaMatrix) -> Result<ChiMatrix> {
    check_dim(beta.n_qubits, lambda.n_qubits)?;
    if lambda.mode != beta.mode {
        return Err(Error::InvalidConfig(format!(
            "λ mode {:?} does not match β mode {:?}",
            lambda.mode, beta.mode
        )));
    }
    check_dim(beta.beta.nrows(), lambda.values.len())?;
    let x = beta.pseudo_inverse()? * DVector::from_column_slice(&lambda.values);
    Ok(ChiMatrix::from_compact(beta.n_qubits, x.as_slice())?.hermitized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_diff, singular_values};
    use crate::quantum::{chi_from_kraus, fidelity, random_unitary};
    use crate::rng::seeded;

    #[test]
    fn single_qubit_basis() {
        let b = input_basis(1).unwrap();
        assert_eq!(b.len(), 4);
        let m = b.states()[3].matrix();
        assert!((m[(0, 1)] - C64::new(0.0, -0.5)).norm() < 1e-15);
        assert_eq!(input_basis(2).unwrap().len(), 16);
        assert!(input_basis(4).is_err());
    }

    #[test]
    fn basis_gram_matrix_is_nonsingular() {
        for n in [1, 2] {
            let b = input_basis(n).unwrap();
            let k = b.len();
            let gram = ComplexMatrix::from_fn(k, k, |i, j| {
                crate::linalg::hs_inner(b.states()[i].matrix(), b.states()[j].matrix())
            });
            let det = gram.determinant().norm();
            assert!(det > 1e-8, "n={n} det={det}");
        }
    }

    #[test]
    fn lambda_lengths() {
        let id = KrausSet::identity(2);
        assert_eq!(channel_lambda(&id, LambdaMode::Default).unwrap().len(), 512);
        assert_eq!(channel_lambda(&id, LambdaMode::Compact).unwrap().len(), 256);
        assert_eq!(channel_lambda(&id, LambdaMode::Measurement).unwrap().len(), 16 * 33);
        let basis = input_basis(2).unwrap();
        assert!(stack_lambda(&basis.states()[..3], LambdaMode::Default).is_err());
    }

    #[test]
    fn identity_lambda_encodes_inputs() {
        let basis = input_basis(1).unwrap();
        let lam = channel_lambda(&KrausSet::identity(1), LambdaMode::Default).unwrap();
        for (k, s) in basis.states().iter().enumerate() {
            let block = &lam.values[k * 8..(k + 1) * 8];
            for r in 0..2 {
                for c in 0..2 {
                    assert_eq!(block[r * 2 + c], s.matrix()[(r, c)].re);
                    assert_eq!(block[4 + r * 2 + c], s.matrix()[(r, c)].im);
                }
            }
        }
    }

    #[test]
    fn beta_reproduces_lambda_for_unitaries() {
        let mut rng = seeded(31);
        for mode in [LambdaMode::Default, LambdaMode::Compact, LambdaMode::Measurement] {
            let beta = beta_matrix(2, mode).unwrap();
            for _ in 0..50 {
                let ks = KrausSet::from_unitary(&random_unitary(2, &mut rng));
                let lam = channel_lambda(&ks, mode).unwrap();
                let pred = beta.apply(&chi_from_kraus(&ks)).unwrap();
                let res =
                    pred.iter().zip(&lam.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(res <= 1e-9, "{mode:?} residual {res}");
            }
        }
    }

    #[test]
    fn beta_has_full_column_rank() {
        for mode in [LambdaMode::Default, LambdaMode::Compact] {
            let beta = beta_matrix(2, mode).unwrap();
            let sv = singular_values(beta.matrix());
            assert_eq!(sv.iter().filter(|&&s| s > 1e-10).count(), 256, "{mode:?}");
        }
    }

    #[test]
    fn identity_inversion() {
        let beta = beta_matrix(2, LambdaMode::Default).unwrap();
        let lam = channel_lambda(&KrausSet::identity(2), LambdaMode::Default).unwrap();
        let chi = linear_inversion_qpt(&lam, &beta).unwrap();
        for m in 0..16 {
            for n in 0..16 {
                let want = if m == 0 && n == 0 { 1.0 } else { 0.0 };
                assert!((chi.get(m, n) - C64::new(want, 0.0)).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn cbf_inversion_recovers_diagonal() {
        let beta = beta_matrix(2, LambdaMode::Compact).unwrap();
        let ks = noise_channel(NoiseKind::Cbf, 0.3).unwrap();
        let chi = linear_inversion_qpt(&channel_lambda(&ks, LambdaMode::Compact).unwrap(), &beta)
            .unwrap();
        let xx = 5; // X=1 on both qubits → 1·4 + 1
        for m in 0..16 {
            for n in 0..16 {
                let want = match (m, n) {
                    (0, 0) => 0.7,
                    (a, b) if a == xx && b == xx => 0.3,
                    _ => 0.0,
                };
                assert!((chi.get(m, n) - C64::new(want, 0.0)).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn cnot_inversion_is_rank_one() {
        let beta = beta_matrix(2, LambdaMode::Default).unwrap();
        let ks = KrausSet::from_unitary(&gate_library().cnot);
        let chi = linear_inversion_qpt(&channel_lambda(&ks, LambdaMode::Default).unwrap(), &beta)
            .unwrap();
        let ev = chi.eigenvalues();
        assert!((ev[15] - 1.0).abs() < 1e-9);
        assert!(ev[..15].iter().all(|l| l.abs() < 1e-9));
        assert!(max_abs_diff(chi.matrix(), chi_from_kraus(&ks).matrix()) < 1e-9);
    }

    #[test]
    fn noisy_cnot_inversion() {
        let beta = beta_matrix(2, LambdaMode::Default).unwrap();
        let ks = KrausSet::from_unitary(&gate_library().cnot);
        let truth = chi_from_kraus(&ks);
        let clean = channel_lambda(&ks, LambdaMode::Default).unwrap();
        let mut rng = seeded(77);
        for _ in 0..100 {
            let mut lam = clean.clone();
            lam.add_noise(0.01, &mut rng).unwrap();
            let chi = linear_inversion_qpt(&lam, &beta).unwrap();
            assert!(fidelity(chi.matrix(), truth.matrix()).unwrap() >= 0.97);
        }
    }

    #[test]
    fn library_processes_round_trip() {
        let beta = beta_matrix(2, LambdaMode::Compact).unwrap();
        let g = gate_library();
        let mut channels: Vec<KrausSet> =
            g.iter().map(|(_, u)| KrausSet::from_unitary(u)).collect();
        channels.push(decoherence_channel(D1_DELAY, NMR_T1, NMR_T2, 2).unwrap());
        channels.push(decoherence_channel(D2_DELAY, NMR_T1, NMR_T2, 2).unwrap());
        channels.push(gradient_channel(GRADIENT_STRENGTH).unwrap());
        for kind in [NoiseKind::Cbf, NoiseKind::Cpf, NoiseKind::Cbpf] {
            channels.push(noise_channel(kind, 0.5).unwrap());
        }
        for ks in &channels {
            let truth = chi_from_kraus(ks);
            let chi =
                linear_inversion_qpt(&channel_lambda(ks, LambdaMode::Compact).unwrap(), &beta)
                    .unwrap();
            assert!(fidelity(chi.matrix(), truth.matrix()).unwrap() >= 1.0 - 1e-8);
            assert!(max_abs_diff(&chi.trace_condition(), &identity(4)) < 1e-8);
            assert!(chi.is_hermitian(1e-9));
            assert!(chi.eigenvalues()[0] > -1e-9);
        }
    }

    #[test]
    fn mode_mismatch_rejected() {
        let beta = beta_matrix(2, LambdaMode::Compact).unwrap();
        let lam = channel_lambda(&KrausSet::identity(2), LambdaMode::Default).unwrap();
        assert!(linear_inversion_qpt(&lam, &beta).is_err());
    }
}
