//! NMR-style readout model and linear-inversion state tomography.
//!
//! Each tomographic setting rotates the state and then reads out every
//! single-quantum coherence `ρ'[r, c]` (basis states `r < c` differing in one
//! bit) as a real/imaginary pair. Transitions are enumerated qubit by qubit
//! (first qubit first) and, within a qubit, by the spectator bits in
//! ascending order. The readout vector ends with a trace row equal to 1.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{kron_all, pinv_full_column_rank, ComplexMatrix, C64};
use crate::quantum::{
    pauli_matrices, pauli_reconstruct, DensityMatrix, PauliCoefficients, UnitaryOp,
};

/// A tomographic rotation such as `"IY"`: identity or a 90° x/y pulse per
/// qubit, first qubit leftmost.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographySetting {
    label: String,
    rotation: UnitaryOp,
}

impl TomographySetting {
    pub fn from_label(label: &str) -> Result<Self> {
        if label.is_empty() {
            return Err(Error::InvalidConfig("empty setting label".into()));
        }
        let factors = label.chars().map(pulse).collect::<Result<Vec<_>>>()?;
        let rotation = UnitaryOp::new(kron_all(factors.iter()))?;
        Ok(Self { label: label.to_ascii_uppercase(), rotation })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_qubits(&self) -> usize {
        self.rotation.n_qubits()
    }

    pub fn rotation(&self) -> &UnitaryOp {
        &self.rotation
    }
}

/// `exp(-i π/4 σ)` for the given axis, identity for `I`.
fn pulse(axis: char) -> Result<ComplexMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = C64::new(h, 0.0);
    match axis.to_ascii_uppercase() {
        'I' => Ok(ComplexMatrix::identity(2, 2)),
        // (I - iX)/√2
        'X' => {
            Ok(ComplexMatrix::from_row_slice(2, 2, &[r, C64::new(0.0, -h), C64::new(0.0, -h), r]))
        }
        // (I - iY)/√2
        'Y' => {
            Ok(ComplexMatrix::from_row_slice(2, 2, &[r, C64::new(-h, 0.0), C64::new(h, 0.0), r]))
        }
        other => Err(Error::InvalidConfig(format!("unknown pulse axis '{other}'"))),
    }
}

/// The standard NMR tomography sets for two and three qubits.
pub fn standard_settings(n_qubits: usize) -> Result<Vec<TomographySetting>> {
    let labels: &[&str] = match n_qubits {
        2 => &["II", "IX", "IY", "XX"],
        3 => &["III", "IIY", "IYY", "YII", "XYX", "XXY", "XXX"],
        n => return Err(Error::UnsupportedQubits(n)),
    };
    labels.iter().map(|l| TomographySetting::from_label(l)).collect()
}

/// Single-quantum transitions `(r, c)` in readout order.
pub fn transitions(n_qubits: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n_qubits << (n_qubits - 1));
    for q in 0..n_qubits {
        let p = n_qubits - 1 - q;
        for s in 0..1usize << (n_qubits - 1) {
            let hi = s >> p;
            let lo = s & ((1 << p) - 1);
            let r = (hi << (p + 1)) | lo;
            out.push((r, r | (1 << p)));
        }
    }
    out
}

/// Readouts per setting: two per transition.
pub fn readouts_per_setting(n_qubits: usize) -> usize {
    2 * (n_qubits << (n_qubits - 1))
}

fn readout_matrix(m: &ComplexMatrix, s: &TomographySetting, out: &mut Vec<f64>) {
    let u = s.rotation.matrix();
    let rotated = u * m * u.adjoint();
    for (r, c) in transitions(s.n_qubits()) {
        let z = rotated[(r, c)];
        out.push(z.re);
        out.push(z.im);
    }
}

/// Peak amplitudes (Re, Im per transition) of the rotated state.
pub fn simulate_readout(rho: &DensityMatrix, s: &TomographySetting) -> Result<Vec<f64>> {
    check_dim(s.n_qubits(), rho.n_qubits())?;
    let mut out = Vec::with_capacity(readouts_per_setting(rho.n_qubits()));
    readout_matrix(rho.matrix(), s, &mut out);
    Ok(out)
}

/// Measured data `B` of `A X = B`: all setting readouts, then the trace row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutVector {
    pub n_qubits: usize,
    pub values: Vec<f64>,
}

impl ReadoutVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Adds i.i.d. Gaussian noise to every entry except the trace row.
    pub fn add_noise<R: Rng + ?Sized>(&mut self, sigma: f64, rng: &mut R) -> Result<()> {
        add_gaussian_noise(&mut self.values, sigma, |i, len| i + 1 == len, rng)
    }

    /// Keeps the trace row and `m` randomly chosen readouts.
    pub fn reduce_readouts<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<ReducedVector> {
        Reduction::ReadoutsKeepTrace.apply(&self.values, m, rng)
    }
}

pub(crate) fn add_gaussian_noise<R: Rng + ?Sized>(
    values: &mut [f64],
    sigma: f64,
    skip: impl Fn(usize, usize) -> bool,
    rng: &mut R,
) -> Result<()> {
    if sigma == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::OutOfRange(format!("noise sigma {sigma}: {e}")))?;
    let len = values.len();
    for (i, v) in values.iter_mut().enumerate() {
        if !skip(i, len) {
            *v += normal.sample(rng);
        }
    }
    Ok(())
}

/// Fixed coefficient matrix `A` mapping Pauli coefficients to readouts.
#[derive(Debug)]
pub struct CoefficientMatrix {
    n_qubits: usize,
    labels: Vec<String>,
    a: DMatrix<f64>,
    pinv: OnceLock<std::result::Result<DMatrix<f64>, String>>,
}

impl Clone for CoefficientMatrix {
    fn clone(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            labels: self.labels.clone(),
            a: self.a.clone(),
            pinv: OnceLock::new(),
        }
    }
}

impl PartialEq for CoefficientMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.a == other.a
    }
}

impl CoefficientMatrix {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// `A x`.
    pub fn apply(&self, coeffs: &PauliCoefficients) -> Result<Vec<f64>> {
        check_dim(self.a.ncols(), coeffs.coeffs.len())?;
        let x = DVector::from_column_slice(&coeffs.coeffs);
        Ok((&self.a * x).iter().copied().collect())
    }

    /// Rows belonging to setting `k` (excluding the trace row).
    pub fn setting_block(&self, k: usize) -> DMatrix<f64> {
        let per = readouts_per_setting(self.n_qubits);
        self.a.rows(k * per, per).into_owned()
    }

    fn pseudo_inverse(&self) -> Result<&DMatrix<f64>> {
        self.pinv
            .get_or_init(|| pinv_full_column_rank(&self.a).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::IllPosed(e.clone()))
    }
}

/// Builds `A` column by column from the readouts of each Pauli string.
pub fn build_a(settings: &[TomographySetting]) -> Result<CoefficientMatrix> {
    let first = settings.first().ok_or(Error::Empty("setting list"))?;
    let n = first.n_qubits();
    for s in settings {
        check_dim(n, s.n_qubits())?;
    }
    let rows = settings.len() * readouts_per_setting(n) + 1;
    let paulis = pauli_matrices(n);
    let mut a = DMatrix::zeros(rows, paulis.len());
    let mut col = Vec::with_capacity(rows);
    for (j, p) in paulis.iter().enumerate() {
        col.clear();
        for s in settings {
            readout_matrix(p, s, &mut col);
        }
        col.push(if j == 0 { (1usize << n) as f64 } else { 0.0 });
        a.set_column(j, &DVector::from_column_slice(&col));
    }
    Ok(CoefficientMatrix {
        n_qubits: n,
        labels: settings.iter().map(|s| s.label.clone()).collect(),
        a,
        pinv: OnceLock::new(),
    })
}

type AMemo = RwLock<HashMap<Vec<String>, Arc<CoefficientMatrix>>>;

/// Memoized [`build_a`], keyed by the setting labels.
pub fn coefficient_matrix(settings: &[TomographySetting]) -> Result<Arc<CoefficientMatrix>> {
    static MEMO: OnceLock<AMemo> = OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    let key: Vec<String> = settings.iter().map(|s| s.label.clone()).collect();
    if let Some(a) = memo.read().expect("memo poisoned").get(&key) {
        return Ok(Arc::clone(a));
    }
    let built = Arc::new(build_a(settings)?);
    let mut w = memo.write().expect("memo poisoned");
    Ok(Arc::clone(w.entry(key).or_insert(built)))
}

/// Readout vector for a state under the given settings.
pub fn assemble_b(rho: &DensityMatrix, settings: &[TomographySetting]) -> Result<ReadoutVector> {
    let n = rho.n_qubits();
    let mut values = Vec::with_capacity(settings.len() * readouts_per_setting(n) + 1);
    for s in settings {
        check_dim(n, s.n_qubits())?;
        readout_matrix(rho.matrix(), s, &mut values);
    }
    values.push(crate::linalg::trace(rho.matrix()).re);
    Ok(ReadoutVector { n_qubits: n, values })
}

/// Least-squares Pauli coefficients for a full readout vector.
pub fn linear_inversion_coeffs(b: &[f64], a: &CoefficientMatrix) -> Result<PauliCoefficients> {
    check_dim(a.a.nrows(), b.len())?;
    let pinv = a.pseudo_inverse()?;
    let x = pinv * DVector::from_column_slice(b);
    PauliCoefficients::new(a.n_qubits, x.iter().copied().collect())
}

/// Standard linear-inversion state tomography. Returns the unconstrained
/// Hermitian reconstruction; noisy data may give small negative eigenvalues.
pub fn linear_inversion_qst(b: &ReadoutVector, a: &CoefficientMatrix) -> Result<ComplexMatrix> {
    check_dim(a.n_qubits, b.n_qubits)?;
    pauli_reconstruct(&linear_inversion_coeffs(&b.values, a)?)
}

/// A zero-padded data vector: entries outside `mask` are exactly 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedVector {
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    pub m_data: usize,
}

impl ReducedVector {
    pub fn from_mask(full: &[f64], mask: Vec<bool>) -> Result<Self> {
        check_dim(full.len(), mask.len())?;
        let values = full.iter().zip(&mask).map(|(&v, &keep)| if keep { v } else { 0.0 }).collect();
        let m_data = mask.iter().filter(|&&k| k).count();
        Ok(Self { values, mask, m_data })
    }

    /// All entries kept.
    pub fn full(values: &[f64]) -> Self {
        Self { values: values.to_vec(), mask: vec![true; values.len()], m_data: values.len() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Keeps `m_data` uniformly chosen positions of `b` in place and zeroes the rest.
pub fn reduce<R: Rng + ?Sized>(b: &[f64], m_data: usize, rng: &mut R) -> Result<ReducedVector> {
    if m_data > b.len() {
        return Err(Error::OutOfRange(format!(
            "M_data {m_data} exceeds vector length {}",
            b.len()
        )));
    }
    let mut mask = vec![false; b.len()];
    for i in sample(rng, b.len(), m_data) {
        mask[i] = true;
    }
    ReducedVector::from_mask(b, mask)
}

/// How a reduced dataset of size `M_data` is drawn from a full vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// `M_data` positions anywhere in the vector.
    Entries,
    /// The trailing trace row is always kept and `M_data` counts the
    /// readouts chosen among the remaining entries.
    ReadoutsKeepTrace,
}

impl Reduction {
    /// Largest `M_data` for a full vector of length `len`.
    pub fn max_m(self, len: usize) -> usize {
        match self {
            Reduction::Entries => len,
            Reduction::ReadoutsKeepTrace => len.saturating_sub(1),
        }
    }

    pub fn apply<R: Rng + ?Sized>(
        self,
        full: &[f64],
        m: usize,
        rng: &mut R,
    ) -> Result<ReducedVector> {
        match self {
            Reduction::Entries => reduce(full, m, rng),
            Reduction::ReadoutsKeepTrace => {
                let n = full.len().checked_sub(1).ok_or(Error::Empty("readout vector"))?;
                if m > n {
                    return Err(Error::OutOfRange(format!("M_data {m} exceeds {n} readouts")));
                }
                let mut mask = vec![false; full.len()];
                for i in sample(rng, n, m) {
                    mask[i] = true;
                }
                mask[n] = true;
                ReducedVector::from_mask(full, mask)
            }
        }
    }
}

/// Infers the qubit count of a readout vector length (33 → 2, 169 → 3, ...).
pub fn qubits_for_readout_len(len: usize, n_settings: usize) -> Option<usize> {
    (1..=4).find(|&n| n_settings * readouts_per_setting(n) + 1 == len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{random_mixed_state, random_pure_state};
    use crate::linalg::singular_values;
    use crate::quantum::{fidelity, pauli_expand};
    use crate::rng::seeded;

    fn a2() -> Arc<CoefficientMatrix> {
        coefficient_matrix(&standard_settings(2).unwrap()).unwrap()
    }

    #[test]
    fn standard_setting_labels() {
        let l2: Vec<_> =
            standard_settings(2).unwrap().iter().map(|s| s.label().to_string()).collect();
        assert_eq!(l2, ["II", "IX", "IY", "XX"]);
        let l3: Vec<_> =
            standard_settings(3).unwrap().iter().map(|s| s.label().to_string()).collect();
        assert_eq!(l3, ["III", "IIY", "IYY", "YII", "XYX", "XXY", "XXX"]);
        assert!(matches!(standard_settings(4), Err(Error::UnsupportedQubits(4))));
        assert!(TomographySetting::from_label("IZ").is_err());
    }

    #[test]
    fn transition_order() {
        assert_eq!(transitions(2), vec![(0, 2), (1, 3), (0, 1), (2, 3)]);
        assert_eq!(transitions(3).len(), 12);
        for (r, c) in transitions(3) {
            assert!(r < c);
            assert_eq!((r ^ c).count_ones(), 1);
        }
    }

    #[test]
    fn populations_give_no_signal() {
        let s = TomographySetting::from_label("II").unwrap();
        let out = simulate_readout(&DensityMatrix::basis(2, 0), &s).unwrap();
        assert_eq!(out, vec![0.0; 8]);
    }

    #[test]
    fn single_coherence_readout() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let rho = DensityMatrix::from_pure(&[C64::new(h, 0.0), C64::new(h, 0.0), z, z]).unwrap();
        let s = TomographySetting::from_label("II").unwrap();
        let out = simulate_readout(&rho, &s).unwrap();
        // transition 00↔01 is the third peak (second qubit, spectator 0)
        let mut want = vec![0.0; 8];
        want[4] = 0.5;
        for (a, b) in out.iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn readout_matches_coefficient_blocks() {
        let mut rng = seeded(21);
        for n in [2, 3] {
            let settings = standard_settings(n).unwrap();
            let a = build_a(&settings).unwrap();
            for _ in 0..200 {
                let rho = random_mixed_state(n, &mut rng);
                let x = DVector::from_column_slice(&pauli_expand(rho.matrix()).unwrap().coeffs);
                for (k, s) in settings.iter().enumerate() {
                    let direct = simulate_readout(&rho, s).unwrap();
                    let via_a = a.setting_block(k) * &x;
                    for (u, v) in direct.iter().zip(via_a.iter()) {
                        assert!((u - v).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn coefficient_matrix_shape_and_rank() {
        let a = a2();
        assert_eq!(a.matrix().shape(), (33, 16));
        assert_eq!(singular_values(a.matrix()).iter().filter(|&&s| s > 1e-10).count(), 16);
        let a3 = build_a(&standard_settings(3).unwrap()).unwrap();
        assert_eq!(a3.matrix().shape(), (169, 64));
        assert_eq!(singular_values(a3.matrix()).iter().filter(|&&s| s > 1e-10).count(), 64);
        // trace row
        assert_eq!(a.matrix()[(32, 0)], 4.0);
        assert!(a.matrix().row(32).iter().skip(1).all(|&v| v == 0.0));
    }

    #[test]
    fn coefficient_matrix_is_deterministic_and_memoized() {
        let s = standard_settings(2).unwrap();
        let a = build_a(&s).unwrap();
        let b = build_a(&s).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let m1 = coefficient_matrix(&s).unwrap();
        let m2 = coefficient_matrix(&s).unwrap();
        assert!(Arc::ptr_eq(&m1, &m2));
    }

    #[test]
    fn b_vector_consistency() {
        let mut rng = seeded(5);
        let settings = standard_settings(2).unwrap();
        let a = a2();
        let mm = DensityMatrix::maximally_mixed(2);
        let b = assemble_b(&mm, &settings).unwrap();
        assert_eq!(b.len(), 33);
        assert!(b.values[..32].iter().all(|&v| v.abs() < 1e-15));
        assert_eq!(b.values[32], 1.0);
        for _ in 0..500 {
            let rho = random_pure_state(2, &mut rng);
            let b = assemble_b(&rho, &settings).unwrap();
            let ax = a.apply(&rho.pauli()).unwrap();
            let res = b.values.iter().zip(&ax).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            assert!(res <= 1e-10);
            assert!((b.values[32] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_inversion_round_trip() {
        let mut rng = seeded(8);
        let settings = standard_settings(2).unwrap();
        let a = a2();
        for _ in 0..500 {
            let rho = random_mixed_state(2, &mut rng);
            let b = assemble_b(&rho, &settings).unwrap();
            let est = linear_inversion_qst(&b, &a).unwrap();
            assert!(fidelity(&est, rho.matrix()).unwrap() >= 0.999999);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let bell = DensityMatrix::from_pure(&[C64::new(h, 0.0), z, z, C64::new(h, 0.0)]).unwrap();
        let est = linear_inversion_qst(&assemble_b(&bell, &settings).unwrap(), &a).unwrap();
        assert!((fidelity(&est, bell.matrix()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn linear_inversion_with_noise() {
        let mut rng = seeded(13);
        let settings = standard_settings(2).unwrap();
        let a = a2();
        let mut total = 0.0;
        for _ in 0..200 {
            let rho = random_mixed_state(2, &mut rng);
            let mut b = assemble_b(&rho, &settings).unwrap();
            let trace_row = b.values[32];
            b.add_noise(0.01, &mut rng).unwrap();
            assert_eq!(b.values[32], trace_row);
            total += fidelity(&linear_inversion_qst(&b, &a).unwrap(), rho.matrix()).unwrap();
        }
        assert!(total / 200.0 >= 0.98);
    }

    #[test]
    fn rank_deficient_system_is_ill_posed() {
        let only_identity = vec![TomographySetting::from_label("II").unwrap()];
        let a = build_a(&only_identity).unwrap();
        let b = ReadoutVector { n_qubits: 2, values: vec![0.0; 9] };
        assert!(matches!(linear_inversion_qst(&b, &a), Err(Error::IllPosed(_))));
    }

    #[test]
    fn reduce_edge_cases() {
        let mut rng = seeded(1);
        let b: Vec<f64> = (1..=33).map(f64::from).collect();
        let full = reduce(&b, 33, &mut rng).unwrap();
        assert_eq!(full.values, b);
        assert!(full.mask.iter().all(|&k| k));
        let none = reduce(&b, 0, &mut rng).unwrap();
        assert!(none.values.iter().all(|&v| v == 0.0));
        let r1 = reduce(&b, 12, &mut seeded(4)).unwrap();
        let r2 = reduce(&b, 12, &mut seeded(4)).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.mask.iter().filter(|&&k| k).count(), 12);
        assert_eq!(r1.m_data, 12);
        assert!(reduce(&b, 34, &mut rng).is_err());
    }

    #[test]
    fn reduce_readouts_keeps_trace_row() {
        let rv = ReadoutVector { n_qubits: 2, values: (1..=33).map(f64::from).collect() };
        let r = rv.reduce_readouts(8, &mut seeded(2)).unwrap();
        assert!(r.mask[32]);
        assert_eq!(r.m_data, 9);
        assert!(rv.reduce_readouts(33, &mut seeded(2)).is_err());
    }

    proptest::proptest! {
        #[test]
        fn reduce_is_idempotent(seed in 0u64..1000, m in 0usize..=33) {
            let b: Vec<f64> = (0..33).map(|i| (i as f64 * 0.37).sin()).collect();
            let r = reduce(&b, m, &mut seeded(seed)).unwrap();
            let again = ReducedVector::from_mask(&r.values, r.mask.clone()).unwrap();
            proptest::prop_assert_eq!(&again, &r);
            for (i, &k) in r.mask.iter().enumerate() {
                if k { proptest::prop_assert_eq!(r.values[i], b[i]); }
                else { proptest::prop_assert_eq!(r.values[i].to_bits(), 0f64.to_bits()); }
            }
        }
    }
}
