use serde::{Deserialize, Serialize};

use super::{pauli_matrices, KrausSet, PauliString};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{hermitian_eigenvalues, is_hermitian, ComplexMatrix, C64};

/// Process matrix in the Pauli-string operator basis:
/// `Λ(ρ) = Σ_mn χ_mn P_m ρ P_n†`.
///
/// With un-scaled Pauli strings a trace-preserving map has `Tr χ = 1`, so the
/// identity channel is the single entry `χ(II,II) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiMatrix {
    n_qubits: usize,
    mat: ComplexMatrix,
}

/// Row-major Re/Im serialization of a [`ChiMatrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiJson {
    pub n_qubits: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl ChiMatrix {
    pub fn new(n_qubits: usize, mat: ComplexMatrix) -> Result<Self> {
        let dim = 1 << (2 * n_qubits);
        check_dim(dim, mat.nrows())?;
        check_dim(dim, mat.ncols())?;
        Ok(Self { n_qubits, mat })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// `4^n`.
    pub fn basis_len(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.mat[(m, n)]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        is_hermitian(&self.mat, tol)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    /// `(χ + χ†)/2`.
    pub fn hermitized(&self) -> Self {
        Self { n_qubits: self.n_qubits, mat: (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0) }
    }

    /// Applies the map to an arbitrary matrix.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = 1 << self.n_qubits;
        check_dim(d, rho.nrows())?;
        let ps = pauli_matrices(self.n_qubits);
        let mut out = ComplexMatrix::zeros(d, d);
        for (m, pm) in ps.iter().enumerate() {
            let left = pm * rho;
            for (n, pn) in ps.iter().enumerate() {
                let c = self.mat[(m, n)];
                if c.norm() == 0.0 {
                    continue;
                }
                out += &left * pn * c;
            }
        }
        Ok(out)
    }

    /// `Σ_mn χ_mn P_n† P_m`; equals the identity for trace-preserving maps.
    pub fn trace_condition(&self) -> ComplexMatrix {
        let d = 1 << self.n_qubits;
        let ps = pauli_matrices(self.n_qubits);
        let mut out = ComplexMatrix::zeros(d, d);
        for (m, pm) in ps.iter().enumerate() {
            for (n, pn) in ps.iter().enumerate() {
                out += pn.adjoint() * pm * self.mat[(m, n)];
            }
        }
        out
    }

    /// Real Hermitian parametrization of length `(4^n)²`: slot `m·D + n`
    /// holds `χ_mm` for `m = n`, `Re χ_mn` for `m < n` and `Im χ_nm` for
    /// `m > n`. The anti-Hermitian part is dropped.
    pub fn to_compact(&self) -> Vec<f64> {
        let dd = self.basis_len();
        let mut v = vec![0.0; dd * dd];
        for m in 0..dd {
            for n in 0..dd {
                v[m * dd + n] = match m.cmp(&n) {
                    std::cmp::Ordering::Equal => self.mat[(m, m)].re,
                    std::cmp::Ordering::Less => 0.5 * (self.mat[(m, n)].re + self.mat[(n, m)].re),
                    std::cmp::Ordering::Greater => {
                        0.5 * (self.mat[(n, m)].im - self.mat[(m, n)].im)
                    }
                };
            }
        }
        v
    }

    /// Inverse of [`ChiMatrix::to_compact`]; the result is Hermitian.
    pub fn from_compact(n_qubits: usize, v: &[f64]) -> Result<Self> {
        let dd = 1usize << (2 * n_qubits);
        check_dim(dd * dd, v.len())?;
        let mat = ComplexMatrix::from_fn(dd, dd, |m, n| match m.cmp(&n) {
            std::cmp::Ordering::Equal => C64::new(v[m * dd + m], 0.0),
            std::cmp::Ordering::Less => C64::new(v[m * dd + n], v[n * dd + m]),
            std::cmp::Ordering::Greater => C64::new(v[n * dd + m], -v[m * dd + n]),
        });
        Ok(Self { n_qubits, mat })
    }

    pub fn to_json(&self) -> ChiJson {
        let dd = self.basis_len();
        ChiJson {
            n_qubits: self.n_qubits,
            re: (0..dd).map(|r| (0..dd).map(|c| self.mat[(r, c)].re).collect()).collect(),
            im: (0..dd).map(|r| (0..dd).map(|c| self.mat[(r, c)].im).collect()).collect(),
        }
    }

    pub fn from_json(j: &ChiJson) -> Result<Self> {
        let dd = 1usize << (2 * j.n_qubits);
        check_dim(dd, j.re.len())?;
        check_dim(dd, j.im.len())?;
        for (r, i) in j.re.iter().zip(&j.im) {
            check_dim(dd, r.len())?;
            check_dim(dd, i.len())?;
        }
        let mat = ComplexMatrix::from_fn(dd, dd, |r, c| C64::new(j.re[r][c], j.im[r][c]));
        Self::new(j.n_qubits, mat)
    }

    /// Label of a basis index, e.g. `"XX"`.
    pub fn label(&self, index: usize) -> String {
        PauliString::new(self.n_qubits, index).label()
    }
}

/// χ of a Kraus channel: with `E_k = Σ_m c_km P_m`, `χ_mn = Σ_k c_km c̄_kn`.
pub fn chi_from_kraus(ks: &KrausSet) -> ChiMatrix {
    let n = ks.n_qubits();
    let dd = 1usize << (2 * n);
    let d = (1usize << n) as f64;
    let mut mat = ComplexMatrix::zeros(dd, dd);
    for e in ks.ops() {
        // c_m = Tr(P_m E)/d  (P_m Hermitian)
        let c: Vec<C64> = (0..dd).map(|m| PauliString::new(n, m).trace_with(e) / d).collect();
        for a in 0..dd {
            if c[a].norm() == 0.0 {
                continue;
            }
            for b in 0..dd {
                mat[(a, b)] += c[a] * c[b].conj();
            }
        }
    }
    ChiMatrix { n_qubits: n, mat }
}

impl TryFrom<(usize, ComplexMatrix)> for ChiMatrix {
    type Error = Error;
    fn try_from((n, m): (usize, ComplexMatrix)) -> Result<Self> {
        Self::new(n, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_diff};
    use crate::quantum::{apply_kraus, random_unitary};
    use crate::rng::seeded;

    #[test]
    fn identity_channel_chi() {
        let chi = chi_from_kraus(&KrausSet::identity(2));
        for m in 0..16 {
            for n in 0..16 {
                let want = if m == 0 && n == 0 { 1.0 } else { 0.0 };
                assert!((chi.get(m, n) - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn compact_round_trip() {
        let mut rng = seeded(2);
        let u = random_unitary(2, &mut rng);
        let chi = chi_from_kraus(&KrausSet::from_unitary(&u));
        let back = ChiMatrix::from_compact(2, &chi.to_compact()).unwrap();
        assert!(max_abs_diff(back.matrix(), chi.matrix()) < 1e-15);
        let j = ChiMatrix::from_json(&chi.to_json()).unwrap();
        assert_eq!(j, chi);
    }

    #[test]
    fn unitary_chi_is_rank_one_and_reproduces_map() {
        let mut rng = seeded(4);
        for _ in 0..50 {
            let u = random_unitary(2, &mut rng);
            let ks = KrausSet::from_unitary(&u);
            let chi = chi_from_kraus(&ks);
            let ev = chi.eigenvalues();
            assert!((ev[15] - 1.0).abs() < 1e-10);
            assert!(ev[..15].iter().all(|l| l.abs() < 1e-10));
            assert!(max_abs_diff(&chi.trace_condition(), &identity(4)) < 1e-10);
            let rho = crate::datasets::random_mixed_state(2, &mut rng);
            let via_chi = chi.apply(rho.matrix()).unwrap();
            let via_kraus = apply_kraus(&rho, &ks).unwrap();
            assert!(max_abs_diff(&via_chi, via_kraus.matrix()) < 1e-10);
        }
    }
}
