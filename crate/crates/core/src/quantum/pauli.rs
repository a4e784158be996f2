//! Pauli product basis.
//!
//! Strings are indexed lexicographically with `I < X < Y < Z`; the leftmost
//! factor acts on the first (most significant) qubit. Every module uses this
//! single ordering.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// One Pauli string on `n` qubits, stored as bit masks.
///
/// Acting on a basis state, `P |r⟩ = phase(r) |r ⊕ x_mask⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliString {
    n_qubits: usize,
    index: usize,
    x_mask: usize,
    z_mask: usize,
    y_count: u32,
}

impl PauliString {
    /// String number `index` (base-4 digits, first qubit most significant).
    pub fn new(n_qubits: usize, index: usize) -> Self {
        assert!(index < 1 << (2 * n_qubits), "Pauli index out of range");
        let mut x_mask = 0;
        let mut z_mask = 0;
        let mut y_count = 0;
        for q in 0..n_qubits {
            let digit = (index >> (2 * (n_qubits - 1 - q))) & 3;
            let bit = 1 << (n_qubits - 1 - q);
            match digit {
                1 => x_mask |= bit,
                2 => {
                    x_mask |= bit;
                    z_mask |= bit;
                    y_count += 1;
                }
                3 => z_mask |= bit,
                _ => {}
            }
        }
        Self { n_qubits, index, x_mask, z_mask, y_count }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        let n = label.chars().count();
        let mut index = 0;
        for ch in label.chars() {
            let d = LETTERS.iter().position(|&l| l == ch.to_ascii_uppercase())?;
            index = index * 4 + d;
        }
        Some(Self::new(n, index))
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn label(&self) -> String {
        (0..self.n_qubits)
            .map(|q| LETTERS[(self.index >> (2 * (self.n_qubits - 1 - q))) & 3])
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.index == 0
    }

    /// Column `col` has its single nonzero at row `col ⊕ x_mask`; returns that
    /// row and the entry.
    #[inline]
    pub fn column_entry(&self, col: usize) -> (usize, C64) {
        // Y = i·X·Z, so the phase is i^{#Y} · (-1)^{popcount(col & z)}.
        let sign = if (col & self.z_mask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        let phase = match self.y_count % 4 {
            0 => C64::new(sign, 0.0),
            1 => C64::new(0.0, sign),
            2 => C64::new(-sign, 0.0),
            _ => C64::new(0.0, -sign),
        };
        (col ^ self.x_mask, phase)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let d = 1 << self.n_qubits;
        let mut m = ComplexMatrix::from_element(d, d, ZERO);
        for c in 0..d {
            let (r, v) = self.column_entry(c);
            m[(r, c)] = v;
        }
        m
    }

    /// `Tr(m · P)`.
    pub fn trace_with(&self, m: &ComplexMatrix) -> C64 {
        // Tr(mP) = Σ_c m[c, r(c)]·P[r(c), c]
        let d = 1 << self.n_qubits;
        (0..d)
            .map(|c| {
                let (r, v) = self.column_entry(c);
                m[(c, r)] * v
            })
            .sum()
    }
}

/// Dense matrices of all `4^n` Pauli strings, cached per qubit count.
pub fn pauli_matrices(n_qubits: usize) -> &'static [ComplexMatrix] {
    static CACHE: [OnceLock<Vec<ComplexMatrix>>; 5] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    assert!(n_qubits < CACHE.len(), "Pauli cache supports at most 4 qubits");
    CACHE[n_qubits].get_or_init(|| {
        (0..1usize << (2 * n_qubits)).map(|s| PauliString::new(n_qubits, s).matrix()).collect()
    })
}

/// Real Pauli-basis expansion `ρ = Σ_s coeffs[s] · P_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficients {
    pub n_qubits: usize,
    pub coeffs: Vec<f64>,
}

impl PauliCoefficients {
    pub fn new(n_qubits: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_dim(1 << (2 * n_qubits), coeffs.len())?;
        Ok(Self { n_qubits, coeffs })
    }

    /// Expectation values `Tr(ρ P_s) = 2^n · coeffs[s]`.
    pub fn expectations(&self) -> Vec<f64> {
        let d = (1usize << self.n_qubits) as f64;
        self.coeffs.iter().map(|c| c * d).collect()
    }

    pub fn from_expectations(n_qubits: usize, values: &[f64]) -> Result<Self> {
        let d = (1usize << n_qubits) as f64;
        Self::new(n_qubits, values.iter().map(|v| v / d).collect())
    }
}

/// `coeffs[s] = Re Tr(ρ P_s) / 2^n`.
pub fn pauli_expand(rho: &ComplexMatrix) -> Result<PauliCoefficients> {
    let n_qubits = qubits_of(rho)?;
    let d = (1usize << n_qubits) as f64;
    let coeffs = (0..1usize << (2 * n_qubits))
        .map(|s| PauliString::new(n_qubits, s).trace_with(rho).re / d)
        .collect();
    Ok(PauliCoefficients { n_qubits, coeffs })
}

/// `Σ_s coeffs[s] · P_s`. Hermitian by construction; no positivity projection.
pub fn pauli_reconstruct(c: &PauliCoefficients) -> Result<ComplexMatrix> {
    check_dim(1 << (2 * c.n_qubits), c.coeffs.len())?;
    let d = 1 << c.n_qubits;
    let mut m = ComplexMatrix::from_element(d, d, ZERO);
    for (s, &a) in c.coeffs.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let p = PauliString::new(c.n_qubits, s);
        for col in 0..d {
            let (row, v) = p.column_entry(col);
            m[(row, col)] += v * a;
        }
    }
    Ok(m)
}

/// Number of qubits of a square `2^n × 2^n` matrix.
pub fn qubits_of(m: &ComplexMatrix) -> Result<usize> {
    let d = m.nrows();
    check_dim(d, m.ncols())?;
    if d == 0 || !d.is_power_of_two() {
        return Err(crate::error::Error::DimensionMismatch {
            expected: d.next_power_of_two().max(2),
            actual: d,
        });
    }
    Ok(d.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_diff};

    fn single(letter: usize) -> ComplexMatrix {
        let o = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match letter {
            0 => identity(2),
            1 => ComplexMatrix::from_row_slice(2, 2, &[ZERO, o, o, ZERO]),
            2 => ComplexMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
            _ => ComplexMatrix::from_row_slice(2, 2, &[o, ZERO, ZERO, -o]),
        }
    }

    #[test]
    fn sparse_form_matches_kronecker_products() {
        for n in 1..=3 {
            for s in 0..1usize << (2 * n) {
                let factors: Vec<_> =
                    (0..n).map(|q| single((s >> (2 * (n - 1 - q))) & 3)).collect();
                let dense = crate::linalg::kron_all(factors.iter());
                assert!(max_abs_diff(&dense, &PauliString::new(n, s).matrix()) < 1e-15);
            }
        }
    }

    #[test]
    fn labels_round_trip() {
        let p = PauliString::from_label("XYZ").unwrap();
        assert_eq!(p.index(), 16 + 2 * 4 + 3);
        assert_eq!(p.label(), "XYZ");
        assert!(PauliString::from_label("XQ").is_none());
    }

    #[test]
    fn ground_state_expansion() {
        let mut rho = ComplexMatrix::from_element(2, 2, ZERO);
        rho[(0, 0)] = C64::new(1.0, 0.0);
        let c = pauli_expand(&rho).unwrap();
        assert_eq!(c.coeffs, vec![0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn maximally_mixed_expansion() {
        let rho = identity(4) * C64::new(0.25, 0.0);
        let c = pauli_expand(&rho).unwrap();
        assert_eq!(c.coeffs[0], 0.25);
        assert!(c.coeffs[1..].iter().all(|&x| x == 0.0));
        let back = pauli_reconstruct(&c).unwrap();
        assert!(max_abs_diff(&back, &rho) < 1e-15);
    }

    #[test]
    fn zero_coefficients_reconstruct_zero() {
        let c = PauliCoefficients::new(2, vec![0.0; 16]).unwrap();
        let m = pauli_reconstruct(&c).unwrap();
        assert!(m.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn bell_state_coefficients() {
        // Oracle: Tr(ρP)/4 by dense matrix products.
        let h = 0.5;
        let mut rho = ComplexMatrix::from_element(4, 4, ZERO);
        for &(r, c) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            rho[(r, c)] = C64::new(h, 0.0);
        }
        let c = pauli_expand(&rho).unwrap();
        for (s, p) in pauli_matrices(2).iter().enumerate() {
            let oracle = (&rho * p).trace().re / 4.0;
            assert!((c.coeffs[s] - oracle).abs() < 1e-15);
        }
        let nonzero: Vec<(String, f64)> = c
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > 1e-12)
            .map(|(s, v)| (PauliString::new(2, s).label(), *v))
            .collect();
        assert_eq!(
            nonzero,
            vec![
                ("II".to_string(), 0.25),
                ("XX".to_string(), 0.25),
                ("YY".to_string(), -0.25),
                ("ZZ".to_string(), 0.25)
            ]
        );
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(PauliCoefficients::new(2, vec![0.0; 15]).is_err());
        let m = ComplexMatrix::from_element(3, 3, ZERO);
        assert!(pauli_expand(&m).is_err());
    }
}
