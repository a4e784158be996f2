use crate::linalg::{ComplexMatrix, C64};
use crate::quantum::UnitaryOp;

/// The two-qubit gates characterized in the process-tomography experiments.
/// Qubit 1 (most significant) is the control throughout.
#[derive(Debug, Clone)]
pub struct GateLibrary {
    pub identity: UnitaryOp,
    pub cnot: UnitaryOp,
    /// Controlled `exp(-iπX/2) = -iX`; differs from CNOT by a `-i` phase on
    /// the target subspace.
    pub cx180: UnitaryOp,
    /// Controlled `exp(-iπY/4)`.
    pub cy90: UnitaryOp,
}

impl GateLibrary {
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &UnitaryOp)> {
        [
            ("Identity", &self.identity),
            ("CNOT", &self.cnot),
            ("CX180", &self.cx180),
            ("CY90", &self.cy90),
        ]
        .into_iter()
    }

    pub fn get(&self, name: &str) -> Option<&UnitaryOp> {
        self.iter().find(|(n, _)| n.eq_ignore_ascii_case(name)).map(|(_, u)| u)
    }
}

fn controlled(target: [[C64; 2]; 2]) -> UnitaryOp {
    let mut m = ComplexMatrix::identity(4, 4);
    for r in 0..2 {
        for c in 0..2 {
            m[(2 + r, 2 + c)] = target[r][c];
        }
    }
    UnitaryOp::new(m).expect("controlled unitary")
}

pub fn gate_library() -> GateLibrary {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mi = C64::new(0.0, -1.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    GateLibrary {
        identity: UnitaryOp::identity(2),
        cnot: controlled([[z, one], [one, z]]),
        cx180: controlled([[z, mi], [mi, z]]),
        cy90: controlled([
            [C64::new(h, 0.0), C64::new(-h, 0.0)],
            [C64::new(h, 0.0), C64::new(h, 0.0)],
        ]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_diff};
    use crate::quantum::{chi_from_kraus, KrausSet};

    #[test]
    fn cnot_maps_10_to_11() {
        let g = gate_library();
        let u = g.cnot.matrix();
        assert_eq!(u[(3, 2)], C64::new(1.0, 0.0));
        assert_eq!(u[(2, 2)], C64::new(0.0, 0.0));
    }

    #[test]
    fn gates_are_unitary_with_rank_one_chi() {
        let g = gate_library();
        for (name, u) in g.iter() {
            assert!(
                max_abs_diff(&(u.matrix().adjoint() * u.matrix()), &identity(4)) < 1e-12,
                "{name}"
            );
            let ev = chi_from_kraus(&KrausSet::from_unitary(u)).eigenvalues();
            assert!((ev[15] - 1.0).abs() < 1e-10, "{name}");
            assert!(ev[..15].iter().all(|l| l.abs() < 1e-10), "{name}");
        }
        assert!(g.get("cy90").is_some());
        assert!(g.get("swap").is_none());
    }
}
