use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::quantum::{DensityMatrix, KrausSet, PauliString};

/// Relaxation constants used to emulate the free-evolution processes (s).
pub const NMR_T1: f64 = 5.0;
pub const NMR_T2: f64 = 0.8;
/// Free-evolution delays of the D1 and D2 processes (s).
pub const D1_DELAY: f64 = 0.05;
pub const D2_DELAY: f64 = 0.5;
/// Gradient pulse strength (fraction of full scale).
pub const GRADIENT_STRENGTH: f64 = 0.15;
/// Coherence attenuation per qubit is `exp(-GRADIENT_DECAY_RATE · strength)`.
pub const GRADIENT_DECAY_RATE: f64 = 5.0;

/// Fully correlated two-qubit Pauli noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseKind {
    /// Correlated bit flip, `σx⊗σx`.
    #[serde(rename = "CBF")]
    Cbf,
    /// Correlated phase flip, `σz⊗σz`.
    #[serde(rename = "CPF")]
    Cpf,
    /// Correlated bit+phase flip, `σy⊗σy`.
    #[serde(rename = "CBPF")]
    Cbpf,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Cbf => "CBF",
            NoiseKind::Cpf => "CPF",
            NoiseKind::Cbpf => "CBPF",
        }
    }

    /// The flip operator `U_1`.
    pub fn flip(self) -> ComplexMatrix {
        let label = match self {
            NoiseKind::Cbf => "XX",
            NoiseKind::Cpf => "ZZ",
            NoiseKind::Cbpf => "YY",
        };
        PauliString::from_label(label).expect("valid label").matrix()
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("noise strength {p} not in [0, 1]")))
    }
}

/// `{√(1−p) I⊗I, √p U_1}`.
pub fn noise_channel(kind: NoiseKind, p: f64) -> Result<KrausSet> {
    check_probability(p)?;
    KrausSet::new(vec![
        ComplexMatrix::identity(4, 4) * C64::new((1.0 - p).sqrt(), 0.0),
        kind.flip() * C64::new(p.sqrt(), 0.0),
    ])
}

/// Single-ancilla duality-simulation circuit for a correlated noise channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DsaChannelSpec {
    pub kind: NoiseKind,
    pub p: f64,
}

impl DsaChannelSpec {
    pub fn new(kind: NoiseKind, p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(Self { kind, p })
    }

    /// Rotation angle with `p = sin²(θ/2)`.
    pub fn theta(&self) -> f64 {
        2.0 * self.p.sqrt().asin()
    }

    /// `V = R_y(θ)`.
    pub fn v(&self) -> ComplexMatrix {
        let (s, c) = (self.theta() / 2.0).sin_cos();
        ComplexMatrix::from_row_slice(
            2,
            2,
            &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
        )
    }

    pub fn w(&self) -> ComplexMatrix {
        ComplexMatrix::identity(2, 2)
    }

    /// `[U_0, U_1]`.
    pub fn controlled_ops(&self) -> [ComplexMatrix; 2] {
        [ComplexMatrix::identity(4, 4), self.kind.flip()]
    }

    /// `E_k = Σ_i W_ki V_i0 U_i`.
    pub fn kraus(&self) -> Result<KrausSet> {
        let v = self.v();
        let w = self.w();
        let u = self.controlled_ops();
        let ops = (0..2)
            .map(|k| {
                (0..2).fold(ComplexMatrix::zeros(4, 4), |acc, i| {
                    acc + &u[i] * (w[(k, i)] * v[(i, 0)])
                })
            })
            .collect();
        KrausSet::new(ops)
    }
}

/// Runs the circuit: `|0⟩⟨0|_a ⊗ ρ_s`, then `V⊗I`, `U_c = Σ_i |i⟩⟨i| ⊗ U_i`,
/// `W⊗I`, and traces out the ancilla.
pub fn dsa_simulate(spec: &DsaChannelSpec, rho_s: &DensityMatrix) -> Result<DensityMatrix> {
    check_dim(2, rho_s.n_qubits())?;
    let i4 = ComplexMatrix::identity(4, 4);
    let mut anc0 = ComplexMatrix::zeros(2, 2);
    anc0[(0, 0)] = C64::new(1.0, 0.0);
    let mut state = anc0.kronecker(rho_s.matrix());

    let [u0, u1] = spec.controlled_ops();
    let mut uc = ComplexMatrix::zeros(8, 8);
    uc.view_mut((0, 0), (4, 4)).copy_from(&u0);
    uc.view_mut((4, 4), (4, 4)).copy_from(&u1);

    for gate in [spec.v().kronecker(&i4), uc, spec.w().kronecker(&i4)] {
        state = &gate * state * gate.adjoint();
    }
    let reduced = ComplexMatrix::from_fn(4, 4, |r, c| state[(r, c)] + state[(4 + r, 4 + c)]);
    Ok(DensityMatrix::from_trusted(reduced))
}

fn dephasing_ops(factor: f64) -> Vec<ComplexMatrix> {
    let z = PauliString::from_label("Z").expect("label").matrix();
    vec![
        ComplexMatrix::identity(2, 2) * C64::new(((1.0 + factor) / 2.0).sqrt(), 0.0),
        z * C64::new(((1.0 - factor) / 2.0).sqrt(), 0.0),
    ]
}

fn prune(ops: Vec<ComplexMatrix>) -> Vec<ComplexMatrix> {
    ops.into_iter().filter(|m| m.norm() > 1e-15).collect()
}

fn tensor_power(single: &KrausSet, n_qubits: usize) -> KrausSet {
    (1..n_qubits).fold(single.clone(), |acc, _| acc.tensor(single))
}

/// Free evolution for `t` seconds under amplitude damping (`T1`) plus the
/// pure dephasing needed for a total coherence decay of `exp(-t/T2)`,
/// applied independently to every qubit.
pub fn decoherence_channel(t: f64, t1: f64, t2: f64, n_qubits: usize) -> Result<KrausSet> {
    if t < 0.0 || t1.is_nan() || t1 <= 0.0 || t2.is_nan() || t2 <= 0.0 || t2 > 2.0 * t1 {
        return Err(Error::OutOfRange(format!(
            "need t ≥ 0, T1 > 0 and 0 < T2 ≤ 2·T1 (t={t}, T1={t1}, T2={t2})"
        )));
    }
    if n_qubits == 0 {
        return Err(Error::UnsupportedQubits(0));
    }
    let gamma = if t.is_infinite() { 1.0 } else { 1.0 - (-t / t1).exp() };
    let dephase = if t.is_infinite() { 0.0 } else { (-t * (1.0 / t2 - 0.5 / t1)).exp() };
    let amp = KrausSet::new(prune(vec![
        ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new((1.0 - gamma).sqrt(), 0.0),
            ],
        ),
        ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(gamma.sqrt(), 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        ),
    ]))?;
    let phase = KrausSet::new(prune(dephasing_ops(dephase)))?;
    let single = KrausSet::new(prune(amp.then(&phase).ops().to_vec()))?;
    Ok(tensor_power(&single, n_qubits))
}

/// Pulsed field gradient modeled as equal, independent dephasing of both
/// qubits with per-qubit coherence factor `exp(-GRADIENT_DECAY_RATE · strength)`.
pub fn gradient_channel(strength: f64) -> Result<KrausSet> {
    if !(0.0..=1.0).contains(&strength) {
        return Err(Error::OutOfRange(format!("gradient strength {strength} not in [0, 1]")));
    }
    let factor = (-GRADIENT_DECAY_RATE * strength).exp();
    let single = KrausSet::new(prune(dephasing_ops(factor)))?;
    Ok(tensor_power(&single, 2))
}

/// Serializable description of a non-unitary process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Noise { kind: NoiseKind, p: f64 },
    Decoherence { t: f64, t1: f64, t2: f64 },
    Gradient { strength: f64 },
}

impl ChannelSpec {
    pub fn kraus(&self, n_qubits: usize) -> Result<KrausSet> {
        match *self {
            ChannelSpec::Noise { kind, p } => {
                check_dim(2, n_qubits)?;
                noise_channel(kind, p)
            }
            ChannelSpec::Decoherence { t, t1, t2 } => decoherence_channel(t, t1, t2, n_qubits),
            ChannelSpec::Gradient { strength } => {
                check_dim(2, n_qubits)?;
                gradient_channel(strength)
            }
        }
    }
}
