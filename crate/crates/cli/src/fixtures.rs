//! Named states and processes used to emulate experiments.

use tomonet::measurement::{
    assemble_b, coefficient_matrix, linear_inversion_coeffs, standard_settings,
};
use tomonet::process::{
    beta_matrix, channel_lambda, decoherence_channel, gate_library, gradient_channel,
    linear_inversion_qpt, noise_channel, LambdaMode, NoiseKind, D1_DELAY, D2_DELAY,
    GRADIENT_STRENGTH, NMR_T1, NMR_T2,
};
use tomonet::rng::TomoRng;
use tomonet::{DensityMatrix, KrausSet, C64};

/// Strength of the correlated noise fixtures.
pub const NOISE_FIXTURE_P: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct NamedState {
    pub name: &'static str,
    pub state: DensityMatrix,
}

#[derive(Debug, Clone)]
pub struct NamedProcess {
    pub name: &'static str,
    pub unitary: bool,
    pub channel: KrausSet,
}

#[derive(Debug, Clone)]
pub struct FixtureLibrary {
    pub states: Vec<NamedState>,
    pub processes: Vec<NamedProcess>,
}

fn ket(n_qubits: usize, terms: &[(usize, f64)]) -> DensityMatrix {
    let mut psi = vec![C64::new(0.0, 0.0); 1 << n_qubits];
    for &(i, a) in terms {
        psi[i] = C64::new(a, 0.0);
    }
    DensityMatrix::from_pure(&psi).expect("normalized fixture state")
}

impl FixtureLibrary {
    pub fn new() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let states = vec![
            NamedState { name: "B1", state: ket(2, &[(0b00, h), (0b11, h)]) },
            NamedState { name: "B2", state: ket(2, &[(0b01, h), (0b10, -h)]) },
            NamedState { name: "B3", state: ket(2, &[(0b00, h), (0b11, -h)]) },
            NamedState { name: "B4", state: ket(2, &[(0b01, h), (0b10, h)]) },
            NamedState { name: "psi1", state: ket(3, &[(0b000, h), (0b111, h)]) },
            NamedState { name: "psi2", state: ket(3, &[(0b010, h), (0b101, h)]) },
            NamedState {
                name: "psi3",
                state: ket(3, &[(0b000, 0.5), (0b001, 0.5), (0b110, 0.5), (0b111, 0.5)]),
            },
            NamedState {
                name: "psi4",
                state: ket(3, &[(0b000, 0.5), (0b010, 0.5), (0b101, 0.5), (0b111, 0.5)]),
            },
        ];

        let gates = gate_library();
        let mut processes: Vec<NamedProcess> = gates
            .iter()
            .map(|(name, u)| NamedProcess {
                name,
                unitary: true,
                channel: KrausSet::from_unitary(u),
            })
            .collect();
        let channel = |name, channel| NamedProcess { name, unitary: false, channel };
        processes.extend([
            channel("D1", decoherence_channel(D1_DELAY, NMR_T1, NMR_T2, 2).expect("valid delay")),
            channel("D2", decoherence_channel(D2_DELAY, NMR_T1, NMR_T2, 2).expect("valid delay")),
            channel("Grad", gradient_channel(GRADIENT_STRENGTH).expect("valid strength")),
            channel("CBF", noise_channel(NoiseKind::Cbf, NOISE_FIXTURE_P).expect("valid p")),
            channel("CPF", noise_channel(NoiseKind::Cpf, NOISE_FIXTURE_P).expect("valid p")),
            channel("CBPF", noise_channel(NoiseKind::Cbpf, NOISE_FIXTURE_P).expect("valid p")),
        ]);
        Self { states, processes }
    }

    pub fn states_for(&self, n_qubits: usize) -> impl Iterator<Item = &NamedState> {
        self.states.iter().filter(move |s| s.state.n_qubits() == n_qubits)
    }

    pub fn state(&self, name: &str) -> Option<&NamedState> {
        self.states.iter().find(|s| s.name.eq_ignore_ascii_case(name))
    }

    pub fn process(&self, name: &str) -> Option<&NamedProcess> {
        self.processes.iter().find(|p| p.name.eq_ignore_ascii_case(name))
    }
}

impl Default for FixtureLibrary {
    fn default() -> Self {
        Self::new()
    }
}

/// Emulated measurement of a fixture: the full noisy input vector and the
/// linear-inversion reconstruction from it, in the network's output
/// representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Emulation {
    pub input: Vec<f64>,
    pub reference: Vec<f64>,
}

/// Noisy readout vector of a state and its Pauli coefficients by linear
/// inversion.
pub fn emulate_state(
    rho: &DensityMatrix,
    sigma: f64,
    rng: &mut TomoRng,
) -> tomonet::Result<Emulation> {
    let settings = standard_settings(rho.n_qubits())?;
    let mut b = assemble_b(rho, &settings)?;
    b.add_noise(sigma, rng)?;
    let a = coefficient_matrix(&settings)?;
    let reference = linear_inversion_coeffs(&b.values, &a)?.coeffs;
    Ok(Emulation { input: b.values, reference })
}

/// Noisy compact λ of a channel and its compact χ by linear inversion.
pub fn emulate_process(
    channel: &KrausSet,
    sigma: f64,
    rng: &mut TomoRng,
) -> tomonet::Result<Emulation> {
    let mut lambda = channel_lambda(channel, LambdaMode::Compact)?;
    lambda.add_noise(sigma, rng)?;
    let beta = beta_matrix(channel.n_qubits(), LambdaMode::Compact)?;
    let reference = linear_inversion_qpt(&lambda, &beta)?.to_compact();
    Ok(Emulation { input: lambda.values, reference })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tomonet::linalg::trace;
    use tomonet::rng::seeded;

    #[test]
    fn fixtures_are_physical() {
        let lib = FixtureLibrary::new();
        assert_eq!(lib.states_for(2).count(), 4);
        assert_eq!(lib.states_for(3).count(), 4);
        for s in &lib.states {
            assert!((s.state.purity() - 1.0).abs() < 1e-12, "{}", s.name);
            assert!((trace(s.state.matrix()).re - 1.0).abs() < 1e-12);
        }
        assert_eq!(lib.processes.len(), 10);
        for p in &lib.processes {
            assert!(p.channel.completeness_error() < 1e-9, "{}", p.name);
        }
        assert!(lib.process("cnot").unwrap().unitary);
        assert!(lib.state("psi5").is_none());
    }

    #[test]
    fn noiseless_emulation_reproduces_truth() {
        let lib = FixtureLibrary::new();
        let mut rng = seeded(0);
        let b1 = emulate_state(&lib.state("B1").unwrap().state, 0.0, &mut rng).unwrap();
        assert!((b1.reference[0] - 0.25).abs() < 1e-12);
        assert!((b1.reference[15] - 0.25).abs() < 1e-12);
        let id = emulate_process(&lib.process("Identity").unwrap().channel, 0.0, &mut rng).unwrap();
        assert!((id.reference[0] - 1.0).abs() < 1e-9);
        assert!(id.reference[1..].iter().all(|v| v.abs() < 1e-9));
    }
}
