//! Random state and process ensembles, training sets and the dataset file
//! format.
//!
//! A dataset file is one JSON header line followed by `count` rows of
//! little-endian `f64`. Each row holds the sample kind, the reduced input
//! vector, its mask (1.0 kept, 0.0 dropped) and the target vector.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binio::{expect_eof, read_f64s_into, read_header, write_f64s, write_header};
use crate::error::{Error, Result};
use crate::ffnn::Examples;
use crate::linalg::{ComplexMatrix, C64};
use crate::measurement::{assemble_b, standard_settings, ReducedVector, Reduction};
use crate::process::{beta_matrix, channel_lambda, linear_inversion_qpt, LambdaMode};
use crate::quantum::{random_unitary, DensityMatrix, KrausSet};
use crate::rng::stream;

const FORMAT: &str = "tomonet-dataset";
pub const DATASET_VERSION: u32 = 1;

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `|C⟩⟨C|` for a normalized vector of i.i.d. complex Gaussian amplitudes.
pub fn random_pure_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> DensityMatrix {
    let d = 1usize << n_qubits;
    let psi: Vec<C64> = (0..d).map(|_| gaussian_complex(rng)).collect();
    DensityMatrix::from_pure(&psi).expect("nonzero Gaussian vector")
}

/// `R R† / Tr(R R†)` for a square complex Ginibre matrix `R`.
pub fn random_mixed_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> DensityMatrix {
    let d = 1usize << n_qubits;
    let r = ComplexMatrix::from_fn(d, d, |_, _| gaussian_complex(rng));
    let mut rho = &r * r.adjoint();
    let tr = rho.trace().re;
    rho /= C64::new(tr, 0.0);
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(rho).expect("Ginibre product is a valid state")
}

/// How many entries each sample keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MDataPolicy {
    Full,
    Fixed {
        m: usize,
    },
    /// Drawn per sample, uniformly over `low..=high`.
    Uniform {
        low: usize,
        high: usize,
    },
}

impl MDataPolicy {
    pub fn validate(self, max_m: usize) -> Result<()> {
        let ok = match self {
            MDataPolicy::Full => true,
            MDataPolicy::Fixed { m } => m <= max_m,
            MDataPolicy::Uniform { low, high } => low <= high && high <= max_m,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("M_data policy {self:?} outside 0..={max_m}")))
        }
    }

    pub fn draw<R: Rng + ?Sized>(self, max_m: usize, rng: &mut R) -> usize {
        match self {
            MDataPolicy::Full => max_m,
            MDataPolicy::Fixed { m } => m,
            MDataPolicy::Uniform { low, high } => rng.random_range(low..=high),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Readout vector → Pauli coefficients.
    Qst,
    /// Compact λ → compact χ.
    Qpt,
}

impl Task {
    /// How inputs of this task are reduced.
    pub fn reduction(self) -> Reduction {
        match self {
            Task::Qst => Reduction::ReadoutsKeepTrace,
            Task::Qpt => Reduction::Entries,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Pure,
    Mixed,
    Unitary,
}

impl SampleKind {
    fn code(self) -> f64 {
        match self {
            SampleKind::Pure => 0.0,
            SampleKind::Mixed => 1.0,
            SampleKind::Unitary => 2.0,
        }
    }

    fn from_code(c: f64) -> Result<Self> {
        match c {
            0.0 => Ok(SampleKind::Pure),
            1.0 => Ok(SampleKind::Mixed),
            2.0 => Ok(SampleKind::Unitary),
            _ => Err(Error::Format(format!("bad sample kind code {c}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format: String,
    pub version: u32,
    pub task: Task,
    pub n_qubits: usize,
    pub count: usize,
    pub input_len: usize,
    pub target_len: usize,
    pub m_data: MDataPolicy,
    pub noise_sigma: f64,
    /// Share of pure states (state tomography only).
    pub pure_fraction: Option<f64>,
    pub seed: u64,
}

impl DatasetHeader {
    fn row_len(&self) -> usize {
        1 + 2 * self.input_len + self.target_len
    }
}

/// One generated training or test item.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub kind: SampleKind,
    pub input: ReducedVector,
    pub target: Vec<f64>,
}

/// An in-memory dataset with row-major input and target matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub kinds: Vec<SampleKind>,
    pub inputs: Array2<f64>,
    pub masks: Array2<bool>,
    pub targets: Array2<f64>,
}

impl Dataset {
    fn from_samples(header: DatasetHeader, samples: Vec<Sample>) -> Self {
        let n = samples.len();
        let mut inputs = Array2::zeros((n, header.input_len));
        let mut masks = Array2::from_elem((n, header.input_len), false);
        let mut targets = Array2::zeros((n, header.target_len));
        let mut kinds = Vec::with_capacity(n);
        for (i, s) in samples.into_iter().enumerate() {
            inputs.row_mut(i).assign(&ArrayView1::from(&s.input.values));
            masks.row_mut(i).assign(&ArrayView1::from(&s.input.mask));
            targets.row_mut(i).assign(&ArrayView1::from(&s.target));
            kinds.push(s.kind);
        }
        Self { header, kinds, inputs, masks, targets }
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn examples(&self) -> Examples<'_> {
        Examples { inputs: self.inputs.view(), targets: self.targets.view() }
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample {
            kind: self.kinds[i],
            input: ReducedVector::from_mask(
                &self.inputs.row(i).to_vec(),
                self.masks.row(i).to_vec(),
            )
            .expect("row lengths agree"),
            target: self.targets.row(i).to_vec(),
        }
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        write_header(w, &self.header)?;
        let mut row = Vec::with_capacity(self.header.row_len());
        for i in 0..self.len() {
            row.clear();
            row.push(self.kinds[i].code());
            row.extend(self.inputs.row(i).iter());
            row.extend(self.masks.row(i).iter().map(|&k| if k { 1.0 } else { 0.0 }));
            row.extend(self.targets.row(i).iter());
            write_f64s(w, &row)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Reads a whole dataset, filling the matrices row by row.
    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut reader = DatasetReader::new(r)?;
        let header = reader.header().clone();
        let n = header.count;
        let mut ds = Dataset {
            kinds: Vec::with_capacity(n),
            inputs: Array2::zeros((n, header.input_len)),
            masks: Array2::from_elem((n, header.input_len), false),
            targets: Array2::zeros((n, header.target_len)),
            header,
        };
        let mut i = 0;
        while let Some(s) = reader.next_sample()? {
            ds.inputs.row_mut(i).assign(&ArrayView1::from(&s.input.values));
            ds.masks.row_mut(i).assign(&ArrayView1::from(&s.input.mask));
            ds.targets.row_mut(i).assign(&ArrayView1::from(&s.target));
            ds.kinds.push(s.kind);
            i += 1;
        }
        reader.finish()?;
        Ok(ds)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?))
    }

    /// Plain-text export: `kind, x0.., m0.., y0..` with a header row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let l = self.header.input_len;
        let mut names = vec!["kind".to_string()];
        names.extend((0..l).map(|i| format!("x{i}")));
        names.extend((0..l).map(|i| format!("m{i}")));
        names.extend((0..self.header.target_len).map(|i| format!("y{i}")));
        out.write_record(&names).map_err(csv_err)?;
        for i in 0..self.len() {
            let mut rec = vec![format!("{:?}", self.kinds[i]).to_lowercase()];
            rec.extend(self.inputs.row(i).iter().map(|v| v.to_string()));
            rec.extend(self.masks.row(i).iter().map(|&k| u8::from(k).to_string()));
            rec.extend(self.targets.row(i).iter().map(|v| v.to_string()));
            out.write_record(&rec).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

/// Streams samples from a dataset file without loading it whole.
pub struct DatasetReader<R> {
    inner: R,
    header: DatasetHeader,
    remaining: usize,
    row: Vec<f64>,
}

impl<R: BufRead> DatasetReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let header: DatasetHeader = read_header(&mut inner)?;
        if header.format != FORMAT {
            return Err(Error::Format(format!("not a dataset file: {}", header.format)));
        }
        if header.version != DATASET_VERSION {
            return Err(Error::Version { found: header.version, expected: DATASET_VERSION });
        }
        let row = vec![0.0; header.row_len()];
        Ok(Self { remaining: header.count, inner, header, row })
    }

    pub fn header(&self) -> &DatasetHeader {
        &self.header
    }

    pub fn next_sample(&mut self) -> Result<Option<Sample>> {
        if self.remaining == 0 {
            return Ok(None);
        }
        read_f64s_into(&mut self.inner, &mut self.row)?;
        self.remaining -= 1;
        let l = self.header.input_len;
        let kind = SampleKind::from_code(self.row[0])?;
        let values = self.row[1..1 + l].to_vec();
        let mask = self.row[1 + l..1 + 2 * l]
            .iter()
            .map(|&m| match m {
                1.0 => Ok(true),
                0.0 => Ok(false),
                _ => Err(Error::Format(format!("bad mask value {m}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let m_data = mask.iter().filter(|&&k| k).count();
        if values.iter().zip(&mask).any(|(&v, &k)| !k && v != 0.0) {
            return Err(Error::Format("masked entry is not zero".into()));
        }
        let input = ReducedVector { values, mask, m_data };
        let target = self.row[1 + 2 * l..].to_vec();
        Ok(Some(Sample { kind, input, target }))
    }

    /// Checks that nothing follows the last row.
    pub fn finish(mut self) -> Result<()> {
        if self.remaining != 0 {
            return Err(Error::Format("truncated body".into()));
        }
        expect_eof(&mut self.inner)
    }
}

impl<R: BufRead> Iterator for DatasetReader<R> {
    type Item = Result<Sample>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_sample().transpose()
    }
}

/// Parameters shared by both generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n_qubits: usize,
    pub count: usize,
    pub m_data: MDataPolicy,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl GenConfig {
    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidConfig("count must be at least 1".into()));
        }
        if self.noise_sigma.is_nan() || self.noise_sigma < 0.0 {
            return Err(Error::InvalidConfig("noise σ must be nonnegative".into()));
        }
        Ok(())
    }
}

/// One state-tomography sample: the state's readout vector (noisy, then
/// reduced) and its exact Pauli coefficients.
pub fn qst_sample<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    kind: SampleKind,
    m_data: usize,
    noise_sigma: f64,
    rng: &mut R,
) -> Result<Sample> {
    let settings = standard_settings(rho.n_qubits())?;
    let mut b = assemble_b(rho, &settings)?;
    if noise_sigma > 0.0 {
        b.add_noise(noise_sigma, rng)?;
    }
    let input = b.reduce_readouts(m_data, rng)?;
    Ok(Sample { kind, input, target: rho.pauli().coeffs })
}

/// One process-tomography sample for a channel: compact λ (noisy, then
/// reduced) and the compact χ recovered from the clean λ.
pub fn qpt_sample<R: Rng + ?Sized>(
    channel: &KrausSet,
    kind: SampleKind,
    m_data: usize,
    noise_sigma: f64,
    rng: &mut R,
) -> Result<Sample> {
    let clean = channel_lambda(channel, LambdaMode::Compact)?;
    let beta = beta_matrix(channel.n_qubits(), LambdaMode::Compact)?;
    let target = linear_inversion_qpt(&clean, &beta)?.to_compact();
    let mut lambda = clean;
    if noise_sigma > 0.0 {
        lambda.add_noise(noise_sigma, rng)?;
    }
    let input = Task::Qpt.reduction().apply(&lambda.values, m_data, rng)?;
    Ok(Sample { kind, input, target })
}

/// Random pure or mixed states, one independent stream per sample.
pub fn gen_qst_dataset(cfg: &GenConfig, pure_fraction: f64) -> Result<Dataset> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&pure_fraction) {
        return Err(Error::InvalidConfig("pure fraction must lie in [0, 1]".into()));
    }
    let n = cfg.n_qubits;
    let settings = standard_settings(n)?;
    let input_len = assemble_b(&DensityMatrix::maximally_mixed(n), &settings)?.len();
    let max_m = Task::Qst.reduction().max_m(input_len);
    cfg.m_data.validate(max_m)?;
    let samples = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, i as u64);
            let (kind, rho) = if rng.random::<f64>() < pure_fraction {
                (SampleKind::Pure, random_pure_state(n, &mut rng))
            } else {
                (SampleKind::Mixed, random_mixed_state(n, &mut rng))
            };
            let m = cfg.m_data.draw(max_m, &mut rng);
            qst_sample(&rho, kind, m, cfg.noise_sigma, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let header = DatasetHeader {
        format: FORMAT.into(),
        version: DATASET_VERSION,
        task: Task::Qst,
        n_qubits: n,
        count: cfg.count,
        input_len,
        target_len: 1 << (2 * n),
        m_data: cfg.m_data,
        noise_sigma: cfg.noise_sigma,
        pure_fraction: Some(pure_fraction),
        seed: cfg.seed,
    };
    Ok(Dataset::from_samples(header, samples))
}

/// Haar-random unitary processes, one independent stream per sample.
pub fn gen_qpt_dataset(cfg: &GenConfig) -> Result<Dataset> {
    cfg.validate()?;
    let n = cfg.n_qubits;
    if n != 2 {
        return Err(Error::UnsupportedQubits(n));
    }
    let input_len = LambdaMode::Compact.block_len(n)? << (2 * n);
    let max_m = Task::Qpt.reduction().max_m(input_len);
    cfg.m_data.validate(max_m)?;
    let samples = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, i as u64);
            let u = random_unitary(n, &mut rng);
            let m = cfg.m_data.draw(max_m, &mut rng);
            qpt_sample(
                &KrausSet::from_unitary(&u),
                SampleKind::Unitary,
                m,
                cfg.noise_sigma,
                &mut rng,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let header = DatasetHeader {
        format: FORMAT.into(),
        version: DATASET_VERSION,
        task: Task::Qpt,
        n_qubits: n,
        count: cfg.count,
        input_len,
        target_len: input_len,
        m_data: cfg.m_data,
        noise_sigma: cfg.noise_sigma,
        pure_fraction: None,
        seed: cfg.seed,
    };
    Ok(Dataset::from_samples(header, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::coefficient_matrix;
    use crate::quantum::{pauli_reconstruct, ChiMatrix, PauliCoefficients};
    use crate::rng::seeded;

    fn mean_and_sigma(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn pure_states_are_normalized_and_haar_distributed() {
        let mut rng = seeded(1);
        let overlaps: Vec<f64> = (0..100_000)
            .map(|_| {
                let rho = random_pure_state(2, &mut rng);
                assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
                rho.matrix()[(0, 0)].re
            })
            .collect();
        let (mean, sigma) = mean_and_sigma(&overlaps);
        assert!((mean - 0.25).abs() < 3.0 * sigma, "{mean} ± {sigma}");
        let rho = random_pure_state(3, &mut rng);
        assert!((rho.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mixed_state_purity_matches_ginibre_moment() {
        // For R R† / Tr with square d × d Ginibre R, E Tr ρ² = 2d / (d² + 1).
        let d = 4.0;
        let expected = 2.0 * d / (d * d + 1.0);
        let mut rng = seeded(2);
        let purities: Vec<f64> = (0..100_000)
            .map(|_| {
                let rho = random_mixed_state(2, &mut rng);
                assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
                assert!(rho.eigenvalues()[0] >= -1e-12);
                rho.purity()
            })
            .collect();
        let (mean, sigma) = mean_and_sigma(&purities);
        assert!((mean - expected).abs() < 3.0 * sigma, "{mean} vs {expected} ± {sigma}");
    }

    fn qst_cfg(count: usize, m_data: MDataPolicy, seed: u64) -> GenConfig {
        GenConfig { n_qubits: 2, count, m_data, noise_sigma: 0.0, seed }
    }

    #[test]
    fn qst_dataset_is_consistent_with_a() {
        let ds = gen_qst_dataset(&qst_cfg(200, MDataPolicy::Full, 4), 0.5).unwrap();
        assert_eq!(ds.inputs.dim(), (200, 33));
        assert!(ds.masks.iter().all(|&k| k));
        let a = coefficient_matrix(&standard_settings(2).unwrap()).unwrap();
        for i in 0..ds.len() {
            let c = PauliCoefficients::new(2, ds.targets.row(i).to_vec()).unwrap();
            let rho = DensityMatrix::new(pauli_reconstruct(&c).unwrap());
            assert!(rho.is_ok());
            let b = a.apply(&c).unwrap();
            for (x, y) in ds.inputs.row(i).iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let pure = ds.kinds.iter().filter(|&&k| k == SampleKind::Pure).count();
        assert!((60..140).contains(&pure));
    }

    #[test]
    fn reduced_qst_rows_keep_trace_and_exact_zeros() {
        let ds = gen_qst_dataset(&qst_cfg(100, MDataPolicy::Uniform { low: 4, high: 20 }, 5), 0.5)
            .unwrap();
        for i in 0..ds.len() {
            let s = ds.sample(i);
            assert!(s.input.mask[32]);
            assert!((5..=21).contains(&s.input.m_data));
            for (v, k) in s.input.values.iter().zip(&s.input.mask) {
                if !k {
                    assert_eq!(v.to_bits(), 0);
                }
            }
        }
        assert!(gen_qst_dataset(&qst_cfg(1, MDataPolicy::Fixed { m: 33 }, 0), 0.5).is_err());
        assert!(gen_qst_dataset(&qst_cfg(0, MDataPolicy::Full, 0), 0.5).is_err());
    }

    #[test]
    fn qpt_dataset_targets_are_rank_one_and_consistent() {
        let cfg = GenConfig {
            n_qubits: 2,
            count: 20,
            m_data: MDataPolicy::Full,
            noise_sigma: 0.0,
            seed: 6,
        };
        let ds = gen_qpt_dataset(&cfg).unwrap();
        assert_eq!(ds.inputs.ncols(), 256);
        let beta = beta_matrix(2, LambdaMode::Compact).unwrap();
        for i in 0..ds.len() {
            let chi = ChiMatrix::from_compact(2, &ds.targets.row(i).to_vec()).unwrap();
            let ev = chi.eigenvalues();
            assert!((ev[15] - 1.0).abs() < 1e-9);
            assert!(ev[..15].iter().all(|l| l.abs() < 1e-9));
            let lam = beta.apply(&chi).unwrap();
            for (x, y) in ds.inputs.row(i).iter().zip(&lam) {
                assert!((x - y).abs() < 1e-9);
            }
        }
        let bad = GenConfig { n_qubits: 3, ..cfg };
        assert!(matches!(gen_qpt_dataset(&bad), Err(Error::UnsupportedQubits(3))));
    }

    #[test]
    fn generation_is_reproducible_and_file_round_trips() {
        let cfg = GenConfig { noise_sigma: 0.01, ..qst_cfg(50, MDataPolicy::Fixed { m: 10 }, 7) };
        let a = gen_qst_dataset(&cfg, 0.5).unwrap();
        let b = gen_qst_dataset(&cfg, 0.5).unwrap();
        assert_eq!(a, b);
        let mut bytes = Vec::new();
        a.write(&mut bytes).unwrap();
        let loaded = Dataset::read(bytes.as_slice()).unwrap();
        assert_eq!(loaded, a);
        let mut again = Vec::new();
        loaded.write(&mut again).unwrap();
        assert_eq!(bytes, again);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("qst.bin");
        a.save(&path).unwrap();
        assert_eq!(Dataset::load(&path).unwrap(), a);
        let streamed: Vec<Sample> = DatasetReader::new(BufReader::new(File::open(&path).unwrap()))
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(streamed.len(), 50);
        assert_eq!(streamed[3], a.sample(3));

        let mut csv = Vec::new();
        a.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 51);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let a = gen_qst_dataset(&qst_cfg(3, MDataPolicy::Full, 8), 0.5).unwrap();
        let mut bytes = Vec::new();
        a.write(&mut bytes).unwrap();
        assert!(matches!(Dataset::read(&bytes[..bytes.len() - 8]), Err(Error::Format(_))));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(Dataset::read(extra.as_slice()), Err(Error::Format(_))));

        let split = bytes.iter().position(|&b| b == b'\n').unwrap();
        let header = std::str::from_utf8(&bytes[..split]).unwrap();
        let mut bumped = header.replacen("\"version\":1", "\"version\":2", 1).into_bytes();
        bumped.extend_from_slice(&bytes[split..]);
        assert!(matches!(
            Dataset::read(bumped.as_slice()),
            Err(Error::Version { found: 2, expected: 1 })
        ));
        assert!(matches!(Dataset::read(&b"{not json\n"[..]), Err(Error::Format(_))));
    }
}
