//! Experiment configuration and the run-directory layout.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use tomonet::datasets::{gen_qpt_dataset, gen_qst_dataset, Dataset, GenConfig, MDataPolicy};
use tomonet::ffnn::NetworkConfig;
use tomonet::rng::derive_seed;

use crate::error::{CliError, Result};

/// Share of pure states in generated state-tomography sets.
pub const PURE_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Qst2,
    Qst3,
    Qpt2,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Qst2 => "qst2",
            TaskKind::Qst3 => "qst3",
            TaskKind::Qpt2 => "qpt2",
        }
    }

    pub fn n_qubits(self) -> usize {
        match self {
            TaskKind::Qst2 | TaskKind::Qpt2 => 2,
            TaskKind::Qst3 => 3,
        }
    }

    pub fn is_process(self) -> bool {
        self == TaskKind::Qpt2
    }

    /// Full input length: readouts plus trace row, or compact λ.
    pub fn input_len(self) -> usize {
        match self {
            TaskKind::Qst2 => 33,
            TaskKind::Qst3 => 169,
            TaskKind::Qpt2 => 256,
        }
    }

    /// Largest `M_data`: every readout, or every λ entry.
    pub fn max_m_data(self) -> usize {
        match self {
            TaskKind::Qst2 => 32,
            TaskKind::Qst3 => 168,
            TaskKind::Qpt2 => 256,
        }
    }

    /// `M_data` at which the fidelity tables are evaluated.
    pub fn table_m_data(self) -> usize {
        match self {
            TaskKind::Qst2 => 20,
            TaskKind::Qst3 => 120,
            TaskKind::Qpt2 => 200,
        }
    }

    pub fn default_sweep(self) -> Vec<usize> {
        match self {
            TaskKind::Qst2 => vec![4, 8, 12, 16, 20, 24, 28, 32],
            TaskKind::Qst3 => vec![20, 40, 60, 80, 100, 120, 140, 168],
            TaskKind::Qpt2 => vec![128, 144, 160, 176, 192, 208, 224, 240, 256],
        }
    }

    pub fn default_repeats(self) -> usize {
        if self.is_process() {
            300
        } else {
            50
        }
    }

    pub fn network(self, seed: u64) -> Result<NetworkConfig> {
        Ok(match self {
            TaskKind::Qpt2 => NetworkConfig::qpt(2, seed)?,
            _ => NetworkConfig::qst(self.n_qubits(), self.input_len(), seed)?,
        })
    }

    pub fn generate(self, gen: &GenConfig) -> Result<Dataset> {
        Ok(match self {
            TaskKind::Qpt2 => gen_qpt_dataset(gen)?,
            _ => gen_qst_dataset(gen, PURE_FRACTION)?,
        })
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `full`, `20` or `8-32` (inclusive range).
pub fn parse_policy(s: &str) -> std::result::Result<MDataPolicy, String> {
    if s == "full" {
        return Ok(MDataPolicy::Full);
    }
    let num = |t: &str| usize::from_str(t.trim()).map_err(|e| format!("bad M_data '{t}': {e}"));
    match s.split_once('-') {
        Some((lo, hi)) => Ok(MDataPolicy::Uniform { low: num(lo)?, high: num(hi)? }),
        None => Ok(MDataPolicy::Fixed { m: num(s)? }),
    }
}

pub fn policy_label(p: MDataPolicy) -> String {
    match p {
        MDataPolicy::Full => "full".into(),
        MDataPolicy::Fixed { m } => m.to_string(),
        MDataPolicy::Uniform { low, high } => format!("{low}-{high}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    /// Training-set sizes.
    pub sizes: Vec<usize>,
    /// Epoch counts at which checkpoints are kept.
    pub epochs: Vec<usize>,
    /// Reduction applied to training inputs.
    pub train_m_data: MDataPolicy,
    /// `M_data` of the fidelity table.
    pub table_m_data: usize,
    /// `M_data` values of sweeps and fixture reports.
    pub sweep_m_data: Vec<usize>,
    pub repeats: usize,
    pub test_count: usize,
    /// σ of the Gaussian readout noise used to emulate experiments.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    /// The full-scale grid for a task.
    pub fn defaults(task: TaskKind) -> Self {
        Self {
            task,
            sizes: vec![500, 2000, 5000, 10000, 20000, 80000],
            epochs: vec![50, 100, 150],
            train_m_data: MDataPolicy::Fixed { m: task.table_m_data() },
            table_m_data: task.table_m_data(),
            sweep_m_data: task.default_sweep(),
            repeats: task.default_repeats(),
            test_count: 3000,
            noise_sigma: 0.01,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return bad("sizes must be a nonempty list of positive counts".into());
        }
        if self.epochs.is_empty() || self.epochs.contains(&0) {
            return bad("epochs must be a nonempty list of positive counts".into());
        }
        let max = self.task.max_m_data();
        if self.table_m_data > max || self.sweep_m_data.iter().any(|&m| m > max) {
            return bad(format!("M_data exceeds {max} for {}", self.task));
        }
        self.train_m_data.validate(max).map_err(|e| CliError::Config(e.to_string()))?;
        if self.repeats == 0 || self.test_count == 0 {
            return bad("repeats and test count must be positive".into());
        }
        if self.noise_sigma.is_nan() || self.noise_sigma < 0.0 {
            return bad("noise sigma must be nonnegative".into());
        }
        Ok(())
    }

    pub fn max_epochs(&self) -> usize {
        self.epochs.iter().copied().max().unwrap_or(0)
    }

    pub fn train_gen(&self, size: usize) -> GenConfig {
        GenConfig {
            n_qubits: self.task.n_qubits(),
            count: size,
            m_data: self.train_m_data,
            noise_sigma: 0.0,
            seed: derive_seed(self.seed, "train"),
        }
    }

    pub fn test_gen(&self) -> GenConfig {
        GenConfig {
            n_qubits: self.task.n_qubits(),
            count: self.test_count,
            m_data: MDataPolicy::Full,
            noise_sigma: 0.0,
            seed: derive_seed(self.seed, "test"),
        }
    }
}

/// File locations inside a run directory.
#[derive(Debug, Clone)]
pub struct RunLayout {
    pub root: PathBuf,
}

impl RunLayout {
    pub fn new(root: impl AsRef<Path>) -> Self {
        Self { root: root.as_ref().to_path_buf() }
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.json")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn train_set(&self, task: TaskKind, size: usize) -> PathBuf {
        self.root.join("datasets").join(format!("{task}-train-{size}.bin"))
    }

    pub fn test_set(&self, task: TaskKind) -> PathBuf {
        self.root.join("datasets").join(format!("{task}-test.bin"))
    }

    pub fn checkpoint(&self, task: TaskKind, size: usize, epochs: usize) -> PathBuf {
        self.root.join("checkpoints").join(format!("{task}-{size}-e{epochs}.ckpt"))
    }

    pub fn history(&self, task: TaskKind, size: usize) -> PathBuf {
        self.root.join("history").join(format!("{task}-{size}.csv"))
    }

    pub fn table(&self, task: TaskKind) -> PathBuf {
        self.root.join("tables").join(format!("{task}.csv"))
    }

    pub fn sweep(&self, task: TaskKind) -> PathBuf {
        self.root.join("sweeps").join(format!("{task}.csv"))
    }

    pub fn fixtures(&self, task: TaskKind) -> PathBuf {
        self.root.join("fixtures").join(format!("{task}.csv"))
    }

    pub fn report(&self) -> PathBuf {
        self.root.join("report.json")
    }

    pub fn plot_dir(&self) -> PathBuf {
        self.root.join("plots")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_parse() {
        assert_eq!(parse_policy("full").unwrap(), MDataPolicy::Full);
        assert_eq!(parse_policy("20").unwrap(), MDataPolicy::Fixed { m: 20 });
        assert_eq!(parse_policy("8-32").unwrap(), MDataPolicy::Uniform { low: 8, high: 32 });
        assert!(parse_policy("x").is_err());
        for p in ["full", "20", "8-32"] {
            assert_eq!(policy_label(parse_policy(p).unwrap()), p);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::defaults(TaskKind::Qst2);
        assert!(c.validate().is_ok());
        c.table_m_data = 33;
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        let mut c = ExperimentConfig::defaults(TaskKind::Qpt2);
        c.epochs.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn task_lengths_match_generators() {
        for t in [TaskKind::Qst2, TaskKind::Qst3, TaskKind::Qpt2] {
            let mut g = ExperimentConfig::defaults(t).test_gen();
            g.count = 1;
            let ds = t.generate(&g).unwrap();
            assert_eq!(ds.inputs.ncols(), t.input_len());
            assert_eq!(t.network(0).unwrap().input_len(), t.input_len());
        }
    }
}
