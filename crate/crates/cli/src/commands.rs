//! The experiment verbs. Each reads and writes files in a run directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tomonet::datasets::Dataset;
use tomonet::ffnn::{
    init_network, load_checkpoint, predict_batch, save_checkpoint, train_with, EpochRecord,
    NetworkParams, TrainConfig,
};
use tomonet::metrics::{
    ensemble_stats, evaluate_network, head_fidelity, head_reduction, repeated_mask_fidelity,
};
use tomonet::rng::{derive_seed, stream, TomoRng};

use crate::error::{require, CliError, Result};
use crate::experiment::{ExperimentConfig, RunLayout, TaskKind};
use crate::fixtures::{emulate_process, emulate_state, Emulation, FixtureLibrary};

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    create_parent(path)?;
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    create_parent(path)?;
    Ok(csv::Writer::from_path(path)?)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    std::io::copy(&mut File::open(path)?, &mut hasher)?;
    Ok(hex::encode(hasher.finalize()))
}

/// Loads `config.json` from a run directory.
pub fn load_config(layout: &RunLayout) -> Result<ExperimentConfig> {
    let path = require(layout.config())?;
    Ok(serde_json::from_reader(File::open(path)?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub role: String,
    pub count: usize,
    pub seed: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub task: TaskKind,
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

fn relative(layout: &RunLayout, path: &Path) -> String {
    path.strip_prefix(&layout.root).unwrap_or(path).to_string_lossy().into_owned()
}

/// Writes the training sets, the test set, `config.json` and a manifest
/// with SHA-256 hashes of every dataset file.
pub fn generate(cfg: &ExperimentConfig, layout: &RunLayout) -> Result<Manifest> {
    cfg.validate()?;
    write_json(&layout.config(), cfg)?;
    let mut files = Vec::new();
    let mut jobs: Vec<(PathBuf, &str, _)> = cfg
        .sizes
        .iter()
        .map(|&size| (layout.train_set(cfg.task, size), "train", cfg.train_gen(size)))
        .collect();
    jobs.push((layout.test_set(cfg.task), "test", cfg.test_gen()));
    for (path, role, gen) in jobs {
        create_parent(&path)?;
        cfg.task.generate(&gen)?.save(&path)?;
        files.push(ManifestEntry {
            path: relative(layout, &path),
            role: role.into(),
            count: gen.count,
            seed: gen.seed,
            sha256: sha256_file(&path)?,
        });
    }
    let manifest = Manifest { task: cfg.task, seed: cfg.seed, files };
    write_json(&layout.manifest(), &manifest)?;
    Ok(manifest)
}

/// Training recipe shared by every grid cell.
pub fn train_config(cfg: &ExperimentConfig, size: usize) -> TrainConfig {
    TrainConfig {
        epochs: cfg.max_epochs(),
        seed: derive_seed(cfg.seed, &format!("shuffle-{size}")),
        ..TrainConfig::default()
    }
}

/// Networks keyed by the number of epochs they were trained for.
pub type Snapshots = Vec<(usize, NetworkParams)>;

/// Trains one network on `data` and returns snapshots at the requested
/// epoch counts together with the full history.
pub fn train_snapshots(
    cfg: &ExperimentConfig,
    size: usize,
    data: &Dataset,
) -> Result<(Snapshots, Vec<EpochRecord>)> {
    let mut params = init_network(&cfg.task.network(derive_seed(cfg.seed, "init"))?)?;
    let mut snapshots = Vec::new();
    let history = train_with(&mut params, data.examples(), &train_config(cfg, size), |p, r| {
        if cfg.epochs.contains(&r.epoch) {
            snapshots.push((r.epoch, p.clone()));
        }
    })?;
    Ok((snapshots, history))
}

fn write_history(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["epoch", "train_mse", "val_cosine"])?;
    for r in history {
        let val = r.val_cosine.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([r.epoch.to_string(), r.train_mse.to_string(), val])?;
    }
    w.flush()?;
    Ok(())
}

/// Trains one network per dataset size (in parallel) and writes a
/// checkpoint per (size, epochs) cell plus a history CSV per size.
pub fn train(cfg: &ExperimentConfig, layout: &RunLayout) -> Result<()> {
    cfg.validate()?;
    for &size in &cfg.sizes {
        require(layout.train_set(cfg.task, size))?;
    }
    cfg.sizes.par_iter().try_for_each(|&size| -> Result<()> {
        let data = Dataset::load(layout.train_set(cfg.task, size))?;
        let (snapshots, history) = train_snapshots(cfg, size, &data)?;
        for (epochs, params) in &snapshots {
            let path = layout.checkpoint(cfg.task, size, *epochs);
            create_parent(&path)?;
            save_checkpoint(params, &path)?;
        }
        write_history(&layout.history(cfg.task, size), &history)
    })
}

fn load_test_set(cfg: &ExperimentConfig, layout: &RunLayout) -> Result<Dataset> {
    Ok(Dataset::load(require(layout.test_set(cfg.task))?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityTable {
    pub task: TaskKind,
    pub m_data: usize,
    pub sizes: Vec<usize>,
    pub epochs: Vec<usize>,
    /// `mean[i][j]` for `sizes[i]`, `epochs[j]`.
    pub mean: Vec<Vec<f64>>,
}

/// Mean test fidelity of a network at one `M_data`, one random reduction
/// per test item.
pub fn table_cell(params: &NetworkParams, test: &Dataset, m_data: usize, seed: u64) -> Result<f64> {
    let stats = evaluate_network(
        params,
        test.inputs.view(),
        test.targets.view(),
        m_data,
        1,
        derive_seed(seed, "table"),
    )?;
    Ok(stats.mean)
}

pub fn table(cfg: &ExperimentConfig, layout: &RunLayout) -> Result<FidelityTable> {
    cfg.validate()?;
    let test = load_test_set(cfg, layout)?;
    let mut mean = Vec::new();
    for &size in &cfg.sizes {
        let row = cfg
            .epochs
            .iter()
            .map(|&e| {
                let params = load_checkpoint(require(layout.checkpoint(cfg.task, size, e))?)?;
                table_cell(&params, &test, cfg.table_m_data, cfg.seed)
            })
            .collect::<Result<Vec<_>>>()?;
        mean.push(row);
    }
    let t = FidelityTable {
        task: cfg.task,
        m_data: cfg.table_m_data,
        sizes: cfg.sizes.clone(),
        epochs: cfg.epochs.clone(),
        mean,
    };
    let mut w = csv_writer(&layout.table(cfg.task))?;
    let mut head = vec!["size".to_string()];
    head.extend(t.epochs.iter().map(|e| format!("epochs_{e}")));
    w.write_record(&head)?;
    for (size, row) in t.sizes.iter().zip(&t.mean) {
        let mut rec = vec![size.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m_data: usize,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// The checkpoint of the largest size trained for the most epochs.
pub fn default_checkpoint(cfg: &ExperimentConfig, layout: &RunLayout) -> PathBuf {
    let size = cfg.sizes.iter().copied().max().unwrap_or(0);
    layout.checkpoint(cfg.task, size, cfg.max_epochs())
}

fn resolve_checkpoint(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    checkpoint: Option<&Path>,
) -> Result<NetworkParams> {
    let path = checkpoint.map(Path::to_path_buf).unwrap_or_else(|| default_checkpoint(cfg, layout));
    Ok(load_checkpoint(require(path)?)?)
}

/// Mean and spread of per-item fidelities across the test set, each item
/// averaged over `repeats` random reductions, for every sweep `M_data`.
pub fn sweep_rows(
    cfg: &ExperimentConfig,
    params: &NetworkParams,
    test: &Dataset,
) -> Result<Vec<SweepRow>> {
    cfg.sweep_m_data
        .iter()
        .map(|&m| {
            if m > cfg.task.max_m_data() {
                return Err(CliError::Config(format!("M_data {m} exceeds the full data size")));
            }
            let s = evaluate_network(
                params,
                test.inputs.view(),
                test.targets.view(),
                m,
                cfg.repeats,
                derive_seed(cfg.seed, &format!("sweep-{m}")),
            )?;
            Ok(SweepRow { m_data: m, mean: s.mean, std: s.std, count: s.count })
        })
        .collect()
}

pub fn sweep(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    checkpoint: Option<&Path>,
) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let params = resolve_checkpoint(cfg, layout, checkpoint)?;
    let test = load_test_set(cfg, layout)?;
    let rows = sweep_rows(cfg, &params, &test)?;
    let mut w = csv_writer(&layout.sweep(cfg.task))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRow {
    pub fixture: String,
    pub m_data: usize,
    pub mean: f64,
    pub std: f64,
    pub repeats: usize,
}

/// Emulated noisy data for every fixture of a task, in library order.
pub fn emulate_fixtures(task: TaskKind, sigma: f64, seed: u64) -> Result<Vec<(String, Emulation)>> {
    let lib = FixtureLibrary::new();
    let seed = derive_seed(seed, "fixtures");
    let mut out = Vec::new();
    if task.is_process() {
        for (i, p) in lib.processes.iter().enumerate() {
            let e = emulate_process(&p.channel, sigma, &mut stream(seed, i as u64))?;
            out.push((p.name.to_string(), e));
        }
    } else {
        for (i, s) in lib.states_for(task.n_qubits()).enumerate() {
            let e = emulate_state(&s.state, sigma, &mut stream(seed, i as u64))?;
            out.push((s.name.to_string(), e));
        }
    }
    Ok(out)
}

/// Fidelities of network predictions from `repeats` random reductions of an
/// emulated fixture against its linear-inversion reference.
pub fn fixture_fidelities(
    params: &NetworkParams,
    fixture: &Emulation,
    m_data: usize,
    repeats: usize,
    rng: &mut TomoRng,
) -> Result<Vec<f64>> {
    let head = params.config.head;
    (0..repeats)
        .map(|_| {
            Ok(repeated_mask_fidelity(
                &fixture.input,
                &fixture.reference,
                head_reduction(head),
                m_data,
                1,
                rng,
                |x| predict_batch(params, x),
                |a, b| head_fidelity(head, a, b),
            )?)
        })
        .collect()
}

pub fn fixtures(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    checkpoint: Option<&Path>,
) -> Result<Vec<FixtureRow>> {
    cfg.validate()?;
    let params = resolve_checkpoint(cfg, layout, checkpoint)?;
    let mut m_values = cfg.sweep_m_data.clone();
    if !m_values.contains(&cfg.task.max_m_data()) {
        m_values.push(cfg.task.max_m_data());
    }
    let mut rows = Vec::new();
    for (i, (name, emulation)) in
        emulate_fixtures(cfg.task, cfg.noise_sigma, cfg.seed)?.iter().enumerate()
    {
        for &m in &m_values {
            let repeats = if m == cfg.task.max_m_data() { 1 } else { cfg.repeats };
            let mut rng = stream(derive_seed(cfg.seed, &format!("fixture-masks-{m}")), i as u64);
            let f = fixture_fidelities(&params, emulation, m, repeats, &mut rng)?;
            let s = ensemble_stats(&f)?;
            rows.push(FixtureRow {
                fixture: name.clone(),
                m_data: m,
                mean: s.mean,
                std: s.std,
                repeats,
            });
        }
    }
    let mut w = csv_writer(&layout.fixtures(cfg.task))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}
