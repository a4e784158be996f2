//! Consolidated run report and plot-ready column files.

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::commands::{load_config, FidelityTable, FixtureRow, SweepRow};
use crate::error::{CliError, Result};
use crate::experiment::{ExperimentConfig, RunLayout};

pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");
pub const REPORT_SCHEMA_ID: &str = "tomonet-report/1";

pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub size: usize,
    pub epochs: usize,
    pub final_train_mse: f64,
    pub final_val_cosine: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub table: FidelityTable,
    pub sweep: Vec<SweepRow>,
    pub fixtures: Vec<FixtureRow>,
    pub training: Vec<TrainingSummary>,
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::IncompleteRun(format!("{} is missing", path.display())))
    }
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    require_file(path)?;
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

fn parse<T: std::str::FromStr>(field: &str, path: &Path) -> Result<T> {
    field.parse().map_err(|_| {
        CliError::IncompleteRun(format!("unparsable value '{field}' in {}", path.display()))
    })
}

fn read_table(cfg: &ExperimentConfig, path: &Path) -> Result<FidelityTable> {
    require_file(path)?;
    let mut r = csv::Reader::from_path(path)?;
    let epochs = r
        .headers()?
        .iter()
        .skip(1)
        .map(|h| parse(h.trim_start_matches("epochs_"), path))
        .collect::<Result<Vec<usize>>>()?;
    let mut sizes = Vec::new();
    let mut mean = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        sizes.push(parse(&rec[0], path)?);
        mean.push(rec.iter().skip(1).map(|v| parse(v, path)).collect::<Result<Vec<f64>>>()?);
    }
    Ok(FidelityTable { task: cfg.task, m_data: cfg.table_m_data, sizes, epochs, mean })
}

#[derive(Deserialize)]
struct HistoryRow {
    epoch: usize,
    train_mse: f64,
    val_cosine: Option<f64>,
}

fn write_columns(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut f = File::create(path)?;
    writeln!(f, "# {header}")?;
    for r in rows {
        writeln!(f, "{r}")?;
    }
    Ok(())
}

/// Collects the table, sweep, fixture and training outputs of a run into
/// `report.json` and writes whitespace-separated column files for plotting.
pub fn report(layout: &RunLayout) -> Result<Report> {
    let cfg = load_config(layout).map_err(|e| match e {
        CliError::MissingArtifact(p) => {
            CliError::IncompleteRun(format!("{} is missing", p.display()))
        }
        other => other,
    })?;
    let task = cfg.task;
    let table = read_table(&cfg, &layout.table(task))?;
    let sweep: Vec<SweepRow> = read_rows(&layout.sweep(task))?;
    let fixtures: Vec<FixtureRow> = read_rows(&layout.fixtures(task))?;
    let mut training = Vec::new();
    for &size in &cfg.sizes {
        let rows: Vec<HistoryRow> = read_rows(&layout.history(task, size))?;
        let last = rows
            .last()
            .ok_or_else(|| CliError::IncompleteRun(format!("empty history for size {size}")))?;
        training.push(TrainingSummary {
            size,
            epochs: last.epoch,
            final_train_mse: last.train_mse,
            final_val_cosine: last.val_cosine,
        });
    }
    let report = Report {
        schema: REPORT_SCHEMA_ID.into(),
        version: version_string(),
        config: cfg,
        table,
        sweep,
        fixtures,
        training,
    };

    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    fs::write(layout.report(), json)?;

    let plots = layout.plot_dir();
    fs::create_dir_all(&plots)?;
    let t = &report.table;
    let epochs: Vec<String> = t.epochs.iter().map(|e| format!("epochs_{e}")).collect();
    write_columns(
        &plots.join(format!("{task}-table.dat")),
        &format!("size {}", epochs.join(" ")),
        t.sizes.iter().zip(&t.mean).map(|(s, row)| {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            format!("{s} {}", cells.join(" "))
        }),
    )?;
    write_columns(
        &plots.join(format!("{task}-sweep.dat")),
        "m_data mean std",
        report.sweep.iter().map(|r| format!("{} {} {}", r.m_data, r.mean, r.std)),
    )?;
    write_columns(
        &plots.join(format!("{task}-fixtures.dat")),
        "fixture m_data mean std",
        report.fixtures.iter().map(|r| format!("{} {} {} {}", r.fixture, r.m_data, r.mean, r.std)),
    )?;
    Ok(report)
}
