use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tomonet::datasets::MDataPolicy;
use tomonet_cli::commands::{self, load_config};
use tomonet_cli::experiment::{parse_policy, policy_label};
use tomonet_cli::report::report;
use tomonet_cli::{CliError, ExperimentConfig, Result, RunLayout, TaskKind};

/// Neural-network quantum state and process tomography experiments.
#[derive(Parser)]
#[command(name = "tomonet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate training and test datasets and a hash manifest.
    Generate(RunArgs),
    /// Train one network per dataset size, keeping checkpoints per epoch count.
    Train(RunArgs),
    /// Mean test fidelity for every (size, epochs) checkpoint at one M_data.
    Table(RunArgs),
    /// Fidelity mean and spread against M_data for one checkpoint.
    Sweep(RunArgs),
    /// Fidelities for the named states or processes under emulated noise.
    Fixtures(RunArgs),
    /// Consolidate a run directory into report.json and plot files.
    Report {
        #[arg(long, default_value = "run")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    task: Option<TaskKind>,
    /// Training-set sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Epoch counts to checkpoint, comma separated.
    #[arg(long, value_delimiter = ',')]
    epochs: Option<Vec<usize>>,
    /// M_data of the table (one value) or of sweeps and fixtures (a list).
    #[arg(long, value_delimiter = ',')]
    mdata: Option<Vec<usize>>,
    /// Reduction of training inputs: `full`, `20` or `8-32`.
    #[arg(long, value_parser = parse_policy)]
    train_mdata: Option<MDataPolicy>,
    /// Random reductions averaged per test item.
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    test_count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Gaussian readout noise used to emulate experiments.
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long, default_value = "run")]
    out: PathBuf,
    /// Checkpoint for sweeps and fixtures (default: largest size, most epochs).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Exit with status 4 if any reported mean fidelity falls below this.
    #[arg(long)]
    min_fidelity: Option<f64>,
}

enum Verb {
    Generate,
    Table,
    Other,
}

impl RunArgs {
    fn config(&self, verb: Verb) -> Result<ExperimentConfig> {
        let layout = RunLayout::new(&self.out);
        let mut cfg = match (&verb, layout.config().exists()) {
            (Verb::Generate, _) | (_, false) => {
                let task = self
                    .task
                    .ok_or_else(|| CliError::Config("--task is required for a new run".into()))?;
                ExperimentConfig::defaults(task)
            }
            (_, true) => load_config(&layout)?,
        };
        if let Some(t) = self.task {
            cfg.task = t;
        }
        if let Some(v) = &self.sizes {
            cfg.sizes = v.clone();
        }
        if let Some(v) = &self.epochs {
            cfg.epochs = v.clone();
        }
        if let Some(p) = self.train_mdata {
            cfg.train_m_data = p;
        }
        if let Some(v) = &self.mdata {
            match verb {
                Verb::Table => match v.as_slice() {
                    [m] => cfg.table_m_data = *m,
                    _ => return Err(CliError::Config("table takes a single --mdata value".into())),
                },
                _ => cfg.sweep_m_data = v.clone(),
            }
        }
        if let Some(r) = self.repeats {
            cfg.repeats = r;
        }
        if let Some(n) = self.test_count {
            cfg.test_count = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = self.noise_sigma {
            cfg.noise_sigma = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn check_threshold(
    min: Option<f64>,
    values: impl IntoIterator<Item = (String, f64)>,
) -> Result<()> {
    let Some(min) = min else { return Ok(()) };
    let failing: Vec<String> =
        values.into_iter().filter(|(_, v)| *v < min).map(|(k, v)| format!("{k}: {v:.4}")).collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Threshold(format!("below {min}: {}", failing.join(", "))))
    }
}

fn configure_workers() -> Result<()> {
    if let Ok(v) = std::env::var("TOMONET_WORKERS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Config(format!("TOMONET_WORKERS must be a count, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_workers()?;
    match cli.command {
        Command::Generate(a) => {
            let cfg = a.config(Verb::Generate)?;
            let layout = RunLayout::new(&a.out);
            let manifest = commands::generate(&cfg, &layout)?;
            for f in &manifest.files {
                println!("{}  {} ({} samples)", f.sha256, f.path, f.count);
            }
            println!("training reduction: {}", policy_label(cfg.train_m_data));
        }
        Command::Train(a) => {
            let cfg = a.config(Verb::Other)?;
            commands::train(&cfg, &RunLayout::new(&a.out))?;
            println!("trained {} sizes x {} epoch counts", cfg.sizes.len(), cfg.epochs.len());
        }
        Command::Table(a) => {
            let cfg = a.config(Verb::Table)?;
            let t = commands::table(&cfg, &RunLayout::new(&a.out))?;
            println!("{} fidelity at M_data = {}", cfg.task, t.m_data);
            let mut cells = Vec::new();
            for (size, row) in t.sizes.iter().zip(&t.mean) {
                let line: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
                println!("{size:>8} {}", line.join(" "));
                for (e, v) in t.epochs.iter().zip(row) {
                    cells.push((format!("{size}/{e}"), *v));
                }
            }
            check_threshold(a.min_fidelity, cells)?;
        }
        Command::Sweep(a) => {
            let cfg = a.config(Verb::Other)?;
            let rows = commands::sweep(&cfg, &RunLayout::new(&a.out), a.checkpoint.as_deref())?;
            for r in &rows {
                println!("{:>4} {:.4} ± {:.4}", r.m_data, r.mean, r.std);
            }
            check_threshold(
                a.min_fidelity,
                rows.iter().map(|r| (format!("M={}", r.m_data), r.mean)),
            )?;
        }
        Command::Fixtures(a) => {
            let cfg = a.config(Verb::Other)?;
            let rows = commands::fixtures(&cfg, &RunLayout::new(&a.out), a.checkpoint.as_deref())?;
            for r in &rows {
                println!("{:>8} {:>4} {:.4} ± {:.4}", r.fixture, r.m_data, r.mean, r.std);
            }
            check_threshold(
                a.min_fidelity,
                rows.iter().map(|r| (format!("{}@{}", r.fixture, r.m_data), r.mean)),
            )?;
        }
        Command::Report { out } => {
            let r = report(&RunLayout::new(&out))?;
            println!(
                "wrote {} ({} sweep rows, {} fixture rows)",
                RunLayout::new(&out).report().display(),
                r.sweep.len(),
                r.fixtures.len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
