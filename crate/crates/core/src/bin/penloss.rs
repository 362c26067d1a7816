use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use penloss::commands::{self, Operand};
use penloss::{GateConfig, Window};

#[derive(Parser)]
#[command(name = "penloss", version, about = "Material penetration-loss analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GateArgs {
    /// none or hann
    #[arg(long, default_value = "none")]
    window: Window,
    /// Detection threshold above the noise floor, dB
    #[arg(long)]
    gate_threshold_db: Option<f64>,
}

impl GateArgs {
    fn gate(&self) -> GateConfig {
        let mut gate = GateConfig::default();
        if let Some(t) = self.gate_threshold_db {
            gate.threshold_above_noise = t;
        }
        gate
    }
}

#[derive(Subcommand)]
enum Command {
    /// Manifest of LOS/NLOS sweeps -> loss-series CSV
    Process {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        gate: GateArgs,
    },
    /// Loss-series CSV -> linear model JSON
    Fit {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Differences and RMSE of A against reference model B
    Compare {
        /// Model JSON, loss-series CSV, or catalog name
        a: String,
        /// Model JSON or catalog name
        b: String,
        /// lo:step:hi in GHz
        #[arg(long)]
        grid: Option<String>,
        /// Output directory for diff.csv and summary.json
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthetic campaign from a JSON config
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// process -> fit -> compare, with a markdown summary
    Report {
        #[arg(long)]
        manifest: PathBuf,
        /// Catalog name of the reference model
        #[arg(long)]
        reference: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        gate: GateArgs,
    },
}

fn run(cli: Cli) -> penloss::Result<()> {
    match cli.command {
        Command::Process {
            manifest,
            out,
            gate,
        } => {
            let series = commands::process(&manifest, &gate.gate(), gate.window, &out)?;
            for p in &series.points {
                println!("{:>6.2} GHz  {} dB", p.center_ghz, commands::fmt2(p.loss_db));
            }
        }
        Command::Fit { series, out } => {
            let (_, line) = commands::fit(&series, &out)?;
            println!("{line}");
        }
        Command::Compare { a, b, grid, out } => {
            let grid = grid.as_deref().map(commands::parse_grid).transpose()?;
            let (_, line) = commands::compare(
                &Operand::resolve(&a)?,
                &Operand::resolve(&b)?,
                grid.as_deref(),
                &out,
            )?;
            println!("{line}");
        }
        Command::Synth { config, out, seed } => {
            let m = commands::synth(&config, &out, seed)?;
            println!(
                "wrote {} segment files for {:?}",
                m.segment_files.len(),
                m.material_name
            );
        }
        Command::Report {
            manifest,
            reference,
            out,
            gate,
        } => {
            let r = commands::report(&manifest, &reference, &gate.gate(), gate.window, &out)?;
            print!("{}", r.markdown);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
