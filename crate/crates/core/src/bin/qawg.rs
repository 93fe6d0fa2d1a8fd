use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qawg::scenario::{
    analyze, design_filter, reproduce_paper, simulate, OutputFormat, ReproduceOptions, RunError, RunResult, Scenario,
};

#[derive(Parser)]
#[command(
    name = "qawg",
    version,
    about = "Heralded non-Gaussian states with engineered temporal waveforms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => Self::Csv,
            Format::Json => Self::Json,
        }
    }
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Impulse response, transfer function and detection mode of the filter.
    DesignFilter(Common),
    /// Heralded state, Wigner function and cat/success reports.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write simulated homodyne records (records.bin + records.json).
        #[arg(long)]
        records: bool,
    },
    /// PCA, waveform estimate and tomography of a record file.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        records: PathBuf,
    },
    /// Both experiment scenarios end to end with a comparison table.
    ReproducePaper {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        ideal: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// State-level rows only.
        #[arg(long)]
        skip_closed_loop: bool,
    },
}

fn load(c: &Common) -> RunResult<Scenario> {
    Ok(Scenario::load(&c.config)?.with_seed(c.seed))
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn run(cli: Cli) -> RunResult<()> {
    match cli.command {
        Command::DesignFilter(c) => print_json(&design_filter(&load(&c)?, &c.out, c.format.into())?),
        Command::Simulate { common, records } => {
            print_json(&simulate(&load(&common)?, &common.out, common.format.into(), records)?)
        }
        Command::Analyze { common, records } => {
            print_json(&analyze(&load(&common)?, &records, &common.out, common.format.into())?)
        }
        Command::ReproducePaper {
            out,
            seed,
            ideal,
            format,
            skip_closed_loop,
        } => {
            let opts = ReproduceOptions {
                ideal,
                seed,
                out_dir: out,
                format: format.into(),
                skip_closed_loop,
            };
            let (_, table) = reproduce_paper(&opts)?;
            print!("{table}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qawg: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &RunError) -> u8 {
    e.exit_code() as u8
}
