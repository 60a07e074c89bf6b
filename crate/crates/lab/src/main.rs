use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use qlimit_lab::record::emit;
use qlimit_lab::{load_config, run_experiment, Format, LabError};

#[derive(Parser)]
#[command(name = "qlimit", version, about = "Run qlimit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Overrides the master seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output file, or `-` for standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = ["csv", "json"])]
        format: Option<String>,
        /// Worker threads; 1 runs serially.
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<(), LabError> {
    let Command::Run { config, seed, out, format, threads } = cli.command;
    let mut cfg = load_config(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(f) = format {
        cfg.format = f.parse::<Format>().expect("clap restricts the values");
    }
    if threads == Some(0) {
        return Err(LabError::Config {
            field: "threads".into(),
            message: "must be positive".into(),
        });
    }
    let out = out.or_else(|| cfg.output.clone()).ok_or_else(|| LabError::Config {
        field: "output".into(),
        message: "no output path in config or on the command line".into(),
    })?;
    let records = run_experiment(&cfg, threads)?;
    if out.as_os_str() == "-" {
        emit(&records, cfg.format, &mut io::stdout().lock())
    } else {
        emit(&records, cfg.format, &mut BufWriter::new(File::create(&out)?))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
