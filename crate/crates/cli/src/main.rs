use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use emskin_cli::{emit, load_config, run_analyze, run_regions, run_sweep, run_synthesize, with_threads, CliError, Format};

#[derive(Parser)]
#[command(name = "emskin", version, about = "Reflected-field analysis and focusing synthesis for electromagnetic skins")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Caps worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Compare the closed-form and far-field predictions with the dipole reference.
    Analyze,
    /// Search layouts that focus on the receiver.
    Synthesize,
    /// Repeat the synthesis over the values of the sweep block.
    Sweep,
    /// Print the near-field and far-field radii of the aperture.
    Regions,
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config {
        field: "--config".into(),
        message: "a scenario file is required".into(),
    })?;
    let mut cfg = load_config(path)?;
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if cli.threads == Some(0) {
        return Err(CliError::Config { field: "--threads".into(), message: "must be at least 1".into() });
    }
    let bundle = with_threads(cli.threads, || match cli.command {
        Command::Analyze => run_analyze(&cfg),
        Command::Synthesize => run_synthesize(&cfg),
        Command::Sweep => run_sweep(&cfg),
        Command::Regions => run_regions(&cfg),
    })?;
    if let Command::Regions = cli.command {
        let t = &bundle.tables[0];
        let (r_nf, r_ff) = (t.rows[0][6], t.rows[0][7]);
        println!("r_nf = {r_nf:.6} m");
        println!("r_ff = {r_ff:.6} m");
    }
    let files = emit(&bundle, &cli.out, cli.format)?;
    if !cli.quiet {
        for note in &bundle.metadata.notes {
            eprintln!("note: {note}");
        }
        for f in files {
            eprintln!("wrote {}", f.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
