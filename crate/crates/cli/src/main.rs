//! `cavlab` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 physics error.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser};
use serde_json::{json, Map};

use config::{build_config, parse_override, read_config_file, Command, ConfigError, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "cavlab", version, about = "Entanglement in microcavities and driven cavity QED")]
struct Cli {
    /// dispersion, phasematch, comb-ground-state, witness-scan, dicke-steady or dicke-dynamics
    command: String,
    /// Flat JSON object of parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one parameter, `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file; the metadata goes to `<output>.meta.json`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let command = Command::parse(&cli.command)?;
    let file = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => Map::new(),
    };
    let overrides = cli.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    build_config(command, file, &overrides, cli.output.clone())
}

fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_artifacts(cfg: &ExperimentConfig, art: &commands::Artifacts) -> std::io::Result<()> {
    let meta = json!({
        "command": cfg.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "parameters": cfg.to_json(),
        "results": art.results,
    });
    let mut text = serde_json::to_string_pretty(&meta).map_err(std::io::Error::other)?;
    text.push('\n');
    let primary = &cfg.output_path;
    let side = sidecar_path(primary);
    let result = std::fs::write(primary, &art.primary).and_then(|_| std::fs::write(&side, text));
    if result.is_err() {
        let _ = std::fs::remove_file(primary);
        let _ = std::fs::remove_file(&side);
    }
    result
}

fn main() -> ExitCode {
    let matches = Cli::command().after_long_help(config::keys_help()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let cfg = match configure(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("ConfigError: threads: must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot start thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let art = match commands::run(&cfg) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(3);
        }
    };
    if let Err(e) = write_artifacts(&cfg, &art) {
        eprintln!("cannot write {}: {e}", cfg.output_path.display());
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
