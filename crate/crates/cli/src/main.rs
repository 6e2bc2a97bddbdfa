//! `holo-mimo` experiment runner.

mod config;
mod experiments;
mod output;
mod presets;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{ConfigError, ExperimentConfig, Format};
use output::sha256_hex;

#[derive(Parser)]
#[command(name = "holo-mimo", version, about = "Fourier plane-wave channel experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file or preset name.
    Run {
        config: String,
        #[arg(long, env = "HOLO_MIMO_SEED")]
        seed: Option<u64>,
        #[arg(long, env = "HOLO_MIMO_OUT")]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Print a shipped preset config.
    Preset { name: String },
}

enum Failure {
    Config(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numeric(_) => 2,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn load(config: &str) -> Result<(String, Option<String>), Failure> {
    let path = Path::new(config);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{config}: {e}")))?;
        return Ok((text, None));
    }
    match presets::get(config) {
        Some(text) => Ok((text.to_string(), Some(config.to_string()))),
        None => Err(Failure::Config(format!(
            "{config}: no such file or preset (presets: {})",
            presets::NAMES.join(", ")
        ))),
    }
}

fn run(config: &str, seed: Option<u64>, out: Option<PathBuf>, format: Option<Format>) -> Result<(), Failure> {
    let started = Instant::now();
    let (text, preset) = load(config)?;
    let cfg = ExperimentConfig::parse(&text).map_err(|e| Failure::Config(format!("{config}: {e}")))?;
    let seed = seed.unwrap_or(cfg.seed);
    let format = format.unwrap_or(cfg.format);
    let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output));

    let compute = Instant::now();
    let result = experiments::run(&cfg, seed).map_err(|e| Failure::Numeric(e.to_string()))?;
    let compute_s = compute.elapsed().as_secs_f64();

    let write = Instant::now();
    let io = |e: std::io::Error| Failure::Numeric(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut outputs = Vec::new();
    for t in &result.tables {
        let body = t.render(format);
        let file = t.file_name(format);
        std::fs::write(dir.join(&file), &body).map_err(io)?;
        outputs.push(json!({ "file": file, "rows": t.rows.len(), "sha256": sha256_hex(body.as_bytes()) }));
    }
    let write_s = write.elapsed().as_secs_f64();
    let manifest = json!({
        "config_hash": sha256_hex(text.as_bytes()),
        "seed": seed,
        "preset": preset,
        "experiment": text_of(&cfg.experiment),
        "format": match format { Format::Csv => "csv", Format::Json => "json" },
        "version": env!("CARGO_PKG_VERSION"),
        "outputs": outputs,
        "summary": result.summary,
        "durations": {
            "compute_s": compute_s,
            "write_s": write_s,
            "total_s": started.elapsed().as_secs_f64(),
        },
    });
    let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    body.push('\n');
    std::fs::write(dir.join("manifest.json"), body).map_err(io)?;
    eprintln!("wrote {} table(s) to {}", result.tables.len(), dir.display());
    Ok(())
}

fn text_of(e: &config::Experiment) -> &'static str {
    use config::Experiment::*;
    match e {
        Variances => "variances",
        Eigenvalues => "eigenvalues",
        CapacityVsSpacing => "capacity-vs-spacing",
        CapacityVsSnr => "capacity-vs-snr",
        Estimate => "estimate",
        Generate => "generate",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            out,
            format,
        } => run(&config, seed, out, format),
        Command::Preset { name } => match presets::get(&name) {
            Some(text) => {
                print!("{text}");
                Ok(())
            }
            None => Err(Failure::Config(format!(
                "unknown preset `{name}` (presets: {})",
                presets::NAMES.join(", ")
            ))),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("config error: {m}"),
                Failure::Numeric(m) => eprintln!("run failed: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
