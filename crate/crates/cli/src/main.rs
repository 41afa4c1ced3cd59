//! `co2fronts <mode> --config <file> --out <dir> [--force] [--batch <dir>]`
//!
//! Exit status: 0 success, 2 config parse error, 3 validation error,
//! 4 runtime error, 5 output directory exists.

mod config;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use config::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Riemann,
    Interact,
    Track,
    Characteristics,
    OracleCompare,
    /// Check a config (or run manifest) without running it.
    Validate,
}

impl Command {
    fn mode(self) -> Option<Mode> {
        match self {
            Command::Riemann => Some(Mode::Riemann),
            Command::Interact => Some(Mode::Interact),
            Command::Track => Some(Mode::Track),
            Command::Characteristics => Some(Mode::Characteristics),
            Command::OracleCompare => Some(Mode::OracleCompare),
            Command::Validate => None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "co2fronts",
    version,
    about = "Front tracking for gravity currents with residual trapping"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file (JSON).
    #[arg(long, required_unless_present = "batch")]
    config: Option<PathBuf>,
    /// Output directory; with --batch, the parent of one directory per scenario.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace existing output directories.
    #[arg(long)]
    force: bool,
    /// Run every *.json scenario in this directory concurrently.
    #[arg(long, conflicts_with = "config")]
    batch: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum Failure {
    #[error("cannot parse {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("invalid config {path}:\n  {}", .violations.join("\n  "))]
    Invalid { path: String, violations: Vec<String> },
    #[error("run failed: {0}")]
    Runtime(String),
    #[error("output directory {0} exists; pass --force to replace it")]
    Exists(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse { .. } => 2,
            Failure::Invalid { .. } => 3,
            Failure::Runtime(_) => 4,
            Failure::Exists(_) => 5,
        }
    }
}

fn load(path: &Path) -> Result<config::Config, Failure> {
    let parse_err = |msg: String| Failure::Parse {
        path: path.display().to_string(),
        msg,
    };
    let text = fs::read_to_string(path).map_err(|e| parse_err(e.to_string()))?;
    config::parse(&text).map_err(parse_err)
}

fn run_id(echo: &str) -> String {
    let digest = Sha256::digest(format!("co2fronts {}\n{echo}", env!("CARGO_PKG_VERSION")).as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes every artifact into a staging directory next to `out`, then moves
/// it into place, so a failed run leaves nothing behind.
fn write_outputs(out: &Path, files: &[(&str, Vec<u8>)]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Runtime(format!("{}: {e}", out.display()));
    let name = out
        .file_name()
        .ok_or_else(|| Failure::Runtime(format!("bad output path {}", out.display())))?
        .to_string_lossy();
    let parent = out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(io)?;
    let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(io)?;
    }
    fs::create_dir(&staging).map_err(io)?;
    let result = (|| {
        for (file, bytes) in files {
            fs::write(staging.join(file), bytes)?;
        }
        if out.exists() {
            fs::remove_dir_all(out)?;
        }
        fs::rename(&staging, out)
    })();
    if result.is_err() {
        let _ = fs::remove_dir_all(&staging);
    }
    result.map_err(io)
}

fn run_one(path: &Path, mode: Mode, out: &Path, force: bool) -> Result<(), Failure> {
    let cfg = load(path)?;
    let scenario = config::check(&cfg, Some(mode)).map_err(|violations| Failure::Invalid {
        path: path.display().to_string(),
        violations,
    })?;
    if out.exists() && !force {
        return Err(Failure::Exists(out.display().to_string()));
    }
    let start = Instant::now();
    let outputs = run::execute(&scenario).map_err(|e| Failure::Runtime(e.to_string()))?;
    let echo = serde_json::to_value(&scenario.echo).expect("config serializes");
    let mut files: Vec<(&str, Vec<u8>)> = outputs.artifacts;
    let mut names: Vec<&str> = files.iter().map(|(n, _)| *n).collect();
    names.push("manifest.json");
    let manifest = json!({
        "tool": "co2fronts",
        "version": env!("CARGO_PKG_VERSION"),
        "run_id": run_id(&echo.to_string()),
        "mode": mode.to_string(),
        "config": echo,
        "window": [outputs.window.0, outputs.window.1],
        "outputs": names,
        "summary": outputs.summary,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    let mut text = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    text.push(b'\n');
    files.push(("manifest.json", text));
    write_outputs(out, &files)
}

fn validate(path: &Path) -> ExitCode {
    let (violations, code) = match load(path) {
        Err(e) => (vec![e.to_string()], 2),
        Ok(cfg) => {
            let v = config::violations(&cfg, None);
            let code = if v.is_empty() { 0 } else { 3 };
            (v, code)
        }
    };
    let report = json!({"config": path.display().to_string(), "valid": code == 0, "violations": violations});
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    ExitCode::from(code)
}

fn batch(dir: &Path, mode: Mode, out: &Path, force: bool) -> ExitCode {
    let mut configs: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => {
            eprintln!("cannot read {}: {e}", dir.display());
            return ExitCode::from(2);
        }
    };
    configs.sort();
    let results: Vec<Result<(), Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| {
                let stem = cfg.file_stem().expect("json file").to_owned();
                let target = out.join(stem);
                scope.spawn(move || run_one(cfg, mode, &target, force))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("run thread")).collect()
    });
    let mut code = 0;
    for (cfg, r) in configs.iter().zip(&results) {
        match r {
            Ok(()) => println!("{}: ok", cfg.display()),
            Err(e) => {
                eprintln!("{}: {e}", cfg.display());
                if code == 0 {
                    code = e.code();
                }
            }
        }
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(mode) = cli.command.mode() else {
        return match (&cli.config, &cli.batch) {
            (Some(c), _) => validate(c),
            _ => {
                eprintln!("validate needs --config");
                ExitCode::from(2)
            }
        };
    };
    let Some(out) = cli.out.as_deref() else {
        eprintln!("--out is required for mode {mode}");
        return ExitCode::from(2);
    };
    if let Some(dir) = &cli.batch {
        return batch(dir, mode, out, cli.force);
    }
    let path = cli.config.as_deref().expect("clap enforces --config");
    match run_one(path, mode, out, cli.force) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
