use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use morseplan::config::EngineConfig;
use morseplan::mc_oracle::{Coordinate, SimConfig};
use morseplan::surface::build_surface;
use serde::Serialize;

use crate::api::{self, render_json, Snapshot};
use crate::archive::SurfaceArchive;
use crate::error::ServiceError;
use crate::http::parse_levels;

#[derive(Debug, Parser)]
#[command(name = "morseplan", version, about = "Goal-based planning with a spectral tail-probability engine")]
pub struct Cli {
    /// Worker threads for surface builds and simulation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct Point {
    #[arg(long)]
    pub config: PathBuf,
    /// Initial contribution rate, currency per year.
    #[arg(long)]
    pub u0: f64,
    /// Contribution growth rate, per year.
    #[arg(long)]
    pub xi: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the probability surface and write an archive.
    Surface {
        #[arg(long)]
        config: PathBuf,
        /// Archive path.
        #[arg(long)]
        out: PathBuf,
        /// Summary format on stdout; csv prints every node.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Extract frontiers from an archive.
    Frontiers {
        archive: PathBuf,
        /// Comma-separated levels; the plan's levels when omitted.
        #[arg(long)]
        levels: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Smallest u₀ meeting a confidence level at a given ξ.
    Solve {
        archive: PathBuf,
        #[arg(long)]
        xi: f64,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Spectral tail probability at one control.
    Probability {
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo estimate at one control.
    Mc {
        #[command(flatten)]
        point: Point,
        #[arg(long, default_value_t = 200_000)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 252)]
        steps_per_year: usize,
        #[arg(long, value_enum, default_value_t = CoordinateArg::Wealth)]
        coordinate: CoordinateArg,
        #[command(flatten)]
        output: Output,
    },
    /// Truncation diagnostics at one control.
    Diagnose {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the HTTP service; the address comes from MORSEPLAN_ADDR.
    Serve {
        /// Archives to preload.
        #[arg(long)]
        archive: Vec<PathBuf>,
        /// Plan configs to register without a surface.
        #[arg(long)]
        config: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoordinateArg {
    Wealth,
    Verhulst,
}

pub fn load_config(path: &Path) -> Result<EngineConfig, ServiceError> {
    let text = std::fs::read_to_string(path)?;
    Ok(EngineConfig::from_json(&text)?)
}

fn emit(output: &Output, text: String) -> Result<String, ServiceError> {
    match &output.out {
        Some(p) => {
            std::fs::write(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn csv_record<T: Serialize>(data: &T) -> Result<String, ServiceError> {
    let v = serde_json::to_value(data).map_err(|e| ServiceError::Internal(e.to_string()))?;
    let mut keys = Vec::new();
    let mut vals = Vec::new();
    flatten("", &v, &mut keys, &mut vals);
    Ok(format!("{}\n{}\n", keys.join(","), vals.join(",")))
}

fn flatten(prefix: &str, v: &serde_json::Value, keys: &mut Vec<String>, vals: &mut Vec<String>) {
    match v {
        serde_json::Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, keys, vals);
            }
        }
        serde_json::Value::Null => {
            keys.push(prefix.to_string());
            vals.push(String::new());
        }
        serde_json::Value::String(s) => {
            keys.push(prefix.to_string());
            vals.push(s.clone());
        }
        other => {
            keys.push(prefix.to_string());
            vals.push(other.to_string());
        }
    }
}

fn render<T: Serialize>(output: &Output, data: &T) -> Result<String, ServiceError> {
    let text = match output.format {
        Format::Json => render_json(data),
        Format::Csv => csv_record(data)?,
    };
    emit(output, text)
}

#[derive(Serialize)]
struct SurfaceSummary {
    archive: String,
    config_hash: String,
    shape: [usize; 2],
    build_seconds: f64,
    failed_nodes: usize,
    flagged_nodes: usize,
}

/// Runs one non-serving subcommand and returns what goes to stdout.
pub fn execute(cli: &Cli) -> Result<String, ServiceError> {
    match &cli.command {
        Command::Surface { config, out, format } => {
            let cfg = load_config(config)?;
            let surface = build_surface(&cfg.spectral_solver()?, &cfg.grid()?)?;
            let flagged = surface.flagged_nodes();
            let archive = SurfaceArchive::new(&cfg, surface)?;
            archive.write(out)?;
            Ok(match format {
                Format::Csv => archive.to_csv(),
                Format::Json => render_json(&SurfaceSummary {
                    archive: out.display().to_string(),
                    config_hash: archive.header.config_hash.clone(),
                    shape: archive.header.shape,
                    build_seconds: archive.header.meta.build_seconds,
                    failed_nodes: archive.header.failures.len(),
                    flagged_nodes: flagged,
                }),
            })
        }
        Command::Frontiers { archive, levels, output } => {
            let snap = Snapshot::new(SurfaceArchive::read(archive)?)?;
            let levels = levels.as_deref().map(parse_levels).transpose()?;
            let data = api::frontiers(&snap, levels.as_deref())?;
            emit(
                output,
                match output.format {
                    Format::Json => render_json(&data),
                    Format::Csv => api::frontiers_csv(&data),
                },
            )
        }
        Command::Solve { archive, xi, alpha, output } => {
            let snap = Snapshot::new(SurfaceArchive::read(archive)?)?;
            render(output, &api::solve(&snap, *xi, *alpha)?)
        }
        Command::Probability { point, output } => {
            let cfg = load_config(&point.config)?;
            render(output, &api::probability(&cfg.spectral_solver()?, point.u0, point.xi)?)
        }
        Command::Mc {
            point,
            paths,
            seed,
            steps_per_year,
            coordinate,
            output,
        } => {
            let cfg = load_config(&point.config)?;
            let sim = SimConfig {
                n_paths: *paths,
                steps_per_year: *steps_per_year,
                seed: *seed,
                coordinate: match coordinate {
                    CoordinateArg::Wealth => Coordinate::Wealth,
                    CoordinateArg::Verhulst => Coordinate::Verhulst,
                },
                ..Default::default()
            };
            render(output, &api::monte_carlo(&cfg, point.u0, point.xi, sim)?)
        }
        Command::Diagnose { point, out } => {
            let cfg = load_config(&point.config)?;
            let output = Output {
                out: out.clone(),
                format: Format::Json,
            };
            emit(&output, render_json(&api::diagnostics(&cfg, point.u0, point.xi)?))
        }
        Command::Serve { .. } => Err(ServiceError::Invalid("serve is not a batch command".into())),
    }
}
