//! Response records shared by the CLI and the HTTP API. Both render through
//! [`render_json`], so the two paths produce identical bytes.

use std::sync::Arc;

use morseplan::config::EngineConfig;
use morseplan::diagnostics::{diagnose, DiagnosticReport};
use morseplan::mc_oracle::{simulate, SimConfig, TailEstimate};
use morseplan::surface::{
    extract_frontiers, solve_u0, BicubicInterpolant, ControlGrid, NodeFailure, SolveOutcome, SurfaceMeta,
};
use morseplan::spectral::SpectralSolver;
use serde::{Deserialize, Serialize};

use crate::archive::SurfaceArchive;
use crate::error::ServiceError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub engine_version: String,
    pub data: T,
}

pub fn render_json<T: Serialize>(data: &T) -> String {
    let env = Envelope {
        engine_version: morseplan::ENGINE_VERSION.to_string(),
        data,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("response serializes");
    s.push('\n');
    s
}

/// A built surface and its fitted interpolant; immutable once shared.
#[derive(Debug)]
pub struct Snapshot {
    pub archive: SurfaceArchive,
    pub interp: BicubicInterpolant,
}

impl Snapshot {
    pub fn new(archive: SurfaceArchive) -> Result<Arc<Self>, ServiceError> {
        let interp = archive.interpolant()?;
        Ok(Arc::new(Self { archive, interp }))
    }

    fn config(&self) -> &EngineConfig {
        &self.archive.header.config
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanData {
    pub plan_id: String,
    pub config_hash: String,
    pub surface_built: bool,
}

/// Plans are addressed by the leading 16 hex digits of their config hash.
pub fn plan_id(config: &EngineConfig) -> String {
    config.hash()[..16].to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityData {
    pub u0: f64,
    pub xi: f64,
    pub y0: f64,
    pub y_hat: f64,
    /// Clamped to [0, 1].
    pub p: f64,
    pub raw: f64,
    pub flagged: bool,
}

pub fn probability(solver: &SpectralSolver, u0: f64, xi: f64) -> Result<ProbabilityData, ServiceError> {
    let q = solver.query(u0, xi)?;
    Ok(ProbabilityData {
        u0,
        xi,
        y0: q.point.y0,
        y_hat: q.point.y_hat,
        p: q.probability.clamped,
        raw: q.probability.raw,
        flagged: q.probability.flagged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexData {
    pub xi: f64,
    pub y: f64,
    pub u0: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelData {
    pub alpha: f64,
    pub empty: bool,
    pub note: Option<String>,
    pub polylines: Vec<Vec<VertexData>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontiersData {
    pub config_hash: String,
    pub levels: Vec<LevelData>,
}

pub fn frontiers(snap: &Snapshot, levels: Option<&[f64]>) -> Result<FrontiersData, ServiceError> {
    let cfg = snap.config();
    let levels = levels.unwrap_or(&cfg.plan.confidence_levels);
    if let Some(a) = levels.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(ServiceError::Invalid(format!("level {a} is outside [0, 1]")));
    }
    let scale = 0.5 * cfg.market.sigma().powi(2) * cfg.plan.initial_wealth;
    let set = extract_frontiers(&snap.interp, levels, cfg.frontier_options());
    Ok(FrontiersData {
        config_hash: snap.archive.header.config_hash.clone(),
        levels: set
            .levels
            .into_iter()
            .map(|l| LevelData {
                alpha: l.alpha,
                empty: l.empty,
                note: l.note,
                polylines: l
                    .polylines
                    .into_iter()
                    .map(|line| {
                        line.into_iter()
                            .map(|v| VertexData {
                                xi: v.xi,
                                y: v.y,
                                u0: scale * v.y,
                                residual: v.residual,
                            })
                            .collect()
                    })
                    .collect(),
            })
            .collect(),
    })
}

pub fn frontiers_csv(data: &FrontiersData) -> String {
    let mut out = String::from("alpha,polyline,index,xi,y0,u0,residual\n");
    for l in &data.levels {
        for (k, line) in l.polylines.iter().enumerate() {
            for (i, v) in line.iter().enumerate() {
                out.push_str(&format!(
                    "{:?},{k},{i},{:?},{:?},{:?},{:?}\n",
                    l.alpha, v.xi, v.y, v.u0, v.residual
                ));
            }
        }
    }
    out
}

pub fn solve(snap: &Snapshot, xi: f64, alpha: f64) -> Result<SolveOutcome, ServiceError> {
    let cfg = snap.config();
    Ok(solve_u0(&snap.interp, &cfg.plan, cfg.market.sigma().powi(2), xi, alpha)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceData {
    pub config_hash: String,
    pub grid: ControlGrid,
    pub shape: [usize; 2],
    pub p_values: Vec<f64>,
    pub raw_values: Vec<f64>,
    pub meta: SurfaceMeta,
    pub failures: Vec<NodeFailure>,
}

pub fn surface(snap: &Snapshot) -> SurfaceData {
    let h = &snap.archive.header;
    SurfaceData {
        config_hash: h.config_hash.clone(),
        grid: h.grid.clone(),
        shape: h.shape,
        p_values: snap.archive.p_values.clone(),
        raw_values: snap.archive.raw_values.clone(),
        meta: h.meta.clone(),
        failures: h.failures.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McData {
    pub u0: f64,
    pub xi: f64,
    pub sim: SimConfig,
    pub estimate: TailEstimate,
    /// Spectral value at the same control, when u₀ > 0.
    pub spectral_p: Option<f64>,
}

pub fn monte_carlo(config: &EngineConfig, u0: f64, xi: f64, sim: SimConfig) -> Result<McData, ServiceError> {
    let estimate = simulate(&config.plan, &config.market, u0, xi, &sim)?;
    let spectral_p = if u0 > 0.0 {
        Some(config.spectral_solver()?.query(u0, xi)?.probability.clamped)
    } else {
        None
    };
    Ok(McData {
        u0,
        xi,
        sim,
        estimate,
        spectral_p,
    })
}

pub fn diagnostics(config: &EngineConfig, u0: f64, xi: f64) -> Result<DiagnosticReport, ServiceError> {
    Ok(diagnose(&config.spectral_solver()?, u0, xi)?)
}
