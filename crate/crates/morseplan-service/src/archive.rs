//! Self-describing surface archive: 8-byte magic, little-endian u64 header
//! length, JSON header, then the raw and clamped matrices as little-endian
//! f64 in row-major (y-major) order.

use std::io::Write;
use std::path::Path;

use morseplan::config::EngineConfig;
use morseplan::surface::{
    extract_frontiers, fit_spline, BicubicInterpolant, ControlGrid, FrontierSet, NodeFailure, ProbabilitySurface,
    SurfaceMeta,
};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

pub const MAGIC: &[u8; 8] = b"MPSURF01";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchiveHeader {
    pub format_version: u32,
    pub engine_version: String,
    pub config_hash: String,
    pub config: EngineConfig,
    pub grid: ControlGrid,
    pub shape: [usize; 2],
    pub meta: SurfaceMeta,
    pub failures: Vec<NodeFailure>,
    /// Frontiers at the plan's confidence levels.
    pub frontiers: FrontierSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceArchive {
    pub header: ArchiveHeader,
    pub raw_values: Vec<f64>,
    pub p_values: Vec<f64>,
}

fn corrupt(msg: impl Into<String>) -> ServiceError {
    ServiceError::BadArchive(msg.into())
}

impl SurfaceArchive {
    /// Packages a built surface with frontiers at the configured levels.
    pub fn new(config: &EngineConfig, surface: ProbabilitySurface) -> Result<Self, ServiceError> {
        let frontiers = if surface.failures.is_empty() {
            let interp = fit_spline(&surface, config.solver.spline)?;
            extract_frontiers(&interp, &config.plan.confidence_levels, config.frontier_options())
        } else {
            FrontierSet { levels: vec![] }
        };
        let shape = [surface.grid.y_nodes.len(), surface.grid.xi_nodes.len()];
        Ok(Self {
            header: ArchiveHeader {
                format_version: FORMAT_VERSION,
                engine_version: surface.meta.engine_version.clone(),
                config_hash: config.hash(),
                config: config.clone(),
                grid: surface.grid,
                shape,
                meta: surface.meta,
                failures: surface.failures,
                frontiers,
            },
            raw_values: surface.raw_values,
            p_values: surface.p_values,
        })
    }

    pub fn surface(&self) -> ProbabilitySurface {
        ProbabilitySurface {
            grid: self.header.grid.clone(),
            p_values: self.p_values.clone(),
            raw_values: self.raw_values.clone(),
            meta: self.header.meta.clone(),
            failures: self.header.failures.clone(),
        }
    }

    pub fn interpolant(&self) -> Result<BicubicInterpolant, ServiceError> {
        Ok(fit_spline(&self.surface(), self.header.config.solver.spline)?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.header).expect("header serializes");
        let mut out = Vec::with_capacity(16 + header.len() + 16 * self.raw_values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for v in self.raw_values.iter().chain(&self.p_values) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ServiceError> {
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(corrupt("missing archive magic"));
        }
        let hlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let body = bytes.get(16..16 + hlen).ok_or_else(|| corrupt("truncated header"))?;
        let header: ArchiveHeader = serde_json::from_slice(body).map_err(|e| corrupt(format!("header: {e}")))?;
        if header.format_version != FORMAT_VERSION {
            return Err(corrupt(format!("unsupported format version {}", header.format_version)));
        }
        let [ny, nx] = header.shape;
        if header.grid.y_nodes.len() != ny || header.grid.xi_nodes.len() != nx {
            return Err(corrupt("grid does not match shape"));
        }
        let data = &bytes[16 + hlen..];
        if data.len() != 16 * ny * nx {
            return Err(corrupt(format!("matrix section has {} bytes, expected {}", data.len(), 16 * ny * nx)));
        }
        let mut vals = data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let raw_values: Vec<f64> = vals.by_ref().take(ny * nx).collect();
        let p_values: Vec<f64> = vals.collect();
        Ok(Self {
            header,
            raw_values,
            p_values,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), ServiceError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, ServiceError> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// One row per node: indices, coordinates, clamped and raw values.
    pub fn to_csv(&self) -> String {
        let g = &self.header.grid;
        let plan = &self.header.config.plan;
        let hbar = self.header.config.market.sigma().powi(2);
        let nx = g.xi_nodes.len();
        let mut out = String::from("i,j,y0,u0,xi,p,raw\n");
        for (i, &y) in g.y_nodes.iter().enumerate() {
            for (j, &xi) in g.xi_nodes.iter().enumerate() {
                let u0 = 0.5 * hbar * y * plan.initial_wealth;
                let k = i * nx + j;
                out.push_str(&format!(
                    "{i},{j},{y:?},{u0:?},{xi:?},{:?},{:?}\n",
                    self.p_values[k], self.raw_values[k]
                ));
            }
        }
        out
    }
}
