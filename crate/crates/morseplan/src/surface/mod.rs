//! Tail-probability surface over the (y, ξ) control plane, its bicubic
//! interpolant, constant-α frontiers and satisficing u₀ queries.

mod contour;
mod grid;
mod spline;

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use contour::{
    extract_frontiers, monotonicity, polyline_y_at, FrontierLevel, FrontierOptions, FrontierSet, FrontierVertex,
    MonotonicityReport, DEFAULT_FRONTIER_TOL, DEFAULT_REFINE,
};
pub use grid::{plan_market_hash, ControlGrid, DEFAULT_XI_NODES, DEFAULT_Y_NODES};
pub(crate) use grid::hex_digest;
pub use spline::{BicubicInterpolant, SplineBoundary};

use crate::error::{domain, Error, Result};
use crate::model::PlanSpec;
use crate::spectral::SpectralSolver;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceMeta {
    pub n_basis: usize,
    pub q: f64,
    pub engine_version: String,
    /// Seconds since the Unix epoch when the build started.
    pub created_unix: u64,
    pub build_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeFailure {
    pub i: usize,
    pub j: usize,
    pub y: f64,
    pub xi: f64,
    pub message: String,
}

/// Row-major (y index major) matrices of clamped and raw probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilitySurface {
    pub grid: ControlGrid,
    pub p_values: Vec<f64>,
    pub raw_values: Vec<f64>,
    pub meta: SurfaceMeta,
    pub failures: Vec<NodeFailure>,
}

impl ProbabilitySurface {
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p_values[i * self.grid.xi_nodes.len() + j]
    }

    pub fn raw(&self, i: usize, j: usize) -> f64 {
        self.raw_values[i * self.grid.xi_nodes.len() + j]
    }

    /// Number of nodes whose raw value left the truncation band.
    pub fn flagged_nodes(&self) -> usize {
        self.raw_values
            .iter()
            .filter(|&&r| !crate::spectral::ProbabilityValue::from_raw(r).flagged)
            .count()
            .abs_diff(self.raw_values.len())
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let (ny, nx) = self.grid.shape();
        for m in [&self.p_values, &self.raw_values] {
            if m.len() != ny * nx {
                return Err(Error::Dimension {
                    expected: ny * nx,
                    got: m.len(),
                });
            }
        }
        if self.p_values.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return domain("clamped probabilities must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Evaluates the solver at every grid node, one decomposition per ξ column.
/// Failed nodes are recorded and carry NaN; a column with no successful
/// node fails the build.
pub fn build_surface(solver: &SpectralSolver, grid: &ControlGrid) -> Result<ProbabilitySurface> {
    grid.validate()?;
    let started = Instant::now();
    let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    for &xi in &grid.xi_nodes {
        solver.params(xi)?;
    }
    let columns: Vec<Result<Vec<Result<f64>>>> = grid
        .xi_nodes
        .par_iter()
        .map(|&xi| {
            let col = solver.query_column(xi, &grid.y_nodes)?;
            Ok(col.into_iter().map(|r| r.map(|q| q.probability.raw)).collect())
        })
        .collect();
    let (ny, nx) = grid.shape();
    let mut raw = vec![f64::NAN; ny * nx];
    let mut failures = Vec::new();
    for (j, col) in columns.into_iter().enumerate() {
        let col = col?;
        if col.iter().all(|r| r.is_err()) {
            return Err(Error::Build(format!("every node failed in column xi = {}", grid.xi_nodes[j])));
        }
        for (i, r) in col.into_iter().enumerate() {
            match r {
                Ok(v) => raw[i * nx + j] = v,
                Err(e) => failures.push(NodeFailure {
                    i,
                    j,
                    y: grid.y_nodes[i],
                    xi: grid.xi_nodes[j],
                    message: e.to_string(),
                }),
            }
        }
    }
    let p_values = raw.iter().map(|r| if r.is_nan() { f64::NAN } else { r.clamp(0.0, 1.0) }).collect();
    Ok(ProbabilitySurface {
        grid: grid.clone(),
        p_values,
        raw_values: raw,
        meta: SurfaceMeta {
            n_basis: solver.config.n_basis,
            q: solver.config.q,
            engine_version: crate::ENGINE_VERSION.to_string(),
            created_unix,
            build_seconds: started.elapsed().as_secs_f64(),
        },
        failures,
    })
}

/// Bicubic spline through the clamped node values.
pub fn fit_spline(surface: &ProbabilitySurface, boundary: SplineBoundary) -> Result<BicubicInterpolant> {
    if !surface.failures.is_empty() {
        return Err(Error::Build(format!(
            "surface has {} failed nodes; cannot interpolate",
            surface.failures.len()
        )));
    }
    BicubicInterpolant::new(&surface.grid.y_nodes, &surface.grid.xi_nodes, &surface.p_values, boundary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Solved,
    /// Even the largest contribution on the grid leaves p above α.
    Infeasible,
    /// The smallest contribution on the grid already meets α.
    AlreadySatisfied,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub xi: f64,
    pub alpha: f64,
    pub y0: Option<f64>,
    pub u0: Option<f64>,
    /// Interpolated p at the returned point.
    pub p: Option<f64>,
}

/// Smallest u₀ on the ξ slice with p(y₀, 0 | ξ) = α, found by scanning the
/// slice for its first downward crossing and bisecting inside it.
pub fn solve_u0(interp: &BicubicInterpolant, plan: &PlanSpec, hbar: f64, xi: f64, alpha: f64) -> Result<SolveOutcome> {
    let (x0, x1) = interp.xi_range();
    if !(xi >= x0 && xi <= x1) {
        return domain(format!("xi = {xi} outside grid range [{x0}, {x1}]"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let none = |status| SolveOutcome {
        status,
        xi,
        alpha,
        y0: None,
        u0: None,
        p: None,
    };
    let f = |y: f64| interp.eval(y, xi) - alpha;
    let samples: Vec<f64> = {
        let y = &interp.y;
        let mut v = Vec::with_capacity(8 * y.len());
        for w in y.windows(2) {
            for k in 0..8 {
                v.push(w[0] + (w[1] - w[0]) * k as f64 / 8.0);
            }
        }
        v.push(y[y.len() - 1]);
        v
    };
    if f(samples[0]) <= 0.0 {
        return Ok(none(SolveStatus::AlreadySatisfied));
    }
    let Some(k) = samples.windows(2).position(|w| f(w[1]) <= 0.0) else {
        return Ok(none(SolveStatus::Infeasible));
    };
    let (mut lo, mut hi) = (samples[k], samples[k + 1]);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    let y0 = 0.5 * (lo + hi);
    Ok(SolveOutcome {
        status: SolveStatus::Solved,
        xi,
        alpha,
        y0: Some(y0),
        u0: Some(0.5 * hbar * y0 * plan.initial_wealth),
        p: Some(interp.eval(y0, xi)),
    })
}
