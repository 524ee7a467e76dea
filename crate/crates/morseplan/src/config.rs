//! Engine configuration file: plan, market and solver settings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MarketParams, PlanSpec};
use crate::spectral::{Branch, SolverConfig, SpectralSolver};
use crate::surface::{hex_digest, ControlGrid, FrontierOptions, SplineBoundary};

fn d_n() -> usize {
    150
}
fn d_q() -> f64 {
    crate::model::DEFAULT_Q
}
fn d_y() -> usize {
    crate::surface::DEFAULT_Y_NODES
}
fn d_xi() -> usize {
    crate::surface::DEFAULT_XI_NODES
}
fn d_refine() -> usize {
    crate::surface::DEFAULT_REFINE
}
fn d_tol() -> f64 {
    crate::surface::DEFAULT_FRONTIER_TOL
}

/// Numerical settings. Every field is optional in the file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// Basis size N.
    #[serde(default = "d_n")]
    pub n_basis: usize,
    /// Basis parameter q.
    #[serde(default = "d_q")]
    pub q: f64,
    #[serde(default)]
    pub branch: Branch,
    #[serde(default = "d_y")]
    pub y_nodes: usize,
    #[serde(default = "d_xi")]
    pub xi_nodes: usize,
    /// Contour lattice density relative to the grid.
    #[serde(default = "d_refine")]
    pub refine: usize,
    #[serde(default = "d_tol")]
    pub frontier_tol: f64,
    #[serde(default)]
    pub spline: SplineBoundary,
}

impl Default for SolverSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub plan: PlanSpec,
    pub market: MarketParams,
    #[serde(default)]
    pub solver: SolverSection,
}

impl EngineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Validation(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        self.market.validate()?;
        let s = &self.solver;
        let mut errs = Vec::new();
        if s.n_basis < 2 {
            errs.push(format!("solver.n_basis must be >= 2, got {}", s.n_basis));
        }
        if !(s.q > 0.0) {
            errs.push(format!("solver.q must be > 0, got {}", s.q));
        }
        if s.y_nodes < 4 || s.xi_nodes < 4 {
            errs.push("solver grid counts must be >= 4".to_string());
        }
        if s.refine == 0 {
            errs.push("solver.refine must be >= 1".to_string());
        }
        if !(s.frontier_tol > 0.0) {
            errs.push("solver.frontier_tol must be > 0".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        hex_digest(&serde_json::to_vec(self).expect("config serializes"))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            n_basis: self.solver.n_basis,
            q: self.solver.q,
            branch: self.solver.branch,
        }
    }

    pub fn spectral_solver(&self) -> Result<SpectralSolver> {
        SpectralSolver::new(self.plan.clone(), self.market.clone(), self.solver_config())
    }

    pub fn grid(&self) -> Result<ControlGrid> {
        ControlGrid::from_plan(&self.plan, &self.market, self.solver.y_nodes, self.solver.xi_nodes)
    }

    pub fn frontier_options(&self) -> FrontierOptions {
        FrontierOptions {
            refine: self.solver.refine,
            tol: self.solver.frontier_tol,
        }
    }
}
