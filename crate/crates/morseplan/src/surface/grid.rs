use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{domain, Result};
use crate::model::{u0_to_y0, MarketParams, PlanSpec};

pub const DEFAULT_Y_NODES: usize = 100;
pub const DEFAULT_XI_NODES: usize = 20;

/// Nodes of the (y, ξ) control plane; y is log-spaced, ξ linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlGrid {
    pub y_nodes: Vec<f64>,
    pub xi_nodes: Vec<f64>,
    /// Hex SHA-256 of the plan and market the grid was derived from.
    pub provenance: String,
}

/// SHA-256 over the canonical JSON of plan and market.
pub fn plan_market_hash(plan: &PlanSpec, market: &MarketParams) -> String {
    let body = serde_json::to_vec(&(plan, market)).expect("plan serializes");
    hex_digest(&body)
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    v[n - 1] = hi;
    v
}

impl ControlGrid {
    /// y bounds come from the plan's u₀ bounds through y₀ = 2u₀/(ħΠ₀).
    pub fn from_plan(plan: &PlanSpec, market: &MarketParams, n_y: usize, n_xi: usize) -> Result<Self> {
        plan.validate()?;
        market.validate()?;
        if n_y < 4 || n_xi < 4 {
            return domain(format!("grid needs at least 4 nodes per axis, got {n_y}×{n_xi}"));
        }
        let hbar = market.sigma().powi(2);
        let y_lo = u0_to_y0(plan, hbar, plan.u0_bounds[0]);
        let y_hi = u0_to_y0(plan, hbar, plan.u0_bounds[1]);
        if !(y_lo > 0.0 && y_hi > y_lo) {
            return domain("u0 bounds must be positive and increasing");
        }
        if !(plan.xi_bounds[1] > plan.xi_bounds[0]) {
            return domain("xi bounds must be increasing");
        }
        Ok(Self {
            y_nodes: log_space(y_lo, y_hi, n_y),
            xi_nodes: lin_space(plan.xi_bounds[0], plan.xi_bounds[1], n_xi),
            provenance: plan_market_hash(plan, market),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.y_nodes.len(), self.xi_nodes.len())
    }

    pub fn validate(&self) -> Result<()> {
        let (ny, nx) = self.shape();
        if ny < 4 || nx < 4 {
            return domain(format!("grid needs at least 4 nodes per axis, got {ny}×{nx}"));
        }
        if self.y_nodes[0] <= 0.0 {
            return domain("y nodes must be positive");
        }
        let inc = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]) && v.iter().all(|x| x.is_finite());
        if !inc(&self.y_nodes) || !inc(&self.xi_nodes) {
            return domain("grid nodes must be finite and strictly increasing");
        }
        Ok(())
    }
}
