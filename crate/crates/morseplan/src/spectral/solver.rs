use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::QuasiNumberBasis;
use super::eigen::{eigendecompose, SpectralDecomposition};
use super::hamiltonian::{build_hamiltonian, Branch};
use super::weights::{backward_initial_weights, evolve, forward_initial_weights, WeightKind, WeightVector};
use crate::error::{domain, Result};
use crate::model::{control_point, control_point_from_y0, derive_params, ControlPoint, DerivedParams, MarketParams, PlanSpec};

/// Raw probabilities outside this band are flagged as truncation artifacts.
pub const RAW_BAND: (f64, f64) = (-0.02, 1.02);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityValue {
    pub raw: f64,
    pub clamped: f64,
    pub flagged: bool,
}

impl ProbabilityValue {
    pub fn from_raw(raw: f64) -> Self {
        Self {
            raw,
            clamped: raw.clamp(0.0, 1.0),
            flagged: !(raw >= RAW_BAND.0 && raw <= RAW_BAND.1),
        }
    }
}

fn require(kind: WeightKind, w: &WeightVector, basis: &QuasiNumberBasis) -> Result<()> {
    if w.kind != kind {
        return domain(format!("expected {kind:?} weights, got {:?}", w.kind));
    }
    if w.values.len() != basis.n {
        return Err(crate::Error::Dimension {
            expected: basis.n,
            got: w.values.len(),
        });
    }
    Ok(())
}

/// f(y,t) = y^{s−1} e^{−y/2} Σ wₙ(t) φₙ(y), raw (may dip below zero).
pub fn fpe_density(
    basis: &QuasiNumberBasis,
    weights: &WeightVector,
    params: &DerivedParams,
    y: f64,
) -> Result<f64> {
    require(WeightKind::Forward, weights, basis)?;
    if !(y > 0.0) {
        return domain(format!("density argument must be positive, got {y}"));
    }
    let phi = basis.values_with_log_factor(y, (params.s - 1.0) * y.ln() - 0.5 * y)?;
    Ok(phi.iter().zip(&weights.values).map(|(a, b)| a * b).sum())
}

/// p(y) = y^{−s} e^{y/2} Σ wₙ φₙ(y) for backward weights evolved over the
/// remaining horizon.
pub fn bke_tail_probability(
    basis: &QuasiNumberBasis,
    weights: &WeightVector,
    params: &DerivedParams,
    y: f64,
) -> Result<ProbabilityValue> {
    require(WeightKind::Backward, weights, basis)?;
    if !(y > 0.0) {
        return domain(format!("probability argument must be positive, got {y}"));
    }
    let phi = basis.values_with_log_factor(y, 0.5 * y - params.s * y.ln())?;
    let raw = phi.iter().zip(&weights.values).map(|(a, b)| a * b).sum();
    Ok(ProbabilityValue::from_raw(raw))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_n")]
    pub n_basis: usize,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_branch")]
    pub branch: Branch,
}

fn default_n() -> usize {
    150
}
fn default_q() -> f64 {
    crate::model::DEFAULT_Q
}
fn default_branch() -> Branch {
    Branch::Plus
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_basis: default_n(),
            q: default_q(),
            branch: default_branch(),
        }
    }
}

type CacheKey = (u64, u64, usize, Branch);

/// Decompositions memoized by (s, q, N, branch).
#[derive(Debug, Default)]
pub struct DecompositionCache {
    map: Mutex<HashMap<CacheKey, Arc<SpectralDecomposition>>>,
}

impl DecompositionCache {
    pub fn get_or_build(&self, basis: &QuasiNumberBasis, branch: Branch) -> Result<Arc<SpectralDecomposition>> {
        let key = (basis.s.to_bits(), basis.q.to_bits(), basis.n, branch);
        if let Some(d) = self.map.lock().unwrap().get(&key) {
            return Ok(d.clone());
        }
        let dec = Arc::new(eigendecompose(&build_hamiltonian(basis, branch))?);
        Ok(self.map.lock().unwrap().entry(key).or_insert(dec).clone())
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailQuery {
    pub point: ControlPoint,
    pub probability: ProbabilityValue,
}

/// Per-plan entry point: derives parameters per ξ, caches decompositions and
/// evaluates tail probabilities.
#[derive(Debug)]
pub struct SpectralSolver {
    pub plan: PlanSpec,
    pub market: MarketParams,
    pub config: SolverConfig,
    cache: DecompositionCache,
}

/// Everything that depends on ξ alone.
#[derive(Debug, Clone)]
pub struct Column {
    pub params: DerivedParams,
    pub basis: QuasiNumberBasis,
    pub decomp: Arc<SpectralDecomposition>,
}

impl SpectralSolver {
    pub fn new(plan: PlanSpec, market: MarketParams, config: SolverConfig) -> Result<Self> {
        plan.validate()?;
        market.validate()?;
        if config.n_basis < 2 {
            return domain("n_basis must be at least 2");
        }
        Ok(Self {
            plan,
            market,
            config,
            cache: DecompositionCache::default(),
        })
    }

    pub fn cache(&self) -> &DecompositionCache {
        &self.cache
    }

    pub fn params(&self, xi: f64) -> Result<DerivedParams> {
        let p = derive_params(&self.market, xi, self.config.q)?;
        p.ensure_valid()?;
        Ok(p)
    }

    pub fn column(&self, xi: f64) -> Result<Column> {
        let params = self.params(xi)?;
        let basis = QuasiNumberBasis::new(self.config.n_basis, self.config.q, params.s)?;
        let decomp = self.cache.get_or_build(&basis, self.config.branch)?;
        Ok(Column { params, basis, decomp })
    }

    /// Backward weights evolved over the full horizon for a control point.
    pub fn backward_at_horizon(&self, col: &Column, point: &ControlPoint) -> Result<WeightVector> {
        let w0 = backward_initial_weights(&col.basis, point, &col.params)?;
        evolve(&w0, &col.decomp, self.plan.horizon_years, col.params.hbar)
    }

    pub fn evaluate(&self, col: &Column, point: ControlPoint) -> Result<TailQuery> {
        let w = self.backward_at_horizon(col, &point)?;
        let probability = bke_tail_probability(&col.basis, &w, &col.params, point.y0)?;
        Ok(TailQuery { point, probability })
    }

    pub fn query(&self, u0: f64, xi: f64) -> Result<TailQuery> {
        let col = self.column(xi)?;
        let point = control_point(&self.plan, &col.params, u0)?;
        self.evaluate(&col, point)
    }

    pub fn query_y0(&self, y0: f64, xi: f64) -> Result<TailQuery> {
        let col = self.column(xi)?;
        let point = control_point_from_y0(&self.plan, &col.params, y0)?;
        self.evaluate(&col, point)
    }

    /// One ξ column over many y₀ values, evaluated in parallel.
    pub fn query_column(&self, xi: f64, y0s: &[f64]) -> Result<Vec<Result<TailQuery>>> {
        let col = self.column(xi)?;
        Ok(y0s
            .par_iter()
            .map(|&y0| {
                let point = control_point_from_y0(&self.plan, &col.params, y0)?;
                self.evaluate(&col, point)
            })
            .collect())
    }

    /// Σₙ wₙ^F(t)·wₙ^B(T−t) at each requested t; constant in exact arithmetic.
    pub fn duality_products(&self, u0: f64, xi: f64, times: &[f64]) -> Result<Vec<f64>> {
        let col = self.column(xi)?;
        let point = control_point(&self.plan, &col.params, u0)?;
        let wf0 = forward_initial_weights(&col.basis, &point, &col.params)?;
        let wb0 = backward_initial_weights(&col.basis, &point, &col.params)?;
        let horizon = self.plan.horizon_years;
        times
            .iter()
            .map(|&t| {
                if !(0.0..=horizon).contains(&t) {
                    return domain(format!("time {t} outside [0, {horizon}]"));
                }
                let wf = evolve(&wf0, &col.decomp, t, col.params.hbar)?;
                let wb = evolve(&wb0, &col.decomp, horizon - t, col.params.hbar)?;
                Ok(wf.dot(&wb))
            })
            .collect()
    }
}
