//! Monte Carlo simulation of the controlled portfolio SDE
//! `dΠ = (r̄Π + u₀e^{ξt})dt + σΠ dW`, either directly or through the
//! Verhulst coordinate `v = 2u₀e^{ξt}/(σ²Π)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{MarketParams, PlanSpec};

const BATCH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    #[default]
    Wealth,
    Verhulst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Euler,
}

fn default_paths() -> usize {
    200_000
}

fn default_steps() -> usize {
    252
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    /// Time steps per year; the total is rounded up to cover the horizon.
    #[serde(default = "default_steps")]
    pub steps_per_year: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub coordinate: Coordinate,
    #[serde(default)]
    pub scheme: Scheme,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: default_paths(),
            steps_per_year: default_steps(),
            seed: 0,
            coordinate: Coordinate::Wealth,
            scheme: Scheme::Euler,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub p_hat: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

impl TailEstimate {
    fn from_count(hits: usize, n: usize) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            p_hat: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
            n_paths: n,
        }
    }
}

fn check(plan: &PlanSpec, market: &MarketParams, u0: f64, xi: f64, cfg: &SimConfig) -> Result<(usize, f64)> {
    plan.validate()?;
    if cfg.n_paths == 0 || cfg.steps_per_year == 0 {
        return domain("n_paths and steps_per_year must be positive");
    }
    if !(u0 >= 0.0) || !u0.is_finite() || !xi.is_finite() {
        return domain(format!("invalid control (u0 = {u0}, xi = {xi})"));
    }
    if !(market.sigma() >= 0.0) || !market.rbar().is_finite() {
        return domain("market drift and volatility must be finite, volatility >= 0");
    }
    let steps = (plan.horizon_years * cfg.steps_per_year as f64).ceil().max(1.0) as usize;
    Ok((steps, plan.horizon_years / steps as f64))
}

/// Counts paths satisfying the tail event, one ChaCha8 stream per batch.
fn count<F>(n_paths: usize, seed: u64, path: F) -> usize
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let batches = n_paths.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = BATCH.min(n_paths - b * BATCH);
            (0..len).filter(|_| path(&mut rng)).count()
        })
        .sum()
}

/// Estimates P[Π_T < Π̂] with Euler–Maruyama in wealth, with a positivity
/// floor at machine epsilon. `u0 = 0` is allowed.
pub fn simulate_tail(plan: &PlanSpec, market: &MarketParams, u0: f64, xi: f64, cfg: &SimConfig) -> Result<TailEstimate> {
    let (steps, dt) = check(plan, market, u0, xi, cfg)?;
    let (rbar, sigma) = (market.rbar(), market.sigma());
    let sq = dt.sqrt();
    let growth = (xi * dt).exp();
    let hits = count(cfg.n_paths, cfg.seed, |rng| {
        let mut p = plan.initial_wealth;
        let mut u = u0;
        for _ in 0..steps {
            let z: f64 = StandardNormal.sample(rng);
            p += (rbar * p + u) * dt + sigma * p * sq * z;
            p = p.max(f64::EPSILON);
            u *= growth;
        }
        p < plan.target_wealth
    });
    Ok(TailEstimate::from_count(hits, cfg.n_paths))
}

/// Same tail event as `simulate_tail` written as v_T > v̂ for the Verhulst
/// process dv = v[(ξ − r̄ + σ²)dt − σdW] − (σ²/2)v²dt.
pub fn simulate_tail_verhulst(
    plan: &PlanSpec,
    market: &MarketParams,
    u0: f64,
    xi: f64,
    cfg: &SimConfig,
) -> Result<TailEstimate> {
    let (steps, dt) = check(plan, market, u0, xi, cfg)?;
    if !(u0 > 0.0) {
        return domain("the Verhulst coordinate needs u0 > 0");
    }
    let (rbar, sigma) = (market.rbar(), market.sigma());
    if !(sigma > 0.0) {
        return domain("the Verhulst coordinate needs sigma > 0");
    }
    let h = sigma * sigma;
    let v0 = 2.0 * u0 / (h * plan.initial_wealth);
    let v_hat = 2.0 * u0 * (xi * plan.horizon_years).exp() / (h * plan.target_wealth);
    let drift = xi - rbar + h;
    let sq = dt.sqrt();
    let hits = count(cfg.n_paths, cfg.seed, |rng| {
        let mut v = v0;
        for _ in 0..steps {
            let z: f64 = StandardNormal.sample(rng);
            v += v * (drift * dt - sigma * sq * z) - 0.5 * h * v * v * dt;
            v = v.max(f64::EPSILON);
        }
        v > v_hat
    });
    Ok(TailEstimate::from_count(hits, cfg.n_paths))
}

/// Dispatches on `cfg.coordinate`.
pub fn simulate(plan: &PlanSpec, market: &MarketParams, u0: f64, xi: f64, cfg: &SimConfig) -> Result<TailEstimate> {
    match cfg.coordinate {
        Coordinate::Wealth => simulate_tail(plan, market, u0, xi, cfg),
        Coordinate::Verhulst => simulate_tail_verhulst(plan, market, u0, xi, cfg),
    }
}

/// Noise-free terminal wealth Π₀e^{r̄T} + u₀(e^{r̄T} − e^{ξT})/(r̄ − ξ).
pub fn deterministic_terminal_wealth(plan: &PlanSpec, rbar: f64, u0: f64, xi: f64) -> f64 {
    let t = plan.horizon_years;
    let d = rbar - xi;
    let annuity = if d.abs() < 1e-12 {
        t * (rbar * t).exp()
    } else {
        ((rbar * t).exp() - (xi * t).exp()) / d
    };
    plan.initial_wealth * (rbar * t).exp() + u0 * annuity
}

/// Lognormal tail of the uncontrolled portfolio (u₀ = 0).
pub fn gbm_tail(plan: &PlanSpec, market: &MarketParams) -> f64 {
    let (r, s, t) = (market.rbar(), market.sigma(), plan.horizon_years);
    let z = ((plan.target_wealth / plan.initial_wealth).ln() - (r - 0.5 * s * s) * t) / (s * t.sqrt());
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{market, plan};

    fn cfg(n: usize, seed: u64) -> SimConfig {
        SimConfig {
            n_paths: n,
            steps_per_year: 52,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_is_deterministic() {
        let mut m = market(0.05, 0.3);
        m.equity_vol = 0.0;
        let pl = plan();
        let c = SimConfig {
            steps_per_year: 2000,
            ..cfg(64, 1)
        };
        for (u0, expect) in [(45_000.0, 0.0), (10_000.0, 1.0)] {
            let terminal = deterministic_terminal_wealth(&pl, 0.05, u0, 0.03);
            assert_eq!(terminal < pl.target_wealth, expect == 1.0);
            let e = simulate_tail(&pl, &m, u0, 0.03, &c).unwrap();
            assert_eq!(e.p_hat, expect);
            assert_eq!(e.std_error, 0.0);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let (pl, m) = (plan(), market(0.05, 0.3));
        let a = simulate_tail(&pl, &m, 20_000.0, 0.03, &cfg(10_000, 7)).unwrap();
        let b = simulate_tail(&pl, &m, 20_000.0, 0.03, &cfg(10_000, 7)).unwrap();
        let c = simulate_tail(&pl, &m, 20_000.0, 0.03, &cfg(10_000, 8)).unwrap();
        assert_eq!(a.p_hat.to_bits(), b.p_hat.to_bits());
        assert_ne!(a.p_hat, c.p_hat);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let d = pool.install(|| simulate_tail(&pl, &m, 20_000.0, 0.03, &cfg(10_000, 7)).unwrap());
        assert_eq!(a, d);
    }

    #[test]
    fn gbm_limit() {
        let (pl, m) = (plan(), market(0.05, 0.3));
        let e = simulate_tail(&pl, &m, 0.0, 0.03, &cfg(20_000, 3)).unwrap();
        let exact = gbm_tail(&pl, &m);
        assert!((e.p_hat - exact).abs() <= 3.0 * e.std_error + 2e-3, "{} {exact}", e.p_hat);
    }

    #[test]
    fn verhulst_boundary_is_stable() {
        let m = market(0.05, 0.3);
        let e = simulate_tail_verhulst(&plan(), &m, 20_000.0, 0.05 - 0.09, &cfg(4_000, 5)).unwrap();
        assert!(e.p_hat.is_finite() && (0.0..=1.0).contains(&e.p_hat));
        assert!(simulate_tail_verhulst(&plan(), &m, 0.0, 0.03, &cfg(10, 5)).is_err());
    }

    #[test]
    fn small_noise_concentrates() {
        let m = market(0.05, 0.002);
        let pl = plan();
        let terminal = deterministic_terminal_wealth(&pl, 0.05, 30_000.0, 0.03);
        // choose the target a few noise widths above the ODE value
        let mut pl2 = pl.clone();
        pl2.target_wealth = terminal * 1.05;
        let e = simulate_tail_verhulst(&pl2, &m, 30_000.0, 0.03, &cfg(2_000, 9)).unwrap();
        assert_eq!(e.p_hat, 1.0);
        pl2.target_wealth = terminal * 0.95;
        let e = simulate_tail_verhulst(&pl2, &m, 30_000.0, 0.03, &cfg(2_000, 9)).unwrap();
        assert_eq!(e.p_hat, 0.0);
    }

    #[test]
    fn config_defaults() {
        let c: SimConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, SimConfig::default());
        assert_eq!(c.steps_per_year, 252);
        assert!(serde_json::from_str::<SimConfig>(r#"{"paths": 3}"#).is_err());
        assert!(simulate_tail(&plan(), &market(0.05, 0.3), 1.0, 0.0, &cfg(0, 0)).is_err());
    }
}
