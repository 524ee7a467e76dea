//! Plan and market inputs, derived Morse constants and coordinate maps.
//!
//! Wealth Π, the Verhulst variable v = 2u₀e^{ξt}/(ħΠ), the Langevin
//! coordinate x = −ln v and the Morse variable y = e^{−x} = v are tied
//! together here. Larger wealth means smaller y.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Default quasi-number hyperparameter.
pub const DEFAULT_Q: f64 = 1.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    pub horizon_years: f64,
    pub initial_wealth: f64,
    pub target_wealth: f64,
    pub u0_bounds: [f64; 2],
    pub xi_bounds: [f64; 2],
    #[serde(default)]
    pub confidence_levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams {
    pub risk_free: f64,
    pub equity_mean: f64,
    pub equity_vol: f64,
    pub equity_fraction: f64,
    #[serde(default)]
    pub txn_cost: f64,
}

impl PlanSpec {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let finite = |x: f64| x.is_finite();
        if !(self.horizon_years > 0.0) || !finite(self.horizon_years) {
            errs.push(format!("horizon_years must be > 0, got {}", self.horizon_years));
        }
        if !(self.initial_wealth > 0.0) || !finite(self.initial_wealth) {
            errs.push(format!("initial_wealth must be > 0, got {}", self.initial_wealth));
        }
        if !(self.target_wealth > 0.0) || !finite(self.target_wealth) {
            errs.push(format!("target_wealth must be > 0, got {}", self.target_wealth));
        }
        let [ulo, uhi] = self.u0_bounds;
        if !(ulo > 0.0 && ulo <= uhi && finite(uhi)) {
            errs.push(format!("u0_bounds must satisfy 0 < min <= max, got [{ulo}, {uhi}]"));
        }
        let [xlo, xhi] = self.xi_bounds;
        if !(xlo <= xhi && xlo.abs() < 1.0 && xhi.abs() < 1.0) {
            errs.push(format!("xi_bounds must be ordered inside (-1, 1), got [{xlo}, {xhi}]"));
        }
        for &a in &self.confidence_levels {
            if !(a > 0.0 && a < 1.0) {
                errs.push(format!("confidence level {a} is outside (0, 1)"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}

impl MarketParams {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.equity_vol > 0.0) || !self.equity_vol.is_finite() {
            errs.push(format!("equity_vol must be > 0, got {}", self.equity_vol));
        }
        if !(0.0..=1.0).contains(&self.equity_fraction) {
            errs.push(format!(
                "equity_fraction must lie in [0, 1], got {}",
                self.equity_fraction
            ));
        }
        if !(self.txn_cost >= 0.0) {
            errs.push(format!("txn_cost must be >= 0, got {}", self.txn_cost));
        }
        if !self.risk_free.is_finite() || !self.equity_mean.is_finite() {
            errs.push("rates must be finite".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    /// Portfolio drift r̄ = r_f + ω(r̂_e − r_f).
    pub fn rbar(&self) -> f64 {
        self.risk_free + self.equity_fraction * (self.equity_mean - self.risk_free)
    }

    /// Portfolio volatility σ = ωσ̂_e.
    pub fn sigma(&self) -> f64 {
        self.equity_fraction * self.equity_vol
    }

    /// Planner cash flow c needed for a net contribution u after costs.
    pub fn gross_contribution(&self, u: f64) -> f64 {
        u / (1.0 - self.txn_cost * self.equity_fraction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCheck {
    pub name: String,
    pub passed: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub xi: f64,
    pub rbar: f64,
    pub sigma: f64,
    pub hbar: f64,
    pub eta: f64,
    pub s: f64,
    pub g: f64,
    pub q: f64,
    /// Exponent q + s of the backward initial integrand.
    pub kappa: f64,
    pub d0: f64,
    pub u0_morse: f64,
    pub eps0: f64,
    pub gates: Vec<GateCheck>,
}

impl DerivedParams {
    pub fn gates_passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    /// Turns failed gates into a validation error.
    pub fn ensure_valid(&self) -> Result<()> {
        let failed: Vec<String> = self
            .gates
            .iter()
            .filter(|g| !g.passed)
            .map(|g| g.message.clone())
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(failed))
        }
    }
}

fn gate(name: &str, passed: bool, message: String) -> GateCheck {
    GateCheck {
        name: name.to_string(),
        passed,
        message,
    }
}

pub fn derive_params(market: &MarketParams, xi: f64, q: f64) -> Result<DerivedParams> {
    market.validate()?;
    if !(xi.abs() < 1.0) {
        return domain(format!("growth rate xi must satisfy |xi| < 1, got {xi}"));
    }
    if !(q > 0.0) || !q.is_finite() {
        return domain(format!("q must be positive, got {q}"));
    }
    let rbar = market.rbar();
    let sigma = market.sigma();
    let hbar = sigma * sigma;
    let eta = xi - rbar + hbar / 2.0;
    let s = eta / hbar;
    let g = 2.0 * s + 1.0;
    let d0 = hbar * hbar * g * g / 8.0;
    let u0_morse = -hbar * hbar * (2.0 * g - 1.0) / 8.0;
    let eps0 = 2.0 * u0_morse / (hbar * hbar) + s + 0.25;
    let gates = vec![
        gate(
            "s_above_minus_quarter",
            s > -0.25,
            format!("s = {s:.6} must exceed -1/4 for the normalization series to converge"),
        ),
        gate(
            "q_above_s",
            q > s,
            format!("q = {q} must exceed s = {s:.6}"),
        ),
        gate(
            "q_above_minus_s",
            q > -s,
            format!("q = {q} must exceed -s = {:.6} for the current to vanish at y = 0", -s),
        ),
    ];
    Ok(DerivedParams {
        xi,
        rbar,
        sigma,
        hbar,
        eta,
        s,
        g,
        q,
        kappa: q + s,
        d0,
        u0_morse,
        eps0,
        gates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    pub u0: f64,
    pub xi: f64,
    pub y0: f64,
    pub y_hat: f64,
}

pub fn control_point(plan: &PlanSpec, params: &DerivedParams, u0: f64) -> Result<ControlPoint> {
    if !(u0 > 0.0) || !u0.is_finite() {
        return domain(format!("u0 must be > 0 on the spectral path, got {u0}"));
    }
    let y0 = 2.0 * u0 / (params.hbar * plan.initial_wealth);
    Ok(ControlPoint {
        u0,
        xi: params.xi,
        y0,
        y_hat: y_hat_from_y0(plan, params, y0),
    })
}

/// Control point addressed by its initial Morse coordinate.
pub fn control_point_from_y0(plan: &PlanSpec, params: &DerivedParams, y0: f64) -> Result<ControlPoint> {
    if !(y0 > 0.0) || !y0.is_finite() {
        return domain(format!("y0 must be > 0, got {y0}"));
    }
    Ok(ControlPoint {
        u0: y0_to_u0(plan, params, y0),
        xi: params.xi,
        y0,
        y_hat: y_hat_from_y0(plan, params, y0),
    })
}

fn y_hat_from_y0(plan: &PlanSpec, params: &DerivedParams, y0: f64) -> f64 {
    y0 * plan.initial_wealth / plan.target_wealth * (params.xi * plan.horizon_years).exp()
}

/// u₀ = (ħ/2)·y₀·Π₀.
pub fn y0_to_u0(plan: &PlanSpec, params: &DerivedParams, y0: f64) -> f64 {
    0.5 * params.hbar * y0 * plan.initial_wealth
}

pub fn u0_to_y0(plan: &PlanSpec, hbar: f64, u0: f64) -> f64 {
    2.0 * u0 / (hbar * plan.initial_wealth)
}

/// V(x) = ηx + (ħ/2)e^{−x}.
pub fn langevin_potential(params: &DerivedParams, x: f64) -> f64 {
    params.eta * x + 0.5 * params.hbar * (-x).exp()
}

/// exp(−V/ħ) written in the Morse variable: y^s e^{−y/2}.
pub fn gauge_minus(params: &DerivedParams, y: f64) -> f64 {
    (params.s * y.ln() - 0.5 * y).exp()
}

/// exp(+V/ħ) written in the Morse variable: y^{−s} e^{y/2}.
pub fn gauge_plus(params: &DerivedParams, y: f64) -> f64 {
    (0.5 * y - params.s * y.ln()).exp()
}

/// U(x) = ½V′² − (ħ/2)V″ evaluated from derivatives of V.
pub fn schrodinger_potential_direct(params: &DerivedParams, x: f64) -> f64 {
    let e = (-x).exp();
    let v1 = params.eta - 0.5 * params.hbar * e;
    let v2 = 0.5 * params.hbar * e;
    0.5 * v1 * v1 - 0.5 * params.hbar * v2
}

/// Position of the well, x⋆ = −ln|g|.
pub fn morse_center(params: &DerivedParams) -> f64 {
    -params.g.abs().ln()
}

/// U(x) in Morse form D₀(1 ∓ e^{−(x−x⋆)})² + U₀ with the sign chosen by g.
pub fn schrodinger_potential(params: &DerivedParams, x: f64) -> f64 {
    if params.g == 0.0 {
        return schrodinger_potential_direct(params, x);
    }
    let e = (-(x - morse_center(params))).exp();
    let bracket = if params.g > 0.0 { 1.0 - e } else { 1.0 + e };
    params.d0 * bracket * bracket + params.u0_morse
}
