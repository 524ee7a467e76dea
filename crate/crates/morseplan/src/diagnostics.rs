//! Validators for the truncated expansion: probability current, the linear
//! norm series and its large-N residual, the finite-N start density and the
//! pre-asymptotic form of the backward start state.
//!
//! Nothing here gates production queries; results carry flags instead.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{control_point, DerivedParams, GateCheck};
use crate::specfun::{laguerre_sequence, log_gamma};
use crate::spectral::{
    backward_initial_weights, evolve, forward_initial_weights, QuasiNumberBasis, SpectralSolver,
    WeightKind, WeightVector,
};

fn forward_only(w: &WeightVector, basis: &QuasiNumberBasis) -> Result<()> {
    if w.kind != WeightKind::Forward {
        return domain("diagnostics expect forward weights");
    }
    if w.values.len() != basis.n {
        return Err(Error::Dimension {
            expected: basis.n,
            got: w.values.len(),
        });
    }
    Ok(())
}

/// J(y,t) = (ħ/2)·y^s e^{−y/2}·Σₙ wₙ [Cₙ φₙ₋₁(y) + (s − q − n) φₙ(y)].
///
/// Positive J is probability flowing towards larger y.
pub fn probability_current(
    basis: &QuasiNumberBasis,
    weights: &WeightVector,
    params: &DerivedParams,
    y: f64,
) -> Result<f64> {
    forward_only(weights, basis)?;
    if !(y > 0.0) {
        return domain(format!("current argument must be positive, got {y}"));
    }
    let s = params.s;
    let phi = basis.values_with_log_factor(y, s * y.ln() - 0.5 * y)?;
    let mut acc = 0.0;
    for (n, &w) in weights.values.iter().enumerate() {
        let lower = if n > 0 { basis.ladder(n) * phi[n - 1] } else { 0.0 };
        acc += w * (lower + (s - basis.q - n as f64) * phi[n]);
    }
    Ok(0.5 * params.hbar * acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub total_norm: f64,
    pub residual_estimate: f64,
    pub gate_flags: Vec<GateCheck>,
}

fn signed_lgamma(x: f64) -> (f64, f64) {
    let (v, sign) = libm::lgamma_r(x);
    (v, sign as f64)
}

/// ∫f dy = Γ(q+s)/Γ(q−s)·Σₙ Γ(n+q−s)/√(n!Γ(n+2q))·wₙ, plus the large-N
/// residual estimate at the start point `y0`.
pub fn total_norm(
    basis: &QuasiNumberBasis,
    weights: &WeightVector,
    params: &DerivedParams,
    y0: f64,
) -> Result<NormReport> {
    forward_only(weights, basis)?;
    let (q, s) = (basis.q, params.s);
    let (lp, sp) = signed_lgamma(q + s);
    let (lm, sm) = signed_lgamma(q - s);
    let mut sum = 0.0;
    for (n, &w) in weights.values.iter().enumerate() {
        let nf = n as f64;
        let (lg, sg) = signed_lgamma(nf + q - s);
        let ln = lg - 0.5 * (log_gamma(nf + 1.0)? + log_gamma(nf + 2.0 * q)?);
        sum += sg * (ln + lp - lm).exp() * w;
    }
    let residual_estimate = if params.s > -0.25 {
        norm_residual_estimate(y0, basis.n, params)?
    } else {
        f64::NAN
    };
    Ok(NormReport {
        total_norm: sp * sm * sum,
        residual_estimate,
        gate_flags: params.gates.clone(),
    })
}

fn residual_envelope_checked(y0: f64, n: usize, params: &DerivedParams) -> Result<f64> {
    let s = params.s;
    if !(s > -0.25) {
        return Err(Error::Validation(vec![format!(
            "residual estimate needs s > -1/4, got {s}"
        )]));
    }
    if !(y0 > 0.0) || n == 0 {
        return domain("residual estimate needs y0 > 0 and N >= 1");
    }
    let q = params.q;
    let ratio = (libm::lgamma_r(q + s).0 - libm::lgamma_r(q - s).0).exp();
    Ok(ratio * (0.5 * y0).exp() / PI.sqrt() * (y0 * n as f64).powf(-s - 0.25))
}

/// Envelope of [`norm_residual_estimate`] (the cosine factor dropped).
pub fn norm_residual_envelope(y0: f64, n: usize, params: &DerivedParams) -> Result<f64> {
    residual_envelope_checked(y0, n, params)
}

/// Leading large-N value of 1 − Σ_{n<N} (norm series terms at t = 0):
/// Γ(q+s)/Γ(q−s)·e^{y₀/2}/√π·(y₀N)^{−s−1/4}·cos(2√(y₀N) − π(q − 3/4)).
pub fn norm_residual_estimate(y0: f64, n: usize, params: &DerivedParams) -> Result<f64> {
    let env = residual_envelope_checked(y0, n, params)?;
    let phase = 2.0 * (y0 * n as f64).sqrt() - PI * (params.q - 0.75);
    Ok(env * phase.cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteNDensity {
    /// Christoffel–Darboux closed form of the N-term start density.
    pub exact: f64,
    /// Three-term large-N form.
    pub asymptotic: f64,
    /// Local amplitude of the oscillating asymptotic form.
    pub envelope: f64,
}

fn cd_kernel(y: f64, y0: f64, n: usize, alpha: f64) -> Result<f64> {
    let lead = (log_gamma(n as f64 + 1.0)? - log_gamma(n as f64 + alpha)?).exp();
    let close = (y - y0).abs() <= 1e-9 * (1.0 + y.max(y0));
    if close {
        let x = 0.5 * (y + y0);
        let l = laguerre_sequence(alpha, n + 1, x)?.values;
        let d = laguerre_sequence(alpha + 1.0, n, x)?.values;
        // d/dx L_k^α = −L_{k−1}^{α+1}
        let dl_nm1 = if n >= 2 { -d[n - 2] } else { 0.0 };
        let dl_n = -d[n - 1];
        return Ok(lead * (dl_nm1 * l[n] - dl_n * l[n - 1]));
    }
    let a = laguerre_sequence(alpha, n + 1, y)?.values;
    let b = laguerre_sequence(alpha, n + 1, y0)?.values;
    Ok(lead * (a[n - 1] * b[n] - a[n] * b[n - 1]) / (y - y0))
}

/// N-term start density f_N(y) for a delta start at y₀.
pub fn finite_n_initial_density(y: f64, y0: f64, n: usize, params: &DerivedParams) -> Result<FiniteNDensity> {
    if !(y > 0.0 && y0 > 0.0) {
        return domain("finite-N density needs y, y0 > 0");
    }
    if n == 0 {
        return domain("finite-N density needs N >= 1");
    }
    let (q, s) = (params.q, params.s);
    let kernel = cd_kernel(y, y0, n, 2.0 * q - 1.0)?;
    let exact = ((s + q - 1.0) * y.ln() - y + (q - s) * y0.ln()).exp() * kernel;

    let omega = 2.0 * (n as f64).sqrt();
    let (a, b) = (y.sqrt(), y0.sqrt());
    let pref = y.powf(-0.5) * (y / y0).powf(s - 0.25) * (-(y - y0) / 2.0).exp() / (2.0 * PI);
    let diff = a - b;
    let near = if diff.abs() < 1e-12 {
        omega
    } else {
        (omega * diff).sin() / diff
    };
    let far = ((2.0 * PI * q).sin() * (omega * (a + b)).sin()
        + (2.0 * PI * q).cos() * (omega * (a + b)).cos())
        / (a + b);
    let env_near = if diff.abs() < 1.0 / omega {
        omega
    } else {
        1.0 / diff.abs()
    };
    Ok(FiniteNDensity {
        exact,
        asymptotic: pref * (near + far),
        envelope: pref * (env_near + 1.0 / (a + b)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackwardAsymptotic {
    pub leading: f64,
    pub correction: f64,
    pub value: f64,
    /// Inside the step's neighbourhood or correction ≥ 50% of the leading scale.
    pub flagged: bool,
}

/// Large-N form of Σ wₙ^B(0) φₙ(y): the step y^{κ−5/4}e^{−y/2}θ(y − ŷ) plus
/// its O(1/ω) endpoint ripple, ω = 2√N. Only defined for q = 5/4.
pub fn backward_initial_asymptotic(y: f64, y_hat: f64, n: usize, params: &DerivedParams) -> Result<BackwardAsymptotic> {
    if !(y > 0.0 && y_hat > 0.0) {
        return domain("backward asymptotic needs y, y_hat > 0");
    }
    if (params.q - 1.25).abs() > 1e-12 {
        return domain(format!("backward asymptotic is derived for q = 5/4, got {}", params.q));
    }
    let kappa = params.q + params.s;
    let scale = ((kappa - 1.25) * y.ln() - 0.5 * y).exp();
    let theta = if y > y_hat {
        1.0
    } else if y == y_hat {
        0.5
    } else {
        0.0
    };
    let leading = scale * theta;
    let omega = 2.0 * (n as f64).sqrt();
    let (a, b) = (y_hat.sqrt(), y.sqrt());
    let amp = y.powf(0.25) * y_hat.powf(kappa - 1.5) * (-0.5 * y_hat).exp() / (PI * omega);
    let far = (omega * (a + b)).cos() / (a + b);
    let near = if a == b { 0.0 } else { (omega * (a - b)).cos() / (a - b) };
    let correction = amp * (near + far);
    let flagged = omega * (a - b).abs() < 1.0 || correction.abs() >= 0.5 * scale;
    Ok(BackwardAsymptotic {
        leading,
        correction,
        value: leading + correction,
        flagged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentSample {
    pub y: f64,
    pub current: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSample {
    pub y: f64,
    pub spectral: f64,
    pub asymptotic: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub u0: f64,
    pub xi: f64,
    pub y0: f64,
    pub y_hat: f64,
    pub n_basis: usize,
    pub norm_start: NormReport,
    pub norm_horizon: NormReport,
    pub residual_envelope: f64,
    pub current_start: Vec<CurrentSample>,
    pub current_horizon: Vec<CurrentSample>,
    pub backward_asymptotic: Vec<AsymptoticSample>,
}

/// Collects the diagnostics for one control point into a report.
pub fn diagnose(solver: &SpectralSolver, u0: f64, xi: f64) -> Result<DiagnosticReport> {
    let col = solver.column(xi)?;
    let point = control_point(&solver.plan, &col.params, u0)?;
    let wf0 = forward_initial_weights(&col.basis, &point, &col.params)?;
    let horizon = solver.plan.horizon_years;
    let wft = evolve(&wf0, &col.decomp, horizon, col.params.hbar)?;
    let n = col.basis.n;
    let window = [1e-3, 1e-2, 0.1, 1.0, 10.0, 40.0];
    let current = |w: &WeightVector| -> Result<Vec<CurrentSample>> {
        window
            .iter()
            .map(|&y| {
                Ok(CurrentSample {
                    y,
                    current: probability_current(&col.basis, w, &col.params, y)?,
                })
            })
            .collect()
    };
    let mut backward = Vec::new();
    if (col.params.q - 1.25).abs() <= 1e-12 {
        let wb0 = backward_initial_weights(&col.basis, &point, &col.params)?;
        for k in 0..9 {
            let y = point.y_hat * (0.5 + 0.3125 * k as f64);
            let phi = col.basis.values(y)?;
            let spectral = phi.iter().zip(&wb0.values).map(|(a, b)| a * b).sum();
            let asy = backward_initial_asymptotic(y, point.y_hat, n, &col.params)?;
            backward.push(AsymptoticSample {
                y,
                spectral,
                asymptotic: asy.value,
                flagged: asy.flagged,
            });
        }
    }
    Ok(DiagnosticReport {
        u0,
        xi,
        y0: point.y0,
        y_hat: point.y_hat,
        n_basis: n,
        norm_start: total_norm(&col.basis, &wf0, &col.params, point.y0)?,
        norm_horizon: total_norm(&col.basis, &wft, &col.params, point.y0)?,
        residual_envelope: norm_residual_envelope(point.y0, n, &col.params).unwrap_or(f64::NAN),
        current_start: current(&wf0)?,
        current_horizon: current(&wft)?,
        backward_asymptotic: backward,
    })
}
