use crate::error::{domain, Result};
use crate::specfun::{laguerre_scaled, log_gamma};

/// Truncated quasi-number basis φₙ(y) = √(n!/Γ(n+2q)) y^q e^{−y/2} L_n^{(2q−1)}(y),
/// orthonormal under dy/y.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiNumberBasis {
    pub n: usize,
    pub q: f64,
    pub s: f64,
    /// ½·ln(n!/Γ(n+2q)).
    pub log_norms: Vec<f64>,
}

impl QuasiNumberBasis {
    pub fn new(n: usize, q: f64, s: f64) -> Result<Self> {
        if n < 2 {
            return domain(format!("basis size must be at least 2, got {n}"));
        }
        if !(q > 0.0) {
            return domain(format!("q must be positive, got {q}"));
        }
        if !(s > -0.5) {
            return domain(format!("s must exceed -1/2 for a normalizable start state, got {s}"));
        }
        let log_norms = (0..n)
            .map(|k| {
                let k = k as f64;
                Ok(0.5 * (log_gamma(k + 1.0)? - log_gamma(k + 2.0 * q)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, q, s, log_norms })
    }

    /// Laguerre parameter 2q − 1.
    pub fn alpha(&self) -> f64 {
        2.0 * self.q - 1.0
    }

    /// Ladder coefficient C_k = √(k(k+2q−1)).
    pub fn ladder(&self, k: usize) -> f64 {
        let k = k as f64;
        (k * (k + 2.0 * self.q - 1.0)).sqrt()
    }

    /// φₙ(y)·exp(extra_log) for n < N, with `extra_log` folded in before any
    /// large exponentials are formed.
    pub fn values_with_log_factor(&self, y: f64, extra_log: f64) -> Result<Vec<f64>> {
        if !(y > 0.0) || !y.is_finite() {
            return domain(format!("basis argument must be positive, got {y}"));
        }
        let lag = laguerre_scaled(self.alpha(), self.n, y)?;
        let common = self.q * y.ln() - 0.5 * y + extra_log;
        Ok(lag
            .mantissa
            .iter()
            .zip(&lag.exponent)
            .zip(&self.log_norms)
            .map(|((&m, &e), &ln)| libm::ldexp(m * (ln + common).exp(), e))
            .collect())
    }

    pub fn values(&self, y: f64) -> Result<Vec<f64>> {
        self.values_with_log_factor(y, 0.0)
    }
}

/// φₙ(y) for n < N.
pub fn basis_values(basis: &QuasiNumberBasis, y: f64) -> Result<Vec<f64>> {
    basis.values(y)
}
