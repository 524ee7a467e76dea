use super::dd::DoubleDouble as DD;
use crate::error::{domain, Error, Result};

/// Stopping rule for the ₂F₂ series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2f2Options {
    pub rel_tol: f64,
    pub consecutive: usize,
    pub max_terms: usize,
}

impl Default for Hyp2f2Options {
    fn default() -> Self {
        Self {
            rel_tol: 1e-16,
            consecutive: 50,
            max_terms: 100_000,
        }
    }
}

fn nonpositive_integer(b: DD) -> bool {
    let x = b.to_f64();
    x <= 0.0 && x == x.round() && b.lo == 0.0
}

/// ₂F₂(a₁, a₂; b₁, b₂; z) by direct summation with double-double
/// parameters, so callers can pass shifted parameters such as `b + n`
/// without rounding them.
pub fn hyp2f2_dd(a1: DD, a2: DD, b1: DD, b2: DD, z: f64, opts: Hyp2f2Options) -> Result<DD> {
    if nonpositive_integer(b1) || nonpositive_integer(b2) {
        return domain("hyp2f2 lower parameters must not be nonpositive integers");
    }
    if !z.is_finite() {
        return domain(format!("hyp2f2 argument must be finite, got {z}"));
    }
    let z = DD::new(z);
    let mut term = DD::ONE;
    let mut sum = DD::ONE;
    let mut small = 0usize;
    for k in 0..opts.max_terms {
        let kd = DD::new(k as f64);
        let num = (a1 + kd) * (a2 + kd) * z;
        let den = (b1 + kd) * (b2 + kd) * DD::new(k as f64 + 1.0);
        term = term * num / den;
        sum = sum + term;
        if !sum.is_finite() {
            return Err(Error::NonConvergence {
                what: "hyp2f2 overflow".into(),
                terms: k + 1,
            });
        }
        if term.hi.abs() <= opts.rel_tol * sum.hi.abs() {
            small += 1;
            if small >= opts.consecutive {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence {
        what: "hyp2f2 series".into(),
        terms: opts.max_terms,
    })
}

/// ₂F₂(a₁, a₂; b₁, b₂; z) for real z.
pub fn hyp2f2(a1: f64, a2: f64, b1: f64, b2: f64, z: f64) -> Result<f64> {
    hyp2f2_dd(
        DD::new(a1),
        DD::new(a2),
        DD::new(b1),
        DD::new(b2),
        z,
        Hyp2f2Options::default(),
    )
    .map(DD::to_f64)
}
