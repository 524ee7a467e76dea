use crate::error::{domain, Error, Result};

const RESCALE_BITS: i32 = 600;
const HI: f64 = 4.149515568880993e180; // 2^600
const LO: f64 = 2.409919865102884e-181; // 2^-600

/// Generalized Laguerre values L₀^(α)(x) … L_{N−1}^(α)(x).
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreSequence {
    pub alpha: f64,
    pub argument: f64,
    pub values: Vec<f64>,
}

impl LaguerreSequence {
    pub fn count(&self) -> usize {
        self.values.len()
    }
}

/// Laguerre values as `mantissa[n] * 2^exponent[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledLaguerre {
    pub alpha: f64,
    pub argument: f64,
    pub mantissa: Vec<f64>,
    pub exponent: Vec<i32>,
}

impl ScaledLaguerre {
    pub fn len(&self) -> usize {
        self.mantissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissa.is_empty()
    }

    /// ln|L_n| (−∞ at an exact zero) and the sign.
    pub fn log_abs(&self, n: usize) -> (f64, f64) {
        let m = self.mantissa[n];
        (
            m.abs().ln() + self.exponent[n] as f64 * std::f64::consts::LN_2,
            m.signum(),
        )
    }

    pub fn materialize(&self) -> Result<Vec<f64>> {
        self.mantissa
            .iter()
            .zip(&self.exponent)
            .enumerate()
            .map(|(n, (&m, &e))| {
                let v = libm::ldexp(m, e);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Saturation { index: n })
                }
            })
            .collect()
    }
}

fn check(alpha: f64, count: usize, x: f64) -> Result<()> {
    if !(alpha > -1.0) {
        return domain(format!("Laguerre alpha must exceed -1, got {alpha}"));
    }
    if count == 0 {
        return domain("Laguerre count must be at least 1");
    }
    if !(x >= 0.0) || !x.is_finite() {
        return domain(format!("Laguerre argument must be finite and >= 0, got {x}"));
    }
    Ok(())
}

/// Upward three-term recurrence with a carried power-of-two exponent.
pub fn laguerre_scaled(alpha: f64, count: usize, x: f64) -> Result<ScaledLaguerre> {
    check(alpha, count, x)?;
    let mut mantissa = Vec::with_capacity(count);
    let mut exponent = Vec::with_capacity(count);
    mantissa.push(1.0);
    exponent.push(0);
    if count > 1 {
        let mut prev = 1.0;
        let mut cur = alpha + 1.0 - x;
        let mut e = 0i32;
        mantissa.push(cur);
        exponent.push(0);
        for n in 1..count - 1 {
            let nf = n as f64;
            let next = ((2.0 * nf + alpha + 1.0 - x) * cur - (nf + alpha) * prev) / (nf + 1.0);
            prev = cur;
            cur = next;
            let big = prev.abs().max(cur.abs());
            if big > HI {
                prev *= LO;
                cur *= LO;
                e += RESCALE_BITS;
            } else if big < LO && big > 0.0 {
                prev *= HI;
                cur *= HI;
                e -= RESCALE_BITS;
            }
            mantissa.push(cur);
            exponent.push(e);
        }
    }
    Ok(ScaledLaguerre {
        alpha,
        argument: x,
        mantissa,
        exponent,
    })
}

/// L_n^(α)(x) for n < count as plain doubles; fails if any value leaves
/// double range.
pub fn laguerre_sequence(alpha: f64, count: usize, x: f64) -> Result<LaguerreSequence> {
    let scaled = laguerre_scaled(alpha, count, x)?;
    Ok(LaguerreSequence {
        alpha,
        argument: x,
        values: scaled.materialize()?,
    })
}
