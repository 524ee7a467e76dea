use crate::error::{domain, Error, Result};

const MAX_TERMS: usize = 10_000;

/// Natural log of Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma requires x > 0, got {x}"));
    }
    Ok(libm::lgamma(x))
}

/// Upper incomplete gamma Γ(s, x) = ∫ₓ^∞ t^{s−1} e^{−t} dt.
///
/// Power series for the lower part when x < s + 1, Lentz continued
/// fraction otherwise.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return domain(format!("upper_incomplete_gamma requires s > 0, got {s}"));
    }
    if !(x >= 0.0) {
        return domain(format!("upper_incomplete_gamma requires x >= 0, got {x}"));
    }
    let gamma_s = log_gamma(s)?.exp();
    if x == 0.0 {
        return Ok(gamma_s);
    }
    let prefactor = (s * x.ln() - x).exp();
    if x < s + 1.0 {
        let mut ap = s;
        let mut term = 1.0 / s;
        let mut sum = term;
        for _ in 0..MAX_TERMS {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                return Ok(gamma_s - prefactor * sum);
            }
        }
        return Err(Error::NonConvergence {
            what: "incomplete gamma series".into(),
            terms: MAX_TERMS,
        });
    }
    let tiny = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(prefactor * h);
        }
    }
    Err(Error::NonConvergence {
        what: "incomplete gamma continued fraction".into(),
        terms: MAX_TERMS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn known_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        assert_relative_eq!(
            log_gamma(0.5).unwrap(),
            std::f64::consts::PI.sqrt().ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn half_integer_by_recursion() {
        // Γ(10.5) = Γ(1/2) ∏_{k=0}^{9} (k + 1/2)
        let mut g = std::f64::consts::PI.sqrt();
        for k in 0..10 {
            g *= k as f64 + 0.5;
        }
        assert_relative_eq!(log_gamma(10.5).unwrap(), g.ln(), max_relative = 1e-14);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(upper_incomplete_gamma(0.0, 1.0).is_err());
        assert!(upper_incomplete_gamma(1.0, -1.0).is_err());
    }

    #[test]
    fn exponential_case() {
        assert_relative_eq!(upper_incomplete_gamma(1.0, 0.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            upper_incomplete_gamma(1.0, 2.0).unwrap(),
            (-2.0f64).exp(),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            upper_incomplete_gamma(1.0, 30.0).unwrap(),
            (-30.0f64).exp(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn half_order_is_erfc() {
        // Γ(1/2, x) = √π erfc(√x)
        for &x in &[0.1, 0.9, 1.7, 4.0, 12.0] {
            let expect = std::f64::consts::PI.sqrt() * libm::erfc(f64::sqrt(x));
            assert_relative_eq!(
                upper_incomplete_gamma(0.5, x).unwrap(),
                expect,
                max_relative = 1e-12
            );
        }
    }
}
