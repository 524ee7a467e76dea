use serde::{Deserialize, Serialize};

use super::basis::QuasiNumberBasis;
use super::eigen::SpectralDecomposition;
use crate::error::{domain, Error, Result};
use crate::model::{ControlPoint, DerivedParams};
use crate::specfun::{hyp2f2_dd, log_gamma, DoubleDouble as DD, Hyp2f2Options};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub kind: WeightKind,
    pub time_years: f64,
    pub values: Vec<f64>,
}

impl WeightVector {
    pub fn dot(&self, other: &WeightVector) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }
}

/// wₙ(0) = y₀^{−s} e^{y₀/2} φₙ(y₀), the start density δ(y − y₀) in the basis.
pub fn forward_initial_weights(
    basis: &QuasiNumberBasis,
    point: &ControlPoint,
    params: &DerivedParams,
) -> Result<WeightVector> {
    let y0 = point.y0;
    if !(y0 > 0.0) {
        return domain(format!("y0 must be positive, got {y0}"));
    }
    let values = basis.values_with_log_factor(y0, 0.5 * y0 - params.s * y0.ln())?;
    Ok(WeightVector {
        kind: WeightKind::Forward,
        time_years: 0.0,
        values,
    })
}

/// wₙ(0) = √(n!/Γ(n+2q)) ∫_ŷ^∞ y^{κ−1} e^{−y} L_n^{(2q−1)}(y) dy with κ = q + s,
/// the terminal indicator θ(y > ŷ) in the basis.
///
/// The integral is Γ(κ)(α+1−κ)ₙ/n! minus the lower piece
/// (α+1)ₙ/n! · ŷ^κ/κ · ₂F₂(α+n+1, κ; α+1, κ+1; −ŷ).
pub fn backward_initial_weights(
    basis: &QuasiNumberBasis,
    point: &ControlPoint,
    params: &DerivedParams,
) -> Result<WeightVector> {
    let y_hat = point.y_hat;
    if !(y_hat > 0.0) {
        return domain(format!("target coordinate must be positive, got {y_hat}"));
    }
    let kappa = basis.q + params.s;
    if !(kappa > 0.0) {
        return Err(Error::Validation(vec![format!(
            "kappa = q + s = {kappa} must be positive"
        )]));
    }
    let alpha = basis.alpha();
    let gamma_kappa = DD::new(log_gamma(kappa)?.exp());
    let lower_scale = (kappa * y_hat.ln()).exp() / kappa;
    let a1_base = DD::sum(alpha, 1.0);
    let k = DD::new(kappa);
    let k1 = DD::sum(kappa, 1.0);
    let full_step = DD::sum(alpha + 1.0, -kappa);
    let opts = Hyp2f2Options::default();

    let mut full_ratio = DD::ONE;
    let mut lower_ratio = DD::ONE;
    let mut values = Vec::with_capacity(basis.n);
    for n in 0..basis.n {
        if n > 0 {
            let nm1 = DD::new((n - 1) as f64);
            let nn = DD::new(n as f64);
            full_ratio = full_ratio * (full_step + nm1) / nn;
            lower_ratio = lower_ratio * (a1_base + nm1) / nn;
        }
        let a1 = a1_base + DD::new(n as f64);
        let f = hyp2f2_dd(a1, k, a1_base, k1, -y_hat, opts)?;
        let upper = gamma_kappa * full_ratio - lower_ratio * DD::new(lower_scale) * f;
        values.push(upper.to_f64() * basis.log_norms[n].exp());
    }
    Ok(WeightVector {
        kind: WeightKind::Backward,
        time_years: 0.0,
        values,
    })
}

/// w(t₀ + t) = U·e^{−(ħt/2)Λ}·Uᵀ·w(t₀).
pub fn evolve(
    weights: &WeightVector,
    decomp: &SpectralDecomposition,
    t_years: f64,
    hbar: f64,
) -> Result<WeightVector> {
    if !(t_years >= 0.0) {
        return domain(format!("evolution time must be >= 0, got {t_years}"));
    }
    let mut c = decomp.project(&weights.values)?;
    let tau = 0.5 * hbar * t_years;
    for (ck, lam) in c.iter_mut().zip(&decomp.eigenvalues) {
        *ck *= (-tau * lam).exp();
    }
    Ok(WeightVector {
        kind: weights.kind,
        time_years: weights.time_years + t_years,
        values: decomp.combine(&c)?,
    })
}

#[cfg(test)]
mod tests {
    use super::super::eigen::eigendecompose;
    use super::super::hamiltonian::{build_hamiltonian, Branch};
    use super::*;
    use crate::model::tests::{market, plan};
    use crate::model::{control_point, control_point_from_y0, derive_params};
    use crate::specfun::upper_incomplete_gamma;
    use approx::assert_relative_eq;

    #[test]
    fn forward_ground_weight() {
        let p = derive_params(&market(0.05, 0.3), 0.05 - 0.045, 1.25).unwrap();
        assert!(p.s.abs() < 1e-12);
        let b = QuasiNumberBasis::new(20, 1.25, p.s).unwrap();
        let cp = control_point_from_y0(&plan(), &p, 1.0).unwrap();
        let w = forward_initial_weights(&b, &cp, &p).unwrap();
        assert_relative_eq!(w.values[0], 1.0 / 1.329_340_388_179_137f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(w.values[0], 0.867_325, max_relative = 1e-6);
        let cp = control_point_from_y0(&plan(), &p, 2.3).unwrap();
        let w = forward_initial_weights(&b, &cp, &p).unwrap();
        assert_relative_eq!(
            w.values[0],
            2.3f64.powf(1.25 - p.s) / 1.329_340_388_179_137f64.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn backward_ground_weight_is_incomplete_gamma() {
        let p = derive_params(&market(0.05, 0.3), 0.03, 1.25).unwrap();
        let b = QuasiNumberBasis::new(10, 1.25, p.s).unwrap();
        let cp = control_point(&plan(), &p, 22_500.0).unwrap();
        let w = backward_initial_weights(&b, &cp, &p).unwrap();
        let expect = upper_incomplete_gamma(p.kappa, cp.y_hat).unwrap() * b.log_norms[0].exp();
        assert_relative_eq!(w.values[0], expect, max_relative = 1e-12);
    }

    #[test]
    fn small_target_keeps_full_line_term() {
        let p = derive_params(&market(0.05, 0.3), 0.03, 1.25).unwrap();
        let b = QuasiNumberBasis::new(30, 1.25, p.s).unwrap();
        let mut cp = control_point(&plan(), &p, 22_500.0).unwrap();
        cp.y_hat = 1e-14;
        let w = backward_initial_weights(&b, &cp, &p).unwrap();
        let alpha = 1.5;
        let mut ratio = 1.0;
        for n in 0..30 {
            if n > 0 {
                ratio *= (alpha + 1.0 - p.kappa + (n - 1) as f64) / n as f64;
            }
            let full = log_gamma(p.kappa).unwrap().exp() * ratio * b.log_norms[n].exp();
            assert_relative_eq!(w.values[n], full, max_relative = 1e-10);
        }
    }

    #[test]
    fn evolve_identity_and_eigen_action() {
        let b = QuasiNumberBasis::new(12, 1.25, 0.1).unwrap();
        let dec = eigendecompose(&build_hamiltonian(&b, Branch::Plus)).unwrap();
        let w = WeightVector {
            kind: WeightKind::Forward,
            time_years: 0.0,
            values: (0..12).map(|i| (i as f64).sin()).collect(),
        };
        let same = evolve(&w, &dec, 0.0, 0.09).unwrap();
        for (a, b) in same.values.iter().zip(&w.values) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
        let k = 3;
        let wk = WeightVector {
            kind: WeightKind::Backward,
            time_years: 0.0,
            values: dec.eigenvector(k).to_vec(),
        };
        let out = evolve(&wk, &dec, 7.0, 0.09).unwrap();
        let f = (-0.045 * 7.0 * dec.eigenvalues[k]).exp();
        for (a, b) in out.values.iter().zip(dec.eigenvector(k)) {
            assert_relative_eq!(*a, f * b, epsilon = 1e-13);
        }
        assert_eq!(out.time_years, 7.0);
        assert!(evolve(&w, &dec, -1.0, 0.09).is_err());
    }
}
