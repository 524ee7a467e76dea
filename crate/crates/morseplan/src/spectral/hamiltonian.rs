use serde::{Deserialize, Serialize};

use super::basis::QuasiNumberBasis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

/// Symmetric tridiagonal Galerkin matrix of the ladder-factorized Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub branch: Branch,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl HamiltonianMatrix {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.offdiag)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// y = A·x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.offdiag[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.offdiag[i] * x[i + 1];
                }
                v
            })
            .collect()
    }
}

pub fn build_hamiltonian(basis: &QuasiNumberBasis, branch: Branch) -> HamiltonianMatrix {
    let (q, s) = (basis.q, basis.s);
    let g = 2.0 * s + 1.0;
    let eps0 = -(2.0 * g - 1.0) / 4.0 + s + 0.25;
    let n = basis.n;
    let mut diag = Vec::with_capacity(n);
    let mut offdiag = Vec::with_capacity(n - 1);
    for k in 0..n {
        let kf = k as f64;
        let c = basis.ladder(k);
        let shift = s - q - kf;
        let mut d = c * c + shift * shift + eps0;
        if branch == Branch::Minus {
            d += 2.0 * (kf + q) * g;
        }
        diag.push(d);
        if k + 1 < n {
            let c1 = basis.ladder(k + 1);
            offdiag.push(match branch {
                Branch::Plus => shift * c1,
                Branch::Minus => -(s + q + kf + 1.0) * c1,
            });
        }
    }
    HamiltonianMatrix {
        branch,
        diag,
        offdiag,
    }
}
