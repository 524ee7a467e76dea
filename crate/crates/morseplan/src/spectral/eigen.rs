use super::hamiltonian::HamiltonianMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// A = U·diag(λ)·Uᵀ with ascending λ and orthonormal columns of U.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column-major: column k occupies `vectors[k*n..(k+1)*n]`.
    pub vectors: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        let n = self.len();
        &self.vectors[k * n..(k + 1) * n]
    }

    /// Uᵀ·w.
    pub fn project(&self, w: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if w.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: w.len(),
            });
        }
        Ok((0..n)
            .map(|k| self.eigenvector(k).iter().zip(w).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// U·c.
    pub fn combine(&self, c: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if c.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: c.len(),
            });
        }
        let mut out = vec![0.0; n];
        for (k, &ck) in c.iter().enumerate() {
            for (o, u) in out.iter_mut().zip(self.eigenvector(k)) {
                *o += ck * u;
            }
        }
        Ok(out)
    }
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix.
pub fn eigendecompose(matrix: &HamiltonianMatrix) -> Result<SpectralDecomposition> {
    let n = matrix.len();
    let mut d = matrix.diag.clone();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&matrix.offdiag[..n.saturating_sub(1)]);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_SWEEPS {
                    return Err(Error::Eigen { index: l });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (left, right) = z.split_at_mut((i + 1) * n);
                    let zi = &mut left[i * n..];
                    let zi1 = &mut right[..n];
                    for k in 0..n {
                        let h = zi1[k];
                        zi1[k] = s * zi[k] + c * h;
                        zi[k] = c * zi[k] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let eigenvalues = order.iter().map(|&k| d[k]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &k in &order {
        vectors.extend_from_slice(&z[k * n..(k + 1) * n]);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        vectors,
    })
}
