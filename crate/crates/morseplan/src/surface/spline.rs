use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SplineBoundary {
    /// Zero second derivative at both ends.
    #[default]
    Natural,
    /// Continuous third derivative across the second and penultimate knots.
    NotAKnot,
}

/// Dense map from node values to node second derivatives for a 1D cubic
/// spline on fixed knots.
#[derive(Debug, Clone, PartialEq)]
struct SecondDerivativeMap {
    n: usize,
    rows: Vec<f64>,
}

fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, n: usize, m: usize) -> Result<Vec<f64>> {
    // a: n×n, b: n×m, both row-major; returns a⁻¹b
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[piv * n + col].abs() < 1e-300 {
            return domain("singular spline system");
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            for k in 0..m {
                b.swap(col * m + k, piv * m + k);
            }
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            for k in 0..m {
                b[r * m + k] -= f * b[col * m + k];
            }
        }
    }
    for col in (0..n).rev() {
        let d = a[col * n + col];
        for k in 0..m {
            let mut v = b[col * m + k];
            for j in col + 1..n {
                v -= a[col * n + j] * b[j * m + k];
            }
            b[col * m + k] = v / d;
        }
    }
    Ok(b)
}

impl SecondDerivativeMap {
    fn new(x: &[f64], bc: SplineBoundary) -> Result<Self> {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n * n];
        for i in 1..n - 1 {
            a[i * n + i - 1] = h[i - 1];
            a[i * n + i] = 2.0 * (h[i - 1] + h[i]);
            a[i * n + i + 1] = h[i];
            b[i * n + i - 1] = 6.0 / h[i - 1];
            b[i * n + i] = -6.0 / h[i - 1] - 6.0 / h[i];
            b[i * n + i + 1] = 6.0 / h[i];
        }
        match bc {
            SplineBoundary::Natural => {
                a[0] = 1.0;
                a[n * n - 1] = 1.0;
            }
            SplineBoundary::NotAKnot => {
                // (M₁ − M₀)/h₀ = (M₂ − M₁)/h₁ and the mirror at the far end
                a[0] = -h[1];
                a[1] = h[0] + h[1];
                a[2] = -h[0];
                let (m, k) = (n - 1, n - 2);
                a[m * n + m] = -h[k - 1];
                a[m * n + m - 1] = h[k - 1] + h[k];
                a[m * n + m - 2] = -h[k];
            }
        }
        Ok(Self {
            n,
            rows: solve_dense(a, b, n, n)?,
        })
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.rows[i * self.n..(i + 1) * self.n].iter().zip(f).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn locate(x: &[f64], v: f64) -> (usize, f64, f64) {
    let v = v.clamp(x[0], x[x.len() - 1]);
    let i = match x.partition_point(|&k| k <= v) {
        0 => 0,
        p => (p - 1).min(x.len() - 2),
    };
    let h = x[i + 1] - x[i];
    let b = (v - x[i]) / h;
    (i, b, h)
}

/// Weights on (f_i, f_{i+1}, M_i, M_{i+1}) of the cubic piece.
fn piece_weights(b: f64, h: f64) -> [f64; 4] {
    let a = 1.0 - b;
    let c = h * h / 6.0;
    [a, b, (a * a * a - a) * c, (b * b * b - b) * c]
}

/// Tensor-product cubic spline over a rectangular grid; C² in both
/// directions. Arguments outside the rectangle are clamped to it.
#[derive(Debug, Clone, PartialEq)]
pub struct BicubicInterpolant {
    pub y: Vec<f64>,
    pub xi: Vec<f64>,
    pub boundary: SplineBoundary,
    f: Vec<f64>,
    fyy: Vec<f64>,
    fxx: Vec<f64>,
    fyyxx: Vec<f64>,
}

impl BicubicInterpolant {
    /// `values` is row-major with shape `y.len() × xi.len()`.
    pub fn new(y: &[f64], xi: &[f64], values: &[f64], boundary: SplineBoundary) -> Result<Self> {
        let (ny, nx) = (y.len(), xi.len());
        if ny < 4 || nx < 4 {
            return domain(format!("bicubic spline needs at least 4×4 nodes, got {ny}×{nx}"));
        }
        if values.len() != ny * nx {
            return domain("value matrix does not match grid shape");
        }
        if y.windows(2).any(|w| !(w[1] > w[0])) || xi.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("spline nodes must be strictly increasing");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("spline values must be finite");
        }
        let sy = SecondDerivativeMap::new(y, boundary)?;
        let sx = SecondDerivativeMap::new(xi, boundary)?;
        let by_cols = |m: &[f64]| {
            let mut out = vec![0.0; ny * nx];
            for j in 0..nx {
                let col: Vec<f64> = (0..ny).map(|i| m[i * nx + j]).collect();
                for (i, v) in sy.apply(&col).into_iter().enumerate() {
                    out[i * nx + j] = v;
                }
            }
            out
        };
        let by_rows = |m: &[f64]| {
            let mut out = Vec::with_capacity(ny * nx);
            for i in 0..ny {
                out.extend(sx.apply(&m[i * nx..(i + 1) * nx]));
            }
            out
        };
        let fyy = by_cols(values);
        let fxx = by_rows(values);
        let fyyxx = by_rows(&fyy);
        Ok(Self {
            y: y.to_vec(),
            xi: xi.to_vec(),
            boundary,
            f: values.to_vec(),
            fyy,
            fxx,
            fyyxx,
        })
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.y[0], self.y[self.y.len() - 1])
    }

    pub fn xi_range(&self) -> (f64, f64) {
        (self.xi[0], self.xi[self.xi.len() - 1])
    }

    pub fn node_value(&self, i: usize, j: usize) -> f64 {
        self.f[i * self.xi.len() + j]
    }

    pub fn eval(&self, y: f64, xi: f64) -> f64 {
        let nx = self.xi.len();
        let (i, by, hy) = locate(&self.y, y);
        let (j, bx, hx) = locate(&self.xi, xi);
        let wy = piece_weights(by, hy);
        let wx = piece_weights(bx, hx);
        let at = |m: &[f64], di: usize, dj: usize| m[(i + di) * nx + j + dj];
        let mut acc = 0.0;
        for (p, &wyp) in wy.iter().enumerate() {
            let (di, yy) = (p % 2, p >= 2);
            for (q, &wxq) in wx.iter().enumerate() {
                let (dj, xx) = (q % 2, q >= 2);
                let m = match (yy, xx) {
                    (false, false) => &self.f,
                    (true, false) => &self.fyy,
                    (false, true) => &self.fxx,
                    (true, true) => &self.fyyxx,
                };
                acc += wyp * wxq * at(m, di, dj);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> (Vec<f64>, Vec<f64>) {
        let y: Vec<f64> = (0..9).map(|k| 0.4 * 1.35f64.powi(k)).collect();
        let xi: Vec<f64> = (0..6).map(|k| 0.02 + 0.007 * k as f64).collect();
        (y, xi)
    }

    fn sample(y: &[f64], xi: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        y.iter().flat_map(|&a| xi.iter().map(move |&b| (a, b))).map(|(a, b)| f(a, b)).collect()
    }

    fn bicubic(a: f64, b: f64) -> f64 {
        let b = 40.0 * b;
        1.0 - 0.3 * a + 0.2 * a * a - 0.05 * a * a * a + b * (0.7 - 0.1 * a * a) - 0.4 * b * b * b
            + 0.02 * a * a * a * b * b
    }

    #[test]
    fn reproduces_nodes() {
        let (y, xi) = grid();
        let v = sample(&y, &xi, |a, b| (a * 3.0).sin() + (b * 50.0).cos());
        for bc in [SplineBoundary::Natural, SplineBoundary::NotAKnot] {
            let s = BicubicInterpolant::new(&y, &xi, &v, bc).unwrap();
            for i in 0..y.len() {
                for j in 0..xi.len() {
                    assert!((s.eval(y[i], xi[j]) - v[i * xi.len() + j]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn not_a_knot_reproduces_bicubic_polynomials() {
        let (y, xi) = grid();
        let v = sample(&y, &xi, bicubic);
        let s = BicubicInterpolant::new(&y, &xi, &v, SplineBoundary::NotAKnot).unwrap();
        for k in 0..50 {
            let a = y[0] + (y[8] - y[0]) * (k as f64 * 0.137).fract();
            let b = xi[0] + (xi[5] - xi[0]) * (k as f64 * 0.291).fract();
            assert!((s.eval(a, b) - bicubic(a, b)).abs() <= 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn natural_reproduces_bilinear() {
        let (y, xi) = grid();
        let f = |a: f64, b: f64| 0.3 - 0.2 * a + 5.0 * b + 7.0 * a * b;
        let v = sample(&y, &xi, f);
        let s = BicubicInterpolant::new(&y, &xi, &v, SplineBoundary::Natural).unwrap();
        for k in 0..50 {
            let a = y[0] + (y[8] - y[0]) * (k as f64 * 0.173).fract();
            let b = xi[0] + (xi[5] - xi[0]) * (k as f64 * 0.311).fract();
            assert!((s.eval(a, b) - f(a, b)).abs() <= 1e-12);
        }
    }

    #[test]
    fn natural_has_zero_edge_curvature() {
        let (y, xi) = grid();
        let v = sample(&y, &xi, bicubic);
        let s = BicubicInterpolant::new(&y, &xi, &v, SplineBoundary::Natural).unwrap();
        let h = 1e-4;
        let b = xi[2];
        let c = (s.eval(y[0] + 2.0 * h, b) - 2.0 * s.eval(y[0] + h, b) + s.eval(y[0], b)) / (h * h);
        assert!(c.abs() < 1e-2 * (1.0 + s.eval(y[0], b).abs()), "{c}");
    }

    #[test]
    fn rejects_degenerate_grids() {
        let y = vec![1.0, 2.0, 3.0];
        let xi = vec![0.0, 1.0, 2.0, 3.0];
        assert!(BicubicInterpolant::new(&y, &xi, &[0.0; 12], SplineBoundary::Natural).is_err());
        let y = vec![1.0, 2.0, 2.0, 3.0];
        assert!(BicubicInterpolant::new(&y, &xi, &[0.0; 16], SplineBoundary::Natural).is_err());
    }

    proptest! {
        #[test]
        fn second_derivative_continuous_across_knots(seed in proptest::collection::vec(-1.0f64..1.0, 54)) {
            let (y, xi) = grid();
            let s = BicubicInterpolant::new(&y, &xi, &seed, SplineBoundary::Natural).unwrap();
            let b = 0.5 * (xi[1] + xi[2]);
            for k in 1..8 {
                let h = 1e-5 * y[k];
                let left = (s.eval(y[k], b) - 2.0 * s.eval(y[k] - h, b) + s.eval(y[k] - 2.0 * h, b)) / (h * h);
                let right = (s.eval(y[k] + 2.0 * h, b) - 2.0 * s.eval(y[k] + h, b) + s.eval(y[k], b)) / (h * h);
                prop_assert!((left - right).abs() <= 1e-2 * (1.0 + left.abs()), "{k} {left} {right}");
            }
        }
    }
}
