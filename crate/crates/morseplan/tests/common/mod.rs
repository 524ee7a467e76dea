#![allow(dead_code)]

use morseplan::model::{MarketParams, PlanSpec};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn scenario_plan() -> PlanSpec {
    PlanSpec {
        horizon_years: 20.0,
        initial_wealth: 5e5,
        target_wealth: 2.5e6,
        u0_bounds: [1e4, 1e5],
        xi_bounds: [0.025, 0.05],
        confidence_levels: vec![0.03, 0.05, 0.075, 0.10, 0.15, 0.20],
    }
}

pub fn scenario_market() -> MarketParams {
    MarketParams {
        risk_free: 0.02,
        equity_mean: 0.08,
        equity_vol: 0.4,
        equity_fraction: 0.75,
        txn_cost: 0.0,
    }
}

const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WK[7];
    let mut g = fc * WG[3];
    let mut abs = fc.abs() * WK[7];
    for j in 0..7 {
        let x = h * XK[j];
        let (l, r) = (f(c - x), f(c + x));
        k += WK[j] * (l + r);
        abs += WK[j] * (l.abs() + r.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (l + r);
        }
    }
    (k * h, ((k - g) * h).abs(), abs * h.abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (v, err, abs) = gk15(f, a, b);
    if err <= tol.max(1e-13 * abs) || depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, tol, depth - 1) + adapt(f, m, b, tol, depth - 1)
}

/// Adaptive Gauss–Kronrod (7/15) quadrature on [a, b], split into `pieces`
/// panels first. `tol` bounds the Gauss–Kronrod difference on each accepted
/// panel; the Kronrod value itself is far more accurate than that.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pieces: usize, tol: f64) -> f64 {
    let w = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| adapt(&f, a + i as f64 * w, a + (i + 1) as f64 * w, tol, 20))
        .sum()
}

/// ∫₀^b f(y) dy through y = t², which removes fractional powers at 0.
pub fn integrate_sqrt<F: Fn(f64) -> f64>(f: F, b: f64, pieces: usize, tol: f64) -> f64 {
    integrate(|t| 2.0 * t * f(t * t), 0.0, b.sqrt(), pieces, tol)
}

/// Dense matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let norm = a
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut k = 0;
    while norm / 2f64.powi(k) > 0.1 {
        k += 1;
    }
    let scale = 2f64.powi(k);
    let b: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| v / scale).collect()).collect();
    let mut result = identity(n);
    let mut term = identity(n);
    for j in 1..=20 {
        term = matmul(&term, &b);
        for r in term.iter_mut() {
            for v in r.iter_mut() {
                *v /= j as f64;
            }
        }
        for i in 0..n {
            for c in 0..n {
                result[i][c] += term[i][c];
            }
        }
    }
    for _ in 0..k {
        result = matmul(&result, &result);
    }
    result
}

pub fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for (l, &ail) in a[i].iter().enumerate() {
            for j in 0..m {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// ₂F₂ in exact rational arithmetic, summed until the remaining terms are
/// provably below `2^-200` relative (ratio bound once terms decrease).
pub fn hyp2f2_exact(a1: f64, a2: f64, b1: f64, b2: f64, z: f64) -> f64 {
    let (a1, a2, b1, b2, z) = (rat(a1), rat(a2), rat(b1), rat(b2), rat(z));
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let tiny = BigRational::new(BigInt::one(), BigInt::one() << 200);
    let mut k = 0u64;
    loop {
        let kk = BigRational::from_integer(BigInt::from(k));
        let num = (&a1 + &kk) * (&a2 + &kk) * &z;
        let den = (&b1 + &kk) * (&b2 + &kk) * (&kk + BigRational::one());
        let ratio = num / den;
        term = term * &ratio;
        sum = &sum + &term;
        k += 1;
        let r = ratio.abs();
        if k > 10 && r < BigRational::new(BigInt::one(), BigInt::from(2)) && !sum.is_zero() {
            if term.abs() <= &tiny * sum.abs() {
                break;
            }
        }
    }
    sum.to_f64().unwrap()
}
