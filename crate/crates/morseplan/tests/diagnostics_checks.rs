mod common;

use common::{integrate, scenario_market, scenario_plan};
use morseplan::diagnostics::{
    backward_initial_asymptotic, finite_n_initial_density, norm_residual_envelope,
    norm_residual_estimate, probability_current, total_norm,
};
use morseplan::model::{control_point, control_point_from_y0, derive_params, DerivedParams};
use morseplan::specfun::{laguerre_sequence, log_gamma};
use morseplan::spectral::{
    backward_initial_weights, evolve, fpe_density, forward_initial_weights, QuasiNumberBasis,
    SolverConfig, SpectralSolver, WeightKind, WeightVector,
};

fn solver() -> SpectralSolver {
    SpectralSolver::new(scenario_plan(), scenario_market(), SolverConfig::default()).unwrap()
}

fn params_with_s(s: f64, q: f64) -> DerivedParams {
    let m = scenario_market();
    let xi = m.rbar() - 0.045 + s * 0.09;
    let p = derive_params(&m, xi, q).unwrap();
    assert!((p.s - s).abs() < 1e-12);
    p
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[test]
fn current_vanishes_at_origin_with_expected_power() {
    let s = solver();
    let col = s.column(0.03).unwrap();
    let cp = control_point(&s.plan, &col.params, 22_500.0).unwrap();
    let w0 = forward_initial_weights(&col.basis, &cp, &col.params).unwrap();
    let target = col.params.s + col.params.q;
    for t in [0.0, 20.0] {
        let w = evolve(&w0, &col.decomp, t, col.params.hbar).unwrap();
        let ys: Vec<f64> = (0..8).map(|k| 1e-7 * 10f64.powf(k as f64 / 3.5)).collect();
        let js: Vec<f64> = ys
            .iter()
            .map(|&y| probability_current(&col.basis, &w, &col.params, y).unwrap().abs().ln())
            .collect();
        let lx: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let k = slope(&lx, &js);
        assert!((k - target).abs() <= 0.1 * target, "t={t}: slope {k} vs {target}");
        let far = probability_current(&col.basis, &w, &col.params, 80.0).unwrap();
        assert!(far.abs() < 1e-8, "{far}");
    }
}

#[test]
fn current_is_zero_for_zero_weights() {
    let p = params_with_s(0.05, 1.25);
    let b = QuasiNumberBasis::new(10, 1.25, p.s).unwrap();
    let w = WeightVector {
        kind: WeightKind::Forward,
        time_years: 0.0,
        values: vec![0.0; 10],
    };
    assert_eq!(probability_current(&b, &w, &p, 0.7).unwrap(), 0.0);
}

#[test]
fn current_satisfies_continuity() {
    // J(y, t) = d/dt ∫_y^∞ f(y', t) dy', up to truncation error
    let s = SpectralSolver::new(
        scenario_plan(),
        scenario_market(),
        SolverConfig { n_basis: 400, ..Default::default() },
    )
    .unwrap();
    let col = s.column(0.035).unwrap();
    let cp = control_point(&s.plan, &col.params, 30_000.0).unwrap();
    let w0 = forward_initial_weights(&col.basis, &cp, &col.params).unwrap();
    let (t, h) = (6.0, 1e-3);
    let tail = |tt: f64, y: f64| {
        let w = evolve(&w0, &col.decomp, tt, col.params.hbar).unwrap();
        integrate(|x| fpe_density(&col.basis, &w, &col.params, x).unwrap(), y, 120.0, 120, 1e-13)
    };
    for y in [0.3, 1.0, 2.5] {
        let rate = (tail(t + h, y) - tail(t - h, y)) / (2.0 * h);
        let w = evolve(&w0, &col.decomp, t, col.params.hbar).unwrap();
        let j = probability_current(&col.basis, &w, &col.params, y).unwrap();
        assert!((rate - j).abs() <= 1e-2 * j.abs(), "y={y}: {rate} vs {j}");
    }
}

fn partial_norms(y0: f64, n_max: usize, p: &DerivedParams) -> Vec<f64> {
    let (q, s) = (p.q, p.s);
    let l = laguerre_sequence(2.0 * q - 1.0, n_max, y0).unwrap().values;
    let ratio = log_gamma(q + s).unwrap() - log_gamma(q - s).unwrap();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let nf = n as f64;
        let lg = log_gamma(nf + q - s).unwrap() - log_gamma(nf + 2.0 * q).unwrap();
        acc += ((q - s) * y0.ln() + ratio + lg).exp() * l[n];
        out.push(acc);
    }
    out
}

#[test]
fn norm_series_matches_direct_sum_at_start() {
    let p = params_with_s(0.05, 1.25);
    let plan = scenario_plan();
    for y0 in [0.5, 2.0, 4.0] {
        let b = QuasiNumberBasis::new(150, 1.25, p.s).unwrap();
        let cp = control_point_from_y0(&plan, &p, y0).unwrap();
        let w = forward_initial_weights(&b, &cp, &p).unwrap();
        let report = total_norm(&b, &w, &p, y0).unwrap();
        let direct = partial_norms(y0, 150, &p)[149];
        assert!((report.total_norm - direct).abs() <= 1e-11, "{} vs {direct}", report.total_norm);
        assert!(report.residual_estimate.is_finite());
        assert!(report.gate_flags.iter().all(|g| g.passed));
    }
}

#[test]
fn residual_tracks_deficit() {
    let p = params_with_s(0.05, 1.25);
    let sums = partial_norms(4.0, 300, &p);
    let mut worst = 0.0f64;
    for n in 50..=300 {
        let deficit = 1.0 - sums[n - 1];
        let est = norm_residual_estimate(4.0, n, &p).unwrap();
        let env = norm_residual_envelope(4.0, n, &p).unwrap();
        worst = worst.max((est - deficit).abs() / env);
    }
    assert!(worst <= 0.2, "worst envelope-relative error {worst}");
    assert!(norm_residual_envelope(4.0, 10_000, &p).unwrap() < norm_residual_envelope(4.0, 100, &p).unwrap());
    assert!(norm_residual_estimate(4.0, 100, &params_with_s(-0.3, 1.25)).is_err());
}

#[test]
fn residual_phase_flips_sign() {
    let p = params_with_s(0.05, 1.25);
    // phase 2√(y₀N) − π(q − 3/4) advances by π between these N
    let y0: f64 = 1.0;
    let n1: f64 = 100.0;
    let n2 = ((2.0 * (y0 * n1).sqrt() + std::f64::consts::PI) / 2.0).powi(2) / y0;
    let a = norm_residual_estimate(y0, n1 as usize, &p).unwrap();
    let b = norm_residual_estimate(y0, n2.round() as usize, &p).unwrap();
    assert!(a * b < 0.0, "{a} {b}");
}

#[test]
fn christoffel_darboux_matches_direct_sum() {
    let p = params_with_s(0.05, 1.25);
    let n = 60;
    let b = QuasiNumberBasis::new(n, 1.25, p.s).unwrap();
    let y0 = 1.3;
    let plan = scenario_plan();
    let cp = control_point_from_y0(&plan, &p, y0).unwrap();
    let w = forward_initial_weights(&b, &cp, &p).unwrap();
    for y in [0.2, 1.0, 1.3, 1.3 + 1e-12, 2.7, 6.0] {
        let direct = fpe_density(&b, &w, &p, y).unwrap();
        let cd = finite_n_initial_density(y, y0, n, &p).unwrap().exact;
        assert!((direct - cd).abs() <= 1e-9 * (1.0 + direct.abs()), "y={y}: {direct} vs {cd}");
    }
}

#[test]
fn finite_n_asymptotic_agrees_away_from_start() {
    let p = params_with_s(0.05, 1.25);
    for (n, y0) in [(150usize, 1.0f64), (100, 2.0)] {
        let mut worst = 0.0f64;
        for k in 0..400 {
            let y = 0.05 + 5.95 * k as f64 / 399.0;
            if (y.sqrt() - y0.sqrt()).abs() * (n as f64).sqrt() < 1.0 {
                continue;
            }
            let d = finite_n_initial_density(y, y0, n, &p).unwrap();
            worst = worst.max((d.exact - d.asymptotic).abs() / d.envelope);
        }
        assert!(worst <= 0.1, "N={n}, y0={y0}: {worst}");
    }
}

#[test]
fn finite_n_density_concentrates() {
    let p = params_with_s(0.05, 1.25);
    let y0: f64 = 1.0;
    let window = 0.25;
    let mass = |n: usize| {
        let lo = (y0.sqrt() - window).powi(2);
        let hi = (y0.sqrt() + window).powi(2);
        integrate(|y| finite_n_initial_density(y, y0, n, &p).unwrap().exact, lo, hi, 40, 1e-12)
    };
    let errs: Vec<f64> = [50, 150, 400].iter().map(|&n| (mass(n) - 1.0).abs()).collect();
    assert!(errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
    assert!(errs[2] < 0.1, "{errs:?}");
    let peak = finite_n_initial_density(y0, y0, 150, &p).unwrap();
    let beside = finite_n_initial_density(y0 * (1.0 + 1e-7), y0, 150, &p).unwrap();
    assert!(peak.exact.is_finite());
    assert!((peak.exact - beside.exact).abs() <= 1e-4 * peak.exact.abs());
}

#[test]
fn backward_asymptotic_matches_spectral_sum() {
    let s = solver();
    let col = s.column(0.03).unwrap();
    let cp = control_point(&s.plan, &col.params, 22_500.0).unwrap();
    let w = backward_initial_weights(&col.basis, &cp, &col.params).unwrap();
    let mut checked = 0;
    for k in 0..=200 {
        let y = cp.y_hat * (0.5 + 2.5 * k as f64 / 200.0);
        let a = backward_initial_asymptotic(y, cp.y_hat, 150, &col.params).unwrap();
        if a.flagged {
            continue;
        }
        let phi = col.basis.values(y).unwrap();
        let spectral: f64 = phi.iter().zip(&w.values).map(|(x, v)| x * v).sum();
        let scale = ((col.params.kappa - 1.25) * y.ln() - 0.5 * y).exp();
        assert!((spectral - a.value).abs() <= 0.1 * scale, "y={y}: {spectral} vs {}", a.value);
        checked += 1;
    }
    assert!(checked > 150);
}

#[test]
fn backward_asymptotic_conventions() {
    let p = params_with_s(0.05, 1.25);
    let at = backward_initial_asymptotic(0.4, 0.4, 150, &p).unwrap();
    let scale = ((p.kappa - 1.25) * 0.4f64.ln() - 0.2).exp();
    assert!((at.leading - 0.5 * scale).abs() < 1e-15);
    assert!(at.flagged);
    let below: Vec<f64> = [100usize, 10_000, 1_000_000]
        .iter()
        .map(|&n| backward_initial_asymptotic(0.2, 0.4, n, &p).unwrap().value.abs())
        .collect();
    assert!(below[2] < below[1] && below[1] < below[0]);
    assert!(backward_initial_asymptotic(0.2, 0.4, 100, &params_with_s(0.05, 0.75)).is_err());
}
