use std::f64::consts::PI;

use num_complex::Complex64;
use timerep::quad;
use timerep::spectral::{
    nondecay_rate, plancherel_defect, plancherel_report, regularized_kernel, survival_amplitude,
    survival_amplitude_derivative, time_amplitude, EnergyWaveFunction, TailKind, TailModel,
};
use timerep::survival::AppendixExample;

const TOL: f64 = 1e-8;

fn gaussian_closed_form() -> EnergyWaveFunction {
    // ∫₀^∞ exp(−2(E−5)²) dE, from an independent high-precision quadrature
    let norm = 1.25331413731550025f64.sqrt();
    EnergyWaveFunction::closed_form(
        move |e| Complex64::new((-(e - 5.0) * (e - 5.0)).exp() / norm, 0.0),
        TailModel::exponential(12.0, 1.0),
    )
    .unwrap()
    .with_knots([3.0, 5.0, 7.0])
}

fn gaussian_sampled() -> EnergyWaveFunction {
    let norm = 1.25331413731550025f64.sqrt();
    let energies: Vec<f64> = (0..=1200).map(|k| k as f64 * 0.01).collect();
    let values = energies
        .iter()
        .map(|e| Complex64::new((-(e - 5.0) * (e - 5.0)).exp() / norm, 0.0))
        .collect();
    EnergyWaveFunction::sampled(energies, values, TailKind::Exponential { rate: 7.0 }).unwrap()
}

#[test]
fn appendix_transform_examples() {
    let f = EnergyWaveFunction::exponential(1.0).unwrap();
    let (v0, _) = time_amplitude(&f, 0.0, TOL).unwrap();
    assert!((v0.re - 1.0 / PI.sqrt()).abs() < 1e-10 && v0.im.abs() < 1e-10);
    let r = nondecay_rate(&f, &[0.0, 1.0], TOL).unwrap();
    let v: Vec<f64> = r.values().collect();
    assert!((v[0] - 1.0 / PI).abs() < 1e-10);
    assert!((v[1] - 1.0 / (2.0 * PI)).abs() < 1e-10);
}

#[test]
fn appendix_rate_for_three_widths() {
    for &alpha in &[0.5, 1.0, 2.0] {
        let f = EnergyWaveFunction::exponential(alpha).unwrap();
        let ex = AppendixExample::new(alpha).unwrap();
        let grid: Vec<f64> = (0..=500).map(|k| k as f64 * 0.1 * alpha).collect();
        let r = nondecay_rate(&f, &grid, TOL).unwrap();
        for (t, v) in r.points() {
            let exact = ex.timerep_rate(*t);
            assert!((v - exact).abs() <= 1e-6 * exact, "alpha {alpha} t {t}: {v} vs {exact}");
        }
    }
}

#[test]
fn truncated_breit_wigner_against_quadrature_oracle() {
    let f = EnergyWaveFunction::truncated_breit_wigner(10.0, 1.0).unwrap();
    let r = nondecay_rate(&f, &[3.0], TOL).unwrap();
    let v = r.points()[0].1;
    // high-precision oscillatory quadrature, cross-checked by two methods
    let oracle = 0.050209894043825967;
    assert!((v - oracle).abs() <= 1e-7 * oracle, "{v}");
    let deviation = v / (-3.0f64).exp() - 1.0;
    assert!((deviation - 0.00849268072660702).abs() < 1e-6);
}

#[test]
fn isometry() {
    for f in [
        EnergyWaveFunction::exponential(1.0).unwrap(),
        EnergyWaveFunction::exponential(0.5).unwrap(),
        gaussian_closed_form(),
    ] {
        let d = plancherel_defect(&f, 1e-7).unwrap();
        assert!(d <= 1e-6, "defect {d}");
    }
    let c = (2.0f64).sqrt();
    let scaled = EnergyWaveFunction::closed_form(
        move |e| Complex64::new(2.0 * c * (-e).exp(), 0.0),
        TailModel::exponential(0.0, 1.0),
    )
    .unwrap();
    let r = plancherel_report(&scaled, 1e-7).unwrap();
    assert!((r.energy_norm - 4.0).abs() < 1e-9);
    assert!((r.time_norm - 4.0).abs() <= 4e-6);
}

#[test]
fn sampled_gaussian_isometry() {
    let f = gaussian_sampled();
    let r = plancherel_report(&f, 1e-7).unwrap();
    assert!((r.energy_norm - 1.0).abs() < 1e-6);
    assert!(r.defect <= 1e-6, "defect {}", r.defect);
}

#[test]
fn linearity() {
    let f = EnergyWaveFunction::exponential(1.0).unwrap();
    let g = gaussian_closed_form();
    let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(-0.7, 0.4));
    let (fc, gc) = (f.clone(), g.clone());
    let h = EnergyWaveFunction::closed_form(move |e| a * fc.eval(e) + b * gc.eval(e), TailModel::exponential(12.0, 1.0))
        .unwrap()
        .with_knots([3.0, 5.0, 7.0]);
    for &t in &[0.0, 0.3, 1.0, 2.5, 7.0, 40.0, -3.0] {
        let lhs = time_amplitude(&h, t, TOL).unwrap().0;
        let rhs = a * time_amplitude(&f, t, TOL).unwrap().0 + b * time_amplitude(&g, t, TOL).unwrap().0;
        assert!((lhs - rhs).norm() <= 10.0 * TOL, "t {t}");
    }
}

#[test]
fn phase_factor_shifts_time() {
    // e^{+iEt₀} φ(E) has time representation φ(t − t₀)
    let t0 = 1.7;
    let g = gaussian_closed_form();
    let gc = g.clone();
    let shifted = EnergyWaveFunction::closed_form(
        move |e| gc.eval(e) * Complex64::from_polar(1.0, e * t0),
        TailModel::exponential(12.0, 1.0),
    )
    .unwrap()
    .with_knots([3.0, 5.0, 7.0]);
    for &t in &[0.0, 0.5, 1.7, 2.2, 4.0, 9.0] {
        let a = time_amplitude(&shifted, t, TOL).unwrap().0.norm_sqr();
        let b = time_amplitude(&g, t - t0, TOL).unwrap().0.norm_sqr();
        assert!((a - b).abs() <= 10.0 * TOL, "t {t}: {a} vs {b}");
    }
}

#[test]
fn kernel_weight_extrapolates_to_half() {
    let weight = |eps: f64| {
        let f = |dt: f64| regularized_kernel(dt, eps).unwrap().re;
        quad::piecewise(&f, &[-50.0, -1.0, -10.0 * eps, 0.0, 10.0 * eps, 1.0, 50.0], 1e-13, 1e-13, 2000).value
    };
    let (w2, w3) = (weight(1e-2), weight(1e-3));
    // arctan(50/ε)/π, evaluated independently
    assert!((w3 - 0.499993633802277173).abs() < 1e-10);
    assert!((w2 - 0.5).abs() < 1e-3 && (w3 - 0.5).abs() < 1e-3);
    let extrapolated = (10.0 * w3 - w2) / 9.0;
    assert!((extrapolated - 0.5).abs() < 1e-8, "{extrapolated}");
    assert!(regularized_kernel(0.0, 0.0).is_err());
}

#[test]
fn gaussian_survival_amplitude_oracle() {
    let g = gaussian_closed_form();
    for (tau, exact) in [
        (0.7, Complex64::new(-0.880819981923437486, 0.329942516793272390)),
        (1.3, Complex64::new(0.790617654229293223, -0.174155043417669179)),
    ] {
        let v = survival_amplitude(&g, tau, 1e-12).unwrap();
        assert!((v - exact).norm() < 1e-9, "tau {tau}: {v}");
    }
    let a0 = survival_amplitude(&g, 0.0, 1e-12).unwrap();
    assert!((a0.re - 1.0).abs() < 1e-9);
}

#[test]
fn appendix_survival_rate_from_amplitude() {
    for &alpha in &[0.5, 1.0, 2.0] {
        let f = EnergyWaveFunction::exponential(alpha).unwrap();
        let ex = AppendixExample::new(alpha).unwrap();
        for k in 0..=40 {
            let tau = 0.25 * alpha * k as f64;
            let a = survival_amplitude(&f, tau, 1e-12).unwrap();
            let da = survival_amplitude_derivative(&f, tau, 1e-12).unwrap();
            let ps = a.norm_sqr();
            let dps = 2.0 * (a.conj() * da).re;
            assert!((ps - ex.survival_probability(tau)).abs() < 1e-10);
            let exact = ex.survival_derivative(tau);
            assert!((dps - exact).abs() <= 1e-6 * exact.abs().max(1e-12), "tau {tau}: {dps} vs {exact}");
        }
    }
}
