//! Acceptance gate: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use timerep::density::{
    integrate_half_line, ExponentialDecay, LorentzianTimeRep, ModulatedExponential, SurvivalDecay, TailClass,
};
use timerep::events::{bin_events, ks_critical, ks_two_sample, sample_decays, Generator};
use timerep::fit::{fit_auto, zero_time_discriminator, FitOptions};
use timerep::gamow::gamow_rate;
use timerep::interference::{gsi_rate, interference_rate, kaon_rates, Beam, KaonSystem};
use timerep::model::{Component, MixedState, Resonance, UnitsContext};
use timerep::moments::{gamow_time_of_flight, time_of_flight};
use timerep::spectral::{nondecay_rate, survival_amplitude, survival_amplitude_derivative, EnergyWaveFunction};
use timerep::survival::{polar_shift, AppendixExample, QuantumBeatParams, SurvivalModelParams};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn appendix_transform() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_origin: f64 = 0.0;
    for &alpha in &[0.5, 1.0, 2.0] {
        let f = EnergyWaveFunction::exponential(alpha).map_err(|e| e.to_string())?;
        let ex = AppendixExample::new(alpha).unwrap();
        let grid: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.05 * alpha).collect();
        let r = nondecay_rate(&f, &grid, 1e-9).map_err(|e| e.to_string())?;
        for &(t, v) in r.points() {
            worst = worst.max((v / ex.timerep_rate(t) - 1.0).abs());
        }
        let r0 = r.points()[0].1;
        worst_origin = worst_origin.max((r0 * PI * alpha - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-6 && worst_origin <= 1e-8 && secs < 10.0,
        format!("max rel err {worst:.2e} on [0, 50α], R(0) rel err {worst_origin:.2e}, {secs:.2} s"),
    )
}

fn appendix_discriminator() -> Outcome {
    let mut worst: f64 = 0.0;
    for &alpha in &[0.5, 1.0, 2.0] {
        let f = EnergyWaveFunction::exponential(alpha).unwrap();
        for k in 1..=200 {
            let tau = 0.05 * alpha * k as f64;
            let a = survival_amplitude(&f, tau, 1e-12).map_err(|e| e.to_string())?;
            let da = survival_amplitude_derivative(&f, tau, 1e-12).map_err(|e| e.to_string())?;
            let rate = -2.0 * (a.conj() * da).re;
            let closed = 8.0 * alpha * alpha * tau / (4.0 * alpha * alpha + tau * tau).powi(2);
            worst = worst.max((rate / closed - 1.0).abs());
        }
    }
    let at_zero = AppendixExample::new(1.0).unwrap().survival_derivative(0.0);
    check(
        worst <= 1e-6 && at_zero == 0.0,
        format!("max rel err {worst:.2e}, closed-form ṗ_s(0) = {at_zero}"),
    )
}

fn gamow_normalization() -> Outcome {
    let n0 = 1_000_000u64;
    let (mut norm_err, mut tof_err): (f64, f64) = (0.0, 0.0);
    for &gamma in &[0.1, 1.0, 10.0] {
        let r = Resonance::single(5.0, gamma).unwrap();
        let q = integrate_half_line(
            &|t| gamow_rate(&r, n0, t).unwrap(),
            TailClass::Exponential { rate: gamma },
            1.0 / gamma,
            1e-6,
        );
        norm_err = norm_err.max((q.value / n0 as f64 - 1.0).abs());
        let tof = time_of_flight(&ExponentialDecay::new(gamma).unwrap(), 1e-10).map_err(|e| e.to_string())?;
        let expected = gamow_time_of_flight(&r, &UnitsContext::default());
        tof_err = tof_err.max((tof.mean.unwrap() / expected - 1.0).abs());
    }
    check(
        norm_err <= 1e-9 && tof_err <= 1e-9,
        format!("normalization rel err {norm_err:.2e}, time of flight rel err {tof_err:.2e}"),
    )
}

fn equal_width_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let gamma = rng.random_range(0.01..5.0);
        let comp = |rng: &mut ChaCha8Rng| Component {
            resonance: Resonance::new(
                rng.random_range(0.0..20.0),
                gamma,
                rng.random_range(0.05..2.0),
                rng.random_range(-PI..PI),
            )
            .unwrap(),
            b_mag: rng.random_range(0.1..1.0),
            b_phase: rng.random_range(-PI..PI),
        };
        let s = MixedState::pair(comp(&mut rng), comp(&mut rng)).unwrap();
        let t = rng.random_range(0.0..10.0);
        let direct = s.amplitude(t).norm_sqr();
        let general = interference_rate(&s, 1, t).unwrap();
        let reduced = gsi_rate(&s, 1, t).unwrap();
        let envelope: f64 = s.components().iter().map(|c| c.modulus().powi(2)).sum::<f64>() * (-gamma * t).exp();
        worst = worst.max((general - direct).abs().max((reduced - direct).abs()) / envelope);
    }
    check(worst <= 1e-12, format!("max rel deviation {worst:.2e} over 1000 points"))
}

fn survival_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut ws, mut wq): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let gamma = rng.random_range(0.01..5.0);
        let ratio = rng.random_range(-20.0..20.0);
        let tau = rng.random_range(0.0..10.0);
        let w1: f64 = rng.random_range(0.0..1.0);
        let p = SurvivalModelParams::new(
            Complex64::from_polar(w1.sqrt(), rng.random_range(-PI..PI)),
            Complex64::from_polar((1.0 - w1).sqrt(), rng.random_range(-PI..PI)),
            gamma,
            ratio * gamma,
        )
        .unwrap();
        let (amp, _) = polar_shift(ratio);
        let scale = gamma * (-gamma * tau).exp() * (1.0 + amp);
        ws = ws.max((p.rate(tau) - p.rate_expanded(tau)).abs() / scale);
        let q = QuantumBeatParams::new(
            rng.random_range(0.1..2.0),
            rng.random_range(0.0..1.0),
            rng.random_range(-PI..PI),
            gamma,
            ratio * gamma,
        )
        .unwrap();
        let scale = q.p_bar * gamma * (-gamma * tau).exp() * (1.0 + q.beat().0);
        wq = wq.max((q.rate(tau) - q.rate_expanded(tau)).abs() / scale);
    }
    check(
        ws <= 1e-12 && wq <= 1e-12,
        format!("survival forms {ws:.2e}, quantum-beat forms {wq:.2e}"),
    )
}

fn gsi_round_trip() -> Outcome {
    let start = Instant::now();
    let truth = ModulatedExponential::normalized(0.05, 0.2, 2.0 * PI / 7.0, 0.4).unwrap();
    let e = sample_decays(&truth, 1_000_000, 42, 100.0, Generator::InverseCdf).map_err(|e| e.to_string())?;
    let h = bin_events(&e, 0.5, 100.0).map_err(|e| e.to_string())?;
    let f = fit_auto(&h, &FitOptions::default()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    check(
        (f.params.a - 0.2).abs() <= 0.02 && (f.period - 7.0).abs() <= 0.1 && secs < 60.0,
        format!(
            "a = {:.4} ± {:.4}, T = {:.4} ± {:.4} s, {secs:.2} s",
            f.params.a, f.stderr.a, f.period, f.period_stderr
        ),
    )
}

fn kaon_sum_rule() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let gs = rng.random_range(0.5..2.0);
        let gl = gs * rng.random_range(1e-4..0.5);
        let (cs, cl): (f64, f64) = (rng.random_range(0.1..2.0), rng.random_range(0.01..1.0));
        let short = Resonance::new(rng.random_range(-2.0..2.0), gs, cs, rng.random_range(-PI..PI)).unwrap();
        let long = Resonance::new(0.0, gl, cl, rng.random_range(-PI..PI)).unwrap();
        let k = KaonSystem::new(short, long).unwrap();
        let t = rng.random_range(0.0..20.0);
        let sum = kaon_rates(&k, 1, t, Beam::K0).unwrap() + kaon_rates(&k, 1, t, Beam::K0bar).unwrap();
        let incoherent = cs * cs * (-gs * t).exp() + cl * cl * (-gl * t).exp();
        worst = worst.max((sum - incoherent).abs() / incoherent);
    }
    check(worst <= 1e-12, format!("max cross-term residual {worst:.2e}"))
}

fn zero_time() -> Outcome {
    let ex = AppendixExample::new(1.0).unwrap();
    let run = |curve: &dyn timerep::density::RateCurve, seed| {
        let e = sample_decays(curve, 1_000_000, seed, 1e4, Generator::InverseCdf)?;
        let h = bin_events(&e, 0.05, 10.0)?;
        zero_time_discriminator(&h, &[], 10)
    };
    let target = 1.0 / PI;
    let lz = run(&LorentzianTimeRep { example: ex }, 101).map_err(|e| e.to_string())?;
    let sv = run(&SurvivalDecay { example: ex }, 102).map_err(|e| e.to_string())?;
    let (l, ls) = (lz.extrapolated_rate, lz.extrapolated_stderr);
    let (s, ss) = (sv.extrapolated_rate, sv.extrapolated_stderr);
    let ok = (l - target).abs() < 3.0 * ls && l > 5.0 * ls && s.abs() < 3.0 * ss && (s - target).abs() > 5.0 * ss;
    check(
        ok,
        format!(
            "time-rep R(0) = {l:.4} ± {ls:.4} (1/π = {target:.4}); survival R(0) = {s:.4} ± {ss:.4}"
        ),
    )
}

fn sampler_cross_validation() -> Outcome {
    let m = ModulatedExponential::normalized(0.05, 0.2, 2.0 * PI / 7.0, 0.4).unwrap();
    let a = sample_decays(&m, 100_000, 2001, 500.0, Generator::InverseCdf).map_err(|e| e.to_string())?;
    let b = sample_decays(&m, 100_000, 2002, 500.0, Generator::Rejection).map_err(|e| e.to_string())?;
    let d = ks_two_sample(&a.times, &b.times);
    let crit = ks_critical(a.len(), b.len(), 0.01);
    check(d < crit, format!("two-sample KS D = {d:.5}, 1% critical value {crit:.5}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("appendix rate from quadrature", appendix_transform),
        ("appendix survival-rate discriminator", appendix_discriminator),
        ("Gamow normalization and lifetime", gamow_normalization),
        ("equal-width reduction", equal_width_reduction),
        ("survival and quantum-beat identities", survival_identities),
        ("GSI round trip", gsi_round_trip),
        ("kaon sum rule", kaon_sum_rule),
        ("zero-time discrimination", zero_time),
        ("sampler cross-validation", sampler_cross_validation),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
