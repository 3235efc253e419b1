//! Plain-Rust halves of the browser exports, so they can be tested natively.

use std::f64::consts::PI;

use timerep::density::ModulatedExponential;
use timerep::events::{bin_events, sample_decays, Generator};
use timerep::fit::{fit_auto, FitOptions};
use timerep::spectral::{nondecay_rate, EnergyWaveFunction};
use timerep::survival::AppendixExample;
use timerep::Result;

fn grid(t_max: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

/// Row-major `[t, closed-form rate, transformed rate, -dp_s/dτ]` for the
/// exponential energy wave function.
pub fn appendix_rows(alpha: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    let ex = AppendixExample::new(alpha)?;
    let wave = EnergyWaveFunction::exponential(alpha)?;
    let ts = grid(t_max, points);
    let numeric = nondecay_rate(&wave, &ts, 1e-8)?;
    let mut out = Vec::with_capacity(4 * ts.len());
    for (&t, r) in ts.iter().zip(numeric.values()) {
        out.extend([t, ex.timerep_rate(t), r, -ex.survival_derivative(t)]);
    }
    Ok(out)
}

/// The unit-mass law `λ_EC e^{-t/τ}(1 + a cos(2πt/T))`.
pub fn modulated(a: f64, period: f64, lifetime: f64) -> Result<ModulatedExponential> {
    ModulatedExponential::normalized(1.0 / lifetime, a, 2.0 * PI / period, 0.0)
}

/// Row-major `[t, rate, envelope]`.
pub fn interference_rows(a: f64, period: f64, lifetime: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    let m = modulated(a, period, lifetime)?;
    let mut out = Vec::with_capacity(3 * points);
    for t in grid(t_max, points) {
        let env = m.lambda_ec * (-m.lambda * t).exp();
        out.extend([t, env * (1.0 + m.a * (m.omega * t).cos()), env]);
    }
    Ok(out)
}

pub struct SampledFit {
    pub dt: f64,
    pub counts: Vec<f64>,
    /// Fitted expected count per bin.
    pub expected: Vec<f64>,
    pub a: f64,
    pub a_err: f64,
    pub period: f64,
    pub period_err: f64,
    pub lifetime: f64,
    pub chi2_per_dof: f64,
}

/// Draw `n0` decays, bin them over `[0, t_max)` and fit the modulated law.
pub fn sample_and_fit(
    a: f64,
    period: f64,
    lifetime: f64,
    n0: u32,
    seed: u64,
    dt: f64,
    t_max: f64,
) -> Result<SampledFit> {
    let truth = modulated(a, period, lifetime)?;
    let events = sample_decays(&truth, n0 as u64, seed, t_max, Generator::InverseCdf)?;
    let h = bin_events(&events, dt, t_max)?;
    let f = fit_auto(&h, &FitOptions::default())?;
    let expected = (0..h.nbins())
        .map(|k| f.params.bin_integral(h.edge(k), h.edge(k + 1)))
        .collect();
    Ok(SampledFit {
        dt: h.dt,
        counts: h.counts.iter().map(|&c| c as f64).collect(),
        expected,
        a: f.params.a,
        a_err: f.stderr.a,
        period: f.period,
        period_err: f.period_stderr,
        lifetime: 1.0 / f.params.lambda,
        chi2_per_dof: f.chi2_per_dof(),
    })
}
