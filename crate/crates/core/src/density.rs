//! Single-particle decay-time densities shared by the sampler, the moment
//! calculations and the CLI.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::interference::InterferenceRateParams;
use crate::quad;
use crate::survival::{AppendixExample, QuantumBeatParams, SurvivalModelParams};

/// Large-`t` behaviour of a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum TailClass {
    /// Bounded by `C e^{-rate t}`.
    Exponential { rate: f64 },
    /// Decays like `t^{-exponent}`.
    PowerLaw { exponent: f64 },
}

impl TailClass {
    /// Whether `∫ t^k ρ(t) dt` converges.
    pub fn moment_exists(&self, k: u32) -> bool {
        match *self {
            TailClass::Exponential { .. } => true,
            TailClass::PowerLaw { exponent } => exponent > k as f64 + 1.0,
        }
    }
}

/// `ρ(t) ≤ amplitude · e^{-rate t}` for all `t ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpEnvelope {
    pub amplitude: f64,
    pub rate: f64,
}

impl ExpEnvelope {
    pub fn at(&self, t: f64) -> f64 {
        self.amplitude * (-self.rate * t).exp()
    }
}

/// A nonnegative decay-time density on `t ≥ 0` (ħ = 1 time units).
pub trait RateCurve: Send + Sync {
    fn density(&self, t: f64) -> f64;

    fn tail(&self) -> TailClass;

    /// Shortest time scale of structure in the density.
    fn time_scale(&self) -> f64;

    /// Probability the model assigns to `t ≥ 0`. Below one when the time
    /// representation also populates negative times.
    fn declared_mass(&self) -> f64 {
        1.0
    }

    fn envelope(&self) -> Option<ExpEnvelope> {
        None
    }

    /// Closed-form `∫₀^∞ t ρ(t) dt / ∫₀^∞ ρ(t) dt`, when known.
    fn closed_form_mean(&self) -> Option<f64> {
        None
    }

    fn describe(&self) -> String;
}

/// `∫_a^b ρ`, adaptively.
pub(crate) fn integrate_range<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> quad::QuadResult<f64> {
    quad::adaptive(f, a, b, tol, 1e-13, 20_000)
}

/// `∫₀^∞ g(t) dt` for a weight `g` decaying like the curve's tail (times a
/// polynomial of degree `power`).
pub fn integrate_half_line<F: Fn(f64) -> f64>(
    g: &F,
    tail: TailClass,
    scale: f64,
    tol: f64,
) -> quad::QuadResult<f64> {
    let mut out = quad::QuadResult {
        value: 0.0,
        error: 0.0,
        intervals: 0,
        converged: true,
    };
    let mut add = |r: quad::QuadResult<f64>| {
        out.value += r.value;
        out.error += r.error;
        out.intervals += r.intervals;
        out.converged &= r.converged;
    };
    match tail {
        TailClass::Exponential { rate } => {
            let end = 80.0 / rate;
            // pieces of at most 64 structure scales keep each adaptive run small
            let piece = (64.0 * scale).max(end / 4096.0);
            let mut a = 0.0;
            while a < end {
                let b = (a + piece).min(end);
                add(integrate_range(g, a, b, tol * piece / end));
                a = b;
            }
        }
        TailClass::PowerLaw { .. } => {
            let end = 64.0 * scale;
            let mut a = 0.0;
            while a < end {
                let b = (a + scale).min(end);
                add(integrate_range(g, a, b, tol / 128.0));
                a = b;
            }
            add(quad::half_line(g, end, end, tol / 2.0, 1e-13, 5000));
        }
    }
    out
}

/// `Γ e^{-Γt}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialDecay {
    pub gamma: f64,
}

impl ExponentialDecay {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return domain(format!("width must be positive, got {gamma}"));
        }
        Ok(Self { gamma })
    }
}

impl RateCurve for ExponentialDecay {
    fn density(&self, t: f64) -> f64 {
        self.gamma * (-self.gamma * t).exp()
    }
    fn tail(&self) -> TailClass {
        TailClass::Exponential { rate: self.gamma }
    }
    fn time_scale(&self) -> f64 {
        1.0 / self.gamma
    }
    fn envelope(&self) -> Option<ExpEnvelope> {
        Some(ExpEnvelope {
            amplitude: self.gamma,
            rate: self.gamma,
        })
    }
    fn closed_form_mean(&self) -> Option<f64> {
        Some(1.0 / self.gamma)
    }
    fn describe(&self) -> String {
        format!("exponential(gamma={})", self.gamma)
    }
}

/// `λ_EC e^{-λt}(1 + a cos(ωt + φ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulatedExponential {
    pub lambda_ec: f64,
    pub lambda: f64,
    pub a: f64,
    pub omega: f64,
    pub phi: f64,
}

impl ModulatedExponential {
    pub fn new(lambda_ec: f64, lambda: f64, a: f64, omega: f64, phi: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return domain(format!("decay constant must be positive, got {lambda}"));
        }
        if !(lambda_ec >= 0.0) || !a.is_finite() || !omega.is_finite() || !phi.is_finite() {
            return domain("modulated exponential parameters must be finite with lambda_ec >= 0");
        }
        Ok(Self {
            lambda_ec,
            lambda,
            a,
            omega,
            phi,
        })
    }

    /// Scale `λ_EC` so the density integrates to one on `[0, ∞)`.
    pub fn normalized(lambda: f64, a: f64, omega: f64, phi: f64) -> Result<Self> {
        let shape = Self::new(1.0, lambda, a, omega, phi)?;
        let m = shape.mass();
        if !(m > 0.0) {
            return domain("modulated exponential has no positive mass");
        }
        Self::new(1.0 / m, lambda, a, omega, phi)
    }

    fn resolvent(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phi) / Complex64::new(self.lambda, -self.omega)
    }

    /// `λ_EC [1/λ + a Re(e^{iφ}/(λ − iω))]`.
    pub fn mass(&self) -> f64 {
        self.lambda_ec * (1.0 / self.lambda + self.a * self.resolvent().re)
    }

    /// `λ_EC [1/λ² + a Re(e^{iφ}/(λ − iω)²)]`.
    pub fn first_moment(&self) -> f64 {
        let s = Complex64::new(self.lambda, -self.omega);
        let r = Complex64::from_polar(1.0, self.phi) / (s * s);
        self.lambda_ec * (1.0 / (self.lambda * self.lambda) + self.a * r.re)
    }

    /// `∫_{t0}^{t1}` in closed form.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        let e0 = ((-self.lambda * t0).exp() - (-self.lambda * t1).exp()) / self.lambda;
        let s = Complex64::new(-self.lambda, self.omega);
        let g = Complex64::from_polar(1.0, self.phi) * ((s * t1).exp() - (s * t0).exp()) / s;
        self.lambda_ec * (e0 + self.a * g.re)
    }
}

impl RateCurve for ModulatedExponential {
    fn density(&self, t: f64) -> f64 {
        self.lambda_ec * (-self.lambda * t).exp() * (1.0 + self.a * (self.omega * t + self.phi).cos())
    }
    fn tail(&self) -> TailClass {
        TailClass::Exponential { rate: self.lambda }
    }
    fn time_scale(&self) -> f64 {
        let osc = if self.omega != 0.0 { 1.0 / self.omega.abs() } else { f64::INFINITY };
        (1.0 / self.lambda).min(osc)
    }
    fn envelope(&self) -> Option<ExpEnvelope> {
        Some(ExpEnvelope {
            amplitude: (1.0 + self.a.abs()) * self.lambda_ec,
            rate: self.lambda,
        })
    }
    fn closed_form_mean(&self) -> Option<f64> {
        Some(self.first_moment() / self.mass())
    }
    fn describe(&self) -> String {
        format!(
            "modulated_exponential(lambda_ec={}, lambda={}, a={}, omega={}, phi={})",
            self.lambda_ec, self.lambda, self.a, self.omega, self.phi
        )
    }
}

/// `|φ(t)|²` of two interfering Gamow states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoResonanceDensity {
    pub params: InterferenceRateParams,
}

impl TwoResonanceDensity {
    pub fn mass(&self) -> f64 {
        let p = &self.params;
        let mean_width = 0.5 * (p.gamma1 + p.gamma2);
        let cross = Complex64::from_polar(1.0, p.delta) / Complex64::new(mean_width, -p.delta_e);
        p.m1 * p.m1 / p.gamma1 + p.m2 * p.m2 / p.gamma2 + 2.0 * p.m1 * p.m2 * cross.re
    }
}

impl RateCurve for TwoResonanceDensity {
    fn density(&self, t: f64) -> f64 {
        self.params.density(t)
    }
    fn tail(&self) -> TailClass {
        TailClass::Exponential {
            rate: self.params.gamma1.min(self.params.gamma2),
        }
    }
    fn time_scale(&self) -> f64 {
        let p = &self.params;
        let osc = if p.delta_e != 0.0 { 1.0 / p.delta_e.abs() } else { f64::INFINITY };
        (1.0 / p.gamma1.max(p.gamma2)).min(osc)
    }
    fn envelope(&self) -> Option<ExpEnvelope> {
        let p = &self.params;
        Some(ExpEnvelope {
            amplitude: (p.m1 + p.m2).powi(2),
            rate: p.gamma1.min(p.gamma2),
        })
    }
    fn describe(&self) -> String {
        let p = &self.params;
        format!(
            "two_resonance(m1={}, m2={}, gamma1={}, gamma2={}, delta_e={}, delta={})",
            p.m1, p.m2, p.gamma1, p.gamma2, p.delta_e, p.delta
        )
    }
}

/// `α / (π(α² + t²))` restricted to `t ≥ 0`; half of the mass sits at `t < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianTimeRep {
    pub example: AppendixExample,
}

impl RateCurve for LorentzianTimeRep {
    fn density(&self, t: f64) -> f64 {
        self.example.timerep_rate(t)
    }
    fn tail(&self) -> TailClass {
        TailClass::PowerLaw { exponent: 2.0 }
    }
    fn time_scale(&self) -> f64 {
        self.example.alpha()
    }
    fn declared_mass(&self) -> f64 {
        0.5
    }
    fn describe(&self) -> String {
        format!("lorentzian_timerep(alpha={})", self.example.alpha())
    }
}

/// `-dp_s/dτ = 8α²τ / (4α² + τ²)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalDecay {
    pub example: AppendixExample,
}

impl RateCurve for SurvivalDecay {
    fn density(&self, t: f64) -> f64 {
        -self.example.survival_derivative(t)
    }
    fn tail(&self) -> TailClass {
        TailClass::PowerLaw { exponent: 3.0 }
    }
    fn time_scale(&self) -> f64 {
        self.example.alpha()
    }
    fn closed_form_mean(&self) -> Option<f64> {
        // ∫ 8α²τ²/(4α²+τ²)² dτ = πα
        Some(PI * self.example.alpha())
    }
    fn describe(&self) -> String {
        format!("survival_decay(alpha={})", self.example.alpha())
    }
}

/// `-dp_s/dτ` of a two-state superposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSuperposition {
    pub params: SurvivalModelParams,
}

impl RateCurve for SurvivalSuperposition {
    fn density(&self, t: f64) -> f64 {
        self.params.rate(t)
    }
    fn tail(&self) -> TailClass {
        TailClass::Exponential { rate: self.params.gamma }
    }
    fn time_scale(&self) -> f64 {
        let p = &self.params;
        let osc = if p.delta_e != 0.0 { 1.0 / p.delta_e.abs() } else { f64::INFINITY };
        (1.0 / p.gamma).min(osc)
    }
    fn declared_mass(&self) -> f64 {
        // p_s(0) − p_s(∞)
        self.params.survival_probability(0.0)
    }
    fn envelope(&self) -> Option<ExpEnvelope> {
        let p = &self.params;
        let (w1, w2) = (p.b1.norm_sqr(), p.b2.norm_sqr());
        Some(ExpEnvelope {
            amplitude: p.gamma * (w1 * w1 + w2 * w2) * (1.0 + p.mixing_factor() * p.amplitude_factor()),
            rate: p.gamma,
        })
    }
    fn describe(&self) -> String {
        let p = &self.params;
        format!(
            "survival_superposition(|b1|^2={}, |b2|^2={}, gamma={}, delta_e={})",
            p.b1.norm_sqr(),
            p.b2.norm_sqr(),
            p.gamma,
            p.delta_e
        )
    }
}

/// `-dP_QB/dτ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumBeatDecay {
    pub params: QuantumBeatParams,
}

impl RateCurve for QuantumBeatDecay {
    fn density(&self, t: f64) -> f64 {
        self.params.rate(t)
    }
    fn tail(&self) -> TailClass {
        TailClass::Exponential { rate: self.params.gamma }
    }
    fn time_scale(&self) -> f64 {
        let p = &self.params;
        let osc = if p.delta_e != 0.0 { 1.0 / p.delta_e.abs() } else { f64::INFINITY };
        (1.0 / p.gamma).min(osc)
    }
    fn declared_mass(&self) -> f64 {
        self.params.transition_probability(0.0)
    }
    fn envelope(&self) -> Option<ExpEnvelope> {
        let p = &self.params;
        Some(ExpEnvelope {
            amplitude: p.p_bar * p.gamma * (1.0 + p.beat().0),
            rate: p.gamma,
        })
    }
    fn describe(&self) -> String {
        let p = &self.params;
        format!(
            "quantum_beat(p_bar={}, b={}, delta={}, gamma={}, delta_e={})",
            p.p_bar, p.b, p.delta, p.gamma, p.delta_e
        )
    }
}
