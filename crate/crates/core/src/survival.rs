//! Competing rate laws: the survival probability of a two-state superposition,
//! the quantum-beat transition probability, the standard non-decay law, and
//! the closed-form exponential-wave-function example that separates them.

use serde::{Deserialize, Serialize};
use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::gamow::check_time;
use crate::model::Resonance;

pub use crate::spectral::{survival_amplitude, survival_amplitude_derivative};

/// `A e^{-iψ} = 1 + i ratio`, with `ψ` from a two-argument arctangent.
pub fn polar_shift(ratio: f64) -> (f64, f64) {
    (1.0f64.hypot(ratio), -ratio.atan2(1.0))
}

/// Two equal-width Gamow states with orthonormal kets, `|φ⟩ = b₁|z₁⟩ + b₂|z₂⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalModelParams {
    pub b1: Complex64,
    pub b2: Complex64,
    pub gamma: f64,
    pub delta_e: f64,
}

impl SurvivalModelParams {
    pub fn new(b1: Complex64, b2: Complex64, gamma: f64, delta_e: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return domain(format!("width must be positive, got {gamma}"));
        }
        if !delta_e.is_finite() {
            return domain("energy splitting must be finite");
        }
        Ok(Self {
            b1,
            b2,
            gamma,
            delta_e,
        })
    }

    pub fn amplitude_factor(&self) -> f64 {
        polar_shift(self.delta_e / self.gamma).0
    }

    pub fn phase_shift(&self) -> f64 {
        polar_shift(self.delta_e / self.gamma).1
    }

    fn weights(&self) -> (f64, f64) {
        (self.b1.norm_sqr(), self.b2.norm_sqr())
    }

    /// `2|b₁|²|b₂|² / (|b₁|⁴ + |b₂|⁴)`.
    pub fn mixing_factor(&self) -> f64 {
        let (w1, w2) = self.weights();
        let d = w1 * w1 + w2 * w2;
        if d == 0.0 {
            0.0
        } else {
            2.0 * w1 * w2 / d
        }
    }

    /// `p_s(τ) = |b₁|⁴e^{-Γτ} + |b₂|⁴e^{-Γτ} + 2|b₁|²|b₂|²e^{-Γτ}cos(ΔEτ)`.
    pub fn survival_probability(&self, tau: f64) -> f64 {
        let (w1, w2) = self.weights();
        let e = (-self.gamma * tau).exp();
        e * (w1 * w1 + w2 * w2 + 2.0 * w1 * w2 * (self.delta_e * tau).cos())
    }

    /// Per-particle `-dp_s/dτ` in the cosine-plus-sine form.
    pub fn rate_expanded(&self, tau: f64) -> f64 {
        let (w1, w2) = self.weights();
        let x = self.delta_e * tau;
        let s = w1 * w1 + w2 * w2;
        self.gamma
            * (-self.gamma * tau).exp()
            * s
            * (1.0 + self.mixing_factor() * (x.cos() + self.delta_e / self.gamma * x.sin()))
    }

    /// Per-particle `-dp_s/dτ` in the shifted-cosine form.
    pub fn rate(&self, tau: f64) -> f64 {
        let (w1, w2) = self.weights();
        let (amp, psi) = polar_shift(self.delta_e / self.gamma);
        self.gamma
            * (-self.gamma * tau).exp()
            * (w1 * w1 + w2 * w2)
            * (1.0 + self.mixing_factor() * amp * (self.delta_e * tau + psi).cos())
    }
}

pub fn survival_superposition_rate(p: &SurvivalModelParams, n0: u64, tau: f64) -> Result<f64> {
    check_time(tau)?;
    Ok(n0 as f64 * p.rate(tau))
}

/// `P_QB(τ) = P̄ e^{-Γτ}[1 + b cos(ΔEτ + δ)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumBeatParams {
    pub p_bar: f64,
    pub b: f64,
    pub delta: f64,
    pub gamma: f64,
    pub delta_e: f64,
}

impl QuantumBeatParams {
    pub fn new(p_bar: f64, b: f64, delta: f64, gamma: f64, delta_e: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&b) {
            return domain(format!("beat modulation b must lie in [0, 1], got {b}"));
        }
        if !(p_bar >= 0.0 && p_bar.is_finite()) {
            return domain(format!("P̄ must be nonnegative, got {p_bar}"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return domain(format!("width must be positive, got {gamma}"));
        }
        Ok(Self {
            p_bar,
            b,
            delta,
            gamma,
            delta_e,
        })
    }

    /// `(B, ψ)` with `B e^{-iψ} = b + i b ΔE/Γ`.
    pub fn beat(&self) -> (f64, f64) {
        let (amp, psi) = polar_shift(self.delta_e / self.gamma);
        (self.b * amp, psi)
    }

    pub fn transition_probability(&self, tau: f64) -> f64 {
        self.p_bar * (-self.gamma * tau).exp() * (1.0 + self.b * (self.delta_e * tau + self.delta).cos())
    }

    /// Per-particle rate in the cosine-plus-sine form.
    pub fn rate_expanded(&self, tau: f64) -> f64 {
        let x = self.delta_e * tau + self.delta;
        self.p_bar
            * (-self.gamma * tau).exp()
            * (self.gamma * (1.0 + self.b * x.cos()) + self.b * self.delta_e * x.sin())
    }

    /// Per-particle rate `P̄ Γ e^{-Γτ}[1 + B cos(ΔEτ + δ + ψ)]`.
    pub fn rate(&self, tau: f64) -> f64 {
        let (big_b, psi) = self.beat();
        self.p_bar
            * self.gamma
            * (-self.gamma * tau).exp()
            * (1.0 + big_b * (self.delta_e * tau + self.delta + psi).cos())
    }
}

pub fn quantum_beat_rate(q: &QuantumBeatParams, n0: u64, tau: f64) -> Result<f64> {
    check_time(tau)?;
    Ok(n0 as f64 * q.rate(tau))
}

/// `P(τ) = e^{-Γτ}`.
pub fn standard_nondecay(r: &Resonance, tau: f64) -> Result<f64> {
    check_time(tau)?;
    Ok((-r.gamma * tau).exp())
}

/// The wave function `φ(E) = sqrt(2α) e^{-αE}` (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixExample {
    alpha: f64,
}

impl AppendixExample {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return domain(format!("alpha must be positive, got {alpha}"));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `α / (π(α² + t²))`.
    pub fn timerep_rate(&self, t: f64) -> f64 {
        let a = self.alpha;
        a / (std::f64::consts::PI * (a * a + t * t))
    }

    /// `4α² / (4α² + τ²)`.
    pub fn survival_probability(&self, tau: f64) -> f64 {
        let a2 = 4.0 * self.alpha * self.alpha;
        a2 / (a2 + tau * tau)
    }

    /// `dp_s/dτ = -8α²τ / (4α² + τ²)²`.
    pub fn survival_derivative(&self, tau: f64) -> f64 {
        let a2 = 4.0 * self.alpha * self.alpha;
        let d = a2 + tau * tau;
        -2.0 * a2 * tau / (d * d)
    }
}

/// `(α/(π(α²+t²)), 4α²/(4α²+t²), −8α²t/(4α²+t²)²)`.
pub fn appendix_pair(a: &AppendixExample, t: f64) -> Result<(f64, f64, f64)> {
    check_time(t)?;
    Ok((
        a.timerep_rate(t),
        a.survival_probability(t),
        a.survival_derivative(t),
    ))
}
