//! Decay rates of two interfering Gamow states: the general form, the
//! equal-width reduction that matches the modulated-exponential fit law,
//! and the neutral-kaon beams.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gamow::check_time;
use crate::model::{wrap_phase, MixedState, Resonance};

/// Relative tolerance for treating two widths as equal.
pub const EQUAL_WIDTH_RTOL: f64 = 1e-12;

/// Moduli `m_i = |b_i||c_i|`, widths, splitting `ΔE = E₁ − E₂` and phase `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceRateParams {
    pub m1: f64,
    pub m2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub delta_e: f64,
    pub delta: f64,
}

impl InterferenceRateParams {
    pub fn from_state(state: &MixedState) -> Result<Self> {
        let [a, b] = state.components() else {
            return domain(format!(
                "interference needs exactly two components, got {}",
                state.len()
            ));
        };
        Ok(Self {
            m1: a.modulus(),
            m2: b.modulus(),
            gamma1: a.resonance.gamma,
            gamma2: b.resonance.gamma,
            delta_e: a.resonance.e_r - b.resonance.e_r,
            delta: state.composite_phase(),
        })
    }

    /// Single-particle rate `|φ(t)|²` (ħ = 1).
    pub fn density(&self, t: f64) -> f64 {
        let Self {
            m1,
            m2,
            gamma1,
            gamma2,
            delta_e,
            delta,
        } = *self;
        m1 * m1 * (-gamma1 * t).exp()
            + m2 * m2 * (-gamma2 * t).exp()
            + 2.0 * m1 * m2 * (-0.5 * (gamma1 + gamma2) * t).exp() * (delta_e * t + delta).cos()
    }

    pub fn equal_widths(&self) -> bool {
        (self.gamma1 - self.gamma2).abs() <= EQUAL_WIDTH_RTOL * self.gamma1.max(self.gamma2)
    }
}

/// `n0 [m₁²e^{-Γ₁t} + m₂²e^{-Γ₂t} + 2m₁m₂e^{-(Γ₁+Γ₂)t/2} cos(ΔE t + δ)]`.
pub fn interference_rate(state: &MixedState, n0: u64, t: f64) -> Result<f64> {
    check_time(t)?;
    let p = InterferenceRateParams::from_state(state)?;
    Ok(n0 as f64 * p.density(t))
}

/// Identification of the equal-width rate with
/// `n0 λ_EC e^{-λt} (1 + a cos(ωt + φ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GsiMapping {
    pub lambda: f64,
    pub lambda_ec: f64,
    pub omega: f64,
    pub phi: f64,
    pub a: f64,
}

impl GsiMapping {
    pub fn from_state(state: &MixedState) -> Result<Self> {
        let p = InterferenceRateParams::from_state(state)?;
        if !p.equal_widths() {
            return domain(format!(
                "widths {} and {} differ; the modulated-exponential reduction needs equal widths, use interference_rate",
                p.gamma1, p.gamma2
            ));
        }
        let lambda_ec = p.m1 * p.m1 + p.m2 * p.m2;
        let a = if lambda_ec > 0.0 {
            modulation_amplitude(p.m1, p.m2)
        } else {
            0.0
        };
        Ok(Self {
            lambda: p.gamma1,
            lambda_ec,
            omega: p.delta_e,
            phi: wrap_phase(p.delta),
            a,
        })
    }

    /// Per-particle rate.
    pub fn density(&self, t: f64) -> f64 {
        self.lambda_ec * (-self.lambda * t).exp() * (1.0 + self.a * (self.omega * t + self.phi).cos())
    }
}

/// Equal-width rate `n0 e^{-Γt}(m₁²+m₂²)[1 + a cos(ΔE t + δ)]`.
pub fn gsi_rate(state: &MixedState, n0: u64, t: f64) -> Result<f64> {
    check_time(t)?;
    let m = GsiMapping::from_state(state)?;
    Ok(n0 as f64 * m.density(t))
}

/// `a = 2 m₁ m₂ / (m₁² + m₂²)`.
pub fn modulation_amplitude(m1: f64, m2: f64) -> f64 {
    2.0 * m1 * m2 / (m1 * m1 + m2 * m2)
}

/// The ratio `m₂/m₁ ≤ 1` that produces modulation amplitude `a ∈ [0, 1]`.
pub fn mixing_ratio_for_amplitude(a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return domain(format!("modulation amplitude must lie in [0, 1], got {a}"));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - (1.0 - a * a).sqrt()) / a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Beam {
    K0,
    K0bar,
}

/// Short- and long-lived neutral-kaon Gamow states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KaonSystem {
    short: Resonance,
    long: Resonance,
}

impl KaonSystem {
    pub fn new(short: Resonance, long: Resonance) -> Result<Self> {
        if !(short.gamma > long.gamma && long.gamma > 0.0) {
            return domain(format!(
                "kaon widths must satisfy gamma_S > gamma_L > 0, got {} and {}",
                short.gamma, long.gamma
            ));
        }
        Ok(Self { short, long })
    }

    pub fn short(&self) -> &Resonance {
        &self.short
    }

    pub fn long(&self) -> &Resonance {
        &self.long
    }

    /// `(c_S e^{-i z_S t} ± c_L e^{-i z_L t}) / √2`.
    pub fn amplitude(&self, t: f64, beam: Beam) -> Complex64 {
        let s = self.short.coefficient() * (-Complex64::i() * self.short.pole() * t).exp();
        let l = self.long.coefficient() * (-Complex64::i() * self.long.pole() * t).exp();
        let sign = match beam {
            Beam::K0 => 1.0,
            Beam::K0bar => -1.0,
        };
        (s + l * sign) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// `(n0/2)[|c_S|²e^{-Γ_S t} + |c_L|²e^{-Γ_L t} ± 2|c_S||c_L|e^{-(Γ_S+Γ_L)t/2}cos(ΔE t + δ)]`.
pub fn kaon_rates(k: &KaonSystem, n0: u64, t: f64, beam: Beam) -> Result<f64> {
    check_time(t)?;
    let (s, l) = (&k.short, &k.long);
    let cs = s.norm_mag;
    let cl = l.norm_mag;
    let delta = wrap_phase(s.norm_phase - l.norm_phase);
    let de = s.e_r - l.e_r;
    let sign = match beam {
        Beam::K0 => 1.0,
        Beam::K0bar => -1.0,
    };
    let cross = 2.0 * cs * cl * (-0.5 * (s.gamma + l.gamma) * t).exp() * (de * t + delta).cos();
    Ok(0.5
        * n0 as f64
        * (cs * cs * (-s.gamma * t).exp() + cl * cl * (-l.gamma * t).exp() + sign * cross))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Component;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn state(m1: f64, m2: f64, g1: f64, g2: f64, de: f64, delta: f64) -> MixedState {
        let r1 = Resonance::new(de, g1, m1, delta).unwrap();
        let r2 = Resonance::new(0.0, g2, m2, 0.0).unwrap();
        MixedState::pair(
            Component { resonance: r1, b_mag: 1.0, b_phase: 0.0 },
            Component { resonance: r2, b_mag: 1.0, b_phase: 0.0 },
        )
        .unwrap()
    }

    #[test]
    fn complete_destructive_interference() {
        let m = FRAC_1_SQRT_2;
        let s = state(m, m, 1.0, 1.0, PI, 0.0);
        let r = interference_rate(&s, 1, 1.0).unwrap();
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn fully_constructive_at_origin() {
        let m = FRAC_1_SQRT_2;
        let s = state(m, m, 1.0, 1.0, 3.0, 0.0);
        assert_relative_eq!(interference_rate(&s, 1, 0.0).unwrap(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn unequal_widths_example() {
        // |φ(10)|² for Γ₁=1, Γ₂=0.1, ΔE=5, frozen from a 30-digit evaluation
        let s = state(1.0, 1.0, 1.0, 0.1, 5.0, 0.0);
        let r = interference_rate(&s, 1, 10.0).unwrap();
        assert_relative_eq!(r, 0.375812032309864149687786540449, max_relative = 1e-13);
    }

    #[test]
    fn needs_two_components() {
        let one = MixedState::new(vec![Component {
            resonance: Resonance::single(0.0, 1.0).unwrap(),
            b_mag: 1.0,
            b_phase: 0.0,
        }])
        .unwrap();
        assert!(interference_rate(&one, 1, 0.0).is_err());
    }

    #[test]
    fn gsi_amplitude_examples() {
        let s = state(0.3, 0.3, 1.0, 1.0, 1.0, 0.0);
        assert_relative_eq!(GsiMapping::from_state(&s).unwrap().a, 1.0);
        let s = state(3.0, 1.0, 1.0, 1.0, 1.0, 0.0);
        assert_relative_eq!(GsiMapping::from_state(&s).unwrap().a, 0.6, max_relative = 1e-15);
        let r = mixing_ratio_for_amplitude(0.20).unwrap();
        assert_relative_eq!(r, 0.1010205144336438, max_relative = 1e-12);
        assert_relative_eq!(modulation_amplitude(1.0, r), 0.20, max_relative = 1e-14);
        assert!(mixing_ratio_for_amplitude(1.2).is_err());
    }

    #[test]
    fn gsi_period_and_amplitude() {
        let ratio = mixing_ratio_for_amplitude(0.20).unwrap();
        let omega = 2.0 * PI / 7.0;
        let s = state(1.0, ratio, 0.05, 0.05, omega, 0.0);
        let m = GsiMapping::from_state(&s).unwrap();
        assert_relative_eq!(m.a, 0.20, max_relative = 1e-12);
        assert_relative_eq!(2.0 * PI / m.omega, 7.0, max_relative = 1e-14);
        assert_relative_eq!(m.lambda, 0.05);
    }

    #[test]
    fn gsi_rejects_unequal_widths() {
        let s = state(1.0, 1.0, 1.0, 1.0 + 1e-9, 1.0, 0.0);
        assert!(gsi_rate(&s, 1, 0.5).is_err());
        let s = state(1.0, 1.0, 1.0, 1.0 + 1e-13, 1.0, 0.0);
        assert!(gsi_rate(&s, 1, 0.5).is_ok());
    }

    #[test]
    fn kaon_beams() {
        let short = Resonance::new(0.47, 1.0, 1.0, 0.0).unwrap();
        let long = Resonance::new(0.0, 0.002, 0.002f64.sqrt(), 0.0).unwrap();
        let k = KaonSystem::new(short, long).unwrap();
        let r = kaon_rates(&k, 1, 5.0, Beam::K0).unwrap();
        // modulus squared of the K0 amplitude, 30-digit reference
        assert_relative_eq!(r, 0.00179226278150671593757122851216, max_relative = 1e-12);
        assert!(KaonSystem::new(long, short).is_err());
    }

    #[test]
    fn kaon_quadrature_phase_gives_equal_beams() {
        let short = Resonance::new(0.5, 1.0, 1.0, 0.0).unwrap();
        let long = Resonance::new(0.0, 0.01, 0.3, 0.0).unwrap();
        let k = KaonSystem::new(short, long).unwrap();
        let t = 0.5 * PI / 0.5;
        let a = kaon_rates(&k, 10, t, Beam::K0).unwrap();
        let b = kaon_rates(&k, 10, t, Beam::K0bar).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }
}
