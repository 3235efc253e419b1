//! Closed-form time representation of a single Gamow state.

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::model::Resonance;

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!(
            "time must be finite and nonnegative, got {t}; Gamow amplitudes are defined for t >= 0 only"
        ));
    }
    Ok(())
}

/// `u(t) = c e^{-i z t}` with `c = i |N| e^{-iδ}`, for `t ≥ 0` (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GamowTimeAmplitude {
    pub resonance: Resonance,
}

impl GamowTimeAmplitude {
    pub fn new(resonance: Resonance) -> Self {
        Self { resonance }
    }

    pub fn at(&self, t: f64) -> Result<Complex64> {
        gamow_amplitude(&self.resonance, t)
    }

    /// `|u(t)|² = |N|² e^{-Γt}`.
    pub fn density(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let r = &self.resonance;
        Ok(r.norm_mag * r.norm_mag * (-r.gamma * t).exp())
    }
}

pub fn gamow_amplitude(r: &Resonance, t: f64) -> Result<Complex64> {
    check_time(t)?;
    Ok(r.coefficient() * (-Complex64::i() * r.pole() * t).exp())
}

/// `(n0/τ) e^{-t/τ}` for `n0` copies of a lone resonance (`|N|² = Γ`).
pub fn gamow_rate(r: &Resonance, n0: u64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(n0 as f64 * r.gamma * (-r.gamma * t).exp())
}

/// `n0 e^{-Γt}`, the undecayed population.
pub fn surviving_count(r: &Resonance, n0: u64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(n0 as f64 * (-r.gamma * t).exp())
}

/// `R_P(τ) = -dP/dτ = Γ e^{-Γτ}` from the standard non-decay probability.
///
/// Equals [`GamowTimeAmplitude::density`] only when `|N|² = Γ`.
pub fn standard_rate(r: &Resonance, tau: f64) -> Result<f64> {
    check_time(tau)?;
    Ok(r.gamma * (-r.gamma * tau).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn amplitude_examples() {
        let r = Resonance::new(7.3, 1.0, 1.0, 0.0).unwrap();
        let u = gamow_amplitude(&r, 0.0).unwrap();
        assert_relative_eq!(u.re, 0.0);
        assert_relative_eq!(u.im, 1.0);
        let u = gamow_amplitude(&r, 2.0).unwrap();
        assert_relative_eq!(u.norm(), (-1.0f64).exp(), max_relative = 1e-15);
        let r = Resonance::new(1.0, 0.5, 0.5f64.sqrt(), 0.0).unwrap();
        let u = gamow_amplitude(&r, 1.0).unwrap();
        assert_relative_eq!(u.norm_sqr(), 0.5 * (-0.5f64).exp(), max_relative = 1e-14);
        assert!(gamow_amplitude(&r, -1.0).is_err());
    }

    #[test]
    fn rate_examples() {
        let r = Resonance::single(0.0, 0.5).unwrap();
        assert_eq!(gamow_rate(&r, 1, 0.0).unwrap(), 0.5);
        let r = Resonance::single(0.0, 1.0).unwrap();
        assert_relative_eq!(gamow_rate(&r, 1000, 2f64.ln()).unwrap(), 500.0, max_relative = 1e-14);
        assert!(gamow_rate(&r, 1, -0.1).is_err());
    }

    #[test]
    fn surviving_examples() {
        let r = Resonance::single(0.0, 1.0).unwrap();
        assert_eq!(surviving_count(&r, 100, 0.0).unwrap(), 100.0);
        assert_relative_eq!(surviving_count(&r, 100, 2f64.ln()).unwrap(), 50.0, max_relative = 1e-14);
        let r = Resonance::single(0.0, 0.2).unwrap();
        assert_relative_eq!(surviving_count(&r, 1, 5.0).unwrap(), (-1.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn phase_of_norm_does_not_change_rate() {
        let a = Resonance::new(2.0, 0.3, 0.7, 0.0).unwrap();
        let b = Resonance::new(2.0, 0.3, 0.7, 1.1).unwrap();
        let ua = gamow_amplitude(&a, 1.7).unwrap();
        let ub = gamow_amplitude(&b, 1.7).unwrap();
        assert_relative_eq!(ua.norm(), ub.norm(), max_relative = 1e-15);
        assert!((ua - ub).norm() > 1e-3);
    }

    #[test]
    fn energy_only_enters_the_phase() {
        let a = GamowTimeAmplitude::new(Resonance::new(0.0, 0.4, 1.0, 0.0).unwrap());
        let b = GamowTimeAmplitude::new(Resonance::new(9.0, 0.4, 1.0, 0.0).unwrap());
        for t in [0.0, 0.5, 3.0] {
            assert_relative_eq!(a.density(t).unwrap(), b.density(t).unwrap(), max_relative = 1e-15);
        }
    }
}
