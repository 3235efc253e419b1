//! Time of flight and spread of the decay-time distribution.

use serde::{Deserialize, Serialize};

use crate::density::{integrate_half_line, RateCurve};
use crate::error::{domain, DecayError, Result};
use crate::events::EventSet;
use crate::model::{Resonance, UnitsContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinedFlags {
    pub mean: bool,
    pub variance: bool,
}

/// First two moments of a single-particle density on `t ≥ 0`.
///
/// `mean` and `variance` are `None` when the tail makes them diverge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub mass: f64,
    pub defined: DefinedFlags,
}

impl MomentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Rescale times from ħ = 1 units.
    pub fn in_units(&self, units: &UnitsContext) -> Self {
        let s = units.time_from_internal(1.0);
        Self {
            mean: self.mean.map(|m| m * s),
            variance: self.variance.map(|v| v * s * s),
            ..*self
        }
    }
}

fn moment(curve: &dyn RateCurve, k: i32, tol: f64) -> Result<f64> {
    let q = integrate_half_line(
        &|t| t.powi(k) * curve.density(t),
        curve.tail(),
        curve.time_scale(),
        tol,
    );
    if !q.converged {
        return Err(DecayError::NonConvergence {
            worst_point: f64::NAN,
            worst_error: q.error,
            tolerance: tol,
        });
    }
    Ok(q.value)
}

/// `⟨t⟩` and `⟨(t − ⟨t⟩)²⟩` of `curve`, which must integrate to one within `tol`.
pub fn time_of_flight(curve: &dyn RateCurve, tol: f64) -> Result<MomentReport> {
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let tail = curve.tail();
    let defined = DefinedFlags {
        mean: tail.moment_exists(1),
        variance: tail.moment_exists(2),
    };
    let quad_tol = 1e-3 * tol;
    let mass = moment(curve, 0, quad_tol)?;
    if !defined.mean {
        return Ok(MomentReport {
            mean: None,
            variance: None,
            mass,
            defined,
        });
    }
    if (mass - 1.0).abs() > tol.max(1e-10) {
        return domain(format!(
            "time of flight needs a normalized density; {} integrates to {mass}",
            curve.describe()
        ));
    }
    let first = moment(curve, 1, quad_tol)? / mass;
    let variance = if defined.variance {
        Some((moment(curve, 2, quad_tol)? / mass - first * first).max(0.0))
    } else {
        None
    };
    Ok(MomentReport {
        mean: Some(first),
        variance,
        mass,
        defined,
    })
}

/// `ħ/Γ`, the time of flight of a lone resonance.
pub fn gamow_time_of_flight(r: &Resonance, units: &UnitsContext) -> f64 {
    units.hbar / r.gamma
}

/// Mean of the recorded timestamps.
pub fn empirical_time_of_flight(e: &EventSet) -> Result<f64> {
    if e.times.is_empty() {
        return domain("empirical time of flight needs at least one event");
    }
    Ok(e.times.iter().sum::<f64>() / e.times.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{ExponentialDecay, LorentzianTimeRep};
    use crate::survival::AppendixExample;

    #[test]
    fn gamow_lifetime() {
        let r = time_of_flight(&ExponentialDecay::new(0.5).unwrap(), 1e-10).unwrap();
        assert!((r.mean.unwrap() - 2.0).abs() < 1e-9);
        assert!((r.variance.unwrap() - 4.0).abs() < 1e-8);
        let res = Resonance::single(3.0, 0.5).unwrap();
        assert_eq!(gamow_time_of_flight(&res, &UnitsContext::default()), 2.0);
    }

    #[test]
    fn lorentzian_mean_is_undefined() {
        let l = LorentzianTimeRep {
            example: AppendixExample::new(1.0).unwrap(),
        };
        let r = time_of_flight(&l, 1e-8).unwrap();
        assert!(r.mean.is_none() && !r.defined.mean && !r.defined.variance);
        let json = r.to_json().unwrap();
        assert!(json.contains("\"mean\": null"));
    }

    #[test]
    fn empirical_means() {
        let e = EventSet::from_times(vec![1.0, 3.0], 2, 10.0).unwrap();
        assert_eq!(empirical_time_of_flight(&e).unwrap(), 2.0);
        let e = EventSet::from_times(vec![], 2, 10.0).unwrap();
        assert!(empirical_time_of_flight(&e).is_err());
        let e = EventSet::from_times(vec![2.5], 1, 10.0).unwrap();
        assert_eq!(empirical_time_of_flight(&e).unwrap(), 2.5);
    }
}
