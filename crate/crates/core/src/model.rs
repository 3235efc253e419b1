//! Shared domain types: units, resonances, mixed states, run configuration
//! and tabulated time series.
//!
//! All library formulas work in natural units with ħ = 1, so a time `t`
//! handed to a physics routine is measured in inverse energy units. A
//! [`UnitsContext`] converts at the I/O boundary.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, DecayError, Result};

/// Unit conventions for a run. Times carry units of `hbar / energy_unit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitsContext {
    pub hbar: f64,
    pub energy_unit: String,
    pub time_unit: String,
}

impl Default for UnitsContext {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            energy_unit: "E".into(),
            time_unit: "hbar/E".into(),
        }
    }
}

impl UnitsContext {
    pub fn with_hbar(hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return domain(format!("hbar must be positive and finite, got {hbar}"));
        }
        Ok(Self {
            hbar,
            ..Self::default()
        })
    }

    /// External time to the internal (ħ = 1) time variable.
    pub fn time_to_internal(&self, t: f64) -> f64 {
        t / self.hbar
    }

    pub fn time_from_internal(&self, s: f64) -> f64 {
        s * self.hbar
    }

    /// Internal rate (per unit internal time) to a rate per external time.
    pub fn rate_from_internal(&self, r: f64) -> f64 {
        r / self.hbar
    }

    pub fn rate_to_internal(&self, r: f64) -> f64 {
        r * self.hbar
    }

    /// Amplitudes carry 1/sqrt(time).
    pub fn amplitude_from_internal(&self, a: Complex64) -> Complex64 {
        a / self.hbar.sqrt()
    }
}

/// A resonance pole `z = e_r - i gamma/2` with its normalization `|N| e^{-i phase}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub e_r: f64,
    pub gamma: f64,
    pub norm_mag: f64,
    pub norm_phase: f64,
}

impl Resonance {
    pub fn new(e_r: f64, gamma: f64, norm_mag: f64, norm_phase: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return domain(format!("resonance width must be positive and finite, got gamma={gamma}"));
        }
        if !(norm_mag >= 0.0 && norm_mag.is_finite()) {
            return domain(format!("norm_mag must be nonnegative, got {norm_mag}"));
        }
        if !e_r.is_finite() || !norm_phase.is_finite() {
            return domain("e_r and norm_phase must be finite");
        }
        Ok(Self {
            e_r,
            gamma,
            norm_mag,
            norm_phase,
        })
    }

    /// Lone-pole resonance: `|N|^2 = gamma`, zero phase.
    pub fn single(e_r: f64, gamma: f64) -> Result<Self> {
        let n = single_resonance_norm(gamma)?;
        Self::new(e_r, gamma, n, 0.0)
    }

    pub fn pole(&self) -> Complex64 {
        Complex64::new(self.e_r, -0.5 * self.gamma)
    }

    /// The Gamow coefficient `c = i |N| e^{-i phase}` (ħ = 1).
    pub fn coefficient(&self) -> Complex64 {
        Complex64::i() * Complex64::from_polar(self.norm_mag, -self.norm_phase)
    }

    /// Lifetime in internal time units (ħ = 1).
    pub fn lifetime_internal(&self) -> f64 {
        1.0 / self.gamma
    }
}

/// `hbar / gamma` in the time units of `u`.
pub fn lifetime(r: &Resonance, u: &UnitsContext) -> f64 {
    u.hbar / r.gamma
}

/// `|N| = sqrt(gamma)`, the residue rule for an S matrix with one pole.
pub fn single_resonance_norm(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return domain(format!("width must be positive, got {gamma}"));
    }
    Ok(gamma.sqrt())
}

/// Reduce a phase to (-π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// One Gamow component of a mixed state with mixing `b = |b| e^{-i b_phase}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub resonance: Resonance,
    pub b_mag: f64,
    pub b_phase: f64,
}

impl Component {
    pub fn mixing(&self) -> Complex64 {
        Complex64::from_polar(self.b_mag, -self.b_phase)
    }

    /// `|b| |c|` (ħ = 1).
    pub fn modulus(&self) -> f64 {
        self.b_mag * self.resonance.norm_mag
    }
}

/// A superposition of one or two Gamow states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedState {
    components: Vec<Component>,
}

impl MixedState {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() || components.len() > 2 {
            return domain(format!(
                "a mixed state holds one or two components, got {}",
                components.len()
            ));
        }
        for c in &components {
            if !(c.b_mag >= 0.0 && c.b_mag.is_finite()) || !c.b_phase.is_finite() {
                return domain(format!("b_mag must be nonnegative and finite, got {}", c.b_mag));
            }
            Resonance::new(
                c.resonance.e_r,
                c.resonance.gamma,
                c.resonance.norm_mag,
                c.resonance.norm_phase,
            )?;
        }
        Ok(Self { components })
    }

    pub fn pair(first: Component, second: Component) -> Result<Self> {
        Self::new(vec![first, second])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// `δ = δ₁ − δ₂ + δ'₁ − δ'₂`, wrapped to (-π, π]. Zero for one component.
    pub fn composite_phase(&self) -> f64 {
        match self.components.as_slice() {
            [a, b] => wrap_phase(
                a.resonance.norm_phase - b.resonance.norm_phase + a.b_phase - b.b_phase,
            ),
            _ => 0.0,
        }
    }

    /// `Σ b_i c_i e^{-i z_i t}` at internal time `t`.
    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.components
            .iter()
            .map(|c| {
                c.mixing()
                    * c.resonance.coefficient()
                    * (-Complex64::i() * c.resonance.pole() * t).exp()
            })
            .sum()
    }
}

/// Initial population, units and RNG seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n0: u64,
    pub units: UnitsContext,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(n0: u64, units: UnitsContext, seed: u64) -> Result<Self> {
        if n0 == 0 {
            return domain("n0 must be at least 1");
        }
        Ok(Self { n0, units, seed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Rate,
    Probability,
    AmplitudeSq,
    Counts,
}

/// Tabulated `(t, value)` pairs with strictly increasing `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    points: Vec<(f64, f64)>,
    kind: ValueKind,
}

impl TimeSeries {
    pub fn new(points: Vec<(f64, f64)>, kind: ValueKind) -> Result<Self> {
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return domain(format!(
                    "time series abscissae must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                ));
            }
        }
        // a few ulps of slack for values computed through cancellation
        let slack = 1e-12;
        for &(t, v) in &points {
            let ok = match kind {
                ValueKind::Rate | ValueKind::AmplitudeSq => v >= -slack * (1.0 + v.abs()),
                ValueKind::Probability => (-slack..=1.0 + slack).contains(&v),
                ValueKind::Counts => v >= 0.0,
            };
            if !ok || !t.is_finite() || v.is_nan() {
                return domain(format!("value {v} at t={t} is invalid for a {kind:?} series"));
            }
        }
        Ok(Self { points, kind })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Uniform grid `0, dt, 2dt, ...` up to and including `t_max` (within rounding).
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return domain(format!("dt must be positive, got {dt}"));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return domain(format!("t_max must be nonnegative, got {t_max}"));
    }
    let n = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| k as f64 * dt).collect())
}

// ---------------------------------------------------------------------------
// JSON ingestion

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub e_r: f64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_mag: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_mag: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_phase: Option<f64>,
}

/// Run configuration file. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub components: Vec<ComponentSpec>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| DecayError::Parse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_json(&text)
    }

    /// Resolve the component list into a [`MixedState`].
    ///
    /// `norm_mag` defaults to `sqrt(gamma)` only for a lone resonance; two
    /// components must state their normalizations explicitly.
    pub fn mixed_state(&self) -> Result<MixedState> {
        let lone = self.components.len() == 1;
        let comps = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let norm_mag = match (c.norm_mag, lone) {
                    (Some(n), _) => n,
                    (None, true) => single_resonance_norm(c.gamma)?,
                    (None, false) => {
                        return domain(format!(
                            "component {i}: norm_mag is required when two resonances are present"
                        ))
                    }
                };
                let resonance =
                    Resonance::new(c.e_r, c.gamma, norm_mag, c.norm_phase.unwrap_or(0.0))?;
                Ok(Component {
                    resonance,
                    b_mag: c.b_mag.unwrap_or(1.0),
                    b_phase: c.b_phase.unwrap_or(0.0),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MixedState::new(comps)
    }

    pub fn units(&self) -> Result<UnitsContext> {
        UnitsContext::with_hbar(self.hbar.unwrap_or(1.0))
    }
}
