//! Energy → time transform on the half line.
//!
//! `φ(t) = (2π)^{-1/2} ∫₀^∞ φ(E) e^{-iEt} dE` (ħ = 1) is evaluated by direct
//! quadrature: the energy axis is cut into panels no wider than a quarter
//! oscillation, each panel is integrated with adaptive Gauss–Kronrod, and
//! the part beyond a cutoff is added analytically from the declared tail.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, DecayError, Result};
use crate::model::{TimeSeries, ValueKind};
use crate::quad;

/// Hard cap on the number of energy panels per evaluation.
const PANEL_BUDGET: usize = 4_000_000;
const PANEL_MAX_INTERVALS: usize = 2000;

/// Asymptotic decay class of `|φ(E)|` beyond the tail start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tail", deny_unknown_fields)]
pub enum TailKind {
    /// `φ(E) ≈ φ(E₀) e^{-rate (E - E₀)}`
    #[serde(rename = "exp")]
    Exponential { rate: f64 },
    /// `φ(E) ≈ φ(E₀) (E/E₀)^{-exponent}`
    #[serde(rename = "power")]
    PowerLaw { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    /// Energy beyond which the tail law holds.
    pub start: f64,
    pub kind: TailKind,
}

impl TailModel {
    pub fn exponential(start: f64, rate: f64) -> Self {
        Self {
            start,
            kind: TailKind::Exponential { rate },
        }
    }

    pub fn power_law(start: f64, exponent: f64) -> Self {
        Self {
            start,
            kind: TailKind::PowerLaw { exponent },
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.start >= 0.0 && self.start.is_finite()) {
            return domain(format!("tail start must be a nonnegative energy, got {}", self.start));
        }
        match self.kind {
            TailKind::Exponential { rate } if !(rate > 0.0 && rate.is_finite()) => {
                domain(format!("exponential tail rate must be positive, got {rate}"))
            }
            TailKind::PowerLaw { exponent } if !(exponent > 0.5 && exponent.is_finite()) => domain(
                format!("power-law tail exponent {exponent} is not square integrable (needs > 1/2)"),
            ),
            TailKind::PowerLaw { .. } if self.start <= 0.0 => {
                domain("a power-law tail needs a positive start energy")
            }
            _ => Ok(()),
        }
    }

    /// Tail of `|φ|²`.
    fn squared(&self) -> Self {
        let kind = match self.kind {
            TailKind::Exponential { rate } => TailKind::Exponential { rate: 2.0 * rate },
            TailKind::PowerLaw { exponent } => TailKind::PowerLaw {
                exponent: 2.0 * exponent,
            },
        };
        Self { kind, ..*self }
    }

    /// Tail of `E |φ|²`.
    fn squared_times_energy(&self) -> Self {
        let kind = match self.kind {
            TailKind::Exponential { rate } => TailKind::Exponential { rate: 2.0 * rate },
            TailKind::PowerLaw { exponent } => TailKind::PowerLaw {
                exponent: 2.0 * exponent - 1.0,
            },
        };
        Self { kind, ..*self }
    }
}

type Eval = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Energy-representation wave function on `[0, ∞)`.
#[derive(Clone)]
pub struct EnergyWaveFunction {
    repr: Repr,
}

#[derive(Clone)]
enum Repr {
    ClosedForm {
        eval: Eval,
        tail: TailModel,
        knots: Vec<f64>,
    },
    Sampled(Sampled),
}

impl fmt::Debug for EnergyWaveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::ClosedForm { tail, knots, .. } => f
                .debug_struct("ClosedForm")
                .field("tail", tail)
                .field("knots", knots)
                .finish(),
            Repr::Sampled(s) => f
                .debug_struct("Sampled")
                .field("points", &s.energies.len())
                .field("tail", &s.tail)
                .finish(),
        }
    }
}

/// Piecewise cubic Hermite data with shape-preserving slopes on the real
/// and imaginary parts separately.
#[derive(Debug, Clone)]
struct Sampled {
    energies: Vec<f64>,
    values: Vec<Complex64>,
    slopes: Vec<Complex64>,
    tail: TailKind,
}

impl Sampled {
    fn new(energies: Vec<f64>, values: Vec<Complex64>, tail: TailKind) -> Result<Self> {
        if energies.len() < 2 || energies.len() != values.len() {
            return domain("a sampled wave function needs at least two (E, value) points");
        }
        if energies[0] < 0.0 {
            return domain(format!("energies must be nonnegative, got {}", energies[0]));
        }
        for w in energies.windows(2) {
            if !(w[1] > w[0]) {
                return domain(format!("energy grid must be strictly increasing ({} then {})", w[0], w[1]));
            }
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return domain("sampled values must be finite");
        }
        let re: Vec<f64> = values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = values.iter().map(|v| v.im).collect();
        let sr = pchip_slopes(&energies, &re);
        let si = pchip_slopes(&energies, &im);
        let slopes = sr.into_iter().zip(si).map(|(a, b)| Complex64::new(a, b)).collect();
        Ok(Self {
            energies,
            values,
            slopes,
            tail,
        })
    }

    fn last(&self) -> (f64, Complex64) {
        let n = self.energies.len() - 1;
        (self.energies[n], self.values[n])
    }

    fn eval(&self, e: f64) -> Complex64 {
        let first = self.energies[0];
        let (last_e, last_v) = self.last();
        if e < first {
            return Complex64::new(0.0, 0.0);
        }
        if e >= last_e {
            return match self.tail {
                TailKind::Exponential { rate } => last_v * (-rate * (e - last_e)).exp(),
                TailKind::PowerLaw { exponent } => last_v * (e / last_e).powf(-exponent),
            };
        }
        let k = match self.energies.partition_point(|&x| x <= e) {
            0 => 0,
            p => p - 1,
        };
        hermite(
            self.energies[k],
            self.energies[k + 1],
            self.values[k],
            self.values[k + 1],
            self.slopes[k],
            self.slopes[k + 1],
            e,
        )
    }
}

fn hermite(
    x0: f64,
    x1: f64,
    y0: Complex64,
    y1: Complex64,
    d0: Complex64,
    d1: Complex64,
    x: f64,
) -> Complex64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    y0 * h00 + d0 * (h10 * h) + y1 * h01 + d1 * (h11 * h)
}

/// Fritsch–Carlson/Butland slopes (the PCHIP rule).
pub(crate) fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = pchip_edge(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = pchip_edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn pchip_edge(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Sidecar declaration for sampled CSV input, e.g. `{"tail": "exp", "rate": 2.0}`.
pub type TailDeclaration = TailKind;

impl EnergyWaveFunction {
    /// A closed-form `φ(E)` with a declared tail law.
    pub fn closed_form<F>(f: F, tail: TailModel) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        tail.validate()?;
        Ok(Self {
            repr: Repr::ClosedForm {
                eval: Arc::new(f),
                tail,
                knots: Vec::new(),
            },
        })
    }

    /// Energies where the integrand has structure (peaks, kinks); used as
    /// panel boundaries.
    pub fn with_knots(mut self, extra: impl IntoIterator<Item = f64>) -> Self {
        if let Repr::ClosedForm { knots, .. } = &mut self.repr {
            knots.extend(extra.into_iter().filter(|e| e.is_finite() && *e > 0.0));
            knots.sort_by(f64::total_cmp);
            knots.dedup();
        }
        self
    }

    /// Tabulated `φ(E)` continued beyond the last point by `tail`.
    pub fn sampled(energies: Vec<f64>, values: Vec<Complex64>, tail: TailKind) -> Result<Self> {
        let s = Sampled::new(energies, values, tail)?;
        TailModel {
            start: s.last().0,
            kind: tail,
        }
        .validate()?;
        Ok(Self {
            repr: Repr::Sampled(s),
        })
    }

    /// `φ(E) = sqrt(2α) e^{-αE}` (ħ = 1), normalized to one.
    pub fn exponential(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return domain(format!("alpha must be positive, got {alpha}"));
        }
        let c = (2.0 * alpha).sqrt();
        Self::closed_form(
            move |e| Complex64::new(c * (-alpha * e).exp(), 0.0),
            TailModel::exponential(0.0, alpha),
        )
    }

    /// `φ(E) = N / (E - z)` restricted to `E ≥ 0`, normalized to one.
    pub fn truncated_breit_wigner(e_r: f64, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return domain(format!("width must be positive, got {gamma}"));
        }
        let norm2 = (2.0 / gamma) * (0.5 * PI + (2.0 * e_r / gamma).atan());
        let n = 1.0 / norm2.sqrt();
        let z = Complex64::new(e_r, -0.5 * gamma);
        let start = (e_r.abs() + gamma) * 1.0e3;
        Ok(Self::closed_form(
            move |e| Complex64::new(n, 0.0) / (Complex64::new(e, 0.0) - z),
            TailModel::power_law(start, 1.0),
        )?
        .with_knots([e_r - 10.0 * gamma, e_r - gamma, e_r, e_r + gamma, e_r + 10.0 * gamma]))
    }

    /// Read `E,re,im` CSV plus a tail declaration.
    pub fn from_csv_reader<R: Read>(reader: R, tail: TailDeclaration) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| DecayError::Parse(e.to_string()))?;
        let names: Vec<&str> = headers.iter().collect();
        if names != ["E", "re", "im"] {
            return Err(DecayError::Parse(format!(
                "expected header `E,re,im`, found `{}`",
                names.join(",")
            )));
        }
        let mut energies = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| DecayError::Parse(e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| DecayError::Parse(format!("row {}: missing column", line + 2)))?
                    .parse::<f64>()
                    .map_err(|e| DecayError::Parse(format!("row {}: {e}", line + 2)))
            };
            energies.push(num(0)?);
            values.push(Complex64::new(num(1)?, num(2)?));
        }
        Self::sampled(energies, values, tail)
    }

    /// Load a sampled wave function and its JSON tail sidecar.
    pub fn load_csv(csv_path: impl AsRef<Path>, sidecar: impl AsRef<Path>) -> Result<Self> {
        let tail: TailDeclaration = serde_json::from_str(&std::fs::read_to_string(sidecar)?)?;
        let file = std::fs::File::open(csv_path)?;
        Self::from_csv_reader(file, tail)
    }

    pub fn eval(&self, e: f64) -> Complex64 {
        if e < 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match &self.repr {
            Repr::ClosedForm { eval, .. } => eval(e),
            Repr::Sampled(s) => s.eval(e),
        }
    }

    pub fn tail(&self) -> TailModel {
        match &self.repr {
            Repr::ClosedForm { tail, .. } => *tail,
            Repr::Sampled(s) => TailModel {
                start: s.last().0,
                kind: s.tail,
            },
        }
    }

    fn knots(&self) -> Vec<f64> {
        match &self.repr {
            Repr::ClosedForm { knots, .. } => knots.clone(),
            Repr::Sampled(s) => s.energies.clone(),
        }
    }

    fn evaluator(&self) -> impl Fn(f64) -> Complex64 + Sync + '_ {
        move |e| self.eval(e)
    }

    /// `∫₀^∞ |φ(E)|² dE`, with the tail beyond the declared start added analytically.
    pub fn energy_norm(&self, tol: f64) -> Result<f64> {
        let tail = self.tail();
        let f = |e: f64| self.eval(e).norm_sqr();
        let x = tail.start.max(*self.knots().last().unwrap_or(&0.0));
        let cut = match tail.kind {
            TailKind::Exponential { rate } => exp_cutoff(&f, x, 2.0 * rate, tol * 1e-3)?,
            TailKind::PowerLaw { .. } => x,
        };
        let breaks = finite_breaks(&self.knots(), cut);
        let body = quad::piecewise(&f, &breaks, tol * 0.5, 1e-14, 4000);
        if !body.converged || !body.value.is_finite() {
            return domain("wave function is not square integrable to the requested tolerance");
        }
        let tail_part = match tail.kind {
            TailKind::Exponential { rate } => f(cut) / (2.0 * rate),
            TailKind::PowerLaw { exponent } => {
                let q = 2.0 * exponent;
                if q <= 1.0 {
                    return domain("power-law tail is not square integrable");
                }
                f(cut) * cut / (q - 1.0)
            }
        };
        Ok(body.value + tail_part)
    }

    /// First support point and `[φ, φ', φ'']` there, for the large-|t| expansion.
    fn boundary_jet(&self) -> (f64, [Complex64; 3]) {
        match &self.repr {
            Repr::Sampled(s) => {
                let (x0, x1) = (s.energies[0], s.energies[1]);
                let h = x1 - x0;
                let (y0, y1) = (s.values[0], s.values[1]);
                let (d0, d1) = (s.slopes[0], s.slopes[1]);
                let second = ((y1 - y0) * (6.0 / h) - d0 * 4.0 - d1 * 2.0) / h;
                (x0, [y0, d0, second])
            }
            Repr::ClosedForm { eval, knots, tail } => {
                let scale = knots
                    .iter()
                    .copied()
                    .find(|k| *k > 0.0)
                    .or(match tail.kind {
                        TailKind::Exponential { rate } => Some(1.0 / rate),
                        TailKind::PowerLaw { .. } => Some(tail.start),
                    })
                    .unwrap_or(1.0);
                let h = 1e-3 * scale;
                let y: Vec<Complex64> = (0..4).map(|k| eval(k as f64 * h)).collect();
                let d1 = (y[0] * -3.0 + y[1] * 4.0 - y[2]) / (2.0 * h);
                let d2 = (y[0] * 2.0 - y[1] * 5.0 + y[2] * 4.0 - y[3]) / (h * h);
                (0.0, [y[0], d1, d2])
            }
        }
    }
}

fn finite_breaks(knots: &[f64], cut: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    b.extend(knots.iter().copied().filter(|k| *k > 0.0 && *k < cut));
    b.push(cut);
    b.dedup();
    b
}

/// Smallest `x ≥ start` (in steps of `1/rate`) with `|g|/rate ≤ bound` at
/// `x` and a few points beyond it, so a zero of `g` is not taken for the tail.
fn exp_cutoff<F: Fn(f64) -> f64>(g: &F, start: f64, rate: f64, bound: f64) -> Result<f64> {
    let mut x = start;
    for _ in 0..20_000 {
        if [0.0, 0.5, 1.0, 2.0, 4.0]
            .iter()
            .all(|k| g(x + k / rate).abs() / rate <= bound)
        {
            return Ok(x);
        }
        x += 1.0 / rate;
    }
    domain("declared exponential tail does not decay; the function is not square integrable")
}

/// `∫₀^∞ g(E) e^{-iEt} dE` and an error estimate.
pub(crate) fn oscillatory_integral<G>(
    g: &G,
    knots: &[f64],
    tail: &TailModel,
    t: f64,
    tol: f64,
) -> Result<(Complex64, f64)>
where
    G: Fn(f64) -> Complex64 + Sync,
{
    let phase = |e: f64| Complex64::new(0.0, -e * t).exp();
    let x0 = tail.start.max(knots.iter().copied().fold(0.0, f64::max));
    let (cut, tail_value) = match tail.kind {
        TailKind::Exponential { rate } => {
            let x = exp_cutoff(&|e| g(e).norm(), x0, rate, tol / 20.0)?;
            (x, g(x) * phase(x) / Complex64::new(rate, t))
        }
        TailKind::PowerLaw { exponent } => power_tail(g, x0, exponent, t, tol)?,
    };

    let breaks = finite_breaks(knots, cut);
    let width = if t == 0.0 { f64::INFINITY } else { 0.5 * PI / t.abs() };
    let mut panels = Vec::new();
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        let n = if width.is_finite() { (len / width).ceil().max(1.0) } else { 1.0 };
        if n > PANEL_BUDGET as f64 || panels.len() + n as usize > PANEL_BUDGET {
            return Err(DecayError::NonConvergence {
                worst_point: t,
                worst_error: f64::INFINITY,
                tolerance: tol,
            });
        }
        let n = n as usize;
        let h = len / n as f64;
        for k in 0..n {
            let a = w[0] + k as f64 * h;
            let b = if k + 1 == n { w[1] } else { a + h };
            panels.push((a, b));
        }
    }

    let integrand = |e: f64| g(e) * phase(e);
    let budget = 0.5 * tol;
    let results = crate::par::map(&panels, |&(a, b)| {
        let share = budget * (b - a) / cut;
        quad::adaptive(&integrand, a, b, share, 0.0, PANEL_MAX_INTERVALS)
    });
    let mut total = tail_value;
    let mut err = 0.0;
    for r in &results {
        total += r.value;
        err += r.error;
    }
    if err > tol || !total.re.is_finite() || !total.im.is_finite() {
        return Err(DecayError::NonConvergence {
            worst_point: t,
            worst_error: err,
            tolerance: tol,
        });
    }
    Ok((total, err))
}

/// Cutoff and analytic remainder for a power-law tail.
fn power_tail<G>(g: &G, x0: f64, p: f64, t: f64, tol: f64) -> Result<(f64, Complex64)>
where
    G: Fn(f64) -> Complex64,
{
    if t == 0.0 {
        if p <= 1.0 {
            return domain(format!(
                "the transform at t = 0 diverges for a power-law tail with exponent {p} ≤ 1"
            ));
        }
        return Ok((x0, g(x0) * x0 / (p - 1.0)));
    }
    // integration-by-parts series Σ g^{(k)}(X) e^{-iXt} / (it)^{k+1}
    let it = Complex64::new(0.0, t);
    let mut x = x0.max(40.0 / t.abs());
    for _ in 0..30 {
        let gx = g(x);
        let mut term = gx / it;
        let mut sum = term;
        let mut smallest = term.norm();
        let mut done = false;
        for k in 1..200 {
            term *= -(p + (k - 1) as f64) / (x * it);
            let m = term.norm();
            if m > smallest {
                break;
            }
            smallest = m;
            sum += term;
            if m <= tol * 1e-3 {
                done = true;
                break;
            }
        }
        if done || smallest <= tol * 1e-3 {
            return Ok((x, sum * Complex64::new(0.0, -x * t).exp()));
        }
        x *= 2.0;
    }
    Err(DecayError::NonConvergence {
        worst_point: t,
        worst_error: f64::INFINITY,
        tolerance: tol,
    })
}

/// `φ(t)` on a grid with per-point error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeWaveFunction {
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
}

impl TimeWaveFunction {
    /// `|φ(t)|²` per point.
    pub fn densities(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

fn check_grid(grid: &[f64], tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return domain("time grid must be finite");
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return domain("time grid must be strictly increasing");
        }
    }
    Ok(())
}

/// Single-point transform.
pub fn time_amplitude(f: &EnergyWaveFunction, t: f64, tol: f64) -> Result<(Complex64, f64)> {
    let g = f.evaluator();
    let (v, e) = oscillatory_integral(&g, &f.knots(), &f.tail(), t, tol * (2.0 * PI).sqrt())?;
    let s = 1.0 / (2.0 * PI).sqrt();
    Ok((v * s, e * s))
}

/// Time representation of `f` on `grid`, each value within `tol` (absolute).
pub fn to_time_representation(
    f: &EnergyWaveFunction,
    grid: &[f64],
    tol: f64,
) -> Result<TimeWaveFunction> {
    check_grid(grid, tol)?;
    let norm = f.energy_norm(tol.min(1e-6))?;
    if !norm.is_finite() {
        return domain("wave function is not square integrable");
    }
    let results = crate::par::map(grid, |&t| time_amplitude(f, t, tol));
    let mut values = Vec::with_capacity(grid.len());
    let mut errors = Vec::with_capacity(grid.len());
    let mut worst: Option<DecayError> = None;
    for r in results {
        match r {
            Ok((v, e)) => {
                values.push(v);
                errors.push(e);
            }
            Err(e) => {
                let replace = match (&worst, &e) {
                    (None, _) => true,
                    (
                        Some(DecayError::NonConvergence { worst_error: a, .. }),
                        DecayError::NonConvergence { worst_error: b, .. },
                    ) => b > a,
                    _ => false,
                };
                if replace {
                    worst = Some(e);
                }
            }
        }
    }
    if let Some(e) = worst {
        return Err(e);
    }
    Ok(TimeWaveFunction {
        grid: grid.to_vec(),
        values,
        errors,
    })
}

/// `R(t) = |φ(t)|²` for one particle.
pub fn nondecay_rate(f: &EnergyWaveFunction, grid: &[f64], tol: f64) -> Result<TimeSeries> {
    let w = to_time_representation(f, grid, tol)?;
    let pts = w.grid.iter().copied().zip(w.densities()).collect();
    TimeSeries::new(pts, ValueKind::Rate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlancherelReport {
    pub energy_norm: f64,
    pub time_norm: f64,
    pub defect: f64,
}

/// Compare `∫_ℝ |φ(t)|² dt` against `∫₀^∞ |φ(E)|² dE`.
pub fn plancherel_report(f: &EnergyWaveFunction, tol: f64) -> Result<PlancherelReport> {
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let energy_norm = f.energy_norm(tol * 1e-2)?;

    // characteristic time from the energy spread of |φ|²
    let tail = f.tail();
    let g2 = |e: f64| f.eval(e).norm_sqr();
    let x = match tail.kind {
        TailKind::Exponential { rate } => exp_cutoff(&g2, tail.start, 2.0 * rate, 1e-12)?,
        TailKind::PowerLaw { .. } => tail.start,
    };
    let breaks = finite_breaks(&f.knots(), x);
    let m0 = quad::piecewise(&g2, &breaks, 1e-12, 1e-10, 2000).value;
    let m1 = quad::piecewise(&|e: f64| e * g2(e), &breaks, 1e-12, 1e-10, 2000).value;
    let m2 = quad::piecewise(&|e: f64| e * e * g2(e), &breaks, 1e-12, 1e-10, 2000).value;
    let spread = (m2 / m0 - (m1 / m0).powi(2)).max(0.0).sqrt();
    let s = if spread > 0.0 { 1.0 / spread } else { 1.0 };
    let t_cut = 200.0 * s;

    let inner_tol = (tol * 1e-2).max(1e-14);
    let failure: RefCell<Option<DecayError>> = RefCell::new(None);
    let density = |t: f64| match time_amplitude(f, t, inner_tol) {
        Ok((v, _)) => v.norm_sqr(),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let time_breaks = [
        -t_cut, -20.0 * s, -4.0 * s, -s, 0.0, s, 4.0 * s, 20.0 * s, t_cut,
    ];
    let body = quad::piecewise(&density, &time_breaks, 0.25 * tol, 0.0, 400);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !body.converged {
        return Err(DecayError::NonConvergence {
            worst_point: t_cut,
            worst_error: body.error,
            tolerance: tol,
        });
    }

    // |t| > t_cut from the boundary expansion at the first support point
    let (_, jet) = f.boundary_jet();
    let asym = |t: f64| {
        let it = Complex64::new(0.0, t);
        let v = jet[0] / it + jet[1] / (it * it) + jet[2] / (it * it * it);
        v.norm_sqr() / (2.0 * PI)
    };
    let right = quad::half_line(&asym, t_cut, t_cut, 1e-16, 1e-10, 200).value;
    let left = quad::half_line(&|t: f64| asym(-t), t_cut, t_cut, 1e-16, 1e-10, 200).value;
    let time_norm = body.value + right + left;
    Ok(PlancherelReport {
        energy_norm,
        time_norm,
        defect: (time_norm - energy_norm).abs(),
    })
}

/// `|∫_ℝ |φ(t)|² dt − ∫₀^∞ |φ(E)|² dE|`.
pub fn plancherel_defect(f: &EnergyWaveFunction, tol: f64) -> Result<f64> {
    Ok(plancherel_report(f, tol)?.defect)
}

/// `∫₀^∞ dE e^{iE dt} e^{-εE} / 2π = 1 / (2π (ε − i dt))` (ħ = 1).
///
/// Tends to `½δ(dt) + (i/2π) P(1/dt)` as `ε → 0`.
pub fn regularized_kernel(dt: f64, eps: f64) -> Result<Complex64> {
    if !(eps > 0.0) {
        return domain(format!("regulator must be positive, got {eps}"));
    }
    Ok(Complex64::new(1.0, 0.0) / (Complex64::new(eps, -dt) * (2.0 * PI)))
}

/// `a_s(τ) = ∫₀^∞ e^{-iEτ} |φ(E)|² dE`.
pub fn survival_amplitude(f: &EnergyWaveFunction, tau: f64, tol: f64) -> Result<Complex64> {
    let g = |e: f64| Complex64::new(f.eval(e).norm_sqr(), 0.0);
    Ok(oscillatory_integral(&g, &f.knots(), &f.tail().squared(), tau, tol)?.0)
}

/// `d a_s / dτ = ∫₀^∞ (−iE) e^{-iEτ} |φ(E)|² dE`.
pub fn survival_amplitude_derivative(
    f: &EnergyWaveFunction,
    tau: f64,
    tol: f64,
) -> Result<Complex64> {
    let g = |e: f64| Complex64::new(0.0, -e * f.eval(e).norm_sqr());
    let tail = f.tail().squared_times_energy();
    if let TailKind::PowerLaw { exponent } = tail.kind {
        if exponent <= 0.0 {
            return domain("energy moment of |φ|² diverges; survival amplitude is not differentiable");
        }
    }
    Ok(oscillatory_integral(&g, &f.knots(), &tail, tau, tol)?.0)
}
