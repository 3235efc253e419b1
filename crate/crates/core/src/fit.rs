//! Least-squares fits of `S e^{-λt}(1 + c cos(ωt + θ))` to binned decay
//! times, and discrimination between the three rate laws that share that
//! shape.
//!
//! Every model is fitted through its own natural parameters, which are then
//! mapped onto the common shape `(S, λ, c, ω, θ)`:
//!
//! * `timerep`: `(S, λ, a, ω, φ)` with `a ∈ [0, 1]` through a logistic map.
//! * `survival`: `(S, λ, m, ω)`, `c = m·√(1 + (ω/λ)²)`, `θ = −atan(ω/λ)`.
//! * `quantumbeat`: `(S, λ, B, ω, θ)`, all free.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, DecayError, Result};
use crate::events::Histogram;
use crate::model::wrap_phase;
use crate::par;

/// Rate law `scale · e^{-λt}(1 + a cos(ωt + φ))` in counts per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationModel {
    pub scale: f64,
    pub lambda: f64,
    pub a: f64,
    pub omega: f64,
    pub phi: f64,
}

impl OscillationModel {
    pub fn rate(&self, t: f64) -> f64 {
        self.scale * (-self.lambda * t).exp() * (1.0 + self.a * (self.omega * t + self.phi).cos())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Exact integral of the rate over `[t0, t1]`.
    pub fn bin_integral(&self, t0: f64, t1: f64) -> f64 {
        bin_terms(t0, t1, &self.shape(), Objective::Exact).0
    }

    fn shape(&self) -> [f64; 5] {
        [self.scale, self.lambda, self.a, self.omega, self.phi]
    }

    /// Flip to `ω ≥ 0`, `a ≥ 0` and wrap the phase.
    fn canonical(mut self) -> Self {
        if self.omega < 0.0 {
            self.omega = -self.omega;
            self.phi = -self.phi;
        }
        if self.a < 0.0 {
            self.a = -self.a;
            self.phi += PI;
        }
        self.phi = wrap_phase(self.phi);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    Timerep,
    Survival,
    Quantumbeat,
}

impl ModelTag {
    pub const ALL: [ModelTag; 3] = [ModelTag::Timerep, ModelTag::Survival, ModelTag::Quantumbeat];

    pub fn name(self) -> &'static str {
        match self {
            ModelTag::Timerep => "timerep",
            ModelTag::Survival => "survival",
            ModelTag::Quantumbeat => "quantumbeat",
        }
    }

    fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelTag::Timerep => &["scale", "lambda", "a", "omega", "phi"],
            ModelTag::Survival => &["scale", "lambda", "m", "omega"],
            ModelTag::Quantumbeat => &["scale", "lambda", "B", "omega", "theta"],
        }
    }
}

impl std::str::FromStr for ModelTag {
    type Err = DecayError;
    fn from_str(s: &str) -> Result<Self> {
        ModelTag::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| DecayError::Parse(format!("unknown model tag '{s}' (timerep, survival, quantumbeat)")))
    }
}

/// Free frequency parameter: `ω` itself or the period `2π/ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyParam {
    #[default]
    Omega,
    Period,
}

/// Bin prediction: exact integral or midpoint rate times width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    #[default]
    Exact,
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub model: ModelTag,
    pub frequency: FrequencyParam,
    pub objective: Objective,
    pub starts: usize,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            model: ModelTag::Timerep,
            frequency: FrequencyParam::Omega,
            objective: Objective::Exact,
            starts: 8,
            max_iterations: 200,
        }
    }
}

impl FitOptions {
    pub fn for_model(model: ModelTag) -> Self {
        Self {
            model,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model_tag: ModelTag,
    /// Best fit mapped onto the common shape.
    pub params: OscillationModel,
    /// One-sigma errors of the mapped shape parameters.
    pub stderr: OscillationModel,
    /// Natural parameters of the model, in fit order.
    pub natural: BTreeMap<String, f64>,
    pub natural_stderr: BTreeMap<String, f64>,
    /// Covariance of the natural parameters, in `ModelTag` order.
    pub covariance: Vec<Vec<f64>>,
    pub chi2: f64,
    pub ndof: usize,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub period: f64,
    pub period_stderr: f64,
}

impl FitResult {
    pub fn chi2_per_dof(&self) -> f64 {
        self.chi2 / self.ndof.max(1) as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

// ---------------------------------------------------------------------------
// bin integrals

/// `sinh(x)/x` and its derivative, stable near zero.
fn sinhc(x: Complex64) -> (Complex64, Complex64) {
    if x.norm() < 0.1 {
        let x2 = x * x;
        let mut term = Complex64::new(1.0, 0.0);
        let mut value = term;
        let mut deriv = Complex64::new(0.0, 0.0);
        for k in 1..8 {
            let kf = k as f64;
            deriv += term * x * (2.0 * kf) / ((2.0 * kf) * (2.0 * kf + 1.0));
            term *= x2 / ((2.0 * kf) * (2.0 * kf + 1.0));
            value += term;
        }
        (value, deriv)
    } else {
        let s = x.sinh() / x;
        (s, (x.cosh() - s) / x)
    }
}

/// `∫ e^{st}` over `[m − h, m + h]` and its `s`-derivative, or the midpoint
/// stand-ins.
fn exp_moments(s: Complex64, m: f64, h: f64, objective: Objective) -> (Complex64, Complex64) {
    let centre = (s * m).exp() * (2.0 * h);
    match objective {
        Objective::Exact => {
            let (f, df) = sinhc(s * h);
            (centre * f, centre * (f * m + df * h))
        }
        Objective::Midpoint => (centre, centre * m),
    }
}

/// Bin prediction and its gradient with respect to `(S, λ, c, ω, θ)`.
fn bin_terms(t0: f64, t1: f64, p: &[f64; 5], objective: Objective) -> (f64, [f64; 5]) {
    let [scale, lambda, c, omega, theta] = *p;
    let (m, h) = (0.5 * (t0 + t1), 0.5 * (t1 - t0));
    let (e0, de0) = exp_moments(Complex64::new(-lambda, 0.0), m, h, objective);
    let rot = Complex64::from_polar(1.0, theta);
    let (g, dg) = exp_moments(Complex64::new(-lambda, omega), m, h, objective);
    let (g, dg) = (rot * g, rot * dg);
    let base = e0.re + c * g.re;
    let grad = [
        base,
        scale * (-de0.re - c * dg.re),
        scale * g.re,
        -scale * c * dg.im,
        -scale * c * g.im,
    ];
    (scale * base, grad)
}

// ---------------------------------------------------------------------------
// model mappings

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn logit(a: f64) -> f64 {
    (a / (1.0 - a)).ln()
}

/// Common shape and `∂shape/∂natural` (one row per natural parameter).
fn to_shape(model: ModelTag, nat: &[f64]) -> ([f64; 5], Vec<[f64; 5]>) {
    match model {
        ModelTag::Timerep | ModelTag::Quantumbeat => {
            let mut rows = vec![[0.0; 5]; 5];
            for (i, r) in rows.iter_mut().enumerate() {
                r[i] = 1.0;
            }
            ([nat[0], nat[1], nat[2], nat[3], nat[4]], rows)
        }
        ModelTag::Survival => {
            let [scale, lambda, mix, omega] = [nat[0], nat[1], nat[2], nat[3]];
            let r = omega / lambda;
            let amp = r.hypot(1.0);
            let psi = -r.atan();
            let dr_dl = -omega / (lambda * lambda);
            let dr_dw = 1.0 / lambda;
            let damp_dr = r / amp;
            let dpsi_dr = -1.0 / (1.0 + r * r);
            let rows = vec![
                [1.0, 0.0, 0.0, 0.0, 0.0],
                [0.0, 1.0, mix * damp_dr * dr_dl, 0.0, dpsi_dr * dr_dl],
                [0.0, 0.0, amp, 0.0, 0.0],
                [0.0, 0.0, mix * damp_dr * dr_dw, 1.0, dpsi_dr * dr_dw],
            ];
            ([scale, lambda, mix * amp, omega, psi], rows)
        }
    }
}

/// Internal coordinates: the logistic-bounded amplitude of the time-rep fit
/// and the optional period parameterization.
struct Coordinates {
    model: ModelTag,
    frequency: FrequencyParam,
}

impl Coordinates {
    fn amplitude_bounded(&self) -> bool {
        self.model == ModelTag::Timerep
    }

    /// Natural parameters and the diagonal `∂natural/∂internal`.
    fn natural(&self, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut nat = q.to_vec();
        let mut d = vec![1.0; q.len()];
        if self.amplitude_bounded() {
            let a = logistic(q[2]);
            nat[2] = a;
            d[2] = a * (1.0 - a);
        }
        if self.frequency == FrequencyParam::Period {
            nat[3] = 2.0 * PI / q[3];
            d[3] = -2.0 * PI / (q[3] * q[3]);
        }
        (nat, d)
    }

    fn internal(&self, nat: &[f64]) -> Vec<f64> {
        let mut q = nat.to_vec();
        if self.amplitude_bounded() {
            q[2] = logit(nat[2].clamp(1e-6, 1.0 - 1e-6));
        }
        if self.frequency == FrequencyParam::Period {
            q[3] = 2.0 * PI / nat[3];
        }
        q
    }

    fn admissible(&self, q: &[f64]) -> bool {
        q.iter().all(|x| x.is_finite())
            && q[0] > 0.0
            && q[1] > 0.0
            && (self.frequency == FrequencyParam::Omega || q[3] > 0.0)
    }
}

struct Problem {
    t0: Vec<f64>,
    t1: Vec<f64>,
    counts: Vec<f64>,
    inv_sigma: Vec<f64>,
    objective: Objective,
    model: ModelTag,
}

impl Problem {
    fn new(h: &Histogram, objective: Objective, model: ModelTag) -> Result<Self> {
        let nonempty = h.counts.iter().filter(|&&c| c > 0).count();
        if nonempty < 8 {
            return domain(format!("fit needs at least 8 nonempty bins, histogram has {nonempty}"));
        }
        let n = h.nbins();
        Ok(Self {
            t0: (0..n).map(|k| h.edge(k)).collect(),
            t1: (0..n).map(|k| h.edge(k + 1)).collect(),
            counts: h.counts.iter().map(|&c| c as f64).collect(),
            inv_sigma: h.counts.iter().map(|&c| 1.0 / (c.max(1) as f64).sqrt()).collect(),
            objective,
            model,
        })
    }

    /// Weighted residuals and Jacobian with respect to the natural parameters.
    fn residuals(&self, nat: &[f64], with_jacobian: bool) -> (DVector<f64>, Option<DMatrix<f64>>) {
        let (shape, dshape) = to_shape(self.model, nat);
        let n = self.counts.len();
        let np = nat.len();
        let mut r = DVector::zeros(n);
        let mut jac = with_jacobian.then(|| DMatrix::zeros(n, np));
        for k in 0..n {
            let (pred, grad) = bin_terms(self.t0[k], self.t1[k], &shape, self.objective);
            r[k] = (pred - self.counts[k]) * self.inv_sigma[k];
            if let Some(j) = jac.as_mut() {
                for (i, row) in dshape.iter().enumerate() {
                    let d: f64 = row.iter().zip(grad.iter()).map(|(a, b)| a * b).sum();
                    j[(k, i)] = d * self.inv_sigma[k];
                }
            }
        }
        (r, jac)
    }

    fn chi2(&self, nat: &[f64]) -> f64 {
        self.residuals(nat, false).0.norm_squared()
    }
}

#[derive(Debug, Clone)]
struct Branch {
    q: Vec<f64>,
    chi2: f64,
    iterations: usize,
    gradient_norm: f64,
    converged: bool,
    trace: Vec<f64>,
}

fn levenberg_marquardt(problem: &Problem, coords: &Coordinates, q0: Vec<f64>, max_iter: usize) -> Result<Branch> {
    let np = q0.len();
    let mut q = q0;
    let (nat, _) = coords.natural(&q);
    let mut chi2 = problem.chi2(&nat);
    let mut mu = 1e-3;
    let mut trace = vec![chi2];
    let mut gradient_norm = f64::INFINITY;
    for iter in 0..max_iter {
        let (nat, dnat) = coords.natural(&q);
        let (r, jac) = problem.residuals(&nat, true);
        let mut j = jac.expect("requested");
        for (c, d) in dnat.iter().enumerate() {
            j.column_mut(c).scale_mut(*d);
        }
        if !j.iter().all(|x| x.is_finite()) {
            return Err(DecayError::Singular(format!("non-finite Jacobian at {nat:?}")));
        }
        let g = j.transpose() * &r;
        gradient_norm = g.norm();
        if gradient_norm < 1e-12 {
            return Ok(Branch { q, chi2, iterations: iter, gradient_norm, converged: true, trace });
        }
        let a = j.transpose() * &j;
        let dmax = (0..np).map(|i| a[(i, i)]).fold(0.0, f64::max);
        if !(dmax > 0.0) {
            return Err(DecayError::Singular("Jacobian vanishes identically".into()));
        }
        loop {
            let mut damped = a.clone();
            for i in 0..np {
                damped[(i, i)] += mu * a[(i, i)].max(1e-12 * dmax);
            }
            let step = damped.cholesky().map(|ch| ch.solve(&(-&g)));
            if let Some(step) = step {
                let trial: Vec<f64> = q.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
                if coords.admissible(&trial) {
                    let c = problem.chi2(&coords.natural(&trial).0);
                    if c < chi2 {
                        let small = q
                            .iter()
                            .zip(step.iter())
                            .all(|(x, d)| d.abs() <= 1e-10 * x.abs().max(1.0));
                        q = trial;
                        chi2 = c;
                        trace.push(c);
                        mu = (mu / 10.0).max(1e-15);
                        if small {
                            return Ok(Branch {
                                q,
                                chi2,
                                iterations: iter + 1,
                                gradient_norm,
                                converged: true,
                                trace,
                            });
                        }
                        break;
                    }
                }
            }
            mu *= 10.0;
            if mu > 1e20 {
                // no descent direction left at working precision
                return Ok(Branch { q, chi2, iterations: iter + 1, gradient_norm, converged: true, trace });
            }
        }
    }
    Ok(Branch {
        q,
        chi2,
        iterations: max_iter,
        gradient_norm,
        converged: false,
        trace,
    })
}

fn pseudo_inverse(m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    // equilibrate so the cutoff is not dominated by the count scale
    let d: Vec<f64> = (0..n).map(|i| 1.0 / m[(i, i)].abs().max(1e-300 * scale).sqrt()).collect();
    let eq = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * d[i] * d[j]);
    let inv = eq
        .pseudo_inverse(1e-12)
        .unwrap_or_else(|_| DMatrix::from_element(n, n, f64::NAN));
    DMatrix::from_fn(n, n, |i, j| inv[(i, j)] * d[i] * d[j])
}

fn starts(model: ModelTag, init: &[f64], count: usize) -> Vec<Vec<f64>> {
    let count = count.max(1);
    (0..count)
        .map(|j| {
            let mut s = init.to_vec();
            match model {
                ModelTag::Survival => {
                    s[2] = init[2] * 2f64.powf((j as f64 - (count / 2) as f64) / 2.0);
                }
                _ => {
                    s[4] = wrap_phase(init[4] + 2.0 * PI * j as f64 / count as f64);
                }
            }
            s
        })
        .collect()
}

/// Natural parameters of `model` seeded from a common-shape guess.
fn natural_from_guess(model: ModelTag, g: &OscillationModel) -> Vec<f64> {
    match model {
        ModelTag::Timerep => vec![g.scale, g.lambda, g.a.clamp(0.02, 0.95), g.omega, wrap_phase(g.phi)],
        ModelTag::Quantumbeat => vec![g.scale, g.lambda, g.a.max(0.02), g.omega, wrap_phase(g.phi)],
        ModelTag::Survival => {
            let amp = (g.omega / g.lambda).hypot(1.0);
            vec![g.scale, g.lambda, (g.a / amp).max(1e-3), g.omega]
        }
    }
}

/// Fit `h` starting from `init`, trying `opts.starts` equispaced phases.
pub fn fit_oscillation(h: &Histogram, init: &OscillationModel, opts: &FitOptions) -> Result<FitResult> {
    fit_from(h, std::slice::from_ref(init), opts)
}

/// Multistart from every model in `inits`; the lowest objective wins.
fn fit_from(h: &Histogram, inits: &[OscillationModel], opts: &FitOptions) -> Result<FitResult> {
    for init in inits {
        if !(init.scale > 0.0 && init.lambda > 0.0) {
            return domain("initial scale and decay constant must be positive");
        }
        if opts.frequency == FrequencyParam::Period && !(init.omega > 0.0) {
            return domain("period parameterization needs a positive initial frequency");
        }
    }
    let problem = Problem::new(h, opts.objective, opts.model)?;
    let coords = Coordinates {
        model: opts.model,
        frequency: opts.frequency,
    };
    let seeds: Vec<Vec<f64>> = inits
        .iter()
        .flat_map(|init| starts(opts.model, &natural_from_guess(opts.model, init), opts.starts))
        .collect();
    let branches = par::map(&seeds, |s| levenberg_marquardt(&problem, &coords, coords.internal(s), opts.max_iterations));
    let branches = branches.into_iter().collect::<Result<Vec<_>>>()?;

    let canonical = |b: &Branch| {
        let (nat, _) = coords.natural(&b.q);
        let (shape, _) = to_shape(opts.model, &nat);
        OscillationModel {
            scale: shape[0],
            lambda: shape[1],
            a: shape[2],
            omega: shape[3],
            phi: shape[4],
        }
        .canonical()
    };
    let best = branches
        .iter()
        .filter(|b| b.converged)
        .min_by(|x, y| {
            let tie = (x.chi2 - y.chi2).abs() <= 1e-12 * x.chi2.max(y.chi2);
            if tie {
                canonical(x).phi.total_cmp(&canonical(y).phi)
            } else {
                x.chi2.total_cmp(&y.chi2)
            }
        })
        .cloned();
    let Some(best) = best else {
        let worst = branches
            .iter()
            .min_by(|x, y| x.chi2.total_cmp(&y.chi2))
            .expect("at least one start");
        let trace = worst
            .trace
            .iter()
            .map(|c| format!("{c:.6e}"))
            .collect::<Vec<_>>()
            .join(" -> ");
        return Err(DecayError::FitNonConvergence {
            iterations: worst.iterations,
            chi2: worst.chi2,
            gradient_norm: worst.gradient_norm,
            trace,
        });
    };
    Ok(summarize(&problem, &coords, &best, canonical(&best)))
}

fn summarize(problem: &Problem, coords: &Coordinates, best: &Branch, params: OscillationModel) -> FitResult {
    let model = coords.model;
    let (nat, _) = coords.natural(&best.q);
    let (_, jac) = problem.residuals(&nat, true);
    let jac = jac.expect("requested");
    let cov = pseudo_inverse(jac.transpose() * &jac);
    let np = nat.len();
    let names = model.param_names();
    let sd: Vec<f64> = (0..np).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();

    // propagate to the common shape
    let (_, dshape) = to_shape(model, &nat);
    let shape_sd: Vec<f64> = (0..5)
        .map(|s| {
            let mut v = 0.0;
            for i in 0..np {
                for j in 0..np {
                    v += dshape[i][s] * cov[(i, j)] * dshape[j][s];
                }
            }
            v.max(0.0).sqrt()
        })
        .collect();
    let mut natural: BTreeMap<String, f64> = names.iter().map(|n| n.to_string()).zip(nat.iter().copied()).collect();
    if model != ModelTag::Survival {
        // report the canonical phase and sign
        natural.insert(names[2].into(), params.a);
        natural.insert(names[4].into(), params.phi);
        natural.insert("omega".into(), params.omega);
    } else {
        natural.insert("omega".into(), nat[3].abs());
    }
    let natural_stderr = names.iter().map(|n| n.to_string()).zip(sd.iter().copied()).collect();
    let ndof = problem.counts.len().saturating_sub(np);
    let omega_sd = shape_sd[3];
    FitResult {
        model_tag: model,
        params,
        stderr: OscillationModel {
            scale: shape_sd[0],
            lambda: shape_sd[1],
            a: shape_sd[2],
            omega: omega_sd,
            phi: shape_sd[4],
        },
        natural,
        natural_stderr,
        covariance: (0..np).map(|i| (0..np).map(|j| cov[(i, j)]).collect()).collect(),
        chi2: best.chi2,
        ndof,
        converged: best.converged,
        iterations: best.iterations,
        gradient_norm: best.gradient_norm,
        period: params.period(),
        period_stderr: 2.0 * PI * omega_sd / (params.omega * params.omega),
    }
}

/// Starting point from a log-linear fit of the counts plus a weighted
/// periodogram of the residual modulation.
pub fn initial_guess(h: &Histogram) -> Result<OscillationModel> {
    let n = h.nbins();
    let mids: Vec<f64> = (0..n).map(|k| h.edge(k) + 0.5 * h.dt).collect();
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&count, &x) in h.counts.iter().zip(&mids) {
        let c = count as f64;
        if c > 0.0 {
            let y = (c / h.dt).ln();
            sw += c;
            sx += c * x;
            sy += c * y;
            sxx += c * x * x;
            sxy += c * x * y;
        }
    }
    let det = sw * sxx - sx * sx;
    if !(sw > 0.0 && det > 0.0) {
        return domain("histogram has too few populated bins for an initial guess");
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;
    let span = h.t_max();
    let lambda = if slope < 0.0 { -slope } else { 1.0 / span };
    let scale = intercept.exp();

    let expected: Vec<f64> = mids.iter().map(|&m| scale * h.dt * (-lambda * m).exp()).collect();
    let ratio: Vec<f64> = (0..n).map(|k| h.counts[k] as f64 / expected[k] - 1.0).collect();
    let wsum: f64 = expected.iter().sum();
    let mean = (0..n).map(|k| expected[k] * ratio[k]).sum::<f64>() / wsum;
    let step = 2.0 * PI / (4.0 * span);
    let (omega_min, omega_max) = (2.0 * 2.0 * PI / span, PI / h.dt);
    let mut best = (0.0, omega_min, Complex64::new(0.0, 0.0));
    let mut omega = omega_min;
    while omega <= omega_max {
        let p: Complex64 = (0..n)
            .map(|k| Complex64::from_polar(expected[k] * (ratio[k] - mean), -omega * mids[k]))
            .sum::<Complex64>()
            / wsum;
        if p.norm() > best.0 {
            best = (p.norm(), omega, p);
        }
        omega += step;
    }
    Ok(OscillationModel {
        scale,
        lambda,
        a: 2.0 * best.0,
        omega: best.1,
        phi: best.2.arg(),
    })
}

/// Fit with an automatic initial guess.
pub fn fit_auto(h: &Histogram, opts: &FitOptions) -> Result<FitResult> {
    fit_oscillation(h, &initial_guess(h)?, opts)
}

// ---------------------------------------------------------------------------
// zero-time discrimination

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialRateClass {
    Nonzero,
    Zero,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInitialRate {
    pub model_tag: ModelTag,
    /// Per-particle rate at `t = 0`.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroTimeReport {
    /// Quadratic extrapolation of the early bins to `t = 0`, per particle.
    pub extrapolated_rate: f64,
    pub extrapolated_stderr: f64,
    pub first_bin_rate: f64,
    pub first_bin_stderr: f64,
    pub window_bins: usize,
    pub models: Vec<ModelInitialRate>,
    pub favored: InitialRateClass,
}

/// Extrapolate the per-particle rate to `t = 0` from the first
/// `window_bins` bins, fitting `r(t) = c₀ + c₁t + c₂t²` to exact bin
/// integrals.
pub fn zero_time_discriminator(h: &Histogram, fits: &[FitResult], window_bins: usize) -> Result<ZeroTimeReport> {
    if window_bins < 3 || window_bins > h.nbins() {
        return domain(format!(
            "zero-time extrapolation needs 3 to {} early bins, got {window_bins}",
            h.nbins()
        ));
    }
    let window = h.edge(window_bins);
    for f in fits.iter().filter(|f| f.params.omega > 0.0 && f.params.a > 0.0) {
        if 3.0 * h.dt > f.period {
            return domain(format!(
                "fewer than 3 bins of width {} fit below the {} period {}",
                h.dt,
                f.model_tag.name(),
                f.period
            ));
        }
    }
    if h.n0 == 0 {
        return domain("histogram has zero exposure");
    }
    let n0 = h.n0 as f64;
    // expected count in bin k is n0·(row_k · c) with Poisson weight 1/max(count, 1)
    let mut normal = DMatrix::<f64>::zeros(3, 3);
    let mut rhs = DVector::<f64>::zeros(3);
    for k in 0..window_bins {
        let (a, b) = (h.edge(k), h.edge(k + 1));
        let row = [b - a, (b * b - a * a) / 2.0, (b * b * b - a * a * a) / 3.0];
        let c = h.counts[k] as f64;
        let w = 1.0 / c.max(1.0);
        for i in 0..3 {
            rhs[i] += w * n0 * row[i] * c;
            for j in 0..3 {
                normal[(i, j)] += w * n0 * n0 * row[i] * row[j];
            }
        }
    }
    let cov = normal
        .try_inverse()
        .ok_or_else(|| DecayError::Singular(format!("early-time window of {window} is degenerate")))?;
    let coef = &cov * rhs;
    let extrapolated_rate = coef[0];
    let extrapolated_stderr = cov[(0, 0)].max(0.0).sqrt();
    let c0 = h.counts[0] as f64;
    let first_bin_rate = c0 / (n0 * h.dt);
    let first_bin_stderr = c0.max(1.0).sqrt() / (n0 * h.dt);
    let favored = if extrapolated_rate > 5.0 * extrapolated_stderr {
        InitialRateClass::Nonzero
    } else if extrapolated_rate.abs() < 3.0 * extrapolated_stderr {
        InitialRateClass::Zero
    } else {
        InitialRateClass::Inconclusive
    };
    let models = fits
        .iter()
        .map(|f| ModelInitialRate {
            model_tag: f.model_tag,
            rate: f.params.rate(0.0) / n0,
        })
        .collect();
    Ok(ZeroTimeReport {
        extrapolated_rate,
        extrapolated_stderr,
        first_bin_rate,
        first_bin_stderr,
        window_bins,
        models,
        favored,
    })
}

// ---------------------------------------------------------------------------
// model comparison

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareEntry {
    pub model_tag: ModelTag,
    pub chi2: f64,
    pub ndof: usize,
    pub chi2_per_dof: f64,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    /// Best first.
    pub ranking: Vec<CompareEntry>,
    /// No model improves on another by more than `TIE_DELTA_CHI2`.
    pub tied_within_statistics: bool,
}

/// Largest `Δχ²` still treated as a statistical tie (three sigma for one
/// parameter).
pub const TIE_DELTA_CHI2: f64 = 9.0;

/// Fit all three mappings to the same histogram and rank them by `χ²/ndof`.
pub fn model_compare(h: &Histogram, base: &FitOptions) -> Result<CompareReport> {
    let mut inits = vec![initial_guess(h)?];
    let mut ranking = Vec::new();
    for model in ModelTag::ALL {
        let opts = FitOptions { model, ..*base };
        let fit = fit_from(h, &inits, &opts)?;
        // later mappings also start from earlier optima, so a model that
        // contains another can never rank below it through a poor start
        inits.push(fit.params);
        ranking.push(CompareEntry {
            model_tag: model,
            chi2: fit.chi2,
            ndof: fit.ndof,
            chi2_per_dof: fit.chi2_per_dof(),
            fit,
        });
    }
    // stable sort keeps the canonical order among near-ties
    ranking.sort_by(|x, y| {
        if (x.chi2_per_dof - y.chi2_per_dof).abs() <= 1e-6 * x.chi2_per_dof.max(y.chi2_per_dof) {
            std::cmp::Ordering::Equal
        } else {
            x.chi2_per_dof.total_cmp(&y.chi2_per_dof)
        }
    });
    let lo = ranking.iter().map(|e| e.chi2).fold(f64::INFINITY, f64::min);
    let hi = ranking.iter().map(|e| e.chi2).fold(f64::NEG_INFINITY, f64::max);
    Ok(CompareReport {
        tied_within_statistics: hi - lo <= TIE_DELTA_CHI2,
        ranking,
    })
}
