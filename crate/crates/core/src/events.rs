//! Monte Carlo decay timestamps, histograms and count reconstruction.
//!
//! Draws come from ChaCha8 (`rand_chacha`). Events are produced in chunks of
//! [`CHUNK`]; chunk `k` uses the generator seeded with `seed` on stream `k`,
//! so the output does not depend on the number of threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::density::{integrate_half_line, RateCurve, TailClass};
use crate::error::{domain, DecayError, Result};
use crate::model::{TimeSeries, ValueKind};
use crate::{par, quad};

/// Events generated per RNG stream.
pub const CHUNK: u64 = 16_384;

/// Largest admissible CDF interpolation error.
pub const CDF_TOLERANCE: f64 = 1e-8;

/// Allowed gap between the integrated and the declared single-particle mass.
pub const MASS_TOLERANCE: f64 = 1e-6;

const MAX_CDF_NODES: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    #[default]
    InverseCdf,
    Rejection,
}

/// Decay timestamps plus the draws that fell beyond `t_max` (or, for a
/// representation with mass at negative times, never reached `t ≥ 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSet {
    pub times: Vec<f64>,
    pub censored: u64,
    pub n0: u64,
    pub seed: u64,
    pub generator: Generator,
    pub t_max: f64,
    pub truth: Option<String>,
}

impl EventSet {
    /// Wrap externally produced timestamps.
    pub fn from_times(times: Vec<f64>, n0: u64, t_max: f64) -> Result<Self> {
        if let Some(bad) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return domain(format!("event times must be finite and nonnegative, got {bad}"));
        }
        if (times.len() as u64) > n0 {
            return domain(format!("{} events exceed the exposure n0={n0}", times.len()));
        }
        Ok(Self {
            censored: n0 - times.len() as u64,
            times,
            n0,
            seed: 0,
            generator: Generator::InverseCdf,
            t_max,
            truth: None,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Piecewise-cubic monotone interpolant of a numerically integrated CDF.
#[derive(Debug, Clone)]
pub struct CdfTable {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
    // limited end slopes of each interval
    slopes: Vec<(f64, f64)>,
}

fn limited_slopes(h: f64, f0: f64, f1: f64, d0: f64, d1: f64) -> (f64, f64) {
    let delta = (f1 - f0) / h;
    if delta <= 0.0 {
        return (0.0, 0.0);
    }
    let (alpha, beta) = (d0.max(0.0) / delta, d1.max(0.0) / delta);
    let r = alpha.hypot(beta);
    if r > 3.0 {
        let tau = 3.0 / r;
        (tau * alpha * delta, tau * beta * delta)
    } else {
        (alpha * delta, beta * delta)
    }
}

fn hermite(s: f64, h: f64, f0: f64, f1: f64, d: (f64, f64)) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * f0
        + (s3 - 2.0 * s2 + s) * h * d.0
        + (-2.0 * s3 + 3.0 * s2) * f1
        + (s3 - s2) * h * d.1
}

fn hermite_slope(s: f64, h: f64, f0: f64, f1: f64, d: (f64, f64)) -> f64 {
    let s2 = s * s;
    ((6.0 * s2 - 6.0 * s) * f0 + (3.0 * s2 - 4.0 * s + 1.0) * h * d.0 + (-6.0 * s2 + 6.0 * s) * f1
        + (3.0 * s2 - 2.0 * s) * h * d.1)
        / h
}

fn checked_density(curve: &dyn RateCurve, t: f64) -> Result<f64> {
    let v = curve.density(t);
    if v.is_nan() || v < -1e-12 {
        return domain(format!(
            "rate model must be nonnegative; {} gives {v} at t={t}",
            curve.describe()
        ));
    }
    Ok(v.max(0.0))
}

fn initial_breaks(curve: &dyn RateCurve, t_max: f64) -> Vec<f64> {
    let scale = curve.time_scale().min(t_max);
    let mut out = vec![0.0];
    match curve.tail() {
        TailClass::Exponential { .. } => {
            let n = ((t_max / scale).ceil() as usize).clamp(1, 200_000);
            out.extend((1..=n).map(|k| t_max * k as f64 / n as f64));
        }
        TailClass::PowerLaw { .. } => {
            let mut t = 0.0;
            while t < t_max {
                let step = if t < 64.0 * scale { scale } else { t / 8.0 };
                t = (t + step).min(t_max);
                out.push(t);
            }
        }
    }
    out
}

impl CdfTable {
    /// Tabulate `F(t) = ∫₀^t ρ` on `[0, t_max]`, refining until the cubic
    /// interpolant is within [`CDF_TOLERANCE`] of the integrated CDF.
    pub fn build(curve: &dyn RateCurve, t_max: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return domain(format!("t_max must be positive, got {t_max}"));
        }
        let mut table = Self {
            nodes: vec![0.0],
            cdf: vec![0.0],
            slopes: Vec::new(),
        };
        let mut last_density = checked_density(curve, 0.0)?;
        let f = |t: f64| curve.density(t).max(0.0);
        let breaks = initial_breaks(curve, t_max);
        let mut stack: Vec<(f64, f64, u32)> = Vec::new();
        for w in breaks.windows(2) {
            stack.push((w[0], w[1], 0));
            while let Some((a, b, depth)) = stack.pop() {
                let h = b - a;
                let (mass, err) = quad::gk21(&f, a, b);
                let fb = checked_density(curve, b)?;
                let f0 = *table.cdf.last().expect("nonempty");
                let d = limited_slopes(h, f0, f0 + mass, last_density, fb);
                let accurate = err <= 1e-3 * CDF_TOLERANCE
                    && [0.3, 0.7].iter().all(|&s| {
                        let exact = f0 + quad::gk21(&f, a, a + s * h).0;
                        (hermite(s, h, f0, f0 + mass, d) - exact).abs() <= CDF_TOLERANCE
                    });
                if accurate || depth >= 48 {
                    if !accurate {
                        return Err(DecayError::NonConvergence {
                            worst_point: a,
                            worst_error: err,
                            tolerance: CDF_TOLERANCE,
                        });
                    }
                    table.nodes.push(b);
                    table.cdf.push(f0 + mass);
                    table.slopes.push(d);
                    last_density = fb;
                    if table.nodes.len() > MAX_CDF_NODES {
                        return domain(format!(
                            "CDF table for {} exceeded {MAX_CDF_NODES} nodes",
                            curve.describe()
                        ));
                    }
                } else {
                    let m = 0.5 * (a + b);
                    stack.push((m, b, depth + 1));
                    stack.push((a, m, depth + 1));
                }
            }
        }
        Ok(table)
    }

    pub fn total(&self) -> f64 {
        *self.cdf.last().expect("nonempty")
    }

    pub fn nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let t_max = *self.nodes.last().expect("nonempty");
        if t >= t_max {
            return self.total();
        }
        let k = self.nodes.partition_point(|&x| x <= t) - 1;
        let h = self.nodes[k + 1] - self.nodes[k];
        hermite((t - self.nodes[k]) / h, h, self.cdf[k], self.cdf[k + 1], self.slopes[k])
    }

    /// Solve `F(t) = u` for `u < total()`.
    pub fn invert(&self, u: f64) -> f64 {
        let k = (self.cdf.partition_point(|&c| c <= u)).clamp(1, self.nodes.len() - 1) - 1;
        let (a, b) = (self.nodes[k], self.nodes[k + 1]);
        let h = b - a;
        let (f0, f1, d) = (self.cdf[k], self.cdf[k + 1], self.slopes[k]);
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut s = if f1 > f0 { ((u - f0) / (f1 - f0)).clamp(0.0, 1.0) } else { 0.5 };
        for _ in 0..100 {
            let r = hermite(s, h, f0, f1, d) - u;
            if r > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let slope = hermite_slope(s, h, f0, f1, d) * h;
            let mut next = if slope > 0.0 { s - r / slope } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 1e-15 || hi - lo <= 1e-15 {
                s = next;
                break;
            }
            s = next;
        }
        a + s * h
    }
}

/// Integrated single-particle mass, checked against the model's declaration.
pub fn check_normalization(curve: &dyn RateCurve) -> Result<f64> {
    let q = integrate_half_line(&|t| curve.density(t).max(0.0), curve.tail(), curve.time_scale(), 1e-10);
    let declared = curve.declared_mass();
    if !q.converged || (q.value - declared).abs() > MASS_TOLERANCE {
        return domain(format!(
            "rate model {} is not normalized per particle: integrates to {} (expected {declared})",
            curve.describe(),
            q.value
        ));
    }
    Ok(q.value)
}

fn chunk_sizes(n0: u64) -> Vec<(u64, u64)> {
    (0..n0.div_ceil(CHUNK))
        .map(|k| (k, CHUNK.min(n0 - k * CHUNK)))
        .collect()
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn assemble(parts: Vec<(Vec<f64>, u64)>) -> (Vec<f64>, u64) {
    let mut times = Vec::with_capacity(parts.iter().map(|p| p.0.len()).sum());
    let mut censored = 0;
    for (t, c) in parts {
        times.extend(t);
        censored += c;
    }
    (times, censored)
}

/// Draw `n0` decay times from `curve`; draws past `t_max` are censored.
pub fn sample_decays(
    curve: &dyn RateCurve,
    n0: u64,
    seed: u64,
    t_max: f64,
    generator: Generator,
) -> Result<EventSet> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return domain(format!("t_max must be positive, got {t_max}"));
    }
    check_normalization(curve)?;
    let (times, censored) = match generator {
        Generator::InverseCdf => {
            let table = CdfTable::build(curve, t_max)?;
            let covered = table.total();
            let parts = par::map(&chunk_sizes(n0), |&(k, n)| {
                let mut rng = chunk_rng(seed, k);
                let mut out = Vec::with_capacity(n as usize);
                let mut censored = 0;
                for _ in 0..n {
                    let u: f64 = rng.random();
                    if u < covered {
                        out.push(table.invert(u));
                    } else {
                        censored += 1;
                    }
                }
                (out, censored)
            });
            assemble(parts)
        }
        Generator::Rejection => {
            let env = curve.envelope().ok_or_else(|| {
                DecayError::Domain(format!("{} has no exponential envelope for rejection sampling", curve.describe()))
            })?;
            check_envelope(curve, t_max)?;
            let accept_rate = curve.declared_mass() * env.rate / env.amplitude;
            let parts = par::map(&chunk_sizes(n0), |&(k, n)| -> Result<(Vec<f64>, u64)> {
                let mut rng = chunk_rng(seed, k);
                let mut out = Vec::with_capacity(n as usize);
                let mut censored = 0;
                let declared = curve.declared_mass();
                for _ in 0..n {
                    if declared < 1.0 && rng.random::<f64>() >= declared {
                        censored += 1;
                        continue;
                    }
                    let mut trials = 0u64;
                    let t = loop {
                        trials += 1;
                        let t = -(1.0 - rng.random::<f64>()).ln() / env.rate;
                        let e = env.at(t);
                        let rho = curve.density(t);
                        if rho > e * (1.0 + 1e-9) {
                            return Err(DecayError::Envelope {
                                t,
                                density: rho,
                                envelope: e,
                                acceptance: accept_rate,
                            });
                        }
                        if rng.random::<f64>() * e < rho {
                            break t;
                        }
                        if trials > 10_000_000 {
                            return domain(format!(
                                "rejection sampler stalled (expected acceptance rate {accept_rate:.3e})"
                            ));
                        }
                    };
                    if t < t_max {
                        out.push(t);
                    } else {
                        censored += 1;
                    }
                }
                Ok((out, censored))
            });
            assemble(parts.into_iter().collect::<Result<Vec<_>>>()?)
        }
    };
    Ok(EventSet {
        times,
        censored,
        n0,
        seed,
        generator,
        t_max,
        truth: Some(curve.describe()),
    })
}

/// Check `ρ ≤ envelope` on a dense grid over `[0, t_max]`.
pub fn check_envelope(curve: &dyn RateCurve, t_max: f64) -> Result<()> {
    let env = curve
        .envelope()
        .ok_or_else(|| DecayError::Domain(format!("{} declares no envelope", curve.describe())))?;
    let mass_bound = env.amplitude / env.rate;
    let n = 20_000;
    for k in 0..=n {
        let t = t_max * k as f64 / n as f64;
        let (rho, e) = (curve.density(t), env.at(t));
        if rho > e * (1.0 + 1e-9) {
            return Err(DecayError::Envelope {
                t,
                density: rho,
                envelope: e,
                acceptance: curve.declared_mass() / mass_bound,
            });
        }
    }
    Ok(())
}

/// Counts in right-open bins `[k·dt, (k+1)·dt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub dt: f64,
    pub counts: Vec<u64>,
    pub overflow: u64,
    pub n0: u64,
}

impl Histogram {
    pub fn new(dt: f64, counts: Vec<u64>, overflow: u64, n0: u64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return domain(format!("bin width must be positive, got {dt}"));
        }
        let total: u64 = counts.iter().sum();
        if total + overflow > n0 {
            return domain(format!("histogram holds {} events but n0={n0}", total + overflow));
        }
        Ok(Self {
            dt,
            counts,
            overflow,
            n0,
        })
    }

    pub fn nbins(&self) -> usize {
        self.counts.len()
    }

    pub fn edge(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.edge(self.nbins())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn bin_index(t: f64, dt: f64) -> usize {
    let mut k = (t / dt).floor() as usize;
    while k > 0 && t < k as f64 * dt {
        k -= 1;
    }
    while t >= (k + 1) as f64 * dt {
        k += 1;
    }
    k
}

pub fn bin_events(e: &EventSet, dt: f64, t_max: f64) -> Result<Histogram> {
    if !(dt > 0.0 && dt.is_finite()) {
        return domain(format!("bin width must be positive, got {dt}"));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return domain(format!("t_max must be positive, got {t_max}"));
    }
    let nbins = ((t_max / dt).round() as usize).max(1);
    let mut counts = vec![0u64; nbins];
    let mut overflow = e.censored;
    for &t in &e.times {
        let k = bin_index(t, dt);
        if k < nbins {
            counts[k] += 1;
        } else {
            overflow += 1;
        }
    }
    Histogram::new(dt, counts, overflow, e.n0)
}

/// Undecayed population `N(t_k) = n0 − Σ_{j<k} count_j` at every bin edge.
pub fn reconstruct_counts(h: &Histogram) -> TimeSeries {
    let mut remaining = h.n0;
    let mut points = Vec::with_capacity(h.nbins() + 1);
    points.push((0.0, remaining as f64));
    for (k, &c) in h.counts.iter().enumerate() {
        remaining -= c;
        points.push((h.edge(k + 1), remaining as f64));
    }
    TimeSeries::new(points, ValueKind::Counts).expect("edges increase and counts stay nonnegative")
}

/// Kolmogorov–Smirnov distance between a sample and a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample critical distance at significance `alpha`.
pub fn ks_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{ExponentialDecay, ModulatedExponential};
    use std::f64::consts::PI;

    #[test]
    fn cdf_table_matches_closed_form() {
        let m = ModulatedExponential::normalized(0.05, 0.2, 2.0 * PI / 7.0, 0.4).unwrap();
        let table = CdfTable::build(&m, 300.0).unwrap();
        for k in 0..3000 {
            let t = 0.1 * k as f64 + 0.037;
            assert!((table.eval(t) - m.integral(0.0, t)).abs() < 2e-8, "t={t}");
        }
        for &u in &[1e-9, 0.1, 0.5, 0.9, 0.99] {
            let t = table.invert(u);
            assert!((table.eval(t) - u).abs() < 1e-13);
        }
    }

    #[test]
    fn binning_is_right_open() {
        let e = EventSet::from_times(vec![0.1, 0.1, 2.5], 3, 3.0).unwrap();
        assert_eq!(bin_events(&e, 1.0, 3.0).unwrap().counts, vec![2, 0, 1]);
        let e = EventSet::from_times(vec![1.0], 1, 3.0).unwrap();
        assert_eq!(bin_events(&e, 1.0, 3.0).unwrap().counts, vec![0, 1, 0]);
        assert!(bin_events(&e, 0.0, 3.0).is_err());
        assert!(bin_events(&e, -1.0, 3.0).is_err());
    }

    #[test]
    fn reconstruction_steps() {
        let h = Histogram::new(1.0, vec![0, 0, 0], 0, 10).unwrap();
        assert!(reconstruct_counts(&h).values().all(|v| v == 10.0));
        let h = Histogram::new(1.0, vec![4, 0, 0], 0, 10).unwrap();
        let v: Vec<f64> = reconstruct_counts(&h).values().collect();
        assert_eq!(v, vec![10.0, 6.0, 6.0, 6.0]);
    }

    #[test]
    fn thread_independent_chunks() {
        let d = ExponentialDecay::new(1.0).unwrap();
        let a = sample_decays(&d, 40_000, 9, 50.0, Generator::InverseCdf).unwrap();
        let b = sample_decays(&d, 40_000, 9, 50.0, Generator::InverseCdf).unwrap();
        assert_eq!(a, b);
        let c = sample_decays(&d, 40_000, 10, 50.0, Generator::InverseCdf).unwrap();
        assert_ne!(a.times, c.times);
    }

    #[test]
    fn ks_helpers() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        let d = ks_statistic(&[0.5], |x| x);
        assert!((d - 0.5).abs() < 1e-15);
        assert!((ks_critical(100_000, 100_000, 0.01) - 0.00728).abs() < 1e-5);
    }
}
