//! Browser bindings for the decay demo in `www/`.
//!
//! Curves come back as flat row-major `Float64Array`s; the page knows the
//! column count of each.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(e: timerep::DecayError) -> JsError {
    JsError::new(&e.to_string())
}

/// Columns: `t`, closed-form rate, numerically transformed rate, survival-law rate.
#[wasm_bindgen]
pub fn appendix_curves(alpha: f64, t_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    demo::appendix_rows(alpha, t_max, points).map_err(js)
}

/// Columns: `t`, modulated rate, its exponential envelope.
#[wasm_bindgen]
pub fn interference_curve(a: f64, period: f64, lifetime: f64, t_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    demo::interference_rows(a, period, lifetime, t_max, points).map_err(js)
}

#[wasm_bindgen]
pub struct FitSummary(demo::SampledFit);

#[wasm_bindgen]
impl FitSummary {
    #[wasm_bindgen(getter)]
    pub fn dt(&self) -> f64 {
        self.0.dt
    }
    pub fn counts(&self) -> Vec<f64> {
        self.0.counts.clone()
    }
    pub fn expected(&self) -> Vec<f64> {
        self.0.expected.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn a(&self) -> f64 {
        self.0.a
    }
    #[wasm_bindgen(getter)]
    pub fn a_err(&self) -> f64 {
        self.0.a_err
    }
    #[wasm_bindgen(getter)]
    pub fn period(&self) -> f64 {
        self.0.period
    }
    #[wasm_bindgen(getter)]
    pub fn period_err(&self) -> f64 {
        self.0.period_err
    }
    #[wasm_bindgen(getter)]
    pub fn lifetime(&self) -> f64 {
        self.0.lifetime
    }
    #[wasm_bindgen(getter)]
    pub fn chi2_per_dof(&self) -> f64 {
        self.0.chi2_per_dof
    }
}

/// Sample a GSI-like decay histogram and fit it.
#[wasm_bindgen]
pub fn sample_gsi_histogram(
    a: f64,
    period: f64,
    lifetime: f64,
    n0: u32,
    seed: u32,
    dt: f64,
    t_max: f64,
) -> Result<FitSummary, JsError> {
    demo::sample_and_fit(a, period, lifetime, n0, seed as u64, dt, t_max)
        .map(FitSummary)
        .map_err(js)
}
