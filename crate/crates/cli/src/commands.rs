//! One function per subcommand. Each returns the document to write and a
//! summary line; nothing here touches the filesystem except to read inputs.

use std::f64::consts::PI;

use anyhow::Context;
use num_complex::Complex64;
use serde::Serialize;
use timerep::density::{
    ExponentialDecay, LorentzianTimeRep, ModulatedExponential, RateCurve, SurvivalDecay,
    TwoResonanceDensity,
};
use timerep::events::{bin_events, sample_decays, Generator, Histogram};
use timerep::fit::{
    fit_auto, model_compare, zero_time_discriminator, CompareReport, FitOptions, FitResult,
    FrequencyParam, ModelTag, Objective, ZeroTimeReport,
};
use timerep::gamow::gamow_rate;
use timerep::interference::{
    interference_rate, mixing_ratio_for_amplitude, Beam, GsiMapping, InterferenceRateParams,
    KaonSystem,
};
use timerep::io;
use timerep::model::{time_grid, MixedState, Resonance, UnitsContext};
use timerep::moments::{empirical_time_of_flight, time_of_flight};
use timerep::spectral::{nondecay_rate, EnergyWaveFunction};
use timerep::survival::{AppendixExample, QuantumBeatParams, SurvivalModelParams};

use crate::output::Document;
use crate::{
    usage, BeamArg, Command, CompareArgs, DensityArg, Failure, FitArgs, GeneratorArg,
    KaonArgs, ModelArg, Resolved, SampleArgs, TofArgs, TransformArgs,
};

pub struct RunOutput {
    pub payload: Document,
    pub summary: String,
}

pub fn dispatch(command: &Command, r: &Resolved) -> Result<RunOutput, Failure> {
    match command {
        Command::Transform(a) => transform(a, r),
        Command::Gamow(_) => gamow(r),
        Command::Interfere(_) => interfere(r),
        Command::Kaon(a) => kaon(a, r),
        Command::Compare(a) => compare(a, r),
        Command::Sample(a) => sample(a, r),
        Command::Fit(a) => fit(a, r),
        Command::Tof(a) => tof(a, r),
    }
}

fn units(r: &Resolved) -> Result<UnitsContext, Failure> {
    Ok(UnitsContext::with_hbar(r.hbar)?)
}

/// User-unit grid from `--t-max` and `--dt`.
fn grid(r: &Resolved) -> Result<Vec<f64>, Failure> {
    let (Some(t_max), Some(dt)) = (r.t_max, r.dt) else {
        return usage("this subcommand needs --t-max and --dt");
    };
    Ok(time_grid(t_max, dt)?)
}

fn mixed_state(r: &Resolved) -> Result<MixedState, Failure> {
    let Some(cfg) = &r.config else {
        return usage("this subcommand needs --config with two components");
    };
    Ok(cfg.mixed_state()?)
}

fn require_gamma(r: &Resolved) -> Result<f64, Failure> {
    match r.gamma {
        Some(g) => Ok(g),
        None => usage("--gamma (or a one-component --config) is required"),
    }
}

/// `(t, f(t_internal))` rows with rates rescaled to user time.
fn rate_table(
    grid: &[f64],
    u: &UnitsContext,
    f: impl Fn(f64) -> timerep::Result<f64>,
) -> Result<Vec<Vec<f64>>, Failure> {
    grid.iter()
        .map(|&t| Ok(vec![t, u.rate_from_internal(f(u.time_to_internal(t))?)]))
        .collect()
}

fn series_summary(name: &str, rows: &[Vec<f64>]) -> String {
    let first = rows.first().map(|r| r[1]).unwrap_or(f64::NAN);
    let last = rows.last().map(|r| r[0]).unwrap_or(f64::NAN);
    format!("{name}: {} points on [0, {last}], first value {first}", rows.len())
}

fn transform(a: &TransformArgs, r: &Resolved) -> Result<RunOutput, Failure> {
    let u = units(r)?;
    let wave = if let Some(path) = &a.input {
        EnergyWaveFunction::load_csv(path, io::sidecar_path(path))
            .with_context(|| format!("reading {}", path.display()))?
    } else if let Some(alpha) = a.alpha {
        EnergyWaveFunction::exponential(u.time_to_internal(alpha))?
    } else if let (Some(e_r), Some(gamma)) = (r.e_r, r.gamma) {
        EnergyWaveFunction::truncated_breit_wigner(e_r, gamma)?
    } else {
        return usage("transform needs --input, --alpha, or --e-r with --gamma");
    };
    let g = grid(r)?;
    let internal: Vec<f64> = g.iter().map(|&t| u.time_to_internal(t)).collect();
    let series = nondecay_rate(&wave, &internal, r.tol)?;
    let n0 = r.n0 as f64;
    let rows: Vec<Vec<f64>> = g
        .iter()
        .zip(series.values())
        .map(|(&t, v)| vec![t, n0 * u.rate_from_internal(v)])
        .collect();
    let summary = series_summary("transform", &rows);
    Ok(RunOutput {
        payload: Document::table(r.format, &["t", "rate"], rows),
        summary,
    })
}

fn gamow(r: &Resolved) -> Result<RunOutput, Failure> {
    let u = units(r)?;
    let res = Resonance::single(r.e_r.unwrap_or(0.0), require_gamma(r)?)?;
    let rows = rate_table(&grid(r)?, &u, |t| gamow_rate(&res, r.n0, t))?;
    let summary = format!(
        "{}, lifetime {}",
        series_summary("gamow", &rows),
        timerep::model::lifetime(&res, &u)
    );
    Ok(RunOutput {
        payload: Document::table(r.format, &["t", "rate"], rows),
        summary,
    })
}

fn interfere(r: &Resolved) -> Result<RunOutput, Failure> {
    let u = units(r)?;
    let state = mixed_state(r)?;
    let rows = rate_table(&grid(r)?, &u, |t| interference_rate(&state, r.n0, t))?;
    let mut summary = series_summary("interfere", &rows);
    if let Ok(m) = GsiMapping::from_state(&state) {
        let period = u.time_from_internal(2.0 * PI / m.omega.abs());
        summary += &format!(", equal widths: a={:.6} T={period:.6}", m.a);
    }
    Ok(RunOutput {
        payload: Document::table(r.format, &["t", "rate"], rows),
        summary,
    })
}

fn kaon(a: &KaonArgs, r: &Resolved) -> Result<RunOutput, Failure> {
    let u = units(r)?;
    let state = mixed_state(r)?;
    let [s, l] = state.components() else {
        return usage("kaon config needs exactly two components (short-lived first)");
    };
    let system = KaonSystem::new(s.resonance, l.resonance)?;
    let beam = match a.beam {
        BeamArg::K0 => Beam::K0,
        BeamArg::K0bar => Beam::K0bar,
    };
    let rows = rate_table(&grid(r)?, &u, |t| timerep::interference::kaon_rates(&system, r.n0, t, beam))?;
    let summary = series_summary("kaon", &rows);
    Ok(RunOutput {
        payload: Document::table(r.format, &["t", "rate"], rows),
        summary,
    })
}

fn compare(a: &CompareArgs, r: &Resolved) -> Result<RunOutput, Failure> {
    let u = units(r)?;
    let g = grid(r)?;
    let n0 = r.n0 as f64;
    if let Some(alpha) = a.alpha {
        let ex = AppendixExample::new(u.time_to_internal(alpha))?;
        let rows = g
            .iter()
            .map(|&t| {
                let (rate, p, dp) = timerep::survival::appendix_pair(&ex, u.time_to_internal(t))?;
                Ok(vec![t, n0 * u.rate_from_internal(rate), p, -n0 * u.rate_from_internal(dp)])
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        let summary = format!(
            "compare: {} points, rate_timerep(0)={} vs ps_rate(0)={}",
            rows.len(),
            rows[0][1],
            rows[0][3]
        );
        return Ok(RunOutput {
            payload: Document::table(r.format, &["t", "rate_timerep", "p_s", "ps_rate"], rows),
            summary,
        });
    }
    let state = mixed_state(r)?;
    let m = GsiMapping::from_state(&state)?;
    // survival and beat models with the same depth a, width and splitting
    let ratio = mixing_ratio_for_amplitude(m.a.min(1.0))?;
    let w1 = 1.0 / (1.0 + ratio);
    let survival = SurvivalModelParams::new(
        Complex64::new(w1.sqrt(), 0.0),
        Complex64::new((ratio * w1).sqrt(), 0.0),
        m.lambda,
        m.omega,
    )?;
    // P̄ chosen so the beat law also decays with total probability one
    let depth = m.a.min(1.0);
    let beat = QuantumBeatParams::new(1.0 / (1.0 + depth * m.phi.cos()), depth, m.phi, m.lambda, m.omega)?;
    let rows = g
        .iter()
        .map(|&t| {
            let s = u.time_to_internal(t);
            vec![
                t,
                n0 * u.rate_from_internal(m.density(s)),
                n0 * u.rate_from_internal(survival.rate(s)),
                n0 * u.rate_from_internal(beat.rate(s)),
            ]
        })
        .collect::<Vec<_>>();
    let summary = format!(
        "compare: {} points, a={:.6}, initial rates timerep={} survival={} quantumbeat={}",
        rows.len(),
        m.a,
        rows[0][1],
        rows[0][2],
        rows[0][3]
    );
    Ok(RunOutput {
        payload: Document::table(r.format, &["t", "timerep", "survival", "quantumbeat"], rows),
        summary,
    })
}

/// The single-particle density named by `--density`, in ħ = 1 time.
fn curve(density: DensityArg, alpha: Option<f64>, r: &Resolved, u: &UnitsContext) -> Result<Box<dyn RateCurve>, Failure> {
    let appendix = || -> Result<AppendixExample, Failure> {
        match alpha {
            Some(a) => Ok(AppendixExample::new(u.time_to_internal(a))?),
            None => usage("appendix densities need --alpha"),
        }
    };
    match density {
        DensityArg::AppendixTimerep => Ok(Box::new(LorentzianTimeRep { example: appendix()? })),
        DensityArg::AppendixSurvival => Ok(Box::new(SurvivalDecay { example: appendix()? })),
        DensityArg::State => {
            let two = r.config.as_ref().is_some_and(|c| c.components.len() == 2);
            if !two {
                return Ok(Box::new(ExponentialDecay::new(require_gamma(r)?)?));
            }
            let state = mixed_state(r)?;
            match GsiMapping::from_state(&state) {
                Ok(m) => Ok(Box::new(ModulatedExponential::new(m.lambda_ec, m.lambda, m.a, m.omega, m.phi)?)),
                Err(_) => Ok(Box::new(TwoResonanceDensity {
                    params: InterferenceRateParams::from_state(&state)?,
                })),
            }
        }
    }
}

/// Far enough out that at most ~1e-4 of a million-event exponential run is censored.
fn default_t_max(c: &dyn RateCurve) -> f64 {
    match c.tail() {
        timerep::density::TailClass::Exponential { rate } => (1e6f64.ln() + 10.0) / rate,
        timerep::density::TailClass::PowerLaw { .. } => 1e3 * c.time_scale(),
    }
}

fn sample(a: &SampleArgs, r: &Resolved) -> Result<RunOutput, Failure> {
    let u = units(r)?;
    let c = curve(a.density, a.alpha, r, &u)?;
    let t_max = match r.t_max {
        Some(t) => u.time_to_internal(t),
        None => default_t_max(c.as_ref()),
    };
    let generator = match a.generator {
        GeneratorArg::InverseCdf => Generator::InverseCdf,
        GeneratorArg::Rejection => Generator::Rejection,
    };
    let mut events = sample_decays(c.as_ref(), r.n0, r.seed, t_max, generator)?;
    for t in &mut events.times {
        *t = u.time_from_internal(*t);
    }
    events.t_max = u.time_from_internal(t_max);
    let mut csv = Vec::new();
    io::write_events(&mut csv, &events)?;
    let meta = serde_json::to_string_pretty(&io::event_meta(&events)).map_err(anyhow::Error::from)? + "\n";
    let summary = format!(
        "sample: {} events, {} censored beyond t={} (seed {}, {})",
        events.len(),
        events.censored,
        events.t_max,
        events.seed,
        c.describe()
    );
    Ok(RunOutput {
        payload: Document {
            body: String::from_utf8(csv).map_err(anyhow::Error::from)?,
            sidecar: Some(meta),
        },
        summary,
    })
}

fn histogram(a: &FitArgs, r: &Resolved) -> Result<Histogram, Failure> {
    if let Some(path) = &a.histogram {
        return Ok(io::load_histogram(path).with_context(|| format!("reading {}", path.display()))?);
    }
    let Some(path) = &a.events else {
        return usage("fit needs --events or --histogram");
    };
    let Some(dt) = r.dt else {
        return usage("binning events needs --dt");
    };
    let e = io::load_events(path).with_context(|| format!("reading {}", path.display()))?;
    let t_max = r.t_max.unwrap_or(e.t_max);
    Ok(bin_events(&e, dt, t_max)?)
}

#[derive(Serialize)]
struct FitOutput<T: Serialize> {
    #[serde(flatten)]
    result: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    zero_time: Option<ZeroTimeReport>,
}

fn json<T: Serialize>(value: &T) -> Result<Document, Failure> {
    Ok(Document {
        body: serde_json::to_string_pretty(value).map_err(anyhow::Error::from)? + "\n",
        sidecar: None,
    })
}

fn fit(a: &FitArgs, r: &Resolved) -> Result<RunOutput, Failure> {
    let h = histogram(a, r)?;
    let base = FitOptions {
        frequency: if a.period { FrequencyParam::Period } else { FrequencyParam::Omega },
        objective: if a.midpoint { Objective::Midpoint } else { Objective::Exact },
        ..FitOptions::default()
    };
    let zero = |fits: &[FitResult]| -> Result<Option<ZeroTimeReport>, Failure> {
        a.zero_time_bins
            .map(|n| zero_time_discriminator(&h, fits, n))
            .transpose()
            .map_err(Failure::from)
    };
    let model = match a.model {
        ModelArg::Timerep => ModelTag::Timerep,
        ModelArg::Survival => ModelTag::Survival,
        ModelArg::Quantumbeat => ModelTag::Quantumbeat,
        ModelArg::All => {
            let report: CompareReport = model_compare(&h, &base)?;
            let fits: Vec<FitResult> = report.ranking.iter().map(|e| e.fit.clone()).collect();
            let zero_time = zero(&fits)?;
            let best = &report.ranking[0];
            let summary = format!(
                "fit: best {} chi2/ndof={:.4} T={:.6} over {} bins{}",
                best.model_tag.name(),
                best.chi2_per_dof,
                best.fit.period,
                h.nbins(),
                if report.tied_within_statistics { " (tied within statistics)" } else { "" }
            );
            return Ok(RunOutput {
                payload: json(&FitOutput { result: report, zero_time })?,
                summary,
            });
        }
    };
    let result = fit_auto(&h, &FitOptions { model, ..base })?;
    let zero_time = zero(std::slice::from_ref(&result))?;
    let summary = format!(
        "fit: {} a={:.5}±{:.5} T={:.5}±{:.5} chi2/ndof={:.4} over {} bins",
        model.name(),
        result.params.a,
        result.stderr.a,
        result.period,
        result.period_stderr,
        result.chi2_per_dof(),
        h.nbins()
    );
    Ok(RunOutput {
        payload: json(&FitOutput { result, zero_time })?,
        summary,
    })
}

fn tof(a: &TofArgs, r: &Resolved) -> Result<RunOutput, Failure> {
    if let Some(path) = &a.events {
        let e = io::load_events(path).with_context(|| format!("reading {}", path.display()))?;
        let mean = empirical_time_of_flight(&e)?;
        #[derive(Serialize)]
        struct Empirical {
            mean: f64,
            events: usize,
        }
        let summary = format!("tof: empirical mean {mean} from {} events", e.len());
        return Ok(RunOutput {
            payload: json(&Empirical { mean, events: e.len() })?,
            summary,
        });
    }
    let u = units(r)?;
    let c = curve(a.density, a.alpha, r, &u)?;
    let report = time_of_flight(c.as_ref(), r.tol)?.in_units(&u);
    let summary = match report.mean {
        Some(m) => format!("tof: mean {m} for {}", c.describe()),
        None => format!("tof: mean undefined (divergent first moment) for {}", c.describe()),
    };
    Ok(RunOutput {
        payload: json(&report)?,
        summary,
    })
}
