//! CSV export and import of event sets, histograms and time series, with
//! JSON sidecars carrying the generating parameters.
//!
//! Floats are written with 17 significant digits so they parse back to the
//! same bits.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{DecayError, Result};
use crate::events::{EventSet, Generator, Histogram};
use crate::model::TimeSeries;

/// `{:.16e}` keeps every bit of an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `data.csv` → `data.csv.json`.
pub fn sidecar_path(path: impl AsRef<Path>) -> PathBuf {
    let mut s = path.as_ref().as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn csv_err(e: csv::Error) -> DecayError {
    DecayError::Parse(e.to_string())
}

fn parse_f64(field: &str, line: u64) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| DecayError::Parse(format!("line {line}: '{field}' is not a number")))
}

fn expect_header<R: Read>(r: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let h = r.headers().map_err(csv_err)?;
    let got: Vec<&str> = h.iter().map(str::trim).collect();
    if got != expected {
        return Err(DecayError::Parse(format!(
            "expected CSV header '{}', found '{}'",
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

/// Write a two-column series with the given header.
pub fn write_series_csv<W: Write>(w: W, header: [&str; 2], series: &TimeSeries) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for &(t, v) in series.points() {
        out.write_record([fmt_f64(t), fmt_f64(v)]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Write columns `t, c₁, c₂, ...` with the given header.
pub fn write_columns_csv<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for row in rows {
        out.write_record(row.iter().map(|x| fmt_f64(*x))).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Sidecar of an [`EventSet`]: everything except the timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventMeta {
    pub n0: u64,
    pub seed: u64,
    pub generator: Generator,
    pub t_max: f64,
    pub censored: u64,
    pub events: u64,
    pub truth: Option<String>,
}

pub fn write_events<W: Write>(w: W, e: &EventSet) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(["t"]).map_err(csv_err)?;
    for &t in &e.times {
        out.write_record([fmt_f64(t)]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn event_meta(e: &EventSet) -> EventMeta {
    EventMeta {
        n0: e.n0,
        seed: e.seed,
        generator: e.generator,
        t_max: e.t_max,
        censored: e.censored,
        events: e.times.len() as u64,
        truth: e.truth.clone(),
    }
}

/// Write `path` and its sidecar.
pub fn save_events(path: impl AsRef<Path>, e: &EventSet) -> Result<()> {
    write_events(std::fs::File::create(path.as_ref())?, e)?;
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&event_meta(e))? + "\n")?;
    Ok(())
}

/// Read timestamps from a single-column `t` CSV.
pub fn read_event_times<R: Read>(r: R) -> Result<Vec<f64>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    expect_header(&mut rd, &["t"])?;
    let mut times = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        times.push(parse_f64(&rec[0], i as u64 + 2)?);
    }
    Ok(times)
}

/// Read an event CSV; the sidecar supplies `n0` and provenance when present,
/// otherwise every listed event counts toward `n0`.
pub fn load_events(path: impl AsRef<Path>) -> Result<EventSet> {
    let times = read_event_times(std::fs::File::open(path.as_ref())?)?;
    let side = sidecar_path(path.as_ref());
    if !side.exists() {
        let n0 = times.len() as u64;
        let t_max = times.iter().copied().fold(0.0, f64::max);
        return EventSet::from_times(times, n0, t_max);
    }
    let meta: EventMeta = serde_json::from_str(&std::fs::read_to_string(side)?)?;
    if meta.events != times.len() as u64 {
        return Err(DecayError::Parse(format!(
            "sidecar lists {} events but the CSV holds {}",
            meta.events,
            times.len()
        )));
    }
    let mut e = EventSet::from_times(times, meta.n0, meta.t_max)?;
    e.censored = meta.censored;
    e.seed = meta.seed;
    e.generator = meta.generator;
    e.truth = meta.truth;
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramMeta {
    pub dt: f64,
    pub n0: u64,
    pub overflow: u64,
}

pub fn write_histogram<W: Write>(w: W, h: &Histogram) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(["t_lo", "t_hi", "count"]).map_err(csv_err)?;
    for (k, c) in h.counts.iter().enumerate() {
        out.write_record([fmt_f64(h.edge(k)), fmt_f64(h.edge(k + 1)), c.to_string()])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_histogram(path: impl AsRef<Path>, h: &Histogram) -> Result<()> {
    write_histogram(std::fs::File::create(path.as_ref())?, h)?;
    let meta = HistogramMeta {
        dt: h.dt,
        n0: h.n0,
        overflow: h.overflow,
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

/// Read a `t_lo,t_hi,count` CSV with uniform bins starting at zero.
pub fn load_histogram(path: impl AsRef<Path>) -> Result<Histogram> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(std::fs::File::open(path.as_ref())?);
    expect_header(&mut rd, &["t_lo", "t_hi", "count"])?;
    let mut counts = Vec::new();
    let mut dt = None;
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i as u64 + 2;
        let (lo, hi) = (parse_f64(&rec[0], line)?, parse_f64(&rec[1], line)?);
        let c: u64 = rec[2]
            .parse()
            .map_err(|_| DecayError::Parse(format!("line {line}: count '{}' is not an integer", &rec[2])))?;
        let width = *dt.get_or_insert(hi - lo);
        if (lo - i as f64 * width).abs() > 1e-9 * width.max(hi) || ((hi - lo) - width).abs() > 1e-9 * width {
            return Err(DecayError::Parse(format!("line {line}: bins must be uniform and start at 0")));
        }
        counts.push(c);
    }
    let dt = dt.ok_or_else(|| DecayError::Parse("histogram has no bins".into()))?;
    let side = sidecar_path(path.as_ref());
    let (n0, overflow) = if side.exists() {
        let meta: HistogramMeta = serde_json::from_str(&std::fs::read_to_string(side)?)?;
        (meta.n0, meta.overflow)
    } else {
        (counts.iter().sum(), 0)
    };
    Histogram::new(dt, counts, overflow, n0)
}
