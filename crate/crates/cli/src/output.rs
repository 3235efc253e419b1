//! Writing results and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use timerep::io::{fmt_f64, sidecar_path, write_columns_csv};

use crate::{Failure, Format, Resolved};

/// A rendered result plus an optional JSON sidecar (written only beside a file).
pub struct Document {
    pub body: String,
    pub sidecar: Option<String>,
}

impl Document {
    /// Rows of floats as CSV or as `{"columns": [...], "rows": [[...]]}`.
    pub fn table(format: Format, header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        let body = match format {
            Format::Csv => {
                let mut buf = Vec::new();
                write_columns_csv(&mut buf, header, &rows).expect("writing to memory cannot fail");
                String::from_utf8(buf).expect("CSV output is ASCII")
            }
            Format::Json => {
                // same digits as the CSV path, emitted as raw JSON numbers
                let cols = header.iter().map(|h| format!("\"{h}\"")).collect::<Vec<_>>().join(", ");
                let mut s = format!("{{\n  \"columns\": [{cols}],\n  \"rows\": [\n");
                for (i, row) in rows.iter().enumerate() {
                    let cells = row.iter().map(|&v| json_number(v)).collect::<Vec<_>>().join(", ");
                    let sep = if i + 1 < rows.len() { "," } else { "" };
                    s += &format!("    [{cells}]{sep}\n");
                }
                s + "  ]\n}\n"
            }
        };
        Self { body, sidecar: None }
    }
}

fn json_number(v: f64) -> String {
    if v.is_finite() {
        fmt_f64(v)
    } else {
        "null".into()
    }
}

/// Write the document to `out` (plus its sidecar) or to stdout. Returns the
/// paths written.
pub fn emit(doc: &Document, out: Option<&Path>) -> Result<Vec<PathBuf>, Failure> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(doc.body.as_bytes()).context("writing to stdout")?;
        stdout.flush().context("writing to stdout")?;
        return Ok(Vec::new());
    };
    std::fs::write(path, &doc.body).with_context(|| format!("writing {}", path.display()))?;
    let mut written = vec![path.to_path_buf()];
    if let Some(side) = &doc.sidecar {
        let p = sidecar_path(path);
        std::fs::write(&p, side).with_context(|| format!("writing {}", p.display()))?;
        written.push(p);
    }
    Ok(written)
}

/// `r.csv` → `r.csv.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Everything needed to repeat a run. The configuration file is embedded so
/// a replay does not depend on it still existing.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    pub resolved: Resolved,
    pub outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(subcommand: &str, argv: Vec<String>, resolved: Resolved, outputs: Vec<PathBuf>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            argv,
            resolved,
            outputs,
        }
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("{} is not a run manifest: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(self).context("serializing manifest")? + "\n";
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
