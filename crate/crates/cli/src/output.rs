//! File formats: NDJSON records, CSV traces and snapshots, the run manifest.
//!
//! Reals are written with 17 significant digits so that they round-trip.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use kgsim::diagnostics::DiagRecord;
use kgsim::{FieldState, GridSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `{:.16e}`, or `null` for non-finite values in JSON.
pub fn json_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

pub fn csv_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io(path))
}

/// One JSON object per record, preceded by a header object with the config hash.
pub fn ndjson(records: &[DiagRecord], hash: &str) -> String {
    let mut out = format!("{{\"config_hash\":\"{hash}\",\"artifact_version\":\"{ARTIFACT_VERSION}\"}}\n");
    for r in records {
        let semi: Vec<String> = r.seminorms.iter().map(|(radius, v)| format!("\"{radius}\":{}", json_num(*v))).collect();
        let dist = r.ef_metric_to_s.map(json_num).unwrap_or_else(|| "null".into());
        let peaks = match &r.spectral {
            Some(s) => {
                let list: Vec<String> = s
                    .peaks
                    .iter()
                    .map(|p| format!("[{},{},{}]", json_num(p.frequency), json_num(p.magnitude), json_num(p.mass)))
                    .collect();
                format!("[{}]", list.join(","))
            }
            None => "null".into(),
        };
        let _ = writeln!(
            out,
            "{{\"t\":{},\"E\":{},\"Q\":{},\"semi_R\":{{{}}},\"ef_norm\":{},\"dist_S\":{},\"peaks\":{}}}",
            json_num(r.time),
            json_num(r.energy),
            json_num(r.charge),
            semi.join(","),
            json_num(r.ef_norm),
            dist,
            peaks
        );
    }
    out
}

/// `t` then real and imaginary parts of every trace, one row per step.
pub fn traces_csv(traces: &[Vec<Complex64>], dt: f64, hash: &str) -> String {
    let mut out = format!("# config_hash={hash}\nt");
    for k in 0..traces.len() {
        let _ = write!(out, ",trace{k}_re,trace{k}_im");
    }
    out.push('\n');
    let len = traces.iter().map(Vec::len).min().unwrap_or(0);
    for n in 0..len {
        out.push_str(&csv_num(n as f64 * dt));
        for t in traces {
            let _ = write!(out, ",{},{}", csv_num(t[n].re), csv_num(t[n].im));
        }
        out.push('\n');
    }
    out
}

pub fn snapshot_csv(state: &FieldState, grid: &GridSpec, hash: &str) -> String {
    let mut out = format!("# config_hash={hash}\n# t={}\nx,psi_re,psi_im,pi_re,pi_im\n", csv_num(state.time));
    for j in 0..state.len() {
        let (p, q) = (state.psi[j], state.pi[j]);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_num(grid.x(j)),
            csv_num(p.re),
            csv_num(p.im),
            csv_num(q.re),
            csv_num(q.im)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub artifact_version: String,
    /// Seconds since the Unix epoch.
    pub start_wall_time: f64,
    pub end_wall_time: f64,
    pub status: String,
    pub files: Vec<String>,
}

pub const MANIFEST: &str = "manifest.json";

pub fn read_manifest(dir: &Path) -> Result<Option<RunManifest>, CliError> {
    let path = dir.join(MANIFEST);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(io(&path))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::Io(format!("{}: unreadable manifest: {e}", path.display())))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let path = dir.join(MANIFEST);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir))?;
    let text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Io(e.to_string()))?;
    tmp.write_all(text.as_bytes()).map_err(io(&path))?;
    tmp.write_all(b"\n").map_err(io(&path))?;
    tmp.as_file().sync_all().map_err(io(&path))?;
    tmp.persist(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn wall_time() -> f64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}
