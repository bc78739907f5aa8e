//! Atomic file output and the sweep CSV layout.

use std::io::Write;
use std::path::{Path, PathBuf};

use ipt_tank::SweepRow;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::CliError;

pub const SWEEP_HEADER: [&str; 13] = [
    "omega_rad_s",
    "f_hz",
    "r_ac_ohm",
    "re_zin",
    "im_zin",
    "theta_in_deg",
    "mag_vo_vin",
    "mag_io_vin_s",
    "arg_io_vin_deg",
    "arg_vo_vin_deg",
    "p_in_w",
    "p_out_w",
    "flag",
];

/// Writes `contents` to a temporary file beside `path` and renames it into
/// place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let fail = |e: &dyn std::fmt::Display| CliError::Failed(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| fail(&e))?;
    let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents).map_err(|e| fail(&e))?;
    tmp.as_file().sync_all().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_vec_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
    text.push(b'\n');
    write_atomic(path, &text)
}

/// Shortest round-trip form; exponent notation outside `[1e-4, 1e15)`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Renders sweep rows in order. Identical rows give identical bytes.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Failed(e.to_string());
    w.write_record(SWEEP_HEADER).map_err(err)?;
    for row in rows {
        let omega = row.omega();
        let mut fields = vec![
            fmt_f64(omega),
            fmt_f64(omega / (2.0 * std::f64::consts::PI)),
            fmt_f64(row.r_ac()),
        ];
        match row {
            SweepRow::Record(r) => {
                fields.extend(
                    [
                        r.z_in_re,
                        r.z_in_im,
                        r.theta_in_deg,
                        r.mag_vo_vin,
                        r.mag_io_vin,
                        r.arg_io_vin_deg,
                        r.arg_vo_vin_deg,
                        r.p_in,
                        r.p_out,
                    ]
                    .map(fmt_f64),
                );
                fields.push("OK".into());
            }
            SweepRow::Singular { .. } => {
                fields.extend(std::iter::repeat_n(String::new(), 9));
                fields.push("SINGULAR".into());
            }
        }
        w.write_record(&fields).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Failed(e.to_string()))
}
