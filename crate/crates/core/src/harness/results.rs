//! Results directory: `<out>/<hash>/{config.json, norms.csv, fits.json,
//! fields/*.bin, curves.svg}` plus any experiment tables.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::Result;
use crate::harness::experiments::{NormRow, Outcome};
use crate::plot::render_svg;
use crate::spectral::container::write_field;

pub fn norms_csv(rows: &[NormRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["t", "name", "s", "p", "r", "window", "value"])?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes every artifact of `outcome`; returns the run directory.
pub fn write_results(outcome: &Outcome, cfg: &RunConfig, out_dir: &Path) -> Result<PathBuf> {
    let dir = out_dir.join(cfg.short_hash()?);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(cfg)? + "\n")?;
    fs::write(dir.join("norms.csv"), norms_csv(&outcome.norms)?)?;
    fs::write(dir.join("fits.json"), outcome.fits_json()?)?;
    fs::write(dir.join("checks.json"), serde_json::to_string_pretty(&outcome.checks)? + "\n")?;
    if !outcome.fields.is_empty() {
        let fdir = dir.join("fields");
        fs::create_dir_all(&fdir)?;
        for (name, field) in &outcome.fields {
            write_field(&fdir.join(format!("{name}.bin")), field)?;
        }
    }
    if let Some((kind, title)) = &outcome.plot {
        if !outcome.curves.is_empty() {
            fs::write(dir.join("curves.svg"), render_svg(&outcome.curves, *kind, title)?)?;
        }
    }
    for (name, text) in &outcome.tables {
        fs::write(dir.join(name), text)?;
    }
    Ok(dir)
}
