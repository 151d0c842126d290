//! CSV and JSON writers for ROC curves.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use dht_core::sim::RocCurve;

use crate::RunManifest;

pub const CSV_HEADER: [&str; 12] = [
    "scheme", "setup", "n", "rate", "threshold", "alpha", "beta", "alpha_ci", "beta_ci", "trials", "engine", "seed",
];

/// One output row; the field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub scheme: String,
    pub setup: String,
    pub n: usize,
    pub rate: f64,
    pub threshold: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_ci: f64,
    pub beta_ci: f64,
    pub trials: u64,
    pub engine: String,
    pub seed: Option<u64>,
}

pub fn rows(curve: &RocCurve) -> Vec<Row> {
    curve
        .points
        .iter()
        .map(|p| Row {
            scheme: curve.scheme.to_string(),
            setup: curve.setup.to_string(),
            n: curve.n,
            rate: curve.rate,
            threshold: p.threshold,
            alpha: p.alpha,
            beta: p.beta,
            alpha_ci: p.alpha_ci,
            beta_ci: p.beta_ci,
            trials: p.trials_h0,
            engine: curve.engine.to_string(),
            seed: curve.seed,
        })
        .collect()
}

pub fn write_csv(curve: &RocCurve, w: impl Write) -> anyhow::Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for row in rows(curve) {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Document<'a> {
    manifest: &'a RunManifest,
    rows: Vec<Row>,
}

pub fn write_json(manifest: &RunManifest, curve: &RocCurve, mut w: impl Write) -> anyhow::Result<()> {
    let doc = Document {
        manifest,
        rows: rows(curve),
    };
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    Ok(())
}

/// `<out>.manifest.json` next to a CSV file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
