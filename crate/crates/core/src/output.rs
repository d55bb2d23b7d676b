//! Result files: one CSV per quantity plus a JSON run manifest.
//!
//! Each CSV has the header `t,protocol,mean,stderr` and one row per
//! `(protocol, round)`, sorted by protocol name and then by round. Floats are
//! written in shortest round-trip form.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ResolvedConfig;
use crate::error::{Error, Result};
use crate::metrics::AggregateSeries;
use crate::protocol::ProtocolKind;

pub const CSV_HEADER: [&str; 4] = ["t", "protocol", "mean", "stderr"];
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    GroupRegret,
    CommCostPerAgent,
}

impl Quantity {
    pub const ALL: [Quantity; 2] = [Quantity::GroupRegret, Quantity::CommCostPerAgent];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::GroupRegret => "group_regret",
            Quantity::CommCostPerAgent => "comm_cost_per_agent",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }

    fn columns(self, s: &AggregateSeries) -> (&[f64], &[f64]) {
        match self {
            Quantity::GroupRegret => (&s.regret_mean, &s.regret_stderr),
            Quantity::CommCostPerAgent => (&s.cost_per_agent_mean, &s.cost_per_agent_stderr),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub master_seed: u64,
    pub config: ResolvedConfig,
    pub wall_clock_seconds: f64,
    /// Data files, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(config: ResolvedConfig, wall_clock_seconds: f64) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: config.seed,
            config,
            wall_clock_seconds,
            outputs: Vec::new(),
        }
    }
}

/// Serializes one quantity for every protocol to CSV bytes.
pub fn render_csv(
    results: &BTreeMap<ProtocolKind, AggregateSeries>,
    quantity: Quantity,
) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for (protocol, series) in results {
        let (mean, stderr) = quantity.columns(series);
        for (t, (m, se)) in mean.iter().zip(stderr).enumerate() {
            w.write_record([
                (t + 1).to_string(),
                protocol.name().to_string(),
                m.to_string(),
                se.to_string(),
            ])?;
        }
    }
    w.into_inner()
        .map_err(|e| Error::io("flushing csv buffer", e.into_error()))
}

/// Writes both CSVs and the manifest into `out_dir`, creating it if needed.
/// Returns the paths written, manifest last.
pub fn emit_results(
    results: &BTreeMap<ProtocolKind, AggregateSeries>,
    manifest: &mut RunManifest,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        return Err(Error::usage("no results to emit"));
    }
    fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;

    let mut written = Vec::new();
    manifest.outputs.clear();
    for q in Quantity::ALL {
        let path = out_dir.join(q.file_name());
        let bytes = render_csv(results, q)?;
        fs::write(&path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        manifest.outputs.push(q.file_name());
        written.push(path);
    }

    let path = out_dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, json + "\n")
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    written.push(path);
    Ok(written)
}

/// One protocol's `mean` column from an emitted CSV, indexed by `t - 1`.
pub fn read_series(path: &Path, protocol: ProtocolKind) -> Result<Vec<f64>> {
    let file =
        fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    read_series_from(file, protocol)
}

pub fn read_series_from<R: std::io::Read>(reader: R, protocol: ProtocolKind) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::usage(format!(
            "unexpected csv header `{}`, expected `{}`",
            header.iter().collect::<Vec<_>>().join(","),
            CSV_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let bad = |what: &str| Error::usage(format!("csv row {}: bad {what}", line + 2));
        if record[1] != *protocol.name() {
            continue;
        }
        let t: usize = record[0].parse().map_err(|_| bad("t"))?;
        if t != out.len() + 1 {
            return Err(bad("round sequence"));
        }
        out.push(record[2].parse().map_err(|_| bad("mean"))?);
    }
    if out.is_empty() {
        return Err(Error::usage(format!("no rows for protocol `{protocol}`")));
    }
    Ok(out)
}
