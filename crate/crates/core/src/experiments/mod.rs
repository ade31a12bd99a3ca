//! Scripted reproductions of the standard boundary studies.
//!
//! Each study has a parameter struct whose defaults describe the reference
//! setup at 100 GHz, a typed `run_*` function, and a tabular rendering used by
//! [`run`] to emit CSV. Overrides are JSON objects merged key by key into the
//! defaults; unknown keys are rejected. Output is deterministic: rows are
//! computed in parallel but emitted in grid order, and floats are printed in
//! shortest round-trip form.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

mod fig2;
mod fig3;
mod fig4;
mod fig5;

pub use fig2::{run_fig2, ura_family_scene, Fig2Params, Fig2Row};
pub use fig3::{run_fig3, Fig3Params, Fig3Row};
pub use fig4::{run_fig4, Fig4Mode, Fig4Params, Fig4Row};
pub use fig5::{run_fig5a, run_fig5b, Fig5Params, Fig5Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    /// Boundary distances versus URA aperture.
    Fig2,
    /// EBD over (ULA rotation, vertical URA length).
    Fig3,
    /// EBD versus number of scatterers.
    Fig4,
    /// Capacity error at each boundary versus SNR.
    Fig5a,
    /// Capacity error at each boundary versus aperture.
    Fig5b,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 5] = [
        ExperimentId::Fig2,
        ExperimentId::Fig3,
        ExperimentId::Fig4,
        ExperimentId::Fig5a,
        ExperimentId::Fig5b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Fig3 => "fig3",
            ExperimentId::Fig4 => "fig4",
            ExperimentId::Fig5a => "fig5a",
            ExperimentId::Fig5b => "fig5b",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment_id: ExperimentId,
    /// Keys merged over the experiment's default parameters.
    #[serde(default)]
    pub overrides: Map<String, Value>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment_id: ExperimentId) -> Self {
        ExperimentConfig {
            experiment_id,
            overrides: Map::new(),
            seed: 0,
            output_path: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_overrides(mut self, overrides: Map<String, Value>) -> Self {
        self.overrides = overrides;
        self
    }
}

/// Merge `overrides` into the serialized defaults of `P` and deserialize.
pub fn resolve_params<P>(overrides: &Map<String, Value>) -> Result<P>
where
    P: Default + Serialize + DeserializeOwned,
{
    let mut value = serde_json::to_value(P::default())?;
    let object = value
        .as_object_mut()
        .expect("parameter structs serialize to JSON objects");
    for (k, v) in overrides {
        object.insert(k.clone(), v.clone());
    }
    Ok(serde_json::from_value(value)?)
}

/// A finished run as a table plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub experiment_id: ExperimentId,
    /// Canonical JSON of the fully resolved configuration.
    pub resolved_config: String,
    pub config_sha256: String,
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ExperimentOutput {
    /// `#`-prefixed provenance lines, then a header row and the data rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# experiment: {}", self.experiment_id)?;
        writeln!(out, "# config_sha256: {}", self.config_sha256)?;
        writeln!(out, "# config: {}", self.resolved_config)?;
        for note in &self.notes {
            writeln!(out, "# note: {note}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }

    pub fn write_to_path(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

#[derive(Serialize)]
struct Resolved<'a, P: Serialize> {
    experiment: ExperimentId,
    seed: u64,
    params: &'a P,
}

fn provenance<P: Serialize>(id: ExperimentId, seed: u64, params: &P) -> Result<(String, String)> {
    let json = serde_json::to_string(&Resolved {
        experiment: id,
        seed,
        params,
    })?;
    let hash = Sha256::digest(json.as_bytes());
    let hex = hash.iter().map(|b| format!("{b:02x}")).collect();
    Ok((json, hex))
}

/// Canonical JSON of the parameters `run` would use, without running.
pub fn resolved_config(config: &ExperimentConfig) -> Result<String> {
    let (id, seed, o) = (config.experiment_id, config.seed, &config.overrides);
    let (json, _) = match id {
        ExperimentId::Fig2 => provenance(id, seed, &resolve_params::<Fig2Params>(o)?)?,
        ExperimentId::Fig3 => provenance(id, seed, &resolve_params::<Fig3Params>(o)?)?,
        ExperimentId::Fig4 => provenance(id, seed, &resolve_params::<Fig4Params>(o)?)?,
        ExperimentId::Fig5a | ExperimentId::Fig5b => {
            provenance(id, seed, &resolve_params::<Fig5Params>(o)?)?
        }
    };
    Ok(json)
}

/// Run an experiment and render it as a table. The CSV is also written to
/// `config.output_path` when set.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let id = config.experiment_id;
    let (resolved_config, config_sha256, notes, columns, rows) = match id {
        ExperimentId::Fig2 => {
            let p: Fig2Params = resolve_params(&config.overrides)?;
            let (json, hash) = provenance(id, config.seed, &p)?;
            let rows = run_fig2(&p)?;
            (
                json,
                hash,
                &fig2::NOTES[..],
                &fig2::COLUMNS[..],
                rows.iter().map(Fig2Row::record).collect(),
            )
        }
        ExperimentId::Fig3 => {
            let p: Fig3Params = resolve_params(&config.overrides)?;
            let (json, hash) = provenance(id, config.seed, &p)?;
            let rows = run_fig3(&p)?;
            (
                json,
                hash,
                &fig3::NOTES[..],
                &fig3::COLUMNS[..],
                rows.iter().map(Fig3Row::record).collect(),
            )
        }
        ExperimentId::Fig4 => {
            let p: Fig4Params = resolve_params(&config.overrides)?;
            let (json, hash) = provenance(id, config.seed, &p)?;
            let rows = run_fig4(&p, config.seed)?;
            (
                json,
                hash,
                &fig4::NOTES[..],
                &fig4::COLUMNS[..],
                rows.iter().map(Fig4Row::record).collect(),
            )
        }
        ExperimentId::Fig5a | ExperimentId::Fig5b => {
            let p: Fig5Params = resolve_params(&config.overrides)?;
            let (json, hash) = provenance(id, config.seed, &p)?;
            let rows = if id == ExperimentId::Fig5a {
                run_fig5a(&p)?
            } else {
                run_fig5b(&p)?
            };
            (
                json,
                hash,
                &fig5::NOTES[..],
                &fig5::COLUMNS[..],
                rows.iter().map(Fig5Row::record).collect(),
            )
        }
    };
    let output = ExperimentOutput {
        experiment_id: id,
        resolved_config,
        config_sha256,
        notes: notes.iter().map(|s| s.to_string()).collect(),
        columns: columns.iter().map(|s| s.to_string()).collect(),
        rows,
    };
    if let Some(path) = &config.output_path {
        output.write_to_path(path)?;
    }
    Ok(output)
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}
