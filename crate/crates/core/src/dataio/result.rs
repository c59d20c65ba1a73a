//! Versioned JSON result documents.
//!
//! Every document carries `schema_version`, the unit convention, a `kind`
//! tag, the inputs needed to reproduce it (state specs, or content digests
//! of the data files plus seeds) and the derived outputs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snu::{GaussianStateSpec, SqueezingPuritySpec};
use crate::witness::{
    BootstrapEstimate, BootstrapOptions, CenterPolicy, ContourGrid, CurvePoint, GridRange,
    RegionHistograms, SmaxOptions, SmaxResult, SmaxStatus, WitnessResult,
};

use super::series::{Encoding, Quadrature, QuadratureSeries};

pub const RESULT_SCHEMA_VERSION: u32 = 1;

pub const CONVENTION: &str =
    "shot-noise units: vacuum var_x = var_p = 1, var_x * var_p >= 1; witness violated when lhs < 1";

/// Content-addressed reference to a series file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRef {
    pub path: Option<String>,
    pub sha256: String,
    pub quadrature: Quadrature,
    pub count: usize,
}

impl SeriesRef {
    pub fn of(series: &QuadratureSeries, path: Option<&Path>) -> Self {
        SeriesRef {
            path: path.map(|p| p.display().to_string()),
            sha256: series.digest(),
            quadrature: series.quadrature,
            count: series.len(),
        }
    }
}

/// A modeled state. `state` is the one actually evaluated (after loss);
/// the squeezing description is kept for readers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateInputs {
    pub label: Option<String>,
    pub state: GaussianStateSpec,
    pub squeezing: Option<SqueezingPuritySpec>,
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationInputs {
    pub model: StateInputs,
    pub quadrature: Quadrature,
    pub count: usize,
    pub seed: u64,
    pub encoding: Encoding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub series: SeriesRef,
    pub sample_mean: f64,
    pub sample_var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataInputs {
    pub x: SeriesRef,
    pub p: SeriesRef,
    pub center: CenterPolicy,
    pub bootstrap: Option<BootstrapOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum SmaxSource {
    Model(StateInputs),
    Data(DataInputs),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmaxInputs {
    pub source: SmaxSource,
    pub options: SmaxOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmaxOutputs {
    pub s_max: f64,
    pub status: SmaxStatus,
    pub lhs_at_zero: f64,
    pub bracket: (f64, f64),
    pub ceiling: f64,
    /// Bootstrap standard deviation of `s_max`, data only.
    pub uncertainty: Option<f64>,
    pub bootstrap: Option<BootstrapEstimate>,
}

impl SmaxOutputs {
    pub fn from_result(r: &SmaxResult, bootstrap: Option<BootstrapEstimate>) -> Self {
        SmaxOutputs {
            s_max: r.s_max,
            status: r.status,
            lhs_at_zero: r.lhs_at_zero,
            bracket: r.bracket,
            ceiling: r.ceiling,
            uncertainty: bootstrap.as_ref().map(|b| b.std_dev),
            bootstrap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveInputs {
    pub states: Vec<StateInputs>,
    pub distances: Vec<f64>,
    pub center: CenterPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCurve {
    pub label: String,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourInputs {
    pub squeezing_db: GridRange,
    pub purity: GridRange,
    pub options: SmaxOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramInputs {
    pub x: SeriesRef,
    pub distance: f64,
    pub center: f64,
    pub bin_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Simulation {
        inputs: SimulationInputs,
        outputs: SeriesSummary,
    },
    Witness {
        inputs: DataInputs,
        outputs: Vec<WitnessResult>,
    },
    Smax {
        inputs: SmaxInputs,
        outputs: SmaxOutputs,
    },
    TheoryCurve {
        inputs: CurveInputs,
        outputs: Vec<LabeledCurve>,
    },
    Contour {
        inputs: ContourInputs,
        outputs: ContourGrid,
    },
    Histogram {
        inputs: HistogramInputs,
        outputs: RegionHistograms,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub convention: String,
    #[serde(flatten)]
    pub record: Record,
}

impl ResultDocument {
    pub fn new(record: Record) -> Self {
        ResultDocument {
            schema_version: RESULT_SCHEMA_VERSION,
            convention: CONVENTION.to_owned(),
            record,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents always serialize")
    }
}

pub fn write_result<W: Write>(doc: &ResultDocument, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, doc).map_err(|e| {
        if e.is_io() {
            Error::Stream(e.into())
        } else {
            Error::MalformedDocument(e.to_string())
        }
    })?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn write_result_file(doc: &ResultDocument, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    write_result(doc, BufWriter::new(file))
}

pub fn read_result<R: Read>(mut input: R) -> Result<ResultDocument> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    let version = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::MalformedDocument("missing schema_version".into()))?;
    if version != RESULT_SCHEMA_VERSION as u64 {
        return Err(Error::VersionMismatch {
            found: version.min(u32::MAX as u64) as u32,
            expected: RESULT_SCHEMA_VERSION,
        });
    }
    serde_json::from_value(value).map_err(|e| Error::MalformedDocument(e.to_string()))
}

pub fn read_result_file(path: &Path) -> Result<ResultDocument> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    read_result(BufReader::new(file))
}
