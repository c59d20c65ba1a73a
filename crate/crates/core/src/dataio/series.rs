//! Quadrature time series and their on-disk format.
//!
//! A series file is a block of `key: value` header lines, one blank line,
//! then the samples. Required keys, in canonical order:
//!
//! ```text
//! format_version: 1
//! quadrature: x
//! calibration_snu: 1
//! count: 3
//! encoding: text
//! ```
//!
//! followed by free-form metadata keys in sorted order. With
//! `encoding: text` each sample is written on its own line as the shortest
//! decimal literal that round-trips the binary64 value. With
//! `encoding: binary` the body is `count` little-endian binary64 values.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SERIES_FORMAT_VERSION: u32 = 1;

const RESERVED_KEYS: [&str; 5] = [
    "format_version",
    "quadrature",
    "calibration_snu",
    "count",
    "encoding",
];

/// Metadata keys that identify where the shot-noise calibration came from.
pub const PROVENANCE_KEYS: [&str; 2] = ["source", "calibration_id"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    X,
    P,
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quadrature::X => "x",
            Quadrature::P => "p",
        })
    }
}

impl FromStr for Quadrature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Quadrature::X),
            "p" => Ok(Quadrature::P),
            other => Err(Error::MalformedHeader(format!(
                "quadrature must be `x` or `p`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    #[default]
    Text,
    Binary,
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Text => "text",
            Encoding::Binary => "binary",
        })
    }
}

/// Samples of one quadrature, already normalized to shot-noise units.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSeries {
    pub samples: Vec<f64>,
    pub quadrature: Quadrature,
    /// Shot-noise variance that raw samples were divided by upstream.
    pub calibration_snu: f64,
    pub metadata: BTreeMap<String, String>,
}

impl QuadratureSeries {
    pub fn new(samples: Vec<f64>, quadrature: Quadrature) -> Result<Self> {
        let series = QuadratureSeries {
            samples,
            quadrature,
            calibration_snu: 1.0,
            metadata: BTreeMap::new(),
        };
        series.validate()?;
        Ok(series)
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.insert(key.into(), value.to_string());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.calibration_snu.is_finite() && self.calibration_snu > 0.0) {
            return Err(Error::MalformedHeader(format!(
                "calibration_snu must be positive, got {}",
                self.calibration_snu
            )));
        }
        if let Some(index) = self.samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::BadSample {
                index,
                reason: format!("non-finite sample {}", self.samples[index]),
            });
        }
        for (key, value) in &self.metadata {
            if RESERVED_KEYS.contains(&key.as_str()) {
                return Err(Error::MalformedHeader(format!("metadata key `{key}` is reserved")));
            }
            if key.is_empty()
                || key.contains(':')
                || key.contains('\n')
                || key.trim() != key
                || value.contains(['\n', '\r'])
            {
                return Err(Error::MalformedHeader(format!(
                    "metadata entry `{key}` cannot be represented in a header line"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// SHA-256 of the canonical text serialization, hex encoded.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        let mut buf = Vec::new();
        write_series(self, &mut buf, Encoding::Text).expect("in-memory write");
        hasher.update(&buf);
        hex::encode(hasher.finalize())
    }
}

/// Serializes a series. Output bytes depend only on the series contents.
pub fn write_series<W: Write>(series: &QuadratureSeries, mut out: W, encoding: Encoding) -> Result<()> {
    series.validate()?;
    writeln!(out, "format_version: {SERIES_FORMAT_VERSION}")?;
    writeln!(out, "quadrature: {}", series.quadrature)?;
    writeln!(out, "calibration_snu: {}", series.calibration_snu)?;
    writeln!(out, "count: {}", series.samples.len())?;
    writeln!(out, "encoding: {encoding}")?;
    for (key, value) in &series.metadata {
        writeln!(out, "{key}: {value}")?;
    }
    writeln!(out)?;
    match encoding {
        Encoding::Text => {
            for v in &series.samples {
                writeln!(out, "{v}")?;
            }
        }
        Encoding::Binary => {
            for v in &series.samples {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_series_file(series: &QuadratureSeries, path: &Path, encoding: Encoding) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    write_series(series, BufWriter::new(file), encoding)
}

fn header_value<'a>(header: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    header
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::MalformedHeader(format!("missing key `{key}`")))
}

pub fn read_series<R: BufRead>(mut input: R) -> Result<QuadratureSeries> {
    let mut header = BTreeMap::new();
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Err(Error::MalformedHeader("missing blank line after header".into()));
        }
        let trimmed = line.trim_end_matches(['\n', '\r']);
        if trimmed.is_empty() {
            break;
        }
        let (key, value) = trimmed
            .split_once(": ")
            .or_else(|| trimmed.split_once(':'))
            .ok_or_else(|| Error::MalformedHeader(format!("expected `key: value`, got `{trimmed}`")))?;
        if header
            .insert(key.trim().to_owned(), value.to_owned())
            .is_some()
        {
            return Err(Error::MalformedHeader(format!("duplicate key `{}`", key.trim())));
        }
    }

    let version: u32 = header_value(&header, "format_version")?
        .trim()
        .parse()
        .map_err(|_| Error::MalformedHeader("format_version is not an integer".into()))?;
    if version != SERIES_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: SERIES_FORMAT_VERSION,
        });
    }
    let quadrature: Quadrature = header_value(&header, "quadrature")?.trim().parse()?;
    let calibration_snu: f64 = header_value(&header, "calibration_snu")?
        .trim()
        .parse()
        .map_err(|_| Error::MalformedHeader("calibration_snu is not a number".into()))?;
    let count: usize = header_value(&header, "count")?
        .trim()
        .parse()
        .map_err(|_| Error::MalformedHeader("count is not a nonnegative integer".into()))?;
    let encoding = match header.get("encoding").map(|s| s.trim()) {
        None | Some("text") => Encoding::Text,
        Some("binary") => Encoding::Binary,
        Some(other) => {
            return Err(Error::MalformedHeader(format!("unknown encoding `{other}`")));
        }
    };

    let mut samples = Vec::with_capacity(count.min(1 << 24));
    match encoding {
        Encoding::Text => {
            for index in 0.. {
                line.clear();
                if input.read_line(&mut line)? == 0 {
                    break;
                }
                let token = line.trim();
                if token.is_empty() {
                    continue;
                }
                let value: f64 = token.parse().map_err(|_| Error::BadSample {
                    index,
                    reason: format!("`{token}` is not a number"),
                })?;
                if !value.is_finite() {
                    return Err(Error::BadSample {
                        index,
                        reason: format!("non-finite sample `{token}`"),
                    });
                }
                samples.push(value);
            }
        }
        Encoding::Binary => {
            let mut body = Vec::new();
            input.read_to_end(&mut body)?;
            if body.len() != count * 8 {
                return Err(Error::MalformedHeader(format!(
                    "binary body holds {} bytes, expected {}",
                    body.len(),
                    count * 8
                )));
            }
            for (index, chunk) in body.chunks_exact(8).enumerate() {
                let value = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
                if !value.is_finite() {
                    return Err(Error::BadSample {
                        index,
                        reason: format!("non-finite sample {value}"),
                    });
                }
                samples.push(value);
            }
        }
    }
    if samples.len() != count {
        return Err(Error::MalformedHeader(format!(
            "header declares {count} samples, body holds {}",
            samples.len()
        )));
    }

    for key in RESERVED_KEYS {
        header.remove(key);
    }
    let series = QuadratureSeries {
        samples,
        quadrature,
        calibration_snu,
        metadata: header,
    };
    series.validate()?;
    Ok(series)
}

pub fn read_series_file(path: &Path) -> Result<QuadratureSeries> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    read_series(BufReader::new(file))
}

/// Conjugate quadratures recorded in separate runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPair {
    pub x_series: QuadratureSeries,
    pub p_series: QuadratureSeries,
}

impl RunPair {
    pub fn new(x_series: QuadratureSeries, p_series: QuadratureSeries) -> Result<Self> {
        if x_series.quadrature != Quadrature::X {
            return Err(Error::MalformedHeader("first series of a run pair must be `x`".into()));
        }
        if p_series.quadrature != Quadrature::P {
            return Err(Error::MalformedHeader("second series of a run pair must be `p`".into()));
        }
        for key in PROVENANCE_KEYS {
            if x_series.metadata.contains_key(key) != p_series.metadata.contains_key(key) {
                return Err(Error::MalformedHeader(format!(
                    "provenance key `{key}` must be present in both runs or neither"
                )));
            }
        }
        Ok(RunPair { x_series, p_series })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn round_trip(series: &QuadratureSeries, encoding: Encoding) -> QuadratureSeries {
        let mut buf = Vec::new();
        write_series(series, &mut buf, encoding).unwrap();
        read_series(&buf[..]).unwrap()
    }

    #[test]
    fn text_layout() {
        let s = QuadratureSeries::new(vec![0.5, -1.25, 3.0], Quadrature::P)
            .unwrap()
            .with_meta("source", "simulation");
        let mut buf = Vec::new();
        write_series(&s, &mut buf, Encoding::Text).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "format_version: 1\nquadrature: p\ncalibration_snu: 1\ncount: 3\n\
             encoding: text\nsource: simulation\n\n0.5\n-1.25\n3\n"
        );
    }

    #[test]
    fn header_only_is_empty_series() {
        let s = read_series("format_version: 1\nquadrature: x\ncalibration_snu: 1\ncount: 0\n\n".as_bytes())
            .unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn nan_names_record() {
        let err = read_series(
            "format_version: 1\nquadrature: x\ncalibration_snu: 1\ncount: 3\n\n1.0\nNaN\n2\n".as_bytes(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::BadSample { index: 1, .. }), "{err}");
    }

    #[test]
    fn missing_quadrature() {
        let err = read_series("format_version: 1\ncalibration_snu: 1\ncount: 0\n\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("quadrature"));
    }

    #[test]
    fn version_and_count_checks() {
        let err = read_series("format_version: 2\nquadrature: x\ncalibration_snu: 1\ncount: 0\n\n".as_bytes())
            .unwrap_err();
        assert!(matches!(err, Error::VersionMismatch { found: 2, .. }));
        let err = read_series("format_version: 1\nquadrature: x\ncalibration_snu: 1\ncount: 2\n\n1\n".as_bytes())
            .unwrap_err();
        assert!(matches!(err, Error::MalformedHeader(_)));
        let err = read_series("format_version: 1\nquadrature: x\ncalibration_snu: 1\ncount: 1\n1\n".as_bytes())
            .unwrap_err();
        assert!(matches!(err, Error::MalformedHeader(_)));
    }

    #[test]
    fn reserved_metadata_rejected() {
        let s = QuadratureSeries::new(vec![1.0], Quadrature::X)
            .unwrap()
            .with_meta("count", "7");
        assert!(write_series(&s, Vec::new(), Encoding::Text).is_err());
    }

    #[test]
    fn digest_is_stable() {
        let a = QuadratureSeries::new(vec![1.0, 2.0], Quadrature::X).unwrap();
        let b = QuadratureSeries::new(vec![1.0, 2.0], Quadrature::X).unwrap();
        let c = QuadratureSeries::new(vec![1.0, 2.5], Quadrature::X).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn run_pair_checks_tags() {
        let x = QuadratureSeries::new(vec![1.0], Quadrature::X).unwrap();
        let p = QuadratureSeries::new(vec![1.0], Quadrature::P).unwrap();
        assert!(RunPair::new(x.clone(), p.clone()).is_ok());
        assert!(RunPair::new(p.clone(), x.clone()).is_err());
        let x_src = x.with_meta("source", "lab");
        assert!(RunPair::new(x_src.clone(), p.clone()).is_err());
        assert!(RunPair::new(x_src, p.with_meta("source", "lab-2")).is_ok());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            samples in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 0..200),
            binary in any::<bool>(),
        ) {
            let s = QuadratureSeries::new(samples, Quadrature::X).unwrap().with_meta("seed", 7);
            let encoding = if binary { Encoding::Binary } else { Encoding::Text };
            let back = round_trip(&s, encoding);
            prop_assert_eq!(back.samples.len(), s.samples.len());
            for (a, b) in back.samples.iter().zip(&s.samples) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back.metadata, s.metadata);
        }
    }
}
