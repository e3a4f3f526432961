//! Report and snapshot formats shared by the CLI and the tests.
//!
//! CSV reports start with `#`-prefixed metadata lines (experiment, seed,
//! relation) followed by a header row. Field snapshots are a little-endian
//! `u64` header length, a JSON header, then the samples as little-endian `f64`.

use crate::group_harmonics::{DecayTable, FourierCoefficientSet};
use crate::tensor_geometry::{Lattice, SampledField};
use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed snapshot: {0}")]
    Format(String),
}

/// Metadata written above every CSV report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub experiment: String,
    pub seed: Option<u64>,
    /// The relation the numbers check, in words.
    pub relation: String,
    pub extra: Vec<(String, String)>,
}

impl ReportMeta {
    pub fn new(experiment: &str, relation: &str) -> Self {
        ReportMeta { experiment: experiment.into(), relation: relation.into(), ..Default::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.into(), value.to_string()));
        self
    }

    fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# experiment: {}", self.experiment)?;
        match self.seed {
            Some(s) => writeln!(w, "# seed: {s}")?,
            None => writeln!(w, "# seed: none")?,
        }
        writeln!(w, "# relation: {}", self.relation)?;
        for (k, v) in &self.extra {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }
}

pub fn write_csv<W: Write, T: Serialize>(mut w: W, meta: &ReportMeta, rows: &[T]) -> Result<(), IoError> {
    meta.write_to(&mut w)?;
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

/// Rows of a report written by [`write_csv`]; metadata lines are skipped.
pub fn read_csv<R: Read, T: DeserializeOwned>(r: R) -> Result<Vec<T>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    rdr.deserialize().map(|row| row.map_err(IoError::from)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub irrep: String,
    pub i: usize,
    pub j: usize,
    pub re: f64,
    pub im: f64,
}

pub fn coefficient_rows(set: &FourierCoefficientSet) -> Vec<CoefficientRow> {
    set.rows().into_iter().map(|(irrep, i, j, re, im)| CoefficientRow { irrep, i, j, re, im }).collect()
}

pub fn coefficients_json(set: &FourierCoefficientSet) -> Result<String, IoError> {
    #[derive(Serialize)]
    struct Out<'a> {
        lambda: f64,
        group: crate::group_harmonics::GroupKind,
        richardson_shift: Option<f64>,
        coefficients: &'a [CoefficientRow],
    }
    let rows = coefficient_rows(set);
    Ok(serde_json::to_string_pretty(&Out {
        lambda: set.lambda,
        group: set.group,
        richardson_shift: set.quadrature.richardson_shift,
        coefficients: &rows,
    })?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCsvRow {
    pub lambda: f64,
    pub max_abs: f64,
    pub noise_floor: f64,
    pub fitted_exponent: f64,
}

pub fn decay_rows(table: &DecayTable) -> Vec<DecayCsvRow> {
    table
        .rows
        .iter()
        .map(|r| DecayCsvRow { lambda: r.lambda, max_abs: r.max_abs, noise_floor: r.noise_floor, fitted_exponent: table.fitted_exponent })
        .collect()
}

/// JSON header of a field snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub chart: String,
    pub lattice: Lattice,
    /// Matrix shape per node.
    pub shape: (usize, usize),
    /// Element strides of (node, row, column) in the data block.
    pub stride: (usize, usize, usize),
    pub units: String,
}

const SNAPSHOT_FORMAT: &str = "acs-field-snapshot/1";

/// Nodes in lattice order; each matrix row-major.
pub fn write_snapshot<W: Write>(mut w: W, field: &SampledField, chart: &str, units: &str) -> Result<(), IoError> {
    let (r, c) = field.shape;
    let header = SnapshotHeader {
        format: SNAPSHOT_FORMAT.into(),
        chart: chart.into(),
        lattice: field.lattice.clone(),
        shape: field.shape,
        stride: (r * c, c, 1),
        units: units.into(),
    };
    let json = serde_json::to_vec(&header)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for m in &field.values {
        for i in 0..r {
            for j in 0..c {
                w.write_all(&m[(i, j)].to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<(SnapshotHeader, SampledField), IoError> {
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len);
    if len > 1 << 24 {
        return Err(IoError::Format(format!("header length {len} is implausible")));
    }
    let mut json = vec![0u8; len as usize];
    r.read_exact(&mut json)?;
    let header: SnapshotHeader = serde_json::from_slice(&json)?;
    if header.format != SNAPSHOT_FORMAT {
        return Err(IoError::Format(format!("unknown format {}", header.format)));
    }
    let (rows, cols) = header.shape;
    if header.stride != (rows * cols, cols, 1) {
        return Err(IoError::Format(format!("unsupported stride {:?}", header.stride)));
    }
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let expected = header.lattice.len() * rows * cols * 8;
    if data.len() != expected {
        return Err(IoError::Format(format!("expected {expected} data bytes, found {}", data.len())));
    }
    let vals: Vec<f64> = data.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk"))).collect();
    let values = vals.chunks_exact(rows * cols).map(|m| DMatrix::from_row_slice(rows, cols, m)).collect();
    let field = SampledField { lattice: header.lattice.clone(), shape: header.shape, values };
    Ok((header, field))
}
