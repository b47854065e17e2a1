//! Plain-text file formats.
//!
//! * sequences: JSON lines, `{"id": "...", "T": 100.0, "events": [{"t": 0.31, "c": 2}, ...]}`;
//!   `c` is a type index or a label resolved through a type map `{"label": index}`
//! * branch labels: JSON lines, `{"id": "...", "parent": [-1, 0, 0, 2]}`
//! * parameters: `{"mu": [...], "A": [[...], ...], "beta": 1.0}`
//! * matrices: dense `{"shape": [r, c], "data": [...]}` (row-major) or
//!   triplets `{"shape": [r, c], "triplets": [[row, col, value], ...]}`
//! * fit results: parameters, history and optionally per-sequence responsibilities
//!
//! Values are stored as `f64` on disk whatever the in-memory scalar type.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::badmm::{BadmmConfig, Regularizer};
use crate::em::{EmConfig, FitResult};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Event, EventSequence, ExpKernel, HawkesParams, TransitionMatrix};
use crate::scalar::Scalar;
use crate::simulate::BranchLabels;

pub type TypeMap = BTreeMap<String, usize>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TypeRef {
    Index(usize),
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRecord {
    pub t: f64,
    pub c: TypeRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub id: String,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub events: Vec<EventRecord>,
}

impl SequenceRecord {
    pub fn from_sequence<T: Scalar>(seq: &EventSequence<T>) -> Self {
        let events = seq.events().iter().map(|e| EventRecord { t: e.t.as_f64(), c: TypeRef::Index(e.c) }).collect();
        Self { id: seq.id().to_string(), horizon: seq.horizon().as_f64(), events }
    }

    pub fn to_sequence<T: Scalar>(&self, types: Option<&TypeMap>) -> Result<EventSequence<T>> {
        let mut events = Vec::with_capacity(self.events.len());
        for e in &self.events {
            let c = match (&e.c, types) {
                (TypeRef::Index(c), _) => *c,
                (TypeRef::Label(l), Some(map)) => *map.get(l).ok_or_else(|| Error::InvalidSequence {
                    id: self.id.clone(),
                    reason: format!("unknown type label `{l}`"),
                })?,
                (TypeRef::Label(l), None) => {
                    return Err(Error::InvalidSequence {
                        id: self.id.clone(),
                        reason: format!("type label `{l}` given without a type map"),
                    })
                }
            };
            events.push(Event::new(T::lit(e.t), c));
        }
        EventSequence::new(self.id.clone(), T::lit(self.horizon), events)
    }
}

fn parse_error(line: usize, err: impl std::fmt::Display) -> Error {
    Error::Parse { line, message: err.to_string() }
}

fn json_error(err: serde_json::Error) -> Error {
    if err.is_io() {
        Error::Json(err)
    } else {
        Error::Parse { line: err.line(), message: err.to_string() }
    }
}

/// Visits the non-blank lines of a JSON-lines stream with their 1-based numbers.
fn for_each_line<R: BufRead>(reader: R, mut f: impl FnMut(usize, &str) -> Result<()>) -> Result<()> {
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        f(i + 1, &line)?;
    }
    Ok(())
}

/// Reads a sequence file. Malformed lines and invalid sequences are reported
/// as [`Error::Parse`] with the offending line number.
pub fn read_sequences<T: Scalar, R: BufRead>(reader: R, types: Option<&TypeMap>) -> Result<Vec<EventSequence<T>>> {
    let mut out = Vec::new();
    for_each_line(reader, |line, text| {
        let rec: SequenceRecord = serde_json::from_str(text).map_err(|e| parse_error(line, e))?;
        out.push(rec.to_sequence(types).map_err(|e| parse_error(line, e))?);
        Ok(())
    })?;
    Ok(out)
}

pub fn write_sequences<T: Scalar, W: Write>(mut writer: W, sequences: &[EventSequence<T>]) -> Result<()> {
    for seq in sequences {
        serde_json::to_writer(&mut writer, &SequenceRecord::from_sequence(seq))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_type_map<R: Read>(reader: R) -> Result<TypeMap> {
    serde_json::from_reader(reader).map_err(json_error)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LabelRecord {
    id: String,
    parent: Vec<i64>,
}

pub fn read_labels<R: BufRead>(reader: R) -> Result<Vec<BranchLabels>> {
    let mut out = Vec::new();
    for_each_line(reader, |line, text| {
        let rec: LabelRecord = serde_json::from_str(text).map_err(|e| parse_error(line, e))?;
        out.push(BranchLabels::from_signed(rec.id, &rec.parent).map_err(|e| parse_error(line, e))?);
        Ok(())
    })?;
    Ok(out)
}

pub fn write_labels<W: Write>(mut writer: W, labels: &[BranchLabels]) -> Result<()> {
    for l in labels {
        serde_json::to_writer(&mut writer, &LabelRecord { id: l.id().to_string(), parent: l.to_signed() })?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub mu: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub beta: f64,
}

impl ParamsRecord {
    pub fn from_params<T: Scalar>(p: &HawkesParams<T>) -> Self {
        Self {
            mu: p.mu().iter().map(|v| v.as_f64()).collect(),
            a: p.infectivity().to_rows().into_iter().map(|r| r.into_iter().map(|v| v.as_f64()).collect()).collect(),
            beta: p.kernel().beta().as_f64(),
        }
    }

    pub fn to_params<T: Scalar>(&self) -> Result<HawkesParams<T>> {
        let c = self.mu.len();
        if self.a.len() != c || self.a.iter().any(|r| r.len() != c) {
            return Err(Error::shape("parameter file", format!("A of shape {c}x{c}"), "ragged or mismatched A"));
        }
        let rows: Vec<Vec<T>> = self.a.iter().map(|r| r.iter().map(|&v| T::lit(v)).collect()).collect();
        let a = if c == 0 { Matrix::zeros(0, 0) } else { Matrix::from_rows(&rows) };
        HawkesParams::new(self.mu.iter().map(|&v| T::lit(v)).collect(), a, ExpKernel::new(T::lit(self.beta))?)
    }
}

pub fn read_params<T: Scalar, R: Read>(reader: R) -> Result<HawkesParams<T>> {
    let rec: ParamsRecord = serde_json::from_reader(reader).map_err(json_error)?;
    rec.to_params()
}

pub fn write_params<T: Scalar, W: Write>(writer: W, params: &HawkesParams<T>) -> Result<()> {
    serde_json::to_writer_pretty(writer, &ParamsRecord::from_params(params))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixLayout {
    Dense,
    Triplet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRecord {
    Dense { shape: [usize; 2], data: Vec<f64> },
    Triplet { shape: [usize; 2], triplets: Vec<(usize, usize, f64)> },
}

impl MatrixRecord {
    pub fn dense<T: Scalar>(m: &Matrix<T>) -> Self {
        MatrixRecord::Dense { shape: [m.rows(), m.cols()], data: m.as_slice().iter().map(|v| v.as_f64()).collect() }
    }

    /// Nonzero entries in row-major order.
    pub fn triplets<T: Scalar>(m: &Matrix<T>) -> Self {
        let mut triplets = Vec::new();
        for i in 0..m.rows() {
            for (j, v) in m.row(i).iter().enumerate() {
                if *v != T::zero() {
                    triplets.push((i, j, v.as_f64()));
                }
            }
        }
        MatrixRecord::Triplet { shape: [m.rows(), m.cols()], triplets }
    }

    pub fn with_layout<T: Scalar>(m: &Matrix<T>, layout: MatrixLayout) -> Self {
        match layout {
            MatrixLayout::Dense => Self::dense(m),
            MatrixLayout::Triplet => Self::triplets(m),
        }
    }

    pub fn to_matrix<T: Scalar>(&self) -> Result<Matrix<T>> {
        match self {
            MatrixRecord::Dense { shape: [r, c], data } => {
                if r.checked_mul(*c) != Some(data.len()) {
                    return Err(Error::shape("dense matrix", format!("{} values", r * c), data.len()));
                }
                Ok(Matrix::from_vec(*r, *c, data.iter().map(|&v| T::lit(v)).collect()))
            }
            MatrixRecord::Triplet { shape: [r, c], triplets } => {
                let mut m = Matrix::zeros(*r, *c);
                for &(i, j, v) in triplets {
                    if i >= *r || j >= *c {
                        return Err(Error::shape("triplet matrix", format!("index within {r}x{c}"), format!("({i}, {j})")));
                    }
                    m[(i, j)] = T::lit(v);
                }
                Ok(m)
            }
        }
    }
}

pub fn read_matrix<T: Scalar, R: Read>(reader: R) -> Result<Matrix<T>> {
    let rec: MatrixRecord = serde_json::from_reader(reader).map_err(json_error)?;
    rec.to_matrix()
}

/// Reads a matrix and checks the transition-matrix invariants.
pub fn read_transition_matrix<T: Scalar, R: Read>(reader: R) -> Result<TransitionMatrix<T>> {
    TransitionMatrix::new(read_matrix(reader)?)
}

pub fn write_matrix<T: Scalar, W: Write>(mut writer: W, m: &Matrix<T>, layout: MatrixLayout) -> Result<()> {
    serde_json::to_writer(&mut writer, &MatrixRecord::with_layout(m, layout))?;
    writer.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadmmRecord {
    pub lambda: f64,
    pub alpha: f64,
    pub rho: f64,
    pub regularizer: String,
    pub max_iters: usize,
    pub tol: f64,
    pub floor: f64,
}

impl BadmmRecord {
    pub fn from_config<T: Scalar>(c: &BadmmConfig<T>) -> Self {
        Self {
            lambda: c.lambda.as_f64(),
            alpha: c.alpha.as_f64(),
            rho: c.rho.as_f64(),
            regularizer: c.regularizer.to_string(),
            max_iters: c.max_iters,
            tol: c.tol.as_f64(),
            floor: c.floor.as_f64(),
        }
    }

    pub fn to_config<T: Scalar>(&self) -> Result<BadmmConfig<T>> {
        let cfg = BadmmConfig {
            lambda: T::lit(self.lambda),
            alpha: T::lit(self.alpha),
            rho: T::lit(self.rho),
            regularizer: self.regularizer.parse::<Regularizer>()?,
            max_iters: self.max_iters,
            tol: T::lit(self.tol),
            floor: T::lit(self.floor),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmRecord {
    pub max_em_iters: usize,
    pub loglik_tol: f64,
    pub param_floor: f64,
    pub badmm: Option<BadmmRecord>,
}

impl EmRecord {
    pub fn from_config<T: Scalar>(c: &EmConfig<T>) -> Self {
        Self {
            max_em_iters: c.max_em_iters,
            loglik_tol: c.loglik_tol.as_f64(),
            param_floor: c.param_floor.as_f64(),
            badmm: c.badmm.as_ref().map(BadmmRecord::from_config),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponsibilityRecord {
    pub id: String,
    pub matrix: MatrixRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub params: ParamsRecord,
    pub loglik_history: Vec<f64>,
    pub iterations_run: usize,
    pub unobserved_types: Vec<usize>,
    pub config: EmRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub responsibilities: Option<Vec<ResponsibilityRecord>>,
}

impl FitRecord {
    /// `ids` name the sequences in fit order; responsibilities are included
    /// only when a layout is given.
    pub fn new<T: Scalar>(fit: &FitResult<T>, cfg: &EmConfig<T>, ids: &[&str], layout: Option<MatrixLayout>) -> Self {
        let responsibilities = layout.map(|layout| {
            fit.responsibilities
                .iter()
                .zip(ids)
                .map(|(r, id)| ResponsibilityRecord {
                    id: id.to_string(),
                    matrix: MatrixRecord::with_layout(r.as_matrix(), layout),
                })
                .collect()
        });
        Self {
            params: ParamsRecord::from_params(&fit.params),
            loglik_history: fit.loglik_history.iter().map(|v| v.as_f64()).collect(),
            iterations_run: fit.iterations_run,
            unobserved_types: fit.unobserved_types.clone(),
            config: EmRecord::from_config(cfg),
            responsibilities,
        }
    }
}

pub fn write_fit<W: Write>(writer: W, fit: &FitRecord) -> Result<()> {
    serde_json::to_writer_pretty(writer, fit)?;
    Ok(())
}

pub fn read_fit<R: Read>(reader: R) -> Result<FitRecord> {
    serde_json::from_reader(reader).map_err(json_error)
}
