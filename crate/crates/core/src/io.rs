//! Text serialization: JSON for structured values, CSV for anything plottable.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gabor::Signal;
use crate::group::DensityEstimate;
use crate::linalg::{Label, VectorFamily};
use crate::localization::Envelope;
use crate::rit::SelectionResult;
use crate::{CMatrix, Complex64};

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

fn csv_string(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

/// JSON form of a family: labels, ambient dimension and `[re, im]` pairs per vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyJson {
    pub dimension: usize,
    pub labels: Vec<Label>,
    pub vectors: Vec<Vec<[f64; 2]>>,
}

impl From<&VectorFamily> for FamilyJson {
    fn from(f: &VectorFamily) -> Self {
        Self {
            dimension: f.dimension(),
            labels: f.labels().to_vec(),
            vectors: f.matrix().column_iter().map(|c| c.iter().map(|z| [z.re, z.im]).collect()).collect(),
        }
    }
}

impl TryFrom<FamilyJson> for VectorFamily {
    type Error = Error;

    fn try_from(j: FamilyJson) -> Result<Self> {
        let mut m = CMatrix::zeros(j.dimension, j.vectors.len());
        for (c, v) in j.vectors.iter().enumerate() {
            if v.len() != j.dimension {
                return Err(Error::DimensionMismatch { expected: j.dimension, found: v.len() });
            }
            for (r, [re, im]) in v.iter().enumerate() {
                m[(r, c)] = Complex64::new(*re, *im);
            }
        }
        VectorFamily::from_columns(m, j.labels)
    }
}

/// One row per vector: `label, re_0, im_0, re_1, im_1, ...`.
pub fn family_to_csv(f: &VectorFamily) -> Result<String> {
    let mut header = vec!["label".to_string()];
    for r in 0..f.dimension() {
        header.push(format!("re_{r}"));
        header.push(format!("im_{r}"));
    }
    let rows = f.matrix().column_iter().zip(f.labels()).map(|(c, l)| {
        std::iter::once(l.to_string())
            .chain(c.iter().flat_map(|z| [num(z.re), num(z.im)]))
            .collect()
    });
    csv_string(&header, rows)
}

pub fn family_from_csv(text: &str) -> Result<VectorFamily> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let width = rdr.headers()?.len();
    if width < 3 || width % 2 == 0 {
        return Err(Error::Parse(format!("expected label plus re/im pairs, found {width} columns")));
    }
    let mut labels = Vec::new();
    let mut cols = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        labels.push(Label::from(&rec[0]));
        let vals: Vec<f64> = rec
            .iter()
            .skip(1)
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}"))))
            .collect::<Result<_>>()?;
        cols.push(vals.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect::<Vec<_>>());
    }
    let dim = (width - 1) / 2;
    let m = CMatrix::from_fn(dim, cols.len(), |r, c| cols[c][r]);
    VectorFamily::from_columns(m, labels)
}

/// Columns `R, inf_value, sup_value`.
pub fn sweep_to_csv(d: &DensityEstimate) -> Result<String> {
    let header = ["R", "inf_value", "sup_value"].map(String::from);
    csv_string(&header, d.sweep.iter().map(|p| vec![p.r.to_string(), num(p.inf_value), num(p.sup_value)]))
}

/// Offset coordinates `k_0, k_1, ...` followed by the value.
pub fn envelope_to_csv(env: &Envelope) -> Result<String> {
    let rank = env.group.rank();
    let mut header: Vec<String> = (0..rank).map(|i| format!("k_{i}")).collect();
    header.push("value".into());
    let rows = env.values.iter().map(|(k, v)| {
        k.coords.iter().map(|c| c.to_string()).chain(std::iter::once(num(*v))).collect()
    });
    csv_string(&header, rows)
}

/// Columns `t, re, im`.
pub fn signal_to_csv(s: &Signal) -> Result<String> {
    let header = ["t", "re", "im"].map(String::from);
    let rows = s
        .samples
        .iter()
        .enumerate()
        .map(|(t, z)| vec![t.to_string(), num(z.re), num(z.im)]);
    csv_string(&header, rows)
}

/// Moduli of a matrix, one CSV row per matrix row.
pub fn abs_matrix_to_csv(m: &CMatrix) -> Result<String> {
    let header: Vec<String> = (0..m.ncols()).map(|c| format!("c{c}")).collect();
    csv_string(&header, m.row_iter().map(|r| r.iter().map(|z| num(z.norm())).collect()))
}

/// Header of [`selection_summary_row`].
pub const SELECTION_SUMMARY_HEADER: [&str; 8] =
    ["run", "selected", "target_size", "size_ratio", "achieved_lower", "certified_bound", "c_value", "u"];

/// Batch-friendly summary of one selection run.
pub fn selection_summary_row(run: &str, r: &SelectionResult) -> Vec<String> {
    vec![
        run.to_string(),
        r.selected.len().to_string(),
        r.target_size.to_string(),
        num(r.size_ratio),
        num(r.achieved_lower),
        num(r.certified_bound),
        num(r.c_value),
        num(r.u),
    ]
}

pub fn selection_summary_csv(rows: &[(String, &SelectionResult)]) -> Result<String> {
    let header = SELECTION_SUMMARY_HEADER.map(String::from);
    csv_string(&header, rows.iter().map(|(run, r)| selection_summary_row(run, r)))
}
