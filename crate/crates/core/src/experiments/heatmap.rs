//! Labelled matrices and their SVG/CSV rendering.
//!
//! Colors use a diverging blue–white–red scale centered at 0 and
//! symmetric in `±max|v|`; missing cells are grey.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// `values[r][c]`; `None` marks a cell that could not be computed.
    pub values: Vec<Vec<Option<f64>>>,
}

impl Matrix {
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        values: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        if values.len() != row_labels.len() || values.iter().any(|r| r.len() != col_labels.len()) {
            return Err(Error::DimensionMismatch(format!(
                "matrix values do not match {}×{} labels",
                row_labels.len(),
                col_labels.len()
            )));
        }
        Ok(Self {
            row_labels,
            col_labels,
            values,
        })
    }

    pub fn square(labels: &[String], values: Vec<Vec<Option<f64>>>) -> Result<Self> {
        Self::new(labels.to_vec(), labels.to_vec(), values)
    }

    pub fn get(&self, r: usize, c: usize) -> Option<f64> {
        self.values[r][c]
    }

    /// Cell-wise `self − other`; a cell is `None` if either side is.
    pub fn minus(&self, other: &Matrix) -> Result<Matrix> {
        if self.row_labels != other.row_labels || self.col_labels != other.col_labels {
            return Err(Error::DimensionMismatch("matrices have different labels".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| Some((*x)? - (*y)?)).collect())
            .collect();
        Matrix::new(self.row_labels.clone(), self.col_labels.clone(), values)
    }

    fn mean_where(&self, keep: impl Fn(usize, usize) -> bool) -> Option<f64> {
        let vals: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .flat_map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .filter_map(move |(c, v)| v.map(|v| (r, c, v)))
            })
            .filter(|&(r, c, _)| keep(r, c))
            .map(|(_, _, v)| v)
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    pub fn mean_diagonal(&self) -> Option<f64> {
        self.mean_where(|r, c| r == c)
    }

    pub fn mean_off_diagonal(&self) -> Option<f64> {
        self.mean_where(|r, c| r != c)
    }

    /// Header `train\test,<cols>`; empty field for a missing cell.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["train\\test".to_string()];
        header.extend(self.col_labels.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in self.row_labels.iter().zip(&self.values) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| v.map_or(String::new(), |v| v.to_string())));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let cols: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            rows.push(rec[0].to_string());
            values.push(
                rec.iter()
                    .skip(1)
                    .map(|v| {
                        if v.is_empty() {
                            Ok(None)
                        } else {
                            v.parse().map(Some).map_err(|e| Error::Corrupt {
                                index: i,
                                reason: format!("cell `{v}`: {e}"),
                            })
                        }
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Matrix::new(rows, cols, values)
    }
}

/// RGB hex for `v` on a scale saturating at `±limit`.
pub fn diverging_color(v: f64, limit: f64) -> String {
    let t = if limit > 0.0 {
        (v / limit).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    // Endpoints: #2166ac (negative), #ffffff (zero), #b2182b (positive).
    let (end, s) = if t < 0.0 {
        ([0x21, 0x66, 0xac], -t)
    } else {
        ([0xb2, 0x18, 0x2b], t)
    };
    let mix = |e: u8| (255.0 + (e as f64 - 255.0) * s).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(end[0]), mix(end[1]), mix(end[2]))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(m: &Matrix, title: &str) -> String {
    const CELL: usize = 90;
    const LEFT: usize = 140;
    const TOP: usize = 70;
    let limit = m
        .values
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let width = LEFT + CELL * m.col_labels.len() + 20;
    let height = TOP + CELL * m.row_labels.len() + 40;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
        width / 2,
        escape(title)
    );
    for (c, label) in m.col_labels.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + c * CELL + CELL / 2,
            TOP - 10,
            escape(label)
        );
    }
    for (r, label) in m.row_labels.iter().enumerate() {
        let y = TOP + r * CELL;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LEFT - 10,
            y + CELL / 2 + 5,
            escape(label)
        );
        for c in 0..m.col_labels.len() {
            let x = LEFT + c * CELL;
            let (fill, text) = match m.values[r][c] {
                Some(v) => (diverging_color(v, limit), format!("{v:.4}")),
                None => ("#d9d9d9".to_string(), "n/a".to_string()),
            };
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#ffffff"/>"##
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{text}</text>"#,
                x + CELL / 2,
                y + CELL / 2 + 5
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="{}" font-size="11">rows: train, columns: test; color range ±{limit:.4}</text>"#,
        height - 12
    );
    s.push_str("</svg>\n");
    s
}

/// Writes `<stem>.svg` and its `<stem>.csv` twin into `dir`.
pub fn emit_heatmap(m: &Matrix, dir: impl AsRef<Path>, stem: &str, title: &str) -> Result<()> {
    let dir = dir.as_ref();
    let svg = dir.join(format!("{stem}.svg"));
    fs::write(&svg, render_svg(m, title)).map_err(|e| Error::io(&svg, e))?;
    m.write_csv(dir.join(format!("{stem}.csv")))
}
