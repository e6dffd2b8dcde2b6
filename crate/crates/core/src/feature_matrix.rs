//! Dense `N × F` probe inputs with binary error labels.
//!
//! Serializes to CSV (header = feature names + `error`) and to LFEA, a
//! little-endian binary that follows the LTRJ conventions:
//!
//! ```text
//! "LFEA1\0" | u32 N | u32 F | u32 last_l | u32 top_k | u32 flags
//! F × [ u32 byte_len | UTF-8 name ]
//! N × [ F f64 values | u32 label ]
//! ```
//!
//! `flags` bit 0: a feature config is attached; bit 1: dynamics included.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeatureConfig;

pub const LFEA_MAGIC: [u8; 6] = *b"LFEA1\0";

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    n_features: usize,
    pub labels: Vec<bool>,
    pub feature_names: Vec<String>,
    pub config: Option<FeatureConfig>,
}

impl FeatureMatrix {
    pub fn new(
        data: Vec<f64>,
        n_features: usize,
        labels: Vec<bool>,
        feature_names: Vec<String>,
        config: Option<FeatureConfig>,
    ) -> Result<Self> {
        if data.len() != labels.len() * n_features {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} rows of {n_features} features",
                data.len(),
                labels.len()
            )));
        }
        if feature_names.len() != n_features {
            return Err(Error::DimensionMismatch(format!(
                "{} feature names for {n_features} features",
                feature_names.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: pos / n_features.max(1),
            });
        }
        Ok(Self {
            data,
            n_features,
            labels,
            feature_names,
            config,
        })
    }

    /// Builds a matrix from rows, naming columns `prefix0..prefixF`.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<bool>, prefix: &str) -> Result<Self> {
        let f = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != f) {
            return Err(Error::DimensionMismatch("ragged feature rows".into()));
        }
        let names = (0..f).map(|j| format!("{prefix}{j}")).collect();
        Self::new(rows.concat(), f, labels, names, None)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Applies `f` to every value of column `j`.
    pub fn map_column(&mut self, j: usize, f: impl Fn(f64) -> f64) {
        for i in 0..self.n_rows() {
            let v = &mut self.data[i * self.n_features + j];
            *v = f(*v);
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = self.feature_names.clone();
        header.push("error".into());
        w.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut rec: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(if self.labels[i] { "1" } else { "0" }.into());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    /// Reads a CSV written by [`Self::write_csv`]; the config is not stored
    /// in CSV and comes back as `None`.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.last().map(String::as_str) != Some("error") {
            return Err(Error::InvalidConfig("last CSV column must be `error`".into()));
        }
        let f = header.len() - 1;
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            for v in rec.iter().take(f) {
                data.push(v.parse::<f64>().map_err(|e| Error::Corrupt {
                    index: i,
                    reason: e.to_string(),
                })?);
            }
            labels.push(match &rec[f] {
                "1" => true,
                "0" => false,
                other => {
                    return Err(Error::Corrupt {
                        index: i,
                        reason: format!("error label `{other}`"),
                    })
                }
            });
        }
        Self::new(data, f, labels, header[..f].to_vec(), None)
    }

    pub fn write_lfea(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        let (l, k, flags) = match self.config {
            Some(c) => (
                c.last_l as u32,
                c.top_k as u32,
                1 | ((c.include_dynamics as u32) << 1),
            ),
            None => (0, 0, 0),
        };
        w.write_all(&LFEA_MAGIC).map_err(io)?;
        for v in [self.n_rows() as u32, self.n_features as u32, l, k, flags] {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        for name in &self.feature_names {
            w.write_all(&(name.len() as u32).to_le_bytes()).map_err(io)?;
            w.write_all(name.as_bytes()).map_err(io)?;
        }
        for i in 0..self.n_rows() {
            for v in self.row(i) {
                w.write_all(&v.to_le_bytes()).map_err(io)?;
            }
            w.write_all(&(self.labels[i] as u32).to_le_bytes()).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_lfea(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
        if buf.len() < 6 || buf[..4] != LFEA_MAGIC[..4] {
            return Err(Error::BadMagic {
                expected: "LFEA1".into(),
                found: buf[..buf.len().min(6)].to_vec(),
            });
        }
        if buf[4..6] != LFEA_MAGIC[4..6] {
            return Err(Error::UnsupportedVersion {
                format: "LFEA",
                version: buf[4],
            });
        }
        let mut pos = 6usize;
        let truncated = |pos: usize, need: usize| Error::Truncated {
            expected: (pos + need) as u64,
            offset: buf.len() as u64,
        };
        let u32_at = |pos: &mut usize| -> Result<u32> {
            let b = buf.get(*pos..*pos + 4).ok_or_else(|| truncated(*pos, 4))?;
            *pos += 4;
            Ok(u32::from_le_bytes(b.try_into().unwrap()))
        };
        let n = u32_at(&mut pos)? as usize;
        let f = u32_at(&mut pos)? as usize;
        let l = u32_at(&mut pos)? as usize;
        let k = u32_at(&mut pos)? as usize;
        let flags = u32_at(&mut pos)?;
        let mut names = Vec::with_capacity(f);
        for _ in 0..f {
            let len = u32_at(&mut pos)? as usize;
            let b = buf.get(pos..pos + len).ok_or_else(|| truncated(pos, len))?;
            names.push(
                String::from_utf8(b.to_vec())
                    .map_err(|e| Error::InvalidConfig(format!("feature name: {e}")))?,
            );
            pos += len;
        }
        let expected = pos + n * (f * 8 + 4);
        if buf.len() < expected {
            return Err(Error::Truncated {
                expected: expected as u64,
                offset: buf.len() as u64,
            });
        }
        if buf.len() > expected {
            return Err(Error::TrailingBytes {
                trailing: (buf.len() - expected) as u64,
                offset: expected as u64,
            });
        }
        let mut data = Vec::with_capacity(n * f);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            for c in buf[pos..pos + 8 * f].chunks_exact(8) {
                data.push(f64::from_le_bytes(c.try_into().unwrap()));
            }
            pos += 8 * f;
            let label = u32::from_le_bytes(buf[pos..pos + 4].try_into().unwrap());
            pos += 4;
            labels.push(match label {
                0 => false,
                1 => true,
                other => {
                    return Err(Error::Corrupt {
                        index: i,
                        reason: format!("label {other}"),
                    })
                }
            });
        }
        let config = (flags & 1 == 1).then(|| FeatureConfig::new(l, k, flags & 2 == 2));
        Self::new(data, f, labels, names, config)
    }

    /// Dispatches on extension: `.csv` or LFEA otherwise.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if path.extension().is_some_and(|e| e == "csv") {
            self.write_csv(path)
        } else {
            self.write_lfea(path)
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if path.extension().is_some_and(|e| e == "csv") {
            Self::read_csv(path)
        } else {
            Self::read_lfea(path)
        }
    }
}
