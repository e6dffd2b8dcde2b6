//! LTRJ (trajectory) and LHID (hidden-state) binary files.
//!
//! Both are little-endian with a 6-byte magic whose fifth byte is the
//! format version:
//!
//! ```text
//! LTRJ: "LTRJ1\0" | u32 N | u32 C | u32 D | u32 flags (=0)
//!       N × [ D×C f32 logits (row-major, classifier row last) | u32 y | u32 ŷ ]
//! LHID: "LHID1\0" | u32 N | u32 T | u32 H | u32 C
//!       N × [ T×H f32 CLS states | u32 y | C f32 classifier logits ]
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::manifest::{manifest_path, Manifest};
use super::{HiddenStateDataset, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::ranking::argmax;

pub const LTRJ_MAGIC: [u8; 6] = *b"LTRJ1\0";
pub const LHID_MAGIC: [u8; 6] = *b"LHID1\0";

const HEADER_LEN: u64 = 6 + 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryHeader {
    pub n_examples: u32,
    pub n_classes: u32,
    pub depth: u32,
    pub flags: u32,
}

impl TrajectoryHeader {
    fn record_len(&self) -> u64 {
        self.depth as u64 * self.n_classes as u64 * 4 + 8
    }

    pub fn payload_len(&self) -> u64 {
        HEADER_LEN + self.n_examples as u64 * self.record_len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HiddenHeader {
    pub n_examples: u32,
    pub n_layers: u32,
    pub hidden_dim: u32,
    pub n_classes: u32,
}

impl HiddenHeader {
    fn record_len(&self) -> u64 {
        (self.n_layers as u64 * self.hidden_dim as u64 + self.n_classes as u64) * 4 + 4
    }

    pub fn payload_len(&self) -> u64 {
        HEADER_LEN + self.n_examples as u64 * self.record_len()
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn u32(&mut self) -> u32 {
        let v = u32::from_le_bytes(self.buf[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        v
    }

    fn f32s(&mut self, n: usize, out: &mut Vec<f32>) {
        let bytes = &self.buf[self.pos..self.pos + 4 * n];
        out.extend(
            bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])),
        );
        self.pos += 4 * n;
    }
}

fn check_magic(buf: &[u8], magic: &[u8; 6], format: &'static str) -> Result<()> {
    if buf.len() < 6 || buf[..4] != magic[..4] {
        return Err(Error::BadMagic {
            expected: String::from_utf8_lossy(&magic[..5]).into_owned(),
            found: buf[..buf.len().min(6)].to_vec(),
        });
    }
    if buf[4] != magic[4] || buf[5] != 0 {
        return Err(Error::UnsupportedVersion {
            format,
            version: buf[4],
        });
    }
    if (buf.len() as u64) < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            offset: buf.len() as u64,
        });
    }
    Ok(())
}

fn check_length(buf: &[u8], expected: u64) -> Result<()> {
    let actual = buf.len() as u64;
    if actual < expected {
        return Err(Error::Truncated {
            expected,
            offset: actual,
        });
    }
    if actual > expected {
        return Err(Error::TrailingBytes {
            trailing: actual - expected,
            offset: expected,
        });
    }
    Ok(())
}

fn parse_trajectory_header(buf: &[u8]) -> Result<TrajectoryHeader> {
    check_magic(buf, &LTRJ_MAGIC, "LTRJ")?;
    let mut c = Cursor { buf, pos: 6 };
    let header = TrajectoryHeader {
        n_examples: c.u32(),
        n_classes: c.u32(),
        depth: c.u32(),
        flags: c.u32(),
    };
    if header.flags != 0 {
        return Err(Error::InvalidConfig(format!(
            "reserved LTRJ flags must be 0, found {:#x}",
            header.flags
        )));
    }
    if header.n_classes == 0 || header.depth == 0 {
        return Err(Error::InvalidConfig(format!(
            "LTRJ header has C={} D={}",
            header.n_classes, header.depth
        )));
    }
    Ok(header)
}

fn parse_hidden_header(buf: &[u8]) -> Result<HiddenHeader> {
    check_magic(buf, &LHID_MAGIC, "LHID")?;
    let mut c = Cursor { buf, pos: 6 };
    Ok(HiddenHeader {
        n_examples: c.u32(),
        n_layers: c.u32(),
        hidden_dim: c.u32(),
        n_classes: c.u32(),
    })
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Reads only the fixed-size LTRJ header.
pub fn read_trajectory_header(path: impl AsRef<Path>) -> Result<TrajectoryHeader> {
    parse_trajectory_header(&read(path.as_ref())?)
}

pub fn read_hidden_header(path: impl AsRef<Path>) -> Result<HiddenHeader> {
    parse_hidden_header(&read(path.as_ref())?)
}

fn dataset_id_for(path: &Path) -> String {
    Manifest::read_for(path)
        .ok()
        .flatten()
        .map(|m| m.dataset_id)
        .unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
}

/// Loads and validates an LTRJ file. The dataset id comes from the sidecar
/// manifest when present, otherwise from the file stem.
pub fn load_trajectories(path: impl AsRef<Path>) -> Result<TrajectoryDataset> {
    let path = path.as_ref();
    let buf = read(path)?;
    let header = parse_trajectory_header(&buf)?;
    check_length(&buf, header.payload_len())?;

    let (n, c, d) = (
        header.n_examples as usize,
        header.n_classes as usize,
        header.depth as usize,
    );
    let mut cur = Cursor {
        buf: &buf,
        pos: HEADER_LEN as usize,
    };
    let mut logits = Vec::with_capacity(n * d * c);
    let mut true_label = Vec::with_capacity(n);
    let mut stored_pred = Vec::with_capacity(n);
    for _ in 0..n {
        cur.f32s(d * c, &mut logits);
        true_label.push(cur.u32());
        stored_pred.push(cur.u32());
    }

    for (i, &stored) in stored_pred.iter().enumerate() {
        let row = &logits[(i * d + d - 1) * c..(i + 1) * d * c];
        if row.iter().all(|v| v.is_finite()) {
            let expected = argmax(row) as u32;
            if stored != expected {
                return Err(Error::Corrupt {
                    index: i,
                    reason: format!("stored prediction {stored} disagrees with final-row argmax {expected}"),
                });
            }
        }
    }
    let ds = TrajectoryDataset::new(dataset_id_for(path), c, d, logits, true_label)?;
    debug_assert_eq!(ds.predicted_labels(), &stored_pred[..]);
    Ok(ds)
}

/// Writes the LTRJ payload without touching the manifest.
pub fn write_trajectories_only(ds: &TrajectoryDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(&LTRJ_MAGIC).map_err(io)?;
    for v in [
        ds.n_examples() as u32,
        ds.n_classes() as u32,
        ds.depth() as u32,
        0u32,
    ] {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    for i in 0..ds.n_examples() {
        for v in ds.trajectory(i).rows().flatten() {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        w.write_all(&ds.true_label(i).to_le_bytes()).map_err(io)?;
        w.write_all(&ds.predicted_label(i).to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Writes the LTRJ payload and a `<stem>.manifest.json` sidecar carrying the
/// dataset id. An existing manifest keeps its provenance fields.
pub fn write_trajectories(ds: &TrajectoryDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_trajectories_only(ds, path)?;
    let mut manifest = Manifest::read_for(path)
        .ok()
        .flatten()
        .unwrap_or_else(|| Manifest::for_trajectories(ds));
    manifest.dataset_id = ds.dataset_id.clone();
    manifest.format = "LTRJ1".into();
    manifest.n_examples = ds.n_examples();
    manifest.n_classes = ds.n_classes();
    manifest.depth = Some(ds.depth());
    manifest.write(manifest_path(path))
}

pub fn load_hidden_states(path: impl AsRef<Path>) -> Result<HiddenStateDataset> {
    let path = path.as_ref();
    let buf = read(path)?;
    let header = parse_hidden_header(&buf)?;
    check_length(&buf, header.payload_len())?;
    let (n, t, h, c) = (
        header.n_examples as usize,
        header.n_layers as usize,
        header.hidden_dim as usize,
        header.n_classes as usize,
    );
    let mut cur = Cursor {
        buf: &buf,
        pos: HEADER_LEN as usize,
    };
    let mut states = Vec::with_capacity(n * t * h);
    let mut labels = Vec::with_capacity(n);
    let mut clf = Vec::with_capacity(n * c);
    for _ in 0..n {
        cur.f32s(t * h, &mut states);
        labels.push(cur.u32());
        cur.f32s(c, &mut clf);
    }
    HiddenStateDataset::new(dataset_id_for(path), t, h, c, states, labels, clf)
}

pub fn write_hidden_states(hs: &HiddenStateDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(&LHID_MAGIC).map_err(io)?;
    for v in [
        hs.n_examples() as u32,
        hs.n_layers() as u32,
        hs.hidden_dim() as u32,
        hs.n_classes() as u32,
    ] {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    for i in 0..hs.n_examples() {
        for v in hs.states_of(i) {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        w.write_all(&hs.true_label(i).to_le_bytes()).map_err(io)?;
        for v in hs.classifier_logits(i) {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    let mut manifest = Manifest::read_for(path)
        .ok()
        .flatten()
        .unwrap_or_else(|| Manifest::for_hidden_states(hs));
    manifest.dataset_id = hs.dataset_id.clone();
    manifest.write(manifest_path(path))
}
