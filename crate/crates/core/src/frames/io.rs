//! The `.hkf` frame file: a versioned JSON document whose floats round-trip
//! exactly.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::FrameSystem;
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "hkf";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct FileRef<'a> {
    format: &'a str,
    version: u32,
    frame: &'a FrameSystem,
}

#[derive(Deserialize)]
struct FileOwned {
    frame: FrameSystem,
}

pub fn write_frame<W: Write>(frame: &FrameSystem, mut w: W) -> Result<()> {
    let doc = FileRef {
        format: FORMAT_TAG,
        version: FORMAT_VERSION,
        frame,
    };
    serde_json::to_writer(&mut w, &doc).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_frame<R: Read>(mut r: R) -> Result<FrameSystem> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    match value.get("format").and_then(Value::as_str) {
        Some(FORMAT_TAG) => {}
        other => return Err(Error::Format(format!("not a frame file (format tag {other:?})"))),
    }
    match value.get("version").and_then(Value::as_u64) {
        Some(v) if v == FORMAT_VERSION as u64 => {}
        other => {
            return Err(Error::Format(format!(
                "unsupported frame file version {other:?}; expected {FORMAT_VERSION}"
            )))
        }
    }
    let file: FileOwned = serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
    Ok(file.frame)
}

pub fn save_frame(frame: &FrameSystem, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_frame(frame, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_frame(path: &Path) -> Result<FrameSystem> {
    read_frame(fs::File::open(path)?)
}

/// Serializes a dense matrix as `{rows, cols, data}` in row-major order.
pub(crate) mod matrix {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Dense {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let data = m.transpose().as_slice().to_vec();
        Dense {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let dense = Dense::deserialize(d)?;
        if dense.data.len() != dense.rows * dense.cols {
            return Err(serde::de::Error::custom("matrix data length does not match its shape"));
        }
        Ok(DMatrix::from_row_slice(dense.rows, dense.cols, &dense.data))
    }
}
