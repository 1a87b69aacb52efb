//! CSV and JSON writers shared by the tasks.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

/// Floats with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a header and rows to `path`, or to stdout when `path` is `None`.
pub fn write_csv(path: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Summary location: the explicit path, else `out` with a `.json` extension.
pub fn summary_path(explicit: Option<&Path>, out: Option<&Path>) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| {
            out.map(|o| match o.with_extension("json") {
                j if j == o => o.with_extension("summary.json"),
                j => j,
            })
        })
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => writeln!(std::io::stdout().lock(), "{text}")?,
    }
    Ok(())
}
