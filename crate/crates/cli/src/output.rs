//! Writing results: files in an output directory, or stdout.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::Value;
use tropoclust_core::{Scalar, TorusPoint};

pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<&Path>) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Sink {
            dir: dir.map(Path::to_path_buf),
        })
    }

    /// Writes `name` into the output directory. Without a directory only the
    /// primary artifact is printed.
    pub fn emit(&self, name: &str, contents: &str, primary: bool) -> Result<()> {
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
            }
            None if primary => {
                let mut out = io::stdout().lock();
                out.write_all(contents.as_bytes()).context("writing to stdout")?;
                out.flush().context("writing to stdout")
            }
            None => Ok(()),
        }
    }

    pub fn emit_json(&self, name: &str, value: &Value, primary: bool) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
        text.push('\n');
        self.emit(name, &text, primary)
    }
}

/// CSV text with LF line endings.
pub fn csv_text<R, I, F>(header: &[&str], rows: R) -> Result<String>
where
    R: IntoIterator<Item = I>,
    I: IntoIterator<Item = F>,
    F: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(String::from_utf8(bytes)?)
}

pub fn point_json<S: Scalar>(p: &TorusPoint<S>) -> Value {
    Value::Array(p.iter().map(|v| Value::String(v.to_literal())).collect())
}

/// Equal-width histogram with `bins` bins over `[min, max]`; rows are
/// `(lower, upper, count)`. A constant sample gives one bin.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    if values.is_empty() {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo || bins <= 1 {
        return vec![(lo, hi, values.len())];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + width * i as f64, lo + width * (i + 1) as f64, c))
        .collect()
}
