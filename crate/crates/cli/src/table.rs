//! Sweep results as CSV.
//!
//! A file starts with `# key=value` metadata lines, then one header row and
//! one row per grid point. Numbers are written with 17 significant digits, so
//! reading a file back gives the same bits and writing it again gives the
//! same bytes.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone)]
pub struct Row {
    pub value: f64,
    pub values: Vec<f64>,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub meta: Vec<(String, String)>,
    pub parameter: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl PartialEq for Row {
    fn eq(&self, other: &Self) -> bool {
        self.value.to_bits() == other.value.to_bits()
            && self.status == other.status
            && self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl PartialEq for SweepResult {
    fn eq(&self, other: &Self) -> bool {
        self.meta == other.meta
            && self.parameter == other.parameter
            && self.columns == other.columns
            && self.rows == other.rows
    }
}

pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepResult {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            if k.contains('=') || k.contains('\n') || v.contains('\n') {
                bail!("metadata entry `{k}` cannot be written on one line");
            }
            out.push_str(&format!("# {k}={v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![self.parameter.as_str()];
        header.extend(self.columns.iter().map(String::as_str));
        header.push("status");
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![format_number(row.value)];
            rec.extend(row.values.iter().map(|&v| format_number(v)));
            rec.push(row.status.clone());
            w.write_record(&rec)?;
        }
        out.push_str(std::str::from_utf8(&w.into_inner()?)?);
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<SweepResult> {
        let mut meta = Vec::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(entry) = line.strip_prefix("# ") else { break };
            let entry = entry.trim_end_matches('\n');
            let (k, v) = entry.split_once('=').with_context(|| format!("metadata line `{entry}` has no `=`"))?;
            meta.push((k.to_string(), v.to_string()));
            body_start += line.len();
        }
        let mut r = csv::Reader::from_reader(&text.as_bytes()[body_start..]);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.len() < 2 || header.last().map(String::as_str) != Some("status") {
            bail!("header must start with the swept parameter and end with `status`");
        }
        let parameter = header[0].clone();
        let columns = header[1..header.len() - 1].to_vec();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse = |s: &str| s.parse::<f64>().with_context(|| format!("row {i}: `{s}` is not a number"));
            let value = parse(&rec[0])?;
            let values = (1..rec.len() - 1).map(|j| parse(&rec[j])).collect::<Result<Vec<_>>>()?;
            rows.push(Row { value, values, status: rec[rec.len() - 1].to_string() });
        }
        Ok(SweepResult { meta, parameter, columns, rows })
    }

    pub fn read(path: &Path) -> Result<SweepResult> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        SweepResult::from_csv(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv()?.as_bytes())
    }
}

/// Writes through a temporary file in the target directory, so readers see
/// either the old file or the complete new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
