//! Transcript JSONL, JSON snapshots and CSV rows.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use lowbit_core::oracle::{Transcript, TranscriptHeader, TranscriptRecord};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Header line followed by one record per line, newline-terminated.
pub fn transcript_to_jsonl(header: &TranscriptHeader, t: &Transcript) -> Result<String> {
    let mut out = serde_json::to_string(header)?;
    out.push('\n');
    for rec in &t.records {
        out.push_str(&serde_json::to_string(rec)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_transcript(path: &Path, header: &TranscriptHeader, t: &Transcript) -> Result<()> {
    let text = transcript_to_jsonl(header, t)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Parses a transcript file. Blank lines are ignored; anything else that does
/// not parse is an error naming the line.
pub fn read_transcript(path: &Path) -> Result<(TranscriptHeader, Transcript)> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let header: TranscriptHeader = loop {
        let Some((no, line)) = lines.next() else {
            bail!("{}: empty transcript", path.display());
        };
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        break serde_json::from_str(&line).with_context(|| format!("{}:{}: bad header", path.display(), no + 1))?;
    };
    let mut t = Transcript::new(header.n + header.d);
    for (no, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TranscriptRecord =
            serde_json::from_str(&line).with_context(|| format!("{}:{}: bad record", path.display(), no + 1))?;
        t.push(rec).map_err(|e| anyhow::anyhow!("{}:{}: {e}", path.display(), no + 1))?;
    }
    Ok((header, t))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// One CSV row. Empty cells are written for `survivors` and `verified` when
/// they do not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub rho: f64,
    pub adversary: String,
    pub mode: String,
    pub floor: u64,
    pub queries: f64,
    pub cuts: f64,
    pub survivors: Option<u64>,
    pub verified: Option<bool>,
    pub wallclock_ms: f64,
}

pub fn write_csv<W: Write>(w: W, rows: &[CsvRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}
