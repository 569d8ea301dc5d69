//! Trace CSV ingestion.
//!
//! Schema: header `video_id,day,views`, one row per (video, day). Several
//! videos may share a file and days may be sparse; a missing day has zero views.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use vidpop::ViewTrace;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
struct Row {
    video_id: String,
    day: u32,
    views: f64,
}

/// Reads every trace in a CSV file, sorted by video id.
pub fn read_traces(path: &Path) -> Result<Vec<ViewTrace>> {
    let data = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse_traces(&data, path)
}

pub fn parse_traces(data: &[u8], path: &Path) -> Result<Vec<ViewTrace>> {
    let parse_err = |line: u64, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(data);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let expected = ["video_id", "day", "views"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(parse_err(
            1,
            format!("expected header `video_id,day,views`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut days: BTreeMap<String, BTreeMap<u32, f64>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let row: Row = rec
            .deserialize(Some(&headers))
            .map_err(|e| parse_err(line, e.to_string()))?;
        if !(row.views.is_finite() && row.views >= 0.0) {
            return Err(parse_err(line, format!("views must be >= 0, got {}", row.views)));
        }
        let per_video = days.entry(row.video_id.clone()).or_default();
        if per_video.insert(row.day, row.views).is_some() {
            return Err(parse_err(
                line,
                format!("duplicate day {} for video `{}`", row.day, row.video_id),
            ));
        }
    }
    if days.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    Ok(days
        .into_iter()
        .map(|(id, per_day)| {
            let len = per_day.keys().next_back().map_or(0, |d| *d as usize + 1);
            let mut counts = vec![0.0; len];
            for (d, v) in per_day {
                counts[d as usize] = v;
            }
            ViewTrace::new(id, counts)
        })
        .collect())
}

/// A single CSV file, or every `*.csv` file directly inside a directory.
pub fn input_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).map_err(|e| CliError::io(path, e))? {
        let p = entry.map_err(|e| CliError::io(path, e))?.path();
        if p.is_file() && p.extension().is_some_and(|e| e == "csv") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}
