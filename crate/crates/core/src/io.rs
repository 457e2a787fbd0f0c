//! Plain-text formats: `x,y` pattern CSV and pretty JSON.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! written pattern reads back bit-identically.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Point, PointPattern, Window};

pub fn write_pattern_csv<W: Write>(p: &PointPattern, mut out: W) -> std::io::Result<()> {
    writeln!(out, "x,y")?;
    for q in p.points() {
        writeln!(out, "{},{}", q.x, q.y)?;
    }
    Ok(())
}

/// Reads an `x,y` CSV. Blank lines are skipped; CRLF endings are accepted.
pub fn read_pattern_csv<R: BufRead>(input: R, window: Window) -> Result<PointPattern> {
    let mut points = Vec::new();
    let mut lines_of_points = Vec::new();
    let mut saw_header = false;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let text = line.trim_end_matches('\r').trim();
        if text.is_empty() {
            continue;
        }
        if !saw_header {
            let header = text.trim_start_matches('\u{feff}').replace(' ', "");
            if header != "x,y" {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected header `x,y`, found `{text}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let parse = |s: &str, name: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("{name} = `{s}` is not a finite number"),
                })
        };
        points.push(Point::new(parse(fields[0], "x")?, parse(fields[1], "y")?));
        lines_of_points.push(line_no);
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            message: "empty file, expected header `x,y`".into(),
        });
    }
    PointPattern::new(points, window).map_err(|e| match e {
        Error::PointOutsideWindow { index, x, y } => Error::Parse {
            line: lines_of_points[index],
            message: format!("point ({x}, {y}) lies outside the window {window}"),
        },
        other => other,
    })
}

pub fn read_pattern_file(path: impl AsRef<Path>, window: Window) -> Result<PointPattern> {
    read_pattern_csv(BufReader::new(File::open(path)?), window)
}

pub fn write_pattern_file(path: impl AsRef<Path>, p: &PointPattern) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_pattern_csv(p, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_json_file<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_json(&mut out, value)?;
    out.flush()?;
    Ok(())
}

pub fn read_json_file<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}
