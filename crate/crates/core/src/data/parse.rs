//! Tab-separated fact files.
//!
//! Point files have four columns (`subject predicate object YYYY-MM-DD`),
//! interval files five (`subject predicate object start end`) with `#`
//! placeholders for unknown date fields.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::date::{format_endpoint, Date};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactTime {
    Point(Date),
    Interval {
        start: Option<Date>,
        end: Option<Date>,
    },
}

impl FactTime {
    /// Every known endpoint date.
    pub fn dates(&self) -> impl Iterator<Item = &Date> {
        let (a, b) = match self {
            FactTime::Point(d) => (Some(d), None),
            FactTime::Interval { start, end } => (start.as_ref(), end.as_ref()),
        };
        a.into_iter().chain(b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawFact {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub time: FactTime,
}

impl RawFact {
    /// A short human-readable form used in error messages.
    pub fn describe(&self) -> String {
        let time = match &self.time {
            FactTime::Point(d) => d.to_string(),
            FactTime::Interval { start, end } => format!(
                "[{}, {}]",
                format_endpoint(start.as_ref()),
                format_endpoint(end.as_ref())
            ),
        };
        format!("({}, {}, {}, {})", self.subject, self.predicate, self.object, time)
    }
}

fn split_fields(line: &str, expected: usize, lineno: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != expected {
        return Err(Error::parse(
            lineno,
            format!("expected {expected} tab-separated fields, found {}", fields.len()),
        ));
    }
    Ok(fields)
}

fn label(field: &str, what: &str, lineno: usize) -> Result<String> {
    let t = field.trim();
    if t.is_empty() {
        return Err(Error::parse(lineno, format!("empty {what}")));
    }
    Ok(t.to_owned())
}

fn parse_lines<R, F>(reader: R, mut parse_line: F) -> Result<Vec<RawFact>>
where
    R: BufRead,
    F: FnMut(&str, usize) -> Result<RawFact>,
{
    let mut facts = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        facts.push(parse_line(line, lineno)?);
    }
    Ok(facts)
}

/// Parses a four-column point-fact file, preserving line order.
pub fn parse_point_file<R: BufRead>(reader: R) -> Result<Vec<RawFact>> {
    parse_lines(reader, |line, lineno| {
        let f = split_fields(line, 4, lineno)?;
        let date = Date::parse_full(f[3].trim()).map_err(|m| Error::parse(lineno, m))?;
        Ok(RawFact {
            subject: label(f[0], "subject", lineno)?,
            predicate: label(f[1], "predicate", lineno)?,
            object: label(f[2], "object", lineno)?,
            time: FactTime::Point(date),
        })
    })
}

/// Parses a five-column interval-fact file. An all-`#` year yields a
/// missing endpoint.
pub fn parse_interval_file<R: BufRead>(reader: R) -> Result<Vec<RawFact>> {
    parse_lines(reader, |line, lineno| {
        let f = split_fields(line, 5, lineno)?;
        let start = Date::parse_partial(f[3].trim()).map_err(|m| Error::parse(lineno, m))?;
        let end = Date::parse_partial(f[4].trim()).map_err(|m| Error::parse(lineno, m))?;
        Ok(RawFact {
            subject: label(f[0], "subject", lineno)?,
            predicate: label(f[1], "predicate", lineno)?,
            object: label(f[2], "object", lineno)?,
            time: FactTime::Interval { start, end },
        })
    })
}

/// Writes facts back out in the column layout they were parsed from.
pub fn write_facts<W: Write>(mut out: W, facts: &[RawFact]) -> std::io::Result<()> {
    for fact in facts {
        write!(out, "{}\t{}\t{}\t", fact.subject, fact.predicate, fact.object)?;
        match &fact.time {
            FactTime::Point(d) => writeln!(out, "{d}")?,
            FactTime::Interval { start, end } => writeln!(
                out,
                "{}\t{}",
                format_endpoint(start.as_ref()),
                format_endpoint(end.as_ref())
            )?,
        }
    }
    Ok(())
}
