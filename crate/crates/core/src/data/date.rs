//! Calendar dates with optionally unknown month and day fields.
//!
//! Interval files spell unknown fields with `#` placeholders, e.g.
//! `2003-##-##` or `####-##-##`. A date whose year is unknown is represented
//! as `None` by the caller; a [`Date`] always carries a year.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Date {
    pub year: i32,
    pub month: Option<u32>,
    pub day: Option<u32>,
}

impl Date {
    pub fn ymd(year: i32, month: u32, day: u32) -> Self {
        Date {
            year,
            month: Some(month),
            day: Some(day),
        }
    }

    pub fn year_only(year: i32) -> Self {
        Date {
            year,
            month: None,
            day: None,
        }
    }

    /// The calendar day, if both month and day are known and valid.
    pub fn to_naive(&self) -> Option<NaiveDate> {
        NaiveDate::from_ymd_opt(self.year, self.month?, self.day?)
    }

    /// Parses a strict `YYYY-MM-DD` calendar date.
    pub fn parse_full(text: &str) -> Result<Self, String> {
        match Self::parse_partial(text)? {
            Some(date) if date.month.is_some() && date.day.is_some() => Ok(date),
            _ => Err(format!("expected a full YYYY-MM-DD date, got {text:?}")),
        }
    }

    /// Parses a date whose fields may be `#` placeholders.
    ///
    /// Returns `Ok(None)` when the year itself is unknown. A known day with
    /// an unknown month is rejected.
    pub fn parse_partial(text: &str) -> Result<Option<Self>, String> {
        let bad = || format!("malformed date {text:?}");
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let mut parts = body.split('-');
        let (Some(y), Some(m), Some(d), None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        if y.is_empty() || m.len() != 2 || d.len() != 2 {
            return Err(bad());
        }

        let year = match field(y).map_err(|_| bad())? {
            None => {
                if negative {
                    return Err(bad());
                }
                // An unknown year makes the rest meaningless.
                return Ok(None);
            }
            Some(v) => i32::try_from(v).map_err(|_| bad())?,
        };
        let year = if negative { -year } else { year };
        let month = field(m).map_err(|_| bad())?;
        let day = field(d).map_err(|_| bad())?;

        if month.is_none() && day.is_some() {
            return Err(bad());
        }
        if let Some(m) = month {
            if !(1..=12).contains(&m) {
                return Err(format!("invalid month in {text:?}"));
            }
        }
        let date = Date { year, month, day };
        if day.is_some() && date.to_naive().is_none() {
            return Err(format!("invalid calendar date {text:?}"));
        }
        Ok(Some(date))
    }
}

/// All digits, or all `#`.
fn field(s: &str) -> Result<Option<u32>, ()> {
    if s.bytes().all(|b| b == b'#') {
        Ok(None)
    } else if s.bytes().all(|b| b.is_ascii_digit()) {
        s.parse().map(Some).map_err(|_| ())
    } else {
        Err(())
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.year < 0 {
            write!(f, "{}", self.year)?;
        } else {
            write!(f, "{:04}", self.year)?;
        }
        match self.month {
            Some(m) => write!(f, "-{m:02}")?,
            None => f.write_str("-##")?,
        }
        match self.day {
            Some(d) => write!(f, "-{d:02}"),
            None => f.write_str("-##"),
        }
    }
}

/// Formats an optional interval endpoint, `None` as `####-##-##`.
pub fn format_endpoint(date: Option<&Date>) -> String {
    match date {
        Some(d) => d.to_string(),
        None => "####-##-##".to_owned(),
    }
}
