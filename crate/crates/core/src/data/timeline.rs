//! Discretization of calendar dates into time steps.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::date::Date;
use super::parse::RawFact;
use crate::error::{Error, Result};

/// How a [`Timeline`] should be derived from the observed dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimelineSpec {
    /// One step per calendar day between the earliest and latest date.
    Day,
    /// Years only (month/day dropped), grouped into `n_bins` frequency-balanced bins.
    YearBinned { n_bins: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Timeline {
    Day { origin: NaiveDate, n_steps: usize },
    /// `bin_starts[k]` is the first year of bin `k`; strictly increasing.
    YearBinned { bin_starts: Vec<i32> },
}

impl Timeline {
    pub fn n_steps(&self) -> usize {
        match self {
            Timeline::Day { n_steps, .. } => *n_steps,
            Timeline::YearBinned { bin_starts } => bin_starts.len(),
        }
    }

    /// Maps a date to its step. Dates outside the observed range clamp to
    /// the first or last step.
    pub fn step_of(&self, date: &Date) -> Result<usize> {
        match self {
            Timeline::Day { origin, n_steps } => {
                let day = date.to_naive().ok_or_else(|| {
                    Error::Data(format!("day-granularity timeline needs a full date, got {date}"))
                })?;
                let offset = (day - *origin).num_days();
                Ok(offset.clamp(0, *n_steps as i64 - 1) as usize)
            }
            Timeline::YearBinned { bin_starts } => {
                let idx = bin_starts.partition_point(|&start| start <= date.year);
                Ok(idx.saturating_sub(1))
            }
        }
    }
}

/// Builds a timeline covering every dated endpoint in `facts`.
pub fn build_timeline<'a, I>(facts: I, spec: TimelineSpec) -> Result<Timeline>
where
    I: IntoIterator<Item = &'a RawFact>,
{
    let dates = facts.into_iter().flat_map(|f| f.time.dates());
    match spec {
        TimelineSpec::Day => {
            let mut range: Option<(NaiveDate, NaiveDate)> = None;
            for date in dates {
                let day = date.to_naive().ok_or_else(|| {
                    Error::Data(format!("day granularity requires full dates, found {date}"))
                })?;
                range = Some(match range {
                    None => (day, day),
                    Some((lo, hi)) => (lo.min(day), hi.max(day)),
                });
            }
            let (origin, last) = range.ok_or_else(|| Error::Data("no dated facts".into()))?;
            let n_steps = (last - origin).num_days() as usize + 1;
            Ok(Timeline::Day { origin, n_steps })
        }
        TimelineSpec::YearBinned { n_bins } => {
            let mut histogram = BTreeMap::<i32, u64>::new();
            for date in dates {
                *histogram.entry(date.year).or_default() += 1;
            }
            if histogram.is_empty() {
                return Err(Error::Data("no dated facts".into()));
            }
            let histogram: Vec<(i32, u64)> = histogram.into_iter().collect();
            let bin_starts = greedy_year_bins(&histogram, n_bins)?;
            Ok(Timeline::YearBinned { bin_starts })
        }
    }
}

/// Greedy left-to-right partition of a sorted year histogram into `n_bins`
/// contiguous bins.
///
/// Bin `k` closes as soon as the cumulative count reaches
/// `total * (k + 1) / n_bins`, or when the remaining distinct years are
/// exactly enough to give every remaining bin one year. Returns the first
/// year of each bin.
pub fn greedy_year_bins(histogram: &[(i32, u64)], n_bins: usize) -> Result<Vec<i32>> {
    if n_bins == 0 {
        return Err(Error::Config("number of time bins must be at least 1".into()));
    }
    if n_bins > histogram.len() {
        return Err(Error::Config(format!(
            "{n_bins} time bins requested but only {} distinct years observed",
            histogram.len()
        )));
    }
    let total: u128 = histogram.iter().map(|&(_, c)| c as u128).sum();
    let mut starts = Vec::with_capacity(n_bins);
    starts.push(histogram[0].0);
    let mut cumulative: u128 = 0;
    for (i, &(_, count)) in histogram.iter().enumerate() {
        cumulative += count as u128;
        let closed = starts.len();
        if closed == n_bins {
            break;
        }
        let bins_to_open = n_bins - closed;
        let years_left = histogram.len() - i - 1;
        let reached = cumulative * n_bins as u128 >= total * closed as u128;
        if reached || years_left == bins_to_open {
            starts.push(histogram[i + 1].0);
        }
    }
    debug_assert_eq!(starts.len(), n_bins);
    Ok(starts)
}
