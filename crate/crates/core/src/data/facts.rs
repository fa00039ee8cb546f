use serde::{Deserialize, Serialize};

use super::parse::{FactTime, RawFact};
use super::vocab::Vocabulary;
use crate::error::{Error, Result};

/// A fact at a single time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Quadruple {
    pub s: usize,
    pub p: usize,
    pub o: usize,
    pub t: usize,
}

/// A fact valid over the closed step range `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntervalFact {
    pub s: usize,
    pub p: usize,
    pub o: usize,
    pub start: usize,
    pub end: usize,
}

impl IntervalFact {
    pub fn point(q: Quadruple) -> Self {
        IntervalFact {
            s: q.s,
            p: q.p,
            o: q.o,
            start: q.t,
            end: q.t,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn steps(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }

    /// One quadruple per covered step, in increasing time order.
    pub fn expand(&self) -> impl Iterator<Item = Quadruple> + '_ {
        self.steps().map(move |t| Quadruple {
            s: self.s,
            p: self.p,
            o: self.o,
            t,
        })
    }
}

pub fn expand_interval(fact: &IntervalFact) -> Vec<Quadruple> {
    fact.expand().collect()
}

/// Resolves labels and maps dates to steps. Missing interval endpoints
/// become the first or last step; a start mapping after the end is an error.
pub fn discretize(fact: &RawFact, vocab: &Vocabulary) -> Result<IntervalFact> {
    let lookup = |id: Option<usize>, what: &str, label: &str| {
        id.ok_or_else(|| Error::Data(format!("unknown {what} {label:?} in {}", fact.describe())))
    };
    let s = lookup(vocab.entity_id(&fact.subject), "entity", &fact.subject)?;
    let p = lookup(vocab.relation_id(&fact.predicate), "relation", &fact.predicate)?;
    let o = lookup(vocab.entity_id(&fact.object), "entity", &fact.object)?;
    let tl = &vocab.timeline;
    let (start, end) = match &fact.time {
        FactTime::Point(d) => {
            let t = tl.step_of(d)?;
            (t, t)
        }
        FactTime::Interval { start, end } => {
            let a = match start {
                Some(d) => tl.step_of(d)?,
                None => 0,
            };
            let b = match end {
                Some(d) => tl.step_of(d)?,
                None => tl.n_steps() - 1,
            };
            (a, b)
        }
    };
    if start > end {
        return Err(Error::Data(format!(
            "interval start step {start} after end step {end} in {}",
            fact.describe()
        )));
    }
    Ok(IntervalFact { s, p, o, start, end })
}
