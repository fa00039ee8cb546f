//! Small random datasets for tests, benchmarks and smoke runs.

use std::collections::HashSet;

use rand::Rng;

use crate::data::{DatasetBundle, IntervalFact, Provenance, RawFact, FactTime, Date, Timeline, TimelineSpec, Vocabulary};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy)]
pub struct ToySpec {
    pub n_entities: usize,
    pub n_relations: usize,
    pub n_steps: usize,
    pub n_facts: usize,
    /// Longest interval length; 1 gives point facts only.
    pub max_span: usize,
    /// Every `valid_every`-th training fact is also used for validation.
    pub valid_every: usize,
    pub seed: u64,
}

impl Default for ToySpec {
    fn default() -> Self {
        ToySpec {
            n_entities: 50,
            n_relations: 5,
            n_steps: 10,
            n_facts: 500,
            max_span: 1,
            valid_every: 10,
            seed: 0,
        }
    }
}

/// Distinct uniformly random facts over a year-binned timeline with one
/// year per step. Labels are `e{i}` / `r{p}`; ids equal label indices.
pub fn toy_bundle(spec: &ToySpec, reciprocal: bool) -> DatasetBundle {
    let mut rng = stream_rng(spec.seed, Stream::Init);
    let capacity = spec.n_entities * spec.n_entities * spec.n_relations * spec.n_steps;
    assert!(spec.n_facts <= capacity / 2, "too many facts for the toy space");
    let mut seen = HashSet::new();
    let mut train = Vec::with_capacity(spec.n_facts);
    while train.len() < spec.n_facts {
        let s = rng.random_range(0..spec.n_entities);
        let p = rng.random_range(0..spec.n_relations);
        let o = rng.random_range(0..spec.n_entities);
        let start = rng.random_range(0..spec.n_steps);
        let span = rng.random_range(1..=spec.max_span.max(1));
        let end = (start + span - 1).min(spec.n_steps - 1);
        if seen.insert((s, p, o, start)) {
            train.push(IntervalFact { s, p, o, start, end });
        }
    }

    // Vocabulary over labels in id order so that ids equal indices.
    let label_facts: Vec<RawFact> = (0..spec.n_entities.max(spec.n_relations))
        .map(|i| RawFact {
            subject: format!("e{}", i.min(spec.n_entities - 1)),
            predicate: format!("r{}", i.min(spec.n_relations - 1)),
            object: format!("e{}", i.min(spec.n_entities - 1)),
            time: FactTime::Point(Date::year_only(2000)),
        })
        .collect();
    let timeline = Timeline::YearBinned {
        bin_starts: (0..spec.n_steps as i32).map(|k| 2000 + k).collect(),
    };
    let vocabulary = Vocabulary::build(&[&label_facts], timeline, reciprocal);
    let valid = train.iter().step_by(spec.valid_every.max(1)).copied().collect();
    DatasetBundle {
        vocabulary,
        train,
        valid,
        test: Vec::new(),
        provenance: Provenance {
            sources: Vec::new(),
            timeline: TimelineSpec::YearBinned { n_bins: spec.n_steps },
        },
    }
}
