//! Link-prediction evaluation under the time-wise filtered setting.
//!
//! Each fact yields a subject query and an object query. Every entity is
//! scored as a substitute, summing per-step scores over the fact's interval.
//! Competitors whose substituted fact is itself true at every step of the
//! query interval are removed (the gold entity never is), and the rank is
//! one plus the number of surviving candidates with a strictly lower score.

mod filter;
mod metrics;

pub use filter::FilterIndex;
pub use metrics::Metrics;

use rayon::prelude::*;

use crate::data::IntervalFact;
use crate::error::{Error, Result};
use crate::model::score::{mean_into, score_slices};
use crate::model::{Model, ScoreKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Predict the subject of `(?, p, o, t)`.
    Subject,
    /// Predict the object of `(s, p, ?, t)`.
    Object,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub direction: Direction,
    pub fact: IntervalFact,
    pub rank: usize,
    pub reciprocal_rank: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    /// Apply time-wise filtering (otherwise the raw setting).
    pub filtered: bool,
    /// Model was trained with inverse relations: answer subject queries as
    /// object queries on `p⁻¹ = p + n_r`.
    pub reciprocal: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            filtered: true,
            reciprocal: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub metrics: Metrics,
    pub results: Vec<QueryResult>,
}

/// The query as the model sees it: a fixed entity, a relation, and which
/// slot the candidates fill.
#[derive(Debug, Clone, Copy)]
struct Probe {
    anchor: usize,
    relation: usize,
    candidates_are_subjects: bool,
}

fn probe(model: &Model, fact: &IntervalFact, direction: Direction, reciprocal: bool) -> Probe {
    match direction {
        Direction::Object => Probe {
            anchor: fact.s,
            relation: fact.p,
            candidates_are_subjects: false,
        },
        Direction::Subject if reciprocal => Probe {
            anchor: fact.o,
            relation: fact.p + model.config.n_relations / 2,
            candidates_are_subjects: false,
        },
        Direction::Subject => Probe {
            anchor: fact.o,
            relation: fact.p,
            candidates_are_subjects: true,
        },
    }
}

/// Per-step entity means, shared by every query covering that step.
fn entity_means_at(model: &Model, step: usize) -> Vec<f64> {
    let d = model.config.dim;
    let t = model.config.time(step).value();
    let mut table = vec![0.0; model.config.n_entities * d];
    table
        .par_chunks_mut(d)
        .enumerate()
        .for_each(|(i, out)| mean_into(&model.params.entities, i, t, model.config.variant, out));
    table
}

fn accumulate_step(model: &Model, means: &[f64], step: usize, p: &Probe, kind: ScoreKind, scores: &mut [f64]) {
    let d = model.config.dim;
    let ents = &model.params.entities;
    let rels = &model.params.relations;
    let mut mr = vec![0.0; d];
    mean_into(rels, p.relation, model.config.time(step).value(), model.config.variant, &mut mr);
    let vr = rels.variance(p.relation);
    let ma = &means[p.anchor * d..(p.anchor + 1) * d];
    let va = ents.variance(p.anchor);
    for (c, acc) in scores.iter_mut().enumerate() {
        let mc = &means[c * d..(c + 1) * d];
        let vc = ents.variance(c);
        *acc += if p.candidates_are_subjects {
            score_slices(kind, mc, vc, &mr, vr, ma, va)
        } else {
            score_slices(kind, ma, va, &mr, vr, mc, vc)
        };
    }
}

fn filtered_out(filter: &FilterIndex, fact: &IntervalFact, direction: Direction, candidate: usize) -> bool {
    fact.steps().all(|t| {
        let set = match direction {
            Direction::Object => filter.objects(fact.s, fact.p, t),
            Direction::Subject => filter.subjects(fact.p, fact.o, t),
        };
        set.is_some_and(|s| s.contains(&candidate))
    })
}

fn rank_from_scores(
    scores: &[f64],
    fact: &IntervalFact,
    direction: Direction,
    filter: Option<&FilterIndex>,
) -> QueryResult {
    let gold = match direction {
        Direction::Object => fact.o,
        Direction::Subject => fact.s,
    };
    let gold_score = scores[gold];
    let better = scores
        .iter()
        .enumerate()
        .filter(|&(c, &sc)| {
            c != gold && sc < gold_score && !filter.is_some_and(|f| filtered_out(f, fact, direction, c))
        })
        .count();
    let rank = better + 1;
    QueryResult {
        direction,
        fact: *fact,
        rank,
        reciprocal_rank: 1.0 / rank as f64,
    }
}

/// Ranks the gold entity of one query among all entities.
pub fn rank_query(
    model: &Model,
    fact: &IntervalFact,
    direction: Direction,
    filter: Option<&FilterIndex>,
    reciprocal: bool,
) -> QueryResult {
    let kind = model.config.variant.score_kind();
    let p = probe(model, fact, direction, reciprocal);
    let mut scores = vec![0.0; model.config.n_entities];
    for step in fact.steps() {
        let means = entity_means_at(model, step);
        accumulate_step(model, &means, step, &p, kind, &mut scores);
    }
    rank_from_scores(&scores, fact, direction, filter)
}

const CHUNK: usize = 256;

/// Evaluates both query directions for every fact.
///
/// Queries are sorted by interval and processed in chunks so that the
/// per-step entity means are computed once per chunk rather than per query.
pub fn evaluate(model: &Model, facts: &[IntervalFact], filter: &FilterIndex, opts: EvalOptions) -> Result<Evaluation> {
    if facts.is_empty() {
        return Err(Error::Data("cannot evaluate an empty split".into()));
    }
    let kind = model.config.variant.score_kind();
    let filter = opts.filtered.then_some(filter);

    let mut queries: Vec<(usize, Direction)> = (0..facts.len())
        .flat_map(|i| [(i, Direction::Subject), (i, Direction::Object)])
        .collect();
    queries.sort_by_key(|&(i, _)| (facts[i].start, facts[i].end));

    let mut results: Vec<Option<QueryResult>> = vec![None; queries.len()];
    let mut slot_of = vec![0usize; queries.len()];
    // Output order matches input order: subject then object per fact.
    for (pos, &(i, dir)) in queries.iter().enumerate() {
        slot_of[pos] = 2 * i + usize::from(dir == Direction::Object);
    }

    for (chunk_idx, chunk) in queries.chunks(CHUNK).enumerate() {
        let lo = chunk.iter().map(|&(i, _)| facts[i].start).min().unwrap();
        let hi = chunk.iter().map(|&(i, _)| facts[i].end).max().unwrap();
        let mut scores = vec![vec![0.0; model.config.n_entities]; chunk.len()];
        let probes: Vec<Probe> = chunk
            .iter()
            .map(|&(i, dir)| probe(model, &facts[i], dir, opts.reciprocal))
            .collect();
        for step in lo..=hi {
            if !chunk.iter().any(|&(i, _)| facts[i].steps().contains(&step)) {
                continue;
            }
            let means = entity_means_at(model, step);
            scores
                .par_iter_mut()
                .zip(chunk.par_iter())
                .zip(probes.par_iter())
                .for_each(|((sc, &(i, _)), p)| {
                    if facts[i].steps().contains(&step) {
                        accumulate_step(model, &means, step, p, kind, sc);
                    }
                });
        }
        let ranked: Vec<QueryResult> = chunk
            .par_iter()
            .zip(scores.par_iter())
            .map(|(&(i, dir), sc)| rank_from_scores(sc, &facts[i], dir, filter))
            .collect();
        for (k, r) in ranked.into_iter().enumerate() {
            results[slot_of[chunk_idx * CHUNK + k]] = Some(r);
        }
    }

    let results: Vec<QueryResult> = results.into_iter().map(|r| r.expect("every query ranked")).collect();
    let metrics = Metrics::from_ranks(results.iter().map(|r| r.rank));
    Ok(Evaluation { metrics, results })
}
