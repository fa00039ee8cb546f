//! Fixtures shared by the benchmarks in `benches/`.

use atise_core::data::{IntervalFact, Quadruple};
use atise_core::{Model, ModelConfig, Variant};

/// A freshly initialized model with nonzero trend and seasonal parameters,
/// so every term of the mean is exercised.
pub fn model(variant: Variant, dim: usize, n_entities: usize, n_relations: usize, n_steps: usize) -> Model {
    let config = ModelConfig {
        dim,
        variant,
        n_entities,
        n_relations,
        n_steps,
        ..ModelConfig::default()
    };
    let mut m = Model::init(config, 0).expect("valid benchmark config");
    for t in [&mut m.params.entities, &mut m.params.relations] {
        t.alpha.iter_mut().enumerate().for_each(|(i, a)| *a = 0.1 + 0.01 * (i % 7) as f64);
        t.amplitude.iter_mut().enumerate().for_each(|(i, b)| *b = 0.05 * ((i % 5) as f64 - 2.0));
    }
    m
}

/// Deterministic, well-spread quadruples.
pub fn quads(m: &Model, n: usize) -> Vec<Quadruple> {
    let c = &m.config;
    (0..n)
        .map(|i| Quadruple {
            s: (i * 7919) % c.n_entities,
            p: (i * 31) % c.n_relations,
            o: (i * 104_729 + 1) % c.n_entities,
            t: (i * 13) % c.n_steps,
        })
        .collect()
}

pub fn facts(m: &Model, n: usize, span: usize) -> Vec<IntervalFact> {
    quads(m, n)
        .into_iter()
        .map(|q| {
            let start = q.t.min(m.config.n_steps - span);
            IntervalFact { s: q.s, p: q.p, o: q.o, start, end: start + span - 1 }
        })
        .collect()
}
