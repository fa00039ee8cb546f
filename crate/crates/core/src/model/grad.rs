//! Analytic gradients of the scores.
//!
//! With `a = var_s + var_o`, `b = var_r` and `m = mean_s − mean_o − mean_r`
//! (all elementwise), the symmetric score is ¼·Σ[a/b + b/a + m²(1/a + 1/b) − 2]
//! and its partials are
//!
//! ```text
//! ∂/∂m = ½·m·(1/a + 1/b)
//! ∂/∂a = ¼·(1/b − (b + m²)/a²)
//! ∂/∂b = ¼·(1/a − (a + m²)/b²)
//! ```
//!
//! Mean gradients flow to `mean_s` with sign +, to `mean_o` and `mean_r` with
//! sign −, then through the time-series decomposition into the base, trend
//! and seasonal parameters.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use super::params::{Family, ParamRef, ParamTable, TableKind};
use super::score::{mean_into, ScoreKind};
use super::{Model, Variant};
use crate::data::Quadruple;

/// Gradient of one table row. Families the variant does not use stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RowGrad {
    pub base: Vec<f64>,
    pub alpha: f64,
    pub direction: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub frequency: Vec<f64>,
    pub variance: Vec<f64>,
}

impl RowGrad {
    pub fn zeros(dim: usize) -> Self {
        RowGrad {
            base: vec![0.0; dim],
            alpha: 0.0,
            direction: vec![0.0; dim],
            amplitude: vec![0.0; dim],
            frequency: vec![0.0; dim],
            variance: vec![0.0; dim],
        }
    }

    pub fn family(&self, family: Family) -> &[f64] {
        match family {
            Family::Base => &self.base,
            Family::Alpha => std::slice::from_ref(&self.alpha),
            Family::Direction => &self.direction,
            Family::Amplitude => &self.amplitude,
            Family::Frequency => &self.frequency,
            Family::Variance => &self.variance,
        }
    }

    fn add_scaled(&mut self, other: &RowGrad, scale: f64) {
        fn axpy(y: &mut [f64], x: &[f64], s: f64) {
            for (a, b) in y.iter_mut().zip(x) {
                *a += s * b;
            }
        }
        axpy(&mut self.base, &other.base, scale);
        self.alpha += scale * other.alpha;
        axpy(&mut self.direction, &other.direction, scale);
        axpy(&mut self.amplitude, &other.amplitude, scale);
        axpy(&mut self.frequency, &other.frequency, scale);
        axpy(&mut self.variance, &other.variance, scale);
    }
}

/// Sparse gradient record: only rows touched by some quadruple are present.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    dim: usize,
    pub entities: BTreeMap<usize, RowGrad>,
    pub relations: BTreeMap<usize, RowGrad>,
}

impl Gradients {
    pub fn new(dim: usize) -> Self {
        Gradients {
            dim,
            entities: BTreeMap::new(),
            relations: BTreeMap::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.relations.is_empty()
    }

    pub fn rows(&self, table: TableKind) -> &BTreeMap<usize, RowGrad> {
        match table {
            TableKind::Entity => &self.entities,
            TableKind::Relation => &self.relations,
        }
    }

    fn row_mut(&mut self, table: TableKind, row: usize) -> &mut RowGrad {
        let dim = self.dim;
        let map = match table {
            TableKind::Entity => &mut self.entities,
            TableKind::Relation => &mut self.relations,
        };
        map.entry(row).or_insert_with(|| RowGrad::zeros(dim))
    }

    /// Partial derivative for one scalar parameter; `None` if its row is
    /// absent from the record.
    pub fn get(&self, r: ParamRef) -> Option<f64> {
        let row = self.rows(r.table).get(&r.row)?;
        let k = if r.family.is_vector() { r.k } else { 0 };
        Some(row.family(r.family)[k])
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (table, map) in [(TableKind::Entity, &other.entities), (TableKind::Relation, &other.relations)] {
            for (&row, g) in map {
                self.row_mut(table, row).add_scaled(g, scale);
            }
        }
    }
}

/// Pushes an upstream mean gradient `g` through the decomposition of `row`.
fn backprop_mean(table: &ParamTable, row: usize, t: f64, variant: Variant, g: &[f64], scale: f64, out: &mut RowGrad) {
    for (o, gk) in out.base.iter_mut().zip(g) {
        *o += scale * gk;
    }
    if variant.has_trend() {
        let dir = table.direction(row);
        let dot: f64 = g.iter().zip(dir).map(|(a, b)| a * b).sum();
        out.alpha += scale * t * dot;
        let rate = table.alpha[row] * t;
        for (o, gk) in out.direction.iter_mut().zip(g) {
            *o += scale * rate * gk;
        }
    }
    if variant.has_seasonal() {
        let amp = table.amplitude(row);
        let freq = table.frequency(row);
        for k in 0..g.len() {
            let phase = TAU * freq[k] * t;
            out.amplitude[k] += scale * g[k] * phase.sin();
            out.frequency[k] += scale * g[k] * amp[k] * phase.cos() * TAU * t;
        }
    }
}

impl Model {
    /// Gradient of the variant's score for one quadruple.
    pub fn grad_score(&self, q: &Quadruple) -> Gradients {
        self.grad_with(self.config.variant.score_kind(), q)
    }

    pub fn grad_with(&self, kind: ScoreKind, q: &Quadruple) -> Gradients {
        let mut g = Gradients::new(self.config.dim);
        self.accumulate_grad(kind, q, 1.0, &mut g);
        g
    }

    /// Adds `weight · ∇score(q)` into `grads`.
    pub fn accumulate_grad(&self, kind: ScoreKind, q: &Quadruple, weight: f64, grads: &mut Gradients) {
        let d = self.config.dim;
        let variant = self.config.variant;
        let t = self.config.time(q.t).value();
        let (ents, rels) = (&self.params.entities, &self.params.relations);

        let mut ms = vec![0.0; d];
        let mut mr = vec![0.0; d];
        let mut mo = vec![0.0; d];
        mean_into(ents, q.s, t, variant, &mut ms);
        mean_into(rels, q.p, t, variant, &mut mr);
        mean_into(ents, q.o, t, variant, &mut mo);

        // Upstream gradient w.r.t. the mean combination and the variances.
        let mut g_mean = vec![0.0; d];
        let mut g_a = vec![0.0; d];
        let mut g_b = vec![0.0; d];
        // Sign with which g_mean flows into the relation mean.
        let rel_sign;

        match kind {
            ScoreKind::Translation => {
                let u: Vec<f64> = (0..d).map(|k| ms[k] + mr[k] - mo[k]).collect();
                let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 0.0 {
                    for k in 0..d {
                        g_mean[k] = u[k] / n;
                    }
                }
                rel_sign = 1.0;
            }
            _ => {
                let (vs, vo, vr) = (ents.variance(q.s), ents.variance(q.o), rels.variance(q.p));
                for k in 0..d {
                    let a = vs[k] + vo[k];
                    let b = vr[k];
                    let m = ms[k] - mo[k] - mr[k];
                    let m2 = m * m;
                    let (gm, ga, gb) = match kind {
                        ScoreKind::SymmetricKl => (
                            0.5 * m * (1.0 / a + 1.0 / b),
                            0.25 * (1.0 / b - (b + m2) / (a * a)),
                            0.25 * (1.0 / a - (a + m2) / (b * b)),
                        ),
                        ScoreKind::KlEntityToRelation => (
                            m / b,
                            0.5 * (1.0 / b - 1.0 / a),
                            0.5 * (1.0 / b - (a + m2) / (b * b)),
                        ),
                        ScoreKind::KlRelationToEntity => (
                            m / a,
                            0.5 * (1.0 / a - (b + m2) / (a * a)),
                            0.5 * (1.0 / a - 1.0 / b),
                        ),
                        ScoreKind::Translation => unreachable!(),
                    };
                    g_mean[k] = gm;
                    g_a[k] = ga;
                    g_b[k] = gb;
                }
                rel_sign = -1.0;
            }
        }

        let noise = kind != ScoreKind::Translation;
        {
            let gs = grads.row_mut(TableKind::Entity, q.s);
            backprop_mean(ents, q.s, t, variant, &g_mean, weight, gs);
            if noise {
                for (v, ga) in gs.variance.iter_mut().zip(&g_a) {
                    *v += weight * ga;
                }
            }
        }
        {
            let go = grads.row_mut(TableKind::Entity, q.o);
            backprop_mean(ents, q.o, t, variant, &g_mean, -weight, go);
            if noise {
                for (v, ga) in go.variance.iter_mut().zip(&g_a) {
                    *v += weight * ga;
                }
            }
        }
        {
            let gr = grads.row_mut(TableKind::Relation, q.p);
            backprop_mean(rels, q.p, t, variant, &g_mean, rel_sign * weight, gr);
            if noise {
                for (v, gb) in gr.variance.iter_mut().zip(&g_b) {
                    *v += weight * gb;
                }
            }
        }
    }
}
