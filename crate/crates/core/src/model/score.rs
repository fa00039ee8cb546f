use std::f64::consts::TAU;

use super::params::{ParamTable, TableKind};
use super::{Model, NormalizedTime, Variant};
use crate::data::{IntervalFact, Quadruple};

/// A diagonal Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianEmbed {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

/// Which plausibility measure to compute. Lower is more plausible for all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    /// Mean of the two directed KL divergences between `P_e` and `P_r`.
    SymmetricKl,
    /// KL(P_e ‖ P_r) in closed form.
    KlEntityToRelation,
    /// KL(P_r ‖ P_e).
    KlRelationToEntity,
    /// ‖mean_s + mean_r − mean_o‖₂.
    Translation,
}

/// KL(N(mean_p, var_p) ‖ N(mean_q, var_q)) for diagonal covariances.
pub fn kl_diag(mean_p: &[f64], var_p: &[f64], mean_q: &[f64], var_q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..mean_p.len() {
        let ratio = var_p[k] / var_q[k];
        let diff = mean_q[k] - mean_p[k];
        acc += ratio + diff * diff / var_q[k] - ratio.ln() - 1.0;
    }
    0.5 * acc
}

/// ½·(KL(p‖q) + KL(q‖p)). The log-determinant terms cancel, leaving
/// ¼·Σ[a/b + b/a + m²(1/a + 1/b) − 2].
pub fn sym_kl_diag(mean_p: &[f64], var_p: &[f64], mean_q: &[f64], var_q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..mean_p.len() {
        let (a, b) = (var_p[k], var_q[k]);
        let m = mean_p[k] - mean_q[k];
        acc += a / b + b / a + m * m * (1.0 / a + 1.0 / b) - 2.0;
    }
    0.25 * acc
}

/// Writes the time-specific mean of `row` into `out`.
pub(crate) fn mean_into(table: &ParamTable, row: usize, t: f64, variant: Variant, out: &mut [f64]) {
    out.copy_from_slice(table.base(row));
    if variant.has_trend() {
        let rate = table.alpha[row] * t;
        if rate != 0.0 {
            for (o, w) in out.iter_mut().zip(table.direction(row)) {
                *o += rate * w;
            }
        }
    }
    if variant.has_seasonal() {
        for ((o, beta), omega) in out
            .iter_mut()
            .zip(table.amplitude(row))
            .zip(table.frequency(row))
        {
            if *beta != 0.0 {
                *o += beta * (TAU * omega * t).sin();
            }
        }
    }
}

/// Score from already-evaluated means and variances.
pub(crate) fn score_slices(
    kind: ScoreKind,
    mean_s: &[f64],
    var_s: &[f64],
    mean_r: &[f64],
    var_r: &[f64],
    mean_o: &[f64],
    var_o: &[f64],
) -> f64 {
    let d = mean_s.len();
    match kind {
        ScoreKind::Translation => {
            let mut acc = 0.0;
            for k in 0..d {
                let u = mean_s[k] + mean_r[k] - mean_o[k];
                acc += u * u;
            }
            acc.sqrt()
        }
        _ => {
            let mut acc = 0.0;
            for k in 0..d {
                let a = var_s[k] + var_o[k];
                let b = var_r[k];
                let m = mean_s[k] - mean_o[k] - mean_r[k];
                let m2 = m * m;
                acc += match kind {
                    ScoreKind::SymmetricKl => 0.5 * (a / b + b / a + m2 * (1.0 / a + 1.0 / b) - 2.0),
                    ScoreKind::KlEntityToRelation => a / b + m2 / b - (a / b).ln() - 1.0,
                    ScoreKind::KlRelationToEntity => b / a + m2 / a - (b / a).ln() - 1.0,
                    ScoreKind::Translation => unreachable!(),
                };
            }
            0.5 * acc
        }
    }
}

impl Model {
    pub fn entity_mean_at(&self, i: usize, t: NormalizedTime) -> Vec<f64> {
        let mut out = vec![0.0; self.config.dim];
        mean_into(&self.params.entities, i, t.value(), self.config.variant, &mut out);
        out
    }

    pub fn relation_mean_at(&self, p: usize, t: NormalizedTime) -> Vec<f64> {
        let mut out = vec![0.0; self.config.dim];
        mean_into(&self.params.relations, p, t.value(), self.config.variant, &mut out);
        out
    }

    pub fn embed(&self, table: TableKind, row: usize, t: NormalizedTime) -> GaussianEmbed {
        let tab = self.params.table(table);
        let mut mean = vec![0.0; self.config.dim];
        mean_into(tab, row, t.value(), self.config.variant, &mut mean);
        GaussianEmbed {
            mean,
            var: tab.variance(row).to_vec(),
        }
    }

    /// P_e = P_s − P_o: means subtract, variances add.
    pub fn entity_difference(&self, s: usize, o: usize, t: NormalizedTime) -> GaussianEmbed {
        let ps = self.embed(TableKind::Entity, s, t);
        let po = self.embed(TableKind::Entity, o, t);
        GaussianEmbed {
            mean: ps.mean.iter().zip(&po.mean).map(|(a, b)| a - b).collect(),
            var: ps.var.iter().zip(&po.var).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn score_with(&self, kind: ScoreKind, q: &Quadruple) -> f64 {
        let d = self.config.dim;
        let t = self.config.time(q.t).value();
        let v = self.config.variant;
        let (e, r) = (&self.params.entities, &self.params.relations);
        let mut buf = vec![0.0; 3 * d];
        let (ms, rest) = buf.split_at_mut(d);
        let (mr, mo) = rest.split_at_mut(d);
        mean_into(e, q.s, t, v, ms);
        mean_into(r, q.p, t, v, mr);
        mean_into(e, q.o, t, v, mo);
        score_slices(kind, ms, e.variance(q.s), mr, r.variance(q.p), mo, e.variance(q.o))
    }

    /// KL(P_e ‖ P_r), the directed closed form.
    pub fn kl_score(&self, q: &Quadruple) -> f64 {
        self.score_with(ScoreKind::KlEntityToRelation, q)
    }

    pub fn sym_kl_score(&self, q: &Quadruple) -> f64 {
        self.score_with(ScoreKind::SymmetricKl, q)
    }

    pub fn ts_score(&self, q: &Quadruple) -> f64 {
        self.score_with(ScoreKind::Translation, q)
    }

    /// The variant's training score.
    pub fn score(&self, q: &Quadruple) -> f64 {
        self.score_with(self.config.variant.score_kind(), q)
    }

    /// Sum of per-step scores over the fact's interval.
    pub fn interval_score(&self, f: &IntervalFact) -> f64 {
        f.expand().map(|q| self.score(&q)).sum()
    }
}
