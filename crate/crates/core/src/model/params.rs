use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ModelConfig;

/// Parameter families of one table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Base,
    Alpha,
    Direction,
    Amplitude,
    Frequency,
    Variance,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Base,
        Family::Alpha,
        Family::Direction,
        Family::Amplitude,
        Family::Frequency,
        Family::Variance,
    ];

    pub fn is_vector(self) -> bool {
        self != Family::Alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableKind {
    Entity,
    Relation,
}

/// Address of a single scalar parameter. `k` is ignored for `Alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamRef {
    pub table: TableKind,
    pub row: usize,
    pub family: Family,
    pub k: usize,
}

/// One parameter table (entities or relations). Vector families are stored
/// row-major, `rows × dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamTable {
    pub rows: usize,
    pub dim: usize,
    pub base: Vec<f64>,
    pub alpha: Vec<f64>,
    pub direction: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub frequency: Vec<f64>,
    pub variance: Vec<f64>,
}

impl ParamTable {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        ParamTable {
            rows,
            dim,
            base: vec![0.0; rows * dim],
            alpha: vec![0.0; rows],
            direction: vec![0.0; rows * dim],
            amplitude: vec![0.0; rows * dim],
            frequency: vec![0.0; rows * dim],
            variance: vec![0.0; rows * dim],
        }
    }

    fn init<R: Rng>(rows: usize, config: &ModelConfig, rng: &mut R) -> Self {
        let d = config.dim;
        let bound = 6.0 / (d as f64).sqrt();
        let mut t = ParamTable::zeros(rows, d);
        // Draw order is part of the determinism contract: base, direction,
        // variance, frequency.
        for x in t.base.iter_mut() {
            *x = rng.random_range(-bound..bound);
        }
        for x in t.direction.iter_mut() {
            *x = rng.random_range(-bound..bound);
        }
        for x in t.variance.iter_mut() {
            *x = rng.random_range(config.c_min..config.c_max);
        }
        for x in t.frequency.iter_mut() {
            *x = rng.random_range(config.c_min..config.c_max);
        }
        for row in 0..rows {
            normalize_or_redraw(&mut t.base[row * d..(row + 1) * d], bound, rng);
            normalize_or_redraw(&mut t.direction[row * d..(row + 1) * d], bound, rng);
        }
        t
    }

    #[inline]
    fn span(&self, row: usize) -> std::ops::Range<usize> {
        row * self.dim..(row + 1) * self.dim
    }

    pub fn base(&self, row: usize) -> &[f64] {
        &self.base[self.span(row)]
    }

    pub fn direction(&self, row: usize) -> &[f64] {
        &self.direction[self.span(row)]
    }

    pub fn amplitude(&self, row: usize) -> &[f64] {
        &self.amplitude[self.span(row)]
    }

    pub fn frequency(&self, row: usize) -> &[f64] {
        &self.frequency[self.span(row)]
    }

    pub fn variance(&self, row: usize) -> &[f64] {
        &self.variance[self.span(row)]
    }

    pub fn family(&self, family: Family) -> &[f64] {
        match family {
            Family::Base => &self.base,
            Family::Alpha => &self.alpha,
            Family::Direction => &self.direction,
            Family::Amplitude => &self.amplitude,
            Family::Frequency => &self.frequency,
            Family::Variance => &self.variance,
        }
    }

    pub fn family_mut(&mut self, family: Family) -> &mut [f64] {
        match family {
            Family::Base => &mut self.base,
            Family::Alpha => &mut self.alpha,
            Family::Direction => &mut self.direction,
            Family::Amplitude => &mut self.amplitude,
            Family::Frequency => &mut self.frequency,
            Family::Variance => &mut self.variance,
        }
    }

    fn index(&self, family: Family, row: usize, k: usize) -> usize {
        if family.is_vector() {
            row * self.dim + k
        } else {
            row
        }
    }

    /// Mutable view of one row of a family (length 1 for `Alpha`).
    pub fn row_mut(&mut self, family: Family, row: usize) -> &mut [f64] {
        let span = if family.is_vector() {
            self.span(row)
        } else {
            row..row + 1
        };
        &mut self.family_mut(family)[span]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub entities: ParamTable,
    pub relations: ParamTable,
}

impl ModelParams {
    /// Base means and trend directions uniform in ±6/√d then unit-normalized;
    /// variances and frequencies uniform in `[c_min, c_max)`; trend rates and
    /// seasonal amplitudes zero.
    pub fn init<R: Rng>(config: &ModelConfig, rng: &mut R) -> Self {
        let entities = ParamTable::init(config.n_entities, config, rng);
        let relations = ParamTable::init(config.n_relations, config, rng);
        ModelParams { entities, relations }
    }

    pub fn zeros(config: &ModelConfig) -> Self {
        ModelParams {
            entities: ParamTable::zeros(config.n_entities, config.dim),
            relations: ParamTable::zeros(config.n_relations, config.dim),
        }
    }

    pub fn table(&self, kind: TableKind) -> &ParamTable {
        match kind {
            TableKind::Entity => &self.entities,
            TableKind::Relation => &self.relations,
        }
    }

    pub fn table_mut(&mut self, kind: TableKind) -> &mut ParamTable {
        match kind {
            TableKind::Entity => &mut self.entities,
            TableKind::Relation => &mut self.relations,
        }
    }

    pub fn get(&self, r: ParamRef) -> f64 {
        let t = self.table(r.table);
        t.family(r.family)[t.index(r.family, r.row, r.k)]
    }

    pub fn set(&mut self, r: ParamRef, value: f64) {
        let t = self.table_mut(r.table);
        let i = t.index(r.family, r.row, r.k);
        t.family_mut(r.family)[i] = value;
    }

    /// Projects every row onto the feasible set. Returns how many zero-norm
    /// vectors had to be redrawn.
    pub fn project_constraints<R: Rng>(&mut self, config: &ModelConfig, rng: &mut R) -> usize {
        let e: Vec<usize> = (0..self.entities.rows).collect();
        let r: Vec<usize> = (0..self.relations.rows).collect();
        self.project_rows(config, &e, &r, rng)
    }

    /// Unit-normalizes base means and trend directions and clamps variances
    /// to `[c_min, c_max]` for the given rows only.
    pub fn project_rows<R: Rng>(
        &mut self,
        config: &ModelConfig,
        entity_rows: &[usize],
        relation_rows: &[usize],
        rng: &mut R,
    ) -> usize {
        let bound = 6.0 / (config.dim as f64).sqrt();
        let mut redrawn = 0;
        for (table, rows) in [
            (&mut self.entities, entity_rows),
            (&mut self.relations, relation_rows),
        ] {
            for &row in rows {
                for family in [Family::Base, Family::Direction] {
                    if !normalize_or_redraw(table.row_mut(family, row), bound, rng) {
                        warn!("zero-norm {family:?} vector in row {row}; reinitialized");
                        redrawn += 1;
                    }
                }
                for v in table.row_mut(Family::Variance, row) {
                    *v = v.clamp(config.c_min, config.c_max);
                }
            }
        }
        redrawn
    }

    /// True if every unit-norm and variance-bound invariant holds within `tol`.
    pub fn satisfies_constraints(&self, config: &ModelConfig, tol: f64) -> bool {
        [&self.entities, &self.relations].into_iter().all(|t| {
            (0..t.rows).all(|row| {
                (norm(t.base(row)) - 1.0).abs() <= tol
                    && (norm(t.direction(row)) - 1.0).abs() <= tol
                    && t.variance(row)
                        .iter()
                        .all(|&v| v >= config.c_min && v <= config.c_max)
            })
        })
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Rescales `v` to unit L2 norm. Vectors already within 1e-12 of unit norm
/// are left untouched so projection is idempotent to the bit. A zero or
/// non-finite vector is redrawn from the init distribution; returns false
/// in that case.
fn normalize_or_redraw<R: Rng>(v: &mut [f64], bound: f64, rng: &mut R) -> bool {
    let mut n = norm(v);
    let mut ok = true;
    while !(n.is_finite() && n > 0.0) {
        ok = false;
        for x in v.iter_mut() {
            *x = rng.random_range(-bound..bound);
        }
        n = norm(v);
    }
    if (n - 1.0).abs() > 1e-12 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    ok
}
