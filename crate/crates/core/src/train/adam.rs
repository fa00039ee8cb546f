use serde::{Deserialize, Serialize};

use crate::model::{Family, Gradients, ModelConfig, ModelParams, TableKind};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First and second moment estimates, shaped like the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first: ModelParams,
    pub second: ModelParams,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(config: &ModelConfig) -> Self {
        AdamState {
            first: ModelParams::zeros(config),
            second: ModelParams::zeros(config),
            step: 0,
            beta1: BETA1,
            beta2: BETA2,
            epsilon: EPSILON,
        }
    }
}

/// One bias-corrected Adam update. Only rows present in `grads` are touched
/// (lazy/sparse Adam); the step counter is global.
pub fn adam_step(params: &mut ModelParams, grads: &Gradients, state: &mut AdamState, lr: f64) {
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for table in [TableKind::Entity, TableKind::Relation] {
        for (&row, g) in grads.rows(table) {
            for family in Family::ALL {
                let gs = g.family(family);
                let p = params.table_mut(table).row_mut(family, row);
                let m = state.first.table_mut(table).row_mut(family, row);
                // the borrow checker needs the second table separately
                let v = state.second.table_mut(table).row_mut(family, row);
                for k in 0..gs.len() {
                    m[k] = b1 * m[k] + (1.0 - b1) * gs[k];
                    v[k] = b2 * v[k] + (1.0 - b2) * gs[k] * gs[k];
                    let m_hat = m[k] / c1;
                    let v_hat = v[k] / c2;
                    p[k] -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
    }
}
