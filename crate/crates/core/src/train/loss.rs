//! Negative-sampling loss with self-adversarial weights.
//!
//! For a positive `ξ` with negatives `ξ'_1..ξ'_η`:
//!
//! ```text
//! L = −log σ(γ − f(ξ)) − Σ_j w_j · log σ(f(ξ'_j) − γ)
//! w = softmax(−τ · f(ξ'))
//! ```
//!
//! The weights are treated as constants when differentiating.

use rayon::prelude::*;

use crate::data::Quadruple;
use crate::model::{Gradients, Model};

/// −log σ(x), computed without overflow.
pub fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Softmax of `−temperature · score`: harder (lower-scoring) negatives get
/// more weight. Zero temperature gives uniform weights.
pub fn adversarial_weights(scores: &[f64], temperature: f64) -> Vec<f64> {
    assert!(!scores.is_empty(), "adversarial weights need at least one score");
    let logits: Vec<f64> = scores.iter().map(|s| -temperature * s).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return vec![1.0 / scores.len() as f64; scores.len()];
    }
    let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Loss and gradient for a single positive and its negatives.
pub fn positive_loss(model: &Model, pos: &Quadruple, negs: &[Quadruple], margin: f64, adv_temp: f64) -> (f64, Gradients) {
    let kind = model.config.variant.score_kind();
    let mut grads = Gradients::new(model.config.dim);

    let f_pos = model.score_with(kind, pos);
    let mut loss = neg_log_sigmoid(margin - f_pos);
    // d/df [−log σ(γ − f)] = σ(f − γ)
    model.accumulate_grad(kind, pos, sigmoid(f_pos - margin), &mut grads);

    if !negs.is_empty() {
        let f_neg: Vec<f64> = negs.iter().map(|q| model.score_with(kind, q)).collect();
        let w = adversarial_weights(&f_neg, adv_temp);
        for ((q, &f), &wj) in negs.iter().zip(&f_neg).zip(&w) {
            loss += wj * neg_log_sigmoid(f - margin);
            // d/df [−w log σ(f − γ)] = −w σ(γ − f)
            model.accumulate_grad(kind, q, -wj * sigmoid(margin - f), &mut grads);
        }
    }
    (loss, grads)
}

/// Summed loss over a batch and its gradient. Per-positive terms are
/// computed in parallel and reduced in batch order, so the result does not
/// depend on the thread count.
pub fn batch_loss(
    model: &Model,
    positives: &[Quadruple],
    negatives: &[Vec<Quadruple>],
    margin: f64,
    adv_temp: f64,
) -> (f64, Gradients) {
    assert_eq!(positives.len(), negatives.len(), "negatives must be grouped per positive");
    let parts: Vec<(f64, Gradients)> = positives
        .par_iter()
        .zip(negatives.par_iter())
        .map(|(pos, negs)| positive_loss(model, pos, negs, margin, adv_temp))
        .collect();
    let mut total = Gradients::new(model.config.dim);
    let mut loss = 0.0;
    for (l, g) in &parts {
        loss += l;
        total.add_scaled(g, 1.0);
    }
    (loss, total)
}
