//! Independent oracles shared by the integration suites. Nothing here calls
//! into the scoring or ranking code paths it is used to check, except to
//! read raw parameters.
#![allow(dead_code)]

use std::collections::HashSet;
use std::f64::consts::{PI, TAU};

use atise_core::data::{IntervalFact, Quadruple};
use atise_core::eval::Direction;
use atise_core::model::{Family, ParamRef, ParamTable, TableKind};
use atise_core::train::{adversarial_weights, batch_loss, neg_log_sigmoid};
use atise_core::{Model, ModelConfig, ModelParams, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------- KL oracles

fn log_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * ((2.0 * PI * var).ln() + (x - mean) * (x - mean) / var)
}

/// ∫ p(x) log(p(x)/q(x)) dx by composite Simpson over ±14 standard
/// deviations of p.
pub fn kl_1d_quadrature(mean_p: f64, var_p: f64, mean_q: f64, var_q: f64) -> f64 {
    let sd = var_p.sqrt();
    let (a, b) = (mean_p - 14.0 * sd, mean_p + 14.0 * sd);
    let n = 40_000; // even
    let h = (b - a) / n as f64;
    let f = |x: f64| {
        let lp = log_normal_pdf(x, mean_p, var_p);
        lp.exp() * (lp - log_normal_pdf(x, mean_q, var_q))
    };
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}

type Mat = Vec<Vec<f64>>;

fn diag(v: &[f64]) -> Mat {
    let n = v.len();
    (0..n).map(|i| (0..n).map(|j| if i == j { v[i] } else { 0.0 }).collect()).collect()
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// Gauss–Jordan inverse with partial pivoting.
fn inverse(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Mat = a.clone();
    let mut inv: Mat = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap();
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = m[col][col];
        for j in 0..n {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                for j in 0..n {
                    m[r][j] -= f * m[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

/// Determinant by LU elimination.
fn det(a: &Mat) -> f64 {
    let n = a.len();
    let mut m = a.clone();
    let mut d = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap();
        if piv != col {
            m.swap(col, piv);
            d = -d;
        }
        d *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            let pivot_row = m[col].clone();
            for (x, p) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
        }
    }
    d
}

/// KL(N(mu_p, S_p) ‖ N(mu_q, S_q)) from full matrices:
/// ½[tr(S_q⁻¹ S_p) + (mu_q − mu_p)ᵀ S_q⁻¹ (mu_q − mu_p) − ln(det S_p / det S_q) − d].
pub fn kl_dense(mu_p: &[f64], var_p: &[f64], mu_q: &[f64], var_q: &[f64]) -> f64 {
    let d = mu_p.len();
    let sp = diag(var_p);
    let sq = diag(var_q);
    let sq_inv = inverse(&sq);
    let prod = matmul(&sq_inv, &sp);
    let trace: f64 = (0..d).map(|i| prod[i][i]).sum();
    let diff: Vec<f64> = (0..d).map(|i| mu_q[i] - mu_p[i]).collect();
    let quad: f64 = (0..d)
        .map(|i| (0..d).map(|j| diff[i] * sq_inv[i][j] * diff[j]).sum::<f64>())
        .sum();
    0.5 * (trace + quad - (det(&sp) / det(&sq)).ln() - d as f64)
}

// ------------------------------------------------------- independent means

/// Direct evaluation of the decomposition from raw parameters.
pub fn mean_oracle(table: &ParamTable, row: usize, t: f64, variant: Variant) -> Vec<f64> {
    let d = table.dim;
    (0..d)
        .map(|k| {
            let mut x = table.base[row * d + k];
            if variant != Variant::Sn {
                x += table.alpha[row] * table.direction[row * d + k] * t;
            }
            if variant != Variant::Tn {
                x += table.amplitude[row * d + k] * (TAU * table.frequency[row * d + k] * t).sin();
            }
            x
        })
        .collect()
}

/// Mean and variance vectors.
pub type Diagonal = (Vec<f64>, Vec<f64>);

/// P_e and P_r for a quadruple, computed from raw parameters.
pub fn gaussians_oracle(m: &Model, q: &Quadruple) -> (Diagonal, Diagonal) {
    let t = q.t as f64 / m.config.n_steps as f64;
    let v = m.config.variant;
    let (e, r) = (&m.params.entities, &m.params.relations);
    let ms = mean_oracle(e, q.s, t, v);
    let mo = mean_oracle(e, q.o, t, v);
    let mr = mean_oracle(r, q.p, t, v);
    let d = m.config.dim;
    let mu_e: Vec<f64> = (0..d).map(|k| ms[k] - mo[k]).collect();
    let var_e: Vec<f64> = (0..d).map(|k| e.variance[q.s * d + k] + e.variance[q.o * d + k]).collect();
    let var_r: Vec<f64> = r.variance[q.p * d..(q.p + 1) * d].to_vec();
    ((mu_e, var_e), (mr, var_r))
}

// ------------------------------------------------------------ random models

pub fn random_model(variant: Variant, dim: usize, n_entities: usize, n_relations: usize, n_steps: usize, rng: &mut ChaCha8Rng) -> Model {
    let config = ModelConfig {
        dim,
        variant,
        c_min: 0.005,
        c_max: 0.5,
        n_entities,
        n_relations,
        n_steps,
    };
    let mut params = ModelParams::init(&config, rng);
    for t in [&mut params.entities, &mut params.relations] {
        t.alpha.iter_mut().for_each(|x| *x = rng.random_range(-1.5..1.5));
        t.amplitude.iter_mut().for_each(|x| *x = rng.random_range(-0.8..0.8));
        t.frequency.iter_mut().for_each(|x| *x = rng.random_range(-2.0..2.0));
        t.variance.iter_mut().for_each(|x| *x = rng.random_range(config.c_min..config.c_max));
    }
    Model { config, params }
}

pub const VARIANTS: [Variant; 4] = [Variant::Full, Variant::Sn, Variant::Tn, Variant::Ts];

pub fn random_quad(m: &Model, rng: &mut ChaCha8Rng) -> Quadruple {
    Quadruple {
        s: rng.random_range(0..m.config.n_entities),
        p: rng.random_range(0..m.config.n_relations),
        o: rng.random_range(0..m.config.n_entities),
        t: rng.random_range(0..m.config.n_steps),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All scalar parameters a quadruple touches.
pub fn touched_params(q: &Quadruple, dim: usize) -> Vec<ParamRef> {
    let mut out = Vec::new();
    let rows = [(TableKind::Entity, q.s), (TableKind::Entity, q.o), (TableKind::Relation, q.p)];
    let mut seen = HashSet::new();
    for (table, row) in rows {
        if !seen.insert((table, row)) {
            continue;
        }
        for family in Family::ALL {
            let ks = if family == Family::Alpha { 1 } else { dim };
            for k in 0..ks {
                out.push(ParamRef { table, row, family, k });
            }
        }
    }
    out
}

/// Central difference of `f` along one parameter.
pub fn central_difference<F: Fn(&Model) -> f64>(m: &Model, r: ParamRef, h: f64, f: F) -> f64 {
    let x = m.params.get(r);
    let mut plus = m.clone();
    plus.params.set(r, x + h);
    let mut minus = m.clone();
    minus.params.set(r, x - h);
    (f(&plus) - f(&minus)) / (2.0 * h)
}

/// |a − b| / max(|a|, |b|), with a floor on the denominator for partials
/// that vanish analytically.
pub fn rel_err(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

// ------------------------------------------------------- gradient checks

pub fn worst_score_gradient_error(m: &Model, q: &Quadruple) -> f64 {
    let grads = m.grad_score(q);
    touched_params(q, m.config.dim)
        .into_iter()
        .map(|r| {
            let analytic = grads.get(r).unwrap_or(0.0);
            let numeric = central_difference(m, r, 1e-5, |mm| mm.score(q));
            rel_err(analytic, numeric, GRAD_FLOOR)
        })
        .fold(0.0, f64::max)
}

/// Denominator floor: partials smaller than this must agree to 1e-7
/// absolutely. Central differences carry O(h²·f‴) truncation error, which
/// is large when variances sit near `c_min`.
pub const GRAD_FLOOR: f64 = 1e-3;

/// Loss with the adversarial weights frozen at the unperturbed model's
/// values, matching how the analytic gradient treats them.
pub fn frozen_weight_loss(m: &Model, pos: &[Quadruple], negs: &[Vec<Quadruple>], weights: &[Vec<f64>], margin: f64) -> f64 {
    pos.iter()
        .zip(negs)
        .zip(weights)
        .map(|((p, ns), ws)| {
            neg_log_sigmoid(margin - m.score(p))
                + ns.iter().zip(ws).map(|(n, w)| w * neg_log_sigmoid(m.score(n) - margin)).sum::<f64>()
        })
        .sum()
}

pub fn worst_batch_gradient_error(m: &Model, pos: &[Quadruple], negs: &[Vec<Quadruple>], margin: f64, adv_temp: f64) -> f64 {
    let (_, grads) = batch_loss(m, pos, negs, margin, adv_temp);
    let weights: Vec<Vec<f64>> = negs
        .iter()
        .map(|ns| adversarial_weights(&ns.iter().map(|n| m.score(n)).collect::<Vec<_>>(), adv_temp))
        .collect();
    let mut refs = Vec::new();
    for q in pos.iter().chain(negs.iter().flatten()) {
        for r in touched_params(q, m.config.dim) {
            if !refs.contains(&r) {
                refs.push(r);
            }
        }
    }
    refs.into_iter()
        .map(|r| {
            let analytic = grads.get(r).unwrap_or(0.0);
            let numeric = central_difference(m, r, 1e-5, |mm| frozen_weight_loss(mm, pos, negs, &weights, margin));
            rel_err(analytic, numeric, GRAD_FLOOR)
        })
        .fold(0.0, f64::max)
}

// ----------------------------------------------------------- ranking oracle

pub fn true_quads(facts: &[IntervalFact]) -> HashSet<(usize, usize, usize, usize)> {
    facts
        .iter()
        .flat_map(|f| (f.start..=f.end).map(move |t| (f.s, f.p, f.o, t)))
        .collect()
}

fn step_score(m: &Model, s: usize, p: usize, o: usize, t: usize) -> f64 {
    m.score(&Quadruple { s, p, o, t })
}

/// Enumerates every substitution, scores it step by step, and counts the
/// strictly better unfiltered competitors.
pub fn brute_force_rank(
    m: &Model,
    fact: &IntervalFact,
    direction: Direction,
    truth: Option<&HashSet<(usize, usize, usize, usize)>>,
    reciprocal: bool,
) -> usize {
    let n_r_base = m.config.n_relations / 2;
    let score_of = |c: usize| -> f64 {
        (fact.start..=fact.end)
            .map(|t| match direction {
                Direction::Object => step_score(m, fact.s, fact.p, c, t),
                Direction::Subject if reciprocal => step_score(m, fact.o, fact.p + n_r_base, c, t),
                Direction::Subject => step_score(m, c, fact.p, fact.o, t),
            })
            .sum()
    };
    let gold = match direction {
        Direction::Object => fact.o,
        Direction::Subject => fact.s,
    };
    let is_true_throughout = |c: usize| -> bool {
        truth.is_some_and(|set| {
            (fact.start..=fact.end).all(|t| match direction {
                Direction::Object => set.contains(&(fact.s, fact.p, c, t)),
                Direction::Subject => set.contains(&(c, fact.p, fact.o, t)),
            })
        })
    };
    let scores: Vec<f64> = (0..m.config.n_entities).map(score_of).collect();
    let mut rank = 1;
    for c in 0..m.config.n_entities {
        if c != gold && !is_true_throughout(c) && scores[c] < scores[gold] {
            rank += 1;
        }
    }
    rank
}

/// Expected reciprocal rank of a uniformly random ordering of `m` items:
/// H_m / m.
pub fn random_rr(m: usize) -> f64 {
    (1..=m).map(|k| 1.0 / k as f64).sum::<f64>() / m as f64
}
