//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints its `criterion N: PASS|FAIL|SKIP` line with the measured
//! values; the process exits nonzero if any criterion fails.
//!
//! The full-scale criterion 8 runs only with `ATISE_STRETCH=1` and
//! `ATISE_ICEWS14_DIR` set.

mod common;

use std::path::Path;
use std::time::Instant;

use atise_core::data::{parse_point_file, Quadruple, SourceDigest};
use atise_core::eval::Direction;
use atise_core::synthetic::{toy_bundle, ToySpec};
use atise_core::train::add_reciprocal;
use atise_core::{
    evaluate, Checkpoint, DatasetBundle, EvalOptions, FilterIndex, IntervalFact, Model, ModelConfig, TimelineSpec,
    TrainConfig, Trainer, Variant,
};
use common::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn report(n: &str, name: &str, pass: bool, detail: String) {
    println!("criterion {n}: {} — {name} ({detail})", if pass { "PASS" } else { "FAIL" });
}

fn criterion_1_kl_correctness() -> bool {
    let mut rng = rng(1001);
    let mut worst_abs: f64 = 0.0;
    for _ in 0..20 {
        let m = random_model(Variant::Full, 1, 4, 2, 6, &mut rng);
        let q = random_quad(&m, &mut rng);
        let ((mu_e, var_e), (mu_r, var_r)) = gaussians_oracle(&m, &q);
        worst_abs = worst_abs.max((m.kl_score(&q) - kl_1d_quadrature(mu_e[0], var_e[0], mu_r[0], var_r[0])).abs());
    }
    let mut worst_rel: f64 = 0.0;
    for i in 0..50 {
        let m = random_model(Variant::Full, 1 + i % 5, 5, 3, 7, &mut rng);
        let q = random_quad(&m, &mut rng);
        let ((mu_e, var_e), (mu_r, var_r)) = gaussians_oracle(&m, &q);
        let dense = kl_dense(&mu_e, &var_e, &mu_r, &var_r);
        worst_rel = worst_rel.max((m.kl_score(&q) - dense).abs() / dense.abs());
    }
    let pass = worst_abs <= 1e-6 && worst_rel <= 1e-10;
    report("1", "KL correctness", pass, format!("quadrature abs {worst_abs:.1e} ≤ 1e-6, dense rel {worst_rel:.1e} ≤ 1e-10"));
    pass
}

fn criterion_2_gradient_check() -> bool {
    let mut rng = rng(1002);
    let mut worst: Vec<(Variant, f64, f64)> = Vec::new();
    for variant in VARIANTS {
        let (mut ws, mut wb): (f64, f64) = (0.0, 0.0);
        for draw in 0..100 {
            let dim = if draw % 2 == 0 { 2 } else { 8 };
            let m = random_model(variant, dim, 6, 3, 8, &mut rng);
            let q = random_quad(&m, &mut rng);
            ws = ws.max(worst_score_gradient_error(&m, &q));
            let pos = vec![random_quad(&m, &mut rng), random_quad(&m, &mut rng)];
            let negs: Vec<Vec<Quadruple>> = pos
                .iter()
                .map(|p| (0..3).map(|_| Quadruple { o: rng.random_range(0..6), ..*p }).collect())
                .collect();
            let margin = rng.random_range(0.5..4.0);
            let temp = rng.random_range(0.0..2.0);
            wb = wb.max(worst_batch_gradient_error(&m, &pos, &negs, margin, temp));
        }
        worst.push((variant, ws, wb));
    }
    let pass = worst.iter().all(|&(_, s, b)| s <= 1e-4 && b <= 1e-4);
    let detail = worst
        .iter()
        .map(|(v, s, b)| format!("{v}: score {s:.1e}, loss {b:.1e}"))
        .collect::<Vec<_>>()
        .join("; ");
    report("2", "gradient check", pass, format!("{detail}; bound 1e-4"));
    pass
}

fn criterion_3_score_invariants() -> bool {
    use atise_core::model::{kl_diag, Family, ScoreKind, TableKind};
    let kinds = [ScoreKind::SymmetricKl, ScoreKind::KlEntityToRelation, ScoreKind::KlRelationToEntity, ScoreKind::Translation];
    let mut rng = rng(1003);
    let (mut sym, mut shift_err, mut negative, mut ablation_fail) = (0.0f64, 0.0f64, 0usize, 0usize);
    for trial in 0..100 {
        let variant = VARIANTS[trial % 4];
        let dim = 1 + trial % 8;
        let m = random_model(variant, dim, 6, 3, 9, &mut rng);
        let q = random_quad(&m, &mut rng);
        let ((mu_e, var_e), (mu_r, var_r)) = gaussians_oracle(&m, &q);
        let ab = 0.5 * (kl_diag(&mu_e, &var_e, &mu_r, &var_r) + kl_diag(&mu_r, &var_r, &mu_e, &var_e));
        let ba = 0.5 * (kl_diag(&mu_r, &var_r, &mu_e, &var_e) + kl_diag(&mu_e, &var_e, &mu_r, &var_r));
        sym = sym.max((ab - ba).abs()).max((m.sym_kl_score(&q) - ab).abs() / ab.max(1.0));
        negative += kinds.iter().filter(|&&k| m.score_with(k, &q) < 0.0).count();

        let shift: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut moved = m.clone();
        for row in 0..moved.config.n_entities {
            for (x, c) in moved.params.entities.row_mut(Family::Base, row).iter_mut().zip(&shift) {
                *x += c;
            }
        }
        for k in kinds {
            shift_err = shift_err.max((m.score_with(k, &q) - moved.score_with(k, &q)).abs());
        }

        let ablated: &[Family] = match variant {
            Variant::Tn => &[Family::Amplitude, Family::Frequency],
            Variant::Sn => &[Family::Alpha, Family::Direction],
            Variant::Ts => &[Family::Variance],
            Variant::Full => &[],
        };
        let mut perturbed = m.clone();
        for &fam in ablated {
            for table in [TableKind::Entity, TableKind::Relation] {
                for x in perturbed.params.table_mut(table).family_mut(fam) {
                    *x = rng.random_range(0.01..5.0);
                }
            }
        }
        ablation_fail += usize::from(m.score(&q) != perturbed.score(&q));
    }
    let pass = sym <= 1e-12 && negative == 0 && shift_err <= 1e-9 && ablation_fail == 0;
    report(
        "3",
        "score invariants",
        pass,
        format!("symmetry {sym:.1e} ≤ 1e-12, negative scores {negative}, translation {shift_err:.1e} ≤ 1e-9, ablation violations {ablation_fail}"),
    );
    pass
}

fn criterion_4_ranking_oracle() -> bool {
    const N_E: usize = 8;
    const N_R: usize = 3;
    const N_T: usize = 5;
    let mut rng = rng(1004);
    let (mut queries, mut mismatches, mut order_violations) = (0usize, 0usize, 0usize);
    for (k, variant) in VARIANTS.into_iter().enumerate() {
        for reciprocal in [false, true] {
            let model = random_model(variant, 4, N_E, if reciprocal { 2 * N_R } else { N_R }, N_T, &mut rng);
            let mut facts: Vec<IntervalFact> = Vec::new();
            while facts.len() < 40 {
                let start = rng.random_range(0..N_T);
                let f = IntervalFact {
                    s: rng.random_range(0..N_E),
                    p: rng.random_range(0..N_R),
                    o: rng.random_range(0..3),
                    start,
                    end: (start + rng.random_range(0..3)).min(N_T - 1),
                };
                if !facts.contains(&f) {
                    facts.push(f);
                }
            }
            let index = FilterIndex::from_facts(&facts);
            let truth = true_quads(&facts);
            let split = &facts[k * 5..k * 5 + 20];
            let raw = evaluate(&model, split, &index, EvalOptions { filtered: false, reciprocal }).unwrap();
            let fil = evaluate(&model, split, &index, EvalOptions { filtered: true, reciprocal }).unwrap();
            for (i, f) in split.iter().enumerate() {
                for (j, dir) in [Direction::Subject, Direction::Object].into_iter().enumerate() {
                    queries += 1;
                    let (r, fl) = (raw.results[2 * i + j].rank, fil.results[2 * i + j].rank);
                    mismatches += usize::from(r != brute_force_rank(&model, f, dir, None, reciprocal));
                    mismatches += usize::from(fl != brute_force_rank(&model, f, dir, Some(&truth), reciprocal));
                    order_violations += usize::from(fl > r);
                }
            }
        }
    }
    let pass = mismatches == 0 && order_violations == 0;
    report(
        "4",
        "ranking oracle",
        pass,
        format!("{queries} queries × raw/filtered, {mismatches} rank mismatches, {order_violations} filtered > raw"),
    );
    pass
}

/// Hyperparameters for the toy runs. The large-scale defaults (γ = 1, lr = 3e-5) are
/// tuned for d = 500 and thousands of epochs; these reach memorization on
/// the toy bundle in a few hundred.
fn toy_configs() -> (ModelConfig, TrainConfig) {
    let mc = ModelConfig { dim: 32, ..ModelConfig::default() };
    let tc = TrainConfig {
        lr: 0.003,
        batch_size: 128,
        negatives: 5,
        margin: 20.0,
        adv_temp: 0.5,
        reciprocal: true,
        ..TrainConfig::default()
    };
    (mc, tc)
}

fn criterion_5_constraint_preservation() -> bool {
    let bundle = toy_bundle(&ToySpec::default(), true);
    let (mc, tc) = toy_configs();
    let mut trainer = Trainer::new(&bundle, &mc, tc).unwrap();
    let quads: Vec<Quadruple> = add_reciprocal(&bundle).unwrap().train.iter().flat_map(|f| f.expand()).collect();
    let mut rng = rng(1005);
    let mut order: Vec<usize> = Vec::new();
    let (mut iterations, mut violations) = (0usize, 0usize);
    let (mut worst_norm, mut var_lo, mut var_hi) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    while iterations < 1000 {
        if order.len() < 128 {
            let mut fresh: Vec<usize> = (0..quads.len()).collect();
            fresh.shuffle(&mut rng);
            order.extend(fresh);
        }
        let batch: Vec<Quadruple> = order.drain(..128).map(|i| quads[i]).collect();
        trainer.step(&batch);
        iterations += 1;
        let p = &trainer.model.params;
        violations += usize::from(!p.satisfies_constraints(&trainer.model.config, 1e-9));
        for t in [&p.entities, &p.relations] {
            for row in 0..t.rows {
                for v in [t.base(row), t.direction(row)] {
                    worst_norm = worst_norm.max((v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs());
                }
                for &v in t.variance(row) {
                    var_lo = var_lo.min(v);
                    var_hi = var_hi.max(v);
                }
            }
        }
    }
    let cfg = &trainer.model.config;
    let pass = violations == 0 && worst_norm <= 1e-9 && var_lo >= cfg.c_min && var_hi <= cfg.c_max;
    report(
        "5",
        "constraint preservation",
        pass,
        format!(
            "{iterations} iterations, max |‖v‖−1| {worst_norm:.1e} ≤ 1e-9, variances in [{var_lo}, {var_hi}] ⊆ [{}, {}]",
            cfg.c_min, cfg.c_max
        ),
    );
    pass
}

fn criterion_6_toy_memorization() -> bool {
    let spec = ToySpec::default();
    let bundle = toy_bundle(&spec, true);
    let (mc, tc) = toy_configs();
    let filter = FilterIndex::build(&bundle);
    let opts = EvalOptions { filtered: true, reciprocal: true };

    // Untrained models against the expected reciprocal rank of a uniformly
    // random ordering of each query's unfiltered candidates.
    let truth = true_quads(&bundle.train);
    let mut expected = 0.0;
    for f in &bundle.train {
        for dir in [Direction::Subject, Direction::Object] {
            let competitors = (0..spec.n_entities)
                .filter(|&c| {
                    let q = match dir {
                        Direction::Subject => (c, f.p, f.o, f.start),
                        Direction::Object => (f.s, f.p, c, f.start),
                    };
                    !truth.contains(&q)
                })
                .count();
            expected += random_rr(competitors + 1);
        }
    }
    expected /= (2 * bundle.train.len()) as f64;
    let untrained: Vec<f64> = (0..10)
        .map(|seed| {
            let cfg = atise_core::train::model_config_for(&bundle, &mc, true);
            let model = Model::init(cfg, seed).unwrap();
            evaluate(&model, &bundle.train, &filter, opts).unwrap().metrics.mrr
        })
        .collect();
    let mean_untrained = untrained.iter().sum::<f64>() / untrained.len() as f64;
    let in_band = (expected / 2.0..=2.0 * expected).contains(&mean_untrained);

    // Train until memorized, logging the per-epoch loss.
    let budget = 300.0;
    let started = Instant::now();
    let mut trainer = Trainer::new(&bundle, &mc, tc).unwrap();
    let mut losses = Vec::new();
    let mut mrr = 0.0;
    while started.elapsed().as_secs_f64() < budget && trainer.epoch() < 1000 {
        losses.push(trainer.run_epoch());
        if trainer.epoch() % 25 == 0 {
            mrr = evaluate(&trainer.model, &bundle.train, &filter, opts).unwrap().metrics.mrr;
            if mrr >= 0.9 {
                break;
            }
        }
    }
    let seconds = started.elapsed().as_secs_f64();
    let windows: Vec<bool> = losses.windows(51).map(|w| w[50] <= w[0]).collect();
    let window_share = windows.iter().filter(|&&ok| ok).count() as f64 / windows.len().max(1) as f64;

    let memorized = mrr >= 0.9 && seconds <= budget;
    let pass = memorized && in_band && window_share >= 0.9;
    report(
        "6",
        "toy memorization",
        pass,
        format!(
            "train MRR {mrr:.4} ≥ 0.9 after {} epochs in {seconds:.1}s ≤ {budget}s; untrained mean MRR {mean_untrained:.4} over 10 seeds in [{:.4}, {:.4}] (random expectation {expected:.4}); loss non-increasing in {:.1}% of {} 50-epoch windows",
            trainer.epoch(),
            expected / 2.0,
            2.0 * expected,
            100.0 * window_share,
            windows.len()
        ),
    );
    pass
}

fn icews14_bundle(dir: &Path) -> DatasetBundle {
    let read = |name: &str| {
        let bytes = std::fs::read(dir.join(name)).unwrap();
        let facts = parse_point_file(std::io::Cursor::new(&bytes)).unwrap();
        (facts, SourceDigest::of_bytes(name, name, &bytes))
    };
    let (train, d1) = read("train.txt");
    let (valid, d2) = read("valid.txt");
    let (test, d3) = read("test.txt");
    DatasetBundle::build(&train, &valid, &test, TimelineSpec::Day, true, vec![d1, d2, d3]).unwrap()
}

fn criterion_7_pipeline_fidelity() -> bool {
    // Round trips always run, on the toy bundle and a trained checkpoint.
    let bundle = toy_bundle(&ToySpec::default(), true);
    let dir = tempfile::tempdir().unwrap();
    let bpath = dir.path().join("toy.bundle");
    bundle.save(&bpath).unwrap();
    let bbytes = std::fs::read(&bpath).unwrap();
    let bundle_back = DatasetBundle::load(&bpath).unwrap();
    let bundle_ok = bundle_back == bundle && bundle_back.to_bytes().unwrap() == bbytes;

    let (mc, mut tc) = toy_configs();
    tc.max_epochs = 3;
    let ckpt = atise_core::train(&bundle, &mc, tc).unwrap();
    let cpath = dir.path().join("toy.ckpt");
    ckpt.save(&cpath).unwrap();
    let cbytes = std::fs::read(&cpath).unwrap();
    let ckpt_back = Checkpoint::load(&cpath).unwrap();
    let ckpt_ok = ckpt_back == ckpt && ckpt_back.to_bytes() == cbytes;

    let round_trip = format!("bundle round trip {bundle_ok}, checkpoint round trip {ckpt_ok}");
    match std::env::var_os("ATISE_ICEWS14_DIR") {
        None => {
            report("7", "pipeline fidelity", bundle_ok && ckpt_ok, round_trip.clone());
            println!("criterion 7 (ICEWS14 statistics): SKIP — set ATISE_ICEWS14_DIR to a directory with train.txt, valid.txt, test.txt");
            bundle_ok && ckpt_ok
        }
        Some(path) => {
            let b = icews14_bundle(Path::new(&path));
            let v = &b.vocabulary;
            let got = (v.n_entities(), v.n_relations(), v.n_steps(), b.train.len(), b.valid.len(), b.test.len());
            let want = (6869, 230, 365, 72826, 8941, 8963);
            let pass = got == want && bundle_ok && ckpt_ok;
            report("7", "pipeline fidelity", pass, format!("ICEWS14 {got:?} vs {want:?}; {round_trip}"));
            pass
        }
    }
}

fn criterion_8_full_icews14_run() -> bool {
    if !std::env::var("ATISE_STRETCH").is_ok_and(|v| v == "1") {
        println!("criterion 8: SKIP — full-scale run takes hours; set ATISE_STRETCH=1 and ATISE_ICEWS14_DIR");
        return true;
    }
    let Some(path) = std::env::var_os("ATISE_ICEWS14_DIR") else {
        println!("criterion 8: SKIP — set ATISE_ICEWS14_DIR");
        return true;
    };
    let bundle = icews14_bundle(Path::new(&path));
    let mc = ModelConfig { dim: 500, c_min: 0.003, c_max: 0.3, ..ModelConfig::default() };
    let tc = TrainConfig { margin: 120.0, ..TrainConfig::default() };
    let ckpt = atise_core::train(&bundle, &mc, tc).unwrap();
    let filter = FilterIndex::build(&bundle);
    let m = evaluate(&ckpt.model, &bundle.test, &filter, EvalOptions { filtered: true, reciprocal: true })
        .unwrap()
        .metrics;
    let pass = (m.mrr - 0.550).abs() <= 0.02 && (m.hits[2] - 0.750).abs() <= 0.02;
    report("8", "full ICEWS14 run", pass, format!("test MRR {:.4} (0.550 ± 0.02), Hits@10 {:.4} (0.750 ± 0.02)", m.mrr, m.hits[2]));
    pass
}

fn main() {
    // `cargo test -- --list` and similar tooling probe the binary; there is nothing to list.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    type Criterion = (&'static str, fn() -> bool);
    let criteria: [Criterion; 8] = [
        ("1", criterion_1_kl_correctness),
        ("2", criterion_2_gradient_check),
        ("3", criterion_3_score_invariants),
        ("4", criterion_4_ranking_oracle),
        ("5", criterion_5_constraint_preservation),
        ("6", criterion_6_toy_memorization),
        ("7", criterion_7_pipeline_fidelity),
        ("8", criterion_8_full_icews14_run),
    ];
    let mut failed = Vec::new();
    for (n, run) in criteria {
        match std::panic::catch_unwind(run) {
            Ok(true) => {}
            Ok(false) => failed.push(n),
            Err(_) => {
                println!("criterion {n}: FAIL — panicked");
                failed.push(n);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
