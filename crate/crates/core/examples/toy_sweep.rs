use std::time::Instant;

use atise_core::eval::{evaluate, EvalOptions, FilterIndex};
use atise_core::synthetic::{toy_bundle, ToySpec};
use atise_core::{ModelConfig, TrainConfig, Trainer, Variant};

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let (lr, margin, epochs, batch, temp) = (args[0], args[1], args[2] as usize, args[3] as usize, args[4]);
    let reciprocal = args.get(5).is_none_or(|&r| r != 0.0);
    let bundle = toy_bundle(&ToySpec::default(), reciprocal);
    let mc = ModelConfig { dim: 32, variant: Variant::Full, c_min: 0.005, c_max: 0.5, n_entities: 0, n_relations: 0, n_steps: 0 };
    let tc = TrainConfig { lr, margin, batch_size: batch, negatives: 5, adv_temp: temp, max_epochs: epochs, eval_every: 10_000, reciprocal, ..TrainConfig::default() };
    let mut tr = Trainer::new(&bundle, &mc, tc).unwrap();
    let filter = FilterIndex::build(&bundle);
    let t0 = Instant::now();
    for e in 1..=epochs {
        let loss = tr.run_epoch();
        if e % (epochs / 10).max(1) == 0 {
            let m = evaluate(&tr.model, &bundle.train, &filter, EvalOptions { filtered: true, reciprocal }).unwrap().metrics;
            println!("epoch {e} loss {loss:.4} mrr {:.4} h1 {:.3} t={:.1}s", m.mrr, m.hits[0], t0.elapsed().as_secs_f64());
        }
    }
}
