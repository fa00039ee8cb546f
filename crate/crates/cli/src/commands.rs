use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use atise_core::container::atomic_write;
use atise_core::data::{parse_interval_file, parse_point_file, SourceDigest};
use atise_core::eval::Direction;
use atise_core::{evaluate, Checkpoint, DatasetBundle, EvalOptions, FilterIndex, RawFact, Trainer};
use log::info;

use crate::config::{Format, RunConfig};

pub const BUNDLE_FILE: &str = "dataset.bundle";
pub const STATS_FILE: &str = "stats.tsv";
pub const BEST_FILE: &str = "best.ckpt";
pub const LAST_FILE: &str = "last.ckpt";
pub const LOG_FILE: &str = "train.log";
pub const CONFIG_FILE: &str = "effective.conf";

fn required<'a>(value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| anyhow!("missing {key} (set --{} or {key} in the config)", key.replace('_', "-")))
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    let dir = required(&cfg.out_dir, "out_dir")?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn read_facts(path: &Path, format: Format) -> Result<(Vec<RawFact>, Vec<u8>)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let facts = match format {
        Format::Point => parse_point_file(&bytes[..]),
        Format::Interval => parse_interval_file(&bytes[..]),
    }
    .with_context(|| format!("parsing {}", path.display()))?;
    if facts.is_empty() {
        bail!("{} contains no facts", path.display());
    }
    Ok((facts, bytes))
}

pub fn preprocess(cfg: &RunConfig) -> Result<()> {
    let train_path = required(&cfg.train_file, "train_file")?;
    let timeline = cfg.timeline_spec()?;
    let mut sources = Vec::new();
    let mut load = |split: &str, path: Option<&Path>| -> Result<Vec<RawFact>> {
        let Some(path) = path else { return Ok(Vec::new()) };
        let (facts, bytes) = read_facts(path, cfg.format)?;
        sources.push(SourceDigest::of_bytes(split, &path.display().to_string(), &bytes));
        Ok(facts)
    };
    let train = load("train", Some(train_path))?;
    let valid = load("valid", cfg.valid_file.as_deref())?;
    let test = load("test", cfg.test_file.as_deref())?;
    let bundle = DatasetBundle::build(&train, &valid, &test, timeline, cfg.train.reciprocal, sources)?;

    let v = &bundle.vocabulary;
    let stats = format!(
        "entities\t{}\nrelations\t{}\nsteps\t{}\ntrain\t{}\nvalid\t{}\ntest\t{}\n",
        v.n_entities(),
        v.n_relations(),
        v.n_steps(),
        bundle.train.len(),
        bundle.valid.len(),
        bundle.test.len()
    );
    let dir = out_dir(cfg)?;
    bundle.save(&dir.join(BUNDLE_FILE))?;
    atomic_write(&dir.join(STATS_FILE), stats.as_bytes())?;
    print!("{stats}");
    info!("wrote {}", dir.join(BUNDLE_FILE).display());
    Ok(())
}

fn load_bundle(cfg: &RunConfig) -> Result<DatasetBundle> {
    let path = required(&cfg.bundle, "bundle")?;
    DatasetBundle::load(path).with_context(|| format!("loading bundle {}", path.display()))
}

pub fn train(cfg: &RunConfig) -> Result<()> {
    let bundle = load_bundle(cfg)?;
    let dir = out_dir(cfg)?;
    let trainer = match &cfg.resume {
        Some(path) => {
            let ckpt = Checkpoint::load(path).with_context(|| format!("loading {}", path.display()))?;
            info!("resuming from epoch {}", ckpt.epoch);
            Trainer::resume(&bundle, ckpt)?
        }
        None => Trainer::new(&bundle, &cfg.model, cfg.train.clone())?,
    };
    info!(
        "training {} (d = {}) on {} quadruples",
        trainer.model.config.variant,
        trainer.model.config.dim,
        trainer.n_training_quads()
    );
    let mut log_text = String::from("epoch\tloss\tvalid_mrr\twall_seconds\n");
    let (best, last) = trainer.fit_with_last(|line| {
        info!("epoch {} loss {:.6} valid MRR {:.4}", line.epoch, line.loss, line.valid_mrr);
        writeln!(log_text, "{}", line.to_tsv()).unwrap();
    })?;
    best.save(&dir.join(BEST_FILE))?;
    last.save(&dir.join(LAST_FILE))?;
    atomic_write(&dir.join(LOG_FILE), log_text.as_bytes())?;
    atomic_write(&dir.join(CONFIG_FILE), cfg.to_file_text().as_bytes())?;
    info!(
        "best checkpoint at epoch {} (valid MRR {:?}); stopped at epoch {}",
        best.epoch, best.best_valid_mrr, last.epoch
    );
    Ok(())
}

pub fn eval(cfg: &RunConfig) -> Result<()> {
    let bundle = load_bundle(cfg)?;
    let path = required(&cfg.checkpoint, "checkpoint")?;
    let ckpt = Checkpoint::load_for(path, &bundle.vocabulary, None)
        .with_context(|| format!("loading {}", path.display()))?;
    let facts = bundle.split(cfg.split);
    let opts = EvalOptions {
        filtered: !cfg.raw,
        reciprocal: ckpt.train_config.reciprocal,
    };
    let result = evaluate(&ckpt.model, facts, &FilterIndex::build(&bundle), opts)?;
    if let Some(dump) = &cfg.dump_ranks {
        let v = &bundle.vocabulary;
        let label = |e: usize| v.entity_label(e).unwrap_or("?").to_owned();
        let mut out = String::from("direction\tsubject\trelation\tobject\tstart\tend\trank\n");
        for r in &result.results {
            let f = &r.fact;
            let dir = match r.direction {
                Direction::Subject => "subject",
                Direction::Object => "object",
            };
            let rel = v.relation_label(f.p).unwrap_or_default();
            writeln!(out, "{dir}\t{}\t{rel}\t{}\t{}\t{}\t{}", label(f.s), label(f.o), f.start, f.end, r.rank).unwrap();
        }
        atomic_write(dump, out.as_bytes())?;
    }
    print!("{}", result.metrics.to_tsv());
    Ok(())
}

pub fn inspect(cfg: &RunConfig) -> Result<()> {
    let path = required(&cfg.checkpoint, "checkpoint")?;
    let ckpt = Checkpoint::load(path).with_context(|| format!("loading {}", path.display()))?;
    let bundle = cfg.bundle.as_ref().map(|_| load_bundle(cfg)).transpose()?;
    if let Some(b) = &bundle {
        ckpt.ensure_compatible(&b.vocabulary, None)?;
    }
    let model = &ckpt.model;
    let n_r = if ckpt.train_config.reciprocal {
        model.config.n_relations / 2
    } else {
        model.config.n_relations
    };
    let rels = &model.params.relations;
    let mean_abs = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64;
    let mut out = String::from("relation\tabs_alpha\tmean_abs_beta\tmean_abs_omega\n");
    for p in 0..n_r {
        let label = bundle
            .as_ref()
            .and_then(|b| b.vocabulary.relation_label(p))
            .unwrap_or_else(|| p.to_string());
        writeln!(
            out,
            "{label}\t{:.6}\t{:.6}\t{:.6}",
            rels.alpha[p].abs(),
            mean_abs(rels.amplitude(p)),
            mean_abs(rels.frequency(p))
        )
        .unwrap();
    }
    print!("{out}");
    Ok(())
}
