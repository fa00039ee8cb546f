//! `atise`: preprocess temporal KG files, train, evaluate and inspect models.

mod commands;
mod config;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::parser::ValueSource;
use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};

use config::{env_name, flag_name, RunConfig, KEYS, SWITCHES};

fn cli() -> Command {
    let mut cmd = Command::new("atise")
        .about("Temporal knowledge-graph embeddings with additive time-series Gaussians")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .short('c')
                .global(true)
                .value_parser(value_parser!(PathBuf))
                .help("key = value configuration file"),
        )
        .subcommand(Command::new("preprocess").about("Parse raw fact files into a dataset bundle"))
        .subcommand(Command::new("train").about("Train a model on a bundle"))
        .subcommand(Command::new("eval").about("Report link-prediction metrics for a checkpoint"))
        .subcommand(Command::new("inspect").about("Tabulate per-relation trend and seasonal magnitudes"));
    for (key, help) in KEYS {
        let mut arg = Arg::new(*key)
            .long(flag_name(key))
            .env(env_name(key))
            .global(true)
            .action(ArgAction::Set)
            .help(*help);
        if SWITCHES.contains(key) {
            arg = arg.num_args(0..=1).default_missing_value("true");
        }
        cmd = cmd.arg(arg);
    }
    cmd
}

/// Layers the config file, then environment and flag values (clap already
/// gives flags precedence over the environment).
fn resolve(matches: &ArgMatches) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = matches.get_one::<PathBuf>("config") {
        cfg.apply_file(path)?;
    }
    for (key, _) in KEYS {
        let source = matches.value_source(key);
        if matches!(source, Some(ValueSource::CommandLine | ValueSource::EnvVariable)) {
            let value = matches.get_one::<String>(key).expect("value present");
            let origin = if source == Some(ValueSource::EnvVariable) {
                env_name(key)
            } else {
                format!("--{}", flag_name(key))
            };
            cfg.set(key, value).with_context(|| origin)?;
        }
    }
    Ok(cfg)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let cfg = resolve(sub)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match name {
        "preprocess" => commands::preprocess(&cfg),
        "train" => commands::train(&cfg),
        "eval" => commands::eval(&cfg),
        "inspect" => commands::inspect(&cfg),
        _ => unreachable!(),
    }
}
