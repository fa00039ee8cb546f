//! Run configuration: one flat key space shared by the config file,
//! environment variables and command-line flags.
//!
//! Precedence is flags > environment (`ATISE_<KEY>`) > file > defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use atise_core::{ModelConfig, TimelineSpec, TrainConfig, Variant};

/// Every recognized key with its help text. Flags are the kebab-case form.
pub const KEYS: &[(&str, &str)] = &[
    ("train_file", "raw training facts"),
    ("valid_file", "raw validation facts"),
    ("test_file", "raw test facts"),
    ("format", "input layout: point (s p o date) or interval (s p o start end)"),
    ("timeline", "time discretization: day or year"),
    ("n_bins", "number of year bins for the year timeline"),
    ("bundle", "preprocessed dataset bundle"),
    ("out_dir", "output directory"),
    ("checkpoint", "checkpoint to evaluate or inspect"),
    ("resume", "checkpoint to continue training from"),
    ("split", "evaluation split: train, valid or test"),
    ("raw", "rank without filtering"),
    ("dump_ranks", "write per-query ranks to this TSV file"),
    ("threads", "worker threads; 1 gives bit-reproducible runs"),
    ("dim", "embedding dimension"),
    ("variant", "model variant: full, sn, tn or ts"),
    ("c_min", "lower variance bound"),
    ("c_max", "upper variance bound"),
    ("lr", "Adam learning rate"),
    ("batch_size", "positives per minibatch"),
    ("negatives", "negatives per positive"),
    ("margin", "loss margin"),
    ("adv_temp", "self-adversarial temperature"),
    ("max_epochs", "epoch limit"),
    ("patience", "stale validations before stopping"),
    ("eval_every", "epochs between validations"),
    ("seed", "random seed"),
    ("reciprocal", "train with inverse relations"),
];

/// Keys that act as switches on the command line (`--raw` alone means true).
pub const SWITCHES: &[&str] = &["raw", "reciprocal"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Point,
    Interval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train_file: Option<PathBuf>,
    pub valid_file: Option<PathBuf>,
    pub test_file: Option<PathBuf>,
    pub format: Format,
    pub timeline: String,
    pub n_bins: Option<usize>,
    pub bundle: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub resume: Option<PathBuf>,
    pub split: atise_core::Split,
    pub raw: bool,
    pub dump_ranks: Option<PathBuf>,
    pub threads: Option<usize>,
    pub model: ModelConfig,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            train_file: None,
            valid_file: None,
            test_file: None,
            format: Format::Point,
            timeline: "day".into(),
            n_bins: None,
            bundle: None,
            out_dir: None,
            checkpoint: None,
            resume: None,
            split: atise_core::Split::Test,
            raw: false,
            dump_ranks: None,
            threads: None,
            model: ModelConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("invalid value {value:?} for {key}: {e}"))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => bail!("invalid value {value:?} for {key}: expected true or false"),
    }
}

/// Empty values unset optional keys.
fn path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn opt_to_string<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn path_to_string(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "train_file" => self.train_file = path(value),
            "valid_file" => self.valid_file = path(value),
            "test_file" => self.test_file = path(value),
            "format" => {
                self.format = match value {
                    "point" => Format::Point,
                    "interval" => Format::Interval,
                    _ => bail!("invalid value {value:?} for format: expected point or interval"),
                }
            }
            "timeline" => {
                if value != "day" && value != "year" {
                    bail!("invalid value {value:?} for timeline: expected day or year");
                }
                self.timeline = value.into();
            }
            "n_bins" => self.n_bins = if value.is_empty() { None } else { Some(num(key, value)?) },
            "bundle" => self.bundle = path(value),
            "out_dir" => self.out_dir = path(value),
            "checkpoint" => self.checkpoint = path(value),
            "resume" => self.resume = path(value),
            "split" => self.split = value.parse().map_err(|e| anyhow!("{e}"))?,
            "raw" => self.raw = boolean(key, value)?,
            "dump_ranks" => self.dump_ranks = path(value),
            "threads" => self.threads = if value.is_empty() { None } else { Some(num(key, value)?) },
            "dim" => self.model.dim = num(key, value)?,
            "variant" => self.model.variant = value.parse::<Variant>().map_err(|e| anyhow!("{e}"))?,
            "c_min" => self.model.c_min = num(key, value)?,
            "c_max" => self.model.c_max = num(key, value)?,
            "lr" => self.train.lr = num(key, value)?,
            "batch_size" => self.train.batch_size = num(key, value)?,
            "negatives" => self.train.negatives = num(key, value)?,
            "margin" => self.train.margin = num(key, value)?,
            "adv_temp" => self.train.adv_temp = num(key, value)?,
            "max_epochs" => self.train.max_epochs = num(key, value)?,
            "patience" => self.train.patience = num(key, value)?,
            "eval_every" => self.train.eval_every = num(key, value)?,
            "seed" => self.train.seed = num(key, value)?,
            "reciprocal" => self.train.reciprocal = boolean(key, value)?,
            _ => bail!("unknown configuration key {key:?}"),
        }
        Ok(())
    }

    /// Current value of a key, in the form `set` accepts.
    pub fn get(&self, key: &str) -> String {
        match key {
            "train_file" => path_to_string(&self.train_file),
            "valid_file" => path_to_string(&self.valid_file),
            "test_file" => path_to_string(&self.test_file),
            "format" => match self.format {
                Format::Point => "point".into(),
                Format::Interval => "interval".into(),
            },
            "timeline" => self.timeline.clone(),
            "n_bins" => opt_to_string(&self.n_bins),
            "bundle" => path_to_string(&self.bundle),
            "out_dir" => path_to_string(&self.out_dir),
            "checkpoint" => path_to_string(&self.checkpoint),
            "resume" => path_to_string(&self.resume),
            "split" => match self.split {
                atise_core::Split::Train => "train".into(),
                atise_core::Split::Valid => "valid".into(),
                atise_core::Split::Test => "test".into(),
            },
            "raw" => self.raw.to_string(),
            "dump_ranks" => path_to_string(&self.dump_ranks),
            "threads" => opt_to_string(&self.threads),
            "dim" => self.model.dim.to_string(),
            "variant" => self.model.variant.to_string(),
            // `{:?}` keeps full precision and a decimal point.
            "c_min" => format!("{:?}", self.model.c_min),
            "c_max" => format!("{:?}", self.model.c_max),
            "lr" => format!("{:?}", self.train.lr),
            "batch_size" => self.train.batch_size.to_string(),
            "negatives" => self.train.negatives.to_string(),
            "margin" => format!("{:?}", self.train.margin),
            "adv_temp" => format!("{:?}", self.train.adv_temp),
            "max_epochs" => self.train.max_epochs.to_string(),
            "patience" => self.train.patience.to_string(),
            "eval_every" => self.train.eval_every.to_string(),
            "seed" => self.train.seed.to_string(),
            "reciprocal" => self.train.reciprocal.to_string(),
            _ => unreachable!("key {key:?} is not in the schema"),
        }
    }

    /// Applies a `key = value` file. Blank lines and `#` comments are
    /// ignored; unknown keys are errors.
    pub fn apply_file_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (idx, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(i) => &line[..i],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{origin}:{}: expected `key = value`", idx + 1))?;
            self.set(key.trim(), value)
                .with_context(|| format!("{origin}:{}", idx + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        self.apply_file_text(&text, &path.display().to_string())
    }

    /// The full effective configuration as a loadable file.
    pub fn to_file_text(&self) -> String {
        let mut out = String::from("# effective configuration\n");
        for (key, _) in KEYS {
            writeln!(out, "{key} = {}", self.get(key)).unwrap();
        }
        out
    }

    pub fn timeline_spec(&self) -> Result<TimelineSpec> {
        match self.timeline.as_str() {
            "day" => Ok(TimelineSpec::Day),
            _ => {
                let n_bins = self.n_bins.ok_or_else(|| anyhow!("the year timeline needs n_bins"))?;
                Ok(TimelineSpec::YearBinned { n_bins })
            }
        }
    }
}

/// `n_bins` → `n-bins`.
pub fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

/// `n_bins` → `ATISE_N_BINS`.
pub fn env_name(key: &str) -> String {
    format!("ATISE_{}", key.to_ascii_uppercase())
}
