//! Parsing, vocabulary construction, time discretization and dataset bundles.

mod bundle;
mod date;
mod facts;
mod parse;
mod timeline;
mod vocab;

pub use bundle::{DatasetBundle, Provenance, SourceDigest, Split};
pub use date::Date;
pub use facts::{discretize, expand_interval, IntervalFact, Quadruple};
pub use parse::{parse_interval_file, parse_point_file, write_facts, FactTime, RawFact};
pub use timeline::{build_timeline, greedy_year_bins, Timeline, TimelineSpec};
pub use vocab::Vocabulary;
