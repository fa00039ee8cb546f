use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::facts::{discretize, IntervalFact};
use super::parse::RawFact;
use super::timeline::{build_timeline, TimelineSpec};
use super::vocab::Vocabulary;
use crate::container::{self, Kind};
use crate::error::{Error, Result};

const BUNDLE: Kind = Kind {
    name: "bundle",
    magic: *b"ATISEBND",
    version: 1,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDigest {
    pub split: String,
    pub path: String,
    /// Hex SHA-256 of the raw file contents.
    pub sha256: String,
}

impl SourceDigest {
    pub fn of_bytes(split: &str, path: &str, bytes: &[u8]) -> Self {
        SourceDigest {
            split: split.to_owned(),
            path: path.to_owned(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub sources: Vec<SourceDigest>,
    pub timeline: TimelineSpec,
}

/// A discretized dataset. Point facts are intervals with `start == end`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetBundle {
    pub vocabulary: Vocabulary,
    pub train: Vec<IntervalFact>,
    pub valid: Vec<IntervalFact>,
    pub test: Vec<IntervalFact>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" | "validation" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split {other:?}"))),
        }
    }
}

impl DatasetBundle {
    /// Builds the timeline and vocabulary over all three splits and
    /// discretizes every fact.
    pub fn build(
        train: &[RawFact],
        valid: &[RawFact],
        test: &[RawFact],
        timeline: TimelineSpec,
        reciprocal: bool,
        sources: Vec<SourceDigest>,
    ) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Data("training split has no facts".into()));
        }
        let tl = build_timeline(train.iter().chain(valid).chain(test), timeline)?;
        let vocabulary = Vocabulary::build(&[train, valid, test], tl, reciprocal);
        let conv = |facts: &[RawFact]| -> Result<Vec<IntervalFact>> {
            facts.iter().map(|f| discretize(f, &vocabulary)).collect()
        };
        let bundle = DatasetBundle {
            train: conv(train)?,
            valid: conv(valid)?,
            test: conv(test)?,
            provenance: Provenance { sources, timeline },
            vocabulary,
        };
        Ok(bundle)
    }

    pub fn split(&self, split: Split) -> &[IntervalFact] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    pub fn all_facts(&self) -> impl Iterator<Item = &IntervalFact> {
        self.train.iter().chain(&self.valid).chain(&self.test)
    }

    /// Checks that every id in every split resolves in the vocabulary.
    pub fn validate(&self) -> Result<()> {
        let n_e = self.vocabulary.n_entities();
        let n_r = self.vocabulary.relation_space();
        let n_t = self.vocabulary.n_steps();
        for f in self.all_facts() {
            if f.s >= n_e || f.o >= n_e || f.p >= n_r || f.start > f.end || f.end >= n_t {
                return Err(Error::Data(format!("fact {f:?} out of vocabulary range")));
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let payload = serde_json::to_vec(self).map_err(|e| Error::Data(e.to_string()))?;
        Ok(container::encode(&BUNDLE, &payload))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let payload = container::decode(&BUNDLE, bytes)?;
        let bundle: DatasetBundle = serde_json::from_slice(payload).map_err(|e| Error::Corrupt {
            kind: BUNDLE.name,
            message: e.to_string(),
        })?;
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let payload = serde_json::to_vec(self).map_err(|e| Error::Data(e.to_string()))?;
        container::write(&BUNDLE, path, &payload)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&container::read(path)?)
    }
}
