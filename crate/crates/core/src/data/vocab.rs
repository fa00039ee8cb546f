use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::parse::RawFact;
use super::timeline::Timeline;

/// Dense label ↔ id tables for entities and relations plus the timeline.
///
/// With `reciprocal` set, relation ids `n_r..2*n_r` denote the inverses of
/// `0..n_r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    entities: IndexSet<String>,
    relations: IndexSet<String>,
    pub timeline: Timeline,
    pub reciprocal: bool,
}

impl Vocabulary {
    /// Assigns ids in first-appearance order over the splits as given
    /// (train, then valid, then test).
    pub fn build(splits: &[&[RawFact]], timeline: Timeline, reciprocal: bool) -> Self {
        let mut entities = IndexSet::new();
        let mut relations = IndexSet::new();
        for fact in splits.iter().flat_map(|s| s.iter()) {
            entities.insert(fact.subject.clone());
            relations.insert(fact.predicate.clone());
            entities.insert(fact.object.clone());
        }
        Vocabulary {
            entities,
            relations,
            timeline,
            reciprocal,
        }
    }

    pub fn n_entities(&self) -> usize {
        self.entities.len()
    }

    /// Number of distinct relation labels, excluding inverses.
    pub fn n_relations(&self) -> usize {
        self.relations.len()
    }

    /// Size of the relation id space: doubled when reciprocal.
    pub fn relation_space(&self) -> usize {
        if self.reciprocal {
            2 * self.relations.len()
        } else {
            self.relations.len()
        }
    }

    pub fn n_steps(&self) -> usize {
        self.timeline.n_steps()
    }

    pub fn entity_id(&self, label: &str) -> Option<usize> {
        self.entities.get_index_of(label)
    }

    pub fn relation_id(&self, label: &str) -> Option<usize> {
        self.relations.get_index_of(label)
    }

    pub fn entity_label(&self, id: usize) -> Option<&str> {
        self.entities.get_index(id).map(String::as_str)
    }

    /// Label of a relation id; inverse ids get a `^-1` suffix.
    pub fn relation_label(&self, id: usize) -> Option<String> {
        let n = self.relations.len();
        if id < n {
            self.relations.get_index(id).cloned()
        } else if self.reciprocal && id < 2 * n {
            self.relations.get_index(id - n).map(|l| format!("{l}^-1"))
        } else {
            None
        }
    }

    pub fn entities(&self) -> impl Iterator<Item = &str> {
        self.entities.iter().map(String::as_str)
    }

    pub fn relations(&self) -> impl Iterator<Item = &str> {
        self.relations.iter().map(String::as_str)
    }

    /// Maps a relation id to its inverse under the reciprocal id scheme.
    pub fn inverse_relation(&self, p: usize) -> usize {
        let n = self.relations.len();
        if p < n {
            p + n
        } else {
            p - n
        }
    }

    /// Returns a copy with the reciprocal flag set.
    pub fn with_reciprocal(&self, reciprocal: bool) -> Self {
        Vocabulary {
            reciprocal,
            ..self.clone()
        }
    }

    /// Hex SHA-256 over the label tables and the step count; used to tie
    /// checkpoints to the vocabulary they were trained on.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for e in &self.entities {
            h.update(b"e\0");
            h.update(e.as_bytes());
            h.update(b"\n");
        }
        for r in &self.relations {
            h.update(b"r\0");
            h.update(r.as_bytes());
            h.update(b"\n");
        }
        h.update((self.n_steps() as u64).to_le_bytes());
        hex::encode(h.finalize())
    }
}
