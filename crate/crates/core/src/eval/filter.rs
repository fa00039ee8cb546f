use std::collections::{HashMap, HashSet};

use crate::data::{DatasetBundle, IntervalFact};

/// Entities known to complete a query at a given step, over all splits.
#[derive(Debug, Clone, Default)]
pub struct FilterIndex {
    objects: HashMap<(usize, usize, usize), HashSet<usize>>,
    subjects: HashMap<(usize, usize, usize), HashSet<usize>>,
}

impl FilterIndex {
    /// Indexes train ∪ valid ∪ test; interval facts contribute every step
    /// they cover.
    pub fn build(bundle: &DatasetBundle) -> Self {
        Self::from_facts(bundle.all_facts())
    }

    pub fn from_facts<'a, I: IntoIterator<Item = &'a IntervalFact>>(facts: I) -> Self {
        let mut index = FilterIndex::default();
        for f in facts {
            for t in f.steps() {
                index.objects.entry((f.s, f.p, t)).or_default().insert(f.o);
                index.subjects.entry((f.p, f.o, t)).or_default().insert(f.s);
            }
        }
        index
    }

    /// Objects `o` with `(s, p, o)` true at step `t`.
    pub fn objects(&self, s: usize, p: usize, t: usize) -> Option<&HashSet<usize>> {
        self.objects.get(&(s, p, t))
    }

    /// Subjects `s` with `(s, p, o)` true at step `t`.
    pub fn subjects(&self, p: usize, o: usize, t: usize) -> Option<&HashSet<usize>> {
        self.subjects.get(&(p, o, t))
    }
}
