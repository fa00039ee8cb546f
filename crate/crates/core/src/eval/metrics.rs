use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub const HITS_AT: [usize; 3] = [1, 3, 10];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mrr: f64,
    /// Hits@1, Hits@3, Hits@10.
    pub hits: [f64; 3],
    pub n_queries: usize,
}

impl Metrics {
    pub fn from_ranks<I: IntoIterator<Item = usize>>(ranks: I) -> Self {
        let mut n = 0usize;
        let mut rr = 0.0;
        let mut hits = [0usize; 3];
        for rank in ranks {
            n += 1;
            rr += 1.0 / rank as f64;
            for (h, &k) in hits.iter_mut().zip(&HITS_AT) {
                if rank <= k {
                    *h += 1;
                }
            }
        }
        let n_f = n.max(1) as f64;
        Metrics {
            mrr: rr / n_f,
            hits: hits.map(|h| h as f64 / n_f),
            n_queries: n,
        }
    }

    pub fn hits_at(&self, k: usize) -> Option<f64> {
        HITS_AT.iter().position(|&x| x == k).map(|i| self.hits[i])
    }

    /// `metric<TAB>value` lines.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "mrr\t{:.6}", self.mrr).unwrap();
        for (k, h) in HITS_AT.iter().zip(&self.hits) {
            writeln!(s, "hits@{k}\t{h:.6}").unwrap();
        }
        writeln!(s, "n_queries\t{}", self.n_queries).unwrap();
        s
    }
}
