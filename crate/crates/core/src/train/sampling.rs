use rand::Rng;

use crate::data::{DatasetBundle, IntervalFact, Quadruple};
use crate::error::{Error, Result};

/// Appends `(o, p + n_r, s, [start, end])` for every fact of every split.
pub fn add_reciprocal(bundle: &DatasetBundle) -> Result<DatasetBundle> {
    if !bundle.vocabulary.reciprocal {
        return Err(Error::Config(
            "reciprocal augmentation needs a vocabulary built with the reciprocal flag".into(),
        ));
    }
    let n_r = bundle.vocabulary.n_relations();
    let augment = |facts: &[IntervalFact]| -> Result<Vec<IntervalFact>> {
        let mut out = facts.to_vec();
        for f in facts {
            if f.p >= n_r {
                return Err(Error::Data(format!("fact {f:?} already uses an inverse relation")));
            }
            out.push(IntervalFact {
                s: f.o,
                p: f.p + n_r,
                o: f.s,
                ..*f
            });
        }
        Ok(out)
    };
    Ok(DatasetBundle {
        train: augment(&bundle.train)?,
        valid: augment(&bundle.valid)?,
        test: augment(&bundle.test)?,
        ..bundle.clone()
    })
}

/// Draws `eta` corruptions per positive. Each replaces the subject or the
/// object (chosen uniformly) by a uniformly drawn entity; relation and time
/// are kept. Negatives are not filtered against known facts.
pub fn sample_negatives<R: Rng>(batch: &[Quadruple], eta: usize, n_entities: usize, rng: &mut R) -> Vec<Vec<Quadruple>> {
    batch
        .iter()
        .map(|pos| {
            (0..eta)
                .map(|_| {
                    let corrupt_subject = rng.random_bool(0.5);
                    let e = rng.random_range(0..n_entities);
                    if corrupt_subject {
                        Quadruple { s: e, ..*pos }
                    } else {
                        Quadruple { o: e, ..*pos }
                    }
                })
                .collect()
        })
        .collect()
}
