use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{applications, NormalForm, Normalizer, Orientation, RewriteError};
use crate::presentation::Presentation;
use crate::trace::Gen;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Leftmost start, shortest left side, lowest relation index.
    LeftmostInnermost,
    /// Uniformly random applicable rule, from a seeded generator.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Confluent {
    pub normal_form: NormalForm,
    pub steps: u64,
}

/// Rewrites `w` with the relations oriented left to right until none applies.
pub fn rewrite_confluent(p: &Presentation, w: &[Gen], strategy: Strategy, fuel: u64) -> Result<Confluent, RewriteError> {
    let n = Normalizer::new(p);
    let rels = p.all_relations();
    let rules: Vec<usize> = (0..p.relations().len())
        .filter(|&i| !p.is_commuting_relation(&rels[i].0, &rels[i].1) && !p.zero().is_some_and(|z| rels[i].1 == [z]))
        .collect();
    let mut rng = match strategy {
        Strategy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Strategy::LeftmostInnermost => None,
    };
    let mut cur = n.run(w)?;
    let mut steps = 0u64;
    loop {
        let NormalForm::Word(word) = &cur else {
            return Ok(Confluent { normal_form: cur, steps });
        };
        let mut options = Vec::new();
        for &i in &rules {
            for (start, next) in applications(p, &rels, i, Orientation::L2R, word) {
                options.push((start, rels[i].0.len(), i, next));
            }
        }
        let chosen = match &mut rng {
            None => options.into_iter().min_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2))),
            Some(rng) => options.choose(rng).cloned(),
        };
        let Some((_, _, _, next)) = chosen else {
            return Ok(Confluent { normal_form: cur, steps });
        };
        if steps >= fuel {
            return Err(RewriteError::FuelExceeded(steps));
        }
        steps += 1;
        cur = n.run(&next)?;
    }
}
