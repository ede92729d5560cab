//! Normal forms, derivations and bounded equality search in generated presentations.

mod confluent;
mod decide;
mod divisors;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::presentation::{Presentation, PresentationError, Word};
use crate::trace::{canonical, is_factor, occurrences, replace, two_letter_factors, Gen};

pub use confluent::{rewrite_confluent, Confluent, Strategy};
pub use decide::{decide_equal, derivation_length, Verdict};
pub use divisors::{divisor_set, DivisorSet, ReesQuotient};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("generator index {0} is not declared")]
    ForeignGenerator(Gen),
    #[error("relation index {0} out of range")]
    NoSuchRelation(usize),
    #[error("no occurrence of relation {relation} starts at position {position}")]
    NoOccurrence { relation: usize, position: usize },
    #[error("fuel exhausted after {0} steps")]
    FuelExceeded(u64),
    #[error("word is zero")]
    ZeroWord,
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error("derivation line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormalForm {
    Zero,
    Word(Word),
}

impl NormalForm {
    pub fn is_zero(&self) -> bool {
        matches!(self, NormalForm::Zero)
    }

    pub fn word(&self) -> Option<&Word> {
        match self {
            NormalForm::Zero => None,
            NormalForm::Word(w) => Some(w),
        }
    }

    pub fn show(&self, p: &Presentation) -> String {
        match self {
            NormalForm::Zero => "0".into(),
            NormalForm::Word(w) => p.show(w),
        }
    }
}

fn check_word(p: &Presentation, w: &[Gen]) -> Result<(), RewriteError> {
    match w.iter().find(|&&g| g as usize >= p.generators().len()) {
        Some(&g) => Err(RewriteError::ForeignGenerator(g)),
        None => Ok(()),
    }
}

/// Zero words of `p`: the forbidden words plus left sides of explicit `w = 0` relations.
fn zero_words(p: &Presentation) -> (HashSet<(Gen, Gen)>, Vec<Word>) {
    let mut pairs = HashSet::new();
    let mut long = Vec::new();
    let explicit = p
        .relations()
        .iter()
        .filter(|(_, v)| p.zero().is_some_and(|z| *v == [z]))
        .map(|(u, _)| u);
    for w in p.forbidden().iter().chain(explicit) {
        if w.len() == 2 {
            pairs.insert((w[0], w[1]));
        } else {
            long.push(w.clone());
        }
    }
    (pairs, long)
}

/// Cached zero-word data for repeated normalization in one presentation.
pub(crate) struct Normalizer<'a> {
    p: &'a Presentation,
    pairs: HashSet<(Gen, Gen)>,
    long: Vec<Word>,
}

impl<'a> Normalizer<'a> {
    pub(crate) fn new(p: &'a Presentation) -> Self {
        let (pairs, long) = zero_words(p);
        Normalizer { p, pairs, long }
    }

    pub(crate) fn presentation(&self) -> &'a Presentation {
        self.p
    }

    pub(crate) fn run(&self, w: &[Gen]) -> Result<NormalForm, RewriteError> {
        check_word(self.p, w)?;
        if self.p.zero().is_some_and(|z| w.contains(&z)) {
            return Ok(NormalForm::Zero);
        }
        let c = self.p.commutation();
        let mut w = canonical(c, w);
        'reduce: loop {
            for (l, r) in self.p.reductions() {
                if let Some(occ) = occurrences(c, l, &w).into_iter().next() {
                    w = canonical(c, &replace(c, &w, &occ, r));
                    continue 'reduce;
                }
            }
            break;
        }
        if !self.pairs.is_empty() && two_letter_factors(c, &w).iter().any(|pair| self.pairs.contains(pair)) {
            return Ok(NormalForm::Zero);
        }
        if self.long.iter().any(|z| z.len() <= w.len() && is_factor(c, z, &w)) {
            return Ok(NormalForm::Zero);
        }
        Ok(NormalForm::Word(w))
    }
}

/// Canonical form modulo commuting, with zero detection.
pub fn normalize(p: &Presentation, w: &[Gen]) -> Result<NormalForm, RewriteError> {
    Normalizer::new(p).run(w)
}

pub fn is_factor_mod_commuting(p: &Presentation, u: &[Gen], w: &[Gen]) -> bool {
    is_factor(p.commutation(), u, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    L2R,
    R2L,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::L2R => "L2R",
            Orientation::R2L => "R2L",
        })
    }
}

/// One relation application: index into `all_relations`, start position in the
/// canonical word, orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step {
    pub relation: usize,
    pub position: usize,
    pub orientation: Orientation,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.relation, self.position, self.orientation)
    }
}

impl FromStr for Step {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or("expected `(relation, position, L2R|R2L)`")?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        let [r, p, o] = parts.as_slice() else {
            return Err("expected three fields".into());
        };
        let orientation = match *o {
            "L2R" => Orientation::L2R,
            "R2L" => Orientation::R2L,
            _ => return Err(format!("bad orientation `{o}`")),
        };
        Ok(Step {
            relation: r.parse().map_err(|_| format!("bad relation index `{r}`"))?,
            position: p.parse().map_err(|_| format!("bad position `{p}`"))?,
            orientation,
        })
    }
}

fn sides(rel: &(Word, Word), o: Orientation) -> (&Word, &Word) {
    match o {
        Orientation::L2R => (&rel.0, &rel.1),
        Orientation::R2L => (&rel.1, &rel.0),
    }
}

/// Every way to apply relation `idx` in direction `o` to the canonical word `w`.
pub(crate) fn applications(p: &Presentation, rels: &[(Word, Word)], idx: usize, o: Orientation, w: &[Gen]) -> Vec<(usize, Word)> {
    let (from, to) = sides(&rels[idx], o);
    let c = p.commutation();
    occurrences(c, from, w).into_iter().map(|occ| (occ.start(), replace(c, w, &occ, to))).collect()
}

/// Applies `step` to a normal form. Applying anything to Zero leaves Zero.
pub fn apply_step(p: &Presentation, w: &NormalForm, step: Step) -> Result<NormalForm, RewriteError> {
    let rels = p.all_relations();
    let NormalForm::Word(w) = w else {
        return Ok(NormalForm::Zero);
    };
    if step.relation >= rels.len() {
        return Err(RewriteError::NoSuchRelation(step.relation));
    }
    let (_, next) = applications(p, &rels, step.relation, step.orientation, w)
        .into_iter()
        .find(|(start, _)| *start == step.position)
        .ok_or(RewriteError::NoOccurrence { relation: step.relation, position: step.position })?;
    normalize(p, &next)
}

/// Two step sequences, one from each word, ending at a common normal form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Derivation {
    pub u_side: Vec<Step>,
    pub v_side: Vec<Step>,
}

impl Derivation {
    pub fn len(&self) -> usize {
        self.u_side.len() + self.v_side.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn replay_side(p: &Presentation, w: &[Gen], steps: &[Step]) -> Result<NormalForm, RewriteError> {
        let mut at = normalize(p, w)?;
        for &s in steps {
            at = apply_step(p, &at, s)?;
        }
        Ok(at)
    }

    /// True when both sides replay to the same normal form.
    pub fn replay(&self, p: &Presentation, u: &[Gen], v: &[Gen]) -> Result<bool, RewriteError> {
        Ok(Self::replay_side(p, u, &self.u_side)? == Self::replay_side(p, v, &self.v_side)?)
    }

    pub fn parse(text: &str) -> Result<Self, RewriteError> {
        let mut d = Derivation::default();
        let mut v_side = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line == "--" {
                v_side = true;
                continue;
            }
            let s: Step = line.parse().map_err(|message| RewriteError::Parse { line: i + 1, message })?;
            if v_side { d.v_side.push(s) } else { d.u_side.push(s) }
        }
        Ok(d)
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.u_side {
            writeln!(f, "{s}")?;
        }
        writeln!(f, "--")?;
        for s in &self.v_side {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}
