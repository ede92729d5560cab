//! Semigroup presentations compiled from Minsky machines.

mod amalgam;
mod emit;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::machine::{Configuration, Label, MinskyMachine};
use crate::trace::{canonical, Commutation, Gen};

pub use amalgam::{emit_amalgam, Amalgam};
pub use emit::{
    config_word, emit, emit_s1, emit_s1_prime, emit_s2_left, emit_s2_prime, emit_s2_right,
    emit_sk_right, forbidden_factors,
};

/// A word as a sequence of generator indices of its presentation.
pub type Word = Vec<Gen>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    S1,
    S2Right,
    S2Left,
    S1Prime,
    S2RightPrime,
    S3Right,
    S5Right,
    AmalgamD,
    AmalgamE,
    Amalgam,
}

impl Variant {
    pub const ALL: [Variant; 10] = [
        Variant::S1,
        Variant::S2Right,
        Variant::S2Left,
        Variant::S1Prime,
        Variant::S2RightPrime,
        Variant::S3Right,
        Variant::S5Right,
        Variant::AmalgamD,
        Variant::AmalgamE,
        Variant::Amalgam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::S1 => "s1",
            Variant::S2Right => "s2r",
            Variant::S2Left => "s2l",
            Variant::S1Prime => "s1p",
            Variant::S2RightPrime => "s2rp",
            Variant::S3Right => "s3r",
            Variant::S5Right => "s5r",
            Variant::AmalgamD => "amalgam-d",
            Variant::AmalgamE => "amalgam-e",
            Variant::Amalgam => "amalgam",
        }
    }

    pub fn is_primed(self) -> bool {
        matches!(self, Variant::S1Prime | Variant::S2RightPrime)
    }

    pub fn is_amalgam(self) -> bool {
        matches!(self, Variant::AmalgamD | Variant::AmalgamE | Variant::Amalgam)
    }

    /// Glass count of the machines the variant encodes.
    pub fn glasses(self) -> usize {
        match self {
            Variant::S3Right => 3,
            Variant::S5Right => 5,
            _ => 2,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = PresentationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| PresentationError::UnknownVariant(s.to_string()))
    }
}

/// Switches between the corrected relation rows and the uncorrected ones.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EmitOptions {
    pub literal: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("expected a {expected}-glass machine, got {got} glasses")]
    GlassCount { expected: usize, got: usize },
    #[error("command at label {0} is not of the form Add(k), Sub(k) or zero test")]
    NotClassic(Label),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("configuration {config} does not fit variant {variant}")]
    ConfigMismatch { variant: Variant, config: Configuration },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

/// A finite presentation with an optional zero and a set of commuting generator pairs.
///
/// `relations` lists every defining relation; relations `w = 0` carry the zero
/// generator alone on the right. `forbidden` holds further words equal to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    machine: String,
    variant: Variant,
    generators: Vec<String>,
    index: HashMap<String, Gen>,
    zero: Option<Gen>,
    commuting: BTreeSet<(Gen, Gen)>,
    relations: Vec<(Word, Word)>,
    forbidden: Vec<Word>,
    command_relations: Vec<Vec<usize>>,
    reductions: Vec<(Word, Word)>,
    commutation: Commutation,
}

impl Presentation {
    /// Assembles a presentation and checks that every relation uses declared generators.
    pub fn new(
        machine: impl Into<String>,
        variant: Variant,
        generators: Vec<String>,
        zero: Option<Gen>,
        commuting: BTreeSet<(Gen, Gen)>,
        relations: Vec<(Word, Word)>,
        forbidden: Vec<Word>,
    ) -> Result<Self, PresentationError> {
        let n = generators.len();
        let index: HashMap<String, Gen> =
            generators.iter().enumerate().map(|(i, g)| (g.clone(), i as Gen)).collect();
        if index.len() != n {
            return Err(PresentationError::Invalid("duplicate generator names".into()));
        }
        let bad = relations
            .iter()
            .flat_map(|(u, v)| u.iter().chain(v))
            .chain(forbidden.iter().flatten())
            .chain(commuting.iter().flat_map(|(a, b)| [a, b]))
            .any(|&g| g as usize >= n);
        if bad || zero.is_some_and(|z| z as usize >= n) {
            return Err(PresentationError::Invalid("relation uses an undeclared generator".into()));
        }
        if relations.iter().any(|(u, v)| u.is_empty() || v.is_empty()) || forbidden.iter().any(Vec::is_empty) {
            return Err(PresentationError::Invalid("empty word in a relation".into()));
        }
        for &(a, b) in &commuting {
            if !relations.iter().any(|(u, v)| *u == [a, b] && *v == [b, a] || *u == [b, a] && *v == [a, b]) {
                return Err(PresentationError::Invalid(format!(
                    "commuting pair {} {} has no relation",
                    generators[a as usize], generators[b as usize]
                )));
            }
        }
        let commutation = Commutation::new(n, commuting.iter().copied());
        let mut p = Presentation {
            machine: machine.into(),
            variant,
            generators,
            index,
            zero,
            commuting,
            relations,
            forbidden,
            command_relations: Vec::new(),
            reductions: Vec::new(),
            commutation,
        };
        p.reductions = p.counter_reductions();
        Ok(p)
    }

    pub(crate) fn with_command_relations(mut self, map: Vec<Vec<usize>>) -> Self {
        self.command_relations = map;
        self
    }

    /// Length-reducing orientation of the counter relations, plus `ee = e` which they imply.
    fn counter_reductions(&self) -> Vec<(Word, Word)> {
        if !self.variant.is_primed() {
            return Vec::new();
        }
        let (Some(c), Some(c1), Some(e)) = (self.gen("c"), self.gen("c'"), self.gen("e")) else {
            return Vec::new();
        };
        vec![
            (vec![c, c1], vec![e]),
            (vec![c1, c], vec![e]),
            (vec![e, c], vec![c]),
            (vec![c, e], vec![c]),
            (vec![e, c1], vec![c1]),
            (vec![c1, e], vec![c1]),
            (vec![e, e], vec![e]),
        ]
    }

    pub fn machine_name(&self) -> &str {
        &self.machine
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn gen(&self, name: &str) -> Option<Gen> {
        self.index.get(name).copied()
    }

    pub fn zero(&self) -> Option<Gen> {
        self.zero
    }

    pub fn commuting(&self) -> &BTreeSet<(Gen, Gen)> {
        &self.commuting
    }

    pub fn commutation(&self) -> &Commutation {
        &self.commutation
    }

    pub fn relations(&self) -> &[(Word, Word)] {
        &self.relations
    }

    pub fn forbidden(&self) -> &[Word] {
        &self.forbidden
    }

    pub(crate) fn reductions(&self) -> &[(Word, Word)] {
        &self.reductions
    }

    /// Relation indices realizing each machine command, by command index.
    pub fn command_relations(&self) -> &[Vec<usize>] {
        &self.command_relations
    }

    /// `relations` followed by `w = 0` for each forbidden word. Derivations index this list.
    pub fn all_relations(&self) -> Vec<(Word, Word)> {
        let mut out = self.relations.clone();
        if let Some(z) = self.zero {
            out.extend(self.forbidden.iter().map(|w| (w.clone(), vec![z])));
        }
        out
    }

    pub fn is_commuting_relation(&self, u: &[Gen], v: &[Gen]) -> bool {
        u.len() == 2 && v.len() == 2 && u[0] == v[1] && u[1] == v[0] && self.commutation.commute(u[0], u[1])
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, PresentationError> {
        text.split_whitespace()
            .map(|t| self.gen(t).ok_or_else(|| PresentationError::UnknownGenerator(t.to_string())))
            .collect()
    }

    pub fn word_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Word, PresentationError> {
        names
            .iter()
            .map(|t| self.gen(t.as_ref()).ok_or_else(|| PresentationError::UnknownGenerator(t.as_ref().into())))
            .collect()
    }

    pub fn show(&self, w: &[Gen]) -> String {
        w.iter().map(|&g| self.generators[g as usize].as_str()).collect::<Vec<_>>().join(" ")
    }

    /// Canonical representative of `w` modulo the commuting pairs.
    pub fn canonical(&self, w: &[Gen]) -> Word {
        canonical(&self.commutation, w)
    }

    /// The configuration word of `c` in this presentation.
    pub fn config_word(&self, c: &Configuration, counter: Option<u64>) -> Result<Word, PresentationError> {
        let names = config_word(self.variant, c, counter)?;
        self.word_from_names(&names)
    }

    /// Reads `w` back as a configuration word of this presentation, modulo commuting.
    /// Primed variants decode only counter-free words.
    pub fn decode_config(&self, w: &[Gen]) -> Option<Configuration> {
        let glasses = self.variant.glasses();
        let mut label = None;
        let mut counts = vec![0u64; glasses];
        let mut ab = 0u64;
        let mut abar = 0u64;
        for &g in w {
            let name = self.generators[g as usize].as_str();
            if let Some(i) = name.strip_prefix('q').and_then(|d| d.parse::<Label>().ok()) {
                if label.replace(i).is_some() {
                    return None;
                }
            } else if self.variant.is_amalgam() {
                match name {
                    "a" => ab += 1,
                    "abar" => abar += 1,
                    _ => {}
                }
            } else if let Some(k) = name.strip_prefix('a').and_then(|d| d.parse::<usize>().ok()) {
                *counts.get_mut(k.checked_sub(1)?)? += 1;
            }
        }
        if self.variant.is_amalgam() {
            counts = vec![ab, abar];
        }
        let c = Configuration::new(label?, counts);
        let expected = self.config_word(&c, self.variant.is_primed().then_some(0)).ok()?;
        (self.canonical(&expected) == self.canonical(w)).then_some(c)
    }

    /// The word-reversed presentation (anti-isomorphic copy).
    pub fn reversed(&self, variant: Variant) -> Presentation {
        let rev = |w: &Word| w.iter().rev().copied().collect::<Word>();
        let relations = self.relations.iter().map(|(u, v)| (rev(u), rev(v))).collect();
        let forbidden = self.forbidden.iter().map(rev).collect();
        Presentation::new(
            self.machine.clone(),
            variant,
            self.generators.clone(),
            self.zero,
            self.commuting.clone(),
            relations,
            forbidden,
        )
        .expect("reversal preserves validity")
        .with_command_relations(self.command_relations.clone())
    }

    /// Quasi-identity "all relations imply `config_word(input) = 0`".
    pub fn quasi_identity(&self, input: &Configuration) -> Result<QuasiIdentity, PresentationError> {
        if input.label != 1 {
            return Err(PresentationError::ConfigMismatch { variant: self.variant, config: input.clone() });
        }
        let zero = self.zero.ok_or_else(|| PresentationError::Invalid("presentation has no zero".into()))?;
        let mut var_of = vec![None; self.generators.len()];
        let mut variables = Vec::new();
        for (i, g) in self.generators.iter().enumerate() {
            if i as Gen != zero {
                var_of[i] = Some(variables.len());
                variables.push(g.clone());
            }
        }
        let term = |w: &Word| -> Vec<Letter> {
            w.iter().map(|&g| var_of[g as usize].map_or(Letter::Zero, Letter::Var)).collect()
        };
        let premises = self.all_relations().iter().map(|(u, v)| (term(u), term(v))).collect();
        let w = self.config_word(input, self.variant.is_primed().then_some(0))?;
        Ok(QuasiIdentity { variables, premises, conclusion: (term(&w), vec![Letter::Zero]) })
    }
}

/// Letters of quasi-identity words: variables or the zero constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    Var(usize),
    Zero,
}

/// `premises → conclusion`, universally quantified over `variables`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiIdentity {
    pub variables: Vec<String>,
    pub premises: Vec<(Vec<Letter>, Vec<Letter>)>,
    pub conclusion: (Vec<Letter>, Vec<Letter>),
}

/// Emits the quasi-identity L → W = 0 for a primed presentation and an input configuration.
pub fn emit_quasi_identity(p: &Presentation, input: &Configuration) -> Result<QuasiIdentity, PresentationError> {
    p.quasi_identity(input)
}

impl fmt::Display for QuasiIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |w: &[Letter]| {
            w.iter()
                .map(|l| match l {
                    Letter::Var(i) => self.variables[*i].as_str(),
                    Letter::Zero => "0",
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        for (u, v) in &self.premises {
            writeln!(f, "{} = {}", show(u), show(v))?;
        }
        writeln!(f, "->")?;
        writeln!(f, "{} = {}", show(&self.conclusion.0), show(&self.conclusion.1))
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "presentation {} {}", self.variant, self.machine)?;
        writeln!(f, "generators")?;
        writeln!(f, "{}", self.generators.iter().filter(|g| Some(self.gen(g).unwrap()) != self.zero).cloned().collect::<Vec<_>>().join(" "))?;
        writeln!(f, "zero")?;
        if let Some(z) = self.zero {
            writeln!(f, "{}", self.generators[z as usize])?;
        }
        writeln!(f, "commuting")?;
        for &(a, b) in &self.commuting {
            writeln!(f, "{} {}", self.generators[a as usize], self.generators[b as usize])?;
        }
        writeln!(f, "relations")?;
        for (u, v) in &self.relations {
            writeln!(f, "{} = {}", self.show(u), self.show(v))?;
        }
        writeln!(f, "forbidden")?;
        for w in &self.forbidden {
            writeln!(f, "{}", self.show(w))?;
        }
        Ok(())
    }
}

/// Parses the interchange format written by `Display`.
pub fn parse_presentation(text: &str) -> Result<Presentation, PresentationError> {
    let err = |line: usize, message: &str| PresentationError::Parse { line, message: message.into() };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let [kw, variant, machine] = parts.as_slice() else {
        return Err(err(hline, "expected `presentation <variant> <machine>`"));
    };
    if *kw != "presentation" {
        return Err(err(hline, "expected `presentation <variant> <machine>`"));
    }
    let variant: Variant = variant.parse()?;
    let mut section = "";
    let mut generators: Vec<String> = Vec::new();
    let mut zero_name: Option<String> = None;
    let mut commuting_names = Vec::new();
    let mut relation_text = Vec::new();
    let mut forbidden_text = Vec::new();
    for (no, line) in lines {
        match line {
            "generators" | "zero" | "commuting" | "relations" | "forbidden" => {
                section = line;
                continue;
            }
            _ => {}
        }
        match section {
            "generators" => generators.extend(line.split_whitespace().map(String::from)),
            "zero" => {
                if zero_name.replace(line.to_string()).is_some() {
                    return Err(err(no, "more than one zero"));
                }
            }
            "commuting" => {
                let pair: Vec<&str> = line.split_whitespace().collect();
                if pair.len() != 2 {
                    return Err(err(no, "commuting pairs have two generators"));
                }
                commuting_names.push((no, pair[0].to_string(), pair[1].to_string()));
            }
            "relations" => {
                let (u, v) = line.split_once('=').ok_or_else(|| err(no, "expected `u = v`"))?;
                relation_text.push((no, u.to_string(), v.to_string()));
            }
            "forbidden" => forbidden_text.push((no, line.to_string())),
            _ => return Err(err(no, "content before the first section")),
        }
    }
    if let Some(z) = &zero_name {
        generators.push(z.clone());
    }
    let index: HashMap<&str, Gen> = generators.iter().enumerate().map(|(i, g)| (g.as_str(), i as Gen)).collect();
    let word = |no: usize, s: &str| -> Result<Word, PresentationError> {
        s.split_whitespace()
            .map(|t| index.get(t).copied().ok_or_else(|| err(no, &format!("unknown generator `{t}`"))))
            .collect()
    };
    let zero = zero_name.as_deref().map(|z| index[z]);
    let mut commuting = BTreeSet::new();
    for (no, a, b) in &commuting_names {
        let (a, b) = (word(*no, a)?[0], word(*no, b)?[0]);
        commuting.insert((a.min(b), a.max(b)));
    }
    let relations = relation_text.iter().map(|(no, u, v)| Ok((word(*no, u)?, word(*no, v)?))).collect::<Result<Vec<_>, PresentationError>>()?;
    let forbidden = forbidden_text.iter().map(|(no, w)| word(*no, w)).collect::<Result<Vec<_>, _>>()?;
    Presentation::new(machine.to_string(), variant, generators, zero, commuting, relations, forbidden)
}

/// Every relation side is a nonempty word over declared generators.
pub fn check_structure(p: &Presentation) -> bool {
    let n = p.generators().len();
    p.all_relations().iter().all(|(u, v)| !u.is_empty() && !v.is_empty() && u.iter().chain(v).all(|&g| (g as usize) < n))
}

/// Generator names of the form used throughout: `q<i>`.
pub(crate) fn q(i: Label) -> String {
    format!("q{i}")
}

pub(crate) fn machine_ok(m: &MinskyMachine, glasses: usize) -> Result<(), PresentationError> {
    if m.glasses() != glasses {
        return Err(PresentationError::GlassCount { expected: glasses, got: m.glasses() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::reference::*;

    #[test]
    fn file_format_round_trips() {
        for v in [Variant::S1, Variant::S2Right, Variant::S2Left, Variant::S1Prime, Variant::S2RightPrime, Variant::Amalgam] {
            let p = emit(v, &ex_a(), EmitOptions::default()).unwrap();
            let back = parse_presentation(&p.to_string()).unwrap();
            assert_eq!(back.to_string(), p.to_string());
            assert_eq!(back.relations(), p.relations());
            assert!(check_structure(&back));
        }
    }

    #[test]
    fn quasi_identity_shape() {
        let p = emit_s1_prime(&ex_c(), EmitOptions::default()).unwrap();
        let qi = emit_quasi_identity(&p, &Configuration::new(1, vec![0, 0])).unwrap();
        assert_eq!(qi.premises.len(), p.all_relations().len());
        assert!(qi.to_string().ends_with("C A1 q1 A2 = 0\n"));
        assert!(emit_quasi_identity(&p, &Configuration::new(2, vec![0, 0])).is_err());
    }

    #[test]
    fn rejects_unknown_generator() {
        let text = "presentation s1 x\ngenerators\na b\nrelations\na = c\n";
        assert!(parse_presentation(text).is_err());
    }
}
