use std::collections::{BTreeSet, HashSet};

use super::{machine_ok, q, EmitOptions, Presentation, PresentationError, Variant, Word};
use crate::machine::{Action, ClassicForm, Condition, Configuration, Label, MinskyMachine};
use crate::trace::{two_letter_factors, Commutation, Gen};

/// Table rows in print order; the primed tables split Sub(1) into two rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Row {
    Add1,
    Add2,
    Tick,
    Sub1,
    Sub2,
    Zero1,
    Zero2,
}

fn rows_of(form: ClassicForm, primed: bool) -> Vec<Row> {
    match form {
        ClassicForm::Add(1) => vec![Row::Add1],
        ClassicForm::Add(_) => vec![Row::Add2],
        ClassicForm::Sub(1) if primed => vec![Row::Tick, Row::Sub1],
        ClassicForm::Sub(1) => vec![Row::Sub1],
        ClassicForm::Sub(_) => vec![Row::Sub2],
        ClassicForm::ZeroJump(1) => vec![Row::Zero1],
        ClassicForm::ZeroJump(_) => vec![Row::Zero2],
    }
}

struct Names {
    names: Vec<String>,
}

impl Names {
    fn new(names: Vec<String>) -> Self {
        Names { names }
    }

    fn id(&self, s: &str) -> Gen {
        self.names.iter().position(|n| n == s).unwrap_or_else(|| panic!("generator {s} declared")) as Gen
    }

    fn word(&self, ws: &[&str]) -> Word {
        ws.iter().map(|s| self.id(s)).collect()
    }
}

fn glass_generators(k: usize) -> Vec<String> {
    (1..=k).flat_map(|g| [format!("a{g}"), format!("A{g}")]).collect()
}

fn generator_list(m: &MinskyMachine, glasses: usize, primed: bool) -> Vec<String> {
    let mut g = glass_generators(glasses);
    g.extend((0..=m.max_label()).map(q));
    if primed {
        g.extend(["c", "c'", "e", "C"].map(String::from));
    }
    g.push("0".into());
    g
}

fn classic_forms(m: &MinskyMachine) -> Result<Vec<ClassicForm>, PresentationError> {
    m.commands().iter().map(|c| c.classic_form().ok_or(PresentationError::NotClassic(c.label))).collect()
}

/// Minsky relation for one table row. `right` selects the →S₂ column.
fn row_relation(row: Row, i: Label, j: Label, right: bool, opts: EmitOptions) -> (Vec<String>, Vec<String>) {
    let (qi, qj) = (q(i), q(j));
    let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    match (row, right) {
        (Row::Add1, false) => (s(&[&qi]), s(&["a1", &qj])),
        (Row::Add1, true) => (s(&[&qi]), s(&[&qj, "a1"])),
        (Row::Add2, _) => (s(&[&qi]), s(&[&qj, "a2"])),
        (Row::Tick, false) if opts.literal => (s(&["A1", "a1", "q1"]), s(&["c", "A1", "q1"])),
        (Row::Tick, false) => (s(&["A1", "a1", &qi]), s(&["c", "A1", &qj])),
        (Row::Tick, true) if opts.literal => (s(&["q1", "a1", "A1"]), s(&["q1", "A1", "c"])),
        (Row::Tick, true) => (s(&[&qi, "a1", "A1"]), s(&[&qj, "A1", "c"])),
        (Row::Sub1, false) => (s(&["a1", &qi]), s(&[&qj])),
        (Row::Sub1, true) => (s(&[&qi, "a1"]), s(&[&qj])),
        (Row::Sub2, _) => (s(&[&qi, "a2"]), s(&[&qj])),
        (Row::Zero1, false) => (s(&["A1", &qi]), s(&["A1", &qj])),
        (Row::Zero1, true) => (s(&[&qi, "A1"]), s(&[&qj, "A1"])),
        (Row::Zero2, false) => (s(&[&qi, "A2"]), s(&[&qj, "A2"])),
        (Row::Zero2, true) if opts.literal => (s(&[&qi, "A2"]), s(&[&qi, "A2"])),
        (Row::Zero2, true) => (s(&[&qi, "A2"]), s(&[&qj, "A2"])),
    }
}

/// Configuration word of `c` under `variant`; `counter` is the cᵏ exponent of primed variants.
pub fn config_word(variant: Variant, c: &Configuration, counter: Option<u64>) -> Result<Vec<String>, PresentationError> {
    let mismatch = || PresentationError::ConfigMismatch { variant, config: c.clone() };
    if c.glasses.len() != variant.glasses() || (counter.is_some() && !variant.is_primed()) {
        return Err(mismatch());
    }
    let rep = |s: &str, n: u64| std::iter::repeat_n(s.to_string(), n as usize);
    let k = counter.unwrap_or(0);
    let (m, n) = (c.glasses[0], *c.glasses.get(1).unwrap_or(&0));
    let mut w: Vec<String> = Vec::new();
    match variant {
        Variant::S1 | Variant::S1Prime => {
            if variant == Variant::S1Prime {
                w.push("C".into());
                w.extend(rep("c", k));
            }
            w.push("A1".into());
            w.extend(rep("a1", m));
            w.push(q(c.label));
            w.extend(rep("a2", n));
            w.push("A2".into());
        }
        Variant::S2Right | Variant::S2Left | Variant::S2RightPrime | Variant::S3Right | Variant::S5Right => {
            w.push(q(c.label));
            for (g, &e) in c.glasses.iter().enumerate() {
                w.extend(rep(&format!("a{}", g + 1), e));
                w.push(format!("A{}", g + 1));
            }
            if variant == Variant::S2RightPrime {
                w.extend(rep("c", k));
                w.push("C".into());
            }
            if variant == Variant::S2Left {
                w.reverse();
            }
        }
        Variant::Amalgam | Variant::AmalgamD | Variant::AmalgamE => {
            w.push("A".into());
            for _ in 0..m {
                w.extend(["a".to_string(), "b".to_string()]);
            }
            w.push(q(c.label));
            for _ in 0..n {
                w.extend(["abar".to_string(), "bbar".to_string()]);
            }
            w.push("B".into());
        }
    }
    Ok(w)
}

/// Every 2-letter word over the non-zero generators that is not a factor of any word in `words`.
fn forbidden_pairs(gens: &[String], zero: Gen, comm: &Commutation, words: &[Word]) -> Vec<Word> {
    let mut seen: HashSet<(Gen, Gen)> = HashSet::new();
    for w in words {
        seen.extend(two_letter_factors(comm, w));
    }
    let n = gens.len() as Gen;
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != zero && b != zero && !seen.contains(&(a, b)) {
                out.push(vec![a, b]);
            }
        }
    }
    out
}

/// Configuration words with every glass ≤ 2 over `labels`; primed variants also vary
/// the counter segment over all words of length ≤ 3 in c, c′, e.
fn sample_words(variant: Variant, names: &Names, labels: impl Iterator<Item = Label> + Clone) -> Vec<Word> {
    let glasses = variant.glasses();
    let mut vectors: Vec<Vec<u64>> = vec![Vec::new()];
    for _ in 0..glasses {
        vectors = vectors.into_iter().flat_map(|v| (0..=2).map(move |e| [v.clone(), vec![e]].concat())).collect();
    }
    let counters: Vec<Vec<&str>> = if variant.is_primed() {
        let mut all: Vec<Vec<&str>> = vec![Vec::new()];
        let mut layer: Vec<Vec<&str>> = vec![Vec::new()];
        for _ in 0..3 {
            layer = layer.into_iter().flat_map(|w| ["c", "c'", "e"].map(|x| [w.clone(), vec![x]].concat())).collect();
            all.extend(layer.iter().cloned());
        }
        all
    } else {
        vec![Vec::new()]
    };
    let mut out = Vec::new();
    for label in labels {
        for v in &vectors {
            let base = config_word(variant, &Configuration::new(label, v.clone()), variant.is_primed().then_some(0))
                .expect("sampled configurations fit the variant");
            for ctr in &counters {
                let mut w = base.clone();
                match variant {
                    Variant::S1Prime => {
                        w.splice(1..1, ctr.iter().map(|s| s.to_string()));
                    }
                    Variant::S2RightPrime => {
                        let at = w.len() - 1;
                        w.splice(at..at, ctr.iter().map(|s| s.to_string()));
                    }
                    _ => {}
                }
                out.push(w.iter().map(|s| names.id(s)).collect());
            }
        }
    }
    out
}

fn commuting_relations(pairs: &BTreeSet<(Gen, Gen)>) -> Vec<(Word, Word)> {
    pairs.iter().map(|&(a, b)| (vec![a, b], vec![b, a])).collect()
}

/// Shared assembly for the 2-glass table presentations.
fn emit_table(m: &MinskyMachine, variant: Variant, opts: EmitOptions) -> Result<Presentation, PresentationError> {
    machine_ok(m, 2)?;
    let forms = classic_forms(m)?;
    let primed = variant.is_primed();
    let right = variant != Variant::S1 && variant != Variant::S1Prime;
    let names = Names::new(generator_list(m, 2, primed));
    let zero = names.id("0");

    let mut tagged: Vec<(Row, Label, usize)> = Vec::new();
    for (idx, (cmd, form)) in m.commands().iter().zip(&forms).enumerate() {
        for row in rows_of(*form, primed) {
            tagged.push((row, cmd.label, idx));
        }
    }
    tagged.sort();
    let mut relations: Vec<(Word, Word)> = Vec::new();
    let mut command_relations = vec![Vec::new(); m.commands().len()];
    for (row, label, idx) in tagged {
        let (u, v) = row_relation(row, label, m.commands()[idx].next, right, opts);
        let u: Vec<&str> = u.iter().map(String::as_str).collect();
        let v: Vec<&str> = v.iter().map(String::as_str).collect();
        command_relations[idx].push(relations.len());
        relations.push((names.word(&u), names.word(&v)));
    }

    let mut commuting = BTreeSet::new();
    if right {
        for x in ["a1", "A1"] {
            for y in ["a2", "A2"] {
                let (a, b) = (names.id(x), names.id(y));
                commuting.insert((a.min(b), a.max(b)));
            }
        }
        if primed {
            for x in ["a1", "A1", "a2", "A2"] {
                for y in ["c", "c'", "e", "C"] {
                    let (a, b) = (names.id(x), names.id(y));
                    commuting.insert((a.min(b), a.max(b)));
                }
            }
        }
    }
    relations.extend(commuting_relations(&commuting));

    if primed {
        for (u, v) in [("c c'", "e"), ("c' c", "e"), ("e c", "c"), ("c e", "c"), ("e c'", "c'"), ("c' e", "c'")] {
            let u: Vec<&str> = u.split(' ').collect();
            relations.push((names.word(&u), names.word(&[v])));
        }
        for i in 0..=m.max_label() {
            let qi = q(i);
            let w = if right { names.word(&[&qi, "A1", "e", "C"]) } else { names.word(&["C", "e", "A1", &qi]) };
            relations.push((w, vec![zero]));
        }
    } else {
        relations.push((names.word(&["q0"]), vec![zero]));
    }

    let comm = Commutation::new(names.names.len(), commuting.iter().copied());
    let labels = if primed { 0..=m.max_label() } else { 1..=m.max_label() };
    let samples = sample_words(variant, &names, labels);
    let forbidden = forbidden_pairs(&names.names, zero, &comm, &samples);

    Ok(Presentation::new(m.name(), variant, names.names, Some(zero), commuting, relations, forbidden)?
        .with_command_relations(command_relations))
}

pub fn emit_s1(m: &MinskyMachine, opts: EmitOptions) -> Result<Presentation, PresentationError> {
    emit_table(m, Variant::S1, opts)
}

pub fn emit_s2_right(m: &MinskyMachine, opts: EmitOptions) -> Result<Presentation, PresentationError> {
    emit_table(m, Variant::S2Right, opts)
}

/// The anti-isomorphic copy of →S₂: every word reversed.
pub fn emit_s2_left(m: &MinskyMachine, opts: EmitOptions) -> Result<Presentation, PresentationError> {
    Ok(emit_s2_right(m, opts)?.reversed(Variant::S2Left))
}

pub fn emit_s1_prime(m: &MinskyMachine, opts: EmitOptions) -> Result<Presentation, PresentationError> {
    emit_table(m, Variant::S1Prime, opts)
}

pub fn emit_s2_prime(m: &MinskyMachine, opts: EmitOptions) -> Result<Presentation, PresentationError> {
    emit_table(m, Variant::S2RightPrime, opts)
}

/// →S₃ / →S₅: one relation per command, q_i followed by the per-glass letters of
/// the →S₂ column in glass order.
pub fn emit_sk_right(m: &MinskyMachine) -> Result<Presentation, PresentationError> {
    let variant = match m.glasses() {
        3 => Variant::S3Right,
        5 => Variant::S5Right,
        got => return Err(PresentationError::GlassCount { expected: 5, got }),
    };
    let k = m.glasses();
    let names = Names::new(generator_list(m, k, false));
    let zero = names.id("0");
    let mut relations = Vec::new();
    let mut command_relations = Vec::new();
    for cmd in m.commands() {
        let mut lhs = vec![names.id(&q(cmd.label))];
        let mut rhs = vec![names.id(&q(cmd.next))];
        for g in 1..=k {
            let (a, big_a) = (names.id(&format!("a{g}")), names.id(&format!("A{g}")));
            let before: Vec<Gen> = match cmd.guard.test_on(g) {
                Some(Condition::Zero) => vec![big_a],
                Some(Condition::Positive) => vec![a],
                None => Vec::new(),
            };
            let mut after = before.clone();
            match cmd.effect.action_on(g) {
                Some(Action::Dec(_)) => {
                    after.remove(0);
                }
                Some(Action::Inc(_)) => after.insert(0, a),
                None => {}
            }
            lhs.extend(before);
            rhs.extend(after);
        }
        command_relations.push(vec![relations.len()]);
        relations.push((lhs, rhs));
    }
    let mut commuting = BTreeSet::new();
    for g in 1..=k {
        for h in g + 1..=k {
            for x in [format!("a{g}"), format!("A{g}")] {
                for y in [format!("a{h}"), format!("A{h}")] {
                    let (a, b) = (names.id(&x), names.id(&y));
                    commuting.insert((a.min(b), a.max(b)));
                }
            }
        }
    }
    relations.extend(commuting_relations(&commuting));
    relations.push((vec![names.id("q0")], vec![zero]));
    let comm = Commutation::new(names.names.len(), commuting.iter().copied());
    let samples = sample_words(variant, &names, 1..=m.max_label());
    let forbidden = forbidden_pairs(&names.names, zero, &comm, &samples);
    Ok(Presentation::new(m.name(), variant, names.names, Some(zero), commuting, relations, forbidden)?
        .with_command_relations(command_relations))
}

/// Emits `variant` for `m`. Amalgam variants return the union presentation R (or D, E).
pub fn emit(variant: Variant, m: &MinskyMachine, opts: EmitOptions) -> Result<Presentation, PresentationError> {
    match variant {
        Variant::S1 => emit_s1(m, opts),
        Variant::S2Right => emit_s2_right(m, opts),
        Variant::S2Left => emit_s2_left(m, opts),
        Variant::S1Prime => emit_s1_prime(m, opts),
        Variant::S2RightPrime => emit_s2_prime(m, opts),
        Variant::S3Right | Variant::S5Right => {
            machine_ok(m, variant.glasses())?;
            emit_sk_right(m)
        }
        Variant::AmalgamD => Ok(super::emit_amalgam(m, opts)?.d),
        Variant::AmalgamE => Ok(super::emit_amalgam(m, opts)?.e),
        Variant::Amalgam => Ok(super::emit_amalgam(m, opts)?.r),
    }
}

/// The auxiliary zero words of a variant, as generator-name pairs.
pub fn forbidden_factors(variant: Variant, m: &MinskyMachine) -> Result<Vec<[String; 2]>, PresentationError> {
    let p = emit(variant, m, EmitOptions::default())?;
    Ok(p.forbidden()
        .iter()
        .filter(|w| w.len() == 2)
        .map(|w| [p.generators()[w[0] as usize].clone(), p.generators()[w[1] as usize].clone()])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::reference::*;

    fn rel(p: &Presentation, u: &str, v: &str) -> bool {
        let (u, v) = (p.parse_word(u).unwrap(), p.parse_word(v).unwrap());
        p.relations().iter().any(|r| *r == (u.clone(), v.clone()))
    }

    fn forbidden(p: &Presentation, w: &str) -> bool {
        let w = p.parse_word(w).unwrap();
        p.forbidden().contains(&w)
    }

    #[test]
    fn s1_rows() {
        let p = emit_s1(&ex_a(), EmitOptions::default()).unwrap();
        assert!(rel(&p, "q3", "q3 a2"));
        assert!(rel(&p, "a1 q1", "q2"));
        assert!(rel(&p, "A1 q1", "A1 q0"));
        assert!(rel(&p, "q0", "0"));
        assert!(forbidden(&p, "a1 A1"));
        assert!(forbidden(&p, "q1 q2"));
        assert!(!forbidden(&p, "A1 a1"));
    }

    #[test]
    fn s2_rows_and_commuting() {
        let p = emit_s2_right(&ex_a(), EmitOptions::default()).unwrap();
        assert!(rel(&p, "q1 a1", "q2"));
        assert!(rel(&p, "q2 A1", "q3 A1"));
        assert!(!forbidden(&p, "a2 a1"));
        assert!(forbidden(&p, "A2 q1"));
        assert!(!forbidden(&p, "q1 a2"));
        let l = emit_s2_left(&ex_a(), EmitOptions::default()).unwrap();
        assert!(rel(&l, "a1 q1", "q2"));
    }

    #[test]
    fn literal_zero2_row() {
        let m = crate::machine::parse_machine("machine z glasses=2\n1: if g2=0 goto 2\n2: inc g1 goto 0\n").unwrap();
        let fixed = emit_s2_right(&m, EmitOptions::default()).unwrap();
        assert!(rel(&fixed, "q1 A2", "q2 A2"));
        let lit = emit_s2_right(&m, EmitOptions { literal: true }).unwrap();
        assert!(rel(&lit, "q1 A2", "q1 A2"));
    }

    #[test]
    fn primed_rows() {
        let m = crate::machine::parse_machine(
            "machine t glasses=2\n1: inc g1 goto 2\n2: if g1>0 dec g1 goto 1\n2: if g1=0 goto 0\n",
        )
        .unwrap();
        let p = emit_s1_prime(&m, EmitOptions::default()).unwrap();
        assert!(rel(&p, "A1 a1 q2", "c A1 q1"));
        assert!(rel(&p, "a1 q2", "q1"));
        assert!(rel(&p, "c c'", "e"));
        assert!(rel(&p, "c' e", "c'"));
        assert!(rel(&p, "C e A1 q0", "0"));
        assert!(!rel(&p, "q0", "0"));
        let r = emit_s2_prime(&m, EmitOptions::default()).unwrap();
        assert!(rel(&r, "q2 a1 A1", "q1 A1 c"));
        assert!(rel(&r, "q1 A1 e C", "0"));
        let lit = emit_s1_prime(&m, EmitOptions { literal: true }).unwrap();
        assert!(rel(&lit, "A1 a1 q1", "c A1 q1"));
    }

    #[test]
    fn ex_c_primed_has_no_tick() {
        let p = emit_s1_prime(&ex_c(), EmitOptions::default()).unwrap();
        let c = p.gen("c").unwrap();
        let ticks = p.relations().iter().filter(|(u, v)| v.contains(&c) && u.iter().any(|&g| p.generators()[g as usize].starts_with('q'))).count();
        assert_eq!(ticks, 0);
    }

    #[test]
    fn config_words() {
        let c = Configuration::new(1, vec![2, 0]);
        assert_eq!(config_word(Variant::S1, &c, None).unwrap().join(" "), "A1 a1 a1 q1 A2");
        assert_eq!(config_word(Variant::S1Prime, &c, Some(0)).unwrap().join(" "), "C A1 a1 a1 q1 A2");
        assert_eq!(
            config_word(Variant::Amalgam, &Configuration::new(2, vec![1, 2]), None).unwrap().join(" "),
            "A a b q2 abar bbar abar bbar B"
        );
        assert_eq!(
            config_word(Variant::S3Right, &Configuration::new(1, vec![1, 0, 2]), None).unwrap().join(" "),
            "q1 a1 A1 A2 a3 a3 A3"
        );
        assert!(config_word(Variant::S1, &c, Some(1)).is_err());
    }

    #[test]
    fn sk_depth_relations() {
        let d = crate::machine::attach_depth_glasses(&ex_a3()).unwrap();
        let p = emit_sk_right(&d).unwrap();
        assert!(rel(&p, "q1", "q1 a4 a5"));
        assert!(rel(&p, "q1 A4 A5", "q0 A4 A5"));
        assert!(rel(&p, "q1 a1 A5", "q2 a4 A5"));
        assert_eq!(p.command_relations().len(), d.commands().len());
    }

    #[test]
    fn decode_round_trip() {
        let p = emit_s2_right(&ex_a(), EmitOptions::default()).unwrap();
        let c = Configuration::new(2, vec![1, 3]);
        let w = p.config_word(&c, None).unwrap();
        assert_eq!(p.decode_config(&w), Some(c.clone()));
        let shuffled = p.parse_word("q2 a2 a1 a2 A1 a2 A2").unwrap();
        assert_eq!(p.decode_config(&shuffled), Some(c));
        assert_eq!(p.decode_config(&p.parse_word("q2 A1 a1 A2").unwrap()), None);
    }
}
