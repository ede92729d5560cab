use std::collections::{BTreeSet, HashSet};

use super::{config_word, machine_ok, q, EmitOptions, Presentation, PresentationError, Variant, Word};
use crate::machine::{ClassicForm, Configuration, Label, MinskyMachine};
use crate::trace::Gen;

/// The two finite factors, their common generators and the amalgamated product.
#[derive(Debug, Clone)]
pub struct Amalgam {
    pub d: Presentation,
    pub e: Presentation,
    /// Generator names shared by D and E, the zero included.
    pub u: Vec<String>,
    pub r: Presentation,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    D,
    E,
}

fn u(i: Label, j: u32) -> String {
    format!("u{i}_{j}")
}

fn p(i: Label) -> String {
    format!("p{i}")
}

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// The three relations simulating one command; `mid` is the index of the second u.
fn command_rows(form: ClassicForm, i: Label, j: Label, mid: u32, opts: EmitOptions) -> [(Side, Vec<String>, Vec<String>); 3] {
    let (qi, qj, pi) = (q(i), q(j), p(i));
    let (u1, u2) = (u(i, 1), u(i, mid));
    match form {
        ClassicForm::Add(1) => [
            (Side::D, strs(&[&qi]), strs(&["a", &u1, &pi])),
            (Side::E, strs(&[&u1]), strs(&["b", &u2])),
            (Side::D, strs(&[&u2, &pi]), strs(&[&qj])),
        ],
        ClassicForm::Add(_) => [
            (Side::D, strs(&[&qi]), strs(&[&pi, &u1, "bbar"])),
            (Side::E, strs(&[&u1]), strs(&[&u2, "abar"])),
            (Side::D, strs(&[&pi, &u2]), strs(&[&qj])),
        ],
        ClassicForm::Sub(1) => [
            (Side::D, strs(&[&qi]), strs(&[&u1, &pi])),
            (Side::E, strs(&["b", &u1]), strs(&[&u2])),
            (Side::D, strs(&["a", &u2, &pi]), strs(&[&qj])),
        ],
        ClassicForm::Sub(_) => [
            (Side::D, strs(&[&qi]), strs(&[&pi, &u1])),
            (Side::E, strs(&[&u1, "abar"]), strs(&[&u2])),
            (Side::D, strs(&[&pi, &u2, "bbar"]), strs(&[&qj])),
        ],
        ClassicForm::ZeroJump(1) => {
            let u2 = if opts.literal { u(1, 2) } else { u2 };
            [
                (Side::D, strs(&[&qi]), strs(&[&u1, &pi])),
                (Side::E, strs(&["A", &u1]), strs(&["A", &u2])),
                (Side::D, strs(&[&u2, &pi]), strs(&[&qj])),
            ]
        }
        ClassicForm::ZeroJump(_) => [
            (Side::D, strs(&[&qi]), strs(&[&pi, &u1])),
            (Side::E, strs(&[&u1, "B"]), strs(&[&u2, "B"])),
            (Side::D, strs(&[&pi, &u2]), strs(&[&qj])),
        ],
    }
}

fn factors_into(w: &[String], out: &mut HashSet<Vec<String>>) {
    for i in 0..w.len() {
        for j in i + 1..=w.len() {
            out.insert(w[i..j].to_vec());
        }
    }
}

/// Maximal runs of `w` whose letters all lie in `alphabet`.
fn runs<'a>(w: &'a [String], alphabet: &HashSet<&str>) -> Vec<&'a [String]> {
    w.split(|x| !alphabet.contains(x.as_str())).filter(|r| !r.is_empty()).collect()
}

/// Minimal words over `alphabet` that are not in the factor-closed set `f`.
fn antidictionary(f: &HashSet<Vec<String>>, alphabet: &[String]) -> BTreeSet<Vec<String>> {
    let mut out = BTreeSet::new();
    let mut bases: Vec<Vec<String>> = vec![Vec::new()];
    bases.extend(f.iter().cloned());
    for base in &bases {
        for x in alphabet {
            let mut w = base.clone();
            w.push(x.clone());
            if !f.contains(&w) && (w.len() == 1 || f.contains(&w[1..].to_vec())) {
                out.insert(w);
            }
        }
    }
    out
}

/// D(M), E(M) and their amalgamated product R for a classic 2-glass machine.
///
/// Zero relations of each factor are the minimal words over its generators that are not
/// factors of a Minsky relation side or of a maximal single-factor run inside a
/// configuration word W(i;m,n), m,n ≤ 2.
pub fn emit_amalgam(m: &MinskyMachine, opts: EmitOptions) -> Result<Amalgam, PresentationError> {
    machine_ok(m, 2)?;
    let n = m.max_label();
    let forms: Vec<ClassicForm> = m
        .commands()
        .iter()
        .map(|c| c.classic_form().ok_or(PresentationError::NotClassic(c.label)))
        .collect::<Result<_, _>>()?;

    // A Sub and a zero test on the same glass at one label share their first relation,
    // so the Sub continues through a third u.
    let mid = |idx: usize| -> u32 {
        let c = &m.commands()[idx];
        let clash = match forms[idx] {
            ClassicForm::Sub(g) => m
                .commands_at(c.label)
                .any(|(k, _)| forms[k] == ClassicForm::ZeroJump(g)),
            _ => false,
        };
        if clash { 3 } else { 2 }
    };

    let mut generators = strs(&["A", "a", "b", "abar", "bbar", "B"]);
    generators.extend((0..=n).map(q));
    generators.extend((0..=n).map(p));
    let mut us: Vec<String> = Vec::new();
    for i in 0..=n {
        us.push(u(i, 1));
        us.push(u(i, 2));
        if m.commands_at(i).any(|(k, _)| mid(k) == 3) {
            us.push(u(i, 3));
        }
    }
    generators.extend(us.iter().cloned());
    generators.push("0".into());
    let id = |s: &str| generators.iter().position(|g| g == s).expect("declared") as Gen;

    let mut shared: Vec<String> = (0..=n.min(1)).map(q).collect();
    shared.extend(us.iter().cloned());
    let shared_set: HashSet<&str> = shared.iter().map(String::as_str).collect();
    let x: Vec<String> = generators
        .iter()
        .filter(|g| ["a", "bbar"].contains(&g.as_str()) || g.starts_with('q') || g.starts_with('p') || shared_set.contains(g.as_str()))
        .cloned()
        .collect();
    let y: Vec<String> = generators
        .iter()
        .filter(|g| ["A", "b", "abar", "B"].contains(&g.as_str()) || shared_set.contains(g.as_str()))
        .cloned()
        .collect();

    let mut order: Vec<(Label, usize)> = m.commands().iter().enumerate().map(|(k, c)| (c.label, k)).collect();
    order.sort();
    let mut d_rel: Vec<(Vec<String>, Vec<String>)> = Vec::new();
    let mut e_rel: Vec<(Vec<String>, Vec<String>)> = Vec::new();
    let mut placed: Vec<Vec<(Side, usize)>> = vec![Vec::new(); m.commands().len()];
    for &(label, k) in &order {
        for (side, lhs, rhs) in command_rows(forms[k], label, m.commands()[k].next, mid(k), opts) {
            let list = if side == Side::D { &mut d_rel } else { &mut e_rel };
            let at = match list.iter().position(|r| *r == (lhs.clone(), rhs.clone())) {
                Some(at) => at,
                None => {
                    list.push((lhs, rhs));
                    list.len() - 1
                }
            };
            placed[k].push((side, at));
        }
    }

    let mut samples = Vec::new();
    for i in 0..=n {
        for a in 0..=2 {
            for b in 0..=2 {
                samples.push(config_word(Variant::Amalgam, &Configuration::new(i, vec![a, b]), None)?);
            }
        }
    }
    let zero_words = |rels: &[(Vec<String>, Vec<String>)], alphabet: &[String]| {
        let set: HashSet<&str> = alphabet.iter().map(String::as_str).collect();
        let mut f = HashSet::new();
        for (l, r) in rels {
            factors_into(l, &mut f);
            factors_into(r, &mut f);
        }
        for w in &samples {
            for run in runs(w, &set) {
                factors_into(run, &mut f);
            }
        }
        let letters: Vec<String> = alphabet.iter().filter(|g| *g != "0").cloned().collect();
        antidictionary(&f, &letters)
    };
    let d_zero = zero_words(&d_rel, &x);
    let e_zero = zero_words(&e_rel, &y);

    let zero = id("0");
    let to_word = |w: &[String]| -> Word { w.iter().map(|s| id(s)).collect() };
    let build = |variant: Variant, gens: &[String], rels: &[(Vec<String>, Vec<String>)], zeros: &BTreeSet<Vec<String>>| {
        let local = |w: &[String]| -> Word {
            w.iter().map(|s| gens.iter().position(|g| g == s).expect("declared") as Gen).collect()
        };
        let relations = rels.iter().map(|(l, r)| (local(l), local(r))).collect();
        let forbidden = zeros.iter().map(|w| local(w)).collect();
        let z = gens.iter().position(|g| g == "0").map(|z| z as Gen);
        Presentation::new(m.name(), variant, gens.to_vec(), z, BTreeSet::new(), relations, forbidden)
    };
    let d = build(Variant::AmalgamD, &x, &d_rel, &d_zero)?;
    let e = build(Variant::AmalgamE, &y, &e_rel, &e_zero)?;

    let relations: Vec<(Word, Word)> =
        d_rel.iter().chain(&e_rel).map(|(l, r)| (to_word(l), to_word(r))).collect();
    let mut forbidden: Vec<Word> = d_zero.iter().chain(&e_zero).map(|w| to_word(w)).collect();
    forbidden.sort();
    forbidden.dedup();
    let map = placed
        .iter()
        .map(|ps| ps.iter().map(|&(side, at)| if side == Side::D { at } else { d_rel.len() + at }).collect())
        .collect();
    let r = Presentation::new(m.name(), Variant::Amalgam, generators.clone(), Some(zero), BTreeSet::new(), relations, forbidden)?
        .with_command_relations(map);

    let mut u_names = vec!["0".to_string()];
    u_names.extend(shared);
    Ok(Amalgam { d, e, u: u_names, r })
}
