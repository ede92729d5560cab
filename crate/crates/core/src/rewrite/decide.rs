use std::collections::{HashMap, VecDeque};
use std::fmt;

use super::{applications, check_word, Derivation, NormalForm, Normalizer, Orientation, RewriteError, Step};
use crate::machine::{
    equivalent_configs, sym_orbit, Configuration, Direction, Equivalence, MinskyMachine, Trace,
};
use crate::presentation::{Presentation, Variant, Word};
use crate::trace::{canonical, Gen};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equal(Derivation),
    Distinct(String),
    Unknown { fuel: u64 },
}

impl Verdict {
    pub fn derivation(&self) -> Option<&Derivation> {
        match self {
            Verdict::Equal(d) => Some(d),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Equal(d) => write!(f, "equal ({} steps)", d.len()),
            Verdict::Distinct(why) => write!(f, "distinct ({why})"),
            Verdict::Unknown { fuel } => write!(f, "unknown (fuel {fuel})"),
        }
    }
}

fn machine_backed(v: Variant) -> bool {
    matches!(v, Variant::S1 | Variant::S2Right | Variant::S2Left | Variant::S3Right | Variant::S5Right | Variant::Amalgam)
}

fn decode(p: &Presentation, m: &MinskyMachine, w: &[Gen]) -> Option<Configuration> {
    if !machine_backed(p.variant()) || p.command_relations().len() != m.commands().len() {
        return None;
    }
    p.decode_config(w).filter(|c| m.check_configuration(c).is_ok())
}

/// Relation steps realizing one machine step from `cur` to the word of `to`.
fn realize(
    p: &Presentation,
    rels: &[(Word, Word)],
    cur: &Word,
    command: usize,
    direction: Direction,
    to: &Configuration,
) -> Result<(Vec<Step>, Word), RewriteError> {
    let target = p.canonical(&p.config_word(to, None)?);
    let mut seq: Vec<(usize, Orientation)> = p.command_relations()[command].iter().map(|&r| (r, Orientation::L2R)).collect();
    if direction == Direction::Backward {
        seq.reverse();
        for s in &mut seq {
            s.1 = Orientation::R2L;
        }
    }
    // primed tables may list alternatives; everything else is a fixed sequence
    let chains: Vec<Vec<(usize, Orientation)>> = if p.variant().is_amalgam() { vec![seq] } else { seq.into_iter().map(|s| vec![s]).collect() };
    for chain in &chains {
        let mut steps = Vec::new();
        if let Some(end) = search_chain(p, rels, cur, chain, &target, &mut steps) {
            return Ok((steps, end));
        }
    }
    Err(RewriteError::Presentation(crate::presentation::PresentationError::Invalid(format!(
        "command {command} has no relation taking {} to {to}",
        p.show(cur)
    ))))
}

fn search_chain(
    p: &Presentation,
    rels: &[(Word, Word)],
    cur: &Word,
    chain: &[(usize, Orientation)],
    target: &Word,
    steps: &mut Vec<Step>,
) -> Option<Word> {
    let Some(&(relation, orientation)) = chain.first() else {
        return (cur == target).then(|| cur.clone());
    };
    for (position, next) in applications(p, rels, relation, orientation, cur) {
        steps.push(Step { relation, position, orientation });
        if let Some(end) = search_chain(p, rels, &next, &chain[1..], target, steps) {
            return Some(end);
        }
        steps.pop();
    }
    None
}

fn trace_steps(p: &Presentation, rels: &[(Word, Word)], t: &Trace) -> Result<(Vec<Step>, Word), RewriteError> {
    let mut cur = p.canonical(&p.config_word(&t.start, None)?);
    let mut out = Vec::new();
    for s in &t.steps {
        let (steps, next) = realize(p, rels, &cur, s.command, s.direction, &s.to)?;
        out.extend(steps);
        cur = next;
    }
    Ok((out, cur))
}

/// Index of `q0 = 0` and the step applying it to `w`.
fn zero_step(p: &Presentation, rels: &[(Word, Word)], w: &Word) -> Option<Step> {
    let z = p.zero()?;
    let q0 = p.gen("q0")?;
    let relation = rels.iter().position(|(u, v)| *u == [q0] && *v == [z])?;
    let position = w.iter().position(|&g| g == q0)?;
    Some(Step { relation, position, orientation: Orientation::L2R })
}

enum ZeroStatus {
    Zero(Trace),
    NonZero,
    Open,
}

fn zero_status(m: &MinskyMachine, c: &Configuration, fuel: u64) -> ZeroStatus {
    let orbit = sym_orbit(m, c, fuel, None);
    match orbit.discovered().iter().find(|d| d.is_stop()) {
        Some(stop) => ZeroStatus::Zero(orbit.trace_to(stop).expect("discovered")),
        None if orbit.is_exhausted() => ZeroStatus::NonZero,
        None => ZeroStatus::Open,
    }
}

fn to_zero(p: &Presentation, rels: &[(Word, Word)], t: &Trace) -> Result<Vec<Step>, RewriteError> {
    let (mut steps, end) = trace_steps(p, rels, t)?;
    let z = zero_step(p, rels, &end).ok_or_else(|| {
        RewriteError::Presentation(crate::presentation::PresentationError::Invalid("no q0 = 0 relation".into()))
    })?;
    steps.push(z);
    Ok(steps)
}

fn prefix(t: &Trace, k: usize) -> Trace {
    Trace { start: t.start.clone(), steps: t.steps[..k].to_vec() }
}

fn by_machine(
    p: &Presentation,
    m: &MinskyMachine,
    rels: &[(Word, Word)],
    cu: Option<Configuration>,
    cv: Option<Configuration>,
    u_zero: bool,
    v_zero: bool,
    fuel: u64,
) -> Result<Option<Verdict>, RewriteError> {
    let has_zero = !p.variant().is_amalgam();
    let status = |c: &Configuration| if has_zero { zero_status(m, c, fuel) } else { ZeroStatus::NonZero };
    match (cu, cv) {
        (Some(cu), Some(cv)) => {
            let eq = equivalent_configs(m, &cu, &cv, fuel);
            if let Equivalence::Equivalent(t) = &eq {
                let inner_stop = t.steps.iter().take(t.steps.len().saturating_sub(1)).position(|s| s.to.is_stop());
                match inner_stop {
                    None => {
                        let (u_side, _) = trace_steps(p, rels, t)?;
                        return Ok(Some(Verdict::Equal(Derivation { u_side, v_side: Vec::new() })));
                    }
                    Some(k) => {
                        let back = t.reversed();
                        let last = t.steps.iter().rposition(|s| s.to.is_stop()).expect("has a stop");
                        let u_side = to_zero(p, rels, &prefix(t, k + 1))?;
                        let v_side = to_zero(p, rels, &prefix(&back, t.steps.len() - 1 - last))?;
                        return Ok(Some(Verdict::Equal(Derivation { u_side, v_side })));
                    }
                }
            }
            let su = status(&cu);
            let sv = status(&cv);
            Ok(Some(match (su, sv) {
                (ZeroStatus::Zero(tu), ZeroStatus::Zero(tv)) => {
                    Verdict::Equal(Derivation { u_side: to_zero(p, rels, &tu)?, v_side: to_zero(p, rels, &tv)? })
                }
                (ZeroStatus::Zero(_), ZeroStatus::NonZero) | (ZeroStatus::NonZero, ZeroStatus::Zero(_)) => {
                    Verdict::Distinct("exactly one configuration is equivalent to a stop configuration".into())
                }
                (ZeroStatus::NonZero, _) | (_, ZeroStatus::NonZero) if eq == Equivalence::NotEquivalent => {
                    Verdict::Distinct("configurations are not equivalent and one word is nonzero".into())
                }
                _ => Verdict::Unknown { fuel },
            }))
        }
        (Some(c), None) | (None, Some(c)) if has_zero && (u_zero || v_zero) => {
            let config_on_u = !u_zero;
            Ok(Some(match status(&c) {
                ZeroStatus::Zero(t) => {
                    let steps = to_zero(p, rels, &t)?;
                    let d = if config_on_u {
                        Derivation { u_side: steps, v_side: Vec::new() }
                    } else {
                        Derivation { u_side: Vec::new(), v_side: steps }
                    };
                    Verdict::Equal(d)
                }
                ZeroStatus::NonZero => Verdict::Distinct("the configuration orbit closes without a stop configuration".into()),
                ZeroStatus::Open => Verdict::Unknown { fuel },
            }))
        }
        _ => Ok(None),
    }
}

fn is_counter_relation(p: &Presentation, (u, v): &(Word, Word)) -> bool {
    let counter: Vec<Gen> = ["c", "c'", "e"].iter().filter_map(|n| p.gen(n)).collect();
    p.variant().is_primed() && u.iter().chain(v).all(|g| counter.contains(g))
}

struct Side {
    parent: HashMap<NormalForm, Option<(NormalForm, Step)>>,
    queue: VecDeque<NormalForm>,
}

impl Side {
    fn new(start: NormalForm) -> Self {
        let mut parent = HashMap::new();
        parent.insert(start.clone(), None);
        Side { parent, queue: VecDeque::from([start]) }
    }

    fn path(&self, mut at: NormalForm) -> Vec<Step> {
        let mut out = Vec::new();
        while let Some(Some((prev, step))) = self.parent.get(&at) {
            out.push(*step);
            at = prev.clone();
        }
        out.reverse();
        out
    }
}

/// Bidirectional BFS over normal forms; commuting and counter relations are absorbed
/// by normalization and zero words are not expanded.
fn by_search(n: &Normalizer, rels: &[(Word, Word)], nu: NormalForm, nv: NormalForm, fuel: u64) -> Result<Verdict, RewriteError> {
    let p = n.presentation();
    let usable: Vec<usize> = (0..p.relations().len())
        .filter(|&i| !p.is_commuting_relation(&rels[i].0, &rels[i].1) && !is_counter_relation(p, &rels[i]))
        .collect();
    let zero_rel = |i: usize| p.zero().is_some_and(|z| rels[i].1 == [z]);
    let mut sides = [Side::new(nu), Side::new(nv)];
    let mut spent = 0u64;
    loop {
        let turn = match (sides[0].queue.len(), sides[1].queue.len()) {
            (0, _) => 1,
            (_, 0) => 0,
            (a, b) => usize::from(a > b),
        };
        for s in 0..2 {
            if sides[s].queue.is_empty() && !sides[s].parent.contains_key(&NormalForm::Zero) {
                return Ok(Verdict::Distinct("the equality class of one word closed without meeting the other".into()));
            }
        }
        if sides[0].queue.is_empty() && sides[1].queue.is_empty() || spent >= fuel {
            return Ok(Verdict::Unknown { fuel });
        }
        let Some(node) = sides[turn].queue.pop_front() else { continue };
        spent += 1;
        let NormalForm::Word(w) = &node else { continue };
        for &i in &usable {
            for o in [Orientation::L2R, Orientation::R2L] {
                if o == Orientation::R2L && zero_rel(i) {
                    continue;
                }
                for (position, next) in applications(p, rels, i, o, w) {
                    let nf = n.run(&next)?;
                    if sides[turn].parent.contains_key(&nf) {
                        continue;
                    }
                    let step = Step { relation: i, position, orientation: o };
                    sides[turn].parent.insert(nf.clone(), Some((node.clone(), step)));
                    if sides[1 - turn].parent.contains_key(&nf) {
                        let a = sides[0].path(nf.clone());
                        let b = sides[1].path(nf);
                        return Ok(Verdict::Equal(Derivation { u_side: a, v_side: b }));
                    }
                    if !nf.is_zero() {
                        sides[turn].queue.push_back(nf);
                    }
                }
            }
        }
    }
}

/// Bounded decision of `u = v` in `p`, emitted from `m`.
///
/// Configuration words go through machine equivalence; anything else falls back to
/// bidirectional relation search. Every `Equal` carries a replayable derivation.
pub fn decide_equal(p: &Presentation, m: &MinskyMachine, u: &[Gen], v: &[Gen], fuel: u64) -> Result<Verdict, RewriteError> {
    check_word(p, u)?;
    check_word(p, v)?;
    if canonical(p.commutation(), u) == canonical(p.commutation(), v) {
        return Ok(Verdict::Equal(Derivation::default()));
    }
    let n = Normalizer::new(p);
    let rels = p.all_relations();
    let nu = n.run(u)?;
    let nv = n.run(v)?;
    let (cu, cv) = (decode(p, m, u), decode(p, m, v));
    if cu.is_some() || cv.is_some() {
        if let Some(verdict) = by_machine(p, m, &rels, cu, cv, nu.is_zero(), nv.is_zero(), fuel)? {
            return Ok(verdict);
        }
    }
    if nu == nv {
        return Ok(Verdict::Equal(Derivation::default()));
    }
    by_search(&n, &rels, nu, nv, fuel)
}

/// Length of the derivation found by `decide_equal`: an upper bound on the relation cost.
pub fn derivation_length(p: &Presentation, m: &MinskyMachine, u: &[Gen], v: &[Gen], fuel: u64) -> Result<Option<usize>, RewriteError> {
    Ok(decide_equal(p, m, u, v, fuel)?.derivation().map(Derivation::len))
}
