use std::collections::{HashMap, VecDeque};

use super::exec::{Direction, Trace, TraceStep};
use super::{Configuration, MinskyMachine};

/// Result of a bounded breadth-first exploration of a Sym(M)-orbit.
#[derive(Debug, Clone)]
pub struct SymOrbit {
    start: Configuration,
    parent: HashMap<Configuration, Option<(Configuration, usize, Direction)>>,
    order: Vec<Configuration>,
    exhausted: bool,
}

impl SymOrbit {
    pub fn start(&self) -> &Configuration {
        &self.start
    }

    /// Configurations discovered so far, in discovery order.
    pub fn discovered(&self) -> &[Configuration] {
        &self.order
    }

    pub fn contains(&self, c: &Configuration) -> bool {
        self.parent.contains_key(c)
    }

    /// True when the whole orbit was enumerated within fuel.
    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    /// A Sym(M) computation from the start to `c`, if `c` was discovered.
    pub fn trace_to(&self, c: &Configuration) -> Option<Trace> {
        let mut rev = Vec::new();
        let mut at = c.clone();
        loop {
            match self.parent.get(&at)? {
                None => break,
                Some((prev, command, direction)) => {
                    rev.push(TraceStep { command: *command, direction: *direction, to: at.clone() });
                    at = prev.clone();
                }
            }
        }
        rev.reverse();
        Some(Trace { start: self.start.clone(), steps: rev })
    }
}

/// Breadth-first search over Sym(M) from `start`, expanding at most `fuel`
/// configurations. Stops early once `target` is discovered.
pub fn sym_orbit(
    m: &MinskyMachine,
    start: &Configuration,
    fuel: u64,
    target: Option<&Configuration>,
) -> SymOrbit {
    let sym = m.symmetrize();
    let mut parent = HashMap::new();
    parent.insert(start.clone(), None);
    let mut order = vec![start.clone()];
    let mut queue = VecDeque::from([start.clone()]);
    let mut expanded = 0u64;
    if target == Some(start) {
        return SymOrbit { start: start.clone(), parent, order, exhausted: false };
    }
    while let Some(c) = queue.pop_front() {
        if expanded >= fuel {
            queue.push_front(c);
            break;
        }
        expanded += 1;
        for (command, direction, next) in sym.moves(&c) {
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next.clone(), Some((c.clone(), command, direction)));
            order.push(next.clone());
            if target == Some(&next) {
                return SymOrbit { start: start.clone(), parent, order, exhausted: false };
            }
            queue.push_back(next);
        }
    }
    let exhausted = queue.is_empty();
    SymOrbit { start: start.clone(), parent, order, exhausted }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent(Trace),
    NotEquivalent,
    Unknown,
}

impl Equivalence {
    pub fn is_conclusive(&self) -> bool {
        !matches!(self, Equivalence::Unknown)
    }
}

/// Verdict of the forward-meet procedure for deterministic machines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForwardMeet {
    /// Both forward runs reach a common configuration.
    Meet(Trace),
    /// Both forward runs were followed to their end (stop, stuck or cycle) without meeting.
    Disjoint,
    Inconclusive,
}

struct ForwardPath {
    configs: Vec<Configuration>,
    commands: Vec<usize>,
    complete: bool,
}

fn forward_path(m: &MinskyMachine, start: &Configuration, fuel: u64) -> ForwardPath {
    let mut seen = HashMap::new();
    let mut configs = vec![start.clone()];
    let mut commands = Vec::new();
    seen.insert(start.clone(), 0usize);
    for _ in 0..fuel {
        let at = configs.last().expect("nonempty");
        let Some((command, next)) = m.forward_moves(at).into_iter().next() else {
            return ForwardPath { configs, commands, complete: true };
        };
        if seen.contains_key(&next) {
            return ForwardPath { configs, commands, complete: true };
        }
        seen.insert(next.clone(), configs.len());
        configs.push(next);
        commands.push(command);
    }
    let at = configs.last().expect("nonempty");
    let complete = m.forward_moves(at).is_empty();
    ForwardPath { configs, commands, complete }
}

/// For a deterministic machine, two configurations are equivalent iff their
/// forward computations reach a common configuration.
pub fn forward_meet(m: &MinskyMachine, w: &Configuration, w2: &Configuration, fuel: u64) -> ForwardMeet {
    let a = forward_path(m, w, fuel);
    let b = forward_path(m, w2, fuel);
    let index_a: HashMap<&Configuration, usize> = a.configs.iter().enumerate().map(|(i, c)| (c, i)).collect();
    for (jb, c) in b.configs.iter().enumerate() {
        if let Some(&ja) = index_a.get(c) {
            let mut trace = Trace::new(w.clone());
            for k in 0..ja {
                trace.steps.push(TraceStep {
                    command: a.commands[k],
                    direction: Direction::Forward,
                    to: a.configs[k + 1].clone(),
                });
            }
            for k in (0..jb).rev() {
                trace.steps.push(TraceStep {
                    command: b.commands[k],
                    direction: Direction::Backward,
                    to: b.configs[k].clone(),
                });
            }
            return ForwardMeet::Meet(trace);
        }
    }
    if a.complete && b.complete {
        ForwardMeet::Disjoint
    } else {
        ForwardMeet::Inconclusive
    }
}

/// Bounded equivalence test. Sym-BFS is authoritative; for deterministic
/// machines the forward-meet procedure also runs and, when both conclude,
/// must agree with it.
pub fn equivalent_configs(m: &MinskyMachine, w: &Configuration, w2: &Configuration, fuel: u64) -> Equivalence {
    if w == w2 {
        return Equivalence::Equivalent(Trace::new(w.clone()));
    }
    let orbit = sym_orbit(m, w, fuel, Some(w2));
    let bfs = match orbit.trace_to(w2) {
        Some(t) => Equivalence::Equivalent(t),
        None if orbit.is_exhausted() => Equivalence::NotEquivalent,
        None => Equivalence::Unknown,
    };
    if !m.is_deterministic() {
        return bfs;
    }
    let meet = match forward_meet(m, w, w2, fuel) {
        ForwardMeet::Meet(t) => Equivalence::Equivalent(t),
        ForwardMeet::Disjoint => Equivalence::NotEquivalent,
        ForwardMeet::Inconclusive => Equivalence::Unknown,
    };
    match (&bfs, &meet) {
        (Equivalence::Unknown, _) => meet,
        (_, Equivalence::Unknown) => bfs,
        (Equivalence::Equivalent(_), Equivalence::Equivalent(_)) | (Equivalence::NotEquivalent, Equivalence::NotEquivalent) => bfs,
        _ => panic!("Sym-BFS and forward-meet disagree on {w} vs {w2} in machine `{}`", m.name()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::reference::*;

    fn cfg(label: u32, g: &[u64]) -> Configuration {
        Configuration::new(label, g.to_vec())
    }

    #[test]
    fn ex_a_forward_runs_meet() {
        let m = ex_a();
        match equivalent_configs(&m, &cfg(1, &[2, 0]), &cfg(2, &[1, 0]), 100) {
            Equivalence::Equivalent(t) => {
                assert!(t.is_valid_for(&m));
                assert_eq!(t.last(), &cfg(2, &[1, 0]));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(forward_meet(&m, &cfg(1, &[2, 0]), &cfg(2, &[1, 0]), 100), ForwardMeet::Meet(_)));
    }

    #[test]
    fn ex_c_orbits_are_finite() {
        let m = ex_c();
        let orbit = sym_orbit(&m, &cfg(1, &[0, 0]), 100, None);
        assert!(orbit.is_exhausted());
        let mut seen = orbit.discovered().to_vec();
        seen.sort();
        assert_eq!(seen, vec![cfg(0, &[0, 1]), cfg(1, &[0, 0]), cfg(2, &[0, 1])]);
        assert_eq!(equivalent_configs(&m, &cfg(1, &[0, 0]), &cfg(1, &[1, 0]), 100), Equivalence::NotEquivalent);
    }

    #[test]
    fn small_fuel_is_unknown() {
        let m = ex_a();
        assert_eq!(equivalent_configs(&m, &cfg(1, &[1, 0]), &cfg(1, &[3, 0]), 1), Equivalence::Unknown);
        assert!(matches!(
            equivalent_configs(&m, &cfg(1, &[1, 0]), &cfg(1, &[3, 0]), 10),
            Equivalence::Equivalent(_)
        ));
    }

    #[test]
    fn equivalence_symmetric_and_transitive_on_exhausted_orbit() {
        let m = ex_c();
        let orbit = sym_orbit(&m, &cfg(1, &[2, 1]), 100, None);
        assert!(orbit.is_exhausted());
        let members = orbit.discovered().to_vec();
        for a in &members {
            for b in &members {
                let ab = equivalent_configs(&m, a, b, 100);
                let ba = equivalent_configs(&m, b, a, 100);
                assert!(matches!(ab, Equivalence::Equivalent(_)));
                assert!(matches!(ba, Equivalence::Equivalent(_)));
            }
        }
    }
}
