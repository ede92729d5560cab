use std::fmt;

use super::{Configuration, MachineError, MinskyMachine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    /// Index into `MinskyMachine::commands`.
    pub command: usize,
    pub direction: Direction,
    pub to: Configuration,
}

/// A computation of Sym(M): a start configuration and the moves taken from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub start: Configuration,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn new(start: Configuration) -> Self {
        Trace { start, steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> &Configuration {
        self.steps.last().map_or(&self.start, |s| &s.to)
    }

    pub fn configurations(&self) -> impl Iterator<Item = &Configuration> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.to))
    }

    /// Checks that every step is a legal move of Sym(M).
    pub fn is_valid_for(&self, m: &MinskyMachine) -> bool {
        let mut at = &self.start;
        for s in &self.steps {
            let cmd = &m.commands()[s.command];
            let ok = match s.direction {
                Direction::Forward => {
                    cmd.label == at.label
                        && !at.is_stop()
                        && cmd.apply(&at.glasses).as_ref() == Some(&s.to.glasses)
                        && s.to.label == cmd.next
                }
                Direction::Backward => {
                    cmd.next == at.label
                        && cmd.unapply(&at.glasses).as_ref() == Some(&s.to.glasses)
                        && s.to.label == cmd.label
                }
            };
            if !ok {
                return false;
            }
            at = &s.to;
        }
        true
    }

    /// The same computation read from its last configuration back to its start.
    pub fn reversed(&self) -> Trace {
        let configs: Vec<&Configuration> = self.configurations().collect();
        let mut steps = Vec::with_capacity(self.steps.len());
        for (i, s) in self.steps.iter().enumerate().rev() {
            steps.push(TraceStep {
                command: s.command,
                direction: s.direction.flip(),
                to: configs[i].clone(),
            });
        }
        Trace { start: self.last().clone(), steps }
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn concat(mut self, other: Trace) -> Trace {
        debug_assert_eq!(self.last(), &other.start);
        self.steps.extend(other.steps);
        self
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for s in &self.steps {
            let arrow = match s.direction {
                Direction::Forward => "->",
                Direction::Backward => "<-",
            };
            write!(f, " {arrow}[{}] {}", s.command, s.to)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Halted(Configuration, Trace),
    Stuck(Trace),
    OutOfFuel(Trace),
}

impl RunOutcome {
    pub fn trace(&self) -> &Trace {
        match self {
            RunOutcome::Halted(_, t) | RunOutcome::Stuck(t) | RunOutcome::OutOfFuel(t) => t,
        }
    }
}

/// Runs a deterministic machine for at most `fuel` steps.
pub fn run(m: &MinskyMachine, start: &Configuration, fuel: u64) -> Result<RunOutcome, MachineError> {
    if !m.is_deterministic() {
        return Err(MachineError::Nondeterministic(m.name().to_string()));
    }
    m.check_configuration(start)?;
    Ok(run_unchecked(m, start, fuel))
}

pub(crate) fn run_unchecked(m: &MinskyMachine, start: &Configuration, fuel: u64) -> RunOutcome {
    let mut trace = Trace::new(start.clone());
    let mut at = start.clone();
    for _ in 0..fuel {
        if at.is_stop() {
            return RunOutcome::Halted(at, trace);
        }
        let Some((command, next)) = m.forward_moves(&at).into_iter().next() else {
            return RunOutcome::Stuck(trace);
        };
        trace.steps.push(TraceStep { command, direction: Direction::Forward, to: next.clone() });
        at = next;
    }
    if at.is_stop() {
        RunOutcome::Halted(at, trace)
    } else {
        RunOutcome::OutOfFuel(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::reference::*;
    use crate::machine::{parse_machine, Command};

    fn cfg(label: u32, g: &[u64]) -> Configuration {
        Configuration::new(label, g.to_vec())
    }

    #[test]
    fn ex_a_accepts_two() {
        match run(&ex_a(), &cfg(1, &[2, 0]), 10).unwrap() {
            RunOutcome::Halted(c, t) => {
                assert_eq!(c, cfg(0, &[0, 0]));
                assert_eq!(t.len(), 3);
                let seen: Vec<_> = t.configurations().cloned().collect();
                assert_eq!(seen, vec![cfg(1, &[2, 0]), cfg(2, &[1, 0]), cfg(1, &[0, 0]), cfg(0, &[0, 0])]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ex_a_diverges_on_one() {
        let out = run(&ex_a(), &cfg(1, &[1, 0]), 10).unwrap();
        assert!(matches!(out, RunOutcome::OutOfFuel(_)));
        assert_eq!(out.trace().last(), &cfg(3, &[0, 8]));
    }

    #[test]
    fn one_step_halt() {
        let out = run(&ex_a(), &cfg(1, &[0, 0]), 1).unwrap();
        assert!(matches!(out, RunOutcome::Halted(c, _) if c == cfg(0, &[0, 0])));
    }

    #[test]
    fn stuck_and_nondeterministic() {
        let m = parse_machine("machine s glasses=2\n1: if g1>0 dec g1 goto 0\n").unwrap();
        assert!(matches!(run(&m, &cfg(1, &[0, 0]), 5).unwrap(), RunOutcome::Stuck(_)));
        let nd = MinskyMachine::new("nd", 2, vec![Command::add(1, 1, 0), Command::add(1, 2, 0)]).unwrap();
        assert!(matches!(run(&nd, &cfg(1, &[0, 0]), 5), Err(MachineError::Nondeterministic(_))));
    }

    #[test]
    fn reversed_trace_is_valid() {
        let m = ex_a();
        let t = run(&m, &cfg(1, &[4, 0]), 20).unwrap().trace().clone();
        assert!(t.is_valid_for(&m));
        let r = t.reversed();
        assert!(r.is_valid_for(&m));
        assert_eq!(r.last(), &t.start);
    }
}
