//! K-glass Minsky machines: data model, DSL, execution and transforms.

mod compile;
mod dsl;
mod equiv;
mod exec;

use std::fmt;

use thiserror::Error;

pub use compile::{
    attach_depth_glasses, compile_k_to_2, gadget_machine, measure_empty_bound, EmptyGap, Gadget,
    TwoGlassCompilation,
};
pub use dsl::{parse_configuration, parse_machine, ParseError};
pub use equiv::{
    equivalent_configs, forward_meet, sym_orbit, Equivalence, ForwardMeet, SymOrbit,
};
pub use exec::{run, Direction, RunOutcome, Trace, TraceStep};

/// Glass numbers are 1-based, as in the DSL (`g1`, `g2`, ...).
pub type Glass = usize;

/// Command numbers. Label 0 is the stop command.
pub type Label = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    Zero,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlassTest {
    pub glass: Glass,
    pub condition: Condition,
}

impl GlassTest {
    pub fn zero(glass: Glass) -> Self {
        GlassTest { glass, condition: Condition::Zero }
    }

    pub fn positive(glass: Glass) -> Self {
        GlassTest { glass, condition: Condition::Positive }
    }

    fn holds(&self, glasses: &[u64]) -> bool {
        let coins = glasses[self.glass - 1];
        match self.condition {
            Condition::Zero => coins == 0,
            Condition::Positive => coins > 0,
        }
    }
}

/// A conjunction of glass tests on distinct glasses, kept sorted by glass.
/// The empty conjunction is the `Always` guard.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Guard(Vec<GlassTest>);

/// The shape of a guard, following the command forms of the machine model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardKind {
    Always,
    GlassPositive(Glass),
    GlassZero(Glass),
    Conj,
}

impl Guard {
    pub fn always() -> Self {
        Guard(Vec::new())
    }

    pub fn positive(glass: Glass) -> Self {
        Guard(vec![GlassTest::positive(glass)])
    }

    pub fn zero(glass: Glass) -> Self {
        Guard(vec![GlassTest::zero(glass)])
    }

    /// Builds a conjunction; returns `None` when two tests name the same glass.
    pub fn conj(mut tests: Vec<GlassTest>) -> Option<Self> {
        tests.sort();
        if tests.windows(2).any(|w| w[0].glass == w[1].glass) {
            return None;
        }
        Some(Guard(tests))
    }

    pub fn tests(&self) -> &[GlassTest] {
        &self.0
    }

    pub fn kind(&self) -> GuardKind {
        match self.0.as_slice() {
            [] => GuardKind::Always,
            [t] if t.condition == Condition::Positive => GuardKind::GlassPositive(t.glass),
            [t] => GuardKind::GlassZero(t.glass),
            _ => GuardKind::Conj,
        }
    }

    pub fn holds(&self, glasses: &[u64]) -> bool {
        self.0.iter().all(|t| t.holds(glasses))
    }

    pub fn test_on(&self, glass: Glass) -> Option<Condition> {
        self.0.iter().find(|t| t.glass == glass).map(|t| t.condition)
    }

    pub fn entails_positive(&self, glass: Glass) -> bool {
        self.test_on(glass) == Some(Condition::Positive)
    }

    /// Two guards overlap unless one demands zero and the other positive on a common glass.
    pub fn overlaps(&self, other: &Guard) -> bool {
        !self.0.iter().any(|t| {
            other
                .test_on(t.glass)
                .is_some_and(|c| c != t.condition)
        })
    }

    /// Returns the guard extended with one more test (kept sorted).
    pub fn with(&self, test: GlassTest) -> Option<Guard> {
        let mut tests = self.0.clone();
        tests.push(test);
        Guard::conj(tests)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Inc(Glass),
    Dec(Glass),
}

impl Action {
    pub fn glass(&self) -> Glass {
        match *self {
            Action::Inc(g) | Action::Dec(g) => g,
        }
    }

    pub fn inverse(&self) -> Action {
        match *self {
            Action::Inc(g) => Action::Dec(g),
            Action::Dec(g) => Action::Inc(g),
        }
    }
}

/// Actions on distinct glasses.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Effect(Vec<Action>);

impl Effect {
    pub fn none() -> Self {
        Effect(Vec::new())
    }

    pub fn single(action: Action) -> Self {
        Effect(vec![action])
    }

    /// Returns `None` when two actions touch the same glass.
    pub fn new(actions: Vec<Action>) -> Option<Self> {
        let mut glasses: Vec<_> = actions.iter().map(Action::glass).collect();
        glasses.sort_unstable();
        if glasses.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some(Effect(actions))
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn with(&self, action: Action) -> Option<Effect> {
        let mut actions = self.0.clone();
        actions.push(action);
        Effect::new(actions)
    }

    pub fn action_on(&self, glass: Glass) -> Option<Action> {
        self.0.iter().copied().find(|a| a.glass() == glass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Command {
    pub label: Label,
    pub guard: Guard,
    pub effect: Effect,
    pub next: Label,
}

/// The single-glass command forms that the semigroup and arithmetic encodings accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicForm {
    Add(Glass),
    Sub(Glass),
    ZeroJump(Glass),
}

impl Command {
    pub fn new(label: Label, guard: Guard, effect: Effect, next: Label) -> Self {
        Command { label, guard, effect, next }
    }

    pub fn add(label: Label, glass: Glass, next: Label) -> Self {
        Command::new(label, Guard::always(), Effect::single(Action::Inc(glass)), next)
    }

    pub fn sub(label: Label, glass: Glass, next: Label) -> Self {
        Command::new(label, Guard::positive(glass), Effect::single(Action::Dec(glass)), next)
    }

    pub fn zero_jump(label: Label, glass: Glass, next: Label) -> Self {
        Command::new(label, Guard::zero(glass), Effect::none(), next)
    }

    pub fn classic_form(&self) -> Option<ClassicForm> {
        match (self.guard.kind(), self.effect.actions()) {
            (GuardKind::Always, [Action::Inc(g)]) => Some(ClassicForm::Add(*g)),
            (GuardKind::GlassPositive(k), [Action::Dec(g)]) if k == *g => Some(ClassicForm::Sub(*g)),
            (GuardKind::GlassZero(k), []) => Some(ClassicForm::ZeroJump(k)),
            _ => None,
        }
    }

    pub fn enabled(&self, glasses: &[u64]) -> bool {
        self.guard.holds(glasses)
    }

    /// Forward application; the caller has checked the label.
    pub fn apply(&self, glasses: &[u64]) -> Option<Vec<u64>> {
        if !self.enabled(glasses) {
            return None;
        }
        apply_actions(self.effect.actions(), glasses)
    }

    /// Inverse partial injection: the unique pre-image of `glasses` (at `self.next`), if any.
    pub fn unapply(&self, glasses: &[u64]) -> Option<Vec<u64>> {
        let inverse: Vec<Action> = self.effect.actions().iter().map(Action::inverse).collect();
        let before = apply_actions(&inverse, glasses)?;
        self.guard.holds(&before).then_some(before)
    }
}

fn apply_actions(actions: &[Action], glasses: &[u64]) -> Option<Vec<u64>> {
    let mut out = glasses.to_vec();
    for action in actions {
        match *action {
            Action::Inc(g) => out[g - 1] += 1,
            Action::Dec(g) => out[g - 1] = out[g - 1].checked_sub(1)?,
        }
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub label: Label,
    pub glasses: Vec<u64>,
}

impl Configuration {
    pub fn new(label: Label, glasses: Vec<u64>) -> Self {
        Configuration { label, glasses }
    }

    pub fn coins(&self) -> u64 {
        self.glasses.iter().sum()
    }

    pub fn is_stop(&self) -> bool {
        self.label == 0
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};", self.label)?;
        for (i, g) in self.glasses.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("a machine needs at least 2 glasses, got {0}")]
    TooFewGlasses(usize),
    #[error("command at label {label} references glass {glass}, machine has {glasses}")]
    GlassOutOfRange { label: Label, glass: Glass, glasses: usize },
    #[error("command label must be at least 1")]
    ZeroLabel,
    #[error("command at label {label} jumps to undefined label {next}")]
    DanglingNext { label: Label, next: Label },
    #[error("command at label {label} decrements glass {glass} without a positivity guard")]
    UnguardedDec { label: Label, glass: Glass },
    #[error("labels are not contiguous: label {0} has no command")]
    MissingLabel(Label),
    #[error("configuration {config} does not match a {glasses}-glass machine")]
    ConfigurationShape { config: Configuration, glasses: usize },
    #[error("stop configuration {0} has no successors")]
    StopConfiguration(Configuration),
    #[error("machine `{0}` is not deterministic")]
    Nondeterministic(String),
    #[error("expected a {expected}-glass machine, got {got}")]
    WrongGlassCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinskyMachine {
    name: String,
    glasses: usize,
    commands: Vec<Command>,
}

impl MinskyMachine {
    /// Validates and builds a machine. Commands are kept in the given order.
    pub fn new(
        name: impl Into<String>,
        glasses: usize,
        commands: Vec<Command>,
    ) -> Result<Self, MachineError> {
        if glasses < 2 {
            return Err(MachineError::TooFewGlasses(glasses));
        }
        let max_label = commands.iter().map(|c| c.label).max().unwrap_or(0);
        for c in &commands {
            if c.label == 0 {
                return Err(MachineError::ZeroLabel);
            }
            let glasses_used = c
                .guard
                .tests()
                .iter()
                .map(|t| t.glass)
                .chain(c.effect.actions().iter().map(Action::glass));
            for g in glasses_used {
                if g == 0 || g > glasses {
                    return Err(MachineError::GlassOutOfRange { label: c.label, glass: g, glasses });
                }
            }
            for a in c.effect.actions() {
                if let Action::Dec(g) = *a {
                    if !c.guard.entails_positive(g) {
                        return Err(MachineError::UnguardedDec { label: c.label, glass: g });
                    }
                }
            }
            if c.next > max_label {
                return Err(MachineError::DanglingNext { label: c.label, next: c.next });
            }
        }
        for label in 1..=max_label {
            if !commands.iter().any(|c| c.label == label) {
                return Err(MachineError::MissingLabel(label));
            }
        }
        Ok(MinskyMachine { name: name.into(), glasses, commands })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn glasses(&self) -> usize {
        self.glasses
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    /// Largest label N; labels are exactly 1..=N.
    pub fn max_label(&self) -> Label {
        self.commands.iter().map(|c| c.label).max().unwrap_or(0)
    }

    pub fn commands_at(&self, label: Label) -> impl Iterator<Item = (usize, &Command)> {
        self.commands.iter().enumerate().filter(move |(_, c)| c.label == label)
    }

    /// Every command has one of the three single-glass forms.
    pub fn is_classic(&self) -> bool {
        self.commands.iter().all(|c| c.classic_form().is_some())
    }

    /// Commands sharing a label must have pairwise-disjoint guards.
    pub fn is_deterministic(&self) -> bool {
        (1..=self.max_label()).all(|label| {
            let guards: Vec<&Guard> = self.commands_at(label).map(|(_, c)| &c.guard).collect();
            guards
                .iter()
                .enumerate()
                .all(|(i, g)| guards[i + 1..].iter().all(|h| !g.overlaps(h)))
        })
    }

    pub fn check_configuration(&self, c: &Configuration) -> Result<(), MachineError> {
        if c.glasses.len() != self.glasses || c.label > self.max_label() {
            return Err(MachineError::ConfigurationShape { config: c.clone(), glasses: self.glasses });
        }
        Ok(())
    }

    /// Successors under every enabled command carrying the configuration's label.
    pub fn step(&self, c: &Configuration) -> Result<Vec<Configuration>, MachineError> {
        if c.is_stop() {
            return Err(MachineError::StopConfiguration(c.clone()));
        }
        self.check_configuration(c)?;
        Ok(self.forward_moves(c).into_iter().map(|(_, next)| next).collect())
    }

    pub(crate) fn forward_moves(&self, c: &Configuration) -> Vec<(usize, Configuration)> {
        if c.is_stop() {
            return Vec::new();
        }
        let mut out: Vec<(usize, Configuration)> = Vec::new();
        for (idx, cmd) in self.commands_at(c.label) {
            if let Some(glasses) = cmd.apply(&c.glasses) {
                let next = Configuration::new(cmd.next, glasses);
                if !out.iter().any(|(_, n)| *n == next) {
                    out.push((idx, next));
                }
            }
        }
        out
    }

    /// Sym(M): the machine together with the inverse of every command.
    pub fn symmetrize(&self) -> SymMachine<'_> {
        SymMachine { machine: self, order: self.canonical_order() }
    }

    /// Command indices sorted by label, then guard (the canonical expansion order).
    pub(crate) fn canonical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.commands.len()).collect();
        order.sort_by(|&a, &b| {
            let (ca, cb) = (&self.commands[a], &self.commands[b]);
            (ca.label, &ca.guard, &ca.effect, ca.next, a).cmp(&(cb.label, &cb.guard, &cb.effect, cb.next, b))
        });
        order
    }
}

/// A machine viewed together with the inverses of its commands.
#[derive(Debug, Clone)]
pub struct SymMachine<'a> {
    machine: &'a MinskyMachine,
    order: Vec<usize>,
}

impl<'a> SymMachine<'a> {
    pub fn machine(&self) -> &'a MinskyMachine {
        self.machine
    }

    pub fn forward(&self, c: &Configuration) -> Vec<Configuration> {
        self.moves(c).into_iter().filter(|m| m.1 == Direction::Forward).map(|m| m.2).collect()
    }

    pub fn backward(&self, c: &Configuration) -> Vec<Configuration> {
        self.moves(c).into_iter().filter(|m| m.1 == Direction::Backward).map(|m| m.2).collect()
    }

    /// All Sym moves in canonical order: commands sorted by label and guard,
    /// forward before backward for each command.
    pub fn moves(&self, c: &Configuration) -> Vec<(usize, Direction, Configuration)> {
        let mut out = Vec::new();
        for &idx in &self.order {
            let cmd = &self.machine.commands[idx];
            if !c.is_stop() && cmd.label == c.label {
                if let Some(g) = cmd.apply(&c.glasses) {
                    out.push((idx, Direction::Forward, Configuration::new(cmd.next, g)));
                }
            }
            if cmd.next == c.label {
                if let Some(g) = cmd.unapply(&c.glasses) {
                    out.push((idx, Direction::Backward, Configuration::new(cmd.label, g)));
                }
            }
        }
        out
    }
}

/// Reference machines used across tests, examples and documentation.
pub mod reference {
    use super::*;

    /// Accepts (1;m,0) iff m is even; loops forever adding to glass 2 otherwise.
    pub const EX_A: &str = "machine exa glasses=2
1: if g1=0 goto 0
1: if g1>0 dec g1 goto 2
2: if g1=0 goto 3
2: if g1>0 dec g1 goto 1
3: inc g2 goto 3
";

    /// Every Sym-orbit is finite.
    pub const EX_C: &str = "machine exc glasses=2
1: inc g2 goto 2
2: if g1=0 goto 0
";

    pub fn ex_a() -> MinskyMachine {
        parse_machine(EX_A).expect("exa parses")
    }

    pub fn ex_c() -> MinskyMachine {
        parse_machine(EX_C).expect("exc parses")
    }

    /// exa run on three glasses; glass 3 is never touched.
    pub fn ex_a3() -> MinskyMachine {
        let m = ex_a();
        MinskyMachine::new("exa3", 3, m.commands().to_vec()).expect("exa on 3 glasses")
    }
}

#[cfg(test)]
mod tests {
    use super::reference::*;
    use super::*;

    fn cfg(label: Label, g: &[u64]) -> Configuration {
        Configuration::new(label, g.to_vec())
    }

    #[test]
    fn determinism_checks() {
        assert!(ex_a().is_deterministic());
        assert!(ex_c().is_deterministic());
        let twice = MinskyMachine::new(
            "dup",
            2,
            vec![Command::add(1, 1, 1), Command::add(1, 1, 1)],
        )
        .unwrap();
        assert!(!twice.is_deterministic());
        let single = MinskyMachine::new("one", 2, vec![Command::zero_jump(1, 1, 0)]).unwrap();
        assert!(single.is_deterministic());
    }

    #[test]
    fn step_examples() {
        let m = ex_a();
        assert_eq!(m.step(&cfg(1, &[2, 0])).unwrap(), vec![cfg(2, &[1, 0])]);
        assert_eq!(m.step(&cfg(1, &[0, 0])).unwrap(), vec![cfg(0, &[0, 0])]);
        assert!(matches!(m.step(&cfg(0, &[3, 1])), Err(MachineError::StopConfiguration(_))));
    }

    #[test]
    fn backward_examples() {
        let m = ex_a();
        let sym = m.symmetrize();
        assert_eq!(sym.backward(&cfg(2, &[1, 0])), vec![cfg(1, &[2, 0])]);
        assert_eq!(sym.backward(&cfg(1, &[2, 0])), vec![cfg(2, &[3, 0])]);
    }

    #[test]
    fn validation_errors() {
        assert_eq!(
            MinskyMachine::new("x", 2, vec![Command::add(1, 1, 3)]),
            Err(MachineError::DanglingNext { label: 1, next: 3 })
        );
        let bad_dec = Command::new(1, Guard::always(), Effect::single(Action::Dec(1)), 0);
        assert_eq!(
            MinskyMachine::new("x", 2, vec![bad_dec]),
            Err(MachineError::UnguardedDec { label: 1, glass: 1 })
        );
        assert_eq!(
            MinskyMachine::new("x", 2, vec![Command::add(2, 1, 0)]),
            Err(MachineError::MissingLabel(1))
        );
    }

    #[test]
    fn guard_overlap_is_symbolic() {
        let a = Guard::conj(vec![GlassTest::zero(1), GlassTest::positive(2)]).unwrap();
        let b = Guard::positive(1);
        let c = Guard::zero(2);
        assert!(!a.overlaps(&b));
        assert!(!a.overlaps(&c));
        assert!(b.overlaps(&c));
        assert!(Guard::conj(vec![GlassTest::zero(1), GlassTest::positive(1)]).is_none());
    }

    #[test]
    fn forward_determinism_exhaustive() {
        for m in [ex_a(), ex_c()] {
            for label in 1..=m.max_label() {
                for x in 0..=5 {
                    for y in 0..=5 {
                        assert!(m.step(&cfg(label, &[x, y])).unwrap().len() <= 1);
                    }
                }
            }
        }
    }
}
