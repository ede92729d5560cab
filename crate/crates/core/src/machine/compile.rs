use std::collections::BTreeSet;

use super::exec::{run_unchecked, RunOutcome};
use super::{
    Action, Command, Condition, Configuration, Effect, GlassTest, Guard, Label, MachineError,
    MinskyMachine,
};
use crate::primes::first_primes;

/// Label allocator and command sink for generated 2-glass code.
/// Glass 1 holds the encoded value, glass 2 is scratch and is empty between gadgets.
struct Builder {
    commands: Vec<Command>,
    next_free: Label,
}

impl Builder {
    fn new(reserved: Label) -> Self {
        Builder { commands: Vec::new(), next_free: reserved + 1 }
    }

    fn fresh(&mut self) -> Label {
        let l = self.next_free;
        self.next_free += 1;
        l
    }

    fn push(&mut self, c: Command) {
        self.commands.push(c);
    }

    /// `count` increments of `glass` starting at `entry`, then jump to `exit`.
    fn inc_chain(&mut self, entry: Label, glass: usize, count: u64, exit: Label) {
        let mut at = entry;
        for k in 0..count {
            let next = if k + 1 == count { exit } else { self.fresh() };
            self.push(Command::add(at, glass, next));
            at = next;
        }
    }

    /// Moves glass 2 back into glass 1, `factor` coins per unit, then jumps to `exit`.
    fn move_back(&mut self, head: Label, factor: u64, exit: Label) {
        let body = self.fresh();
        self.push(Command::sub(head, 2, body));
        self.push(Command::zero_jump(head, 2, exit));
        self.inc_chain(body, 1, factor, head);
    }

    /// v ↦ p·v.
    fn multiply(&mut self, head: Label, p: u64, exit: Label) {
        let body = self.fresh();
        let back = self.fresh();
        self.push(Command::sub(head, 1, body));
        self.push(Command::zero_jump(head, 1, back));
        self.inc_chain(body, 2, p, head);
        self.move_back(back, 1, exit);
    }

    /// v ↦ v/p; the caller guarantees p | v.
    fn divide(&mut self, head: Label, p: u64, exit: Label) {
        let back = self.fresh();
        self.push(Command::zero_jump(head, 1, back));
        let mut at = head;
        for _ in 1..p {
            let next = self.fresh();
            self.push(Command::sub(at, 1, next));
            at = next;
        }
        let inc = self.fresh();
        self.push(Command::sub(at, 1, inc));
        self.push(Command::add(inc, 2, head));
        self.move_back(back, 1, exit);
    }

    /// Branches on p | v and restores v.
    fn test_divisible(&mut self, head: Label, p: u64, yes: Label, no: Label) {
        let restore_yes = self.fresh();
        let restore_no = self.fresh();
        let mut at = head;
        for r in 0..p {
            let on_empty = if r == 0 {
                restore_yes
            } else {
                let refill = self.fresh();
                self.inc_chain(refill, 1, r, restore_no);
                refill
            };
            self.push(Command::zero_jump(at, 1, on_empty));
            let next = self.fresh();
            self.push(Command::sub(at, 1, next));
            at = next;
        }
        self.push(Command::add(at, 2, head));
        self.move_back(restore_yes, p, yes);
        self.move_back(restore_no, p, no);
    }

    /// A label where the machine is stuck: glass 2 is empty there.
    fn stuck(&mut self, head: Label) {
        self.push(Command::sub(head, 2, head));
    }

    /// A no-op pair so `head` is visited exactly once per simulated step.
    fn enter(&mut self, head: Label, exit: Label) {
        let mid = self.fresh();
        self.push(Command::add(head, 2, mid));
        self.push(Command::sub(mid, 2, exit));
    }
}

/// The three gadget templates, exposed as stand-alone machines for testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gadget {
    Multiply(u64),
    Divide(u64),
    /// Ends at label 0 when p | v; otherwise at label 0 with glass 2 holding one coin.
    TestDivisible(u64),
}

/// A 2-glass machine running a single gadget from label 1 and stopping at label 0.
pub fn gadget_machine(g: Gadget) -> MinskyMachine {
    let mut b = Builder::new(1);
    match g {
        Gadget::Multiply(p) => b.multiply(1, p, 0),
        Gadget::Divide(p) => b.divide(1, p, 0),
        Gadget::TestDivisible(p) => {
            let no = b.fresh();
            b.test_divisible(1, p, 0, no);
            b.push(Command::add(no, 2, 0));
        }
    }
    MinskyMachine::new(format!("{g:?}"), 2, b.commands).expect("gadget machines are well formed")
}

/// A K-glass machine compiled to two glasses via prime-exponent encoding.
#[derive(Debug, Clone)]
pub struct TwoGlassCompilation {
    pub machine: MinskyMachine,
    /// Prime for each source glass, in glass order.
    pub primes: Vec<u64>,
    source_labels: Label,
    source_glasses: usize,
}

impl TwoGlassCompilation {
    /// ε ↦ 2^ε₁·3^ε₂·5^ε₃··· in glass 1; labels are preserved.
    pub fn encode(&self, c: &Configuration) -> Option<Configuration> {
        if c.glasses.len() != self.source_glasses || c.label > self.source_labels {
            return None;
        }
        let mut v: u64 = 1;
        for (p, &e) in self.primes.iter().zip(&c.glasses) {
            v = v.checked_mul(p.checked_pow(u32::try_from(e).ok()?)?)?;
        }
        Some(Configuration::new(c.label, vec![v, 0]))
    }

    /// The certified simulation map: defined on target configurations at a source
    /// label (or stop) with empty scratch glass.
    pub fn project(&self, t: &Configuration) -> Option<Configuration> {
        if t.label > self.source_labels || t.glasses[1] != 0 || t.glasses[0] == 0 {
            return None;
        }
        let mut v = t.glasses[0];
        let mut glasses = Vec::with_capacity(self.source_glasses);
        for &p in &self.primes {
            let mut e = 0;
            while v % p == 0 {
                v /= p;
                e += 1;
            }
            glasses.push(e);
        }
        (v == 1).then(|| Configuration::new(t.label, glasses))
    }

    /// Runs the target for at most `target_fuel` steps and returns the projected
    /// configuration sequence (anchors only).
    pub fn projected_run(&self, source_start: &Configuration, target_fuel: u64) -> Vec<Configuration> {
        let Some(start) = self.encode(source_start) else {
            return Vec::new();
        };
        let outcome = run_unchecked(&self.machine, &start, target_fuel);
        outcome
            .trace()
            .configurations()
            .filter_map(|c| self.project(c))
            .collect()
    }
}

/// Compiles a K-glass machine to a 2-glass one. Each source label keeps its
/// number; gadget labels follow. Guards are evaluated by divisibility tests,
/// increments and decrements by multiplication and division by the glass prime.
pub fn compile_k_to_2(m: &MinskyMachine) -> TwoGlassCompilation {
    let n = m.max_label();
    let primes = first_primes(m.glasses());
    let mut b = Builder::new(n);

    for label in 1..=n {
        let commands: Vec<&Command> = m.commands_at(label).map(|(_, c)| c).collect();
        let tested: Vec<usize> = commands
            .iter()
            .flat_map(|c| c.guard.tests().iter().map(|t| t.glass))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let start = b.fresh();
        b.enter(label, start);
        decide(&mut b, &primes, &commands, &tested, Vec::new(), start);
    }

    let machine = MinskyMachine::new(format!("{}_2glass", m.name()), 2, b.commands)
        .expect("compiled machines are well formed");
    TwoGlassCompilation { machine, primes, source_labels: n, source_glasses: m.glasses() }
}

/// Emits the decision tree over `tested` glasses starting at `head`.
fn decide(
    b: &mut Builder,
    primes: &[u64],
    commands: &[&Command],
    tested: &[usize],
    known: Vec<GlassTest>,
    head: Label,
) {
    if let Some((&glass, rest)) = tested.split_first() {
        let pos = b.fresh();
        let zero = b.fresh();
        b.test_divisible(head, primes[glass - 1], pos, zero);
        let mut k_pos = known.clone();
        k_pos.push(GlassTest::positive(glass));
        decide(b, primes, commands, rest, k_pos, pos);
        let mut k_zero = known;
        k_zero.push(GlassTest::zero(glass));
        decide(b, primes, commands, rest, k_zero, zero);
        return;
    }
    let matching: Vec<&Command> = commands
        .iter()
        .copied()
        .filter(|c| {
            c.guard.tests().iter().all(|t| known.iter().any(|k| k == t))
        })
        .collect();
    match matching.as_slice() {
        [] => b.stuck(head),
        [c] => effect_chain(b, primes, c, head),
        many => {
            for c in many {
                let mid = b.fresh();
                let entry = b.fresh();
                b.push(Command::add(head, 2, mid));
                b.push(Command::sub(mid, 2, entry));
                effect_chain(b, primes, c, entry);
            }
        }
    }
}

fn effect_chain(b: &mut Builder, primes: &[u64], c: &Command, head: Label) {
    let actions = c.effect.actions();
    if actions.is_empty() {
        b.enter(head, c.next);
        return;
    }
    let mut at = head;
    for (k, a) in actions.iter().enumerate() {
        let exit = if k + 1 == actions.len() { c.next } else { b.fresh() };
        match *a {
            Action::Inc(g) => b.multiply(at, primes[g - 1], exit),
            Action::Dec(g) => b.divide(at, primes[g - 1], exit),
        }
        at = exit;
    }
}

/// Adds glasses 4 and 5 to a 3-glass machine: every command also puts a coin in
/// glass 4 when glass 5 is empty (realized by splitting on ε₅), and each label
/// gains the two extra commands `(inc g4, inc g5) goto i` and
/// `if g4=0, g5=0 goto 0`.
pub fn attach_depth_glasses(m: &MinskyMachine) -> Result<MinskyMachine, MachineError> {
    if m.glasses() != 3 {
        return Err(MachineError::WrongGlassCount { expected: 3, got: m.glasses() });
    }
    let mut commands = Vec::new();
    for c in m.commands() {
        let empty5 = c.guard.with(GlassTest::zero(5)).expect("glass 5 unused in a 3-glass machine");
        let effect4 = c.effect.with(Action::Inc(4)).expect("glass 4 unused in a 3-glass machine");
        commands.push(Command::new(c.label, empty5, effect4, c.next));
        let full5 = c.guard.with(GlassTest::positive(5)).expect("glass 5 unused");
        commands.push(Command::new(c.label, full5, c.effect.clone(), c.next));
    }
    for label in 1..=m.max_label() {
        let both = Effect::new(vec![Action::Inc(4), Action::Inc(5)]).expect("distinct glasses");
        commands.push(Command::new(label, Guard::always(), both, label));
        let empty = Guard::conj(vec![
            GlassTest { glass: 4, condition: Condition::Zero },
            GlassTest { glass: 5, condition: Condition::Zero },
        ])
        .expect("distinct glasses");
        commands.push(Command::new(label, empty, Effect::none(), 0));
    }
    MinskyMachine::new(format!("{}_depth", m.name()), 5, commands)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptyGap {
    pub input: Configuration,
    /// |c| = total coins + 1.
    pub size: u64,
    /// Longest stretch of steps without any glass being empty.
    pub gap: u64,
    /// The gap with the largest ratio to |c| for c the configuration where it starts, and that |c|.
    pub worst: (u64, u64),
    pub steps: u64,
    pub halted: bool,
}

/// For each input, runs the machine and reports the longest run of steps
/// between consecutive configurations in which some glass is empty.
pub fn measure_empty_bound(
    m: &MinskyMachine,
    inputs: &[Configuration],
    fuel: u64,
) -> Result<Vec<EmptyGap>, MachineError> {
    if !m.is_deterministic() {
        return Err(MachineError::Nondeterministic(m.name().to_string()));
    }
    let mut out = Vec::with_capacity(inputs.len());
    for input in inputs {
        m.check_configuration(input)?;
        let outcome = run_unchecked(m, input, fuel);
        let trace = outcome.trace();
        let steps = trace.len() as u64;
        let sizes: Vec<u64> = trace.configurations().map(|c| c.coins() + 1).collect();
        let mut last_event = 0u64;
        let mut gap = 0u64;
        let mut worst = (0u64, sizes[0]);
        let mut close = |from: u64, to: u64, gap: &mut u64| {
            let (g, size) = (to - from, sizes[from as usize]);
            *gap = (*gap).max(g);
            if u128::from(g) * u128::from(worst.1) > u128::from(worst.0) * u128::from(size) {
                worst = (g, size);
            }
        };
        for (t, c) in trace.configurations().enumerate() {
            if c.glasses.contains(&0) {
                close(last_event, t as u64, &mut gap);
                last_event = t as u64;
            }
        }
        close(last_event, steps, &mut gap);
        out.push(EmptyGap {
            input: input.clone(),
            size: input.coins() + 1,
            gap,
            worst,
            steps,
            halted: matches!(outcome, RunOutcome::Halted(..)),
        });
    }
    Ok(out)
}
