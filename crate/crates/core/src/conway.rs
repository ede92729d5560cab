//! Piecewise dilations on ℕ simulating 2-glass machines through the codes p_i·2ᵐ·3ⁿ.

use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::machine::{run, ClassicForm, Configuration, Label, MachineError, MinskyMachine, RunOutcome};
use crate::primes::first_primes;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConwayError {
    #[error("expected a 2-glass machine, got {0} glasses")]
    GlassCount(usize),
    #[error("command at label {0} is not of the form Add(k), Sub(k) or zero test")]
    NotClassic(Label),
    #[error("pieces {0} and {1} overlap on configuration codes")]
    Overlap(usize, usize),
    #[error("piece {piece} gives a non-integer on {n}")]
    NonInteger { piece: usize, n: BigUint },
    #[error("label {0} has no prime")]
    Label(Label),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

/// `n ↦ (num/den)·n` on the numbers divisible by every `require`, by no `forbid`,
/// and equal to `only` when that is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub require: Vec<u64>,
    pub forbid: Vec<u64>,
    pub only: Option<u64>,
    pub num: u64,
    pub den: u64,
    /// The label whose prime the piece tests; `None` for the stop piece.
    pub label: Option<Label>,
}

impl Piece {
    pub fn admits(&self, n: &BigUint) -> bool {
        if let Some(v) = self.only {
            return *n == BigUint::from(v);
        }
        self.require.iter().all(|&d| (n % d).is_zero()) && self.forbid.iter().all(|&d| !(n % d).is_zero())
    }

    /// Whether the piece needs 2 and 3 to divide n, and whether it forbids them.
    fn small_conditions(&self) -> ([bool; 2], [bool; 2]) {
        let req = [self.require.iter().any(|&d| d % 2 == 0), self.require.iter().any(|&d| d % 3 == 0)];
        let forb = [self.forbid.contains(&2), self.forbid.contains(&3)];
        (req, forb)
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}/{})·n when ", self.num, self.den)?;
        if let Some(v) = self.only {
            return write!(f, "n = {v}");
        }
        let mut conds: Vec<String> = self.require.iter().map(|d| format!("{d} | n")).collect();
        conds.extend(self.forbid.iter().map(|d| format!("{d} ∤ n")));
        f.write_str(&conds.join(", "))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConwayOptions {
    /// Use the condition 2p_i | n instead of 3p_i | n in the glass-2 decrement piece.
    pub literal_sub2: bool,
}

/// Ordered pieces with identity as the default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseDilation {
    pub pieces: Vec<Piece>,
    /// `primes[i]` is p_i, the (i+3)-rd prime.
    pub primes: Vec<u64>,
}

/// p_0..p_n: 5, 7, 11, ...
pub fn label_primes(n: Label) -> Vec<u64> {
    first_primes(n as usize + 3)[2..].to_vec()
}

pub fn encode_config(c: &Configuration) -> BigUint {
    let p = label_primes(c.label)[c.label as usize];
    let m = c.glasses.first().copied().unwrap_or(0);
    let n = c.glasses.get(1).copied().unwrap_or(0);
    BigUint::from(p) * BigUint::from(2u32).pow(m as u32) * BigUint::from(3u32).pow(n as u32)
}

impl PiecewiseDilation {
    /// The configuration coded by `n`, for labels this dilation knows.
    pub fn decode_number(&self, n: &BigUint) -> Option<Configuration> {
        if n.is_zero() {
            return None;
        }
        let mut rest = n.clone();
        let mut exps = [0u64; 2];
        for (k, d) in [2u32, 3].into_iter().enumerate() {
            while (&rest % d).is_zero() {
                rest /= d;
                exps[k] += 1;
            }
        }
        let r = rest.to_u64()?;
        let label = self.primes.iter().position(|&p| p == r)?;
        Some(Configuration::new(label as Label, exps.to_vec()))
    }

    pub fn encode(&self, c: &Configuration) -> Result<BigUint, ConwayError> {
        if c.label as usize >= self.primes.len() {
            return Err(ConwayError::Label(c.label));
        }
        Ok(encode_config(c))
    }

    /// Index of the first admissible piece.
    pub fn piece_for(&self, n: &BigUint) -> Option<usize> {
        self.pieces.iter().position(|p| p.admits(n))
    }

    pub fn apply(&self, n: &BigUint) -> Result<BigUint, ConwayError> {
        let Some(i) = self.piece_for(n) else {
            return Ok(n.clone());
        };
        let piece = &self.pieces[i];
        let (q, r) = (n * piece.num).div_rem(&BigUint::from(piece.den));
        if !r.is_zero() {
            return Err(ConwayError::NonInteger { piece: i, n: n.clone() });
        }
        Ok(q)
    }

    /// Pieces testing the same prime with compatible 2/3 conditions. Pieces on distinct
    /// primes can share a number only off the code domain.
    pub fn overlaps(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.pieces.len() {
            for j in i + 1..self.pieces.len() {
                let (a, b) = (&self.pieces[i], &self.pieces[j]);
                let overlap = match (a.label, b.label) {
                    (Some(x), Some(y)) if x == y => {
                        let ((ra, fa), (rb, fb)) = (a.small_conditions(), b.small_conditions());
                        (0..2).all(|k| !(ra[k] && fb[k]) && !(rb[k] && fa[k]))
                    }
                    (None, Some(_)) => b.admits(&BigUint::from(a.only.unwrap_or(0))),
                    (Some(_), None) => a.admits(&BigUint::from(b.only.unwrap_or(0))),
                    _ => false,
                };
                if overlap {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// One piece per command, then the stop piece 5 ↦ 1. Overlapping pieces are an error
/// except under `literal_sub2`.
pub fn compile_conway(m: &MinskyMachine, opts: ConwayOptions) -> Result<PiecewiseDilation, ConwayError> {
    if m.glasses() != 2 {
        return Err(ConwayError::GlassCount(m.glasses()));
    }
    let primes = label_primes(m.max_label());
    let mut pieces = Vec::new();
    for c in m.commands() {
        let form = c.classic_form().ok_or(ConwayError::NotClassic(c.label))?;
        let (pi, pj) = (primes[c.label as usize], primes[c.next as usize]);
        let piece = |require: Vec<u64>, forbid: Vec<u64>, num: u64, den: u64| Piece {
            require,
            forbid,
            only: None,
            num,
            den,
            label: Some(c.label),
        };
        pieces.push(match form {
            ClassicForm::Add(1) => piece(vec![pi], vec![], 2 * pj, pi),
            ClassicForm::Add(_) => piece(vec![pi], vec![], 3 * pj, pi),
            ClassicForm::Sub(1) => piece(vec![2 * pi], vec![], pj, 2 * pi),
            ClassicForm::Sub(_) if opts.literal_sub2 => piece(vec![2 * pi], vec![], pj, 3 * pi),
            ClassicForm::Sub(_) => piece(vec![3 * pi], vec![], pj, 3 * pi),
            ClassicForm::ZeroJump(1) => piece(vec![pi], vec![2], pj, pi),
            ClassicForm::ZeroJump(_) => piece(vec![pi], vec![3], pj, pi),
        });
    }
    pieces.push(Piece { require: vec![], forbid: vec![], only: Some(5), num: 1, den: 5, label: None });
    let f = PiecewiseDilation { pieces, primes };
    // the literal Sub(2) row can overlap a glass-2 zero test; first match wins there
    if let Some(&(i, j)) = f.overlaps().first().filter(|_| !opts.literal_sub2) {
        return Err(ConwayError::Overlap(i, j));
    }
    Ok(f)
}

pub fn apply_kappa(f: &PiecewiseDilation, n: &BigUint) -> Result<BigUint, ConwayError> {
    f.apply(n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub values: Vec<BigUint>,
    /// Step at which 1 was reached.
    pub reached_one: Option<usize>,
    /// The last value is fixed by κ and is not 1.
    pub fixed_point: bool,
}

impl Trajectory {
    pub fn max(&self) -> &BigUint {
        self.values.iter().max().expect("nonempty")
    }

    pub fn is_conclusive(&self) -> bool {
        self.reached_one.is_some() || self.fixed_point
    }
}

impl fmt::Display for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.values {
            writeln!(f, "{v}")?;
        }
        match self.reached_one {
            Some(s) => writeln!(f, "# reached_one: true s: {s} max: {}", self.max()),
            None => writeln!(f, "# reached_one: false steps: {} fixed_point: {} max: {}", self.values.len() - 1, self.fixed_point, self.max()),
        }
    }
}

/// Iterates κ from `n` for at most `fuel` steps, stopping at 1 or at a fixed point.
pub fn trajectory(f: &PiecewiseDilation, n: &BigUint, fuel: u64) -> Result<Trajectory, ConwayError> {
    let mut values = vec![n.clone()];
    for _ in 0..fuel {
        let at = values.last().expect("nonempty");
        if at.is_one() {
            break;
        }
        let next = f.apply(at)?;
        if next == *at {
            return Ok(Trajectory { values, reached_one: None, fixed_point: true });
        }
        values.push(next);
    }
    let reached_one = values.last().expect("nonempty").is_one().then(|| values.len() - 1);
    Ok(Trajectory { values, reached_one, fixed_point: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correspondence {
    Agree,
    Disagree,
    BothInconclusive,
}

impl fmt::Display for Correspondence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Correspondence::Agree => "agree",
            Correspondence::Disagree => "disagree",
            Correspondence::BothInconclusive => "both-inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondenceRow {
    pub m: u64,
    /// The run halted at (0;0,0) within fuel.
    pub accepted: bool,
    pub machine_conclusive: bool,
    pub reached_one: Option<usize>,
    pub conway_conclusive: bool,
    /// The trajectory equals the encoded run for every step of the run.
    pub lockstep: bool,
    pub verdict: Correspondence,
}

/// Compares the run from (1;m,0) with the trajectory of p₁·2ᵐ for each m.
///
/// Outcomes within fuel must coincide and the trajectory must track the encoded run
/// step by step. Two runs that both exhaust fuel while in lockstep count as agreeing;
/// without lockstep they are reported as inconclusive.
pub fn verify_correspondence(
    machine: &MinskyMachine,
    f: &PiecewiseDilation,
    ms: RangeInclusive<u64>,
    fuel: u64,
) -> Result<Vec<CorrespondenceRow>, ConwayError> {
    let stepper = Stepper::new(f);
    let mut rows = Vec::new();
    for m in ms {
        let start = Configuration::new(1, vec![m, 0]);
        let outcome = run(machine, &start, fuel)?;
        let accepted = matches!(&outcome, RunOutcome::Halted(c, _) if c.glasses.iter().all(|&g| g == 0));
        let machine_conclusive = !matches!(outcome, RunOutcome::OutOfFuel(_));
        let configs: Vec<&Configuration> = outcome.trace().configurations().collect();
        // same stopping rules as `trajectory` with fuel + 1 steps, without materializing values
        let mut x = stepper.factor(&f.encode(&start)?);
        let mut lockstep = true;
        let mut reached_one = None;
        let mut fixed_point = false;
        let mut k = 0usize;
        loop {
            if lockstep && k < configs.len() && x != stepper.code(configs[k]) {
                lockstep = false;
            }
            if x.is_one() {
                reached_one = Some(k);
                break;
            }
            if k as u64 == fuel + 1 {
                break;
            }
            if !stepper.apply(&mut x)? {
                fixed_point = true;
                break;
            }
            k += 1;
        }
        if k + 1 < configs.len() {
            lockstep = false;
        }
        let conway_conclusive = reached_one.is_some() || fixed_point;
        let reached = reached_one.is_some();
        let verdict = match (machine_conclusive, conway_conclusive) {
            (true, true) if accepted == reached && lockstep => Correspondence::Agree,
            (false, false) if lockstep && !reached => Correspondence::Agree,
            (false, false) => Correspondence::BothInconclusive,
            _ => Correspondence::Disagree,
        };
        rows.push(CorrespondenceRow { m, accepted, machine_conclusive, reached_one, conway_conclusive, lockstep, verdict });
    }
    Ok(rows)
}

/// n = rest·∏ basisᵢ^expsᵢ with `rest` coprime to the basis.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Factored {
    exps: Vec<u64>,
    rest: BigUint,
}

impl Factored {
    fn is_one(&self) -> bool {
        self.rest.is_one() && self.exps.iter().all(|&e| e == 0)
    }

    fn divisible(&self, d: &[u64]) -> bool {
        self.exps.iter().zip(d).all(|(e, k)| e >= k)
    }
}

struct SteppedPiece {
    require: Vec<Vec<u64>>,
    forbid: Vec<Vec<u64>>,
    only: Option<Vec<u64>>,
    num: Vec<u64>,
    den: Vec<u64>,
}

/// Applies a dilation on prime-exponent vectors; every prime the pieces mention is in the basis.
struct Stepper {
    basis: Vec<u64>,
    pieces: Vec<SteppedPiece>,
    primes: Vec<u64>,
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl Stepper {
    fn new(f: &PiecewiseDilation) -> Self {
        let mut basis: Vec<u64> = vec![2, 3];
        basis.extend(&f.primes);
        for p in &f.pieces {
            for &x in p.require.iter().chain(&p.forbid).chain([&p.num, &p.den]).chain(p.only.as_ref()) {
                basis.extend(prime_factors(x));
            }
        }
        basis.sort_unstable();
        basis.dedup();
        let exps = |mut x: u64| -> Vec<u64> {
            basis
                .iter()
                .map(|&p| {
                    let mut e = 0;
                    while x % p == 0 {
                        x /= p;
                        e += 1;
                    }
                    e
                })
                .collect()
        };
        let pieces = f
            .pieces
            .iter()
            .map(|p| SteppedPiece {
                require: p.require.iter().map(|&d| exps(d)).collect(),
                forbid: p.forbid.iter().map(|&d| exps(d)).collect(),
                only: p.only.map(exps),
                num: exps(p.num),
                den: exps(p.den),
            })
            .collect();
        Stepper { basis, pieces, primes: f.primes.clone() }
    }

    fn factor(&self, n: &BigUint) -> Factored {
        let mut rest = n.clone();
        let exps = self
            .basis
            .iter()
            .map(|&p| {
                let mut e = 0;
                while !rest.is_zero() && (&rest % p).is_zero() {
                    rest /= p;
                    e += 1;
                }
                e
            })
            .collect();
        Factored { exps, rest }
    }

    fn code(&self, c: &Configuration) -> Factored {
        let mut exps = vec![0; self.basis.len()];
        let at = |p: u64| self.basis.iter().position(|&b| b == p).expect("basis holds 2, 3 and the label primes");
        exps[at(2)] += c.glasses.first().copied().unwrap_or(0);
        exps[at(3)] += c.glasses.get(1).copied().unwrap_or(0);
        if let Some(&p) = self.primes.get(c.label as usize) {
            exps[at(p)] += 1;
            return Factored { exps, rest: BigUint::one() };
        }
        Factored { exps, rest: BigUint::zero() }
    }

    /// One step; false when no piece changes `x`.
    fn apply(&self, x: &mut Factored) -> Result<bool, ConwayError> {
        if x.rest.is_zero() {
            return Ok(false);
        }
        let admits = |p: &SteppedPiece| match &p.only {
            Some(v) => x.rest.is_one() && x.exps == *v,
            None => p.require.iter().all(|d| x.divisible(d)) && p.forbid.iter().all(|d| !x.divisible(d)),
        };
        let Some(i) = self.pieces.iter().position(admits) else {
            return Ok(false);
        };
        let p = &self.pieces[i];
        if p.num == p.den {
            return Ok(false);
        }
        let mut next = x.exps.clone();
        for k in 0..next.len() {
            let up = next[k] + p.num[k];
            if up < p.den[k] {
                let n = self.basis.iter().zip(&x.exps).fold(x.rest.clone(), |acc, (&b, &e)| acc * BigUint::from(b).pow(e as u32));
                return Err(ConwayError::NonInteger { piece: i, n });
            }
            next[k] = up - p.den[k];
        }
        x.exps = next;
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::reference::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn codes() {
        assert_eq!(encode_config(&Configuration::new(1, vec![2, 0])), big(28));
        assert_eq!(encode_config(&Configuration::new(0, vec![0, 0])), big(5));
        let f = compile_conway(&ex_a(), ConwayOptions::default()).unwrap();
        assert_eq!(f.decode_number(&big(12)), None);
        assert_eq!(f.decode_number(&big(7 * 4 * 27)), Some(Configuration::new(1, vec![2, 3])));
        assert_eq!(f.decode_number(&big(49)), None);
    }

    #[test]
    fn ex_a_pieces() {
        let f = compile_conway(&ex_a(), ConwayOptions::default()).unwrap();
        let shown: Vec<String> = f.pieces.iter().map(|p| p.to_string()).collect();
        assert!(shown.contains(&"(11/14)·n when 14 | n".to_string()));
        assert!(shown.contains(&"(5/7)·n when 7 | n, 2 ∤ n".to_string()));
        assert!(shown.contains(&"(39/13)·n when 13 | n".to_string()));
        assert_eq!(apply_kappa(&f, &big(28)).unwrap(), big(22));
        assert_eq!(apply_kappa(&f, &big(5)).unwrap(), big(1));
        assert_eq!(apply_kappa(&f, &big(17)).unwrap(), big(17));
    }

    #[test]
    fn trajectories() {
        let f = compile_conway(&ex_a(), ConwayOptions::default()).unwrap();
        let t = trajectory(&f, &big(28), 100).unwrap();
        assert_eq!(t.values, [28, 22, 7, 5, 1].map(big));
        assert_eq!(t.reached_one, Some(4));
        let t = trajectory(&f, &big(14), 200).unwrap();
        assert_eq!(t.reached_one, None);
        assert!(!t.fixed_point);
        assert_eq!(t.values.last().unwrap(), &(big(13) * BigUint::from(3u32).pow(198)));
        assert_eq!(trajectory(&f, &big(1), 10).unwrap().reached_one, Some(0));
    }

    #[test]
    fn stepper_matches_big_arithmetic() {
        for m in [ex_a(), ex_c()] {
            let f = compile_conway(&m, ConwayOptions::default()).unwrap();
            let st = Stepper::new(&f);
            for start in [28u64, 14, 7 * 8 * 27, 11 * 9, 13 * 4, 5, 17, 7 * 17, 1] {
                let t = trajectory(&f, &big(start), 60).unwrap();
                let mut x = st.factor(&big(start));
                for v in &t.values[1..] {
                    assert!(st.apply(&mut x).unwrap());
                    assert_eq!(x, st.factor(v));
                }
                if t.fixed_point {
                    assert!(!st.apply(&mut x).unwrap());
                }
            }
        }
    }

    #[test]
    fn literal_sub2_breaks_steps() {
        let m = crate::machine::parse_machine("machine s glasses=2\n1: if g2>0 dec g2 goto 1\n1: if g2=0 goto 0\n").unwrap();
        let fixed = compile_conway(&m, ConwayOptions::default()).unwrap();
        let lit = compile_conway(&m, ConwayOptions { literal_sub2: true }).unwrap();
        let n = encode_config(&Configuration::new(1, vec![0, 1]));
        assert_eq!(fixed.apply(&n).unwrap(), big(7));
        assert_ne!(lit.apply(&n).unwrap(), big(7));
    }

    #[test]
    fn nondeterministic_overlap_rejected() {
        let m = crate::machine::parse_machine("machine n glasses=2\n1: inc g1 goto 0\n1: inc g2 goto 0\n").unwrap();
        assert_eq!(compile_conway(&m, ConwayOptions::default()), Err(ConwayError::Overlap(0, 1)));
    }

    #[test]
    fn correspondence_on_ex_a() {
        let f = compile_conway(&ex_a(), ConwayOptions::default()).unwrap();
        for fuel in [1000, 100_000] {
            let rows = verify_correspondence(&ex_a(), &f, 0..=8, fuel).unwrap();
            for r in &rows {
                assert_eq!(r.verdict, Correspondence::Agree, "{r:?}");
                assert_eq!(r.reached_one.is_some(), r.m % 2 == 0);
            }
        }
        let rows = verify_correspondence(&ex_c(), &compile_conway(&ex_c(), ConwayOptions::default()).unwrap(), 0..=4, 1000).unwrap();
        assert!(rows.iter().all(|r| r.verdict == Correspondence::Agree), "{rows:?}");
    }
}
