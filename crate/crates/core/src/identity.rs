//! Identities, Zimin words and isoterms.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::algebra::{builtin, direct_product, eval_identity, AlgebraError, FiniteSemigroup, DEFAULT_BUDGET};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdentityError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `u = v` over variables numbered by first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Identity {
    names: Vec<String>,
    lhs: Vec<usize>,
    rhs: Vec<usize>,
}

impl Identity {
    /// Builds an identity from sides given by variable names.
    pub fn new<S: AsRef<str>>(u: &[S], v: &[S]) -> Result<Self, IdentityError> {
        if u.is_empty() || v.is_empty() {
            return Err(IdentityError::Parse { line: 1, message: "identity sides must be nonempty".into() });
        }
        let mut names: Vec<String> = Vec::new();
        let mut side = |w: &[S]| -> Vec<usize> {
            w.iter()
                .map(|x| {
                    let x = x.as_ref();
                    names.iter().position(|n| n == x).unwrap_or_else(|| {
                        names.push(x.to_string());
                        names.len() - 1
                    })
                })
                .collect()
        };
        let lhs = side(u);
        let rhs = side(v);
        Ok(Identity { names, lhs, rhs })
    }

    pub fn lhs(&self) -> &[usize] {
        &self.lhs
    }

    pub fn rhs(&self) -> &[usize] {
        &self.rhs
    }

    pub fn variables(&self) -> &[String] {
        &self.names
    }

    pub fn variable_count(&self) -> usize {
        self.names.len()
    }

    pub fn reversed(&self) -> Identity {
        let mut lhs = self.lhs.clone();
        let mut rhs = self.rhs.clone();
        lhs.reverse();
        rhs.reverse();
        Identity { names: self.names.clone(), lhs, rhs }
    }

    pub fn swapped(&self) -> Identity {
        Identity { names: self.names.clone(), lhs: self.rhs.clone(), rhs: self.lhs.clone() }
    }

    pub fn is_balanced(&self) -> bool {
        is_balanced(self)
    }
}

/// A variable is a letter followed by digits or `_`, so `xyx`, `x1x2` and `x^2y^2` need no spaces.
fn parse_side(text: &str, line: usize) -> Result<Vec<String>, IdentityError> {
    let bad = |m: String| IdentityError::Parse { line, message: m };
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        let cs: Vec<char> = tok.chars().collect();
        let mut i = 0;
        while i < cs.len() {
            if !cs[i].is_alphabetic() {
                return Err(bad(format!("bad variable `{tok}`")));
            }
            let start = i;
            i += 1;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '_') {
                i += 1;
            }
            let var: String = cs[start..i].iter().collect();
            let mut exp = 1;
            if i < cs.len() && cs[i] == '^' {
                let from = i + 1;
                i = from;
                while i < cs.len() && cs[i].is_ascii_digit() {
                    i += 1;
                }
                exp = cs[from..i].iter().collect::<String>().parse().unwrap_or(0);
                if exp == 0 {
                    return Err(bad(format!("bad exponent in `{tok}`")));
                }
            }
            out.extend(std::iter::repeat_n(var, exp));
        }
    }
    Ok(out)
}

fn parse_line(text: &str, line: usize) -> Result<Identity, IdentityError> {
    let (u, v) = text.split_once('=').ok_or_else(|| IdentityError::Parse { line, message: "expected `u = v`".into() })?;
    let u = parse_side(u, line)?;
    let v = parse_side(v, line)?;
    Identity::new(&u, &v).map_err(|_| IdentityError::Parse { line, message: "identity sides must be nonempty".into() })
}

impl FromStr for Identity {
    type Err = IdentityError;

    /// `x1 x2 x1 = x2 x1^2`; `^k` repeats a variable.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_line(s, 1)
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |w: &[usize]| w.iter().map(|&x| self.names[x].as_str()).collect::<Vec<_>>().join(" ");
        write!(f, "{} = {}", side(&self.lhs), side(&self.rhs))
    }
}

/// Identities file: one `u = v` per line; blank lines and `#` comments are skipped.
pub fn parse_identities(text: &str) -> Result<Vec<Identity>, IdentityError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| parse_line(l, i + 1))
        .collect()
}

/// Z₁ = x₁, Zₙ₊₁ = Zₙ xₙ₊₁ Zₙ, as 0-based variable indices.
pub fn zimin(n: usize) -> Vec<usize> {
    assert!(n >= 1, "Zimin words start at 1");
    let mut z = vec![0];
    for k in 1..n {
        let mut next = z.clone();
        next.push(k);
        next.extend_from_slice(&z);
        z = next;
    }
    z
}

pub fn show_zimin(z: &[usize]) -> String {
    z.iter().map(|x| format!("x{}", x + 1)).collect::<Vec<_>>().join(" ")
}

pub fn is_balanced(id: &Identity) -> bool {
    let count = |w: &[usize]| {
        let mut m = BTreeMap::new();
        for &x in w {
            *m.entry(x).or_insert(0usize) += 1;
        }
        m
    };
    count(&id.lhs) == count(&id.rhs)
}

/// All images of `side` as exactly the word `f`, as variable→(start, len) maps.
fn matches(side: &[usize], f: &[usize], img: &mut BTreeMap<usize, (usize, usize)>, pos: usize, out: &mut Vec<BTreeMap<usize, (usize, usize)>>) {
    let Some((&x, rest)) = side.split_first() else {
        if pos == f.len() {
            out.push(img.clone());
        }
        return;
    };
    let left = f.len() - pos;
    if left < side.len() {
        return;
    }
    if let Some(&(s, l)) = img.get(&x) {
        if l <= left && f[s..s + l] == f[pos..pos + l] {
            matches(rest, f, img, pos + l, out);
        }
        return;
    }
    for l in 1..=left - rest.len() {
        img.insert(x, (pos, l));
        matches(rest, f, img, pos + l, out);
    }
    img.remove(&x);
}

/// Some φ with φ(matched) a factor of W and φ(matched) ≠ φ(other).
fn side_witness(w: &[usize], matched: &[usize], other: &[usize]) -> bool {
    let extra = other.iter().any(|x| !matched.contains(x));
    for i in 0..w.len() {
        for j in i + matched.len()..=w.len() {
            let f = &w[i..j];
            let mut found = Vec::new();
            matches(matched, f, &mut BTreeMap::new(), 0, &mut found);
            if found.is_empty() {
                continue;
            }
            // a free variable can take images of two different lengths, so φ(other) ≠ f for one of them
            if extra {
                return true;
            }
            for img in found {
                let image: Vec<usize> = other.iter().flat_map(|x| {
                    let (s, l) = img[x];
                    f[s..s + l].iter().copied()
                }).collect();
                if image != f {
                    return true;
                }
            }
        }
    }
    false
}

/// No substitution instance of either side, distinct from the other side's instance, is a factor of W.
pub fn is_isoterm(w: &[usize], id: &Identity) -> bool {
    !side_witness(w, &id.lhs, &id.rhs) && !side_witness(w, &id.rhs, &id.lhs)
}

/// Letters of a word: whitespace-separated tokens, or single characters when there is no whitespace.
pub fn parse_letters(text: &str) -> Vec<usize> {
    let tokens: Vec<String> = if text.trim().contains(char::is_whitespace) {
        text.split_whitespace().map(String::from).collect()
    } else {
        text.trim().chars().map(String::from).collect()
    };
    let mut seen: Vec<String> = Vec::new();
    tokens
        .into_iter()
        .map(|t| {
            seen.iter().position(|s| *s == t).unwrap_or_else(|| {
                seen.push(t);
                seen.len() - 1
            })
        })
        .collect()
}

pub fn max_variables(sigma: &[Identity]) -> usize {
    sigma.iter().map(Identity::variable_count).max().unwrap_or(0)
}

/// Z_{n+1}, n the largest variable count, is an isoterm for every identity.
pub fn zimin_isoterm_for_all(sigma: &[Identity]) -> bool {
    let z = zimin(max_variables(sigma) + 1);
    sigma.iter().all(|id| is_isoterm(&z, id))
}

/// A witness semigroup and whether it satisfies every identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessCheck {
    pub name: String,
    pub satisfies: bool,
}

fn witnesses(names: &[(&str, &str, &str)], sigma: &[Identity], budget: u64) -> Result<Vec<WitnessCheck>, IdentityError> {
    names
        .iter()
        .map(|&(name, a, b)| {
            let f: FiniteSemigroup = if b.is_empty() { builtin(a)? } else { direct_product(&builtin(a)?, &builtin(b)?) };
            let mut satisfies = true;
            for id in sigma {
                if !eval_identity(&f, id, budget)? {
                    satisfies = false;
                    break;
                }
            }
            Ok(WitnessCheck { name: name.to_string(), satisfies })
        })
        .collect()
}

/// Clause values of the decidability condition with a non-isoterm Zimin word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicReport {
    pub n: usize,
    pub zimin_isoterm: bool,
    /// When set, the Zimin clause requires an isoterm instead of a non-isoterm.
    pub flipped: bool,
    pub nonbalanced: bool,
    pub witnesses: Vec<WitnessCheck>,
    pub value: bool,
}

/// ¬(Z_{n+1} isoterm for Σ) ∧ (Σ has a non-balanced identity ∨ none of T, P¹_right×P_left,
/// P_right×P¹_left satisfies Σ). `flip` negates the Zimin clause.
pub fn periodic_condition(sigma: &[Identity], flip: bool) -> Result<PeriodicReport, IdentityError> {
    periodic_condition_with_budget(sigma, flip, DEFAULT_BUDGET)
}

pub fn periodic_condition_with_budget(sigma: &[Identity], flip: bool, budget: u64) -> Result<PeriodicReport, IdentityError> {
    let zimin_isoterm = zimin_isoterm_for_all(sigma);
    let nonbalanced = sigma.iter().any(|id| !is_balanced(id));
    let witnesses = witnesses(&[("T", "T", ""), ("P1_right x P_left", "P1_right", "P_left"), ("P_right x P1_left", "P_right", "P1_left")], sigma, budget)?;
    let zimin_clause = zimin_isoterm == flip;
    let value = zimin_clause && (nonbalanced || witnesses.iter().all(|w| !w.satisfies));
    Ok(PeriodicReport { n: max_variables(sigma), zimin_isoterm, flipped: flip, nonbalanced, witnesses, value })
}

/// Clause values of the condition with an isoterm Zimin word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedReport {
    pub n: usize,
    pub zimin_isoterm: bool,
    pub all_balanced: bool,
    /// Each generator A of the three varieties A×ℕ; the variety is contained iff A satisfies Σ and Σ is balanced.
    pub witnesses: Vec<WitnessCheck>,
    pub value: bool,
}

/// Z_{n+1} isoterm for Σ ∧ Σ contains none of the varieties generated by T×ℕ, P_left×P¹_right×ℕ,
/// P¹_left×P_right×ℕ.
pub fn balanced_condition(sigma: &[Identity]) -> Result<BalancedReport, IdentityError> {
    balanced_condition_with_budget(sigma, DEFAULT_BUDGET)
}

pub fn balanced_condition_with_budget(sigma: &[Identity], budget: u64) -> Result<BalancedReport, IdentityError> {
    let zimin_isoterm = zimin_isoterm_for_all(sigma);
    let all_balanced = sigma.iter().all(is_balanced);
    let witnesses = witnesses(&[("T", "T", ""), ("P_left x P1_right", "P_left", "P1_right"), ("P1_left x P_right", "P1_left", "P_right")], sigma, budget)?;
    let value = zimin_isoterm && witnesses.iter().all(|w| !(w.satisfies && all_balanced));
    Ok(BalancedReport { n: max_variables(sigma), zimin_isoterm, all_balanced, witnesses, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn id(s: &str) -> Identity {
        s.parse().unwrap()
    }

    #[test]
    fn zimin_words() {
        assert_eq!(zimin(1), vec![0]);
        assert_eq!(zimin(2), vec![0, 1, 0]);
        assert_eq!(show_zimin(&zimin(3)), "x1 x2 x1 x3 x1 x2 x1");
        for n in 1..=12 {
            let z = zimin(n);
            assert_eq!(z.len(), (1 << n) - 1);
            assert_eq!(z.iter().filter(|&&x| x == n - 1).count(), 1);
        }
    }

    #[test]
    fn parsing() {
        let i = id("x1^2 x2 = x2 x1 x1");
        assert_eq!(i.to_string(), "x1 x1 x2 = x2 x1 x1");
        assert_eq!(i.variable_count(), 2);
        assert!("x1 x2".parse::<Identity>().is_err());
        assert!(" = x1".parse::<Identity>().is_err());
        let file = parse_identities("# sigma\nx1 x2 = x2 x1\n\nx1^2 = x1^3\n").unwrap();
        assert_eq!(file.len(), 2);
        assert!(matches!(parse_identities("x = x\nx x\n"), Err(IdentityError::Parse { line: 2, .. })));
        assert_eq!(id("xyx = yxy").to_string(), "x y x = y x y");
        assert_eq!(id("x^2y^2=y^2x^2"), id("x x y y = y y x x"));
        assert_eq!(id("x1x2x1 = x2^2").to_string(), "x1 x2 x1 = x2 x2");
        for bad in ["x^ = x", "x^0 = x", "1x = x", "x-y = x"] {
            assert!(bad.parse::<Identity>().is_err(), "{bad}");
        }
    }

    #[test]
    fn balance() {
        assert!(is_balanced(&id("x y = y x")));
        assert!(!is_balanced(&id("x^2 = x^3")));
        assert!(is_balanced(&id("x^2 y^2 = y^2 x^2")));
        for s in ["x y = y x", "x^2 = x^3", "x y x = x^2 y", "x y z = z y x^2"] {
            let i = id(s);
            assert_eq!(is_balanced(&i), is_balanced(&i.reversed()));
            assert_eq!(is_balanced(&i), is_balanced(&i.swapped()));
            let renamed = id(&s.replace('x', "w"));
            assert_eq!(is_balanced(&i), is_balanced(&renamed));
        }
    }

    #[test]
    fn isoterm_examples() {
        let w = parse_letters("ababbab");
        assert!(!is_isoterm(&w, &id("x^2 = x^3")));
        assert!(is_isoterm(&w, &id("x^3 = x^4")));
        assert!(is_isoterm(&[0], &id("x y = y x")));
        assert!(zimin_isoterm_for_all(&[id("x^3 = x^4")]));
        assert!(!zimin_isoterm_for_all(&[id("x y = y x")]));
        assert!(zimin_isoterm_for_all(&[]));
        // trivial identity never has distinct instances
        assert!(is_isoterm(&w, &id("x y = x y")));
        // extra variable on the other side
        assert!(!is_isoterm(&parse_letters("ab"), &id("x = x y")));
    }

    fn all_words(alpha: usize, max: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut layer = vec![vec![]];
        for _ in 0..max {
            layer = layer.iter().flat_map(|w: &Vec<usize>| (0..alpha).map(move |a| [w.clone(), vec![a]].concat())).collect();
            out.extend(layer.iter().cloned());
        }
        out
    }

    fn contains(w: &[usize], f: &[usize]) -> bool {
        f.len() <= w.len() && w.windows(f.len()).any(|x| x == f)
    }

    // every substitution with images of length ≤ |W| over the letters of W
    fn oracle(w: &[usize], i: &Identity, images: &[Vec<usize>]) -> bool {
        let k = i.variable_count();
        let mut choice = vec![0usize; k];
        loop {
            let apply = |side: &[usize]| side.iter().flat_map(|&x| images[choice[x]].iter().copied()).collect::<Vec<_>>();
            let (u, v) = (apply(i.lhs()), apply(i.rhs()));
            if u != v && (contains(w, &u) || contains(w, &v)) {
                return false;
            }
            let mut d = 0;
            while d < k {
                choice[d] += 1;
                if choice[d] < images.len() {
                    break;
                }
                choice[d] = 0;
                d += 1;
            }
            if d == k {
                return true;
            }
        }
    }

    #[test]
    fn isoterm_matches_oracle() {
        let ids: Vec<Identity> = ["x^2 = x^3", "x y = y x", "x y x = x^2 y", "x^2 y = y x^2", "x y = x", "x y x = y x y"].iter().map(|s| id(s)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let len = rng.gen_range(1..=7);
            let w: Vec<usize> = (0..len).map(|_| rng.gen_range(0..2)).collect();
            let alpha = w.iter().max().unwrap() + 1;
            let images = all_words(alpha, w.len());
            for i in &ids {
                assert_eq!(is_isoterm(&w, i), oracle(&w, i, &images), "{w:?} {i}");
            }
        }
    }

    #[test]
    fn isoterms_pass_to_factors() {
        let ids: Vec<Identity> = ["x^2 = x^3", "x y x = y x y", "x^2 y = y x^2"].iter().map(|s| id(s)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let len = rng.gen_range(1..=9);
            let w: Vec<usize> = (0..len).map(|_| rng.gen_range(0..3)).collect();
            for i in &ids {
                if is_isoterm(&w, i) {
                    let a = rng.gen_range(0..w.len());
                    let b = rng.gen_range(a + 1..=w.len());
                    assert!(is_isoterm(&w[a..b], i));
                }
            }
        }
    }

    #[test]
    fn decidability_conditions() {
        let empty = periodic_condition(&[], false).unwrap();
        assert!(!empty.value);
        assert!(periodic_condition(&[], true).unwrap().value == (empty.witnesses.iter().all(|w| !w.satisfies)));
        let periodic = periodic_condition(&[id("x^2 = x^3")], false).unwrap();
        assert!(periodic.nonbalanced);
        assert_eq!(periodic.value, !periodic.zimin_isoterm);
        let squares = periodic_condition(&[id("x^2 y^2 = y^2 x^2")], false).unwrap();
        assert!(!squares.nonbalanced);
        assert!(squares.witnesses[0].satisfies);
        let t4 = balanced_condition(&[id("x y = y x")]).unwrap();
        assert!(!t4.zimin_isoterm);
        assert!(!t4.value);
        let t4 = balanced_condition(&[]).unwrap();
        assert!(t4.zimin_isoterm && t4.all_balanced);
        assert!(t4.witnesses.iter().all(|w| w.satisfies));
        assert!(!t4.value);
    }
}
