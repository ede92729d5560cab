//! Finite semigroups given by multiplication tables.

mod eval;
mod partial;
mod quotient;
mod rees;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::rewrite::RewriteError;

pub use eval::{eval_identity, eval_quasi_identity, DEFAULT_BUDGET};
pub use partial::{all_partial_groups, enumerate_extensions, split_system_semigroup, Extensions, PartialGroup, EXTENSION_CAP};
pub use quotient::{rees_quotient, separating_quotient_search, Separation};
pub use rees::{rees_matrix_semigroup, ReesMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("table is not associative: ({0}{1}){2} != {0}({1}{2})")]
    NotAssociative(String, String, String),
    #[error("table must be {0}x{0}")]
    Shape(usize),
    #[error("entry {0} out of range")]
    Entry(usize),
    #[error("duplicate element name `{0}`")]
    DuplicateName(String),
    #[error("`{0}` is not an absorbing zero")]
    NotZero(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("evaluation needs {needed} assignments, budget is {budget}")]
    Budget { needed: f64, budget: u64 },
    #[error("the formula uses 0 but the semigroup has no zero")]
    NoZero,
    #[error("invalid partial group: {0}")]
    PartialGroup(String),
    #[error("invalid Rees matrix: {0}")]
    ReesMatrix(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("table file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// A finite semigroup; construction checks associativity exhaustively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSemigroup {
    names: Vec<String>,
    table: Vec<Vec<usize>>,
    zero: Option<usize>,
}

impl FiniteSemigroup {
    /// Builds a semigroup from a total table. `zero` is checked to absorb; when absent,
    /// an absorbing element is detected.
    pub fn new(names: Vec<String>, table: Vec<Vec<usize>>, zero: Option<usize>) -> Result<Self, AlgebraError> {
        let n = names.len();
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(AlgebraError::Shape(n));
        }
        if let Some(&bad) = table.iter().flatten().find(|&&x| x >= n) {
            return Err(AlgebraError::Entry(bad));
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name) {
                return Err(AlgebraError::DuplicateName(name.clone()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(AlgebraError::NotAssociative(names[a].clone(), names[b].clone(), names[c].clone()));
                    }
                }
            }
        }
        let absorbs = |z: usize| (0..n).all(|x| table[z][x] == z && table[x][z] == z);
        let zero = match zero {
            Some(z) if z >= n => return Err(AlgebraError::Entry(z)),
            Some(z) if !absorbs(z) => return Err(AlgebraError::NotZero(names[z].clone())),
            Some(z) => Some(z),
            None => (0..n).find(|&z| absorbs(z)),
        };
        Ok(FiniteSemigroup { names, table, zero })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn zero(&self) -> Option<usize> {
        self.zero
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    /// Product of a nonempty sequence.
    pub fn product(&self, xs: impl IntoIterator<Item = usize>) -> Option<usize> {
        let mut it = xs.into_iter();
        let first = it.next()?;
        Some(it.fold(first, |acc, x| self.table[acc][x]))
    }

    pub fn power(&self, x: usize, k: usize) -> usize {
        assert!(k >= 1, "powers start at 1");
        (1..k).fold(x, |acc, _| self.table[acc][x])
    }

    /// Least d with every d-fold product zero; `None` if there is no zero or no d ≤ |F|+1.
    pub fn nilpotency_degree(&self) -> Option<usize> {
        let z = self.zero?;
        let all: BTreeSet<usize> = (0..self.len()).collect();
        let mut power = all.clone();
        for d in 1..=self.len() + 1 {
            if power.len() == 1 && power.contains(&z) {
                return Some(d);
            }
            power = power.iter().flat_map(|&a| all.iter().map(move |&b| (a, b))).map(|(a, b)| self.table[a][b]).collect();
        }
        None
    }

    /// Has a zero, F² ≠ 0, and every two nonzero elements divide each other.
    pub fn is_zero_simple(&self) -> bool {
        let Some(z) = self.zero else { return false };
        let n = self.len();
        if (0..n).all(|a| (0..n).all(|b| self.table[a][b] == z)) {
            return false;
        }
        (0..n).filter(|&x| x != z).all(|x| {
            let ideal = self.principal_ideal(x);
            (0..n).all(|y| y == z || ideal.contains(&y))
        })
    }

    /// F¹xF¹.
    pub fn principal_ideal(&self, x: usize) -> BTreeSet<usize> {
        let n = self.len();
        let mut left: BTreeSet<usize> = (0..n).map(|a| self.table[a][x]).collect();
        left.insert(x);
        let mut out = left.clone();
        for &l in &left {
            out.extend((0..n).map(|b| self.table[l][b]));
        }
        out
    }

    /// Least m ≥ 1 with x^m = x^{2m} for every x.
    pub fn idempotent_exponent(&self) -> usize {
        (1..)
            .find(|&m| (0..self.len()).all(|x| self.power(x, m) == self.power(x, 2 * m)))
            .expect("finite semigroups have an idempotent power")
    }

    /// Multiplication-table file: names line, then one row of product names per element.
    pub fn to_table_file(&self) -> String {
        let mut out = self.names.join(" ");
        out.push('\n');
        for row in &self.table {
            out.push_str(&row.iter().map(|&x| self.names[x].as_str()).collect::<Vec<_>>().join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_table_file(text: &str) -> Result<Self, AlgebraError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (_, head) = lines.next().ok_or(AlgebraError::Parse { line: 1, message: "empty file".into() })?;
        let names: Vec<String> = head.split_whitespace().map(String::from).collect();
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut table = Vec::new();
        for (no, line) in lines {
            let row = line
                .split_whitespace()
                .map(|t| index.get(t).copied().ok_or_else(|| AlgebraError::Parse { line: no + 1, message: format!("unknown element `{t}`") }))
                .collect::<Result<Vec<_>, _>>()?;
            table.push(row);
        }
        let zero = names.iter().position(|n| n == "0");
        FiniteSemigroup::new(names, table, zero)
    }
}

impl fmt::Display for FiniteSemigroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table_file())
    }
}

pub fn make_finite_semigroup(names: Vec<String>, table: Vec<Vec<usize>>, zero: Option<usize>) -> Result<FiniteSemigroup, AlgebraError> {
    FiniteSemigroup::new(names, table, zero)
}

/// Componentwise product; elements are named `(x,y)`.
pub fn direct_product(a: &FiniteSemigroup, b: &FiniteSemigroup) -> FiniteSemigroup {
    let (na, nb) = (a.len(), b.len());
    let names = (0..na * nb).map(|k| format!("({},{})", a.names[k / nb], b.names[k % nb])).collect();
    let table = (0..na * nb)
        .map(|x| (0..na * nb).map(|y| a.table[x / nb][y / nb] * nb + b.table[x % nb][y % nb]).collect())
        .collect();
    let zero = a.zero.zip(b.zero).map(|(za, zb)| za * nb + zb);
    FiniteSemigroup::new(names, table, zero).expect("products of semigroups are semigroups")
}

/// 2×2 matrix units closed under multiplication, with 0 and an optional identity.
fn matrix_units(units: &[(u8, u8)], identity: bool) -> FiniteSemigroup {
    let mut names: Vec<String> = units.iter().map(|(i, j)| format!("e{i}{j}")).collect();
    names.push("0".into());
    let zero = units.len();
    if identity {
        names.push("1".into());
    }
    let n = names.len();
    let one = identity.then_some(zero + 1);
    let mut table = vec![vec![zero; n]; n];
    for x in 0..n {
        for y in 0..n {
            table[x][y] = if Some(x) == one {
                y
            } else if Some(y) == one {
                x
            } else if x == zero || y == zero {
                zero
            } else {
                let ((i, j), (k, l)) = (units[x], units[y]);
                if j == k {
                    units.iter().position(|&u| u == (i, l)).expect("unit set is closed")
                } else {
                    zero
                }
            };
        }
    }
    FiniteSemigroup::new(names, table, Some(zero)).expect("matrix units associate")
}

pub const BUILTINS: [&str; 5] = ["T", "P_right", "P_left", "P1_right", "P1_left"];

/// T = {e11, e12, e22, 0}; P_right = {e11, e12, 0}; P_left = {e11, e21, 0}; `P1_*` adjoin 1.
pub fn builtin(name: &str) -> Result<FiniteSemigroup, AlgebraError> {
    Ok(match name {
        "T" => matrix_units(&[(1, 1), (1, 2), (2, 2)], false),
        "P_right" => matrix_units(&[(1, 1), (1, 2)], false),
        "P_left" => matrix_units(&[(1, 1), (2, 1)], false),
        "P1_right" => matrix_units(&[(1, 1), (1, 2)], true),
        "P1_left" => matrix_units(&[(1, 1), (2, 1)], true),
        _ => return Err(AlgebraError::UnknownBuiltin(name.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn construction_checks() {
        assert!(FiniteSemigroup::new(s(&["0", "e"]), vec![vec![0, 0], vec![0, 1]], Some(0)).is_ok());
        let z2 = FiniteSemigroup::new(s(&["1", "g"]), vec![vec![0, 1], vec![1, 0]], None).unwrap();
        assert_eq!(z2.zero(), None);
        // left-zero on a, right-zero on b mixed: (ab)a = b, a(ba) = a
        let bad = FiniteSemigroup::new(s(&["a", "b"]), vec![vec![1, 1], vec![0, 0]], None);
        assert!(matches!(bad, Err(AlgebraError::NotAssociative(..))));
    }

    #[test]
    fn builtins() {
        let t = builtin("T").unwrap();
        let (e11, e12) = (t.index("e11").unwrap(), t.index("e12").unwrap());
        assert_eq!(t.mul(e11, e12), e12);
        let p = builtin("P_right").unwrap();
        let (e11, e12) = (p.index("e11").unwrap(), p.index("e12").unwrap());
        assert_eq!(p.mul(e12, e11), p.zero().unwrap());
        let p1 = builtin("P1_right").unwrap();
        assert_eq!(p1.mul(p1.index("1").unwrap(), p1.index("e12").unwrap()), p1.index("e12").unwrap());
        assert!(builtin("Q").is_err());
    }

    #[test]
    fn products() {
        let pr = direct_product(&builtin("P1_right").unwrap(), &builtin("P_left").unwrap());
        assert_eq!(pr.len(), 12);
        assert_eq!(pr.zero().map(|z| pr.name(z).to_string()), Some("(0,0)".to_string()));
        let trivial = FiniteSemigroup::new(s(&["1"]), vec![vec![0]], None).unwrap();
        let t = builtin("T").unwrap();
        let tt = direct_product(&t, &trivial);
        assert_eq!(tt.table(), t.table());
    }

    #[test]
    fn nilpotency_and_simplicity() {
        let t = builtin("T").unwrap();
        assert_eq!(t.nilpotency_degree(), None);
        assert!(!t.is_zero_simple());
        let null = FiniteSemigroup::new(s(&["0", "a"]), vec![vec![0, 0], vec![0, 0]], Some(0)).unwrap();
        assert_eq!(null.nilpotency_degree(), Some(2));
        assert!(!null.is_zero_simple());
    }

    #[test]
    fn table_file_round_trip() {
        let t = builtin("P1_left").unwrap();
        let text = t.to_table_file();
        let back = FiniteSemigroup::parse_table_file(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_table_file(), text);
    }

    #[test]
    fn idempotent_powers() {
        for name in BUILTINS {
            let f = builtin(name).unwrap();
            let m = f.idempotent_exponent();
            for l in 1..=4usize {
                let fact: usize = (1..=l).product();
                if fact % m == 0 {
                    assert!((0..f.len()).all(|x| f.power(x, fact) == f.power(x, 2 * fact)));
                }
            }
        }
    }
}
