use super::{AlgebraError, FiniteSemigroup};
use crate::identity::Identity;
use crate::presentation::{Letter, QuasiIdentity};

/// Largest number of assignments a brute-force evaluation may visit.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

fn check_budget(f: &FiniteSemigroup, vars: usize, budget: u64) -> Result<(), AlgebraError> {
    let needed = (f.len() as f64).powi(vars as i32);
    if needed > budget as f64 {
        return Err(AlgebraError::Budget { needed, budget });
    }
    Ok(())
}

fn eval_vars(f: &FiniteSemigroup, w: &[usize], a: &[usize]) -> usize {
    f.product(w.iter().map(|&x| a[x])).expect("identity sides are nonempty")
}

/// Checks `u = v` under every assignment of elements to variables.
pub fn eval_identity(f: &FiniteSemigroup, id: &Identity, budget: u64) -> Result<bool, AlgebraError> {
    let k = id.variable_count();
    check_budget(f, k, budget)?;
    if f.is_empty() {
        return Ok(true);
    }
    let mut a = vec![0usize; k];
    loop {
        if eval_vars(f, id.lhs(), &a) != eval_vars(f, id.rhs(), &a) {
            return Ok(false);
        }
        let mut i = 0;
        while i < k {
            a[i] += 1;
            if a[i] < f.len() {
                break;
            }
            a[i] = 0;
            i += 1;
        }
        if i == k {
            return Ok(true);
        }
    }
}

struct QiSearch<'a> {
    f: &'a FiniteSemigroup,
    zero: Option<usize>,
    order: Vec<usize>,
    /// Premises to check right after the variable at each depth is fixed.
    due: Vec<Vec<usize>>,
    premises: &'a [(Vec<Letter>, Vec<Letter>)],
    conclusion: &'a (Vec<Letter>, Vec<Letter>),
    /// Depth at which the conclusion becomes checkable.
    conclusion_due: usize,
    assignment: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl QiSearch<'_> {
    fn eval(&self, w: &[Letter]) -> usize {
        let z = self.zero;
        self.f
            .product(w.iter().map(|l| match l {
                Letter::Var(x) => self.assignment[*x],
                Letter::Zero => z.expect("zero checked before search"),
            }))
            .expect("words are nonempty")
    }

    fn holds(&self, (u, v): &(Vec<Letter>, Vec<Letter>)) -> bool {
        self.eval(u) == self.eval(v)
    }

    /// Finds an assignment with all premises true and the conclusion false.
    fn counterexample(&mut self, depth: usize) -> Result<bool, AlgebraError> {
        if depth == self.order.len() {
            return Ok(!self.holds(self.conclusion));
        }
        let x = self.order[depth];
        for e in 0..self.f.len() {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(AlgebraError::Budget { needed: self.nodes as f64, budget: self.budget });
            }
            self.assignment[x] = e;
            if (depth != self.conclusion_due || !self.holds(self.conclusion))
                && self.due[depth].iter().all(|&p| self.holds(&self.premises[p]))
                && self.counterexample(depth + 1)?
            {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn vars_of<'a>(w: impl IntoIterator<Item = &'a Letter> + 'a) -> impl Iterator<Item = usize> + 'a {
    w.into_iter().filter_map(|l| match l {
        Letter::Var(x) => Some(*x),
        Letter::Zero => None,
    })
}

/// True iff every assignment satisfying all premises satisfies the conclusion.
///
/// Search is depth-first over the conclusion's variables first; the conclusion and each
/// premise are checked as soon as their last variable is fixed.
/// `budget` bounds the number of search nodes visited.
pub fn eval_quasi_identity(f: &FiniteSemigroup, q: &QuasiIdentity, budget: u64) -> Result<bool, AlgebraError> {
    let uses_zero = q.premises.iter().chain([&q.conclusion]).any(|(u, v)| u.iter().chain(v).any(|l| *l == Letter::Zero));
    if uses_zero && f.zero().is_none() {
        return Err(AlgebraError::NoZero);
    }
    if f.is_empty() {
        return Ok(true);
    }
    let n = q.variables.len();
    let premise_vars: Vec<Vec<usize>> = q
        .premises
        .iter()
        .map(|(u, v)| {
            let mut vs: Vec<usize> = vars_of(u.iter().chain(v)).collect();
            vs.sort_unstable();
            vs.dedup();
            vs
        })
        .collect();
    // conclusion variables first, then greedily the variable completing the most premises
    let mut placed = vec![false; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for x in vars_of(q.conclusion.0.iter().chain(&q.conclusion.1)) {
        if !placed[x] {
            placed[x] = true;
            order.push(x);
        }
    }
    let conclusion_due = order.len().saturating_sub(1);
    while order.len() < n {
        let score = |x: usize| {
            let mut completes = 0;
            let mut touches = 0;
            for vs in &premise_vars {
                if vs.contains(&x) {
                    touches += 1;
                    if vs.iter().all(|&y| y == x || placed[y]) {
                        completes += 1;
                    }
                }
            }
            (completes, touches)
        };
        let x = (0..n).filter(|&x| !placed[x]).max_by_key(|&x| (score(x), std::cmp::Reverse(x))).expect("unplaced variable");
        placed[x] = true;
        order.push(x);
    }
    let mut position = vec![0; n];
    for (d, &x) in order.iter().enumerate() {
        position[x] = d;
    }
    let mut due = vec![Vec::new(); n.max(1)];
    let mut constant = Vec::new();
    for (i, vs) in premise_vars.iter().enumerate() {
        match vs.iter().map(|&x| position[x]).max() {
            Some(d) => due[d].push(i),
            None => constant.push(i),
        }
    }
    let mut search = QiSearch {
        f,
        zero: f.zero(),
        order,
        due,
        premises: &q.premises,
        conclusion: &q.conclusion,
        conclusion_due,
        assignment: vec![0; n],
        nodes: 0,
        budget,
    };
    if !constant.iter().all(|&p| search.holds(&q.premises[p])) {
        return Ok(true);
    }
    Ok(!search.counterexample(0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::builtin;

    fn semilattice() -> FiniteSemigroup {
        FiniteSemigroup::new(vec!["0".into(), "e".into()], vec![vec![0, 0], vec![0, 1]], Some(0)).unwrap()
    }

    #[test]
    fn identities() {
        let idem: Identity = "x1 x1 = x1".parse().unwrap();
        assert!(eval_identity(&semilattice(), &idem, DEFAULT_BUDGET).unwrap());
        assert!(!eval_identity(&builtin("T").unwrap(), &idem, DEFAULT_BUDGET).unwrap());
        let comm: Identity = "x1 x2 = x2 x1".parse().unwrap();
        assert!(!eval_identity(&builtin("P_right").unwrap(), &comm, DEFAULT_BUDGET).unwrap());
        let big: Identity = "x1 x2 x3 x4 x5 x6 x7 x8 x9 x10 x11 x12 = x1".parse().unwrap();
        assert!(matches!(eval_identity(&builtin("T").unwrap(), &big, DEFAULT_BUDGET), Err(AlgebraError::Budget { .. })));
    }

    // regression value for the square-commuting identity on the matrix-unit semigroups
    #[test]
    fn squares_commute_in_builtins() {
        let id: Identity = "x1 x1 x2 x2 = x2 x2 x1 x1".parse().unwrap();
        assert!(eval_identity(&builtin("T").unwrap(), &id, DEFAULT_BUDGET).unwrap());
        assert!(eval_identity(&builtin("P_right").unwrap(), &id, DEFAULT_BUDGET).unwrap());
        assert!(eval_identity(&builtin("P1_left").unwrap(), &id, DEFAULT_BUDGET).unwrap());
    }

    fn brute_qi(f: &FiniteSemigroup, q: &QuasiIdentity) -> bool {
        let n = q.variables.len();
        let total = f.len().pow(n as u32);
        (0..total).all(|mut code| {
            let mut a = vec![0; n];
            for x in a.iter_mut() {
                *x = code % f.len();
                code /= f.len();
            }
            let s = QiSearch {
                f,
                zero: f.zero(),
                order: vec![],
                due: vec![],
                premises: &q.premises,
                conclusion: &q.conclusion,
                conclusion_due: 0,
                assignment: a,
                nodes: 0,
                budget: 0,
            };
            !q.premises.iter().all(|p| s.holds(p)) || s.holds(&q.conclusion)
        })
    }

    #[test]
    fn quasi_identities_match_brute_force() {
        use Letter::*;
        let cases = vec![
            // xy = 0 -> yx = 0
            QuasiIdentity {
                variables: vec!["x".into(), "y".into()],
                premises: vec![(vec![Var(0), Var(1)], vec![Zero])],
                conclusion: (vec![Var(1), Var(0)], vec![Zero]),
            },
            // xx = x, yy = y -> xy = yx
            QuasiIdentity {
                variables: vec!["x".into(), "y".into()],
                premises: vec![(vec![Var(0), Var(0)], vec![Var(0)]), (vec![Var(1), Var(1)], vec![Var(1)])],
                conclusion: (vec![Var(0), Var(1)], vec![Var(1), Var(0)]),
            },
            // xy = z, zz = x -> z = 0
            QuasiIdentity {
                variables: vec!["x".into(), "y".into(), "z".into()],
                premises: vec![(vec![Var(0), Var(1)], vec![Var(2)]), (vec![Var(2), Var(2)], vec![Var(0)])],
                conclusion: (vec![Var(2)], vec![Zero]),
            },
        ];
        for name in crate::algebra::BUILTINS {
            let f = builtin(name).unwrap();
            for q in &cases {
                assert_eq!(eval_quasi_identity(&f, q, DEFAULT_BUDGET).unwrap(), brute_qi(&f, q), "{name}: {q}");
            }
        }
        let z2 = FiniteSemigroup::new(vec!["1".into(), "g".into()], vec![vec![0, 1], vec![1, 0]], None).unwrap();
        assert_eq!(eval_quasi_identity(&z2, &cases[0], DEFAULT_BUDGET), Err(AlgebraError::NoZero));
    }
}
