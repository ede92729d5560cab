use super::{AlgebraError, FiniteSemigroup};

/// Rees matrix data: a group, index sets 1..=m and 1..=n, and an n×m sandwich matrix.
#[derive(Debug, Clone)]
pub struct ReesMatrix {
    pub group: FiniteSemigroup,
    pub rows: usize,
    pub cols: usize,
    /// `sandwich[j][i]` is P(i, j) for column index j and row index i; `None` is 0.
    pub sandwich: Vec<Vec<Option<usize>>>,
}

impl ReesMatrix {
    pub fn validate(&self) -> Result<(), AlgebraError> {
        let g = &self.group;
        let n = g.len();
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| g.mul(e, x) == x && g.mul(x, e) == x))
            .ok_or_else(|| AlgebraError::ReesMatrix("group has no identity".into()))?;
        if let Some(x) = (0..n).find(|&x| !(0..n).any(|y| g.mul(x, y) == identity && g.mul(y, x) == identity)) {
            return Err(AlgebraError::ReesMatrix(format!("`{}` has no inverse", g.name(x))));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(AlgebraError::ReesMatrix("empty index set".into()));
        }
        if self.sandwich.len() != self.cols || self.sandwich.iter().any(|r| r.len() != self.rows) {
            return Err(AlgebraError::ReesMatrix(format!("sandwich matrix must be {}x{}", self.cols, self.rows)));
        }
        if let Some(&Some(bad)) = self.sandwich.iter().flatten().find(|e| matches!(e, Some(x) if *x >= n)) {
            return Err(AlgebraError::Entry(bad));
        }
        Ok(())
    }
}

/// Elements `(i,g,j)` plus `0`; (i,g,j)(i',g',j') = (i, g·P(i',j)·g', j') or 0.
pub fn rees_matrix_semigroup(r: &ReesMatrix) -> Result<FiniteSemigroup, AlgebraError> {
    r.validate()?;
    let g = &r.group;
    let k = g.len();
    let (m, n) = (r.rows, r.cols);
    let size = m * k * n;
    let code = |i: usize, x: usize, j: usize| (i * k + x) * n + j;
    let mut names = Vec::with_capacity(size + 1);
    for i in 0..m {
        for x in 0..k {
            for j in 0..n {
                names.push(format!("({},{},{})", i + 1, g.name(x), j + 1));
            }
        }
    }
    names.push("0".into());
    let zero = size;
    let mut table = vec![vec![zero; size + 1]; size + 1];
    for a in 0..size {
        let (i, x, j) = (a / (k * n), (a / n) % k, a % n);
        for b in 0..size {
            let (i2, y, j2) = (b / (k * n), (b / n) % k, b % n);
            if let Some(p) = r.sandwich[j][i2] {
                table[a][b] = code(i, g.mul(g.mul(x, p), y), j2);
            }
        }
    }
    FiniteSemigroup::new(names, table, Some(zero))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2() -> FiniteSemigroup {
        FiniteSemigroup::new(vec!["1".into(), "g".into()], vec![vec![0, 1], vec![1, 0]], None).unwrap()
    }

    #[test]
    fn one_by_one() {
        let f = rees_matrix_semigroup(&ReesMatrix { group: z2(), rows: 1, cols: 1, sandwich: vec![vec![Some(0)]] }).unwrap();
        let g = f.index("(1,g,1)").unwrap();
        assert_eq!(f.name(f.mul(g, g)), "(1,1,1)");
        assert!(f.is_zero_simple());
    }

    #[test]
    fn zero_entries() {
        let r = ReesMatrix { group: z2(), rows: 2, cols: 2, sandwich: vec![vec![Some(0), None], vec![Some(1), Some(0)]] };
        let f = rees_matrix_semigroup(&r).unwrap();
        let a = f.index("(1,1,1)").unwrap();
        let b = f.index("(2,1,2)").unwrap();
        assert_eq!(f.mul(a, b), f.zero().unwrap());
        assert!(f.is_zero_simple());
        let zero_row = ReesMatrix { group: z2(), rows: 2, cols: 2, sandwich: vec![vec![Some(0), Some(1)], vec![None, None]] };
        assert!(!rees_matrix_semigroup(&zero_row).unwrap().is_zero_simple());
    }

    #[test]
    fn invertible_sandwiches_are_zero_simple() {
        for m in 1..=2 {
            for n in 1..=2 {
                for code in 0..(1usize << (m * n)) {
                    let sandwich = (0..n).map(|j| (0..m).map(|i| Some((code >> (j * m + i)) & 1)).collect()).collect();
                    let f = rees_matrix_semigroup(&ReesMatrix { group: z2(), rows: m, cols: n, sandwich }).unwrap();
                    assert!(f.is_zero_simple());
                    assert_eq!(f.len(), 2 * m * n + 1);
                }
            }
        }
    }

    #[test]
    fn rejects_non_groups() {
        let semilattice = FiniteSemigroup::new(vec!["0".into(), "e".into()], vec![vec![0, 0], vec![0, 1]], Some(0)).unwrap();
        let r = ReesMatrix { group: semilattice, rows: 1, cols: 1, sandwich: vec![vec![Some(1)]] };
        assert!(rees_matrix_semigroup(&r).is_err());
    }
}
