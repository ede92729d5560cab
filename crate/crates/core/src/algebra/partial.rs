use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{AlgebraError, FiniteSemigroup};

/// Largest extension size `enumerate_extensions` will search.
pub const EXTENSION_CAP: usize = 5;

/// A finite set with identity (index 0), a partial product and inverses.
///
/// The first `base_len` elements form the distinguished subgroup G; the whole set is Gᵢ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialGroup {
    pub names: Vec<String>,
    pub base_len: usize,
    pub table: Vec<Vec<Option<usize>>>,
    pub inverse: Vec<usize>,
}

impl PartialGroup {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn mul(&self, a: usize, b: usize) -> Option<usize> {
        self.table[a][b]
    }

    /// Checks identity, inverses and (ab)c = a(bc) whenever all four products are defined.
    pub fn validate(&self) -> Result<(), AlgebraError> {
        let n = self.len();
        let bad = |m: String| Err(AlgebraError::PartialGroup(m));
        if n == 0 || self.base_len == 0 || self.base_len > n {
            return bad("needs an identity inside the base".into());
        }
        if self.table.len() != n || self.table.iter().any(|r| r.len() != n) || self.inverse.len() != n {
            return bad(format!("table must be {n}x{n}"));
        }
        if self.table.iter().flatten().flatten().chain(&self.inverse).any(|&x| x >= n) {
            return bad("entry out of range".into());
        }
        for x in 0..n {
            if self.table[0][x] != Some(x) || self.table[x][0] != Some(x) {
                return bad(format!("`{}` is not fixed by the identity", self.names[x]));
            }
            let y = self.inverse[x];
            if self.table[x][y] != Some(0) || self.table[y][x] != Some(0) {
                return bad(format!("`{}` is not an inverse of `{}`", self.names[y], self.names[x]));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let Some(ab) = self.table[a][b] else { continue };
                for c in 0..n {
                    let Some(bc) = self.table[b][c] else { continue };
                    if let (Some(l), Some(r)) = (self.table[ab][c], self.table[a][bc]) {
                        if l != r {
                            let s = |x: usize| self.names[x].clone();
                            return bad(format!("({}{}){} != {}({}{})", s(a), s(b), s(c), s(a), s(b), s(c)));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// G·G over the base.
    pub fn base_squares(&self) -> BTreeSet<usize> {
        let g = 0..self.base_len;
        g.clone().flat_map(|a| g.clone().filter_map(move |b| self.table[a][b])).collect()
    }

    /// G·G·G over the base, bracketed either way.
    pub fn base_cubes(&self) -> BTreeSet<usize> {
        let gg = self.base_squares();
        let mut out = BTreeSet::new();
        for &h in &gg {
            for g in 0..self.base_len {
                out.extend(self.table[h][g]);
                out.extend(self.table[g][h]);
            }
        }
        out
    }

    /// The base alone, with products leaving it made undefined.
    pub fn base(&self) -> PartialGroup {
        let k = self.base_len;
        let table = (0..k).map(|a| (0..k).map(|b| self.table[a][b].filter(|&x| x < k)).collect()).collect();
        PartialGroup { names: self.names[..k].to_vec(), base_len: k, table, inverse: self.inverse[..k].to_vec() }
    }
}

/// Every partial group on the names `e, a, b, …` of size `n`, with the whole set as base.
pub fn all_partial_groups(n: usize) -> Vec<PartialGroup> {
    let names: Vec<String> = std::iter::once("e".to_string()).chain((1..n).map(|i| ((b'a' + (i - 1) as u8) as char).to_string())).collect();
    let cells: Vec<(usize, usize)> = (1..n).flat_map(|a| (1..n).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    let choices = n + 1;
    let total = choices.pow(cells.len() as u32);
    for mut code in 0..total {
        let mut table = vec![vec![None; n]; n];
        for x in 0..n {
            table[0][x] = Some(x);
            table[x][0] = Some(x);
        }
        for &(a, b) in &cells {
            let v = code % choices;
            code /= choices;
            table[a][b] = (v < n).then_some(v);
        }
        let inverse: Option<Vec<usize>> =
            (0..n).map(|x| (0..n).find(|&y| table[x][y] == Some(0) && table[y][x] == Some(0))).collect();
        let Some(inverse) = inverse else { continue };
        let g = PartialGroup { names: names.clone(), base_len: n, table, inverse };
        if g.validate().is_ok() {
            out.push(g);
        }
    }
    out
}

/// Result of an extension search.
#[derive(Debug, Clone)]
pub struct Extensions {
    pub groups: Vec<PartialGroup>,
    /// Sizes above the searched bound were not explored.
    pub truncated: bool,
    pub bound: usize,
}

struct Search<'a> {
    g: &'a PartialGroup,
    size: usize,
    cells: Vec<(usize, usize, Vec<usize>)>,
    table: Vec<Vec<Option<usize>>>,
    found: BTreeMap<Vec<Option<usize>>, PartialGroup>,
}

impl Search<'_> {
    fn consistent(&self) -> bool {
        let t = &self.table;
        let n = self.size;
        for a in 0..n {
            for b in 0..n {
                let Some(ab) = t[a][b] else { continue };
                for c in 0..n {
                    let Some(bc) = t[b][c] else { continue };
                    if let (Some(l), Some(r)) = (t[ab][c], t[a][bc]) {
                        if l != r {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn fill(&mut self, i: usize) {
        if i == self.cells.len() {
            self.close();
            return;
        }
        let (a, b, ref values) = self.cells[i];
        for v in values.clone() {
            self.table[a][b] = Some(v);
            if self.consistent() {
                self.fill(i + 1);
            }
        }
        self.table[a][b] = None;
    }

    /// Assigns inverses to the new elements, then records the result.
    fn close(&mut self) {
        let k = self.g.len();
        let mut inverse: Vec<Option<usize>> = self.g.inverse.iter().map(|&x| Some(x)).collect();
        for n in k..self.size {
            inverse.push((0..k).find(|&y| self.table[n][y] == Some(0) && self.table[y][n] == Some(0)));
        }
        let lacking: Vec<usize> = (k..self.size).filter(|&n| inverse[n].is_none()).collect();
        self.pair(&lacking, &mut inverse);
    }

    fn pair(&mut self, lacking: &[usize], inverse: &mut Vec<Option<usize>>) {
        let Some(pos) = lacking.iter().position(|&n| inverse[n].is_none()) else {
            self.record(inverse.iter().map(|x| x.expect("all paired")).collect());
            return;
        };
        let n = lacking[pos];
        for &m in &lacking[pos..] {
            if inverse[m].is_some() {
                continue;
            }
            inverse[n] = Some(m);
            inverse[m] = Some(n);
            self.table[n][m] = Some(0);
            self.table[m][n] = Some(0);
            if self.consistent() {
                self.pair(lacking, inverse);
            }
            self.table[n][m] = None;
            self.table[m][n] = None;
            inverse[n] = None;
            inverse[m] = None;
        }
    }

    fn record(&mut self, inverse: Vec<usize>) {
        let k = self.g.len();
        let names: Vec<String> = self.g.names.iter().cloned().chain((k..self.size).map(|i| format!("n{}", i - k + 1))).collect();
        let cand = PartialGroup { names, base_len: k, table: self.table.clone(), inverse };
        if cand.validate().is_err() {
            return;
        }
        let cubes = cand.base_cubes();
        if !(0..self.size).all(|x| cubes.contains(&x)) {
            return;
        }
        let key = canonical_key(&cand);
        self.found.entry(key).or_insert(cand);
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Least table encoding over relabellings of the new elements.
fn canonical_key(g: &PartialGroup) -> Vec<Option<usize>> {
    let (k, n) = (g.base_len, g.len());
    let new: Vec<usize> = (k..n).collect();
    permutations(&new)
        .into_iter()
        .map(|p| {
            let map = |x: usize| if x < k { x } else { p[x - k] };
            let mut inv = vec![0; n];
            for x in 0..n {
                inv[map(x)] = x;
            }
            (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| g.table[inv[a]][inv[b]].map(map)).collect::<Vec<_>>()
        })
        .min()
        .expect("at least the identity permutation")
}

/// Partial groups Gᵢ ⊇ G with |Gᵢ| ≤ bound and Gᵢ = G·G·G, up to relabelling the new elements.
///
/// Products G×G undefined in G get new elements; products with one factor in G are total;
/// products of two new elements are defined only between inverse pairs.
pub fn enumerate_extensions(g: &PartialGroup, bound: usize) -> Result<Extensions, AlgebraError> {
    g.validate()?;
    if g.base_len != g.len() {
        return Err(AlgebraError::PartialGroup("extensions start from a partial group equal to its base".into()));
    }
    let k = g.len();
    let searched = bound.min(EXTENSION_CAP);
    let mut groups = Vec::new();
    for size in k..=searched {
        let mut table = vec![vec![None; size]; size];
        for (a, row) in g.table.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                table[a][b] = v;
            }
        }
        for x in 0..size {
            table[0][x] = Some(x);
            table[x][0] = Some(x);
        }
        let new: Vec<usize> = (k..size).collect();
        let all: Vec<usize> = (0..size).collect();
        let mut cells = Vec::new();
        for a in 1..k {
            for b in 1..k {
                if table[a][b].is_none() {
                    cells.push((a, b, new.clone()));
                }
            }
        }
        for &n in &new {
            for x in 1..k {
                cells.push((n, x, all.clone()));
                cells.push((x, n, all.clone()));
            }
        }
        if cells.iter().any(|c| c.2.is_empty()) {
            continue;
        }
        let mut search = Search { g, size, cells, table, found: BTreeMap::new() };
        search.fill(0);
        groups.extend(search.found.into_values());
    }
    // G·G·G has at most |G|³ elements
    Ok(Extensions { groups, truncated: searched < k.pow(3), bound: searched })
}

/// N(Gᵢ): blocks (1,G,2), (2,G,3), (3,G,4), (1,GG,3), (2,GG,4), (1,Gᵢ,4) and 0.
///
/// (i,u,j)(j,v,k) = (i,uv,k) when uv is defined and the triple is an element; otherwise 0.
pub fn split_system_semigroup(gi: &PartialGroup) -> Result<FiniteSemigroup, AlgebraError> {
    gi.validate()?;
    let gg = gi.base_squares();
    let mut triples: Vec<(u8, usize, u8)> = Vec::new();
    let mut seen = HashSet::new();
    let mut add = |t: (u8, usize, u8)| {
        if seen.insert(t) {
            triples.push(t);
        }
    };
    for (i, j) in [(1, 2), (2, 3), (3, 4)] {
        (0..gi.base_len).for_each(|g| add((i, g, j)));
    }
    for (i, j) in [(1, 3), (2, 4)] {
        gg.iter().for_each(|&h| add((i, h, j)));
    }
    (0..gi.len()).for_each(|k| add((1, k, 4)));
    let index: BTreeMap<(u8, usize, u8), usize> = triples.iter().enumerate().map(|(n, &t)| (t, n)).collect();
    let zero = triples.len();
    let mut names: Vec<String> = triples.iter().map(|&(i, u, j)| format!("({i},{},{j})", gi.names[u])).collect();
    names.push("0".into());
    let mut table = vec![vec![zero; zero + 1]; zero + 1];
    for (x, &(i, u, j)) in triples.iter().enumerate() {
        for (y, &(j2, v, k)) in triples.iter().enumerate() {
            if j != j2 {
                continue;
            }
            if let Some(&z) = gi.mul(u, v).and_then(|uv| index.get(&(i, uv, k))) {
                table[x][y] = z;
            }
        }
    }
    FiniteSemigroup::new(names, table, Some(zero))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trivial() -> PartialGroup {
        PartialGroup { names: vec!["1".into()], base_len: 1, table: vec![vec![Some(0)]], inverse: vec![0] }
    }

    #[test]
    fn small_partial_groups() {
        assert_eq!(all_partial_groups(1).len(), 1);
        // only Z2 on two elements
        assert_eq!(all_partial_groups(2).len(), 1);
        let three = all_partial_groups(3);
        assert!(three.iter().any(|g| g.mul(1, 1).is_none()));
        assert!(three.iter().all(|g| g.validate().is_ok()));
    }

    #[test]
    fn validation_failures() {
        let mut g = trivial();
        g.table[0][0] = None;
        assert!(g.validate().is_err());
        let bad = PartialGroup {
            names: vec!["e".into(), "a".into()],
            base_len: 2,
            table: vec![vec![Some(0), Some(1)], vec![Some(1), Some(1)]],
            inverse: vec![0, 0],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn trivial_split_system() {
        let n = split_system_semigroup(&trivial()).unwrap();
        let get = |s: &str| n.index(s).unwrap();
        assert_eq!(n.mul(get("(1,1,2)"), get("(2,1,3)")), get("(1,1,3)"));
        assert_eq!(n.mul(get("(1,1,2)"), get("(3,1,4)")), n.zero().unwrap());
        assert_eq!(n.mul(get("(1,1,3)"), get("(3,1,4)")), get("(1,1,4)"));
        assert_eq!(n.nilpotency_degree(), Some(4));
    }

    #[test]
    fn total_groups_do_not_extend() {
        for g in all_partial_groups(2) {
            let ext = enumerate_extensions(&g, 4).unwrap();
            assert_eq!(ext.groups, vec![g]);
        }
    }

    #[test]
    fn cyclic_extension_found() {
        // e, a, b = a⁻¹ with a² and b² undefined: Z4 with a² new is an extension
        let g = all_partial_groups(3)
            .into_iter()
            .find(|g| g.mul(1, 2) == Some(0) && g.mul(1, 1).is_none() && g.mul(2, 2).is_none())
            .unwrap();
        let ext = enumerate_extensions(&g, 4).unwrap();
        assert!(ext.truncated);
        assert!(ext.groups.iter().any(|gi| gi.len() == 4 && gi.mul(1, 1) == Some(3) && gi.mul(2, 2) == Some(3)));
        for gi in &ext.groups {
            assert!(gi.validate().is_ok());
            let n = split_system_semigroup(gi).unwrap();
            assert!(n.nilpotency_degree().is_some_and(|d| d <= 4));
        }
    }

    #[test]
    fn split_systems_are_four_nilpotent() {
        for size in 1..=3 {
            for g in all_partial_groups(size) {
                let total = (0..size).all(|a| (0..size).all(|b| g.mul(a, b).is_some()));
                // without all triple products the construction is not associative
                assert_eq!(split_system_semigroup(&g).is_ok(), total);
                for gi in enumerate_extensions(&g, 4).unwrap().groups {
                    let n = split_system_semigroup(&gi).unwrap();
                    assert!(n.nilpotency_degree().is_some_and(|d| d <= 4));
                }
            }
        }
    }
}
