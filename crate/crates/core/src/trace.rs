//! Words modulo commuting letters (trace monoid): canonical forms, the
//! dependence order on positions, and factor matching.

use std::collections::{BTreeSet, HashSet};

/// Generator index inside a presentation.
pub type Gen = u16;

/// Symmetric commutation relation on generator indices. Equal letters never commute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commutation {
    n: usize,
    table: Vec<bool>,
    any: bool,
}

impl Commutation {
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (Gen, Gen)>) -> Self {
        let mut table = vec![false; n * n];
        let mut any = false;
        for (a, b) in pairs {
            let (a, b) = (a as usize, b as usize);
            if a != b {
                table[a * n + b] = true;
                table[b * n + a] = true;
                any = true;
            }
        }
        Commutation { n, table, any }
    }

    pub fn trivial(n: usize) -> Self {
        Commutation { n, table: vec![false; n * n], any: false }
    }

    #[inline]
    pub fn commute(&self, a: Gen, b: Gen) -> bool {
        self.any && self.table[a as usize * self.n + b as usize]
    }

    pub fn is_trivial(&self) -> bool {
        !self.any
    }
}

/// Fixed-width bit set over word positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<u64>);

impl Bits {
    pub fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    pub fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= *b;
        }
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }
}

/// Lexicographically least word commuting-equivalent to `w`, with letters
/// ordered by generator index.
pub fn canonical(c: &Commutation, w: &[Gen]) -> Vec<Gen> {
    if c.is_trivial() || w.len() < 2 {
        return w.to_vec();
    }
    let n = w.len();
    // blocked[i]: unplaced earlier positions that do not commute with w[i]
    let mut blocked = vec![0u32; n];
    for i in 0..n {
        for j in 0..i {
            if !c.commute(w[j], w[i]) {
                blocked[i] += 1;
            }
        }
    }
    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<usize> = None;
        for i in 0..n {
            if !used[i] && blocked[i] == 0 && best.is_none_or(|b| w[i] < w[b]) {
                best = Some(i);
            }
        }
        let b = best.expect("some position is always minimal");
        used[b] = true;
        out.push(w[b]);
        for i in b + 1..n {
            if !used[i] && !c.commute(w[b], w[i]) {
                blocked[i] -= 1;
            }
        }
    }
    out
}

/// The dependence order of a word: `pred[j]` holds every position that must stay before `j`.
#[derive(Debug, Clone)]
pub struct Poset {
    pred: Vec<Bits>,
}

impl Poset {
    pub fn new(c: &Commutation, w: &[Gen]) -> Self {
        let n = w.len();
        let mut pred: Vec<Bits> = Vec::with_capacity(n);
        for j in 0..n {
            let mut p = Bits::new(n);
            for i in 0..j {
                if !c.commute(w[i], w[j]) && !p.get(i) {
                    p.set(i);
                    let below = pred[i].clone();
                    p.union_with(&below);
                }
            }
            pred.push(p);
        }
        Poset { pred }
    }

    pub fn len(&self) -> usize {
        self.pred.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pred.is_empty()
    }

    #[inline]
    pub fn below(&self, i: usize, j: usize) -> bool {
        self.pred[j].get(i)
    }

    pub fn is_convex(&self, set: &Bits) -> bool {
        (0..self.len()).all(|j| set.get(j) || !self.pred[j].intersects(set) || !self.above_any(j, set))
    }

    fn above_any(&self, j: usize, set: &Bits) -> bool {
        (j + 1..self.len()).any(|k| set.get(k) && self.pred[k].get(j))
    }

    /// Every order ideal (downward-closed position set), including the empty one.
    pub fn downsets(&self) -> Vec<Bits> {
        let n = self.len();
        let mut seen: HashSet<Bits> = HashSet::new();
        let mut stack = vec![Bits::new(n)];
        seen.insert(Bits::new(n));
        let mut out = Vec::new();
        while let Some(d) = stack.pop() {
            for j in 0..n {
                if !d.get(j) && self.pred[j].is_subset(&d) {
                    let mut e = d.clone();
                    e.set(j);
                    if seen.insert(e.clone()) {
                        stack.push(e);
                    }
                }
            }
            out.push(d);
        }
        out
    }
}

/// An occurrence of a factor: positions (ascending) of a convex set whose letters
/// spell the factor modulo commuting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub positions: Vec<usize>,
}

impl Occurrence {
    /// Smallest position, used as the occurrence's address.
    pub fn start(&self) -> usize {
        self.positions[0]
    }
}

/// All occurrences of `u` in `w` modulo commuting, in lexicographic order of positions.
pub fn occurrences(c: &Commutation, u: &[Gen], w: &[Gen]) -> Vec<Occurrence> {
    if u.is_empty() || u.len() > w.len() {
        return Vec::new();
    }
    if c.is_trivial() {
        return w
            .windows(u.len())
            .enumerate()
            .filter(|(_, win)| *win == u)
            .map(|(i, _)| Occurrence { positions: (i..i + u.len()).collect() })
            .collect();
    }
    let cu = canonical(c, u);
    let poset = Poset::new(c, w);
    let mut need: Vec<(Gen, usize)> = Vec::new();
    for &g in u {
        match need.iter_mut().find(|(h, _)| *h == g) {
            Some(e) => e.1 += 1,
            None => need.push((g, 1)),
        }
    }
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    let mut set = Bits::new(w.len());
    search(c, w, &poset, &cu, &mut need, 0, &mut chosen, &mut set, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn search(
    c: &Commutation,
    w: &[Gen],
    poset: &Poset,
    cu: &[Gen],
    need: &mut Vec<(Gen, usize)>,
    from: usize,
    chosen: &mut Vec<usize>,
    set: &mut Bits,
    out: &mut Vec<Occurrence>,
) {
    if chosen.len() == cu.len() {
        if poset.is_convex(set) {
            let sub: Vec<Gen> = chosen.iter().map(|&p| w[p]).collect();
            if canonical(c, &sub) == cu {
                out.push(Occurrence { positions: chosen.clone() });
            }
        }
        return;
    }
    for p in from..w.len() {
        let Some(slot) = need.iter().position(|&(g, k)| g == w[p] && k > 0) else {
            continue;
        };
        // a skipped position lying between two chosen ones breaks convexity for good
        let breaks = chosen.first().is_some_and(|_| {
            (0..p).any(|j| !set.get(j) && poset.below(j, p) && poset.pred[j].intersects(set))
        });
        if breaks {
            continue;
        }
        need[slot].1 -= 1;
        chosen.push(p);
        set.set(p);
        search(c, w, poset, cu, need, p + 1, chosen, set, out);
        set.clear(p);
        chosen.pop();
        need[slot].1 += 1;
    }
}

/// Replaces an occurrence by `replacement`: the result is
/// (positions forced before the occurrence) · replacement · (the rest), in canonical form.
pub fn replace(c: &Commutation, w: &[Gen], occ: &Occurrence, replacement: &[Gen]) -> Vec<Gen> {
    let mut inside = Bits::new(w.len());
    for &p in &occ.positions {
        inside.set(p);
    }
    let mut out = Vec::with_capacity(w.len() + replacement.len());
    if c.is_trivial() {
        let s = occ.start();
        out.extend_from_slice(&w[..s]);
        out.extend_from_slice(replacement);
        out.extend_from_slice(&w[s + occ.positions.len()..]);
        return out;
    }
    let poset = Poset::new(c, w);
    let before: Vec<bool> = (0..w.len())
        .map(|j| !inside.get(j) && occ.positions.iter().any(|&p| poset.below(j, p)))
        .collect();
    out.extend((0..w.len()).filter(|&j| before[j]).map(|j| w[j]));
    out.extend_from_slice(replacement);
    out.extend((0..w.len()).filter(|&j| !before[j] && !inside.get(j)).map(|j| w[j]));
    canonical(c, &out)
}

pub fn is_factor(c: &Commutation, u: &[Gen], w: &[Gen]) -> bool {
    if u.len() == 2 && !c.is_trivial() {
        return two_letter_factors(c, w).contains(&(u[0], u[1]));
    }
    !occurrences(c, u, w).is_empty()
}

/// All 2-letter factors of `w` modulo commuting.
pub fn two_letter_factors(c: &Commutation, w: &[Gen]) -> HashSet<(Gen, Gen)> {
    let mut out = HashSet::new();
    if c.is_trivial() {
        out.extend(w.windows(2).map(|p| (p[0], p[1])));
        return out;
    }
    let poset = Poset::new(c, w);
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            let gap = (i + 1..j).any(|k| poset.below(i, k) && poset.below(k, j));
            if !gap {
                out.insert((w[i], w[j]));
                if c.commute(w[i], w[j]) {
                    out.insert((w[j], w[i]));
                }
            }
        }
    }
    out
}

/// Every nonempty factor of `w` modulo commuting, each in canonical form.
pub fn all_factors(c: &Commutation, w: &[Gen]) -> BTreeSet<Vec<Gen>> {
    let mut out = BTreeSet::new();
    if c.is_trivial() {
        for i in 0..w.len() {
            for j in i + 1..=w.len() {
                out.insert(w[i..j].to_vec());
            }
        }
        return out;
    }
    let poset = Poset::new(c, w);
    let downs = poset.downsets();
    for lo in &downs {
        for hi in &downs {
            if lo == hi || !lo.is_subset(hi) {
                continue;
            }
            let sub: Vec<Gen> = (0..w.len()).filter(|&j| hi.get(j) && !lo.get(j)).map(|j| w[j]).collect();
            out.insert(canonical(c, &sub));
        }
    }
    out
}
