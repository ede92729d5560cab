use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{applications, NormalForm, Normalizer, Orientation, RewriteError};
use crate::presentation::{Presentation, Word};
use crate::trace::{all_factors, Gen};

/// Divisors of a word: the factors of every word in its equality class, grouped
/// into classes of equal elements.
#[derive(Debug, Clone)]
pub struct DivisorSet {
    closure: Vec<Word>,
    factors: Vec<Word>,
    class_of: HashMap<Word, usize>,
    classes: Vec<Vec<Word>>,
}

impl DivisorSet {
    /// Normal forms of the words equal to the input, in discovery order.
    pub fn closure(&self) -> &[Word] {
        &self.closure
    }

    /// Every factor, ordered by length then lexicographically.
    pub fn factors(&self) -> &[Word] {
        &self.factors
    }

    pub fn contains(&self, w: &[Gen]) -> bool {
        self.class_of.contains_key(w)
    }

    pub fn class_of(&self, w: &[Gen]) -> Option<usize> {
        self.class_of.get(w).copied()
    }

    /// Classes of equal divisors; the first member is the shortest, least word.
    pub fn classes(&self) -> &[Vec<Word>] {
        &self.classes
    }
}

fn usable_relations(p: &Presentation, rels: &[(Word, Word)]) -> Vec<(usize, Orientation)> {
    let counter: Vec<Gen> = ["c", "c'", "e"].iter().filter_map(|n| p.gen(n)).collect();
    let mut out = Vec::new();
    for (i, (u, v)) in rels.iter().enumerate().take(p.relations().len()) {
        if p.is_commuting_relation(u, v) || (p.variant().is_primed() && u.iter().chain(v).all(|g| counter.contains(g))) {
            continue;
        }
        out.push((i, Orientation::L2R));
        if !p.zero().is_some_and(|z| *v == [z]) {
            out.push((i, Orientation::R2L));
        }
    }
    out
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Closes `{w}` under relation applications, expanding at most `fuel` words, and
/// collects the divisors. Fails with `ZeroWord` if the closure meets zero.
pub fn divisor_set(p: &Presentation, w: &[Gen], fuel: u64) -> Result<DivisorSet, RewriteError> {
    let n = Normalizer::new(p);
    let rels = p.all_relations();
    let moves = usable_relations(p, &rels);
    let NormalForm::Word(start) = n.run(w)? else {
        return Err(RewriteError::ZeroWord);
    };
    let mut seen: BTreeSet<Word> = BTreeSet::from([start.clone()]);
    let mut closure = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    let mut spent = 0u64;
    while let Some(cur) = queue.pop_front() {
        if spent >= fuel {
            return Err(RewriteError::FuelExceeded(spent));
        }
        spent += 1;
        for &(i, o) in &moves {
            for (_, next) in applications(p, &rels, i, o, &cur) {
                let NormalForm::Word(next) = n.run(&next)? else {
                    return Err(RewriteError::ZeroWord);
                };
                if seen.insert(next.clone()) {
                    closure.push(next.clone());
                    queue.push_back(next);
                }
            }
        }
    }

    let mut factor_set = BTreeSet::new();
    for c in &closure {
        factor_set.extend(all_factors(p.commutation(), c));
    }
    let mut factors: Vec<Word> = factor_set.into_iter().collect();
    factors.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let index: HashMap<Word, usize> = factors.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
    let mut parent: Vec<usize> = (0..factors.len()).collect();
    for (i, f) in factors.iter().enumerate() {
        for &(r, o) in &moves {
            for (_, next) in applications(p, &rels, r, o, f) {
                if let NormalForm::Word(g) = n.run(&next)? {
                    if let Some(&j) = index.get(&g) {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut class_ids: HashMap<usize, usize> = HashMap::new();
    let mut classes: Vec<Vec<Word>> = Vec::new();
    let mut class_of = HashMap::new();
    for (i, f) in factors.iter().enumerate() {
        let root = find(&mut parent, i);
        let id = *class_ids.entry(root).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[id].push(f.clone());
        class_of.insert(f.clone(), id);
    }
    Ok(DivisorSet { closure, factors, class_of, classes })
}

/// The Rees quotient of a presentation by the ideal of non-divisors of a word.
#[derive(Debug, Clone)]
pub struct ReesQuotient {
    pub names: Vec<String>,
    pub table: Vec<Vec<usize>>,
    pub zero: usize,
    /// Image of each generator; the zero generator and non-divisors map to `zero`.
    pub generator_image: Vec<usize>,
}

impl ReesQuotient {
    pub fn new(p: &Presentation, d: &DivisorSet) -> Result<Self, RewriteError> {
        let n = Normalizer::new(p);
        let k = d.classes.len();
        let zero = k;
        let show = |w: &Word| w.iter().map(|&g| p.generators()[g as usize].as_str()).collect::<Vec<_>>().join(".");
        let mut names: Vec<String> = d.classes.iter().map(|c| show(&c[0])).collect();
        names.push("0".into());
        let class = |w: &[Gen]| -> Result<usize, RewriteError> {
            Ok(match n.run(w)? {
                NormalForm::Zero => zero,
                NormalForm::Word(w) => d.class_of(&w).unwrap_or(zero),
            })
        };
        let mut table = vec![vec![zero; k + 1]; k + 1];
        for i in 0..k {
            for j in 0..k {
                let w = [d.classes[i][0].clone(), d.classes[j][0].clone()].concat();
                table[i][j] = class(&w)?;
            }
        }
        let generator_image = (0..p.generators().len() as Gen)
            .map(|g| if Some(g) == p.zero() { Ok(zero) } else { class(&[g]) })
            .collect::<Result<_, _>>()?;
        Ok(ReesQuotient { names, table, zero, generator_image })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn eval(&self, w: &[Gen]) -> usize {
        let mut it = w.iter().map(|&g| self.generator_image[g as usize]);
        let first = it.next().unwrap_or(self.zero);
        it.fold(first, |acc, x| self.table[acc][x])
    }

    /// Every defining relation holds under the generator map.
    pub fn respects(&self, p: &Presentation) -> bool {
        p.all_relations().iter().all(|(u, v)| self.eval(u) == self.eval(v))
    }
}
