//! Exhaustive Weyl groups: elements are integer matrices on the root lattice
//! (column `i` is the image of `α_i`), with a parallel matrix on the coroot
//! lattice. Simple indices are 0-based internally.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rootsys::{Family, Lattice, LatticeVector, RootSystem};

pub const DEFAULT_ORDER_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementId(pub usize);

impl ElementId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylElement {
    rank: usize,
    root_matrix: Vec<i64>,
    coroot_matrix: Vec<i64>,
}

fn mat_mul(n: usize, a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut c = vec![0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

fn mat_vec(n: usize, a: &[i64], v: &[i64]) -> Vec<i64> {
    (0..n).map(|i| (0..n).map(|j| a[i * n + j] * v[j]).sum()).collect()
}

impl WeylElement {
    fn identity(rank: usize) -> Self {
        let mut m = vec![0; rank * rank];
        for i in 0..rank {
            m[i * rank + i] = 1;
        }
        WeylElement { rank, root_matrix: m.clone(), coroot_matrix: m }
    }

    fn generator(rs: &RootSystem, s: usize) -> Self {
        let n = rs.rank();
        let mut root_matrix = vec![0; n * n];
        let mut coroot_matrix = vec![0; n * n];
        for j in 0..n {
            let r = rs.reflect(s, &rs.simple_root(j)).expect("valid index");
            let c = rs.reflect(s, &rs.simple_coroot(j)).expect("valid index");
            for i in 0..n {
                root_matrix[i * n + j] = r.coords()[i];
                coroot_matrix[i * n + j] = c.coords()[i];
            }
        }
        WeylElement { rank: n, root_matrix, coroot_matrix }
    }

    fn compose(&self, other: &WeylElement) -> WeylElement {
        WeylElement {
            rank: self.rank,
            root_matrix: mat_mul(self.rank, &self.root_matrix, &other.root_matrix),
            coroot_matrix: mat_mul(self.rank, &self.coroot_matrix, &other.coroot_matrix),
        }
    }

    /// Row-major matrix on simple-root coordinates.
    pub fn root_matrix(&self) -> &[i64] {
        &self.root_matrix
    }

    /// Row-major matrix on simple-coroot coordinates.
    pub fn coroot_matrix(&self) -> &[i64] {
        &self.coroot_matrix
    }

    pub fn apply_root(&self, v: &[i64]) -> Vec<i64> {
        mat_vec(self.rank, &self.root_matrix, v)
    }

    pub fn apply_coroot(&self, v: &[i64]) -> Vec<i64> {
        mat_vec(self.rank, &self.coroot_matrix, v)
    }
}

#[derive(Debug, Clone)]
pub struct WeylGroup {
    root_system: RootSystem,
    elements: Vec<WeylElement>,
    lengths: Vec<usize>,
    index: HashMap<Vec<i64>, usize>,
    right: Vec<Vec<usize>>,
    left: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    longest: usize,
}

fn factorial(n: u128) -> u128 {
    (1..=n).product()
}

/// Classical order of the Weyl group of a simple type.
pub fn classical_order(rs: &RootSystem) -> u128 {
    let n = rs.rank() as u128;
    match rs.label().family() {
        Family::A => factorial(n + 1),
        Family::B | Family::C => (1u128 << n) * factorial(n),
        Family::D => (1u128 << (n - 1)) * factorial(n),
        Family::E => match n {
            6 => 51_840,
            7 => 2_903_040,
            _ => 696_729_600,
        },
        Family::F => 1152,
        Family::G => 12,
    }
}

impl WeylGroup {
    pub fn new(rs: &RootSystem) -> Result<WeylGroup> {
        Self::with_cap(rs, DEFAULT_ORDER_CAP)
    }

    /// Enumerates W by breadth-first right multiplication with simple
    /// reflections. Refuses when the group would exceed `cap` elements.
    pub fn with_cap(rs: &RootSystem, cap: usize) -> Result<WeylGroup> {
        let order = classical_order(rs);
        if order > cap as u128 {
            return Err(Error::GroupTooLarge { order, cap });
        }
        let n = rs.rank();
        let gens: Vec<WeylElement> = (0..n).map(|s| WeylElement::generator(rs, s)).collect();

        let id = WeylElement::identity(n);
        let mut elements = vec![id.clone()];
        let mut lengths = vec![0usize];
        let mut index = HashMap::new();
        index.insert(id.root_matrix.clone(), 0usize);
        let mut right: Vec<Vec<usize>> = vec![vec![usize::MAX; n]];
        let mut queue = VecDeque::from([0usize]);

        while let Some(w) = queue.pop_front() {
            for (s, g) in gens.iter().enumerate() {
                let ws = elements[w].compose(g);
                let j = match index.get(&ws.root_matrix) {
                    Some(&j) => j,
                    None => {
                        let j = elements.len();
                        index.insert(ws.root_matrix.clone(), j);
                        elements.push(ws);
                        lengths.push(lengths[w] + 1);
                        right.push(vec![usize::MAX; n]);
                        queue.push_back(j);
                        j
                    }
                };
                right[w][s] = j;
            }
        }
        if elements.len() as u128 != order {
            return Err(Error::Internal(format!(
                "enumerated {} elements, expected {order}",
                elements.len()
            )));
        }

        let left: Vec<Vec<usize>> = elements
            .iter()
            .map(|w| gens.iter().map(|g| index[&g.compose(w).root_matrix]).collect())
            .collect();
        let mut inverse = vec![usize::MAX; elements.len()];
        // inverse along BFS order: (w s)^{-1} = s w^{-1}
        inverse[0] = 0;
        let mut order_by_len: Vec<usize> = (0..elements.len()).collect();
        order_by_len.sort_by_key(|&w| lengths[w]);
        for &w in &order_by_len {
            for s in 0..n {
                let ws = right[w][s];
                if inverse[ws] == usize::MAX {
                    inverse[ws] = left[inverse[w]][s];
                }
            }
        }
        let max_len = *lengths.iter().max().unwrap();
        let longest = lengths.iter().position(|&l| l == max_len).unwrap();

        Ok(WeylGroup {
            root_system: rs.clone(),
            elements,
            lengths,
            index,
            right,
            left,
            inverse,
            longest,
        })
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.root_system
    }

    pub fn rank(&self) -> usize {
        self.root_system.rank()
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementId> + '_ {
        (0..self.elements.len()).map(ElementId)
    }

    pub fn element(&self, w: ElementId) -> &WeylElement {
        &self.elements[w.0]
    }

    pub fn identity(&self) -> ElementId {
        ElementId(0)
    }

    pub fn longest(&self) -> ElementId {
        ElementId(self.longest)
    }

    pub fn simple(&self, s: usize) -> ElementId {
        ElementId(self.right[0][s])
    }

    pub fn length(&self, w: ElementId) -> usize {
        self.lengths[w.0]
    }

    /// `w · s_s`
    pub fn mul_simple_right(&self, w: ElementId, s: usize) -> ElementId {
        ElementId(self.right[w.0][s])
    }

    /// `s_s · w`
    pub fn mul_simple_left(&self, s: usize, w: ElementId) -> ElementId {
        ElementId(self.left[w.0][s])
    }

    pub fn inverse(&self, w: ElementId) -> ElementId {
        ElementId(self.inverse[w.0])
    }

    pub fn mul(&self, u: ElementId, w: ElementId) -> ElementId {
        self.reduced_word(w)
            .into_iter()
            .fold(u, |acc, s| self.mul_simple_right(acc, s))
    }

    /// Product of simple reflections along a word (0-based letters).
    pub fn from_word(&self, word: &[usize]) -> Result<ElementId> {
        let mut w = self.identity();
        for &s in word {
            if s >= self.rank() {
                return Err(Error::IndexOutOfRange { index: s, rank: self.rank() });
            }
            w = self.mul_simple_right(w, s);
        }
        Ok(w)
    }

    pub fn is_right_descent(&self, w: ElementId, s: usize) -> bool {
        self.lengths[self.right[w.0][s]] < self.lengths[w.0]
    }

    pub fn is_left_descent(&self, s: usize, w: ElementId) -> bool {
        self.lengths[self.left[w.0][s]] < self.lengths[w.0]
    }

    /// Lexicographically greedy reduced word: peel off the smallest right
    /// descent repeatedly.
    pub fn reduced_word(&self, w: ElementId) -> Vec<usize> {
        let mut word = Vec::with_capacity(self.length(w));
        let mut cur = w;
        while self.length(cur) > 0 {
            let s = (0..self.rank())
                .find(|&s| self.is_right_descent(cur, s))
                .expect("non-identity element has a right descent");
            word.push(s);
            cur = self.mul_simple_right(cur, s);
        }
        word.reverse();
        word
    }

    /// A uniformly chosen descent at each step; yields a random reduced word.
    pub fn random_reduced_word<R: Rng + ?Sized>(&self, w: ElementId, rng: &mut R) -> Vec<usize> {
        let mut word = Vec::with_capacity(self.length(w));
        let mut cur = w;
        while self.length(cur) > 0 {
            let descents: Vec<usize> = (0..self.rank()).filter(|&s| self.is_right_descent(cur, s)).collect();
            let s = descents[rng.gen_range(0..descents.len())];
            word.push(s);
            cur = self.mul_simple_right(cur, s);
        }
        word.reverse();
        word
    }

    /// Bruhat order via the lifting property: with `s` a right descent of `w`,
    /// `u ≤ w` iff `us ≤ ws` (when `s` is also a descent of `u`) or `u ≤ ws`.
    pub fn bruhat_leq(&self, u: ElementId, w: ElementId) -> bool {
        let (mut u, mut w) = (u, w);
        loop {
            if self.length(u) > self.length(w) {
                return false;
            }
            if self.length(w) == 0 {
                return self.length(u) == 0;
            }
            if self.length(u) == 0 {
                return true;
            }
            let s = (0..self.rank())
                .find(|&s| self.is_right_descent(w, s))
                .expect("non-identity element has a right descent");
            if self.is_right_descent(u, s) {
                u = self.mul_simple_right(u, s);
            }
            w = self.mul_simple_right(w, s);
        }
    }

    /// `s* = τ0 s τ0`, which is again simple.
    pub fn conjugate_by_longest(&self, s: usize) -> Result<usize> {
        if s >= self.rank() {
            return Err(Error::IndexOutOfRange { index: s, rank: self.rank() });
        }
        let t0 = self.longest();
        let c = self.mul(self.mul_simple_right(t0, s), t0);
        (0..self.rank())
            .find(|&t| self.simple(t) == c)
            .ok_or_else(|| Error::Internal(format!("τ0 s{} τ0 is not a simple reflection", s + 1)))
    }

    pub fn act(&self, w: ElementId, v: &LatticeVector) -> LatticeVector {
        let e = self.element(w);
        let coords = match v.lattice() {
            Lattice::Root => e.apply_root(v.coords()),
            Lattice::Coroot => e.apply_coroot(v.coords()),
        };
        LatticeVector::new(coords, v.lattice())
    }

    /// Positive roots sent to negative roots by `w`.
    pub fn inversion_set(&self, w: ElementId) -> Vec<usize> {
        let e = self.element(w);
        self.root_system
            .positive_roots()
            .iter()
            .enumerate()
            .filter(|(_, r)| LatticeVector::root(e.apply_root(r)).is_negative())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn element_by_root_matrix(&self, m: &[i64]) -> Option<ElementId> {
        self.index.get(m).copied().map(ElementId)
    }

    /// 1-based word, as used in files and on the command line.
    pub fn word_string(&self, w: ElementId) -> String {
        let word = self.reduced_word(w);
        if word.is_empty() {
            "id".to_string()
        } else {
            word.iter().map(|s| (s + 1).to_string()).collect::<Vec<_>>().join(",")
        }
    }
}

/// Parses `"1,2,1"`, `"121"` style words (1-based). `""`, `"id"`, `"e"` and
/// `"1"`-free spellings of the identity are accepted. Returns 0-based letters.
pub fn parse_word(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() || s == "id" || s == "e" || s == "-" {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = if s.contains(',') {
        s.split(',').map(str::trim).collect()
    } else {
        s.split("").filter(|p| !p.is_empty()).collect()
    };
    parts
        .into_iter()
        .map(|p| {
            let i: usize = p.parse().map_err(|_| Error::Parse(format!("bad word letter `{p}` in `{s}`")))?;
            if i == 0 {
                return Err(Error::Parse(format!("word letters are 1-based, got 0 in `{s}`")));
            }
            Ok(i - 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn group(s: &str) -> WeylGroup {
        WeylGroup::new(&RootSystem::from_label_str(s).unwrap()).unwrap()
    }

    /// Subword criterion.
    fn bruhat_oracle(w: &WeylGroup, u: ElementId, v: ElementId) -> bool {
        let vw = w.reduced_word(v);
        (0u32..1 << vw.len()).any(|mask| {
            let sub: Vec<usize> = vw.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &s)| s).collect();
            w.from_word(&sub).unwrap() == u
        })
    }

    #[test]
    fn orders() {
        assert_eq!(group("A1").order(), 2);
        assert_eq!(group("B2").order(), 8);
        assert_eq!(group("G2").order(), 12);
        assert_eq!(group("A3").order(), 24);
        assert_eq!(group("B3").order(), 48);
        assert_eq!(group("D4").order(), 192);
        assert_eq!(group("F4").order(), 1152);
        let a2 = group("A2");
        let mut lens: Vec<usize> = a2.elements().map(|e| a2.length(e)).collect();
        lens.sort();
        assert_eq!(lens, vec![0, 1, 1, 2, 2, 3]);
    }

    #[test]
    fn cap_refusal() {
        let e7 = RootSystem::from_label_str("E7").unwrap();
        match WeylGroup::new(&e7) {
            Err(Error::GroupTooLarge { order, cap }) => {
                assert_eq!(order, 2_903_040);
                assert_eq!(cap, DEFAULT_ORDER_CAP);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
        assert!(WeylGroup::with_cap(&RootSystem::from_label_str("A3").unwrap(), 10).is_err());
    }

    #[test]
    fn longest_element() {
        let b2 = group("B2");
        let t0 = b2.longest();
        assert_eq!(b2.length(t0), 4);
        assert_eq!(b2.from_word(&[0, 1, 0, 1]).unwrap(), t0);
        assert_eq!(b2.from_word(&[1, 0, 1, 0]).unwrap(), t0);
        assert_eq!(group("A3").length(group("A3").longest()), 6);
        assert_eq!(b2.length(b2.identity()), 0);
        assert!(b2.reduced_word(b2.identity()).is_empty());
        for r in b2.root_system().positive_roots() {
            assert!(b2.act(t0, &LatticeVector::root(r.clone())).is_negative());
        }
    }

    #[test]
    fn words_and_lengths() {
        for label in ["A2", "A3", "B2", "B3", "C3", "G2"] {
            let w = group(label);
            let t0 = w.longest();
            assert_eq!(w.length(t0), w.root_system().num_positive_roots());
            assert_eq!(w.elements().filter(|&e| w.length(e) == 0).count(), 1);
            for e in w.elements() {
                let word = w.reduced_word(e);
                assert_eq!(word.len(), w.length(e));
                assert_eq!(w.from_word(&word).unwrap(), e);
                assert_eq!(w.inversion_set(e).len(), w.length(e));
                assert_eq!(w.length(w.mul(t0, e)), w.length(t0) - w.length(e));
                assert_eq!(w.mul(e, w.inverse(e)), w.identity());
                for s in 0..w.rank() {
                    let a = w.length(w.mul_simple_right(e, s));
                    assert!(a + 1 == w.length(e) || a == w.length(e) + 1);
                }
            }
        }
    }

    #[test]
    fn bruhat_examples() {
        let b2 = group("B2");
        let s1 = b2.simple(0);
        let s2 = b2.simple(1);
        let s1s2 = b2.from_word(&[0, 1]).unwrap();
        let s2s1 = b2.from_word(&[1, 0]).unwrap();
        assert!(b2.bruhat_leq(s1, s1s2));
        assert!(b2.bruhat_leq(s2, s1s2));
        assert!(!b2.bruhat_leq(s1s2, s2s1));
        for e in b2.elements() {
            assert!(b2.bruhat_leq(b2.identity(), e));
            assert!(b2.bruhat_leq(e, b2.longest()));
        }
    }

    #[test]
    fn bruhat_matches_subword_oracle() {
        for label in ["A2", "B2", "G2", "A3"] {
            let w = group(label);
            for u in w.elements() {
                for v in w.elements() {
                    assert_eq!(w.bruhat_leq(u, v), bruhat_oracle(&w, u, v), "{label} {u} {v}");
                }
            }
        }
    }

    #[test]
    fn conjugation_by_longest() {
        let a2 = group("A2");
        assert_eq!(a2.conjugate_by_longest(0).unwrap(), 1);
        assert_eq!(a2.conjugate_by_longest(1).unwrap(), 0);
        let b2 = group("B2");
        assert_eq!(b2.conjugate_by_longest(0).unwrap(), 0);
        assert_eq!(b2.conjugate_by_longest(1).unwrap(), 1);
        assert_eq!(group("A1").conjugate_by_longest(0).unwrap(), 0);
        for label in ["A3", "A4", "D5", "E6", "D4", "B3", "G2"] {
            let w = group(label);
            for s in 0..w.rank() {
                let t = w.conjugate_by_longest(s).unwrap();
                assert_eq!(w.conjugate_by_longest(t).unwrap(), s);
            }
        }
        // nontrivial only in A_n (n>1), D_odd, E6
        let d5 = group("D5");
        assert_eq!(d5.conjugate_by_longest(3).unwrap(), 4);
        let e6 = group("E6");
        assert_eq!(e6.conjugate_by_longest(0).unwrap(), 5);
        assert_eq!(e6.conjugate_by_longest(1).unwrap(), 1);
    }

    #[test]
    fn action() {
        let a2 = group("A2");
        let s1s2 = a2.from_word(&[0, 1]).unwrap();
        let v = a2.act(s1s2, &LatticeVector::root(vec![1, 0]));
        assert_eq!(v.coords(), &[0, 1]);
        let id = a2.identity();
        assert_eq!(a2.act(id, &LatticeVector::coroot(vec![3, -1])).coords(), &[3, -1]);
    }

    #[test]
    fn action_matches_reflect_and_preserves_pairing() {
        for label in ["A3", "B3", "C3", "G2"] {
            let w = group(label);
            let rs = w.root_system();
            for s in 0..w.rank() {
                for i in 0..w.rank() {
                    assert_eq!(
                        w.act(w.simple(s), &rs.simple_root(i)),
                        rs.reflect(s, &rs.simple_root(i)).unwrap()
                    );
                    assert_eq!(
                        w.act(w.simple(s), &rs.simple_coroot(i)),
                        rs.reflect(s, &rs.simple_coroot(i)).unwrap()
                    );
                }
            }
            for e in w.elements() {
                for (r, c) in rs.positive_roots().iter().zip(rs.positive_coroots()) {
                    for r2 in rs.positive_roots() {
                        let wc = w.element(e).apply_coroot(c);
                        let wr = w.element(e).apply_root(r2);
                        assert_eq!(rs.pairing(&wc, &wr), rs.pairing(c, r2));
                    }
                    // w maps the coroot of a root to the coroot of its image
                    let wr = LatticeVector::root(w.element(e).apply_root(r));
                    let wc = LatticeVector::coroot(w.element(e).apply_coroot(c));
                    assert_eq!(wr.is_positive(), wc.is_positive());
                }
            }
        }
    }

    #[test]
    fn reflections_biject_with_positive_roots() {
        for label in ["A3", "B2", "G2"] {
            let w = group(label);
            let rs = w.root_system();
            // reflections: conjugates of simple reflections
            let mut refl = std::collections::BTreeSet::new();
            for e in w.elements() {
                for s in 0..w.rank() {
                    refl.insert(w.mul(w.mul(e, w.simple(s)), w.inverse(e)));
                }
            }
            assert_eq!(refl.len(), rs.num_positive_roots());
            for r in rs.positive_roots() {
                let v = LatticeVector::root(r.clone());
                let flips: Vec<_> = refl.iter().filter(|&&t| w.act(t, &v) == v.neg()).collect();
                assert_eq!(flips.len(), 1, "{label} {r:?}");
            }
        }
    }

    #[test]
    fn word_parsing() {
        assert_eq!(parse_word("1,2,1").unwrap(), vec![0, 1, 0]);
        assert_eq!(parse_word("212").unwrap(), vec![1, 0, 1]);
        assert_eq!(parse_word("id").unwrap(), Vec::<usize>::new());
        assert_eq!(parse_word("").unwrap(), Vec::<usize>::new());
        assert!(parse_word("0,1").is_err());
        assert!(parse_word("a").is_err());
    }

    proptest! {
        #[test]
        fn random_elements_are_consistent(
            label in prop::sample::select(vec!["A2", "A3", "B2", "B3", "C3", "G2"]),
            pick in 0usize..10_000,
        ) {
            let w = group(label);
            let e = ElementId(pick % w.order());
            let word = w.reduced_word(e);
            prop_assert_eq!(w.from_word(&word).unwrap(), e);
            prop_assert_eq!(word.len(), w.length(e));
            prop_assert_eq!(w.inversion_set(e).len(), w.length(e));
            prop_assert_eq!(w.length(w.mul(w.longest(), e)), w.length(w.longest()) - w.length(e));
            for s in 0..w.rank() {
                let l = w.length(w.mul_simple_right(e, s));
                prop_assert!(l + 1 == w.length(e) || l == w.length(e) + 1);
                let t = w.conjugate_by_longest(s).unwrap();
                prop_assert_eq!(w.conjugate_by_longest(t).unwrap(), s);
            }
        }
    }
}
