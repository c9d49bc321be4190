//! Root systems of simple Cartan types, in simple-root (resp. simple-coroot)
//! integer coordinates.
//!
//! The Cartan matrix follows the convention `a_ij = <α_i^v, α_j>`, so the
//! simple reflection `s_i` acts on the root lattice by
//! `s_i(v) = v - <α_i^v, v> α_i` with `<α_i^v, v> = Σ_j a_ij v_j`, and on the
//! coroot lattice by `s_i(u) = u - <u, α_i> α_i^v` with `<u, α_i> = Σ_j a_ji u_j`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Family {
    fn letter(self) -> char {
        match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
            Family::E => 'E',
            Family::F => 'F',
            Family::G => 'G',
        }
    }
}

/// A simple Cartan type such as `B2` or `E6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CartanLabel {
    family: Family,
    rank: usize,
}

impl CartanLabel {
    pub fn new(family: Family, rank: usize) -> Result<Self> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::B | Family::C => rank >= 2,
            Family::D => rank >= 3,
            Family::E => (6..=8).contains(&rank),
            Family::F => rank == 4,
            Family::G => rank == 2,
        };
        if !ok {
            return Err(Error::InvalidLabel(
                format!("{}{}", family.letter(), rank),
                format!("rank {rank} is not allowed for family {}", family.letter()),
            ));
        }
        Ok(CartanLabel { family, rank })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Label of the Langlands dual type. Only `B` and `C` change letters.
    pub fn dual(&self) -> CartanLabel {
        let family = match self.family {
            Family::B => Family::C,
            Family::C => Family::B,
            f => f,
        };
        CartanLabel { family, rank: self.rank }
    }

    /// Cartan matrix with Bourbaki node numbering.
    pub fn cartan_matrix(&self) -> Vec<Vec<i64>> {
        let n = self.rank;
        let mut a = vec![vec![0i64; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 2;
        }
        // (i, j, a_ij, a_ji), 1-based
        let mut edges: Vec<(usize, usize, i64, i64)> = Vec::new();
        match self.family {
            Family::A => {
                for i in 1..n {
                    edges.push((i, i + 1, -1, -1));
                }
            }
            Family::B | Family::C => {
                for i in 1..n - 1 {
                    edges.push((i, i + 1, -1, -1));
                }
                if self.family == Family::B {
                    // α_n short
                    edges.push((n - 1, n, -1, -2));
                } else {
                    // α_n long
                    edges.push((n - 1, n, -2, -1));
                }
            }
            Family::D => {
                for i in 1..n - 1 {
                    edges.push((i, i + 1, -1, -1));
                }
                edges.push((n - 2, n, -1, -1));
            }
            Family::E => {
                edges.push((1, 3, -1, -1));
                edges.push((2, 4, -1, -1));
                for i in 3..n {
                    edges.push((i, i + 1, -1, -1));
                }
            }
            Family::F => {
                edges.push((1, 2, -1, -1));
                edges.push((2, 3, -1, -2));
                edges.push((3, 4, -1, -1));
            }
            Family::G => {
                // α_1 short, α_2 long
                edges.push((1, 2, -3, -1));
            }
        }
        for (i, j, aij, aji) in edges {
            a[i - 1][j - 1] = aij;
            a[j - 1][i - 1] = aji;
        }
        a
    }
}

impl fmt::Display for CartanLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.letter(), self.rank)
    }
}

impl FromStr for CartanLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        let letter = chars
            .next()
            .ok_or_else(|| Error::InvalidLabel(s.to_string(), "empty label".into()))?;
        let family = match letter.to_ascii_uppercase() {
            'A' => Family::A,
            'B' => Family::B,
            'C' => Family::C,
            'D' => Family::D,
            'E' => Family::E,
            'F' => Family::F,
            'G' => Family::G,
            other => {
                return Err(Error::InvalidLabel(
                    s.to_string(),
                    format!("unknown family `{other}` (affine and reducible types are not supported)"),
                ))
            }
        };
        let rank: usize = chars
            .as_str()
            .parse()
            .map_err(|_| Error::InvalidLabel(s.to_string(), "rank must be a decimal integer".into()))?;
        CartanLabel::new(family, rank)
    }
}

impl Serialize for CartanLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CartanLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lattice {
    Root,
    Coroot,
}

impl Lattice {
    pub fn name(self) -> &'static str {
        match self {
            Lattice::Root => "root",
            Lattice::Coroot => "coroot",
        }
    }
}

/// Integer coordinates in the simple-root or simple-coroot basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeVector {
    coords: Vec<i64>,
    lattice: Lattice,
}

impl LatticeVector {
    pub fn new(coords: Vec<i64>, lattice: Lattice) -> Self {
        LatticeVector { coords, lattice }
    }

    pub fn root(coords: Vec<i64>) -> Self {
        Self::new(coords, Lattice::Root)
    }

    pub fn coroot(coords: Vec<i64>) -> Self {
        Self::new(coords, Lattice::Coroot)
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.coords
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn neg(&self) -> Self {
        LatticeVector::new(self.coords.iter().map(|c| -c).collect(), self.lattice)
    }

    /// Sign of a root-system vector: every root has all coordinates of one sign.
    pub fn is_positive(&self) -> bool {
        self.coords.iter().any(|&c| c > 0) && self.coords.iter().all(|&c| c >= 0)
    }

    pub fn is_negative(&self) -> bool {
        self.coords.iter().any(|&c| c < 0) && self.coords.iter().all(|&c| c <= 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSystem {
    label: CartanLabel,
    cartan: Vec<Vec<i64>>,
    positive_roots: Vec<Vec<i64>>,
    positive_coroots: Vec<Vec<i64>>,
    root_index: HashMap<Vec<i64>, usize>,
    coroot_index: HashMap<Vec<i64>, usize>,
}

fn unit(rank: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; rank];
    v[i] = 1;
    v
}

fn reflect_root_coords(cartan: &[Vec<i64>], s: usize, v: &[i64]) -> Vec<i64> {
    let pairing: i64 = cartan[s].iter().zip(v).map(|(a, x)| a * x).sum();
    let mut out = v.to_vec();
    out[s] -= pairing;
    out
}

fn reflect_coroot_coords(cartan: &[Vec<i64>], s: usize, v: &[i64]) -> Vec<i64> {
    let pairing: i64 = cartan.iter().zip(v).map(|(row, x)| row[s] * x).sum();
    let mut out = v.to_vec();
    out[s] -= pairing;
    out
}

impl RootSystem {
    /// Builds the root system of a simple type by closing the simple roots
    /// under simple reflections. Coroots are carried along the same orbit so
    /// that the i-th coroot belongs to the i-th root.
    pub fn build(label: CartanLabel) -> RootSystem {
        let cartan = label.cartan_matrix();
        let rank = label.rank();

        let mut seen: HashMap<Vec<i64>, Vec<i64>> = HashMap::new();
        let mut queue = VecDeque::new();
        for i in 0..rank {
            seen.insert(unit(rank, i), unit(rank, i));
            queue.push_back((unit(rank, i), unit(rank, i)));
        }
        while let Some((root, coroot)) = queue.pop_front() {
            for s in 0..rank {
                let r = reflect_root_coords(&cartan, s, &root);
                // s_i permutes Φ+ \ {α_i}; anything with a negative coordinate is -α_i
                if r.iter().any(|&c| c < 0) || seen.contains_key(&r) {
                    continue;
                }
                let c = reflect_coroot_coords(&cartan, s, &coroot);
                seen.insert(r.clone(), c.clone());
                queue.push_back((r, c));
            }
        }

        let mut pairs: Vec<(Vec<i64>, Vec<i64>)> = seen.into_iter().collect();
        pairs.sort_by(|a, b| {
            let ha: i64 = a.0.iter().sum();
            let hb: i64 = b.0.iter().sum();
            ha.cmp(&hb).then_with(|| b.0.cmp(&a.0))
        });
        let (positive_roots, positive_coroots): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        Self::from_parts(label, cartan, positive_roots, positive_coroots)
    }

    fn from_parts(
        label: CartanLabel,
        cartan: Vec<Vec<i64>>,
        positive_roots: Vec<Vec<i64>>,
        positive_coroots: Vec<Vec<i64>>,
    ) -> RootSystem {
        let root_index = positive_roots.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        let coroot_index = positive_coroots.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        RootSystem { label, cartan, positive_roots, positive_coroots, root_index, coroot_index }
    }

    pub fn from_label_str(s: &str) -> Result<RootSystem> {
        Ok(Self::build(s.parse()?))
    }

    pub fn label(&self) -> CartanLabel {
        self.label
    }

    pub fn rank(&self) -> usize {
        self.label.rank()
    }

    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    pub fn positive_roots(&self) -> &[Vec<i64>] {
        &self.positive_roots
    }

    pub fn positive_coroots(&self) -> &[Vec<i64>] {
        &self.positive_coroots
    }

    pub fn num_positive_roots(&self) -> usize {
        self.positive_roots.len()
    }

    /// Index of a positive root (in simple-root coordinates), if it is one.
    pub fn positive_root_index(&self, coords: &[i64]) -> Option<usize> {
        self.root_index.get(coords).copied()
    }

    pub fn positive_coroot_index(&self, coords: &[i64]) -> Option<usize> {
        self.coroot_index.get(coords).copied()
    }

    pub fn simple_root(&self, i: usize) -> LatticeVector {
        LatticeVector::root(unit(self.rank(), i))
    }

    pub fn simple_coroot(&self, i: usize) -> LatticeVector {
        LatticeVector::coroot(unit(self.rank(), i))
    }

    /// The Langlands dual: transposed Cartan matrix, roots and coroots swapped
    /// index by index.
    pub fn langlands_dual(&self) -> RootSystem {
        let n = self.rank();
        let cartan = (0..n).map(|i| (0..n).map(|j| self.cartan[j][i]).collect()).collect();
        Self::from_parts(
            self.label.dual(),
            cartan,
            self.positive_coroots.clone(),
            self.positive_roots.clone(),
        )
    }

    /// Simple reflection `s` (0-based) applied to `v` in its own lattice.
    pub fn reflect(&self, s: usize, v: &LatticeVector) -> Result<LatticeVector> {
        if s >= self.rank() {
            return Err(Error::IndexOutOfRange { index: s, rank: self.rank() });
        }
        if v.coords().len() != self.rank() {
            return Err(Error::Internal(format!(
                "vector of length {} in a rank {} system",
                v.coords().len(),
                self.rank()
            )));
        }
        let coords = match v.lattice() {
            Lattice::Root => reflect_root_coords(&self.cartan, s, v.coords()),
            Lattice::Coroot => reflect_coroot_coords(&self.cartan, s, v.coords()),
        };
        Ok(LatticeVector::new(coords, v.lattice()))
    }

    /// Pairing `<u, v>` of a coroot-lattice vector with a root-lattice vector.
    pub fn pairing(&self, coroot: &[i64], root: &[i64]) -> i64 {
        let mut total = 0;
        for (i, ui) in coroot.iter().enumerate() {
            for (j, vj) in root.iter().enumerate() {
                total += ui * self.cartan[i][j] * vj;
            }
        }
        total
    }
}
