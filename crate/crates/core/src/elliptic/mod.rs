//! Formal variables, monomials, evaluation points and the δ function.
//!
//! For a group of rank `r` the formal variables are ordered
//! `ζ_1..ζ_r, ν_1..ν_r, h`, where `ζ_s = e^{-α_s}` and `ν_s = h^{α_s^v}`.
//! A [`Monomial`] is an integer exponent vector over that ordering.

pub mod backend;
pub mod series;

use std::fmt;

use rand::Rng;

pub use backend::{
    delta_series, delta_series_product, Backend, ComplexBackend, ExactBackend, QContext, DEFAULT_QORDER, DEFAULT_Q,
};
pub use series::Series;

use crate::error::{Error, Result};
use crate::weyl::{ElementId, WeylGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Zeta(usize),
    Nu(usize),
    H,
}

impl Var {
    pub fn slot(self, rank: usize) -> usize {
        match self {
            Var::Zeta(i) => i,
            Var::Nu(i) => rank + i,
            Var::H => 2 * rank,
        }
    }

    pub fn from_slot(slot: usize, rank: usize) -> Var {
        if slot < rank {
            Var::Zeta(slot)
        } else if slot < 2 * rank {
            Var::Nu(slot - rank)
        } else {
            Var::H
        }
    }

    /// `zeta1`, `nu2`, `h` (1-based).
    pub fn name(self) -> String {
        match self {
            Var::Zeta(i) => format!("zeta{}", i + 1),
            Var::Nu(i) => format!("nu{}", i + 1),
            Var::H => "h".to_string(),
        }
    }
}

/// Which torus a Weyl transform acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// Equivariant variables `ζ`, acted on through the root lattice.
    Zeta,
    /// Dynamical variables `ν`, acted on through the coroot lattice.
    Nu,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    rank: usize,
    exps: Vec<i64>,
}

impl Monomial {
    pub fn one(rank: usize) -> Self {
        Monomial { rank, exps: vec![0; 2 * rank + 1] }
    }

    pub fn from_exponents(rank: usize, exps: Vec<i64>) -> Result<Self> {
        if exps.len() != 2 * rank + 1 {
            return Err(Error::Internal(format!(
                "monomial of length {} for rank {rank}",
                exps.len()
            )));
        }
        Ok(Monomial { rank, exps })
    }

    pub fn var(rank: usize, v: Var) -> Self {
        let mut m = Self::one(rank);
        m.exps[v.slot(rank)] = 1;
        m
    }

    /// `e^{-λ}` for `λ` in simple-root coordinates, i.e. `∏ ζ_t^{λ_t}`.
    pub fn exp_neg_root(rank: usize, lambda: &[i64]) -> Self {
        let mut m = Self::one(rank);
        m.exps[..rank].copy_from_slice(lambda);
        m
    }

    /// `e^{λ} = ∏ ζ_t^{-λ_t}`.
    pub fn exp_root(rank: usize, lambda: &[i64]) -> Self {
        Self::exp_neg_root(rank, lambda).inv()
    }

    /// `h^{β}` for `β` in simple-coroot coordinates, i.e. `∏ ν_t^{β_t}`.
    pub fn h_pow_coroot(rank: usize, beta: &[i64]) -> Self {
        let mut m = Self::one(rank);
        m.exps[rank..2 * rank].copy_from_slice(beta);
        m
    }

    pub fn h(rank: usize) -> Self {
        Self::var(rank, Var::H)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exps
    }

    pub fn exponent(&self, v: Var) -> i64 {
        self.exps[v.slot(self.rank)]
    }

    pub fn zeta_part(&self) -> &[i64] {
        &self.exps[..self.rank]
    }

    pub fn nu_part(&self) -> &[i64] {
        &self.exps[self.rank..2 * self.rank]
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        assert_eq!(self.rank, other.rank);
        Monomial { rank: self.rank, exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect() }
    }

    pub fn inv(&self) -> Monomial {
        Monomial { rank: self.rank, exps: self.exps.iter().map(|e| -e).collect() }
    }

    pub fn pow(&self, k: i64) -> Monomial {
        Monomial { rank: self.rank, exps: self.exps.iter().map(|e| e * k).collect() }
    }

    /// The monomial `m'` with `eval(transform(p, g), m) = eval(p, m')`.
    pub fn pullback(&self, weyl: &WeylGroup, g: ElementId, sector: Sector) -> Monomial {
        let r = self.rank;
        let mut out = self.clone();
        let e = weyl.element(g);
        match sector {
            Sector::Zeta => out.exps[..r].copy_from_slice(&e.apply_root(self.zeta_part())),
            Sector::Nu => out.exps[r..2 * r].copy_from_slice(&e.apply_coroot(self.nu_part())),
        }
        out
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(slot, &e)| {
                let name = Var::from_slot(slot, self.rank).name();
                if e == 1 {
                    name
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Nonzero values for every formal variable of a rank-`r` group.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint<V> {
    rank: usize,
    values: Vec<V>,
}

impl<V: Clone> EvalPoint<V> {
    pub fn new(rank: usize, values: Vec<V>) -> Result<Self> {
        if values.len() != 2 * rank + 1 {
            return Err(Error::Internal(format!(
                "point with {} values for rank {rank}",
                values.len()
            )));
        }
        Ok(EvalPoint { rank, values })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn get(&self, v: Var) -> &V {
        &self.values[v.slot(self.rank)]
    }

    pub fn set(&mut self, v: Var, value: V) {
        let slot = v.slot(self.rank);
        self.values[slot] = value;
    }

    pub fn zeta(&self, s: usize) -> &V {
        self.get(Var::Zeta(s))
    }

    pub fn nu(&self, s: usize) -> &V {
        self.get(Var::Nu(s))
    }

    pub fn h(&self) -> &V {
        self.get(Var::H)
    }
}

/// Samples every variable with the backend's sampler.
pub fn sample_point<B: Backend, R: Rng + ?Sized>(backend: &B, rank: usize, rng: &mut R) -> EvalPoint<B::Value> {
    let values = (0..2 * rank + 1).map(|_| backend.sample_value(rng)).collect();
    EvalPoint { rank, values }
}

/// Attempts per point before a singular sample is reported as a failure.
pub const MAX_RESAMPLES: usize = 10;

/// Runs `f` on fresh randomness until it stops hitting a singular or
/// non-invertible value, at most [`MAX_RESAMPLES`] times.
pub fn retry_singular<T, R: Rng + ?Sized>(rng: &mut R, mut f: impl FnMut(&mut R) -> Result<T>) -> Result<T> {
    let mut last = None;
    for _ in 0..MAX_RESAMPLES {
        match f(rng) {
            Err(e @ (Error::Singular(_) | Error::NotInvertible(_) | Error::ZeroArgument)) => last = Some(e),
            other => return other,
        }
    }
    Err(last.unwrap())
}

/// `∏ value_i^{e_i}`.
pub fn eval_monomial<B: Backend>(backend: &B, p: &EvalPoint<B::Value>, m: &Monomial) -> Result<B::Value> {
    if m.rank() != p.rank() {
        return Err(Error::Internal(format!(
            "monomial of rank {} at a rank {} point",
            m.rank(),
            p.rank()
        )));
    }
    let mut acc = backend.value_one();
    for (v, &e) in p.values().iter().zip(m.exponents()) {
        if e != 0 {
            acc = backend.value_mul(&acc, &backend.value_pow(v, e)?);
        }
    }
    Ok(acc)
}

/// Precomposition of a point with `g` acting on one torus. For `g = s` simple
/// this is `s^ν` (resp. `s^ζ`): the new `ν_t` is the old value of
/// `h^{s(α_t^v)}`. Transforms compose as `T_s ∘ T_g = T_{g s}`.
pub fn twist_point<B: Backend>(
    backend: &B,
    p: &EvalPoint<B::Value>,
    weyl: &WeylGroup,
    g: ElementId,
    sector: Sector,
) -> Result<EvalPoint<B::Value>> {
    let r = p.rank();
    let e = weyl.element(g);
    let mut out = p.clone();
    for t in 0..r {
        let mut unit = vec![0; r];
        unit[t] = 1;
        match sector {
            Sector::Zeta => {
                let m = Monomial::exp_neg_root(r, &e.apply_root(&unit));
                out.set(Var::Zeta(t), eval_monomial(backend, p, &m)?);
            }
            Sector::Nu => {
                let m = Monomial::h_pow_coroot(r, &e.apply_coroot(&unit));
                out.set(Var::Nu(t), eval_monomial(backend, p, &m)?);
            }
        }
    }
    Ok(out)
}

/// [`twist_point`] for a simple reflection.
pub fn transform_point<B: Backend>(
    backend: &B,
    p: &EvalPoint<B::Value>,
    s: usize,
    sector: Sector,
    weyl: &WeylGroup,
) -> Result<EvalPoint<B::Value>> {
    if s >= weyl.rank() {
        return Err(Error::IndexOutOfRange { index: s, rank: weyl.rank() });
    }
    twist_point(backend, p, weyl, weyl.simple(s), sector)
}

/// `δ(eval(m1), eval(m2))`.
pub fn delta_of<B: Backend>(backend: &B, p: &EvalPoint<B::Value>, a: &Monomial, b: &Monomial) -> Result<B::Scalar> {
    backend.delta(&eval_monomial(backend, p, a)?, &eval_monomial(backend, p, b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::RootSystem;
    use num_complex::Complex64;
    use num_rational::BigRational;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn weyl(s: &str) -> WeylGroup {
        WeylGroup::new(&RootSystem::from_label_str(s).unwrap()).unwrap()
    }

    #[test]
    fn monomial_basics() {
        let b = ExactBackend::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = sample_point(&b, 2, &mut rng);
        assert_eq!(eval_monomial(&b, &p, &Monomial::one(2)).unwrap(), r(1, 1));
        let m = Monomial::from_exponents(2, vec![1, -2, 3, 0, 5]).unwrap();
        assert_eq!(eval_monomial(&b, &p, &m.mul(&m.inv())).unwrap(), r(1, 1));
        assert_eq!(m.to_string(), "zeta1*zeta2^-2*nu1^3*h^5");
        assert!(Monomial::from_exponents(2, vec![1]).is_err());
    }

    #[test]
    fn so5_chart_nu_monomial() {
        // ν1 = μ2/μ1, ν2 = 1/μ2² at μ1 = 3, μ2 = 5: ν1²ν2 = 1/μ1² = 1/9
        let b = ExactBackend::new(4).unwrap();
        let p = EvalPoint::new(2, vec![r(2, 1), r(3, 1), r(5, 3), r(1, 25), r(7, 1)]).unwrap();
        let m = Monomial::h_pow_coroot(2, &[2, 1]);
        assert_eq!(eval_monomial(&b, &p, &m).unwrap(), r(1, 9));
    }

    #[test]
    fn transforms() {
        let b = ExactBackend::new(4).unwrap();
        let a1 = weyl("A1");
        let p = EvalPoint::new(1, vec![r(2, 1), r(3, 1), r(5, 1)]).unwrap();
        let t = transform_point(&b, &p, 0, Sector::Nu, &a1).unwrap();
        assert_eq!(t.values(), &[r(2, 1), r(1, 3), r(5, 1)]);

        let b2 = weyl("B2");
        let p = EvalPoint::new(2, vec![r(2, 1), r(3, 1), r(5, 1), r(7, 1), r(11, 1)]).unwrap();
        let t = transform_point(&b, &p, 1, Sector::Zeta, &b2).unwrap();
        // ζ1 ↦ ζ1ζ2², ζ2 ↦ ζ2⁻¹
        assert_eq!(t.values(), &[r(18, 1), r(1, 3), r(5, 1), r(7, 1), r(11, 1)]);
        for s in 0..2 {
            for sector in [Sector::Zeta, Sector::Nu] {
                let once = transform_point(&b, &p, s, sector, &b2).unwrap();
                assert_eq!(transform_point(&b, &once, s, sector, &b2).unwrap(), p);
            }
        }
        assert!(transform_point(&b, &p, 2, Sector::Nu, &b2).is_err());
    }

    #[test]
    fn twists_compose_antihomomorphically() {
        let b = ComplexBackend::new(Complex64::new(0.1, 0.0)).unwrap();
        let w = weyl("G2");
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = sample_point(&b, 2, &mut rng);
        for g in w.elements() {
            for s in 0..2 {
                for sector in [Sector::Zeta, Sector::Nu] {
                    let lhs = transform_point(&b, &twist_point(&b, &p, &w, g, sector).unwrap(), s, sector, &w).unwrap();
                    let rhs = twist_point(&b, &p, &w, w.mul_simple_right(g, s), sector).unwrap();
                    for (x, y) in lhs.values().iter().zip(rhs.values()) {
                        assert!((x - y).norm() < 1e-12 * x.norm());
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn transform_commutes_with_eval(seed in 0u64..1000, sector_zeta in prop::bool::ANY) {
            let b = ExactBackend::new(2).unwrap();
            let w = weyl("B2");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = sample_point(&b, 2, &mut rng);
            let sector = if sector_zeta { Sector::Zeta } else { Sector::Nu };
            let rs = w.root_system();
            let mut monomials: Vec<Monomial> = rs.positive_roots().iter().map(|a| Monomial::exp_neg_root(2, a)).collect();
            monomials.extend(rs.positive_coroots().iter().map(|c| Monomial::h_pow_coroot(2, c)));
            for s in 0..2 {
                let t = transform_point(&b, &p, s, sector, &w).unwrap();
                for m in &monomials {
                    let lhs = eval_monomial(&b, &t, m).unwrap();
                    let rhs = eval_monomial(&b, &p, &m.pullback(&w, w.simple(s), sector)).unwrap();
                    prop_assert_eq!(lhs, rhs);
                }
            }
        }
    }
}
