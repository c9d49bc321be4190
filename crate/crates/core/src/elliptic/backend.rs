//! Scalar backends: complex floating point at a numeric `q`, and exact
//! rational series truncated modulo `q^(N+1)`.
//!
//! A backend separates *values* (what a formal variable is set to; constant
//! in `q`) from *scalars* (what the classes evaluate to). All arithmetic goes
//! through the backend, which plays the role of a ring context.

use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::Mutex;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::series::{format_rational, rational_to_f64, Series};
use crate::error::{Error, Result};

pub const DEFAULT_QORDER: usize = 8;
pub const DEFAULT_Q: f64 = 0.05;
pub const DEFAULT_PRODUCT_TOL: f64 = 1e-18;
/// Minimum distance `|x - 1|` for a δ argument in complex mode.
pub const SINGULARITY_GUARD: f64 = 1e-3;
const MAX_PRODUCT_TERMS: usize = 100_000;

/// How `q` is handled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "kebab-case")]
pub enum QContext {
    /// Numeric `q` with `|q| < 1`; infinite products are cut once
    /// `|q|^n · max(|x|, 1/|x|) < tol`.
    Complex { q: [f64; 2], tol: f64 },
    /// Exact coefficients modulo `q^(order+1)`.
    ExactSeries { order: usize },
}

impl QContext {
    pub fn complex(q: Complex64) -> Result<Self> {
        if !(q.norm() < 1.0) {
            return Err(Error::InvalidContext(format!("|q| = {} is not below 1", q.norm())));
        }
        Ok(QContext::Complex { q: [q.re, q.im], tol: DEFAULT_PRODUCT_TOL })
    }

    pub fn exact(order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidContext("truncation order must be at least 1".into()));
        }
        Ok(QContext::ExactSeries { order })
    }
}

pub trait Backend: Send + Sync {
    type Value: Clone + Debug + PartialEq + Send + Sync;
    type Scalar: Clone + Debug + PartialEq + Send + Sync;

    fn context(&self) -> QContext;
    fn name(&self) -> &'static str;

    fn value_one(&self) -> Self::Value;
    fn value_mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn value_inv(&self, a: &Self::Value) -> Result<Self::Value>;
    fn value_from_rational(&self, r: &BigRational) -> Self::Value;
    fn sample_value<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Value;
    fn value_to_json(&self, v: &Self::Value) -> serde_json::Value;

    fn value_pow(&self, a: &Self::Value, e: i64) -> Result<Self::Value> {
        let base = if e < 0 { self.value_inv(a)? } else { a.clone() };
        let mut acc = self.value_one();
        for _ in 0..e.unsigned_abs() {
            acc = self.value_mul(&acc, &base);
        }
        Ok(acc)
    }

    fn zero(&self) -> Self::Scalar;
    fn one(&self) -> Self::Scalar;
    fn from_value(&self, v: &Self::Value) -> Self::Scalar;
    fn add(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn sub(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn mul(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn neg(&self, a: &Self::Scalar) -> Self::Scalar;
    fn div(&self, a: &Self::Scalar, b: &Self::Scalar) -> Result<Self::Scalar>;
    /// Structural zero: exact zero series, or a complex value equal to 0.
    fn is_zero(&self, a: &Self::Scalar) -> bool;
    /// Size of a scalar: `|z|`, or the largest coefficient magnitude.
    fn magnitude(&self, a: &Self::Scalar) -> f64;
    fn scalar_to_json(&self, a: &Self::Scalar) -> serde_json::Value;

    /// Whether `a` and `b` agree: exactly in the series backend, to `rel_tol`
    /// relative to `max(|a|, |b|, floor)` in the complex backend.
    fn agree(&self, a: &Self::Scalar, b: &Self::Scalar, rel_tol: f64, floor: f64) -> bool;

    /// `δ(a, b) = ϑ(ab)ϑ'(1) / (ϑ(a)ϑ(b))`, via the branch-free product.
    fn delta(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Scalar>;

    /// `ϑ'(1) = ∏_{n≥1} (1 - q^n)^2`.
    fn theta_prime_one(&self) -> Self::Scalar;

    fn product<'a, I>(&self, items: I) -> Self::Scalar
    where
        I: IntoIterator<Item = &'a Self::Scalar>,
        Self::Scalar: 'a,
    {
        items.into_iter().fold(self.one(), |acc, x| self.mul(&acc, x))
    }
}

/// Exact rational series backend.
#[derive(Debug)]
pub struct ExactBackend {
    order: usize,
    cache: Mutex<HashMap<(BigRational, BigRational), Series>>,
}

impl ExactBackend {
    pub fn new(order: usize) -> Result<Self> {
        QContext::exact(order)?;
        Ok(ExactBackend { order, cache: Mutex::new(HashMap::new()) })
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

impl Clone for ExactBackend {
    fn clone(&self) -> Self {
        ExactBackend { order: self.order, cache: Mutex::new(HashMap::new()) }
    }
}

fn check_delta_args(a: &BigRational, b: &BigRational) -> Result<()> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroArgument);
    }
    if a.is_one() || b.is_one() {
        return Err(Error::Singular(format!(
            "δ({}, {}) has a pole",
            format_rational(a),
            format_rational(b)
        )));
    }
    Ok(())
}

/// δ for exact rational `a`, `b` modulo `q^(order+1)`, from the double series
/// `δ(a,b) = (ab-1)/((a-1)(b-1)) - Σ_{m,n≥1} (a^m b^n - a^-m b^-n) q^{mn}`.
pub fn delta_series(a: &BigRational, b: &BigRational, order: usize) -> Result<Series> {
    check_delta_args(a, b)?;
    let one = BigRational::one();
    let ab = a * b;
    let mut coeffs = vec![BigRational::zero(); order + 1];
    coeffs[0] = (&ab - &one) / ((a - &one) * (b - &one));
    let powers = |x: &BigRational| {
        let mut p = vec![one.clone()];
        for i in 1..=order {
            let next = &p[i - 1] * x;
            p.push(next);
        }
        p
    };
    let (pa, pb) = (powers(a), powers(b));
    let (ia, ib) = (powers(&a.recip()), powers(&b.recip()));
    for m in 1..=order {
        for n in 1..=order / m {
            coeffs[m * n] -= &pa[m] * &pb[n] - &ia[m] * &ib[n];
        }
    }
    Ok(Series::from_coeffs(coeffs))
}

/// δ from its defining theta products, expanded factor by factor. Slower
/// than [`delta_series`]; kept as an independent check.
pub fn delta_series_product(a: &BigRational, b: &BigRational, order: usize) -> Result<Series> {
    check_delta_args(a, b)?;
    let one = BigRational::one();
    let ab = a * b;
    let lead = (&ab - &one) / ((a - &one) * (b - &one));
    let mut s = Series::constant(lead, order);
    if s.is_zero() {
        return Ok(s);
    }
    let (ia, ib, iab) = (a.recip(), b.recip(), ab.recip());
    for n in 1..=order {
        s.mul_one_minus(n, &ab);
        s.mul_one_minus(n, &iab);
        s.mul_one_minus(n, &one);
        s.mul_one_minus(n, &one);
        s.div_one_minus(n, a);
        s.div_one_minus(n, &ia);
        s.div_one_minus(n, b);
        s.div_one_minus(n, &ib);
    }
    Ok(s)
}

impl Backend for ExactBackend {
    type Value = BigRational;
    type Scalar = Series;

    fn context(&self) -> QContext {
        QContext::ExactSeries { order: self.order }
    }

    fn name(&self) -> &'static str {
        "exact"
    }

    fn value_one(&self) -> BigRational {
        BigRational::one()
    }

    fn value_mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn value_inv(&self, a: &BigRational) -> Result<BigRational> {
        if a.is_zero() {
            return Err(Error::ZeroArgument);
        }
        Ok(a.recip())
    }

    fn value_pow(&self, a: &BigRational, e: i64) -> Result<BigRational> {
        if a.is_zero() {
            return Err(Error::ZeroArgument);
        }
        Ok(num_traits::pow::Pow::pow(a, e as i32))
    }

    fn value_from_rational(&self, r: &BigRational) -> BigRational {
        r.clone()
    }

    /// `p/q` with `1 ≤ p, q ≤ 99`, never 1.
    fn sample_value<R: Rng + ?Sized>(&self, rng: &mut R) -> BigRational {
        loop {
            let p: i64 = rng.gen_range(1..=99);
            let q: i64 = rng.gen_range(1..=99);
            if p != q {
                return BigRational::new(p.into(), q.into());
            }
        }
    }

    fn value_to_json(&self, v: &BigRational) -> serde_json::Value {
        json!(format_rational(v))
    }

    fn zero(&self) -> Series {
        Series::zero(self.order)
    }

    fn one(&self) -> Series {
        Series::one(self.order)
    }

    fn from_value(&self, v: &BigRational) -> Series {
        Series::constant(v.clone(), self.order)
    }

    fn add(&self, a: &Series, b: &Series) -> Series {
        a.add(b)
    }

    fn sub(&self, a: &Series, b: &Series) -> Series {
        a.sub(b)
    }

    fn mul(&self, a: &Series, b: &Series) -> Series {
        a.mul(b)
    }

    fn neg(&self, a: &Series) -> Series {
        a.neg()
    }

    fn div(&self, a: &Series, b: &Series) -> Result<Series> {
        a.div(b)
    }

    fn is_zero(&self, a: &Series) -> bool {
        a.is_zero()
    }

    fn magnitude(&self, a: &Series) -> f64 {
        a.max_abs()
    }

    fn scalar_to_json(&self, a: &Series) -> serde_json::Value {
        json!(a.coeffs().iter().map(format_rational).collect::<Vec<_>>())
    }

    fn agree(&self, a: &Series, b: &Series, _rel_tol: f64, _floor: f64) -> bool {
        a == b
    }

    fn delta(&self, a: &BigRational, b: &BigRational) -> Result<Series> {
        let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        if let Some(s) = self.cache.lock().unwrap().get(&key) {
            return Ok(s.clone());
        }
        let s = delta_series(&key.0, &key.1, self.order)?;
        self.cache.lock().unwrap().insert(key, s.clone());
        Ok(s)
    }

    fn theta_prime_one(&self) -> Series {
        let mut s = Series::one(self.order);
        let one = BigRational::one();
        for n in 1..=self.order {
            s.mul_one_minus(n, &one);
            s.mul_one_minus(n, &one);
        }
        s
    }
}

/// Double-precision complex backend at a fixed numeric `q`.
#[derive(Debug, Clone)]
pub struct ComplexBackend {
    q: Complex64,
    tol: f64,
}

impl ComplexBackend {
    pub fn new(q: Complex64) -> Result<Self> {
        QContext::complex(q)?;
        Ok(ComplexBackend { q, tol: DEFAULT_PRODUCT_TOL })
    }

    pub fn with_tolerance(q: Complex64, tol: f64) -> Result<Self> {
        QContext::complex(q)?;
        Ok(ComplexBackend { q, tol })
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    /// Number of product factors needed for the given arguments.
    fn terms_needed(&self, args: &[Complex64]) -> usize {
        let qa = self.q.norm();
        if qa == 0.0 {
            return 0;
        }
        let spread = args
            .iter()
            .map(|x| x.norm().max(1.0 / x.norm()))
            .fold(1.0f64, f64::max);
        let mut n = 0;
        let mut qn = 1.0;
        loop {
            n += 1;
            qn *= qa;
            if qn * spread < self.tol || n >= MAX_PRODUCT_TERMS {
                return n;
            }
        }
    }

    /// Jacobi theta `x^{1/2}(1 - 1/x) ∏ (1 - q^n x)(1 - q^n / x)`, with the
    /// principal square root. Branch-dependent; use δ for identities.
    pub fn theta(&self, x: Complex64) -> Result<Complex64> {
        if x == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroArgument);
        }
        let one = Complex64::new(1.0, 0.0);
        let mut acc = x.sqrt() * (one - one / x);
        let mut qn = one;
        for _ in 0..self.terms_needed(&[x]) {
            qn *= self.q;
            acc *= (one - qn * x) * (one - qn / x);
        }
        Ok(acc)
    }
}

impl Backend for ComplexBackend {
    type Value = Complex64;
    type Scalar = Complex64;

    fn context(&self) -> QContext {
        QContext::Complex { q: [self.q.re, self.q.im], tol: self.tol }
    }

    fn name(&self) -> &'static str {
        "complex"
    }

    fn value_one(&self) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn value_mul(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a * b
    }

    fn value_inv(&self, a: &Complex64) -> Result<Complex64> {
        if a.norm() == 0.0 {
            return Err(Error::ZeroArgument);
        }
        Ok(a.inv())
    }

    fn value_pow(&self, a: &Complex64, e: i64) -> Result<Complex64> {
        if a.norm() == 0.0 {
            return Err(Error::ZeroArgument);
        }
        Ok(a.powi(e as i32))
    }

    fn value_from_rational(&self, r: &BigRational) -> Complex64 {
        Complex64::new(rational_to_f64(r), 0.0)
    }

    /// Uniform on the annulus `0.5 ≤ |v| ≤ 2` (radius and angle uniform).
    fn sample_value<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let r: f64 = rng.gen_range(0.5..=2.0);
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        Complex64::from_polar(r, t)
    }

    fn value_to_json(&self, v: &Complex64) -> serde_json::Value {
        json!([v.re, v.im])
    }

    fn zero(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn one(&self) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn from_value(&self, v: &Complex64) -> Complex64 {
        *v
    }

    fn add(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a + b
    }

    fn sub(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a - b
    }

    fn mul(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a * b
    }

    fn neg(&self, a: &Complex64) -> Complex64 {
        -a
    }

    fn div(&self, a: &Complex64, b: &Complex64) -> Result<Complex64> {
        if b.norm() == 0.0 {
            return Err(Error::NotInvertible("division by complex zero".into()));
        }
        Ok(a / b)
    }

    fn is_zero(&self, a: &Complex64) -> bool {
        a.norm() == 0.0
    }

    fn magnitude(&self, a: &Complex64) -> f64 {
        a.norm()
    }

    fn scalar_to_json(&self, a: &Complex64) -> serde_json::Value {
        json!([a.re, a.im])
    }

    fn agree(&self, a: &Complex64, b: &Complex64, rel_tol: f64, floor: f64) -> bool {
        let scale = a.norm().max(b.norm()).max(floor);
        if scale == 0.0 {
            return true;
        }
        (a - b).norm() <= rel_tol * scale
    }

    fn delta(&self, a: &Complex64, b: &Complex64) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        if a.norm() == 0.0 || b.norm() == 0.0 {
            return Err(Error::ZeroArgument);
        }
        if (a - one).norm() < SINGULARITY_GUARD || (b - one).norm() < SINGULARITY_GUARD {
            return Err(Error::Singular(format!("δ({a}, {b}) is too close to a pole")));
        }
        let ab = a * b;
        let mut acc = (ab - one) / ((a - one) * (b - one));
        let (ia, ib, iab) = (a.inv(), b.inv(), ab.inv());
        let mut qn = one;
        for _ in 0..self.terms_needed(&[*a, *b, ab]) {
            qn *= self.q;
            let num = (one - qn * ab) * (one - qn * iab) * (one - qn) * (one - qn);
            let den = (one - qn * a) * (one - qn * ia) * (one - qn * b) * (one - qn * ib);
            acc *= num / den;
        }
        Ok(acc)
    }

    fn theta_prime_one(&self) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = one;
        let mut qn = one;
        for _ in 0..self.terms_needed(&[]) {
            qn *= self.q;
            acc *= (one - qn) * (one - qn);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::{prop_assert, prop_assert_eq, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn double_series_matches_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let b = ExactBackend::new(1).unwrap();
        for _ in 0..40 {
            let (x, y) = (b.sample_value(&mut rng), b.sample_value(&mut rng));
            assert_eq!(delta_series(&x, &y, 12).unwrap(), delta_series_product(&x, &y, 12).unwrap());
        }
        // ab = 1 makes δ vanish identically
        assert!(delta_series(&r(3, 7), &r(7, 3), 8).unwrap().is_zero());
        assert!(delta_series_product(&r(1, 1), &r(2, 1), 3).is_err());
    }

    #[test]
    fn contexts_validate() {
        assert!(QContext::complex(c(1.0, 0.0)).is_err());
        assert!(QContext::complex(c(0.6, 0.9)).is_err());
        assert!(QContext::complex(c(0.3, 0.1)).is_ok());
        assert!(ExactBackend::new(0).is_err());
    }

    #[test]
    fn theta_basics() {
        let b = ComplexBackend::new(c(0.2, 0.1)).unwrap();
        assert_eq!(b.theta(c(1.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(b.theta(c(0.0, 0.0)).is_err());
        let b0 = ComplexBackend::new(c(0.0, 0.0)).unwrap();
        let x = c(2.0, 0.5);
        let expected = x.sqrt() - 1.0 / x.sqrt();
        assert!((b0.theta(x).unwrap() - expected).norm() < 1e-15);
        assert_eq!(b0.theta_prime_one(), c(1.0, 0.0));
    }

    #[test]
    fn theta_odd_on_right_half_plane() {
        let b = ComplexBackend::new(c(0.3, -0.2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let x = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-1.4..1.4));
            let lhs = b.theta(x.inv()).unwrap();
            let rhs = -b.theta(x).unwrap();
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn theta_prime_one_exact() {
        let b = ExactBackend::new(2).unwrap();
        assert_eq!(b.theta_prime_one().coeffs(), &[r(1, 1), r(-2, 1), r(-1, 1)]);
    }

    #[test]
    fn theta_prime_one_finite_difference() {
        for q in [c(0.1, 0.0), c(0.3, 0.2), c(-0.4, 0.1)] {
            let b = ComplexBackend::new(q).unwrap();
            let h = 1e-6;
            let fd = (b.theta(c(1.0 + h, 0.0)).unwrap() - b.theta(c(1.0 - h, 0.0)).unwrap()) / (2.0 * h);
            let v = b.theta_prime_one();
            assert!((fd - v).norm() <= 1e-8 * v.norm(), "{q}: {fd} vs {v}");
        }
    }

    #[test]
    fn delta_leading_terms() {
        let b = ExactBackend::new(8).unwrap();
        let d = b.delta(&r(2, 1), &r(3, 1)).unwrap();
        assert_eq!(d.coeff(0), &r(5, 2));
        assert_eq!(d.coeff(1), &r(-35, 6));
        let b0 = ComplexBackend::new(c(0.0, 0.0)).unwrap();
        assert_eq!(b0.delta(&c(2.0, 0.0), &c(3.0, 0.0)).unwrap(), c(2.5, 0.0));
    }

    #[test]
    fn delta_errors() {
        let b = ExactBackend::new(4).unwrap();
        assert!(matches!(b.delta(&r(1, 1), &r(3, 1)), Err(Error::Singular(_))));
        assert!(matches!(b.delta(&r(0, 1), &r(3, 1)), Err(Error::ZeroArgument)));
        let bc = ComplexBackend::new(c(0.1, 0.0)).unwrap();
        assert!(matches!(bc.delta(&c(1.0, 1e-5), &c(3.0, 0.0)), Err(Error::Singular(_))));
        assert!(matches!(bc.delta(&c(0.0, 0.0), &c(3.0, 0.0)), Err(Error::ZeroArgument)));
        // ab = 1 gives the zero function, not an error
        assert!(b.delta(&r(2, 1), &r(1, 2)).unwrap().is_zero());
    }

    #[test]
    fn delta_matches_theta_quotient() {
        let b = ComplexBackend::new(c(0.15, 0.1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            // right half-plane with |arg a| + |arg b| < π keeps principal roots multiplicative
            let a = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-1.4..1.4));
            let bb = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-1.4..1.4));
            if (a - 1.0).norm() < 1e-2 || (bb - 1.0).norm() < 1e-2 {
                continue;
            }
            let quotient =
                b.theta(a * bb).unwrap() * b.theta_prime_one() / (b.theta(a).unwrap() * b.theta(bb).unwrap());
            let d = b.delta(&a, &bb).unwrap();
            assert!((quotient - d).norm() <= 1e-10 * d.norm().max(1e-3), "{a} {bb}");
        }
    }

    proptest! {
        #[test]
        fn exact_delta_symmetry_and_inversion(seed in 0u64..10_000) {
            let b = ExactBackend::new(6).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, y) = (b.sample_value(&mut rng), b.sample_value(&mut rng));
            let d = b.delta(&x, &y).unwrap();
            prop_assert_eq!(&b.delta(&y, &x).unwrap(), &d);
            prop_assert_eq!(b.delta(&x.recip(), &y.recip()).unwrap(), d.neg());
        }

        #[test]
        fn complex_delta_symmetry_and_inversion(seed in 0u64..10_000) {
            let b = ComplexBackend::new(c(0.07, 0.02)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, y) = (b.sample_value(&mut rng), b.sample_value(&mut rng));
            // samples next to a pole are refused by the guard
            let Ok(d) = b.delta(&x, &y) else { return Ok(()) };
            prop_assert!((b.delta(&y, &x).unwrap() - d).norm() <= 1e-12 * d.norm());
            prop_assert!((b.delta(&x.inv(), &y.inv()).unwrap() + d).norm() <= 1e-9 * d.norm());
        }
    }
}
