//! Power series in `q` with exact rational coefficients, truncated modulo
//! `q^(N+1)`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Series {
    coeffs: Vec<BigRational>,
}

impl Series {
    pub fn zero(order: usize) -> Self {
        Series { coeffs: vec![BigRational::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(BigRational::one(), order)
    }

    pub fn constant(c: BigRational, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// Coefficients `c_0..c_N`; the truncation order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty(), "a series keeps at least the constant term");
        Series { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &BigRational {
        &self.coeffs[n]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn check_order(&self, other: &Series) {
        assert_eq!(self.order(), other.order(), "series truncation orders differ");
    }

    pub fn add(&self, other: &Series) -> Series {
        self.check_order(other);
        Series { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.check_order(other);
        Series { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> Series {
        Series { coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, c: &BigRational) -> Series {
        Series { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, other: &Series) -> Series {
        self.check_order(other);
        let n = self.order();
        // constant series are by far the most common operand here
        if other.coeffs[1..].iter().all(Zero::is_zero) {
            return self.scale(&other.coeffs[0]);
        }
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            return other.scale(&self.coeffs[0]);
        }
        let mut out = vec![BigRational::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Series { coeffs: out }
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn inv(&self) -> Result<Series> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(Error::NotInvertible("series with zero constant term".into()));
        }
        let c0_inv = c0.recip();
        let n = self.order();
        let mut out: Vec<BigRational> = Vec::with_capacity(n + 1);
        out.push(c0_inv.clone());
        for k in 1..=n {
            let mut acc = BigRational::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &out[k - j];
                }
            }
            out.push(-(acc * &c0_inv));
        }
        Ok(Series { coeffs: out })
    }

    pub fn div(&self, other: &Series) -> Result<Series> {
        Ok(self.mul(&other.inv()?))
    }

    /// `self *= (1 - c q^n)`, in place.
    pub fn mul_one_minus(&mut self, n: usize, c: &BigRational) {
        if n == 0 {
            let f = BigRational::one() - c;
            for a in &mut self.coeffs {
                *a *= &f;
            }
            return;
        }
        for k in (n..self.coeffs.len()).rev() {
            let t = &self.coeffs[k - n] * c;
            self.coeffs[k] -= t;
        }
    }

    /// `self /= (1 - c q^n)` for `n >= 1`, in place.
    pub fn div_one_minus(&mut self, n: usize, c: &BigRational) {
        assert!(n >= 1);
        for k in n..self.coeffs.len() {
            let t = &self.coeffs[k - n] * c;
            self.coeffs[k] += t;
        }
    }

    /// Sums the truncated series at a numeric `q`.
    pub fn eval(&self, q: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut qn = Complex64::new(1.0, 0.0);
        for c in &self.coeffs {
            acc += qn * rational_to_f64(c);
            qn *= q;
        }
        acc
    }

    /// Largest coefficient magnitude, as a float. Zero iff the series is zero.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| rational_to_f64(c).abs()).fold(0.0, f64::max)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // scale both down by a common power of two first
            let bits = r.numer().bits().max(r.denom().bits()) as i64;
            let shift = (bits - 1000).max(0) as usize;
            let n: BigInt = r.numer() >> shift;
            let d: BigInt = r.denom() >> shift;
            n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
        }
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim().parse::<BigInt>().map_err(|_| Error::Parse(format!("bad rational `{s}`")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(parse_int(n)?, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}
