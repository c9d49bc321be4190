//! Coordinate charts: the torus coordinates `z_i` and `μ_i` in which the
//! tabulated classes are written, mapped to the canonical variables by
//! integer monomials.

use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::Rng;

use crate::elliptic::{Backend, EvalPoint, Monomial, Var};
use crate::error::{Error, Result};
use crate::rootsys::{CartanLabel, Family};

/// Exponent vector over the chart variables `z1..zn, mu1..mun, h`.
pub type ChartMonomial = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    name: String,
    label: CartanLabel,
    n: usize,
    /// `canonical[slot]` expresses canonical variable `slot` in chart variables.
    canonical: Vec<ChartMonomial>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Sl,
    So5,
    Sp2,
}

impl Chart {
    /// `SL_n`: `ζ_s = z_{s+1}/z_s`, `ν_s = μ_{s+1}/μ_s`.
    pub fn sl(n: usize) -> Result<Chart> {
        let label = CartanLabel::new(Family::A, n.saturating_sub(1))?;
        let r = n - 1;
        let width = 2 * n + 1;
        let mut canonical = vec![vec![0; width]; 2 * r + 1];
        for s in 0..r {
            canonical[s][s] = -1;
            canonical[s][s + 1] = 1;
            canonical[r + s][n + s] = -1;
            canonical[r + s][n + s + 1] = 1;
        }
        canonical[2 * r][2 * n] = 1;
        Ok(Chart { name: format!("sl{n}"), label, n, canonical })
    }

    /// `SO(5)`: `ζ1 = z2/z1`, `ζ2 = 1/z2`, `ν1 = μ2/μ1`, `ν2 = 1/μ2²`.
    pub fn so5() -> Chart {
        let canonical = vec![
            vec![-1, 1, 0, 0, 0],
            vec![0, -1, 0, 0, 0],
            vec![0, 0, -1, 1, 0],
            vec![0, 0, 0, -2, 0],
            vec![0, 0, 0, 0, 1],
        ];
        Chart { name: "so5".into(), label: CartanLabel::new(Family::B, 2).unwrap(), n: 2, canonical }
    }

    /// `Sp(2)`: `ζ1 = z2/z1`, `ζ2 = 1/z2²`, `ν1 = μ2/μ1`, `ν2 = 1/μ2`.
    pub fn sp2() -> Chart {
        let canonical = vec![
            vec![-1, 1, 0, 0, 0],
            vec![0, -2, 0, 0, 0],
            vec![0, 0, -1, 1, 0],
            vec![0, 0, 0, -1, 0],
            vec![0, 0, 0, 0, 1],
        ];
        Chart { name: "sp2".into(), label: CartanLabel::new(Family::C, 2).unwrap(), n: 2, canonical }
    }

    /// The chart used for a Cartan type, if there is one.
    pub fn for_label(label: CartanLabel) -> Option<Chart> {
        match (label.family(), label.rank()) {
            (Family::A, r) => Chart::sl(r + 1).ok(),
            (Family::B, 2) => Some(Chart::so5()),
            (Family::C, 2) => Some(Chart::sp2()),
            _ => None,
        }
    }

    fn kind(&self) -> Kind {
        match self.label.family() {
            Family::A => Kind::Sl,
            Family::B => Kind::So5,
            _ => Kind::Sp2,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn label(&self) -> CartanLabel {
        self.label
    }

    pub fn num_vars(&self) -> usize {
        2 * self.n + 1
    }

    pub fn var_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.n).map(|i| format!("z{i}")).collect();
        names.extend((1..=self.n).map(|i| format!("mu{i}")));
        names.push("h".into());
        names
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names().iter().position(|v| v == name)
    }

    /// Canonical variable written in chart variables.
    pub fn canonical_image(&self, v: Var) -> &ChartMonomial {
        &self.canonical[v.slot(self.label.rank())]
    }

    /// Writes a chart monomial in canonical variables, when it lies in the
    /// image of the canonical lattice.
    pub fn to_canonical(&self, m: &[i64]) -> Option<Monomial> {
        let r = self.label.rank();
        let cols = 2 * r + 1;
        let rows = self.num_vars();
        // augmented system  Σ_slot x_slot · canonical[slot] = m
        let mut a: Vec<Vec<Ratio<i64>>> = (0..rows)
            .map(|i| {
                let mut row: Vec<Ratio<i64>> = (0..cols).map(|j| Ratio::from(self.canonical[j][i])).collect();
                row.push(Ratio::from(m[i]));
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..cols {
            let Some(p) = (row..rows).find(|&i| !a[i][col].is_zero()) else { continue };
            a.swap(row, p);
            let inv = a[row][col].recip();
            for x in &mut a[row] {
                *x *= inv;
            }
            for i in 0..rows {
                if i != row && !a[i][col].is_zero() {
                    let f = a[i][col];
                    for j in 0..=cols {
                        let t = a[row][j] * f;
                        a[i][j] -= t;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        if a[row..].iter().any(|r| !r[cols].is_zero()) {
            return None;
        }
        let mut exps = vec![0i64; cols];
        for (i, &col) in pivots.iter().enumerate() {
            let v = a[i][cols];
            if !v.denom().is_one() {
                return None;
            }
            exps[col] = *v.numer();
        }
        Monomial::from_exponents(r, exps).ok()
    }

    /// Parses products and quotients of chart variables, e.g. `mu1^2`,
    /// `z1/z2`, `1/(z1*z2)`, `h`.
    pub fn parse_monomial(&self, s: &str) -> Result<ChartMonomial> {
        let mut parser = MonomialParser { chart: self, src: s, chars: s.char_indices().peekable() };
        let m = parser.expr()?;
        parser.skip_ws();
        if let Some((i, c)) = parser.chars.peek() {
            return Err(Error::Parse(format!("unexpected `{c}` at {i} in `{s}`")));
        }
        Ok(m)
    }

    pub fn format_monomial(&self, m: &[i64]) -> String {
        let names = self.var_names();
        let part = |sign: i64| {
            m.iter()
                .zip(&names)
                .filter(|(e, _)| e.signum() == sign)
                .map(|(e, n)| if e.abs() == 1 { n.clone() } else { format!("{n}^{}", e.abs()) })
                .collect::<Vec<_>>()
        };
        let (num, den) = (part(1), part(-1));
        let num = if num.is_empty() { "1".to_string() } else { num.join("*") };
        match den.len() {
            0 => num,
            1 => format!("{num}/{}", den[0]),
            _ => format!("{num}/({})", den.join("*")),
        }
    }

    /// Random chart coordinates.
    pub fn sample<B: Backend, R: Rng + ?Sized>(&self, backend: &B, rng: &mut R) -> Vec<B::Value> {
        (0..self.num_vars()).map(|_| backend.sample_value(rng)).collect()
    }

    pub fn eval<B: Backend>(&self, backend: &B, values: &[B::Value], m: &[i64]) -> Result<B::Value> {
        let mut acc = backend.value_one();
        for (v, &e) in values.iter().zip(m) {
            if e != 0 {
                acc = backend.value_mul(&acc, &backend.value_pow(v, e)?);
            }
        }
        Ok(acc)
    }

    /// Canonical point of chart coordinates.
    pub fn to_point<B: Backend>(&self, backend: &B, values: &[B::Value]) -> Result<EvalPoint<B::Value>> {
        if values.len() != self.num_vars() {
            return Err(Error::Internal(format!("{} chart values for chart {}", values.len(), self.name)));
        }
        let v = self.canonical.iter().map(|m| self.eval(backend, values, m)).collect::<Result<Vec<_>>>()?;
        EvalPoint::new(self.label.rank(), v)
    }

    /// The duality substitution in chart form: each variable of `self`
    /// written in the variables of `dual`, whose chart must be the dual one.
    /// `SL_n`: `z_k := μ'_{n+1-k}`, `μ_k := 1/z'_k`; rank two:
    /// `z_i := 1/μ'_i`, `μ_i := 1/z'_i`; always `h := 1/h`.
    pub fn dual_substitution(&self, dual: &Chart) -> Result<Vec<ChartMonomial>> {
        if dual.label != self.label.dual() {
            return Err(Error::InvalidLabel(dual.label.to_string(), format!("not dual to {}", self.label)));
        }
        let n = self.n;
        let width = 2 * n + 1;
        let mut out = vec![vec![0; width]; width];
        for k in 0..n {
            match self.kind() {
                Kind::Sl => out[k][n + (n - 1 - k)] = 1,
                _ => out[k][n + k] = -1,
            }
            out[n + k][k] = -1;
        }
        out[2 * n][2 * n] = -1;
        Ok(out)
    }

    /// Chart coordinates of `self` pulled back from those of `dual`.
    pub fn pull_from_dual<B: Backend>(&self, backend: &B, dual: &Chart, dual_values: &[B::Value]) -> Result<Vec<B::Value>> {
        self.dual_substitution(dual)?
            .iter()
            .map(|m| dual.eval(backend, dual_values, m))
            .collect()
    }
}

struct MonomialParser<'a> {
    chart: &'a Chart,
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
}

impl MonomialParser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} in monomial `{}`", self.src))
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some((_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn expr(&mut self) -> Result<ChartMonomial> {
        let mut acc = self.power()?;
        loop {
            self.skip_ws();
            let sign = match self.chars.peek() {
                Some((_, '*')) => {
                    self.chars.next();
                    1
                }
                Some((_, '/')) => {
                    self.chars.next();
                    -1
                }
                Some((_, c)) if c.is_ascii_alphanumeric() || *c == '(' => 1,
                _ => return Ok(acc),
            };
            let rhs = self.power()?;
            for (a, b) in acc.iter_mut().zip(rhs) {
                *a += sign * b;
            }
        }
    }

    fn power(&mut self) -> Result<ChartMonomial> {
        let base = self.atom()?;
        self.skip_ws();
        if let Some((_, '^')) = self.chars.peek() {
            self.chars.next();
            self.skip_ws();
            let e = self.integer(true)?;
            return Ok(base.into_iter().map(|x| x * e).collect());
        }
        Ok(base)
    }

    fn integer(&mut self, signed: bool) -> Result<i64> {
        let mut text = String::new();
        if signed {
            if let Some((_, '-')) = self.chars.peek() {
                text.push('-');
                self.chars.next();
            }
        }
        while let Some(&(_, c)) = self.chars.peek() {
            if !c.is_ascii_digit() {
                break;
            }
            text.push(c);
            self.chars.next();
        }
        text.parse().map_err(|_| self.err("expected an integer"))
    }

    fn atom(&mut self) -> Result<ChartMonomial> {
        self.skip_ws();
        match self.chars.peek().copied() {
            Some((_, '(')) => {
                self.chars.next();
                let inner = self.expr()?;
                self.skip_ws();
                match self.chars.next() {
                    Some((_, ')')) => Ok(inner),
                    _ => Err(self.err("unbalanced parenthesis")),
                }
            }
            Some((_, c)) if c.is_ascii_digit() => {
                if self.integer(false)? != 1 {
                    return Err(self.err("only the constant 1 is allowed"));
                }
                Ok(vec![0; self.chart.num_vars()])
            }
            Some((_, c)) if c.is_ascii_alphabetic() => {
                let mut name = String::new();
                while let Some(&(_, c)) = self.chars.peek() {
                    if !c.is_ascii_alphabetic() {
                        break;
                    }
                    name.push(c);
                    self.chars.next();
                }
                while let Some(&(_, c)) = self.chars.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    name.push(c);
                    self.chars.next();
                }
                let idx = self.chart.var_index(&name).ok_or_else(|| self.err(&format!("unknown variable `{name}`")))?;
                let mut m = vec![0; self.chart.num_vars()];
                m[idx] = 1;
                Ok(m)
            }
            _ => Err(self.err("expected a variable, 1 or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::DualPair;
    use crate::elliptic::{eval_monomial, ExactBackend};
    use num_rational::BigRational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_and_format() {
        let c = Chart::so5();
        assert_eq!(c.parse_monomial("mu1^2").unwrap(), vec![0, 0, 2, 0, 0]);
        assert_eq!(c.parse_monomial("z1/z2").unwrap(), vec![1, -1, 0, 0, 0]);
        assert_eq!(c.parse_monomial("1/(z1*z2)").unwrap(), vec![-1, -1, 0, 0, 0]);
        assert_eq!(c.parse_monomial("1/(mu1 mu2)").unwrap(), vec![0, 0, -1, -1, 0]);
        assert_eq!(c.parse_monomial(" h ").unwrap(), vec![0, 0, 0, 0, 1]);
        assert_eq!(c.parse_monomial("z2^-2").unwrap(), vec![0, -2, 0, 0, 0]);
        assert_eq!(c.parse_monomial("1").unwrap(), vec![0; 5]);
        for bad in ["", "x1", "2", "(z1", "z1)", "z1^"] {
            assert!(c.parse_monomial(bad).is_err(), "{bad}");
        }
        for s in ["mu1^2", "z1/z2", "1/(z1*z2)", "1", "z1*mu2^3/h^2"] {
            let m = c.parse_monomial(s).unwrap();
            assert_eq!(c.parse_monomial(&c.format_monomial(&m)).unwrap(), m);
        }
    }

    #[test]
    fn canonical_round_trip() {
        let so5 = Chart::so5();
        // μ1² = ν1^{-2} ν2^{-1}
        let m = so5.to_canonical(&so5.parse_monomial("mu1^2").unwrap()).unwrap();
        assert_eq!(m.exponents(), &[0, 0, -2, -1, 0]);
        // μ2 alone needs a square root of ν2
        assert!(so5.to_canonical(&so5.parse_monomial("mu2").unwrap()).is_none());
        // z1 has nonzero total degree, outside the SL2 image
        assert!(Chart::sl(2).unwrap().to_canonical(&[1, 0, 0, 0, 0]).is_none());
    }

    #[test]
    fn chart_naturality() {
        let b = ExactBackend::new(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for chart in [Chart::so5(), Chart::sp2(), Chart::sl(2).unwrap(), Chart::sl(3).unwrap()] {
            let vals = chart.sample(&b, &mut rng);
            let p = chart.to_point(&b, &vals).unwrap();
            for s in ["z1/z2", "mu1^2", "1/(z1*z2)", "h", "mu1/mu2"] {
                let m = chart.parse_monomial(s).unwrap();
                if let Some(c) = chart.to_canonical(&m) {
                    assert_eq!(eval_monomial(&b, &p, &c).unwrap(), chart.eval(&b, &vals, &m).unwrap());
                }
            }
        }
    }

    #[test]
    fn chart_substitution_matches_canonical() {
        let b = ExactBackend::new(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (g, gv) in [
            (Chart::so5(), Chart::sp2()),
            (Chart::sp2(), Chart::so5()),
            (Chart::sl(2).unwrap(), Chart::sl(2).unwrap()),
            (Chart::sl(3).unwrap(), Chart::sl(3).unwrap()),
            (Chart::sl(4).unwrap(), Chart::sl(4).unwrap()),
        ] {
            let pair = DualPair::new(&crate::rootsys::RootSystem::build(g.label())).unwrap();
            let dual_vals = gv.sample(&b, &mut rng);
            let via_chart = g.to_point(&b, &g.pull_from_dual(&b, &gv, &dual_vals).unwrap()).unwrap();
            let via_canonical = pair.substitution().pull_point(&b, &gv.to_point(&b, &dual_vals).unwrap()).unwrap();
            assert_eq!(via_chart, via_canonical, "{}", g.name());
        }
        assert!(Chart::so5().dual_substitution(&Chart::so5()).is_err());
    }

    #[test]
    fn sl2_substitution_is_the_displayed_one() {
        // z1 := μ2, z2 := μ1, μ1 := 1/z1, μ2 := 1/z2, h := 1/h
        let c = Chart::sl(2).unwrap();
        let b = ExactBackend::new(1).unwrap();
        let r = |n: i64| BigRational::from_integer(n.into());
        let vals = vec![r(2), r(3), r(5), r(7), r(11)];
        let got = c.pull_from_dual(&b, &c, &vals).unwrap();
        assert_eq!(got, vec![r(7), r(5), r(2).recip(), r(3).recip(), r(11).recip()]);
    }
}
