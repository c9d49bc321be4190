//! Reference tables stored as text, one entry per line:
//!
//! ```text
//! TYPE omega_word sigma_word value
//! ```
//!
//! where `value` is `0` or a `+`-separated sum of terms, each an optional
//! `-` followed by δ-factors `(a|b)` with `a`, `b` monomials in the chart
//! coordinates of `TYPE`. Lines starting with `#` are comments.

use rand::Rng;
use rayon::prelude::*;

use crate::chart::{Chart, ChartMonomial};
use crate::classes::{bs_table, is_table_zero, table_scale, COMPLEX_REL_TOL, COMPLEX_ZERO_REL};
use crate::duality::DualPair;
use crate::elliptic::{retry_singular, Backend};
use crate::error::{Error, Result};
use crate::rootsys::{CartanLabel, RootSystem};
use crate::verify::point_rng;
use crate::weyl::{parse_word, ElementId, WeylGroup};

/// Built-in files: `(name, contents)`.
pub const BUILTIN: &[(&str, &str)] = &[
    ("sl2.txt", include_str!("../data/corpus/sl2.txt")),
    ("so5.txt", include_str!("../data/corpus/so5.txt")),
    ("sp2.txt", include_str!("../data/corpus/sp2.txt")),
    ("sp2_sum.txt", include_str!("../data/corpus/sp2_sum.txt")),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub negative: bool,
    pub factors: Vec<(ChartMonomial, ChartMonomial)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expected {
    Zero,
    Sum(Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub label: CartanLabel,
    pub omega_word: String,
    pub sigma_word: String,
    pub omega: Vec<usize>,
    pub sigma: Vec<usize>,
    pub expected: Expected,
    /// `file:line`
    pub source: String,
}

impl CorpusEntry {
    pub fn chart(&self) -> Result<Chart> {
        Chart::for_label(self.label)
            .ok_or_else(|| Error::InvalidLabel(self.label.to_string(), "no coordinate chart".into()))
    }

    pub fn is_zero(&self) -> bool {
        self.expected == Expected::Zero
    }
}

impl Expected {
    pub fn eval<B: Backend>(&self, backend: &B, chart: &Chart, values: &[B::Value]) -> Result<B::Scalar> {
        let terms = match self {
            Expected::Zero => return Ok(backend.zero()),
            Expected::Sum(terms) => terms,
        };
        let mut acc = backend.zero();
        for term in terms {
            let mut t = backend.one();
            for (a, b) in &term.factors {
                let d = backend.delta(&chart.eval(backend, values, a)?, &chart.eval(backend, values, b)?)?;
                t = backend.mul(&t, &d);
            }
            acc = if term.negative { backend.sub(&acc, &t) } else { backend.add(&acc, &t) };
        }
        Ok(acc)
    }
}

fn parse_term(chart: &Chart, text: &str, at: &str) -> Result<Term> {
    let err = |msg: &str| Error::Parse(format!("{at}: {msg} in `{text}`"));
    let mut rest = text.trim();
    let negative = rest.starts_with('-');
    if negative {
        rest = rest[1..].trim_start();
    }
    let mut factors = Vec::new();
    while !rest.is_empty() {
        if !rest.starts_with('(') {
            return Err(err("expected `(`"));
        }
        let (mut depth, mut bar, mut end) = (0i32, None, None);
        for (i, c) in rest.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(i);
                        break;
                    }
                }
                '|' if depth == 1 => bar = Some(i),
                _ => {}
            }
        }
        let (Some(bar), Some(end)) = (bar, end) else {
            return Err(err("malformed factor"));
        };
        factors.push((chart.parse_monomial(&rest[1..bar])?, chart.parse_monomial(&rest[bar + 1..end])?));
        rest = rest[end + 1..].trim_start();
    }
    if factors.is_empty() {
        return Err(err("empty term"));
    }
    Ok(Term { negative, factors })
}

/// Splits at `+` outside parentheses.
fn split_terms(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

pub fn parse_corpus(text: &str, name: &str) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = format!("{name}:{}", n + 1);
        let mut fields = line.split_whitespace();
        let (Some(ty), Some(om), Some(sg)) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse(format!("{at}: expected `TYPE omega sigma value`")));
        };
        let value = fields.collect::<Vec<_>>().join(" ");
        if value.is_empty() {
            return Err(Error::Parse(format!("{at}: missing value")));
        }
        let label: CartanLabel = ty.parse()?;
        let chart = Chart::for_label(label)
            .ok_or_else(|| Error::InvalidLabel(ty.into(), "no coordinate chart".into()))?;
        let value = value.trim();
        let expected = if value == "0" {
            Expected::Zero
        } else {
            Expected::Sum(split_terms(value).into_iter().map(|t| parse_term(&chart, t, &at)).collect::<Result<_>>()?)
        };
        out.push(CorpusEntry {
            label,
            omega_word: om.to_string(),
            sigma_word: sg.to_string(),
            omega: parse_word(om)?,
            sigma: parse_word(sg)?,
            expected,
            source: at,
        });
    }
    Ok(out)
}

/// All built-in entries, in file order.
pub fn builtin_entries() -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for (name, text) in BUILTIN {
        out.extend(parse_corpus(text, name)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryCheck<S> {
    pub point: usize,
    pub engine: S,
    pub expected: S,
    pub pass: bool,
}

/// Compares the engine's class with an entry at `points` random chart points.
pub fn check_entry<B: Backend, R: Rng + ?Sized>(
    backend: &B,
    weyl: &WeylGroup,
    entry: &CorpusEntry,
    points: usize,
    rng: &mut R,
) -> Result<Vec<EntryCheck<B::Scalar>>> {
    let chart = entry.chart()?;
    let sigma = weyl.from_word(&entry.sigma)?;
    (0..points)
        .map(|point| {
            retry_singular(rng, |rng| {
                let values = chart.sample(backend, rng);
                let p = chart.to_point(backend, &values)?;
                let table = bs_table(backend, weyl, &entry.omega, &p)?;
                let expected = entry.expected.eval(backend, &chart, &values)?;
                let engine = table.value(sigma).clone();
                let scale = table_scale(backend, &table.values);
                let pass = judge(backend, entry, &engine, &expected, scale);
                Ok(EntryCheck { point, engine, expected, pass })
            })
        })
        .collect()
}

/// Checks every entry at `points` random chart points. Entries sharing a
/// type and `ω` share their points and one class table per point; group `k`
/// (in order of first appearance) draws from [`point_rng`]`(seed, k)`, so the
/// result does not depend on scheduling. Results are in entry order.
pub fn check_entries<B>(
    backend: &B,
    entries: &[CorpusEntry],
    points: usize,
    seed: u64,
) -> Result<Vec<Vec<EntryCheck<B::Scalar>>>>
where
    B: Backend + Sync,
    B::Scalar: Send,
{
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        match groups.iter_mut().find(|g| {
            let head = &entries[g[0]];
            head.label == e.label && head.omega == e.omega
        }) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    let per_group = groups
        .par_iter()
        .enumerate()
        .map(|(k, members)| check_group(backend, entries, members, points, &mut point_rng(seed, k)))
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<Vec<EntryCheck<B::Scalar>>> = entries.iter().map(|_| Vec::new()).collect();
    for (members, checks) in groups.iter().zip(per_group) {
        for (&i, c) in members.iter().zip(checks) {
            out[i] = c;
        }
    }
    Ok(out)
}

fn check_group<B: Backend, R: Rng + ?Sized>(
    backend: &B,
    entries: &[CorpusEntry],
    members: &[usize],
    points: usize,
    rng: &mut R,
) -> Result<Vec<Vec<EntryCheck<B::Scalar>>>> {
    let head = &entries[members[0]];
    let weyl = WeylGroup::new(&RootSystem::build(head.label))?;
    let chart = head.chart()?;
    let sigmas = members.iter().map(|&i| weyl.from_word(&entries[i].sigma)).collect::<Result<Vec<_>>>()?;
    let mut out = vec![Vec::with_capacity(points); members.len()];
    for point in 0..points {
        let checks = retry_singular(rng, |rng| {
            let values = chart.sample(backend, rng);
            let p = chart.to_point(backend, &values)?;
            let table = bs_table(backend, &weyl, &head.omega, &p)?;
            let scale = table_scale(backend, &table.values);
            members
                .iter()
                .zip(&sigmas)
                .map(|(&i, &sigma)| {
                    let engine = table.value(sigma).clone();
                    let expected = entries[i].expected.eval(backend, &chart, &values)?;
                    let pass = judge(backend, &entries[i], &engine, &expected, scale);
                    Ok(EntryCheck { point, engine, expected, pass })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for (slot, c) in out.iter_mut().zip(checks) {
            slot.push(c);
        }
    }
    Ok(out)
}

fn judge<B: Backend>(backend: &B, entry: &CorpusEntry, engine: &B::Scalar, expected: &B::Scalar, scale: f64) -> bool {
    if entry.is_zero() {
        is_table_zero(backend, engine, scale)
    } else {
        backend.agree(engine, expected, COMPLEX_REL_TOL, COMPLEX_ZERO_REL * scale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck<S> {
    /// Index into the `G` entries.
    pub entry: usize,
    /// Index into the `G^v` entries.
    pub dual_entry: usize,
    pub point: usize,
    pub lhs: S,
    pub rhs: S,
    pub pass: bool,
}

/// Checks tabulated entries of `G` against those of `G^v` through the chart
/// form of the duality substitution: the `G` entry at `(ω', σ')` times
/// `(-1)^{ℓ(τ0)}` equals the `G^v` entry at `(σ'⁻¹τ0, ω'⁻¹τ0)`. Entry pairs
/// with no counterpart are skipped.
pub fn cross_check<B: Backend, R: Rng + ?Sized>(
    backend: &B,
    entries: &[CorpusEntry],
    dual_entries: &[CorpusEntry],
    points: usize,
    rng: &mut R,
) -> Result<Vec<CrossCheck<B::Scalar>>> {
    let Some(first) = entries.first() else { return Ok(Vec::new()) };
    let pair = DualPair::new(&RootSystem::build(first.label))?;
    let g = pair.group();
    let dual = pair.dual();
    let chart = first.chart()?;
    let dual_chart = Chart::for_label(first.label.dual())
        .ok_or_else(|| Error::InvalidLabel(first.label.dual().to_string(), "no coordinate chart".into()))?;
    let key = |w: &WeylGroup, e: &CorpusEntry| -> Result<(ElementId, ElementId)> {
        Ok((w.from_word(&e.omega)?, w.from_word(&e.sigma)?))
    };
    let t0 = g.longest();
    let mut out = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        let (om, sg) = key(g, e)?;
        let target = (pair.to_dual(g.mul(g.inverse(sg), t0)), pair.to_dual(g.mul(g.inverse(om), t0)));
        for (j, d) in dual_entries.iter().enumerate() {
            if d.label != first.label.dual() || key(dual, d)? != target {
                continue;
            }
            for point in 0..points {
                let check = retry_singular(rng, |rng| {
                    let dual_values = dual_chart.sample(backend, rng);
                    let values = chart.pull_from_dual(backend, &dual_chart, &dual_values)?;
                    let mut lhs = e.expected.eval(backend, &chart, &values)?;
                    if pair.sign_is_negative() {
                        lhs = backend.neg(&lhs);
                    }
                    let rhs = d.expected.eval(backend, &dual_chart, &dual_values)?;
                    let pass = backend.agree(&lhs, &rhs, COMPLEX_REL_TOL, 0.0);
                    Ok(CrossCheck { entry: i, dual_entry: j, point, lhs, rhs, pass })
                })?;
                out.push(check);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::ExactBackend;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_builtin() {
        let entries = builtin_entries().unwrap();
        assert_eq!(entries.len(), 4 + 16 + 16 + 1);
        assert_eq!(entries.iter().filter(|e| e.is_zero()).count(), 1 + 7 + 7);
        let sum = entries.last().unwrap();
        match &sum.expected {
            Expected::Sum(terms) => assert_eq!(terms.len(), 3),
            Expected::Zero => panic!("sum parsed as zero"),
        }
        assert_eq!(sum.omega, vec![1, 0, 1, 0]);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_corpus("A1 1 1 (z1|h", "t").is_err());
        assert!(parse_corpus("A1 1 1 z1|h", "t").is_err());
        assert!(parse_corpus("X1 1 1 0", "t").is_err());
        assert!(parse_corpus("G2 1 1 0", "t").is_err());
        assert!(parse_corpus("A1 1", "t").is_err());
        let e = parse_corpus("A1 1 1 -(z1/z2|h) + (h|h)", "t").unwrap();
        match &e[0].expected {
            Expected::Sum(t) => {
                assert!(t[0].negative);
                assert!(!t[1].negative);
            }
            Expected::Zero => panic!(),
        }
    }

    #[test]
    fn rank_two_tables_and_cross_check() {
        let b = ExactBackend::new(4).unwrap();
        let entries = builtin_entries().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for label in ["B2", "C2"] {
            let w = WeylGroup::new(&RootSystem::from_label_str(label).unwrap()).unwrap();
            for e in entries.iter().filter(|e| e.label.to_string() == label) {
                for c in check_entry(&b, &w, e, 2, &mut rng).unwrap() {
                    assert!(c.pass, "{}", e.source);
                }
            }
        }
        let so5: Vec<_> = entries.iter().filter(|e| e.label.to_string() == "B2").cloned().collect();
        let sp2: Vec<_> = entries.iter().filter(|e| e.label.to_string() == "C2").cloned().collect();
        let checks = cross_check(&b, &so5, &sp2, 1, &mut rng).unwrap();
        // 16 table pairs plus the worked sum
        assert_eq!(checks.len(), 17);
        assert!(checks.iter().all(|c| c.pass));
    }

    #[test]
    fn sl2_entries_match() {
        let b = ExactBackend::new(6).unwrap();
        let w = WeylGroup::new(&RootSystem::from_label_str("A1").unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for e in parse_corpus(BUILTIN[0].1, "sl2.txt").unwrap() {
            for c in check_entry(&b, &w, &e, 3, &mut rng).unwrap() {
                assert!(c.pass, "{}", e.source);
            }
        }
    }
}
