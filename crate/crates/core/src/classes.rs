//! Local elliptic classes `𝓔_σ(X_ω)` at a point, computed by the
//! Bott–Samelson recursion (right multiplication, a dynamic program over a
//! chain of `ν`-transformed points) and by the R-matrix recursion (left
//! multiplication, memoized on accumulated `ζ`-twists).
//!
//! `𝓔_σ(X_ω) = c(G, ω) · E_σ(X_ω)` with
//! `c(G, ω) = ∏_{β ∈ Φ₊^v, ω(β) ∈ Φ₊^v} δ(h^{-β}, h)`.

use std::collections::HashMap;

use crate::elliptic::{
    delta_of, eval_monomial, twist_point, Backend, EvalPoint, Monomial, Sector,
};
use crate::error::{Error, Result};
use crate::rootsys::LatticeVector;
use crate::weyl::{ElementId, WeylGroup};

/// Relative threshold below which a complex table entry counts as zero.
pub const COMPLEX_ZERO_REL: f64 = 1e-10;

/// Relative agreement required between complex values.
pub const COMPLEX_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `𝓔 = c(G, ω) · E`
    Normalized,
    /// `E`
    Unnormalized,
    /// `Em = 𝓔 / c(G, id)`
    Em,
}

/// Values of a class at one point, indexed by the fixed point `σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTable<S> {
    pub omega: ElementId,
    pub word: Vec<usize>,
    pub normalization: Normalization,
    pub values: Vec<S>,
}

impl<S> ClassTable<S> {
    pub fn value(&self, sigma: ElementId) -> &S {
        &self.values[sigma.index()]
    }
}

/// Largest magnitude in a table.
pub fn table_scale<B: Backend>(backend: &B, values: &[B::Scalar]) -> f64 {
    values.iter().map(|v| backend.magnitude(v)).fold(0.0, f64::max)
}

/// Zero test used for vanishing patterns: exact zero in the series backend,
/// `|v| < 1e-10 · scale` in the complex backend.
pub fn is_table_zero<B: Backend>(backend: &B, v: &B::Scalar, scale: f64) -> bool {
    if backend.is_zero(v) {
        return true;
    }
    backend.name() == "complex" && backend.magnitude(v) < COMPLEX_ZERO_REL * scale
}

fn simple_unit(rank: usize, s: usize) -> Vec<i64> {
    let mut v = vec![0; rank];
    v[s] = 1;
    v
}

/// `σ(ζ_s) = e^{-σ(α_s)}`.
pub fn sigma_zeta(weyl: &WeylGroup, sigma: ElementId, s: usize) -> Monomial {
    let r = weyl.rank();
    Monomial::exp_neg_root(r, &weyl.element(sigma).apply_root(&simple_unit(r, s)))
}

/// `ω(ν_s) = h^{ω(α_s^v)}`.
pub fn omega_nu(weyl: &WeylGroup, omega: ElementId, s: usize) -> Monomial {
    let r = weyl.rank();
    Monomial::h_pow_coroot(r, &weyl.element(omega).apply_coroot(&simple_unit(r, s)))
}

/// `∏_{β ∈ Φ₊^v} δ(h^{-β}, h)`, the value of `𝓔_id(X_id)`.
pub fn full_delta_product<B: Backend>(backend: &B, weyl: &WeylGroup, p: &EvalPoint<B::Value>) -> Result<B::Scalar> {
    let r = weyl.rank();
    let h = Monomial::h(r);
    let mut acc = backend.one();
    for beta in weyl.root_system().positive_coroots() {
        let d = delta_of(backend, p, &Monomial::h_pow_coroot(r, beta).inv(), &h)?;
        acc = backend.mul(&acc, &d);
    }
    Ok(acc)
}

/// `𝓔_τ(X_id)`: the full δ-product at `τ = id`, zero elsewhere.
pub fn initial_table<B: Backend>(backend: &B, weyl: &WeylGroup, p: &EvalPoint<B::Value>) -> Result<ClassTable<B::Scalar>> {
    let mut values = vec![backend.zero(); weyl.order()];
    values[weyl.identity().index()] = full_delta_product(backend, weyl, p)?;
    Ok(ClassTable { omega: weyl.identity(), word: Vec::new(), normalization: Normalization::Normalized, values })
}

/// One Bott–Samelson step `X_ω → X_{ωs}`:
///
/// `𝓔_σ(X_{ωs}) = δ(σ(ζ_s), ν_s)/δ(ν_s, h) · s^ν 𝓔_σ(X_ω) + δ(σ(ζ_s), h)/δ(ν_s, h) · s^ν 𝓔_{σs}(X_ω)`.
///
/// `prev` must already be evaluated at the `ν`-sector `s`-transform of `outer`;
/// all coefficients are taken at `outer`.
pub fn bs_step<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    prev: &ClassTable<B::Scalar>,
    s: usize,
    outer: &EvalPoint<B::Value>,
) -> Result<ClassTable<B::Scalar>> {
    bs_step_with(backend, weyl, prev, s, outer, Normalization::Normalized)
}

fn bs_step_with<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    prev: &ClassTable<B::Scalar>,
    s: usize,
    outer: &EvalPoint<B::Value>,
    normalization: Normalization,
) -> Result<ClassTable<B::Scalar>> {
    if s >= weyl.rank() {
        return Err(Error::IndexOutOfRange { index: s, rank: weyl.rank() });
    }
    let nu_s = outer.nu(s).clone();
    let h = outer.h().clone();
    let omega_s = weyl.mul_simple_right(prev.omega, s);

    // the normalized recursion is uniform; E needs the length case split
    let divisor = match normalization {
        Normalization::Normalized | Normalization::Em => backend.delta(&nu_s, &h)?,
        Normalization::Unnormalized => {
            if weyl.length(omega_s) > weyl.length(prev.omega) {
                backend.one()
            } else {
                let nu_inv = backend.value_inv(&nu_s)?;
                backend.mul(&backend.delta(&nu_s, &h)?, &backend.delta(&nu_inv, &h)?)
            }
        }
    };
    let mut values = Vec::with_capacity(weyl.order());
    for sigma in weyl.elements() {
        let a = prev.value(sigma);
        let b = prev.value(weyl.mul_simple_right(sigma, s));
        if backend.is_zero(a) && backend.is_zero(b) {
            values.push(backend.zero());
            continue;
        }
        let sz = eval_monomial(backend, outer, &sigma_zeta(weyl, sigma, s))?;
        let mut acc = backend.zero();
        if !backend.is_zero(a) {
            acc = backend.mul(&backend.delta(&sz, &nu_s)?, a);
        }
        if !backend.is_zero(b) {
            acc = backend.add(&acc, &backend.mul(&backend.delta(&sz, &h)?, b));
        }
        values.push(backend.div(&acc, &divisor)?);
    }
    let mut word = prev.word.clone();
    word.push(s);
    Ok(ClassTable { omega: omega_s, word, normalization, values })
}

/// The chain `P_k = p`, `P_{j-1} = s_{i_j}^ν P_j` used by the Bott–Samelson
/// dynamic program. Index `j` holds `P_j`.
fn nu_chain<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    word: &[usize],
    p: &EvalPoint<B::Value>,
) -> Result<Vec<EvalPoint<B::Value>>> {
    let mut chain = vec![p.clone()];
    for &s in word.iter().rev() {
        if s >= weyl.rank() {
            return Err(Error::IndexOutOfRange { index: s, rank: weyl.rank() });
        }
        let prev = chain.last().unwrap();
        chain.push(twist_point(backend, prev, weyl, weyl.simple(s), Sector::Nu)?);
    }
    chain.reverse();
    Ok(chain)
}

fn bs_fold<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    word: &[usize],
    p: &EvalPoint<B::Value>,
    normalization: Normalization,
) -> Result<ClassTable<B::Scalar>> {
    let chain = nu_chain(backend, weyl, word, p)?;
    let mut table = match normalization {
        Normalization::Unnormalized => {
            let mut values = vec![backend.zero(); weyl.order()];
            values[weyl.identity().index()] = backend.one();
            ClassTable { omega: weyl.identity(), word: Vec::new(), normalization, values }
        }
        _ => initial_table(backend, weyl, &chain[0])?,
    };
    for (j, &s) in word.iter().enumerate() {
        table = bs_step_with(backend, weyl, &table, s, &chain[j + 1], normalization)?;
    }
    Ok(table)
}

/// `𝓔_σ(X_ω)` for all `σ`, where `ω` is the product of `word` (any word,
/// reduced or not), by the Bott–Samelson recursion.
pub fn bs_table<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    word: &[usize],
    p: &EvalPoint<B::Value>,
) -> Result<ClassTable<B::Scalar>> {
    bs_fold(backend, weyl, word, p, Normalization::Normalized)
}

/// Unnormalized `E_σ(X_ω)` via the length-split Bott–Samelson recursion,
/// starting from `E_id(X_id) = 1`.
pub fn unnormalized_table<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    word: &[usize],
    p: &EvalPoint<B::Value>,
) -> Result<ClassTable<B::Scalar>> {
    bs_fold(backend, weyl, word, p, Normalization::Unnormalized)
}

/// `Em_σ(X_ω) = 𝓔_σ(X_ω) / c(G, id)`.
pub fn em_table<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    word: &[usize],
    p: &EvalPoint<B::Value>,
) -> Result<ClassTable<B::Scalar>> {
    let mut t = bs_table(backend, weyl, word, p)?;
    let full = full_delta_product(backend, weyl, p)?;
    for v in &mut t.values {
        *v = backend.div(v, &full)?;
    }
    t.normalization = Normalization::Em;
    Ok(t)
}

/// R-matrix recursion, building `ω = s_{i_1} ⋯ s_{i_k}` by left
/// multiplication from the right end of the word:
///
/// `𝓔_σ(X_{sω}) = δ(ζ_s, ω⁻¹(ν_s))/δ(ω⁻¹(ν_s⁻¹), h) · 𝓔_σ(X_ω)
///              + δ(ζ_s⁻¹, h)/δ(ω⁻¹(ν_s⁻¹), h) · s^ζ 𝓔_{sσ}(X_ω)`.
///
/// Entries are memoized on `(level, σ, g)` where the point is `T_g^ζ p`.
struct RMatrix<'a, B: Backend> {
    backend: &'a B,
    weyl: &'a WeylGroup,
    word: &'a [usize],
    point: &'a EvalPoint<B::Value>,
}

impl<'a, B: Backend> RMatrix<'a, B> {
    /// `targets` are `σ` at the top level (twist = id).
    fn run(&self, targets: &[ElementId]) -> Result<HashMap<ElementId, B::Scalar>> {
        let weyl = self.weyl;
        let k = self.word.len();
        let id = weyl.identity();

        // needed[j] = keys (σ, g) at level j (class of ω_j = s_{i_j}⋯s_{i_k}, 0-based j)
        let mut needed: Vec<Vec<(ElementId, ElementId)>> = vec![Vec::new(); k + 1];
        needed[0] = targets.iter().map(|&t| (t, id)).collect();
        for j in 0..k {
            let s = self.word[j];
            let mut next: Vec<(ElementId, ElementId)> = Vec::new();
            let mut seen = std::collections::HashSet::new();
            for &(sigma, g) in &needed[j] {
                for key in [(sigma, g), (weyl.mul_simple_left(s, sigma), weyl.mul_simple_right(g, s))] {
                    if seen.insert(key) {
                        next.push(key);
                    }
                }
            }
            needed[j + 1] = next;
        }

        // suffix products ω_j, with ω_k = id
        let mut suffix = vec![id; k + 1];
        for j in (0..k).rev() {
            suffix[j] = weyl.mul_simple_left(self.word[j], suffix[j + 1]);
        }

        let r = weyl.rank();
        let h_val = self.point.h().clone();
        let full = full_delta_product(self.backend, weyl, self.point)?;
        let mut level: HashMap<(ElementId, ElementId), B::Scalar> = needed[k]
            .iter()
            .map(|&(sigma, g)| {
                let v = if sigma == id { full.clone() } else { self.backend.zero() };
                ((sigma, g), v)
            })
            .collect();

        for j in (0..k).rev() {
            let s = self.word[j];
            let inner = suffix[j + 1];
            let inner_inv = weyl.inverse(inner);
            // ω⁻¹(ν_s) and ω⁻¹(ν_s⁻¹) only see ν, so they are twist independent
            let om_nu = eval_monomial(self.backend, self.point, &omega_nu(weyl, inner_inv, s))?;
            let om_nu_inv = self.backend.value_inv(&om_nu)?;
            let divisor = self.backend.delta(&om_nu_inv, &h_val)?;

            let mut out = HashMap::with_capacity(needed[j].len());
            for &(sigma, g) in &needed[j] {
                let a = &level[&(sigma, g)];
                let b = &level[&(weyl.mul_simple_left(s, sigma), weyl.mul_simple_right(g, s))];
                if self.backend.is_zero(a) && self.backend.is_zero(b) {
                    out.insert((sigma, g), self.backend.zero());
                    continue;
                }
                // ζ_s at T_g p is e^{-g(α_s)} at p
                let zeta_s = eval_monomial(
                    self.backend,
                    self.point,
                    &Monomial::exp_neg_root(r, &weyl.element(g).apply_root(&simple_unit(r, s))),
                )?;
                let mut acc = self.backend.zero();
                if !self.backend.is_zero(a) {
                    acc = self.backend.mul(&self.backend.delta(&zeta_s, &om_nu)?, a);
                }
                if !self.backend.is_zero(b) {
                    let zeta_s_inv = self.backend.value_inv(&zeta_s)?;
                    let term = self.backend.mul(&self.backend.delta(&zeta_s_inv, &h_val)?, b);
                    acc = self.backend.add(&acc, &term);
                }
                out.insert((sigma, g), self.backend.div(&acc, &divisor)?);
            }
            level = out;
        }
        Ok(targets.iter().map(|&t| (t, level[&(t, id)].clone())).collect())
    }
}

/// `𝓔_σ(X_ω)` by the R-matrix recursion, `ω` the product of `word`.
pub fn rmatrix_eval<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    word: &[usize],
    sigma: ElementId,
    p: &EvalPoint<B::Value>,
) -> Result<B::Scalar> {
    weyl.from_word(word)?;
    let rm = RMatrix { backend, weyl, word, point: p };
    Ok(rm.run(&[sigma])?.remove(&sigma).unwrap())
}

/// Full table by the R-matrix recursion, sharing the memo across all `σ`.
pub fn rmatrix_table<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    word: &[usize],
    p: &EvalPoint<B::Value>,
) -> Result<ClassTable<B::Scalar>> {
    let omega = weyl.from_word(word)?;
    let targets: Vec<ElementId> = weyl.elements().collect();
    let rm = RMatrix { backend, weyl, word, point: p };
    let mut map = rm.run(&targets)?;
    let values = targets.iter().map(|t| map.remove(t).unwrap()).collect();
    Ok(ClassTable { omega, word: word.to_vec(), normalization: Normalization::Normalized, values })
}

/// Tangent weights `𝒯(G, ω) = Φ₊ ∩ ωΦ₋` (root lattice) and the index set
/// `ℱ(G, ω) = Φ₊^v ∩ ω⁻¹(Φ₊^v)` (coroot lattice) of the normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TangentSets {
    pub tangent: Vec<LatticeVector>,
    pub fixed: Vec<LatticeVector>,
}

pub fn tangent_sets(weyl: &WeylGroup, omega: ElementId) -> TangentSets {
    let rs = weyl.root_system();
    let inv = weyl.element(weyl.inverse(omega));
    let e = weyl.element(omega);
    let tangent = rs
        .positive_roots()
        .iter()
        .filter(|a| LatticeVector::root(inv.apply_root(a)).is_negative())
        .map(|a| LatticeVector::root(a.clone()))
        .collect();
    let fixed = rs
        .positive_coroots()
        .iter()
        .filter(|b| LatticeVector::coroot(e.apply_coroot(b)).is_positive())
        .map(|b| LatticeVector::coroot(b.clone()))
        .collect();
    TangentSets { tangent, fixed }
}

/// `c(G, ω) = ∏_{β ∈ ℱ(G, ω)} δ(h^{-β}, h)`.
pub fn normalization_factor<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    omega: ElementId,
    p: &EvalPoint<B::Value>,
) -> Result<B::Scalar> {
    let r = weyl.rank();
    let h = Monomial::h(r);
    let mut acc = backend.one();
    for beta in tangent_sets(weyl, omega).fixed {
        let d = delta_of(backend, p, &Monomial::h_pow_coroot(r, beta.coords()).inv(), &h)?;
        acc = backend.mul(&acc, &d);
    }
    Ok(acc)
}

/// Same factor indexed by reflections: the product over positive roots `α`
/// with `ω(α) > 0` of `δ(h^{-α^v}, h)`.
pub fn normalization_factor_by_reflections<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    omega: ElementId,
    p: &EvalPoint<B::Value>,
) -> Result<B::Scalar> {
    let r = weyl.rank();
    let rs = weyl.root_system();
    let h = Monomial::h(r);
    let e = weyl.element(omega);
    let mut acc = backend.one();
    for (alpha, coroot) in rs.positive_roots().iter().zip(rs.positive_coroots()) {
        if LatticeVector::root(e.apply_root(alpha)).is_positive() {
            let d = delta_of(backend, p, &Monomial::h_pow_coroot(r, coroot).inv(), &h)?;
            acc = backend.mul(&acc, &d);
        }
    }
    Ok(acc)
}

/// Residual of the right-multiplication recursion for `c`:
/// `c(G, ωs) = s^ν c(G, ω) / δ(ν_s, h)` if `ℓ(ωs) > ℓ(ω)`,
/// `c(G, ωs) = δ(ν_s^{-1}, h) · s^ν c(G, ω)` otherwise.
pub fn normalization_right_residual<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    omega: ElementId,
    s: usize,
    p: &EvalPoint<B::Value>,
) -> Result<B::Scalar> {
    let omega_s = weyl.mul_simple_right(omega, s);
    let lhs = normalization_factor(backend, weyl, omega_s, p)?;
    let twisted = twist_point(backend, p, weyl, weyl.simple(s), Sector::Nu)?;
    let c_twisted = normalization_factor(backend, weyl, omega, &twisted)?;
    let nu = p.nu(s);
    let rhs = if weyl.length(omega_s) > weyl.length(omega) {
        backend.div(&c_twisted, &backend.delta(nu, p.h())?)?
    } else {
        backend.mul(&backend.delta(&backend.value_inv(nu)?, p.h())?, &c_twisted)
    };
    Ok(backend.sub(&lhs, &rhs))
}

/// Residual of the left-multiplication recursion for `c`:
/// `c(G, sω) = c(G, ω) / δ(ω⁻¹(ν_s⁻¹), h)` if `ℓ(sω) > ℓ(ω)`,
/// `c(G, sω) = δ(ω⁻¹(ν_s), h) · c(G, ω)` otherwise.
pub fn normalization_left_residual<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    omega: ElementId,
    s: usize,
    p: &EvalPoint<B::Value>,
) -> Result<B::Scalar> {
    let s_omega = weyl.mul_simple_left(s, omega);
    let lhs = normalization_factor(backend, weyl, s_omega, p)?;
    let c = normalization_factor(backend, weyl, omega, p)?;
    let om_nu = eval_monomial(backend, p, &omega_nu(weyl, weyl.inverse(omega), s))?;
    let rhs = if weyl.length(s_omega) > weyl.length(omega) {
        backend.div(&c, &backend.delta(&backend.value_inv(&om_nu)?, p.h())?)?
    } else {
        backend.mul(&backend.delta(&om_nu, p.h())?, &c)
    };
    Ok(backend.sub(&lhs, &rhs))
}

/// Closed form of the diagonal `E_σ(X_σ) = ∏_{α ∈ Φ₊ ∩ σΦ₋} δ(e^{α}, h)`.
pub fn unnormalized_diagonal<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    sigma: ElementId,
    p: &EvalPoint<B::Value>,
) -> Result<B::Scalar> {
    let r = weyl.rank();
    let h = Monomial::h(r);
    let mut acc = backend.one();
    for alpha in tangent_sets(weyl, sigma).tangent {
        let d = delta_of(backend, p, &Monomial::exp_root(r, alpha.coords()), &h)?;
        acc = backend.mul(&acc, &d);
    }
    Ok(acc)
}

/// `σ` whose entry is nonzero although `σ ≰ ω`, or zero although `σ ≤ ω`.
pub fn vanishing_mismatches<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    table: &ClassTable<B::Scalar>,
) -> Vec<ElementId> {
    let scale = table_scale(backend, &table.values);
    weyl.elements()
        .filter(|&sigma| {
            let zero = is_table_zero(backend, table.value(sigma), scale);
            zero == weyl.bruhat_leq(sigma, table.omega)
        })
        .collect()
}
