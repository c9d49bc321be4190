//! Exchange of equivariant and dynamical variables between `G` and its
//! Langlands dual, and the resulting identities between local classes.
//!
//! The substitution `#` for `G` expresses every `G`-variable as a monomial in
//! `G^v`-variables: `ζ_s ↦ ν̄_{s*}⁻¹`, `ν_s ↦ ζ̄_s⁻¹`, `h ↦ h⁻¹`, where
//! `s* = τ0 s τ0`. Points are always sampled on the `G^v` side and pulled back.

use crate::classes::{bs_table, normalization_factor, unnormalized_table};
use crate::elliptic::{eval_monomial, Backend, EvalPoint, Monomial, Var};
use crate::error::{Error, Result};
use crate::rootsys::RootSystem;
use crate::weyl::{ElementId, WeylGroup};

/// A monomial change of variables: `images[slot]` is the image of source
/// variable `slot`, written in the target variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualitySubstitution {
    rank: usize,
    images: Vec<Monomial>,
}

impl DualitySubstitution {
    /// Per-variable form `ζ_s ↦ ν̄_{s*}⁻¹`, `ν_s ↦ ζ̄_s⁻¹`, `h ↦ h⁻¹`.
    pub fn for_group(weyl: &WeylGroup) -> Result<Self> {
        let r = weyl.rank();
        let mut images = Vec::with_capacity(2 * r + 1);
        for s in 0..r {
            images.push(Monomial::var(r, Var::Nu(weyl.conjugate_by_longest(s)?)).inv());
        }
        for s in 0..r {
            images.push(Monomial::var(r, Var::Zeta(s)).inv());
        }
        images.push(Monomial::h(r).inv());
        Ok(DualitySubstitution { rank: r, images })
    }

    /// The same map written as `ζ_s ↦ τ0(ν̄_s)`, with `τ0` acting on the
    /// coroot lattice of the dual group.
    pub fn for_group_via_longest(dual: &WeylGroup) -> Self {
        let r = dual.rank();
        let t0 = dual.element(dual.longest());
        let mut images = Vec::with_capacity(2 * r + 1);
        for s in 0..r {
            let mut unit = vec![0; r];
            unit[s] = 1;
            images.push(Monomial::h_pow_coroot(r, &t0.apply_coroot(&unit)));
        }
        for s in 0..r {
            images.push(Monomial::var(r, Var::Zeta(s)).inv());
        }
        images.push(Monomial::h(r).inv());
        DualitySubstitution { rank: r, images }
    }

    /// `(ζ_s, ν_s) ↦ (ζ_{s*}, ν_{s*})`.
    pub fn relabeling(weyl: &WeylGroup) -> Result<Self> {
        let r = weyl.rank();
        let mut images = Vec::with_capacity(2 * r + 1);
        for s in 0..r {
            images.push(Monomial::var(r, Var::Zeta(weyl.conjugate_by_longest(s)?)));
        }
        for s in 0..r {
            images.push(Monomial::var(r, Var::Nu(weyl.conjugate_by_longest(s)?)));
        }
        images.push(Monomial::h(r));
        Ok(DualitySubstitution { rank: r, images })
    }

    pub fn identity(rank: usize) -> Self {
        let images = (0..2 * rank + 1).map(|slot| Monomial::var(rank, Var::from_slot(slot, rank))).collect();
        DualitySubstitution { rank, images }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn image(&self, v: Var) -> &Monomial {
        &self.images[v.slot(self.rank)]
    }

    /// Image of a source monomial.
    pub fn apply(&self, m: &Monomial) -> Monomial {
        m.exponents()
            .iter()
            .zip(&self.images)
            .filter(|(e, _)| **e != 0)
            .fold(Monomial::one(self.rank), |acc, (&e, img)| acc.mul(&img.pow(e)))
    }

    /// Substitution performing `self` first, then `next` on the result.
    pub fn then(&self, next: &DualitySubstitution) -> DualitySubstitution {
        DualitySubstitution { rank: self.rank, images: self.images.iter().map(|m| next.apply(m)).collect() }
    }

    /// The source point obtained by evaluating every image at a target point.
    pub fn pull_point<B: Backend>(&self, backend: &B, p: &EvalPoint<B::Value>) -> Result<EvalPoint<B::Value>> {
        if p.rank() != self.rank {
            return Err(Error::Internal(format!("point of rank {} for a rank {} substitution", p.rank(), self.rank)));
        }
        let values = self.images.iter().map(|m| eval_monomial(backend, p, m)).collect::<Result<Vec<_>>>()?;
        EvalPoint::new(self.rank, values)
    }
}

/// `𝔦`: inverts every dynamical variable.
pub fn invert_variables<B: Backend>(backend: &B, p: &EvalPoint<B::Value>) -> Result<EvalPoint<B::Value>> {
    let mut out = p.clone();
    for s in 0..p.rank() {
        out.set(Var::Nu(s), backend.value_inv(p.nu(s))?);
    }
    Ok(out)
}

/// Point of the dual group under `ζ̄_s = ν_s⁻¹`, `ν̄_s = ζ_s⁻¹`, `h̄ = h`.
pub fn bar_point<B: Backend>(backend: &B, p: &EvalPoint<B::Value>) -> Result<EvalPoint<B::Value>> {
    let mut out = p.clone();
    for s in 0..p.rank() {
        out.set(Var::Zeta(s), backend.value_inv(p.nu(s))?);
        out.set(Var::Nu(s), backend.value_inv(p.zeta(s))?);
    }
    Ok(out)
}

/// A group together with its Langlands dual. Weyl group elements are
/// identified across the pair through reduced words.
pub struct DualPair {
    group: WeylGroup,
    dual: WeylGroup,
    to_dual: Vec<ElementId>,
    from_dual: Vec<ElementId>,
    forward: DualitySubstitution,
    backward: DualitySubstitution,
}

impl DualPair {
    pub fn new(rs: &RootSystem) -> Result<Self> {
        let group = WeylGroup::new(rs)?;
        let dual = WeylGroup::new(&rs.langlands_dual())?;
        let to_dual = group
            .elements()
            .map(|w| dual.from_word(&group.reduced_word(w)))
            .collect::<Result<Vec<_>>>()?;
        let mut from_dual = vec![group.identity(); dual.order()];
        for w in group.elements() {
            from_dual[to_dual[w.index()].index()] = w;
        }
        let forward = DualitySubstitution::for_group(&group)?;
        let backward = DualitySubstitution::for_group(&dual)?;
        Ok(DualPair { group, dual, to_dual, from_dual, forward, backward })
    }

    pub fn from_label_str(label: &str) -> Result<Self> {
        Self::new(&RootSystem::from_label_str(label)?)
    }

    pub fn group(&self) -> &WeylGroup {
        &self.group
    }

    pub fn dual(&self) -> &WeylGroup {
        &self.dual
    }

    pub fn to_dual(&self, w: ElementId) -> ElementId {
        self.to_dual[w.index()]
    }

    pub fn from_dual(&self, w: ElementId) -> ElementId {
        self.from_dual[w.index()]
    }

    /// `#` for `G`: `G`-variables in terms of `G^v`-variables.
    pub fn substitution(&self) -> &DualitySubstitution {
        &self.forward
    }

    /// `#` for `G^v`: `G^v`-variables in terms of `G`-variables.
    pub fn reverse_substitution(&self) -> &DualitySubstitution {
        &self.backward
    }

    /// `(-1)^{ℓ(τ0)}`.
    pub fn sign_is_negative(&self) -> bool {
        self.group.length(self.group.longest()) % 2 == 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityRecord<S> {
    /// Schubert variety index, in `W(G^v)`.
    pub omega: ElementId,
    /// Fixed point, in `W(G^v)`.
    pub sigma: ElementId,
    pub lhs: S,
    pub rhs: S,
    pub residual: S,
}

fn signed<B: Backend>(backend: &B, v: B::Scalar, negative: bool) -> B::Scalar {
    if negative {
        backend.neg(&v)
    } else {
        v
    }
}

/// `±𝓔_{τ0ω⁻¹}(X_{τ0σ⁻¹})(# p̄) − 𝓔_σ(X^v_ω)(p̄)` with `ω, σ ∈ W(G^v)`.
/// `flip_sign` reverses the sign `(-1)^{ℓ(τ0)}` (negative control).
pub fn verify_duality<B: Backend>(
    backend: &B,
    pair: &DualPair,
    omega: ElementId,
    sigma: ElementId,
    p_dual: &EvalPoint<B::Value>,
    flip_sign: bool,
) -> Result<DualityRecord<B::Scalar>> {
    let g = pair.group();
    let dual = pair.dual();
    let rhs = bs_table(backend, dual, &dual.reduced_word(omega), p_dual)?.value(sigma).clone();
    let p = pair.substitution().pull_point(backend, p_dual)?;
    let t0 = g.longest();
    let variety = g.mul(t0, g.inverse(pair.from_dual(sigma)));
    let point = g.mul(t0, g.inverse(pair.from_dual(omega)));
    let raw = bs_table(backend, g, &g.reduced_word(variety), &p)?.value(point).clone();
    let lhs = signed(backend, raw, pair.sign_is_negative() != flip_sign);
    let residual = backend.sub(&lhs, &rhs);
    Ok(DualityRecord { omega, sigma, lhs, rhs, residual })
}

/// Every `(ω, σ) ∈ W(G^v)²` at one dual point, computing each table once.
pub fn duality_campaign<B: Backend>(
    backend: &B,
    pair: &DualPair,
    p_dual: &EvalPoint<B::Value>,
    flip_sign: bool,
) -> Result<Vec<DualityRecord<B::Scalar>>> {
    let g = pair.group();
    let dual = pair.dual();
    let p = pair.substitution().pull_point(backend, p_dual)?;
    let dual_tables = dual
        .elements()
        .map(|w| bs_table(backend, dual, &dual.reduced_word(w), p_dual))
        .collect::<Result<Vec<_>>>()?;
    let tables = g
        .elements()
        .map(|w| bs_table(backend, g, &g.reduced_word(w), &p))
        .collect::<Result<Vec<_>>>()?;
    let t0 = g.longest();
    let negative = pair.sign_is_negative() != flip_sign;
    let mut out = Vec::with_capacity(dual.order() * dual.order());
    for omega in dual.elements() {
        for sigma in dual.elements() {
            let rhs = dual_tables[omega.index()].value(sigma).clone();
            let variety = g.mul(t0, g.inverse(pair.from_dual(sigma)));
            let point = g.mul(t0, g.inverse(pair.from_dual(omega)));
            let lhs = signed(backend, tables[variety.index()].value(point).clone(), negative);
            let residual = backend.sub(&lhs, &rhs);
            out.push(DualityRecord { omega, sigma, lhs, rhs, residual });
        }
    }
    Ok(out)
}

/// `𝓔_σ(X_ω)(p) − 𝓔_{τ0στ0}(X_{τ0ωτ0})(p')` where `p'` is `p` pulled
/// through `#_G` and then `#_{G^v}`.
pub fn double_dual_check<B: Backend>(
    backend: &B,
    pair: &DualPair,
    omega: ElementId,
    sigma: ElementId,
    p: &EvalPoint<B::Value>,
) -> Result<B::Scalar> {
    let g = pair.group();
    let t0 = g.longest();
    let conj = |w: ElementId| g.mul(g.mul(t0, w), t0);
    let p2 = double_dual_point(backend, pair, p)?;
    let a = bs_table(backend, g, &g.reduced_word(omega), p)?.value(sigma).clone();
    let b = bs_table(backend, g, &g.reduced_word(conj(omega)), &p2)?.value(conj(sigma)).clone();
    Ok(backend.sub(&a, &b))
}

/// `p` pulled back through `#_G` and then `#_{G^v}`.
pub fn double_dual_point<B: Backend>(backend: &B, pair: &DualPair, p: &EvalPoint<B::Value>) -> Result<EvalPoint<B::Value>> {
    let p_dual = pair.reverse_substitution().pull_point(backend, p)?;
    pair.substitution().pull_point(backend, &p_dual)
}

/// Residuals of the double-dual constraint for all `(ω, σ)`, row-major in `ω`.
pub fn double_dual_campaign<B: Backend>(
    backend: &B,
    pair: &DualPair,
    p: &EvalPoint<B::Value>,
) -> Result<Vec<(ElementId, ElementId, B::Scalar)>> {
    let g = pair.group();
    let t0 = g.longest();
    let p2 = double_dual_point(backend, pair, p)?;
    let here = g.elements().map(|w| bs_table(backend, g, &g.reduced_word(w), p)).collect::<Result<Vec<_>>>()?;
    let there = g.elements().map(|w| bs_table(backend, g, &g.reduced_word(w), &p2)).collect::<Result<Vec<_>>>()?;
    let conj = |w: ElementId| g.mul(g.mul(t0, w), t0);
    let mut out = Vec::new();
    for omega in g.elements() {
        for sigma in g.elements() {
            let r = backend.sub(here[omega.index()].value(sigma), there[conj(omega).index()].value(conj(sigma)));
            out.push((omega, sigma, r));
        }
    }
    Ok(out)
}

/// `c(G, ω)(p) − E^v_{ω⁻¹τ0}(X^v_{ω⁻¹τ0})` evaluated at the dual point
/// obtained from `p` by `𝔦` and the bar identification.
pub fn normalization_dual_residual<B: Backend>(
    backend: &B,
    pair: &DualPair,
    omega: ElementId,
    p: &EvalPoint<B::Value>,
) -> Result<B::Scalar> {
    let g = pair.group();
    let dual = pair.dual();
    let c = normalization_factor(backend, g, omega, p)?;
    let target = pair.to_dual(g.mul(g.inverse(omega), g.longest()));
    let q = bar_point(backend, &invert_variables(backend, p)?)?;
    let e = unnormalized_table(backend, dual, &dual.reduced_word(target), &q)?;
    Ok(backend.sub(&c, e.value(target)))
}
