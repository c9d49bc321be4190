//! Verification campaigns over all Weyl group pairs at seeded random points,
//! reported as flat records suitable for JSON lines.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value as Json;

use crate::classes::{
    bs_table, normalization_factor, normalization_left_residual, normalization_right_residual, rmatrix_table,
    table_scale, unnormalized_table, ClassTable, COMPLEX_REL_TOL, COMPLEX_ZERO_REL,
};
use crate::duality::{double_dual_campaign, duality_campaign, normalization_dual_residual, DualPair};
use crate::elliptic::{retry_singular, sample_point, Backend, EvalPoint, QContext};
use crate::error::Result;
use crate::rootsys::RootSystem;
use crate::weyl::WeylGroup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CampaignKind {
    Duality,
    Recursions,
    Normalization,
    DoubleDual,
}

impl CampaignKind {
    pub fn name(self) -> &'static str {
        match self {
            CampaignKind::Duality => "duality",
            CampaignKind::Recursions => "recursions",
            CampaignKind::Normalization => "normalization",
            CampaignKind::DoubleDual => "double-dual",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRecord {
    #[serde(rename = "type")]
    pub type_label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_type: Option<String>,
    pub check: String,
    pub omega_word: String,
    pub sigma_word: String,
    pub point: usize,
    pub backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qorder: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<[f64; 2]>,
    pub residual: Json,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CampaignReport {
    pub records: Vec<ResidualRecord>,
}

impl CampaignReport {
    pub fn total(&self) -> usize {
        self.records.len()
    }

    pub fn passed(&self) -> usize {
        self.records.iter().filter(|r| r.pass).count()
    }

    pub fn all_pass(&self) -> bool {
        self.passed() == self.total()
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResidualRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// Number of distinct `(ω, σ)` pairs covered.
    pub fn pairs(&self) -> usize {
        let mut keys: Vec<_> = self.records.iter().map(|r| (&r.check, &r.omega_word, &r.sigma_word)).collect();
        keys.sort();
        keys.dedup();
        keys.len()
    }

    pub fn to_json_lines(&self) -> String {
        self.records.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect()
    }
}

/// Independent, reproducible randomness for point `index` of a campaign.
pub fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

struct Context<'a, B: Backend> {
    backend: &'a B,
    label: String,
    dual_label: Option<String>,
}

impl<B: Backend> Context<'_, B> {
    fn record(&self, check: &str, omega: String, sigma: String, point: usize, residual: &B::Scalar, pass: bool) -> ResidualRecord {
        let (qorder, q) = match self.backend.context() {
            QContext::ExactSeries { order } => (Some(order), None),
            QContext::Complex { q, .. } => (None, Some(q)),
        };
        ResidualRecord {
            type_label: self.label.clone(),
            dual_type: self.dual_label.clone(),
            check: check.into(),
            omega_word: omega,
            sigma_word: sigma,
            point,
            backend: self.backend.name().into(),
            qorder,
            q,
            residual: self.backend.scalar_to_json(residual),
            pass,
        }
    }

    /// Exact: equality. Complex: relative agreement with a floor tied to the
    /// scale of the values being compared.
    fn agree(&self, a: &B::Scalar, b: &B::Scalar, scale: f64) -> bool {
        self.backend.agree(a, b, COMPLEX_REL_TOL, COMPLEX_ZERO_REL * scale)
    }
}

fn run_points<F>(points: usize, seed: u64, f: F) -> Result<CampaignReport>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<Vec<ResidualRecord>> + Sync,
{
    let per_point: Vec<Result<Vec<ResidualRecord>>> = (0..points)
        .into_par_iter()
        .map(|i| {
            let mut rng = point_rng(seed, i);
            retry_singular(&mut rng, |rng| f(i, rng))
        })
        .collect();
    let mut records = Vec::new();
    for r in per_point {
        records.extend(r?);
    }
    Ok(CampaignReport { records })
}

/// `(-1)^{ℓ(τ0)} 𝓔_{τ0ω⁻¹}(X_{τ0σ⁻¹})^# = 𝓔_σ(X^v_ω)` for every pair,
/// sampled on the dual side. `flip_sign` runs the negative control.
pub fn duality<B>(backend: &B, rs: &RootSystem, points: usize, seed: u64, flip_sign: bool) -> Result<CampaignReport>
where
    B: Backend + Sync,
    B::Value: Send + Sync,
    B::Scalar: Send,
{
    let pair = DualPair::new(rs)?;
    let ctx = Context {
        backend,
        label: rs.label().to_string(),
        dual_label: Some(rs.label().dual().to_string()),
    };
    let check = if flip_sign { "duality-flipped-sign" } else { "duality" };
    run_points(points, seed, |i, rng| {
        let p = sample_point(backend, pair.dual().rank(), rng);
        let recs = duality_campaign(backend, &pair, &p, flip_sign)?;
        let scale = recs
            .iter()
            .map(|r| backend.magnitude(&r.lhs).max(backend.magnitude(&r.rhs)))
            .fold(0.0, f64::max);
        Ok(recs
            .iter()
            .map(|r| {
                let pass = ctx.agree(&r.lhs, &r.rhs, scale);
                ctx.record(check, pair.dual().word_string(r.omega), pair.dual().word_string(r.sigma), i, &r.residual, pass)
            })
            .collect())
    })
}

/// Bott–Samelson against R-matrix for every `(ω, σ)`.
pub fn recursions<B>(backend: &B, rs: &RootSystem, points: usize, seed: u64) -> Result<CampaignReport>
where
    B: Backend + Sync,
    B::Value: Send + Sync,
    B::Scalar: Send,
{
    let weyl = WeylGroup::new(rs)?;
    let ctx = Context { backend, label: rs.label().to_string(), dual_label: None };
    run_points(points, seed, |i, rng| {
        let p = sample_point(backend, weyl.rank(), rng);
        let mut out = Vec::new();
        for omega in weyl.elements() {
            let word = weyl.reduced_word(omega);
            let bs = bs_table(backend, &weyl, &word, &p)?;
            let rm = rmatrix_table(backend, &weyl, &word, &p)?;
            let scale = table_scale(backend, &bs.values);
            for sigma in weyl.elements() {
                let (a, b) = (bs.value(sigma), rm.value(sigma));
                let residual = backend.sub(a, b);
                out.push(ctx.record("bs-vs-rmatrix", weyl.word_string(omega), weyl.word_string(sigma), i, &residual, ctx.agree(a, b, scale)));
            }
        }
        Ok(out)
    })
}

/// Both recursions for the normalization factor for all `(ω, s)`, the
/// factorization `𝓔 = c·E` for all `(ω, σ)`, and `c` as a dual diagonal
/// class for all `ω`.
pub fn normalization<B>(backend: &B, rs: &RootSystem, points: usize, seed: u64) -> Result<CampaignReport>
where
    B: Backend + Sync,
    B::Value: Send + Sync,
    B::Scalar: Send,
{
    let pair = DualPair::new(rs)?;
    let weyl = pair.group();
    let ctx = Context { backend, label: rs.label().to_string(), dual_label: None };
    run_points(points, seed, |i, rng| {
        let p: EvalPoint<B::Value> = sample_point(backend, weyl.rank(), rng);
        let mut out = Vec::new();
        let zero = backend.zero();
        for omega in weyl.elements() {
            let c = normalization_factor(backend, weyl, omega, &p)?;
            let scale = backend.magnitude(&c);
            for s in 0..weyl.rank() {
                let letter = (s + 1).to_string();
                let r = normalization_right_residual(backend, weyl, omega, s, &p)?;
                out.push(ctx.record("c-right", weyl.word_string(omega), letter.clone(), i, &r, ctx.agree(&r, &zero, scale)));
                let l = normalization_left_residual(backend, weyl, omega, s, &p)?;
                out.push(ctx.record("c-left", weyl.word_string(omega), letter, i, &l, ctx.agree(&l, &zero, scale)));
            }
            let d = normalization_dual_residual(backend, &pair, omega, &p)?;
            out.push(ctx.record("c-dual-diagonal", weyl.word_string(omega), "-".into(), i, &d, ctx.agree(&d, &zero, scale)));

            let word = weyl.reduced_word(omega);
            let full: ClassTable<B::Scalar> = bs_table(backend, weyl, &word, &p)?;
            let e = unnormalized_table(backend, weyl, &word, &p)?;
            let tscale = table_scale(backend, &full.values);
            for sigma in weyl.elements() {
                let rhs = backend.mul(&c, e.value(sigma));
                let r = backend.sub(full.value(sigma), &rhs);
                let pass = ctx.agree(full.value(sigma), &rhs, tscale);
                out.push(ctx.record("c-times-unnormalized", weyl.word_string(omega), weyl.word_string(sigma), i, &r, pass));
            }
        }
        Ok(out)
    })
}

/// `𝓔_σ(X_ω) = 𝓔_{τ0στ0}(X_{τ0ωτ0})` after relabeling `s ↦ s*`.
pub fn double_dual<B>(backend: &B, rs: &RootSystem, points: usize, seed: u64) -> Result<CampaignReport>
where
    B: Backend + Sync,
    B::Value: Send + Sync,
    B::Scalar: Send,
{
    let pair = DualPair::new(rs)?;
    let weyl = pair.group();
    let ctx = Context { backend, label: rs.label().to_string(), dual_label: None };
    run_points(points, seed, |i, rng| {
        let p = sample_point(backend, weyl.rank(), rng);
        let res = double_dual_campaign(backend, &pair, &p)?;
        let scale = full_scale(backend, weyl, &p)?;
        let zero = backend.zero();
        Ok(res
            .iter()
            .map(|(om, sg, r)| {
                ctx.record("double-dual", weyl.word_string(*om), weyl.word_string(*sg), i, r, ctx.agree(r, &zero, scale))
            })
            .collect())
    })
}

fn full_scale<B: Backend>(backend: &B, weyl: &WeylGroup, p: &EvalPoint<B::Value>) -> Result<f64> {
    let mut scale: f64 = 0.0;
    for w in weyl.elements() {
        let t = bs_table(backend, weyl, &weyl.reduced_word(w), p)?;
        scale = scale.max(table_scale(backend, &t.values));
    }
    Ok(scale)
}

pub fn run<B>(kind: CampaignKind, backend: &B, rs: &RootSystem, points: usize, seed: u64) -> Result<CampaignReport>
where
    B: Backend + Sync,
    B::Value: Send + Sync,
    B::Scalar: Send,
{
    match kind {
        CampaignKind::Duality => duality(backend, rs, points, seed, false),
        CampaignKind::Recursions => recursions(backend, rs, points, seed),
        CampaignKind::Normalization => normalization(backend, rs, points, seed),
        CampaignKind::DoubleDual => double_dual(backend, rs, points, seed),
    }
}

/// `{type, word, point, entries: [{sigma_word, value}]}`.
pub fn table_document<B: Backend>(
    backend: &B,
    weyl: &WeylGroup,
    table: &ClassTable<B::Scalar>,
    point: &EvalPoint<B::Value>,
) -> Json {
    let entries: Vec<Json> = weyl
        .elements()
        .map(|s| serde_json::json!({ "sigma_word": weyl.word_string(s), "value": backend.scalar_to_json(table.value(s)) }))
        .collect();
    let point: Vec<Json> = point.values().iter().map(|v| backend.value_to_json(v)).collect();
    let word = if table.word.is_empty() {
        "id".to_string()
    } else {
        table.word.iter().map(|s| (s + 1).to_string()).collect::<Vec<_>>().join(",")
    };
    serde_json::json!({
        "type": weyl.root_system().label().to_string(),
        "word": word,
        "backend": serde_json::to_value(backend.context()).unwrap(),
        "point": point,
        "entries": entries,
    })
}
