//! Valiron and Abel functions of polydisc automorphisms, and residual checks
//! of functional equations and semi-models for black-box maps.
//!
//! For a hyperbolic `τ` the Valiron function averages the normal-form
//! coordinates `g_j(z_j)` over every cycle of minimal dilation; it satisfies
//! `V ∘ τ = V / λ`. For a parabolic `τ` the Abel function averages the
//! normal-form coordinates of one parabolic cycle and satisfies
//! `Θ ∘ τ = Θ + α`, `α = ±1`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{estimate_divergence_rate, estimate_step, DynamicsError, HoloSelfMap};
use crate::geometry::{dist_halfplane, dist_poly, GeometryError, PointH, PolyPoint};
use crate::moebius::MoebiusH;
use crate::moebius::DEFAULT_EPS_CLS;
use crate::normalform::{normal_form_auto_with, NormalFormError};
use crate::polyauto::{AutoKind, PolydiscAuto};
use crate::sampling;

const FD_STEP: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuncEqError {
    #[error("expected a {expected} automorphism, found {found}")]
    WrongKind { expected: AutoKind, found: AutoKind },
    #[error("value outside the half-plane at a sample point: {0}")]
    Domain(GeometryError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
}

impl From<GeometryError> for FuncEqError {
    fn from(e: GeometryError) -> Self {
        FuncEqError::Domain(e)
    }
}

/// A scalar function ℍ^q → ℍ given as a closure.
pub type ScalarFn<'a> = dyn Fn(&PolyPoint) -> Result<PointH, GeometryError> + Sync + 'a;

/// One summand `g(z_index)` of a mean of normal-form coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    /// 1-based in JSON.
    #[serde(with = "one_based_index")]
    pub index: usize,
    pub g: MoebiusH,
}

/// `z ↦ (1/m) Σ g_j(z_{index_j})`.
fn mean_of_terms(terms: &[Term], z: &PolyPoint) -> Result<PointH, GeometryError> {
    let vals = terms
        .iter()
        .map(|t| {
            if t.index >= z.dim() {
                return Err(GeometryError::DimensionMismatch {
                    left: t.index + 1,
                    right: z.dim(),
                });
            }
            t.g.apply(z.coord(t.index))
        })
        .collect::<Result<Vec<_>, _>>()?;
    PointH::mean(&vals)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValironFunction {
    pub q: usize,
    pub terms: Vec<Term>,
    /// Dilation `λ_τ`; `V ∘ τ = V / λ_τ`.
    pub lambda: f64,
}

impl ValironFunction {
    /// Number of active coordinates.
    pub fn m(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, z: &PolyPoint) -> Result<PointH, GeometryError> {
        mean_of_terms(&self.terms, z)
    }

    /// Same function multiplied by `r > 0`.
    pub fn scaled_by(&self, r: f64) -> Result<ValironFunction, crate::moebius::MoebiusError> {
        Ok(ValironFunction {
            q: self.q,
            lambda: self.lambda,
            terms: self
                .terms
                .iter()
                .map(|t| {
                    Ok(Term {
                        index: t.index,
                        g: t.g.scaled_by(r)?,
                    })
                })
                .collect::<Result<_, _>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbelFunction {
    pub q: usize,
    pub terms: Vec<Term>,
    /// `Θ ∘ τ = Θ + alpha`.
    pub alpha: i8,
}

impl AbelFunction {
    pub fn k(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, z: &PolyPoint) -> Result<PointH, GeometryError> {
        mean_of_terms(&self.terms, z)
    }
}

pub fn valiron_for_auto(tau: &PolydiscAuto) -> Result<ValironFunction, FuncEqError> {
    valiron_for_auto_with(tau, DEFAULT_EPS_CLS)
}

pub fn valiron_for_auto_with(tau: &PolydiscAuto, eps: f64) -> Result<ValironFunction, FuncEqError> {
    let found = tau.classify_with(eps).kind;
    if found != AutoKind::Hyperbolic {
        return Err(FuncEqError::WrongKind {
            expected: AutoKind::Hyperbolic,
            found,
        });
    }
    let anf = normal_form_auto_with(tau, eps);
    let split = anf
        .hyperbolic_split
        .as_ref()
        .expect("hyperbolic automorphisms split");
    let terms = split
        .blocks
        .iter()
        .flat_map(|&i| {
            let g = anf.per_cycle[i]
                .g_halfplane()
                .expect("hyperbolic cycles conjugate into ℍ");
            anf.decomposition.blocks[i]
                .order
                .iter()
                .zip(g)
                .map(|(&index, &g)| Term { index, g })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(ValironFunction {
        q: tau.dim(),
        terms,
        lambda: split.dilation,
    })
}

pub fn abel_for_auto(tau: &PolydiscAuto) -> Result<AbelFunction, FuncEqError> {
    abel_for_auto_with(tau, DEFAULT_EPS_CLS)
}

pub fn abel_for_auto_with(tau: &PolydiscAuto, eps: f64) -> Result<AbelFunction, FuncEqError> {
    let found = tau.classify_with(eps).kind;
    if found != AutoKind::Parabolic {
        return Err(FuncEqError::WrongKind {
            expected: AutoKind::Parabolic,
            found,
        });
    }
    let anf = normal_form_auto_with(tau, eps);
    let (block, nf) = anf
        .decomposition
        .blocks
        .iter()
        .zip(&anf.per_cycle)
        .find(|(_, nf)| nf.kind == AutoKind::Parabolic)
        .expect("parabolic automorphisms have a parabolic cycle");
    let g = nf.g_halfplane().expect("parabolic cycles conjugate into ℍ");
    Ok(AbelFunction {
        q: tau.dim(),
        terms: block
            .order
            .iter()
            .zip(g)
            .map(|(&index, &g)| Term { index, g })
            .collect(),
        alpha: nf.sign.expect("parabolic normal forms carry a sign"),
    })
}

/// Sampling parameters shared by the verifiers. Black-box maps are called
/// from several threads when `parallel` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingOptions {
    pub samples: usize,
    pub seed: u64,
    pub parallel: bool,
    /// Orbit length used by the companion estimates.
    pub companion_horizon: usize,
    pub companion_tol: f64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            samples: 100,
            seed: 0,
            parallel: false,
            companion_horizon: 2000,
            companion_tol: 5e-3,
        }
    }
}

fn sup_over<F>(points: &[PolyPoint], parallel: bool, f: F) -> Result<f64, FuncEqError>
where
    F: Fn(&PolyPoint) -> Result<f64, FuncEqError> + Sync,
{
    if parallel {
        points
            .par_iter()
            .map(&f)
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    } else {
        points.iter().try_fold(0.0f64, |acc, z| Ok(acc.max(f(z)?)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompanionCheck {
    pub value: Option<f64>,
    pub bound: Option<f64>,
    /// `None` when the condition cannot be tested on samples.
    pub holds: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub residual: f64,
    pub samples: usize,
    pub seed: u64,
    pub companion_checks: BTreeMap<String, CompanionCheck>,
}

/// `sup_z k(V(f z), V(z)/μ)`, with the companion check that the estimated
/// divergence rate of `f` is at least `log(1/μ)`.
pub fn verify_valiron(
    v: &ScalarFn<'_>,
    f: &HoloSelfMap,
    mu: f64,
    opts: &SamplingOptions,
) -> Result<VerificationReport, FuncEqError> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(FuncEqError::Dynamics(DynamicsError::Parameter(format!(
            "mu must lie in (0, 1), got {mu}"
        ))));
    }
    let ln_inv = -mu.ln();
    let points = sampling::poly_points(f.dim(), opts.samples, opts.seed);
    let residual = sup_over(&points, opts.parallel, |z| {
        let lhs = v(&f.eval(z)?)?;
        let rhs = v(z)?.dilate(ln_inv)?;
        Ok(dist_halfplane(&lhs, &rhs))
    })?;
    let c = estimate_divergence_rate(f, &PolyPoint::center(f.dim()), opts.companion_horizon)?
        .c_estimate;
    let mut checks = BTreeMap::new();
    checks.insert(
        "divergence_rate_lower_bound".to_string(),
        CompanionCheck {
            value: Some(c),
            bound: Some(ln_inv - opts.companion_tol),
            holds: Some(c >= ln_inv - opts.companion_tol),
            note: Some(format!(
                "estimated c(f) at horizon {} against log(1/mu)",
                opts.companion_horizon
            )),
        },
    );
    Ok(VerificationReport {
        residual,
        samples: opts.samples,
        seed: opts.seed,
        companion_checks: checks,
    })
}

/// `sup_z k(Θ(f z), Θ(z) + α)`, with the companion check that the step of
/// `f` at each sample point is at least `k(Θ(x), Θ(x) + α)`.
pub fn verify_abel(
    theta: &ScalarFn<'_>,
    f: &HoloSelfMap,
    alpha: f64,
    opts: &SamplingOptions,
) -> Result<VerificationReport, FuncEqError> {
    let points = sampling::poly_points(f.dim(), opts.samples, opts.seed);
    let residual = sup_over(&points, opts.parallel, |z| {
        let lhs = theta(&f.eval(z)?)?;
        let rhs = theta(z)?.translate(alpha)?;
        Ok(dist_halfplane(&lhs, &rhs))
    })?;
    // Largest shortfall `k(Θ(x), Θ(x)+α) − s(x)` over the sample points.
    let shortfall = sup_over(&points, opts.parallel, |z| {
        let t = theta(z)?;
        let need = dist_halfplane(&t, &t.translate(alpha)?);
        let s = estimate_step(f, z, opts.companion_horizon)?.s_estimate;
        Ok((need - s).max(0.0))
    })?;
    let mut checks = BTreeMap::new();
    checks.insert(
        "step_lower_bound".to_string(),
        CompanionCheck {
            value: Some(shortfall),
            bound: Some(opts.companion_tol),
            holds: Some(shortfall <= opts.companion_tol),
            note: Some(
                "largest shortfall of the estimated step below k(theta(x), theta(x) + alpha)"
                    .into(),
            ),
        },
    );
    Ok(VerificationReport {
        residual,
        samples: opts.samples,
        seed: opts.seed,
        companion_checks: checks,
    })
}

type PolyFn = dyn Fn(&PolyPoint) -> Result<PolyPoint, GeometryError> + Send + Sync;

/// Candidate semi-model `(ℍ^base_dim, ℓ, τ)` for a self-map of ℍ^N.
#[derive(Clone)]
pub struct SemiModelTriple {
    pub base_dim: usize,
    pub intertwiner: Arc<PolyFn>,
    pub base_auto: PolydiscAuto,
}

impl std::fmt::Debug for SemiModelTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemiModelTriple")
            .field("base_dim", &self.base_dim)
            .field("base_auto", &self.base_auto)
            .finish_non_exhaustive()
    }
}

impl SemiModelTriple {
    pub fn new<L>(intertwiner: L, base_auto: PolydiscAuto) -> Self
    where
        L: Fn(&PolyPoint) -> Result<PolyPoint, GeometryError> + Send + Sync + 'static,
    {
        SemiModelTriple {
            base_dim: base_auto.dim(),
            intertwiner: Arc::new(intertwiner),
            base_auto,
        }
    }
}

/// `sup_z k(ℓ(f z), τ(ℓ z))`. The exhaustion condition of a semi-model has
/// no finite test and is reported as such.
pub fn verify_semimodel(
    sm: &SemiModelTriple,
    f: &HoloSelfMap,
    opts: &SamplingOptions,
) -> Result<VerificationReport, FuncEqError> {
    if sm.base_dim != sm.base_auto.dim() {
        return Err(FuncEqError::Dimension(format!(
            "base dimension {} but the automorphism acts on H^{}",
            sm.base_dim,
            sm.base_auto.dim()
        )));
    }
    let points = sampling::poly_points(f.dim(), opts.samples, opts.seed);
    let residual = sup_over(&points, opts.parallel, |z| {
        let lhs = (sm.intertwiner)(&f.eval(z)?)?;
        let rhs = sm.base_auto.apply(&(sm.intertwiner)(z)?)?;
        if lhs.dim() != sm.base_dim {
            return Err(FuncEqError::Dimension(format!(
                "intertwiner returned a point of dimension {}",
                lhs.dim()
            )));
        }
        Ok(dist_poly(&lhs, &rhs)?)
    })?;
    let mut checks = BTreeMap::new();
    checks.insert(
        "exhaustion".to_string(),
        CompanionCheck {
            value: None,
            bound: None,
            holds: None,
            note: Some(
                "union of backward images of the intertwiner range is not testable on samples"
                    .into(),
            ),
        },
    );
    Ok(VerificationReport {
        residual,
        samples: opts.samples,
        seed: opts.seed,
        companion_checks: checks,
    })
}

/// Largest violations of the characterizing conditions of a Valiron
/// function, measured in normal-form coordinates `ζ = G(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValironConditionsReport {
    /// `k(Ṽ(rζ_A, w), r·Ṽ(ζ_A, w))`.
    pub homogeneity: f64,
    /// `k(Ṽ(σ̂ζ), Ṽ(ζ))`.
    pub sigma_invariance: f64,
    /// Finite-difference derivative of `Ṽ` along the inactive coordinates.
    pub w_dependence: f64,
    pub samples: usize,
    pub seed: u64,
}

impl ValironConditionsReport {
    pub fn max_violation(&self) -> f64 {
        self.homogeneity
            .max(self.sigma_invariance)
            .max(self.w_dependence)
    }
}

/// Normal-form chart of a hyperbolic automorphism: active coordinates with
/// their conjugators and the induced permutation on them.
struct Chart {
    /// `g_j` on active coordinates, `None` elsewhere.
    g: Vec<Option<MoebiusH>>,
    perm: Vec<usize>,
}

impl Chart {
    fn new(tau: &PolydiscAuto) -> Result<Chart, FuncEqError> {
        let v = valiron_for_auto(tau)?;
        let mut g = vec![None; tau.dim()];
        for t in &v.terms {
            g[t.index] = Some(t.g);
        }
        Ok(Chart {
            g,
            perm: tau.perm().to_vec(),
        })
    }

    fn is_active(&self, j: usize) -> bool {
        self.g[j].is_some()
    }

    /// `z = G⁻¹(ζ)`.
    fn pull_back(&self, zeta: &PolyPoint) -> Result<PolyPoint, GeometryError> {
        PolyPoint::new(
            zeta.coords()
                .iter()
                .zip(&self.g)
                .map(|(p, g)| match g {
                    Some(g) => g.inverse().apply(p),
                    None => Ok(*p),
                })
                .collect::<Result<_, _>>()?,
        )
    }

    fn map_active(
        &self,
        zeta: &PolyPoint,
        f: impl Fn(usize, &PointH) -> Result<PointH, GeometryError>,
    ) -> Result<PolyPoint, GeometryError> {
        PolyPoint::new(
            zeta.coords()
                .iter()
                .enumerate()
                .map(|(j, p)| if self.is_active(j) { f(j, p) } else { Ok(*p) })
                .collect::<Result<_, _>>()?,
        )
    }
}

/// Samples homogeneity, `σ̂`-invariance and independence of the inactive
/// coordinates for `V` in the normal-form coordinates of `τ`.
pub fn check_valiron_conditions(
    v: &ScalarFn<'_>,
    tau: &PolydiscAuto,
    samples: usize,
    seed: u64,
) -> Result<ValironConditionsReport, FuncEqError> {
    use rand::Rng;

    let chart = Chart::new(tau)?;
    let q = tau.dim();
    let vt = |zeta: &PolyPoint| -> Result<PointH, FuncEqError> { Ok(v(&chart.pull_back(zeta)?)?) };
    let mut rng = sampling::rng(seed);
    let (mut hom, mut sig, mut dep) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let zeta = sampling::poly_point(&mut rng, q);
        let ln_r = rng.gen_range(-1.0..=1.0);
        let base = vt(&zeta)?;

        let scaled = chart.map_active(&zeta, |_, p| p.dilate(ln_r))?;
        hom = hom.max(dist_halfplane(&vt(&scaled)?, &base.dilate(ln_r)?));

        let shifted = chart.map_active(&zeta, |j, _| Ok(*zeta.coord(chart.perm[j])))?;
        sig = sig.max(dist_halfplane(&vt(&shifted)?, &base));

        for j in (0..q).filter(|&j| !chart.is_active(j)) {
            let mut coords = zeta.clone().into_coords();
            coords[j] = coords[j].translate(FD_STEP)?;
            let moved = vt(&PolyPoint::new(coords)?)?;
            dep = dep.max((moved.value() - base.value()).norm() / FD_STEP);
        }
    }
    Ok(ValironConditionsReport {
        homogeneity: hom,
        sigma_invariance: sig,
        w_dependence: dep,
        samples,
        seed,
    })
}

/// Targets `t` on a 10 × 10 grid: `Re t ∈ [−3, 3]`, `Im t ∈ [0.1, 10]`
/// (log-spaced).
pub fn target_grid() -> Vec<PointH> {
    let mut out = Vec::with_capacity(100);
    for a in 0..10 {
        for b in 0..10 {
            let re = -3.0 + 6.0 * a as f64 / 9.0;
            let im = 10f64.powf(-1.0 + 2.0 * b as f64 / 9.0);
            out.push(PointH::from_parts(re, im).expect("grid lies in the half-plane"));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurjectivityReport {
    pub targets: usize,
    /// `max_t |V(z_t) − t|`.
    pub max_error: f64,
    /// Partial evidence for `V(ℍ^q) = ℍ`: finitely many targets only.
    pub partial_evidence: bool,
}

/// Attains each target `t` at `z_t = G⁻¹(t, …, t, w_0)`: the diagonal of
/// the active coordinates, with inactive coordinates at `i`.
pub fn surjectivity_witness(
    v: &ValironFunction,
    tau: &PolydiscAuto,
    targets: &[PointH],
) -> Result<SurjectivityReport, FuncEqError> {
    let chart = Chart::new(tau)?;
    let max_error = targets.iter().try_fold(0.0f64, |acc, t| {
        let zeta = chart.map_active(&PolyPoint::center(tau.dim()), |_, _| Ok(*t))?;
        let z = chart.pull_back(&zeta)?;
        Ok::<f64, FuncEqError>(acc.max((v.eval(&z)?.value() - t.value()).norm()))
    })?;
    Ok(SurjectivityReport {
        targets: targets.len(),
        max_error,
        partial_evidence: true,
    })
}

mod one_based_index {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(j: &usize, s: S) -> Result<S::Ok, S::Error> {
        (j + 1).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        usize::deserialize(d)?
            .checked_sub(1)
            .ok_or_else(|| serde::de::Error::custom("indices are 1-based"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn dil(s: f64) -> MoebiusH {
        MoebiusH::dilation(s).unwrap()
    }

    fn q3_example() -> PolydiscAuto {
        PolydiscAuto::from_one_based(
            &[2, 1, 3],
            vec![dil(2.0), dil(2.0), MoebiusH::translation(1.0)],
        )
        .unwrap()
    }

    fn opts() -> SamplingOptions {
        SamplingOptions {
            samples: 50,
            companion_horizon: 200,
            ..Default::default()
        }
    }

    #[test]
    fn valiron_of_canonical_shift() {
        let tau = PolydiscAuto::from_one_based(&[2, 1], vec![dil(2.0), dil(2.0)]).unwrap();
        let v = valiron_for_auto(&tau).unwrap();
        assert_eq!(v.m(), 2);
        assert!((v.lambda - 0.5).abs() < 1e-15);
        let z = PolyPoint::from_complex(&[Complex64::new(1.0, 1.0), Complex64::new(-3.0, 2.0)])
            .unwrap();
        assert!((v.eval(&z).unwrap().value() - Complex64::new(-1.0, 1.5)).norm() < 1e-15);
        let f = HoloSelfMap::from_auto(&tau);
        let rep = verify_valiron(&|z| v.eval(z), &f, v.lambda, &opts()).unwrap();
        assert!(rep.residual < 1e-10);
        assert!(rep.companion_checks["divergence_rate_lower_bound"].holds == Some(true));
    }

    #[test]
    fn valiron_ignores_non_minimal_coordinates() {
        let tau = q3_example();
        let v = valiron_for_auto(&tau).unwrap();
        let idx: Vec<_> = v.terms.iter().map(|t| t.index).collect();
        assert_eq!(idx, vec![0, 1]);
        let f = HoloSelfMap::from_auto(&tau);
        assert!(
            verify_valiron(&|z| v.eval(z), &f, v.lambda, &opts())
                .unwrap()
                .residual
                < 1e-10
        );
        let wrong = verify_valiron(&|z| v.eval(z), &f, v.lambda * 1.1, &opts()).unwrap();
        assert!(wrong.residual > 1e-2);
        assert!(valiron_for_auto(&PolydiscAuto::identity(2)).is_err());
    }

    #[test]
    fn valiron_of_one_variable_dilation() {
        let tau = PolydiscAuto::diagonal(vec![dil(4.0)]).unwrap();
        let v = valiron_for_auto(&tau).unwrap();
        assert!(v.terms[0].g.approx_eq(&MoebiusH::IDENTITY, 1e-15));
        // Positive multiples are solutions too, and differ by a constant ratio.
        let w = v.scaled_by(2.5).unwrap();
        let f = HoloSelfMap::from_auto(&tau);
        assert!(
            verify_valiron(&|z| w.eval(z), &f, 0.25, &opts())
                .unwrap()
                .residual
                < 1e-10
        );
        for z in sampling::poly_points(1, 20, 3) {
            let ratio = w.eval(&z).unwrap().value() / v.eval(&z).unwrap().value();
            assert!((ratio - 2.5).norm() < 1e-13);
        }
    }

    #[test]
    fn conditions_hold_for_constructed_function() {
        let mut r = sampling::rng(5);
        for q in 1..=5 {
            let tau = sampling::auto_of_kind(&mut r, q, AutoKind::Hyperbolic);
            let v = valiron_for_auto(&tau).unwrap();
            let rep = check_valiron_conditions(&|z| v.eval(z), &tau, 30, 1).unwrap();
            assert!(rep.max_violation() < 1e-9, "{rep:?}");
            let s = surjectivity_witness(&v, &tau, &target_grid()).unwrap();
            assert!(s.max_error < 1e-8);
        }
    }

    #[test]
    fn conditions_detect_bad_candidates() {
        let tau = PolydiscAuto::from_one_based(&[2, 1], vec![dil(2.0), dil(2.0)]).unwrap();
        let first = |z: &PolyPoint| Ok(*z.coord(0));
        let rep = check_valiron_conditions(&first, &tau, 30, 2).unwrap();
        assert!(rep.sigma_invariance > 1e-2);
        assert!(rep.homogeneity < 1e-12);

        let tau = PolydiscAuto::diagonal(vec![dil(2.0), MoebiusH::translation(1.0)]).unwrap();
        let leak = |z: &PolyPoint| PointH::new(z.coord(0).value() + 0.1 * z.coord(1).value());
        let rep = check_valiron_conditions(&leak, &tau, 30, 3).unwrap();
        assert!((rep.w_dependence - 0.1).abs() < 1e-6);
    }

    #[test]
    fn abel_of_translation_cycle() {
        let tau = PolydiscAuto::from_one_based(
            &[2, 1],
            vec![MoebiusH::translation(1.0), MoebiusH::translation(2.0)],
        )
        .unwrap();
        let a = abel_for_auto(&tau).unwrap();
        assert_eq!(a.alpha, 1);
        let z = PolyPoint::from_complex(&[Complex64::new(0.3, 1.0), Complex64::new(-1.0, 0.5)])
            .unwrap();
        let (z1, z2) = (z.coord(0).value(), z.coord(1).value());
        let expect = ((2.0 / 3.0) * z1 + (2.0 / 3.0) * z2 - 1.0 / 3.0) / 2.0;
        assert!((a.eval(&z).unwrap().value() - expect).norm() < 1e-15);
        let f = HoloSelfMap::from_auto(&tau);
        let rep = verify_abel(&|z| a.eval(z), &f, 1.0, &opts()).unwrap();
        assert!(rep.residual < 1e-10);
        assert!(rep.companion_checks["step_lower_bound"].holds == Some(true));
        let wrong = verify_abel(&|z| a.eval(z), &f, -1.0, &opts()).unwrap();
        assert!(wrong.residual > 0.1);
    }

    #[test]
    fn abel_picks_the_parabolic_cycle() {
        let tau = PolydiscAuto::diagonal(vec![
            MoebiusH::translation(1.0),
            MoebiusH::rotation_about_i(0.5),
        ])
        .unwrap();
        let a = abel_for_auto(&tau).unwrap();
        assert_eq!(a.terms.len(), 1);
        assert_eq!(a.terms[0].index, 0);
        assert!(a.terms[0].g.approx_eq(&MoebiusH::IDENTITY, 1e-15));
        assert_eq!(a.alpha, 1);
        assert!(abel_for_auto(&q3_example()).is_err());
    }

    #[test]
    fn parallel_sampling_agrees() {
        let tau = q3_example();
        let v = valiron_for_auto(&tau).unwrap();
        let f = HoloSelfMap::from_auto(&tau);
        let seq = verify_valiron(&|z| v.eval(z), &f, v.lambda, &opts()).unwrap();
        let par = verify_valiron(
            &|z| v.eval(z),
            &f,
            v.lambda,
            &SamplingOptions {
                parallel: true,
                ..opts()
            },
        )
        .unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn semimodel_residuals() {
        let f = HoloSelfMap::new(
            2,
            |z: &PolyPoint| {
                PolyPoint::from_complex(&[2.0 * z.coord(0).value(), z.coord(1).value() + 1.0])
            },
            None,
        )
        .unwrap();
        let base = PolydiscAuto::diagonal(vec![dil(2.0)]).unwrap();
        let proj = SemiModelTriple::new(
            |z: &PolyPoint| PolyPoint::new(vec![*z.coord(0)]),
            base.clone(),
        );
        assert!(verify_semimodel(&proj, &f, &opts()).unwrap().residual < 1e-14);
        let bent = SemiModelTriple::new(
            |z: &PolyPoint| PolyPoint::new(vec![z.coord(0).translate(0.1)?]),
            base,
        );
        assert!(verify_semimodel(&bent, &f, &opts()).unwrap().residual > 1e-3);

        let tau = q3_example();
        let t2 = tau.clone();
        let id = SemiModelTriple::new(|z: &PolyPoint| Ok(z.clone()), tau.clone());
        let g = HoloSelfMap::from_auto(&t2);
        assert!(verify_semimodel(&id, &g, &opts()).unwrap().residual < 1e-14);
    }
}
