//! Canonical models of cycle automorphisms.
//!
//! A cycle automorphism `τ` of ℍ^k is conjugated by a coordinatewise map
//! `g = (g_1, …, g_k)` to one of three models, writing `σ` for the cyclic
//! shift `(w_1, …, w_k) ↦ (w_2, …, w_k, w_1)`:
//!
//! * hyperbolic: `L = (1/λ)σ` on ℍ^k, `λ` the cycle dilation;
//! * parabolic: `L = σ + s·(1, …, 1)` on ℍ^k, `s = ±1`;
//! * elliptic: `L = λσ` on Δ^k, `λ` a `k`-th root of the multiplier of `Γ_1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{dist_disc, dist_poly, GeometryError, PointD, PointH, PolyPoint};
use crate::moebius::{
    abel_conjugator_parabolic_with, linearizer_hyperbolic_with, MoebiusError, MoebiusH,
    MoebiusHtoD, MoebiusKind, DEFAULT_EPS_CLS,
};
use crate::polyauto::{AutoKind, CycleAuto, CycleDecomposition, PolydiscAuto};
use crate::sampling;

/// Relative tolerance for two cycles to share the minimal dilation.
const SPLIT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalFormError {
    #[error("normal form of length {nf} does not match a cycle of length {cycle}")]
    LengthMismatch { nf: usize, cycle: usize },
    #[error("a {kind} normal form needs {needs}")]
    Inconsistent { kind: AutoKind, needs: &'static str },
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Per-coordinate conjugator: maps of ℍ for hyperbolic and parabolic
/// cycles, maps ℍ → Δ for elliptic ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Conjugator {
    Halfplane(Vec<MoebiusH>),
    Disc(Vec<MoebiusHtoD>),
}

impl Conjugator {
    pub fn len(&self) -> usize {
        match self {
            Conjugator::Halfplane(g) => g.len(),
            Conjugator::Disc(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub kind: AutoKind,
    pub k: usize,
    /// Cycle dilation `λ_τ` (hyperbolic).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Principal `k`-th root of the multiplier of `Γ_1` (elliptic).
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_complex::option"
    )]
    pub multiplier: Option<Complex64>,
    /// Translation sign of the model (parabolic).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
    pub g: Conjugator,
}

/// A point of the model domain: ℍ^k or Δ^k.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelPoint {
    Halfplane(PolyPoint),
    Disc(Vec<PointD>),
}

impl NormalForm {
    /// The half-plane conjugator, when the model lives on ℍ^k.
    pub fn g_halfplane(&self) -> Option<&[MoebiusH]> {
        match &self.g {
            Conjugator::Halfplane(g) => Some(g),
            Conjugator::Disc(_) => None,
        }
    }

    pub fn g_disc(&self) -> Option<&[MoebiusHtoD]> {
        match &self.g {
            Conjugator::Disc(g) => Some(g),
            Conjugator::Halfplane(_) => None,
        }
    }

    /// `g(z)`, coordinate by coordinate.
    pub fn conjugate(&self, z: &PolyPoint) -> Result<ModelPoint, NormalFormError> {
        if z.dim() != self.g.len() {
            return Err(GeometryError::DimensionMismatch {
                left: self.g.len(),
                right: z.dim(),
            }
            .into());
        }
        Ok(match &self.g {
            Conjugator::Halfplane(g) => ModelPoint::Halfplane(PolyPoint::new(
                g.iter()
                    .zip(z.coords())
                    .map(|(g, z)| g.apply(z))
                    .collect::<Result<_, _>>()?,
            )?),
            Conjugator::Disc(g) => ModelPoint::Disc(
                g.iter()
                    .zip(z.coords())
                    .map(|(g, z)| g.apply(z))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }

    /// The model map `L`.
    pub fn model_apply(&self, w: &ModelPoint) -> Result<ModelPoint, NormalFormError> {
        let k = self.g.len();
        match (self.kind, w) {
            (AutoKind::Hyperbolic, ModelPoint::Halfplane(w)) => {
                let lambda = self.lambda.ok_or(NormalFormError::Inconsistent {
                    kind: self.kind,
                    needs: "a dilation",
                })?;
                let ln = -lambda.ln();
                let out = (0..k)
                    .map(|j| w.coord((j + 1) % k).dilate(ln))
                    .collect::<Result<_, _>>()?;
                Ok(ModelPoint::Halfplane(PolyPoint::new(out)?))
            }
            (AutoKind::Parabolic, ModelPoint::Halfplane(w)) => {
                let s = self.sign.ok_or(NormalFormError::Inconsistent {
                    kind: self.kind,
                    needs: "a sign",
                })?;
                let out = (0..k)
                    .map(|j| w.coord((j + 1) % k).translate(s as f64))
                    .collect::<Result<_, _>>()?;
                Ok(ModelPoint::Halfplane(PolyPoint::new(out)?))
            }
            (AutoKind::Elliptic, ModelPoint::Disc(w)) => {
                let m = self.multiplier.ok_or(NormalFormError::Inconsistent {
                    kind: self.kind,
                    needs: "a multiplier",
                })?;
                let out = (0..k)
                    .map(|j| PointD::new(m * w[(j + 1) % k].value()))
                    .collect::<Result<_, _>>()?;
                Ok(ModelPoint::Disc(out))
            }
            _ => Err(NormalFormError::Inconsistent {
                kind: self.kind,
                needs: "a conjugator onto the matching model domain",
            }),
        }
    }

    /// Distance between `g(τ(z))` and `L(g(z))`.
    pub fn residual_at(&self, cycle: &CycleAuto, z: &PolyPoint) -> Result<f64, NormalFormError> {
        if cycle.len() != self.g.len() {
            return Err(NormalFormError::LengthMismatch {
                nf: self.g.len(),
                cycle: cycle.len(),
            });
        }
        let lhs = self.conjugate(&cycle.apply(z)?)?;
        let rhs = self.model_apply(&self.conjugate(z)?)?;
        model_distance(&lhs, &rhs)
    }
}

fn model_distance(a: &ModelPoint, b: &ModelPoint) -> Result<f64, NormalFormError> {
    match (a, b) {
        (ModelPoint::Halfplane(a), ModelPoint::Halfplane(b)) => Ok(dist_poly(a, b)?),
        (ModelPoint::Disc(a), ModelPoint::Disc(b)) => Ok(a
            .iter()
            .zip(b)
            .map(|(x, y)| dist_disc(x, y))
            .fold(0.0, f64::max)),
        _ => Err(NormalFormError::Inconsistent {
            kind: AutoKind::Elliptic,
            needs: "points of the same model domain",
        }),
    }
}

pub fn normal_form_cycle(cycle: &CycleAuto) -> NormalForm {
    normal_form_cycle_with(cycle, DEFAULT_EPS_CLS)
}

pub fn normal_form_cycle_with(cycle: &CycleAuto, eps: f64) -> NormalForm {
    let k = cycle.len();
    let cls = cycle.classify_with(eps);
    let gamma1 = cycle.gamma_products()[0];
    let steps = &cycle.gammas()[..k - 1];
    match cls.kind {
        AutoKind::Hyperbolic => {
            let lambda = cls.dilation.expect("hyperbolic cycles carry a dilation");
            let mut g = vec![linearizer_hyperbolic_with(&gamma1, eps).expect("Γ_1 is hyperbolic")];
            for gamma in steps {
                let prev = g.last().expect("non-empty").compose(gamma);
                g.push(prev.scaled_by(lambda).expect("positive factor"));
            }
            NormalForm {
                kind: cls.kind,
                k,
                lambda: Some(lambda),
                multiplier: None,
                sign: None,
                g: Conjugator::Halfplane(g),
            }
        }
        AutoKind::Parabolic => {
            let (g1, sign) =
                abel_conjugator_parabolic_with(&gamma1, k, eps).expect("Γ_1 is parabolic");
            let mut g = vec![g1];
            for gamma in steps {
                let prev = g.last().expect("non-empty").compose(gamma);
                g.push(prev.shifted_by(-(sign as f64)));
            }
            NormalForm {
                kind: cls.kind,
                k,
                lambda: None,
                multiplier: None,
                sign: Some(sign),
                g: Conjugator::Halfplane(g),
            }
        }
        AutoKind::Elliptic => {
            let lambda = cls.multiplier.expect("elliptic cycles carry a multiplier");
            let p = match cls.gamma1.kind {
                MoebiusKind::Elliptic => cls
                    .gamma1
                    .fixed_point_interior
                    .expect("elliptic fixed point"),
                _ => PointH::I,
            };
            let mut g = vec![MoebiusHtoD::centered_at(&p)];
            for gamma in steps {
                let prev = g.last().expect("non-empty").compose_h(gamma);
                g.push(prev.rotated_by(lambda.conj()));
            }
            NormalForm {
                kind: cls.kind,
                k,
                lambda: None,
                multiplier: Some(lambda),
                sign: None,
                g: Conjugator::Disc(g),
            }
        }
    }
}

/// Largest distance between `g(τ(z))` and `L(g(z))` over `samples` points of
/// the sample box drawn from `seed`.
pub fn verify_conjugacy(
    nf: &NormalForm,
    cycle: &CycleAuto,
    samples: usize,
    seed: u64,
) -> Result<f64, NormalFormError> {
    sampling::poly_points(cycle.len(), samples, seed)
        .iter()
        .try_fold(0.0f64, |acc, z| Ok(acc.max(nf.residual_at(cycle, z)?)))
}

/// Reordering that puts the hyperbolic cycles of minimal dilation first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicSplit {
    /// Number of leading coordinates carrying minimal-dilation cycles.
    pub m: usize,
    /// Original coordinates in the new order.
    #[serde(with = "crate::polyauto::one_based")]
    pub reorder: Vec<usize>,
    pub dilation: f64,
    /// Indices into the block list of the cycles in the leading factor.
    pub blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoNormalForm {
    pub decomposition: CycleDecomposition,
    pub per_cycle: Vec<NormalForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperbolic_split: Option<HyperbolicSplit>,
}

pub fn normal_form_auto(tau: &PolydiscAuto) -> AutoNormalForm {
    normal_form_auto_with(tau, DEFAULT_EPS_CLS)
}

pub fn normal_form_auto_with(tau: &PolydiscAuto, eps: f64) -> AutoNormalForm {
    let decomposition = tau.cycle_decompose();
    let classes: Vec<_> = decomposition
        .blocks
        .iter()
        .map(|b| b.cycle.classify_with(eps))
        .collect();
    let per_cycle = decomposition
        .blocks
        .iter()
        .map(|b| normal_form_cycle_with(&b.cycle, eps))
        .collect();
    let c_max = classes
        .iter()
        .filter(|c| c.kind == AutoKind::Hyperbolic)
        .map(|c| c.divergence_rate)
        .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.max(c))));
    let hyperbolic_split = c_max.map(|c_max| {
        let tol = SPLIT_REL_TOL * c_max.max(1.0);
        let leading: Vec<usize> = classes
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == AutoKind::Hyperbolic && c_max - c.divergence_rate <= tol)
            .map(|(i, _)| i)
            .collect();
        let mut reorder: Vec<usize> = leading
            .iter()
            .flat_map(|&i| decomposition.blocks[i].order.iter().copied())
            .collect();
        let m = reorder.len();
        for (i, b) in decomposition.blocks.iter().enumerate() {
            if !leading.contains(&i) {
                reorder.extend(&b.order);
            }
        }
        HyperbolicSplit {
            m,
            reorder,
            dilation: (-c_max).exp(),
            blocks: leading,
        }
    });
    AutoNormalForm {
        decomposition,
        per_cycle,
        hyperbolic_split,
    }
}

impl AutoNormalForm {
    /// Largest conjugacy residual over all cycles.
    pub fn verify(&self, samples: usize, seed: u64) -> Result<f64, NormalFormError> {
        self.decomposition
            .blocks
            .iter()
            .zip(&self.per_cycle)
            .try_fold(0.0f64, |acc, (b, nf)| {
                Ok(acc.max(verify_conjugacy(nf, &b.cycle, samples, seed)?))
            })
    }
}
