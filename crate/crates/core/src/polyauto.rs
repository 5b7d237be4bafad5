//! Automorphisms of the poly-halfplane ℍ^q.
//!
//! Every automorphism has the shape `(τz)_j = γ_j(z_{p(j)})` for a
//! permutation `p` and automorphisms `γ_j` of ℍ. Splitting `p` into cycles
//! writes `τ` as a direct sum of *cycle automorphisms*
//! `(z_1, …, z_k) ↦ (γ_1(z_2), γ_2(z_3), …, γ_k(z_1))`, and the dynamics of a
//! cycle is read off the one-variable map `Γ_1 = γ_1 ∘ ⋯ ∘ γ_k`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::geometry::{dist_poly, GeometryError, PointH, PolyPoint};
use crate::moebius::{
    DiscAutoClassification, MoebiusError, MoebiusH, MoebiusKind, DEFAULT_EPS_CLS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyautoError {
    #[error("not a permutation of 1..={q}: {perm:?}")]
    InvalidPermutation { perm: Vec<usize>, q: usize },
    #[error("{gammas} coordinate maps given for a permutation of length {perm}")]
    LengthMismatch { perm: usize, gammas: usize },
    #[error("declared dimension q = {declared} but the data has {actual} coordinates")]
    DeclaredDimension { declared: usize, actual: usize },
    #[error("dimension must be positive")]
    Empty,
    #[error("coordinate map {index} is not an automorphism of the disc: {reason}")]
    NotDiscAutomorphism { index: usize, reason: String },
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Dynamical type of a cycle or of a whole automorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKind {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl std::fmt::Display for AutoKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AutoKind::Elliptic => "elliptic",
            AutoKind::Parabolic => "parabolic",
            AutoKind::Hyperbolic => "hyperbolic",
        })
    }
}

/// `(τz)_j = γ_j(z_{p(j)})`. Indices are 0-based in the API and 1-based in
/// JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct PolydiscAuto {
    perm: Vec<usize>,
    gammas: Vec<MoebiusH>,
}

impl PolydiscAuto {
    pub fn new(perm: Vec<usize>, gammas: Vec<MoebiusH>) -> Result<Self, PolyautoError> {
        let q = perm.len();
        if q == 0 {
            return Err(PolyautoError::Empty);
        }
        if gammas.len() != q {
            return Err(PolyautoError::LengthMismatch {
                perm: q,
                gammas: gammas.len(),
            });
        }
        let mut seen = vec![false; q];
        for &p in &perm {
            if p >= q || seen[p] {
                return Err(PolyautoError::InvalidPermutation {
                    perm: perm.iter().map(|p| p + 1).collect(),
                    q,
                });
            }
            seen[p] = true;
        }
        Ok(PolydiscAuto { perm, gammas })
    }

    /// Same as [`PolydiscAuto::new`] with a 1-based permutation.
    pub fn from_one_based(perm: &[usize], gammas: Vec<MoebiusH>) -> Result<Self, PolyautoError> {
        let q = perm.len();
        let zero = perm
            .iter()
            .map(|&p| p.checked_sub(1))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| PolyautoError::InvalidPermutation {
                perm: perm.to_vec(),
                q,
            })?;
        Self::new(zero, gammas)
    }

    /// Coordinatewise map with the identity permutation.
    pub fn diagonal(gammas: Vec<MoebiusH>) -> Result<Self, PolyautoError> {
        Self::new((0..gammas.len()).collect(), gammas)
    }

    pub fn identity(q: usize) -> Self {
        PolydiscAuto {
            perm: (0..q).collect(),
            gammas: vec![MoebiusH::IDENTITY; q],
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn gammas(&self) -> &[MoebiusH] {
        &self.gammas
    }

    fn check_dim(&self, z: &PolyPoint) -> Result<(), GeometryError> {
        if z.dim() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                left: self.dim(),
                right: z.dim(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, z: &PolyPoint) -> Result<PolyPoint, GeometryError> {
        self.check_dim(z)?;
        let coords = self
            .gammas
            .iter()
            .zip(&self.perm)
            .map(|(g, &p)| g.apply(z.coord(p)))
            .collect::<Result<Vec<_>, _>>()?;
        PolyPoint::new(coords)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &PolydiscAuto) -> Result<PolydiscAuto, PolyautoError> {
        if self.dim() != other.dim() {
            return Err(GeometryError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            }
            .into());
        }
        let perm = self.perm.iter().map(|&p| other.perm[p]).collect();
        let gammas = self
            .gammas
            .iter()
            .zip(&self.perm)
            .map(|(g, &p)| g.compose(&other.gammas[p]))
            .collect();
        Ok(PolydiscAuto { perm, gammas })
    }

    pub fn inverse(&self) -> PolydiscAuto {
        let q = self.dim();
        let mut perm = vec![0; q];
        let mut gammas = vec![MoebiusH::IDENTITY; q];
        for (j, &p) in self.perm.iter().enumerate() {
            perm[p] = j;
            gammas[p] = self.gammas[j].inverse();
        }
        PolydiscAuto { perm, gammas }
    }

    /// `n`-th iterate by repeated squaring of the (permutation, matrix) data.
    pub fn iterate(&self, n: i64) -> PolydiscAuto {
        let mut base = if n < 0 { self.inverse() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = PolydiscAuto::identity(self.dim());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base).expect("same dimension");
            }
            base = base.compose(&base).expect("same dimension");
            e >>= 1;
        }
        acc
    }

    /// Cycles of the permutation, each starting at its smallest index, in
    /// order of that index.
    pub fn cycle_decompose(&self) -> CycleDecomposition {
        let q = self.dim();
        let mut seen = vec![false; q];
        let mut blocks = Vec::new();
        for start in 0..q {
            if seen[start] {
                continue;
            }
            let mut order = Vec::new();
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                order.push(j);
                j = self.perm[j];
            }
            let cycle = CycleAuto {
                gammas: order.iter().map(|&j| self.gammas[j]).collect(),
            };
            blocks.push(CycleBlock { order, cycle });
        }
        CycleDecomposition { q, blocks }
    }

    pub fn classify(&self) -> AutoClassification {
        self.classify_with(DEFAULT_EPS_CLS)
    }

    pub fn classify_with(&self, eps: f64) -> AutoClassification {
        let dec = self.cycle_decompose();
        let per_cycle: Vec<CycleClassification> = dec
            .blocks
            .iter()
            .map(|b| {
                let mut c = b.cycle.classify_with(eps);
                c.order = b.order.clone();
                c
            })
            .collect();
        let divergence_rate = per_cycle
            .iter()
            .map(|c| c.divergence_rate)
            .fold(0.0, f64::max);
        let any = |k: AutoKind| per_cycle.iter().any(|c| c.kind == k);
        let kind = if any(AutoKind::Hyperbolic) {
            AutoKind::Hyperbolic
        } else if any(AutoKind::Parabolic) {
            AutoKind::Parabolic
        } else {
            AutoKind::Elliptic
        };
        AutoClassification {
            kind,
            divergence_rate,
            dilation: (-divergence_rate).exp(),
            per_cycle,
        }
    }

    /// Step `s(x) = k(x, τ(x))`; for an isometry the defining sequence
    /// `k(τⁿx, τⁿ⁺¹x)` is constant.
    pub fn step_at(&self, x: &PolyPoint) -> Result<f64, GeometryError> {
        dist_poly(x, &self.apply(x)?)
    }

    /// A fixed point when every cycle is elliptic.
    pub fn fixed_point(&self) -> Option<PolyPoint> {
        self.fixed_point_with(DEFAULT_EPS_CLS)
    }

    pub fn fixed_point_with(&self, eps: f64) -> Option<PolyPoint> {
        let mut coords = vec![PointH::I; self.dim()];
        for block in self.cycle_decompose().blocks {
            let pts = block.cycle.fixed_point_with(eps)?;
            for (&j, p) in block.order.iter().zip(pts.into_coords()) {
                coords[j] = p;
            }
        }
        PolyPoint::new(coords).ok()
    }
}

/// JSON form: `{"space":"H","q":…,"perm":[…1-based…],"gammas":[{"a":…},…]}`.
impl Serialize for PolydiscAuto {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            space: &'static str,
            q: usize,
            perm: Vec<usize>,
            gammas: &'a [MoebiusH],
        }
        Out {
            space: "H",
            q: self.dim(),
            perm: self.perm.iter().map(|p| p + 1).collect(),
            gammas: &self.gammas,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolydiscAuto {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        AutoInput::deserialize(d)?
            .into_auto()
            .map_err(serde::de::Error::custom)
    }
}

/// Coordinates in which an input automorphism is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Space {
    #[default]
    H,
    D,
}

/// A real or `[re, im]` coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Real(f64),
    Complex([f64; 2]),
}

impl Coeff {
    pub fn value(&self) -> Complex64 {
        match *self {
            Coeff::Real(x) => Complex64::new(x, 0.0),
            Coeff::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffMatrix {
    pub a: Coeff,
    pub b: Coeff,
    pub c: Coeff,
    pub d: Coeff,
}

impl CoeffMatrix {
    pub fn values(&self) -> [Complex64; 4] {
        [
            self.a.value(),
            self.b.value(),
            self.c.value(),
            self.d.value(),
        ]
    }
}

/// Raw automorphism input as read from JSON, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoInput {
    #[serde(default)]
    pub space: Space,
    #[serde(default)]
    pub q: Option<usize>,
    pub perm: Vec<usize>,
    pub gammas: Vec<CoeffMatrix>,
}

impl AutoInput {
    pub fn into_auto(self) -> Result<PolydiscAuto, PolyautoError> {
        if let Some(q) = self.q {
            if q != self.perm.len() {
                return Err(PolyautoError::DeclaredDimension {
                    declared: q,
                    actual: self.perm.len(),
                });
            }
        }
        let gammas = self
            .gammas
            .iter()
            .enumerate()
            .map(|(j, m)| match self.space {
                Space::H => real_matrix(j + 1, m.values()),
                Space::D => disc_to_halfplane(j + 1, m.values()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        PolydiscAuto::from_one_based(&self.perm, gammas)
    }
}

fn real_matrix(index: usize, m: [Complex64; 4]) -> Result<MoebiusH, PolyautoError> {
    if m.iter().any(|z| z.im != 0.0) {
        return Err(PolyautoError::NotDiscAutomorphism {
            index,
            reason: "half-plane coefficients must be real".into(),
        });
    }
    Ok(MoebiusH::new(m[0].re, m[1].re, m[2].re, m[3].re)?)
}

/// Conjugates a disc automorphism `w ↦ (aw + b)/(cw + d)` to ℍ through the
/// Cayley transform and removes the common complex phase.
pub fn disc_to_halfplane(index: usize, m: [Complex64; 4]) -> Result<MoebiusH, PolyautoError> {
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    // Cayley z ↦ (z − i)/(z + i) and its inverse w ↦ (iw + i)/(−w + 1).
    let cay = [one, -i, one, i];
    let inv = [i, i, -one, one];
    let mul = |x: [Complex64; 4], y: [Complex64; 4]| {
        [
            x[0] * y[0] + x[1] * y[2],
            x[0] * y[1] + x[1] * y[3],
            x[2] * y[0] + x[3] * y[2],
            x[2] * y[1] + x[3] * y[3],
        ]
    };
    let h = mul(mul(inv, m), cay);
    let pivot = h
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("four entries");
    let scale = pivot.norm();
    if scale == 0.0 || !scale.is_finite() {
        return Err(PolyautoError::NotDiscAutomorphism {
            index,
            reason: "degenerate matrix".into(),
        });
    }
    let phase = pivot.conj() / scale;
    let real: Vec<Complex64> = h.iter().map(|z| z * phase / scale).collect();
    if real.iter().any(|z| z.im.abs() > 1e-9) {
        return Err(PolyautoError::NotDiscAutomorphism {
            index,
            reason: "map does not preserve the unit circle".into(),
        });
    }
    MoebiusH::new(real[0].re, real[1].re, real[2].re, real[3].re).map_err(|e| {
        PolyautoError::NotDiscAutomorphism {
            index,
            reason: e.to_string(),
        }
    })
}

/// `(z_1, …, z_k) ↦ (γ_1(z_2), γ_2(z_3), …, γ_k(z_1))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleAuto {
    gammas: Vec<MoebiusH>,
}

impl CycleAuto {
    pub fn new(gammas: Vec<MoebiusH>) -> Result<Self, PolyautoError> {
        if gammas.is_empty() {
            return Err(PolyautoError::Empty);
        }
        Ok(CycleAuto { gammas })
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn gammas(&self) -> &[MoebiusH] {
        &self.gammas
    }

    /// The same automorphism of ℍ^k written as a [`PolydiscAuto`].
    pub fn to_auto(&self) -> PolydiscAuto {
        let k = self.len();
        PolydiscAuto {
            perm: (0..k).map(|j| (j + 1) % k).collect(),
            gammas: self.gammas.clone(),
        }
    }

    pub fn apply(&self, z: &PolyPoint) -> Result<PolyPoint, GeometryError> {
        self.to_auto().apply(z)
    }

    /// The cycle read from coordinate `shift` onwards: `(γ_{s+1}, …, γ_k, γ_1, …, γ_s)`.
    pub fn reanchored(&self, shift: usize) -> CycleAuto {
        let k = self.len();
        CycleAuto {
            gammas: (0..k).map(|j| self.gammas[(j + shift) % k]).collect(),
        }
    }

    /// `Γ_1 = γ_1 ∘ ⋯ ∘ γ_k` and `Γ_{j+1} = γ_j⁻¹ ∘ Γ_j ∘ γ_j`; `τ^k` acts
    /// coordinatewise as `(Γ_1, …, Γ_k)`.
    pub fn gamma_products(&self) -> Vec<MoebiusH> {
        let first = self
            .gammas
            .iter()
            .fold(MoebiusH::IDENTITY, |acc, g| acc.compose(g));
        let mut out = Vec::with_capacity(self.len());
        out.push(first);
        for g in &self.gammas[..self.len() - 1] {
            let last = out.last().expect("non-empty");
            out.push(g.inverse().compose(last).compose(g));
        }
        out
    }

    pub fn classify(&self) -> CycleClassification {
        self.classify_with(DEFAULT_EPS_CLS)
    }

    pub fn classify_with(&self, eps: f64) -> CycleClassification {
        let k = self.len();
        let gamma1 = self.gamma_products()[0];
        let cls = gamma1.classify_with(eps);
        let kf = k as f64;
        let (kind, dilation, multiplier, divergence_rate) = match cls.kind {
            MoebiusKind::Identity => (
                AutoKind::Elliptic,
                None,
                Some(Complex64::new(1.0, 0.0)),
                0.0,
            ),
            MoebiusKind::Elliptic => {
                let m = cls.multiplier.expect("elliptic multiplier");
                (
                    AutoKind::Elliptic,
                    None,
                    Some(Complex64::from_polar(1.0, m.arg() / kf)),
                    0.0,
                )
            }
            MoebiusKind::Parabolic => (AutoKind::Parabolic, Some(1.0), None, 0.0),
            MoebiusKind::Hyperbolic => {
                let c = gamma1.divergence_rate_with(eps) / kf;
                (AutoKind::Hyperbolic, Some((-c).exp()), None, c)
            }
        };
        CycleClassification {
            kind,
            k,
            order: (0..k).collect(),
            dilation,
            multiplier,
            divergence_rate,
            gamma1: cls,
        }
    }

    /// Fixed point of an elliptic cycle: `p` fixed by `Γ_1` (or `i` when
    /// `Γ_1` is the identity), then `z_{j+1} = γ_j⁻¹(z_j)`.
    pub fn fixed_point_with(&self, eps: f64) -> Option<PolyPoint> {
        let gamma1 = self.gamma_products()[0];
        let cls = gamma1.classify_with(eps);
        let p = match cls.kind {
            MoebiusKind::Identity => PointH::I,
            MoebiusKind::Elliptic => cls.fixed_point_interior?,
            _ => return None,
        };
        let mut pts = vec![p];
        for g in &self.gammas[..self.len() - 1] {
            let next = g.inverse().apply(pts.last().expect("non-empty")).ok()?;
            pts.push(next);
        }
        PolyPoint::new(pts).ok()
    }
}

/// One cycle of the permutation: `order[i]` is the original coordinate
/// carried by slot `i` of `cycle`, and `order[i + 1] = p(order[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleBlock {
    #[serde(with = "one_based")]
    pub order: Vec<usize>,
    pub cycle: CycleAuto,
}

impl CycleBlock {
    /// The index set `J_ν`, sorted.
    pub fn indices(&self) -> Vec<usize> {
        let mut v = self.order.clone();
        v.sort_unstable();
        v
    }

    /// Projection `π̄_ν: ℍ^q → ℍ^k`.
    pub fn project(&self, z: &PolyPoint) -> Result<PolyPoint, GeometryError> {
        PolyPoint::new(self.order.iter().map(|&j| *z.coord(j)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleDecomposition {
    pub q: usize,
    pub blocks: Vec<CycleBlock>,
}

impl CycleDecomposition {
    /// Rebuilds the automorphism the blocks came from.
    pub fn reassemble(&self) -> Result<PolydiscAuto, PolyautoError> {
        let mut perm = vec![usize::MAX; self.q];
        let mut gammas = vec![MoebiusH::IDENTITY; self.q];
        for b in &self.blocks {
            let k = b.order.len();
            for i in 0..k {
                let j = *b.order.get(i).ok_or(PolyautoError::Empty)?;
                if j >= self.q {
                    return Err(PolyautoError::InvalidPermutation {
                        perm: b.order.iter().map(|p| p + 1).collect(),
                        q: self.q,
                    });
                }
                perm[j] = b.order[(i + 1) % k];
                gammas[j] = b.cycle.gammas[i];
            }
        }
        PolydiscAuto::new(perm, gammas)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleClassification {
    pub kind: AutoKind,
    pub k: usize,
    /// Original coordinates of the cycle, in cycle order.
    #[serde(with = "one_based")]
    pub order: Vec<usize>,
    /// `λ_τ = λ_{Γ_1}^{1/k}` for hyperbolic and parabolic cycles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilation: Option<f64>,
    /// Principal `k`-th root of `Γ_1′(p)` for elliptic cycles; the other
    /// multipliers differ from it by `k`-th roots of unity.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_complex::option"
    )]
    pub multiplier: Option<Complex64>,
    pub divergence_rate: f64,
    pub gamma1: DiscAutoClassification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoClassification {
    pub kind: AutoKind,
    pub divergence_rate: f64,
    /// `e^{−divergence_rate}`.
    pub dilation: f64,
    pub per_cycle: Vec<CycleClassification>,
}

pub(crate) mod one_based {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[usize], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|j| j + 1).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
        Vec::<usize>::deserialize(d)?
            .into_iter()
            .map(|j| {
                j.checked_sub(1)
                    .ok_or_else(|| serde::de::Error::custom("indices are 1-based"))
            })
            .collect()
    }
}
