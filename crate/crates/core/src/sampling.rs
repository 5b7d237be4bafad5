//! Seeded random points, Möbius maps and automorphisms.
//!
//! Every generator takes an explicit RNG; [`rng`] builds the reproducible
//! ChaCha stream used throughout the crate.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{PointH, PolyPoint};
use crate::moebius::MoebiusH;
use crate::polyauto::{AutoKind, CycleAuto, CycleBlock, CycleDecomposition, PolydiscAuto};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Re ∈ [−3, 3]`, `Im` log-uniform in `[0.1, 10]`.
pub fn point_h<R: Rng + ?Sized>(rng: &mut R) -> PointH {
    let re = rng.gen_range(-3.0..=3.0);
    let im = 10f64.powf(rng.gen_range(-1.0..=1.0));
    PointH::from_parts(re, im).expect("sample box lies in the half-plane")
}

pub fn poly_point<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PolyPoint {
    PolyPoint::new((0..dim).map(|_| point_h(rng)).collect()).expect("positive dimension")
}

/// `n` points of ℍ^dim from the stream seeded by `seed`.
pub fn poly_points(dim: usize, n: usize, seed: u64) -> Vec<PolyPoint> {
    let mut r = rng(seed);
    (0..n).map(|_| poly_point(&mut r, dim)).collect()
}

/// Matrix entries uniform in `[−bound, bound]`, redrawn until `ad − bc > 0`.
pub fn moebius_entries<R: Rng + ?Sized>(rng: &mut R, bound: f64) -> MoebiusH {
    loop {
        let mut e = || rng.gen_range(-bound..=bound);
        let (a, b, c, d) = (e(), e(), e(), e());
        if let Ok(m) = MoebiusH::new(a, b, c, d) {
            return m;
        }
    }
}

/// `K(θ)·A(s)·N(t)` with `θ` uniform, `ln s` and `t` uniform in
/// `[−spread, spread]`.
pub fn moebius_iwasawa<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> MoebiusH {
    let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let ln_s = rng.gen_range(-spread..=spread);
    let t = rng.gen_range(-spread..=spread);
    let k = MoebiusH::rotation_about_i(theta);
    let a = MoebiusH::dilation(ln_s.exp()).expect("positive factor");
    k.compose(&a).compose(&MoebiusH::translation(t))
}

pub fn cycle_entries<R: Rng + ?Sized>(rng: &mut R, k: usize, bound: f64) -> CycleAuto {
    CycleAuto::new((0..k).map(|_| moebius_entries(rng, bound)).collect()).expect("k ≥ 1")
}

/// A uniformly random permutation of `0..q` with coordinate maps drawn by `gen`.
pub fn auto_with<R, G>(rng: &mut R, q: usize, mut gen: G) -> PolydiscAuto
where
    R: Rng + ?Sized,
    G: FnMut(&mut R) -> MoebiusH,
{
    let mut perm: Vec<usize> = (0..q).collect();
    perm.shuffle(rng);
    let gammas = (0..q).map(|_| gen(rng)).collect();
    PolydiscAuto::new(perm, gammas).expect("valid permutation")
}

/// A cycle whose `Γ_1` is conjugate to a prescribed model: per-step dilations
/// with rates in `[0.01, 0.06]` (hyperbolic), translations of common sign with
/// length in `[0.1, 1]` (parabolic), or rotations (elliptic). Each step is
/// `γ_j = h_j ∘ C_j ∘ h_{j+1}⁻¹` with random `h_j`, so the model survives
/// the product.
pub fn cycle_of_kind<R: Rng + ?Sized>(rng: &mut R, k: usize, kind: AutoKind) -> CycleAuto {
    let hs: Vec<MoebiusH> = (0..k).map(|_| moebius_iwasawa(rng, 0.5)).collect();
    let sign: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let models: Vec<MoebiusH> = (0..k)
        .map(|_| match kind {
            AutoKind::Hyperbolic => MoebiusH::dilation((sign * rng.gen_range(0.01..=0.06)).exp())
                .expect("positive factor"),
            AutoKind::Parabolic => MoebiusH::translation(sign * rng.gen_range(0.1..=1.0)),
            AutoKind::Elliptic => MoebiusH::rotation_about_i(rng.gen_range(-1.5..=1.5)),
        })
        .collect();
    let gammas = (0..k)
        .map(|j| {
            hs[j]
                .compose(&models[j])
                .compose(&hs[(j + 1) % k].inverse())
        })
        .collect();
    CycleAuto::new(gammas).expect("k ≥ 1")
}

/// A random automorphism of ℍ^q of the given kind: a random permutation
/// whose cycles are filled by [`cycle_of_kind`]. Hyperbolic automorphisms
/// may also carry parabolic and elliptic cycles; parabolic ones also
/// elliptic cycles.
pub fn auto_of_kind<R: Rng + ?Sized>(rng: &mut R, q: usize, kind: AutoKind) -> PolydiscAuto {
    let skeleton = auto_with(rng, q, |_| MoebiusH::IDENTITY).cycle_decompose();
    let n = skeleton.blocks.len();
    let lead = rng.gen_range(0..n);
    let blocks = skeleton
        .blocks
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            let cycle_kind = if i == lead {
                kind
            } else {
                let options: &[AutoKind] = match kind {
                    AutoKind::Hyperbolic => &[
                        AutoKind::Hyperbolic,
                        AutoKind::Parabolic,
                        AutoKind::Elliptic,
                    ],
                    AutoKind::Parabolic => &[AutoKind::Parabolic, AutoKind::Elliptic],
                    AutoKind::Elliptic => &[AutoKind::Elliptic],
                };
                *options.choose(rng).expect("non-empty")
            };
            CycleBlock {
                cycle: cycle_of_kind(rng, b.order.len(), cycle_kind),
                order: b.order,
            }
        })
        .collect();
    CycleDecomposition { q, blocks }
        .reassemble()
        .expect("blocks come from a permutation")
}
