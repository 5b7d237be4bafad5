//! Points of the upper half-plane, the unit disc and their products, with
//! the invariant distances every other module measures with.
//!
//! Distances use the curvature −1 normalization
//! `k_Δ(0, r) = log((1 + r) / (1 − r))`, so that `k_ℍ(i, μ i) = log μ` and the
//! divergence rate of `z ↦ μ z` is `log μ`.

pub(crate) mod scaled;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub(crate) use scaled::Scaled;

/// Plain `f64` storage is used while `|ln |z|| ≤ PLAIN_LN_LIMIT`.
const PLAIN_LN_LIMIT: f64 = 230.0;

/// Plain storage also needs `Im z` at least this large.
pub(crate) const PLAIN_MIN_IM: f64 = 1e-290;

/// `ln(Im z / |Re z|)` below which a point is stored thin.
const THIN_LN_RATIO: f64 = -640.0;

/// Relative distance to the boundary below which points are flagged.
pub const BOUNDARY_FLAG_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point {re} + {im}i is not in the upper half-plane")]
    NotInHalfPlane { re: f64, im: f64 },
    #[error("point {re} + {im}i is not in the unit disc")]
    NotInDisc { re: f64, im: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("a poly-point needs at least one coordinate")]
    EmptyPoint,
    #[error("imaginary part underflowed: the point reached the boundary at working precision")]
    Underflow,
}

/// A point of the upper half-plane ℍ.
///
/// Stored as `m · e^e` together with `ln_im = ln Im z`; `e == 0` whenever the
/// point is within plain `f64` range, so ordinary points compare and print as
/// their complex value. A point whose imaginary part is negligible next to its
/// real part at any working precision (an orbit closing in on a finite
/// boundary point) is *thin*: `m` holds only the sign of the real part and
/// `Im z` lives in `ln_im` alone.
#[derive(Clone, Copy, PartialEq)]
pub struct PointH {
    m: Complex64,
    e: f64,
    ln_im: f64,
}

impl PointH {
    pub const I: PointH = PointH {
        m: Complex64 { re: 0.0, im: 1.0 },
        e: 0.0,
        ln_im: 0.0,
    };

    pub fn new(z: Complex64) -> Result<Self, GeometryError> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if z.im <= 0.0 {
            return Err(GeometryError::NotInHalfPlane { re: z.re, im: z.im });
        }
        let r = z.norm();
        if r.is_finite() && r.ln().abs() <= PLAIN_LN_LIMIT && z.im >= PLAIN_MIN_IM {
            return Ok(PointH {
                m: z,
                e: 0.0,
                ln_im: z.im.ln(),
            });
        }
        Self::from_scaled(Scaled::from_complex(z))
    }

    pub fn from_parts(re: f64, im: f64) -> Result<Self, GeometryError> {
        Self::new(Complex64::new(re, im))
    }

    /// Point `e^{ln_modulus + i·arg}` with `arg ∈ (0, π)`.
    pub fn from_polar_ln(ln_modulus: f64, arg: f64) -> Result<Self, GeometryError> {
        if !ln_modulus.is_finite() || !arg.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Self::from_scaled(Scaled::new(Complex64::from_polar(1.0, arg), ln_modulus))
    }

    pub(crate) fn from_scaled(s: Scaled) -> Result<Self, GeometryError> {
        if !s.e.is_finite() || !s.m.re.is_finite() || !s.m.im.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if s.is_zero() || s.m.im <= 0.0 {
            return Err(GeometryError::NotInHalfPlane {
                re: s.m.re,
                im: s.m.im,
            });
        }
        if s.e.abs() <= PLAIN_LN_LIMIT {
            let z = s.to_complex();
            if z.im >= PLAIN_MIN_IM {
                return Ok(PointH {
                    m: z,
                    e: 0.0,
                    ln_im: z.im.ln(),
                });
            }
        }
        Ok(PointH {
            m: s.m,
            e: s.e,
            ln_im: s.e + s.m.im.ln(),
        })
    }

    /// Builds a point from a real part `sign · e^{ln_re}` and `Im = e^{ln_im}`.
    pub(crate) fn from_re_ln_im(
        re_sign: f64,
        ln_re: f64,
        ln_im: f64,
    ) -> Result<Self, GeometryError> {
        if ln_im.is_nan() || ln_im == f64::INFINITY || ln_re.is_nan() || ln_re == f64::INFINITY {
            return Err(GeometryError::NonFinite);
        }
        if ln_im == f64::NEG_INFINITY {
            return Err(GeometryError::Underflow);
        }
        if re_sign != 0.0 && ln_im - ln_re < THIN_LN_RATIO {
            return Ok(PointH {
                m: Complex64::new(re_sign.signum(), 0.0),
                e: ln_re,
                ln_im,
            });
        }
        let top = if re_sign == 0.0 {
            ln_im
        } else {
            ln_re.max(ln_im)
        };
        let re = if re_sign == 0.0 {
            0.0
        } else {
            re_sign * (ln_re - top).exp()
        };
        let im = (ln_im - top).exp();
        Self::from_scaled(Scaled::new(Complex64::new(re, im), top))
    }

    pub(crate) fn scaled(&self) -> Scaled {
        Scaled::new(self.m, self.e)
    }

    /// The real part alone, in extended range.
    fn re_scaled(&self) -> Scaled {
        Scaled::new(Complex64::new(self.m.re, 0.0), self.e)
    }

    /// Whether the point is held as a plain `f64` complex number.
    pub fn is_plain(&self) -> bool {
        self.e == 0.0 && self.m.im >= PLAIN_MIN_IM
    }

    /// Whether `Im z` is below the resolution of the real part.
    pub fn is_thin(&self) -> bool {
        self.m.im == 0.0
    }

    /// The complex value; overflows to infinity (or underflows to zero) for
    /// points outside `f64` range.
    pub fn value(&self) -> Complex64 {
        if self.is_plain() {
            self.m
        } else if self.is_thin() {
            Complex64::new(self.m.re * self.e.exp(), self.ln_im.exp())
        } else {
            self.m * self.e.exp()
        }
    }

    pub fn re(&self) -> f64 {
        self.value().re
    }

    pub fn im(&self) -> f64 {
        self.value().im
    }

    /// `ln Im z`, finite for every valid point.
    pub fn ln_im(&self) -> f64 {
        self.ln_im
    }

    /// `ln |z|`, finite for every valid point.
    pub fn ln_abs(&self) -> f64 {
        self.e + self.m.norm().ln()
    }

    /// Argument of `z` in `(0, π)`.
    pub fn arg(&self) -> f64 {
        if self.is_thin() {
            let t = (self.ln_im - self.e).exp();
            return if self.m.re > 0.0 {
                t
            } else {
                std::f64::consts::PI - t
            };
        }
        self.m.arg()
    }

    /// `e^{ln_factor} · z`.
    pub fn dilate(&self, ln_factor: f64) -> Result<PointH, GeometryError> {
        if self.is_thin() {
            let (e, ln_im) = (self.e + ln_factor, self.ln_im + ln_factor);
            if !e.is_finite() || !ln_im.is_finite() {
                return Err(GeometryError::NonFinite);
            }
            return Ok(PointH {
                m: self.m,
                e,
                ln_im,
            });
        }
        Self::from_scaled(Scaled::new(self.m, self.e + ln_factor))
    }

    /// `z + t` for real `t`.
    pub fn translate(&self, t: f64) -> Result<PointH, GeometryError> {
        if self.is_plain() {
            let z = self.m + t;
            if z.im >= PLAIN_MIN_IM {
                return Self::new(z);
            }
        }
        let (sign, ln_re) = self.re_scaled().add(Scaled::from_real(t)).re_parts();
        Self::from_re_ln_im(sign, ln_re, self.ln_im)
    }

    /// Arithmetic mean of a non-empty list of points.
    pub fn mean(points: &[PointH]) -> Result<PointH, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::EmptyPoint);
        }
        if points.iter().all(|p| p.is_plain()) {
            let sum: Complex64 = points.iter().map(|p| p.m).sum();
            let z = sum / points.len() as f64;
            if z.re.is_finite() && z.im >= PLAIN_MIN_IM {
                return Self::new(z);
            }
        }
        let ln_n = (points.len() as f64).ln();
        let re = points
            .iter()
            .fold(Scaled::ZERO, |acc, p| acc.add(p.re_scaled()));
        let (sign, ln_re) = re.re_parts();
        let ln_im = ln_sum_exp(points.iter().map(|p| p.ln_im)) - ln_n;
        Self::from_re_ln_im(sign, ln_re - ln_n, ln_im)
    }

    /// Flags points whose imaginary part is tiny relative to their modulus;
    /// distances involving it lose precision.
    pub fn near_boundary(&self) -> bool {
        if self.is_thin() {
            return true;
        }
        let rel = self.m.im / self.m.norm().max(1.0);
        rel < BOUNDARY_FLAG_TOL || self.ln_abs() > -BOUNDARY_FLAG_TOL.ln()
    }
}

/// `ln(e^a + e^b + …)` without overflow.
fn ln_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// `ln |e^a − e^b|`.
fn ln_diff_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == lo {
        return f64::NEG_INFINITY;
    }
    hi + (-(lo - hi).exp_m1()).ln()
}

/// `ln √(e^{2a} + e^{2b})`.
pub(crate) fn ln_hypot(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + 0.5 * (2.0 * (lo - hi)).exp().ln_1p()
}

impl fmt::Debug for PointH {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_plain() {
            write!(f, "PointH({} + {}i)", self.m.re, self.m.im)
        } else if self.is_thin() {
            write!(f, "PointH({}·e^{} + i·e^{})", self.m.re, self.e, self.ln_im)
        } else {
            write!(f, "PointH(({} + {}i)·e^{})", self.m.re, self.m.im, self.e)
        }
    }
}

impl Serialize for PointH {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let z = self.value();
        [z.re, z.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointH {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        PointH::from_parts(re, im).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<Complex64> for PointH {
    type Error = GeometryError;

    fn try_from(z: Complex64) -> Result<Self, Self::Error> {
        PointH::new(z)
    }
}

/// A point of the unit disc Δ.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct PointD(Complex64);

impl PointD {
    pub const ORIGIN: PointD = PointD(Complex64 { re: 0.0, im: 0.0 });

    pub fn new(w: Complex64) -> Result<Self, GeometryError> {
        if !w.re.is_finite() || !w.im.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if w.norm() >= 1.0 {
            return Err(GeometryError::NotInDisc { re: w.re, im: w.im });
        }
        Ok(PointD(w))
    }

    pub fn from_parts(re: f64, im: f64) -> Result<Self, GeometryError> {
        Self::new(Complex64::new(re, im))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn near_boundary(&self) -> bool {
        1.0 - self.0.norm() < BOUNDARY_FLAG_TOL
    }
}

impl Serialize for PointD {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointD {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        PointD::from_parts(re, im).map_err(serde::de::Error::custom)
    }
}

/// A point `(z_1, …, z_q)` of the poly-halfplane ℍ^q.
#[derive(Clone, PartialEq, Debug, Serialize)]
#[serde(transparent)]
pub struct PolyPoint(Vec<PointH>);

impl PolyPoint {
    pub fn new(coords: Vec<PointH>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::EmptyPoint);
        }
        Ok(PolyPoint(coords))
    }

    pub fn from_complex(coords: &[Complex64]) -> Result<Self, GeometryError> {
        let pts = coords
            .iter()
            .map(|&z| PointH::new(z))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(pts)
    }

    /// The point `(i, i, …, i)`.
    pub fn center(dim: usize) -> Self {
        PolyPoint(vec![PointH::I; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[PointH] {
        &self.0
    }

    pub fn coord(&self, j: usize) -> &PointH {
        &self.0[j]
    }

    pub fn into_coords(self) -> Vec<PointH> {
        self.0
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.0.iter().map(PointH::value).collect()
    }
}

impl<'de> Deserialize<'de> for PolyPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let coords = Vec::<PointH>::deserialize(d)?;
        PolyPoint::new(coords).map_err(serde::de::Error::custom)
    }
}

/// Converts `ln X` into `2·asinh(X)` without overflowing for huge `X`.
fn two_asinh_from_ln(ln_x: f64) -> f64 {
    if ln_x == f64::NEG_INFINITY {
        0.0
    } else if ln_x < 300.0 {
        2.0 * ln_x.exp().asinh()
    } else {
        // asinh(X) = ln(2X) + O(X^-2)
        2.0 * (ln_x + std::f64::consts::LN_2)
    }
}

/// Distance on ℍ: `log((|z−w̄| + |z−w|) / (|z−w̄| − |z−w|))`.
///
/// Evaluated as `2·asinh(|z − w| / (2√(Im z · Im w)))`, which is the same
/// quantity without the cancellation in the denominator.
pub fn dist_halfplane(z: &PointH, w: &PointH) -> f64 {
    if z.is_plain() && w.is_plain() {
        let (a, b) = (z.m, w.m);
        let x = (a - b).norm() / (2.0 * (a.im * b.im).sqrt());
        return 2.0 * x.asinh();
    }
    let ln_re = z.re_scaled().sub(w.re_scaled()).ln_abs();
    let ln_diff = ln_hypot(ln_re, ln_diff_exp(z.ln_im, w.ln_im));
    let ln_x = ln_diff - std::f64::consts::LN_2 - 0.5 * (z.ln_im + w.ln_im);
    two_asinh_from_ln(ln_x)
}

/// Distance on Δ: `log((1 + ρ) / (1 − ρ))` with `ρ = |z − w| / |1 − z̄w|`.
pub fn dist_disc(z: &PointD, w: &PointD) -> f64 {
    let (a, b) = (z.0, w.0);
    let ra = a.norm();
    let rb = b.norm();
    let da = (1.0 - ra) * (1.0 + ra);
    let db = (1.0 - rb) * (1.0 + rb);
    let x = (a - b).norm() / (da * db).sqrt();
    2.0 * x.asinh()
}

/// Distance on ℍ^q: the maximum of the coordinate distances.
pub fn dist_poly(z: &PolyPoint, w: &PolyPoint) -> Result<f64, GeometryError> {
    if z.dim() != w.dim() {
        return Err(GeometryError::DimensionMismatch {
            left: z.dim(),
            right: w.dim(),
        });
    }
    Ok(z.0
        .iter()
        .zip(&w.0)
        .map(|(a, b)| dist_halfplane(a, b))
        .fold(0.0, f64::max))
}

/// Cayley transform `z ↦ (z − i)/(z + i)`, ℍ → Δ.
pub fn cayley(z: &PointH) -> Result<PointD, GeometryError> {
    if z.is_plain() {
        let i = Complex64::i();
        return PointD::new((z.m - i) / (z.m + i));
    }
    let i = Scaled::from_complex(Complex64::i());
    let s = z.scaled();
    let w = s.sub(i).div(s.add(i)).to_complex();
    PointD::new(w)
}

/// Inverse Cayley transform `w ↦ i(1 + w)/(1 − w)`, Δ → ℍ.
pub fn cayley_inv(w: &PointD) -> Result<PointH, GeometryError> {
    let w = w.0;
    let one = Complex64::new(1.0, 0.0);
    let den = one - w;
    let den2 = den.norm_sqr();
    // Im = (1 − |w|²)/|1 − w|², computed without cancellation.
    let r = w.norm();
    let im = (1.0 - r) * (1.0 + r) / den2;
    let re = -2.0 * w.im / den2;
    PointH::new(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(re: f64, im: f64) -> PointH {
        PointH::from_parts(re, im).unwrap()
    }

    #[test]
    fn halfplane_examples() {
        assert!((dist_halfplane(&h(0.0, 1.0), &h(0.0, 2.0)) - 2f64.ln()).abs() < 1e-15);
        let z = h(0.3, 0.7);
        assert_eq!(dist_halfplane(&z, &z), 0.0);
        let golden = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((dist_halfplane(&h(0.0, 1.0), &h(1.0, 1.0)) - golden).abs() < 1e-15);
        assert!((golden - 0.962424).abs() < 1e-6);
    }

    #[test]
    fn halfplane_matches_log_ratio_form() {
        // Textbook form log((|z−w̄|+|z−w|)/(|z−w̄|−|z−w|)), fine away from z = w.
        let z = h(-0.4, 0.25);
        let w = h(1.7, 3.0);
        let a = (z.value() - w.value().conj()).norm();
        let b = (z.value() - w.value()).norm();
        let direct = ((a + b) / (a - b)).ln();
        assert!((dist_halfplane(&z, &w) - direct).abs() < 1e-13);
    }

    #[test]
    fn disc_examples() {
        let o = PointD::ORIGIN;
        let half = PointD::from_parts(0.5, 0.0).unwrap();
        assert!((dist_disc(&o, &half) - 3f64.ln()).abs() < 1e-15);
        assert_eq!(dist_disc(&half, &half), 0.0);
    }

    #[test]
    fn cayley_examples() {
        let w = cayley(&PointH::I).unwrap();
        assert!(w.value().norm() < 1e-16);
        let w = cayley(&h(0.0, 2.0)).unwrap();
        assert!((w.value() - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-16);
        let z = h(-2.5, 0.01);
        let back = cayley_inv(&cayley(&z).unwrap()).unwrap();
        assert!((back.value() - z.value()).norm() < 1e-14);
    }

    #[test]
    fn disc_and_halfplane_agree_under_cayley() {
        for r in [0.0, 0.1, 0.5, 0.9, 0.999] {
            let a = PointD::ORIGIN;
            let b = PointD::from_parts(r, 0.0).unwrap();
            let za = cayley_inv(&a).unwrap();
            let zb = cayley_inv(&b).unwrap();
            assert!((dist_disc(&a, &b) - dist_halfplane(&za, &zb)).abs() < 1e-12);
        }
    }

    #[test]
    fn poly_examples() {
        let z = PolyPoint::new(vec![PointH::I, PointH::I]).unwrap();
        let w = PolyPoint::new(vec![h(0.0, 2.0), h(0.0, 5.0)]).unwrap();
        assert!((dist_poly(&z, &w).unwrap() - 5f64.ln()).abs() < 1e-15);
        assert_eq!(dist_poly(&z, &z).unwrap(), 0.0);
        let one = PolyPoint::new(vec![h(0.2, 0.3)]).unwrap();
        let two = PolyPoint::new(vec![h(-1.0, 4.0)]).unwrap();
        assert_eq!(
            dist_poly(&one, &two).unwrap(),
            dist_halfplane(&one.coords()[0], &two.coords()[0])
        );
        assert!(matches!(
            dist_poly(&z, &one),
            Err(GeometryError::DimensionMismatch { left: 2, right: 1 })
        ));
    }

    #[test]
    fn rejects_invalid_points() {
        assert!(PointH::from_parts(0.0, 0.0).is_err());
        assert!(PointH::from_parts(1.0, -1.0).is_err());
        assert!(PointH::from_parts(f64::NAN, 1.0).is_err());
        assert!(PointD::from_parts(1.0, 0.0).is_err());
        assert!(PolyPoint::new(vec![]).is_err());
    }

    #[test]
    fn boundary_points_are_flagged() {
        assert!(h(0.0, 1e-13).near_boundary());
        assert!(!h(0.0, 1e-3).near_boundary());
        assert!(PointD::from_parts(1.0 - 1e-13, 0.0)
            .unwrap()
            .near_boundary());
    }

    #[test]
    fn distance_between_far_scaled_points() {
        // k(i, e^{t} i) = t holds exactly far beyond f64 range.
        let far = PointH::I.dilate(4712.0).unwrap();
        assert!(!far.is_plain());
        assert!((dist_halfplane(&PointH::I, &far) - 4712.0).abs() < 1e-9);
        let farther = far.dilate(0.5).unwrap();
        assert!((dist_halfplane(&far, &farther) - 0.5).abs() < 1e-12);
        let tilted = PointH::from_polar_ln(4712.0, 0.3).unwrap();
        let expect = dist_halfplane(
            &PointH::I,
            &PointH::new(Complex64::from_polar(1.0, 0.3)).unwrap(),
        );
        assert!((dist_halfplane(&far, &tilted) - expect).abs() < 1e-9);
    }

    #[test]
    fn thin_points_keep_their_imaginary_part() {
        // 0.5 + i·e^{-3000}: far below f64 resolution next to the real part.
        let z = h(0.5, 1.0)
            .translate(-0.5)
            .unwrap()
            .dilate(-3000.0)
            .unwrap()
            .translate(0.5)
            .unwrap();
        assert!(z.is_thin());
        assert!((z.ln_im() + 3000.0).abs() < 1e-12);
        assert_eq!(z.re(), 0.5);
        assert!(z.near_boundary());
        // Vertical geodesic through 0.5: k(0.5 + i, 0.5 + i e^{-t}) = t.
        assert!((dist_halfplane(&h(0.5, 1.0), &z) - 3000.0).abs() < 1e-9);
        let w = z.dilate(0.0).unwrap().translate(0.0).unwrap();
        assert_eq!(dist_halfplane(&z, &w), 0.0);
        let m = PointH::mean(&[z, z]).unwrap();
        assert!((m.ln_im() - z.ln_im()).abs() < 1e-12);
        assert!(cayley(&z).is_err());
    }
}
