//! Automorphisms of the upper half-plane as normalized real 2×2 matrices,
//! their dynamical classification, and the one-variable conjugators used to
//! bring cycle automorphisms to normal form.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::geometry::{ln_hypot, GeometryError, PointD, PointH, Scaled, PLAIN_MIN_IM};

/// Default absolute tolerance on `|trace| − 2` for parabolic detection.
pub const DEFAULT_EPS_CLS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoebiusError {
    #[error("matrix coefficients must be finite")]
    NonFinite,
    #[error("determinant {det} is not positive; the map does not preserve the upper half-plane")]
    NonPositiveDeterminant { det: f64 },
    #[error("expected a {expected} map, found {found}")]
    WrongKind {
        expected: MoebiusKind,
        found: MoebiusKind,
    },
    #[error("map does not send the upper half-plane onto the unit disc")]
    NotHalfPlaneToDisc,
}

/// A point of `ℝ ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    fn from_f64(x: f64) -> Self {
        if x.is_finite() {
            ExtReal::Finite(x)
        } else {
            ExtReal::Infinity
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinity)
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(ExtReal::Finite(x)),
            Raw::Str(s) if s == "inf" => Ok(ExtReal::Infinity),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoebiusKind {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl fmt::Display for MoebiusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoebiusKind::Identity => "identity",
            MoebiusKind::Elliptic => "elliptic",
            MoebiusKind::Parabolic => "parabolic",
            MoebiusKind::Hyperbolic => "hyperbolic",
        })
    }
}

/// `z ↦ (az + b)/(cz + d)` with real coefficients, `ad − bc = 1`, `a + d ≥ 0`
/// (ties broken by `a ≥ 0`, then `c > 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoebiusH {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl MoebiusH {
    pub const IDENTITY: MoebiusH = MoebiusH {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, MoebiusError> {
        if ![a, b, c, d].iter().all(|x| x.is_finite()) {
            return Err(MoebiusError::NonFinite);
        }
        let det = a * d - b * c;
        if !(det.is_finite() && det > 0.0) {
            return Err(MoebiusError::NonPositiveDeterminant { det });
        }
        // Already-normalized input is kept bit-for-bit so renormalizing is idempotent.
        let s = if (det - 1.0).abs() <= 4.0 * f64::EPSILON {
            1.0
        } else {
            det.sqrt()
        };
        let (mut a, mut b, mut c, mut d) = (a / s, b / s, c / s, d / s);
        let t = a + d;
        let flip = t < 0.0 || (t == 0.0 && (a < 0.0 || (a == 0.0 && c < 0.0)));
        if flip {
            a = -a;
            b = -b;
            c = -c;
            d = -d;
        }
        // `+ 0.0` folds negative zeros so equal maps compare equal.
        Ok(MoebiusH {
            a: a + 0.0,
            b: b + 0.0,
            c: c + 0.0,
            d: d + 0.0,
        })
    }

    /// `z ↦ z + t`.
    pub fn translation(t: f64) -> Self {
        MoebiusH::new(1.0, t, 0.0, 1.0).expect("translations are automorphisms")
    }

    /// `z ↦ s·z`, `s > 0`.
    pub fn dilation(s: f64) -> Result<Self, MoebiusError> {
        MoebiusH::new(s, 0.0, 0.0, 1.0)
    }

    /// Elliptic map fixing `i` with multiplier `e^{−2iθ}`.
    pub fn rotation_about_i(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        MoebiusH::new(c, -s, s, c).expect("rotations are automorphisms")
    }

    /// `z ↦ −1/z`.
    pub fn inversion() -> Self {
        MoebiusH::new(0.0, -1.0, 1.0, 0.0).expect("inversion is an automorphism")
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Evaluation at an arbitrary complex number. The imaginary part is
    /// computed as `Im z / |cz + d|²`, which keeps its relative accuracy near
    /// the real axis.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let (x, y) = (z.re, z.im);
        let dr = self.c * x + self.d;
        let di = self.c * y;
        let den = dr * dr + di * di;
        let re = ((self.a * x + self.b) * dr + self.a * self.c * y * y) / den;
        Complex64::new(re, y / den)
    }

    pub fn apply(&self, z: &PointH) -> Result<PointH, GeometryError> {
        if z.is_plain() {
            let z = z.value();
            let den = z * self.c + self.d;
            // Im(γz) = Im z / |cz + d|² keeps full relative precision.
            let w = Complex64::new(self.eval(z).re, z.im / den.norm_sqr());
            if w.re.is_finite() && w.im.is_finite() && w.im >= PLAIN_MIN_IM {
                return PointH::new(w);
            }
        }
        let s = z.scaled();
        let num = s.scale_real(self.a).add(Scaled::from_real(self.b));
        let den = s.scale_real(self.c).add(Scaled::from_real(self.d));
        let q = num.div(den);
        let ln_den = if z.is_thin() {
            ln_hypot(den.ln_abs(), self.c.abs().ln() + z.ln_im())
        } else {
            den.ln_abs()
        };
        let ln_im = z.ln_im() - 2.0 * ln_den;
        let (sign, ln_re) = q.re_parts();
        PointH::from_re_ln_im(sign, ln_re, ln_im)
    }

    /// Action on the boundary `ℝ ∪ {∞}`; `∞ ↦ a/c`.
    pub fn eval_ext(&self, x: ExtReal) -> ExtReal {
        match x {
            ExtReal::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    ExtReal::Infinity
                } else {
                    ExtReal::from_f64((self.a * x + self.b) / den)
                }
            }
            ExtReal::Infinity => {
                if self.c == 0.0 {
                    ExtReal::Infinity
                } else {
                    ExtReal::Finite(self.a / self.c)
                }
            }
        }
    }

    /// `z ↦ 1/(cz + d)²`.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let den = z * self.c + self.d;
        (den * den).inv()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MoebiusH) -> MoebiusH {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let (e, f, g, h) = (other.a, other.b, other.c, other.d);
        MoebiusH::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
            .expect("product of automorphisms is an automorphism")
    }

    pub fn inverse(&self) -> MoebiusH {
        MoebiusH::new(self.d, -self.b, -self.c, self.a).expect("inverse of an automorphism")
    }

    /// `n`-th iterate; negative `n` iterates the inverse.
    pub fn iterate(&self, n: i64) -> MoebiusH {
        let mut base = if n < 0 { self.inverse() } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = MoebiusH::IDENTITY;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    /// `z ↦ r·self(z)`, `r > 0`.
    pub fn scaled_by(&self, r: f64) -> Result<MoebiusH, MoebiusError> {
        MoebiusH::new(r * self.a, r * self.b, self.c, self.d)
    }

    /// `z ↦ self(z) + t`.
    pub fn shifted_by(&self, t: f64) -> MoebiusH {
        MoebiusH::translation(t).compose(self)
    }

    /// `h ∘ self ∘ h⁻¹`.
    pub fn conjugate_by(&self, h: &MoebiusH) -> MoebiusH {
        h.compose(self).compose(&h.inverse())
    }

    /// Equality as maps: the matrices agree up to sign within `tol`.
    pub fn approx_eq(&self, other: &MoebiusH, tol: f64) -> bool {
        let x = self.coefficients();
        let y = other.coefficients();
        let plus = x.iter().zip(&y).all(|(p, q)| (p - q).abs() <= tol);
        let minus = x.iter().zip(&y).all(|(p, q)| (p + q).abs() <= tol);
        plus || minus
    }

    pub fn is_identity(&self, eps: f64) -> bool {
        self.b.abs() <= eps && self.c.abs() <= eps && (self.a - self.d).abs() <= eps
    }

    pub fn kind_with(&self, eps: f64) -> MoebiusKind {
        let t = self.trace().abs();
        if self.is_identity(eps) {
            MoebiusKind::Identity
        } else if t < 2.0 - eps {
            MoebiusKind::Elliptic
        } else if t <= 2.0 + eps {
            MoebiusKind::Parabolic
        } else {
            MoebiusKind::Hyperbolic
        }
    }

    pub fn classify(&self) -> DiscAutoClassification {
        self.classify_with(DEFAULT_EPS_CLS)
    }

    pub fn classify_with(&self, eps: f64) -> DiscAutoClassification {
        let kind = self.kind_with(eps);
        let mut out = DiscAutoClassification::empty(kind);
        match kind {
            MoebiusKind::Identity => {}
            MoebiusKind::Elliptic => {
                let (p, m) = self.elliptic_data();
                out.fixed_point_interior = Some(p);
                out.multiplier = Some(m);
            }
            MoebiusKind::Parabolic => {
                let (x0, _, beta) = self.parabolic_data();
                out.boundary_fixed = Some(vec![x0]);
                out.translation_sign = Some(if beta >= 0.0 { 1 } else { -1 });
            }
            MoebiusKind::Hyperbolic => {
                let (att, rep, mu) = self.hyperbolic_data();
                out.boundary_fixed = Some(vec![att, rep]);
                out.dilation = Some(1.0 / (mu * mu));
            }
        }
        out
    }

    /// Interior fixed point and multiplier of an elliptic map.
    fn elliptic_data(&self) -> (PointH, Complex64) {
        let t = self.trace();
        let s = (4.0 - t * t).max(0.0).sqrt();
        let sgn = self.c.signum();
        let p = Complex64::new(self.a - self.d, sgn * s) / (2.0 * self.c);
        // c·p + d = (t + i·sgn(c)·s)/2 has modulus 1.
        let half = Complex64::new(t, sgn * s) / 2.0;
        let mult = (half * half).inv();
        let mult = Complex64::new(mult.re + 0.0, mult.im + 0.0);
        let p = PointH::new(p).expect("elliptic fixed point lies in the upper half-plane");
        (p, mult)
    }

    /// Boundary fixed point, the conjugator `h` sending it to ∞, and the
    /// translation length `β` of `h ∘ self ∘ h⁻¹ = z + β`.
    fn parabolic_data(&self) -> (ExtReal, MoebiusH, f64) {
        let (x0, h) = if self.c == 0.0 {
            (ExtReal::Infinity, MoebiusH::IDENTITY)
        } else {
            let x0 = (self.a - self.d) / (2.0 * self.c);
            (
                ExtReal::Finite(x0),
                MoebiusH::new(0.0, -1.0, 1.0, -x0).expect("unit determinant"),
            )
        };
        let t = self.conjugate_by(&h);
        (x0, h, t.b / t.d)
    }

    /// Attracting and repelling fixed points and the larger eigenvalue `μ`.
    fn hyperbolic_data(&self) -> (ExtReal, ExtReal, f64) {
        let t = self.trace();
        let s = (t * t - 4.0).sqrt();
        let mu = (t + s) / 2.0;
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        if c == 0.0 {
            let finite = ExtReal::from_f64(b / (d - a));
            return if a > 1.0 {
                (ExtReal::Infinity, finite, mu)
            } else {
                (finite, ExtReal::Infinity, mu)
            };
        }
        let (plus, minus) = if a - d >= 0.0 {
            (((a - d) + s) / (2.0 * c), -2.0 * b / ((a - d) + s))
        } else {
            (-2.0 * b / ((a - d) - s), ((a - d) - s) / (2.0 * c))
        };
        // c·x₊ + d = μ, so the derivative there is 1/μ² < 1.
        (ExtReal::from_f64(plus), ExtReal::from_f64(minus), mu)
    }

    /// Divergence rate of the map on ℍ: `log(1/λ)` when hyperbolic, else 0.
    pub fn divergence_rate(&self) -> f64 {
        self.divergence_rate_with(DEFAULT_EPS_CLS)
    }

    pub fn divergence_rate_with(&self, eps: f64) -> f64 {
        match self.kind_with(eps) {
            MoebiusKind::Hyperbolic => {
                let (_, _, mu) = self.hyperbolic_data();
                2.0 * mu.ln()
            }
            _ => 0.0,
        }
    }
}

impl<'de> Deserialize<'de> for MoebiusH {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            a: f64,
            b: f64,
            c: f64,
            d: f64,
        }
        let r = Raw::deserialize(d)?;
        MoebiusH::new(r.a, r.b, r.c, r.d).map_err(serde::de::Error::custom)
    }
}

/// Classification of a single automorphism of ℍ. Only the fields relevant
/// to `kind` are populated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscAutoClassification {
    pub kind: MoebiusKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_point_interior: Option<PointH>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::serde_complex::option"
    )]
    pub multiplier: Option<Complex64>,
    /// Parabolic: the fixed point. Hyperbolic: attracting, then repelling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_fixed: Option<Vec<ExtReal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation_sign: Option<i8>,
}

impl DiscAutoClassification {
    fn empty(kind: MoebiusKind) -> Self {
        DiscAutoClassification {
            kind,
            fixed_point_interior: None,
            multiplier: None,
            boundary_fixed: None,
            dilation: None,
            translation_sign: None,
        }
    }

    pub fn attracting(&self) -> Option<ExtReal> {
        match self.kind {
            MoebiusKind::Hyperbolic => self.boundary_fixed.as_ref().map(|v| v[0]),
            _ => None,
        }
    }

    pub fn repelling(&self) -> Option<ExtReal> {
        match self.kind {
            MoebiusKind::Hyperbolic => self.boundary_fixed.as_ref().map(|v| v[1]),
            _ => None,
        }
    }
}

fn expect_kind(g: &MoebiusH, expected: MoebiusKind, eps: f64) -> Result<(), MoebiusError> {
    let found = g.kind_with(eps);
    if found == expected {
        Ok(())
    } else {
        Err(MoebiusError::WrongKind { expected, found })
    }
}

/// `g` with `g ∘ Γ = g / λ_Γ`, sending the attracting fixed point of `Γ` to
/// ∞ and the repelling one to 0.
pub fn linearizer_hyperbolic(gamma: &MoebiusH) -> Result<MoebiusH, MoebiusError> {
    linearizer_hyperbolic_with(gamma, DEFAULT_EPS_CLS)
}

pub fn linearizer_hyperbolic_with(gamma: &MoebiusH, eps: f64) -> Result<MoebiusH, MoebiusError> {
    expect_kind(gamma, MoebiusKind::Hyperbolic, eps)?;
    let (att, rep, _) = gamma.hyperbolic_data();
    match (att, rep) {
        (ExtReal::Infinity, ExtReal::Finite(r)) => MoebiusH::new(1.0, -r, 0.0, 1.0),
        (ExtReal::Finite(a), ExtReal::Infinity) => MoebiusH::new(0.0, -1.0, 1.0, -a),
        (ExtReal::Finite(a), ExtReal::Finite(r)) => {
            if r > a {
                MoebiusH::new(1.0, -r, 1.0, -a)
            } else {
                MoebiusH::new(-1.0, r, 1.0, -a)
            }
        }
        (ExtReal::Infinity, ExtReal::Infinity) => Err(MoebiusError::NonFinite),
    }
}

/// `(g, sign)` with `g ∘ Γ = g + sign·k` for a parabolic `Γ`.
pub fn abel_conjugator_parabolic(
    gamma: &MoebiusH,
    k: usize,
) -> Result<(MoebiusH, i8), MoebiusError> {
    abel_conjugator_parabolic_with(gamma, k, DEFAULT_EPS_CLS)
}

pub fn abel_conjugator_parabolic_with(
    gamma: &MoebiusH,
    k: usize,
    eps: f64,
) -> Result<(MoebiusH, i8), MoebiusError> {
    expect_kind(gamma, MoebiusKind::Parabolic, eps)?;
    let (_, h, beta) = gamma.parabolic_data();
    let g = h.scaled_by(k as f64 / beta.abs())?;
    Ok((g, if beta >= 0.0 { 1 } else { -1 }))
}

/// `(g, m)` with `g: ℍ → Δ`, `g(p) = 0` at the fixed point and
/// `g ∘ Γ = m·g`, `m = Γ′(p)`.
pub fn schroeder_conjugator_elliptic(
    gamma: &MoebiusH,
) -> Result<(MoebiusHtoD, Complex64), MoebiusError> {
    schroeder_conjugator_elliptic_with(gamma, DEFAULT_EPS_CLS)
}

pub fn schroeder_conjugator_elliptic_with(
    gamma: &MoebiusH,
    eps: f64,
) -> Result<(MoebiusHtoD, Complex64), MoebiusError> {
    expect_kind(gamma, MoebiusKind::Elliptic, eps)?;
    let (p, m) = gamma.elliptic_data();
    Ok((MoebiusHtoD::centered_at(&p), m))
}

/// `z ↦ (az + b)/(cz + d)` with complex coefficients, mapping ℍ onto Δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoebiusHtoD {
    #[serde(with = "crate::serde_complex")]
    a: Complex64,
    #[serde(with = "crate::serde_complex")]
    b: Complex64,
    #[serde(with = "crate::serde_complex")]
    c: Complex64,
    #[serde(with = "crate::serde_complex")]
    d: Complex64,
}

impl MoebiusHtoD {
    /// Validates the coefficients by checking that sample points of ℍ land
    /// in Δ and sample points of ℝ land on the unit circle.
    pub fn new(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Result<Self, MoebiusError> {
        if ![a, b, c, d]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(MoebiusError::NonFinite);
        }
        let g = MoebiusHtoD { a, b, c, d };
        if (a * d - b * c).norm() == 0.0 {
            return Err(MoebiusError::NotHalfPlaneToDisc);
        }
        let interior = [
            Complex64::new(0.0, 1.0),
            Complex64::new(2.0, 0.5),
            Complex64::new(-1.0, 3.0),
        ];
        let boundary = [-1.0, 0.0, 2.5];
        let inside = interior.iter().all(|&z| g.eval(z).norm() < 1.0);
        let on_circle = boundary
            .iter()
            .all(|&x| (g.eval(Complex64::new(x, 0.0)).norm() - 1.0).abs() < 1e-8);
        if inside && on_circle {
            Ok(g)
        } else {
            Err(MoebiusError::NotHalfPlaneToDisc)
        }
    }

    /// `z ↦ (z − p)/(z − p̄)`.
    pub fn centered_at(p: &PointH) -> Self {
        let p = p.value();
        MoebiusHtoD {
            a: Complex64::new(1.0, 0.0),
            b: -p,
            c: Complex64::new(1.0, 0.0),
            d: -p.conj(),
        }
    }

    pub fn coefficients(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn apply(&self, z: &PointH) -> Result<PointD, GeometryError> {
        if z.is_plain() {
            return PointD::new(self.eval(z.value()));
        }
        let s = z.scaled();
        let num = s
            .mul(Scaled::from_complex(self.a))
            .add(Scaled::from_complex(self.b));
        let den = s
            .mul(Scaled::from_complex(self.c))
            .add(Scaled::from_complex(self.d));
        PointD::new(num.div(den).to_complex())
    }

    /// Inverse map Δ → ℍ.
    pub fn apply_inverse(&self, w: &PointD) -> Result<PointH, GeometryError> {
        let w = w.value();
        PointH::new((self.d * w - self.b) / (-self.c * w + self.a))
    }

    /// `self ∘ h`.
    pub fn compose_h(&self, h: &MoebiusH) -> MoebiusHtoD {
        let [e, f, g, k] = h.coefficients();
        MoebiusHtoD {
            a: self.a * e + self.b * g,
            b: self.a * f + self.b * k,
            c: self.c * e + self.d * g,
            d: self.c * f + self.d * k,
        }
    }

    /// `z ↦ u·self(z)` for `|u| = 1`.
    pub fn rotated_by(&self, u: Complex64) -> MoebiusHtoD {
        MoebiusHtoD {
            a: self.a * u,
            b: self.b * u,
            c: self.c,
            d: self.d,
        }
    }
}

impl<'de> Deserialize<'de> for MoebiusHtoD {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(with = "crate::serde_complex")]
            a: Complex64,
            #[serde(with = "crate::serde_complex")]
            b: Complex64,
            #[serde(with = "crate::serde_complex")]
            c: Complex64,
            #[serde(with = "crate::serde_complex")]
            d: Complex64,
        }
        let r = Raw::deserialize(d)?;
        MoebiusHtoD::new(r.a, r.b, r.c, r.d).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dist_halfplane;

    fn m(a: f64, b: f64, c: f64, d: f64) -> MoebiusH {
        MoebiusH::new(a, b, c, d).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalization_fixes_sign_and_determinant() {
        let g = m(-4.0, 0.0, 0.0, -1.0);
        assert_eq!(g.coefficients(), [2.0, 0.0, 0.0, 0.5]);
        let inv = m(0.0, 1.0, -1.0, 0.0);
        assert_eq!(inv, MoebiusH::inversion());
        assert!(MoebiusH::new(1.0, 0.0, 0.0, -1.0).is_err());
        assert!(MoebiusH::new(f64::NAN, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn algebra_examples() {
        let two_z = MoebiusH::dilation(2.0).unwrap();
        let plus_one = MoebiusH::translation(1.0);
        assert!(two_z
            .compose(&plus_one)
            .approx_eq(&m(2.0, 2.0, 0.0, 1.0), 1e-15));
        assert!(plus_one
            .inverse()
            .approx_eq(&MoebiusH::translation(-1.0), 1e-15));
        assert!(two_z
            .iterate(3)
            .approx_eq(&MoebiusH::dilation(8.0).unwrap(), 1e-15));
        assert!(two_z
            .iterate(-2)
            .approx_eq(&MoebiusH::dilation(0.25).unwrap(), 1e-15));
        assert!(plus_one.iterate(0).approx_eq(&MoebiusH::IDENTITY, 0.0));
    }

    #[test]
    fn classify_dilation_by_four() {
        let cls = m(2.0, 0.0, 0.0, 0.5).classify();
        assert_eq!(cls.kind, MoebiusKind::Hyperbolic);
        assert_eq!(cls.attracting(), Some(ExtReal::Infinity));
        assert_eq!(cls.repelling(), Some(ExtReal::Finite(0.0)));
        assert!((cls.dilation.unwrap() - 0.25).abs() < 1e-15);
        assert!(cls.multiplier.is_none() && cls.translation_sign.is_none());
    }

    #[test]
    fn classify_translation() {
        let cls = MoebiusH::translation(1.0).classify();
        assert_eq!(cls.kind, MoebiusKind::Parabolic);
        assert_eq!(cls.boundary_fixed, Some(vec![ExtReal::Infinity]));
        assert_eq!(cls.translation_sign, Some(1));
        assert_eq!(
            MoebiusH::translation(-0.5).classify().translation_sign,
            Some(-1)
        );
    }

    #[test]
    fn classify_inversion() {
        let cls = MoebiusH::inversion().classify();
        assert_eq!(cls.kind, MoebiusKind::Elliptic);
        assert!((cls.fixed_point_interior.unwrap().value() - c(0.0, 1.0)).norm() < 1e-15);
        assert!((cls.multiplier.unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn classify_identity() {
        assert_eq!(MoebiusH::IDENTITY.classify().kind, MoebiusKind::Identity);
        assert_eq!(
            MoebiusH::rotation_about_i(std::f64::consts::PI)
                .classify()
                .kind,
            MoebiusKind::Identity
        );
    }

    #[test]
    fn hyperbolic_with_finite_fixed_points() {
        // (5z + 3)/(3z + 5): fixed points ±1, attracting +1, eigenvalues 8 and 2.
        let cls = m(5.0, 3.0, 3.0, 5.0).classify();
        assert_eq!(cls.attracting(), Some(ExtReal::Finite(1.0)));
        assert_eq!(cls.repelling(), Some(ExtReal::Finite(-1.0)));
        assert!((cls.dilation.unwrap() - 0.25).abs() < 1e-15);
        let down = m(1.0, 0.0, 0.0, 9.0).classify();
        assert_eq!(down.attracting(), Some(ExtReal::Finite(0.0)));
        assert_eq!(down.repelling(), Some(ExtReal::Infinity));
        assert!((down.dilation.unwrap() - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn divergence_rate_examples() {
        assert!((m(4.0, 0.0, 0.0, 1.0).divergence_rate() - 4f64.ln()).abs() < 1e-15);
        assert_eq!(MoebiusH::translation(1.0).divergence_rate(), 0.0);
        assert_eq!(MoebiusH::IDENTITY.divergence_rate(), 0.0);
        assert_eq!(MoebiusH::rotation_about_i(0.4).divergence_rate(), 0.0);
    }

    fn linearizer_residual(gamma: &MoebiusH, g: &MoebiusH) -> f64 {
        let lambda = gamma.classify().dilation.unwrap();
        let pts = [c(0.0, 1.0), c(-2.0, 0.3), c(1.5, 4.0), c(0.2, 0.05)];
        pts.iter()
            .map(|&z| {
                let lhs = PointH::new(g.eval(gamma.eval(z))).unwrap();
                let rhs = PointH::new(g.eval(z) / lambda).unwrap();
                dist_halfplane(&lhs, &rhs)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn linearizer_examples() {
        let four = m(4.0, 0.0, 0.0, 1.0);
        assert!(linearizer_hyperbolic(&four)
            .unwrap()
            .approx_eq(&MoebiusH::IDENTITY, 1e-15));

        let gamma = m(5.0, 3.0, 3.0, 5.0);
        let g = linearizer_hyperbolic(&gamma).unwrap();
        assert!(g.approx_eq(&m(1.0, 1.0, -1.0, 1.0), 1e-15));
        assert!(linearizer_residual(&gamma, &g) < 1e-13);
        // g(Γ(z)) = 4·g(z) at a sample point, written out.
        let z = c(0.3, 0.8);
        assert!((g.eval(gamma.eval(z)) - g.eval(z) * 4.0).norm() < 1e-13);

        let ninth = m(1.0, 0.0, 0.0, 9.0);
        let g = linearizer_hyperbolic(&ninth).unwrap();
        assert!(g.approx_eq(&MoebiusH::inversion(), 1e-15));
        assert!((g.eval(ninth.eval(z)) - g.eval(z) * 9.0).norm() < 1e-13);

        assert!(matches!(
            linearizer_hyperbolic(&MoebiusH::translation(1.0)),
            Err(MoebiusError::WrongKind { .. })
        ));
    }

    #[test]
    fn linearizer_positive_multiples() {
        let gamma = m(3.0, -1.0, 1.5, 0.25);
        let g = linearizer_hyperbolic(&gamma).unwrap();
        for r in [0.01, 0.7, 3.0, 250.0] {
            assert!(linearizer_residual(&gamma, &g.scaled_by(r).unwrap()) < 1e-11);
        }
    }

    #[test]
    fn abel_conjugator_examples() {
        let (g, s) = abel_conjugator_parabolic(&MoebiusH::translation(3.0), 2).unwrap();
        assert_eq!(s, 1);
        assert!(g.approx_eq(&MoebiusH::dilation(2.0 / 3.0).unwrap(), 1e-15));

        let (g, s) = abel_conjugator_parabolic(&MoebiusH::translation(-3.0), 1).unwrap();
        assert_eq!(s, -1);
        assert!(g.approx_eq(&MoebiusH::dilation(1.0 / 3.0).unwrap(), 1e-15));

        // z/(−z + 1) fixes 0; −1/z conjugates it to w ↦ w + 1.
        let gamma = m(1.0, 0.0, -1.0, 1.0);
        let (g, s) = abel_conjugator_parabolic(&gamma, 1).unwrap();
        assert_eq!(s, 1);
        assert!(g.approx_eq(&MoebiusH::inversion(), 1e-15));
        let z = c(0.4, 1.1);
        assert!((g.eval(gamma.eval(z)) - (g.eval(z) + 1.0)).norm() < 1e-14);

        assert!(abel_conjugator_parabolic(&MoebiusH::inversion(), 1).is_err());
    }

    #[test]
    fn schroeder_examples() {
        let (g, mult) = schroeder_conjugator_elliptic(&MoebiusH::inversion()).unwrap();
        assert!((mult - c(-1.0, 0.0)).norm() < 1e-15);
        let z = c(0.7, 0.2);
        assert!((g.eval(z) - (z - c(0.0, 1.0)) / (z + c(0.0, 1.0))).norm() < 1e-15);
        assert!((g.eval(MoebiusH::inversion().eval(z)) + g.eval(z)).norm() < 1e-14);

        let theta = 0.37;
        let rot = MoebiusH::rotation_about_i(theta);
        let (g, mult) = schroeder_conjugator_elliptic(&rot).unwrap();
        assert!((mult - Complex64::from_polar(1.0, -2.0 * theta)).norm() < 1e-15);
        assert!((mult.norm() - 1.0).abs() < 1e-15);
        assert!((g.eval(rot.eval(z)) - mult * g.eval(z)).norm() < 1e-14);

        assert!(schroeder_conjugator_elliptic(&MoebiusH::translation(1.0)).is_err());
        assert!(schroeder_conjugator_elliptic(&MoebiusH::IDENTITY).is_err());
    }

    #[test]
    fn moebius_h_to_d_validation() {
        let ok = MoebiusHtoD::new(c(1.0, 0.0), c(0.0, -1.0), c(1.0, 0.0), c(0.0, 1.0));
        assert!(ok.is_ok());
        // z ↦ (z + i)/(z − i) sends ℍ outside the disc.
        let bad = MoebiusHtoD::new(c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(0.0, -1.0));
        assert!(bad.is_err());
        let g = ok.unwrap();
        let z = PointH::from_parts(-0.3, 2.0).unwrap();
        let back = g.apply_inverse(&g.apply(&z).unwrap()).unwrap();
        assert!((back.value() - z.value()).norm() < 1e-14);
    }

    #[test]
    fn apply_keeps_relative_accuracy_near_the_axis() {
        let gamma = m(2.0, 1.0, 1.0, 1.0);
        let z = PointH::from_parts(0.5, 1e-200).unwrap();
        let w = gamma.apply(&z).unwrap();
        // Im γ(z) = Im z / |cz + d|².
        let expect = 1e-200 / (1.5f64 * 1.5);
        assert!((w.im() / expect - 1.0).abs() < 1e-14);
    }

    #[test]
    fn apply_on_scaled_points() {
        let far = PointH::I.dilate(3000.0).unwrap();
        let w = MoebiusH::dilation(3.0).unwrap().apply(&far).unwrap();
        assert!((w.ln_abs() - 3000.0 - 3f64.ln()).abs() < 1e-10);
        let back = MoebiusH::inversion().apply(&far).unwrap();
        assert!((back.ln_abs() + 3000.0).abs() < 1e-10);
        assert!((back.arg() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn orbit_converging_to_a_finite_boundary_point() {
        // Attracting fixed point 1, repelling −1, multiplier 1/4 at 1.
        let gamma = m(5.0, 3.0, 3.0, 5.0);
        let mut z = PointH::I;
        for _ in 0..2000 {
            z = gamma.apply(&z).unwrap();
        }
        assert!(z.is_thin());
        assert!((z.re() - 1.0).abs() < 1e-15);
        let rate = dist_halfplane(&PointH::I, &z) / 2000.0;
        assert!((rate - 4f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn ext_real_serde() {
        let v = vec![ExtReal::Finite(1.5), ExtReal::Infinity];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[1.5,\"inf\"]");
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
