//! Extended-range complex numbers `m · e^e`.
//!
//! Orbits of hyperbolic maps leave the range of `f64` after a few thousand
//! iterations (a dilation by `e^{0.3π}` overflows after ~750 steps). Points
//! of the half-plane therefore carry a natural-log exponent next to a unit
//! mantissa once their modulus leaves the plain range.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Scaled {
    /// Unit-modulus mantissa, or zero.
    pub(crate) m: Complex64,
    /// Natural-log exponent.
    pub(crate) e: f64,
}

impl Scaled {
    pub(crate) const ZERO: Scaled = Scaled {
        m: Complex64::new(0.0, 0.0),
        e: 0.0,
    };

    pub(crate) fn new(m: Complex64, e: f64) -> Self {
        let r = m.norm();
        if r == 0.0 || !r.is_finite() {
            if r == 0.0 {
                return Self::ZERO;
            }
            return Scaled { m, e };
        }
        Scaled {
            m: m / r,
            e: e + r.ln(),
        }
    }

    pub(crate) fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0.0)
    }

    pub(crate) fn from_real(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), 0.0)
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.m.re == 0.0 && self.m.im == 0.0
    }

    /// `ln |self|`; `-inf` for zero.
    pub(crate) fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.e
        }
    }

    pub(crate) fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.m * self.e.exp()
    }

    pub(crate) fn mul(self, other: Scaled) -> Scaled {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        Scaled::new(self.m * other.m, self.e + other.e)
    }

    pub(crate) fn scale_real(self, x: f64) -> Scaled {
        self.mul(Scaled::from_real(x))
    }

    pub(crate) fn div(self, other: Scaled) -> Scaled {
        if self.is_zero() {
            return Self::ZERO;
        }
        Scaled::new(self.m / other.m, self.e - other.e)
    }

    pub(crate) fn add(self, other: Scaled) -> Scaled {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.e >= other.e {
            (self, other)
        } else {
            (other, self)
        };
        let shift = (small.e - big.e).exp();
        Scaled::new(big.m + small.m * shift, big.e)
    }

    pub(crate) fn neg(self) -> Scaled {
        Scaled {
            m: -self.m,
            e: self.e,
        }
    }

    pub(crate) fn sub(self, other: Scaled) -> Scaled {
        self.add(other.neg())
    }

    /// Real part as a signed log-magnitude pair `(sign, ln|re|)`.
    pub(crate) fn re_parts(&self) -> (f64, f64) {
        let r = self.m.re;
        if r == 0.0 || self.is_zero() {
            (0.0, f64::NEG_INFINITY)
        } else {
            (r.signum(), self.e + r.abs().ln())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_matches_plain_complex_in_range() {
        let a = Complex64::new(1.5, -0.25);
        let b = Complex64::new(-3.0, 2.0);
        let sa = Scaled::from_complex(a);
        let sb = Scaled::from_complex(b);
        assert!((sa.add(sb).to_complex() - (a + b)).norm() < 1e-14);
        assert!((sa.mul(sb).to_complex() - a * b).norm() < 1e-13);
        assert!((sa.div(sb).to_complex() - a / b).norm() < 1e-14);
        assert!((sa.sub(sa).to_complex()).norm() < 1e-15);
    }

    #[test]
    fn survives_beyond_f64_range() {
        let huge = Scaled::new(Complex64::new(0.0, 1.0), 5000.0);
        let sum = huge.add(Scaled::from_real(1.0));
        assert!((sum.ln_abs() - 5000.0).abs() < 1e-12);
        let back = huge.div(huge);
        assert!((back.to_complex() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(huge.to_complex().norm().is_infinite());
    }
}
