//! Complex numbers over MPFR floats and a few float helpers.

use std::fmt;

use rug::float::Constant;
use rug::ops::PowAssign;
use rug::{Assign, Float, Rational};

/// Complex number with `rug::Float` parts sharing one precision.
#[derive(Clone, PartialEq)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl BigComplex {
    pub fn zero(prec: u32) -> Self {
        BigComplex {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn new(re: Float, im: Float) -> Self {
        BigComplex { re, im }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        BigComplex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_rationals(prec: u32, re: &Rational, im: &Rational) -> Self {
        BigComplex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    /// `e^{i theta}`.
    pub fn cis(theta: &Float) -> Self {
        let prec = theta.prec();
        let mut s = Float::new(prec);
        let mut c = Float::new(prec);
        s.assign(theta.sin_ref());
        c.assign(theta.cos_ref());
        BigComplex { re: c, im: s }
    }

    pub fn add(&self, o: &BigComplex) -> BigComplex {
        let prec = self.prec();
        BigComplex {
            re: Float::with_val(prec, &self.re + &o.re),
            im: Float::with_val(prec, &self.im + &o.im),
        }
    }

    pub fn sub(&self, o: &BigComplex) -> BigComplex {
        let prec = self.prec();
        BigComplex {
            re: Float::with_val(prec, &self.re - &o.re),
            im: Float::with_val(prec, &self.im - &o.im),
        }
    }

    pub fn mul(&self, o: &BigComplex) -> BigComplex {
        let prec = self.prec();
        let mut re = Float::with_val(prec, &self.re * &o.re);
        re -= Float::with_val(prec, &self.im * &o.im);
        let mut im = Float::with_val(prec, &self.re * &o.im);
        im += Float::with_val(prec, &self.im * &o.re);
        BigComplex { re, im }
    }

    pub fn scale(&self, s: &Float) -> BigComplex {
        let prec = self.prec();
        BigComplex {
            re: Float::with_val(prec, &self.re * s),
            im: Float::with_val(prec, &self.im * s),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let prec = self.prec();
        let mut n = Float::with_val(prec, self.re.square_ref());
        n += Float::with_val(prec, self.im.square_ref());
        n
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn recip(&self) -> BigComplex {
        let n = self.norm_sqr();
        BigComplex {
            re: Float::with_val(self.prec(), &self.re / &n),
            im: -Float::with_val(self.prec(), &self.im / &n),
        }
    }

    pub fn div(&self, o: &BigComplex) -> BigComplex {
        self.mul(&o.recip())
    }

    /// Integer power by repeated squaring; negative exponents invert.
    pub fn powi(&self, n: i64) -> BigComplex {
        let prec = self.prec();
        let mut base = if n < 0 { self.recip() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = BigComplex::from_f64(prec, 1.0, 0.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// `q = e^{2 pi i tau}`.
    pub fn nome(tau: &BigComplex) -> BigComplex {
        let prec = tau.prec();
        let two_pi = two_pi(prec);
        let mut modulus = Float::with_val(prec, &two_pi * &tau.im);
        modulus = (-modulus).exp();
        let angle = Float::with_val(prec, &two_pi * &tau.re);
        BigComplex::cis(&angle).scale(&modulus)
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn two_pi(prec: u32) -> Float {
    let mut p = pi(prec);
    p *= 2;
    p
}

/// Full-precision decimal rendering of a float.
pub fn float_to_decimal(x: &Float) -> String {
    x.to_string_radix(10, None)
}

/// `sqrt(p)` at the given precision.
pub fn sqrt_int(p: u32, prec: u32) -> Float {
    Float::with_val(prec, p).sqrt()
}

/// `base^e` for small integers as an exact rational.
pub fn rational_pow(base: i64, e: u32) -> Rational {
    let mut r = Rational::from(base);
    r.pow_assign(e);
    r
}

/// log2 |x| for a nonzero float without overflowing f64.
pub fn log2_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log2() + e as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nome_at_i_is_real() {
        let tau = BigComplex::from_f64(128, 0.0, 1.0);
        let q = BigComplex::nome(&tau);
        assert!((q.re.to_f64() - (-2.0 * std::f64::consts::PI).exp()).abs() < 1e-18);
        assert!(q.im.to_f64().abs() < 1e-30);
    }

    #[test]
    fn powi_matches_repeated_multiplication() {
        let z = BigComplex::from_f64(128, 0.3, -0.7);
        let mut acc = BigComplex::from_f64(128, 1.0, 0.0);
        for _ in 0..7 {
            acc = acc.mul(&z);
        }
        let p = z.powi(7);
        assert!(p.sub(&acc).abs().to_f64() < 1e-30);
        let inv = z.powi(-3).mul(&z.powi(3));
        assert!(inv.sub(&BigComplex::from_f64(128, 1.0, 0.0)).abs().to_f64() < 1e-30);
    }

    #[test]
    fn log2_abs_handles_tiny_values() {
        let x = Float::with_val(128, Float::i_exp(1, -2000));
        assert!((log2_abs(&x) + 2000.0).abs() < 1e-9);
    }
}
