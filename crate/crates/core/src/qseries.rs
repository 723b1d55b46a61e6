//! Truncated Laurent series in `q`.
//!
//! A [`QSeries`] stores the coefficients of exponents `valuation ..
//! valuation + truncation` densely and is known modulo `q^(valuation +
//! truncation)`. Coefficients live either in the exact rationals or in MPFR
//! floats of a fixed precision. Results of arithmetic always carry the
//! shortest reliable window of their operands; truncation is never widened.
//!
//! The zero series is canonical: no coefficients, valuation 0, and the
//! truncation records the absolute order `O(q^truncation)` that is known.

use std::fmt;

use rug::ops::NegAssign;
use rug::{Assign, Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest accepted big-float precision.
pub const MIN_PRECISION_BITS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoefficientDomain {
    ExactRational,
    BigFloat { precision_bits: u32 },
}

impl CoefficientDomain {
    pub fn big_float(precision_bits: u32) -> Result<Self> {
        if precision_bits < MIN_PRECISION_BITS {
            return Err(Error::InvalidPrecision(precision_bits));
        }
        Ok(CoefficientDomain::BigFloat { precision_bits })
    }

    pub fn is_exact(self) -> bool {
        matches!(self, CoefficientDomain::ExactRational)
    }

    pub fn precision_bits(self) -> Option<u32> {
        match self {
            CoefficientDomain::ExactRational => None,
            CoefficientDomain::BigFloat { precision_bits } => Some(precision_bits),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Coeffs {
    Rational(Vec<Rational>),
    Float(Vec<Float>),
}

/// Truncated Laurent series `sum a_n q^n + O(q^(valuation + truncation))`.
#[derive(Clone, Debug, PartialEq)]
pub struct QSeries {
    domain: CoefficientDomain,
    valuation: i64,
    truncation: usize,
    coeffs: Coeffs,
}

/// Per-domain coefficient operations shared by the generic kernels below.
trait Coeff: Clone + PartialEq + Sized {
    fn zero_in(d: CoefficientDomain) -> Self;
    fn from_rational_in(r: &Rational, d: CoefficientDomain) -> Self;
    fn is_zero_c(&self) -> bool;
    fn add_ref(&mut self, o: &Self);
    fn sub_ref(&mut self, o: &Self);
    fn neg_c(&mut self);
    fn recip_c(&self) -> Self;
    /// First `len` coefficients of the product of two dense series.
    fn convolve(a: &[Self], b: &[Self], len: usize, d: CoefficientDomain) -> Vec<Self>;
    fn wrap(v: Vec<Self>) -> Coeffs;
}

impl Coeff for Rational {
    fn zero_in(_: CoefficientDomain) -> Self {
        Rational::new()
    }
    fn from_rational_in(r: &Rational, _: CoefficientDomain) -> Self {
        r.clone()
    }
    fn is_zero_c(&self) -> bool {
        *self.numer() == 0
    }
    fn add_ref(&mut self, o: &Self) {
        *self += o;
    }
    fn sub_ref(&mut self, o: &Self) {
        *self -= o;
    }
    fn neg_c(&mut self) {
        let v = std::mem::take(self);
        *self = -v;
    }
    fn recip_c(&self) -> Self {
        Rational::from(self.recip_ref())
    }
    fn convolve(a: &[Self], b: &[Self], len: usize, _: CoefficientDomain) -> Vec<Self> {
        // Clear denominators so the quadratic loop runs over integers.
        let a = &a[..a.len().min(len)];
        let b = &b[..b.len().min(len)];
        let (ai, da) = to_integers(a);
        let (bi, db) = to_integers(b);
        let den = Integer::from(&da * &db);
        let mut out = Vec::with_capacity(len);
        let mut acc = Integer::new();
        for k in 0..len {
            acc.assign(0);
            let lo = k.saturating_sub(bi.len().saturating_sub(1));
            let hi = k.min(ai.len().saturating_sub(1));
            if !ai.is_empty() && !bi.is_empty() && lo <= hi {
                for i in lo..=hi {
                    let (x, y) = (&ai[i], &bi[k - i]);
                    if *x != 0 && *y != 0 {
                        acc += x * y;
                    }
                }
            }
            out.push(Rational::from((acc.clone(), den.clone())));
        }
        out
    }
    fn wrap(v: Vec<Self>) -> Coeffs {
        Coeffs::Rational(v)
    }
}

fn to_integers(v: &[Rational]) -> (Vec<Integer>, Integer) {
    let mut lcm = Integer::from(1);
    for r in v {
        if *r.denom() != 1 {
            lcm.lcm_mut(r.denom());
        }
    }
    let ints = v
        .iter()
        .map(|r| {
            if *r.denom() == 1 {
                Integer::from(r.numer() * &lcm)
            } else {
                let scale = Integer::from(&lcm / r.denom());
                Integer::from(r.numer() * &scale)
            }
        })
        .collect();
    (ints, lcm)
}

fn prec_of(d: CoefficientDomain) -> u32 {
    d.precision_bits().unwrap_or(MIN_PRECISION_BITS)
}

impl Coeff for Float {
    fn zero_in(d: CoefficientDomain) -> Self {
        Float::new(prec_of(d))
    }
    fn from_rational_in(r: &Rational, d: CoefficientDomain) -> Self {
        Float::with_val(prec_of(d), r)
    }
    fn is_zero_c(&self) -> bool {
        self.is_zero()
    }
    fn add_ref(&mut self, o: &Self) {
        *self += o;
    }
    fn sub_ref(&mut self, o: &Self) {
        *self -= o;
    }
    fn neg_c(&mut self) {
        self.neg_assign();
    }
    fn recip_c(&self) -> Self {
        Float::with_val(self.prec(), self.recip_ref())
    }
    fn convolve(a: &[Self], b: &[Self], len: usize, d: CoefficientDomain) -> Vec<Self> {
        let prec = prec_of(d);
        let mut out = Vec::with_capacity(len);
        for k in 0..len {
            let mut acc = Float::new(prec);
            let hi = k.min(a.len().saturating_sub(1));
            if !a.is_empty() {
                for i in 0..=hi {
                    if k - i < b.len() {
                        acc += &a[i] * &b[k - i];
                    }
                }
            }
            out.push(acc);
        }
        out
    }
    fn wrap(v: Vec<Self>) -> Coeffs {
        Coeffs::Float(v)
    }
}

/// Builds a canonical series from coefficients of exponents
/// `valuation .. valuation + coeffs.len()`.
fn normalized<T: Coeff>(domain: CoefficientDomain, valuation: i64, mut coeffs: Vec<T>) -> QSeries {
    let precision = valuation + coeffs.len() as i64;
    let lead = coeffs.iter().position(|c| !c.is_zero_c());
    match lead {
        None => QSeries::zero(domain, precision),
        Some(z) => {
            coeffs.drain(..z);
            QSeries {
                domain,
                valuation: valuation + z as i64,
                truncation: coeffs.len(),
                coeffs: T::wrap(coeffs),
            }
        }
    }
}

/// Coefficients of `s` over exponents `from .. to` (zero below the valuation).
fn window<T: Coeff>(
    domain: CoefficientDomain,
    valuation: i64,
    coeffs: &[T],
    from: i64,
    to: i64,
) -> Vec<T> {
    (from..to)
        .map(|n| {
            let idx = n - valuation;
            if idx >= 0 && (idx as usize) < coeffs.len() {
                coeffs[idx as usize].clone()
            } else {
                T::zero_in(domain)
            }
        })
        .collect()
}

fn add_generic<T: Coeff>(
    domain: CoefficientDomain,
    (va, a, pa): (i64, &[T], i64),
    (vb, b, pb): (i64, &[T], i64),
    negate_b: bool,
) -> QSeries {
    let precision = pa.min(pb);
    let lo = match (a.is_empty(), b.is_empty()) {
        (true, true) => return QSeries::zero(domain, precision),
        (true, false) => vb,
        (false, true) => va,
        (false, false) => va.min(vb),
    };
    if precision <= lo {
        return QSeries::zero(domain, precision);
    }
    let mut out = window(domain, va, a, lo, precision);
    for (n, slot) in (lo..precision).zip(out.iter_mut()) {
        let idx = n - vb;
        if idx >= 0 && (idx as usize) < b.len() {
            if negate_b {
                slot.sub_ref(&b[idx as usize]);
            } else {
                slot.add_ref(&b[idx as usize]);
            }
        }
    }
    normalized(domain, lo, out)
}

/// Newton iteration for the inverse of a unit power series `u` (u[0] != 0).
fn inverse_unit<T: Coeff>(domain: CoefficientDomain, u: &[T]) -> Vec<T> {
    let n = u.len();
    let mut b = vec![u[0].recip_c()];
    let mut len = 1;
    while len < n {
        let next = (2 * len).min(n);
        // b <- b + b (1 - u b)  (mod q^next)
        let ub = T::convolve(u, &b, next, domain);
        let mut e: Vec<T> = ub.into_iter().map(|mut c| {
            c.neg_c();
            c
        }).collect();
        e[0].add_ref(&T::from_rational_in(&Rational::from(1), domain));
        let corr = T::convolve(&b, &e, next, domain);
        b.resize(next, T::zero_in(domain));
        for (bi, ci) in b.iter_mut().zip(corr.iter()) {
            bi.add_ref(ci);
        }
        len = next;
    }
    b
}

macro_rules! unary {
    ($s:expr, $c:ident => $body:expr) => {
        match &$s.coeffs {
            Coeffs::Rational($c) => $body,
            Coeffs::Float($c) => $body,
        }
    };
}

impl QSeries {
    /// The zero series known modulo `q^precision` (negative orders clamp to 0).
    pub fn zero(domain: CoefficientDomain, precision: i64) -> Self {
        QSeries {
            domain,
            valuation: 0,
            truncation: precision.max(0) as usize,
            coeffs: match domain {
                CoefficientDomain::ExactRational => Coeffs::Rational(Vec::new()),
                CoefficientDomain::BigFloat { .. } => Coeffs::Float(Vec::new()),
            },
        }
    }

    pub fn from_rationals(valuation: i64, coeffs: Vec<Rational>) -> Self {
        normalized(CoefficientDomain::ExactRational, valuation, coeffs)
    }

    pub fn from_integers(valuation: i64, coeffs: &[i64]) -> Self {
        Self::from_rationals(valuation, coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    /// Float coefficients, rounded to `precision_bits`.
    pub fn from_floats(precision_bits: u32, valuation: i64, coeffs: Vec<Float>) -> Result<Self> {
        let domain = CoefficientDomain::big_float(precision_bits)?;
        let coeffs = coeffs
            .into_iter()
            .map(|c| Float::with_val(precision_bits, c))
            .collect();
        Ok(normalized(domain, valuation, coeffs))
    }

    /// The constant `c + O(q^truncation)`.
    pub fn constant(domain: CoefficientDomain, c: &Rational, truncation: usize) -> Self {
        Self::monomial(domain, c, 0, truncation)
    }

    pub fn one(domain: CoefficientDomain, truncation: usize) -> Self {
        Self::constant(domain, &Rational::from(1), truncation)
    }

    /// `c q^exponent` with `truncation` reliable terms from the exponent on.
    pub fn monomial(domain: CoefficientDomain, c: &Rational, exponent: i64, truncation: usize) -> Self {
        match domain {
            CoefficientDomain::ExactRational => {
                let mut v = vec![Rational::new(); truncation];
                if truncation > 0 {
                    v[0] = c.clone();
                }
                normalized(domain, exponent, v)
            }
            CoefficientDomain::BigFloat { .. } => {
                let mut v = vec![Float::zero_in(domain); truncation];
                if truncation > 0 {
                    v[0] = Float::from_rational_in(c, domain);
                }
                normalized(domain, exponent, v)
            }
        }
    }

    pub fn domain(&self) -> CoefficientDomain {
        self.domain
    }

    /// Lowest stored exponent `n0` (0 for the zero series).
    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    /// Number of reliable terms starting at the valuation.
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Absolute order: the series is known modulo `q^precision()`.
    pub fn precision(&self) -> i64 {
        self.valuation + self.truncation as i64
    }

    pub fn is_zero(&self) -> bool {
        unary!(self, c => c.is_empty())
    }

    pub fn rationals(&self) -> Option<&[Rational]> {
        match &self.coeffs {
            Coeffs::Rational(v) => Some(v),
            Coeffs::Float(_) => None,
        }
    }

    pub fn floats(&self) -> Option<&[Float]> {
        match &self.coeffs {
            Coeffs::Float(v) => Some(v),
            Coeffs::Rational(_) => None,
        }
    }

    /// Exact coefficient of `q^n`; `None` past the truncation or for floats.
    pub fn rational_coeff(&self, n: i64) -> Option<Rational> {
        if n >= self.precision() {
            return None;
        }
        let v = self.rationals()?;
        let idx = n - self.valuation;
        if idx < 0 || idx as usize >= v.len() {
            Some(Rational::new())
        } else {
            Some(v[idx as usize].clone())
        }
    }

    /// Coefficient of `q^n` as a float at the given precision.
    pub fn float_coeff(&self, n: i64, prec: u32) -> Option<Float> {
        if n >= self.precision() {
            return None;
        }
        let idx = n - self.valuation;
        let len = unary!(self, c => c.len());
        if idx < 0 || idx as usize >= len {
            return Some(Float::new(prec));
        }
        Some(match &self.coeffs {
            Coeffs::Rational(v) => Float::with_val(prec, &v[idx as usize]),
            Coeffs::Float(v) => Float::with_val(prec, &v[idx as usize]),
        })
    }

    pub fn coeff_f64(&self, n: i64) -> Option<f64> {
        self.float_coeff(n, 64).map(|f| f.to_f64())
    }

    /// Leading coefficient as a rendered string, or `None` for zero.
    pub fn coeff_string(&self, n: i64) -> Option<String> {
        if n >= self.precision() {
            return None;
        }
        Some(match &self.coeffs {
            Coeffs::Rational(_) => self.rational_coeff(n)?.to_string(),
            Coeffs::Float(_) => {
                crate::numeric::float_to_decimal(&self.float_coeff(n, prec_of(self.domain))?)
            }
        })
    }

    fn check_domain(&self, other: &QSeries) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch {
                left: self.domain,
                right: other.domain,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &QSeries) -> Result<QSeries> {
        self.add_or_sub(other, false)
    }

    pub fn sub(&self, other: &QSeries) -> Result<QSeries> {
        self.add_or_sub(other, true)
    }

    fn add_or_sub(&self, other: &QSeries, negate: bool) -> Result<QSeries> {
        self.check_domain(other)?;
        let (pa, pb) = (self.precision(), other.precision());
        Ok(match (&self.coeffs, &other.coeffs) {
            (Coeffs::Rational(a), Coeffs::Rational(b)) => add_generic(
                self.domain,
                (self.valuation, a, pa),
                (other.valuation, b, pb),
                negate,
            ),
            (Coeffs::Float(a), Coeffs::Float(b)) => add_generic(
                self.domain,
                (self.valuation, a, pa),
                (other.valuation, b, pb),
                negate,
            ),
            _ => unreachable!("domains checked"),
        })
    }

    pub fn neg(&self) -> QSeries {
        let mut out = self.clone();
        match &mut out.coeffs {
            Coeffs::Rational(v) => v.iter_mut().for_each(|c| c.neg_c()),
            Coeffs::Float(v) => v.iter_mut().for_each(|c| c.neg_c()),
        }
        out
    }

    pub fn mul(&self, other: &QSeries) -> Result<QSeries> {
        self.check_domain(other)?;
        if self.is_zero() || other.is_zero() {
            let precision = match (self.is_zero(), other.is_zero()) {
                (true, false) => self.precision() + other.valuation,
                (false, true) => other.precision() + self.valuation,
                _ => self.precision() + other.precision(),
            };
            return Ok(QSeries::zero(self.domain, precision));
        }
        let len = self.truncation.min(other.truncation);
        let valuation = self.valuation + other.valuation;
        Ok(match (&self.coeffs, &other.coeffs) {
            (Coeffs::Rational(a), Coeffs::Rational(b)) => {
                normalized(self.domain, valuation, Rational::convolve(a, b, len, self.domain))
            }
            (Coeffs::Float(a), Coeffs::Float(b)) => {
                normalized(self.domain, valuation, Float::convolve(a, b, len, self.domain))
            }
            _ => unreachable!("domains checked"),
        })
    }

    /// Multiplication by an exact scalar.
    pub fn scale(&self, c: &Rational) -> QSeries {
        if *c.numer() == 0 {
            return QSeries::zero(self.domain, self.precision());
        }
        let mut out = self.clone();
        match &mut out.coeffs {
            Coeffs::Rational(v) => v.iter_mut().for_each(|x| *x *= c),
            Coeffs::Float(v) => {
                let f = Float::from_rational_in(c, self.domain);
                v.iter_mut().for_each(|x| *x *= &f)
            }
        }
        out
    }

    pub fn scale_int(&self, c: i64) -> QSeries {
        self.scale(&Rational::from(c))
    }

    /// Non-negative integer power; `pow(0)` is `1` with this series' truncation.
    pub fn pow(&self, e: i64) -> Result<QSeries> {
        if e < 0 {
            return Err(Error::NegativeExponent(e));
        }
        let mut result = QSeries::one(self.domain, self.truncation.max(1));
        if e == 0 {
            return Ok(result);
        }
        let mut base = self.clone();
        let mut e = e as u64;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                result = if first { base.clone() } else { result.mul(&base)? };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Multiplicative inverse; valuation and truncation are mirrored.
    pub fn inv(&self) -> Result<QSeries> {
        if self.is_zero() {
            return Err(Error::ZeroSeries("series inverse"));
        }
        let valuation = -self.valuation;
        Ok(match &self.coeffs {
            Coeffs::Rational(u) => normalized(self.domain, valuation, inverse_unit(self.domain, u)),
            Coeffs::Float(u) => normalized(self.domain, valuation, inverse_unit(self.domain, u)),
        })
    }

    pub fn div(&self, other: &QSeries) -> Result<QSeries> {
        self.mul(&other.inv()?)
    }

    /// `D = q d/dq`: the coefficient of `q^n` becomes `n a_n`.
    pub fn d_operator(&self) -> QSeries {
        if self.is_zero() {
            return self.clone();
        }
        let v0 = self.valuation;
        match &self.coeffs {
            Coeffs::Rational(a) => {
                let out = a
                    .iter()
                    .enumerate()
                    .map(|(i, c)| Rational::from(c * (v0 + i as i64)))
                    .collect();
                normalized(self.domain, v0, out)
            }
            Coeffs::Float(a) => {
                let out = a
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let mut c = c.clone();
                        c *= v0 + i as i64;
                        c
                    })
                    .collect();
                normalized(self.domain, v0, out)
            }
        }
    }

    /// Coefficientwise rounding into the big-float domain.
    pub fn to_float(&self, precision_bits: u32) -> Result<QSeries> {
        let domain = CoefficientDomain::big_float(precision_bits)?;
        let coeffs = match &self.coeffs {
            Coeffs::Rational(v) => v.iter().map(|c| Float::with_val(precision_bits, c)).collect(),
            Coeffs::Float(v) => v.iter().map(|c| Float::with_val(precision_bits, c)).collect(),
        };
        Ok(QSeries {
            domain,
            valuation: self.valuation,
            truncation: self.truncation,
            coeffs: Coeffs::Float(coeffs),
        })
    }

    /// Substitutes `q -> q^p`, i.e. `f(tau) -> f(p tau)`.
    pub fn dilate(&self, p: u32) -> QSeries {
        assert!(p >= 1, "dilation factor must be positive");
        let p = p as usize;
        if self.is_zero() || p == 1 {
            let mut out = self.clone();
            if self.is_zero() {
                out.truncation *= p;
            }
            return out;
        }
        let len = self.truncation * p;
        let valuation = self.valuation * p as i64;
        match &self.coeffs {
            Coeffs::Rational(a) => {
                let mut v = vec![Rational::new(); len];
                for (i, c) in a.iter().enumerate() {
                    v[i * p] = c.clone();
                }
                normalized(self.domain, valuation, v)
            }
            Coeffs::Float(a) => {
                let mut v = vec![Float::zero_in(self.domain); len];
                for (i, c) in a.iter().enumerate() {
                    v[i * p] = c.clone();
                }
                normalized(self.domain, valuation, v)
            }
        }
    }

    /// Multiplies by `q^shift`.
    pub fn shift(&self, shift: i64) -> QSeries {
        let mut out = self.clone();
        if !out.is_zero() {
            out.valuation += shift;
        } else {
            out.truncation = (self.precision() + shift).max(0) as usize;
        }
        out
    }

    /// Drops coefficients so that the series is known modulo `q^precision`.
    /// Never widens.
    pub fn truncate_to(&self, precision: i64) -> QSeries {
        if precision >= self.precision() {
            return self.clone();
        }
        if self.is_zero() {
            return QSeries::zero(self.domain, precision);
        }
        let keep = (precision - self.valuation).max(0) as usize;
        match &self.coeffs {
            Coeffs::Rational(a) => normalized(self.domain, self.valuation, a[..keep].to_vec()),
            Coeffs::Float(a) => normalized(self.domain, self.valuation, a[..keep].to_vec()),
        }
    }

    /// True when `self - other` vanishes through the common truncation.
    pub fn agrees_with(&self, other: &QSeries) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }

    /// Largest |a_n| difference through the common truncation (as f64).
    pub fn max_abs_difference(&self, other: &QSeries) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(match &d.coeffs {
            Coeffs::Rational(v) => v.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max),
            Coeffs::Float(v) => v.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max),
        })
    }

    /// Serializable form: exact rationals as `"p/q"`, floats as full-precision decimals.
    pub fn to_json(&self) -> QSeriesJson {
        let coeffs = match &self.coeffs {
            Coeffs::Rational(v) => v.iter().map(|c| c.to_string()).collect(),
            Coeffs::Float(v) => v.iter().map(crate::numeric::float_to_decimal).collect(),
        };
        QSeriesJson {
            domain: match self.domain {
                CoefficientDomain::ExactRational => "exact-rational".into(),
                CoefficientDomain::BigFloat { .. } => "big-float".into(),
            },
            precision_bits: self.domain.precision_bits(),
            valuation: self.valuation,
            truncation: self.truncation,
            coeffs,
        }
    }

    pub fn from_json(j: &QSeriesJson) -> Result<QSeries> {
        let bad = |msg: String| Error::InvalidArgument(format!("series JSON: {msg}"));
        if !j.coeffs.is_empty() && j.coeffs.len() != j.truncation {
            return Err(bad(format!(
                "{} coefficients for truncation {}",
                j.coeffs.len(),
                j.truncation
            )));
        }
        let series = match j.domain.as_str() {
            "exact-rational" => {
                let coeffs = j
                    .coeffs
                    .iter()
                    .map(|s| {
                        Rational::parse(s)
                            .map(Rational::from)
                            .map_err(|e| bad(format!("`{s}`: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if coeffs.is_empty() {
                    QSeries::zero(CoefficientDomain::ExactRational, j.valuation + j.truncation as i64)
                } else {
                    QSeries::from_rationals(j.valuation, coeffs)
                }
            }
            "big-float" => {
                let prec = j
                    .precision_bits
                    .ok_or_else(|| bad("big-float without precision_bits".into()))?;
                let domain = CoefficientDomain::big_float(prec)?;
                let coeffs = j
                    .coeffs
                    .iter()
                    .map(|s| {
                        Float::parse(s)
                            .map(|p| Float::with_val(prec, p))
                            .map_err(|e| bad(format!("`{s}`: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if coeffs.is_empty() {
                    QSeries::zero(domain, j.valuation + j.truncation as i64)
                } else {
                    normalized(domain, j.valuation, coeffs)
                }
            }
            other => return Err(bad(format!("unknown domain `{other}`"))),
        };
        Ok(series)
    }
}

/// JSON schema of a serialized series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QSeriesJson {
    pub domain: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub precision_bits: Option<u32>,
    pub valuation: i64,
    pub truncation: usize,
    pub coeffs: Vec<String>,
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown = self.truncation.min(f.precision().unwrap_or(6));
        let mut first = true;
        for i in 0..shown {
            let n = self.valuation + i as i64;
            let c = self.coeff_string(n).unwrap_or_default();
            if c == "0" {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})q")?,
                _ => write!(f, "({c})q^{n}")?,
            }
        }
        if !first {
            f.write_str(" + ")?;
        }
        write!(f, "O(q^{})", self.precision())
    }
}
