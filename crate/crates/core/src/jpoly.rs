//! Level-1 forms as `E4^a E6^b Delta^m P(j)` and exact root certification of
//! `P` on `[0, 1728]`, the image of the boundary arc under `j`.

use std::fmt;

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{delta, eisenstein, j_invariant, ModularForm};
use crate::level::Level;
use crate::qseries::QSeries;
use crate::serre::serre_derivative;

/// Dense polynomial over the rationals, ascending coefficients, no trailing
/// zeros.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RationalPolynomial {
    coeffs: Vec<Rational>,
}

impl RationalPolynomial {
    pub fn zero() -> Self {
        RationalPolynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        RationalPolynomial::new(vec![c])
    }

    /// The variable `X`.
    pub fn x() -> Self {
        RationalPolynomial::from_ints(&[0, 1])
    }

    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        RationalPolynomial { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        RationalPolynomial::new(c.iter().map(|&x| Rational::from(x)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        RationalPolynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Rational::from(c * i as u32))
                .collect(),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let get = |v: &[Rational], i: usize| v.get(i).cloned().unwrap_or_default();
        RationalPolynomial::new((0..n).map(|i| get(&self.coeffs, i) + get(&o.coeffs, i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&Rational::from(-1)))
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return RationalPolynomial::zero();
        }
        let mut out = vec![Rational::new(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        RationalPolynomial::new(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        RationalPolynomial::new(self.coeffs.iter().map(|x| Rational::from(x * c)).collect())
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self)> {
        let dd = d.degree().ok_or(Error::ZeroPolynomial)?;
        let lead = d.leading().expect("nonzero").clone();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((RationalPolynomial::zero(), self.clone()));
        }
        let mut q = vec![Rational::new(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = Rational::from(&r[i + dd] / &lead);
            if c != 0 {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[i + j] -= Rational::from(&c * dc);
                }
            }
            q[i] = c;
        }
        r.truncate(dd);
        Ok((RationalPolynomial::new(q), RationalPolynomial::new(r)))
    }

    /// Exact quotient; errors when `d` does not divide.
    pub fn exact_div(&self, d: &Self) -> Result<Self> {
        let (q, r) = self.div_rem(d)?;
        if !r.is_zero() {
            return Err(Error::InvalidArgument("inexact polynomial division".into()));
        }
        Ok(q)
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&Rational::from(l.recip_ref())),
            None => self.clone(),
        }
    }

    /// Primitive integer multiple with positive leading coefficient.
    fn primitive(&self) -> Vec<Integer> {
        let lcm = self
            .coeffs
            .iter()
            .fold(Integer::from(1), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<Integer> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * Integer::from(&lcm / c.denom()))
            .collect();
        let mut p = primitive_part(&ints);
        if p.last().is_some_and(|l| *l < 0) {
            for c in &mut p {
                *c = Integer::from(-&*c);
            }
        }
        p
    }

    fn from_integers(v: &[Integer]) -> Self {
        RationalPolynomial::new(v.iter().map(Rational::from).collect())
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.monic();
        }
        if o.is_zero() {
            return self.monic();
        }
        let (a, b) = (self.primitive(), o.primitive());
        let g = if a.len() >= b.len() {
            subresultant_gcd(&a, &b)
        } else {
            subresultant_gcd(&b, &a)
        };
        RationalPolynomial::from_integers(&g).monic()
    }

    pub fn square_free_part(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let g = self.gcd(&self.derivative());
        Ok(self.exact_div(&g)?.monic())
    }

    /// Yun's decomposition: `(factor, multiplicity)` with square-free,
    /// pairwise coprime, non-constant monic factors.
    pub fn square_free_decomposition(&self) -> Result<Vec<(Self, u32)>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let mut out = Vec::new();
        if self.degree() == Some(0) {
            return Ok(out);
        }
        let d = self.derivative();
        let a0 = self.gcd(&d);
        let mut b = self.exact_div(&a0)?;
        let c = d.exact_div(&a0)?;
        let mut dd = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree() != Some(0) {
            let a = b.gcd(&dd);
            let nb = b.exact_div(&a)?;
            let nc = dd.exact_div(&a)?;
            if a.degree() != Some(0) {
                out.push((a, i));
            }
            dd = nc.sub(&nb.derivative());
            b = nb;
            i += 1;
        }
        Ok(out)
    }

    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let (neg, abs) = (*c < 0, Rational::from(c.abs_ref()));
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            match i {
                0 => write!(f, "{abs}")?,
                _ => {
                    if abs != 1 {
                        write!(f, "{abs}*")?;
                    }
                    if i == 1 {
                        f.write_str("X")?;
                    } else {
                        write!(f, "X^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn content(v: &[Integer]) -> Integer {
    v.iter().fold(Integer::new(), |acc, c| acc.gcd(c))
}

fn primitive_part(v: &[Integer]) -> Vec<Integer> {
    let c = content(v);
    if c == 0 || c == 1 {
        return v.to_vec();
    }
    v.iter().map(|x| Integer::from(x / &c)).collect()
}

fn trim(mut v: Vec<Integer>) -> Vec<Integer> {
    while v.last().is_some_and(|c| *c == 0) {
        v.pop();
    }
    v
}

/// Remainder of `m * a` by `b` over Z, where `m = lc(b)^(deg a - deg b + 1)`
/// or its absolute value when `keep_sign` is set.
fn pseudo_rem(a: &[Integer], b: &[Integer], keep_sign: bool) -> Vec<Integer> {
    let db = b.len() - 1;
    let mut r = a.to_vec();
    if r.len() <= db {
        return trim(r);
    }
    let lead = b[db].clone();
    let steps = r.len() - db;
    for _ in 0..steps {
        let n = r.len() - 1;
        if n < db {
            break;
        }
        let top = r[n].clone();
        // r = lead * r - top * x^(n - db) * b
        for c in r.iter_mut() {
            *c *= &lead;
        }
        for (j, bc) in b.iter().enumerate() {
            r[n - db + j] -= Integer::from(&top * bc);
        }
        r.pop();
    }
    // the loop multiplied by lead exactly `steps` times
    if keep_sign && lead < 0 && steps % 2 == 1 {
        for c in r.iter_mut() {
            *c = Integer::from(-&*c);
        }
    }
    trim(r)
}

/// Subresultant PRS gcd over Z; requires `deg a >= deg b`, `b != 0`.
fn subresultant_gcd(a: &[Integer], b: &[Integer]) -> Vec<Integer> {
    let d = content(a).gcd(&content(b));
    let mut a = primitive_part(a);
    let mut b = primitive_part(b);
    let mut g = Integer::from(1);
    let mut h = Integer::from(1);
    loop {
        let delta = (a.len() - b.len()) as u32;
        let r = pseudo_rem(&a, &b, false);
        if r.is_empty() {
            break;
        }
        if r.len() == 1 {
            b = vec![Integer::from(1)];
            break;
        }
        a = b;
        let div = &g * h.clone().pow(delta);
        b = r.iter().map(|c| Integer::from(c / &div)).collect();
        g = a.last().expect("nonzero").clone();
        if delta > 0 {
            let num = g.clone().pow(delta);
            let den = h.clone().pow(delta - 1);
            h = num / den;
        }
    }
    let mut out: Vec<Integer> = primitive_part(&b).into_iter().map(|c| c * &d).collect();
    if out.last().is_some_and(|l| *l < 0) {
        for c in &mut out {
            *c = Integer::from(-&*c);
        }
    }
    out
}

/// Sturm chain of a square-free polynomial, each member scaled by a
/// positive constant.
fn sturm_chain(p: &RationalPolynomial) -> Vec<Vec<Integer>> {
    let mut chain = vec![p.primitive(), p.derivative().primitive()];
    if chain[1].is_empty() {
        chain.pop();
        return chain;
    }
    loop {
        let n = chain.len();
        let r = pseudo_rem(&chain[n - 2], &chain[n - 1], true);
        if r.is_empty() {
            break;
        }
        let neg: Vec<Integer> = r.iter().map(|c| Integer::from(-c)).collect();
        let c = content(&neg);
        let next = if c > 1 {
            neg.iter().map(|x| Integer::from(x / &c)).collect()
        } else {
            neg
        };
        chain.push(next);
    }
    chain
}

fn eval_int(p: &[Integer], x: &Rational) -> Rational {
    let mut acc = Rational::new();
    for c in p.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

fn variations(chain: &[Vec<Integer>], x: &Rational) -> usize {
    let signs: Vec<i32> = chain
        .iter()
        .map(|p| eval_int(p, x).cmp0() as i32)
        .filter(|s| *s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootInterval {
    #[serde(serialize_with = "ser_rational")]
    pub lo: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub hi: Rational,
    pub multiplicity: u32,
    /// Decimal approximation of the root.
    pub approx: f64,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Real roots of a polynomial in a closed interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SturmResult {
    pub distinct_roots: usize,
    /// Isolating intervals `(lo, hi]`, or a single point when `lo = hi`.
    pub roots: Vec<RootInterval>,
    pub total_multiplicity: u32,
}

struct Sturm {
    chain: Vec<Vec<Integer>>,
    sqfree: RationalPolynomial,
}

impl Sturm {
    fn new(p: &RationalPolynomial) -> Result<Sturm> {
        let sqfree = p.square_free_part()?;
        Ok(Sturm {
            chain: sturm_chain(&sqfree),
            sqfree,
        })
    }

    /// Distinct roots in `(a, b]`.
    fn count(&self, a: &Rational, b: &Rational) -> usize {
        variations(&self.chain, a) - variations(&self.chain, b)
    }

    fn isolate(&self, a: &Rational, b: &Rational, out: &mut Vec<(Rational, Rational)>) {
        match self.count(a, b) {
            0 => {}
            1 => {
                if self.sqfree.eval(b) == 0 {
                    out.push((b.clone(), b.clone()));
                } else {
                    out.push((a.clone(), b.clone()));
                }
            }
            _ => {
                let mid = Rational::from(a + b) / 2u32;
                self.isolate(a, &mid, out);
                self.isolate(&mid, b, out);
            }
        }
    }

    /// Shrinks an isolating interval to width at most `width`.
    fn refine(&self, mut lo: Rational, mut hi: Rational, width: &Rational) -> (Rational, Rational) {
        while lo != hi && Rational::from(&hi - &lo) > *width {
            let mid = Rational::from(&lo + &hi) / 2u32;
            if self.sqfree.eval(&mid) == 0 {
                return (mid.clone(), mid);
            }
            if self.count(&lo, &mid) == 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo, hi)
    }
}

/// Distinct real roots of `p` in `[a, b]`, with isolating intervals and
/// multiplicities.
pub fn sturm_count(p: &RationalPolynomial, a: &Rational, b: &Rational) -> Result<SturmResult> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if a >= b {
        return Err(Error::InvalidInterval(format!("{a} >= {b}")));
    }
    if p.degree() == Some(0) {
        return Ok(SturmResult {
            distinct_roots: 0,
            roots: Vec::new(),
            total_multiplicity: 0,
        });
    }
    let s = Sturm::new(p)?;
    let mut intervals = Vec::new();
    if s.sqfree.eval(a) == 0 {
        intervals.push((a.clone(), a.clone()));
    }
    s.isolate(a, b, &mut intervals);
    let factors: Vec<(Sturm, u32)> = p
        .square_free_decomposition()?
        .into_iter()
        .map(|(f, m)| Ok((Sturm::new(&f)?, m)))
        .collect::<Result<_>>()?;
    let width = Rational::from((1, 1u64 << 60)) * Rational::from(Rational::from(b - a).abs_ref());
    let mut roots = Vec::new();
    for (lo, hi) in intervals {
        let multiplicity = factors
            .iter()
            .find(|(f, _)| {
                if lo == hi {
                    f.sqfree.eval(&lo) == 0
                } else {
                    f.count(&lo, &hi) == 1
                }
            })
            .map(|(_, m)| *m)
            .expect("every root belongs to one square-free factor");
        let (rl, rh) = s.refine(lo.clone(), hi.clone(), &width);
        let approx = Rational::from(&rl + &rh).to_f64() / 2.0;
        roots.push(RootInterval {
            lo,
            hi,
            multiplicity,
            approx,
        });
    }
    Ok(SturmResult {
        distinct_roots: roots.len(),
        total_multiplicity: roots.iter().map(|r| r.multiplicity).sum(),
        roots,
    })
}

/// `f = E4^epsilon E6^delta Delta^m P(j)` with `4 epsilon + 6 delta + 12 m = k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JDecomposition {
    pub weight: i64,
    pub epsilon: u32,
    pub delta: u32,
    pub m: i64,
    pub poly: RationalPolynomial,
}

/// `(epsilon, delta, m)` for weight `k`.
pub fn weight_residue(k: i64) -> Result<(u32, u32, i64)> {
    let (e, d) = match k.rem_euclid(12) {
        0 => (0, 0),
        2 => (2, 1),
        4 => (1, 0),
        6 => (0, 1),
        8 => (2, 0),
        10 => (1, 1),
        _ => {
            return Err(Error::InvalidWeight {
                weight: k,
                reason: "weight must be even",
            })
        }
    };
    Ok((e, d, (k - 4 * e as i64 - 6 * d as i64) / 12))
}

fn prefactor(epsilon: u32, delta: u32, m: i64, n: usize) -> Result<QSeries> {
    let terms = n + m.unsigned_abs() as usize + 2;
    let mut s = eisenstein(4, terms)?.series().pow(epsilon as i64)?;
    s = s.mul(&eisenstein(6, terms)?.series().pow(delta as i64)?)?;
    let d = delta_series(terms)?;
    let dm = if m >= 0 { d.pow(m)? } else { d.inv()?.pow(-m)? };
    s.mul(&dm)
}

fn delta_series(n: usize) -> Result<QSeries> {
    Ok(delta(n)?.into_series())
}

impl JDecomposition {
    /// `E4^epsilon E6^delta Delta^m P(j)` with `n` terms past its valuation.
    pub fn reconstruct(&self, n: usize) -> Result<QSeries> {
        let pre = prefactor(self.epsilon, self.delta, self.m, n)?;
        if self.poly.is_zero() {
            return Ok(QSeries::zero(pre.domain(), pre.valuation() + n as i64));
        }
        let terms = n + self.poly.coeffs().len() + 1;
        let j = j_invariant(terms)?.into_series();
        let mut acc = QSeries::zero(pre.domain(), terms as i64);
        for c in self.poly.coeffs().iter().rev() {
            acc = acc.mul(&j)?.add(&QSeries::constant(pre.domain(), c, terms))?;
        }
        let out = pre.mul(&acc)?;
        Ok(out.truncate_to(out.valuation() + n as i64))
    }

    /// Zeros forced by the Eisenstein prefactor.
    pub fn prefactor_zeros(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.epsilon > 0 {
            v.push("rho");
        }
        if self.delta > 0 {
            v.push("i");
        }
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "weight": self.weight,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "m": self.m,
            "poly": self.poly.coeff_strings(),
        })
    }
}

fn require_exact_level_one(f: &ModularForm) -> Result<()> {
    if f.level() != Level::ONE {
        return Err(Error::LevelNotAllowed {
            level: f.level().get(),
            reason: "the j-polynomial decomposition is implemented for level 1 only",
        });
    }
    if !f.series().domain().is_exact() {
        return Err(Error::NotExact);
    }
    Ok(())
}

/// Writes a level-1 form as a polynomial in `j` times Eisenstein and
/// discriminant powers, checking the result against the input.
pub fn decompose(f: &ModularForm) -> Result<JDecomposition> {
    require_exact_level_one(f)?;
    let k = f.weight();
    let (epsilon, delta, m) = weight_residue(k)?;
    let s = f.series();
    if s.is_zero() {
        return Ok(JDecomposition {
            weight: k,
            epsilon,
            delta,
            m,
            poly: RationalPolynomial::zero(),
        });
    }
    let v = s.valuation();
    let n = s.truncation();
    let deg = m - v;
    if deg < 0 {
        return Err(Error::Decomposition(format!(
            "cusp order {v} exceeds {m}; not a weight-{k} form"
        )));
    }
    let required = deg as usize + (m.unsigned_abs() as usize).max(1) + 8;
    if n < required {
        return Err(Error::TruncationShortfall {
            required,
            available: n,
        });
    }
    let pre = prefactor(epsilon, delta, m, n)?;
    let mut g = s.div(&pre)?;
    let j = j_invariant(n + 2)?.into_series();
    let mut powers = vec![QSeries::one(g.domain(), n + 2)];
    for _ in 0..deg {
        let next = powers.last().expect("nonempty").mul(&j)?;
        powers.push(next);
    }
    let mut coeffs = vec![Rational::new(); deg as usize + 1];
    for e in (0..=deg).rev() {
        let c = g.rational_coeff(-e).unwrap_or_default();
        if c != 0 {
            g = g.sub(&powers[e as usize].scale(&c))?;
        }
        coeffs[e as usize] = c;
    }
    if !g.is_zero() {
        return Err(Error::Decomposition(format!(
            "nonzero remainder from q^{} on; the series is not E4^{epsilon} E6^{delta} Delta^{m} P(j)",
            g.valuation()
        )));
    }
    let poly = RationalPolynomial::new(coeffs);
    debug_assert_eq!(poly.degree(), Some(deg as usize));
    Ok(JDecomposition {
        weight: k,
        epsilon,
        delta,
        m,
        poly,
    })
}

/// Decomposition of the Serre derivative, computed from the polynomial alone.
pub fn serre_poly(d: &JDecomposition) -> JDecomposition {
    let p = &d.poly;
    let dp = p.derivative();
    let x = RationalPolynomial::x();
    let x1728 = RationalPolynomial::from_ints(&[-1728, 1]);
    let r = |a: i64, b: i64| Rational::from((a, b));
    let x_dp = x.mul(&dp);
    let (epsilon, delta, m, poly) = match (d.epsilon, d.delta) {
        (0, 0) => (2, 1, d.m - 1, dp.scale(&r(-1, 1))),
        (1, 0) => (0, 1, d.m, p.scale(&r(-1, 3)).sub(&x_dp)),
        (2, 0) => (1, 1, d.m, p.scale(&r(-2, 3)).sub(&x_dp)),
        (0, 1) => (2, 0, d.m, p.scale(&r(-1, 2)).sub(&x1728.mul(&dp))),
        (e, 1) => {
            let c = r(-(e as i64), 3);
            let poly = x1728
                .mul(p)
                .scale(&c)
                .sub(&x.mul(p).scale(&r(1, 2)))
                .sub(&x.mul(&x1728).mul(&dp));
            (e - 1, 0, d.m + 1, poly)
        }
        _ => unreachable!("epsilon < 3 and delta < 2"),
    };
    JDecomposition {
        weight: d.weight + 2,
        epsilon,
        delta,
        m,
        poly,
    }
}

/// Exact statement that all zeros of `f` and of its Serre derivative lie on
/// the boundary arc.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    #[serde(serialize_with = "ser_decomp")]
    pub form: JDecomposition,
    #[serde(serialize_with = "ser_decomp")]
    pub derivative: JDecomposition,
    pub form_roots: SturmResult,
    pub derivative_roots: SturmResult,
    pub derivative_prefactor_zeros: Vec<&'static str>,
    /// The derivative's decomposition matched a direct decomposition of the
    /// differentiated series.
    pub cross_checked: bool,
    pub certified: bool,
}

fn ser_decomp<S: serde::Serializer>(d: &JDecomposition, s: S) -> std::result::Result<S::Ok, S::Error> {
    d.to_json().serialize(s)
}

fn arc_interval() -> (Rational, Rational) {
    (Rational::new(), Rational::from(1728))
}

/// Certifies that the zeros of `f` lie on the arc (the hypothesis) and then
/// that those of its Serre derivative do too.
pub fn certify_zeros_on_arc(f: &ModularForm) -> Result<Certificate> {
    let d = decompose(f)?;
    if d.poly.is_zero() {
        return Err(Error::HypothesisFailed("the form is zero".into()));
    }
    let deg = d.poly.degree().expect("nonzero") as u32;
    if d.epsilon == 0 && d.delta == 0 && deg == 0 {
        return Err(Error::HypothesisFailed("the form has no zeros in the upper half-plane".into()));
    }
    let (a, b) = arc_interval();
    let form_roots = sturm_count(&d.poly, &a, &b)?;
    if form_roots.total_multiplicity != deg {
        return Err(Error::HypothesisFailed(format!(
            "only {} of the {} roots of P = {} lie in [0, 1728]",
            form_roots.total_multiplicity, deg, d.poly
        )));
    }
    let derivative = serre_poly(&d);
    let direct = decompose(&serre_derivative(f)?)?;
    let cross_checked = direct == derivative;
    if !cross_checked {
        return Err(Error::Decomposition(format!(
            "Serre derivative polynomial {} disagrees with direct decomposition {}",
            derivative.poly, direct.poly
        )));
    }
    let ddeg = derivative.poly.degree().ok_or_else(|| {
        Error::Decomposition("Serre derivative vanishes although the form has zeros".into())
    })? as u32;
    let derivative_roots = sturm_count(&derivative.poly, &a, &b)?;
    let certified = derivative_roots.total_multiplicity == ddeg;
    Ok(Certificate {
        derivative_prefactor_zeros: derivative.prefactor_zeros(),
        form: d,
        derivative,
        form_roots,
        derivative_roots,
        cross_checked,
        certified,
    })
}
