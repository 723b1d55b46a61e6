//! Standard generating forms as q-expansions.
//!
//! Every constructor returns exact-rational coefficients; callers convert to
//! the float domain when they need to evaluate.

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::level::Level;
use crate::qseries::{CoefficientDomain, QSeries};

/// Default number of q-expansion terms.
pub const DEFAULT_TRUNCATION: usize = 1024;
/// Upper end of the supported truncation range.
pub const MAX_TRUNCATION: usize = 4096;

/// A q-expansion tagged with its weight and level.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularForm {
    weight: i64,
    level: Level,
    series: QSeries,
    real_coefficients: bool,
    label: String,
}

impl ModularForm {
    pub fn new(weight: i64, level: Level, series: QSeries, label: impl Into<String>) -> Result<Self> {
        if weight % 2 != 0 {
            return Err(Error::InvalidWeight {
                weight,
                reason: "weight must be even",
            });
        }
        Ok(ModularForm {
            weight,
            level,
            series,
            // Both coefficient domains are real.
            real_coefficients: true,
            label: label.into(),
        })
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn series(&self) -> &QSeries {
        &self.series
    }

    pub fn into_series(self) -> QSeries {
        self.series
    }

    pub fn real_coefficients(&self) -> bool {
        self.real_coefficients
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_series(&self, series: QSeries) -> Self {
        ModularForm {
            series,
            ..self.clone()
        }
    }

    fn check_level(&self, other: &ModularForm) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelNotAllowed {
                level: other.level.get(),
                reason: "operands have different levels",
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &ModularForm) -> Result<ModularForm> {
        self.add_or_sub(other, false)
    }

    pub fn sub(&self, other: &ModularForm) -> Result<ModularForm> {
        self.add_or_sub(other, true)
    }

    fn add_or_sub(&self, other: &ModularForm, negate: bool) -> Result<ModularForm> {
        self.check_level(other)?;
        if self.weight != other.weight {
            return Err(Error::WeightMismatch {
                left: self.weight,
                right: other.weight,
            });
        }
        let (series, op) = if negate {
            (self.series.sub(&other.series)?, "-")
        } else {
            (self.series.add(&other.series)?, "+")
        };
        ModularForm::new(self.weight, self.level, series, format!("({} {op} {})", self.label, other.label))
    }

    pub fn mul(&self, other: &ModularForm) -> Result<ModularForm> {
        self.check_level(other)?;
        ModularForm::new(
            self.weight + other.weight,
            self.level,
            self.series.mul(&other.series)?,
            format!("{}*{}", self.label, other.label),
        )
    }

    pub fn div(&self, other: &ModularForm) -> Result<ModularForm> {
        self.check_level(other)?;
        ModularForm::new(
            self.weight - other.weight,
            self.level,
            self.series.div(&other.series)?,
            format!("{}/{}", self.label, other.label),
        )
    }

    pub fn pow(&self, e: i64) -> Result<ModularForm> {
        ModularForm::new(
            self.weight * e,
            self.level,
            self.series.pow(e)?,
            format!("{}^{e}", self.label),
        )
    }

    pub fn scale(&self, c: &Rational) -> ModularForm {
        ModularForm {
            series: self.series.scale(c),
            label: format!("{c}*{}", self.label),
            ..self.clone()
        }
    }

    pub fn to_float(&self, precision_bits: u32) -> Result<ModularForm> {
        Ok(self.with_series(self.series.to_float(precision_bits)?))
    }

    /// Float-domain copy, converting only when needed.
    pub fn as_float(&self, precision_bits: u32) -> Result<ModularForm> {
        match self.series.domain() {
            CoefficientDomain::BigFloat { precision_bits: p } if p == precision_bits => Ok(self.clone()),
            _ => self.to_float(precision_bits),
        }
    }
}

/// Exact Bernoulli number `B_k` for even `k >= 2` (with `B_1 = -1/2`).
pub fn bernoulli(k: i64) -> Result<Rational> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidWeight {
            weight: k,
            reason: "Bernoulli numbers are provided for even k >= 2",
        });
    }
    Ok(bernoulli_table(k as usize).pop().expect("table has k+1 entries"))
}

/// `B_0 ..= B_n` from `sum_{j=0}^{m} C(m+1, j) B_j = 0`.
fn bernoulli_table(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    b.push(Rational::from(1));
    for m in 1..=n {
        let mut acc = Rational::new();
        let mut binom = Integer::from(1); // C(m+1, 0)
        for (j, bj) in b.iter().enumerate() {
            acc += Rational::from(bj * &binom);
            binom *= (m + 1 - j) as u64;
            binom /= (j + 1) as u64;
        }
        b.push(-acc / Rational::from(m as u64 + 1));
    }
    b
}

/// `sigma_e(n)` for `n < len` by a sieve (index 0 unused, set to 0).
pub fn divisor_sums(e: u32, len: usize) -> Vec<Integer> {
    let mut sigma = vec![Integer::new(); len];
    for d in 1..len {
        let power = Integer::from(Integer::u_pow_u(d as u32, e));
        let mut m = d;
        while m < len {
            sigma[m] += &power;
            m += d;
        }
    }
    sigma
}

fn check_truncation(n: usize) -> Result<()> {
    if n == 0 || n > MAX_TRUNCATION {
        return Err(Error::InvalidArgument(format!(
            "truncation {n} outside 1..={MAX_TRUNCATION}"
        )));
    }
    Ok(())
}

fn check_even_weight(k: i64, min: i64) -> Result<()> {
    if k % 2 != 0 || k < min {
        return Err(Error::InvalidWeight {
            weight: k,
            reason: "expected an even weight in range",
        });
    }
    Ok(())
}

/// `-2k / B_k`, the q^n coefficient of `E_k` divided by `sigma_{k-1}(n)`.
pub fn eisenstein_factor(k: i64) -> Result<Rational> {
    Ok(Rational::from(-2 * k) / bernoulli(k)?)
}

/// Normalized Eisenstein series `E_k` (quasi-modular for `k = 2`), level 1.
pub fn eisenstein(k: i64, n: usize) -> Result<ModularForm> {
    check_even_weight(k, 2)?;
    check_truncation(n)?;
    let factor = eisenstein_factor(k)?;
    let sigma = divisor_sums((k - 1) as u32, n);
    let coeffs = (0..n)
        .map(|i| {
            if i == 0 {
                Rational::from(1)
            } else {
                Rational::from(&factor * &sigma[i])
            }
        })
        .collect();
    ModularForm::new(k, Level::ONE, QSeries::from_rationals(0, coeffs), format!("E{k}"))
}

/// `Delta = (E4^3 - E6^2) / 1728`, with `n` terms from `q^1`.
pub fn delta(n: usize) -> Result<ModularForm> {
    check_truncation(n)?;
    let e4 = eisenstein(4, n + 1)?;
    let e6 = eisenstein(6, n + 1)?;
    let num = e4.series().pow(3)?.sub(&e6.series().pow(2)?)?;
    let series = num.scale(&Rational::from((1, 1728)));
    ModularForm::new(12, Level::ONE, series, "Delta")
}

/// `j = E4^3 / Delta`, with `n` terms from `q^-1`.
pub fn j_invariant(n: usize) -> Result<ModularForm> {
    check_truncation(n)?;
    let e4 = eisenstein(4, n)?;
    let d = delta(n)?;
    let series = e4.series().pow(3)?.div(d.series())?;
    ModularForm::new(0, Level::ONE, series, "j")
}

/// `E_{2,p}(tau) = (p E2(p tau) + E2(tau)) / (p + 1)`.
pub fn e2p(level: Level, n: usize) -> Result<ModularForm> {
    check_truncation(n)?;
    let p = level.get() as usize;
    let sigma = divisor_sums(1, n);
    let factor = Rational::from((-24, p as i64 + 1));
    let coeffs = (0..n)
        .map(|i| {
            if i == 0 {
                return Rational::from(1);
            }
            let mut s = sigma[i].clone();
            if i % p == 0 {
                s += Integer::from(&sigma[i / p] * p as u64);
            }
            Rational::from(&factor * &s)
        })
        .collect();
    let label = if p == 1 { "E2".to_string() } else { format!("E2p[{p}]") };
    ModularForm::new(2, level, QSeries::from_rationals(0, coeffs), label)
}

/// Fricke-symmetrized Eisenstein series
/// `(E_k(tau) + p^{k/2} E_k(p tau)) / (1 + p^{k/2})`, `k >= 4` even, `p > 1`.
pub fn fricke_eisenstein(k: i64, level: Level, n: usize) -> Result<ModularForm> {
    if level.get() == 1 {
        return Err(Error::LevelNotAllowed {
            level: 1,
            reason: "use the level-1 Eisenstein series E_k",
        });
    }
    check_even_weight(k, 4)?;
    check_truncation(n)?;
    let p = level.get() as usize;
    let pk2 = Integer::from(Integer::u_pow_u(p as u32, (k / 2) as u32));
    let norm = Rational::from(Integer::from(&pk2 + 1)).recip();
    let factor = eisenstein_factor(k)? * &norm;
    let sigma = divisor_sums((k - 1) as u32, n);
    let coeffs = (0..n)
        .map(|i| {
            if i == 0 {
                return Rational::from(1);
            }
            let mut s = sigma[i].clone();
            if i % p == 0 {
                s += Integer::from(&sigma[i / p] * &pk2);
            }
            Rational::from(&factor * &s)
        })
        .collect();
    ModularForm::new(k, level, QSeries::from_rationals(0, coeffs), format!("FrickeE({k})[{p}]"))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bernoulli numbers from the exponential generating function
    /// x/(e^x - 1) = sum B_n x^n / n!, computed by power-series division.
    fn bernoulli_egf(n: usize) -> Vec<Rational> {
        // e^x - 1 over x = sum x^m / (m+1)!
        let mut fact = vec![Integer::from(1)];
        for i in 1..=n + 2 {
            let next = Integer::from(&fact[i - 1] * i as u64);
            fact.push(next);
        }
        let d: Vec<Rational> = (0..=n).map(|m| Rational::from((1, fact[m + 1].clone()))).collect();
        let mut b = vec![Rational::new(); n + 1];
        for m in 0..=n {
            let mut acc = Rational::from(if m == 0 { 1 } else { 0 });
            for i in 1..=m {
                acc -= Rational::from(&d[i] * &b[m - i]);
            }
            b[m] = acc;
        }
        (0..=n).map(|m| Rational::from(&b[m] * &fact[m])).collect()
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(2).unwrap(), Rational::from((1, 6)));
        assert_eq!(bernoulli(4).unwrap(), Rational::from((-1, 30)));
        assert_eq!(bernoulli(12).unwrap(), Rational::from((-691, 2730)));
        let oracle = bernoulli_egf(40);
        for k in (2..=40).step_by(2) {
            assert_eq!(bernoulli(k).unwrap(), oracle[k as usize], "B_{k}");
        }
    }

    #[test]
    fn bernoulli_rejects_odd_and_nonpositive() {
        assert!(bernoulli(3).is_err());
        assert!(bernoulli(0).is_err());
        assert!(bernoulli(-2).is_err());
    }

    #[test]
    fn eisenstein_leading_coefficients() {
        let e2 = eisenstein(2, 8).unwrap();
        let c: Vec<i64> = (0..4).map(|n| e2.series().coeff_f64(n).unwrap() as i64).collect();
        assert_eq!(c, vec![1, -24, -72, -96]);
        assert_eq!(eisenstein(4, 8).unwrap().series().rational_coeff(1).unwrap(), 240);
        assert_eq!(eisenstein(6, 8).unwrap().series().rational_coeff(1).unwrap(), -504);
        assert!(eisenstein(5, 8).is_err());
    }

    #[test]
    fn delta_and_j_leading_terms() {
        let d = delta(16).unwrap();
        assert_eq!(d.series().valuation(), 1);
        assert_eq!(d.series().truncation(), 16);
        let tau: Vec<i64> = (1..5).map(|n| d.series().coeff_f64(n).unwrap() as i64).collect();
        assert_eq!(tau, vec![1, -24, 252, -1472]);
        let j = j_invariant(16).unwrap();
        assert_eq!(j.series().valuation(), -1);
        assert_eq!(j.series().rational_coeff(-1).unwrap(), 1);
        assert_eq!(j.series().rational_coeff(0).unwrap(), 744);
        assert_eq!(j.series().rational_coeff(1).unwrap(), 196884);
        assert_eq!(j.weight(), 0);
    }

    #[test]
    fn delta_matches_euler_product() {
        // q prod (1 - q^n)^24
        let n = 40usize;
        let mut prod = vec![Integer::new(); n];
        prod[0] = Integer::from(1);
        for m in 1..n {
            for _ in 0..24 {
                for i in (m..n).rev() {
                    let t = prod[i - m].clone();
                    prod[i] -= t;
                }
            }
        }
        let d = delta(n).unwrap();
        for (i, c) in prod.iter().enumerate() {
            assert_eq!(d.series().rational_coeff(i as i64 + 1).unwrap(), *c, "tau({})", i + 1);
        }
    }

    #[test]
    fn e2p_values() {
        let e21 = e2p(Level::ONE, 32).unwrap();
        assert_eq!(e21.series(), eisenstein(2, 32).unwrap().series());
        let c = |p: u32, n: i64| e2p(Level::new(p).unwrap(), 8).unwrap().series().rational_coeff(n).unwrap();
        assert_eq!((c(2, 1), c(2, 2)), (Rational::from(-8), Rational::from(-40)));
        assert_eq!((c(3, 1), c(3, 2), c(3, 3)), (Rational::from(-6), Rational::from(-18), Rational::from(-42)));
        // At p = 1 the divisibility term doubles the sum, giving E2's -24.
        assert_eq!(c(1, 1), -24);
        for p in [2, 3, 5, 7] {
            assert_eq!(c(p, 0), 1);
            assert_eq!(c(p, 1), Rational::from((-24, p as i64 + 1)));
        }
    }

    #[test]
    fn e2p_by_substitution() {
        // (p E2(p tau) + E2(tau)) / (p + 1) built from series operations.
        let e2 = eisenstein(2, 60).unwrap();
        for p in [2u32, 3, 5, 7] {
            let level = Level::new(p).unwrap();
            let sub = e2
                .series()
                .dilate(p)
                .scale_int(p as i64)
                .add(e2.series())
                .unwrap()
                .scale(&Rational::from((1, p as i64 + 1)));
            assert!(sub.agrees_with(e2p(level, 60).unwrap().series()).unwrap(), "p = {p}");
        }
    }

    #[test]
    fn fricke_eisenstein_values() {
        let l2 = Level::new(2).unwrap();
        let f = fricke_eisenstein(4, l2, 8).unwrap();
        assert_eq!(f.series().rational_coeff(1).unwrap(), 48);
        let g = fricke_eisenstein(6, Level::new(3).unwrap(), 8).unwrap();
        assert_eq!(g.series().rational_coeff(0).unwrap(), 1);
        assert_eq!(g.series().valuation(), 0);
        assert!(fricke_eisenstein(4, Level::ONE, 8).is_err());
    }

    #[test]
    fn coefficient_ratio_is_constant() {
        for k in [4i64, 6, 10, 12, 24] {
            let e = eisenstein(k, 64).unwrap();
            let sigma = divisor_sums((k - 1) as u32, 64);
            let expect = eisenstein_factor(k).unwrap();
            for n in [1usize, 7, 30, 63] {
                let a = e.series().rational_coeff(n as i64).unwrap();
                assert_eq!(a / Rational::from(&sigma[n]), expect);
            }
        }
    }

    #[test]
    fn structural_identity_small() {
        let e4 = eisenstein(4, 64).unwrap();
        let e6 = eisenstein(6, 64).unwrap();
        let lhs = e4.series().pow(3).unwrap().sub(&e6.series().pow(2).unwrap()).unwrap();
        let rhs = delta(64).unwrap().series().scale_int(1728);
        assert!(lhs.agrees_with(&rhs).unwrap());
    }

    #[test]
    fn weight_mismatch_in_addition() {
        let e4 = eisenstein(4, 8).unwrap();
        let e6 = eisenstein(6, 8).unwrap();
        assert!(matches!(e4.add(&e6), Err(Error::WeightMismatch { left: 4, right: 6 })));
        assert!(ModularForm::new(3, Level::ONE, e4.series().clone(), "x").is_err());
    }
}
