//! The Serre derivative `(D - (p+1)k/24 E_{2,p}) f` and its iterates.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::generators::{e2p, ModularForm, MAX_TRUNCATION};
use crate::level::Level;
use crate::qseries::{CoefficientDomain, QSeries};

type E2pKey = (u32, usize, CoefficientDomain);

fn e2p_cache() -> &'static RwLock<HashMap<E2pKey, Arc<QSeries>>> {
    static CACHE: OnceLock<RwLock<HashMap<E2pKey, Arc<QSeries>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `E_{2,p}` with `n` terms in `domain`, memoized per `(p, n, domain)`.
pub fn e2p_series(level: Level, n: usize, domain: CoefficientDomain) -> Result<Arc<QSeries>> {
    let key = (level.get(), n, domain);
    if let Some(s) = e2p_cache().read().expect("e2p cache poisoned").get(&key) {
        return Ok(Arc::clone(s));
    }
    // Racing fills compute the same value; whichever lands first is kept.
    let exact = e2p(level, n)?.into_series();
    let series = match domain {
        CoefficientDomain::ExactRational => exact,
        CoefficientDomain::BigFloat { precision_bits } => exact.to_float(precision_bits)?,
    };
    let mut map = e2p_cache().write().expect("e2p cache poisoned");
    Ok(Arc::clone(map.entry(key).or_insert_with(|| Arc::new(series))))
}

/// `(p + 1) k / 24`.
pub fn serre_coefficient(level: Level, weight: i64) -> Rational {
    Rational::from(((level.get() as i64 + 1) * weight, 24))
}

/// Serre derivative using a caller-supplied `E_{2,p}` expansion.
pub fn serre_derivative_with(f: &ModularForm, e2p: &QSeries) -> Result<ModularForm> {
    let series = f.series();
    if e2p.truncation() < series.truncation() {
        return Err(Error::TruncationShortfall {
            required: series.truncation(),
            available: e2p.truncation(),
        });
    }
    let correction = e2p
        .mul(series)?
        .scale(&serre_coefficient(f.level(), f.weight()));
    let out = series.d_operator().sub(&correction)?;
    ModularForm::new(f.weight() + 2, f.level(), out, format!("d({})", f.label()))
}

/// Weight `k` Serre derivative at level `p`; the result has weight `k + 2`.
pub fn serre_derivative(f: &ModularForm) -> Result<ModularForm> {
    let n = f.series().truncation();
    if n == 0 {
        return serre_derivative_with(f, &QSeries::zero(f.series().domain(), 0));
    }
    if n > MAX_TRUNCATION {
        return Err(Error::TruncationShortfall {
            required: n,
            available: MAX_TRUNCATION,
        });
    }
    let e = e2p_series(f.level(), n, f.series().domain())?;
    serre_derivative_with(f, &e)
}

/// `n`-fold composition, advancing the weight at every step.
pub fn serre_iterate(f: &ModularForm, n: u32) -> Result<ModularForm> {
    if n == 0 {
        return Err(Error::InvalidArgument("iterate count must be positive".into()));
    }
    let mut g = serre_derivative(f)?;
    for _ in 1..n {
        g = serre_derivative(&g)?;
    }
    let label = format!("d^{n}({})", f.label());
    Ok(g.with_label(label))
}

/// Order at the cusp: exponent of the first nonzero coefficient.
///
/// Float coefficients with magnitude at most `2^(32 - precision)` count as zero.
pub fn ord_infinity(f: &ModularForm) -> Result<i64> {
    ord_infinity_series(f.series())
}

pub fn ord_infinity_series(s: &QSeries) -> Result<i64> {
    if s.is_zero() {
        return Err(Error::ZeroSeries("ord_infinity"));
    }
    match s.domain() {
        CoefficientDomain::ExactRational => Ok(s.valuation()),
        CoefficientDomain::BigFloat { precision_bits } => {
            let threshold = Float::with_val(precision_bits, Float::i_exp(1, 32 - precision_bits as i32));
            let coeffs = s.floats().expect("float domain");
            coeffs
                .iter()
                .position(|c| c.clone().abs() > threshold)
                .map(|i| s.valuation() + i as i64)
                .ok_or(Error::ZeroSeries("ord_infinity"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{delta, eisenstein, fricke_eisenstein, j_invariant};

    const N: usize = 64;

    fn e(k: i64) -> ModularForm {
        eisenstein(k, N).unwrap()
    }

    #[test]
    fn ramanujan_identities() {
        let d4 = serre_derivative(&e(4)).unwrap();
        assert_eq!(d4.weight(), 6);
        assert_eq!(d4.series().rational_coeff(1).unwrap(), 168);
        let expect = e(6).series().scale(&Rational::from((-1, 3)));
        assert!(d4.series().agrees_with(&expect).unwrap());

        let d6 = serre_derivative(&e(6)).unwrap();
        let expect = e(4).series().pow(2).unwrap().scale(&Rational::from((-1, 2)));
        assert!(d6.series().agrees_with(&expect).unwrap());

        let dd = serre_derivative(&delta(N).unwrap()).unwrap();
        assert!(dd.series().is_zero());
        assert_eq!(dd.weight(), 14);
    }

    #[test]
    fn iterates() {
        let d = delta(N).unwrap();
        assert!(serre_iterate(&d, 2).unwrap().series().is_zero());
        assert_eq!(
            serre_iterate(&e(4), 1).unwrap().series(),
            serre_derivative(&e(4)).unwrap().series()
        );
        let it2 = serre_iterate(&e(4), 2).unwrap();
        assert_eq!(it2.weight(), 8);
        assert_eq!(it2.series().rational_coeff(1).unwrap(), 80);
        let expect = e(4).series().pow(2).unwrap().scale(&Rational::from((1, 6)));
        assert!(it2.series().agrees_with(&expect).unwrap());
        assert!(serre_iterate(&e(4), 0).is_err());
    }

    #[test]
    fn cusp_orders() {
        assert_eq!(ord_infinity(&delta(N).unwrap()).unwrap(), 1);
        assert_eq!(ord_infinity(&j_invariant(N).unwrap()).unwrap(), -1);
        let d4 = serre_derivative(&e(4)).unwrap();
        assert_eq!(ord_infinity(&d4).unwrap(), ord_infinity(&e(4)).unwrap());
        let zero = serre_derivative(&delta(N).unwrap()).unwrap();
        assert!(ord_infinity(&zero).is_err());
    }

    #[test]
    fn float_ord_infinity_ignores_rounding_noise() {
        let d = serre_derivative(&delta(N).unwrap().to_float(192).unwrap()).unwrap();
        assert!(matches!(ord_infinity(&d), Err(Error::ZeroSeries(_))));
        let e60 = eisenstein(60, 8).unwrap().to_float(192).unwrap();
        assert_eq!(ord_infinity(&e60).unwrap(), 0);
    }

    #[test]
    fn truncation_shortfall_reports_requirement() {
        let short = e2p(Level::ONE, 8).unwrap().into_series();
        match serre_derivative_with(&e(4), &short) {
            Err(Error::TruncationShortfall { required, available }) => {
                assert_eq!((required, available), (N, 8));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn float_agrees_with_exact() {
        let f = e(4).mul(&e(6)).unwrap();
        let exact = serre_derivative(&f).unwrap().series().to_float(192).unwrap();
        let float = serre_derivative(&f.to_float(192).unwrap()).unwrap();
        for n in 0..N as i64 {
            let a = exact.float_coeff(n, 192).unwrap();
            let b = float.series().float_coeff(n, 192).unwrap();
            let scale = a.clone().abs().max(&Float::with_val(192, 1));
            let rel = Float::with_val(192, &a - &b).abs() / scale;
            assert!(rel.to_f64() < 1e-20, "n = {n}");
        }
    }

    #[test]
    fn level_p_derivative_keeps_level_and_real_flag() {
        let l5 = Level::new(5).unwrap();
        let f = fricke_eisenstein(4, l5, N).unwrap();
        let d = serre_derivative(&f).unwrap();
        assert_eq!(d.level(), l5);
        assert_eq!(d.weight(), 6);
        assert!(d.real_coefficients());
        // ord_inf(f) = 0 differs from (p+1)k/24 = 1, so it is preserved.
        assert_eq!(ord_infinity(&d).unwrap(), 0);
    }

    #[test]
    fn memo_is_shared() {
        let a = e2p_series(Level::new(3).unwrap(), 40, CoefficientDomain::ExactRational).unwrap();
        let b = e2p_series(Level::new(3).unwrap(), 40, CoefficientDomain::ExactRational).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
