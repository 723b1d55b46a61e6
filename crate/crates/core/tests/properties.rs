use proptest::prelude::*;
use rug::{Float, Rational};

use serre_zeros::arc::{scan_zeros, Evaluator, Parity, ScanOptions};
use serre_zeros::generators::{delta, eisenstein, fricke_eisenstein};
use serre_zeros::geometry::domain_spec;
use serre_zeros::jpoly::{decompose, serre_poly, weight_residue, JDecomposition, RationalPolynomial};
use serre_zeros::serre::{ord_infinity, serre_derivative};
use serre_zeros::{parse_form_spec, Error, Level, ModularForm, QSeries, RunConfig};

fn series() -> impl Strategy<Value = QSeries> {
    (-2i64..3, prop::collection::vec(-20i64..20, 1..12)).prop_map(|(v, c)| QSeries::from_integers(v, &c))
}

fn unit_series() -> impl Strategy<Value = QSeries> {
    (-2i64..3, 1i64..5, prop::collection::vec(-20i64..20, 0..10)).prop_map(|(v, lead, rest)| {
        let mut c = vec![lead];
        c.extend(rest);
        QSeries::from_integers(v, &c)
    })
}

fn cfg(n: usize) -> RunConfig {
    RunConfig {
        truncation: n,
        ..RunConfig::default()
    }
}

/// `E4^a E6^b Delta^c` with its weight.
fn monomial(a: u32, b: u32, c: u32, n: usize) -> ModularForm {
    let mut f = ModularForm::new(0, Level::ONE, QSeries::one(serre_zeros::CoefficientDomain::ExactRational, n), "1").unwrap();
    for (g, e) in [(eisenstein(4, n).unwrap(), a), (eisenstein(6, n).unwrap(), b), (delta(n).unwrap(), c)] {
        if e > 0 {
            f = f.mul(&g.pow(e as i64).unwrap()).unwrap();
        }
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_ring_laws(a in series(), b in series(), c in series()) {
        prop_assert!(a.mul(&b).unwrap().agrees_with(&b.mul(&a).unwrap()).unwrap());
        let lhs = a.add(&b).unwrap().mul(&c).unwrap();
        let rhs = a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(lhs.agrees_with(&rhs).unwrap());
        // D is a derivation
        let d = a.mul(&b).unwrap().d_operator();
        let leibniz = a.d_operator().mul(&b).unwrap().add(&a.mul(&b.d_operator()).unwrap()).unwrap();
        prop_assert!(d.agrees_with(&leibniz).unwrap());
    }

    #[test]
    fn inverse_is_two_sided(a in unit_series()) {
        let inv = a.inv().unwrap();
        prop_assert_eq!(inv.valuation(), -a.valuation());
        let one = a.mul(&inv).unwrap();
        prop_assert_eq!(one.valuation(), 0);
        prop_assert_eq!(one.rational_coeff(0).unwrap(), 1);
        for n in 1..one.precision() {
            prop_assert_eq!(one.rational_coeff(n).unwrap(), 0);
        }
    }

    #[test]
    fn float_arithmetic_tracks_exact(a in series(), b in unit_series()) {
        let exact = a.div(&b).unwrap().to_float(192).unwrap();
        let float = a.to_float(192).unwrap().div(&b.to_float(192).unwrap()).unwrap();
        let scale = (0..exact.precision())
            .filter_map(|n| exact.coeff_f64(n))
            .fold(1f64, |m, x| m.max(x.abs()));
        prop_assert!(exact.max_abs_difference(&float).unwrap() <= 1e-40 * scale);
    }

    #[test]
    fn json_round_trip(a in series()) {
        let text = serde_json::to_string(&a.to_json()).unwrap();
        let back = QSeries::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn serre_derivative_is_a_derivation(a in 0u32..3, b in 0u32..2, c in 0u32..2, x in 0u32..3, y in 0u32..2, z in 0u32..2) {
        let n = 40;
        let f = monomial(a, b, c, n);
        let g = monomial(x, y, z, n);
        let lhs = serre_derivative(&f.mul(&g).unwrap()).unwrap();
        let rhs = serre_derivative(&f).unwrap().mul(&g).unwrap()
            .add(&f.mul(&serre_derivative(&g).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(lhs.weight(), f.weight() + g.weight() + 2);
        prop_assert!(lhs.series().agrees_with(rhs.series()).unwrap());
    }

    #[test]
    fn cusp_order_survives_differentiation(a in 0u32..4, b in 0u32..3, c in 0u32..3) {
        let f = monomial(a, b, c, 40);
        let k = f.weight();
        // ord changes only when f has no zeros in the upper half-plane
        prop_assume!(12 * c as i64 != k);
        let d = serre_derivative(&f).unwrap();
        prop_assert_eq!(ord_infinity(&d).unwrap(), ord_infinity(&f).unwrap());
    }

    #[test]
    fn j_polynomial_oracle_commutes(half_k in -6i64..14, coeffs in prop::collection::vec(-30i64..30, 1..4)) {
        let k = 2 * half_k;
        prop_assume!(k != 2);
        let (epsilon, delta, m) = weight_residue(k).unwrap();
        let mut poly = RationalPolynomial::from_ints(&coeffs);
        prop_assume!(!poly.is_zero());
        if m - (poly.degree().unwrap() as i64) < -1 {
            // keep the pole order modest
            poly = RationalPolynomial::from_ints(&coeffs[..1]);
            prop_assume!(!poly.is_zero());
        }
        let d = JDecomposition { weight: k, epsilon, delta, m, poly };
        let n = 48;
        let f = ModularForm::new(k, Level::ONE, d.reconstruct(n).unwrap(), "f").unwrap();
        prop_assert_eq!(&decompose(&f).unwrap(), &d);
        let direct = decompose(&serre_derivative(&f).unwrap()).unwrap();
        prop_assert_eq!(serre_poly(&d), direct);
    }

    #[test]
    fn parsed_weights_add_up(a in 0u32..4, b in 0u32..3, c in 0u32..3, s in 1i64..50) {
        let text = format!("{s} * E4^{a} * E6^{b} * Delta^{c}");
        let f = parse_form_spec(&text, Level::ONE, &cfg(24)).unwrap();
        prop_assert_eq!(f.weight(), 4 * a as i64 + 6 * b as i64 + 12 * c as i64);
        prop_assert_eq!(f.series().valuation(), c as i64);
        prop_assert_eq!(f.series().rational_coeff(c as i64).unwrap(), s);
        let quotient = parse_form_spec(&format!("({text}) / Delta^{}", c + 1), Level::ONE, &cfg(24)).unwrap();
        prop_assert_eq!(quotient.weight(), f.weight() - 12 * (c as i64 + 1));
        prop_assert_eq!(quotient.series().valuation(), -1);
    }

    #[test]
    fn mixed_weight_sums_rejected(a in 1u32..4, b in 1u32..4) {
        prop_assume!(4 * a != 6 * b);
        let r = parse_form_spec(&format!("E4^{a} - E6^{b}"), Level::ONE, &cfg(8));
        let mismatch = matches!(r, Err(Error::WeightMismatch { .. }));
        prop_assert!(mismatch);
    }

    #[test]
    fn tail_estimate_bounds_truncation_error(idx in 0usize..5, t in 0.02f64..0.98, k in 2i64..5) {
        let level = Level::ALL[idx];
        let (short, long) = if level == Level::ONE {
            (eisenstein(2 * k, 24).unwrap(), eisenstein(2 * k, 400).unwrap())
        } else {
            (fricke_eisenstein(2 * k, level, 24).unwrap(), fricke_eisenstein(2 * k, level, 400).unwrap())
        };
        let spec = domain_spec(level);
        let arc = &spec.arcs[spec.arcs.len() - 1];
        let width = Float::with_val(256, &arc.hi.value - &arc.lo.value);
        let theta = Float::with_val(256, &arc.lo.value + width * t);
        let tau = spec.arc_point(arc.id, &theta).unwrap();
        let ev_short = Evaluator::new(&short, 192).unwrap().with_tol(1e-3);
        let ev_long = Evaluator::new(&long, 192).unwrap();
        let a = ev_short.evaluate(&tau).unwrap();
        let b = ev_long.evaluate(&tau).unwrap();
        let err = a.value.sub(&b.value).abs().to_f64();
        prop_assert!(err <= a.tail + b.tail, "err {err:e} tail {:e}", a.tail);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn refining_the_grid_keeps_odd_zeros(half in 6i64..20) {
        let f = eisenstein(2 * half, 120).unwrap();
        let coarse = scan_zeros(&f, 1, &ScanOptions { grid: 128, ..ScanOptions::default() }).unwrap();
        let fine = scan_zeros(&f, 1, &ScanOptions { grid: 256, ..ScanOptions::default() }).unwrap();
        for z in coarse.zeros.iter().filter(|z| z.parity == Parity::Odd) {
            let t = z.theta.to_f64();
            let kept = fine.zeros.iter().any(|w| w.parity == Parity::Odd && (w.theta.to_f64() - t).abs() < 1e-9);
            prop_assert!(kept, "zero at {t} lost");
        }
        let odd = fine.zeros.iter().filter(|z| z.parity == Parity::Odd).count();
        prop_assert!(odd >= coarse.zeros.iter().filter(|z| z.parity == Parity::Odd).count());
        // budget k/12 minus the forced endpoint part, in whole interior zeros
        let expected = Rational::from((2 * half, 12)) - fine.zeros.iter()
            .filter(|z| z.parity == Parity::Endpoint)
            .fold(Rational::new(), |acc, z| acc + Rational::from((z.order, z.half_order)));
        prop_assert_eq!(Rational::from(odd as i64), expected);
    }
}
