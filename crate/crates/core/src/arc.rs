//! Numerical evaluation of forms on the boundary arcs: the real-valued arc
//! restriction, zero scanning, the differential identity behind the
//! interlacing argument, and the valence audit.

use std::borrow::Cow;
use std::fmt::Write as _;

use rayon::prelude::*;
use rug::{Float, Rational};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::generators::ModularForm;
use crate::geometry::{domain_spec, valence_budget, ArcCircle, BoundaryArc, DomainSpec, GEOMETRY_PRECISION};
use crate::level::Level;
use crate::numeric::{log2_abs, pi, sqrt_int, BigComplex};
use crate::qseries::QSeries;
use crate::serre::ord_infinity;

/// Default working precision for evaluation.
pub const DEFAULT_PRECISION: u32 = 192;
/// Truncation error allowed per evaluation, relative to `sum |a_n q^n|`.
pub const DEFAULT_EVAL_TOL: f64 = 1e-30;
/// An endpoint value below this fraction of `sum |a_n q^n|` counts as a zero.
pub const ENDPOINT_ZERO_TOL: f64 = 1e-20;
pub const DEFAULT_GRID: usize = 2048;
pub const DEFAULT_REFINE_TOL: f64 = 1e-12;
/// Local minima of `|F|` below this fraction of the nearby maximum are
/// reported as possible even-order zeros.
pub const DEFAULT_MINIMA_THRESHOLD: f64 = 1e-8;

const TAIL_WINDOW: usize = 32;
const TAIL_SAFETY: f64 = 8.0;
/// Terms are kept until they fall this many bits below the tolerance.
const TAIL_MARGIN_BITS: f64 = 10.0;
const MINIMA_WINDOW: usize = 32;
const ORDER_STEP: f64 = 1e-6;

fn ser_float<S: Serializer>(x: &Float, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string_radix(10, Some(30)))
}

fn ser_complex<S: Serializer>(z: &BigComplex, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re.to_string_radix(10, Some(30)), z.im.to_string_radix(10, Some(30))].serialize(s)
}

fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// A truncated expansion evaluated at a point, with its truncation error bound.
#[derive(Clone, Debug, Serialize)]
pub struct EvalResult {
    #[serde(serialize_with = "ser_complex")]
    pub value: BigComplex,
    /// Absolute bound on the neglected tail.
    pub tail: f64,
    /// `sum |a_n| |q|^n` over the retained terms.
    pub scale: f64,
    pub terms: usize,
    #[serde(serialize_with = "ser_complex")]
    pub tau: BigComplex,
    pub usable: bool,
    /// Terms that would bring the tail under tolerance when `usable` is false.
    pub required_terms: usize,
    pub available_terms: usize,
    pub tol: f64,
}

impl EvalResult {
    pub fn require_usable(self) -> Result<EvalResult> {
        if self.usable {
            Ok(self)
        } else {
            Err(Error::InsufficientTruncation {
                tail: self.tail,
                tol: self.tol * self.scale,
                required: self.required_terms,
                available: self.available_terms,
            })
        }
    }
}

/// A weight-`k` expansion prepared for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Evaluator {
    weight: i64,
    spec: Cow<'static, DomainSpec>,
    prec: u32,
    valuation: i64,
    coeffs: Vec<Float>,
    log2: Vec<f64>,
    tol: f64,
}

impl Evaluator {
    pub fn new(f: &ModularForm, prec: u32) -> Result<Evaluator> {
        Evaluator::from_series(f.series(), f.weight(), f.level(), prec)
    }

    /// Evaluates `series` as if it had weight `weight` (used for `D f`).
    pub fn from_series(series: &QSeries, weight: i64, level: Level, prec: u32) -> Result<Evaluator> {
        if series.is_zero() {
            return Err(Error::ZeroSeries("evaluation"));
        }
        let prec = prec.max(crate::qseries::MIN_PRECISION_BITS);
        let float = series.to_float(prec)?;
        let coeffs = float.floats().expect("float series").to_vec();
        let log2 = coeffs.iter().map(log2_abs).collect();
        let spec = if prec <= GEOMETRY_PRECISION {
            Cow::Borrowed(domain_spec(level))
        } else {
            Cow::Owned(DomainSpec::with_precision(level, prec))
        };
        Ok(Evaluator {
            weight,
            spec,
            prec,
            valuation: series.valuation(),
            coeffs,
            log2,
            tol: DEFAULT_EVAL_TOL,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Evaluator {
        self.tol = tol;
        self
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn level(&self) -> Level {
        self.spec.level
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn evaluate(&self, tau: &BigComplex) -> Result<EvalResult> {
        if tau.im.is_sign_negative() || tau.im.is_zero() {
            return Err(Error::NotInUpperHalfPlane);
        }
        let prec = self.prec;
        let tau = BigComplex::new(Float::with_val(prec, &tau.re), Float::with_val(prec, &tau.im));
        let n = self.coeffs.len();
        let log2_q = -2.0 * std::f64::consts::PI * tau.im.to_f64() / std::f64::consts::LN_2;
        let terms: Vec<f64> = self
            .log2
            .iter()
            .enumerate()
            .map(|(i, l)| l + i as f64 * log2_q)
            .collect();
        let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scale_log = top + terms.iter().map(|t| (t - top).exp2()).sum::<f64>().log2();
        let cut = self.tol.log2() + scale_log - TAIL_MARGIN_BITS;
        let last = terms.iter().rposition(|t| *t > cut).unwrap_or(0);
        let m = n.min(last + 1 + TAIL_WINDOW);

        let q = BigComplex::nome(&tau);
        let mut acc = BigComplex::zero(prec);
        for c in self.coeffs[..m].iter().rev() {
            acc = acc.mul(&q);
            acc.re += c;
        }
        if self.valuation != 0 {
            acc = acc.mul(&q.powi(self.valuation));
        }

        let window = &terms[m.saturating_sub(TAIL_WINDOW)..m];
        let window_max = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let abs_q = log2_q.exp2();
        let tail = TAIL_SAFETY * abs_q / (1.0 - abs_q) * window_max.exp2();
        let scale = scale_log.exp2();
        let usable = tail <= self.tol * scale;
        let required = if usable {
            m
        } else {
            let slope = (window[window.len() - 1] - window[0]) / (window.len().max(2) - 1) as f64;
            if slope < 0.0 {
                let extra = ((window_max - cut) / -slope).ceil() as usize;
                n + extra + TAIL_WINDOW
            } else {
                2 * n
            }
        };
        Ok(EvalResult {
            value: acc,
            tail,
            scale,
            terms: m,
            tau,
            usable,
            required_terms: required,
            available_terms: n,
            tol: self.tol,
        })
    }

    fn arc_data(&self, arc: u8) -> Result<&BoundaryArc> {
        self.spec.arc(arc)
    }

    /// `e^{i k phi / 2} f(tau(theta))` without the interval check, so
    /// difference quotients may step slightly past an end.
    pub fn restriction_unchecked(&self, arc: &BoundaryArc, theta: &Float) -> Result<(BigComplex, EvalResult)> {
        let theta = Float::with_val(self.prec, theta);
        let tau = self.spec.arc_point_unchecked(arc, &theta);
        let r = self.evaluate(&tau)?;
        let phi = Float::with_val(self.prec, &theta - &arc.phase_shift.value);
        let half_k_phi = phi * Float::with_val(self.prec, self.weight) / 2u32;
        let phase = BigComplex::cis(&half_k_phi);
        Ok((phase.mul(&r.value), r))
    }

    /// Complex value of the arc restriction; its imaginary part vanishes for
    /// real-coefficient forms.
    pub fn restriction(&self, arc: u8, theta: &Float) -> Result<(BigComplex, EvalResult)> {
        let data = self.arc_data(arc)?;
        let theta = Float::with_val(self.prec, theta);
        self.spec.arc_point(arc, &theta)?;
        self.restriction_unchecked(data, &theta)
    }
}

/// Evaluates `f` at `tau`; exact forms are converted to `prec`-bit floats.
pub fn evaluate(f: &ModularForm, tau: &BigComplex, tol: f64) -> Result<EvalResult> {
    Evaluator::new(f, tau.prec().max(DEFAULT_PRECISION))?
        .with_tol(tol)
        .evaluate(tau)
}

/// Real part of the arc restriction, with the imaginary part alongside.
pub fn arc_restriction(f: &ModularForm, arc: u8, theta: &Float, tol: f64) -> Result<(Float, Float)> {
    let ev = Evaluator::new(f, theta.prec().max(DEFAULT_PRECISION))?.with_tol(tol);
    let (v, r) = ev.restriction(arc, theta)?;
    r.require_usable()?;
    Ok((v.re, v.im))
}

fn grid(arc: &BoundaryArc, prec: u32, size: usize) -> Vec<Float> {
    let lo = Float::with_val(prec, &arc.lo.value);
    let width = Float::with_val(prec, &arc.hi.value - &lo);
    (0..=size)
        .map(|i| {
            let mut t = Float::with_val(prec, &width * i as u32);
            t /= size as u32;
            t += &lo;
            t
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RealnessReport {
    pub arc: u8,
    pub grid: usize,
    pub max_imaginary: f64,
    pub max_tail: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Largest `|Im F|` over a uniform grid of the closed arc interval.
pub fn realness_check(ev: &Evaluator, arc: u8, grid_size: usize, tol: f64) -> Result<RealnessReport> {
    let data = ev.arc_data(arc)?;
    let points = grid(data, ev.prec, grid_size);
    let samples: Vec<(f64, f64)> = points
        .par_iter()
        .map(|t| {
            let (v, r) = ev.restriction_unchecked(data, t)?;
            let r = r.require_usable()?;
            Ok((v.im.to_f64().abs(), r.tail))
        })
        .collect::<Result<_>>()?;
    let max_imaginary = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let max_tail = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    Ok(RealnessReport {
        arc,
        grid: grid_size,
        max_imaginary,
        max_tail,
        tol,
        passed: max_imaginary <= tol + max_tail,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    /// Located by a sign change.
    Odd,
    /// A near-zero local minimum without sign change.
    SuspectedEven,
    /// A zero at an elliptic end of the arc.
    Endpoint,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Odd => "odd",
            Parity::SuspectedEven => "suspected-even",
            Parity::Endpoint => "endpoint",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcZero {
    pub arc: u8,
    #[serde(serialize_with = "ser_float")]
    pub theta: Float,
    #[serde(serialize_with = "ser_complex")]
    pub tau: BigComplex,
    /// Width of the final bracket; zero for endpoint zeros.
    pub bracket_width: f64,
    pub parity: Parity,
    pub endpoint: bool,
    /// Label of the elliptic point for endpoint zeros.
    pub elliptic: Option<&'static str>,
    pub half_order: u32,
    /// Estimated order of vanishing.
    pub order: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub grid: usize,
    pub refine_tol: f64,
    pub minima_threshold: f64,
    pub eval_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            grid: DEFAULT_GRID,
            refine_tol: DEFAULT_REFINE_TOL,
            minima_threshold: DEFAULT_MINIMA_THRESHOLD,
            eval_tol: DEFAULT_EVAL_TOL,
        }
    }
}

/// Zeros on one arc, in increasing `theta`.
#[derive(Clone, Debug, Serialize)]
pub struct ArcScan {
    pub arc: u8,
    pub grid: usize,
    pub zeros: Vec<ArcZero>,
    /// Largest tail bound seen relative to the local scale.
    pub max_relative_tail: f64,
}

fn sign(x: &Float) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_sign_negative() {
        -1
    } else {
        1
    }
}

impl Evaluator {
    fn real_at(&self, arc: &BoundaryArc, theta: &Float) -> Result<(Float, f64)> {
        let (v, r) = self.restriction_unchecked(arc, theta)?;
        let r = r.require_usable()?;
        Ok((v.re, r.scale))
    }

    /// Order of vanishing at `theta` from `|F(theta + 2h)| / |F(theta + h)|`,
    /// stepping in direction `dir`.
    fn order_estimate(&self, arc: &BoundaryArc, theta: &Float, dir: f64, h: f64) -> Result<f64> {
        let step = Float::with_val(self.prec, h * dir);
        let t1 = Float::with_val(self.prec, theta + &step);
        let t2 = Float::with_val(self.prec, &t1 + &step);
        let (a, _) = self.real_at(arc, &t1)?;
        let (b, _) = self.real_at(arc, &t2)?;
        Ok(log2_abs(&b) - log2_abs(&a))
    }

    /// Sign changes, near-zero minima and vanishing elliptic ends of one arc.
    pub fn scan_arc(&self, arc: u8, opts: &ScanOptions) -> Result<ArcScan> {
        if opts.grid < 16 {
            return Err(Error::InvalidArgument(format!("grid size {} below 16", opts.grid)));
        }
        let ev = self.clone().with_tol(opts.eval_tol);
        let data = ev.arc_data(arc)?.clone();
        let thetas = grid(&data, ev.prec, opts.grid);
        let values: Vec<(Float, f64, f64)> = thetas
            .par_iter()
            .map(|t| {
                let (v, r) = ev.restriction_unchecked(&data, t)?;
                let r = r.require_usable()?;
                Ok((v.re, r.scale, r.tail / r.scale))
            })
            .collect::<Result<_>>()?;
        let max_relative_tail = values.iter().map(|v| v.2).fold(0.0, f64::max);

        let g = opts.grid;
        let vanishes = |i: usize| -> bool {
            let (v, scale, _) = &values[i];
            v.clone().abs().to_f64() <= ENDPOINT_ZERO_TOL * scale
        };
        let mut zeros = Vec::new();
        let mut signs: Vec<i8> = values.iter().map(|(v, _, _)| sign(v)).collect();
        for (i, s) in signs.iter_mut().enumerate() {
            if vanishes(i) {
                *s = 0;
            }
        }

        // ends attributed to elliptic points; arc 2's lower end is the corner,
        // which arc 1 owns
        let ends = [(0usize, data.lo_elliptic, 1.0), (g, data.hi_elliptic, -1.0)];
        for (idx, elliptic, dir) in ends {
            let Some(e_idx) = elliptic else { continue };
            if signs[idx] != 0 {
                continue;
            }
            let point = &ev.spec.elliptic_points[e_idx];
            let forced = point.forced_order(ev.weight);
            let h = ORDER_STEP.min((data.hi.to_f64() - data.lo.to_f64()) / 8.0);
            let est = ev.order_estimate(&data, &thetas[idx], dir, h)?;
            let e = point.half_order as i64;
            let mut best = if forced == 0 { e } else { forced as i64 };
            let mut r = best;
            while (r as f64) < est + e as f64 {
                if (r as f64 - est).abs() < (best as f64 - est).abs() {
                    best = r;
                }
                r += e;
            }
            zeros.push(ArcZero {
                arc,
                theta: thetas[idx].clone(),
                tau: ev.spec.arc_point_unchecked(&data, &thetas[idx]),
                bracket_width: 0.0,
                parity: Parity::Endpoint,
                endpoint: true,
                elliptic: Some(point.label),
                half_order: point.half_order,
                order: best as u32,
            });
        }

        // interior sign changes, skipping numerically zero grid values
        let mut prev: Option<usize> = None;
        for i in 0..=g {
            if signs[i] == 0 {
                continue;
            }
            if let Some(j) = prev {
                if signs[j] != signs[i] {
                    zeros.push(ev.bisect(&data, &thetas[j], &thetas[i], signs[j], opts.refine_tol)?);
                }
            }
            prev = Some(i);
        }

        // minima of |F| without a sign change
        let mags: Vec<f64> = values.iter().map(|(v, _, _)| log2_abs(v)).collect();
        for i in 1..g {
            if signs[i - 1] == 0 || signs[i + 1] == 0 || signs[i - 1] != signs[i + 1] || signs[i] != signs[i - 1] {
                continue;
            }
            if mags[i] > mags[i - 1] || mags[i] > mags[i + 1] {
                continue;
            }
            let lo = i.saturating_sub(MINIMA_WINDOW);
            let hi = (i + MINIMA_WINDOW).min(g);
            let local_max = mags[lo..=hi].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if mags[i] < local_max + opts.minima_threshold.log2() {
                let width = Float::with_val(ev.prec, &thetas[i + 1] - &thetas[i - 1]).to_f64();
                zeros.push(ArcZero {
                    arc,
                    theta: thetas[i].clone(),
                    tau: ev.spec.arc_point_unchecked(&data, &thetas[i]),
                    bracket_width: width,
                    parity: Parity::SuspectedEven,
                    endpoint: false,
                    elliptic: None,
                    half_order: 1,
                    order: 2,
                });
            }
        }
        zeros.sort_by(|a, b| a.theta.partial_cmp(&b.theta).expect("finite angles"));
        Ok(ArcScan {
            arc,
            grid: g,
            zeros,
            max_relative_tail,
        })
    }

    fn bisect(&self, arc: &BoundaryArc, a: &Float, b: &Float, sign_a: i8, tol: f64) -> Result<ArcZero> {
        let prec = self.prec;
        let mut lo = a.clone();
        let mut hi = b.clone();
        let tol_f = Float::with_val(prec, tol);
        let mut exact = false;
        while Float::with_val(prec, &hi - &lo) > tol_f {
            let mid = Float::with_val(prec, &lo + &hi) / 2u32;
            let (v, _) = self.real_at(arc, &mid)?;
            match sign(&v) {
                0 => {
                    lo = mid.clone();
                    hi = mid;
                    exact = true;
                    break;
                }
                s if s == sign_a => lo = mid,
                _ => hi = mid,
            }
        }
        let width = Float::with_val(prec, &hi - &lo).to_f64();
        let theta = Float::with_val(prec, &lo + &hi) / 2u32;
        let gap = Float::with_val(prec, b - a).to_f64();
        let h = ORDER_STEP.min(gap / 8.0);
        let order = if exact {
            1
        } else {
            let up = self.order_estimate(arc, &theta, 1.0, h)?;
            let down = self.order_estimate(arc, &theta, -1.0, h)?;
            let est = 0.5 * (up + down);
            // odd, at least one
            let r = ((est - 1.0) / 2.0).round().max(0.0) as u32;
            2 * r + 1
        };
        Ok(ArcZero {
            arc: arc.id,
            tau: self.spec.arc_point_unchecked(arc, &theta),
            theta,
            bracket_width: width,
            parity: Parity::Odd,
            endpoint: false,
            elliptic: None,
            half_order: 1,
            order,
        })
    }

    /// Scans every arc of the level.
    pub fn scan(&self, opts: &ScanOptions) -> Result<Vec<ArcScan>> {
        self.spec
            .arcs
            .iter()
            .map(|a| self.scan_arc(a.id, opts))
            .collect()
    }

    /// `(theta, Re F, Im F)` over the closed arc interval.
    pub fn sample(&self, arc: u8, grid_size: usize) -> Result<Vec<(Float, Float, Float)>> {
        let data = self.arc_data(arc)?;
        grid(data, self.prec, grid_size)
            .into_par_iter()
            .map(|t| {
                let (v, r) = self.restriction_unchecked(data, &t)?;
                r.require_usable()?;
                Ok((t, v.re, v.im))
            })
            .collect()
    }
}

pub fn scan_zeros(f: &ModularForm, arc: u8, opts: &ScanOptions) -> Result<ArcScan> {
    Evaluator::new(f, DEFAULT_PRECISION)?.scan_arc(arc, opts)
}

/// Central difference of the arc restriction against the closed form
/// `(ik/2) F_k(f) - c F_{k+2}(Df)`, with `c = 2 pi / sqrt p` on the first arc
/// and `pi / sqrt p` on the second.
pub fn derivative_identity_check(f: &ModularForm, arc: u8, theta: f64, h: f64, prec: u32) -> Result<f64> {
    let ev = Evaluator::new(f, prec)?;
    let dev = Evaluator::from_series(&f.series().d_operator(), f.weight() + 2, f.level(), prec)?;
    identity_residual(&ev, &dev, arc, theta, h)
}

pub fn identity_residual(ev: &Evaluator, dev: &Evaluator, arc: u8, theta: f64, h: f64) -> Result<f64> {
    let prec = ev.prec;
    let data = ev.arc_data(arc)?;
    let t = Float::with_val(prec, theta);
    let step = Float::with_val(prec, h);
    let (plus, r1) = ev.restriction_unchecked(data, &Float::with_val(prec, &t + &step))?;
    let (minus, r2) = ev.restriction_unchecked(data, &Float::with_val(prec, &t - &step))?;
    let (mid, r3) = ev.restriction_unchecked(data, &t)?;
    let (dmid, r4) = dev.restriction_unchecked(data, &t)?;
    for r in [r1, r2, r3, r4] {
        r.require_usable()?;
    }
    let lhs = plus.sub(&minus).scale(&Float::with_val(prec, 2.0 * h).recip());
    let half_k = Float::with_val(prec, ev.weight) / 2u32;
    let ik2 = BigComplex::new(Float::new(prec), half_k).mul(&mid);
    let p = ev.level().get();
    let mut c = Float::with_val(prec, pi(prec) / sqrt_int(p, prec));
    if data.circle == ArcCircle::Origin {
        c *= 2u32;
    }
    let rhs = ik2.sub(&dmid.scale(&c));
    Ok(lhs.sub(&rhs).abs().to_f64())
}

#[derive(Clone, Debug, Serialize)]
pub struct InterlacingPair {
    pub arc: u8,
    pub lo: f64,
    pub hi: f64,
    /// A zero of the derivative strictly inside, if one was located.
    pub witness: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InterlacingReport {
    pub pairs: Vec<InterlacingPair>,
    /// Pairs straddling the corner between the two arcs.
    pub cross_corner: Vec<InterlacingPair>,
    pub violations: usize,
}

/// Checks that every gap between adjacent zeros of `f` on one arc contains a
/// zero of its Serre derivative.
pub fn interlacing_check(spec: &DomainSpec, f_scans: &[ArcScan], df_scans: &[ArcScan]) -> InterlacingReport {
    let alpha = spec.alpha.to_f64();
    let thetas = |scans: &[ArcScan], arc: u8| -> Vec<f64> {
        scans
            .iter()
            .filter(|s| s.arc == arc)
            .flat_map(|s| s.zeros.iter().map(|z| z.theta.to_f64()))
            .collect()
    };
    let df_all: Vec<f64> = df_scans
        .iter()
        .flat_map(|s| s.zeros.iter().map(|z| z.theta.to_f64()))
        .collect();
    let witness = |lo: f64, hi: f64, skip_corner: bool| -> Option<f64> {
        df_all
            .iter()
            .copied()
            .find(|t| *t > lo && *t < hi && !(skip_corner && (t - alpha).abs() < 1e-14))
    };
    let mut pairs = Vec::new();
    let mut cross_corner = Vec::new();
    let arc1 = thetas(f_scans, 1);
    let corner_zero = arc1.last().is_some_and(|t| (t - alpha).abs() < 1e-14);
    for arc in spec.arcs.iter().map(|a| a.id) {
        let mut zs = thetas(f_scans, arc);
        if arc == 2 && corner_zero {
            // the corner zero also bounds the second arc from below
            zs.insert(0, alpha);
        }
        for w in zs.windows(2) {
            pairs.push(InterlacingPair {
                arc,
                lo: w[0],
                hi: w[1],
                witness: witness(w[0], w[1], false),
            });
        }
    }
    if spec.arcs.len() == 2 && !corner_zero {
        let arc2 = thetas(f_scans, 2);
        if let (Some(&lo), Some(&hi)) = (arc1.last(), arc2.first()) {
            cross_corner.push(InterlacingPair {
                arc: 0,
                lo,
                hi,
                witness: witness(lo, hi, false),
            });
        }
    }
    let violations = pairs.iter().filter(|p| p.witness.is_none()).count();
    InterlacingReport {
        pairs,
        cross_corner,
        violations,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditStatus {
    /// Residual zero from sign changes and endpoint orders alone.
    Closed,
    /// Residual zero only with suspected even-order zeros counted.
    Heuristic,
    /// Nonzero residual.
    Open,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValenceReport {
    pub level: u32,
    pub weight: i64,
    pub ord_infinity: i64,
    #[serde(serialize_with = "ser_rational")]
    pub budget: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub forced_elliptic_contribution: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub weighted_arc_count: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub residual: Rational,
    pub status: AuditStatus,
    pub heuristic: bool,
    pub zeros: Vec<ArcZero>,
    pub diagnostics: Vec<String>,
}

impl ValenceReport {
    pub fn passed(&self) -> bool {
        self.residual == 0
    }

    pub fn ensure_closed(&self) -> Result<&ValenceReport> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::AuditFailed {
                residual: self.residual.to_string(),
                diagnostics: self.diagnostics.join("; "),
            })
        }
    }
}

/// Compares the zeros found on the arcs with the valence formula.
pub fn valence_audit(f: &ModularForm, scans: &[ArcScan]) -> Result<ValenceReport> {
    let ord = ord_infinity(f)?;
    let budget = valence_budget(f.level(), f.weight(), ord);
    let mut forced = Rational::new();
    let mut arc_count = Rational::new();
    let mut diagnostics = Vec::new();
    let mut heuristic = false;
    let mut zeros = Vec::new();
    let spec = domain_spec(f.level());
    for scan in scans {
        for z in &scan.zeros {
            match z.parity {
                Parity::Endpoint => {
                    forced += Rational::from((z.order, z.half_order));
                }
                Parity::Odd => arc_count += z.order,
                Parity::SuspectedEven => {
                    heuristic = true;
                    arc_count += 2u32;
                    diagnostics.push(format!(
                        "suspected even-order zero near theta = {:.12} on arc {}",
                        z.theta.to_f64(),
                        z.arc
                    ));
                }
            }
            zeros.push(z.clone());
        }
    }
    // every elliptic point with a forced zero must have been seen
    for arc in &spec.arcs {
        for e in [arc.lo_elliptic, arc.hi_elliptic].into_iter().flatten() {
            let point = &spec.elliptic_points[e];
            let seen = zeros.iter().any(|z| z.elliptic == Some(point.label));
            if point.forced_order(f.weight()) > 0 && !seen {
                diagnostics.push(format!(
                    "no vanishing detected at elliptic point {} despite forced order {}",
                    point.label,
                    point.forced_order(f.weight())
                ));
            }
        }
    }
    let residual = Rational::from(&budget - &forced) - &arc_count;
    let status = if residual != 0 {
        let mut msg = String::new();
        if residual > 0 {
            let _ = write!(
                msg,
                "{residual} of the weighted zero count not found on the arcs \
                 (zeros off the arcs, a missed even-order zero, or too coarse a grid)"
            );
        } else {
            let _ = write!(msg, "arc zeros exceed the budget by {}", Rational::from(-&residual));
        }
        diagnostics.push(msg);
        AuditStatus::Open
    } else if heuristic {
        AuditStatus::Heuristic
    } else {
        AuditStatus::Closed
    };
    Ok(ValenceReport {
        level: f.level().get(),
        weight: f.weight(),
        ord_infinity: ord,
        budget,
        forced_elliptic_contribution: forced,
        weighted_arc_count: arc_count,
        residual,
        status,
        heuristic,
        zeros,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{delta, eisenstein, fricke_eisenstein, j_invariant};

    const N: usize = 200;

    #[test]
    fn delta_at_i_matches_e4_cubed() {
        let tau = BigComplex::from_f64(DEFAULT_PRECISION, 0.0, 1.0);
        let d = evaluate(&delta(N).unwrap(), &tau, 1e-30).unwrap().require_usable().unwrap();
        let e4 = evaluate(&eisenstein(4, N).unwrap(), &tau, 1e-30).unwrap();
        assert!(d.value.re.to_f64() > 0.0);
        assert!(d.value.im.to_f64().abs() < 1e-40);
        let lhs = d.value.scale(&Float::with_val(DEFAULT_PRECISION, 1728));
        let rhs = e4.value.powi(3);
        assert!(lhs.sub(&rhs).abs().to_f64() < 1e-20);
        // |eta(i)|^24 with eta(i) = Gamma(1/4) / (2 pi^{3/4})
        let eta = 3.625_609_908_221_908_f64 / (2.0 * std::f64::consts::PI.powf(0.75));
        assert!((d.value.re.to_f64() / eta.powi(24) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn elliptic_zeros_of_eisenstein_series() {
        let i = BigComplex::from_f64(DEFAULT_PRECISION, 0.0, 1.0);
        let e6 = evaluate(&eisenstein(6, N).unwrap(), &i, 1e-30).unwrap();
        assert!(e6.value.abs().to_f64() < 1e-20);
        let rho = domain_spec(Level::ONE).elliptic_points[1].point.clone();
        let e4 = evaluate(&eisenstein(4, N).unwrap(), &rho, 1e-30).unwrap();
        assert!(e4.value.abs().to_f64() < 1e-20);
    }

    #[test]
    fn restriction_values() {
        let spec = domain_spec(Level::ONE);
        let half = spec.arcs[0].lo.value.clone();
        let third = spec.arcs[0].hi.value.clone();
        let (re, im) = arc_restriction(&eisenstein(4, N).unwrap(), 1, &third, 1e-30).unwrap();
        assert!(re.to_f64().abs() < 1e-20 && im.to_f64().abs() < 1e-20);
        let (re, _) = arc_restriction(&j_invariant(N).unwrap(), 1, &half, 1e-30).unwrap();
        assert!((re.to_f64() - 1728.0).abs() < 1e-9);
        let (re, _) = arc_restriction(&eisenstein(6, N).unwrap(), 1, &half, 1e-30).unwrap();
        assert!(re.to_f64().abs() < 1e-20);
    }

    #[test]
    fn tail_model_agrees_with_longer_truncation() {
        let f = eisenstein(12, 64).unwrap();
        let g = eisenstein(12, 128).unwrap();
        let tau = BigComplex::from_f64(DEFAULT_PRECISION, -0.3, 0.4);
        let a = evaluate(&f, &tau, 1e-12).unwrap();
        let b = evaluate(&g, &tau, 1e-30).unwrap();
        assert!(a.usable);
        assert!(a.value.sub(&b.value).abs().to_f64() <= a.tail.max(1e-40));
    }

    #[test]
    fn short_expansion_is_flagged() {
        let f = eisenstein(4, 20).unwrap();
        let tau = BigComplex::from_f64(DEFAULT_PRECISION, 0.0, 0.12);
        let r = evaluate(&f, &tau, 1e-30).unwrap();
        assert!(!r.usable);
        match r.require_usable() {
            Err(Error::InsufficientTruncation { required, available, .. }) => {
                assert_eq!(available, 20);
                assert!(required > 20);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn realness_and_negative_control() {
        let e4 = Evaluator::new(&eisenstein(4, N).unwrap(), DEFAULT_PRECISION).unwrap();
        assert!(realness_check(&e4, 1, 128, 1e-10).unwrap().passed);
        let f5 = fricke_eisenstein(4, Level::new(5).unwrap(), N).unwrap();
        let ev = Evaluator::new(&f5, DEFAULT_PRECISION).unwrap();
        assert!(realness_check(&ev, 2, 128, 1e-10).unwrap().passed);
        let mut c = eisenstein(4, N).unwrap().series().rationals().unwrap().to_vec();
        c[1] += 1;
        let bad = ModularForm::new(4, Level::ONE, QSeries::from_rationals(0, c), "bad").unwrap();
        let ev = Evaluator::new(&bad, DEFAULT_PRECISION).unwrap();
        assert!(!realness_check(&ev, 1, 128, 1e-10).unwrap().passed);
    }

    #[test]
    fn scans_at_level_one() {
        let opts = ScanOptions {
            grid: 256,
            ..Default::default()
        };
        let d = scan_zeros(&delta(N).unwrap(), 1, &opts).unwrap();
        assert!(d.zeros.is_empty());
        let e4 = scan_zeros(&eisenstein(4, N).unwrap(), 1, &opts).unwrap();
        assert_eq!(e4.zeros.len(), 1);
        assert!(e4.zeros[0].endpoint);
        assert_eq!(e4.zeros[0].elliptic, Some("rho"));
        assert_eq!(e4.zeros[0].order, 1);

        let e12 = scan_zeros(&eisenstein(12, N).unwrap(), 1, &opts).unwrap();
        assert_eq!(e12.zeros.len(), 1);
        let z = &e12.zeros[0];
        assert_eq!(z.parity, Parity::Odd);
        assert!(z.bracket_width <= 1e-12);
        let j = evaluate(&j_invariant(N).unwrap(), &z.tau, 1e-30).unwrap();
        assert!((j.value.re.to_f64() - 432000.0 / 691.0).abs() < 1e-6);
    }

    #[test]
    fn order_at_elliptic_end_exceeds_forced_minimum() {
        let f = eisenstein(4, N).unwrap().pow(3).unwrap();
        let s = scan_zeros(&f, 1, &ScanOptions { grid: 128, ..Default::default() }).unwrap();
        assert_eq!(s.zeros.len(), 1);
        assert_eq!(s.zeros[0].order, 3);
        let report = valence_audit(&f, &[s]).unwrap();
        assert_eq!(report.status, AuditStatus::Closed);
    }

    #[test]
    fn audits() {
        let opts = ScanOptions {
            grid: 256,
            ..Default::default()
        };
        for (f, forced) in [
            (eisenstein(4, N).unwrap(), Rational::from((1, 3))),
            (eisenstein(6, N).unwrap(), Rational::from((1, 2))),
            (delta(N).unwrap(), Rational::new()),
        ] {
            let s = scan_zeros(&f, 1, &opts).unwrap();
            let r = valence_audit(&f, &[s]).unwrap();
            assert!(r.passed(), "{}", f.label());
            assert_eq!(r.forced_elliptic_contribution, forced);
            assert!(r.ensure_closed().is_ok());
        }
    }

    #[test]
    fn derivative_identity_small_residual() {
        let r = derivative_identity_check(&eisenstein(4, N).unwrap(), 1, std::f64::consts::FRAC_PI_2, 1e-5, 192).unwrap();
        assert!(r < 1e-8, "{r}");
        let f5 = fricke_eisenstein(4, Level::new(5).unwrap(), N).unwrap();
        let spec = domain_spec(Level::new(5).unwrap());
        let mid = 0.5 * (spec.arcs[1].lo.to_f64() + spec.arcs[1].hi.to_f64());
        let r = derivative_identity_check(&f5, 2, mid, 1e-5, 192).unwrap();
        assert!(r < 1e-8, "{r}");
        let r = derivative_identity_check(&delta(N).unwrap(), 1, 0.6 * std::f64::consts::PI, 1e-5, 192).unwrap();
        assert!(r < 1e-8, "{r}");
    }
}
