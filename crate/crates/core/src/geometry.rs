//! Fundamental domains of the Fricke groups: boundary arcs, elliptic points
//! and the bookkeeping constants of the valence formula.

use std::sync::OnceLock;

use rug::{Float, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::level::Level;
use crate::numeric::{float_to_decimal, pi, sqrt_int, BigComplex};

/// Working precision of the cached per-level data.
pub const GEOMETRY_PRECISION: u32 = 256;

/// Distance below which a point counts as lying on a boundary curve.
pub const BOUNDARY_TOLERANCE: f64 = 1e-30;

/// How far outside its interval an arc parameter may stray (rounding of
/// callers' angles, e.g. an f64 pi/2).
pub const ARC_PARAMETER_SLACK: f64 = 1e-12;

/// An angle in radians, with its exact value as a rational multiple of pi
/// when one is known.
#[derive(Clone, Debug, PartialEq)]
pub struct Angle {
    pub value: Float,
    pub pi_multiple: Option<Rational>,
    pub note: Option<&'static str>,
}

impl Angle {
    fn pi_times(r: Rational, prec: u32) -> Angle {
        Angle {
            value: pi(prec) * Float::with_val(prec, &r),
            pi_multiple: Some(r),
            note: None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    fn annotation(&self) -> Option<String> {
        match (&self.pi_multiple, self.note) {
            (Some(r), _) if *r.denom() == 1 => Some(format!("{} pi", r.numer())),
            (Some(r), _) => Some(format!("({}/{}) pi", r.numer(), r.denom())),
            (None, Some(n)) => Some(n.to_string()),
            (None, None) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EllipticPoint {
    pub label: &'static str,
    pub point: BigComplex,
    /// Half the order of the stabilizer.
    pub half_order: u32,
}

impl EllipticPoint {
    /// Minimum order at this point of any nonzero weight-`k` form.
    pub fn forced_order(&self, k: i64) -> u32 {
        let e = self.half_order as i64;
        // k = 2j mod 2e with 1 <= j <= e
        let mut j = (k / 2).rem_euclid(e);
        if j == 0 {
            j = e;
        }
        (e - j) as u32
    }
}

/// Which circle a boundary arc lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcCircle {
    /// `|tau| = 1/sqrt(p)`.
    Origin,
    /// `|tau + 1/2| = 1/(2 sqrt(p))`.
    MinusHalf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryArc {
    pub id: u8,
    pub circle: ArcCircle,
    pub lo: Angle,
    pub hi: Angle,
    /// Arc 2 excludes its lower end, which belongs to arc 1.
    pub lo_open: bool,
    /// `theta - phase_shift` is the angle on the arc's own circle.
    pub phase_shift: Angle,
    pub lo_elliptic: Option<usize>,
    pub hi_elliptic: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec {
    pub level: Level,
    pub alpha: Angle,
    pub beta: Option<Angle>,
    pub arcs: Vec<BoundaryArc>,
    pub genus: u32,
    pub elliptic_points: Vec<EllipticPoint>,
    pub precision_bits: u32,
}

/// Position of a point relative to the fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Interior,
    Boundary,
    Exterior,
}

fn complex(prec: u32, re: Float, im: Float) -> BigComplex {
    BigComplex::new(Float::with_val(prec, re), Float::with_val(prec, im))
}

impl DomainSpec {
    /// Builds the level data with angles and points at `prec` bits.
    pub fn with_precision(level: Level, prec: u32) -> DomainSpec {
        let p = level.get();
        let rp = sqrt_int(p, prec);
        let inv_rp = Float::with_val(prec, rp.recip_ref());
        let zero = Float::new(prec);
        let half_pi = Angle::pi_times(Rational::from((1, 2)), prec);
        let i_point = complex(prec, zero.clone(), inv_rp.clone());

        let (alpha, beta, mut points, corner_order) = if p <= 3 {
            let alpha = Angle::pi_times(Rational::from((p + 7, 12)), prec);
            let rho = BigComplex::cis(&alpha.value).scale(&inv_rp);
            let e_rho = 12 / (5 - p);
            (alpha, None, vec![("rho", rho, e_rho)], 0)
        } else {
            // corner rho_{p,1} from its exact coordinates
            let rho1 = if p == 5 {
                BigComplex::from_rationals(prec, &Rational::from((-2, 5)), &Rational::from((1, 5)))
            } else {
                let im = Float::with_val(prec, 3).sqrt() / 14u32;
                complex(prec, Float::with_val(prec, -5) / 14u32, im)
            };
            // beta = arg(2 sqrt(p) (rho1 + 1/2))
            let re = Float::with_val(prec, &rho1.re + 0.5f64) * &rp * 2u32;
            let im = Float::with_val(prec, &rho1.im * &rp) * 2u32;
            let beta_value = im.atan2(&re);
            let shift = if p == 5 {
                Rational::from((1, 2))
            } else {
                Rational::from((2, 3))
            };
            let alpha_value = Float::with_val(prec, &beta_value + &Angle::pi_times(shift, prec).value);
            let alpha = Angle {
                value: alpha_value,
                pi_multiple: None,
                note: Some(if p == 5 { "beta + (1/2) pi" } else { "beta + (2/3) pi" }),
            };
            let beta = Angle {
                value: beta_value,
                pi_multiple: None,
                note: Some(if p == 5 { "atan(2)" } else { "atan(sqrt(3)/2)" }),
            };
            let half = Float::with_val(prec, -0.5f64);
            let rho2 = complex(prec, half, Float::with_val(prec, &inv_rp / 2u32));
            let e1 = if p == 5 { 2 } else { 3 };
            (alpha, Some(beta), vec![("rho_1", rho1, e1), ("rho_2", rho2, 2)], 1)
        };
        points.insert(0, ("i", i_point, 2));
        let elliptic_points: Vec<EllipticPoint> = points
            .into_iter()
            .map(|(label, point, half_order)| EllipticPoint {
                label,
                point,
                half_order,
            })
            .collect();

        let zero_angle = Angle {
            value: Float::new(prec),
            pi_multiple: Some(Rational::new()),
            note: None,
        };
        let mut arcs = vec![BoundaryArc {
            id: 1,
            circle: ArcCircle::Origin,
            lo: half_pi.clone(),
            hi: alpha.clone(),
            lo_open: false,
            phase_shift: zero_angle,
            lo_elliptic: Some(0),
            hi_elliptic: Some(1),
        }];
        if let Some(beta) = &beta {
            let shift = Float::with_val(prec, &alpha.value - &beta.value);
            let shift_multiple = if p == 5 {
                Rational::from((1, 2))
            } else {
                Rational::from((2, 3))
            };
            let hi = Angle::pi_times(shift_multiple.clone() + Rational::from((1, 2)), prec);
            arcs.push(BoundaryArc {
                id: 2,
                circle: ArcCircle::MinusHalf,
                lo: alpha.clone(),
                hi,
                lo_open: true,
                phase_shift: Angle {
                    value: shift,
                    pi_multiple: Some(shift_multiple),
                    note: None,
                },
                lo_elliptic: None,
                hi_elliptic: Some(1 + corner_order),
            });
        }
        DomainSpec {
            level,
            alpha,
            beta,
            arcs,
            genus: 0,
            elliptic_points,
            precision_bits: prec,
        }
    }

    pub fn arc(&self, id: u8) -> Result<&BoundaryArc> {
        self.arcs
            .iter()
            .find(|a| a.id == id)
            .ok_or(Error::InvalidArc {
                level: self.level.get(),
                arc: id,
            })
    }

    /// Point of the arc at parameter `theta`, at `theta`'s precision.
    pub fn arc_point(&self, id: u8, theta: &Float) -> Result<BigComplex> {
        let arc = self.arc(id)?;
        let prec = theta.prec();
        let slack = Float::with_val(prec, ARC_PARAMETER_SLACK);
        let below = Float::with_val(prec, &arc.lo.value - theta) > slack;
        let above = Float::with_val(prec, theta - &arc.hi.value) > slack;
        if below || above {
            return Err(Error::OutsideArc {
                arc: id,
                theta: theta.to_f64(),
                lo: arc.lo.to_f64(),
                hi: arc.hi.to_f64(),
            });
        }
        Ok(self.arc_point_unchecked(arc, theta))
    }

    pub(crate) fn arc_point_unchecked(&self, arc: &BoundaryArc, theta: &Float) -> BigComplex {
        let prec = theta.prec();
        let p = self.level.get();
        match arc.circle {
            ArcCircle::Origin => BigComplex::cis(theta).scale(&sqrt_int(p, prec).recip()),
            ArcCircle::MinusHalf => {
                let phi = Float::with_val(prec, theta - &arc.phase_shift.value);
                let r = Float::with_val(prec, sqrt_int(p, prec) * 2u32).recip();
                let mut z = BigComplex::cis(&phi).scale(&r);
                z.re -= 0.5f64;
                z
            }
        }
    }

    /// Angle of the arc point on its own circle.
    pub fn arc_phase(&self, id: u8, theta: &Float) -> Result<Float> {
        let arc = self.arc(id)?;
        Ok(Float::with_val(theta.prec(), theta - &arc.phase_shift.value))
    }

    pub fn classify(&self, tau: &BigComplex) -> Result<Membership> {
        if tau.im.is_sign_negative() || tau.im.is_zero() {
            return Err(Error::NotInUpperHalfPlane);
        }
        let prec = tau.prec().max(self.precision_bits);
        let p = self.level.get();
        let tol = Float::with_val(prec, BOUNDARY_TOLERANCE);
        let r1 = sqrt_int(p, prec).recip();
        let r2 = Float::with_val(prec, &r1 / 2u32);
        let re = Float::with_val(prec, &tau.re);
        let shifted = |d: f64| -> Float {
            let z = BigComplex::new(Float::with_val(prec, &re + d), Float::with_val(prec, &tau.im));
            z.abs()
        };
        let modulus = shifted(0.0);
        let circle = Float::with_val(prec, &modulus - &r1);
        let side = |d: f64| -> Float {
            if p >= 5 {
                shifted(d) - &r2
            } else {
                Float::with_val(prec, rug::float::Special::Infinity)
            }
        };
        let left_edge = Float::with_val(prec, &re + 0.5f64);
        let right_edge = Float::with_val(prec, 0.5f64 - &re);
        let near_side = if re.is_sign_positive() && !re.is_zero() {
            side(-0.5)
        } else {
            side(0.5)
        };
        if [&circle, &near_side, &left_edge, &right_edge].iter().all(|s| **s > tol) {
            return Ok(Membership::Interior);
        }
        // closed left half; the right half is open
        let neg_tol = Float::with_val(prec, -&tol);
        let left_closure = [circle, side(0.5), left_edge, Float::with_val(prec, &tol - &re)];
        if left_closure.iter().all(|s| *s >= neg_tol) {
            return Ok(Membership::Boundary);
        }
        Ok(Membership::Exterior)
    }

    pub fn contains(&self, tau: &BigComplex) -> Result<bool> {
        Ok(self.classify(tau)? != Membership::Exterior)
    }

    /// The stored elliptic point within tolerance of `tau`.
    pub fn elliptic_point(&self, tau: &BigComplex) -> Result<&EllipticPoint> {
        self.elliptic_points
            .iter()
            .find(|e| e.point.sub(tau).abs().to_f64() < BOUNDARY_TOLERANCE)
            .ok_or(Error::NotElliptic(self.level.get()))
    }

    pub fn forced_elliptic_order(&self, tau: &BigComplex, k: i64) -> Result<u32> {
        Ok(self.elliptic_point(tau)?.forced_order(k))
    }

    /// `sum (1 - 1/e)` over elliptic points against `(p+1)/12 - 2g + 1`.
    pub fn rh_check(&self) -> (Rational, Rational) {
        let lhs = self
            .elliptic_points
            .iter()
            .map(|e| Rational::from(1) - Rational::from((1, e.half_order)))
            .fold(Rational::new(), |acc, x| acc + x);
        let rhs = Rational::from((self.level.get() + 1, 12)) - 2 * self.genus + 1u32;
        (lhs, rhs)
    }

    pub fn to_json(&self) -> DomainSpecJson {
        let angle = |a: &Angle| AngleJson {
            value: float_to_decimal(&a.value),
            exact: a.annotation(),
        };
        let point = |z: &BigComplex| [float_to_decimal(&z.re), float_to_decimal(&z.im)];
        DomainSpecJson {
            schema: crate::SCHEMA,
            level: self.level.get(),
            genus: self.genus,
            precision_bits: self.precision_bits,
            alpha: angle(&self.alpha),
            beta: self.beta.as_ref().map(angle),
            elliptic_points: self
                .elliptic_points
                .iter()
                .map(|e| EllipticJson {
                    label: e.label,
                    point: point(&e.point),
                    half_order: e.half_order,
                })
                .collect(),
            arcs: self
                .arcs
                .iter()
                .map(|a| ArcJson {
                    id: a.id,
                    circle: a.circle,
                    lo: angle(&a.lo),
                    hi: angle(&a.hi),
                    lo_open: a.lo_open,
                    lo_endpoint: a.lo_elliptic.map(|i| self.elliptic_points[i].label),
                    hi_endpoint: a.hi_elliptic.map(|i| self.elliptic_points[i].label),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AngleJson {
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticJson {
    pub label: &'static str,
    pub point: [String; 2],
    pub half_order: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcJson {
    pub id: u8,
    pub circle: ArcCircle,
    pub lo: AngleJson,
    pub hi: AngleJson,
    pub lo_open: bool,
    pub lo_endpoint: Option<&'static str>,
    pub hi_endpoint: Option<&'static str>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainSpecJson {
    pub schema: &'static str,
    pub level: u32,
    pub genus: u32,
    pub precision_bits: u32,
    pub alpha: AngleJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<AngleJson>,
    pub elliptic_points: Vec<EllipticJson>,
    pub arcs: Vec<ArcJson>,
}

/// Level data at [`GEOMETRY_PRECISION`], built once per level.
pub fn domain_spec(level: Level) -> &'static DomainSpec {
    static SPECS: OnceLock<Vec<DomainSpec>> = OnceLock::new();
    let specs = SPECS.get_or_init(|| {
        Level::ALL
            .iter()
            .map(|&l| DomainSpec::with_precision(l, GEOMETRY_PRECISION))
            .collect()
    });
    let idx = Level::ALL.iter().position(|&l| l == level).expect("supported level");
    &specs[idx]
}

pub fn arc_point(level: Level, arc: u8, theta: &Float) -> Result<BigComplex> {
    domain_spec(level).arc_point(arc, theta)
}

pub fn domain_contains(level: Level, tau: &BigComplex) -> Result<bool> {
    domain_spec(level).contains(tau)
}

pub fn forced_elliptic_order(level: Level, tau: &BigComplex, k: i64) -> Result<u32> {
    domain_spec(level).forced_elliptic_order(tau, k)
}

/// `(p+1)k/24 - ord_inf`: the weighted number of zeros in the domain.
pub fn valence_budget(level: Level, k: i64, ord_infinity: i64) -> Rational {
    Rational::from(((level.get() as i64 + 1) * k, 24)) - ord_infinity
}

pub fn rh_check(level: Level) -> (Rational, Rational) {
    domain_spec(level).rh_check()
}
