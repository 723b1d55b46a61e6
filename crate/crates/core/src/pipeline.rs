//! End-to-end checks: scan and audit a form, verify the hypotheses of the
//! zeros-on-the-arc theorem, follow it through iterated Serre derivatives,
//! and run the whole corpus as a suite.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::arc::{interlacing_check, realness_check, valence_audit, ArcScan, AuditStatus, Evaluator, InterlacingReport, Parity, RealnessReport, ValenceReport};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::formspec::parse_form_spec;
use crate::generators::ModularForm;
use crate::geometry::{domain_spec, valence_budget};
use crate::jpoly::{certify_zeros_on_arc, Certificate};
use crate::level::Level;
use crate::numeric::float_to_decimal;
use crate::qseries::QSeriesJson;
use crate::serre::{ord_infinity, serre_derivative};
use crate::SCHEMA;

/// Grid used for the realness check of every analysed form.
pub const REALNESS_GRID: usize = 512;
pub const REALNESS_TOL: f64 = 1e-10;

/// Level-1 forms whose zeros all lie on the arc.
pub const LEVEL_ONE_CORPUS: [&str; 9] = [
    "E4", "E6", "E4^2", "E4*E6", "E4^3", "E12", "Delta*E4", "E4/Delta", "E6/Delta",
];
pub const FRICKE_WEIGHTS: [i64; 4] = [4, 6, 8, 12];
/// Highest weight for which the Eisenstein polynomials are certified exactly.
pub const STURM_MAX_WEIGHT: i64 = 40;

/// Scans of every arc of a form together with its valence audit.
#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub schema: &'static str,
    pub form: String,
    pub level: u32,
    pub weight: i64,
    pub scans: Vec<ArcScan>,
    pub audit: ValenceReport,
    pub realness: Vec<RealnessReport>,
}

impl Analysis {
    pub fn realness_passed(&self) -> bool {
        self.realness.iter().all(|r| r.passed)
    }

    /// Residual zero without suspected even-order contributions, and real on every arc.
    pub fn passed(&self) -> bool {
        self.audit.status == AuditStatus::Closed && self.realness_passed()
    }

    pub fn zero_count(&self) -> usize {
        self.scans.iter().map(|s| s.zeros.len()).sum()
    }
}

pub fn analyze(f: &ModularForm, cfg: &RunConfig) -> Result<Analysis> {
    if f.series().is_zero() {
        return Err(Error::ZeroSeries("scan"));
    }
    let ev = Evaluator::new(f, cfg.precision_bits)?.with_tol(cfg.eval_tol);
    let scans = ev.scan(&cfg.scan_options())?;
    let audit = valence_audit(f, &scans)?;
    let realness = f
        .level()
        .arcs()
        .map(|a| realness_check(&ev, a, REALNESS_GRID, REALNESS_TOL))
        .collect::<Result<_>>()?;
    Ok(Analysis {
        schema: SCHEMA,
        form: f.label().to_string(),
        level: f.level().get(),
        weight: f.weight(),
        scans,
        audit,
        realness,
    })
}

/// CSV zero table: `arc,theta,re_tau,im_tau,parity,bracket_width`.
pub fn zeros_csv(scans: &[ArcScan]) -> String {
    let mut out = format!("# schema={SCHEMA}\narc,theta,re_tau,im_tau,parity,bracket_width\n");
    for z in scans.iter().flat_map(|s| &s.zeros) {
        let width = match z.parity {
            Parity::Endpoint => String::new(),
            _ => format!("{:e}", z.bracket_width),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            z.arc,
            float_to_decimal(&z.theta),
            float_to_decimal(&z.tau.re),
            float_to_decimal(&z.tau.im),
            z.parity.as_str(),
            width
        );
    }
    out
}

/// CSV of `(theta, Re F, Im F)` samples over the closed arc interval.
pub fn plot_csv(f: &ModularForm, arc: u8, grid: usize, cfg: &RunConfig) -> Result<String> {
    let ev = Evaluator::new(f, cfg.precision_bits)?.with_tol(cfg.eval_tol);
    let mut out = format!("# schema={SCHEMA}\ntheta,re,im\n");
    for (t, re, im) in ev.sample(arc, grid)? {
        let _ = writeln!(
            out,
            "{},{},{}",
            t.to_string_radix(10, Some(20)),
            re.to_string_radix(10, Some(20)),
            im.to_string_radix(10, Some(20))
        );
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub satisfied: bool,
    pub reason: Option<String>,
    pub analysis: Option<Analysis>,
}

impl HypothesisReport {
    fn failed(reason: impl Into<String>, analysis: Option<Analysis>) -> Self {
        HypothesisReport {
            satisfied: false,
            reason: Some(reason.into()),
            analysis,
        }
    }
}

/// Verifies numerically what can be verified of the theorem's hypotheses:
/// `f` is nonzero with real coefficients, has a zero in the upper half-plane,
/// and the scans account for all its zeros.
pub fn check_hypothesis(f: &ModularForm, cfg: &RunConfig) -> Result<HypothesisReport> {
    if f.series().is_zero() {
        return Ok(HypothesisReport::failed("the form is zero", None));
    }
    if !f.real_coefficients() {
        return Ok(HypothesisReport::failed("the form has non-real coefficients", None));
    }
    let ord = ord_infinity(f)?;
    if valence_budget(f.level(), f.weight(), ord) == 0 {
        return Ok(HypothesisReport::failed("the form has no zeros in the upper half-plane", None));
    }
    let a = analyze(f, cfg)?;
    let reason = if !a.audit.passed() {
        Some(format!(
            "zeros on the arcs account for {} of the weighted count {}; the residual {} lies elsewhere",
            a.audit.weighted_arc_count.clone() + &a.audit.forced_elliptic_contribution,
            a.audit.budget,
            a.audit.residual
        ))
    } else if a.audit.heuristic {
        Some("suspected even-order zeros; arc location not established by sign changes".into())
    } else if !a.realness_passed() {
        Some("the arc restriction is not real-valued".into())
    } else {
        None
    };
    Ok(match reason {
        Some(r) => HypothesisReport::failed(r, Some(a)),
        None => HypothesisReport {
            satisfied: true,
            reason: None,
            analysis: Some(a),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Passed,
    Failed,
    HypothesisFailed,
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeStep {
    pub order: u32,
    pub label: String,
    pub weight: i64,
    pub analysis: Analysis,
    /// Zeros of the previous form interlaced by zeros of this one.
    pub interlacing: InterlacingReport,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremCheck {
    pub schema: &'static str,
    pub form: String,
    pub level: u32,
    pub weight: i64,
    pub iterations: u32,
    pub verdict: Verdict,
    pub hypothesis: HypothesisReport,
    pub steps: Vec<DerivativeStep>,
}

/// Checks the hypotheses on `f`, then scans and audits the first
/// `iterations` Serre derivatives, with interlacing between consecutive ones.
pub fn theorem_check(f: &ModularForm, iterations: u32, cfg: &RunConfig) -> Result<TheoremCheck> {
    let hypothesis = check_hypothesis(f, cfg)?;
    let mut steps = Vec::new();
    let verdict = if !hypothesis.satisfied {
        Verdict::HypothesisFailed
    } else {
        let spec = domain_spec(f.level());
        let mut prev_scans = hypothesis.analysis.as_ref().expect("analysed").scans.clone();
        let mut g = f.clone();
        for order in 1..=iterations {
            g = serre_derivative(&g)?.with_label(format!("d^{order}({})", f.label()));
            let analysis = analyze(&g, cfg)?;
            let interlacing = interlacing_check(spec, &prev_scans, &analysis.scans);
            let passed = analysis.passed() && interlacing.violations == 0;
            prev_scans = analysis.scans.clone();
            steps.push(DerivativeStep {
                order,
                label: g.label().to_string(),
                weight: g.weight(),
                analysis,
                interlacing,
                passed,
            });
        }
        if steps.iter().all(|s| s.passed) {
            Verdict::Passed
        } else {
            Verdict::Failed
        }
    };
    Ok(TheoremCheck {
        schema: SCHEMA,
        form: f.label().to_string(),
        level: f.level().get(),
        weight: f.weight(),
        iterations,
        verdict,
        hypothesis,
        steps,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub schema: &'static str,
    pub form: String,
    /// Decomposition of the Serre derivative.
    pub epsilon: u32,
    pub delta: u32,
    pub m: i64,
    pub poly: Vec<String>,
    pub roots: Vec<RootJson>,
    pub certified: bool,
    pub refusal: Option<String>,
    pub certificate: Option<Certificate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootJson {
    pub lo: String,
    pub hi: String,
    pub multiplicity: u32,
}

/// Exact certification at level 1; refusals are reported rather than raised.
pub fn certify(f: &ModularForm) -> Result<CertificateReport> {
    let mut report = CertificateReport {
        schema: SCHEMA,
        form: f.label().to_string(),
        epsilon: 0,
        delta: 0,
        m: 0,
        poly: Vec::new(),
        roots: Vec::new(),
        certified: false,
        refusal: None,
        certificate: None,
    };
    match certify_zeros_on_arc(f) {
        Ok(c) => {
            report.epsilon = c.derivative.epsilon;
            report.delta = c.derivative.delta;
            report.m = c.derivative.m;
            report.poly = c.derivative.poly.coeff_strings();
            report.roots = c
                .derivative_roots
                .roots
                .iter()
                .map(|r| RootJson {
                    lo: r.lo.to_string(),
                    hi: r.hi.to_string(),
                    multiplicity: r.multiplicity,
                })
                .collect();
            report.certified = c.certified;
            report.certificate = Some(c);
        }
        Err(Error::HypothesisFailed(reason)) => report.refusal = Some(reason),
        Err(e) => return Err(e),
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// Scan and audit of the form itself.
    Audit,
    /// Hypotheses on the form, then the first n Serre derivatives.
    Theorem(u32),
    /// Exact j-polynomial certificate.
    Certify,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteEntry {
    pub form: String,
    pub level: u32,
    pub check: CheckKind,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRow {
    pub form: String,
    pub level: u32,
    pub weight: i64,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub schema: &'static str,
    pub levels: Vec<u32>,
    pub max_weight: i64,
    pub rows: Vec<SuiteRow>,
    pub passed: bool,
}

impl SuiteSummary {
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<6} {:<5} {:<14} {:>6} {:<6} detail", "status", "level", "form", "weight", "check");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<6} {:<5} {:<14} {:>6} {:<6} {}",
                if r.passed { "PASS" } else { "FAIL" },
                r.level,
                r.form,
                r.weight,
                r.check,
                r.detail
            );
        }
        let failed = self.rows.iter().filter(|r| !r.passed).count();
        let _ = writeln!(out, "{} checks, {} failed", self.rows.len(), failed);
        out
    }
}

/// The acceptance corpus at `levels`. `max_weight` bounds the Eisenstein
/// family and the Fricke weights; the fixed level-1 corpus always runs.
pub fn suite_entries(levels: &[Level], max_weight: i64) -> Vec<SuiteEntry> {
    let mut out = Vec::new();
    for &level in levels {
        let p = level.get();
        if p == 1 {
            for k in (4..=max_weight).step_by(2) {
                out.push(SuiteEntry {
                    form: format!("E{k}"),
                    level: 1,
                    check: CheckKind::Audit,
                });
                if k <= STURM_MAX_WEIGHT {
                    out.push(SuiteEntry {
                        form: format!("E{k}"),
                        level: 1,
                        check: CheckKind::Certify,
                    });
                }
            }
            for form in LEVEL_ONE_CORPUS {
                for check in [CheckKind::Theorem(5), CheckKind::Certify] {
                    out.push(SuiteEntry {
                        form: form.to_string(),
                        level: 1,
                        check,
                    });
                }
            }
        } else {
            for k in FRICKE_WEIGHTS.into_iter().filter(|k| *k <= max_weight) {
                out.push(SuiteEntry {
                    form: format!("FrickeE({k})"),
                    level: p,
                    check: CheckKind::Theorem(1),
                });
            }
        }
    }
    out
}

fn check_name(c: CheckKind) -> String {
    match c {
        CheckKind::Audit => "audit".into(),
        CheckKind::Theorem(n) => format!("serre{n}"),
        CheckKind::Certify => "jpoly".into(),
    }
}

/// Runs one corpus entry; the JSON artifact is returned alongside the row.
pub fn run_entry(entry: &SuiteEntry, cfg: &RunConfig) -> (SuiteRow, Option<serde_json::Value>) {
    let mut row = SuiteRow {
        form: entry.form.clone(),
        level: entry.level,
        weight: 0,
        check: check_name(entry.check),
        passed: false,
        detail: String::new(),
    };
    let result = (|| -> Result<(bool, String, serde_json::Value)> {
        let f = parse_form_spec(&entry.form, Level::new(entry.level)?, cfg)?;
        row.weight = f.weight();
        match entry.check {
            CheckKind::Audit => {
                let a = analyze(&f, cfg)?;
                let off_arc1 = a.scans.iter().filter(|s| s.arc != 1).any(|s| !s.zeros.is_empty());
                let detail = format!("residual {}, budget {}, {} zeros", a.audit.residual, a.audit.budget, a.zero_count());
                Ok((a.passed() && !off_arc1, detail, serde_json::to_value(&a)?))
            }
            CheckKind::Theorem(n) => {
                let t = theorem_check(&f, n, cfg)?;
                let detail = match t.verdict {
                    Verdict::HypothesisFailed => format!(
                        "hypothesis failed: {}",
                        t.hypothesis.reason.clone().unwrap_or_default()
                    ),
                    _ => {
                        let res: Vec<String> = t.steps.iter().map(|s| s.analysis.audit.residual.to_string()).collect();
                        let viol: usize = t.steps.iter().map(|s| s.interlacing.violations).sum();
                        format!("residuals [{}], interlacing violations {viol}", res.join(", "))
                    }
                };
                Ok((t.verdict == Verdict::Passed, detail, serde_json::to_value(&t)?))
            }
            CheckKind::Certify => {
                let c = certify(&f)?;
                let detail = match (&c.certificate, &c.refusal) {
                    (Some(cert), _) => format!(
                        "P roots {}/{} in [0,1728], dP roots {}/{}",
                        cert.form_roots.total_multiplicity,
                        cert.form.poly.degree().unwrap_or(0),
                        cert.derivative_roots.total_multiplicity,
                        cert.derivative.poly.degree().unwrap_or(0)
                    ),
                    (None, Some(r)) => format!("refused: {r}"),
                    (None, None) => String::new(),
                };
                Ok((c.certified, detail, serde_json::to_value(&c)?))
            }
        }
    })();
    match result {
        Ok((passed, detail, json)) => {
            row.passed = passed;
            row.detail = detail;
            (row, Some(json))
        }
        Err(e) => {
            row.detail = format!("error: {e}");
            (row, None)
        }
    }
}

/// Runs the entries concurrently. With `out_dir`, each entry's report is
/// written to `out_dir/suite/NNN-<form>-<check>.json`.
pub fn run_suite(levels: &[Level], max_weight: i64, cfg: &RunConfig, out_dir: Option<&Path>) -> Result<SuiteSummary> {
    let entries = suite_entries(levels, max_weight);
    let results: Vec<(SuiteRow, Option<serde_json::Value>)> = entries.par_iter().map(|e| run_entry(e, cfg)).collect();
    if let Some(dir) = out_dir {
        let dir = dir.join("suite");
        std::fs::create_dir_all(&dir)?;
        for (i, (row, json)) in results.iter().enumerate() {
            if let Some(json) = json {
                let name = format!("{i:03}-p{}-{}-{}.json", row.level, slug(&row.form), row.check);
                std::fs::write(dir.join(name), to_json_string(json)?)?;
            }
        }
    }
    let rows: Vec<SuiteRow> = results.into_iter().map(|r| r.0).collect();
    let passed = rows.iter().all(|r| r.passed);
    Ok(SuiteSummary {
        schema: SCHEMA,
        levels: levels.iter().map(|l| l.get()).collect(),
        max_weight,
        rows,
        passed,
    })
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            'a'..='z' | 'A'..='Z' | '0'..='9' => out.push(c),
            '*' => out.push('x'),
            '/' => out.push_str("over"),
            '^' => out.push('p'),
            ' ' => {}
            _ => out.push('_'),
        }
    }
    out
}

/// A form's q-expansion tagged with its weight, level and schema.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesReport {
    pub schema: &'static str,
    pub form: String,
    pub level: u32,
    pub weight: i64,
    pub series: QSeriesJson,
}

pub fn series_report(f: &ModularForm) -> SeriesReport {
    SeriesReport {
        schema: SCHEMA,
        form: f.label().to_string(),
        level: f.level().get(),
        weight: f.weight(),
        series: f.series().to_json(),
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}
