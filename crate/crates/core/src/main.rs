use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serre_zeros::config::{DomainChoice, MinimaThreshold};
use serre_zeros::geometry::domain_spec;
use serre_zeros::pipeline::{analyze, certify, plot_csv, run_suite, series_report, theorem_check, to_json_string, zeros_csv, Verdict};
use serre_zeros::serre::serre_iterate;
use serre_zeros::{parse_form_spec, Error, Level, ModularForm, Result, RunConfig};

/// Exit status when a check ran and failed.
const EXIT_FAILED: u8 = 1;
/// Exit status for usage, parse and numerical-quality errors.
const EXIT_ERROR: u8 = 2;
/// Exit status when the input lies outside the theorem's hypotheses.
const EXIT_HYPOTHESIS: u8 = 3;

#[derive(Parser)]
#[command(name = "serre-zeros", version, about = "Zeros of Serre derivatives on the boundary arcs of Fricke fundamental domains")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Config file of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Big-float precision in bits.
    #[arg(long = "prec", global = true)]
    precision: Option<u32>,
    /// Number of q-expansion terms.
    #[arg(long = "trunc", global = true)]
    truncation: Option<usize>,
    /// Grid points per arc.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Bisection tolerance for zero brackets.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Suspected-even threshold relative to the local maximum.
    #[arg(long, global = true)]
    minima: Option<f64>,
    /// Coefficient domain of parsed forms: exact or float.
    #[arg(long, global = true)]
    domain: Option<String>,
    /// Directory for output files; stdout when unset.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FormArgs {
    /// Form expression, e.g. "E4^3 - E6^2" or "FrickeE(4)".
    #[arg(long)]
    form: String,
    #[arg(long, default_value_t = 1)]
    level: u32,
}

#[derive(Subcommand)]
enum Command {
    /// q-expansion of a form as JSON.
    Gen {
        #[command(flatten)]
        form: FormArgs,
    },
    /// q-expansion of an iterated Serre derivative as JSON.
    Serre {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, default_value_t = 1)]
        iterate: u32,
    },
    /// Fundamental domain data as JSON.
    Geom {
        #[arg(long, default_value_t = 1)]
        level: u32,
    },
    /// Zero table (CSV) and valence audit (JSON) of a form or its derivative.
    Zeros {
        #[command(flatten)]
        form: FormArgs,
        /// Scan the n-th Serre derivative instead of the form.
        #[arg(long, default_value_t = 0)]
        serre: u32,
    },
    /// Hypothesis check, derivative scans, audits and interlacing as JSON.
    Audit {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, default_value_t = 1)]
        serre: u32,
    },
    /// Exact j-polynomial certificate for a level-1 form.
    Jpoly {
        #[arg(long)]
        form: String,
    },
    /// Samples of the arc restriction as CSV.
    PlotData {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, default_value_t = 1)]
        arc: u8,
        /// Grid intervals; both ends of the arc are sampled, so n + 1 rows.
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        serre: u32,
    },
    /// Runs the acceptance corpus and prints a summary table.
    Suite {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3, 5, 7])]
        levels: Vec<u32>,
        #[arg(long, default_value_t = 60)]
        max_weight: i64,
    },
}

fn config(g: &GlobalOpts) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_env()?;
    if let Some(path) = &g.config {
        cfg.apply_file(path)?;
    }
    if let Some(p) = g.precision {
        cfg.precision_bits = p;
    }
    if let Some(n) = g.truncation {
        cfg.truncation = n;
    }
    if let Some(n) = g.grid {
        cfg.grid = n;
    }
    if let Some(t) = g.tol {
        cfg.refine_tol = t;
    }
    if let Some(m) = g.minima {
        cfg.minima_threshold = MinimaThreshold::Relative(m);
    }
    if let Some(d) = &g.domain {
        cfg.domain = match d.as_str() {
            "exact" => DomainChoice::Exact,
            "float" => DomainChoice::Float,
            _ => return Err(Error::Config(format!("domain must be `exact` or `float`, got `{d}`"))),
        };
    }
    if let Some(dir) = &g.out_dir {
        cfg.out_dir = Some(dir.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Writes `content` to `out_dir/name`, or to stdout without an output directory.
fn emit(out_dir: Option<&Path>, name: &str, content: &str) -> Result<()> {
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), content)?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn series_json(f: &ModularForm) -> Result<String> {
    to_json_string(&series_report(f))
}

fn build(form: &FormArgs, cfg: &RunConfig) -> Result<ModularForm> {
    parse_form_spec(&form.form, Level::new(form.level)?, cfg)
}

fn derive(f: ModularForm, n: u32) -> Result<ModularForm> {
    if n == 0 {
        Ok(f)
    } else {
        serre_iterate(&f, n)
    }
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = config(&cli.global)?;
    let out = cfg.out_dir.as_deref();
    match cli.command {
        Command::Gen { form } => {
            let f = build(&form, &cfg)?;
            emit(out, "gen.json", &series_json(&f)?)?;
        }
        Command::Serre { form, iterate } => {
            let f = serre_iterate(&build(&form, &cfg)?, iterate)?;
            emit(out, "serre.json", &series_json(&f)?)?;
        }
        Command::Geom { level } => {
            let spec = domain_spec(Level::new(level)?);
            emit(out, "geom.json", &to_json_string(&spec.to_json())?)?;
        }
        Command::Zeros { form, serre } => {
            let f = derive(build(&form, &cfg)?, serre)?;
            let a = analyze(&f, &cfg)?;
            emit(out, "zeros.csv", &zeros_csv(&a.scans))?;
            match out {
                Some(dir) => std::fs::write(dir.join("audit.json"), to_json_string(&a)?)?,
                None => eprintln!(
                    "audit: residual {} (budget {}, status {:?})",
                    a.audit.residual, a.audit.budget, a.audit.status
                ),
            }
            if !a.passed() {
                return Ok(EXIT_FAILED);
            }
        }
        Command::Audit { form, serre } => {
            let f = build(&form, &cfg)?;
            let t = theorem_check(&f, serre, &cfg)?;
            emit(out, "audit.json", &to_json_string(&t)?)?;
            return Ok(match t.verdict {
                Verdict::Passed => 0,
                Verdict::Failed => EXIT_FAILED,
                Verdict::HypothesisFailed => EXIT_HYPOTHESIS,
            });
        }
        Command::Jpoly { form } => {
            let f = parse_form_spec(&form, Level::ONE, &cfg)?;
            let c = certify(&f)?;
            emit(out, "jpoly.json", &to_json_string(&c)?)?;
            if c.refusal.is_some() {
                return Ok(EXIT_HYPOTHESIS);
            }
            if !c.certified {
                return Ok(EXIT_FAILED);
            }
        }
        Command::PlotData {
            form,
            arc,
            samples,
            serre,
        } => {
            let f = derive(build(&form, &cfg)?, serre)?;
            emit(out, "plot.csv", &plot_csv(&f, arc, samples, &cfg)?)?;
        }
        Command::Suite { levels, max_weight } => {
            let levels = levels.into_iter().map(Level::new).collect::<Result<Vec<_>>>()?;
            let summary = run_suite(&levels, max_weight, &cfg, out)?;
            print!("{}", summary.table());
            if let Some(dir) = out {
                std::fs::write(dir.join("suite.json"), to_json_string(&summary)?)?;
            }
            if !summary.passed {
                return Ok(EXIT_FAILED);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
