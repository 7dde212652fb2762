//! Command-line front end.
//!
//! Exit codes: 0 when every verdict passes, 2 when a verdict fails, 1 on
//! usage or numerical errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::exact;
use crate::experiments::acceptance;
use crate::experiments::{
    run_lower_bound_suite, run_rate_suite, run_stability_suite, ExperimentReport, LowerBoundConfig,
    RateMode, RateSuiteConfig, StabilitySuiteConfig,
};
use crate::hnorm::{delta_hnorm_sweep, write_sweep_csv, SweepRow};
use crate::quad::QuadratureConfig;
use crate::scheme::parse_scheme;
use crate::stability::{
    certify_sector_stability, classify, leading_error_coefficient, poles, versioned_json,
    GridSpec, SchemeClassification, StabilityCertificate,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ratsect", version, about = "Rational approximations of holomorphic semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, clap::Args)]
struct Output {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; inferred from the file extension, JSON by default.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Order, behaviour at infinity, stability certificate and constants of a scheme.
    Classify {
        #[arg(long)]
        scheme: String,
        /// Sector half-angle in radians.
        #[arg(long)]
        psi: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Seminorms of the error symbol over a range of n.
    HnormSweep {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        s: f64,
        /// Comma-separated n values; `a,b,...,c` extends a progression.
        #[arg(long, default_value = "8,16,...,1024")]
        n: String,
        #[arg(long, default_value_t = 1e-9)]
        rtol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Fitted convergence rates against the predicted exponents.
    Rates {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        theta: f64,
        /// Comma-separated smoothness indices.
        #[arg(long)]
        s: String,
        #[arg(long, default_value = "8,16,...,1024")]
        n: String,
        #[arg(long, default_value = "hnorm")]
        mode: String,
        #[command(flatten)]
        output: Output,
    },
    /// Variable-step stability experiment.
    Stability {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 4)]
        trials: usize,
        #[arg(long, default_value_t = 0x5eed_0001)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Scalar lower bound and shifted-symbol optimality checks.
    LowerBounds {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value = "0")]
        s: String,
        #[arg(long, default_value = "8,16,...,1024")]
        n: String,
        #[command(flatten)]
        output: Output,
    },
    /// Runs the acceptance suite and prints one line per criterion.
    Accept {
        /// Comma-separated criterion numbers; all when omitted.
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{0}")]
    Numeric(String),
}

fn numeric<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numeric(e.to_string())
}

/// Parses `8,16,32` or `8,16,...,1024`. Before `...`, two integers with an
/// integer ratio of at least 2 continue geometrically; otherwise arithmetically.
pub fn parse_n_list(spec: &str) -> Result<Vec<u32>, String> {
    let tokens: Vec<&str> = spec.split(',').map(str::trim).collect();
    let mut out: Vec<u32> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let t = tokens[i];
        if t == "..." {
            let last = *tokens
                .get(i + 1)
                .ok_or("'...' must be followed by an end value")?;
            let end: u32 = last.parse().map_err(|_| format!("bad n value '{last}'"))?;
            if out.len() < 2 {
                return Err("'...' needs two leading values".into());
            }
            let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
            if b <= a {
                return Err("progression must increase".into());
            }
            let geometric = a > 0 && b % a == 0 && b / a >= 2;
            let mut cur = b;
            loop {
                let next = if geometric { cur.checked_mul(b / a) } else { cur.checked_add(b - a) };
                match next {
                    Some(v) if v <= end => {
                        out.push(v);
                        cur = v;
                    }
                    _ => break,
                }
            }
            if *out.last().unwrap() != end {
                return Err(format!("progression from {a}, {b} does not reach {end}"));
            }
            i += 2;
            continue;
        }
        out.push(t.parse().map_err(|_| format!("bad n value '{t}'"))?);
        i += 1;
    }
    if out.is_empty() || out.contains(&0) {
        return Err("n values must be positive".into());
    }
    if out.windows(2).any(|w| w[1] <= w[0]) {
        return Err("n values must be strictly increasing".into());
    }
    Ok(out)
}

fn parse_f64_list(spec: &str) -> Result<Vec<f64>, String> {
    spec.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().map_err(|_| format!("bad number '{t}'"))
        })
        .collect()
}

fn resolve_format(output: &Output) -> Format {
    output.format.unwrap_or_else(|| match &output.out {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => Format::Csv,
        _ => Format::Json,
    })
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let mut w = sink(path)?;
    w.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn emit_report(report: &ExperimentReport, output: &Output) -> Result<i32, CliError> {
    match resolve_format(output) {
        Format::Json => write_text(output.out.as_deref(), &report.to_json())?,
        Format::Csv => {
            let mut w = sink(output.out.as_deref())?;
            report.write_csv(&mut w).map_err(numeric)?;
            w.flush()?;
        }
    }
    for run in &report.runs {
        eprintln!("[{}] {}: {}", if run.verdict { "PASS" } else { "FAIL" }, run.name, run.detail);
    }
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct ClassifyOutput {
    scheme: String,
    psi: f64,
    q: usize,
    q_is_exact: bool,
    m: usize,
    r_inf: String,
    a: String,
    a_taylor: String,
    classification: SchemeClassification,
    certificate: StabilityCertificate,
    poles: Vec<Complex64>,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let scheme_of = |s: &str| parse_scheme(s).map_err(|e| CliError::Usage(e.to_string()));
    match cli.command {
        Command::Classify { scheme, psi, output } => {
            let r = scheme_of(&scheme)?;
            let certificate = certify_sector_stability(&r, psi, &GridSpec::default()).map_err(numeric)?;
            let classification = classify(&r, psi).map_err(numeric)?;
            let a_taylor = leading_error_coefficient(&r).map_err(numeric)?;
            let stable = certificate.is_stable;
            let out = ClassifyOutput {
                scheme,
                psi,
                q: classification.q,
                q_is_exact: classification.q_is_exact,
                m: classification.inf.m,
                r_inf: exact::format_exact(&classification.inf.value_at_inf),
                a: exact::format_exact(&classification.inf.a),
                a_taylor: exact::format_exact(&a_taylor),
                poles: poles(&r),
                classification,
                certificate,
            };
            write_text(output.out.as_deref(), &versioned_json(&out))?;
            Ok(if stable { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::HnormSweep {
            scheme,
            theta,
            s,
            n,
            rtol,
            output,
        } => {
            let r = scheme_of(&scheme)?;
            let ns = parse_n_list(&n).map_err(CliError::Usage)?;
            let cfg = QuadratureConfig::default().with_rtol(rtol);
            let rows = delta_hnorm_sweep(&r, theta, s, &ns, &cfg).map_err(numeric)?;
            match resolve_format(&output) {
                Format::Csv => {
                    let mut w = sink(output.out.as_deref())?;
                    write_sweep_csv(&mut w, &scheme, theta, s, &rows).map_err(numeric)?;
                    w.flush()?;
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Sweep<'a> {
                        scheme: &'a str,
                        theta: f64,
                        s: f64,
                        rows: &'a [SweepRow],
                    }
                    let text = versioned_json(&Sweep {
                        scheme: &scheme,
                        theta,
                        s,
                        rows: &rows,
                    });
                    write_text(output.out.as_deref(), &text)?;
                }
            }
            Ok(EXIT_PASS)
        }
        Command::Rates {
            scheme,
            theta,
            s,
            n,
            mode,
            output,
        } => {
            let r = scheme_of(&scheme)?;
            let ns = parse_n_list(&n).map_err(CliError::Usage)?;
            let ss = parse_f64_list(&s).map_err(CliError::Usage)?;
            let mode: RateMode = mode.parse().map_err(|e: crate::experiments::ExperimentError| CliError::Usage(e.to_string()))?;
            let rep = run_rate_suite(&scheme, &r, theta, &ss, &ns, mode, &RateSuiteConfig::default())
                .map_err(numeric)?;
            emit_report(&rep, &output)
        }
        Command::Stability {
            scheme,
            theta,
            trials,
            seed,
            output,
        } => {
            let r = scheme_of(&scheme)?;
            let cfg = StabilitySuiteConfig {
                trials,
                seed,
                ..StabilitySuiteConfig::default()
            };
            let rep = run_stability_suite(&scheme, &r, theta, &cfg).map_err(numeric)?;
            emit_report(&rep, &output)
        }
        Command::LowerBounds {
            scheme,
            theta,
            s,
            n,
            output,
        } => {
            let r = scheme_of(&scheme)?;
            let ns = parse_n_list(&n).map_err(CliError::Usage)?;
            let ss = parse_f64_list(&s).map_err(CliError::Usage)?;
            let rep = run_lower_bound_suite(&scheme, &r, theta, &ss, &ns, &LowerBoundConfig::default())
                .map_err(numeric)?;
            emit_report(&rep, &output)
        }
        Command::Accept { only, out } => {
            let ids: Vec<u8> = match only {
                None => (1..=11).collect(),
                Some(list) => list
                    .split(',')
                    .map(|t| match t.trim().parse::<u8>() {
                        Ok(v) if (1..=11).contains(&v) => Ok(v),
                        _ => Err(CliError::Usage(format!("bad criterion '{t}' (expected 1..11)"))),
                    })
                    .collect::<Result<_, _>>()?,
            };
            let mut criteria = Vec::with_capacity(ids.len());
            for id in ids {
                let c = acceptance::run_criterion(id);
                println!("{}", c.line());
                criteria.push(c);
            }
            let pass = criteria.iter().all(|c| c.pass);
            let report = acceptance::AcceptanceReport { criteria, pass };
            if let Some(p) = out {
                write_text(Some(&p), &report.to_json())?;
            }
            Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
