//! The acceptance suite: eleven end-to-end checks, each reduced to a
//! pass/fail verdict with a one-line summary.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_8, PI};
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::report::ExperimentReport;
use super::suites::{
    random_steps, rate_series, run_lower_bound_suite, run_rate_suite, run_stability_suite,
    LowerBoundConfig, RateMode, RateSuiteConfig, StabilitySuiteConfig,
};
use super::{default_n_grid, fit_rate, ExperimentError};
use crate::exact::{self, ExactComplex};
use crate::hnorm::{
    appendix_bound_check, hnorm0, power_substitution_hnorm, q_integral, AppendixGrid, DeltaSymbol,
    PowerSymbol, RayFunction, Rho1, SectorFunction,
};
use crate::quad::QuadratureConfig;
use crate::ratfun::{pade_exp, RationalFunction};
use crate::scheme::parse_scheme;
use crate::semigroup::{
    make_diagonal_sectorial, ray_spectrum, sectoriality_constant, ResolventGrid,
};
use crate::stability::{approximation_order, versioned_json};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    /// `[PASS] 3 quadrature oracle: ...`
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {} ({:.1}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptanceReport {
    pub criteria: Vec<CriterionOutcome>,
    pub pass: bool,
}

impl AcceptanceReport {
    pub fn to_json(&self) -> String {
        versioned_json(self)
    }
}

pub const TITLES: [&str; 11] = [
    "classification exactness",
    "Pade symmetry",
    "quadrature oracle",
    "power-substitution isometry",
    "sharpened rates (cn)",
    "contractive-at-infinity rates (be)",
    "scalar lower bound",
    "Q-integral exponents",
    "variable-step stability",
    "derivative envelope bound",
    "operator calculus bound",
];

type Verdict = Result<(bool, String), ExperimentError>;

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: u8) -> CriterionOutcome {
    let start = Instant::now();
    let result = match id {
        1 => classification_exactness(),
        2 => pade_symmetry(),
        3 => quadrature_oracle(),
        4 => isometry(),
        5 => sharpened_rates(),
        6 => contractive_rates(),
        7 => scalar_lower_bound(),
        8 => q_integral_exponents(),
        9 => variable_step_stability(),
        10 => envelope_bound(),
        11 => operator_calculus_bound(),
        _ => Err(ExperimentError::Precondition(format!("no criterion {id}"))),
    };
    let (pass, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome {
        id,
        title: TITLES
            .get(usize::from(id).wrapping_sub(1))
            .unwrap_or(&"unknown")
            .to_string(),
        pass,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all() -> AcceptanceReport {
    let criteria: Vec<CriterionOutcome> = (1..=11).map(run_criterion).collect();
    let pass = criteria.iter().all(|c| c.pass);
    AcceptanceReport { criteria, pass }
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn rat(p: i64, q: i64) -> ExactComplex {
    exact::real(p, q)
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::from(1), |acc, j| acc * BigInt::from(j))
}

/// Exact `(q, m, r(∞), a)` against closed forms. For the diagonal Padé
/// approximant, `P_k(z) = Q_k(-z)` and the top two coefficients of `Q_k`
/// give `r(∞) = (-1)^k` and `a = 2 (-1)^k k (k + 1)`.
fn classification_exactness() -> Verdict {
    let mut cases: Vec<(String, usize, usize, ExactComplex, ExactComplex)> = vec![
        ("be".into(), 1, 1, rat(0, 1), rat(-1, 1)),
        ("cn".into(), 2, 1, rat(-1, 1), rat(-4, 1)),
        ("paper-pi6".into(), 1, 2, rat(-1, 1), rat(-1, 4)),
    ];
    for k in 1..=6i64 {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        cases.push((
            format!("pade:{k}"),
            2 * k as usize,
            1,
            rat(sign, 1),
            rat(2 * sign * k * (k + 1), 1),
        ));
    }
    let mut bad = Vec::new();
    for (id, q, m, r_inf, a) in &cases {
        let r = parse_scheme(id)?;
        let (got_q, exact_q) = approximation_order(&r)?;
        let inf = r.expansion_at_infinity()?;
        if got_q != *q || !exact_q || inf.m != *m || inf.value_at_inf != *r_inf || inf.a != *a {
            bad.push(format!(
                "{id}: got ({got_q}, {}, {}, {})",
                inf.m,
                exact::format_exact(&inf.value_at_inf),
                exact::format_exact(&inf.a)
            ));
        }
    }
    Ok(if bad.is_empty() {
        (true, format!("{} schemes match exactly", cases.len()))
    } else {
        (false, bad.join("; "))
    })
}

/// `P_k(z) = Q_k(-z)` and `Q_k` against `q_j = (2k-j)! k! / ((2k)! j! (k-j)!)`.
fn pade_symmetry() -> Verdict {
    for k in 1..=6usize {
        let r = pade_exp(k)?;
        let (p, q) = (r.num(), r.den());
        if p.degree() != Some(k) || q.degree() != Some(k) {
            return Ok((false, format!("pade:{k} has degrees {:?}/{:?}", p.degree(), q.degree())));
        }
        for j in 0..=k {
            let flipped = if j % 2 == 0 { q.coeff(j) } else { -q.coeff(j) };
            if p.coeff(j) != flipped {
                return Ok((false, format!("pade:{k}: P_{j} != (-1)^{j} Q_{j}")));
            }
            let closed = BigRational::new(
                factorial(2 * k - j) * factorial(k),
                factorial(2 * k) * factorial(j) * factorial(k - j),
            );
            if q.coeff(j) != exact::from_rational(closed) {
                return Ok((false, format!("pade:{k}: Q_{j} differs from the closed form")));
            }
        }
    }
    Ok((true, "P_k(z) = Q_k(-z) for k = 1..6, coefficients exact".into()))
}

fn quadrature_oracle() -> Verdict {
    let a = hnorm0(&RayFunction::new(&Rho1, FRAC_PI_3), &cfg())?.value;
    let b = hnorm0(&RayFunction::new(&Rho1, FRAC_PI_2), &cfg())?.value;
    let ea = (a - 4.0 * PI / (3.0 * 3f64.sqrt())).abs();
    let eb = (b - PI).abs();
    Ok((
        ea < 1e-7 && eb < 1e-7,
        format!("π/3: {a:.10} (err {ea:.1e}); π/2: {b:.10} (err {eb:.1e})"),
    ))
}

fn isometry() -> Verdict {
    let psi1 = FRAC_PI_4;
    let cn = parse_scheme("cn")?;
    let delta = DeltaSymbol::new(&cn, 8, 1.0)?;
    let fixtures: [(&str, &dyn SectorFunction); 2] = [("rho1", &Rho1), ("delta_8,1", &delta)];
    let mut worst: f64 = 0.0;
    for (_, f) in fixtures {
        let base = hnorm0(&RayFunction::new(f, psi1), &cfg())?.value;
        for gamma in [1.0 / 3.0, 0.5, 2.0 / 3.0] {
            let v = power_substitution_hnorm(f, psi1, psi1 / gamma, &cfg())?.value;
            worst = worst.max((v - base).abs() / base);
        }
    }
    Ok((worst < 1e-6, format!("max relative deviation {worst:.2e}")))
}

fn slope_table(rep: &ExperimentReport) -> String {
    rep.runs
        .iter()
        .map(|r| format!("s={}: {:.3}", r.s, r.fit.as_ref().map_or(f64::NAN, |f| f.slope)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn sharpened_rates() -> Verdict {
    let cn = parse_scheme("cn")?;
    let rcfg = RateSuiteConfig::default();
    let ns = default_n_grid();
    let s_list = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0];
    let rep = run_rate_suite("cn", &cn, FRAC_PI_4, &s_list, &ns, RateMode::Hnorm, &rcfg)?;
    let mut ok = rep.pass;
    let mut notes = vec![format!("hnorm {}", slope_table(&rep))];
    for s in [0.5, 2.0] {
        let h = rep
            .runs
            .iter()
            .find(|r| r.s == s)
            .and_then(|r| r.fit.as_ref())
            .map(|f| f.slope)
            .unwrap_or(f64::NAN);
        let pts = rate_series(&cn, FRAC_PI_4, s, &ns, RateMode::Operator, &rcfg)?;
        let o = fit_rate(&pts.iter().map(|p| (p.n, p.value)).collect::<Vec<_>>())?.slope;
        ok &= (o - h).abs() <= 0.1;
        notes.push(format!("operator s={s}: {o:.3} vs {h:.3}"));
    }
    Ok((ok, notes.join("; ")))
}

fn contractive_rates() -> Verdict {
    let be = parse_scheme("be")?;
    let rep = run_rate_suite(
        "be",
        &be,
        FRAC_PI_4,
        &[0.0, 0.5, 1.0, 2.0],
        &default_n_grid(),
        RateMode::Hnorm,
        &RateSuiteConfig::default(),
    )?;
    Ok((rep.pass, slope_table(&rep)))
}

fn scalar_lower_bound() -> Verdict {
    let lcfg = LowerBoundConfig {
        shifted: false,
        ..LowerBoundConfig::default()
    };
    let cn = parse_scheme("cn")?;
    let a = run_lower_bound_suite("cn", &cn, FRAC_PI_4, &[0.0], &[64, 128, 256, 512], &lcfg)?;
    let pi6 = parse_scheme("paper-pi6")?;
    let b = run_lower_bound_suite("paper-pi6", &pi6, FRAC_PI_8, &[0.0], &[256, 512, 1024, 2048], &lcfg)?;
    Ok((
        a.pass && b.pass,
        format!("cn: {}; paper-pi6: {}", a.runs[0].detail, b.runs[0].detail),
    ))
}

fn q_integral_exponents() -> Verdict {
    let cn = parse_scheme("cn")?;
    let ns = default_n_grid();
    let mut ok = true;
    let mut notes = Vec::new();
    for eps in [0.0, 1.0] {
        for s in [0.25, 0.5] {
            let pts = ns
                .iter()
                .map(|&n| Ok((n, q_integral(&cn, eps, 1.0, FRAC_PI_4, n, s, &cfg())?)))
                .collect::<Result<Vec<_>, ExperimentError>>()?;
            let slope = fit_rate(&pts)?.slope;
            ok &= (slope + 2.0 * s).abs() <= 0.15;
            notes.push(format!("ε={eps} s={s}: {slope:.3}"));
        }
    }
    let be = parse_scheme("be")?;
    let closed = q_integral(&be, 0.0, 1.0, 0.0, 1, 0.0, &cfg())?;
    let err = (closed - 0.5).abs();
    ok &= err < 1e-9;
    notes.push(format!("be closed form err {err:.1e}"));
    Ok((ok, notes.join(", ")))
}

fn variable_step_stability() -> Verdict {
    let scfg = StabilitySuiteConfig::default();
    let cn = run_stability_suite("cn", &parse_scheme("cn")?, FRAC_PI_4, &scfg)?;
    let be = run_stability_suite("be", &parse_scheme("be")?, FRAC_PI_4, &scfg)?;
    let last = |r: &ExperimentReport| r.runs.last().map(|x| x.detail.clone()).unwrap_or_default();
    Ok((cn.pass && be.pass, format!("cn {}; be {}", last(&cn), last(&be))))
}

fn envelope_bound() -> Verdict {
    let cn = parse_scheme("cn")?;
    let chk = appendix_bound_check(&cn, 2, FRAC_PI_4, 1.0, &[4, 16, 64], &AppendixGrid::default())?;
    Ok((
        chk.violations.is_empty(),
        format!(
            "C = {:.4}, α = {:.2}, {} fit samples, {} validated, {} violations",
            chk.c_fit,
            chk.alpha_fit,
            chk.samples,
            chk.validated,
            chk.violations.len()
        ),
    ))
}

/// `‖f(A)‖ ≤ |f(∞)| + (M_θ(A)/2) ‖f‖_{θ,0}` for a normal operator with
/// spectrum on `±π/4`, measured on `Σ_{π/3}`, plus contractivity of
/// `r(A/n)^n` and of variable-step products.
fn operator_calculus_bound() -> Verdict {
    let theta = FRAC_PI_3;
    let a = make_diagonal_sectorial(&ray_spectrum(FRAC_PI_4, 40, 1e-3, 1e3), FRAC_PI_4)?;
    let m = sectoriality_constant(&a, theta, &ResolventGrid::default())?.m;
    let schemes: Vec<(&str, RationalFunction)> = ["cn", "be", "pade:2"]
        .iter()
        .map(|id| Ok((*id, parse_scheme(id)?)))
        .collect::<Result<_, ExperimentError>>()?;
    let mut fixtures: Vec<(String, Box<dyn SectorFunction>)> = vec![("rho1".into(), Box::new(Rho1))];
    for (id, r) in &schemes {
        for n in [1u32, 4, 16] {
            fixtures.push((format!("{id} r_{n}"), Box::new(PowerSymbol { r: r.clone(), n })));
            for s in [0.5, 1.0] {
                fixtures.push((format!("{id} Δ_{n},{s}"), Box::new(DeltaSymbol::new(r, n, s)?)));
            }
        }
    }
    let mut worst_margin = f64::INFINITY;
    let mut failures = Vec::new();
    for (name, f) in &fixtures {
        let lhs = a.function_norm(|l| f.value(l));
        let h = hnorm0(&RayFunction::new(f.as_ref(), theta), &cfg())?.value;
        let rhs = f.value_at_inf().norm() + 0.5 * m * h + 1e-8;
        worst_margin = worst_margin.min(rhs - lhs);
        if !(lhs <= rhs) {
            failures.push(format!("{name}: {lhs:.6e} > {rhs:.6e}"));
        }
    }
    let mut max_power: f64 = 0.0;
    for (_, r) in &schemes {
        for n in [1u32, 2, 8, 64, 512] {
            let nf = f64::from(n);
            max_power = max_power.max(a.function_norm(|l| r.value(l / nf).powu(n)));
        }
    }
    let be = &schemes[1].1;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0011);
    let mut max_product: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=64);
        let steps = random_steps(&mut rng, n, 1024.0, false);
        let p = a.function_norm(|l| {
            steps
                .steps
                .iter()
                .fold(Complex64::new(1.0, 0.0), |acc, &k| acc * be.value(l * k))
        });
        max_product = max_product.max(p);
    }
    let ok = failures.is_empty() && max_power <= 1.0 && max_product <= 1.0;
    Ok((
        ok,
        format!(
            "M = {m:.6}, {} fixtures, min slack {worst_margin:.3e}, max ‖r(A/n)^n‖ = {max_power:.15}, \
             max ‖∏ r(k_j A)‖ = {max_product:.15}{}",
            fixtures.len(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    ))
}
