//! Classification of a scheme: order, sector stability, the contraction
//! constant `κ_r`, the derivative constant `c_r`, two-sided envelopes near
//! infinity and ray-modulus diagnostics.
//!
//! Stability is certified numerically. Poles come from companion-matrix
//! eigenvalues; `|r|` is sampled on the two boundary rays of the sector and at
//! infinity, and the maximum principle on the pole-free sector carries the
//! bound to the interior.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{self, ExactComplex};
use crate::ratfun::{InfinityExpansion, RatfunError, RationalFunction};
use crate::roots;
use crate::search::{lin_grid, log_grid, refine_max_on_grid};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("not an approximation of e^(-z): r(0) = {0}")]
    NotAnApproximation(String),
    #[error("boundary grid too coarse near t = {t}: modulus jump {jump:.3e} exceeds bound {bound:.3e}")]
    GridTooCoarse { t: f64, jump: f64, bound: f64 },
    #[error("|r(inf)| = {0} is not below 1")]
    NotStrictlyContractiveAtInfinity(f64),
    #[error("envelope bounds not certified: {0}")]
    EnvelopeFailed(String),
    #[error("|r| vanishes at t = {t} on the ray")]
    ZeroModulusEncountered { t: f64 },
    #[error("poles in the closed sector of angle {psi}: {poles:?}")]
    PolesInSector { psi: f64, poles: Vec<Complex64> },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Ratfun(#[from] RatfunError),
}

/// Log-spaced sampling of the boundary rays `t e^{±iψ}`, `t ∈ [t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_ray: usize,
    pub tol_cert: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            t_min: 1e-6,
            t_max: 1e6,
            points_per_ray: 4096,
            tol_cert: 1e-12,
        }
    }
}

impl GridSpec {
    pub fn describe(&self) -> String {
        format!(
            "log grid, {} points per ray over t in [{:e}, {:e}], tol {:e}",
            self.points_per_ray, self.t_min, self.t_max, self.tol_cert
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityCertificate {
    pub psi: f64,
    pub is_stable: bool,
    pub max_boundary_modulus: f64,
    pub worst_point: Complex64,
    pub poles_in_closed_sector: Vec<Complex64>,
    pub grid_spec: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeClassification {
    pub q: usize,
    pub q_is_exact: bool,
    pub inf: InfinityExpansion,
    pub kappa: Option<f64>,
    pub c_r: f64,
    pub mass_at_inf_abs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeConstants {
    pub b1: f64,
    pub b2: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub theta: f64,
    pub t: Vec<f64>,
    /// `|r'(t e^{iθ})|`
    pub deriv_abs: Vec<f64>,
    /// `r_θ(t) = |r(t e^{iθ})|`
    pub modulus: Vec<f64>,
    /// `d/dt r_θ(t)`
    pub modulus_deriv: Vec<f64>,
    /// `sup |r'| / |r_θ'|` over the samples (infinite if `r_θ'` vanishes).
    pub ratio_sup: f64,
    /// Sign of `r_θ'` per sample: -1, 0 or 1.
    pub sign_pattern: Vec<i8>,
    /// Ratio above 1e6: the ray is likely exceptional.
    pub likely_exceptional: bool,
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    inner: &'a T,
}

/// Serializes `value` with a leading `schema_version` field.
pub fn versioned_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(&Versioned {
        schema_version: SCHEMA_VERSION,
        inner: value,
    })
    .expect("serializable")
}

impl StabilityCertificate {
    pub fn to_json(&self) -> String {
        versioned_json(self)
    }
}

impl DiagnosticReport {
    pub fn to_json(&self) -> String {
        versioned_json(self)
    }
}

fn taylor_search_len(r: &RationalFunction) -> usize {
    r.num().degree().unwrap_or(0) + r.den().degree().unwrap_or(0) + 2
}

/// Largest `q` with `c_k = (-1)^k/k!` for all `k ≤ q`, and whether the next
/// coefficient differs.
pub fn approximation_order(r: &RationalFunction) -> Result<(usize, bool), StabilityError> {
    let n = taylor_search_len(r);
    let c = r.taylor_at_zero(n)?.coeffs;
    if c[0] != exact::eone() {
        return Err(StabilityError::NotAnApproximation(exact::format_exact(&c[0])));
    }
    // a rational function of type (p, d) matches e^{-z} to order at most p + d
    match (1..=n).find(|&k| c[k] != exact::exp_neg_coeff(k)) {
        Some(k) => Ok((k - 1, true)),
        None => Ok((n, false)),
    }
}

/// Exact coefficient of `z^{q+1}` in `r(z) - e^{-z}`.
pub fn leading_error_coefficient(r: &RationalFunction) -> Result<ExactComplex, StabilityError> {
    let (q, _) = approximation_order(r)?;
    let c = r.taylor_at_zero(q + 1)?.coeffs;
    Ok(&c[q + 1] - exact::exp_neg_coeff(q + 1))
}

fn in_closed_sector(z: Complex64, psi: f64, widen: f64) -> bool {
    z.norm() <= widen || z.arg().abs() <= psi + widen
}

/// Poles of `r` (roots of the reduced denominator).
pub fn poles(r: &RationalFunction) -> Vec<Complex64> {
    roots::roots(r.den()).into_iter().map(|p| p.z).collect()
}

/// Poles lying in the closed sector `|arg z| ≤ ψ`, widened by `1e-9`.
pub fn poles_in_sector(r: &RationalFunction, psi: f64) -> Vec<Complex64> {
    poles(r)
        .into_iter()
        .filter(|&p| in_closed_sector(p, psi, 1e-9))
        .collect()
}

/// Numerical certificate for `|r| ≤ 1` on the sector `Σ_ψ`.
pub fn certify_sector_stability(
    r: &RationalFunction,
    psi: f64,
    grid: &GridSpec,
) -> Result<StabilityCertificate, StabilityError> {
    if r.is_constant() {
        return Err(RatfunError::ConstantFunction.into());
    }
    let r_inf = r.value_at_infinity_c64().ok_or(RatfunError::UnboundedAtInfinity)?;
    if !(psi > 0.0 && psi < std::f64::consts::PI) {
        return Err(StabilityError::Precondition(format!("psi = {psi} outside (0, pi)")));
    }
    let bad_poles = poles_in_sector(r, psi);
    let ts = log_grid(grid.t_min, grid.t_max, grid.points_per_ray);
    let mut max_mod = r_inf.norm();
    let mut worst = Complex64::new(f64::INFINITY, 0.0);
    if bad_poles.is_empty() {
        let dr = r.derivative();
        for sign in [1.0, -1.0] {
            let dir = Complex64::from_polar(1.0, sign * psi);
            let mods: Vec<f64> = ts.iter().map(|&t| r.value(dir * t).norm()).collect();
            let c_est = ts
                .iter()
                .map(|&t| (1.0 + t).powi(2) * dr.value(dir * t).norm())
                .fold(0.0, f64::max);
            for i in 0..ts.len() {
                if mods[i] > max_mod {
                    max_mod = mods[i];
                    worst = dir * ts[i];
                }
                if i + 1 < ts.len() {
                    let h = ts[i + 1] - ts[i];
                    let jump = (mods[i + 1] - mods[i]).abs();
                    let bound = 4.0 * c_est * h / (1.0 + ts[i]).powi(2) + 1e-14;
                    if jump > bound {
                        return Err(StabilityError::GridTooCoarse {
                            t: ts[i],
                            jump,
                            bound,
                        });
                    }
                }
            }
        }
    } else {
        max_mod = f64::INFINITY;
        worst = bad_poles[0];
    }
    let is_stable = bad_poles.is_empty() && max_mod <= 1.0 + grid.tol_cert;
    Ok(StabilityCertificate {
        psi,
        is_stable,
        max_boundary_modulus: max_mod,
        worst_point: worst,
        poles_in_closed_sector: bad_poles,
        grid_spec: grid.describe(),
    })
}

fn require_pole_free(r: &RationalFunction, psi: f64) -> Result<(), StabilityError> {
    let bad = poles_in_sector(r, psi);
    if bad.is_empty() {
        Ok(())
    } else {
        Err(StabilityError::PolesInSector { psi, poles: bad })
    }
}

/// `κ_r(θ) = sup { |r(z)| : z ∈ Σ_θ, |z| ≥ 1 }`.
///
/// By the maximum principle the supremum over the pole-free truncated sector
/// is attained on its boundary: the two rays from modulus 1, the unit arc,
/// or at infinity.
pub fn kappa_sup(r: &RationalFunction, theta: f64) -> Result<f64, StabilityError> {
    let r_inf = r
        .value_at_infinity_c64()
        .ok_or(RatfunError::UnboundedAtInfinity)?
        .norm();
    if r_inf >= 1.0 {
        return Err(StabilityError::NotStrictlyContractiveAtInfinity(r_inf));
    }
    require_pole_free(r, theta)?;
    let ts = log_grid(1.0, 1e6, 4096);
    let mut best = r_inf;
    for sign in [1.0, -1.0] {
        let dir = Complex64::from_polar(1.0, sign * theta);
        let (_, v) = refine_max_on_grid(|t| r.value(dir * t).norm(), &ts);
        best = best.max(v);
    }
    let phis = lin_grid(-theta, theta, 2049);
    let (_, v) = refine_max_on_grid(|p| r.value(Complex64::from_polar(1.0, p)).norm(), &phis);
    Ok(best.max(v))
}

/// Estimate of `c_r = sup_{Σ_ψ} (1 + |z|)^2 |r'(z)|`, sampled on the boundary
/// rays and on interior rays; the best ray is refined by golden-section search.
pub fn derivative_bound_constant(r: &RationalFunction, psi: f64) -> Result<f64, StabilityError> {
    require_pole_free(r, psi)?;
    let dr = r.derivative();
    let ts = log_grid(1e-6, 1e6, 4096);
    let interior = 16;
    let mut best: f64 = 0.0;
    for k in -interior..=interior {
        let phi = psi * k as f64 / interior as f64;
        let dir = Complex64::from_polar(1.0, phi);
        let (_, v) = refine_max_on_grid(|t| (1.0 + t).powi(2) * dr.value(dir * t).norm(), &ts);
        best = best.max(v);
    }
    // (1 + |z|)^2 |r'(z)| → |r'(0)| as z → 0
    Ok(best.max(dr.value(Complex64::new(0.0, 0.0)).norm()))
}

/// `ln |r(z)|`, accurate when `|r(z)|` is close to `|r(∞)| = 1`.
fn log_modulus_near_unit(r: &RationalFunction, r_inf: Complex64, z: Complex64) -> f64 {
    match r.value_minus_infinity(z) {
        Some(tail) => {
            let d = tail / r_inf;
            (2.0 * d.re + d.norm_sqr()).ln_1p() / 2.0
        }
        None => r.value(z).norm().ln(),
    }
}

/// Two-sided bound `e^{-b2/|z|^m} ≤ |r(z)| ≤ e^{-b1/|z|^m}` for `|z| ≥ R` on
/// `Σ_θ`, for schemes with `|r(∞)| = 1`.
///
/// `b1 = |ã| cos(ω) / 4` and `b2 = 4|ã|` where `ã = a / r(∞)`,
/// `β = arg ã` and `ω = max |β ± mθ|`. `R` is the smallest grid modulus from
/// which both bounds hold on the rays `arg z ∈ {0, ±θ/2, ±θ}` up to `10^6`.
pub fn envelope_constants(r: &RationalFunction, theta: f64) -> Result<EnvelopeConstants, StabilityError> {
    let inf = r.expansion_at_infinity()?;
    let v = &inf.value_at_inf;
    let mod2: BigRational = &v.re * &v.re + &v.im * &v.im;
    if !mod2.is_one() {
        return Err(StabilityError::Precondition(format!(
            "envelope needs |r(inf)| = 1, got {}",
            exact::rational_to_f64(&mod2).sqrt()
        )));
    }
    let r_inf = exact::to_c64(v);
    let a_tilde = exact::to_c64(&(&inf.a / v));
    let m = inf.m as f64;
    let beta = a_tilde.arg();
    let omega = (beta - m * theta).abs().max((beta + m * theta).abs());
    if omega.cos() <= 0.0 {
        return Err(StabilityError::EnvelopeFailed(format!(
            "cos(omega) = {} is not positive at theta = {theta}",
            omega.cos()
        )));
    }
    let b1 = a_tilde.norm() * omega.cos() / 4.0;
    let b2 = 4.0 * a_tilde.norm();
    let ts = log_grid(1.0, 1e6, 2048);
    let mut r_cert: f64 = 1.0;
    for frac in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let dir = Complex64::from_polar(1.0, frac * theta);
        // largest grid index that violates either bound
        let last_bad = ts.iter().rposition(|&t| {
            let lm = log_modulus_near_unit(r, r_inf, dir * t);
            let tm = t.powf(m);
            !(lm <= -b1 / tm && lm >= -b2 / tm)
        });
        if let Some(i) = last_bad {
            if i + 1 >= ts.len() {
                return Err(StabilityError::EnvelopeFailed(format!(
                    "bound fails at |z| = {:e} on arg z = {}",
                    ts[i],
                    frac * theta
                )));
            }
            r_cert = r_cert.max(ts[i + 1]);
        }
    }
    if r_cert > 1e3 {
        return Err(StabilityError::EnvelopeFailed(format!(
            "certified radius {r_cert:e} exceeds 1e3"
        )));
    }
    Ok(EnvelopeConstants {
        b1,
        b2,
        r: r_cert,
        theta,
    })
}

/// Tabulates `|r'(t e^{iθ})|`, `r_θ(t) = |r(t e^{iθ})|` and `r_θ'(t)` on an
/// evenly spaced grid over `[t_lo, t_hi]`.
pub fn ray_modulus_diagnostic(
    r: &RationalFunction,
    theta: f64,
    interval: (f64, f64),
    samples: usize,
) -> Result<DiagnosticReport, StabilityError> {
    if r.is_constant() {
        return Err(RatfunError::ConstantFunction.into());
    }
    if !r.holomorphic_at_zero() {
        return Err(RatfunError::NotHolomorphicAtZero.into());
    }
    if !r.is_bounded_at_infinity() {
        return Err(RatfunError::UnboundedAtInfinity.into());
    }
    let (lo, hi) = interval;
    if !(lo >= 0.0 && hi > lo && samples >= 2) {
        return Err(StabilityError::Precondition(format!(
            "bad interval ({lo}, {hi}) or sample count {samples}"
        )));
    }
    let dir = Complex64::from_polar(1.0, theta);
    let t = lin_grid(lo, hi, samples);
    let mut report = DiagnosticReport {
        theta,
        t: t.clone(),
        deriv_abs: Vec::with_capacity(samples),
        modulus: Vec::with_capacity(samples),
        modulus_deriv: Vec::with_capacity(samples),
        ratio_sup: 0.0,
        sign_pattern: Vec::with_capacity(samples),
        likely_exceptional: false,
    };
    for &ti in &t {
        let (v, dv) = r.value_and_derivative(dir * ti);
        let modulus = v.norm();
        if modulus == 0.0 {
            return Err(StabilityError::ZeroModulusEncountered { t: ti });
        }
        let md = (dir * dv * v.conj()).re / modulus;
        let d_abs = dv.norm();
        let sign = if md.abs() <= 1e-13 * d_abs.max(f64::MIN_POSITIVE) {
            0
        } else if md > 0.0 {
            1
        } else {
            -1
        };
        let ratio = if md == 0.0 { f64::INFINITY } else { d_abs / md.abs() };
        report.ratio_sup = report.ratio_sup.max(ratio);
        report.deriv_abs.push(d_abs);
        report.modulus.push(modulus);
        report.modulus_deriv.push(md);
        report.sign_pattern.push(sign);
    }
    report.likely_exceptional = report.ratio_sup > 1e6;
    Ok(report)
}

/// Order, infinity expansion, `c_r` at `ψ` and, when `|r(∞)| < 1`, `κ_r` at
/// `0.99ψ`.
pub fn classify(r: &RationalFunction, psi: f64) -> Result<SchemeClassification, StabilityError> {
    let (q, q_is_exact) = approximation_order(r)?;
    let inf = r.expansion_at_infinity()?;
    let mass = exact::to_c64(&inf.value_at_inf).norm();
    let kappa = if mass < 1.0 {
        Some(kappa_sup(r, 0.99 * psi)?)
    } else {
        None
    };
    let c_r = derivative_bound_constant(r, psi)?;
    Ok(SchemeClassification {
        q,
        q_is_exact,
        inf,
        kappa,
        c_r,
        mass_at_inf_abs: mass,
    })
}
