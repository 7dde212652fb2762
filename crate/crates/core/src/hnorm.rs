//! Hardy–Sobolev seminorms on sectors.
//!
//! For `f` holomorphic on `Σ_θ = { |arg z| < θ }`,
//! `‖f‖_{θ,0} = ∫_0^∞ |f'(t e^{iθ})| + |f'(t e^{-iθ})| dt`.
//! This module provides the symbols the seminorm is evaluated on (the error
//! symbol `Δ_{n,s}`, powers `r(z/n)^n`, step products `∏ r(k_j z)`,
//! power-substituted functions), the quadrature driver, tail integrals,
//! sector sup-norms and the sweeps used by rate experiments.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{self, ExactComplex};
use crate::quad::{self, QuadError, QuadResult, QuadratureConfig};
use crate::ratfun::{RatfunError, RationalFunction};
use crate::search::{lin_grid, log_grid, refine_max_on_grid};

pub type HNormResult = QuadResult;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HnormError {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Ratfun(#[from] RatfunError),
    #[error("z = {z} lies on the branch cut of z^s")]
    BranchCutHit { z: Complex64 },
    #[error("interior value {interior:.6e} at {at} exceeds the boundary maximum {boundary:.6e}")]
    MaximumPrincipleViolation {
        boundary: f64,
        interior: f64,
        at: Complex64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// A function holomorphic on a sector, with its derivative and value at
/// infinity. Errors surface as non-finite values.
pub trait SectorFunction: Sync {
    fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64);

    fn value(&self, z: Complex64) -> Complex64 {
        self.value_and_derivative(z).0
    }

    fn derivative(&self, z: Complex64) -> Complex64 {
        self.value_and_derivative(z).1
    }

    fn value_at_inf(&self) -> Complex64;

    /// `f(conj z) = conj f(z)`, so both boundary rays carry the same integral.
    fn conjugate_symmetric(&self) -> bool {
        false
    }
}

impl<T: SectorFunction + ?Sized> SectorFunction for &T {
    fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        (**self).value_and_derivative(z)
    }
    fn value_at_inf(&self) -> Complex64 {
        (**self).value_at_inf()
    }
    fn conjugate_symmetric(&self) -> bool {
        (**self).conjugate_symmetric()
    }
}

/// `f` restricted to the boundary rays `t e^{±iθ}`.
pub struct RayFunction<'a> {
    f: &'a dyn SectorFunction,
    pub theta: f64,
}

impl<'a> RayFunction<'a> {
    pub fn new(f: &'a dyn SectorFunction, theta: f64) -> Self {
        RayFunction { f, theta }
    }

    fn point(&self, t: f64, sign: i8) -> Complex64 {
        Complex64::from_polar(t, f64::from(sign.signum()) * self.theta)
    }

    /// `f(t e^{±iθ})`
    pub fn eval(&self, t: f64, sign: i8) -> Complex64 {
        self.f.value(self.point(t, sign))
    }

    /// `f'(t e^{±iθ})`
    pub fn deriv(&self, t: f64, sign: i8) -> Complex64 {
        self.f.derivative(self.point(t, sign))
    }

    pub fn value_at_inf(&self) -> Complex64 {
        self.f.value_at_inf()
    }

    pub fn function(&self) -> &'a dyn SectorFunction {
        self.f
    }
}

/// `ρ_1(z) = 1 / (1 + z)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rho1;

impl SectorFunction for Rho1 {
    fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let v = (1.0 + z).inv();
        (v, -v * v)
    }
    fn value_at_inf(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn conjugate_symmetric(&self) -> bool {
        true
    }
}

impl SectorFunction for RationalFunction {
    fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        RationalFunction::value_and_derivative(self, z)
    }
    fn value_at_inf(&self) -> Complex64 {
        self.value_at_infinity_c64()
            .unwrap_or(Complex64::new(f64::INFINITY, 0.0))
    }
    fn conjugate_symmetric(&self) -> bool {
        self.is_real()
    }
}

/// `r_n(z) = r(z/n)^n`.
#[derive(Debug, Clone)]
pub struct PowerSymbol {
    pub r: RationalFunction,
    pub n: u32,
}

impl SectorFunction for PowerSymbol {
    fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let w = z / f64::from(self.n);
        let (v, dv) = self.r.value_and_derivative(w);
        let p = v.powu(self.n - 1);
        (p * v, dv * p)
    }
    fn value_at_inf(&self) -> Complex64 {
        self.r.value_at_inf().powu(self.n)
    }
    fn conjugate_symmetric(&self) -> bool {
        self.r.is_real()
    }
}

/// Step sizes `k_1..k_n` of a variable-step propagator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepSequence {
    pub steps: Vec<f64>,
}

impl StepSequence {
    pub fn new(steps: Vec<f64>) -> Result<Self, HnormError> {
        if steps.is_empty() || steps.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
            return Err(HnormError::InvalidArgument(
                "step sequence must be nonempty with positive finite steps".into(),
            ));
        }
        Ok(StepSequence { steps })
    }

    pub fn uniform(n: usize, k: f64) -> Result<Self, HnormError> {
        Self::new(vec![k; n])
    }

    #[allow(non_snake_case)]
    pub fn K0(&self) -> f64 {
        self.steps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    #[allow(non_snake_case)]
    pub fn K1(&self) -> f64 {
        self.steps.iter().copied().fold(0.0, f64::max)
    }
}

/// `P(z) = ∏_j r(k_j z)`.
#[derive(Debug, Clone)]
pub struct StepProduct {
    pub r: RationalFunction,
    pub steps: StepSequence,
}

impl SectorFunction for StepProduct {
    /// The derivative uses prefix and suffix products (the Leibniz sum), so it
    /// stays finite when a factor vanishes.
    fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let ks = &self.steps.steps;
        let mut vals = Vec::with_capacity(ks.len());
        let mut ders = Vec::with_capacity(ks.len());
        for &k in ks {
            let (v, dv) = self.r.value_and_derivative(z * k);
            vals.push(v);
            ders.push(dv * k);
        }
        let n = ks.len();
        let one = Complex64::new(1.0, 0.0);
        let mut suffix = vec![one; n + 1];
        for j in (0..n).rev() {
            suffix[j] = suffix[j + 1] * vals[j];
        }
        let mut prefix = one;
        let mut d = Complex64::new(0.0, 0.0);
        for j in 0..n {
            d += prefix * ders[j] * suffix[j + 1];
            prefix *= vals[j];
        }
        (prefix, d)
    }
    fn value_at_inf(&self) -> Complex64 {
        self.r.value_at_inf().powu(self.steps.steps.len() as u32)
    }
    fn conjugate_symmetric(&self) -> bool {
        self.r.is_real()
    }
}

/// `f_γ(z) = f(z^γ)` on the principal branch.
pub struct PowerSubstituted<'a> {
    pub f: &'a dyn SectorFunction,
    pub gamma: f64,
}

impl SectorFunction for PowerSubstituted<'_> {
    fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let (rho, phi) = z.to_polar();
        let w = Complex64::from_polar(rho.powf(self.gamma), self.gamma * phi);
        let (v, dv) = self.f.value_and_derivative(w);
        (v, dv * self.gamma * w / z)
    }
    fn value_at_inf(&self) -> Complex64 {
        self.f.value_at_inf()
    }
    fn conjugate_symmetric(&self) -> bool {
        self.f.conjugate_symmetric()
    }
}

pub(crate) fn log1p_c(h: Complex64) -> Complex64 {
    let re = if h.norm() < 0.5 {
        0.5 * (2.0 * h.re + h.norm_sqr()).ln_1p()
    } else {
        (1.0 + h).norm().ln()
    };
    Complex64::new(re, h.im.atan2(1.0 + h.re))
}

pub(crate) fn expm1_c(z: Complex64) -> Complex64 {
    let s = (0.5 * z.im).sin();
    Complex64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * s * s,
        z.re.exp() * z.im.sin(),
    )
}

fn horner_d(c: &[Complex64], w: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * w + p;
        p = p * w + ck;
    }
    (p, dp)
}

/// `z^s` on the principal branch, computed in polar form.
pub(crate) fn principal_pow(z: Complex64, s: f64) -> Complex64 {
    let (rho, phi) = z.to_polar();
    Complex64::from_polar(rho.powf(s), s * phi)
}

/// Error symbol `Δ_{n,s}(z) = (e^{-z} - r(z/n)^n) / z^s`, optionally shifted
/// to `Δ_{n,s}(z + ε)`.
///
/// For `|z/n| ≤ 1` the difference is computed without cancellation. With
/// `w = z/n` and `h(w) = r(w) e^w - 1`, `r(z/n)^n = e^{-z} (1 + h)^n`, so
/// `Δ_n = -e^{-z} expm1(n log1p(h))`. The numerator of `h`,
/// `num(w) e^w - den(w)`, is expanded exactly as a power series whose
/// first `q + 1` coefficients vanish identically.
///
/// Near zero, `Δ_n(z) = z^v G(z)` with `v = q + 1`. `G` comes from the exact
/// series `ℓ(w) = log(r(w) e^w) = Σ_{k≥v} ℓ_k w^k`, since
/// `Δ_n = -e^{-z} expm1(n ℓ(z/n))`. The weighted derivative
/// `z^{v-1-s} ((v - s) G + z G')` then has no cancellation even when
/// `s = v`.
#[derive(Debug, Clone)]
pub struct DeltaSymbol {
    r: RationalFunction,
    n: u32,
    s: f64,
    shift: f64,
    hnum: Vec<Complex64>,
    den: Vec<Complex64>,
    /// `v = q + 1`, the order of the zero of `Δ_n` at 0.
    v: usize,
    /// `λ_j = ℓ_{v+j} n^{-(v-1)-j}`, so that `n ℓ(z/n) = z^v λ(z)`.
    lam: Vec<Complex64>,
    small_radius: f64,
}

impl DeltaSymbol {
    pub fn new(r: &RationalFunction, n: u32, s: f64) -> Result<Self, HnormError> {
        if n == 0 {
            return Err(HnormError::InvalidArgument("n must be positive".into()));
        }
        if !(s >= 0.0 && s.is_finite()) {
            return Err(HnormError::InvalidArgument(format!("s = {s} must be nonnegative")));
        }
        if !r.holomorphic_at_zero() {
            return Err(RatfunError::NotHolomorphicAtZero.into());
        }
        let series = LogSeries::of(r);
        let nf = f64::from(n);
        let lam = series.ell[series.v..]
            .iter()
            .enumerate()
            .map(|(j, &c)| c * nf.powi(-((series.v - 1 + j) as i32)))
            .collect();
        Ok(DeltaSymbol {
            r: r.clone(),
            n,
            s,
            shift: 0.0,
            hnum: series.hnum,
            den: r.den().approx_coeffs().to_vec(),
            v: series.v,
            lam,
            small_radius: 0.5f64.min(0.25 * series.radius * nf),
        })
    }

    /// `z ↦ Δ_{n,s}(z + ε)`.
    pub fn shifted(mut self, eps: f64) -> Self {
        self.shift = eps;
        self
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn scheme(&self) -> &RationalFunction {
        &self.r
    }

    /// Unweighted `(Δ_n(z), Δ_n'(z))` with `Δ_n = e^{-z} - r(z/n)^n`.
    pub fn delta_n(&self, z: Complex64) -> Result<(Complex64, Complex64), HnormError> {
        let nf = f64::from(self.n);
        let w = z / nf;
        let em = (-z).exp();
        if w.norm() <= 1.0 {
            let (hv, hd) = horner_d(&self.hnum, w);
            let (dv, dd) = horner_d(&self.den, w);
            let scale = self.r.den().eval_abs_scale(w);
            if dv.norm() <= 16.0 * f64::EPSILON * scale {
                return Err(RatfunError::PoleHit { z: w }.into());
            }
            let h = hv / dv;
            let one_h = 1.0 + h;
            if one_h.norm() >= 1e-2 && h.norm() <= 1e2 {
                let hp = (hd * dv - hv * dd) / (dv * dv);
                let e = expm1_c(log1p_c(h) * nf);
                return Ok((-em * e, em * (e - (1.0 + e) * hp / one_h)));
            }
        }
        let (rv, rd) = self.r.value_and_derivative(w);
        if !(rv.is_finite() && rd.is_finite()) {
            return Err(RatfunError::PoleHit { z: w }.into());
        }
        let p = rv.powu(self.n - 1);
        Ok((em - p * rv, -em - rd * p))
    }

    /// `(G(z), G'(z))` with `Δ_n(z) = z^v G(z)`, for `|z| ≤ small_radius`.
    fn factored(&self, z: Complex64) -> (Complex64, Complex64) {
        let (lam, lam_d) = horner_d(&self.lam, z);
        let zv1 = z.powu(self.v as u32 - 1);
        let zv = zv1 * z;
        let big = zv * lam;
        let big_d = zv1 * lam * self.v as f64 + zv * lam_d;
        let (p1, p1d) = phi1(big);
        let em = (-z).exp();
        let g = -em * lam * p1;
        let gd = -em * (lam_d * p1 - lam * p1 + lam * p1d * big_d);
        (g, gd)
    }

    /// `(Δ_{n,s}(z + ε), Δ_{n,s}'(z + ε))` on the principal branch of `z^s`.
    pub fn eval(&self, z: Complex64) -> Result<(Complex64, Complex64), HnormError> {
        let z = z + self.shift;
        let integral_s = self.s.fract() == 0.0;
        if z.im == 0.0 && z.re < 0.0 && !integral_s {
            return Err(HnormError::BranchCutHit { z });
        }
        let a = self.v as f64 - self.s;
        if z.norm() <= self.small_radius {
            let (g, gd) = self.factored(z);
            if z == Complex64::new(0.0, 0.0) {
                let zero = Complex64::new(0.0, 0.0);
                return match a {
                    a if a == 0.0 => Ok((g, gd)),
                    a if a == 1.0 => Ok((zero, g)),
                    a if a > 1.0 => Ok((zero, zero)),
                    _ => Err(HnormError::InvalidArgument(format!(
                        "Δ_{{n,s}} is singular at 0 for s = {} > q + 1",
                        self.s
                    ))),
                };
            }
            let za = principal_pow(z, a);
            return Ok((za * g, za / z * (g * a + z * gd)));
        }
        let (d, dp) = self.delta_n(z)?;
        if self.s == 0.0 {
            return Ok((d, dp));
        }
        let zs = principal_pow(z, self.s);
        let v = d / zs;
        Ok((v, dp / zs - self.s * v / z))
    }
}

/// `φ1(x) = expm1(x)/x` and its derivative.
fn phi1(x: Complex64) -> (Complex64, Complex64) {
    if x.norm() < 0.1 {
        // Σ x^k/(k+1)!  and  Σ k x^{k-1}/(k+1)!
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for k in (0..16).rev() {
            let c = exact::rational_to_f64(&exact::inv_factorial(k + 1));
            p = p * x + c;
            if k > 0 {
                dp = dp * x + c * k as f64;
            }
        }
        (p, dp)
    } else {
        let p = expm1_c(x) / x;
        (p, (x.exp() - p) / x)
    }
}

/// Exact series data of a scheme shared by all `Δ_{n,s}`.
struct LogSeries {
    /// Coefficients of `num(w) e^w - den(w)`.
    hnum: Vec<Complex64>,
    /// Coefficients of `log(r(w) e^w)`.
    ell: Vec<Complex64>,
    v: usize,
    /// Distance from 0 to the nearest zero or pole of `r`.
    radius: f64,
}

impl LogSeries {
    fn of(r: &RationalFunction) -> LogSeries {
        let num = r.num();
        let deg = num.degree().unwrap_or(0).max(r.den().degree().unwrap_or(0));
        let len = deg + 30;
        let hnum_exact: Vec<ExactComplex> = (0..len)
            .map(|k| {
                let mut acc: ExactComplex = -r.den().coeff(k);
                for i in 0..=k.min(num.degree().unwrap_or(0)) {
                    acc += num.coeff(i) * exact::from_rational(exact::inv_factorial(k - i));
                }
                acc
            })
            .collect();
        let h = crate::poly::series_quotient(&crate::poly::Polynomial::new(hnum_exact.clone()), r.den(), len);
        // k ℓ_k = k h_k - Σ_{j<k} j ℓ_j h_{k-j}
        let mut ell: Vec<ExactComplex> = vec![exact::ezero(); len];
        for k in 1..len {
            let mut acc = &h[k] * exact::real(k as i64, 1);
            for j in 1..k {
                if !exact::is_zero(&ell[j]) && !exact::is_zero(&h[k - j]) {
                    acc -= &ell[j] * &h[k - j] * exact::real(j as i64, 1);
                }
            }
            ell[k] = acc / exact::real(k as i64, 1);
        }
        let v = (1..len).find(|&k| !exact::is_zero(&ell[k])).unwrap_or(len);
        let radius = crate::roots::roots(num)
            .iter()
            .chain(crate::roots::roots(r.den()).iter())
            .map(|p| p.z.norm())
            .fold(f64::INFINITY, f64::min);
        LogSeries {
            hnum: hnum_exact.iter().map(exact::to_c64).collect(),
            ell: ell.iter().map(exact::to_c64).collect(),
            v,
            radius,
        }
    }
}

impl SectorFunction for DeltaSymbol {
    fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        self.eval(z).unwrap_or((
            Complex64::new(f64::NAN, f64::NAN),
            Complex64::new(f64::NAN, f64::NAN),
        ))
    }

    /// `-r(∞)^n` for `s = 0`, otherwise 0 (on sectors inside the right half-plane).
    fn value_at_inf(&self) -> Complex64 {
        if self.s == 0.0 {
            -self.r.value_at_inf().powu(self.n)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn conjugate_symmetric(&self) -> bool {
        self.r.is_real()
    }
}

/// `delta_ns`: `(Δ_{n,s}(z), Δ_{n,s}'(z))`.
pub fn delta_ns(
    r: &RationalFunction,
    n: u32,
    s: f64,
    z: Complex64,
) -> Result<(Complex64, Complex64), HnormError> {
    DeltaSymbol::new(r, n, s)?.eval(z)
}

fn map_nonfinite<T>(res: Result<T, QuadError>, f: &RayFunction) -> Result<T, HnormError> {
    res.map_err(|e| match e {
        QuadError::NonFinite { t } => {
            // rerun the point through the checked path where possible
            let z = Complex64::from_polar(t, f.theta);
            HnormError::InvalidArgument(format!(
                "integrand not finite at z = {z} (pole or invalid point)"
            ))
        }
        other => other.into(),
    })
}

/// `‖f‖_{θ,0} = ∫_0^∞ |f'(t e^{iθ})| + |f'(t e^{-iθ})| dt`.
pub fn hnorm0(f: &RayFunction, cfg: &QuadratureConfig) -> Result<HNormResult, HnormError> {
    let g: Box<dyn Fn(f64) -> f64 + Sync> = if f.f.conjugate_symmetric() {
        Box::new(|t| 2.0 * f.deriv(t, 1).norm())
    } else {
        Box::new(|t| f.deriv(t, 1).norm() + f.deriv(t, -1).norm())
    };
    map_nonfinite(quad::integrate_half_line(&g, cfg), f)
}

/// `‖f‖*_{θ} = |f(∞)| + ‖f‖_{θ,0}`.
pub fn hnorm_star(f: &RayFunction, cfg: &QuadratureConfig) -> Result<f64, HnormError> {
    Ok(f.value_at_inf().norm() + hnorm0(f, cfg)?.value)
}

/// Seminorm of `f_γ(z) = f(z^γ)`, `γ = ψ1/ψ2`, on `Σ_{ψ2}`. Equal to the
/// seminorm of `f` on `Σ_{ψ1}`.
pub fn power_substitution_hnorm(
    f: &dyn SectorFunction,
    psi1: f64,
    psi2: f64,
    cfg: &QuadratureConfig,
) -> Result<HNormResult, HnormError> {
    if !(psi1 > 0.0 && psi2 > 0.0 && psi2 < std::f64::consts::PI) {
        return Err(HnormError::InvalidArgument(format!(
            "angles must satisfy 0 < psi1 and 0 < psi2 < pi, got {psi1}, {psi2}"
        )));
    }
    let gamma = psi1 / psi2;
    let sub = PowerSubstituted { f, gamma };
    // Panel k in t covers panel γk in u = t^γ, so grade 1/γ times deeper.
    let mut cfg = cfg.clone();
    if gamma < 1.0 {
        cfg.max_depth = (cfg.max_depth as f64 / gamma).ceil() as usize;
    }
    hnorm0(&RayFunction::new(&sub, psi2), &cfg)
}

/// Seminorm of the step product `∏ r(k_j z)` on `Σ_θ`.
pub fn product_hnorm(
    r: &RationalFunction,
    steps: &StepSequence,
    theta: f64,
    cfg: &QuadratureConfig,
) -> Result<HNormResult, HnormError> {
    let p = StepProduct {
        r: r.clone(),
        steps: steps.clone(),
    };
    hnorm0(&RayFunction::new(&p, theta), cfg)
}

fn check_q_args(r: &RationalFunction, eps: f64, big_r: f64, n: u32, s: f64) -> Result<(), HnormError> {
    if !(eps >= 0.0 && big_r >= 1.0 && n >= 1 && s >= 0.0) {
        return Err(HnormError::InvalidArgument(format!(
            "q_integral needs eps ≥ 0, R ≥ 1, n ≥ 1, s ≥ 0; got {eps}, {big_r}, {n}, {s}"
        )));
    }
    if !r.is_bounded_at_infinity() {
        return Err(RatfunError::UnboundedAtInfinity.into());
    }
    Ok(())
}

/// `Q = ∫_{Rn}^∞ | d/dt [ r(t e^{iφ}/n)^n / (t e^{iφ} + ε)^s ] | dt`.
pub fn q_integral(
    r: &RationalFunction,
    eps: f64,
    big_r: f64,
    phi: f64,
    n: u32,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, HnormError> {
    check_q_args(r, eps, big_r, n, s)?;
    let rn = PowerSymbol { r: r.clone(), n };
    let dir = Complex64::from_polar(1.0, phi);
    let g = |t: f64| {
        let z = dir * t;
        let (v, dv) = rn.value_and_derivative(z);
        let ze = z + eps;
        let w = principal_pow(ze, s);
        (dv / w - s * v / (w * ze)).norm()
    };
    Ok(quad::integrate_to_infinity(&g, big_r * f64::from(n), cfg)?.value)
}

/// The same integral after `t = n u`:
/// `n^{-s} ∫_R^∞ | d/du [ r(u e^{iφ})^n / (u e^{iφ} + ε/n)^s ] | du`.
pub fn q_integral_substituted(
    r: &RationalFunction,
    eps: f64,
    big_r: f64,
    phi: f64,
    n: u32,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, HnormError> {
    check_q_args(r, eps, big_r, n, s)?;
    let nf = f64::from(n);
    let dir = Complex64::from_polar(1.0, phi);
    let e = eps / nf;
    let g = |u: f64| {
        let z = dir * u;
        let (v, dv) = r.value_and_derivative(z);
        let p = v.powu(n - 1);
        let ze = z + e;
        let w = principal_pow(ze, s);
        ((dv * p * nf) / w - s * (p * v) / (w * ze)).norm()
    };
    Ok(nf.powf(-s) * quad::integrate_to_infinity(&g, big_r, cfg)?.value)
}

/// Sampling for [`sup_on_sector`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_ray: usize,
    pub interior_angles: usize,
    pub interior_moduli: usize,
    pub tol: f64,
}

impl Default for SupGrid {
    fn default() -> Self {
        SupGrid {
            t_min: 1e-6,
            t_max: 1e8,
            points_per_ray: 2048,
            interior_angles: 20,
            interior_moduli: 50,
            tol: 1e-8,
        }
    }
}

/// `sup |f|` over `Σ_θ` from the boundary rays and `|f(∞)|`, with an interior
/// cross-check of the maximum principle.
pub fn sup_on_sector(
    f: &dyn SectorFunction,
    theta: f64,
    grid: &SupGrid,
) -> Result<(f64, Complex64), HnormError> {
    let ts = log_grid(grid.t_min, grid.t_max, grid.points_per_ray);
    let mut best = (f.value_at_inf().norm(), Complex64::new(f64::INFINITY, 0.0));
    let signs: &[f64] = if f.conjugate_symmetric() { &[1.0] } else { &[1.0, -1.0] };
    for &sign in signs {
        let dir = Complex64::from_polar(1.0, sign * theta);
        let (t, v) = refine_max_on_grid(|t| f.value(dir * t).norm(), &ts);
        if !v.is_finite() {
            return Err(HnormError::InvalidArgument(format!(
                "|f| not finite on the ray arg z = {}",
                sign * theta
            )));
        }
        if v > best.0 {
            best = (v, dir * t);
        }
    }
    let angles = lin_grid(-theta, theta, grid.interior_angles + 2);
    let moduli = log_grid(grid.t_min, grid.t_max, grid.interior_moduli);
    for &a in &angles[1..angles.len() - 1] {
        for &m in &moduli {
            let z = Complex64::from_polar(m, a);
            let v = f.value(z).norm();
            if !(v <= best.0 + grid.tol) {
                return Err(HnormError::MaximumPrincipleViolation {
                    boundary: best.0,
                    interior: v,
                    at: z,
                });
            }
        }
    }
    Ok(best)
}

/// One row of a seminorm sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: u32,
    pub result: HNormResult,
}

/// `‖Δ_{n,s}‖_{θ,0}` for each `n`; cells run in parallel.
pub fn delta_hnorm_sweep(
    r: &RationalFunction,
    theta: f64,
    s: f64,
    n_list: &[u32],
    cfg: &QuadratureConfig,
) -> Result<Vec<SweepRow>, HnormError> {
    n_list
        .par_iter()
        .map(|&n| {
            let d = DeltaSymbol::new(r, n, s)?;
            let result = hnorm0(&RayFunction::new(&d, theta), cfg)?;
            Ok(SweepRow { n, result })
        })
        .collect()
}

/// Writes sweep rows as CSV: `scheme, theta, s, n, value, err_est`.
pub fn write_sweep_csv<W: Write>(
    out: W,
    scheme: &str,
    theta: f64,
    s: f64,
    rows: &[SweepRow],
) -> Result<(), HnormError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| HnormError::Csv(e.to_string());
    w.write_record(["scheme", "theta", "s", "n", "value", "err_est"])
        .map_err(err)?;
    for row in rows {
        w.write_record([
            scheme.to_string(),
            theta.to_string(),
            s.to_string(),
            row.n.to_string(),
            format!("{:e}", row.result.value),
            format!("{:e}", row.result.abs_error_estimate),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| HnormError::Csv(e.to_string()))
}

/// Sample set for [`appendix_bound_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixGrid {
    pub s_values: Vec<f64>,
    /// Moduli as fractions of `R n`, in `(0, 1)`.
    pub moduli: usize,
    pub min_modulus: f64,
    /// Angles as fractions of `θ`.
    pub angle_fractions: Vec<f64>,
    /// Candidate decay rates for `α`.
    pub alphas: Vec<f64>,
    /// Validation grid densification factor.
    pub validation_factor: usize,
    /// Tolerated excess of `|Δ'|` over the fitted bound on validation points.
    pub margin: f64,
}

impl Default for AppendixGrid {
    fn default() -> Self {
        AppendixGrid {
            s_values: (0..=6).map(|k| 0.5 * k as f64).collect(),
            moduli: 60,
            min_modulus: 1e-4,
            angle_fractions: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            alphas: lin_grid(0.0, 1.0, 101),
            validation_factor: 3,
            margin: 1.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    pub n: u32,
    pub s: f64,
    pub z: Complex64,
    pub lhs: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixCheck {
    pub c_fit: f64,
    pub alpha_fit: f64,
    pub samples: usize,
    pub validated: usize,
    pub violations: Vec<BoundViolation>,
}

struct BoundSample {
    n: u32,
    s: f64,
    z: Complex64,
    lhs: f64,
    /// `(q + 1 - s + |z|) |z|^{q-s} n^{-q}`, the bound without `C e^{-α|z|}`.
    shape: f64,
}

fn bound_samples(
    r: &RationalFunction,
    q: usize,
    theta: f64,
    big_r: f64,
    n_list: &[u32],
    grid: &AppendixGrid,
    moduli: usize,
    offset: f64,
) -> Result<Vec<BoundSample>, HnormError> {
    let qf = q as f64;
    let mut out = Vec::new();
    for &n in n_list {
        let top = big_r * f64::from(n);
        let lo = grid.min_modulus.ln();
        let hi = (top * 0.999).ln();
        for &s in &grid.s_values {
            let d = DeltaSymbol::new(r, n, s)?;
            for i in 0..moduli {
                let m = (lo + (hi - lo) * (i as f64 + offset) / (moduli as f64 - 1.0 + offset)).exp();
                for &af in &grid.angle_fractions {
                    let z = Complex64::from_polar(m, af * theta);
                    let (_, dp) = d.eval(z)?;
                    let shape = (qf + 1.0 - s + m) * m.powf(qf - s) * f64::from(n).powf(-qf);
                    out.push(BoundSample {
                        n,
                        s,
                        z,
                        lhs: dp.norm(),
                        shape,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Fits `(C, α)` in `|Δ'_{n,s}(z)| ≤ C (q+1-s+|z|) |z|^{q-s} n^{-q} e^{-α|z|}`
/// over `{ z ∈ Σ_θ : |z| < R n }`, then validates on an interleaved, denser
/// sample set.
///
/// `C(α)` is the maximal ratio over the fitting samples. The reported `α` is
/// the largest candidate with `C(α) ≤ 4 C(0)`; a validation point violates
/// the bound when it exceeds `margin · C e^{-α|z|}` times the shape.
pub fn appendix_bound_check(
    r: &RationalFunction,
    q: usize,
    theta: f64,
    big_r: f64,
    n_list: &[u32],
    grid: &AppendixGrid,
) -> Result<AppendixCheck, HnormError> {
    let fit = bound_samples(r, q, theta, big_r, n_list, grid, grid.moduli, 0.0)?;
    let c_of = |alpha: f64| {
        fit.iter()
            .map(|p| p.lhs / (p.shape * (-alpha * p.z.norm()).exp()))
            .filter(|x| x.is_finite())
            .fold(0.0, f64::max)
    };
    let c0 = c_of(0.0);
    let (mut alpha, mut c) = (0.0, c0);
    for &a in &grid.alphas {
        let ca = c_of(a);
        if ca <= 4.0 * c0 && a >= alpha {
            alpha = a;
            c = ca;
        }
    }
    let val = bound_samples(
        r,
        q,
        theta,
        big_r,
        n_list,
        grid,
        grid.moduli * grid.validation_factor,
        0.5,
    )?;
    let violations = val
        .iter()
        .filter_map(|p| {
            let bound = c * p.shape * (-alpha * p.z.norm()).exp();
            (p.lhs > grid.margin * bound).then_some(BoundViolation {
                n: p.n,
                s: p.s,
                z: p.z,
                lhs: p.lhs,
                bound,
            })
        })
        .collect();
    Ok(AppendixCheck {
        c_fit: c,
        alpha_fit: alpha,
        samples: fit.len(),
        validated: val.len(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{backward_euler, crank_nicolson, cubic_pi6};
    use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn rho1_closed_forms() {
        let v = hnorm0(&RayFunction::new(&Rho1, FRAC_PI_3), &cfg()).unwrap();
        assert!((v.value - 4.0 * PI / (3.0 * 3f64.sqrt())).abs() < 1e-9, "{v:?}");
        let v = hnorm0(&RayFunction::new(&Rho1, FRAC_PI_2), &cfg()).unwrap();
        assert!((v.value - PI).abs() < 1e-9);
    }

    #[test]
    fn wide_substitution_converges() {
        let d = DeltaSymbol::new(&crank_nicolson(), 5, 1.0).unwrap();
        let base = hnorm0(&RayFunction::new(&d, FRAC_PI_4), &cfg()).unwrap().value;
        let sub = power_substitution_hnorm(&d, FRAC_PI_4, FRAC_PI_4 / 0.26, &cfg()).unwrap().value;
        assert!((sub - base).abs() <= 1e-8 * base, "{sub} vs {base}");
    }

    #[test]
    fn constant_has_zero_seminorm() {
        let c = RationalFunction::from_polynomial(crate::poly::Polynomial::one()).unwrap();
        let v = hnorm0(&RayFunction::new(&c, FRAC_PI_4), &cfg()).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn factored_path_matches_direct_formula() {
        for (r, q) in [(backward_euler(), 1usize), (crank_nicolson(), 2), (cubic_pi6(), 1)] {
            for n in [1u32, 5, 64] {
                let d = DeltaSymbol::new(&r, n, 0.0).unwrap();
                assert_eq!(d.v, q + 1);
                let z = Complex64::from_polar(0.9 * d.small_radius, 0.7);
                let (g, gd) = d.factored(z);
                let zv = z.powu(d.v as u32);
                let (v, dv) = d.delta_n(z).unwrap();
                let fv = zv * g;
                let fd = zv / z * (g * d.v as f64 + z * gd);
                assert!((fv - v).norm() <= 1e-10 * v.norm(), "{n} {fv} {v}");
                assert!((fd - dv).norm() <= 1e-8 * dv.norm(), "{n} {fd} {dv}");
            }
        }
    }

    #[test]
    fn derivative_at_critical_weight_is_bounded() {
        // s = q + 1: Δ_{n,s} → G(0) and its derivative stays O(1) near 0.
        let d = DeltaSymbol::new(&backward_euler(), 16, 2.0).unwrap();
        let (v0, _) = d.eval(Complex64::new(0.0, 0.0)).unwrap();
        assert!((v0.re + 0.5 / 16.0).abs() < 1e-15, "{v0}");
        for t in [1e-12, 1e-8, 1e-4] {
            let (_, dv) = d.eval(Complex64::from_polar(t, FRAC_PI_4)).unwrap();
            assert!(dv.norm() < 1.0, "{t} {dv}");
        }
    }

    #[test]
    fn delta_trivial_values() {
        let (v, _) = delta_ns(&backward_euler(), 1, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - ((-1f64).exp() - 0.5)).abs() < 1e-15);
        let (v, _) = delta_ns(&crank_nicolson(), 7, 0.0, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(v.norm(), 0.0);
        assert!(matches!(
            delta_ns(&crank_nicolson(), 4, 0.5, Complex64::new(-1.0, 0.0)),
            Err(HnormError::BranchCutHit { .. })
        ));
        // integer s on the negative axis is fine
        assert!(delta_ns(&crank_nicolson(), 4, 1.0, Complex64::new(-1.0, 0.0)).is_ok());
        // z/n = -1/2 is a pole of the cubic scheme
        assert!(matches!(
            delta_ns(&cubic_pi6(), 2, 1.0, Complex64::new(-1.0, 0.0)),
            Err(HnormError::Ratfun(RatfunError::PoleHit { .. }))
        ));
    }

    #[test]
    fn delta_paths_agree() {
        // the deflated series and the direct formula must match where both are accurate
        let r = crank_nicolson();
        for &n in &[1u32, 3, 10] {
            let d = DeltaSymbol::new(&r, n, 0.0).unwrap();
            for &z in &[Complex64::new(0.7, 0.3), Complex64::from_polar(2.0, 0.6)] {
                let (v, dv) = d.eval(z).unwrap();
                let w = z / n as f64;
                let (rv, rd) = r.value_and_derivative(w);
                let direct = (-z).exp() - rv.powu(n);
                let ddirect = -(-z).exp() - rd * rv.powu(n - 1);
                assert!((v - direct).norm() < 1e-13 * (1.0 + direct.norm()));
                assert!((dv - ddirect).norm() < 1e-13 * (1.0 + ddirect.norm()));
            }
        }
    }

    #[test]
    fn delta_derivative_matches_finite_differences() {
        let d = DeltaSymbol::new(&cubic_pi6(), 5, 0.75).unwrap().shifted(0.5);
        for &z in &[Complex64::new(0.3, 0.1), Complex64::from_polar(4.0, 0.4), Complex64::from_polar(40.0, -0.3)] {
            let h = 1e-6 * z.norm();
            let fd = (d.value(z + h) - d.value(z - h)) / (2.0 * h);
            let an = d.derivative(z);
            assert!((fd - an).norm() < 1e-6 * an.norm(), "{z}: {fd} vs {an}");
        }
    }

    #[test]
    fn scalar_lower_bound_cn() {
        let n = 512;
        let (v, _) = delta_ns(&crank_nicolson(), n, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        let scaled = v.norm() * (n as f64).powi(2);
        assert!((scaled / (1.0 / (12.0 * E)) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn product_single_step_reduces() {
        let r = crank_nicolson();
        let p = product_hnorm(&r, &StepSequence::uniform(1, 1.0).unwrap(), FRAC_PI_4, &cfg()).unwrap();
        let one = hnorm0(&RayFunction::new(&r, FRAC_PI_4), &cfg()).unwrap();
        assert!((p.value - one.value).abs() < 1e-9 * one.value);
    }

    #[test]
    fn step_product_derivative_with_zero_factor() {
        let r = crank_nicolson();
        // r(k z) vanishes at z = 2/k
        let p = StepProduct {
            r: r.clone(),
            steps: StepSequence::new(vec![1.0, 0.5]).unwrap(),
        };
        let z = Complex64::new(2.0, 0.0);
        let (v, dv) = p.value_and_derivative(z);
        assert_eq!(v.norm(), 0.0);
        // d/dz [r(z) r(z/2)] at a zero of r(z): r'(2) r(1)
        let expect = r.value_and_derivative(z).1 * r.value(Complex64::new(1.0, 0.0));
        assert!((dv - expect).norm() < 1e-15);
    }

    #[test]
    fn q_integral_closed_form_and_forms_agree() {
        for big_r in [1.0, 2.5] {
            let q = q_integral(&backward_euler(), 0.0, big_r, 0.0, 1, 0.0, &cfg()).unwrap();
            assert!((q - 1.0 / (1.0 + big_r)).abs() < 1e-9);
        }
        let r = crank_nicolson();
        for (eps, n, s) in [(0.0, 8, 0.5), (1.0, 16, 0.25)] {
            let a = q_integral(&r, eps, 1.0, FRAC_PI_4, n, s, &cfg()).unwrap();
            let b = q_integral_substituted(&r, eps, 1.0, FRAC_PI_4, n, s, &cfg()).unwrap();
            assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn sup_examples() {
        let (v, _) = sup_on_sector(&Rho1, FRAC_PI_4, &SupGrid::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-5);
        let d = DeltaSymbol::new(&crank_nicolson(), 16, 0.0).unwrap();
        let (sup, _) = sup_on_sector(&d, FRAC_PI_4, &SupGrid::default()).unwrap();
        assert!(sup >= d.value(Complex64::new(1.0, 0.0)).norm());
        // a pole inside the sector violates the maximum principle check
        let bad = crate::scheme::parse_scheme("ratio:1//1,-1").unwrap();
        assert!(matches!(
            sup_on_sector(&bad, FRAC_PI_4, &SupGrid::default()),
            Err(HnormError::MaximumPrincipleViolation { .. })
        ));
    }

    #[test]
    fn isometry_rho1() {
        let base = hnorm0(&RayFunction::new(&Rho1, FRAC_PI_3), &cfg()).unwrap().value;
        let sub = power_substitution_hnorm(&Rho1, FRAC_PI_3, PI / 6.0, &cfg()).unwrap().value;
        assert!((sub - base).abs() < 1e-8 * base);
        let v = power_substitution_hnorm(&Rho1, FRAC_PI_2, FRAC_PI_4, &cfg()).unwrap().value;
        assert!((v - PI).abs() < 1e-8);
    }

    #[test]
    fn large_arguments_stay_finite() {
        let r = crate::ratfun::pade_exp(12).unwrap();
        let (v, dv) = r.value_and_derivative(Complex64::from_polar(1e30, 0.3));
        assert!(v.is_finite() && dv.is_finite());
        assert!((v - r.value_at_inf()).norm() < 1e-12);
    }
}
