//! Rational functions with exact coefficients: the one-step schemes `r(z)`
//! approximating `e^{-z}`.
//!
//! Construction, reduction and all algebra (Taylor data at zero, the expansion
//! at infinity, Padé coefficients, shifts and rescalings) are exact. Evaluation
//! is in double precision, with an optional double-double path.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::dd::{self, CDD, DD};
use crate::exact::{self, ExactComplex};
use crate::poly::{self, Polynomial};

/// Largest numerator/denominator degree accepted by constructors.
pub const DEFAULT_DEGREE_LIMIT: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RatfunError {
    #[error("pole hit: denominator vanishes at z = {z}")]
    PoleHit { z: Complex64 },
    #[error("function is not holomorphic at zero (den(0) = 0)")]
    NotHolomorphicAtZero,
    #[error("function is constant")]
    ConstantFunction,
    #[error("function is unbounded at infinity (deg num > deg den)")]
    UnboundedAtInfinity,
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("degree {degree} exceeds the configured limit {limit}")]
    DegreeLimit { degree: usize, limit: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("scheme parse error: {0}")]
    Parse(String),
}

/// Evaluation precision for [`RationalFunction::eval_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Double,
    /// Double-double Horner evaluation (about 32 digits before the final rounding).
    Extended,
}

/// `r(z) = r(∞) - a / z^m + O(|z|^{-(m+1)})` as `z → ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfinityExpansion {
    pub value_at_inf: ExactComplex,
    pub a: ExactComplex,
    pub m: usize,
}

impl serde::Serialize for InfinityExpansion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("InfinityExpansion", 3)?;
        st.serialize_field("value_at_inf", &exact::format_exact(&self.value_at_inf))?;
        st.serialize_field("a", &exact::format_exact(&self.a))?;
        st.serialize_field("m", &self.m)?;
        st.end()
    }
}

/// Taylor coefficients `c_0..c_N` of `r` at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorData {
    pub coeffs: Vec<ExactComplex>,
}

/// Reduced quotient `num / den` with exact coefficients.
///
/// The constructor removes common factors and normalises the denominator so
/// that `den(0) = 1` when `den(0) != 0` (otherwise it is made monic).
#[derive(Clone)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
    num_dd: Vec<CDD>,
    den_dd: Vec<CDD>,
    /// `num - r(∞) den`, so `r(z) - r(∞)` can be evaluated without cancellation.
    tail_num: Option<Polynomial>,
    value_at_inf: Option<ExactComplex>,
}

impl std::fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RationalFunction({:?} / {:?})", self.num, self.den)
    }
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num && self.den == other.den
    }
}

fn rational_to_dd(r: &BigRational) -> DD {
    let hi = exact::rational_to_f64(r);
    if !hi.is_finite() {
        return DD::new(hi);
    }
    let rest = r - BigRational::from_float(hi).unwrap_or_else(BigRational::zero);
    DD {
        hi,
        lo: exact::rational_to_f64(&rest),
    }
}

fn exact_to_cdd(z: &ExactComplex) -> CDD {
    CDD {
        re: rational_to_dd(&z.re),
        im: rational_to_dd(&z.im),
    }
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, RatfunError> {
        Self::with_degree_limit(num, den, DEFAULT_DEGREE_LIMIT)
    }

    pub fn with_degree_limit(
        num: Polynomial,
        den: Polynomial,
        limit: usize,
    ) -> Result<Self, RatfunError> {
        if den.is_zero() {
            return Err(RatfunError::ZeroDenominator);
        }
        let (mut num, mut den) = if num.is_zero() {
            (Polynomial::zero(), Polynomial::one())
        } else {
            let g = num.gcd(&den);
            (num.div_rem(&g).0, den.div_rem(&g).0)
        };
        let norm = {
            let d0 = den.coeff(0);
            if exact::is_zero(&d0) {
                den.leading().unwrap().clone()
            } else {
                d0
            }
        };
        let inv = exact::eone() / norm;
        num = num.scale(&inv);
        den = den.scale(&inv);
        for p in [&num, &den] {
            if let Some(d) = p.degree() {
                if d > limit {
                    return Err(RatfunError::DegreeLimit { degree: d, limit });
                }
            }
        }
        let value_at_inf = match (num.degree(), den.degree()) {
            (None, _) => Some(exact::ezero()),
            (Some(dn), Some(dd)) if dn < dd => Some(exact::ezero()),
            (Some(dn), Some(dd)) if dn == dd => {
                Some(num.leading().unwrap() / den.leading().unwrap())
            }
            _ => None,
        };
        let tail_num = value_at_inf
            .as_ref()
            .map(|v| &num - &den.scale(v));
        Ok(Self {
            num_dd: num.coeffs().iter().map(exact_to_cdd).collect(),
            den_dd: den.coeffs().iter().map(exact_to_cdd).collect(),
            num,
            den,
            tail_num,
            value_at_inf,
        })
    }

    pub fn from_polynomial(p: Polynomial) -> Result<Self, RatfunError> {
        Self::new(p, Polynomial::one())
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_constant(&self) -> bool {
        self.num.degree().unwrap_or(0) == 0 && self.den.degree() == Some(0)
    }

    pub fn is_real(&self) -> bool {
        self.num.is_real() && self.den.is_real()
    }

    pub fn is_bounded_at_infinity(&self) -> bool {
        self.value_at_inf.is_some()
    }

    /// `r(∞)` when `r` is bounded at infinity.
    pub fn value_at_infinity(&self) -> Option<&ExactComplex> {
        self.value_at_inf.as_ref()
    }

    pub fn value_at_infinity_c64(&self) -> Option<Complex64> {
        self.value_at_inf.as_ref().map(exact::to_c64)
    }

    pub fn holomorphic_at_zero(&self) -> bool {
        !exact::is_zero(&self.den.coeff(0))
    }

    fn pole_threshold(&self, z: Complex64) -> f64 {
        16.0 * f64::EPSILON * self.den.eval_abs_scale(z)
    }

    /// `num(z)/den(z)` in double precision; fails with `PoleHit` when the
    /// denominator is indistinguishable from zero at this scale.
    pub fn eval(&self, z: Complex64) -> Result<Complex64, RatfunError> {
        self.eval_with(z, Precision::Double)
    }

    pub fn eval_with(&self, z: Complex64, precision: Precision) -> Result<Complex64, RatfunError> {
        match precision {
            Precision::Double => {
                let d = self.den.eval(z);
                if d.norm() <= self.pole_threshold(z) {
                    return Err(RatfunError::PoleHit { z });
                }
                Ok(self.num.eval(z) / d)
            }
            Precision::Extended => {
                let zz = CDD::from_c64(z);
                let d = dd::horner(&self.den_dd, zz);
                if d.norm_sqr().to_f64().sqrt() <= 1e-16 * self.pole_threshold(z) {
                    return Err(RatfunError::PoleHit { z });
                }
                Ok((dd::horner(&self.num_dd, zz) / d).to_c64())
            }
        }
    }

    fn max_degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }

    /// Numerator and denominator values with derivatives, all divided by
    /// `z^D` (`D` the larger degree) when `|z| > 1`.
    #[inline]
    fn parts(&self, top: &Polynomial, z: Complex64) -> [Complex64; 4] {
        if z.norm_sqr() > 1.0 {
            let u = z.inv();
            let d = self.max_degree();
            let (n, dn) = top.eval_scaled_with_derivative(u, d);
            let (q, dq) = self.den.eval_scaled_with_derivative(u, d);
            [n, dn, q, dq]
        } else {
            let (n, dn) = top.eval_with_derivative(z);
            let (q, dq) = self.den.eval_with_derivative(z);
            [n, dn, q, dq]
        }
    }

    /// Unchecked double-precision value (may be infinite or NaN at a pole).
    #[inline]
    pub fn value(&self, z: Complex64) -> Complex64 {
        let [n, _, d, _] = self.parts(&self.num, z);
        n / d
    }

    /// `(r(z), r'(z))` in double precision, unchecked.
    #[inline]
    pub fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let [n, dn, d, dd] = self.parts(&self.num, z);
        let v = n / d;
        (v, (dn - v * dd) / d)
    }

    /// `r(z) - r(∞)` evaluated from `num - r(∞) den`, accurate for large `|z|`.
    pub fn value_minus_infinity(&self, z: Complex64) -> Option<Complex64> {
        self.tail_num.as_ref().map(|t| {
            let [n, _, d, _] = self.parts(t, z);
            n / d
        })
    }

    /// Reduced exact derivative `(num' den - num den') / den^2`.
    pub fn derivative(&self) -> RationalFunction {
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        let d = &self.den * &self.den;
        // den^2 may exceed the constructor limit
        Self::with_degree_limit(n, d, 2 * DEFAULT_DEGREE_LIMIT + 1)
            .expect("derivative of a valid rational function is valid")
    }

    /// Exact Taylor coefficients `c_0..c_N` from `num = den * sum c_k z^k`.
    pub fn taylor_at_zero(&self, order: usize) -> Result<TaylorData, RatfunError> {
        if !self.holomorphic_at_zero() {
            return Err(RatfunError::NotHolomorphicAtZero);
        }
        Ok(TaylorData {
            coeffs: poly::series_quotient(&self.num, &self.den, order + 1),
        })
    }

    /// Exact expansion of `r(1/w)` at `w = 0`.
    pub fn expansion_at_infinity(&self) -> Result<InfinityExpansion, RatfunError> {
        if self.is_constant() || self.num.is_zero() {
            return Err(RatfunError::ConstantFunction);
        }
        let dd = self.den.degree().unwrap();
        let dn = self.num.degree().unwrap();
        if dn > dd {
            return Err(RatfunError::UnboundedAtInfinity);
        }
        // r(1/w) = rev_dd(num)(w) / rev_dd(den)(w), den reversal has nonzero constant term
        let top = self.num.reversed(dd);
        let bottom = self.den.reversed(dd);
        let series = poly::series_quotient(&top, &bottom, dn + dd + 2);
        let m = series
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, c)| !exact::is_zero(c))
            .map(|(k, _)| k)
            .ok_or(RatfunError::ConstantFunction)?;
        Ok(InfinityExpansion {
            value_at_inf: series[0].clone(),
            a: -series[m].clone(),
            m,
        })
    }

    /// `z ↦ r(z + eps)`.
    pub fn shift(&self, eps: &ExactComplex) -> RationalFunction {
        let one = exact::eone();
        Self::new(
            self.num.compose_linear(&one, eps),
            self.den.compose_linear(&one, eps),
        )
        .expect("shift preserves validity")
    }

    /// `z ↦ r(k z)` for `k > 0`.
    pub fn scale_arg(&self, k: &BigRational) -> Result<RationalFunction, RatfunError> {
        if !k.is_positive() {
            return Err(RatfunError::InvalidArgument(format!(
                "scale factor must be positive, got {k}"
            )));
        }
        let kc = exact::from_rational(k.clone());
        let zero = exact::ezero();
        Self::new(
            self.num.compose_linear(&kc, &zero),
            self.den.compose_linear(&kc, &zero),
        )
    }
}

impl TaylorData {
    /// `c_k * k!`, i.e. `r^{(k)}(0)`.
    pub fn derivative_at_zero(&self, k: usize) -> ExactComplex {
        let mut f = BigInt::one();
        for j in 2..=k {
            f *= BigInt::from(j);
        }
        &self.coeffs[k] * exact::from_rational(BigRational::from_integer(f))
    }
}

/// Solves `M x = b` exactly with Bareiss fraction-free elimination.
/// Returns `None` if the matrix is singular.
pub(crate) fn solve_fraction_free(
    mut m: Vec<Vec<BigInt>>,
    mut b: Vec<BigInt>,
) -> Option<Vec<BigRational>> {
    let n = m.len();
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot_row = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, pivot_row);
        b.swap(k, pivot_row);
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
            b[i] = (&m[k][k] * &b[i] - &m[i][k] * &b[k]) / &prev;
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = BigRational::from_integer(b[i].clone());
        for j in i + 1..n {
            acc -= BigRational::from_integer(m[i][j].clone()) * &x[j];
        }
        x[i] = acc / BigRational::from_integer(m[i][i].clone());
    }
    Some(x)
}

/// Diagonal `(k, k)` Padé approximant `P_k / Q_k` of `e^{-z}`, `Q_k(0) = 1`.
///
/// The denominator solves the exact Toeplitz system that annihilates the
/// Taylor coefficients of `Q_k e^{-z}` of degrees `k+1..2k`; the result is
/// then certified by checking that `P_k - Q_k e^{-z} = O(z^{2k+1})` exactly.
pub fn pade_exp(k: usize) -> Result<RationalFunction, RatfunError> {
    if k == 0 {
        return Err(RatfunError::InvalidArgument("Padé degree must be ≥ 1".into()));
    }
    if k > DEFAULT_DEGREE_LIMIT {
        return Err(RatfunError::DegreeLimit {
            degree: k,
            limit: DEFAULT_DEGREE_LIMIT,
        });
    }
    // integer-scaled coefficients E_j = (2k)! (-1)^j / j!
    let mut fact = BigInt::one();
    for j in 2..=2 * k {
        fact *= BigInt::from(j);
    }
    let scaled: Vec<BigInt> = (0..=2 * k)
        .map(|j| {
            let v = (exact::inv_factorial(j) * BigRational::from_integer(fact.clone())).to_integer();
            if j % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect();
    let mat: Vec<Vec<BigInt>> = (k + 1..=2 * k)
        .map(|j| (1..=k).map(|i| scaled[j - i].clone()).collect())
        .collect();
    let rhs: Vec<BigInt> = (k + 1..=2 * k).map(|j| -scaled[j].clone()).collect();
    let q_tail = solve_fraction_free(mat, rhs)
        .ok_or_else(|| RatfunError::InvalidArgument("singular Padé system".into()))?;
    let mut q = vec![BigRational::one()];
    q.extend(q_tail);
    let e: Vec<BigRational> = (0..=2 * k)
        .map(|j| exact::exp_neg_coeff(j).re)
        .collect();
    let p: Vec<BigRational> = (0..=k)
        .map(|j| (0..=j).map(|i| &q[i] * &e[j - i]).sum())
        .collect();
    let num = Polynomial::from_rationals(p);
    let den = Polynomial::from_rationals(q);
    if !order_condition_holds(&num, &den, 2 * k) {
        return Err(RatfunError::InvalidArgument(
            "Padé order certification failed".into(),
        ));
    }
    RationalFunction::new(num, den)
}

/// True when every Taylor coefficient of `num - den * e^{-z}` of degree
/// `0..=order` vanishes exactly.
pub fn order_condition_holds(num: &Polynomial, den: &Polynomial, order: usize) -> bool {
    (0..=order).all(|j| {
        let mut acc = num.coeff(j);
        for i in 0..=j {
            acc -= den.coeff(i) * exact::exp_neg_coeff(j - i);
        }
        exact::is_zero(&acc)
    })
}
