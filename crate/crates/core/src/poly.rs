//! Dense univariate polynomials with exact complex-rational coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::exact::{self, ExactComplex};

/// Polynomial `c_0 + c_1 z + ... + c_d z^d`, coefficients in ascending order.
///
/// The trailing coefficient is nonzero unless the polynomial is zero, which is
/// stored as an empty coefficient list. A double-precision copy of the
/// coefficients is kept alongside for fast evaluation.
#[derive(Clone)]
pub struct Polynomial {
    coeffs: Vec<ExactComplex>,
    approx: Vec<Complex64>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for Polynomial {}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(exact::format_exact).collect();
        write!(f, "Polynomial[{}]", parts.join(", "))
    }
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<ExactComplex>) -> Self {
        while coeffs.last().is_some_and(exact::is_zero) {
            coeffs.pop();
        }
        let approx = coeffs.iter().map(exact::to_c64).collect();
        Self { coeffs, approx }
    }

    pub fn from_rationals(coeffs: Vec<BigRational>) -> Self {
        Self::new(coeffs.into_iter().map(exact::from_rational).collect())
    }

    /// Convenience constructor from `(numerator, denominator)` integer pairs.
    pub fn from_ratios(coeffs: &[(i64, i64)]) -> Self {
        Self::new(coeffs.iter().map(|&(p, q)| exact::real(p, q)).collect())
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn one() -> Self {
        Self::constant(exact::eone())
    }

    pub fn constant(c: ExactComplex) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[ExactComplex] {
        &self.coeffs
    }

    pub fn approx_coeffs(&self) -> &[Complex64] {
        &self.approx
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> ExactComplex {
        self.coeffs.get(k).cloned().unwrap_or_else(exact::ezero)
    }

    pub fn leading(&self) -> Option<&ExactComplex> {
        self.coeffs.last()
    }

    pub fn scale(&self, c: &ExactComplex) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * exact::real(k as i64, 1))
                .collect(),
        )
    }

    pub fn eval_exact(&self, z: &ExactComplex) -> ExactComplex {
        let mut acc = exact::ezero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Horner evaluation in double precision.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::zero();
        for &c in self.approx.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for &c in self.approx.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `(p(z) / z^d, p'(z) / z^d)` evaluated in `u = 1/z`, for `d ≥ deg p`.
    /// Stays finite for large `|z|` where plain Horner would overflow.
    pub fn eval_scaled_with_derivative(&self, u: Complex64, d: usize) -> (Complex64, Complex64) {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for k in 0..=d {
            let c = self.approx.get(k).copied().unwrap_or_default();
            p = p * u + c;
            dp = dp * u + c * k as f64;
        }
        (p, dp * u)
    }

    /// `sum |c_k| |z|^k`, the natural scale of rounding error in `eval(z)`.
    pub fn eval_abs_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.approx.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => {
                let inv = exact::eone() / l;
                self.scale(&inv)
            }
            None => Self::zero(),
        }
    }

    /// Euclidean division over the coefficient field.
    ///
    /// Panics if `divisor` is zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead_inv = exact::eone() / divisor.leading().unwrap();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if nd < dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![exact::ezero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = &rem[k + dd] * &lead_inv;
            if !exact::is_zero(&c) {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] = &rem[k + j] - &c * d;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor (zero if both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// `p(k z + shift)`, exact.
    pub fn compose_linear(&self, k: &ExactComplex, shift: &ExactComplex) -> Self {
        let lin = Self::new(vec![shift.clone(), k.clone()]);
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &Self::constant(c.clone());
        }
        acc
    }

    /// `w^d p(1/w)` for `d >= deg p`.
    pub fn reversed(&self, d: usize) -> Self {
        let mut out = vec![exact::ezero(); d + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[d - k] = c.clone();
        }
        Self::new(out)
    }

    /// Lowest index with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !exact::is_zero(c))
    }

    /// True when every coefficient has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im.is_zero())
    }

    /// Multiply by `z^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![exact::ezero(); k];
        out.extend(self.coeffs.iter().cloned());
        Self::new(out)
    }
}

/// First `len` Taylor coefficients of `num/den` at zero; requires `den(0) != 0`.
pub fn series_quotient(num: &Polynomial, den: &Polynomial, len: usize) -> Vec<ExactComplex> {
    let d0 = den.coeff(0);
    assert!(!exact::is_zero(&d0), "series quotient needs den(0) != 0");
    let d0_inv = exact::eone() / d0;
    let mut out: Vec<ExactComplex> = Vec::with_capacity(len);
    for k in 0..len {
        let mut acc = num.coeff(k);
        for j in 1..=k.min(den.coeffs.len().saturating_sub(1)) {
            acc -= &den.coeffs[j] * &out[k - j];
        }
        out.push(acc * &d0_inv);
    }
    out
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![exact::ezero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if exact::is_zero(a) {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl Zero for Polynomial {
    fn zero() -> Self {
        Polynomial::zero()
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl One for Polynomial {
    fn one() -> Self {
        Polynomial::one()
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::real;

    fn p(c: &[(i64, i64)]) -> Polynomial {
        Polynomial::from_ratios(c)
    }

    #[test]
    fn trims_trailing_zeros() {
        let q = p(&[(1, 1), (0, 1), (0, 1)]);
        assert_eq!(q.degree(), Some(0));
        assert!(p(&[(0, 1)]).is_zero());
        assert_eq!(Polynomial::zero().degree(), None);
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = p(&[(1, 1), (2, 1), (0, 1), (-3, 2)]);
        let b = p(&[(1, 3), (1, 1)]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.degree().unwrap_or(0) < b.degree().unwrap());
    }

    #[test]
    fn gcd_of_products() {
        let f = p(&[(1, 1), (1, 1)]);
        let g = p(&[(-2, 1), (1, 1)]);
        let h = p(&[(3, 1), (0, 1), (1, 1)]);
        let d = (&f * &g).gcd(&(&f * &h));
        assert_eq!(d, f.monic());
        assert_eq!(g.gcd(&h), Polynomial::one());
    }

    #[test]
    fn compose_linear_matches_pointwise() {
        let a = p(&[(1, 1), (-1, 2), (1, 12)]);
        let k = real(3, 2);
        let s = real(1, 3);
        let c = a.compose_linear(&k, &s);
        let z = real(5, 7);
        assert_eq!(c.eval_exact(&z), a.eval_exact(&(&k * &z + &s)));
    }

    #[test]
    fn series_quotient_geometric() {
        let s = series_quotient(&Polynomial::one(), &p(&[(1, 1), (1, 1)]), 4);
        let expect: Vec<_> = [1, -1, 1, -1].iter().map(|&v| real(v, 1)).collect();
        assert_eq!(s, expect);
    }

    #[test]
    fn horner_derivative_agrees_with_derivative_poly() {
        let a = p(&[(1, 1), (-1, 2), (1, 12), (2, 5)]);
        let z = Complex64::new(0.3, -1.2);
        let (v, dv) = a.eval_with_derivative(z);
        assert!((v - a.eval(z)).norm() < 1e-14);
        assert!((dv - a.derivative().eval(z)).norm() < 1e-14);
    }
}
