//! Exact complex rationals.
//!
//! Coefficients of every scheme live in `Q(i)`: a pair of arbitrary-precision
//! rationals. Floating point only enters when a value is evaluated.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A complex number with exact rational real and imaginary parts.
pub type ExactComplex = Complex<BigRational>;

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn real(p: i64, q: i64) -> ExactComplex {
    Complex::new(rat(p, q), BigRational::zero())
}

pub fn from_rational(r: BigRational) -> ExactComplex {
    Complex::new(r, BigRational::zero())
}

pub fn ezero() -> ExactComplex {
    Complex::new(BigRational::zero(), BigRational::zero())
}

pub fn eone() -> ExactComplex {
    Complex::new(BigRational::one(), BigRational::zero())
}

/// Exact value of a finite `f64` (every finite double is a dyadic rational).
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn exact_from_c64(z: Complex64) -> Option<ExactComplex> {
    Some(Complex::new(
        rational_from_f64(z.re)?,
        rational_from_f64(z.im)?,
    ))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // BigRational::to_f64 rounds correctly for huge numerators/denominators
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn to_c64(z: &ExactComplex) -> Complex64 {
    Complex64::new(rational_to_f64(&z.re), rational_to_f64(&z.im))
}

pub fn is_zero(z: &ExactComplex) -> bool {
    z.re.is_zero() && z.im.is_zero()
}

/// `1/k!` as an exact rational.
pub fn inv_factorial(k: usize) -> BigRational {
    let mut f = BigInt::one();
    for j in 2..=k {
        f *= BigInt::from(j);
    }
    BigRational::new(BigInt::one(), f)
}

/// Taylor coefficient `(-1)^k / k!` of `e^{-z}`.
pub fn exp_neg_coeff(k: usize) -> ExactComplex {
    let c = inv_factorial(k);
    from_rational(if k.is_multiple_of(2) { c } else { -c })
}

/// Renders an exact complex number as `p/q`, `p/q+p'/q'i` or `p'/q'i`.
pub fn format_exact(z: &ExactComplex) -> String {
    fn fmt_rat(r: &BigRational) -> String {
        if r.denom().is_one() {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }
    match (z.re.is_zero(), z.im.is_zero()) {
        (_, true) => fmt_rat(&z.re),
        (true, false) => format!("{}i", fmt_rat(&z.im)),
        (false, false) => {
            let sign = if z.im.is_negative() { "-" } else { "+" };
            format!("{}{}{}i", fmt_rat(&z.re), sign, fmt_rat(&z.im.abs()))
        }
    }
}

/// Parses a real rational written as an integer, `p/q`, or a finite decimal.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int_digits}{frac_part}");
        let mut n: BigInt = digits.parse().ok()?;
        if negative {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), frac_part.len());
        return Some(BigRational::new(n, d));
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// Parses an exact complex coefficient: `p/q`, `p/q+p'/q'i`, `p/q-p'/q'i`,
/// `p'/q'i`, `i`, `-i`.
pub fn parse_exact(s: &str) -> Option<ExactComplex> {
    let s = s.trim();
    if let Some(body) = s.strip_suffix('i') {
        // find the sign that separates real and imaginary parts (not a leading sign)
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(i) => (parse_rational(&body[..i])?, parse_imag(&body[i..])?),
            None => (BigRational::zero(), parse_imag(body)?),
        };
        return Some(Complex::new(re, im));
    }
    parse_rational(s).map(from_rational)
}

fn parse_imag(s: &str) -> Option<BigRational> {
    match s.trim() {
        "" | "+" => Some(BigRational::one()),
        "-" => Some(-BigRational::one()),
        t => parse_rational(t.strip_prefix('+').unwrap_or(t)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_coefficient_forms() {
        assert_eq!(parse_exact("1/2").unwrap(), real(1, 2));
        assert_eq!(parse_exact("-3").unwrap(), real(-3, 1));
        assert_eq!(parse_exact("0.25").unwrap(), real(1, 4));
        assert_eq!(
            parse_exact("1/2+3/4i").unwrap(),
            Complex::new(rat(1, 2), rat(3, 4))
        );
        assert_eq!(
            parse_exact("-1/2-1i").unwrap(),
            Complex::new(rat(-1, 2), rat(-1, 1))
        );
        assert_eq!(parse_exact("-i").unwrap(), Complex::new(rat(0, 1), rat(-1, 1)));
        assert_eq!(parse_exact("2/3i").unwrap(), Complex::new(rat(0, 1), rat(2, 3)));
        assert!(parse_exact("1/0").is_none());
        assert!(parse_exact("abc").is_none());
    }

    #[test]
    fn format_round_trips() {
        for s in ["1/2", "-3", "1/2+3/4i", "-1/3-2i", "5/7i"] {
            let z = parse_exact(s).unwrap();
            assert_eq!(parse_exact(&format_exact(&z)).unwrap(), z);
        }
    }

    #[test]
    fn float_conversion_is_exact() {
        let z = exact_from_c64(Complex64::new(0.1, -2.5)).unwrap();
        assert_eq!(to_c64(&z), Complex64::new(0.1, -2.5));
    }
}
