//! Named schemes and the scheme mini-language.
//!
//! | keyword              | function                                         |
//! |----------------------|--------------------------------------------------|
//! | `be`                 | backward Euler `1/(1+z)`                         |
//! | `cn`                 | Crank–Nicolson `(1-z/2)/(1+z/2)`                 |
//! | `pade:k`             | diagonal `(k,k)` Padé approximant of `e^{-z}`    |
//! | `cayley:tau,phi`     | `(z-z0)/(z+conj z0)`, `z0 = tau e^{i phi}`       |
//! | `rotcayley:phi`      | `(z-e^{-i phi})/(z+e^{-i phi})`                  |
//! | `shiftcayley:phi`    | `(z+1-e^{-i phi})/(z+1+e^{i phi})`               |
//! | `paper-pi6`          | `(1-4z^3)/(1+z+4z^3)`, A(π/6)-stable with m = 2   |
//! | `ratio:N/D`          | comma-separated exact coefficients, ascending    |
//!
//! In `ratio:` coefficients are `p`, `p/q`, decimals, or complex `p/q+p'/q'i`.
//! Because `/` also appears inside coefficients, the numerator/denominator
//! separator may be written `//` or `|`; a single `/` is accepted only when it
//! is the one split that leaves two valid coefficient lists.

use num_complex::Complex64;

use crate::exact::{self, ExactComplex};
use crate::poly::Polynomial;
use crate::ratfun::{pade_exp, RatfunError, RationalFunction};

/// A parsed scheme: its canonical id and the rational function.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub id: String,
    pub r: RationalFunction,
}

impl Scheme {
    pub fn parse(spec: &str) -> Result<Scheme, RatfunError> {
        let spec = spec.trim();
        let r = parse_scheme(spec)?;
        Ok(Scheme {
            id: spec.to_string(),
            r,
        })
    }
}

pub fn backward_euler() -> RationalFunction {
    RationalFunction::new(Polynomial::one(), Polynomial::from_ratios(&[(1, 1), (1, 1)]))
        .expect("valid")
}

pub fn crank_nicolson() -> RationalFunction {
    RationalFunction::new(
        Polynomial::from_ratios(&[(1, 1), (-1, 2)]),
        Polynomial::from_ratios(&[(1, 1), (1, 2)]),
    )
    .expect("valid")
}

/// `(1 - 4z^3)/(1 + z + 4z^3)`: order 1, `r(∞) = -1`, `r + 1 ~ 1/(4z^2)`.
pub fn cubic_pi6() -> RationalFunction {
    RationalFunction::new(
        Polynomial::from_ratios(&[(1, 1), (0, 1), (0, 1), (-4, 1)]),
        Polynomial::from_ratios(&[(1, 1), (1, 1), (0, 1), (4, 1)]),
    )
    .expect("valid")
}

fn exact_c(z: Complex64) -> Result<ExactComplex, RatfunError> {
    exact::exact_from_c64(z)
        .ok_or_else(|| RatfunError::InvalidArgument(format!("non-finite parameter {z}")))
}

fn linear(c0: Complex64) -> Result<Polynomial, RatfunError> {
    Ok(Polynomial::new(vec![exact_c(c0)?, exact::eone()]))
}

/// Cayley transform `(z - z0)/(z + conj z0)` with `z0 = tau e^{i phi}` in the
/// open right half-plane.
pub fn cayley(tau: f64, phi: f64) -> Result<RationalFunction, RatfunError> {
    if !(tau > 0.0) || !(phi.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(RatfunError::InvalidArgument(format!(
            "cayley needs tau > 0 and |phi| < pi/2, got tau={tau}, phi={phi}"
        )));
    }
    let z0 = Complex64::from_polar(tau, phi);
    RationalFunction::new(linear(-z0)?, linear(z0.conj())?)
}

/// `(z - e^{-i phi})/(z + e^{-i phi})`, unimodular on the ray `arg z = pi/2 - phi`.
pub fn rotated_cayley(phi: f64) -> Result<RationalFunction, RatfunError> {
    let w = Complex64::from_polar(1.0, -phi);
    RationalFunction::new(linear(-w)?, linear(w)?)
}

/// `(z + 1 - e^{-i phi})/(z + 1 + e^{i phi})`.
pub fn shifted_cayley(phi: f64) -> Result<RationalFunction, RatfunError> {
    if !(phi.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(RatfunError::InvalidArgument(format!(
            "shiftcayley needs |phi| < pi/2, got {phi}"
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    RationalFunction::new(
        linear(one - Complex64::from_polar(1.0, -phi))?,
        linear(one + Complex64::from_polar(1.0, phi))?,
    )
}

fn parse_f64(s: &str, what: &str) -> Result<f64, RatfunError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| RatfunError::Parse(format!("bad {what}: {s:?}")))
}

fn parse_coeff_list(s: &str) -> Option<Vec<ExactComplex>> {
    if s.trim().is_empty() {
        return None;
    }
    s.split(',').map(exact::parse_exact).collect()
}

fn parse_ratio(body: &str) -> Result<RationalFunction, RatfunError> {
    let build = |n: Vec<ExactComplex>, d: Vec<ExactComplex>| {
        RationalFunction::new(Polynomial::new(n), Polynomial::new(d))
    };
    for sep in ["//", "|"] {
        if let Some((n, d)) = body.split_once(sep) {
            let n = parse_coeff_list(n)
                .ok_or_else(|| RatfunError::Parse(format!("bad numerator coefficients {n:?}")))?;
            let d = parse_coeff_list(d)
                .ok_or_else(|| RatfunError::Parse(format!("bad denominator coefficients {d:?}")))?;
            return build(n, d);
        }
    }
    let splits: Vec<(Vec<ExactComplex>, Vec<ExactComplex>)> = body
        .match_indices('/')
        .filter_map(|(i, _)| Some((parse_coeff_list(&body[..i])?, parse_coeff_list(&body[i + 1..])?)))
        .collect();
    match splits.len() {
        0 => Err(RatfunError::Parse(format!(
            "ratio needs <num-coeffs>/<den-coeffs>, got {body:?}"
        ))),
        1 => {
            let (n, d) = splits.into_iter().next().unwrap();
            build(n, d)
        }
        _ => Err(RatfunError::Parse(format!(
            "ambiguous ratio {body:?}: separate numerator and denominator with '//'"
        ))),
    }
}

/// Parses the scheme mini-language into a rational function.
pub fn parse_scheme(spec: &str) -> Result<RationalFunction, RatfunError> {
    let spec = spec.trim();
    let (head, args) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec, None),
    };
    match (head, args) {
        ("be", None) => Ok(backward_euler()),
        ("cn", None) => Ok(crank_nicolson()),
        ("paper-pi6" | "cubic-pi6", None) => Ok(cubic_pi6()),
        ("pade", Some(k)) => {
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| RatfunError::Parse(format!("bad Padé degree {k:?}")))?;
            pade_exp(k)
        }
        ("cayley", Some(a)) => {
            let (tau, phi) = a
                .split_once(',')
                .ok_or_else(|| RatfunError::Parse("cayley:tau,phi".into()))?;
            cayley(parse_f64(tau, "tau")?, parse_f64(phi, "phi")?)
        }
        ("rotcayley", Some(phi)) => rotated_cayley(parse_f64(phi, "phi")?),
        ("shiftcayley", Some(phi)) => shifted_cayley(parse_f64(phi, "phi")?),
        ("ratio", Some(body)) => parse_ratio(body),
        _ => Err(RatfunError::Parse(format!("unknown scheme {spec:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_schemes() {
        assert_eq!(parse_scheme("be").unwrap(), backward_euler());
        assert_eq!(parse_scheme("cn").unwrap(), crank_nicolson());
        assert_eq!(parse_scheme("pade:1").unwrap(), crank_nicolson());
        assert_eq!(parse_scheme("paper-pi6").unwrap(), cubic_pi6());
        assert!(parse_scheme("pade:x").is_err());
        assert!(parse_scheme("nope").is_err());
    }

    #[test]
    fn ratio_forms() {
        assert_eq!(parse_scheme("ratio:1/1,1").unwrap(), backward_euler());
        assert_eq!(parse_scheme("ratio:1,-1/2//1,1/2").unwrap(), crank_nicolson());
        assert_eq!(parse_scheme("ratio:1,-0.5|1,0.5").unwrap(), crank_nicolson());
        assert!(matches!(
            parse_scheme("ratio:1,-1/2/1,1/2"),
            Err(RatfunError::Parse(_))
        ));
        assert!(parse_scheme("ratio:1/1,1/2+1/2i").is_err());
        let c = parse_scheme("ratio:1//1,1/2+1/2i").unwrap();
        assert!(!c.is_real());
    }

    #[test]
    fn cayley_family() {
        let r = parse_scheme("cayley:1,0.5").unwrap();
        let z0 = Complex64::from_polar(1.0, 0.5);
        assert!(r.eval(z0).unwrap().norm() < 1e-15);
        assert!(parse_scheme("cayley:-1,0").is_err());

        let s = parse_scheme("shiftcayley:0.3").unwrap();
        assert!((s.value_at_infinity_c64().unwrap() - 1.0).norm() < 1e-15);
        // r'(0) = 2cos(phi)/(1+e^{i phi})^2, and d/dt |r(t)| vanishes at t = 0.
        let e = Complex64::from_polar(1.0, 0.3);
        let d0 = s.value_and_derivative(Complex64::new(0.0, 0.0)).1;
        assert!((d0 - 2.0 * 0.3f64.cos() / ((1.0 + e) * (1.0 + e))).norm() < 1e-14);
        let h = 1e-6;
        let slope = (s.value(Complex64::new(h, 0.0)).norm() - s.value(Complex64::new(0.0, 0.0)).norm()) / h;
        assert!(slope.abs() < 1e-5, "{slope}");

        let phi = 0.4;
        let rot = parse_scheme(&format!("rotcayley:{phi}")).unwrap();
        for t in [0.1, 1.0, 7.0] {
            let z = Complex64::from_polar(t, std::f64::consts::FRAC_PI_2 - phi);
            assert!((rot.eval(z).unwrap().norm() - 1.0).abs() < 1e-14);
        }
    }
}
