//! Property tests for the structural invariants.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

use ratsect::exact;
use ratsect::hnorm::{
    hnorm0, power_substitution_hnorm, sup_on_sector, DeltaSymbol, RayFunction, Rho1,
    SectorFunction, SupGrid,
};
use ratsect::poly::Polynomial;
use ratsect::quad::QuadratureConfig;
use ratsect::ratfun::{order_condition_holds, pade_exp, RationalFunction};
use ratsect::scheme::{backward_euler, crank_nicolson, parse_scheme};
use ratsect::semigroup::{
    approximation_error, make_diagonal_sectorial, sectoriality_constant, CVector, ResolventGrid,
};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn small_rational() -> impl Strategy<Value = (i64, i64)> {
    (-9i64..=9, 1i64..=6)
}

fn poly_from(c: &[(i64, i64)]) -> Polynomial {
    Polynomial::from_ratios(c)
}

/// Rationals with `den(0) = 1`, so they are holomorphic at the origin.
fn holomorphic_ratfun() -> impl Strategy<Value = RationalFunction> {
    (
        prop::collection::vec(small_rational(), 1..4),
        prop::collection::vec(small_rational(), 1..4),
    )
        .prop_filter_map("degenerate", |(n, mut d)| {
            d.insert(0, (1, 1));
            let num = poly_from(&n);
            if num.is_zero() {
                return None;
            }
            RationalFunction::new(num, poly_from(&d)).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pade_meets_order_condition(k in 1usize..=6) {
        let r = pade_exp(k).unwrap();
        prop_assert!(order_condition_holds(r.num(), r.den(), 2 * k));
        prop_assert!(!order_condition_holds(r.num(), r.den(), 2 * k + 1));
    }

    #[test]
    fn common_factor_cancels(r in holomorphic_ratfun(), c in small_rational()) {
        let (p, q) = c;
        let factor = poly_from(&[(1, 1), (p, q)]);
        let again = RationalFunction::new(r.num() * &factor, r.den() * &factor).unwrap();
        prop_assert_eq!(again, r);
    }

    #[test]
    fn shift_keeps_infinity_expansion(r in holomorphic_ratfun(), e in small_rational()) {
        prop_assume!(r.is_bounded_at_infinity() && !r.is_constant());
        let eps = exact::from_rational(BigRational::new(BigInt::from(e.0), BigInt::from(e.1)));
        let a = r.expansion_at_infinity().unwrap();
        let b = r.shift(&eps).expansion_at_infinity().unwrap();
        prop_assert_eq!(a.m, b.m);
        prop_assert_eq!(a.a, b.a);
        prop_assert_eq!(a.value_at_inf, b.value_at_inf);
    }

    #[test]
    fn scaling_rescales_leading_coefficient(r in holomorphic_ratfun(), k in 1i64..=5) {
        prop_assume!(r.is_bounded_at_infinity() && !r.is_constant());
        let kr = BigRational::from_integer(BigInt::from(k));
        let a = r.expansion_at_infinity().unwrap();
        let b = r.scale_arg(&kr).unwrap().expansion_at_infinity().unwrap();
        prop_assert_eq!(a.m, b.m);
        let km = exact::from_rational(num_traits::pow(kr, a.m));
        prop_assert_eq!(b.a * km, a.a);
    }

    #[test]
    fn derivative_matches_finite_differences(
        r in holomorphic_ratfun(),
        rho in 0.05f64..20.0,
        phi in -1.2f64..1.2,
    ) {
        let z = Complex64::from_polar(rho, phi);
        let poles = ratsect::stability::poles(&r);
        prop_assume!(poles.iter().all(|p| (p - z).norm() > 0.2 * (1.0 + rho)));
        let h = 1e-5 * (1.0 + rho);
        let (v, d) = r.value_and_derivative(z);
        let fd = (r.value(z + h) - r.value(z - h)) / (2.0 * h);
        prop_assert!((fd - d).norm() <= 1e-6 * (1.0 + d.norm() + v.norm() / (1.0 + rho)), "{fd} vs {d}");
        let exact_d = r.derivative().value(z);
        prop_assert!((exact_d - d).norm() <= 1e-9 * (1.0 + d.norm()));
    }

    #[test]
    fn delta_derivative_matches_finite_differences(
        n in 1u32..200,
        s in 0.0f64..3.0,
        rho in 1e-3f64..50.0,
        phi in -0.7f64..0.7,
    ) {
        let d = DeltaSymbol::new(&crank_nicolson(), n, s).unwrap();
        let z = Complex64::from_polar(rho, phi);
        let h = 1e-6 * rho;
        let (_, dv) = d.eval(z).unwrap();
        let fd = (d.eval(z + h).unwrap().0 - d.eval(z - h).unwrap().0) / (2.0 * h);
        prop_assert!((fd - dv).norm() <= 1e-5 * dv.norm() + 1e-12, "{fd} vs {dv}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn seminorm_grows_with_angle(t1 in 0.1f64..1.4, dt in 0.01f64..0.15) {
        let t2 = (t1 + dt).min(1.5);
        let d = DeltaSymbol::new(&crank_nicolson(), 4, 1.0).unwrap();
        let fixtures: [&dyn SectorFunction; 2] = [&Rho1, &d];
        for f in fixtures {
            let a = hnorm0(&RayFunction::new(f, t1), &cfg()).unwrap().value;
            let b = hnorm0(&RayFunction::new(f, t2), &cfg()).unwrap().value;
            prop_assert!(a <= b * (1.0 + 1e-8), "{a} > {b} at {t1} < {t2}");
        }
    }

    #[test]
    fn sup_is_bounded_by_seminorm(n in 1u32..64, s in 0.1f64..2.0, theta in 0.2f64..1.3) {
        let d = DeltaSymbol::new(&crank_nicolson(), n, s).unwrap();
        let sup = sup_on_sector(&d, theta, &SupGrid::default()).unwrap().0;
        let h = hnorm0(&RayFunction::new(&d, theta), &cfg()).unwrap().value;
        prop_assert!(sup <= h + 1e-8, "sup {sup} > seminorm {h}");
        let at_one = d.eval(Complex64::new(1.0, 0.0)).unwrap().0.norm();
        prop_assert!(h >= at_one);
    }

    #[test]
    // psi2 = psi1/gamma must stay below pi.
    fn substitution_is_isometric(gamma in 0.26f64..0.95, n in 1u32..32) {
        let psi1 = FRAC_PI_4;
        let d = DeltaSymbol::new(&crank_nicolson(), n, 1.0).unwrap();
        let fixtures: [&dyn SectorFunction; 2] = [&Rho1, &d];
        for f in fixtures {
            let base = hnorm0(&RayFunction::new(f, psi1), &cfg()).unwrap().value;
            let sub = power_substitution_hnorm(f, psi1, psi1 / gamma, &cfg()).unwrap().value;
            prop_assert!((sub - base).abs() <= 1e-8 * base, "{sub} vs {base}");
        }
    }

    #[test]
    fn stable_powers_are_contractions(
        moduli in prop::collection::vec((-3.0f64..3.0, -1.0f64..1.0), 1..12),
        n in 1u32..300,
        which in 0usize..3,
    ) {
        let lambdas: Vec<Complex64> = moduli
            .iter()
            .map(|&(lg, f)| Complex64::from_polar(10f64.powf(lg), f * FRAC_PI_3))
            .collect();
        let a = make_diagonal_sectorial(&lambdas, FRAC_PI_3).unwrap();
        let r = [backward_euler(), crank_nicolson(), parse_scheme("pade:2").unwrap()][which].clone();
        let nf = f64::from(n);
        prop_assert!(a.function_norm(|l| r.value(l / nf).powu(n)) <= 1.0);
    }

    #[test]
    fn calculus_bound_for_rho1(moduli in prop::collection::vec((-2.0f64..2.0, -1.0f64..1.0), 1..10)) {
        let lambdas: Vec<Complex64> = moduli
            .iter()
            .map(|&(lg, f)| Complex64::from_polar(10f64.powf(lg), f * FRAC_PI_4))
            .collect();
        let a = make_diagonal_sectorial(&lambdas, FRAC_PI_4).unwrap();
        let m = sectoriality_constant(&a, FRAC_PI_3, &ResolventGrid::default()).unwrap().m;
        prop_assert!(m >= 1.0);
        let h = hnorm0(&RayFunction::new(&Rho1, FRAC_PI_3), &cfg()).unwrap().value;
        prop_assert!(a.function_norm(|l| Rho1.value(l)) <= 0.5 * m * h + 1e-8);
    }

    #[test]
    fn time_can_be_absorbed(t in 0.01f64..100.0, n in 1u32..64, s in 0.0f64..2.0) {
        let lambdas = [Complex64::from_polar(0.3, 0.5), Complex64::from_polar(7.0, -0.2), Complex64::new(2.0, 0.0)];
        let a = make_diagonal_sectorial(&lambdas, FRAC_PI_4).unwrap();
        let y = CVector::from_element(3, Complex64::new(1.0, 0.0));
        let r = crank_nicolson();
        let lhs = approximation_error(&a, &r, n, t, s, &y).unwrap();
        let rhs = approximation_error(&a.scaled(t), &r, n, 1.0, s, &y).unwrap() * t.powf(s);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1e-300) + 1e-300, "{lhs} vs {rhs}");
    }
}

#[test]
fn hille_phillips_comparison() {
    for psi in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
        let h = hnorm0(&RayFunction::new(&Rho1, psi), &cfg()).unwrap().value;
        assert!(h <= 2.0 / psi.cos(), "{psi}: {h}");
    }
    let full = hnorm0(&RayFunction::new(&Rho1, FRAC_PI_2), &cfg()).unwrap().value;
    assert!((full - std::f64::consts::PI).abs() < 1e-9);
}
