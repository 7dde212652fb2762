//! Independent reference values for the seminorm, the scalar error symbols
//! and the operator constants. Each oracle is evaluated here without the
//! library's series machinery, and its output is frozen below.

use std::f64::consts::{E, FRAC_PI_4};

use num_complex::Complex64;

use ratsect::hnorm::{hnorm0, q_integral, DeltaSymbol, RayFunction};
use ratsect::quad::QuadratureConfig;
use ratsect::experiments::{run_rate_suite, RateMode, RateSuiteConfig};
use ratsect::ratfun::RationalFunction;
use ratsect::scheme::{backward_euler, crank_nicolson, cubic_pi6, parse_scheme};
use ratsect::semigroup::{make_diagonal_sectorial, sectoriality_constant, ResolventGrid};
use ratsect::stability::{derivative_bound_constant, kappa_sup};

#[derive(Clone, Copy)]
enum Kind {
    Cn,
    Be,
}

/// `(E, E')` with `r(z/n)^n = e^{-z + E(z)}`, written without cancellation.
/// For Crank-Nicolson `E = -2n (atanh(x) - x)` with `x = z/(2n)`; for
/// backward Euler `E = n (w - log1p(w))` with `w = z/n`.
fn exponent(kind: Kind, n: f64, z: Complex64) -> (Complex64, Complex64) {
    match kind {
        Kind::Cn => {
            let x = z / (2.0 * n);
            let tail = if x.norm() < 0.25 {
                let x2 = x * x;
                let mut term = x * x2;
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 1..40 {
                    acc += term / (2 * k + 1) as f64;
                    term *= x2;
                }
                acc
            } else {
                0.5 * ((1.0 + x) / (1.0 - x)).ln() - x
            };
            (-2.0 * n * tail, -x * x / (1.0 - x * x))
        }
        Kind::Be => {
            let w = z / n;
            let tail = if w.norm() < 0.25 {
                let mut term = w * w;
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 2..60 {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    acc += term * sign / k as f64;
                    term *= w;
                }
                acc
            } else {
                w - (1.0 + w).ln()
            };
            (n * tail, w / (1.0 + w))
        }
    }
}

fn expm1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        z * (1.0 + z / 2.0 * (1.0 + z / 3.0 * (1.0 + z / 4.0 * (1.0 + z / 5.0))))
    } else {
        z.exp() - 1.0
    }
}

/// `(Δ_n, Δ_n')` for `Δ_n(z) = e^{-z} - r(z/n)^n`.
fn delta(kind: Kind, n: u32, z: Complex64) -> (Complex64, Complex64) {
    let (e, ep) = exponent(kind, f64::from(n), z);
    let em = (-z).exp();
    let rn = (e - z).exp();
    let d = if e.norm() < 1.0 { -em * expm1(e) } else { em - rn };
    (d, -d - rn * ep)
}

/// Trapezoid in `ln t` over `[1e-9, 1e13]` on both rays, plus the tail
/// `2 T^{-s}` contributed by `|r(∞)| = 1` when present.
fn seminorm(kind: Kind, n: u32, s: f64, theta: f64, points: usize) -> f64 {
    let g = |t: f64, sign: f64| {
        let z = Complex64::from_polar(t, sign * theta);
        let (d, dd) = delta(kind, n, z);
        let zs = Complex64::from_polar(t.powf(s), sign * theta * s);
        (dd / zs - s * d / (zs * z)).norm()
    };
    let (t_lo, t_hi) = (1e-9f64, 1e13f64);
    let (a, b) = (t_lo.ln(), t_hi.ln());
    let h = (b - a) / points as f64;
    let mut acc = 0.0;
    for i in 0..=points {
        let t = (a + h * i as f64).exp();
        let w = if i == 0 || i == points { 0.5 } else { 1.0 };
        acc += w * (g(t, 1.0) + g(t, -1.0)) * t;
    }
    let tail = match kind {
        Kind::Cn => 2.0 * t_hi.powf(-s),
        Kind::Be => 0.0,
    };
    acc * h + tail
}

/// Frozen from [`seminorm`] with 400 000 panels at `θ = π/4`.
const SEMINORM_CELLS: [(Kind, u32, f64, f64); 7] = [
    (Kind::Cn, 8, 0.5, 2.393979466091621e-1),
    (Kind::Cn, 64, 1.0, 4.305790691451598e-4),
    (Kind::Be, 16, 0.5, 1.526506909946505e-1),
    (Kind::Cn, 4, 0.25, 1.459214302719859e0),
    (Kind::Cn, 32, 2.0, 3.11945588263897e-4),
    (Kind::Be, 8, 2.0, 1.689936290312536e-1),
    (Kind::Cn, 16, 3.0, 9.215106014415156e-4),
];

fn scheme(kind: Kind) -> RationalFunction {
    match kind {
        Kind::Cn => crank_nicolson(),
        Kind::Be => backward_euler(),
    }
}

#[test]
fn seminorm_matches_frozen_oracle() {
    let cfg = QuadratureConfig::default();
    for (kind, n, s, want) in SEMINORM_CELLS {
        let d = DeltaSymbol::new(&scheme(kind), n, s).unwrap();
        let got = hnorm0(&RayFunction::new(&d, FRAC_PI_4), &cfg).unwrap().value;
        let rel = (got - want).abs() / want;
        assert!(rel < 1e-8, "n={n} s={s}: {got} vs {want} ({rel:.1e})");
    }
}

#[test]
fn oracle_reproduces_frozen_values() {
    for &(kind, n, s, want) in &SEMINORM_CELLS[..2] {
        let got = seminorm(kind, n, s, FRAC_PI_4, 100_000);
        assert!((got - want).abs() < 1e-8 * want, "n={n} s={s}: {got} vs {want}");
    }
}

#[test]
fn scalar_error_at_one() {
    // n^2 |Δ_n(1)| for Crank-Nicolson; the limit is 1/(12e).
    for (n, want) in [(64, 3.065743094953255e-2), (512, 3.065663276674728e-2)] {
        let oracle = delta(Kind::Cn, n, Complex64::new(1.0, 0.0)).0.norm() * f64::from(n).powi(2);
        assert!((oracle - want).abs() < 1e-12, "oracle {oracle}");
        let d = DeltaSymbol::new(&crank_nicolson(), n, 0.0).unwrap();
        let lib = d.eval(Complex64::new(1.0, 0.0)).unwrap().0.norm() * f64::from(n).powi(2);
        assert!((lib - want).abs() < 1e-9 * want, "n={n}: {lib} vs {want}");
        assert!((want * 12.0 * E - 1.0).abs() < 1e-3);
    }
}

#[test]
fn cubic_scheme_error_at_one() {
    // log r(w) + w = log1p(-4w^3) - log1p(w + 4w^3) + w, exact in f64 at small w.
    let n = 2048u32;
    let w = 1.0 / f64::from(n);
    let e = f64::from(n) * ((-4.0 * w.powi(3)).ln_1p() - (w + 4.0 * w.powi(3)).ln_1p() + w);
    let oracle = -(-1.0f64).exp() * e.exp_m1() * f64::from(n);
    let want = 1.824652793764259e-1;
    assert!((oracle.abs() - want).abs() < 1e-12, "oracle {oracle}");
    let d = DeltaSymbol::new(&cubic_pi6(), n, 0.0).unwrap();
    let lib = d.eval(Complex64::new(1.0, 0.0)).unwrap().0.norm() * f64::from(n);
    assert!((lib - want).abs() < 1e-9 * want, "{lib} vs {want}");
}

#[test]
fn backward_euler_tail_integral() {
    // On the positive axis the integrand is monotone, so Q = r(R)^n (Rn)^{-s}.
    let cfg = QuadratureConfig::default();
    let r = backward_euler();
    for (big_r, n, s) in [(1.0f64, 1u32, 0.0f64), (1.5, 4, 0.5), (2.0, 8, 1.0), (1.0, 16, 2.0)] {
        let want = (1.0 + big_r).powi(-(n as i32)) * (big_r * f64::from(n)).powf(-s);
        let got = q_integral(&r, 0.0, big_r, 0.0, n, s, &cfg).unwrap();
        assert!((got - want).abs() < 1e-9 * want, "R={big_r} n={n} s={s}: {got} vs {want}");
    }
}

#[test]
fn scalar_sectoriality_constant() {
    // |λ/(λ+1)| on arg λ = π - θ peaks at |λ| = 1/cos θ with value 1/sin θ.
    for theta in [FRAC_PI_4, 1.0, 1.3] {
        let a = make_diagonal_sectorial(&[Complex64::new(1.0, 0.0)], theta).unwrap();
        let m = sectoriality_constant(&a, theta, &ResolventGrid::default()).unwrap().m;
        let want = 1.0 / theta.sin();
        assert!((m - want).abs() < 1e-9, "θ={theta}: {m} vs {want}");
    }
}

#[test]
fn backward_euler_kappa() {
    for theta in [0.3, FRAC_PI_4, 1.2] {
        let want = 1.0 / (1.0 + Complex64::from_polar(1.0, theta)).norm();
        let got = kappa_sup(&backward_euler(), theta).unwrap();
        assert!((got - want).abs() < 1e-10, "θ={theta}: {got} vs {want}");
    }
}

/// Maximum of `f` over the polar box `|z| ∈ [lo, hi]`, `|arg z| ≤ theta`: a
/// coarse grid followed by a fine grid around the best coarse cell.
fn polar_grid_max(f: impl Fn(Complex64) -> f64, lo: f64, hi: f64, theta: f64) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    let eval = |x: f64, p: f64| f(Complex64::from_polar(x.exp(), p));
    let (nx, np) = (600, 400);
    let (hx, hp) = ((b - a) / nx as f64, 2.0 * theta / np as f64);
    let mut best = (f64::NEG_INFINITY, a, -theta);
    for i in 0..=nx {
        for j in 0..=np {
            let (x, p) = (a + hx * i as f64, -theta + hp * j as f64);
            let v = eval(x, p);
            if v > best.0 {
                best = (v, x, p);
            }
        }
    }
    let (_, x0, p0) = best;
    for i in 0..=200 {
        for j in 0..=200 {
            let x = (x0 + hx * (i as f64 / 100.0 - 1.0)).clamp(a, b);
            let p = (p0 + hp * (j as f64 / 100.0 - 1.0)).clamp(-theta, theta);
            best.0 = best.0.max(eval(x, p));
        }
    }
    best.0
}

#[test]
fn kappa_against_dense_grid() {
    // `pade:2` has |r(∞)| = 1, so κ is not defined for it.
    assert!(kappa_sup(&parse_scheme("pade:2").unwrap(), FRAC_PI_4).is_err());
    // be and the (1,2) Padé approximant (1 - z/3)/(1 + 2z/3 + z²/6).
    for name in ["be", "ratio:1,-1/3//1,2/3,1/6"] {
        let r = parse_scheme(name).unwrap();
        let grid = polar_grid_max(|z| r.value(z).norm(), 1.0, 1e4, FRAC_PI_4);
        let lib = kappa_sup(&r, FRAC_PI_4).unwrap();
        assert!(lib < 1.0);
        assert!((lib - grid).abs() < 1e-6, "{name}: {lib} vs {grid}");
    }
}

#[test]
fn derivative_constant_against_dense_grid() {
    let r = crank_nicolson();
    let dr = r.derivative();
    let grid = polar_grid_max(|z| (1.0 + z.norm()).powi(2) * dr.value(z).norm(), 1e-4, 1e4, FRAC_PI_4);
    let lib = derivative_bound_constant(&r, FRAC_PI_4).unwrap();
    assert!((lib - grid).abs() < 1e-2 * grid, "{lib} vs {grid}");
}

#[test]
fn backward_euler_single_step() {
    let d = DeltaSymbol::new(&backward_euler(), 1, 0.0).unwrap();
    let v = d.eval(Complex64::new(1.0, 0.0)).unwrap().0;
    assert!((v.re - ((-1.0f64).exp() - 0.5)).abs() < 1e-15 && v.im == 0.0);
}

#[test]
fn pade_rate_below_saturation() {
    // q = 4 and m = 1, so s = 1 gives exponent 2s = 2.
    let r = parse_scheme("pade:2").unwrap();
    let ns: Vec<u32> = (3..=8).map(|k| 1 << k).collect();
    let rep = run_rate_suite("pade:2", &r, FRAC_PI_4, &[1.0], &ns, RateMode::Hnorm, &RateSuiteConfig::default()).unwrap();
    let slope = rep.runs[0].fit.as_ref().unwrap().slope;
    assert!((slope + 2.0).abs() < 0.15, "slope {slope}");
}
