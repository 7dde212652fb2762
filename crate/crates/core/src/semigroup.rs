//! Diagonalizable sectorial matrices and their functional calculus.
//!
//! Every operator is stored as `A = V diag(λ) V⁻¹`, so `f(A)` is
//! `V diag(f(λ)) V⁻¹` and the only numerical error comes from the
//! conditioning of `V`. Norms are spectral (2-)norms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hnorm::{principal_pow, DeltaSymbol, HnormError, StepSequence};
use crate::ratfun::{RatfunError, RationalFunction};
use crate::search::{golden_max, log_grid};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemigroupError {
    #[error("eigenvalue {lambda} lies outside the closed sector of half-angle {theta}")]
    OutsideSector { lambda: Complex64, theta: f64 },
    #[error("resolvent sample {lambda} is within 1e-12 of -σ(A)")]
    SpectrumTooClose { lambda: Complex64 },
    #[error("eigenvalue {lambda} is a pole of r")]
    PoleMeetsSpectrum { lambda: Complex64 },
    #[error("spectral and polynomial evaluations of r(A) differ by {rel:.3e} (relative)")]
    DualPathMismatch { rel: f64 },
    #[error("eigenvector basis is singular")]
    SingularBasis,
    #[error("fixture: {0}")]
    Fixture(String),
    #[error(transparent)]
    Ratfun(#[from] RatfunError),
    #[error(transparent)]
    Hnorm(#[from] HnormError),
}

/// JSON description of a test operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFixture {
    pub dim: usize,
    /// `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
    /// `"identity"` or `"random_cond:<bound>"`.
    pub basis: String,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorialityEstimate {
    pub theta: f64,
    #[serde(rename = "M")]
    pub m: f64,
    /// Where the maximum was attained; infinite when the limit `|λ| → ∞` wins.
    pub worst_lambda: Complex64,
}

#[derive(Debug, Clone)]
#[allow(non_snake_case)]
pub struct SectorialMatrix {
    pub dim: usize,
    pub V: CMatrix,
    pub lambda: Vec<Complex64>,
    pub theta: f64,
    pub V_inv: CMatrix,
    pub cond_V: f64,
    diagonal: bool,
}

fn check_sector(lambdas: &[Complex64], theta: f64) -> Result<(), SemigroupError> {
    for &l in lambdas {
        if l == Complex64::new(0.0, 0.0) || !l.is_finite() || l.arg().abs() > theta + 1e-15 {
            return Err(SemigroupError::OutsideSector { lambda: l, theta });
        }
    }
    Ok(())
}

fn spectral_norm(m: &CMatrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

/// Unitary factor of the QR decomposition of a seeded complex Gaussian matrix.
fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    g.qr().q()
}

/// `A = diag(λ)`.
pub fn make_diagonal_sectorial(
    lambdas: &[Complex64],
    theta: f64,
) -> Result<SectorialMatrix, SemigroupError> {
    check_sector(lambdas, theta)?;
    let dim = lambdas.len();
    if dim == 0 {
        return Err(SemigroupError::Fixture("empty spectrum".into()));
    }
    Ok(SectorialMatrix {
        dim,
        V: CMatrix::identity(dim, dim),
        lambda: lambdas.to_vec(),
        theta,
        V_inv: CMatrix::identity(dim, dim),
        cond_V: 1.0,
        diagonal: true,
    })
}

/// Eigenvalues `λ_j` at moduli log-spaced over `[lo, hi]`, alternating
/// between the rays `arg λ = ±θ`.
pub fn ray_spectrum(theta: f64, count: usize, lo: f64, hi: f64) -> Vec<Complex64> {
    log_grid(lo, hi, count)
        .into_iter()
        .enumerate()
        .map(|(j, r)| Complex64::from_polar(r, if j % 2 == 0 { theta } else { -theta }))
        .collect()
}

impl SectorialMatrix {
    /// `A = V diag(λ) V⁻¹` with a caller-supplied basis.
    #[allow(non_snake_case)]
    pub fn with_basis(
        V: CMatrix,
        lambdas: &[Complex64],
        theta: f64,
    ) -> Result<SectorialMatrix, SemigroupError> {
        check_sector(lambdas, theta)?;
        let dim = lambdas.len();
        if V.nrows() != dim || V.ncols() != dim {
            return Err(SemigroupError::Fixture(format!(
                "basis is {}x{}, spectrum has {dim} entries",
                V.nrows(),
                V.ncols()
            )));
        }
        let V_inv = V.clone().try_inverse().ok_or(SemigroupError::SingularBasis)?;
        let cond_V = condition_number(&V);
        if !cond_V.is_finite() {
            return Err(SemigroupError::SingularBasis);
        }
        Ok(SectorialMatrix {
            dim,
            V,
            lambda: lambdas.to_vec(),
            theta,
            V_inv,
            cond_V,
            diagonal: false,
        })
    }

    /// Builds the operator described by a fixture. A `random_cond:<b>` basis
    /// is `U₁ diag(σ) U₂*` with seeded Haar-like unitaries and `σ`
    /// log-spaced over `[1, b]`, so `cond(V) = b`.
    pub fn from_fixture(fx: &MatrixFixture, theta: f64) -> Result<SectorialMatrix, SemigroupError> {
        if fx.eigenvalues.len() != fx.dim {
            return Err(SemigroupError::Fixture(format!(
                "dim = {} but {} eigenvalues given",
                fx.dim,
                fx.eigenvalues.len()
            )));
        }
        let lambdas: Vec<Complex64> =
            fx.eigenvalues.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        if fx.basis == "identity" {
            return make_diagonal_sectorial(&lambdas, theta);
        }
        let bound = fx
            .basis
            .strip_prefix("random_cond:")
            .and_then(|b| b.trim().parse::<f64>().ok())
            .filter(|b| *b >= 1.0 && b.is_finite())
            .ok_or_else(|| SemigroupError::Fixture(format!("unknown basis '{}'", fx.basis)))?;
        let mut rng = ChaCha8Rng::seed_from_u64(fx.seed);
        let u1 = random_unitary(fx.dim, &mut rng);
        let u2 = random_unitary(fx.dim, &mut rng);
        let sigma = if fx.dim == 1 {
            vec![1.0]
        } else {
            log_grid(1.0, bound, fx.dim)
        };
        let s = CMatrix::from_diagonal(&CVector::from_iterator(
            fx.dim,
            sigma.into_iter().map(|x| Complex64::new(x, 0.0)),
        ));
        Self::with_basis(&u1 * s * u2.adjoint(), &lambdas, theta)
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    /// `V diag(d) V⁻¹`.
    pub fn from_spectrum(&self, d: &[Complex64]) -> CMatrix {
        let dm = CMatrix::from_diagonal(&CVector::from_column_slice(d));
        if self.diagonal {
            dm
        } else {
            &self.V * dm * &self.V_inv
        }
    }

    /// The dense matrix `A`.
    pub fn matrix(&self) -> CMatrix {
        self.from_spectrum(&self.lambda)
    }

    /// `f(A) = V diag(f(λ)) V⁻¹`.
    pub fn apply<F: Fn(Complex64) -> Complex64>(&self, f: F) -> CMatrix {
        let d: Vec<Complex64> = self.lambda.iter().map(|&l| f(l)).collect();
        self.from_spectrum(&d)
    }

    /// `‖f(A)‖₂`; for a diagonal operator this is `max_j |f(λ_j)|`.
    pub fn function_norm<F: Fn(Complex64) -> Complex64>(&self, f: F) -> f64 {
        if self.diagonal {
            self.lambda.iter().map(|&l| f(l).norm()).fold(0.0, f64::max)
        } else {
            spectral_norm(&self.apply(f))
        }
    }

    /// `c A` for `c > 0`.
    pub fn scaled(&self, c: f64) -> SectorialMatrix {
        let mut out = self.clone();
        for l in &mut out.lambda {
            *l *= c;
        }
        out
    }
}

/// `‖λ(λ + A)⁻¹‖₂`.
fn resolvent_norm(a: &SectorialMatrix, lambda: Complex64) -> Result<f64, SemigroupError> {
    for &l in &a.lambda {
        if (lambda + l).norm() <= 1e-12 {
            return Err(SemigroupError::SpectrumTooClose { lambda });
        }
    }
    Ok(a.function_norm(|l| lambda / (lambda + l)))
}

/// Sampling of `|λ|` on the resolvent rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventGrid {
    /// Decades added below the smallest and above the largest `|λ_j|`.
    pub margin_decades: f64,
    pub points_per_ray: usize,
}

impl Default for ResolventGrid {
    fn default() -> Self {
        ResolventGrid {
            margin_decades: 4.0,
            points_per_ray: 801,
        }
    }
}

/// Grid maximum of `‖λ(λ + A)⁻¹‖` over `λ` on the rays `arg λ = ±(π - θ)`
/// and `arg λ = 0`, refined around the best sample of each ray. The limit
/// `1` at `|λ| → ∞` is included.
pub fn sectoriality_constant(
    a: &SectorialMatrix,
    theta: f64,
    grid: &ResolventGrid,
) -> Result<SectorialityEstimate, SemigroupError> {
    let mods: Vec<f64> = a.lambda.iter().map(|l| l.norm()).collect();
    let lo = mods.iter().copied().fold(f64::INFINITY, f64::min) * 10f64.powf(-grid.margin_decades);
    let hi = mods.iter().copied().fold(0.0, f64::max) * 10f64.powf(grid.margin_decades);
    let lx = crate::search::lin_grid(lo.ln(), hi.ln(), grid.points_per_ray.max(2));
    let mut best = SectorialityEstimate {
        theta,
        m: 1.0,
        worst_lambda: Complex64::new(f64::INFINITY, 0.0),
    };
    for phi in [std::f64::consts::PI - theta, -(std::f64::consts::PI - theta), 0.0] {
        let point = |x: f64| Complex64::from_polar(x.exp(), phi);
        let mut vals = Vec::with_capacity(lx.len());
        for &x in &lx {
            vals.push(resolvent_norm(a, point(x))?);
        }
        let (i, _) = vals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let (mut x, mut v) = (lx[i], vals[i]);
        let (l, h) = (lx[i.saturating_sub(1)], lx[(i + 1).min(lx.len() - 1)]);
        let (xr, vr) = golden_max(|x| resolvent_norm(a, point(x)).unwrap_or(f64::NAN), l, h, 1e-12);
        if vr > v {
            x = xr;
            v = vr;
        }
        if v > best.m {
            best.m = v;
            best.worst_lambda = point(x);
        }
    }
    Ok(best)
}

/// `e^{-tA}`.
pub fn matrix_exp_semigroup(a: &SectorialMatrix, t: f64) -> CMatrix {
    assert!(t >= 0.0, "t must be nonnegative");
    a.apply(|l| (-t * l).exp())
}

fn rational_spectral(r: &RationalFunction, a: &SectorialMatrix) -> Result<Vec<Complex64>, SemigroupError> {
    a.lambda
        .iter()
        .map(|&l| {
            let v = r.value(l);
            let den = r.den().eval(l);
            if !v.is_finite() || den.norm() <= 1e-14 * r.den().eval_abs_scale(l) {
                Err(SemigroupError::PoleMeetsSpectrum { lambda: l })
            } else {
                Ok(v)
            }
        })
        .collect()
}

/// `num(A) den(A)⁻¹` from the dense matrix, by Horner and one linear solve.
pub fn rational_of_matrix_direct(r: &RationalFunction, a: &SectorialMatrix) -> Result<CMatrix, SemigroupError> {
    let m = a.matrix();
    let horner = |c: &[Complex64]| {
        let mut acc = CMatrix::zeros(a.dim, a.dim);
        for &ck in c.iter().rev() {
            acc = &acc * &m;
            for i in 0..a.dim {
                acc[(i, i)] += ck;
            }
        }
        acc
    };
    let p = horner(r.num().approx_coeffs());
    let q = horner(r.den().approx_coeffs());
    // num(A) and den(A) commute, so den(A)ᵀ X = num(A)ᵀ gives X = num(A) den(A)⁻¹.
    let lu = q.transpose().lu();
    lu.solve(&p.transpose())
        .map(|x| x.transpose())
        .ok_or(SemigroupError::PoleMeetsSpectrum {
            lambda: Complex64::new(f64::NAN, f64::NAN),
        })
}

/// `r(A)` through the spectrum. For a non-diagonal `A` the result is checked
/// against [`rational_of_matrix_direct`] to `1e-10 cond(V)²` relative.
pub fn rational_of_matrix(r: &RationalFunction, a: &SectorialMatrix) -> Result<CMatrix, SemigroupError> {
    let d = rational_spectral(r, a)?;
    let out = a.from_spectrum(&d);
    if !a.is_diagonal() {
        let direct = rational_of_matrix_direct(r, a)?;
        let rel = spectral_norm(&(&direct - &out)) / spectral_norm(&out).max(f64::MIN_POSITIVE);
        if !(rel <= 1e-10 * a.cond_V * a.cond_V) {
            return Err(SemigroupError::DualPathMismatch { rel });
        }
    }
    Ok(out)
}

/// `A^s` on the principal branch.
pub fn fractional_power(a: &SectorialMatrix, s: f64) -> CMatrix {
    a.apply(|l| principal_pow(l, s))
}

/// `r(A/n)^n`.
pub fn rational_power_of_matrix(
    r: &RationalFunction,
    a: &SectorialMatrix,
    n: u32,
) -> Result<CMatrix, SemigroupError> {
    let d = rational_spectral(r, &a.scaled(1.0 / f64::from(n)))?;
    let d: Vec<Complex64> = d.into_iter().map(|v| v.powu(n)).collect();
    Ok(a.from_spectrum(&d))
}

/// `∏_j r(k_j A)`.
pub fn step_product_of_matrix(
    r: &RationalFunction,
    a: &SectorialMatrix,
    steps: &StepSequence,
) -> Result<CMatrix, SemigroupError> {
    let mut d = vec![Complex64::new(1.0, 0.0); a.dim];
    for &k in &steps.steps {
        for (dj, vj) in d.iter_mut().zip(rational_spectral(r, &a.scaled(k))?) {
            *dj *= vj;
        }
    }
    Ok(a.from_spectrum(&d))
}

/// `‖(e^{-tA} - r(tA/n)^n) A^{-s} y‖₂`.
///
/// The difference is evaluated per eigenvalue through the cancellation-free
/// error symbol, so tiny `tλ` keep full relative accuracy.
pub fn approximation_error(
    a: &SectorialMatrix,
    r: &RationalFunction,
    n: u32,
    t: f64,
    s: f64,
    y: &CVector,
) -> Result<f64, SemigroupError> {
    if y.len() != a.dim {
        return Err(SemigroupError::Fixture(format!(
            "vector has length {}, operator has dimension {}",
            y.len(),
            a.dim
        )));
    }
    let delta = DeltaSymbol::new(r, n, 0.0)?;
    let mut d = Vec::with_capacity(a.dim);
    for &l in &a.lambda {
        let (dn, _) = delta.delta_n(l * t)?;
        d.push(dn / principal_pow(l, s));
    }
    let coeffs = &a.V_inv * y;
    let scaled = CVector::from_iterator(a.dim, coeffs.iter().zip(&d).map(|(c, dj)| c * dj));
    Ok((&a.V * scaled).norm())
}

/// `‖(e^{-tA} - r(tA/n)^n) A^{-s}‖₂`, the worst case of
/// [`approximation_error`] over unit vectors `y`.
pub fn approximation_error_norm(
    a: &SectorialMatrix,
    r: &RationalFunction,
    n: u32,
    t: f64,
    s: f64,
) -> Result<f64, SemigroupError> {
    let delta = DeltaSymbol::new(r, n, 0.0)?;
    let mut d = Vec::with_capacity(a.dim);
    for &l in &a.lambda {
        let (dn, _) = delta.delta_n(l * t)?;
        d.push(dn / principal_pow(l, s));
    }
    Ok(if a.is_diagonal() {
        d.iter().map(|v| v.norm()).fold(0.0, f64::max)
    } else {
        spectral_norm(&a.from_spectrum(&d))
    })
}
