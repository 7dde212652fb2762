//! Rate, stability and lower-bound suites.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::fit::{fit_rate, least_squares, quadratic_fit};
use super::report::{ExperimentReport, Run, SeriesPoint};
use super::{expected_rate, ExperimentError};
use crate::exact;
use crate::hnorm::{
    delta_hnorm_sweep, hnorm0, product_hnorm, sup_on_sector, DeltaSymbol, RayFunction,
    StepSequence, SupGrid,
};
use crate::quad::QuadratureConfig;
use crate::ratfun::RationalFunction;
use crate::semigroup::{approximation_error_norm, make_diagonal_sectorial, ray_spectrum, SectorialMatrix};
use crate::stability::{certify_sector_stability, classify, leading_error_coefficient, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RateMode {
    /// `‖Δ_{n,s}‖_{θ,0}` by quadrature.
    Hnorm,
    /// `sup_{Σ_θ} |Δ_{n,s}|`.
    Sup,
    /// `‖(e^{-A} - r(A/n)^n) A^{-s}‖₂` on a diagonal operator with spectrum on `±θ`.
    Operator,
}

impl FromStr for RateMode {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hnorm" => Ok(RateMode::Hnorm),
            "sup" => Ok(RateMode::Sup),
            "operator" => Ok(RateMode::Operator),
            other => Err(ExperimentError::Precondition(format!(
                "unknown mode '{other}' (expected hnorm, sup or operator)"
            ))),
        }
    }
}

impl fmt::Display for RateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateMode::Hnorm => "hnorm",
            RateMode::Sup => "sup",
            RateMode::Operator => "operator",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSuiteConfig {
    pub quad: QuadratureConfig,
    pub sup: SupGrid,
    /// Eigenvalue count of the operator-mode fixture.
    pub operator_moduli: usize,
    /// Modulus range of the operator-mode spectrum. The peak of
    /// `|Δ_{n,s}|` sits near `|z| ≈ 6 n²`, so the upper end must clear it.
    pub operator_range: (f64, f64),
    pub tolerance: f64,
    pub certify: GridSpec,
}

impl Default for RateSuiteConfig {
    fn default() -> Self {
        RateSuiteConfig {
            quad: QuadratureConfig::default(),
            sup: SupGrid::default(),
            operator_moduli: 40,
            operator_range: (1e-3, 1e7),
            tolerance: 0.15,
            certify: GridSpec::default(),
        }
    }
}

impl RateSuiteConfig {
    /// Normal diagonal operator with eigenvalues alternating on `arg λ = ±θ`.
    pub fn operator_fixture(&self, theta: f64) -> Result<SectorialMatrix, ExperimentError> {
        let (lo, hi) = self.operator_range;
        Ok(make_diagonal_sectorial(
            &ray_spectrum(theta, self.operator_moduli, lo, hi),
            theta,
        )?)
    }
}

fn require_stable(r: &RationalFunction, theta: f64, grid: &GridSpec) -> Result<(), ExperimentError> {
    let cert = certify_sector_stability(r, theta, grid)?;
    if !cert.is_stable {
        return Err(ExperimentError::Precondition(format!(
            "scheme is not stable on the sector of half-angle {theta}: max |r| = {:.6} at {}",
            cert.max_boundary_modulus, cert.worst_point
        )));
    }
    Ok(())
}

/// The `n`-series of one rate experiment.
pub fn rate_series(
    r: &RationalFunction,
    theta: f64,
    s: f64,
    n_list: &[u32],
    mode: RateMode,
    cfg: &RateSuiteConfig,
) -> Result<Vec<SeriesPoint>, ExperimentError> {
    match mode {
        RateMode::Hnorm => Ok(delta_hnorm_sweep(r, theta, s, n_list, &cfg.quad)?
            .into_iter()
            .map(|row| SeriesPoint {
                n: row.n,
                value: row.result.value,
                err_est: row.result.abs_error_estimate,
            })
            .collect()),
        RateMode::Sup => n_list
            .par_iter()
            .map(|&n| {
                let d = DeltaSymbol::new(r, n, s)?;
                let (v, _) = sup_on_sector(&d, theta, &cfg.sup)?;
                Ok(SeriesPoint {
                    n,
                    value: v,
                    err_est: cfg.sup.tol * v,
                })
            })
            .collect(),
        RateMode::Operator => {
            let a = cfg.operator_fixture(theta)?;
            n_list
                .par_iter()
                .map(|&n| {
                    let v = approximation_error_norm(&a, r, n, 1.0, s)?;
                    Ok(SeriesPoint {
                        n,
                        value: v,
                        err_est: 0.0,
                    })
                })
                .collect()
        }
    }
}

fn points_xy(points: &[SeriesPoint]) -> Vec<(u32, f64)> {
    points.iter().map(|p| (p.n, p.value)).collect()
}

/// Fits the decay exponent for each `s` and compares it with `-δ_s`
/// (`|r(∞)| = 1`) or `-q` (`|r(∞)| < 1`).
pub fn run_rate_suite(
    scheme: &str,
    r: &RationalFunction,
    theta: f64,
    s_list: &[f64],
    n_list: &[u32],
    mode: RateMode,
    cfg: &RateSuiteConfig,
) -> Result<ExperimentReport, ExperimentError> {
    require_stable(r, theta, &cfg.certify)?;
    let class = classify(r, theta)?;
    let q = class.q as f64;
    let mut runs = Vec::with_capacity(s_list.len());
    for &s in s_list {
        if !(0.0..=q + 1.0).contains(&s) {
            return Err(ExperimentError::Precondition(format!(
                "s = {s} outside [0, q + 1] = [0, {}]",
                q + 1.0
            )));
        }
        let points = rate_series(r, theta, s, n_list, mode, cfg)?;
        let fit = fit_rate(&points_xy(&points))?;
        let expected = -expected_rate(&class, s);
        let verdict = (fit.slope - expected).abs() <= cfg.tolerance;
        runs.push(Run {
            name: format!("rate:{mode}:s={s}"),
            mode: mode.to_string(),
            theta,
            s,
            detail: format!(
                "slope {:.4} vs expected {:.4} (±{}), r² {:.5}",
                fit.slope, expected, cfg.tolerance, fit.r_squared
            ),
            points,
            fit: Some(fit),
            expected_slope: Some(expected),
            tolerance: Some(cfg.tolerance),
            verdict,
        });
    }
    Ok(ExperimentReport::new(scheme, class, runs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySuiteConfig {
    pub quad: QuadratureConfig,
    /// Sequence lengths in the ratio sweep. The bound holds for every finite
    /// sequence, so each ratio records the worst case over all lengths.
    pub sequence_lengths: Vec<usize>,
    /// Ratios `K1/K0 = 2^j` for `j = 0..=max_ratio_exp`.
    pub max_ratio_exp: u32,
    /// Shuffled sequences per ratio and length; the maximum is recorded.
    pub trials: usize,
    /// Random sequences for schemes with `|r(∞)| < 1`.
    pub bounded_trials: usize,
    pub max_steps: usize,
    pub ratio_bound: f64,
    /// Pass threshold for `max / min` over the bounded trials.
    pub bounded_spread: f64,
    pub seed: u64,
}

impl Default for StabilitySuiteConfig {
    fn default() -> Self {
        StabilitySuiteConfig {
            quad: QuadratureConfig::default(),
            sequence_lengths: vec![2, 4, 8, 16],
            max_ratio_exp: 10,
            trials: 4,
            bounded_trials: 100,
            max_steps: 128,
            ratio_bound: 1024.0,
            bounded_spread: 3.0,
            seed: 0x5eed_0001,
        }
    }
}

/// `n` steps log-uniform in `[1, ratio]`. With `pin` and `n ≥ 2` both
/// endpoints occur, so `K1/K0 = ratio` exactly; the order is shuffled.
pub fn random_steps(rng: &mut ChaCha8Rng, n: usize, ratio: f64, pin: bool) -> StepSequence {
    let l = ratio.ln();
    let mut steps: Vec<f64> = (0..n).map(|_| (l * rng.random::<f64>()).exp()).collect();
    if pin && n >= 2 {
        steps[0] = 1.0;
        steps[1] = ratio;
    }
    steps.shuffle(rng);
    StepSequence::new(steps).expect("steps are positive and finite")
}

fn single_step_run(r: &RationalFunction, theta: f64, cfg: &QuadratureConfig) -> Result<Run, ExperimentError> {
    let one = StepSequence::uniform(1, 1.0)?;
    let p = product_hnorm(r, &one, theta, cfg)?;
    let f = hnorm0(&RayFunction::new(r, theta), cfg)?;
    let rel = (p.value - f.value).abs() / f.value.max(f64::MIN_POSITIVE);
    Ok(Run {
        name: "single-step".into(),
        mode: "product".into(),
        theta,
        s: 0.0,
        points: vec![SeriesPoint {
            n: 1,
            value: p.value,
            err_est: p.abs_error_estimate,
        }],
        fit: None,
        expected_slope: None,
        tolerance: Some(1e-9),
        verdict: rel <= 1e-9,
        detail: format!("product {:.12e} vs single factor {:.12e}", p.value, f.value),
    })
}

/// Variable-step stability. With `|r(∞)| = 1` the seminorm of `∏ r(k_j z)`
/// may grow with `log(K1/K0)` but at most linearly; with `|r(∞)| < 1` it
/// stays bounded independently of `n` and the step ratio.
pub fn run_stability_suite(
    scheme: &str,
    r: &RationalFunction,
    theta: f64,
    cfg: &StabilitySuiteConfig,
) -> Result<ExperimentReport, ExperimentError> {
    require_stable(r, theta, &GridSpec::default())?;
    let class = classify(r, theta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut runs = vec![single_step_run(r, theta, &cfg.quad)?];
    if class.mass_at_inf_abs >= 1.0 {
        let mut cells = Vec::new();
        for j in 0..=cfg.max_ratio_exp {
            let ratio = 2f64.powi(j as i32);
            for &len in &cfg.sequence_lengths {
                for _ in 0..cfg.trials {
                    cells.push((j, random_steps(&mut rng, len, ratio, true)));
                }
            }
        }
        let values: Vec<(u32, f64, f64)> = cells
            .par_iter()
            .map(|(j, steps)| {
                let v = product_hnorm(r, steps, theta, &cfg.quad)?;
                Ok((*j, v.value, v.abs_error_estimate))
            })
            .collect::<Result<_, ExperimentError>>()?;
        let points: Vec<SeriesPoint> = (0..=cfg.max_ratio_exp)
            .map(|j| {
                let (v, e) = values
                    .iter()
                    .filter(|c| c.0 == j)
                    .fold((0.0f64, 0.0f64), |acc, c| if c.1 > acc.0 { (c.1, c.2) } else { acc });
                SeriesPoint { n: j, value: v, err_est: e }
            })
            .collect();
        let x: Vec<f64> = points.iter().map(|p| f64::from(p.n)).collect();
        let y: Vec<f64> = points.iter().map(|p| p.value).collect();
        let line = least_squares(&x, &y)?;
        let c = quadratic_fit(&x, &y)?;
        let j_max = f64::from(cfg.max_ratio_exp);
        // Growth is at most linear when the quadratic term adds less than half
        // of the linear growth over the whole ratio range.
        let verdict = line.slope > 0.0 && (c[2] <= 0.0 || c[2] * j_max <= 0.5 * line.slope);
        runs.push(Run {
            name: "ratio-sweep".into(),
            mode: "product".into(),
            theta,
            s: 0.0,
            points,
            fit: None,
            expected_slope: None,
            tolerance: None,
            verdict,
            detail: format!(
                "linear fit {:.4} + {:.4} j (r² {:.4}); quadratic coefficients {:.4}, {:.4}, {:.5}",
                line.intercept, line.slope, line.r_squared, c[0], c[1], c[2]
            ),
        });
    } else {
        let seqs: Vec<StepSequence> = (0..cfg.bounded_trials)
            .map(|_| {
                let n = rng.random_range(1..=cfg.max_steps);
                random_steps(&mut rng, n, cfg.ratio_bound, false)
            })
            .collect();
        let points: Vec<SeriesPoint> = seqs
            .par_iter()
            .map(|steps| {
                let v = product_hnorm(r, steps, theta, &cfg.quad)?;
                Ok(SeriesPoint {
                    n: steps.steps.len() as u32,
                    value: v.value,
                    err_est: v.abs_error_estimate,
                })
            })
            .collect::<Result<_, ExperimentError>>()?;
        let max = points.iter().map(|p| p.value).fold(0.0, f64::max);
        let min = points.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
        runs.push(Run {
            name: "bounded".into(),
            mode: "product".into(),
            theta,
            s: 0.0,
            points,
            fit: None,
            expected_slope: None,
            tolerance: Some(cfg.bounded_spread),
            verdict: max / min < cfg.bounded_spread,
            detail: format!("max {max:.6} min {min:.6} spread {:.4}", max / min),
        });
    }
    Ok(ExperimentReport::new(scheme, class, runs).with_seed(cfg.seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundConfig {
    pub quad: QuadratureConfig,
    /// Relative tolerance of `n^q |Δ_{n,s}(1)|` against `|a|/e` at the largest `n`.
    pub scalar_tolerance: f64,
    pub slope_tolerance: f64,
    /// Also run the shifted-symbol seminorm sweep when `|r(∞)| = 1`.
    pub shifted: bool,
}

impl Default for LowerBoundConfig {
    fn default() -> Self {
        LowerBoundConfig {
            quad: QuadratureConfig::default(),
            scalar_tolerance: 0.01,
            slope_tolerance: 0.15,
            shifted: true,
        }
    }
}

/// Optimality checks: the scalar lower bound `n^q |Δ_{n,s}(1)| → |a|/e`
/// and, for `|r(∞)| = 1`, a shifted-symbol seminorm that decays no faster
/// than `n^{-s(m+1)/m}`.
pub fn run_lower_bound_suite(
    scheme: &str,
    r: &RationalFunction,
    theta: f64,
    s_list: &[f64],
    n_list: &[u32],
    cfg: &LowerBoundConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let class = classify(r, theta)?;
    if !class.q_is_exact {
        return Err(ExperimentError::Precondition("approximation order is not exact".into()));
    }
    let q = class.q as i32;
    let a = exact::to_c64(&leading_error_coefficient(r)?);
    let target = a.norm() / std::f64::consts::E;
    let one = Complex64::new(1.0, 0.0);
    let mut runs = Vec::new();
    for &s in s_list {
        let points: Vec<SeriesPoint> = n_list
            .iter()
            .map(|&n| {
                let (v, _) = DeltaSymbol::new(r, n, s)?.eval(one)?;
                Ok(SeriesPoint {
                    n,
                    value: f64::from(n).powi(q) * v.norm(),
                    err_est: 0.0,
                })
            })
            .collect::<Result<_, ExperimentError>>()?;
        let last = points.last().map(|p| p.value).unwrap_or(f64::NAN);
        let rel = (last - target).abs() / target;
        runs.push(Run {
            name: format!("scalar:s={s}"),
            mode: "scalar".into(),
            theta,
            s,
            points,
            fit: None,
            expected_slope: None,
            tolerance: Some(cfg.scalar_tolerance),
            verdict: rel <= cfg.scalar_tolerance,
            detail: format!("n^q |Δ(1)| = {last:.8} vs |a|/e = {target:.8} (relative {rel:.2e})"),
        });
    }
    if cfg.shifted && class.mass_at_inf_abs >= 1.0 {
        let m = class.inf.m as f64;
        for &s in s_list {
            let points: Vec<SeriesPoint> = n_list
                .par_iter()
                .map(|&n| {
                    let d = DeltaSymbol::new(r, n, s)?.shifted(1.0);
                    let v = hnorm0(&RayFunction::new(&d, theta), &cfg.quad)?;
                    Ok(SeriesPoint {
                        n,
                        value: v.value,
                        err_est: v.abs_error_estimate,
                    })
                })
                .collect::<Result<_, ExperimentError>>()?;
            let fit = fit_rate(&points_xy(&points))?;
            let floor = -s * (m + 1.0) / m;
            let verdict = fit.slope >= floor - cfg.slope_tolerance;
            runs.push(Run {
                name: format!("shifted:s={s}"),
                mode: "shifted-hnorm".into(),
                theta,
                s,
                detail: format!("slope {:.4} vs lower exponent {:.4} - {}", fit.slope, floor, cfg.slope_tolerance),
                points,
                fit: Some(fit),
                expected_slope: Some(floor),
                tolerance: Some(cfg.slope_tolerance),
                verdict,
            });
        }
    }
    Ok(ExperimentReport::new(scheme, class, runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{backward_euler, crank_nicolson};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn mode_parsing() {
        for m in [RateMode::Hnorm, RateMode::Sup, RateMode::Operator] {
            assert_eq!(m.to_string().parse::<RateMode>().unwrap(), m);
        }
        assert!("spectral".parse::<RateMode>().is_err());
    }

    #[test]
    fn pinned_steps_hit_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_steps(&mut rng, 16, 64.0, true);
        assert_eq!(s.K0(), 1.0);
        assert_eq!(s.K1(), 64.0);
    }

    #[test]
    fn be_rate_saturates_at_q() {
        let rep = run_rate_suite(
            "be",
            &backward_euler(),
            FRAC_PI_4,
            &[0.0, 1.0],
            &[8, 16, 32, 64, 128],
            RateMode::Hnorm,
            &RateSuiteConfig::default(),
        )
        .unwrap();
        assert!(rep.pass, "{:#?}", rep.runs);
    }

    #[test]
    fn rejects_s_beyond_q_plus_one() {
        let err = run_rate_suite(
            "be",
            &backward_euler(),
            FRAC_PI_4,
            &[2.5],
            &[8, 16, 32, 64],
            RateMode::Hnorm,
            &RateSuiteConfig::default(),
        );
        assert!(matches!(err, Err(ExperimentError::Precondition(_))));
    }

    #[test]
    fn scalar_lower_bound_cn() {
        let rep = run_lower_bound_suite(
            "cn",
            &crank_nicolson(),
            FRAC_PI_4,
            &[0.0],
            &[64, 128, 256, 512],
            &LowerBoundConfig::default(),
        )
        .unwrap();
        assert!(rep.runs[0].verdict, "{}", rep.runs[0].detail);
    }
}
