//! Log-log regression of convergence rates.

use serde::Serialize;

use super::ExperimentError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub n_used: Vec<u32>,
    pub r_squared: f64,
}

/// Ordinary least squares for `y ≈ intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r_squared: f64,
}

pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LineFit, ExperimentError> {
    let k = x.len();
    if k < 2 || y.len() != k {
        return Err(ExperimentError::DegenerateInput(format!(
            "need at least two paired samples, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let kf = k as f64;
    let mx = x.iter().sum::<f64>() / kf;
    let my = y.iter().sum::<f64>() / kf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(ExperimentError::DegenerateInput("abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let stderr = if k > 2 { (ssr / (kf - 2.0) / sxx).sqrt() } else { 0.0 };
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ssr / syy };
    Ok(LineFit {
        slope,
        intercept,
        stderr,
        r_squared,
    })
}

/// Least-squares quadratic `y ≈ c0 + c1 x + c2 x²`, returned as `[c0, c1, c2]`.
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> Result<[f64; 3], ExperimentError> {
    if x.len() < 3 || y.len() != x.len() {
        return Err(ExperimentError::DegenerateInput(
            "quadratic fit needs at least three paired samples".into(),
        ));
    }
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut aty = nalgebra::Vector3::<f64>::zeros();
    for (&xi, &yi) in x.iter().zip(y) {
        let row = nalgebra::Vector3::new(1.0, xi, xi * xi);
        ata += row * row.transpose();
        aty += row * yi;
    }
    let c = ata
        .lu()
        .solve(&aty)
        .ok_or_else(|| ExperimentError::DegenerateInput("quadratic design is singular".into()))?;
    Ok([c[0], c[1], c[2]])
}

/// Slope of `log value` against `log n`, after dropping the smallest
/// `⌊len/4⌋` values of `n` as pre-asymptotic.
pub fn fit_rate(points: &[(u32, f64)]) -> Result<RateFit, ExperimentError> {
    if points.len() < 4 {
        return Err(ExperimentError::DegenerateInput(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(ExperimentError::DegenerateInput("n must be strictly increasing".into()));
    }
    if let Some(&(n, v)) = points.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite())) {
        return Err(ExperimentError::DegenerateInput(format!(
            "value at n = {n} is {v}, expected positive and finite"
        )));
    }
    if points[0].0 == 0 {
        return Err(ExperimentError::DegenerateInput("n must be positive".into()));
    }
    let used = &points[points.len() / 4..];
    let x: Vec<f64> = used.iter().map(|p| f64::from(p.0).ln()).collect();
    let y: Vec<f64> = used.iter().map(|p| p.1.ln()).collect();
    let line = least_squares(&x, &y)?;
    Ok(RateFit {
        slope: line.slope,
        intercept: line.intercept,
        stderr: line.stderr,
        n_used: used.iter().map(|p| p.0).collect(),
        r_squared: line.r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let f = fit_rate(&[(2, 0.25), (4, 1.0 / 16.0), (8, 1.0 / 64.0), (16, 1.0 / 256.0)]).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-14);
        assert_eq!(f.n_used, vec![4, 8, 16]);
        assert!(f.stderr < 1e-12);
    }

    #[test]
    fn constant_series() {
        let f = fit_rate(&[(8, 3.0), (16, 3.0), (32, 3.0), (64, 3.0), (128, 3.0)]).unwrap();
        assert_eq!(f.slope, 0.0);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_rate(&[(1, 1.0), (2, 1.0), (3, 1.0)]).is_err());
        assert!(fit_rate(&[(1, 1.0), (2, 1.0), (2, 1.0), (3, 1.0)]).is_err());
        assert!(fit_rate(&[(1, 1.0), (2, 0.0), (3, 1.0), (4, 1.0)]).is_err());
    }

    #[test]
    fn quadratic_recovers_coefficients() {
        let x: Vec<f64> = (0..8).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 - 2.0 * v + 0.5 * v * v).collect();
        let c = quadratic_fit(&x, &y).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-10 && (c[1] + 2.0).abs() < 1e-10 && (c[2] - 0.5).abs() < 1e-10);
    }
}
