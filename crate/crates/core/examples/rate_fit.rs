//! Fitted convergence rates for Crank-Nicolson across smoothness indices.

use ratsect::experiments::{default_n_grid, run_rate_suite, RateMode, RateSuiteConfig};
use ratsect::scheme::crank_nicolson;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let report = run_rate_suite(
        "cn",
        &crank_nicolson(),
        std::f64::consts::FRAC_PI_4,
        &[0.5, 1.0, 1.5, 2.0, 3.0],
        &default_n_grid(),
        RateMode::Hnorm,
        &RateSuiteConfig::default(),
    )?;
    for run in &report.runs {
        let fit = run.fit.as_ref().expect("fitted");
        println!(
            "s={:.1}: slope {:+.3} (expected {:+.3})  {}",
            run.s,
            fit.slope,
            run.expected_slope.unwrap_or(f64::NAN),
            if run.verdict { "ok" } else { "off" }
        );
    }
    Ok(())
}
