//! Seminorm of the weighted error symbol for Crank-Nicolson as `n` grows.

use ratsect::hnorm::delta_hnorm_sweep;
use ratsect::quad::QuadratureConfig;
use ratsect::scheme::crank_nicolson;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ns: Vec<u32> = (3..=9).map(|k| 1 << k).collect();
    let rows = delta_hnorm_sweep(&crank_nicolson(), std::f64::consts::FRAC_PI_4, 1.0, &ns, &QuadratureConfig::default())?;
    let mut prev: Option<f64> = None;
    for row in rows {
        let (n, res) = (row.n, row.result);
        let ratio = prev.map(|p| format!("{:.3}", p / res.value)).unwrap_or_default();
        println!("n={n:4}  value={:.6e}  err={:.1e}  ratio={ratio}", res.value, res.abs_error_estimate);
        prev = Some(res.value);
    }
    Ok(())
}
