//! Variable-step products: growth with the step ratio for Crank-Nicolson
//! against uniform boundedness for backward Euler.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratsect::hnorm::{product_hnorm, StepSequence};
use ratsect::quad::QuadratureConfig;
use ratsect::scheme::{backward_euler, crank_nicolson};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let theta = std::f64::consts::FRAC_PI_4;
    let cfg = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for j in [0, 2, 4, 6, 8] {
        let ratio = 2f64.powi(j);
        let steps: Vec<f64> = (0..8).map(|_| ratio.powf(rng.random::<f64>())).collect();
        let seq = StepSequence::new(steps)?;
        let cn = product_hnorm(&crank_nicolson(), &seq, theta, &cfg)?.value;
        let be = product_hnorm(&backward_euler(), &seq, theta, &cfg)?.value;
        println!("K1/K0 <= {ratio:6}: cn {cn:8.4}  be {be:.4}");
    }
    Ok(())
}
