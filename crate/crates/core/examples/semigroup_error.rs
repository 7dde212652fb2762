//! Error of `r(tA/n)^n` against `e^{-tA}` for a non-normal sectorial matrix.

use num_complex::Complex64;
use ratsect::scheme::crank_nicolson;
use ratsect::semigroup::{
    approximation_error_norm, sectoriality_constant, MatrixFixture, ResolventGrid, SectorialMatrix,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let theta = std::f64::consts::FRAC_PI_3;
    let eigenvalues = (0..8)
        .map(|j| {
            let l = Complex64::from_polar(10f64.powi(j - 2), if j % 2 == 0 { 0.7 } else { -0.7 });
            [l.re, l.im]
        })
        .collect();
    let fx = MatrixFixture {
        dim: 8,
        eigenvalues,
        basis: "random_cond:5".into(),
        seed: 11,
    };
    let a = SectorialMatrix::from_fixture(&fx, theta)?;
    let m = sectoriality_constant(&a, theta, &ResolventGrid::default())?;
    println!("cond(V) = {:.3}, M = {:.4}", a.cond_V, m.m);
    let r = crank_nicolson();
    for s in [0.0, 1.0, 2.0] {
        let errs: Vec<String> = [8u32, 32, 128, 512]
            .iter()
            .map(|&n| approximation_error_norm(&a, &r, n, 1.0, s).map(|e| format!("{e:.3e}")))
            .collect::<Result<_, _>>()?;
        println!("s={s}: {}", errs.join("  "));
    }
    Ok(())
}
