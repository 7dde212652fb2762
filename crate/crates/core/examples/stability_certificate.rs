//! Sector stability certificates and the constants derived from them.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

use ratsect::scheme::parse_scheme;
use ratsect::stability::{certify_sector_stability, derivative_bound_constant, kappa_sup, GridSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (name, psi) in [("be", FRAC_PI_4), ("cn", FRAC_PI_4), ("paper-pi6", FRAC_PI_6), ("paper-pi6", 1.2)] {
        let r = parse_scheme(name)?;
        let cert = certify_sector_stability(&r, psi, &GridSpec::default())?;
        print!("{name} on psi={psi:.4}: stable={}", cert.is_stable);
        if cert.is_stable {
            print!(" c_r={:.4}", derivative_bound_constant(&r, psi)?);
            if let Ok(k) = kappa_sup(&r, psi) {
                print!(" kappa={k:.6}");
            }
        } else {
            print!(" poles in sector: {}", cert.poles_in_closed_sector.len());
        }
        println!();
    }
    Ok(())
}
