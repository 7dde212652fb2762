//! Classify a few one-step schemes on a sector.
//!
//! ```text
//! cargo run --example classify_scheme [scheme] [psi]
//! ```

use ratsect::exact::format_exact;
use ratsect::scheme::parse_scheme;
use ratsect::stability::{certify_sector_stability, classify, leading_error_coefficient, GridSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let names: Vec<String> = match args.next() {
        Some(s) => vec![s],
        None => ["be", "cn", "pade:2", "paper-pi6"].map(String::from).to_vec(),
    };
    let psi: f64 = args.next().map(|p| p.parse()).transpose()?.unwrap_or(std::f64::consts::FRAC_PI_6);
    for name in names {
        let r = parse_scheme(&name)?;
        let cert = certify_sector_stability(&r, psi, &GridSpec::default())?;
        let class = classify(&r, psi)?;
        println!(
            "{name:>10}: q={} m={} r(inf)={} a={} taylor={} stable={} max|r|={:.6}",
            class.q,
            class.inf.m,
            format_exact(&class.inf.value_at_inf),
            format_exact(&class.inf.a),
            format_exact(&leading_error_coefficient(&r)?),
            cert.is_stable,
            cert.max_boundary_modulus,
        );
    }
    Ok(())
}
