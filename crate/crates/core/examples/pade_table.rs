//! Diagonal Padé approximants of `e^{-z}` in exact arithmetic.

use ratsect::exact::format_exact;
use ratsect::ratfun::{order_condition_holds, pade_exp};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for k in 1..=4 {
        let r = pade_exp(k)?;
        let inf = r.expansion_at_infinity()?;
        let den: Vec<String> = r.den().coeffs().iter().map(format_exact).collect();
        println!(
            "k={k}: den = [{}], order {} holds: {}, r(inf) = {}, a = {}",
            den.join(", "),
            2 * k,
            order_condition_holds(r.num(), r.den(), 2 * k),
            format_exact(&inf.value_at_inf),
            format_exact(&inf.a),
        );
    }
    Ok(())
}
