//! Polynomial roots from companion-matrix eigenvalues, polished by Newton.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::poly::Polynomial;

/// A root together with its relative residual `|p(z)| / sum |p_k||z|^k`.
#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub z: Complex64,
    pub residual: f64,
}

/// All roots of `p` (with multiplicity). Empty for constants.
pub fn roots(p: &Polynomial) -> Vec<Root> {
    let deg = match p.degree() {
        Some(d) if d > 0 => d,
        _ => return Vec::new(),
    };
    // roots at zero are split off exactly
    let v = p.valuation().unwrap_or(0);
    let c: Vec<Complex64> = p.approx_coeffs()[v..].to_vec();
    let d = deg - v;
    let mut out: Vec<Root> = (0..v)
        .map(|_| Root {
            z: Complex64::new(0.0, 0.0),
            residual: 0.0,
        })
        .collect();
    if d == 0 {
        return out;
    }
    let lead = c[d];
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -c[i] / lead;
    }
    let eig = nalgebra::linalg::Schur::new(m)
        .eigenvalues()
        .expect("complex Schur form is triangular");
    for z0 in eig.iter() {
        let z = polish(p, *z0);
        out.push(Root {
            z,
            residual: relative_residual(p, z),
        });
    }
    out
}

fn relative_residual(p: &Polynomial, z: Complex64) -> f64 {
    let scale = p.eval_abs_scale(z);
    if scale == 0.0 {
        0.0
    } else {
        p.eval(z).norm() / scale
    }
}

fn polish(p: &Polynomial, mut z: Complex64) -> Complex64 {
    let mut best = (relative_residual(p, z), z);
    for _ in 0..8 {
        let (v, dv) = p.eval_with_derivative(z);
        if dv.norm() == 0.0 || !dv.is_finite() {
            break;
        }
        let next = z - v / dv;
        if !next.is_finite() {
            break;
        }
        z = next;
        let r = relative_residual(p, z);
        if r < best.0 {
            best = (r, z);
        }
        if r <= f64::EPSILON {
            break;
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_pole_set() {
        // 1 + z + 4 z^3 has roots -1/2 and e^{±i phi}/sqrt 2, phi = arctan sqrt 7
        let p = Polynomial::from_ratios(&[(1, 1), (1, 1), (0, 1), (4, 1)]);
        let mut rs: Vec<Complex64> = roots(&p).iter().map(|r| r.z).collect();
        rs.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        let phi = 7f64.sqrt().atan();
        let w = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, phi);
        assert!((rs[0] - w.conj()).norm() < 1e-14);
        assert!((rs[1] - Complex64::new(-0.5, 0.0)).norm() < 1e-14);
        assert!((rs[2] - w).norm() < 1e-14);
    }

    #[test]
    fn zero_roots_and_constants() {
        let p = Polynomial::from_ratios(&[(0, 1), (0, 1), (1, 1), (1, 1)]);
        let rs = roots(&p);
        assert_eq!(rs.len(), 3);
        assert_eq!(rs.iter().filter(|r| r.z.norm() == 0.0).count(), 2);
        assert!(roots(&Polynomial::one()).is_empty());
    }
}
