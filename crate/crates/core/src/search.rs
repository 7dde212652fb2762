//! Sampling grids and one-dimensional maximisation.

/// `n` points log-spaced over `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// `n` points evenly spaced over `[lo, hi]`, endpoints included.
pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximum of `f` over the sample points `xs`, refined by golden-section
/// search between the neighbours of the best sample. NaN samples are ignored.
pub fn refine_max_on_grid<F: Fn(f64) -> f64>(f: F, xs: &[f64]) -> (f64, f64) {
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if v > &vals[best] || vals[best].is_nan() {
            best = i;
        }
    }
    let (mut x, mut v) = (xs[best], vals[best]);
    let lo = xs[best.saturating_sub(1)];
    let hi = xs[(best + 1).min(xs.len() - 1)];
    if hi > lo {
        let (xr, vr) = golden_max(&f, lo, hi, 1e-12);
        if vr > v {
            x = xr;
            v = vr;
        }
    }
    (x, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_hit_endpoints() {
        let g = log_grid(1e-6, 1e6, 13);
        assert_eq!(g[0], 1e-6);
        assert_eq!(g[12], 1e6);
        assert!((g[6] - 1.0).abs() < 1e-12);
        assert_eq!(lin_grid(0.0, 1.0, 5)[2], 0.5);
    }

    #[test]
    fn golden_finds_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(v.abs() < 1e-12);
        let xs = lin_grid(0.0, 3.0, 7);
        let (x, _) = refine_max_on_grid(|x: f64| x.sin(), &xs);
        assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    }
}
