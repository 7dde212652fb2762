//! Double-double arithmetic (about 32 significant digits), just enough for
//! extended-precision Horner evaluation of polynomials and their quotient.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        DD { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, o: DD) -> DD {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DD { hi, lo }
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, o: DD) -> DD {
        self + (-o)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, o: DD) -> DD {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, o: DD) -> DD {
        let q1 = self.hi / o.hi;
        let r = self - o * DD::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * DD::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::new(q3)
    }
}

/// Complex number with double-double parts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CDD {
    pub re: DD,
    pub im: DD,
}

impl CDD {
    pub fn from_c64(z: Complex64) -> Self {
        CDD {
            re: DD::new(z.re),
            im: DD::new(z.im),
        }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn norm_sqr(self) -> DD {
        self.re * self.re + self.im * self.im
    }
}

impl Add for CDD {
    type Output = CDD;
    fn add(self, o: CDD) -> CDD {
        CDD {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for CDD {
    type Output = CDD;
    fn sub(self, o: CDD) -> CDD {
        CDD {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for CDD {
    type Output = CDD;
    fn mul(self, o: CDD) -> CDD {
        CDD {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl Div for CDD {
    type Output = CDD;
    fn div(self, o: CDD) -> CDD {
        let d = o.norm_sqr();
        CDD {
            re: (self.re * o.re + self.im * o.im) / d,
            im: (self.im * o.re - self.re * o.im) / d,
        }
    }
}

/// Horner evaluation with double-double accumulation. Coefficients are given
/// as double-double pairs so exact rationals can be carried at ~32 digits.
pub fn horner(coeffs: &[CDD], z: CDD) -> CDD {
    coeffs
        .iter()
        .rev()
        .fold(CDD::default(), |acc, &c| acc * z + c)
}
