//! Double-double arithmetic (about 106 significand bits) built from
//! error-free transformations, and coefficient reconstruction from roots.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
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

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

/// Complex number with double-double parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtendedComplex {
    pub re: DoubleDouble,
    pub im: DoubleDouble,
}

impl ExtendedComplex {
    pub const ZERO: ExtendedComplex = ExtendedComplex {
        re: DoubleDouble::ZERO,
        im: DoubleDouble::ZERO,
    };
    pub const ONE: ExtendedComplex = ExtendedComplex {
        re: DoubleDouble::ONE,
        im: DoubleDouble::ZERO,
    };

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Modulus, rounded to working precision.
    pub fn norm(self) -> f64 {
        let r = self.re * self.re + self.im * self.im;
        r.to_f64().sqrt()
    }
}

impl From<Complex64> for ExtendedComplex {
    fn from(z: Complex64) -> Self {
        Self {
            re: z.re.into(),
            im: z.im.into(),
        }
    }
}

impl Neg for ExtendedComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Add for ExtendedComplex {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        Self {
            re: self.re + b.re,
            im: self.im + b.im,
        }
    }
}

impl Sub for ExtendedComplex {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        Self {
            re: self.re - b.re,
            im: self.im - b.im,
        }
    }
}

impl Mul for ExtendedComplex {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        Self {
            re: self.re * b.re - self.im * b.im,
            im: self.re * b.im + self.im * b.re,
        }
    }
}

fn poly_mul(a: &[ExtendedComplex], b: &[ExtendedComplex]) -> Vec<ExtendedComplex> {
    let mut out = vec![ExtendedComplex::ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j] + *x * *y;
        }
    }
    out
}

/// Monic coefficients (ascending) of `∏(z − rₖ)` in extended precision,
/// multiplied along a balanced pairwise tree.
///
/// Returns `None` if a coefficient overflows.
pub fn coeffs_from_roots_extended(roots: &[Complex64]) -> Option<Vec<ExtendedComplex>> {
    if roots.is_empty() {
        return Some(vec![ExtendedComplex::ONE]);
    }
    let mut level: Vec<Vec<ExtendedComplex>> = roots
        .iter()
        .map(|r| vec![-ExtendedComplex::from(*r), ExtendedComplex::ONE])
        .collect();
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => poly_mul(a, b),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    let out = level.pop().unwrap();
    out.iter().all(|z| z.is_finite()).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_prod_is_exact() {
        let a = 1.0 + f64::EPSILON;
        let p = DoubleDouble::new(a) * DoubleDouble::new(a);
        // (1+e)² = 1 + 2e + e², the e² term lives in lo
        assert_eq!(p.hi, 1.0 + 2.0 * f64::EPSILON);
        assert_eq!(p.lo, f64::EPSILON * f64::EPSILON);
    }

    #[test]
    fn sum_keeps_small_parts() {
        let x = DoubleDouble::new(1.0) + DoubleDouble::new(1e-20);
        assert_eq!(x.hi, 1.0);
        assert_eq!(x.lo, 1e-20);
        let y = x - DoubleDouble::new(1.0);
        assert_eq!(y.to_f64(), 1e-20);
    }

    #[test]
    fn round_trip_is_exact() {
        for v in [0.1, -3.5e200, 7e-300, 1.0 / 3.0] {
            assert_eq!(DoubleDouble::new(v).to_f64(), v);
            let z = Complex64::new(v, -v);
            assert_eq!(ExtendedComplex::from(z).to_complex(), z);
        }
    }
}
