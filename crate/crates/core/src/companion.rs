//! Polynomials, preprocessing, and the factored companion matrix and pencil.
//!
//! Coefficients are stored in ascending order `a₀, a₁, …, a_n`.
//!
//! The companion matrix is kept as `A = Q·D·R`: `Q` is a descending sequence of
//! `n-1` cores, `D` a unitary diagonal, and `R` a [`FactoredTriangular`]. The
//! pencil adds a second triangular factor `W`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{InputError, SolveError};
use crate::rotation::Core;
use crate::triangular::{apply_rows, FactoredTriangular};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
    zero_roots: usize,
    infinite_roots: usize,
    applied_scale: Complex64,
}

/// How pencil coefficients are scaled before factoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scaling {
    /// Divide by the leading coefficient.
    Monic,
    /// Divide by the Euclidean norm of the coefficient vector.
    #[default]
    Norm,
    /// Use the coefficients as given.
    None,
}

impl std::str::FromStr for Scaling {
    type Err = InputError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "monic" => Ok(Scaling::Monic),
            "norm" => Ok(Scaling::Norm),
            "none" => Ok(Scaling::None),
            other => Err(InputError::Parse(format!("unknown scaling '{other}'"))),
        }
    }
}

pub fn norm2(v: &[Complex64]) -> f64 {
    let m = v.iter().fold(0.0f64, |a, z| a.max(z.re.abs()).max(z.im.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * v.iter().map(|z| (z / m).norm_sqr()).sum::<f64>().sqrt()
}

/// Strip exact zeros at both ends of the coefficient vector.
///
/// Zero leading coefficients lower the degree (infinite roots of the pencil);
/// zero constant coefficients are counted as roots at zero. A degree zero
/// remainder is allowed when at least one zero root was stripped.
pub fn preprocess(raw: &[Complex64]) -> Result<Polynomial, InputError> {
    if raw.is_empty() {
        return Err(InputError::Empty);
    }
    if let Some(index) = raw.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(InputError::NonFinite { index });
    }
    let top = match raw.iter().rposition(|z| *z != ZERO) {
        Some(k) => k,
        None => return Err(InputError::AllZero),
    };
    let bottom = raw.iter().position(|z| *z != ZERO).unwrap_or(0);
    if top == 0 {
        return Err(InputError::Constant);
    }
    Ok(Polynomial {
        coeffs: raw[bottom..=top].to_vec(),
        zero_roots: bottom,
        infinite_roots: raw.len() - 1 - top,
        applied_scale: ONE,
    })
}

impl Polynomial {
    /// Wrap coefficients that already satisfy `a₀ ≠ 0`, `a_n ≠ 0`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, InputError> {
        let p = preprocess(&coeffs)?;
        if p.zero_roots != 0 || p.infinite_roots != 0 {
            return Err(InputError::Parse(
                "coefficients have zero roots or a zero leading term".into(),
            ));
        }
        Ok(p)
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self, InputError> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn zero_roots(&self) -> usize {
        self.zero_roots
    }

    pub fn infinite_roots(&self) -> usize {
        self.infinite_roots
    }

    /// Product of all factors the coefficients were divided by.
    pub fn applied_scale(&self) -> Complex64 {
        self.applied_scale
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.coeffs)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.degree()]
    }

    pub fn scaled(&self, divisor: Complex64) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|z| z / divisor).collect(),
            zero_roots: self.zero_roots,
            infinite_roots: self.infinite_roots,
            applied_scale: self.applied_scale * divisor,
        }
    }

    pub fn monic(&self) -> Polynomial {
        self.scaled(self.leading())
    }

    pub fn with_scaling(&self, scaling: Scaling) -> Polynomial {
        match scaling {
            Scaling::Monic => self.monic(),
            Scaling::Norm => self.scaled(Complex64::new(self.norm(), 0.0)),
            Scaling::None => self.clone(),
        }
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, a| acc * z + a)
    }
}

/// Factored companion matrix `A = Q·D·R`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionQr {
    pub(crate) q: Vec<Core>,
    pub(crate) d: Vec<Complex64>,
    pub(crate) r: FactoredTriangular,
    /// Every eigenvalue lies in the disk of this radius.
    pub(crate) root_bound: f64,
}

/// Fujiwara's bound `2·max_k |a_{n-k}/a_n|^{1/k}` (with `a₀/2` for `k = n`) on
/// the moduli of all roots. Infinite if the quotients overflow.
pub fn root_bound(a: &[Complex64]) -> f64 {
    let n = a.len() - 1;
    let lead = a[n].norm().ln();
    let m = (1..=n)
        .map(|k| {
            let mut x = a[n - k].norm();
            if k == n {
                x /= 2.0;
            }
            (x.ln() - lead) / k as f64
        })
        .fold(f64::NEG_INFINITY, f64::max);
    2.0 * m.exp()
}

/// Factored companion pencil `(V, W)` with `V = Q·D·R`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionPencil {
    pub(crate) v: CompanionQr,
    pub(crate) w: FactoredTriangular,
}

impl CompanionQr {
    /// `Q·D·R` with the spike `-(a₁, …, a_{n-1}, a₀)` taken as is.
    fn from_coeffs(a: &[Complex64]) -> Result<Self, SolveError> {
        let n = a.len() - 1;
        let mut t: Vec<Complex64> = a[1..n].iter().map(|z| -z).collect();
        t.push(-a[0]);
        let (r, phase) = FactoredTriangular::from_spike(&t)?;
        // product of the quarter turns is the cyclic shift times diag(1,…,1,±1)
        let sigma = if n % 2 == 1 { 1.0 } else { -1.0 };
        let mut d = vec![ONE; n];
        d[n - 1] = phase * sigma;
        Ok(Self {
            q: vec![Core::new(ZERO, 1.0); n - 1],
            d,
            r,
            root_bound: root_bound(a),
        })
    }

    /// Companion matrix of `p / a_n`.
    pub fn build(p: &Polynomial) -> Result<Self, SolveError> {
        if p.degree() == 0 {
            return Err(InputError::Constant.into());
        }
        Self::from_coeffs(p.monic().coeffs())
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn q_cores(&self) -> &[Core] {
        &self.q
    }

    pub fn diagonal_phases(&self) -> &[Complex64] {
        &self.d
    }

    pub fn triangular(&self) -> &FactoredTriangular {
        &self.r
    }

    /// Radius of a disk holding every eigenvalue.
    pub fn root_bound(&self) -> f64 {
        self.root_bound
    }

    /// Pull a shift outside the eigenvalue disk back onto its boundary.
    pub(crate) fn clamp_shift(&self, mu: Complex64) -> Complex64 {
        let m = mu.norm();
        if m > self.root_bound {
            mu * (self.root_bound / m)
        } else {
            mu
        }
    }

    /// Dense `Q·D·R` in O(n²).
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = self.r.to_dense();
        for (i, di) in self.d.iter().enumerate() {
            for v in m.row_mut(i).iter_mut() {
                *v *= di;
            }
        }
        for (i, g) in self.q.iter().enumerate().rev() {
            apply_rows(&mut m, i, g, false);
        }
        m
    }
}

impl CompanionPencil {
    /// Pencil `V - λW` with `V` carrying `-(a₀, …, a_{n-1})` and
    /// `W = diag(1, …, 1, a_n)`.
    ///
    /// Coefficients are rotated by `conj(a_n)/|a_n|` after scaling so the
    /// leading coefficient is real and positive; this does not move roots.
    pub fn build(p: &Polynomial, scaling: Scaling) -> Result<Self, SolveError> {
        if p.degree() == 0 {
            return Err(InputError::Constant.into());
        }
        let scaled = p.with_scaling(scaling);
        let lead = scaled.leading();
        let rotated = scaled.scaled(lead / lead.norm());
        let a = rotated.coeffs();
        let n = rotated.degree();
        let v = CompanionQr::from_coeffs(a)?;
        let mut t = vec![ZERO; n];
        t[n - 1] = Complex64::new(a[n].re, 0.0);
        let (w, _) = FactoredTriangular::from_spike(&t)?;
        Ok(Self { v, w })
    }

    pub fn n(&self) -> usize {
        self.v.n()
    }

    pub fn v(&self) -> &CompanionQr {
        &self.v
    }

    pub fn w(&self) -> &FactoredTriangular {
        &self.w
    }

    pub fn to_dense(&self) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        (self.v.to_dense(), self.w.to_dense())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotation::UNIT_ROUNDOFF as U;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| cx(x, 0.0)).collect()
    }

    // oracle: companion of p/a_n assembled entry by entry
    fn companion_dense(a: &[Complex64]) -> DMatrix<Complex64> {
        let n = a.len() - 1;
        let mut m = DMatrix::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = ONE;
        }
        for i in 0..n {
            m[(i, n - 1)] = -a[i] / a[n];
        }
        m
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    #[test]
    fn preprocess_strips_zero_roots() {
        let p = preprocess(&re(&[0.0, 0.0, 1.0, 1.0])).unwrap();
        assert_eq!(p.zero_roots(), 2);
        assert_eq!(p.coeffs(), &re(&[1.0, 1.0])[..]);
    }

    #[test]
    fn preprocess_keeps_clean_input() {
        let p = preprocess(&re(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(p.coeffs(), &re(&[1.0, 2.0, 3.0])[..]);
        assert_eq!((p.zero_roots(), p.infinite_roots()), (0, 0));
    }

    #[test]
    fn preprocess_monomial_and_errors() {
        let p = preprocess(&re(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(p.zero_roots(), 1);
        assert_eq!(p.infinite_roots(), 1);
        assert_eq!(p.degree(), 0);
        assert_eq!(preprocess(&re(&[0.0, 0.0])), Err(InputError::AllZero));
        assert_eq!(preprocess(&re(&[3.0, 0.0])), Err(InputError::Constant));
        assert_eq!(preprocess(&[]), Err(InputError::Empty));
        assert!(matches!(
            preprocess(&[ONE, cx(f64::NAN, 0.0)]),
            Err(InputError::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn z2_minus_1_is_the_flip() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let a = CompanionQr::build(&p).unwrap().to_dense();
        let want = DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        assert!(max_abs(&(a - want)) <= 100.0 * U * 2f64.sqrt());
    }

    #[test]
    fn zn_minus_1_is_the_cyclic_shift() {
        for n in [3, 4, 9] {
            let mut c = vec![0.0; n + 1];
            c[0] = -1.0;
            c[n] = 1.0;
            let p = Polynomial::from_real(&c).unwrap();
            let a = CompanionQr::build(&p).unwrap().to_dense();
            let mut want = DMatrix::zeros(n, n);
            for i in 0..n {
                want[((i + 1) % n, i)] = ONE;
            }
            assert!(max_abs(&(a - want)) <= 100.0 * U * 2f64.sqrt(), "n={n}");
        }
    }

    #[test]
    fn cubic_instance() {
        let p = Polynomial::from_real(&[4.0, 3.0, 2.0, 1.0]).unwrap();
        let st = CompanionQr::build(&p).unwrap();
        let a = st.to_dense();
        let want = DMatrix::from_row_slice(
            3,
            3,
            &re(&[0.0, 0.0, -4.0, 1.0, 0.0, -3.0, 0.0, 1.0, -2.0]),
        );
        let na = 30f64.sqrt();
        assert!(max_abs(&(a - want)) <= 100.0 * U * na);
        assert!((st.triangular().alpha().norm() - na).abs() <= 30.0 * U * na);
    }

    #[test]
    fn random_complex_companions() {
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        };
        for n in [1usize, 2, 5, 16, 64] {
            let a: Vec<Complex64> = (0..=n).map(|_| cx(next(), next())).collect();
            let p = Polynomial::new(a.clone()).unwrap();
            let st = CompanionQr::build(&p).unwrap();
            let oracle = companion_dense(&a);
            let na = p.monic().norm();
            assert!(max_abs(&(st.to_dense() - oracle)) <= 100.0 * U * na, "n={n}");
            assert!((st.triangular().alpha().norm() - na).abs() <= 10.0 * n as f64 * U * na);
        }
    }

    #[test]
    fn pencil_instance() {
        let p = Polynomial::from_real(&[7.0, 5.0, 3.0, 2.0]).unwrap();
        let pen = CompanionPencil::build(&p, Scaling::None).unwrap();
        let (v, w) = pen.to_dense();
        let tol = 100.0 * U * p.norm();
        let wantv = DMatrix::from_row_slice(
            3,
            3,
            &re(&[0.0, 0.0, -7.0, 1.0, 0.0, -5.0, 0.0, 1.0, -3.0]),
        );
        let wantw = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(re(&[1.0, 1.0, 2.0])));
        assert!(max_abs(&(v - wantv)) <= tol);
        assert!(max_abs(&(w - wantw)) <= tol);
    }

    #[test]
    fn monic_pencil_has_identity_w() {
        let p = Polynomial::new(vec![cx(1.0, 2.0), cx(-3.0, 0.5), ONE]).unwrap();
        let pen = CompanionPencil::build(&p, Scaling::None).unwrap();
        let (v, w) = pen.to_dense();
        assert!(max_abs(&(w - DMatrix::identity(2, 2))) <= 100.0 * U);
        let a = CompanionQr::build(&p).unwrap().to_dense();
        assert!(max_abs(&(v - a)) <= 100.0 * U * p.norm());
    }

    #[test]
    fn norm_scaling_has_unit_norm() {
        let p = Polynomial::new(vec![cx(3.0, -1.0), cx(1e5, 2.0), cx(0.0, 7.0)]).unwrap();
        let s = p.with_scaling(Scaling::Norm);
        assert!((s.norm() - 1.0).abs() <= 4.0 * U);
    }

    #[test]
    fn pencil_vanishes_at_roots() {
        // roots 1, 2, -3i of 5(z-1)(z-2)(z+3i)
        let roots = [ONE, cx(2.0, 0.0), cx(0.0, -3.0)];
        let mut a = vec![cx(5.0, 0.0)];
        for r in roots {
            let mut b = vec![ZERO; a.len() + 1];
            for (k, c) in a.iter().enumerate() {
                b[k + 1] += c;
                b[k] -= c * r;
            }
            a = b;
        }
        let p = Polynomial::new(a).unwrap();
        for scaling in [Scaling::Norm, Scaling::None, Scaling::Monic] {
            let pen = CompanionPencil::build(&p, scaling).unwrap();
            let (v, w) = pen.to_dense();
            for r in roots {
                let m = &v - &w * r;
                let sv = m.svd(false, false).singular_values;
                let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
                let smax = sv.iter().cloned().fold(0.0, f64::max);
                assert!(smin <= 1e-13 * smax, "{scaling:?} {r}");
            }
        }
    }

    #[test]
    fn root_bound_encloses_roots() {
        // (z-3)(z+2) = z² - z - 6: 2·max(1, √(6/2)) ≈ 3.46 ≥ 3
        let b = root_bound(&re(&[-6.0, -1.0, 1.0]));
        assert!((b - 2.0 * 3f64.sqrt()).abs() <= 1e-14);
        // z^n - 1 gives 2·(1/2)^{1/n}
        let b = root_bound(&re(&[-1.0, 0.0, 0.0, 0.0, 1.0]));
        assert!((b - 2.0 * 0.5f64.powf(0.25)).abs() <= 1e-14);
        let mut rng = crate::rng::SplitMix64::new(9);
        for _ in 0..50 {
            let a: Vec<Complex64> = (0..9).map(|_| cx(rng.next_f64() - 0.5, rng.next_f64() - 0.5) * 1e3f64.powf(rng.next_f64())).collect();
            let p = Polynomial::new(a.clone()).unwrap();
            let b = root_bound(&a);
            for z in crate::dense::dense_roots(&p, 0).unwrap() {
                assert!(z.norm() <= b * (1.0 + 1e-12));
            }
        }
    }
}
