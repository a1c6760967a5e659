//! Upper triangular matrices stored as a unitary-plus-rank-one product of two
//! descending sequences of cores.
//!
//! An `n × n` upper triangular `R` is embedded in the `(n+1) × (n+1)` matrix
//!
//! ```text
//!     R̲ = C* (B + α e₀ yᵀ),      R = top-left n × n block of R̲
//! ```
//!
//! where `C = C₀⋯C_{n-1}` and `B = B₀⋯B_{n-1}` are descending sequences. The
//! last row of `R̲` is zero. Only `C`, `B` and `α` are stored; `y` can be
//! recovered from them.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::TriangularError;
use crate::rotation::{
    make_core, turnover, turnover_left_to_right, Core, IndexedCore, UNIT_ROUNDOFF,
};

#[derive(Debug, Clone, PartialEq)]
pub struct FactoredTriangular {
    c: Vec<Core>,
    b: Vec<Core>,
    alpha: Complex64,
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

impl FactoredTriangular {
    /// Factor the triangular matrix with last column `t` and unit diagonal
    /// elsewhere.
    ///
    /// The representation needs a real last entry, so `R = diag(1,…,1,φ)·R'`
    /// with `φ = t_{n-1}/|t_{n-1}|` (or 1 when it is zero); `R'` is returned
    /// together with `φ`.
    pub fn from_spike(t: &[Complex64]) -> Result<(Self, Complex64), TriangularError> {
        let n = t.len();
        if n == 0 {
            return Err(TriangularError::Shape {
                expected: 1,
                found: 0,
            });
        }
        if t.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(TriangularError::Shape {
                expected: n,
                found: n,
            });
        }
        let last = t[n - 1];
        let (phase, last_abs) = if last == ZERO {
            (Complex64::new(1.0, 0.0), 0.0)
        } else {
            let a = last.norm();
            (last / a, a)
        };

        // eliminate z = (t₀, …, t_{n-2}, |t_{n-1}|, -1) from the bottom up
        let mut c = vec![Core::IDENTITY; n];
        let mut r = Complex64::new(-1.0, 0.0);
        for i in (0..n).rev() {
            let x = if i == n - 1 {
                Complex64::new(last_abs, 0.0)
            } else {
                t[i]
            };
            let (g, rr) = make_core(x, r);
            c[i] = g.adjoint();
            r = rr;
        }
        let mut b = c.clone();
        // C_{n-1}·[[0,-1],[1,0]] on the active block; c of C_{n-1} is real here
        let cl = c[n - 1];
        b[n - 1] = Core::new(Complex64::new(-cl.s, 0.0), cl.c.re);
        Ok((Self { c, b, alpha: r }, phase))
    }

    /// Assemble directly from stored parts.
    pub fn from_parts(c: Vec<Core>, b: Vec<Core>, alpha: Complex64) -> Result<Self, TriangularError> {
        if c.len() != b.len() || c.is_empty() {
            return Err(TriangularError::Shape {
                expected: c.len().max(1),
                found: b.len(),
            });
        }
        Ok(Self { c, b, alpha })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn c_cores(&self) -> &[Core] {
        &self.c
    }

    pub fn b_cores(&self) -> &[Core] {
        &self.b
    }

    /// `ρ = e_nᵀ C* e₀ = (-1)ⁿ ∏ s(Cᵢ)`; satisfies `ρ·α = -1`.
    pub fn rho(&self) -> f64 {
        self.c.iter().fold(1.0, |acc, g| -acc * g.s)
    }

    /// `Σ log|s|` over `C` and over `B`.
    pub fn log_sine_products(&self) -> (f64, f64) {
        let f = |v: &[Core]| v.iter().map(|g| g.s.abs().ln()).sum::<f64>();
        (f(&self.c), f(&self.b))
    }

    /// `R·G = Ĝ·R̂` for `G` at index `i ≤ n-2`; returns `Ĝ`, updates `R` in place.
    #[inline]
    pub(crate) fn pass_rtl(&mut self, i: usize, g: Core) -> Core {
        let (gt, b0, b1) = turnover(self.b[i], self.b[i + 1], g);
        self.b[i] = b0;
        self.b[i + 1] = b1;
        let (c0, c1, gh) = turnover_left_to_right(gt.adjoint(), self.c[i], self.c[i + 1]);
        self.c[i] = c0;
        self.c[i + 1] = c1;
        gh.adjoint()
    }

    /// `G·R = R̂·Ĝ` for `G` at index `i ≤ n-2`; returns `Ĝ`, updates `R` in place.
    #[inline]
    pub(crate) fn pass_ltr(&mut self, i: usize, g: Core) -> Core {
        let (gt, c0, c1) = turnover(self.c[i], self.c[i + 1], g.adjoint());
        self.c[i] = c0;
        self.c[i + 1] = c1;
        let (b0, b1, gh) = turnover_left_to_right(gt.adjoint(), self.b[i], self.b[i + 1]);
        self.b[i] = b0;
        self.b[i + 1] = b1;
        gh
    }

    fn check_pass_index(&self, g: &IndexedCore) -> Result<(), TriangularError> {
        let n = self.n();
        if n < 2 || g.index > n - 2 {
            return Err(TriangularError::Index {
                index: g.index,
                size: n,
            });
        }
        Ok(())
    }

    /// Move `g` from the right of `R` to its left: `R·g = ĝ·R̂`.
    pub fn pass_right_to_left(&mut self, g: IndexedCore) -> Result<IndexedCore, TriangularError> {
        self.check_pass_index(&g)?;
        let core = crate::rotation::renormalize(g.core)?;
        Ok(IndexedCore::new(self.pass_rtl(g.index, core), g.index))
    }

    /// Move `g` from the left of `R` to its right: `g·R = R̂·ĝ`.
    pub fn pass_left_to_right(&mut self, g: IndexedCore) -> Result<IndexedCore, TriangularError> {
        self.check_pass_index(&g)?;
        let core = crate::rotation::renormalize(g.core)?;
        Ok(IndexedCore::new(self.pass_ltr(g.index, core), g.index))
    }

    /// `α·y` (length `n+1`) in O(n) from the zero last row of `R̲`.
    pub fn recover_y(&self) -> Result<Vec<Complex64>, TriangularError> {
        let n = self.n();
        let rho = self.rho();
        if rho.abs() < UNIT_ROUNDOFF * n as f64 {
            return Err(TriangularError::SingularSpike);
        }
        // v = C e_n, then w = v* is the last row of C*
        let mut v = vec![ZERO; n + 1];
        v[n] = Complex64::new(1.0, 0.0);
        for i in (0..n).rev() {
            let (x, y) = self.c[i].apply(v[i], v[i + 1]);
            v[i] = x;
            v[i + 1] = y;
        }
        // w·B, applying B₀ first from the right
        let mut w: Vec<Complex64> = v.iter().map(|z| z.conj()).collect();
        for (i, g) in self.b.iter().enumerate() {
            let (x, y) = (w[i], w[i + 1]);
            w[i] = x * g.c + y * g.s;
            w[i + 1] = y * g.c.conj() - x * g.s;
        }
        Ok(w.into_iter().map(|z| -z / rho).collect())
    }

    /// Diagonal entry `R_jj = s(B_j)/s(C_j)`; always real.
    #[inline]
    pub fn diagonal(&self, j: usize) -> f64 {
        self.b[j].s / self.c[j].s
    }

    /// Entries `R(j-m..=j, j)`, top to bottom, in O(m).
    pub fn column_tail(&self, j: usize, m: usize) -> Vec<Complex64> {
        let lo = j - m.min(j);
        let mut out = vec![ZERO; j - lo + 1];
        self.column_tail_into(j, lo, &mut out);
        out
    }

    /// Back-substitution on rows `≥ 1` of `C·R̲ = B + α e₀ yᵀ`.
    pub(crate) fn column_tail_into(&self, j: usize, lo: usize, out: &mut [Complex64]) {
        let bj = self.b[j];
        let mut q = bj.c;
        let mut bval = Complex64::new(bj.s, 0.0);
        let mut p = ZERO;
        let mut i = j;
        loop {
            let cc = self.c[i];
            let r = (bval - cc.c.conj() * p) / cc.s;
            out[i - lo] = r;
            p = cc.c * r - p * cc.s;
            if i == lo {
                break;
            }
            let bb = self.b[i - 1];
            bval = bb.c.conj() * q;
            q = -(q * bb.s);
            i -= 1;
        }
    }

    /// `R(k..k+size, k..k+size)` for `size` 1 or 2.
    pub fn diagonal_block(&self, k: usize, size: usize) -> Result<DMatrix<Complex64>, TriangularError> {
        let n = self.n();
        if !(size == 1 || size == 2) || k + size > n {
            return Err(TriangularError::Index {
                index: k + size.saturating_sub(1),
                size: n,
            });
        }
        let mut m = DMatrix::zeros(size, size);
        m[(0, 0)] = Complex64::new(self.diagonal(k), 0.0);
        if size == 2 {
            let col = self.column_tail(k + 1, 1);
            m[(0, 1)] = col[0];
            m[(1, 1)] = Complex64::new(self.diagonal(k + 1), 0.0);
        }
        Ok(m)
    }

    /// Dense `n × n` triangular part, column by column, in O(n²).
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        let mut col = vec![ZERO; n];
        for j in 0..n {
            self.column_tail_into(j, 0, &mut col[..=j]);
            for i in 0..=j {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    /// Dense `(n+1) × (n+1)` product `C*(B + α e₀ yᵀ)` with `y` recovered.
    pub fn to_dense_extended(&self) -> Result<DMatrix<Complex64>, TriangularError> {
        let n = self.n();
        let mut m = DMatrix::<Complex64>::identity(n + 1, n + 1);
        for (i, g) in self.b.iter().enumerate().rev() {
            apply_rows(&mut m, i, g, false);
        }
        let ay = self.recover_y()?;
        for (j, v) in ay.iter().enumerate() {
            m[(0, j)] += v;
        }
        for (i, g) in self.c.iter().enumerate() {
            apply_rows(&mut m, i, g, true);
        }
        Ok(m)
    }
}

/// Left-multiply rows `i, i+1` of `m` by the core (or its adjoint).
pub(crate) fn apply_rows(m: &mut DMatrix<Complex64>, i: usize, g: &Core, adjoint: bool) {
    for j in 0..m.ncols() {
        let (x, y) = (m[(i, j)], m[(i + 1, j)]);
        let (u, v) = if adjoint {
            g.apply_adjoint(x, y)
        } else {
            g.apply(x, y)
        };
        m[(i, j)] = u;
        m[(i + 1, j)] = v;
    }
}

/// Right-multiply columns `i, i+1` of `m` by the core (or its adjoint).
pub(crate) fn apply_cols(m: &mut DMatrix<Complex64>, i: usize, g: &Core, adjoint: bool) {
    let h = if adjoint { g.adjoint() } else { *g };
    for r in 0..m.nrows() {
        let (x, y) = (m[(r, i)], m[(r, i + 1)]);
        m[(r, i)] = x * h.c + y * h.s;
        m[(r, i + 1)] = y * h.c.conj() - x * h.s;
    }
}
