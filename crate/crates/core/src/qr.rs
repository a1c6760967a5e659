//! Single-shift core-chasing QR on the factored companion matrix `A = Q·D·R`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::companion::{CompanionQr, Polynomial};
use crate::error::{RotationError, SolveError};
use crate::rng::SplitMix64;
use crate::rotation::{fuse, make_core, turnover, Core, CORRUPTION_TOLERANCE, UNIT_ROUNDOFF};
use crate::triangular::apply_cols;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Sweeps allowed without a deflation before giving up.
    pub max_sweeps: usize,
    /// Stagnant sweeps before an exceptional shift.
    pub exceptional_after: usize,
    /// Sines at or below this are set to zero.
    pub deflation_tol: f64,
    /// Accumulate the unitary transformations densely (O(n²) memory, O(n³) work).
    pub accumulate: bool,
    /// Seed for the exceptional shift phases.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 30,
            exceptional_after: 15,
            deflation_tol: UNIT_ROUNDOFF,
            accumulate: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub sweeps: usize,
    pub turnovers: usize,
    pub exceptional_shifts: usize,
    /// Relative change of `∏ s(C)` over the solve.
    pub sine_drift_c: f64,
    /// Relative change of `∏ s(B)` over the solve.
    pub sine_drift_b: f64,
    /// `‖U·Â·U* − A‖_F`, when accumulation was on.
    pub matrix_backward_error: Option<f64>,
    /// `‖U·Ŵ·Z* − W‖_F` for pencils, when accumulation was on.
    pub w_backward_error: Option<f64>,
    /// `‖A‖_F` of the matrix the backward error refers to.
    pub matrix_norm: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Eigenvalues in deflation order, followed by stripped zero roots.
    pub roots: Vec<Complex64>,
    pub diagnostics: Diagnostics,
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
///
/// Ties go to the smaller real part, then to the smaller imaginary part.
pub fn wilkinson_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let (l1, l2) = (mid + disc, mid - disc);
    let (e1, e2) = ((l1 - d).norm(), (l2 - d).norm());
    if e1 < e2 {
        l1
    } else if e2 < e1 {
        l2
    } else if (l1.re, l1.im) <= (l2.re, l2.im) {
        l1
    } else {
        l2
    }
}

impl CompanionQr {
    /// Multiply the phase into row `row` and push it down through the cores
    /// until it reaches an identity core or the last row, then into `D`.
    pub(crate) fn push_phase(&mut self, row: usize, phase: Complex64) {
        let n = self.n();
        let mut k = row;
        while k + 1 < n && !self.q[k].is_identity() {
            self.q[k] = self.q[k].through_diagonal(phase, Complex64::new(1.0, 0.0));
            k += 1;
        }
        self.d[k] *= phase;
    }

    /// Zero every sine in `lo..hi` at or below `tol`; returns how many were set.
    pub fn detect_deflations(&mut self, lo: usize, hi: usize, tol: f64) -> usize {
        let mut count = 0;
        for i in lo..hi.min(self.q.len()) {
            let g = self.q[i];
            if g.s != 0.0 && g.s.abs() <= tol || (g.s == 0.0 && !g.is_identity()) {
                let c = if g.c == ZERO {
                    Complex64::new(1.0, 0.0)
                } else {
                    g.c / g.c.norm()
                };
                self.q[i] = Core::IDENTITY;
                self.d[i] *= c;
                self.push_phase(i + 1, c.conj());
                count += 1;
            }
        }
        count
    }

    /// `A(hi-1..=hi, hi-1..=hi)` restricted to the active block `[lo, hi]`.
    pub fn trailing_block(&self, lo: usize, hi: usize) -> [[Complex64; 2]; 2] {
        let k0 = if hi >= lo + 2 { hi - 2 } else { lo };
        let (s2, c2) = if hi >= lo + 2 {
            (self.q[hi - 2].s, self.q[hi - 2].c.conj())
        } else {
            (0.0, Complex64::new(1.0, 0.0))
        };
        let g = self.q[hi - 1];
        // rows hi-1 and hi of Q over columns k0..=hi
        let mut qrows = [[ZERO; 3]; 2];
        let off = hi - k0;
        if off == 2 {
            qrows[0][0] = Complex64::new(s2, 0.0);
        }
        qrows[0][off - 1] = c2 * g.c;
        qrows[0][off] = -(c2 * g.s);
        qrows[1][off - 1] = Complex64::new(g.s, 0.0);
        qrows[1][off] = g.c.conj();

        let col1 = self.r.column_tail(hi - 1, hi - 1 - k0);
        let col2 = self.r.column_tail(hi, hi - k0);
        let mut out = [[ZERO; 2]; 2];
        for (r, qrow) in qrows.iter().enumerate() {
            for i in 0..=off {
                let di = self.d[k0 + i];
                let r1 = if i < off { col1[i] } else { ZERO };
                out[r][0] += qrow[i] * di * r1;
                out[r][1] += qrow[i] * di * col2[i];
            }
        }
        out
    }

    pub fn wilkinson_shift(&self, lo: usize, hi: usize) -> Complex64 {
        let m = self.trailing_block(lo, hi);
        wilkinson_2x2(m[0][0], m[0][1], m[1][0], m[1][1])
    }

    /// One implicit single-shift iteration on the block `[lo, hi]`.
    ///
    /// Returns the number of turnovers performed, `3(hi - lo) - 1`.
    pub fn sweep(&mut self, lo: usize, hi: usize, mu: Complex64, mut acc: Option<&mut DMatrix<Complex64>>) -> usize {
        let rll = self.r.diagonal(lo);
        let ql = self.q[lo];
        let dl = self.d[lo];
        let (u1, _) = make_core(ql.c * dl * rll - mu, dl * rll * ql.s);

        let f = fuse(u1.adjoint(), ql);
        self.q[lo] = f.core;
        self.d[lo] *= f.phase;
        self.push_phase(lo + 1, f.phase.conj());
        if let Some(u) = acc.as_deref_mut() {
            apply_cols(u, lo, &u1, false);
        }

        let mut g = u1;
        let mut turnovers = 0;
        for k in lo..hi - 1 {
            let x = self.r.pass_rtl(k, g);
            let x = x.through_diagonal(self.d[k], self.d[k + 1]);
            self.d.swap(k, k + 1);
            let (next, q0, q1) = turnover(self.q[k], self.q[k + 1], x);
            self.q[k] = q0;
            self.q[k + 1] = q1;
            turnovers += 3;
            g = next;
            if let Some(u) = acc.as_deref_mut() {
                apply_cols(u, k + 1, &g, false);
            }
        }
        let k = hi - 1;
        let x = self.r.pass_rtl(k, g);
        let x = x.through_diagonal(self.d[k], self.d[k + 1]);
        self.d.swap(k, k + 1);
        let f = fuse(self.q[k], x);
        self.q[k] = f.core;
        self.d[k] *= f.phase;
        self.d[k + 1] *= f.phase.conj();
        turnovers + 2
    }

    /// Eigenvalue at a deflated position: `D_k·R_kk`.
    pub fn eigenvalue(&self, k: usize) -> Complex64 {
        self.d[k] * self.r.diagonal(k)
    }

    fn check_active(&self, lo: usize, hi: usize) -> Result<(), SolveError> {
        for g in &self.q[lo..hi] {
            let w = g.unitarity_defect();
            if !(w.abs() <= CORRUPTION_TOLERANCE) {
                return Err(RotationError::NotUnitary { defect: w }.into());
            }
        }
        Ok(())
    }

    /// Run shifted sweeps until every core is deflated.
    ///
    /// Returns eigenvalues in deflation order (bottom up per block).
    pub fn iterate(
        &mut self,
        opts: &SolveOptions,
        diag: &mut Diagnostics,
        mut acc: Option<&mut DMatrix<Complex64>>,
    ) -> Result<(), SolveError> {
        let n = self.n();
        let mut rng = SplitMix64::new(opts.seed);
        let mut hi = n - 1;
        let mut stagnant = 0;
        while hi > 0 {
            if self.detect_deflations(0, hi, opts.deflation_tol) > 0 {
                stagnant = 0;
            }
            if self.q[hi - 1].is_identity() {
                hi -= 1;
                continue;
            }
            let mut lo = hi - 1;
            while lo > 0 && !self.q[lo - 1].is_identity() {
                lo -= 1;
            }
            if stagnant >= opts.max_sweeps {
                return Err(SolveError::NoConvergence {
                    position: hi,
                    sweeps: stagnant,
                });
            }
            stagnant += 1;
            let mu = if opts.exceptional_after > 0 && stagnant % opts.exceptional_after == 0 {
                diag.exceptional_shifts += 1;
                self.exceptional_shift(lo, hi, &mut rng)
            } else {
                self.wilkinson_shift(lo, hi)
            };
            let mu = self.clamp_shift(mu);
            diag.turnovers += self.sweep(lo, hi, mu, acc.as_deref_mut());
            diag.sweeps += 1;
            self.check_active(lo, hi)?;
        }
        Ok(())
    }

    fn exceptional_shift(&self, lo: usize, hi: usize, rng: &mut SplitMix64) -> Complex64 {
        // geometric mean of the block's eigenvalue moduli, |det| = ∏|R_kk|
        let log_det: f64 = (lo..=hi).map(|k| self.r.diagonal(k).abs().ln()).sum();
        let mut r = (log_det / (hi - lo + 1) as f64).exp();
        if r == 0.0 || !r.is_finite() {
            r = 1.0;
        }
        Complex64::from_polar(r, 2.0 * std::f64::consts::PI * rng.next_f64())
    }

    /// Eigenvalues of a fully deflated state, top to bottom.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.n()).map(|k| self.eigenvalue(k)).collect()
    }
}

fn sine_drift(before: (f64, f64), after: (f64, f64)) -> (f64, f64) {
    ((after.0 - before.0).exp_m1().abs(), (after.1 - before.1).exp_m1().abs())
}

/// Roots of `p` by companion QR (the polynomial is made monic first).
pub fn solve_qr(p: &Polynomial, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let mut diagnostics = Diagnostics::default();
    let mut roots = Vec::with_capacity(p.degree() + p.zero_roots());
    if p.degree() == 1 {
        let c = p.coeffs();
        roots.push(-c[0] / c[1]);
    } else if p.degree() > 1 {
        let mut st = CompanionQr::build(p)?;
        let before = st.r.log_sine_products();
        let a0 = opts.accumulate.then(|| st.to_dense());
        let mut u = opts
            .accumulate
            .then(|| DMatrix::<Complex64>::identity(st.n(), st.n()));
        st.iterate(opts, &mut diagnostics, u.as_mut())?;
        let (dc, db) = sine_drift(before, st.r.log_sine_products());
        diagnostics.sine_drift_c = dc;
        diagnostics.sine_drift_b = db;
        if let (Some(a0), Some(u)) = (a0, u) {
            let ahat = st.to_dense();
            diagnostics.matrix_backward_error =
                Some(crate::dense::matrix_backward_error(&a0, &u, &ahat));
            diagnostics.matrix_norm = Some(a0.norm());
        }
        roots.extend(st.eigenvalues());
    }
    roots.extend(std::iter::repeat_n(ZERO, p.zero_roots()));
    Ok(Solution { roots, diagnostics })
}
