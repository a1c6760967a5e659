//! Single-shift core-chasing QZ on the factored companion pencil `(V, W)`.
//!
//! `V = Q·D·R` is stored exactly as the companion matrix in [`crate::qr`];
//! `W` is a second factored triangular. Each step moves the misfit through `W`
//! (two turnovers), through `R` (two), and through `Q` (one).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::companion::{CompanionPencil, Polynomial, Scaling};
use crate::error::SolveError;
use crate::qr::{Diagnostics, Solution, SolveOptions};
use crate::rng::SplitMix64;
use crate::rotation::{fuse, make_core, turnover, Core, UNIT_ROUNDOFF};
use crate::triangular::apply_cols;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Generalized eigenvalue of the 2×2 pencil `(A, B)`, `B` upper triangular,
/// closest to `A₂₂/B₂₂`.
///
/// Falls back to `A₂₂` when `B` is numerically singular. Ties go to the
/// smaller real part, then the smaller imaginary part.
pub fn pencil_shift(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> Complex64 {
    let scale = b.iter().flatten().fold(0.0f64, |m, z| m.max(z.norm()));
    let tiny = UNIT_ROUNDOFF * scale;
    if !(b[0][0].norm() > tiny && b[1][1].norm() > tiny) {
        return a[1][1];
    }
    // M = A·B⁻¹
    let i11 = b[0][0].inv();
    let i22 = b[1][1].inv();
    let i12 = -b[0][1] * i11 * i22;
    let m = [
        [a[0][0] * i11, a[0][0] * i12 + a[0][1] * i22],
        [a[1][0] * i11, a[1][0] * i12 + a[1][1] * i22],
    ];
    let target = a[1][1] * i22;
    let half = (m[0][0] - m[1][1]) * 0.5;
    let disc = (half * half + m[0][1] * m[1][0]).sqrt();
    let mid = (m[0][0] + m[1][1]) * 0.5;
    let (l1, l2) = (mid + disc, mid - disc);
    let (e1, e2) = ((l1 - target).norm(), (l2 - target).norm());
    if e1 < e2 || (e1 == e2 && (l1.re, l1.im) <= (l2.re, l2.im)) {
        l1
    } else {
        l2
    }
}

impl CompanionPencil {
    /// `U₁` with `U₁*·q ∝ e₁` for `q = (V − μW)e_lo` on rows `lo, lo+1`.
    ///
    /// When `q` vanishes the shift is nudged by `u|μ|` once.
    pub fn initial_core(&self, lo: usize, mu: Complex64) -> Result<Core, SolveError> {
        let v = &self.v;
        let rll = v.r.diagonal(lo);
        let wll = self.w.diagonal(lo);
        let ql = v.q[lo];
        let dl = v.d[lo];
        let first = |mu: Complex64| (ql.c * dl * rll - mu * wll, dl * rll * ql.s);
        let (x, y) = first(mu);
        if x != ZERO || y != ZERO {
            return Ok(make_core(x, y).0);
        }
        let nudge = if mu == ZERO {
            Complex64::new(UNIT_ROUNDOFF, 0.0)
        } else {
            mu * UNIT_ROUNDOFF
        };
        let (x, y) = first(mu + nudge);
        if x != ZERO || y != ZERO {
            return Ok(make_core(x, y).0);
        }
        Err(SolveError::DegenerateShift { position: lo })
    }

    /// Trailing 2×2 blocks of `V` and `W` on the active block `[lo, hi]`.
    pub fn trailing_blocks(&self, lo: usize, hi: usize) -> ([[Complex64; 2]; 2], [[Complex64; 2]; 2]) {
        let a = self.v.trailing_block(lo, hi);
        let wb = self.w.column_tail(hi, 1);
        let b = [
            [Complex64::new(self.w.diagonal(hi - 1), 0.0), wb[0]],
            [ZERO, Complex64::new(self.w.diagonal(hi), 0.0)],
        ];
        (a, b)
    }

    pub fn shift(&self, lo: usize, hi: usize) -> Complex64 {
        let (a, b) = self.trailing_blocks(lo, hi);
        pencil_shift(a, b)
    }

    /// One implicit single-shift QZ iteration on `[lo, hi]`.
    ///
    /// Returns the number of turnovers performed, `5(hi - lo) - 1`.
    pub fn sweep(
        &mut self,
        lo: usize,
        hi: usize,
        mu: Complex64,
        mut acc_u: Option<&mut DMatrix<Complex64>>,
        mut acc_z: Option<&mut DMatrix<Complex64>>,
    ) -> Result<usize, SolveError> {
        let u1 = self.initial_core(lo, mu)?;
        let v = &mut self.v;
        let f = fuse(u1.adjoint(), v.q[lo]);
        v.q[lo] = f.core;
        v.d[lo] *= f.phase;
        v.push_phase(lo + 1, f.phase.conj());
        if let Some(u) = acc_u.as_deref_mut() {
            apply_cols(u, lo, &u1, false);
        }

        let mut g = u1;
        let mut turnovers = 0;
        for k in lo..hi {
            // g*·W = Ŵ·z, so right-multiplying by z* restores W
            let z = self.w.pass_ltr(k, g.adjoint()).adjoint();
            if let Some(zz) = acc_z.as_deref_mut() {
                apply_cols(zz, k, &z, false);
            }
            let v = &mut self.v;
            let x = v.r.pass_rtl(k, z);
            let x = x.through_diagonal(v.d[k], v.d[k + 1]);
            v.d.swap(k, k + 1);
            if k + 1 < hi {
                let (next, q0, q1) = turnover(v.q[k], v.q[k + 1], x);
                v.q[k] = q0;
                v.q[k + 1] = q1;
                turnovers += 5;
                g = next;
                if let Some(u) = acc_u.as_deref_mut() {
                    apply_cols(u, k + 1, &g, false);
                }
            } else {
                let f = fuse(v.q[k], x);
                v.q[k] = f.core;
                v.d[k] *= f.phase;
                v.d[k + 1] *= f.phase.conj();
                turnovers += 4;
            }
        }
        Ok(turnovers)
    }

    fn exceptional_shift(&self, lo: usize, hi: usize, rng: &mut SplitMix64) -> Complex64 {
        // geometric mean of the block's eigenvalue moduli, |det V| / |det W|
        let log_det: f64 = (lo..=hi)
            .map(|k| self.v.r.diagonal(k).abs().ln() - self.w.diagonal(k).abs().ln())
            .sum();
        let mut r = (log_det / (hi - lo + 1) as f64).exp();
        if r == 0.0 || !r.is_finite() {
            r = 1.0;
        }
        Complex64::from_polar(r, 2.0 * std::f64::consts::PI * rng.next_f64())
    }

    /// Run shifted sweeps until every core of `Q` is deflated.
    pub fn iterate(
        &mut self,
        opts: &SolveOptions,
        diag: &mut Diagnostics,
        mut acc_u: Option<&mut DMatrix<Complex64>>,
        mut acc_z: Option<&mut DMatrix<Complex64>>,
    ) -> Result<(), SolveError> {
        let n = self.n();
        let mut rng = SplitMix64::new(opts.seed);
        let mut hi = n - 1;
        let mut stagnant = 0;
        while hi > 0 {
            if self.v.detect_deflations(0, hi, opts.deflation_tol) > 0 {
                stagnant = 0;
            }
            if self.v.q[hi - 1].is_identity() {
                hi -= 1;
                continue;
            }
            let mut lo = hi - 1;
            while lo > 0 && !self.v.q[lo - 1].is_identity() {
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
                self.shift(lo, hi)
            };
            let mu = self.v.clamp_shift(mu);
            diag.turnovers += self.sweep(lo, hi, mu, acc_u.as_deref_mut(), acc_z.as_deref_mut())?;
            diag.sweeps += 1;
            for g in &self.v.q[lo..hi] {
                crate::rotation::renormalize(*g)?;
            }
        }
        Ok(())
    }

    /// `V_kk / W_kk` for every position of a fully deflated pencil.
    ///
    /// A tiny `W_kk` is a legitimately large root; only a zero one, or a
    /// quotient that overflows, is reported as infinite.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>, SolveError> {
        (0..self.n())
            .map(|k| {
                let z = self.v.eigenvalue(k) / self.w.diagonal(k);
                if z.re.is_finite() && z.im.is_finite() {
                    Ok(z)
                } else {
                    Err(SolveError::InfiniteEigenvalue { index: k })
                }
            })
            .collect()
    }
}

/// Roots of `p` by companion QZ after the given scaling.
pub fn solve_qz(p: &Polynomial, scaling: Scaling, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let mut diagnostics = Diagnostics::default();
    let mut roots = Vec::with_capacity(p.degree() + p.zero_roots());
    if p.degree() == 1 {
        let c = p.coeffs();
        roots.push(-c[0] / c[1]);
    } else if p.degree() > 1 {
        let mut pen = CompanionPencil::build(p, scaling)?;
        let n = pen.n();
        let before = (pen.v.r.log_sine_products(), pen.w.log_sine_products());
        let dense0 = opts.accumulate.then(|| pen.to_dense());
        let mut u = opts.accumulate.then(|| DMatrix::<Complex64>::identity(n, n));
        let mut z = opts.accumulate.then(|| DMatrix::<Complex64>::identity(n, n));
        pen.iterate(opts, &mut diagnostics, u.as_mut(), z.as_mut())?;
        let after = (pen.v.r.log_sine_products(), pen.w.log_sine_products());
        let drift = |x: f64, y: f64| (y - x).exp_m1().abs();
        diagnostics.sine_drift_c = drift(before.0 .0, after.0 .0).max(drift(before.1 .0, after.1 .0));
        diagnostics.sine_drift_b = drift(before.0 .1, after.0 .1).max(drift(before.1 .1, after.1 .1));
        if let (Some((v0, w0)), Some(u), Some(z)) = (dense0, u, z) {
            let (vh, wh) = pen.to_dense();
            let zs = z.adjoint();
            diagnostics.matrix_backward_error = Some((&u * vh * &zs - &v0).norm());
            diagnostics.w_backward_error = Some((&u * wh * &zs - &w0).norm());
            diagnostics.matrix_norm = Some(v0.norm());
        }
        roots.extend(pen.eigenvalues()?);
    }
    roots.extend(std::iter::repeat_n(ZERO, p.zero_roots()));
    Ok(Solution { roots, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::companion::CompanionQr;
    use crate::qr::{solve_qr, wilkinson_2x2};
    use crate::rotation::UNIT_ROUNDOFF as U;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    fn random_poly(n: usize, seed: u64, lead: Option<Complex64>) -> Polynomial {
        let mut rng = SplitMix64::new(seed);
        let mut a: Vec<Complex64> = (0..=n)
            .map(|_| cx(rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0))
            .collect();
        if let Some(l) = lead {
            a[n] = l;
        }
        Polynomial::new(a).unwrap()
    }

    // greedy matching is enough when roots are well separated
    fn match_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
        let mut used = vec![false; b.len()];
        let mut worst: f64 = 0.0;
        for x in a {
            let (j, d) = b
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, y)| (j, (x - y).norm()))
                .fold((usize::MAX, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
            used[j] = true;
            worst = worst.max(d);
        }
        worst
    }

    #[test]
    fn pencil_shift_cases() {
        let (o, z) = (cx(1.0, 0.0), ZERO);
        let a = [[z, o], [o, z]];
        let id = [[o, z], [z, o]];
        assert_eq!(pencil_shift(a, id), wilkinson_2x2(z, o, o, z));
        let mu = pencil_shift([[cx(3.0, 0.0), z], [z, cx(8.0, 0.0)]], [[o, z], [z, cx(2.0, 0.0)]]);
        assert!((mu - cx(4.0, 0.0)).norm() <= 4.0 * U);
        let mut rng = SplitMix64::new(5);
        let mut r = || cx(rng.next_f64() - 0.5, rng.next_f64() - 0.5);
        for _ in 0..100 {
            let a = [[r(), r()], [r(), r()]];
            let b = [[r() + 2.0, r()], [z, r() + 2.0]];
            let mu = pencil_shift(a, b);
            let det = (a[0][0] - mu * b[0][0]) * (a[1][1] - mu * b[1][1])
                - (a[0][1] - mu * b[0][1]) * (a[1][0] - mu * b[1][0]);
            assert!(det.norm() <= 1e-13);
        }
        assert_eq!(pencil_shift(a, [[z, z], [z, o]]), a[1][1]);
    }

    #[test]
    fn initial_core_cases() {
        let p = Polynomial::from_real(&[3.0, 1.0, -2.0, 1.0]).unwrap();
        let pen = CompanionPencil::build(&p, Scaling::None).unwrap();
        let g = pen.initial_core(0, ZERO).unwrap();
        // first column of a companion matrix is e₂, so U₁ swaps the rows
        assert!(g.c.norm() <= 4.0 * U && (g.s.abs() - 1.0).abs() <= 4.0 * U);

        let p = random_poly(4, 8, None);
        let pen = CompanionPencil::build(&p, Scaling::None).unwrap();
        let (v, w) = pen.to_dense();
        let mu = cx(0.3, -0.2);
        let g = pen.initial_core(0, mu).unwrap();
        let q0 = v[(0, 0)] - mu * w[(0, 0)];
        let q1 = v[(1, 0)] - mu * w[(1, 0)];
        let (_, y) = g.apply_adjoint(q0, q1);
        assert!(y.norm() <= 10.0 * U * (q0.norm() + q1.norm()));
    }

    #[test]
    fn monic_sweep_matches_qr_sweep() {
        let p = random_poly(9, 2, Some(cx(1.0, 0.0)));
        let mut pen = CompanionPencil::build(&p, Scaling::None).unwrap();
        let mut qr = CompanionQr::build(&p).unwrap();
        for _ in 0..3 {
            let mu = qr.wilkinson_shift(0, 8);
            qr.sweep(0, 8, mu, None);
            pen.sweep(0, 8, mu, None, None).unwrap();
        }
        // the factorization is unique only up to a real signature: W comes out
        // as diag(±1) and V·W⁻¹ equals A up to that diagonal similarity
        let (v, w) = pen.to_dense();
        let a = qr.to_dense();
        let scale = a.norm();
        let mut sig = DMatrix::<Complex64>::zeros(9, 9);
        for i in 0..9 {
            for j in 0..9 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((w[(i, j)].norm() - want).abs() <= 100.0 * U);
            }
            sig[(i, i)] = Complex64::new(w[(i, i)].re.signum(), 0.0);
        }
        let s = v * &sig;
        for i in 0..9 {
            for j in 0..9 {
                assert!((s[(i, j)].norm() - a[(i, j)].norm()).abs() <= 100.0 * U * scale);
            }
        }
    }

    #[test]
    fn sweep_is_an_equivalence() {
        let n = 10;
        let p = random_poly(n, 3, None);
        let mut pen = CompanionPencil::build(&p, Scaling::Norm).unwrap();
        let (v0, w0) = pen.to_dense();
        let mut u = DMatrix::<Complex64>::identity(n, n);
        let mut z = DMatrix::<Complex64>::identity(n, n);
        for _ in 0..4 {
            let mu = pen.shift(0, n - 1);
            let t = pen.sweep(0, n - 1, mu, Some(&mut u), Some(&mut z)).unwrap();
            assert_eq!(t, 5 * (n - 1) - 1);
        }
        let (v, w) = pen.to_dense();
        let zs = z.adjoint();
        assert!(max_abs(&(&u * &v * &zs - &v0)) <= 100.0 * n as f64 * U);
        assert!(max_abs(&(&u * &w * &zs - &w0)) <= 100.0 * n as f64 * U);
        for i in 0..n {
            for j in 0..i {
                assert!(w[(i, j)].norm() <= 100.0 * U);
                if i > j + 1 {
                    assert!(v[(i, j)].norm() <= 100.0 * U);
                }
            }
        }
    }

    #[test]
    fn two_z2_minus_2() {
        let p = Polynomial::from_real(&[-2.0, 0.0, 2.0]).unwrap();
        let s = solve_qz(&p, Scaling::Norm, &SolveOptions::default()).unwrap();
        assert!(match_dist(&s.roots, &[cx(1.0, 0.0), cx(-1.0, 0.0)]) <= 1e-14);
    }

    #[test]
    fn cube_roots_of_unity() {
        let p = Polynomial::from_real(&[-2.0, 0.0, 0.0, 2.0]).unwrap();
        let s = solve_qz(&p, Scaling::Norm, &SolveOptions::default()).unwrap();
        let want: Vec<Complex64> = (0..3)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0))
            .collect();
        assert!(match_dist(&s.roots, &want) <= 1e-13);
    }

    #[test]
    fn monic_qz_matches_qr() {
        let p = random_poly(12, 4, Some(cx(1.0, 0.0)));
        let a = solve_qr(&p, &SolveOptions::default()).unwrap();
        let b = solve_qz(&p, Scaling::Norm, &SolveOptions::default()).unwrap();
        assert!(match_dist(&a.roots, &b.roots) <= 1e-9);
    }

    #[test]
    fn tiny_leading_coefficient() {
        let p = random_poly(8, 6, Some(cx(1e-10, 0.0)));
        let opts = SolveOptions {
            accumulate: true,
            ..Default::default()
        };
        let s = solve_qz(&p, Scaling::Norm, &opts).unwrap();
        assert_eq!(s.roots.len(), 8);
        assert!(s.roots.iter().all(|r| r.re.is_finite() && r.im.is_finite()));
        let d = &s.diagnostics;
        assert!(d.matrix_backward_error.unwrap() <= 100.0 * 8.0 * U);
        assert!(d.w_backward_error.unwrap() <= 100.0 * 8.0 * U);
    }

    #[test]
    fn sine_products_conserved() {
        let p = random_poly(30, 7, None);
        let s = solve_qz(&p, Scaling::Norm, &SolveOptions::default()).unwrap();
        assert!(s.diagnostics.sine_drift_c <= 1e-12);
        assert!(s.diagnostics.sine_drift_b <= 1e-12);
    }

    #[test]
    fn huge_finite_root_is_not_infinite() {
        // 1e-17·z² - z + 1 has roots ≈ 1 and ≈ 1e17
        let p = Polynomial::from_real(&[1.0, -1.0, 1e-17]).unwrap();
        let mut roots = solve_qz(&p, Scaling::Norm, &SolveOptions::default()).unwrap().roots;
        roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        assert!((roots[0] - 1.0).norm() <= 1e-14);
        assert!((roots[1].norm() / 1e17 - 1.0).abs() <= 1e-10);
    }
}
