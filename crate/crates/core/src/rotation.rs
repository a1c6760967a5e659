//! Unitary core transformations and the two primitives every algorithm in this
//! crate is built from: the fusion and the turnover.
//!
//! A core transformation acting on rows/columns `i, i+1` is stored through its
//! active part
//!
//! ```text
//!     [ c  -s ]
//!     [ s  c̄  ]        c complex, s real
//! ```
//!
//! which always has determinant one. Indices in this crate are zero based: a
//! core at index `i` touches rows `i` and `i + 1`.

use num_complex::Complex64;

use crate::error::RotationError;

/// Unit roundoff of IEEE binary64.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Largest unitarity defect `| |c|²+s² - 1 |` accepted as rounding noise.
pub const CORRUPTION_TOLERANCE: f64 = 1e-8;

/// Below this magnitude of the first new sine the quotient formula in the
/// turnover is replaced by direct elimination.
pub const QUOTIENT_THRESHOLD: f64 = 1.4901161193847656e-8; // sqrt(u)

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Core {
    pub c: Complex64,
    pub s: f64,
}

/// A core transformation together with its position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexedCore {
    pub core: Core,
    pub index: usize,
}

/// Result of a fusion: `g·h = core · diag(phase, conj(phase))`.
///
/// The product of two cores is special unitary but its (2,1) entry is complex in
/// general; the phase of that entry is split off as a diagonal factor so the
/// sine stays real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fused {
    pub core: Core,
    pub phase: Complex64,
}

impl Default for Core {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Core {
    pub const IDENTITY: Core = Core {
        c: Complex64 { re: 1.0, im: 0.0 },
        s: 0.0,
    };

    #[inline]
    pub fn new(c: Complex64, s: f64) -> Self {
        Self { c, s }
    }

    /// `|c|² + s² - 1`.
    #[inline]
    pub fn unitarity_defect(&self) -> f64 {
        self.c.norm_sqr() + self.s * self.s - 1.0
    }

    #[inline]
    pub fn adjoint(&self) -> Core {
        Core {
            c: self.c.conj(),
            s: -self.s,
        }
    }

    /// Dense active part, row major.
    pub fn dense(&self) -> [[Complex64; 2]; 2] {
        [
            [self.c, Complex64::new(-self.s, 0.0)],
            [Complex64::new(self.s, 0.0), self.c.conj()],
        ]
    }

    pub fn is_identity(&self) -> bool {
        self.s == 0.0 && self.c == Complex64::new(1.0, 0.0)
    }

    /// Rescale onto the unit sphere with the first-order reciprocal square root
    /// `1/sqrt(1+w) ≈ 1 - w/2`. Falls back to an exact rescale when the defect is
    /// too large for the expansion; callers that must detect corruption use
    /// [`renormalize`].
    #[inline]
    pub(crate) fn rescaled(self) -> Core {
        let w = self.unitarity_defect();
        let k = if w.abs() <= CORRUPTION_TOLERANCE {
            1.0 - 0.5 * w
        } else {
            1.0 / (1.0 + w).sqrt()
        };
        Core {
            c: self.c * k,
            s: self.s * k,
        }
    }

    /// Move a diagonal `diag(d1, d2)` across the core:
    /// `diag(d1,d2)·G = G'·diag(d2,d1)` and `G·diag(d1,d2) = diag(d2,d1)·G'`,
    /// where `G'` is the returned core. The diagonal entries trade places.
    #[inline]
    pub fn through_diagonal(&self, d1: Complex64, d2: Complex64) -> Core {
        Core {
            c: self.c * d1 * d2.conj(),
            s: self.s,
        }
    }

    /// Apply the active part to the pair `(x, y)`.
    #[inline]
    pub fn apply(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        (self.c * x - y * self.s, x * self.s + self.c.conj() * y)
    }

    /// Apply the adjoint of the active part to the pair `(x, y)`.
    #[inline]
    pub fn apply_adjoint(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        (self.c.conj() * x + y * self.s, self.c * y - x * self.s)
    }
}

impl IndexedCore {
    pub fn new(core: Core, index: usize) -> Self {
        Self { core, index }
    }

    pub fn identity(index: usize) -> Self {
        Self::new(Core::IDENTITY, index)
    }
}

#[inline]
fn abs2(x: Complex64, y: Complex64) -> f64 {
    // scaled Euclidean norm of a complex pair
    let m = x.re.abs().max(x.im.abs()).max(y.re.abs()).max(y.im.abs());
    if m == 0.0 {
        return 0.0;
    }
    if (1e-150..=1e150).contains(&m) {
        (x.norm_sqr() + y.norm_sqr()).sqrt()
    } else {
        let (xs, ys) = (x / m, y / m);
        m * (xs.norm_sqr() + ys.norm_sqr()).sqrt()
    }
}

/// Build `G` with `G*·(x, y)ᵀ = (r, 0)ᵀ`.
///
/// The sine is `|y|/‖(x,y)‖ ≥ 0`; the phase of `y` is folded into `c` and `r`.
/// `y = 0` gives `c = x/|x|`, and `x = y = 0` gives the identity with `r = 0`.
pub fn make_core(x: Complex64, y: Complex64) -> (Core, Complex64) {
    let nrm = abs2(x, y);
    if nrm == 0.0 {
        return (Core::IDENTITY, Complex64::new(0.0, 0.0));
    }
    let ay = y.norm();
    if ay == 0.0 {
        let ax = x.norm();
        return (Core::new(x / ax, 0.0).rescaled(), Complex64::new(ax, 0.0));
    }
    let phase = y / ay;
    let core = Core::new(x * phase.conj() / nrm, ay / nrm).rescaled();
    (core, phase * nrm)
}

/// Enforce `|c|² + s² = 1` with the first-order reciprocal square root.
///
/// Defects beyond [`CORRUPTION_TOLERANCE`] indicate corrupted data and are
/// reported instead of repaired.
pub fn renormalize(core: Core) -> Result<Core, RotationError> {
    let w = core.unitarity_defect();
    if !(w.abs() <= CORRUPTION_TOLERANCE) {
        return Err(RotationError::NotUnitary { defect: w });
    }
    let k = 1.0 - 0.5 * w;
    Ok(Core::new(core.c * k, core.s * k))
}

/// Product of two cores at the same index.
pub fn fuse(g: Core, h: Core) -> Fused {
    // [[a, -b̄], [b, ā]] = g·h
    let a = g.c * h.c - g.s * h.s;
    let b = h.c * g.s + g.c.conj() * h.s;
    if b.im == 0.0 {
        return Fused {
            core: Core::new(a, b.re).rescaled(),
            phase: Complex64::new(1.0, 0.0),
        };
    }
    let nb = b.norm();
    let phase = b / nb;
    Fused {
        core: Core::new(a * phase.conj(), nb).rescaled(),
        phase,
    }
}

#[inline]
fn check(core: &Core) -> Result<(), RotationError> {
    let w = core.unitarity_defect();
    if w.abs() <= CORRUPTION_TOLERANCE {
        Ok(())
    } else {
        Err(RotationError::NotUnitary { defect: w })
    }
}

/// Refactor `a₀ b₁ c₀` (subscripts are local positions) as `d₁ e₀ f₁`.
///
/// The sine of `f` comes from the quotient `s_a s_b / s_e` so that the product
/// `s_e s_f` equals `s_a s_b` to relative accuracy; when `|s_e|` is below
/// [`QUOTIENT_THRESHOLD`] it is read off the eliminated matrix instead.
#[inline]
fn factor3(a: Core, b: Core, c: Core) -> (Core, Core, Core) {
    // first column of the 3x3 product
    let bcs = b.c * c.s;
    let m0 = a.c * c.c - bcs * a.s;
    let m1 = c.c * a.s + a.c.conj() * bcs;
    let m2 = b.s * c.s;

    // d zeroes m2 against m1; m2 is real so r1 comes out real and nonnegative
    let nrm1 = (m1.norm_sqr() + m2 * m2).sqrt();
    let (d, r1) = if m2 == 0.0 && m1.im == 0.0 {
        // nothing to eliminate; keep a signed r1 so d stays the identity
        (Core::IDENTITY, m1.re)
    } else {
        (Core::new(m1 / nrm1, m2 / nrm1).rescaled(), nrm1)
    };
    let nrm2 = (m0.norm_sqr() + r1 * r1).sqrt();
    let e = if nrm2 == 0.0 {
        Core::IDENTITY
    } else {
        Core::new(m0 / nrm2, r1 / nrm2).rescaled()
    };

    // second column, then eliminate with d* and e*
    let cc3 = c.c.conj();
    let p0 = -(a.c * c.s) - a.s * b.c * cc3;
    let p1 = Complex64::new(-a.s * c.s, 0.0) + a.c.conj() * b.c * cc3;
    let p2 = cc3 * b.s;
    let q1 = d.c.conj() * p1 + p2 * d.s;
    let q2 = d.c * p2 - p1 * d.s;
    let cf = e.c * q1 - p0 * e.s;
    let sf = if e.s.abs() > QUOTIENT_THRESHOLD {
        a.s * b.s / e.s
    } else {
        q2.re
    };
    (d, e, Core::new(cf, sf).rescaled())
}

/// Pass a misfit from right to left through a descending pair:
/// `G_j G_{j+1} M_j = M_{j+1} Ĝ_j Ĝ_{j+1}`.
///
/// Returns `(M_{j+1}, Ĝ_j, Ĝ_{j+1})`; `ŝ_j ŝ_{j+1} = s_j s_{j+1}` to relative
/// accuracy.
#[inline]
pub fn turnover(g_j: Core, g_j1: Core, m_j: Core) -> (Core, Core, Core) {
    factor3(g_j, g_j1, m_j)
}

/// Pass a misfit from left to right through a descending pair:
/// `M_{j+1} G_j G_{j+1} = Ĝ_j Ĝ_{j+1} M_j`.
///
/// Returns `(Ĝ_j, Ĝ_{j+1}, M_j)`. This is the mirror image of [`turnover`]
/// (flip the index order and take adjoints), which maps it back onto the same
/// kernel.
#[inline]
pub fn turnover_left_to_right(m_j1: Core, g_j: Core, g_j1: Core) -> (Core, Core, Core) {
    let (d, e, f) = factor3(g_j1, g_j, m_j1);
    (f, e, d)
}

/// Checked variant of [`turnover`] on indexed cores.
pub fn turnover_indexed(
    g_j: IndexedCore,
    g_j1: IndexedCore,
    m_j: IndexedCore,
) -> Result<(IndexedCore, IndexedCore, IndexedCore), RotationError> {
    let j = g_j.index;
    if g_j1.index != j + 1 || m_j.index != j {
        return Err(RotationError::IndexPattern {
            found: [g_j.index, g_j1.index, m_j.index],
        });
    }
    check(&g_j.core)?;
    check(&g_j1.core)?;
    check(&m_j.core)?;
    let (m, a, b) = turnover(g_j.core, g_j1.core, m_j.core);
    Ok((
        IndexedCore::new(m, j + 1),
        IndexedCore::new(a, j),
        IndexedCore::new(b, j + 1),
    ))
}

/// Checked variant of [`turnover_left_to_right`] on indexed cores.
pub fn turnover_left_to_right_indexed(
    m_j1: IndexedCore,
    g_j: IndexedCore,
    g_j1: IndexedCore,
) -> Result<(IndexedCore, IndexedCore, IndexedCore), RotationError> {
    let j = g_j.index;
    if g_j1.index != j + 1 || m_j1.index != j + 1 {
        return Err(RotationError::IndexPattern {
            found: [m_j1.index, g_j.index, g_j1.index],
        });
    }
    check(&m_j1.core)?;
    check(&g_j.core)?;
    check(&g_j1.core)?;
    let (a, b, m) = turnover_left_to_right(m_j1.core, g_j.core, g_j1.core);
    Ok((
        IndexedCore::new(a, j),
        IndexedCore::new(b, j + 1),
        IndexedCore::new(m, j),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const U: f64 = UNIT_ROUNDOFF;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    type M3 = [[Complex64; 3]; 3];

    fn embed3(core: &Core, pos: usize) -> M3 {
        let mut m = [[cx(0.0, 0.0); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = cx(1.0, 0.0);
        }
        let d = core.dense();
        for i in 0..2 {
            for j in 0..2 {
                m[pos + i][pos + j] = d[i][j];
            }
        }
        m
    }

    fn mul3(a: &M3, b: &M3) -> M3 {
        let mut out = [[cx(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    fn max_diff3(a: &M3, b: &M3) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((a[i][j] - b[i][j]).norm());
            }
        }
        m
    }

    // small deterministic generator for test inputs
    struct Lcg(u64);
    impl Lcg {
        fn next(&mut self) -> f64 {
            self.0 = self
                .0
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((self.0 >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        }
        fn core(&mut self) -> Core {
            make_core(cx(self.next(), self.next()), cx(self.next(), self.next())).0
        }
    }

    #[test]
    fn make_core_real_pythagorean() {
        let (g, r) = make_core(cx(3.0, 0.0), cx(4.0, 0.0));
        assert!((g.c - cx(0.6, 0.0)).norm() <= 4.0 * U);
        assert!((g.s - 0.8).abs() <= 4.0 * U);
        assert!((r - cx(5.0, 0.0)).norm() <= 8.0 * U);
    }

    #[test]
    fn make_core_zero_second_component() {
        let (g, r) = make_core(cx(0.0, 2.0), cx(0.0, 0.0));
        assert_eq!(g.s, 0.0);
        assert!((g.c - cx(0.0, 1.0)).norm() <= 2.0 * U);
        assert!((r - cx(2.0, 0.0)).norm() <= 4.0 * U);
        let (g, r) = make_core(cx(0.0, 0.0), cx(0.0, 0.0));
        assert!(g.is_identity());
        assert_eq!(r, cx(0.0, 0.0));
    }

    #[test]
    fn make_core_complex_substitution() {
        let (x, y) = (cx(1.0, 1.0), cx(1.0, -1.0));
        let (g, r) = make_core(x, y);
        let (u, v) = g.apply_adjoint(x, y);
        assert!((u - r).norm() <= 8.0 * U);
        assert!(v.norm() <= 8.0 * U);
        assert!((r.norm() - 2.0).abs() <= 8.0 * U);
        assert!(g.s >= 0.0);
        assert!(g.unitarity_defect().abs() <= 4.0 * U);
    }

    #[test]
    fn make_core_survives_extreme_scales() {
        for scale in [1e-200, 1e200] {
            let (g, r) = make_core(cx(3.0 * scale, 0.0), cx(4.0 * scale, 0.0));
            assert!((g.s - 0.8).abs() <= 8.0 * U);
            assert!((r.re / scale - 5.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn renormalize_cases() {
        let id = renormalize(Core::IDENTITY).unwrap();
        assert_eq!(id, Core::IDENTITY);

        let k = 1.0 + 3.0 * U;
        let g = Core::new(cx(0.6 * k, 0.0), 0.8 * k);
        let r = renormalize(g).unwrap();
        assert!(r.unitarity_defect().abs() <= 2.0 * U);

        // w = 1e-9: compare the first-order formula with the exact rescale
        let k = (1.0f64 + 1e-9).sqrt();
        let g = Core::new(cx(0.6 * k, 0.0), 0.8 * k);
        let r = renormalize(g).unwrap();
        let norm = g.c.norm_sqr() + g.s * g.s;
        let exact = g.s / norm.sqrt();
        assert!(((r.s - exact) / exact).abs() <= 1e-17 + 2.0 * U);

        let bad = Core::new(cx(1.0, 0.0), 0.1);
        assert!(matches!(renormalize(bad), Err(RotationError::NotUnitary { .. })));
    }

    #[test]
    fn fuse_identity_and_inverse() {
        let mut rng = Lcg(3);
        let h = rng.core();
        let f = fuse(Core::IDENTITY, h);
        assert_eq!(f.phase, cx(1.0, 0.0));
        assert!((f.core.c - h.c).norm() <= 2.0 * U && (f.core.s - h.s).abs() <= 2.0 * U);

        let g = rng.core();
        let f = fuse(g, g.adjoint());
        let d = fused_dense(&f);
        assert!((d[0][0] - cx(1.0, 0.0)).norm() <= 10.0 * U);
        assert!((d[1][1] - cx(1.0, 0.0)).norm() <= 10.0 * U);
        assert!(d[0][1].norm() <= 10.0 * U && d[1][0].norm() <= 10.0 * U);
    }

    fn fused_dense(f: &Fused) -> [[Complex64; 2]; 2] {
        let d = f.core.dense();
        [
            [d[0][0] * f.phase, d[0][1] * f.phase.conj()],
            [d[1][0] * f.phase, d[1][1] * f.phase.conj()],
        ]
    }

    #[test]
    fn fuse_matches_dense_product() {
        let mut rng = Lcg(11);
        for _ in 0..1000 {
            let (g, h) = (rng.core(), rng.core());
            let f = fuse(g, h);
            let (a, b) = (g.dense(), h.dense());
            let d = fused_dense(&f);
            for i in 0..2 {
                for j in 0..2 {
                    let p = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                    assert!((p - d[i][j]).norm() <= 10.0 * U);
                }
            }
            assert!(f.core.s >= 0.0);
            assert!(f.core.unitarity_defect().abs() <= 4.0 * U);
        }
    }

    #[test]
    fn turnover_identity() {
        let (m, a, b) = turnover(Core::IDENTITY, Core::IDENTITY, Core::IDENTITY);
        for g in [m, a, b] {
            assert!((g.c - cx(1.0, 0.0)).norm() <= U && g.s.abs() <= U);
        }
    }

    #[test]
    fn turnover_quarter_turns() {
        let q = Core::new(cx(0.0, 0.0), 1.0);
        let before = mul3(&mul3(&embed3(&q, 0), &embed3(&q, 1)), &embed3(&q, 0));
        let (m, a, b) = turnover(q, q, q);
        let after = mul3(&mul3(&embed3(&m, 1), &embed3(&a, 0)), &embed3(&b, 1));
        assert!(max_diff3(&before, &after) <= 20.0 * U);
    }

    #[test]
    fn turnover_random_dense_and_sine_product() {
        let mut rng = Lcg(5);
        for _ in 0..2000 {
            let (g0, g1, m0) = (rng.core(), rng.core(), rng.core());
            let before = mul3(&mul3(&embed3(&g0, 0), &embed3(&g1, 1)), &embed3(&m0, 0));
            let (m1, h0, h1) = turnover(g0, g1, m0);
            let after = mul3(&mul3(&embed3(&m1, 1), &embed3(&h0, 0)), &embed3(&h1, 1));
            assert!(max_diff3(&before, &after) <= 20.0 * U);
            let p = g0.s * g1.s;
            assert!((h0.s * h1.s - p).abs() <= 10.0 * U * p.abs());
            for g in [m1, h0, h1] {
                assert!(g.unitarity_defect().abs() <= 4.0 * U);
            }
        }
    }

    #[test]
    fn turnover_left_to_right_random() {
        let mut rng = Lcg(7);
        for _ in 0..2000 {
            let (m1, g0, g1) = (rng.core(), rng.core(), rng.core());
            let before = mul3(&mul3(&embed3(&m1, 1), &embed3(&g0, 0)), &embed3(&g1, 1));
            let (h0, h1, m0) = turnover_left_to_right(m1, g0, g1);
            let after = mul3(&mul3(&embed3(&h0, 0), &embed3(&h1, 1)), &embed3(&m0, 0));
            assert!(max_diff3(&before, &after) <= 20.0 * U);
            let p = g0.s * g1.s;
            assert!((h0.s * h1.s - p).abs() <= 10.0 * U * p.abs());
        }
    }

    #[test]
    fn turnover_tiny_sine_uses_elimination() {
        // s_e tiny forces the fallback path; the dense identity must still hold
        let g0 = Core::new(cx(1.0, 0.0), 0.0);
        let g1 = make_core(cx(0.3, 0.1), cx(0.7, 0.0)).0;
        let m0 = make_core(cx(1.0, 0.0), cx(1e-12, 0.0)).0;
        let before = mul3(&mul3(&embed3(&g0, 0), &embed3(&g1, 1)), &embed3(&m0, 0));
        let (m1, h0, h1) = turnover(g0, g1, m0);
        let after = mul3(&mul3(&embed3(&m1, 1), &embed3(&h0, 0)), &embed3(&h1, 1));
        assert!(max_diff3(&before, &after) <= 20.0 * U);
    }

    #[test]
    fn diagonal_moves_across_core() {
        let mut rng = Lcg(9);
        let g = rng.core();
        let (d1, d2) = (cx(0.6, 0.8), cx(0.0, -1.0));
        let gp = g.through_diagonal(d1, d2);
        let a = g.dense();
        let b = gp.dense();
        // diag(d1,d2)·G == G'·diag(d2,d1)
        assert!((d1 * a[0][0] - b[0][0] * d2).norm() <= 4.0 * U);
        assert!((d1 * a[0][1] - b[0][1] * d1).norm() <= 4.0 * U);
        assert!((d2 * a[1][0] - b[1][0] * d2).norm() <= 4.0 * U);
        assert!((d2 * a[1][1] - b[1][1] * d1).norm() <= 4.0 * U);
    }

    #[test]
    fn indexed_turnover_validates_pattern() {
        let g = IndexedCore::identity(2);
        let bad = IndexedCore::identity(4);
        assert!(turnover_indexed(g, bad, g).is_err());
        let ok = turnover_indexed(g, IndexedCore::identity(3), g).unwrap();
        assert_eq!((ok.0.index, ok.1.index, ok.2.index), (3, 2, 3));
        let corrupt = IndexedCore::new(Core::new(cx(2.0, 0.0), 0.0), 3);
        assert!(turnover_indexed(g, corrupt, g).is_err());
    }
}
