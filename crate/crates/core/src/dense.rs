//! Dense reference code: assembly of factored objects, an unstructured complex
//! Francis QR, and matrix backward errors.
//!
//! Nothing here uses the structured kernels, so it can serve as an
//! independent oracle for them.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::companion::Polynomial;
use crate::error::SolveError;
use crate::rng::SplitMix64;
use crate::rotation::{IndexedCore, UNIT_ROUNDOFF};
use crate::triangular::FactoredTriangular;

/// Largest dimension accepted by [`francis`].
pub const MAX_DENSE: usize = 512;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Product of the embedded cores in sequence order.
pub fn dense_from_cores(seq: &[IndexedCore], dim: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::identity(dim, dim);
    for g in seq {
        let (i, c, s) = (g.index, g.core.c, g.core.s);
        for r in 0..dim {
            let (x, y) = (m[(r, i)], m[(r, i + 1)]);
            m[(r, i)] = x * c + y * s;
            m[(r, i + 1)] = y * c.conj() - x * s;
        }
    }
    m
}

/// Dense `n × n` block of `C*(B + α e₀ yᵀ)`, with `y` recovered.
pub fn dense_triangular(r: &FactoredTriangular) -> Result<DMatrix<Complex64>, SolveError> {
    let n = r.n();
    Ok(r.to_dense_extended()?.view((0, 0), (n, n)).into_owned())
}

/// Companion matrix of `p/a_n`, ones on the subdiagonal, coefficients in the
/// last column.
pub fn companion_matrix(p: &Polynomial) -> DMatrix<Complex64> {
    let a = p.coeffs();
    let n = p.degree();
    let mut m = DMatrix::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = ONE;
    }
    for i in 0..n {
        m[(i, n - 1)] = -a[i] / a[n];
    }
    m
}

/// `‖U·Â·U* − A‖_F`.
pub fn matrix_backward_error(
    a: &DMatrix<Complex64>,
    u: &DMatrix<Complex64>,
    ahat: &DMatrix<Complex64>,
) -> f64 {
    (u * ahat * u.adjoint() - a).norm()
}

/// Plane rotation `[[c, s], [-s̄, c]]` with real `c`, mapping `(x, y)` to `(r, 0)`.
#[derive(Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    fn new(x: Complex64, y: Complex64) -> Self {
        let ax = x.norm();
        let ay = y.norm();
        if ay == 0.0 {
            return Self { c: 1.0, s: ZERO };
        }
        if ax == 0.0 {
            return Self {
                c: 0.0,
                s: y.conj() / ay,
            };
        }
        let nrm = ax.hypot(ay);
        Self {
            c: ax / nrm,
            s: (x / ax) * y.conj() / nrm,
        }
    }

    fn rows(&self, h: &mut DMatrix<Complex64>, i: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let (x, y) = (h[(i, j)], h[(i + 1, j)]);
            h[(i, j)] = x * self.c + self.s * y;
            h[(i + 1, j)] = y * self.c - self.s.conj() * x;
        }
    }

    fn cols(&self, h: &mut DMatrix<Complex64>, j: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let (x, y) = (h[(i, j)], h[(i, j + 1)]);
            h[(i, j)] = x * self.c + self.s.conj() * y;
            h[(i, j + 1)] = y * self.c - self.s * x;
        }
    }
}

fn shift_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    let x1 = (tr + disc) * 0.5;
    let x2 = (tr - disc) * 0.5;
    let (e1, e2) = ((x1 - d).norm(), (x2 - d).norm());
    if e1 < e2 || (e1 == e2 && (x1.re, x1.im) <= (x2.re, x2.im)) {
        x1
    } else {
        x2
    }
}

/// Result of a dense Francis run: `H = U·T·U*` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub eigenvalues: Vec<Complex64>,
    pub t: DMatrix<Complex64>,
    pub u: Option<DMatrix<Complex64>>,
    pub sweeps: usize,
}

/// Single-shift Wilkinson Francis QR on an upper Hessenberg matrix.
///
/// Uses 30 stagnant sweeps before failing and an exceptional random-phase
/// shift every 15.
pub fn francis(h: &DMatrix<Complex64>, accumulate: bool, seed: u64) -> Result<Schur, SolveError> {
    let n = h.nrows();
    assert!(n == h.ncols() && n <= MAX_DENSE, "dense oracle limited to square n <= {MAX_DENSE}");
    let mut h = h.clone();
    let mut u = accumulate.then(|| DMatrix::<Complex64>::identity(n, n));
    let mut rng = SplitMix64::new(seed);
    let mut sweeps = 0;
    let mut stagnant = 0;
    let mut hi = n.saturating_sub(1);
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let scale = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= UNIT_ROUNDOFF * scale || sub == 0.0 {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            stagnant = 0;
            continue;
        }
        if stagnant >= 30 {
            return Err(SolveError::NoConvergence {
                position: hi,
                sweeps: stagnant,
            });
        }
        stagnant += 1;
        let mu = if stagnant % 15 == 0 {
            let mut r = h[(hi, hi)].norm() + h[(hi, hi - 1)].norm();
            if r == 0.0 {
                r = h[(hi - 1, hi - 1)].norm() + h[(hi - 1, hi)].norm();
            }
            if r == 0.0 {
                r = 1.0;
            }
            Complex64::from_polar(r, 2.0 * std::f64::consts::PI * rng.next_f64())
        } else {
            shift_2x2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        sweeps += 1;

        let mut x = h[(lo, lo)] - mu;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            let g = Givens::new(x, y);
            let first = if k > lo { k - 1 } else { lo };
            g.rows(&mut h, k, first..n);
            g.cols(&mut h, k, 0..(k + 3).min(hi + 1));
            if let Some(u) = u.as_mut() {
                g.cols(u, k, 0..n);
            }
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
    let eigenvalues = (0..n).map(|k| h[(k, k)]).collect();
    Ok(Schur {
        eigenvalues,
        t: h,
        u,
        sweeps,
    })
}

/// Roots of `p` from the dense companion matrix.
pub fn dense_roots(p: &Polynomial, seed: u64) -> Result<Vec<Complex64>, SolveError> {
    let mut roots = if p.degree() == 0 {
        Vec::new()
    } else {
        francis(&companion_matrix(p), false, seed)?.eigenvalues
    };
    roots.extend(std::iter::repeat_n(ZERO, p.zero_roots()));
    Ok(roots)
}
