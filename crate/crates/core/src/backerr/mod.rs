//! Backward-error experiments: random test polynomials, coefficient
//! reconstruction from computed roots in extended precision, error metrics,
//! experiment grids and log-log slope fits.

pub mod ddouble;

use std::fmt;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::companion::{norm2, preprocess, Polynomial, Scaling};
use crate::dense::{companion_matrix, francis, matrix_backward_error};
use crate::error::{BackerrError, SolveError};
use crate::qr::{solve_qr, SolveOptions};
use crate::qz::solve_qz;
pub use crate::rng::SplitMix64;
use ddouble::{coeffs_from_roots_extended, DoubleDouble, ExtendedComplex};

pub const CSV_HEADER: &str = "method,degree,rho,seed,norm_a,delta_A,delta_a,delta_a_scaled,sweeps,status";

/// Random coefficients: modulus `|2μ−1|·10^{ρ(2η−1)}`, argument `2πν`, with
/// `μ, η, ν` uniform on `[0, 1)`. Ascending order, `degree + 1` entries.
pub fn random_coeffs(degree: usize, rho: u32, rng: &mut SplitMix64) -> Vec<Complex64> {
    (0..=degree)
        .map(|_| {
            let mu = rng.next_f64();
            let eta = rng.next_f64();
            let nu = rng.next_f64();
            let modulus = (2.0 * mu - 1.0).abs() * 10f64.powf(rho as f64 * (2.0 * eta - 1.0));
            Complex64::from_polar(modulus, 2.0 * std::f64::consts::PI * nu)
        })
        .collect()
}

/// [`random_coeffs`] passed through preprocessing.
pub fn random_poly(degree: usize, rho: u32, seed: u64) -> Result<Polynomial, SolveError> {
    let mut rng = SplitMix64::new(seed);
    Ok(preprocess(&random_coeffs(degree, rho, &mut rng))?)
}

/// Seed of one grid point, independent of the method so every method sees the
/// same polynomial.
pub fn sample_seed(seed: u64, degree: usize, rho: u32, sample: usize) -> u64 {
    let mut r = SplitMix64::new(seed);
    for v in [degree as u64, rho as u64, sample as u64] {
        r = SplitMix64::new(r.next_u64() ^ v.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    }
    r.next_u64()
}

/// Monic coefficients of `∏(z − rₖ)`, rounded to working precision.
pub fn coeffs_from_roots(roots: &[Complex64]) -> Result<Vec<Complex64>, BackerrError> {
    if roots.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(BackerrError::NonFinite);
    }
    let ext = coeffs_from_roots_extended(roots).ok_or(BackerrError::Overflow)?;
    Ok(ext.into_iter().map(|z| z.to_complex()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientError {
    /// `‖a − ã‖`.
    pub delta_a: f64,
    /// `min_γ ‖a − γã‖`.
    pub delta_a_scaled: f64,
    pub gamma: Complex64,
}

fn dist_scaled(a: &[Complex64], at: &[ExtendedComplex], gamma: Complex64) -> f64 {
    let g = ExtendedComplex::from(gamma);
    let diff: Vec<Complex64> = a
        .iter()
        .zip(at)
        .map(|(x, y)| (ExtendedComplex::from(*x) - g * *y).to_complex())
        .collect();
    norm2(&diff)
}

/// Backward error of computed roots against coefficients `a` (ascending,
/// `a.len() == roots.len() + 1`).
///
/// `ã` is the monic polynomial with the roots as exact zeros; differences are
/// formed before rounding. `delta_a` compares `a` with `a_n·ã`, so for monic
/// `a` it is `‖a − ã‖`.
pub fn coefficient_backward_error(a: &[Complex64], roots: &[Complex64]) -> Result<CoefficientError, BackerrError> {
    if a.len() != roots.len() + 1 {
        return Err(BackerrError::Degenerate(format!(
            "{} coefficients for {} roots",
            a.len(),
            roots.len()
        )));
    }
    if roots.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(BackerrError::NonFinite);
    }
    let at = coeffs_from_roots_extended(roots).ok_or(BackerrError::Overflow)?;
    let lead = a[a.len() - 1];
    let delta_a = dist_scaled(a, &at, lead);
    // γ = ⟨ã, a⟩ / ‖ã‖²
    let mut num = ExtendedComplex::ZERO;
    let mut den = DoubleDouble::ZERO;
    for (x, y) in a.iter().zip(&at) {
        let yc = ExtendedComplex { re: y.re, im: -y.im };
        num = num + yc * ExtendedComplex::from(*x);
        den = den + y.re * y.re + y.im * y.im;
    }
    let gamma = num.to_complex() / den.to_f64();
    let delta_a_scaled = dist_scaled(a, &at, gamma);
    Ok(CoefficientError {
        delta_a,
        delta_a_scaled,
        gamma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    CompanionQr,
    CompanionQz,
    CompanionQzUnscaled,
    DenseQr,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::CompanionQr,
        Method::CompanionQz,
        Method::CompanionQzUnscaled,
        Method::DenseQr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::CompanionQr => "companionQR",
            Method::CompanionQz => "companionQZ",
            Method::CompanionQzUnscaled => "companionQZ_unscaled",
            Method::DenseQr => "denseQR",
        }
    }

    /// QR-type methods are judged by `‖a − ã‖` on the monic polynomial, QZ
    /// by the optimally scaled error on the raw coefficients.
    pub fn metric(self, r: &Report) -> f64 {
        match self {
            Method::CompanionQr | Method::DenseQr => r.delta_a,
            Method::CompanionQz | Method::CompanionQzUnscaled => r.delta_a_scaled,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    NoConv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub method: Method,
    pub degree: usize,
    pub rho: u32,
    pub seed: u64,
    pub norm_a: f64,
    pub delta_big_a: Option<f64>,
    pub delta_a: f64,
    pub delta_a_scaled: f64,
    pub sweeps: usize,
    pub status: Status,
}

fn fmt_f(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:e}")
    }
}

impl Report {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.degree,
            self.rho,
            self.seed,
            fmt_f(self.norm_a),
            self.delta_big_a.map(fmt_f).unwrap_or_default(),
            fmt_f(self.delta_a),
            fmt_f(self.delta_a_scaled),
            self.sweeps,
            match self.status {
                Status::Ok => "ok",
                Status::NoConv => "noconv",
            }
        )
    }
}

struct Outcome {
    roots: Vec<Complex64>,
    sweeps: usize,
    delta_big_a: Option<f64>,
}

fn solve_with(method: Method, p: &Polynomial, accumulate: bool, seed: u64) -> Result<Outcome, SolveError> {
    let opts = SolveOptions {
        accumulate,
        seed,
        ..Default::default()
    };
    match method {
        Method::CompanionQr | Method::CompanionQz | Method::CompanionQzUnscaled => {
            let s = match method {
                Method::CompanionQr => solve_qr(p, &opts)?,
                Method::CompanionQz => solve_qz(p, Scaling::Norm, &opts)?,
                _ => solve_qz(p, Scaling::None, &opts)?,
            };
            Ok(Outcome {
                roots: s.roots,
                sweeps: s.diagnostics.sweeps,
                delta_big_a: s.diagnostics.matrix_backward_error,
            })
        }
        Method::DenseQr => {
            let mut roots = Vec::new();
            let mut sweeps = 0;
            let mut delta_big_a = None;
            if p.degree() == 1 {
                roots.push(-p.coeffs()[0] / p.coeffs()[1]);
            } else if p.degree() > 1 {
                let c = companion_matrix(p);
                let s = francis(&c, accumulate, seed)?;
                if let Some(u) = &s.u {
                    delta_big_a = Some(matrix_backward_error(&c, u, &s.t));
                }
                sweeps = s.sweeps;
                roots = s.eigenvalues;
            }
            roots.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), p.zero_roots()));
            Ok(Outcome {
                roots,
                sweeps,
                delta_big_a,
            })
        }
    }
}

/// Solve one polynomial with one method and measure its backward errors.
pub fn run_method(method: Method, p: &Polynomial, rho: u32, seed: u64, accumulate: bool) -> Report {
    // full coefficient vector including stripped zero roots
    let mut a = vec![Complex64::new(0.0, 0.0); p.zero_roots()];
    a.extend_from_slice(p.coeffs());
    let monic_qr = matches!(method, Method::CompanionQr | Method::DenseQr);
    if monic_qr {
        let lead = a[a.len() - 1];
        a.iter_mut().for_each(|z| *z /= lead);
    }
    let mut report = Report {
        method,
        degree: a.len() - 1,
        rho,
        seed,
        norm_a: norm2(&a),
        delta_big_a: None,
        delta_a: f64::NAN,
        delta_a_scaled: f64::NAN,
        sweeps: 0,
        status: Status::NoConv,
    };
    if let Ok(out) = solve_with(method, p, accumulate, seed) {
        report.sweeps = out.sweeps;
        report.delta_big_a = out.delta_big_a;
        if let Ok(e) = coefficient_backward_error(&a, &out.roots) {
            report.delta_a = e.delta_a;
            report.delta_a_scaled = e.delta_a_scaled;
            report.status = Status::Ok;
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub degrees: Vec<usize>,
    pub rhos: Vec<u32>,
    pub samples: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    /// Also measure the matrix backward error (dense accumulation).
    pub accumulate: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            degrees: vec![50],
            rhos: (1..=12).collect(),
            samples: 100,
            methods: vec![Method::CompanionQr],
            seed: 0,
            accumulate: false,
        }
    }
}

/// Run the full grid, in parallel; rows come back in grid order
/// (method, degree, rho, sample).
pub fn run_experiment(cfg: &ExperimentConfig) -> Vec<Report> {
    let mut points = Vec::new();
    for &m in &cfg.methods {
        for &d in &cfg.degrees {
            for &r in &cfg.rhos {
                for s in 0..cfg.samples {
                    points.push((m, d, r, sample_seed(cfg.seed, d, r, s)));
                }
            }
        }
    }
    points
        .into_par_iter()
        .map(|(m, d, r, seed)| match random_poly(d, r, seed) {
            Ok(p) => run_method(m, &p, r, seed, cfg.accumulate),
            Err(_) => Report {
                method: m,
                degree: d,
                rho: r,
                seed,
                norm_a: f64::NAN,
                delta_big_a: None,
                delta_a: f64::NAN,
                delta_a_scaled: f64::NAN,
                sweeps: 0,
                status: Status::NoConv,
            },
        })
        .collect()
}

pub fn write_csv<W: Write>(mut w: W, reports: &[Report]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn write_csv_file(path: &Path, reports: &[Report]) -> Result<(), BackerrError> {
    let io = |source| BackerrError::Io {
        path: path.display().to_string(),
        source,
    };
    let f = std::fs::File::create(path).map_err(io)?;
    let mut w = std::io::BufWriter::new(f);
    write_csv(&mut w, reports).map_err(io)?;
    w.flush().map_err(io)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slope {
    pub slope: f64,
    pub stderr: f64,
    /// Number of decade maxima used in the fit.
    pub decades: usize,
}

/// Least-squares slope of `log y` against `log x` over the upper envelope:
/// the largest `y` in each decade of `x`.
/// Decades holding fewer samples than this are left out of the envelope.
pub const MIN_PER_DECADE: usize = 5;

pub fn loglog_slope(points: &[(f64, f64)]) -> Result<Slope, BackerrError> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    if pts.len() < 10 {
        return Err(BackerrError::Degenerate(format!("{} usable points, need 10", pts.len())));
    }
    let mut env: std::collections::BTreeMap<i64, (f64, f64, usize)> = Default::default();
    for (lx, ly) in pts {
        let k = lx.floor() as i64;
        let e = env.entry(k).or_insert((lx, ly, 0));
        e.2 += 1;
        if ly > e.1 {
            e.0 = lx;
            e.1 = ly;
        }
    }
    env.retain(|_, e| e.2 >= MIN_PER_DECADE);
    let m = env.len();
    if m < 2 {
        return Err(BackerrError::Degenerate("x spans less than two decades".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = env.values().map(|e| (e.0, e.1)).unzip();
    let mx = xs.iter().sum::<f64>() / m as f64;
    let my = ys.iter().sum::<f64>() / m as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(BackerrError::Degenerate("no spread in x".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let stderr = if m > 2 {
        let rss: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
            .sum();
        (rss / (m - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ok(Slope {
        slope,
        stderr,
        decades: m,
    })
}

/// Minimum-cost assignment (Hungarian method) for a square cost matrix;
/// returns `assign[i] = j`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Largest distance under an optimal matching of two root sets of equal size.
///
/// Hungarian assignment up to 64 roots, greedy nearest matching beyond.
pub fn matched_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "root sets differ in size");
    if a.len() <= 64 {
        let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
        let assign = hungarian(&cost);
        return assign
            .iter()
            .enumerate()
            .map(|(i, &j)| cost[i][j])
            .fold(0.0, f64::max);
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let mut best = (usize::MAX, f64::INFINITY);
        for (j, y) in b.iter().enumerate() {
            let d = (x - y).norm();
            if !used[j] && d < best.1 {
                best = (j, d);
            }
        }
        used[best.0] = true;
        worst = worst.max(best.1);
    }
    worst
}
