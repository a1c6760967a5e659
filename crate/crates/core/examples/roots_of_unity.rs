//! Roots of z^n - 1 with the companion QR solver.

use corechase::companion::Polynomial;
use corechase::qr::{solve_qr, SolveOptions};
use corechase::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(16);
    let mut coeffs = vec![0.0; n + 1];
    coeffs[0] = -1.0;
    coeffs[n] = 1.0;
    let p = Polynomial::from_real(&coeffs)?;
    let sol = solve_qr(&p, &SolveOptions::default())?;

    let mut worst: f64 = 0.0;
    for z in &sol.roots {
        // nearest n-th root of unity
        let k = (z.arg() * n as f64 / std::f64::consts::TAU).round();
        let exact = Complex64::from_polar(1.0, std::f64::consts::TAU * k / n as f64);
        worst = worst.max((z - exact).norm());
    }
    println!("degree {n}: {} roots, {} sweeps, {} turnovers", sol.roots.len(), sol.diagnostics.sweeps, sol.diagnostics.turnovers);
    println!("max distance to exact roots: {worst:e}");
    Ok(())
}
