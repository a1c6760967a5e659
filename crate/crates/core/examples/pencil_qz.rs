//! A polynomial with a tiny leading coefficient, solved through the companion
//! pencil. Dividing by a_n would blow the coefficients up to 1e10.

use corechase::backerr::coefficient_backward_error;
use corechase::companion::{Polynomial, Scaling};
use corechase::qr::{solve_qr, SolveOptions};
use corechase::qz::solve_qz;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let coeffs = [-6.0, 11.0, -6.0, 1.0e-10];
    let p = Polynomial::from_real(&coeffs)?;
    let a: Vec<_> = p.coeffs().to_vec();
    let opts = SolveOptions::default();

    for scaling in [Scaling::Norm, Scaling::None] {
        let sol = solve_qz(&p, scaling, &opts)?;
        let e = coefficient_backward_error(&a, &sol.roots)?;
        println!("QZ {scaling:?}: scaled coefficient error {:e}", e.delta_a_scaled / p.norm());
        for z in &sol.roots {
            println!("  {z:.12}");
        }
    }

    let sol = solve_qr(&p, &opts)?;
    let e = coefficient_backward_error(&a, &sol.roots)?;
    println!("QR (monic): scaled coefficient error {:e}", e.delta_a_scaled / p.norm());
    Ok(())
}
