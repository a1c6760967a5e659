//! The three solvers on one random polynomial, with pairwise root distances.

use corechase::backerr::{matched_distance, random_poly};
use corechase::companion::Scaling;
use corechase::dense::dense_roots;
use corechase::qr::{solve_qr, SolveOptions};
use corechase::qz::solve_qz;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = random_poly(12, 2, 2024)?;
    let opts = SolveOptions::default();
    let qr = solve_qr(&p, &opts)?.roots;
    let qz = solve_qz(&p, Scaling::Norm, &opts)?.roots;
    let dense = dense_roots(&p, 0)?;
    println!("qr vs dense: {:e}", matched_distance(&qr, &dense));
    println!("qz vs dense: {:e}", matched_distance(&qz, &dense));
    println!("qr vs qz:    {:e}", matched_distance(&qr, &qz));
    Ok(())
}
