//! Quadratic scaling of the structured solvers.

use corechase::backerr::Method;
use corechase::cli::time_solve;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut prev: Option<(f64, f64)> = None;
    for n in [128, 256, 512, 1024] {
        let qr = time_solve(Method::CompanionQr, n, 3, 0)?;
        let qz = time_solve(Method::CompanionQz, n, 3, 0)?;
        print!("n = {n:5}: QR {qr:.4}s  QZ {qz:.4}s  QZ/QR {:.2}", qz / qr);
        if let Some((pqr, pqz)) = prev {
            print!("  growth {:.2} / {:.2}", qr / pqr, qz / pqz);
        }
        println!();
        prev = Some((qr, qz));
    }
    Ok(())
}
