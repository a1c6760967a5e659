//! Turnover and fusion on single cores, checked against dense 3x3 products.

use corechase::rotation::{fuse, make_core, turnover, Core};
use corechase::Complex64;
use nalgebra::Matrix3;

fn embed(g: Core, at: usize) -> Matrix3<Complex64> {
    let mut m = Matrix3::identity();
    let d = g.dense();
    for i in 0..2 {
        for j in 0..2 {
            m[(at + i, at + j)] = d[i][j];
        }
    }
    m
}

fn main() {
    let (a, _) = make_core(Complex64::new(0.3, -0.4), Complex64::new(0.8, 0.0));
    let (b, _) = make_core(Complex64::new(-1.0, 0.2), Complex64::new(0.5, 0.1));
    let (c, _) = make_core(Complex64::new(0.1, 0.9), Complex64::new(-0.3, 0.0));

    // a at rows 0-1, b at rows 1-2, c at rows 0-1 becomes d at 1-2, e at 0-1, f at 1-2
    let before = embed(a, 0) * embed(b, 1) * embed(c, 0);
    let (d, e, f) = turnover(a, b, c);
    let after = embed(d, 1) * embed(e, 0) * embed(f, 1);
    println!("turnover residual: {:e}", (before - after).norm());
    println!("sine products: {:e} vs {:e}", a.s * b.s, e.s * f.s);

    let fused = fuse(a, c);
    let phase = Matrix3::from_diagonal(&nalgebra::Vector3::new(fused.phase, fused.phase.conj(), Complex64::new(1.0, 0.0)));
    let err = (embed(a, 0) * embed(c, 0) - embed(fused.core, 0) * phase).norm();
    println!("fusion residual: {err:e}");
}
