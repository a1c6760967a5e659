//! Polynomial rootfinding by core-chasing QR on a factored companion matrix and
//! core-chasing QZ on a factored companion pencil.
//!
//! Both solvers store the problem in O(n) memory and run in O(n²) flops. The
//! crate also ships a dense reference solver and tools for measuring backward
//! errors.

pub mod backerr;
pub mod cli;
pub mod companion;
pub mod dense;
pub mod error;
pub mod qr;
pub mod qz;
pub mod rng;
pub mod rotation;
pub mod triangular;

pub use error::{BackerrError, InputError, RotationError, SolveError, TriangularError};
pub use num_complex::Complex64;
pub use rotation::{Core, UNIT_ROUNDOFF};
