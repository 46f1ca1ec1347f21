//! Ultraspherical spectral method for linear ODEs on `[-1, 1]`.
//!
//! The crate builds the banded differentiation, conversion and multiplication
//! operators, borders them with boundary rows into an almost-banded system,
//! solves it by a structure-preserving Givens QR and measures the error and
//! conditioning of the result at binary64 against a software-float reference.
//!
//! ```
//! use ultraspherical::{assemble, problem::airy_problem, solve};
//!
//! let p = airy_problem("1e-2").unwrap().instantiate::<f64>().unwrap();
//! let sys = assemble(&p, 100).unwrap();
//! let u = solve(&sys.a, &sys.f).unwrap();
//! let at_zero = ultraspherical::UltrasphericalSeries::chebyshev(u).eval(&0.0);
//! assert!((at_zero - 0.3550280538878172).abs() < 1e-12);
//! ```

#![allow(clippy::needless_range_loop)]

pub mod assembly;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod problem;
pub mod scalar;
pub mod series;
pub mod special;

pub use assembly::{assemble, hessenberg_index, AlmostBandedMatrix, AssembledSystem, OdeProblem};
pub use error::{Error, Result};
pub use linalg::{qr_factor, solve, QrFactorization};
pub use problem::ProblemSpec;
pub use scalar::{Extended, PrecisionLevel, Real};
pub use series::{BoundaryFunctional, Endpoint, UltrasphericalSeries};
