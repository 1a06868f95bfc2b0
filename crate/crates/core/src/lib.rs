//! Liouville and weighted Liouville operators over a truncated Hardy space.
//!
//! Functions in H²(𝔻) are represented by their Taylor coefficients up to an explicit
//! truncation order `N`; operators become dense `(N+1)×(N+1)` complex matrices in the
//! monomial basis. The crate covers
//!
//! - [`series`]: coefficient arithmetic, reproducing kernels, boundary sampling and the
//!   `P_{H²}` projection, outer functions;
//! - [`liouville`]: operator matrices for `A_f`, `A_{f,a}` and `A_{f,φ}`, adjoints computed
//!   both as conjugate transposes and through the boundary formula, Smirnov decompositions;
//! - [`spectral`]: eigen-decomposition of truncations and explicit eigenfunctions;
//! - [`boundary_analysis`]: boundedness, compactness and Hilbert–Schmidt probes for
//!   weighted operators;
//! - [`occupation`]: trajectories, RK4 integration and occupation kernels;
//! - [`dmd`]: finite-rank identification of `A_f*` from trajectory data;
//! - [`certify`]: the end-to-end numerical certificates.

pub mod boundary_analysis;
pub mod certify;
pub mod dmd;
pub mod error;
pub mod liouville;
pub mod occupation;
pub mod series;
pub mod spectral;

pub use error::{HardyError, Result};
pub use num_complex::Complex64;
pub use series::{inner_product, BoundaryGrid, KernelSpec, TaylorPolynomial, Tolerance};
