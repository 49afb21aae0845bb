//! Shared numerical kernels: quadrature, interpolation, tridiagonal and small
//! dense solves, scalar root finding, and basic sample statistics.

pub mod interp;
pub mod linalg;
pub mod quad;
pub mod rootfind;
pub mod stats;
pub mod tridiag;
