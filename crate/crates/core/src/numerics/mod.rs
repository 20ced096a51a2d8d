//! Special functions and small dense linear algebra.
//!
//! Everything here is implemented in-crate with stated accuracy targets;
//! the test tree carries an independent oracle for each routine.

mod eigen;
mod gamma;
mod normal;

pub use eigen::{min_eigenvalue, symmetric_eigenvalue_bounds, SymmetricMatrix};
pub use gamma::{chi2_cdf, chi2_quantile, ln_gamma, regularized_lower_gamma};
pub use normal::{erfc, normal_cdf};
