//! Operator route to the moments: the Jacobi operator, diagonal entries of its
//! powers, `D_n`, `M_n^(k)`, and an independent Gauss-quadrature oracle.

mod eigen;
mod moments;
mod operator;
pub(crate) mod poly;
mod quadrature;

pub use moments::{moment_reach, moment_reports, scaled_moment, scaled_moments, second_moment_dn, MomentReport};
pub(crate) use moments::{raw_trace_sums, unscaled_to_scaled};
pub use operator::{jacobi_matrix, TridiagonalOperator};
pub use quadrature::{gauss_rule, golub_welsch_weights, quadrature_moment, QuadratureRule};
pub(crate) use quadrature::quadrature_moment_with;
