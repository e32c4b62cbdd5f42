//! Level densities of unitary random-matrix ensembles by the operator method.
//!
//! The crate computes the scaled moments `M_n^(k)` of the one-level density
//! from the Jacobi operator of the ensemble's orthonormal polynomials, their
//! closed-form limits, the scaled densities themselves, the effect of a
//! polynomial perturbation of the weight, and Monte Carlo spectra to compare
//! against.
//!
//! Modules:
//! - [`ensembles`]: presets, recurrence tables, weights and growth parameters
//! - [`opcore`]: Jacobi operator, `D_n`, `M_n^(k)`, Gauss-rule oracle
//! - [`density`]: `R_n¹`, `σ_n` and its distribution function
//! - [`limits`]: `M^(k)` and the semicircle, Laguerre and arcsine laws
//! - [`perturb`]: orthonormal polynomials of `p²ϖ` and the perturbation gap
//! - [`montecarlo`]: GUE/LAUE/JUE eigenvalue samples and KS distances
//! - [`cli`]: the `level-density` command line front end
//! - [`acceptance`]: the end-to-end verification checks behind `report`

pub mod acceptance;
pub mod cli;
pub mod density;
pub mod ensembles;
mod error;
pub mod integrate;
pub mod limits;
pub mod montecarlo;
pub mod opcore;
pub mod perturb;

pub use error::{Error, Result};
