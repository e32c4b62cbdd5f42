//! Gauss rules built from the recurrence, and the quadrature route to `M_n^(k)`.
//!
//! Nodes are the eigenvalues of the `m × m` Jacobi section. Weights use the
//! Christoffel form `w_i = 1 / Σ_{j<m} p_j(x_i)²`, evaluated in log space so
//! that rules with hundreds of nodes on unbounded supports keep their tail
//! weights instead of underflowing.

use crate::ensembles::RecurrenceTable;
use crate::error::{Error, Result};

use super::eigen::tridiagonal_eigen;
use super::moments::second_moment_dn;
use super::poly::log_sum_squares;

/// An `m`-point Gauss rule for the normalized weight, exact through degree `2m - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    /// May underflow to zero far in the tails; `log_weights` stays exact.
    pub weights: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn exactness_degree(&self) -> usize {
        2 * self.len() - 1
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss rule with `m` nodes. Requires `m ≤ table.n_max()`.
pub fn gauss_rule(table: &RecurrenceTable, m: usize) -> Result<QuadratureRule> {
    if m == 0 || m > table.n_max() {
        return Err(Error::range("opcore", format!("Gauss rule of {m} nodes needs n_max >= {m}, have {}", table.n_max())));
    }
    let (nodes, _) = tridiagonal_eigen(&table.beta()[..m], &table.alpha()[..m - 1], false)?;
    let log_weights: Vec<f64> = nodes.iter().map(|&x| -log_sum_squares(table, m, x)).collect();
    if log_weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::numeric("opcore", "non-finite Gauss weight"));
    }
    let weights = log_weights.iter().map(|w| w.exp()).collect();
    Ok(QuadratureRule { nodes, weights, log_weights })
}

/// Classical Golub–Welsch weights (squared first eigenvector components).
/// Underflows for large rules on unbounded supports; kept as a cross-check.
pub fn golub_welsch_weights(table: &RecurrenceTable, m: usize) -> Result<Vec<f64>> {
    if m == 0 || m > table.n_max() {
        return Err(Error::range("opcore", format!("Gauss rule of {m} nodes needs n_max >= {m}")));
    }
    let (_, first) = tridiagonal_eigen(&table.beta()[..m], &table.alpha()[..m - 1], true)?;
    Ok(first.expect("first row requested").iter().map(|z| z * z).collect())
}

/// `M_n^(k)` as `(1/(n D_n^{k/2})) Σ_j ∫ x^k p_j² ϖ`, integrated exactly by a
/// Gauss rule of `n + ⌈k/2⌉` nodes.
pub fn quadrature_moment(table: &RecurrenceTable, n: usize, k: usize) -> Result<f64> {
    let d_n = second_moment_dn(table, n)?;
    let rule = gauss_rule(table, n + k.div_ceil(2))?;
    quadrature_moment_with(&rule, table, n, k, d_n)
}

pub(crate) fn quadrature_moment_with(
    rule: &QuadratureRule,
    table: &RecurrenceTable,
    n: usize,
    k: usize,
    d_n: f64,
) -> Result<f64> {
    if 2 * rule.len() < k + 2 * n - 1 {
        return Err(Error::range("opcore", format!("{}-node rule is not exact for degree {}", rule.len(), k + 2 * (n - 1))));
    }
    let root = d_n.sqrt();
    let mut total = 0.0;
    for (&x, &lw) in rule.nodes.iter().zip(&rule.log_weights) {
        let mass = (lw + log_sum_squares(table, n, x)).exp();
        total += mass * (x / root).powi(k as i32);
    }
    Ok(total / n as f64)
}
