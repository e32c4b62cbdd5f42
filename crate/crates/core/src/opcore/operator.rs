//! The Jacobi operator: multiplication by `x` in the orthonormal basis.
//!
//! Row `j` of the matrix holds the descending (`γ_j = α_{j-1}`), equilibrating
//! (`β_j`) and ascending (`α_j`) coefficients, so `(J^k)_{jj}` is a sum over
//! weighted lattice paths of length `k` that start and end at level `j`.

use crate::ensembles::RecurrenceTable;
use crate::error::{Error, Result};

use super::eigen::tridiagonal_eigen;

/// A finite section of the Jacobi operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalOperator {
    /// `offdiag[j]` couples `j` and `j + 1`, so it must be one shorter than `diag`.
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return Err(Error::range(
                "opcore",
                format!("tridiagonal operator needs size >= 1 and size - 1 couplings, got {} and {}", diag.len(), offdiag.len()),
            ));
        }
        Ok(TridiagonalOperator { diag, offdiag })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// `J v` for a full-length vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.size());
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.offdiag[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(tridiagonal_eigen(&self.diag, &self.offdiag, false)?.0)
    }

    fn require_reach(&self, j: usize, k: usize) -> Result<()> {
        let needed = j + k.div_ceil(2) + 1;
        if self.size() < needed {
            return Err(Error::range(
                "opcore",
                format!("(J^{k})_{{{j}{j}}} needs an operator of size {needed}, have {}", self.size()),
            ));
        }
        Ok(())
    }

    /// `(J^k)_{jj}` by repeated banded products.
    ///
    /// `J^h e_j` is supported on `[j-h, j+h]`; for `k = 2h` the entry is
    /// `|J^h e_j|²`, for `k = 2h+1` it is `⟨J^h e_j, J^{h+1} e_j⟩`.
    pub fn trace_power_diag(&self, j: usize, k: usize) -> Result<f64> {
        self.require_reach(j, k)?;
        Ok(self.diagonal_powers(j, k)[k])
    }

    /// `(J^m)_{jj}` for every `m ≤ k_max` in one pass.
    pub(crate) fn diagonal_powers(&self, j: usize, k_max: usize) -> Vec<f64> {
        let half = k_max.div_ceil(2);
        let lo = j.saturating_sub(half);
        let hi = (j + half).min(self.size() - 1);
        let width = hi - lo + 1;

        // powers[h][i - lo] = (J^h e_j)_i
        let mut powers: Vec<Vec<f64>> = Vec::with_capacity(half + 1);
        let mut v = vec![0.0; width];
        v[j - lo] = 1.0;
        powers.push(v);
        for h in 1..=half {
            let prev = &powers[h - 1];
            let from = j.saturating_sub(h - 1).max(lo);
            let to = (j + h - 1).min(hi);
            let mut next = vec![0.0; width];
            for i in from..=to {
                let x = prev[i - lo];
                next[i - lo] += self.diag[i] * x;
                if i > lo {
                    next[i - 1 - lo] += self.offdiag[i - 1] * x;
                }
                if i < hi {
                    next[i + 1 - lo] += self.offdiag[i] * x;
                }
            }
            powers.push(next);
        }
        (0..=k_max)
            .map(|m| {
                let (a, b) = (m / 2, m - m / 2);
                powers[a].iter().zip(&powers[b]).map(|(x, y)| x * y).sum()
            })
            .collect()
    }

    /// `(J^k)_{jj}` by explicit enumeration of returning paths with steps
    /// up (`α_i`), level (`β_i`) and down (`γ_i = α_{i-1}`, `γ_0 = 0`).
    /// Cost grows like `3^k`; meant for cross-checks at small `k`.
    pub fn trace_power_diag_paths(&self, j: usize, k: usize) -> Result<f64> {
        self.require_reach(j, k)?;
        Ok(self.paths_from(j, j, k))
    }

    fn paths_from(&self, level: usize, target: usize, steps: usize) -> f64 {
        if level.abs_diff(target) > steps {
            return 0.0;
        }
        if steps == 0 {
            return 1.0;
        }
        let mut total = self.diag[level] * self.paths_from(level, target, steps - 1);
        if level + 1 < self.size() {
            total += self.offdiag[level] * self.paths_from(level + 1, target, steps - 1);
        }
        if level > 0 {
            total += self.offdiag[level - 1] * self.paths_from(level - 1, target, steps - 1);
        }
        total
    }
}

/// The leading `size × size` section: `diag[j] = β_j`, `offdiag[j] = α_j`.
pub fn jacobi_matrix(table: &RecurrenceTable, size: usize) -> Result<TridiagonalOperator> {
    if size == 0 || size > table.n_max() + 1 {
        return Err(Error::range(
            "opcore",
            format!("Jacobi section of size {size} needs table rows 0..{size}, table has {}", table.n_max() + 1),
        ));
    }
    TridiagonalOperator::new(table.beta()[..size].to_vec(), table.alpha()[..size - 1].to_vec())
}
