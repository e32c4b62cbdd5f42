//! Second moment `D_n` and the scaled moments `M_n^(k)`.

use serde::{Deserialize, Serialize};

use crate::ensembles::{growth_parameters, recurrence_coefficients, EnsembleSpec, RecurrenceTable};
use crate::error::{Error, Result};
use crate::limits::limit_moment;

use super::operator::jacobi_matrix;

/// `D_n = (1/n) [ Σ_{j≤n-2} (2α_j² + β_j²) + α_{n-1}² + β_{n-1}² ]`, the second
/// moment of `R_n¹ / n`.
pub fn second_moment_dn(table: &RecurrenceTable, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::range("opcore", "D_n needs n >= 1"));
    }
    table.require(n - 1, "D_n")?;
    let (alpha, beta) = (table.alpha(), table.beta());
    let mut sum = 0.0;
    for j in 0..n - 1 {
        sum += 2.0 * alpha[j] * alpha[j] + beta[j] * beta[j];
    }
    sum += alpha[n - 1] * alpha[n - 1] + beta[n - 1] * beta[n - 1];
    Ok(sum / n as f64)
}

/// Highest recurrence index touched by `M_n^(k)`.
pub fn moment_reach(n: usize, k: usize) -> usize {
    n - 1 + k.div_ceil(2)
}

/// `M_n^(k) = (1 / (n D_n^{k/2})) Σ_{j<n} (J^k)_{jj}`.
pub fn scaled_moment(table: &RecurrenceTable, n: usize, k: usize) -> Result<f64> {
    Ok(scaled_moments(table, n, k)?[k])
}

/// `M_n^(m)` for every `m ≤ k_max`, sharing one pass over `j`.
/// The sum over `j` runs in ascending order.
pub fn scaled_moments(table: &RecurrenceTable, n: usize, k_max: usize) -> Result<Vec<f64>> {
    unscaled_to_scaled(raw_trace_sums(table, n, k_max)?, n, second_moment_dn(table, n)?)
}

/// `Σ_{j<n} (J^m)_{jj}` for `m ≤ k_max`.
pub(crate) fn raw_trace_sums(table: &RecurrenceTable, n: usize, k_max: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::range("opcore", "moments need n >= 1"));
    }
    let reach = moment_reach(n, k_max);
    table.require(reach, &format!("M_{n}^({k_max})"))?;
    let op = jacobi_matrix(table, reach + 1)?;
    let mut sums = vec![0.0; k_max + 1];
    for j in 0..n {
        for (s, v) in sums.iter_mut().zip(op.diagonal_powers(j, k_max)) {
            *s += v;
        }
    }
    Ok(sums)
}

pub(crate) fn unscaled_to_scaled(sums: Vec<f64>, n: usize, d_n: f64) -> Result<Vec<f64>> {
    if !(d_n > 0.0) {
        return Err(Error::numeric("opcore", format!("D_n must be positive, got {d_n}")));
    }
    let root = d_n.sqrt();
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(k, s)| if k == 0 { 1.0 } else { s / (n as f64 * root.powi(k as i32)) })
        .collect())
}

/// One `(n, k)` observation: finite-`n` moment next to its limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub ensemble: String,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "D_n")]
    pub d_n: f64,
    #[serde(rename = "M_n_k")]
    pub m_n_k: f64,
    #[serde(rename = "M_limit")]
    pub m_limit: f64,
    pub gap: f64,
}

impl MomentReport {
    pub const CSV_HEADER: [&'static str; 7] = ["ensemble", "n", "k", "D_n", "M_n_k", "M_limit", "gap"];

    pub fn new(ensemble: impl Into<String>, n: usize, k: usize, d_n: f64, m_n_k: f64, m_limit: f64) -> Self {
        MomentReport { ensemble: ensemble.into(), n, k, d_n, m_n_k, m_limit, gap: (m_n_k - m_limit).abs() }
    }
}

/// Reports for every `(n, k)` pair, one recurrence table shared by all rows.
pub fn moment_reports(spec: &EnsembleSpec, ns: &[usize], ks: &[usize]) -> Result<Vec<MomentReport>> {
    let params = growth_parameters(spec)?;
    let n_top = ns.iter().copied().max().unwrap_or(1);
    let k_top = ks.iter().copied().max().unwrap_or(0);
    if ns.contains(&0) {
        return Err(Error::range("opcore", "n must be >= 1"));
    }
    let table = recurrence_coefficients(spec, moment_reach(n_top, k_top).max(1))?;
    let limits = ks.iter().map(|&k| limit_moment(&params, k)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(ns.len() * ks.len());
    for &n in ns {
        let d_n = second_moment_dn(&table, n)?;
        let moments = scaled_moments(&table, n, k_top)?;
        for (&k, &m_limit) in ks.iter().zip(&limits) {
            rows.push(MomentReport::new(spec.name(), n, k, d_n, moments[k], m_limit));
        }
    }
    Ok(rows)
}
