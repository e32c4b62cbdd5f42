//! Overflow-safe evaluation of orthonormal polynomials through the three-term
//! recurrence. Values are carried as `mantissa · e^{scale}` with the scale
//! bumped whenever the mantissa grows past [`RESCALE_AT`].

use crate::ensembles::RecurrenceTable;

const RESCALE_AT: f64 = 1e100;

/// `ln Σ_{j<count} p_j(x)²`.
///
/// Uses `α_j, β_j` for `j ≤ count - 2`.
pub(crate) fn log_sum_squares(table: &RecurrenceTable, count: usize, x: f64) -> f64 {
    debug_assert!(count >= 1 && count <= table.n_max() + 2);
    let (alpha, beta) = (table.alpha(), table.beta());
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut sum = 1.0;
    let mut log_scale = 0.0;
    for j in 0..count - 1 {
        let gamma = if j == 0 { 0.0 } else { alpha[j - 1] };
        let next = ((x - beta[j]) * cur - gamma * prev) / alpha[j];
        prev = cur;
        cur = next;
        sum += cur * cur;
        if cur.abs() > RESCALE_AT {
            let c = 1.0 / RESCALE_AT;
            prev *= c;
            cur *= c;
            sum *= c * c;
            log_scale += RESCALE_AT.ln();
        }
    }
    sum.ln() + 2.0 * log_scale
}

/// `p_j(x) · e^{shift}` for `j < count`, where `shift` is typically `ln √ϖ(x)`
/// or the log of a quadrature weight's square root. Entries whose magnitude
/// underflows come back as zero.
pub(crate) fn shifted_values(table: &RecurrenceTable, count: usize, x: f64, shift: f64) -> Vec<f64> {
    debug_assert!(count >= 1 && count <= table.n_max() + 2);
    let (alpha, beta) = (table.alpha(), table.beta());
    let mut out = Vec::with_capacity(count);
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut log_scale = shift;
    out.push(shift.exp());
    for j in 0..count - 1 {
        let gamma = if j == 0 { 0.0 } else { alpha[j - 1] };
        let next = ((x - beta[j]) * cur - gamma * prev) / alpha[j];
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            prev /= RESCALE_AT;
            cur /= RESCALE_AT;
            log_scale += RESCALE_AT.ln();
        }
        out.push(cur * log_scale.exp());
    }
    out
}
