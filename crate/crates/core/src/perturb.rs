//! Polynomial perturbations of the weight: `ϖ̂ = p² ϖ / ∫p²ϖ`.
//!
//! The perturbed recurrence comes from a Stieltjes (Lanczos) sweep over a
//! base Gauss rule large enough that every inner product is exact. The
//! polynomials `p̂_j` live only as their values at the rule's nodes, each node
//! carrying its own log scale so tail nodes neither overflow nor underflow.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensembles::{recurrence_coefficients, EnsembleSpec, RecurrenceTable};
use crate::error::{Error, Result};
use crate::opcore::poly::shifted_values;
use crate::opcore::{gauss_rule, moment_reach, raw_trace_sums, second_moment_dn, unscaled_to_scaled, QuadratureRule};

const MODULE: &str = "perturb";

pub const MAX_DEGREE: usize = 8;

/// Largest overlap with the two previous vectors tolerated before re-orthogonalization.
pub const ORTHOGONALITY_GUARD: f64 = 1e-7;

const RESCALE_AT: f64 = 1e100;

/// Coefficients of `p`, constant term first.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    coefficients: Vec<f64>,
}

impl PerturbationSpec {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        let Some(&lead) = coefficients.last() else {
            return Err(Error::domain(MODULE, "perturbation needs at least one coefficient"));
        };
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain(MODULE, "perturbation coefficients must be finite"));
        }
        if lead == 0.0 {
            return Err(Error::domain(MODULE, "leading coefficient must be nonzero"));
        }
        if coefficients.len() - 1 > MAX_DEGREE {
            return Err(Error::domain(
                MODULE,
                format!("degree {} exceeds the supported maximum {MAX_DEGREE}", coefficients.len() - 1),
            ));
        }
        Ok(PerturbationSpec { coefficients })
    }

    /// `"c0,c1,..."`.
    pub fn parse(text: &str) -> Result<Self> {
        let coefficients = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::usage(MODULE, format!("bad perturbation coefficient {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coefficients)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

impl fmt::Display for PerturbationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coefficients.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for PerturbationSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Recurrence of the orthonormal family for `p²ϖ`.
#[derive(Debug, Clone)]
pub struct PerturbedBasis {
    pub base: EnsembleSpec,
    pub perturbation: PerturbationSpec,
    pub table_hat: RecurrenceTable,
    /// `∫ p² ϖ` against the normalized base weight.
    pub normalization: f64,
}

/// Builds `α̂_j, β̂_j` for `j ≤ n_max`.
pub fn modified_recurrence(spec: &EnsembleSpec, p: &PerturbationSpec, n_max: usize) -> Result<PerturbedBasis> {
    spec.validate()?;
    let m = rule_size(n_max, p.degree());
    let base_table = recurrence_coefficients(spec, m)?;
    let rule = gauss_rule(&base_table, m)?;
    let normalization = weighted_norm(&rule, p);
    if !(normalization > 0.0 && normalization.is_finite()) {
        return Err(Error::numeric(MODULE, format!("∫p²ϖ = {normalization} is not a positive number")));
    }
    let table_hat = if p.degree() == 0 {
        // A constant factor cancels under normalization.
        base_table.truncated(n_max + 1)?
    } else {
        stieltjes(&rule, p, normalization, n_max)?
    };
    Ok(PerturbedBasis { base: spec.clone(), perturbation: p.clone(), table_hat, normalization })
}

// Every inner product in the sweep has degree at most 2(n_max + 1) + 2l; twice
// the minimal node count keeps the extreme nodes away from the active range.
fn rule_size(n_max: usize, degree: usize) -> usize {
    2 * (n_max + degree + 2)
}

fn weighted_norm(rule: &QuadratureRule, p: &PerturbationSpec) -> f64 {
    rule.nodes
        .iter()
        .zip(&rule.log_weights)
        .map(|(&x, &lw)| {
            let v = p.eval(x);
            (lw + 2.0 * v.abs().ln()).exp()
        })
        .sum()
}

// Vector entries are `u_i · e^{L_i}`; `f_i = e^{2 L_i}` weights the inner products.
struct NodeScales {
    log_scale: Vec<f64>,
    factor: Vec<f64>,
}

impl NodeScales {
    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.factor).map(|((x, y), f)| x * y * f).sum()
    }
}

fn stieltjes(rule: &QuadratureRule, p: &PerturbationSpec, normalization: f64, n_max: usize) -> Result<RecurrenceTable> {
    let m = rule.len();
    let x = &rule.nodes;
    let root = normalization.sqrt();
    let log_scale: Vec<f64> = rule.log_weights.iter().map(|lw| 0.5 * lw).collect();
    let factor = log_scale.iter().map(|l| (2.0 * l).exp()).collect();
    let mut scales = NodeScales { log_scale, factor };
    let mut prev = vec![0.0; m];
    let mut cur: Vec<f64> = x.iter().map(|&xi| p.eval(xi) / root).collect();
    let mut alpha = Vec::with_capacity(n_max + 1);
    let mut beta = Vec::with_capacity(n_max + 1);
    for j in 0..=n_max {
        let xq: Vec<f64> = x.iter().zip(&cur).map(|(xi, c)| xi * c).collect();
        let b = scales.dot(&xq, &cur);
        let a_prev = if j == 0 { 0.0 } else { alpha[j - 1] };
        let mut v: Vec<f64> = xq.iter().zip(&cur).zip(&prev).map(|((w, c), q)| w - b * c - a_prev * q).collect();
        let mut norm = scales.dot(&v, &v).sqrt();
        // One re-orthogonalization pass against the two previous vectors.
        let c_cur = scales.dot(&v, &cur);
        let c_prev = if j == 0 { 0.0 } else { scales.dot(&v, &prev) };
        let overlap = c_cur.abs().max(c_prev.abs()) / norm;
        if !(overlap <= ORTHOGONALITY_GUARD) {
            return Err(Error::Conditioning { degree: j + 1, overlap });
        }
        for i in 0..m {
            v[i] -= c_cur * cur[i] + c_prev * prev[i];
        }
        norm = scales.dot(&v, &v).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::numeric(MODULE, format!("vanishing norm at degree {}", j + 1)));
        }
        alpha.push(norm);
        beta.push(b + c_cur);
        v.iter_mut().for_each(|vi| *vi /= norm);
        prev = std::mem::replace(&mut cur, v);
        rescale(&mut scales, &mut cur, &mut prev);
    }
    RecurrenceTable::new(alpha, beta)
}

fn rescale(scales: &mut NodeScales, cur: &mut [f64], prev: &mut [f64]) {
    for i in 0..cur.len() {
        if cur[i].abs() > RESCALE_AT {
            cur[i] /= RESCALE_AT;
            prev[i] /= RESCALE_AT;
            scales.log_scale[i] += RESCALE_AT.ln();
            scales.factor[i] = (2.0 * scales.log_scale[i]).exp();
        }
    }
}

impl PerturbedBasis {
    /// Largest `|G_ij - δ_ij|` of the Gram matrix of `p̂_0, ..., p̂_jmax` against
    /// `p²ϖ/∫p²ϖ`, evaluated on a fresh base Gauss rule through `table_hat`.
    pub fn gram_deviation(&self, j_max: usize) -> Result<f64> {
        self.table_hat.require(j_max, "Gram check")?;
        let m = j_max + self.perturbation.degree() + 2;
        let base_table = recurrence_coefficients(&self.base, m)?;
        let rule = gauss_rule(&base_table, m)?;
        let log_norm = self.normalization.ln();
        let mut gram = vec![vec![0.0; j_max + 1]; j_max + 1];
        for (&x, &lw) in rule.nodes.iter().zip(&rule.log_weights) {
            let shift = 0.5 * (lw - log_norm) + self.perturbation.eval(x).abs().ln();
            let v = shifted_values(&self.table_hat, j_max + 1, x, shift);
            for a in 0..=j_max {
                for b in 0..=a {
                    gram[a][b] += v[a] * v[b];
                }
            }
        }
        let mut worst = 0.0f64;
        for (a, row) in gram.iter().enumerate() {
            for (b, g) in row.iter().enumerate().take(a + 1) {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        Ok(worst)
    }
}

/// `M̂_n^(k)` for `k = 0..=k_max`, scaled by the base `D_n`.
pub fn perturbed_moments(spec: &EnsembleSpec, p: &PerturbationSpec, n: usize, k_max: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::range(MODULE, "n must be >= 1"));
    }
    let reach = moment_reach(n, k_max);
    let basis = modified_recurrence(spec, p, reach)?;
    let base = recurrence_coefficients(spec, reach)?;
    perturbed_moments_with(&basis, &base, n, k_max)
}

fn perturbed_moments_with(basis: &PerturbedBasis, base: &RecurrenceTable, n: usize, k_max: usize) -> Result<Vec<f64>> {
    let d_n = second_moment_dn(base, n)?;
    unscaled_to_scaled(raw_trace_sums(&basis.table_hat, n, k_max)?, n, d_n)
}

pub fn perturbed_moment(spec: &EnsembleSpec, p: &PerturbationSpec, n: usize, k: usize) -> Result<f64> {
    Ok(perturbed_moments(spec, p, n, k)?[k])
}

/// `|M̂_n^(k) - M_n^(k)|`.
pub fn perturbation_gap(spec: &EnsembleSpec, p: &PerturbationSpec, n: usize, k: usize) -> Result<f64> {
    Ok(gap_rows(spec, p, &[n], &[k])?[0].gap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub ensemble: String,
    pub p: String,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "M_n_k")]
    pub m_n_k: f64,
    #[serde(rename = "M_hat_n_k")]
    pub m_hat_n_k: f64,
    pub gap: f64,
}

impl GapRow {
    pub const CSV_HEADER: [&'static str; 7] = ["ensemble", "p", "n", "k", "M_n_k", "M_hat_n_k", "gap"];
}

/// Gap rows over the `(n, k)` product; one basis per `n`.
pub fn gap_rows(spec: &EnsembleSpec, p: &PerturbationSpec, ns: &[usize], ks: &[usize]) -> Result<Vec<GapRow>> {
    if ns.is_empty() || ks.is_empty() || ns.contains(&0) {
        return Err(Error::range(MODULE, "n and k lists must be nonempty with n >= 1"));
    }
    let k_max = ks.iter().copied().max().unwrap_or(0);
    let n_top = ns.iter().copied().max().unwrap_or(1);
    let basis = modified_recurrence(spec, p, moment_reach(n_top, k_max))?;
    let base = recurrence_coefficients(spec, moment_reach(n_top, k_max))?;
    let mut rows = Vec::with_capacity(ns.len() * ks.len());
    for &n in ns {
        let d_n = second_moment_dn(&base, n)?;
        let plain = unscaled_to_scaled(raw_trace_sums(&base, n, k_max)?, n, d_n)?;
        let hat = perturbed_moments_with(&basis, &base, n, k_max)?;
        for &k in ks {
            rows.push(GapRow {
                ensemble: spec.name().to_string(),
                p: p.to_string(),
                n,
                k,
                m_n_k: plain[k],
                m_hat_n_k: hat[k],
                gap: (hat[k] - plain[k]).abs(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::growth_parameters;
    use crate::limits::limit_moment;
    use crate::opcore::{jacobi_matrix, scaled_moment};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn presets() -> Vec<EnsembleSpec> {
        vec![
            EnsembleSpec::Hermite,
            EnsembleSpec::Laguerre { a: 0.0 },
            EnsembleSpec::Laguerre { a: 1.5 },
            EnsembleSpec::legendre(),
            EnsembleSpec::Jacobi { a: 0.5, b: -0.25 },
        ]
    }

    fn poly(c: &[f64]) -> PerturbationSpec {
        PerturbationSpec::new(c.to_vec()).unwrap()
    }

    #[test]
    fn spec_parsing_and_limits() {
        let p = PerturbationSpec::parse("1, 0,1").unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.eval(2.0), 5.0);
        assert_eq!(p.to_string(), "1,0,1");
        assert!(PerturbationSpec::parse("1,0").is_err());
        assert!(PerturbationSpec::parse("0").is_err());
        assert!(PerturbationSpec::parse("1,x").is_err());
        assert!(PerturbationSpec::new(vec![1.0; 10]).is_err());
        assert!(PerturbationSpec::new(vec![1.0; 9]).is_ok());
    }

    #[test]
    fn constant_perturbation_is_identity() {
        for spec in presets() {
            let basis = modified_recurrence(&spec, &poly(&[3.0]), 40).unwrap();
            let base = recurrence_coefficients(&spec, 40).unwrap();
            assert_eq!(basis.table_hat, base);
            for k in 0..=4 {
                assert!(perturbation_gap(&spec, &poly(&[-0.5]), 30, k).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn hermite_times_x_matches_generalized_hermite() {
        let basis = modified_recurrence(&EnsembleSpec::Hermite, &poly(&[0.0, 1.0]), 300).unwrap();
        let t = &basis.table_hat;
        assert!((t.alpha()[0].powi(2) - 1.5).abs() < 1e-13);
        for j in 0..=300 {
            let expected = (j as f64 + 1.0) / 2.0 + if j % 2 == 0 { 1.0 } else { 0.0 };
            assert!((t.alpha()[j].powi(2) - expected).abs() < 1e-9 * expected, "j={j}");
            assert!(t.beta()[j].abs() < 1e-9, "beta_{j} = {}", t.beta()[j]);
        }
        assert!((basis.normalization - 0.5).abs() < 1e-14);
    }

    #[test]
    fn laguerre_times_x_shifts_parameter() {
        let basis = modified_recurrence(&EnsembleSpec::Laguerre { a: 0.5 }, &poly(&[0.0, 1.0]), 250).unwrap();
        let exact = recurrence_coefficients(&EnsembleSpec::Laguerre { a: 2.5 }, 250).unwrap();
        for j in 0..=250 {
            // Sign conventions of α may differ; only |α| is determined by the weight.
            let (a, e) = (basis.table_hat.alpha()[j].abs(), exact.alpha()[j].abs());
            assert!((a - e).abs() < 1e-9 * e, "alpha_{j}: {a} vs {e}");
            let (b, e) = (basis.table_hat.beta()[j], exact.beta()[j]);
            assert!((b - e).abs() < 1e-9 * e.abs().max(1.0), "beta_{j}: {b} vs {e}");
        }
    }

    #[test]
    fn jacobi_times_one_minus_x_shifts_parameter() {
        let basis = modified_recurrence(&EnsembleSpec::Jacobi { a: 0.5, b: -0.25 }, &poly(&[1.0, -1.0]), 200).unwrap();
        let exact = recurrence_coefficients(&EnsembleSpec::Jacobi { a: 2.5, b: -0.25 }, 200).unwrap();
        for j in 0..=200 {
            assert!((basis.table_hat.alpha()[j].abs() - exact.alpha()[j].abs()).abs() < 1e-10, "alpha_{j}");
            assert!((basis.table_hat.beta()[j] - exact.beta()[j]).abs() < 1e-10, "beta_{j}");
        }
    }

    #[test]
    fn orthonormality_of_perturbed_basis() {
        for spec in presets() {
            for c in [&[0.0, 1.0][..], &[1.0, 0.0, 1.0], &[-1.0, 2.0]] {
                let basis = modified_recurrence(&spec, &poly(c), 60).unwrap();
                let dev = basis.gram_deviation(50).unwrap();
                assert!(dev < 1e-9, "{spec:?} p={c:?}: deviation {dev}");
            }
        }
    }

    #[test]
    fn hermite_x_second_moment_by_quadrature() {
        let p = poly(&[0.0, 1.0]);
        for n in [1, 5, 40] {
            let basis = modified_recurrence(&EnsembleSpec::Hermite, &p, n + 1).unwrap();
            let base = recurrence_coefficients(&EnsembleSpec::Hermite, n + 1).unwrap();
            let d_n = second_moment_dn(&base, n).unwrap();
            // Direct quadrature of x² p̂_j² x² ϖ / ∫x²ϖ over a base Gauss rule.
            let m = n + 4;
            let rule = gauss_rule(&recurrence_coefficients(&EnsembleSpec::Hermite, m).unwrap(), m).unwrap();
            let mut direct = 0.0;
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let v = shifted_values(&basis.table_hat, n, x, 0.0);
                let s: f64 = v.iter().map(|q| q * q).sum();
                direct += w * x * x * x * x * s / basis.normalization;
            }
            direct /= n as f64 * d_n;
            let via_operator = perturbed_moment(&EnsembleSpec::Hermite, &p, n, 2).unwrap();
            assert!((via_operator - direct).abs() < 1e-9, "n={n}: {via_operator} vs {direct}");
            assert!(perturbed_moment(&EnsembleSpec::Hermite, &p, n, 3).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn hermite_x_fourth_moment_gap_halves() {
        let p = poly(&[0.0, 1.0]);
        let g100 = perturbation_gap(&EnsembleSpec::Hermite, &p, 100, 4).unwrap();
        let g200 = perturbation_gap(&EnsembleSpec::Hermite, &p, 200, 4).unwrap();
        let ratio = g100 / g200;
        assert!((1.6..=2.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn legendre_quadratic_gap_small() {
        let gap = perturbation_gap(&EnsembleSpec::legendre(), &poly(&[1.0, 0.0, 1.0]), 400, 2).unwrap();
        assert!(gap < 0.01, "gap {gap}");
    }

    #[test]
    fn gaps_decay_like_one_over_n() {
        let ns = [100, 200, 400, 800];
        for spec in presets() {
            for c in [&[0.0, 1.0][..], &[1.0, 0.0, 1.0]] {
                let rows = gap_rows(&spec, &poly(c), &ns, &[1, 2, 3, 4]).unwrap();
                for k in 1..=4 {
                    let scaled: Vec<f64> =
                        rows.iter().filter(|r| r.k == k).map(|r| r.n as f64 * r.gap).collect();
                    if scaled.iter().all(|&s| s < 1e-9) {
                        // Vanishes by symmetry.
                        continue;
                    }
                    let hi = scaled.iter().cloned().fold(f64::MIN, f64::max);
                    let lo = scaled.iter().cloned().fold(f64::MAX, f64::min);
                    // A gap falling faster than 1/n (odd k on Jacobi) leaves the band but stays bounded.
                    let faster = scaled.windows(2).all(|w| w[1] < w[0]);
                    assert!(hi / lo < 5.0 || faster, "{spec:?} p={c:?} k={k}: n·gap = {scaled:?}");
                }
            }
        }
    }

    #[test]
    fn weak_limit_unchanged() {
        for spec in presets() {
            let params = growth_parameters(&spec).unwrap();
            let laguerre = matches!(spec, EnsembleSpec::Laguerre { .. });
            for c in [&[0.0, 1.0][..], &[1.0, 0.0, 1.0]] {
                let near = perturbed_moments(&spec, &poly(c), 800, 6).unwrap();
                let far = perturbed_moments(&spec, &poly(c), 200, 6).unwrap();
                for k in 0..=6 {
                    let limit = limit_moment(&params, k).unwrap();
                    let (g800, g200) = ((near[k] - limit).abs(), (far[k] - limit).abs());
                    if laguerre && k >= 4 {
                        // Absolute distance is about 20/n at k = 5; check the 1/n approach instead.
                        assert!(g800 < g200 / 3.0 && g800 < 0.02 * limit, "{spec:?} p={c:?} k={k}: {g200} -> {g800}");
                    } else {
                        assert!(g800 < 0.05, "{spec:?} p={c:?} k={k}: {} vs {limit}", near[k]);
                    }
                }
            }
        }
    }

    // Independent route: orthonormalize the base basis against p²ϖ by Cholesky
    // and conjugate multiplication by x.
    fn cholesky_moment(spec: &EnsembleSpec, p: &PerturbationSpec, n: usize, k: usize) -> f64 {
        use nalgebra::DMatrix;
        let size = n + k.div_ceil(2) + 1;
        let m = size + p.degree() + 1;
        let base = recurrence_coefficients(spec, m).unwrap();
        let rule = gauss_rule(&base, m).unwrap();
        let mut gram = DMatrix::<f64>::zeros(size, size);
        let mut mult = DMatrix::<f64>::zeros(size, size);
        for (&x, &lw) in rule.nodes.iter().zip(&rule.log_weights) {
            let v = shifted_values(&base, size, x, 0.5 * lw + p.eval(x).abs().ln());
            for a in 0..size {
                for b in 0..size {
                    gram[(a, b)] += v[a] * v[b];
                    mult[(a, b)] += x * v[a] * v[b];
                }
            }
        }
        let l = gram.cholesky().unwrap().l();
        let l_inv = l.try_inverse().unwrap();
        let j_hat = &l_inv * mult * l_inv.transpose();
        let power = (0..k).fold(DMatrix::<f64>::identity(size, size), |acc, _| &acc * &j_hat);
        let d_n = second_moment_dn(&base, n).unwrap();
        (0..n).map(|j| power[(j, j)]).sum::<f64>() / (n as f64 * d_n.powf(k as f64 / 2.0))
    }

    #[test]
    fn cholesky_oracle_agrees() {
        let cases = [
            (EnsembleSpec::Hermite, &[1.0, 0.0, 1.0][..]),
            (EnsembleSpec::Laguerre { a: 1.5 }, &[0.0, 1.0]),
            (EnsembleSpec::Jacobi { a: 0.5, b: -0.25 }, &[-1.0, 2.0]),
            (EnsembleSpec::legendre(), &[1.0, 0.0, 1.0]),
        ];
        for (spec, c) in cases {
            for k in 1..=4 {
                let oracle = cholesky_moment(&spec, &poly(c), 30, k);
                let ours = perturbed_moment(&spec, &poly(c), 30, k).unwrap();
                assert!((oracle - ours).abs() < 1e-9 * oracle.abs().max(1.0), "{spec:?} k={k}: {ours} vs {oracle}");
            }
        }
    }

    #[test]
    fn operator_norm_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 60;
        for spec in presets() {
            let basis = modified_recurrence(&spec, &poly(&[1.0, 0.0, 1.0]), n + 1).unwrap();
            let sup = basis.table_hat.coefficient_sup();
            let op = jacobi_matrix(&basis.table_hat, n + 1).unwrap();
            for _ in 0..100 {
                let mut f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
                f.iter_mut().for_each(|v| *v /= norm);
                f.push(0.0);
                let image = op.apply(&f);
                let image_norm = image.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!(image_norm <= 3.0 * sup, "{spec:?}: {image_norm} > 3·{sup}");
            }
        }
    }

    #[test]
    fn base_moments_recovered_for_constant() {
        let spec = EnsembleSpec::Laguerre { a: 1.5 };
        let table = recurrence_coefficients(&spec, 30).unwrap();
        for k in 0..6 {
            let m = perturbed_moment(&spec, &poly(&[2.0]), 25, k).unwrap();
            assert!((m - scaled_moment(&table, 25, k).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_row_csv_round_trip() {
        let rows = gap_rows(&EnsembleSpec::Hermite, &poly(&[1.0, 0.0, 1.0]), &[10, 20], &[2, 4]).unwrap();
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &rows {
            w.serialize(r).unwrap();
        }
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        assert!(text.starts_with("ensemble,p,n,k,M_n_k,M_hat_n_k,gap\n"));
        assert!(text.contains("\"1,0,1\""));
        let back: Vec<GapRow> = csv::Reader::from_reader(text.as_bytes()).deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(back, rows);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn random_perturbations_stay_orthonormal(
            c in prop::collection::vec(-2.0f64..2.0, 1..=4),
            lead in 0.5f64..2.0,
            which in 0usize..5,
        ) {
            let mut coeffs = c.clone();
            coeffs.push(lead);
            let spec = presets()[which].clone();
            let basis = modified_recurrence(&spec, &PerturbationSpec::new(coeffs).unwrap(), 40).unwrap();
            prop_assert!(basis.gram_deviation(30).unwrap() < 1e-9);
        }
    }
}
