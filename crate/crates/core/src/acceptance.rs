//! The acceptance suite: nine numerical criteria, each run at its stated
//! tolerance and time budget.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::density::ScaledDensity;
use crate::ensembles::{growth_parameters, recurrence_coefficients, EnsembleSpec, GrowthParams};
use crate::error::Result;
use crate::limits::{density_moment_oracle, limit_moment, LimitFamily};
use crate::montecarlo::{empirical_scaled_cdf, ensemble_dn, ks_distance, sample_batch};
use crate::opcore::{gauss_rule, quadrature_moment_with, scaled_moments, second_moment_dn};
use crate::perturb::{gap_rows, PerturbationSpec};

/// Fixed seed of the Monte Carlo criterion.
pub const MONTE_CARLO_SEED: u64 = 20_240_601;

/// Ensembles every "for each preset" criterion runs over.
pub fn preset_ensembles() -> Vec<EnsembleSpec> {
    vec![
        EnsembleSpec::Hermite,
        EnsembleSpec::Laguerre { a: 0.0 },
        EnsembleSpec::Laguerre { a: 1.5 },
        EnsembleSpec::legendre(),
        EnsembleSpec::Jacobi { a: 0.5, b: -0.25 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("{verdict} [{}] {} ({:.2}s): {}", self.id, self.name, self.seconds, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub passed: usize,
    pub failed: usize,
    pub criteria: Vec<CriterionOutcome>,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

type Check = fn() -> Result<(bool, String)>;

const CRITERIA: [(u8, &str, Option<f64>, Check); 9] = [
    (1, "exact identity M_n^(2) = 1", Some(5.0), second_moment_identity),
    (2, "GUE closed form M_n^(4) = 2 + 1/n^2", Some(5.0), gue_fourth_moment),
    (3, "operator vs quadrature moments", Some(60.0), oracle_equivalence),
    (4, "limit moment formulas", None, limit_formulas),
    (5, "limit densities reproduce limit moments", None, density_moment_consistency),
    (6, "moment convergence at n = 800", Some(60.0), moment_convergence),
    (7, "perturbation invariance", None, perturbation_invariance),
    (8, "Monte Carlo KS distance", Some(60.0), monte_carlo_ks),
    (9, "moment growth bound", None, growth_bound),
];

/// Runs criterion `id` (1..=9).
pub fn run_criterion(id: u8) -> Option<CriterionOutcome> {
    let &(id, name, budget, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let result = check();
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match result {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = budget {
        if seconds > limit {
            passed = false;
            detail.push_str(&format!("; over the {limit} s budget"));
        }
    }
    Some(CriterionOutcome { id, name: name.to_string(), passed, detail, seconds })
}

pub fn run_all() -> AcceptanceReport {
    let criteria: Vec<CriterionOutcome> = CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect();
    let passed = criteria.iter().filter(|c| c.passed).count();
    AcceptanceReport { passed, failed: criteria.len() - passed, criteria }
}

fn second_moment_identity() -> Result<(bool, String)> {
    let ensembles = [
        EnsembleSpec::Hermite,
        EnsembleSpec::Laguerre { a: 0.0 },
        EnsembleSpec::Laguerre { a: 1.5 },
        EnsembleSpec::Jacobi { a: 0.0, b: 0.0 },
        EnsembleSpec::Jacobi { a: 0.5, b: -0.25 },
    ];
    let mut worst = 0.0f64;
    for spec in &ensembles {
        let table = recurrence_coefficients(spec, 501)?;
        for n in 1..=500 {
            worst = worst.max((scaled_moments(&table, n, 2)?[2] - 1.0).abs());
        }
    }
    Ok((worst < 1e-12, format!("max |M_n^(2) - 1| = {worst:.2e} over 5 ensembles, n = 1..500")))
}

fn gue_fourth_moment() -> Result<(bool, String)> {
    let table = recurrence_coefficients(&EnsembleSpec::Hermite, 502)?;
    let mut worst = 0.0f64;
    let mut derivation = 0.0f64;
    let mut path_sum = 0.0;
    for n in 1..=500usize {
        // (J^4)_jj = (6j² + 6j + 3)/4 and D_n = n/2, summed independently of the operator code.
        let j = (n - 1) as f64;
        path_sum += (6.0 * j * j + 6.0 * j + 3.0) / 4.0;
        let half = n as f64 / 2.0;
        let closed = 2.0 + 1.0 / (n * n) as f64;
        derivation = derivation.max((path_sum / (n as f64 * half * half) - closed).abs());
        worst = worst.max((scaled_moments(&table, n, 4)?[4] - closed).abs());
    }
    let ok = worst < 1e-10 && derivation < 1e-12;
    Ok((ok, format!("max deviation {worst:.2e}; path-sum derivation {derivation:.2e}")))
}

fn oracle_equivalence() -> Result<(bool, String)> {
    let k_max = 12;
    let (mut worst_abs, mut worst_rel) = (0.0f64, 0.0f64);
    for spec in preset_ensembles() {
        let table = recurrence_coefficients(&spec, 200 + k_max)?;
        for n in 1..=200 {
            let d_n = second_moment_dn(&table, n)?;
            let rule = gauss_rule(&table, n + k_max / 2)?;
            let operator = scaled_moments(&table, n, k_max)?;
            for (k, &m) in operator.iter().enumerate() {
                let q = quadrature_moment_with(&rule, &table, n, k, d_n)?;
                let diff = (m - q).abs();
                worst_abs = worst_abs.max(diff);
                worst_rel = worst_rel.max(diff / m.abs().max(1.0));
            }
        }
    }
    Ok((
        worst_rel < 1e-8,
        format!("max |difference| / max(1, |M|) = {worst_rel:.2e} (absolute {worst_abs:.2e}), n <= 200, k <= 12"),
    ))
}

fn limit_formulas() -> Result<(bool, String)> {
    let gue = LimitFamily::SemicircleG.growth();
    let laue = LimitFamily::LaguerreL.growth();
    let jue = LimitFamily::ArcsineJ.growth();
    let checks: [(&str, &GrowthParams, usize, f64); 5] = [
        ("GUE M^(4)", &gue, 4, 2.0),
        ("GUE M^(6)", &gue, 6, 5.0),
        ("LAUE M^(1)", &laue, 1, std::f64::consts::FRAC_1_SQRT_2),
        ("LAUE M^(2)", &laue, 2, 1.0),
        ("JUE M^(4)", &jue, 4, 1.5),
    ];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (label, params, k, expected) in checks {
        let value = limit_moment(params, k)?;
        worst = worst.max((value - expected).abs());
        parts.push(format!("{label} = {value}"));
    }
    Ok((worst < 1e-12, format!("{}; max error {worst:.2e}", parts.join(", "))))
}

fn density_moment_consistency() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for family in LimitFamily::ALL {
        for k in 0..=16 {
            let formula = limit_moment(&family.growth(), k)?;
            worst = worst.max((formula - density_moment_oracle(family, k)?).abs());
        }
    }
    Ok((worst < 1e-9, format!("max |M^(k) - ∫x^k σ| = {worst:.2e}, k <= 16, arcsine on (-√2, √2)")))
}

// Gaps below this are round-off on exact zeros (odd moments of even weights).
const ZERO_GAP: f64 = 1e-12;

fn moment_convergence() -> Result<(bool, String)> {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for spec in preset_ensembles() {
        let params = growth_parameters(&spec)?;
        let table = recurrence_coefficients(&spec, 805)?;
        let near = scaled_moments(&table, 800, 8)?;
        let far = scaled_moments(&table, 200, 8)?;
        for k in 1..=8 {
            let limit = limit_moment(&params, k)?;
            let (g800, g200) = ((near[k] - limit).abs(), (far[k] - limit).abs());
            worst = worst.max(g800);
            let shrinking = g800 < g200 || (g800 < ZERO_GAP && g200 < ZERO_GAP);
            if g800 >= 0.02 || !shrinking {
                failures.push(format!("{} k={k}: gap(200) = {g200:.3e}, gap(800) = {g800:.3e}", spec.label()));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("max gap at n = 800 is {worst:.2e}")
    } else {
        format!("{} case(s) fail: {}", failures.len(), failures.join("; "))
    };
    Ok((failures.is_empty(), detail))
}

fn perturbation_invariance() -> Result<(bool, String)> {
    let ns = [100, 200, 400, 800];
    let ks = [1, 2, 3, 4];
    let mut failures = Vec::new();
    let mut worst_constant = 0.0f64;
    for spec in [EnsembleSpec::Hermite, EnsembleSpec::legendre()] {
        for coefficients in [vec![0.0, 1.0], vec![1.0, 0.0, 1.0]] {
            let p = PerturbationSpec::new(coefficients)?;
            let rows = gap_rows(&spec, &p, &ns, &ks)?;
            for &k in &ks {
                let gaps: Vec<(usize, f64)> = rows.iter().filter(|r| r.k == k).map(|r| (r.n, r.gap)).collect();
                let g800 = gaps.iter().find(|g| g.0 == 800).map(|g| g.1).unwrap_or(f64::NAN);
                if gaps.iter().all(|g| g.1 < ZERO_GAP) {
                    continue;
                }
                let scaled: Vec<f64> = gaps.iter().map(|&(n, g)| n as f64 * g).collect();
                let hi = scaled.iter().cloned().fold(f64::MIN, f64::max);
                let lo = scaled.iter().cloned().fold(f64::MAX, f64::min);
                if !(hi / lo < 5.0) || !(g800 < 0.01) {
                    failures.push(format!(
                        "{} p={p} k={k}: n·gap in [{lo:.3}, {hi:.3}], gap(800) = {g800:.3e}",
                        spec.label()
                    ));
                }
            }
        }
        let constant = PerturbationSpec::new(vec![2.5])?;
        for row in gap_rows(&spec, &constant, &ns, &ks)? {
            worst_constant = worst_constant.max(row.gap);
        }
    }
    if worst_constant >= 1e-12 {
        failures.push(format!("constant p: gap {worst_constant:.2e}"));
    }
    let detail = if failures.is_empty() {
        format!("all bands within factor 5, gap(800) < 0.01, constant-p gap {worst_constant:.1e}")
    } else {
        format!("{} case(s) fail: {}", failures.len(), failures.join("; "))
    };
    Ok((failures.is_empty(), detail))
}

fn monte_carlo_ks() -> Result<(bool, String)> {
    let n = 100;
    let spec = EnsembleSpec::Hermite;
    let samples = sample_batch(&spec, n, 200, MONTE_CARLO_SEED)?;
    let empirical = empirical_scaled_cdf(&samples, ensemble_dn(&spec, n)?)?;
    let table = ScaledDensity::new(&spec, n)?.cdf_table()?;
    let finite = ks_distance(&empirical, |y| table.eval(y));
    let limit = ks_distance(&empirical, |y| LimitFamily::SemicircleG.cdf(y));
    Ok((
        finite < 0.05 && limit < 0.08,
        format!("KS vs σ_100 = {finite:.5} (< 0.05), vs semicircle = {limit:.5} (< 0.08), seed {MONTE_CARLO_SEED}"),
    ))
}

fn growth_bound() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for spec in preset_ensembles() {
        let t = growth_parameters(&spec)?.t;
        let table = recurrence_coefficients(&spec, 311)?;
        let moments = scaled_moments(&table, 300, 20)?;
        for (k, m) in moments.iter().enumerate().skip(1) {
            let root = m.abs().powf(1.0 / k as f64);
            let bound = 3.0 * (k as f64).powf(t).max(1.0);
            worst = worst.max(root / bound);
            if root > bound {
                failures.push(format!("{} k={k}: {root:.3} > {bound:.3}", spec.label()));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("max |M_n^(k)|^(1/k) / bound = {worst:.3}")
    } else {
        failures.join("; ")
    };
    Ok((failures.is_empty(), detail))
}
