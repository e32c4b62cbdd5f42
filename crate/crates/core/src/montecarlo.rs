//! Random-matrix sampling as an independent check on the deterministic routes.
//!
//! Variances are pinned so that eigenvalues follow the module's standard
//! weights: `e^{-x²}` (GUE), `x^a e^{-x}` (complex Wishart), and
//! `(1-x)^a (1+x)^b` on `[-1, 1]` (complex MANOVA mapped by `x = 1 - 2λ`).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ensembles::{recurrence_coefficients, EnsembleSpec};
use crate::error::{Error, Result};
use crate::opcore::second_moment_dn;

const MODULE: &str = "montecarlo";

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    pub ensemble: EnsembleSpec,
    pub n: usize,
    pub seed: u64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

fn integer_parameter(value: f64, name: &str) -> Result<usize> {
    if value >= 0.0 && value.fract() == 0.0 && value <= 1e6 {
        Ok(value as usize)
    } else {
        Err(Error::capability(
            MODULE,
            format!("sampling needs a nonnegative integer {name}, got {value}"),
        ))
    }
}

// Complex normal entries with E|z|² = variance.
fn complex_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, variance: f64) -> DMatrix<Complex64> {
    let sd = (variance / 2.0).sqrt();
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(sd * re, sd * im)
    })
}

fn wishart(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> DMatrix<Complex64> {
    let x = complex_gaussian(rng, n, n + extra, 1.0);
    &x * x.adjoint()
}

fn hermitian_eigenvalues(m: DMatrix<Complex64>) -> Vec<f64> {
    let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

fn gue(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        h[(i, i)] = Complex64::new(d * 0.5f64.sqrt(), 0.0);
        for j in i + 1..n {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let z = Complex64::new(0.5 * re, 0.5 * im);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    hermitian_eigenvalues(h)
}

fn laue(rng: &mut ChaCha8Rng, n: usize, a: usize) -> Vec<f64> {
    hermitian_eigenvalues(wishart(rng, n, a))
}

fn jue(rng: &mut ChaCha8Rng, n: usize, a: usize, b: usize) -> Result<Vec<f64>> {
    let w1 = wishart(rng, n, a);
    let w2 = wishart(rng, n, b);
    let total = &w1 + &w2;
    let chol = total
        .cholesky()
        .ok_or_else(|| Error::numeric(MODULE, "W1 + W2 is not positive definite"))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::numeric(MODULE, "singular Cholesky factor"))?;
    let mut m = &l_inv * w1 * l_inv.adjoint();
    // Symmetrize away round-off before the Hermitian solver.
    m = (&m + m.adjoint()).scale(0.5);
    let mut x: Vec<f64> = hermitian_eigenvalues(m).into_iter().map(|l| 1.0 - 2.0 * l).collect();
    x.sort_by(f64::total_cmp);
    Ok(x)
}

/// One eigenvalue draw, reproducible from `(spec, n, seed)`.
pub fn sample_spectrum(spec: &EnsembleSpec, n: usize, seed: u64) -> Result<SpectrumSample> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::range(MODULE, "n must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eigenvalues = match spec {
        EnsembleSpec::Hermite => gue(&mut rng, n),
        EnsembleSpec::Laguerre { a } => laue(&mut rng, n, integer_parameter(*a, "a")?),
        EnsembleSpec::Jacobi { a, b } => jue(&mut rng, n, integer_parameter(*a, "a")?, integer_parameter(*b, "b")?)?,
        EnsembleSpec::Custom(_) => {
            return Err(Error::capability(MODULE, "custom recurrences have no matrix model"));
        }
    };
    Ok(SpectrumSample { ensemble: spec.clone(), n, seed, eigenvalues })
}

/// Samples `0..count`, sample `i` seeded with `seed ^ i`.
pub fn sample_batch(spec: &EnsembleSpec, n: usize, count: usize, seed: u64) -> Result<Vec<SpectrumSample>> {
    (0..count as u64).map(|i| sample_spectrum(spec, n, seed ^ i)).collect()
}

/// Step function of pooled eigenvalues divided by `√D_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    points: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.iter().any(|p| !p.is_finite()) {
            return Err(Error::usage(MODULE, "empirical CDF needs finite points"));
        }
        points.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fraction of points `≤ y`.
    pub fn eval(&self, y: f64) -> f64 {
        self.points.partition_point(|&p| p <= y) as f64 / self.points.len() as f64
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.points.iter().map(|p| p.powi(k)).sum::<f64>() / self.points.len() as f64
    }
}

pub fn empirical_scaled_cdf(samples: &[SpectrumSample], d_n: f64) -> Result<EmpiricalCdf> {
    let Some(first) = samples.first() else {
        return Err(Error::usage(MODULE, "no samples"));
    };
    if samples.iter().any(|s| s.ensemble != first.ensemble || s.n != first.n) {
        return Err(Error::usage(MODULE, "samples mix ensembles or sizes"));
    }
    if !(d_n > 0.0) {
        return Err(Error::domain(MODULE, format!("D_n must be positive, got {d_n}")));
    }
    let root = d_n.sqrt();
    EmpiricalCdf::from_points(samples.iter().flat_map(|s| s.eigenvalues.iter().map(|l| l / root)).collect())
}

/// `sup |F_emp - F|`, checked on both sides of every jump (`F` right-continuous).
pub fn ks_distance(empirical: &EmpiricalCdf, model_cdf: impl Fn(f64) -> f64) -> f64 {
    let pts = empirical.points();
    let m = pts.len() as f64;
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < pts.len() {
        let y = pts[i];
        let mut j = i;
        while j < pts.len() && pts[j] == y {
            j += 1;
        }
        let before = model_cdf(y.next_down());
        worst = worst.max((before - i as f64 / m).abs()).max((model_cdf(y) - j as f64 / m).abs());
        i = j;
    }
    worst
}

/// `D_n` of the ensemble's recurrence.
pub fn ensemble_dn(spec: &EnsembleSpec, n: usize) -> Result<f64> {
    second_moment_dn(&recurrence_coefficients(spec, n)?, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRow {
    pub sample_id: usize,
    pub index: usize,
    pub lambda: f64,
}

pub fn eigenvalue_rows(samples: &[SpectrumSample]) -> Vec<EigenvalueRow> {
    samples
        .iter()
        .enumerate()
        .flat_map(|(sample_id, s)| {
            s.eigenvalues.iter().enumerate().map(move |(index, &lambda)| EigenvalueRow { sample_id, index, lambda })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: usize,
    pub samples: usize,
    #[serde(rename = "D_n")]
    pub d_n: f64,
    pub ks_distance: f64,
}
