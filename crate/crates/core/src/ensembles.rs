//! Ensemble presets and their three-term recurrences.
//!
//! Every ensemble is described by the orthonormal polynomials `p_n` of its
//! normalized weight `ϖ`, which satisfy
//!
//! ```text
//! x p_n(x) = α_n p_{n+1}(x) + β_n p_n(x) + γ_n p_{n-1}(x),   γ_n = α_{n-1}, γ_0 = 0.
//! ```
//!
//! Presets are expressed in the standard Hermite (`e^{-x²}`), Laguerre
//! (`x^a e^{-x}`) and Jacobi (`(1-x)^a (1+x)^b`) coordinates.

use std::f64::consts::PI;
use std::io::Read;

use serde::Deserialize;
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const MODULE: &str = "ensembles";

/// Leading growth behaviour `α_n ~ ξ n^t`, `β_n ~ ζ n^t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    pub xi: f64,
    pub zeta: f64,
    pub t: f64,
}

impl GrowthParams {
    pub fn new(xi: f64, zeta: f64, t: f64) -> Result<Self> {
        let params = GrowthParams { xi, zeta, t };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.xi.is_finite() || self.xi == 0.0 {
            return Err(Error::domain(MODULE, format!("xi must be finite and nonzero, got {}", self.xi)));
        }
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return Err(Error::domain(MODULE, format!("zeta must be >= 0, got {}", self.zeta)));
        }
        if !(0.0..=1.0).contains(&self.t) {
            return Err(Error::domain(MODULE, format!("t must lie in [0, 1], got {}", self.t)));
        }
        Ok(())
    }
}

/// A user-supplied recurrence: explicit coefficient rows plus declared growth.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomRecurrence {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub growth: GrowthParams,
}

#[derive(Debug, Deserialize)]
struct CoefficientRow {
    n: usize,
    alpha_n: f64,
    beta_n: f64,
}

impl CustomRecurrence {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, growth: GrowthParams) -> Result<Self> {
        let custom = CustomRecurrence { alpha, beta, growth };
        custom.validate()?;
        Ok(custom)
    }

    /// Reads `n,alpha_n,beta_n` rows. Rows must cover `0..len` without gaps.
    pub fn from_csv<R: Read>(reader: R, growth: GrowthParams) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let mut rows: Vec<CoefficientRow> = Vec::new();
        for row in rdr.deserialize() {
            let row: CoefficientRow = row.map_err(|e| Error::usage(MODULE, format!("bad coefficient row: {e}")))?;
            rows.push(row);
        }
        rows.sort_by_key(|r| r.n);
        for (expected, row) in rows.iter().enumerate() {
            if row.n != expected {
                return Err(Error::usage(MODULE, format!("coefficient rows must cover n = 0, 1, ...; missing n = {expected}")));
            }
        }
        let alpha = rows.iter().map(|r| r.alpha_n).collect();
        let beta = rows.iter().map(|r| r.beta_n).collect();
        Self::new(alpha, beta, growth)
    }

    fn validate(&self) -> Result<()> {
        self.growth.validate()?;
        if self.alpha.len() != self.beta.len() || self.alpha.is_empty() {
            return Err(Error::domain(MODULE, "custom recurrence needs equally many alpha and beta values"));
        }
        if let Some(n) = self.alpha.iter().position(|&a| a == 0.0 || !a.is_finite()) {
            return Err(Error::domain(MODULE, format!("alpha_{n} must be finite and nonzero")));
        }
        if let Some(n) = self.beta.iter().position(|b| !b.is_finite()) {
            return Err(Error::domain(MODULE, format!("beta_{n} must be finite")));
        }
        Ok(())
    }
}

/// Which unitary ensemble (equivalently which weight) is meant.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleSpec {
    Hermite,
    Laguerre { a: f64 },
    Jacobi { a: f64, b: f64 },
    Custom(CustomRecurrence),
}

impl EnsembleSpec {
    /// Legendre is the Jacobi weight with `a = b = 0`.
    pub fn legendre() -> Self {
        EnsembleSpec::Jacobi { a: 0.0, b: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            EnsembleSpec::Hermite => Ok(()),
            EnsembleSpec::Laguerre { a } => {
                if a > -1.0 && a.is_finite() {
                    Ok(())
                } else {
                    Err(Error::domain(MODULE, format!("Laguerre needs a > -1, got {a}")))
                }
            }
            EnsembleSpec::Jacobi { a, b } => {
                if a > -1.0 && b > -1.0 && a.is_finite() && b.is_finite() {
                    Ok(())
                } else {
                    Err(Error::domain(MODULE, format!("Jacobi needs a > -1 and b > -1, got a = {a}, b = {b}")))
                }
            }
            EnsembleSpec::Custom(ref c) => c.validate(),
        }
    }

    pub fn is_legendre(&self) -> bool {
        matches!(*self, EnsembleSpec::Jacobi { a, b } if a == 0.0 && b == 0.0)
    }

    /// Short lowercase name used in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            EnsembleSpec::Hermite => "hermite",
            EnsembleSpec::Laguerre { .. } => "laguerre",
            EnsembleSpec::Jacobi { .. } if self.is_legendre() => "legendre",
            EnsembleSpec::Jacobi { .. } => "jacobi",
            EnsembleSpec::Custom(_) => "custom",
        }
    }

    /// Name with parameters, e.g. `laguerre(a=1.5)`.
    pub fn label(&self) -> String {
        match *self {
            EnsembleSpec::Laguerre { a } => format!("laguerre(a={a})"),
            EnsembleSpec::Jacobi { a, b } if !self.is_legendre() => format!("jacobi(a={a};b={b})"),
            _ => self.name().to_string(),
        }
    }

    /// Weight of the preset; `None` for custom recurrences, whose weight is unknown.
    pub fn weight(&self) -> Option<WeightSpec> {
        let family = match *self {
            EnsembleSpec::Hermite => WeightFamily::Hermite,
            EnsembleSpec::Laguerre { a } => WeightFamily::Laguerre { a, log_norm: ln_gamma(a + 1.0) },
            EnsembleSpec::Jacobi { a, b } => WeightFamily::Jacobi {
                a,
                b,
                log_norm: (a + b + 1.0) * std::f64::consts::LN_2 + ln_beta(a + 1.0, b + 1.0),
            },
            EnsembleSpec::Custom(_) => return None,
        };
        let support = match family {
            WeightFamily::Hermite => Support { lower: f64::NEG_INFINITY, upper: f64::INFINITY },
            WeightFamily::Laguerre { .. } => Support { lower: 0.0, upper: f64::INFINITY },
            WeightFamily::Jacobi { .. } => Support { lower: -1.0, upper: 1.0 },
        };
        Some(WeightSpec { support, family })
    }

    /// The correction sequences `(ξ_n, ζ_n, η_n)` in
    /// `α_n = ξ n^t (1 + ξ_n)`, `β_n = ζ n^t (1 + ζ_n) + η_n`, where known in closed form.
    pub fn growth_corrections(&self, n: usize) -> Option<(f64, f64, f64)> {
        if n == 0 {
            return None;
        }
        let nf = n as f64;
        match *self {
            EnsembleSpec::Hermite => Some(((1.0 + 1.0 / nf).sqrt() - 1.0, 0.0, 0.0)),
            EnsembleSpec::Laguerre { a } => Some((
                (1.0 + (2.0 + a) / nf + (1.0 + a) / (nf * nf)).sqrt() - 1.0,
                (1.0 + a) / (2.0 * nf),
                0.0,
            )),
            _ => None,
        }
    }
}

/// Interval of orthogonality; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum WeightFamily {
    Hermite,
    Laguerre { a: f64, log_norm: f64 },
    Jacobi { a: f64, b: f64, log_norm: f64 },
}

/// The normalized weight `ϖ` of a preset ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub support: Support,
    family: WeightFamily,
}

// `ln(y^c)`. At `y = 0` this is the one-sided limit for `c >= 0`; singular
// end points (`c < 0`) evaluate to a zero density.
fn power_log(c: f64, y: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::NEG_INFINITY
    } else {
        c * y.ln()
    }
}

impl WeightSpec {
    /// `ln ϖ(x)`; `-∞` outside the support.
    pub fn log_density(&self, x: f64) -> f64 {
        if !self.support.contains(x) || x.is_nan() {
            return f64::NEG_INFINITY;
        }
        match self.family {
            WeightFamily::Hermite => -x * x - 0.5 * PI.ln(),
            WeightFamily::Laguerre { a, log_norm } => power_log(a, x) - x - log_norm,
            WeightFamily::Jacobi { a, b, log_norm } => power_log(a, 1.0 - x) + power_log(b, 1.0 + x) - log_norm,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }
}

/// Recurrence coefficients `α_0..=α_{n_max}`, `β_0..=β_{n_max}`.
///
/// `γ_n` is never stored; see [`RecurrenceTable::gamma`].
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceTable {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    coefficient_sup: f64,
}

impl RecurrenceTable {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() || alpha.is_empty() {
            return Err(Error::domain(MODULE, "alpha and beta must be nonempty and of equal length"));
        }
        if let Some(n) = alpha.iter().position(|&a| a == 0.0 || !a.is_finite()) {
            return Err(Error::domain(MODULE, format!("alpha_{n} must be finite and nonzero")));
        }
        if let Some(n) = beta.iter().position(|b| !b.is_finite()) {
            return Err(Error::domain(MODULE, format!("beta_{n} must be finite")));
        }
        let coefficient_sup = alpha.iter().chain(beta.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(RecurrenceTable { alpha, beta, coefficient_sup })
    }

    pub fn n_max(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `γ_n = α_{n-1}` for `n ≥ 1`, `γ_0 = 0`.
    pub fn gamma(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.alpha[n - 1]
        }
    }

    /// `N = sup |α_i|, |β_i|` over the stored entries.
    pub fn coefficient_sup(&self) -> f64 {
        self.coefficient_sup
    }

    /// The first `len` rows as a new table.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.alpha.len() {
            return Err(Error::range(MODULE, format!("cannot keep {len} rows of a table with {}", self.alpha.len())));
        }
        Self::new(self.alpha[..len].to_vec(), self.beta[..len].to_vec())
    }

    /// Errors unless index `n` is stored.
    pub fn require(&self, n: usize, what: &str) -> Result<()> {
        if n > self.n_max() {
            Err(Error::range(
                "opcore",
                format!("{what} needs recurrence index {n}, table stops at n_max = {}", self.n_max()),
            ))
        } else {
            Ok(())
        }
    }
}

fn hermite_coefficients(n: usize) -> (f64, f64) {
    (((n as f64 + 1.0) / 2.0).sqrt(), 0.0)
}

fn laguerre_coefficients(a: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    (-((nf + 1.0) * (nf + 1.0 + a)).sqrt(), 2.0 * nf + a + 1.0)
}

fn legendre_coefficients(n: usize) -> (f64, f64) {
    let nf = n as f64;
    ((nf + 1.0) / ((2.0 * nf + 3.0) * (2.0 * nf + 1.0)).sqrt(), 0.0)
}

fn jacobi_coefficients(a: f64, b: f64, n: usize) -> (f64, f64) {
    let s = a + b;
    if n == 0 {
        // The general formulas have removable 0/0 forms at n = 0 when s = 0 or s = -1.
        let alpha = 2.0 / (s + 2.0) * ((a + 1.0) * (b + 1.0) / (s + 3.0)).sqrt();
        return (alpha, (b - a) / (s + 2.0));
    }
    let nf = n as f64;
    let m = 2.0 * nf + s;
    let alpha = 2.0 / (m + 2.0)
        * ((nf + 1.0) * (nf + a + 1.0) * (nf + b + 1.0) * (nf + s + 1.0) / ((m + 3.0) * (m + 1.0))).sqrt();
    let beta = (b * b - a * a) / (m * (m + 2.0));
    (alpha, beta)
}

/// `α_n, β_n` for `0 ≤ n ≤ n_max`.
pub fn recurrence_coefficients(spec: &EnsembleSpec, n_max: usize) -> Result<RecurrenceTable> {
    spec.validate()?;
    if n_max < 1 {
        return Err(Error::domain(MODULE, "n_max must be at least 1"));
    }
    let coefficients: Box<dyn Fn(usize) -> (f64, f64)> = match spec {
        EnsembleSpec::Hermite => Box::new(hermite_coefficients),
        EnsembleSpec::Laguerre { a } => {
            let a = *a;
            Box::new(move |n| laguerre_coefficients(a, n))
        }
        EnsembleSpec::Jacobi { .. } if spec.is_legendre() => Box::new(legendre_coefficients),
        EnsembleSpec::Jacobi { a, b } => {
            let (a, b) = (*a, *b);
            Box::new(move |n| jacobi_coefficients(a, b, n))
        }
        EnsembleSpec::Custom(custom) => {
            if custom.alpha.len() <= n_max {
                return Err(Error::range(
                    MODULE,
                    format!("custom recurrence has {} rows, n_max = {n_max} requested", custom.alpha.len()),
                ));
            }
            return RecurrenceTable::new(custom.alpha[..=n_max].to_vec(), custom.beta[..=n_max].to_vec());
        }
    };
    let (alpha, beta) = (0..=n_max).map(coefficients).unzip();
    RecurrenceTable::new(alpha, beta)
}

/// `(ξ, ζ, t)` for presets, or the declared values of a custom recurrence.
pub fn growth_parameters(spec: &EnsembleSpec) -> Result<GrowthParams> {
    spec.validate()?;
    Ok(match spec {
        EnsembleSpec::Hermite => GrowthParams { xi: std::f64::consts::FRAC_1_SQRT_2, zeta: 0.0, t: 0.5 },
        EnsembleSpec::Laguerre { .. } => GrowthParams { xi: -1.0, zeta: 2.0, t: 1.0 },
        EnsembleSpec::Jacobi { .. } => GrowthParams { xi: 0.5, zeta: 0.0, t: 0.0 },
        EnsembleSpec::Custom(c) => c.growth,
    })
}

/// Normalized weight `ϖ(x)`, zero outside the support.
pub fn weight_density(spec: &EnsembleSpec, x: f64) -> Result<f64> {
    spec.validate()?;
    spec.weight()
        .map(|w| w.density(x))
        .ok_or_else(|| Error::capability(MODULE, "custom recurrences carry no weight function"))
}
