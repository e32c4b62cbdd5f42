//! One-level correlation function and the scaled density.
//!
//! `R_n¹(x) = Σ_{m<n} p_m(x)² ϖ(x)` and `σ_n(x) = (√D_n / n) R_n¹(x √D_n)`.
//! Evaluation folds `ln ϖ(x)` into a log-scaled recurrence, so `n` in the
//! thousands is fine even far out in the tails.

use std::fmt::Write as _;

use crate::ensembles::{recurrence_coefficients, EnsembleSpec, RecurrenceTable, WeightSpec};
use crate::error::{Error, Result};
use crate::integrate::{integrate, Tolerance};
use crate::limits::LimitFamily;
use crate::opcore::poly::log_sum_squares;
use crate::opcore::{gauss_rule, second_moment_dn};

const MODULE: &str = "density";

/// An unbounded edge is placed where `σ_n(y) (1 + |y|)^10` drops below this.
const EDGE_THRESHOLD: f64 = 1e-15;

fn cdf_tolerance(panels: usize) -> Tolerance {
    Tolerance { abs: 1e-9, rel: 1e-12, max_intervals: 20_000, initial_panels: panels }
}

/// `σ_n` for one preset ensemble and one `n`, with everything it needs cached.
#[derive(Debug, Clone)]
pub struct ScaledDensity {
    spec: EnsembleSpec,
    weight: WeightSpec,
    table: RecurrenceTable,
    n: usize,
    d_n: f64,
    lower: f64,
    upper: f64,
}

impl ScaledDensity {
    pub fn new(spec: &EnsembleSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::range(MODULE, "n must be >= 1"));
        }
        let weight = spec
            .weight()
            .ok_or_else(|| Error::capability(MODULE, "densities need a preset weight; custom recurrences have none"))?;
        let table = recurrence_coefficients(spec, n + 1)?;
        let d_n = second_moment_dn(&table, n)?;
        let mut density = ScaledDensity { spec: spec.clone(), weight, table, n, d_n, lower: 0.0, upper: 0.0 };
        density.locate_edges()?;
        Ok(density)
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d_n(&self) -> f64 {
        self.d_n
    }

    /// Scaled interval outside which `σ_n` is zero or negligible.
    pub fn effective_support(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    // Bounded ends are the support itself. Unbounded ends start 10% beyond
    // the extreme node of the (n+1)-point Gauss rule and walk outward until
    // the density is negligible.
    fn locate_edges(&mut self) -> Result<()> {
        let rule = gauss_rule(&self.table, self.n + 1)?;
        let root = self.d_n.sqrt();
        let support = self.weight.support;
        let walk = |start: f64, direction: f64| {
            let mut y = start / root;
            let step = 0.05 * (y.abs() + 1.0);
            while self.density(y) * (1.0 + y.abs()).powi(10) > EDGE_THRESHOLD {
                y += direction * step;
            }
            y
        };
        let upper = if support.upper.is_finite() {
            support.upper / root
        } else {
            walk(rule.nodes[rule.len() - 1].abs() * 1.1, 1.0)
        };
        let lower = if support.lower.is_finite() {
            support.lower / root
        } else {
            walk(-rule.nodes[0].abs() * 1.1, -1.0)
        };
        self.lower = lower;
        self.upper = upper;
        Ok(())
    }

    /// `R_n¹(x)` in the unscaled coordinate.
    pub fn correlation(&self, x: f64) -> f64 {
        let lw = self.weight.log_density(x);
        if lw == f64::NEG_INFINITY {
            return 0.0;
        }
        (lw + log_sum_squares(&self.table, self.n, x)).exp()
    }

    /// `σ_n(y)`.
    pub fn density(&self, y: f64) -> f64 {
        let root = self.d_n.sqrt();
        root / self.n as f64 * self.correlation(self.snap(y * root))
    }

    // Rounding in `y * sqrt(D_n)` must not move a grid end point inside a singular edge.
    fn snap(&self, x: f64) -> f64 {
        let s = self.weight.support;
        for bound in [s.lower, s.upper] {
            if bound.is_finite() && (x - bound).abs() <= 8.0 * f64::EPSILON * bound.abs().max(1.0) {
                return bound;
            }
        }
        x
    }

    fn panels(&self) -> usize {
        2 * self.n + 8
    }

    /// `∫ y^k σ_n(y) dy` over the effective support.
    pub fn moment(&self, k: usize) -> Result<f64> {
        integrate(|y| y.powi(k as i32) * self.density(y), self.lower, self.upper, cdf_tolerance(self.panels()))
    }

    /// `∫_{lower}^{y} σ_n`.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        if y <= self.lower {
            return Ok(0.0);
        }
        let to = y.min(self.upper);
        let width = self.upper - self.lower;
        let panels = ((to - self.lower) / width * self.panels() as f64).ceil().max(1.0) as usize;
        let v = integrate(|s| self.density(s), self.lower, to, cdf_tolerance(panels))?;
        Ok(v.clamp(0.0, 1.0))
    }

    /// Tabulated distribution function for fast repeated evaluation.
    pub fn cdf_table(&self) -> Result<CdfTable> {
        let panels = 4 * self.n + 64;
        let step = (self.upper - self.lower) / panels as f64;
        let mut breaks = Vec::with_capacity(panels + 1);
        let mut cumulative = Vec::with_capacity(panels + 1);
        let mut acc = 0.0;
        breaks.push(self.lower);
        cumulative.push(0.0);
        for i in 0..panels {
            let a = self.lower + step * i as f64;
            let b = if i + 1 == panels { self.upper } else { self.lower + step * (i + 1) as f64 };
            acc += integrate(|s| self.density(s), a, b, cdf_tolerance(1))?;
            breaks.push(b);
            cumulative.push(acc);
        }
        Ok(CdfTable { density: self.clone(), breaks, cumulative })
    }
}

/// Piecewise-cumulative distribution function of a [`ScaledDensity`].
#[derive(Debug, Clone)]
pub struct CdfTable {
    density: ScaledDensity,
    breaks: Vec<f64>,
    cumulative: Vec<f64>,
}

impl CdfTable {
    pub fn eval(&self, y: f64) -> f64 {
        let first = self.breaks[0];
        let last = *self.breaks.last().expect("nonempty");
        if y <= first {
            return 0.0;
        }
        if y >= last {
            return self.cumulative.last().copied().unwrap_or(1.0).min(1.0);
        }
        let i = self.breaks.partition_point(|&b| b <= y) - 1;
        let partial = integrate(|s| self.density.density(s), self.breaks[i], y, cdf_tolerance(1)).unwrap_or(0.0);
        (self.cumulative[i] + partial).clamp(0.0, 1.0)
    }

    /// Total mass captured by the table (1 up to the edge truncation).
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// `R_n¹(x)`; zero outside the support.
pub fn correlation_1level(spec: &EnsembleSpec, n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::range(MODULE, "n must be >= 1"));
    }
    let weight = spec.weight().ok_or_else(|| Error::capability(MODULE, "custom recurrences carry no weight"))?;
    spec.validate()?;
    let lw = weight.log_density(x);
    if lw == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let table = recurrence_coefficients(spec, n.max(1))?;
    Ok((lw + log_sum_squares(&table, n, x)).exp())
}

/// What a [`DensityGrid`] samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    ScaledFiniteN,
    Limit,
}

impl GridKind {
    fn as_str(self) -> &'static str {
        match self {
            GridKind::ScaledFiniteN => "scaled_finite_n",
            GridKind::Limit => "limit",
        }
    }
}

/// A sampled density with its normalization metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub label: String,
    pub kind: GridKind,
    pub n: Option<usize>,
    pub d_n: Option<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Trapezoid integral of `y` over `x`.
    pub mass: f64,
    /// Mass of the density outside `[x_first, x_last]`.
    pub truncation_deficit: f64,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::usage(MODULE, "grid needs at least two points"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::usage(MODULE, "grid must be finite and strictly increasing"));
    }
    Ok(())
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

impl DensityGrid {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# spec={}", self.label);
        let _ = writeln!(out, "# kind={}", self.kind.as_str());
        if let Some(n) = self.n {
            let _ = writeln!(out, "# n={n}");
        }
        if let Some(d) = self.d_n {
            let _ = writeln!(out, "# D_n={d:.16e}");
        }
        let _ = writeln!(out, "# mass={:.16e}", self.mass);
        let _ = writeln!(out, "# truncation_deficit={:.16e}", self.truncation_deficit);
        out.push_str("x,y\n");
        for (x, y) in self.x.iter().zip(&self.y) {
            let _ = writeln!(out, "{x:.16e},{y:.16e}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::usage(MODULE, format!("density CSV: {what}"));
        let mut grid = DensityGrid {
            label: String::new(),
            kind: GridKind::ScaledFiniteN,
            n: None,
            d_n: None,
            x: Vec::new(),
            y: Vec::new(),
            mass: f64::NAN,
            truncation_deficit: f64::NAN,
        };
        let mut seen_header = false;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(meta) = line.strip_prefix('#') {
                let (key, value) = meta.trim().split_once('=').ok_or_else(|| bad("malformed comment"))?;
                let num = || value.parse::<f64>().map_err(|_| bad(key));
                match key {
                    "spec" => grid.label = value.to_string(),
                    "kind" => {
                        grid.kind = match value {
                            "scaled_finite_n" => GridKind::ScaledFiniteN,
                            "limit" => GridKind::Limit,
                            _ => return Err(bad("unknown kind")),
                        }
                    }
                    "n" => grid.n = Some(value.parse().map_err(|_| bad("n"))?),
                    "D_n" => grid.d_n = Some(num()?),
                    "mass" => grid.mass = num()?,
                    "truncation_deficit" => grid.truncation_deficit = num()?,
                    _ => {}
                }
            } else if !seen_header {
                if line != "x,y" {
                    return Err(bad("expected header x,y"));
                }
                seen_header = true;
            } else {
                let (x, y) = line.split_once(',').ok_or_else(|| bad("row"))?;
                grid.x.push(x.trim().parse().map_err(|_| bad("x"))?);
                grid.y.push(y.trim().parse().map_err(|_| bad("y"))?);
            }
        }
        Ok(grid)
    }
}

/// `σ_n` sampled on `grid`.
pub fn scaled_density(spec: &EnsembleSpec, n: usize, grid: &[f64]) -> Result<DensityGrid> {
    check_grid(grid)?;
    let density = ScaledDensity::new(spec, n)?;
    density_on_grid(&density, grid)
}

pub fn density_on_grid(density: &ScaledDensity, grid: &[f64]) -> Result<DensityGrid> {
    check_grid(grid)?;
    let y: Vec<f64> = grid.iter().map(|&s| density.density(s)).collect();
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let inside = density.cdf(hi)? - density.cdf(lo)?;
    Ok(DensityGrid {
        label: density.spec.label(),
        kind: GridKind::ScaledFiniteN,
        n: Some(density.n),
        d_n: Some(density.d_n),
        mass: trapezoid(grid, &y),
        truncation_deficit: (1.0 - inside).max(0.0),
        x: grid.to_vec(),
        y,
    })
}

/// A classical limit law sampled on `grid`.
pub fn limit_grid(family: LimitFamily, grid: &[f64]) -> Result<DensityGrid> {
    check_grid(grid)?;
    let y: Vec<f64> = grid.iter().map(|&s| family.density(s)).collect();
    let inside = family.cdf(grid[grid.len() - 1]) - family.cdf(grid[0]);
    Ok(DensityGrid {
        label: family.name().to_string(),
        kind: GridKind::Limit,
        n: None,
        d_n: None,
        mass: trapezoid(grid, &y),
        truncation_deficit: (1.0 - inside).max(0.0),
        x: grid.to_vec(),
        y,
    })
}

/// `count` equally spaced points across the effective support of `σ_n`.
pub fn default_grid(spec: &EnsembleSpec, n: usize, count: usize) -> Result<Vec<f64>> {
    let (lo, hi) = ScaledDensity::new(spec, n)?.effective_support();
    Ok(linspace(lo, hi, count))
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| if i + 1 == count { hi } else { lo + step * i as f64 }).collect()
}

/// `∫_{lower}^{x} σ_n` by adaptive Gauss–Kronrod integration.
pub fn scaled_cdf(spec: &EnsembleSpec, n: usize, x: f64) -> Result<f64> {
    ScaledDensity::new(spec, n)?.cdf(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::scaled_moment;
    use std::f64::consts::PI;

    fn presets() -> Vec<EnsembleSpec> {
        vec![
            EnsembleSpec::Hermite,
            EnsembleSpec::Laguerre { a: 0.0 },
            EnsembleSpec::Laguerre { a: 1.5 },
            EnsembleSpec::legendre(),
            EnsembleSpec::Jacobi { a: 0.5, b: -0.25 },
        ]
    }

    #[test]
    fn correlation_examples() {
        let inv_sqrt_pi = 1.0 / PI.sqrt();
        assert!((correlation_1level(&EnsembleSpec::Hermite, 1, 0.0).unwrap() - inv_sqrt_pi).abs() < 1e-15);
        assert!((correlation_1level(&EnsembleSpec::Hermite, 2, 0.0).unwrap() - inv_sqrt_pi).abs() < 1e-15);
        for x in [-0.9, 0.0, 0.3, 0.99] {
            assert!((correlation_1level(&EnsembleSpec::legendre(), 1, x).unwrap() - 0.5).abs() < 1e-15);
        }
        assert_eq!(correlation_1level(&EnsembleSpec::legendre(), 3, 1.5).unwrap(), 0.0);
        assert_eq!(correlation_1level(&EnsembleSpec::Laguerre { a: 1.0 }, 3, -0.5).unwrap(), 0.0);
    }

    #[test]
    fn hermite_single_level() {
        let d = ScaledDensity::new(&EnsembleSpec::Hermite, 1).unwrap();
        assert!((d.density(0.0) - 0.3989423).abs() < 1e-7);
        let g = scaled_density(&EnsembleSpec::Hermite, 1, &linspace(-1.0, 1.0, 5)).unwrap();
        assert!((g.y[2] - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mass_over_covering_grid() {
        for spec in presets() {
            for n in [1, 7, 40] {
                let grid = default_grid(&spec, n, 20001).unwrap();
                let g = scaled_density(&spec, n, &grid).unwrap();
                // Steep hard edges (Laguerre a = 0, Jacobi b < 0) cost the trapezoid rule accuracy.
                let steep = matches!(spec, EnsembleSpec::Jacobi { b, .. } if b < 0.0)
                    || matches!(spec, EnsembleSpec::Laguerre { a } if a < 1.0);
                let tol = if steep { 2e-2 } else { 1e-3 };
                assert!((g.mass - 1.0).abs() < tol, "{spec:?} n={n}: mass {}", g.mass);
                assert!(g.truncation_deficit < 1e-9);
                assert!(g.y.iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn hermite_fifty_tracks_semicircle() {
        let g = scaled_density(&EnsembleSpec::Hermite, 50, &linspace(-2.5, 2.5, 501)).unwrap();
        for (x, y) in g.x.iter().zip(&g.y) {
            if x.abs() <= 1.8 {
                let s = LimitFamily::SemicircleG.density(*x);
                assert!((y - s).abs() < 0.05, "x={x}: {y} vs {s}");
            }
        }
    }

    #[test]
    fn cdf_examples() {
        for n in [1, 4, 25] {
            assert!((scaled_cdf(&EnsembleSpec::Hermite, n, 0.0).unwrap() - 0.5).abs() < 1e-9);
        }
        assert_eq!(scaled_cdf(&EnsembleSpec::legendre(), 3, -50.0).unwrap(), 0.0);
        assert_eq!(scaled_cdf(&EnsembleSpec::Laguerre { a: 0.0 }, 3, -0.1).unwrap(), 0.0);
        let d1 = 1.0 / 3.0f64;
        let c = scaled_cdf(&EnsembleSpec::legendre(), 1, 0.5 / d1.sqrt()).unwrap();
        assert!((c - 0.75).abs() < 1e-9);
        let top = scaled_cdf(&EnsembleSpec::Laguerre { a: 1.5 }, 12, 100.0).unwrap();
        assert!((top - 1.0).abs() < 1e-8);
    }

    #[test]
    fn cdf_is_monotone_and_table_agrees() {
        let d = ScaledDensity::new(&EnsembleSpec::Jacobi { a: 0.5, b: -0.25 }, 9).unwrap();
        let table = d.cdf_table().unwrap();
        let (lo, hi) = d.effective_support();
        let mut last = 0.0;
        for y in linspace(lo - 0.1, hi + 0.1, 97) {
            let direct = d.cdf(y).unwrap();
            assert!(direct + 1e-12 >= last);
            assert!((direct - table.eval(y)).abs() < 1e-8, "y={y}");
            last = direct;
        }
        assert!((table.total() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn normalization_and_moments_match_operator_route() {
        for spec in presets() {
            let table = recurrence_coefficients(&spec, 120).unwrap();
            for n in [1, 5, 30, 100] {
                let d = ScaledDensity::new(&spec, n).unwrap();
                assert!((d.moment(0).unwrap() - 1.0).abs() < 1e-6, "{spec:?} n={n}");
                for k in 1..=8 {
                    let quad = d.moment(k).unwrap();
                    let exact = scaled_moment(&table, n, k).unwrap();
                    assert!((quad - exact).abs() < 1e-6, "{spec:?} n={n} k={k}: {quad} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn even_weights_give_symmetric_density() {
        for spec in [EnsembleSpec::Hermite, EnsembleSpec::legendre(), EnsembleSpec::Jacobi { a: 0.7, b: 0.7 }] {
            let d = ScaledDensity::new(&spec, 33).unwrap();
            for y in linspace(0.0, 1.9, 40) {
                let (p, m) = (d.density(y), d.density(-y));
                assert!((p - m).abs() <= 1e-12 * p.max(1.0), "{spec:?} y={y}");
            }
        }
    }

    #[test]
    fn custom_spec_is_unsupported() {
        use crate::ensembles::{CustomRecurrence, GrowthParams};
        let c = CustomRecurrence::new(vec![0.5; 4], vec![0.0; 4], GrowthParams::new(0.5, 0.0, 0.0).unwrap()).unwrap();
        assert!(matches!(ScaledDensity::new(&EnsembleSpec::Custom(c), 2), Err(Error::Capability { .. })));
    }

    #[test]
    fn grid_csv_round_trip() {
        let g = scaled_density(&EnsembleSpec::Laguerre { a: 1.5 }, 6, &linspace(0.0, 3.0, 31)).unwrap();
        let back = DensityGrid::from_csv(&g.to_csv()).unwrap();
        assert_eq!(back, g);
        let lim = limit_grid(LimitFamily::ArcsineJ, &linspace(-1.0, 1.0, 11)).unwrap();
        assert_eq!(DensityGrid::from_csv(&lim.to_csv()).unwrap(), lim);
    }

    #[test]
    fn bad_grids_are_rejected() {
        assert!(scaled_density(&EnsembleSpec::Hermite, 3, &[0.0, 0.0, 1.0]).is_err());
        assert!(scaled_density(&EnsembleSpec::Hermite, 3, &[1.0]).is_err());
    }
}
