//! Limits of the scaled moments and the classical limit densities.
//!
//! For growth parameters `(ξ, ζ, t)`,
//!
//! ```text
//! r₁(k) = Σ_{i ≤ k/2} C(k,i) C(k-i,i) ξ^{2i} ζ^{k-2i},   r₂(k) = (2ξ² + ζ²)^{k/2},
//! M^(k) = r₁(k)/r₂(k) · (2t+1)^{k/2} / (kt+1).
//! ```
//!
//! The three classical densities live in the scaled coordinates where the
//! second moment is one: semicircle on `[-2, 2]`, the Laguerre law on
//! `(0, 2√2]` and the arcsine law on `(-√2, √2)`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::ensembles::{EnsembleSpec, GrowthParams, Support};
use crate::error::{Error, Result};
use crate::integrate::{integrate, Tolerance};

/// Largest order for which the binomial products are formed exactly.
pub const MAX_EXACT_ORDER: usize = 64;

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// `C(k, i) C(k-i, i)`, exact for `k ≤ 64`.
pub fn path_coefficient(k: usize, i: usize) -> u128 {
    debug_assert!(2 * i <= k);
    binomial(k as u128, i as u128) * binomial((k - i) as u128, i as u128)
}

/// The closed-form limit moments for one set of growth parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitMomentFormula {
    pub params: GrowthParams,
}

impl LimitMomentFormula {
    pub fn new(params: GrowthParams) -> Result<Self> {
        params.validate()?;
        Ok(LimitMomentFormula { params })
    }

    pub fn r1(&self, k: usize) -> f64 {
        let GrowthParams { xi, zeta, .. } = self.params;
        (0..=k / 2)
            .map(|i| path_coefficient(k, i) as f64 * xi.powi(2 * i as i32) * zeta.powi((k - 2 * i) as i32))
            .sum()
    }

    pub fn r2(&self, k: usize) -> f64 {
        let GrowthParams { xi, zeta, .. } = self.params;
        (2.0 * xi * xi + zeta * zeta).powf(k as f64 / 2.0)
    }

    pub fn moment(&self, k: usize) -> Result<f64> {
        if k > MAX_EXACT_ORDER {
            return Err(Error::range("limits", format!("order {k} exceeds the exact binomial range {MAX_EXACT_ORDER}")));
        }
        let t = self.params.t;
        let kf = k as f64;
        Ok(self.r1(k) / self.r2(k) * (2.0 * t + 1.0).powf(kf / 2.0) / (kf * t + 1.0))
    }
}

/// `M^(k)` for the given growth parameters.
pub fn limit_moment(params: &GrowthParams, k: usize) -> Result<f64> {
    LimitMomentFormula::new(*params)?.moment(k)
}

/// The classical limit laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitFamily {
    SemicircleG,
    LaguerreL,
    ArcsineJ,
}

const LAGUERRE_EDGE: f64 = 2.0 * SQRT_2;

impl LimitFamily {
    pub const ALL: [LimitFamily; 3] = [LimitFamily::SemicircleG, LimitFamily::LaguerreL, LimitFamily::ArcsineJ];

    /// The limit law of a preset ensemble; custom recurrences have none on record.
    pub fn for_spec(spec: &EnsembleSpec) -> Option<Self> {
        match spec {
            EnsembleSpec::Hermite => Some(LimitFamily::SemicircleG),
            EnsembleSpec::Laguerre { .. } => Some(LimitFamily::LaguerreL),
            EnsembleSpec::Jacobi { .. } => Some(LimitFamily::ArcsineJ),
            EnsembleSpec::Custom(_) => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LimitFamily::SemicircleG => "semicircle_G",
            LimitFamily::LaguerreL => "laguerre_L",
            LimitFamily::ArcsineJ => "arcsine_J",
        }
    }

    /// Growth parameters of the ensembles converging to this law.
    pub fn growth(self) -> GrowthParams {
        match self {
            LimitFamily::SemicircleG => GrowthParams { xi: std::f64::consts::FRAC_1_SQRT_2, zeta: 0.0, t: 0.5 },
            LimitFamily::LaguerreL => GrowthParams { xi: -1.0, zeta: 2.0, t: 1.0 },
            LimitFamily::ArcsineJ => GrowthParams { xi: 0.5, zeta: 0.0, t: 0.0 },
        }
    }

    pub fn support(self) -> Support {
        match self {
            LimitFamily::SemicircleG => Support { lower: -2.0, upper: 2.0 },
            LimitFamily::LaguerreL => Support { lower: 0.0, upper: LAGUERRE_EDGE },
            LimitFamily::ArcsineJ => Support { lower: -SQRT_2, upper: SQRT_2 },
        }
    }

    pub fn density(self, x: f64) -> f64 {
        match self {
            LimitFamily::SemicircleG if x.abs() <= 2.0 => (4.0 - x * x).sqrt() / (2.0 * PI),
            LimitFamily::LaguerreL if x > 0.0 && x <= LAGUERRE_EDGE => (LAGUERRE_EDGE - x).sqrt() / (PI * (2.0 * x).sqrt()),
            LimitFamily::ArcsineJ if x.abs() < SQRT_2 => 1.0 / (PI * (2.0 - x * x).sqrt()),
            _ => 0.0,
        }
    }

    /// Closed-form distribution function.
    pub fn cdf(self, x: f64) -> f64 {
        let s = self.support();
        if x <= s.lower {
            return 0.0;
        }
        if x >= s.upper {
            return 1.0;
        }
        match self {
            LimitFamily::SemicircleG => 0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI,
            LimitFamily::LaguerreL => {
                let theta = (x / LAGUERRE_EDGE).sqrt().asin();
                2.0 / PI * (theta + theta.sin() * theta.cos())
            }
            LimitFamily::ArcsineJ => 0.5 + (x / SQRT_2).asin() / PI,
        }
    }

    /// `x(θ)` and `σ(x(θ)) x'(θ)` for the substitution that removes the edge
    /// singularities, with the θ-range.
    fn substituted(self) -> (f64, f64, fn(f64) -> (f64, f64)) {
        match self {
            // x = 2 sin θ
            LimitFamily::SemicircleG => (-FRAC_PI_2, FRAC_PI_2, |th| {
                let c = th.cos();
                (2.0 * th.sin(), 2.0 / PI * c * c)
            }),
            // x = 2√2 sin² θ
            LimitFamily::LaguerreL => (0.0, FRAC_PI_2, |th| {
                let (s, c) = th.sin_cos();
                (LAGUERRE_EDGE * s * s, 4.0 / PI * c * c)
            }),
            // x = √2 sin θ
            LimitFamily::ArcsineJ => (-FRAC_PI_2, FRAC_PI_2, |th| (SQRT_2 * th.sin(), 1.0 / PI)),
        }
    }
}

/// A classical limit law together with its support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitDensity {
    pub family: LimitFamily,
    pub support: Support,
}

impl LimitDensity {
    pub fn new(family: LimitFamily) -> Self {
        LimitDensity { family, support: family.support() }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.family.density(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.family.cdf(x)
    }
}

pub fn limit_density(family: LimitFamily, x: f64) -> f64 {
    family.density(x)
}

/// Largest order accepted by [`density_moment_oracle`].
pub const MAX_ORACLE_ORDER: usize = 32;

/// `∫ x^k σ(x) dx` by adaptive quadrature after the edge substitution.
pub fn density_moment_oracle(family: LimitFamily, k: usize) -> Result<f64> {
    if k > MAX_ORACLE_ORDER {
        return Err(Error::range("limits", format!("oracle supports k <= {MAX_ORACLE_ORDER}, got {k}")));
    }
    let (lo, hi, map) = family.substituted();
    let tol = Tolerance { abs: 1e-15, rel: 1e-15, max_intervals: 2_000, initial_panels: 8 };
    integrate(
        |th| {
            let (x, jac) = map(th);
            x.powi(k as i32) * jac
        },
        lo,
        hi,
        tol,
    )
    .or_else(|_| {
        // Relative 1e-15 can be out of reach for large k; fall back to 1e-13.
        integrate(
            |th| {
                let (x, jac) = map(th);
                x.powi(k as i32) * jac
            },
            lo,
            hi,
            Tolerance { rel: 1e-13, ..tol },
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomial_products() {
        assert_eq!(path_coefficient(4, 2), 6);
        assert_eq!(path_coefficient(4, 1), 12);
        assert_eq!(path_coefficient(64, 32), binomial(64, 32));
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
    }

    #[test]
    fn classical_examples() {
        let gue = LimitFamily::SemicircleG.growth();
        assert!((limit_moment(&gue, 4).unwrap() - 2.0).abs() < 1e-12);
        assert!((limit_moment(&gue, 6).unwrap() - 5.0).abs() < 1e-12);
        let laue = LimitFamily::LaguerreL.growth();
        assert!((limit_moment(&laue, 1).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((limit_moment(&laue, 2).unwrap() - 1.0).abs() < 1e-12);
        let jue = LimitFamily::ArcsineJ.growth();
        assert!((limit_moment(&jue, 4).unwrap() - 1.5).abs() < 1e-12);
        assert!(matches!(limit_moment(&jue, 65), Err(Error::Range { .. })));
    }

    #[test]
    fn catalan_and_central_binomial_patterns() {
        let gue = LimitFamily::SemicircleG.growth();
        let laue = LimitFamily::LaguerreL.growth();
        let jue = LimitFamily::ArcsineJ.growth();
        for m in 0..=10usize {
            let c = binomial(2 * m as u128, m as u128) as f64;
            assert!((limit_moment(&gue, 2 * m).unwrap() - c / (m as f64 + 1.0)).abs() < 1e-10 * c);
            assert_eq!(limit_moment(&gue, 2 * m + 1).unwrap(), 0.0);
            assert!((limit_moment(&jue, 2 * m).unwrap() - c / 2f64.powi(m as i32)).abs() < 1e-10 * c);
            assert_eq!(limit_moment(&jue, 2 * m + 1).unwrap(), 0.0);
            let k = m;
            let expected = binomial(2 * k as u128, k as u128) as f64 / (2f64.powf(k as f64 / 2.0) * (k as f64 + 1.0));
            assert!((limit_moment(&laue, k).unwrap() - expected).abs() < 1e-10 * expected);
        }
    }

    #[test]
    fn densities_at_reference_points() {
        assert!((limit_density(LimitFamily::SemicircleG, 0.0) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(limit_density(LimitFamily::SemicircleG, 2.0), 0.0);
        assert_eq!(limit_density(LimitFamily::SemicircleG, -2.0), 0.0);
        assert!((limit_density(LimitFamily::ArcsineJ, 0.0) - 0.2250791).abs() < 1e-7);
        assert_eq!(limit_density(LimitFamily::LaguerreL, -0.1), 0.0);
        assert_eq!(limit_density(LimitFamily::ArcsineJ, 1.5), 0.0);
    }

    #[test]
    fn oracle_examples() {
        assert!((density_moment_oracle(LimitFamily::SemicircleG, 6).unwrap() - 5.0).abs() < 1e-12);
        assert!((density_moment_oracle(LimitFamily::LaguerreL, 2).unwrap() - 1.0).abs() < 1e-12);
        assert!((density_moment_oracle(LimitFamily::ArcsineJ, 2).unwrap() - 1.0).abs() < 1e-12);
        assert!(density_moment_oracle(LimitFamily::ArcsineJ, 33).is_err());
    }

    #[test]
    fn oracle_matches_formula() {
        for family in LimitFamily::ALL {
            for k in 0..=16 {
                let exact = limit_moment(&family.growth(), k).unwrap();
                let quad = density_moment_oracle(family, k).unwrap();
                assert!((exact - quad).abs() < 1e-9, "{family:?} k={k}: {exact} vs {quad}");
            }
        }
    }

    #[test]
    fn closed_form_cdfs_match_integrals() {
        for family in LimitFamily::ALL {
            let s = family.support();
            for frac in [0.1, 0.37, 0.5, 0.8, 0.99] {
                let x = s.lower + frac * (s.upper - s.lower);
                let numeric = integrate(|y| family.density(y), s.lower, x, Tolerance::default()).unwrap();
                assert!((numeric - family.cdf(x)).abs() < 1e-8, "{family:?} at {x}");
            }
            assert_eq!(family.cdf(s.lower - 1.0), 0.0);
            assert_eq!(family.cdf(s.upper + 1.0), 1.0);
        }
    }

    fn arb_params() -> impl Strategy<Value = GrowthParams> {
        (prop_oneof![-5.0f64..-0.01, 0.01f64..5.0], 0.0f64..5.0, 0.0f64..=1.0)
            .prop_map(|(xi, zeta, t)| GrowthParams { xi, zeta, t })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn second_limit_moment_is_one(p in arb_params()) {
            prop_assert!((limit_moment(&p, 2).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn odd_limit_moments_vanish_without_drift(xi in 0.01f64..5.0, t in 0.0f64..=1.0, m in 0usize..20) {
            let p = GrowthParams { xi, zeta: 0.0, t };
            prop_assert_eq!(limit_moment(&p, 2 * m + 1).unwrap(), 0.0);
        }
    }
}
