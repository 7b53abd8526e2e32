//! Built-in scenarios for the reference example family: integral pursuers with
//! `ρ = 2` placed at `3·e_k`, geometric pursuers with `ρ = 1` placed at
//! `8·e_k`, the evader at the origin with `σ = 2` and `θ = 9`.

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::model::{ConstraintClass, Pursuer, Scenario};

pub const THETA: f64 = 9.0;
pub const SIGMA: f64 = 2.0;
pub const RHO_INTEGRAL: f64 = 2.0;
pub const RHO_GEOMETRIC: f64 = 1.0;
pub const OFFSET_INTEGRAL: f64 = 3.0;
pub const OFFSET_GEOMETRIC: f64 = 8.0;
/// Published value for the reference example, rounded to one decimal.
pub const STATED_GAMMA: f64 = 0.7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExamplePreset {
    /// One integral and one geometric pursuer on every axis.
    SharedAxes,
    /// Integral pursuers on even axes, geometric pursuers on odd axes.
    DisjointAxes,
    /// Integral pursuers only, one per axis.
    IntegralOnly,
    /// Geometric pursuers only, one per axis.
    GeometricOnly,
}

impl ExamplePreset {
    pub const ALL: [ExamplePreset; 4] = [
        ExamplePreset::SharedAxes,
        ExamplePreset::DisjointAxes,
        ExamplePreset::IntegralOnly,
        ExamplePreset::GeometricOnly,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExamplePreset::SharedAxes => "shared-axes",
            ExamplePreset::DisjointAxes => "disjoint-axes",
            ExamplePreset::IntegralOnly => "integral-only",
            ExamplePreset::GeometricOnly => "geometric-only",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// The preset truncated to dimension `d` (`d ≥ 2` for the disjoint placement).
    pub fn scenario(&self, d: usize) -> Scenario {
        let integral = |k: usize, id: u64| Pursuer {
            id,
            x0: Point::axis(d, k, OFFSET_INTEGRAL),
            constraint: ConstraintClass::integral(RHO_INTEGRAL),
        };
        let geometric = |k: usize, id: u64| Pursuer {
            id,
            x0: Point::axis(d, k, OFFSET_GEOMETRIC),
            constraint: ConstraintClass::geometric(RHO_GEOMETRIC),
        };
        let mut pursuers = Vec::new();
        match self {
            ExamplePreset::SharedAxes => {
                pursuers.extend((0..d).map(|k| integral(k, k as u64)));
                pursuers.extend((0..d).map(|k| geometric(k, (d + k) as u64)));
            }
            ExamplePreset::DisjointAxes => {
                pursuers.extend((0..d).step_by(2).map(|k| integral(k, k as u64)));
                pursuers.extend((1..d).step_by(2).map(|k| geometric(k, k as u64)));
            }
            ExamplePreset::IntegralOnly => pursuers.extend((0..d).map(|k| integral(k, k as u64))),
            ExamplePreset::GeometricOnly => pursuers.extend((0..d).map(|k| geometric(k, k as u64))),
        }
        Scenario::new(d, THETA, SIGMA, Point::zeros(d), pursuers).expect("preset is valid")
    }

    /// Exact truncated value `γ_d`, or `None` when undefined (disjoint, d < 2).
    ///
    /// With `m` pursuers of offset `c` and reach `R` on their own axes, the
    /// worst evader point puts `−a` on each of those axes, giving deficit
    /// `√(r² + c² + 2ca) − R` where `r = σ√θ`.
    pub fn analytic_gamma(&self, d: usize) -> Option<f64> {
        let r2 = SIGMA * SIGMA * THETA;
        let r = r2.sqrt();
        let ri = RHO_INTEGRAL * THETA.sqrt();
        let rj = RHO_GEOMETRIC * THETA;
        let ci = OFFSET_INTEGRAL;
        let cj = OFFSET_GEOMETRIC;
        let piece = |c: f64, reach: f64, a: f64| (r2 + c * c + 2.0 * c * a).sqrt() - reach;
        let a = r / (d as f64).sqrt();
        let g = match self {
            ExamplePreset::SharedAxes => piece(ci, ri, a).min(piece(cj, rj, a)),
            ExamplePreset::IntegralOnly => piece(ci, ri, a),
            ExamplePreset::GeometricOnly => piece(cj, rj, a),
            ExamplePreset::DisjointAxes => {
                if d < 2 {
                    return None;
                }
                let ni = d.div_ceil(2) as f64;
                let nj = (d / 2) as f64;
                // a on integral axes, b on geometric axes, ni·a² + nj·b² = r²;
                // the integral piece grows with a and the geometric piece shrinks.
                let b_of = |a: f64| ((r2 - ni * a * a).max(0.0) / nj).sqrt();
                let f = |a: f64| piece(ci, ri, a) - piece(cj, rj, b_of(a));
                let (mut lo, mut hi) = (0.0, r / ni.sqrt());
                if f(hi) <= 0.0 {
                    lo = hi;
                } else if f(lo) < 0.0 {
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if f(mid) < 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                }
                piece(ci, ri, lo).min(piece(cj, rj, b_of(lo)))
            }
        };
        Some(g.max(0.0))
    }

    /// `lim_{d→∞} γ_d`.
    pub fn limit_gamma(&self) -> f64 {
        let r2 = SIGMA * SIGMA * THETA;
        let li = (r2 + OFFSET_INTEGRAL * OFFSET_INTEGRAL).sqrt() - RHO_INTEGRAL * THETA.sqrt();
        let lj = (r2 + OFFSET_GEOMETRIC * OFFSET_GEOMETRIC).sqrt() - RHO_GEOMETRIC * THETA;
        match self {
            ExamplePreset::GeometricOnly => lj,
            ExamplePreset::IntegralOnly => li,
            _ => li.min(lj),
        }
    }
}

/// Polynomial extrapolation to `h = 0` (Neville's scheme) of samples
/// `(h_k, f(h_k))`, the Richardson limit for a smooth `f`.
pub fn extrapolate_to_zero(samples: &[(f64, f64)]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let h: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut p: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let n = p.len();
    for level in 1..n {
        for i in 0..n - level {
            let (hi, hj) = (h[i], h[i + level]);
            if hi == hj {
                return None;
            }
            p[i] = (hj * p[i] - hi * p[i + 1]) / (hj - hi);
        }
    }
    Some(p[0])
}

/// Extrapolated `d → ∞` limit of `γ_d`, with `h = 1/√d` as expansion variable.
pub fn extrapolate_dimension_limit(values: &[(usize, f64)]) -> Option<f64> {
    let samples: Vec<(f64, f64)> = values.iter().map(|(d, g)| (1.0 / (*d as f64).sqrt(), *g)).collect();
    extrapolate_to_zero(&samples)
}
