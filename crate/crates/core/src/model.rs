//! Scenario definition, attainability domains, Assumption (A) and the active
//! pursuer set.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{random_unit, HalfSpace, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    /// `∫‖u‖² dt ≤ ρ²` over the whole game.
    Integral,
    /// `‖u(t)‖ ≤ ρ` at every instant.
    Geometric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintClass {
    pub kind: ConstraintKind,
    pub rho: f64,
}

impl ConstraintClass {
    pub fn integral(rho: f64) -> Self {
        ConstraintClass { kind: ConstraintKind::Integral, rho }
    }

    pub fn geometric(rho: f64) -> Self {
        ConstraintClass { kind: ConstraintKind::Geometric, rho }
    }

    /// Radius of the attainability ball after `theta` time units.
    pub fn reach(&self, theta: f64) -> f64 {
        match self.kind {
            ConstraintKind::Integral => self.rho * theta.sqrt(),
            ConstraintKind::Geometric => self.rho * theta,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pursuer {
    pub id: u64,
    pub x0: Point,
    pub constraint: ConstraintClass,
}

/// A complete game instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub dimension: usize,
    pub theta: f64,
    pub sigma: f64,
    pub y0: Point,
    pub pursuers: Vec<Pursuer>,
}

impl Scenario {
    pub fn new(dimension: usize, theta: f64, sigma: f64, y0: Point, pursuers: Vec<Pursuer>) -> Result<Self> {
        let s = Scenario { dimension, theta, sigma, y0, pursuers };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(Error::InvalidInput(format!("theta = {} must be finite and > 0", self.theta)));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidInput(format!("sigma = {} must be finite and > 0", self.sigma)));
        }
        if self.y0.dim() != self.dimension {
            return Err(Error::InvalidInput(format!(
                "y0 has dimension {}, scenario dimension is {}",
                self.y0.dim(),
                self.dimension
            )));
        }
        if self.pursuers.is_empty() {
            return Err(Error::InvalidInput("at least one pursuer is required".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, p) in self.pursuers.iter().enumerate() {
            if !seen.insert(p.id) {
                return Err(Error::InvalidInput(format!("pursuers[{i}]: duplicate id {}", p.id)));
            }
            if p.x0.dim() != self.dimension {
                return Err(Error::InvalidInput(format!(
                    "pursuers[{i}].x0 has dimension {}, scenario dimension is {}",
                    p.x0.dim(),
                    self.dimension
                )));
            }
            if !(p.constraint.rho > 0.0) || !p.constraint.rho.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "pursuers[{i}].rho = {} must be finite and > 0",
                    p.constraint.rho
                )));
            }
        }
        Ok(())
    }

    pub fn pursuer(&self, id: u64) -> Option<&Pursuer> {
        self.pursuers.iter().find(|p| p.id == id)
    }

    /// Copy of the scenario keeping only the pursuers accepted by `keep`.
    pub fn restricted<F: Fn(&Pursuer) -> bool>(&self, keep: F) -> Scenario {
        Scenario {
            pursuers: self.pursuers.iter().filter(|p| keep(p)).cloned().collect(),
            ..self.clone()
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawScenario = serde_json::from_str(text)?;
        raw.into_scenario()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// JSON rendering in the scenario file schema. Positions with fewer than
    /// a quarter of their coordinates nonzero use the sparse form.
    pub fn to_json_value(&self) -> serde_json::Value {
        fn position(p: &Point) -> serde_json::Value {
            let nnz = p.coords().iter().filter(|c| **c != 0.0).count();
            if 4 * nnz >= p.dim() {
                return serde_json::json!(p.coords());
            }
            let sparse: serde_json::Map<String, serde_json::Value> = p
                .coords()
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, c)| (i.to_string(), serde_json::json!(c)))
                .collect();
            serde_json::json!({ "sparse": sparse })
        }
        let pursuers: Vec<_> = self
            .pursuers
            .iter()
            .map(|p| {
                serde_json::json!({
                    "id": p.id,
                    "x0": position(&p.x0),
                    "rho": p.constraint.rho,
                    "constraint": p.constraint.kind,
                })
            })
            .collect();
        serde_json::json!({
            "dimension": self.dimension,
            "theta": self.theta,
            "sigma": self.sigma,
            "y0": position(&self.y0),
            "pursuers": pursuers,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    dimension: usize,
    theta: f64,
    sigma: f64,
    y0: RawPosition,
    pursuers: Vec<RawPursuer>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPursuer {
    id: u64,
    x0: RawPosition,
    rho: f64,
    constraint: ConstraintKind,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawPosition {
    Dense(Vec<f64>),
    Sparse { sparse: BTreeMap<String, f64> },
}

impl RawPosition {
    fn expand(self, dim: usize, field: &str) -> Result<Point> {
        match self {
            RawPosition::Dense(v) => {
                if v.len() != dim {
                    return Err(Error::InvalidInput(format!(
                        "{field}: expected {dim} coordinates, found {}",
                        v.len()
                    )));
                }
                Point::new(v).map_err(|e| Error::InvalidInput(format!("{field}: {e}")))
            }
            RawPosition::Sparse { sparse } => {
                let mut coords = vec![0.0; dim];
                for (key, value) in sparse {
                    let idx: usize = key
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("{field}.sparse: bad index {key:?}")))?;
                    if idx >= dim {
                        return Err(Error::InvalidInput(format!(
                            "{field}.sparse: index {idx} out of range for dimension {dim}"
                        )));
                    }
                    coords[idx] = value;
                }
                Point::new(coords).map_err(|e| Error::InvalidInput(format!("{field}: {e}")))
            }
        }
    }
}

impl RawScenario {
    fn into_scenario(self) -> Result<Scenario> {
        if self.dimension == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        let d = self.dimension;
        let y0 = self.y0.expand(d, "y0")?;
        let pursuers = self
            .pursuers
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                Ok(Pursuer {
                    id: p.id,
                    x0: p.x0.expand(d, &format!("pursuers[{i}].x0"))?,
                    constraint: ConstraintClass { kind: p.constraint, rho: p.rho },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Scenario::new(d, self.theta, self.sigma, y0, pursuers)
    }
}

pub fn reachable_radius(p: &Pursuer, theta: f64) -> f64 {
    p.constraint.reach(theta)
}

/// Radius `σ√θ` of the evader's attainability ball.
pub fn evader_radius(s: &Scenario) -> f64 {
    s.sigma * s.theta.sqrt()
}

/// Half-space of terminal evader positions for which the integral pursuit
/// law `u = (y0 − x0)/θ + v` stays within budget `ρ²`.
pub fn integral_capture_halfspace(x0: &Point, y0: &Point, rho: f64, sigma: f64, theta: f64) -> HalfSpace {
    HalfSpace {
        normal: y0 - x0,
        offset: (rho * rho - sigma * sigma) * theta + y0.norm_sq() - x0.norm_sq(),
    }
}

/// Half-space of terminal evader positions for which the geometric pursuit
/// law is guaranteed to close the gap by `θ`.
///
/// The closing-time bound involves `(ρ² − σ²)θ²`, which differs from the
/// integral half-space whenever `θ ≠ 1`.
pub fn geometric_capture_halfspace(x0: &Point, y0: &Point, rho: f64, sigma: f64, theta: f64) -> HalfSpace {
    HalfSpace {
        normal: y0 - x0,
        offset: (rho * rho - sigma * sigma) * theta * theta + y0.norm_sq() - x0.norm_sq(),
    }
}

/// Half-space `{z : 2(y0 − x0, z) ≤ R² − r² + ‖y0‖² − ‖x0‖²}` used to cover
/// the evader ball `B(y0, r)` by pursuers with reach `R`.
pub fn covering_halfspace(x0: &Point, y0: &Point, reach: f64, evader_reach: f64) -> HalfSpace {
    HalfSpace {
        normal: y0 - x0,
        offset: reach * reach - evader_reach * evader_reach + y0.norm_sq() - x0.norm_sq(),
    }
}

/// Witness direction for Assumption (A).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionACertificate {
    /// Unit vector with `(y0 − x_n0, p0) ≥ 0` for all pursuers.
    pub p0: Point,
    /// `min_n (y0 − x_n0, p0)`.
    pub min_slack: f64,
    /// Every pursuer starts at `y0`, so any direction works.
    pub degenerate: bool,
    /// Slack below `1e-6`: holds only up to numerical tolerance.
    pub marginal: bool,
}

/// Solver settings for [`check_assumption_a`].
#[derive(Clone, Copy, Debug)]
pub struct AssumptionASolver {
    pub starts: usize,
    pub iters: usize,
    pub seed: u64,
    /// Certificates with best slack below `-reject_tol` are reported absent.
    pub reject_tol: f64,
}

impl Default for AssumptionASolver {
    fn default() -> Self {
        AssumptionASolver { starts: 32, iters: 10_000, seed: 0, reject_tol: 1e-6 }
    }
}

/// Sparse copy of a vector: indices and values of the nonzero coordinates.
#[derive(Clone, Debug)]
pub(crate) struct SparseVec {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseVec {
    pub fn from_point(p: &Point) -> Self {
        let (idx, val) = p
            .coords()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .unzip();
        SparseVec { idx, val }
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.idx.iter().zip(&self.val).map(|(i, v)| dense[*i] * v).sum()
    }

    pub fn add_to(&self, scale: f64, dense: &mut [f64]) {
        for (i, v) in self.idx.iter().zip(&self.val) {
            dense[*i] += scale * v;
        }
    }
}

pub fn check_assumption_a(s: &Scenario) -> Option<AssumptionACertificate> {
    check_assumption_a_with(s, &AssumptionASolver::default())
}

/// Solves `max_{‖p‖≤1} min_n (y0 − x_n0, p)` by multi-start projected
/// subgradient ascent and normalizes the best iterate.
pub fn check_assumption_a_with(s: &Scenario, solver: &AssumptionASolver) -> Option<AssumptionACertificate> {
    let d = s.dimension;
    let sparse: Vec<SparseVec> = s.pursuers.iter().map(|p| SparseVec::from_point(&(&s.y0 - &p.x0))).collect();

    if sparse.iter().all(|a| a.idx.is_empty()) {
        return Some(AssumptionACertificate {
            p0: Point::axis(d, 0, 1.0),
            min_slack: 0.0,
            degenerate: true,
            marginal: true,
        });
    }

    let slack_of = |p: &Point| sparse.iter().map(|a| a.dot(p.coords())).fold(f64::INFINITY, f64::min);

    let nonzero: Vec<&SparseVec> = sparse.iter().filter(|a| !a.idx.is_empty()).collect();
    let mut best: Option<(f64, Point)> = None;
    if nonzero.len() == 1 || sparse.len() == 1 {
        let mut dense = vec![0.0; d];
        nonzero[0].add_to(1.0, &mut dense);
        let p0 = Point::from_vec_unchecked(dense).normalized().expect("nonzero displacement");
        best = Some((slack_of(&p0), p0));
    }

    if best.as_ref().is_none_or(|(v, _)| *v < 0.0) {
        for start in 0..solver.starts {
            let mut rng = ChaCha8Rng::seed_from_u64(solver.seed.wrapping_mul(0x9E37_79B9).wrapping_add(start as u64));
            let candidate = ascend_linear_maxmin(&sparse, d, solver.iters, &mut rng, start);
            if let Some(p0) = candidate.normalized() {
                let v = slack_of(&p0);
                if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, p0));
                }
            }
        }
    }

    let (min_slack, p0) = best?;
    if min_slack < -solver.reject_tol {
        return None;
    }
    Some(AssumptionACertificate {
        p0,
        min_slack,
        degenerate: false,
        marginal: min_slack < 1e-6,
    })
}

/// Projected subgradient ascent on the unit ball for `p ↦ min_n (a_n, p)`;
/// returns the best iterate by normalized slack.
fn ascend_linear_maxmin(a: &[SparseVec], d: usize, iters: usize, rng: &mut ChaCha8Rng, start: usize) -> Point {
    let mut p = if start == 0 {
        // average displacement direction
        let mut acc = vec![0.0; d];
        for v in a {
            v.add_to(1.0, &mut acc);
        }
        let acc = Point::from_vec_unchecked(acc);
        acc.normalized().unwrap_or_else(|| random_unit(d, rng))
    } else {
        random_unit(d, rng)
    };
    let normalized_slack = |p: &Point| {
        let n = p.norm();
        if n == 0.0 {
            return f64::NEG_INFINITY;
        }
        a.iter().map(|v| v.dot(p.coords())).fold(f64::INFINITY, f64::min) / n
    };
    let mut best = (normalized_slack(&p), p.clone());
    for k in 1..=iters {
        let (arg, _) = a
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.dot(p.coords())))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let step = 1.0 / (k as f64).sqrt();
        a[arg].add_to(step, p.coords_mut());
        let n = p.norm();
        if n > 1.0 {
            p = p.scaled(1.0 / n);
        }
        let v = normalized_slack(&p);
        if v > best.0 {
            best = (v, p.clone());
        }
    }
    best.1
}

/// Pursuers whose `γ`-inflated reach ball meets the sphere `S(y0, σ√θ)`.
pub fn active_set_k(s: &Scenario, gamma: f64) -> Vec<u64> {
    let r = evader_radius(s);
    s.pursuers
        .iter()
        .filter(|p| {
            let dist = p.x0.dist(&s.y0);
            (dist - r).abs() <= reachable_radius(p, s.theta) + gamma
        })
        .map(|p| p.id)
        .collect()
}
