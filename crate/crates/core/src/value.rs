//! The game value `γ`: the least inflation `l ≥ 0` for which the pursuers'
//! inflated attainability balls cover the evader's attainability ball.
//!
//! Computed in the variational form `γ = max(0, max_{z ∈ B(y0, σ√θ)} deficit(z))`
//! where `deficit(z) = min_n (‖z − x_n0‖ − R_n)`. Two independent routes are
//! provided: a multi-start projected subgradient solver with a local polish
//! ([`gamma_optimize`]) and a brute-force grid oracle ([`gamma_oracle`]).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{random_in_ball, random_unit, sphere_sample, Ball, Point};
use crate::model::{evader_radius, reachable_radius, Scenario, SparseVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Optimizer,
    Oracle,
    Analytic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameValue {
    pub gamma: f64,
    /// Maximizer of the deficit inside the closed evader ball.
    pub witness: Point,
    /// `‖witness − x_n0‖ − R_n` per pursuer, in scenario order.
    pub deficits: Vec<f64>,
    pub method: Method,
    /// Certified bracket, reported by the grid oracle only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub upper_bound: Option<f64>,
}

impl GameValue {
    fn at_witness(s: &Scenario, witness: Point, method: Method) -> Self {
        let deficits = deficits_at(s, &witness);
        let best = deficits.iter().copied().fold(f64::INFINITY, f64::min);
        GameValue {
            gamma: best.max(0.0),
            witness,
            deficits,
            method,
            lower_bound: None,
            upper_bound: None,
        }
    }
}

fn deficits_at(s: &Scenario, z: &Point) -> Vec<f64> {
    s.pursuers
        .iter()
        .map(|p| z.dist(&p.x0) - reachable_radius(p, s.theta))
        .collect()
}

/// `min_n (‖z − x_n0‖ − R_n)`; `z ∈ ∪ G_n(l)` iff `deficit(z) ≤ l`.
pub fn deficit(s: &Scenario, z: &Point) -> Result<f64> {
    if s.pursuers.is_empty() {
        return Err(Error::InvalidInput("deficit needs at least one pursuer".into()));
    }
    if z.dim() != s.dimension {
        return Err(Error::DimensionMismatch { expected: s.dimension, found: z.dim() });
    }
    Ok(deficits_at(s, z).into_iter().fold(f64::INFINITY, f64::min))
}

/// Precomputed pursuer data for fast repeated deficit evaluation. Centres are
/// stored sparsely, so one evaluation costs `O(d + Σ nnz(x_n0))`.
pub(crate) struct DeficitField {
    centres: Vec<SparseVec>,
    centre_norm_sq: Vec<f64>,
    reach: Vec<f64>,
    ids: Vec<u64>,
}

impl DeficitField {
    pub fn new(s: &Scenario) -> Self {
        DeficitField {
            centres: s.pursuers.iter().map(|p| SparseVec::from_point(&p.x0)).collect(),
            centre_norm_sq: s.pursuers.iter().map(|p| p.x0.norm_sq()).collect(),
            reach: s.pursuers.iter().map(|p| reachable_radius(p, s.theta)).collect(),
            ids: s.pursuers.iter().map(|p| p.id).collect(),
        }
    }

    /// Minimising pursuer index and distance; ties go to the lowest id.
    pub fn argmin(&self, z: &[f64]) -> (usize, f64, f64) {
        let zz: f64 = z.iter().map(|v| v * v).sum();
        let mut best = (0usize, f64::INFINITY, 0.0);
        for (n, c) in self.centres.iter().enumerate() {
            let d2 = (zz - 2.0 * c.dot(z) + self.centre_norm_sq[n]).max(0.0);
            let dist = d2.sqrt();
            let val = dist - self.reach[n];
            if val < best.1 || (val == best.1 && self.ids[n] < self.ids[best.0]) {
                best = (n, val, dist);
            }
        }
        best
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        self.argmin(z).1
    }

    /// Ascent direction `(z − x_n*)/‖z − x_n*‖` of the minimising pursuer.
    fn subgradient(&self, z: &[f64], n: usize, dist: f64, out: &mut [f64]) {
        out.copy_from_slice(z);
        let c = &self.centres[n];
        for (i, v) in c.idx.iter().zip(&c.val) {
            out[*i] -= v;
        }
        // recompute densely near the centre, where the expanded form loses digits
        let exact = out.iter().map(|v| v * v).sum::<f64>().sqrt();
        let norm = if exact > 0.0 { exact } else { dist };
        if norm < 1e-12 {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[0] = 1.0;
        } else {
            out.iter_mut().for_each(|v| *v /= norm);
        }
    }
}

fn project_into(center: &[f64], radius: f64, z: &mut [f64]) {
    let d2: f64 = z.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
    let d = d2.sqrt();
    if d > radius {
        let s = radius / d;
        for (a, c) in z.iter_mut().zip(center) {
            *a = c + (*a - c) * s;
        }
    }
}

/// Settings for [`gamma_optimize`].
#[derive(Clone, Copy, Debug)]
pub struct OptimizeConfig {
    pub starts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig { starts: 64, iters: 5000, seed: 0 }
    }
}

struct Ascent {
    value: f64,
    point: Vec<f64>,
}

/// Projected subgradient ascent on the deficit. `step0 / √k` when `decay` is
/// `None`, otherwise the geometric schedule `step0 · decay^k`. Returns the
/// best iterate.
fn ascend(field: &DeficitField, center: &[f64], radius: f64, start: Vec<f64>, iters: usize, step0: f64, decay: Option<f64>) -> Ascent {
    let mut z = start;
    project_into(center, radius, &mut z);
    let mut g = vec![0.0; z.len()];
    let (mut n, mut val, mut dist) = field.argmin(&z);
    let mut best = Ascent { value: val, point: z.clone() };
    let mut step = step0;
    for k in 1..=iters {
        field.subgradient(&z, n, dist, &mut g);
        let h = match decay {
            None => step0 / (k as f64).sqrt(),
            Some(q) => {
                step *= q;
                step
            }
        };
        for (a, b) in z.iter_mut().zip(&g) {
            *a += h * b;
        }
        project_into(center, radius, &mut z);
        (n, val, dist) = field.argmin(&z);
        if val > best.value {
            best.value = val;
            best.point.copy_from_slice(&z);
        }
    }
    best
}

/// Geometric-step polish around a candidate maximizer.
///
/// The deficit is a minimum of finitely many smooth pieces, so near a sharp
/// maximizer a geometrically shrinking step converges linearly where the
/// `1/√k` rule stalls at the step length. A few rounds restart from the best
/// point with a smaller initial step.
fn polish(field: &DeficitField, center: &[f64], radius: f64, start: Ascent, iters: usize) -> Ascent {
    let mut best = start;
    let rounds = 4;
    let per_round = (iters / rounds).max(50);
    let mut step0 = 1e-2 * radius.max(1e-12);
    let floor = 1e-13 * radius.max(1e-12);
    for _ in 0..rounds {
        let decay = (floor / step0).powf(1.0 / per_round as f64);
        let cand = ascend(field, center, radius, best.point.clone(), per_round, step0, Some(decay));
        if cand.value > best.value {
            best = cand;
        }
        step0 *= 0.1;
    }
    best
}

/// Multi-start projected subgradient maximization of the deficit over the
/// evader ball, followed by a geometric-step polish of the best start.
///
/// Deterministic for a given `cfg.seed`; starts are evaluated in parallel and
/// merged by value with the lowest start index winning ties.
pub fn gamma_optimize(s: &Scenario, cfg: &OptimizeConfig) -> Result<GameValue> {
    if cfg.starts == 0 || cfg.iters == 0 {
        return Err(Error::InvalidInput("starts and iters must be >= 1".into()));
    }
    s.validate()?;
    let field = DeficitField::new(s);
    let r = evader_radius(s);
    let d = s.dimension;
    let center = s.y0.coords().to_vec();

    let starts: Vec<Vec<f64>> = (0..cfg.starts).map(|i| start_point(s, r, cfg.seed, i)).collect();
    let results: Vec<Ascent> = starts
        .into_par_iter()
        .map(|z| ascend(&field, &center, r, z, cfg.iters, r, None))
        .collect();
    let mut best = results
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one start");
    best = polish(&field, &center, r, best, 20 * cfg.iters.max(400));

    let mut witness = Point::from_vec_unchecked(best.point);
    if witness.dim() != d || !witness.is_finite() {
        return Err(Error::NonFinite("optimizer iterate".into()));
    }
    let ball = Ball { center: s.y0.clone(), radius: r };
    witness = ball.project(&witness);
    Ok(GameValue::at_witness(s, witness, Method::Optimizer))
}

/// Start 0 is the sphere point opposite the mean pursuer displacement; the
/// rest alternate between random sphere points and random interior points.
fn start_point(s: &Scenario, r: f64, seed: u64, index: usize) -> Vec<f64> {
    let d = s.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(index as u64));
    if index == 0 {
        let mut mean = Point::zeros(d);
        for p in &s.pursuers {
            mean.axpy(1.0, &(&p.x0 - &s.y0));
        }
        if let Some(dir) = mean.normalized() {
            let mut z = s.y0.clone();
            z.axpy(-r, &dir);
            return z.into_coords();
        }
    }
    if index % 2 == 1 {
        let mut z = s.y0.clone();
        z.axpy(r, &random_unit(d, &mut rng));
        z.into_coords()
    } else {
        random_in_ball(&s.y0, r, &mut rng).into_coords()
    }
}

/// Best point of the sphere `S(y0, σ√θ)` reachable by local ascent from `start`,
/// using the same geometric-step schedule as the polish but with radial
/// projection onto the sphere.
pub(crate) fn best_on_sphere(s: &Scenario, start: &Point, iters: usize) -> Point {
    let field = DeficitField::new(s);
    let r = evader_radius(s);
    let center = s.y0.coords();
    let onto_sphere = |z: &mut [f64]| {
        let d = z.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
        if d > 0.0 {
            for (a, c) in z.iter_mut().zip(center) {
                *a = c + (*a - c) * r / d;
            }
        }
    };
    let mut z = start.coords().to_vec();
    onto_sphere(&mut z);
    let mut g = vec![0.0; z.len()];
    let (mut n, mut val, mut dist) = field.argmin(&z);
    let mut best = (val, z.clone());
    let mut step = 1e-2 * r;
    let decay = (1e-11f64).powf(1.0 / iters.max(1) as f64);
    for _ in 0..iters {
        field.subgradient(&z, n, dist, &mut g);
        for (a, b) in z.iter_mut().zip(&g) {
            *a += step * b;
        }
        onto_sphere(&mut z);
        step *= decay;
        (n, val, dist) = field.argmin(&z);
        if val > best.0 {
            best = (val, z.clone());
        }
    }
    Point::from_vec_unchecked(best.1)
}

/// Largest dimension accepted by the grid oracle.
pub const ORACLE_MAX_DIM: usize = 4;

/// Brute-force value: the deficit maximized over a regular grid of the evader
/// ball plus a sphere sample.
///
/// Grid nodes outside the ball are projected onto it, so every ball point is
/// within `h√d/2` of an evaluated point. Since the deficit is 1-Lipschitz the
/// true value lies in `[lower, lower + 2h]`, `h` being the grid spacing.
pub fn gamma_oracle(s: &Scenario, grid_per_axis: usize) -> Result<GameValue> {
    s.validate()?;
    let d = s.dimension;
    if d > ORACLE_MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "grid oracle supports dimension <= {ORACLE_MAX_DIM} (got {d}); use gamma_optimize"
        )));
    }
    if grid_per_axis < 3 {
        return Err(Error::InvalidInput("grid_per_axis must be >= 3".into()));
    }
    let r = evader_radius(s);
    let h = 2.0 * r / (grid_per_axis - 1) as f64;
    let ball = Ball { center: s.y0.clone(), radius: r };

    let mut best_val = f64::NEG_INFINITY;
    let mut best_pt = s.y0.clone();
    let mut consider = |z: Point| {
        let v = deficit_dense(s, &z);
        if v > best_val {
            best_val = v;
            best_pt = z;
        }
    };

    let total = grid_per_axis.pow(d as u32);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let coords: Vec<f64> = idx
            .iter()
            .zip(s.y0.coords())
            .map(|(i, c)| c - r + h * *i as f64)
            .collect();
        consider(ball.project(&Point::from_vec_unchecked(coords)));
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < grid_per_axis {
                break;
            }
            *slot = 0;
        }
    }
    for z in sphere_sample(&s.y0, r, 256 * d, 0x0AC1E) {
        consider(z);
    }

    let mut gv = GameValue::at_witness(s, best_pt, Method::Oracle);
    gv.lower_bound = Some(gv.gamma);
    gv.upper_bound = Some(gv.gamma + 2.0 * h);
    Ok(gv)
}

fn deficit_dense(s: &Scenario, z: &Point) -> f64 {
    s.pursuers
        .iter()
        .map(|p| z.dist(&p.x0) - reachable_radius(p, s.theta))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverCheck {
    /// No sampled point had deficit above `l + 1e-9`.
    pub covered: bool,
    pub worst: Point,
    pub worst_deficit: f64,
}

/// One-sided falsification of `B(y0, σ√θ) ⊂ ∪ G_n(l)`.
pub fn covering_check(s: &Scenario, l: f64, samples: usize, seed: u64) -> Result<CoverCheck> {
    covering_check_with_hints(s, l, samples, seed, &[])
}

/// [`covering_check`] with extra candidate points (e.g. an optimizer witness).
///
/// Samples half the ball uniformly and half the bounding sphere, then runs a
/// short local ascent from the best few candidates.
pub fn covering_check_with_hints(s: &Scenario, l: f64, samples: usize, seed: u64, hints: &[Point]) -> Result<CoverCheck> {
    if !(l >= 0.0) {
        return Err(Error::InvalidInput(format!("level {l} must be >= 0")));
    }
    if s.pursuers.is_empty() {
        return Err(Error::InvalidInput("covering check needs at least one pursuer".into()));
    }
    for h in hints {
        if h.dim() != s.dimension {
            return Err(Error::DimensionMismatch { expected: s.dimension, found: h.dim() });
        }
    }
    let field = DeficitField::new(s);
    let r = evader_radius(s);
    let ball = Ball { center: s.y0.clone(), radius: r };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut candidates: Vec<Point> = hints.iter().map(|h| ball.project(h)).collect();
    for i in 0..samples {
        if i % 2 == 0 {
            candidates.push(random_in_ball(&s.y0, r, &mut rng));
        } else {
            let mut z = s.y0.clone();
            z.axpy(r, &random_unit(s.dimension, &mut rng));
            candidates.push(z);
        }
    }
    let mut scored: Vec<(f64, Point)> = candidates.into_iter().map(|z| (field.value(z.coords()), z)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.truncate(4);
    let center = s.y0.coords().to_vec();
    let mut best = scored[0].clone();
    for (_, z) in &scored {
        let a = ascend(&field, &center, r, z.coords().to_vec(), 200, 0.1 * r, None);
        if a.value > best.0 {
            best = (a.value, Point::from_vec_unchecked(a.point));
        }
    }
    let worst_deficit = deficit_dense(s, &best.1);
    Ok(CoverCheck {
        covered: worst_deficit <= l + 1e-9,
        worst: best.1,
        worst_deficit,
    })
}
