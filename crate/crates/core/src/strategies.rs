//! Closed-loop control laws.
//!
//! * the integral-constraint pursuit law `u = (y0 − x0)/θ + v`;
//! * the geometric-constraint law that cancels the evader's velocity
//!   across the line of sight and closes along it, then shadows;
//! * fictitious pursuers with inflated resources, rescaled into real
//!   pursuer controls;
//! * the evader's straight run to a point the pursuers cannot cover.
//!
//! Instant-level laws are plain functions. The `advance_*` functions apply a
//! law over an interval on which the evader's control is constant and return
//! the exact piecewise-constant pursuer control as [`Segment`]s, splitting at
//! capture or budget exhaustion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::model::{evader_radius, reachable_radius, ConstraintKind, Pursuer, Scenario};
use crate::value::{best_on_sphere, deficit, GameValue};

/// Inflated resource `ρ̄_n(ε)` of a fictitious pursuer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FictitiousResource {
    pub pursuer_id: u64,
    pub rho_bar: f64,
    pub epsilon: f64,
    /// `max{1, ρ_n}`.
    pub k: f64,
}

impl FictitiousResource {
    /// Integral: `ρ + γ/√θ + ε/(k√θ)`; geometric: `ρ + γ/θ + ε/(kθ)`.
    pub fn new(p: &Pursuer, gamma: f64, theta: f64, epsilon: f64) -> Self {
        let rho = p.constraint.rho;
        let k = rho.max(1.0);
        let scale = match p.constraint.kind {
            ConstraintKind::Integral => theta.sqrt(),
            ConstraintKind::Geometric => theta,
        };
        FictitiousResource {
            pursuer_id: p.id,
            rho_bar: rho + gamma / scale + epsilon / (k * scale),
            epsilon,
            k,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pursuing,
    Shadowing,
    Frozen,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyState {
    pub pursuer_id: u64,
    pub mode: Mode,
    /// Capture time (geometric) or budget cutoff time (integral fictitious).
    pub switch_time: Option<f64>,
    pub budget_spent: f64,
    /// Line-of-sight unit vector `(y0 − x0)/‖y0 − x0‖`.
    pub direction: Option<Point>,
}

impl StrategyState {
    /// Initial state; a pursuer starting on the evader shadows from `t = 0`.
    pub fn new(pursuer_id: u64, x0: &Point, y0: &Point) -> Self {
        let direction = (y0 - x0).normalized();
        let (mode, switch_time) = if direction.is_some() {
            (Mode::Pursuing, None)
        } else {
            (Mode::Shadowing, Some(0.0))
        };
        StrategyState {
            pursuer_id,
            mode,
            switch_time,
            budget_spent: 0.0,
            direction,
        }
    }

    pub fn frozen(pursuer_id: u64) -> Self {
        StrategyState {
            pursuer_id,
            mode: Mode::Frozen,
            switch_time: None,
            budget_spent: 0.0,
            direction: None,
        }
    }
}

/// A piece of constant control held for `duration`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub control: Point,
}

/// `u = (y0 − x0)/θ + v`.
pub fn integral_pursuit_control(x0: &Point, y0: &Point, theta: f64, v_now: &Point) -> Point {
    let mut u = (y0 - x0).scaled(1.0 / theta);
    u.axpy(1.0, v_now);
    u
}

/// Integral law for a fictitious pursuer: the pursuit law while the running
/// square-integral is below `ρ̄²(ε)`, zero afterwards.
pub fn integral_fictitious_control(
    state: &StrategyState,
    res: &FictitiousResource,
    x0: &Point,
    y0: &Point,
    theta: f64,
    v_now: &Point,
    _t: f64,
) -> Point {
    if state.mode == Mode::Frozen || state.budget_spent >= res.rho_bar * res.rho_bar {
        return Point::zeros(x0.dim());
    }
    integral_pursuit_control(x0, y0, theta, v_now)
}

/// Applies [`integral_fictitious_control`] over `[t, t + dt]`, splitting the
/// interval exactly where the budget `ρ̄²(ε)` runs out.
pub fn advance_integral_fictitious(
    state: &mut StrategyState,
    res: &FictitiousResource,
    x0: &Point,
    y0: &Point,
    theta: f64,
    v: &Point,
    t: f64,
    dt: f64,
) -> Vec<Segment> {
    let w = integral_fictitious_control(state, res, x0, y0, theta, v, t);
    let rate = w.norm_sq();
    if rate == 0.0 {
        if state.mode != Mode::Frozen && res.rho_bar == 0.0 {
            state.mode = Mode::Frozen;
            state.switch_time = Some(t);
        }
        return vec![Segment { duration: dt, control: w }];
    }
    let remaining = res.rho_bar * res.rho_bar - state.budget_spent;
    if rate * dt <= remaining {
        state.budget_spent += rate * dt;
        return vec![Segment { duration: dt, control: w }];
    }
    let cut = (remaining / rate).clamp(0.0, dt);
    state.budget_spent = res.rho_bar * res.rho_bar;
    state.mode = Mode::Frozen;
    state.switch_time = Some(t + cut);
    let zero = Point::zeros(w.dim());
    vec![
        Segment { duration: cut, control: w },
        Segment { duration: dt - cut, control: zero },
    ]
}

/// The closing control `v − (v,e)e + e·√(ρ² − σ² + (v,e)²)` of the geometric
/// law, or an error when the radicand is negative.
pub fn geometric_closing_control(rho: f64, sigma: f64, e: &Point, v: &Point) -> Result<Point> {
    let ve = v.dot(e);
    let radicand = rho * rho - sigma * sigma + ve * ve;
    if radicand < 0.0 {
        return Err(Error::HypothesisViolated(format!(
            "rho^2 - sigma^2 + (v,e)^2 = {radicand} < 0 (rho = {rho}, sigma = {sigma})"
        )));
    }
    let mut u = v.clone();
    u.axpy(radicand.sqrt() - ve, e);
    Ok(u)
}

/// Geometric pursuit law at one instant. Switches to shadowing (`u = v`) once
/// `‖y − x‖ ≤ tol`, recording the switch time `t`.
pub fn geometric_pursuit_control(
    state: &StrategyState,
    rho: f64,
    sigma: f64,
    v_now: &Point,
    y_now: &Point,
    x_now: &Point,
    tol: f64,
    t: f64,
) -> Result<(Point, StrategyState)> {
    if sigma > rho {
        return Err(Error::HypothesisViolated(format!(
            "geometric pursuit needs sigma <= rho (sigma = {sigma}, rho = {rho})"
        )));
    }
    geometric_law(state, rho, sigma, v_now, y_now, x_now, tol, t)
}

/// The geometric law driven by a fictitious pursuer with resource `ρ̄_j(ε)`.
pub fn geometric_fictitious_control(
    state: &StrategyState,
    res: &FictitiousResource,
    sigma: f64,
    v_now: &Point,
    y_now: &Point,
    z_now: &Point,
    tol: f64,
    t: f64,
) -> Result<(Point, StrategyState)> {
    if !(res.rho_bar > sigma) {
        return Err(Error::HypothesisViolated(format!(
            "fictitious geometric pursuer {} needs rho_bar(eps) > sigma ({} <= {sigma})",
            res.pursuer_id, res.rho_bar
        )));
    }
    geometric_law(state, res.rho_bar, sigma, v_now, y_now, z_now, tol, t)
}

#[allow(clippy::too_many_arguments)]
fn geometric_law(
    state: &StrategyState,
    rho: f64,
    sigma: f64,
    v: &Point,
    y: &Point,
    x: &Point,
    tol: f64,
    t: f64,
) -> Result<(Point, StrategyState)> {
    let mut next = state.clone();
    match state.mode {
        Mode::Shadowing => Ok((v.clone(), next)),
        Mode::Frozen => Ok((Point::zeros(v.dim()), next)),
        Mode::Pursuing => {
            if y.dist(x) <= tol {
                next.mode = Mode::Shadowing;
                next.switch_time = Some(t);
                return Ok((v.clone(), next));
            }
            let e = state.direction.as_ref().expect("pursuing state has a direction");
            Ok((geometric_closing_control(rho, sigma, e, v)?, next))
        }
    }
}

/// Applies the geometric law with resource `rho` over `[t, t + dt]`. The gap
/// `y − x` stays on the line of sight and shrinks linearly within the
/// interval, so the capture instant is solved exactly and the interval is
/// split there.
#[allow(clippy::too_many_arguments)]
pub fn advance_geometric(
    state: &mut StrategyState,
    rho: f64,
    sigma: f64,
    v: &Point,
    y: &Point,
    x: &Point,
    tol: f64,
    t: f64,
    dt: f64,
) -> Result<Vec<Segment>> {
    let (u, next) = geometric_law(state, rho, sigma, v, y, x, tol, t)?;
    *state = next;
    if state.mode != Mode::Pursuing {
        return Ok(vec![Segment { duration: dt, control: u }]);
    }
    let e = state.direction.as_ref().expect("pursuing state has a direction");
    let gap = (y - x).dot(e);
    // d/dt (y − x, e) = (v, e) − √(ρ² − σ² + (v,e)²)
    let closing = (u.dot(e) - v.dot(e)).max(0.0);
    if closing > 0.0 && gap - closing * dt <= tol {
        let hit = (gap.max(0.0) / closing).clamp(0.0, dt);
        state.mode = Mode::Shadowing;
        state.switch_time = Some(t + hit);
        return Ok(vec![
            Segment { duration: hit, control: u },
            Segment { duration: dt - hit, control: v.clone() },
        ]);
    }
    Ok(vec![Segment { duration: dt, control: u }])
}

/// `R_n/(R_n + γ)`, equal to `ρ_nθ^ξ/(ρ_nθ^ξ + γ)`.
pub fn scale_factor(pursuer: &Pursuer, gamma: f64, theta: f64) -> f64 {
    let reach = reachable_radius(pursuer, theta);
    if gamma == 0.0 {
        1.0
    } else {
        reach / (reach + gamma)
    }
}

pub fn scale_to_real_control(w_now: &Point, pursuer: &Pursuer, gamma: f64, theta: f64) -> Point {
    w_now.scaled(scale_factor(pursuer, gamma, theta))
}

/// Straight-line evader plan toward a sphere point that every pursuer misses
/// by at least the game value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaderPlan {
    pub target: Point,
    /// Constant control `(target − y0)/θ`.
    pub control: Point,
    /// `min_n (‖target − x_n0‖ − R_n)`, the terminal miss this plan forces.
    pub guarantee: f64,
}

/// Projects the value witness radially onto `S(y0, σ√θ)`; if that loses
/// deficit, runs a local ascent on the sphere from the projection.
pub fn evader_guaranteed_plan(s: &Scenario, gv: &GameValue) -> Result<EvaderPlan> {
    if gv.witness.dim() != s.dimension {
        return Err(Error::DimensionMismatch { expected: s.dimension, found: gv.witness.dim() });
    }
    let r = evader_radius(s);
    let dir = (&gv.witness - &s.y0).normalized().unwrap_or_else(|| {
        // witness at the centre: run away from the nearest pursuer
        let nearest = s
            .pursuers
            .iter()
            .min_by(|a, b| a.x0.dist(&s.y0).total_cmp(&b.x0.dist(&s.y0)))
            .expect("scenario has pursuers");
        (&s.y0 - &nearest.x0)
            .normalized()
            .unwrap_or_else(|| Point::axis(s.dimension, 0, 1.0))
    });
    let mut target = s.y0.clone();
    target.axpy(r, &dir);
    let mut guarantee = deficit(s, &target)?;
    if guarantee < gv.gamma - 1e-9 {
        let refined = best_on_sphere(s, &target, 20_000);
        let g = deficit(s, &refined)?;
        if g > guarantee {
            target = refined;
            guarantee = g;
        }
    }
    let control = (&target - &s.y0).scaled(1.0 / s.theta);
    Ok(EvaderPlan { target, control, guarantee })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ConstraintClass;

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn fictitious_resource_formulas() {
        let p = Pursuer { id: 1, x0: pt(&[3.0]), constraint: ConstraintClass::integral(2.0) };
        let r = FictitiousResource::new(&p, 0.7, 9.0, 1e-3);
        assert!((r.rho_bar - (2.0 + 0.7 / 3.0 + 1e-3 / 6.0)).abs() < 1e-15);
        assert_eq!(r.k, 2.0);
        let p = Pursuer { id: 2, x0: pt(&[8.0]), constraint: ConstraintClass::geometric(0.5) };
        let r = FictitiousResource::new(&p, 1.0, 9.0, 0.1);
        assert!((r.rho_bar - (0.5 + 1.0 / 9.0 + 0.1 / 9.0)).abs() < 1e-15);
        assert_eq!(r.k, 1.0);
        assert!(FictitiousResource::new(&p, 0.0, 9.0, 0.0).rho_bar == 0.5);
    }

    #[test]
    fn integral_law_examples() {
        let u = integral_pursuit_control(&pt(&[0.0, 0.0]), &pt(&[1.0, 0.0]), 1.0, &pt(&[0.0, 0.0]));
        assert_eq!(u, pt(&[1.0, 0.0]));
        let v = pt(&[0.3, -0.2]);
        assert_eq!(integral_pursuit_control(&pt(&[2.0, 2.0]), &pt(&[2.0, 2.0]), 3.0, &v), v);
        // evader runs back onto the pursuer: u = 0, budget 0
        let u = integral_pursuit_control(&pt(&[0.0, 0.0]), &pt(&[1.0, 0.0]), 1.0, &pt(&[-1.0, 0.0]));
        assert_eq!(u.norm(), 0.0);
    }

    #[test]
    fn fictitious_cutoff_examples() {
        let x0 = pt(&[0.0, 0.0]);
        let y0 = pt(&[1.0, 0.0]);
        let v = pt(&[1.0, 0.0]);

        // rho = 1, gamma = 0, eps = 1, theta = 1, k = 1: rho_bar = 2, |w|^2 = 4, cutoff at tau = 1
        let res = FictitiousResource { pursuer_id: 1, rho_bar: 2.0, epsilon: 1.0, k: 1.0 };
        let mut st = StrategyState::new(1, &x0, &y0);
        let segs = advance_integral_fictitious(&mut st, &res, &x0, &y0, 1.0, &v, 0.0, 0.5);
        assert_eq!(segs.len(), 1);
        let segs = advance_integral_fictitious(&mut st, &res, &x0, &y0, 1.0, &v, 0.5, 0.5);
        assert_eq!(segs.len(), 1);
        assert!((st.budget_spent - 4.0).abs() < 1e-12);
        assert_ne!(st.mode, Mode::Frozen);

        // same law with smaller resource: cut at 4·tau = 1
        let res = FictitiousResource { rho_bar: 1.0, ..res };
        let mut st = StrategyState::new(1, &x0, &y0);
        let segs = advance_integral_fictitious(&mut st, &res, &x0, &y0, 1.0, &v, 0.0, 1.0);
        assert_eq!(segs.len(), 2);
        assert!((segs[0].duration - 0.25).abs() < 1e-15);
        assert_eq!(segs[1].control.norm(), 0.0);
        assert_eq!(st.switch_time, Some(0.25));
        assert_eq!(st.mode, Mode::Frozen);

        // zero resource: u = 0 from the start
        let res = FictitiousResource { rho_bar: 0.0, ..res };
        let st = StrategyState::new(1, &x0, &y0);
        assert_eq!(integral_fictitious_control(&st, &res, &x0, &y0, 1.0, &v, 0.0).norm(), 0.0);

        // ample resource reproduces the plain law
        let res = FictitiousResource { rho_bar: 100.0, ..res };
        assert_eq!(
            integral_fictitious_control(&st, &res, &x0, &y0, 1.0, &v, 0.0),
            integral_pursuit_control(&x0, &y0, 1.0, &v)
        );
    }

    #[test]
    fn geometric_law_stationary_evader() {
        let x0 = pt(&[0.0, 0.0]);
        let y0 = pt(&[0.0, 5.0]);
        let st = StrategyState::new(1, &x0, &y0);
        let (u, next) = geometric_pursuit_control(&st, 2.0, 1.0, &Point::zeros(2), &y0, &x0, 1e-9, 0.0).unwrap();
        assert!((u.coords()[1] - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(u.coords()[0], 0.0);
        assert_eq!(next.mode, Mode::Pursuing);
    }

    #[test]
    fn geometric_law_coincident_start() {
        let x0 = pt(&[1.0, 1.0]);
        let mut st = StrategyState::new(1, &x0, &x0);
        assert_eq!(st.mode, Mode::Shadowing);
        assert_eq!(st.switch_time, Some(0.0));
        let v = pt(&[0.4, -0.1]);
        let segs = advance_geometric(&mut st, 2.0, 1.0, &v, &x0, &x0, 1e-9, 0.0, 0.1).unwrap();
        assert_eq!(segs[0].control, v);
    }

    #[test]
    fn geometric_law_scalar_capture_time() {
        // d = 1, x0 = 0, y0 = 1, rho = 2, sigma = 1, v = -1: u = 2, gap shrinks at 3
        let mut x = pt(&[0.0]);
        let mut y = pt(&[1.0]);
        let v = pt(&[-1.0]);
        let mut st = StrategyState::new(1, &x, &y);
        let (u, _) = geometric_pursuit_control(&st, 2.0, 1.0, &v, &y, &x, 1e-12, 0.0).unwrap();
        assert!((u.coords()[0] - 2.0).abs() < 1e-15);
        let segs = advance_geometric(&mut st, 2.0, 1.0, &v, &y, &x, 1e-12, 0.0, 1.0).unwrap();
        assert_eq!(st.mode, Mode::Shadowing);
        assert!((st.switch_time.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        for s in &segs {
            x.axpy(s.duration, &s.control);
        }
        y.axpy(1.0, &v);
        assert!(x.dist(&y) < 1e-15);
    }

    #[test]
    fn geometric_rejects_fast_evader() {
        let x0 = pt(&[0.0]);
        let st = StrategyState::new(1, &x0, &pt(&[1.0]));
        assert!(matches!(
            geometric_pursuit_control(&st, 1.0, 2.0, &x0, &pt(&[1.0]), &x0, 0.0, 0.0),
            Err(Error::HypothesisViolated(_))
        ));
        let res = FictitiousResource { pursuer_id: 1, rho_bar: 1.0, epsilon: 0.0, k: 1.0 };
        assert!(geometric_fictitious_control(&st, &res, 2.0, &x0, &pt(&[1.0]), &x0, 0.0, 0.0).is_err());
    }

    #[test]
    fn geometric_control_norm_identity() {
        let e = pt(&[0.6, 0.8, 0.0]);
        let v = pt(&[0.3, -0.5, 0.2]);
        let u = geometric_closing_control(2.0, 1.0, &e, &v).unwrap();
        assert!((u.norm_sq() - (v.norm_sq() + 4.0 - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn scale_factor_examples() {
        let p = Pursuer { id: 1, x0: pt(&[3.0]), constraint: ConstraintClass::integral(2.0) };
        assert_eq!(scale_factor(&p, 0.0, 9.0), 1.0);
        let gamma = 45f64.sqrt() - 6.0;
        assert!((scale_factor(&p, gamma, 9.0) - 6.0 / (6.0 + gamma)).abs() < 1e-15);
        assert!((scale_factor(&p, 0.70820, 9.0) - 0.89444).abs() < 5e-5);
        let p = Pursuer { id: 2, x0: pt(&[8.0]), constraint: ConstraintClass::geometric(1.0) };
        assert!((scale_factor(&p, 1.0, 9.0) - 0.9).abs() < 1e-15);
        let w = pt(&[1.0, -2.0]);
        assert_eq!(scale_to_real_control(&w, &p, 1.0, 9.0), w.scaled(0.9));
    }
}
