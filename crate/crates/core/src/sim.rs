//! Time-discretized execution of the game.
//!
//! Every control in play is piecewise constant, so trajectories are piecewise
//! linear and each step is integrated exactly. Steps are further split at the
//! evader's (and any open-loop pursuer's) breakpoints and at capture or
//! budget-exhaustion instants reported by the strategies; the step size only
//! sets where trajectory samples are recorded.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{random_unit, Point};
use crate::model::{active_set_k, evader_radius, ConstraintClass, ConstraintKind, Scenario};
use crate::strategies::{
    advance_geometric, advance_integral_fictitious, integral_pursuit_control, scale_factor, FictitiousResource, Mode,
    Segment, StrategyState,
};
use crate::value::{gamma_optimize, OptimizeConfig};

/// Piecewise-constant control on `[0, θ]`: `values[i]` holds on `[times[i], times[i+1])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub times: Vec<f64>,
    pub values: Vec<Point>,
}

impl ControlSchedule {
    pub fn new(times: Vec<f64>, values: Vec<Point>) -> Result<Self> {
        if values.is_empty() || times.len() != values.len() + 1 {
            return Err(Error::InvalidInput("schedule needs n values and n + 1 breakpoints".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times[0] != 0.0 {
            return Err(Error::InvalidInput("schedule breakpoints must start at 0 and increase".into()));
        }
        if let Some(bad) = values.iter().find(|v| v.dim() != values[0].dim()) {
            return Err(Error::DimensionMismatch { expected: values[0].dim(), found: bad.dim() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("control schedule".into()));
        }
        Ok(ControlSchedule { times, values })
    }

    pub fn constant(theta: f64, value: Point) -> Self {
        ControlSchedule { times: vec![0.0, theta], values: vec![value] }
    }

    /// Equal-length pieces over `[0, θ]`.
    pub fn uniform(theta: f64, values: Vec<Point>) -> Result<Self> {
        let n = values.len();
        let times = (0..=n).map(|i| theta * i as f64 / n.max(1) as f64).collect();
        Self::new(times, values)
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty schedule")
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    /// Value held at time `t` (right-continuous; the last piece extends to θ).
    pub fn value_at(&self, t: f64) -> &Point {
        let i = self.times.partition_point(|s| *s <= t).saturating_sub(1);
        &self.values[i.min(self.values.len() - 1)]
    }

    /// Interior breakpoints.
    pub fn breakpoints(&self) -> &[f64] {
        &self.times[1..self.times.len() - 1]
    }

    pub fn segments(&self) -> impl Iterator<Item = (f64, &Point)> {
        self.times.windows(2).zip(&self.values).map(|(w, v)| (w[1] - w[0], v))
    }

    /// `∫‖v‖² dt`.
    pub fn energy(&self) -> f64 {
        self.segments().map(|(dt, v)| v.norm_sq() * dt).sum()
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(Point::norm).fold(0.0, f64::max)
    }

    /// `∫ v dt` over the whole horizon.
    pub fn displacement(&self) -> Point {
        let mut acc = Point::zeros(self.dim());
        for (dt, v) in self.segments() {
            acc.axpy(dt, v);
        }
        acc
    }

    /// Parses `{"controls": [[…], …], "times": […]}`; without `times` the
    /// pieces split `[0, theta]` evenly (`theta` in the file wins over the argument).
    pub fn from_json_str(text: &str, theta: f64) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            times: Option<Vec<f64>>,
            theta: Option<f64>,
            controls: Vec<Vec<f64>>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        let values = raw
            .controls
            .into_iter()
            .map(Point::new)
            .collect::<Result<Vec<_>>>()?;
        match (raw.times, raw.theta) {
            (Some(times), _) => Self::new(times, values),
            (None, file_theta) => Self::uniform(file_theta.unwrap_or(theta), values),
        }
    }
}

/// Result of auditing a control against its constraint class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetAudit {
    /// Integral: `∫‖u‖²`. Geometric: `max ‖u(t)‖`.
    pub spent: f64,
    pub ok: bool,
    /// `spent − limit`; positive when the constraint is exceeded.
    pub margin: f64,
}

impl BudgetAudit {
    fn judge(spent: f64, c: &ConstraintClass) -> Self {
        match c.kind {
            ConstraintKind::Integral => {
                let limit = c.rho * c.rho;
                BudgetAudit { spent, ok: spent <= limit + 1e-6, margin: spent - limit }
            }
            ConstraintKind::Geometric => BudgetAudit { spent, ok: spent <= c.rho + 1e-9, margin: spent - c.rho },
        }
    }
}

/// Audits a control sampled on a uniform grid of step `dt`.
pub fn audit_budget(trace: &[Point], c: &ConstraintClass, dt: f64) -> BudgetAudit {
    let spent = match c.kind {
        ConstraintKind::Integral => trace.iter().map(|u| u.norm_sq() * dt).sum(),
        ConstraintKind::Geometric => trace.iter().map(Point::norm).fold(0.0, f64::max),
    };
    BudgetAudit::judge(spent, c)
}

/// Random piecewise-constant evader control using exactly the budget `σ²`.
///
/// With `rate_bounded` the pointwise speed is also capped at `σ` by water
/// filling; when `θ < 1` the cap binds everywhere and the budget used is
/// `σ²θ`.
pub fn random_admissible_evader(s: &Scenario, pieces: usize, seed: u64, rate_bounded: bool) -> Result<ControlSchedule> {
    if pieces == 0 {
        return Err(Error::InvalidInput("pieces must be >= 1".into()));
    }
    let d = s.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Point> = (0..pieces).map(|_| random_unit(d, &mut rng)).collect();
    let weights: Vec<f64> = (0..pieces).map(|_| rng.random::<f64>() + 1e-3).collect();
    let piece_dt = s.theta / pieces as f64;
    let budget = s.sigma * s.sigma;

    // squared speeds m_k² with Σ m_k² Δ = σ²
    let total: f64 = weights.iter().sum();
    let mut sq: Vec<f64> = weights.iter().map(|w| w / total * budget / piece_dt).collect();
    if rate_bounded {
        let cap = s.sigma * s.sigma;
        let mut capped = vec![false; pieces];
        loop {
            let mut changed = false;
            for k in 0..pieces {
                if !capped[k] && sq[k] > cap {
                    capped[k] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            let free_budget = budget / piece_dt - cap * capped.iter().filter(|c| **c).count() as f64;
            let free_weight: f64 = (0..pieces).filter(|k| !capped[*k]).map(|k| weights[k]).sum();
            for k in 0..pieces {
                sq[k] = if capped[k] {
                    cap
                } else if free_weight > 0.0 {
                    (weights[k] / free_weight * free_budget).max(0.0)
                } else {
                    0.0
                };
            }
        }
    }
    let values = dirs.iter().zip(&sq).map(|(e, m2)| e.scaled(m2.sqrt())).collect();
    ControlSchedule::uniform(s.theta, values)
}

/// Open-loop pursuer controls aimed at the evader's terminal target.
///
/// Sample 0 is the direct rush: every pursuer moves straight at `target` with
/// all it has. Other samples blend the rush direction with random piecewise
/// noise, rescaled to stay admissible.
pub fn adversarial_pursuer_controls(s: &Scenario, target: &Point, sample: usize, seed: u64) -> Vec<ControlSchedule> {
    let d = s.dimension;
    let theta = s.theta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (sample as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    s.pursuers
        .iter()
        .map(|p| {
            let to_target = target - &p.x0;
            let dist = to_target.norm();
            let dir = to_target.normalized().unwrap_or_else(|| Point::axis(d, 0, 1.0));
            let rho = p.constraint.rho;
            if sample == 0 {
                let speed = match p.constraint.kind {
                    ConstraintKind::Integral => (rho / theta.sqrt()).min(dist / theta),
                    ConstraintKind::Geometric => rho.min(dist / theta),
                };
                return ControlSchedule::constant(theta, dir.scaled(speed));
            }
            let pieces = rng.random_range(1..=8usize);
            let blend: f64 = rng.random();
            let raw: Vec<Point> = (0..pieces)
                .map(|_| {
                    let mut u = dir.scaled(blend);
                    u.axpy(1.0 - blend, &random_unit(d, &mut rng));
                    u.scaled(rng.random::<f64>() + 0.05)
                })
                .collect();
            let piece_dt = theta / pieces as f64;
            let fill: f64 = 0.5 + 0.5 * rng.random::<f64>();
            let values = match p.constraint.kind {
                ConstraintKind::Integral => {
                    let energy: f64 = raw.iter().map(|u| u.norm_sq() * piece_dt).sum();
                    let k = if energy > 0.0 { rho * fill / energy.sqrt() } else { 0.0 };
                    raw.iter().map(|u| u.scaled(k)).collect()
                }
                ConstraintKind::Geometric => {
                    let peak = raw.iter().map(Point::norm).fold(0.0, f64::max);
                    let k = if peak > 0.0 { rho * fill / peak } else { 0.0 };
                    raw.iter().map(|u| u.scaled(k)).collect()
                }
            };
            ControlSchedule::uniform(theta, values).expect("valid schedule")
        })
        .collect()
}

#[derive(Clone, Debug)]
pub enum PursuerStrategyChoice {
    /// Fictitious pursuers with inflated resources, rescaled to real controls.
    Theorem,
    /// Each pursuer plays its single-pursuer capture law with its own resource.
    Lemma,
    /// Fixed open-loop controls, one schedule per pursuer in scenario order.
    OpenLoop(Vec<ControlSchedule>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    /// Requested step; reduced so that `θ/dt` is an integer. `None` means `θ/1000`.
    pub dt: Option<f64>,
    /// Capture tolerance; `None` means `1e-9·σ√θ + 1e-12`.
    pub capture_tol: Option<f64>,
    pub epsilon: f64,
    pub seed: u64,
    /// Value injected into the strategies; computed by the optimizer when `None`.
    pub gamma: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: None, capture_tol: None, epsilon: 1e-3, seed: 0, gamma: None }
    }
}

impl SimConfig {
    pub fn steps(&self, theta: f64) -> usize {
        let dt = self.dt.unwrap_or(theta / 1000.0);
        ((theta / dt) - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum PursuerLaw {
    Frozen,
    IntegralLemma,
    GeometricLemma,
    IntegralTheorem { resource: FictitiousResource, scale: f64 },
    GeometricTheorem { resource: FictitiousResource, scale: f64 },
    #[serde(skip)]
    OpenLoop(ControlSchedule),
}

impl PursuerLaw {
    pub fn name(&self) -> &'static str {
        match self {
            PursuerLaw::Frozen => "frozen",
            PursuerLaw::IntegralLemma => "integral-lemma",
            PursuerLaw::GeometricLemma => "geometric-lemma",
            PursuerLaw::IntegralTheorem { .. } => "integral-theorem",
            PursuerLaw::GeometricTheorem { .. } => "geometric-theorem",
            PursuerLaw::OpenLoop(_) => "open-loop",
        }
    }
}

/// Strategy assignment for every pursuer of a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct GamePlan {
    pub gamma: f64,
    pub epsilon: f64,
    /// Pursuers whose inflated reach meets the evader's sphere.
    pub active: Vec<u64>,
    /// Geometric pursuers frozen because `ρ̄_j(ε) ≤ σ`, allowed only when the
    /// remaining pursuers attain the same value.
    pub demoted: Vec<u64>,
    pub laws: Vec<PursuerLaw>,
}

/// Assigns laws to pursuers, checking each law's hypothesis.
///
/// Pursuers outside the active set are frozen. Under [`PursuerStrategyChoice::Theorem`],
/// a geometric pursuer with `ρ̄_j(ε) ≤ σ` cannot run the inflated law; it is
/// frozen when dropping all such pursuers leaves the value unchanged (within
/// `1e-6`), and the plan is rejected otherwise.
pub fn plan_pursuers(s: &Scenario, choice: &PursuerStrategyChoice, gamma: f64, epsilon: f64) -> Result<GamePlan> {
    s.validate()?;
    if !(gamma >= 0.0) || !(epsilon >= 0.0) {
        return Err(Error::InvalidInput(format!("gamma = {gamma} and epsilon = {epsilon} must be >= 0")));
    }
    let active = active_set_k(s, gamma);
    let is_active = |id: u64| active.contains(&id);
    let mut demoted = Vec::new();
    let laws = match choice {
        PursuerStrategyChoice::OpenLoop(schedules) => {
            if schedules.len() != s.pursuers.len() {
                return Err(Error::InvalidInput(format!(
                    "{} open-loop schedules for {} pursuers",
                    schedules.len(),
                    s.pursuers.len()
                )));
            }
            for sch in schedules {
                if sch.dim() != s.dimension || (sch.horizon() - s.theta).abs() > 1e-12 * s.theta {
                    return Err(Error::InvalidInput("open-loop schedule does not match the scenario".into()));
                }
            }
            schedules.iter().cloned().map(PursuerLaw::OpenLoop).collect()
        }
        PursuerStrategyChoice::Lemma => s
            .pursuers
            .iter()
            .map(|p| {
                if !is_active(p.id) {
                    return Ok(PursuerLaw::Frozen);
                }
                match p.constraint.kind {
                    ConstraintKind::Integral => Ok(PursuerLaw::IntegralLemma),
                    ConstraintKind::Geometric if s.sigma <= p.constraint.rho => Ok(PursuerLaw::GeometricLemma),
                    ConstraintKind::Geometric => Err(Error::HypothesisViolated(format!(
                        "sigma <= rho_j fails for pursuer {}: sigma = {}, rho = {}",
                        p.id, s.sigma, p.constraint.rho
                    ))),
                }
            })
            .collect::<Result<Vec<_>>>()?,
        PursuerStrategyChoice::Theorem => {
            let violating: Vec<u64> = s
                .pursuers
                .iter()
                .filter(|p| is_active(p.id) && p.constraint.kind == ConstraintKind::Geometric)
                .filter(|p| !(FictitiousResource::new(p, gamma, s.theta, epsilon).rho_bar > s.sigma))
                .map(|p| p.id)
                .collect();
            if !violating.is_empty() {
                let rest = s.restricted(|p| !violating.contains(&p.id));
                let failing = s.pursuer(violating[0]).expect("listed pursuer");
                let rho_bar = FictitiousResource::new(failing, gamma, s.theta, epsilon).rho_bar;
                let message = format!(
                    "sigma < rho_bar_j(eps) fails for pursuer {} (rho_bar = {rho_bar}, sigma = {})",
                    failing.id, s.sigma
                );
                if rest.pursuers.is_empty() {
                    return Err(Error::HypothesisViolated(message));
                }
                let cfg = OptimizeConfig::default();
                let full = gamma_optimize(s, &cfg)?.gamma;
                let reduced = gamma_optimize(&rest, &cfg)?.gamma;
                if reduced > full + 1e-6 {
                    return Err(Error::HypothesisViolated(format!(
                        "{message}; without such pursuers the value rises from {full} to {reduced}"
                    )));
                }
                demoted = violating;
            }
            s.pursuers
                .iter()
                .map(|p| {
                    if !is_active(p.id) || demoted.contains(&p.id) {
                        return PursuerLaw::Frozen;
                    }
                    let resource = FictitiousResource::new(p, gamma, s.theta, epsilon);
                    let scale = scale_factor(p, gamma, s.theta);
                    match p.constraint.kind {
                        ConstraintKind::Integral => PursuerLaw::IntegralTheorem { resource, scale },
                        ConstraintKind::Geometric => PursuerLaw::GeometricTheorem { resource, scale },
                    }
                })
                .collect()
        }
    };
    Ok(GamePlan { gamma, epsilon, active, demoted, laws })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PursuerOutcome {
    pub id: u64,
    pub law: String,
    pub constraint: ConstraintClass,
    pub trajectory: Vec<Point>,
    pub budget: BudgetAudit,
    /// Capture time of the geometric law or cutoff time of the fictitious integral law.
    pub switch_time: Option<f64>,
    /// Largest component of the gap orthogonal to the line of sight while
    /// closing (geometric laws only).
    pub colinearity_residual: Option<f64>,
    pub terminal_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub gamma: f64,
    pub steps: usize,
    pub dt: f64,
    pub times: Vec<f64>,
    pub evader_trajectory: Vec<Point>,
    pub evader_budget: BudgetAudit,
    pub pursuers: Vec<PursuerOutcome>,
    pub demoted: Vec<u64>,
    /// `min_n ‖x_n(θ) − y(θ)‖`.
    pub payoff: f64,
    pub closest_pursuer: u64,
}

impl SimResult {
    pub fn pursuers_admissible(&self) -> bool {
        self.pursuers.iter().all(|p| p.budget.ok)
    }

    /// Compact JSON summary: value, payoff, budgets, switch times, admissibility.
    pub fn summary(&self) -> serde_json::Value {
        let budgets: Vec<_> = self
            .pursuers
            .iter()
            .map(|p| serde_json::json!({"id": p.id, "law": p.law, "spent": p.budget.spent, "ok": p.budget.ok, "margin": p.budget.margin}))
            .collect();
        let switch_times: Vec<_> = self
            .pursuers
            .iter()
            .map(|p| serde_json::json!({"id": p.id, "switch_time": p.switch_time}))
            .collect();
        serde_json::json!({
            "gamma": self.gamma,
            "payoff": self.payoff,
            "closest_pursuer": self.closest_pursuer,
            "budgets": budgets,
            "evader_budget": self.evader_budget,
            "switch_times": switch_times,
            "demoted": self.demoted,
            "admissibility": {
                "evader": self.evader_budget.ok,
                "pursuers": self.pursuers_admissible(),
            },
        })
    }

    /// Trajectory CSV: `t,player_id,role,c0,…,c{d−1}`; the evader's id is `E`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let d = self.evader_trajectory.first().map_or(0, Point::dim);
        write!(out, "t,player_id,role")?;
        for k in 0..d {
            write!(out, ",c{k}")?;
        }
        writeln!(out)?;
        let row = |out: &mut W, t: f64, id: &str, role: &str, p: &Point| -> std::io::Result<()> {
            write!(out, "{t},{id},{role}")?;
            for c in p.coords() {
                write!(out, ",{c}")?;
            }
            writeln!(out)
        };
        for (k, t) in self.times.iter().enumerate() {
            row(&mut out, *t, "E", "evader", &self.evader_trajectory[k])?;
            for p in &self.pursuers {
                row(&mut out, *t, &p.id.to_string(), "pursuer", &p.trajectory[k])?;
            }
        }
        Ok(())
    }
}

/// Computes `γ` when not injected, plans the pursuers and runs the game.
pub fn run_game(s: &Scenario, choice: &PursuerStrategyChoice, evader: &ControlSchedule, cfg: &SimConfig) -> Result<SimResult> {
    let gamma = match cfg.gamma {
        Some(g) => g,
        None => gamma_optimize(s, &OptimizeConfig { seed: cfg.seed, ..OptimizeConfig::default() })?.gamma,
    };
    let plan = plan_pursuers(s, choice, gamma, cfg.epsilon)?;
    run_plan(s, &plan, evader, cfg)
}

struct Runner<'a> {
    x0: &'a Point,
    constraint: ConstraintClass,
    law: &'a PursuerLaw,
    state: StrategyState,
    x: Point,
    /// Fictitious pursuer position for the inflated laws.
    z: Point,
    energy: f64,
    peak: f64,
    colinearity: Option<f64>,
    trajectory: Vec<Point>,
}

impl Runner<'_> {
    fn advance(&mut self, s: &Scenario, v: &Point, y: &Point, tol: f64, t: f64, h: f64) -> Result<()> {
        let real: Vec<Segment> = match self.law {
            PursuerLaw::Frozen => vec![Segment { duration: h, control: Point::zeros(s.dimension) }],
            PursuerLaw::IntegralLemma => {
                vec![Segment { duration: h, control: integral_pursuit_control(self.x0, &s.y0, s.theta, v) }]
            }
            PursuerLaw::GeometricLemma => {
                advance_geometric(&mut self.state, self.constraint.rho, s.sigma, v, y, &self.x, tol, t, h)?
            }
            PursuerLaw::IntegralTheorem { resource, scale } => {
                let w = advance_integral_fictitious(&mut self.state, resource, self.x0, &s.y0, s.theta, v, t, h);
                self.move_fictitious(&w);
                let scaled = w.iter().map(|seg| Segment { duration: seg.duration, control: seg.control.scaled(*scale) });
                clip_energy(scaled, self.energy, self.constraint.rho * self.constraint.rho)
            }
            PursuerLaw::GeometricTheorem { resource, scale } => {
                let w = advance_geometric(&mut self.state, resource.rho_bar, s.sigma, v, y, &self.z, tol, t, h)?;
                self.move_fictitious(&w);
                w.iter()
                    .map(|seg| {
                        let mut u = seg.control.scaled(*scale);
                        let n = u.norm();
                        if n > self.constraint.rho {
                            u = u.scaled(self.constraint.rho / n);
                        }
                        Segment { duration: seg.duration, control: u }
                    })
                    .collect()
            }
            PursuerLaw::OpenLoop(sch) => vec![Segment { duration: h, control: sch.value_at(t + 0.5 * h).clone() }],
        };
        for seg in &real {
            if !seg.control.is_finite() {
                return Err(Error::NonFinite(format!("control of pursuer {} at t = {t}", self.state.pursuer_id)));
            }
            self.x.axpy(seg.duration, &seg.control);
            if seg.duration > 0.0 {
                self.energy += seg.control.norm_sq() * seg.duration;
                self.peak = self.peak.max(seg.control.norm());
            }
        }
        Ok(())
    }

    fn move_fictitious(&mut self, w: &[Segment]) {
        for seg in w {
            self.z.axpy(seg.duration, &seg.control);
        }
    }

    /// Orthogonal part of the gap to the line of sight, while closing.
    fn track_colinearity(&mut self, y: &Point) {
        let tracked = match self.law {
            PursuerLaw::GeometricLemma => &self.x,
            PursuerLaw::GeometricTheorem { .. } => &self.z,
            _ => return,
        };
        if self.state.mode != Mode::Pursuing {
            return;
        }
        if let Some(e) = &self.state.direction {
            let gap = y - tracked;
            let mut orth = gap.clone();
            orth.axpy(-gap.dot(e), e);
            let r = orth.norm();
            self.colinearity = Some(self.colinearity.map_or(r, |c| c.max(r)));
        }
    }
}

/// Truncates an integral-class control where cumulative energy reaches `limit`.
fn clip_energy(segs: impl Iterator<Item = Segment>, spent: f64, limit: f64) -> Vec<Segment> {
    let mut used = spent;
    let mut out = Vec::new();
    for seg in segs {
        let rate = seg.control.norm_sq();
        let need = rate * seg.duration;
        if rate == 0.0 || used + need <= limit {
            used += need;
            out.push(seg);
            continue;
        }
        let keep = ((limit - used).max(0.0) / rate).min(seg.duration);
        used = limit.max(used);
        let dim = seg.control.dim();
        out.push(Segment { duration: keep, control: seg.control });
        out.push(Segment { duration: seg.duration - keep, control: Point::zeros(dim) });
    }
    out
}

/// Runs the game under a fixed plan.
pub fn run_plan(s: &Scenario, plan: &GamePlan, evader: &ControlSchedule, cfg: &SimConfig) -> Result<SimResult> {
    s.validate()?;
    if plan.laws.len() != s.pursuers.len() {
        return Err(Error::InvalidInput("plan does not match the scenario".into()));
    }
    if evader.dim() != s.dimension {
        return Err(Error::DimensionMismatch { expected: s.dimension, found: evader.dim() });
    }
    if (evader.horizon() - s.theta).abs() > 1e-12 * s.theta {
        return Err(Error::InvalidInput(format!(
            "evader control spans [0, {}], game lasts {}",
            evader.horizon(),
            s.theta
        )));
    }
    let steps = cfg.steps(s.theta);
    let dt = s.theta / steps as f64;
    let tol = cfg.capture_tol.unwrap_or(1e-9 * evader_radius(s) + 1e-12);

    let mut breaks: Vec<f64> = evader.breakpoints().to_vec();
    for law in &plan.laws {
        if let PursuerLaw::OpenLoop(sch) = law {
            breaks.extend_from_slice(sch.breakpoints());
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut runners: Vec<Runner> = s
        .pursuers
        .iter()
        .zip(&plan.laws)
        .map(|(p, law)| {
            let state = match law {
                PursuerLaw::Frozen | PursuerLaw::OpenLoop(_) => StrategyState::frozen(p.id),
                _ => StrategyState::new(p.id, &p.x0, &s.y0),
            };
            let mut trajectory = Vec::with_capacity(steps + 1);
            trajectory.push(p.x0.clone());
            Runner {
                x0: &p.x0,
                constraint: p.constraint,
                law,
                state,
                x: p.x0.clone(),
                z: p.x0.clone(),
                energy: 0.0,
                peak: 0.0,
                colinearity: None,
                trajectory,
            }
        })
        .collect();

    let mut y = s.y0.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut evader_trajectory = Vec::with_capacity(steps + 1);
    times.push(0.0);
    evader_trajectory.push(y.clone());
    for r in runners.iter_mut() {
        r.track_colinearity(&y);
    }

    let mut next_break = 0usize;
    for k in 0..steps {
        let t0 = s.theta * k as f64 / steps as f64;
        let t1 = if k + 1 == steps { s.theta } else { s.theta * (k + 1) as f64 / steps as f64 };
        let mut cuts = vec![t0];
        while next_break < breaks.len() && breaks[next_break] < t1 {
            if breaks[next_break] > t0 {
                cuts.push(breaks[next_break]);
            }
            next_break += 1;
        }
        cuts.push(t1);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let h = b - a;
            let v = evader.value_at(a + 0.5 * h).clone();
            for r in runners.iter_mut() {
                r.advance(s, &v, &y, tol, a, h)?;
            }
            y.axpy(h, &v);
        }
        times.push(t1);
        evader_trajectory.push(y.clone());
        for r in runners.iter_mut() {
            r.trajectory.push(r.x.clone());
            r.track_colinearity(&y);
        }
    }

    let y_end = evader_trajectory.last().expect("trajectory").clone();
    let pursuers: Vec<PursuerOutcome> = runners
        .into_iter()
        .map(|r| {
            let spent = match r.constraint.kind {
                ConstraintKind::Integral => r.energy,
                ConstraintKind::Geometric => r.peak,
            };
            let terminal_distance = r.trajectory.last().expect("trajectory").dist(&y_end);
            PursuerOutcome {
                id: r.state.pursuer_id,
                law: r.law.name().to_string(),
                constraint: r.constraint,
                budget: BudgetAudit::judge(spent, &r.constraint),
                switch_time: r.state.switch_time,
                colinearity_residual: r.colinearity,
                terminal_distance,
                trajectory: r.trajectory,
            }
        })
        .collect();
    let (closest_pursuer, payoff) = pursuers
        .iter()
        .map(|p| (p.id, p.terminal_distance))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });

    Ok(SimResult {
        gamma: plan.gamma,
        steps,
        dt,
        times,
        evader_trajectory,
        evader_budget: BudgetAudit::judge(evader.energy(), &ConstraintClass::integral(s.sigma)),
        pursuers,
        demoted: plan.demoted.clone(),
        payoff,
        closest_pursuer,
    })
}
