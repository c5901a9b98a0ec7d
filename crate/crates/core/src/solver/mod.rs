//! Conservative radial finite-volume solver for the doubly nonlinear equation
//! in the degenerate range `p + m - 3 > 0`.

mod barenblatt;
mod grid;
mod kernel;

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::quadrature::adaptive_simpson;
use crate::geometry::{Exponents, GeometricBundle};

pub use barenblatt::Barenblatt;
pub use grid::{GridSpec, RadialGrid};
use kernel::{Implicit, Kernel};

fn default_grid() -> GridSpec {
    GridSpec::Uniform {
        cells: 512,
        r_max: 8.0,
    }
}
fn default_cfl() -> f64 {
    0.4
}
fn default_support_threshold() -> f64 {
    1e-10
}
fn default_grad_regularization() -> f64 {
    1e-12
}
fn default_max_steps() -> u64 {
    2_000_000_000
}
fn default_true() -> bool {
    true
}
fn default_r_max_limit() -> f64 {
    1e6
}

/// Time integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stepping {
    /// Forward Euler at the positivity bound.
    #[default]
    Explicit,
    /// Backward Euler with `dt = max(explicit bound, dt_rel t)`, halved on Newton failure.
    /// Falls back to an explicit step once `dt` reaches the explicit bound.
    Implicit {
        dt_rel: f64,
        /// Newton stops when the update is below `newton_tol * sup`.
        newton_tol: f64,
        max_newton: usize,
    },
}

impl Stepping {
    pub fn implicit(dt_rel: f64) -> Self {
        Stepping::Implicit {
            dt_rel,
            newton_tol: 1e-12,
            max_newton: 30,
        }
    }
}

/// Numerical settings of one simulation. The exponents come from the bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    /// Safety factor on the positivity-preserving step bound, in `(0, 1]`.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Support threshold relative to the current sup.
    #[serde(default = "default_support_threshold")]
    pub support_threshold: f64,
    /// Relative gradient regularization, used only when `p < 2`.
    #[serde(default = "default_grad_regularization")]
    pub grad_regularization: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[serde(default = "default_true")]
    pub auto_extend: bool,
    /// Auto-extension never grows the domain beyond this radius.
    #[serde(default = "default_r_max_limit")]
    pub r_max_limit: f64,
    #[serde(default)]
    pub stepping: Stepping,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid: default_grid(),
            cfl: default_cfl(),
            support_threshold: default_support_threshold(),
            grad_regularization: default_grad_regularization(),
            max_steps: default_max_steps(),
            auto_extend: true,
            r_max_limit: default_r_max_limit(),
            stepping: Stepping::Explicit,
        }
    }
}

impl SolverConfig {
    pub fn uniform(cells: usize, r_max: f64) -> Self {
        SolverConfig {
            grid: GridSpec::Uniform { cells, r_max },
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidInput(format!("cfl = {} not in (0, 1]", self.cfl)));
        }
        if !(self.support_threshold > 0.0) {
            return Err(Error::InvalidInput("support threshold must be positive".into()));
        }
        if !(self.grad_regularization >= 0.0) {
            return Err(Error::InvalidInput("gradient regularization must be >= 0".into()));
        }
        if let Stepping::Implicit {
            dt_rel,
            newton_tol,
            max_newton,
        } = self.stepping
        {
            if !(dt_rel > 0.0) || !(newton_tol > 0.0) || max_newton == 0 {
                return Err(Error::InvalidInput(format!("bad implicit settings {:?}", self.stepping)));
            }
        }
        if let GridSpec::Uniform { cells, .. } = self.grid {
            if self.auto_extend && cells % 2 != 0 {
                return Err(Error::InvalidInput("auto-extension needs an even cell count".into()));
            }
        }
        Ok(())
    }
}

/// Cell averages at one time with cached observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialState {
    pub time: f64,
    pub u: Vec<f64>,
    pub sup: f64,
    pub support_radius: f64,
    pub mass: f64,
}

impl RadialState {
    /// Builds a state from cell averages, computing the cached observables.
    pub fn from_cells(grid: &RadialGrid, time: f64, u: Vec<f64>, support_threshold: f64) -> Result<Self> {
        if u.len() != grid.cells() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} cells",
                u.len(),
                grid.cells()
            )));
        }
        if let Some(i) = u.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!("cell {i} has value {}", u[i])));
        }
        let mut s = RadialState {
            time,
            u,
            sup: 0.0,
            support_radius: 0.0,
            mass: 0.0,
        };
        s.refresh(grid, support_threshold);
        Ok(s)
    }

    fn refresh(&mut self, grid: &RadialGrid, support_threshold: f64) {
        self.sup = self.u.iter().copied().fold(0.0, f64::max);
        self.support_radius = support_radius(grid, &self.u, self.sup * support_threshold);
        self.mass = weighted_sum(grid.weighted_volumes(), &self.u);
    }
}

/// Outer edge of the last cell with `u > eps` (0 for the zero state).
fn support_radius(grid: &RadialGrid, u: &[f64], eps: f64) -> f64 {
    match u.iter().rposition(|&v| v > eps && v > 0.0) {
        Some(i) => grid.edges()[i + 1],
        None => 0.0,
    }
}

/// Compensated `sum w_i u_i`.
pub(crate) fn weighted_sum(w: &[f64], u: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (a, b) in w.iter().zip(u) {
        let x = a * b;
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Bump `c (1 - (r/R0)^2)_+^2` normalized to the given weighted mass.
pub fn init_bump(bundle: &GeometricBundle, grid: &RadialGrid, r0: f64, mass: f64) -> Result<RadialState> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::InvalidInput(format!("initial mass must be positive, got {mass}")));
    }
    if !(r0 > 0.0) || r0 >= grid.r_max() / 4.0 {
        return Err(Error::InvalidInput(format!(
            "bump radius {r0} must lie in (0, R_max/4 = {})",
            grid.r_max() / 4.0
        )));
    }
    let bump = |r: f64| {
        let s = 1.0 - (r / r0).powi(2);
        if s > 0.0 {
            s * s
        } else {
            0.0
        }
    };
    let weight = |r: f64| bundle.rho(r) * bundle.manifold().area(r) * bump(r);
    let mut integrals = vec![0.0; grid.cells()];
    for (i, e) in grid.edges().windows(2).enumerate() {
        if e[0] >= r0 {
            break;
        }
        let hi = e[1].min(r0);
        integrals[i] = adaptive_simpson(weight, e[0], hi, 0.0, 1e-12)?.value;
    }
    let total: f64 = integrals.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Numeric("bump has zero weighted integral".into()));
    }
    let c = mass / total;
    let u: Vec<f64> = integrals
        .iter()
        .zip(grid.weighted_volumes())
        .map(|(q, w)| c * q / w)
        .collect();
    RadialState::from_cells(grid, 0.0, u, default_support_threshold())
}

/// When observations are recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservationSchedule {
    /// `t_0 + k * every`.
    Linear { every: f64 },
    /// `10^{k / per_decade}` for integer `k`.
    Geometric { per_decade: u32 },
}

impl ObservationSchedule {
    /// Observation times in `(t0, t_end]`, always ending at `t_end`.
    pub fn times(&self, t0: f64, t_end: f64) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        match *self {
            ObservationSchedule::Linear { every } => {
                if !(every > 0.0) {
                    return Err(Error::InvalidInput("observation interval must be positive".into()));
                }
                let mut k = 1u64;
                loop {
                    let t = t0 + k as f64 * every;
                    if t >= t_end * (1.0 - 1e-12) {
                        break;
                    }
                    out.push(t);
                    k += 1;
                }
            }
            ObservationSchedule::Geometric { per_decade } => {
                if per_decade == 0 || !(t_end > 0.0) {
                    return Err(Error::InvalidInput("geometric schedule needs per_decade > 0".into()));
                }
                let n = per_decade as f64;
                let mut k = if t0 > 0.0 { (t0.log10() * n).floor() as i64 } else { (1e-6f64.log10() * n) as i64 };
                loop {
                    let t = 10f64.powf(k as f64 / n);
                    k += 1;
                    if t <= t0 * (1.0 + 1e-12) {
                        continue;
                    }
                    if t >= t_end * (1.0 - 1e-12) {
                        break;
                    }
                    out.push(t);
                }
            }
        }
        out.push(t_end);
        Ok(out)
    }
}

/// One recorded observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub t: f64,
    pub sup: f64,
    pub support_radius: f64,
    pub mass: f64,
    /// Weighted mass inside the tracked ball, when one is configured.
    pub mass_in_ball: Option<f64>,
    pub r_max: f64,
}

/// Time series and scheme diagnostics of one `run` call.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSeries {
    pub observations: Vec<Observation>,
    pub steps: u64,
    pub extensions: u32,
    pub truncated: bool,
    pub warnings: Vec<String>,
}

/// Cumulative scheme diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SchemeStats {
    pub steps: u64,
    pub extensions: u32,
    /// Most negative `u_i / sup` seen before clamping (0 if none).
    pub worst_undershoot: f64,
    pub clamped_cells: u64,
    pub truncated: bool,
}

/// Full-precision checkpoint (grid and cell averages).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub grid: GridSpec,
    pub edges: Vec<f64>,
    pub time: f64,
    pub u: Vec<f64>,
    pub stats: SchemeStats,
}

/// A simulation: grid, numerical settings and diagnostics over a shared bundle.
#[derive(Debug, Clone)]
pub struct Solver {
    bundle: Arc<GeometricBundle>,
    config: SolverConfig,
    grid: RadialGrid,
    kernel: Kernel,
    ball: Option<(f64, Vec<(usize, f64)>)>,
    stats: SchemeStats,
}

impl Solver {
    pub fn new(bundle: Arc<GeometricBundle>, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let exps = bundle.exponents();
        if !exps.is_degenerate() {
            return Err(Error::InvalidSpec(format!(
                "solver needs p + m - 3 > 0, got {}",
                exps.q()
            )));
        }
        let grid = RadialGrid::new(&bundle, config.grid)?;
        let kernel = Kernel::new(exps, config.grad_regularization);
        if matches!(config.stepping, Stepping::Implicit { .. }) && !kernel.supports_implicit() {
            return Err(Error::InvalidInput(
                "implicit stepping needs (p + m - 2)/(p - 1) >= 1".into(),
            ));
        }
        Ok(Solver {
            bundle,
            config,
            grid,
            kernel,
            ball: None,
            stats: SchemeStats::default(),
        })
    }

    /// Rebuilds a simulation from a checkpoint.
    pub fn restore(bundle: Arc<GeometricBundle>, config: SolverConfig, cp: &Checkpoint) -> Result<(Self, RadialState)> {
        let mut solver = Solver::new(bundle, SolverConfig { grid: cp.grid, ..config })?;
        if solver.grid.edges() != cp.edges.as_slice() {
            solver.grid = RadialGrid::from_edges(&solver.bundle, cp.grid, cp.edges.clone())?;
        }
        solver.stats = cp.stats;
        let state = RadialState::from_cells(&solver.grid, cp.time, cp.u.clone(), solver.config.support_threshold)?;
        Ok((solver, state))
    }

    pub fn checkpoint(&self, state: &RadialState) -> Checkpoint {
        Checkpoint {
            grid: self.grid.spec(),
            edges: self.grid.edges().to_vec(),
            time: state.time,
            u: state.u.clone(),
            stats: self.stats,
        }
    }

    pub fn bundle(&self) -> &Arc<GeometricBundle> {
        &self.bundle
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn exponents(&self) -> Exponents {
        self.kernel.exps
    }

    pub fn stats(&self) -> SchemeStats {
        self.stats
    }

    /// Bump initial datum on the current grid.
    pub fn init_bump(&self, r0: f64, mass: f64) -> Result<RadialState> {
        let mut s = init_bump(&self.bundle, &self.grid, r0, mass)?;
        s.refresh(&self.grid, self.config.support_threshold);
        Ok(s)
    }

    /// State from cell averages on the current grid.
    pub fn state_from_cells(&self, time: f64, u: Vec<f64>) -> Result<RadialState> {
        RadialState::from_cells(&self.grid, time, u, self.config.support_threshold)
    }

    /// Tracks the weighted mass inside `B_R` in every observation.
    pub fn track_ball(&mut self, radius: f64) -> Result<()> {
        let fr = self.grid.ball_fractions(&self.bundle, radius)?;
        self.ball = Some((radius, fr));
        Ok(())
    }

    /// Weighted mass inside the tracked ball.
    pub fn mass_in_ball(&self, state: &RadialState) -> Option<f64> {
        let (_, fr) = self.ball.as_ref()?;
        let w = self.grid.weighted_volumes();
        let mut acc = 0.0;
        for &(i, f) in fr {
            acc += f * w[i] * state.u[i];
        }
        Some(acc)
    }

    /// Physical flux `-kappa f^{N-1} |w_r|^{p-2} w_r` across edge `j` (zero at both ends).
    pub fn flux(&self, state: &RadialState, edge: usize) -> f64 {
        let k = self.grid.cells();
        if edge == 0 || edge >= k {
            return 0.0;
        }
        let g = self.kernel.edge_flux(&self.grid, &state.u, edge);
        -g / self.bundle.manifold().sphere_area()
    }

    /// One step, never past `t_limit`. Returns the step size.
    pub fn step(&mut self, state: &mut RadialState, t_limit: f64) -> Result<f64> {
        if state.u.len() != self.grid.cells() {
            return Err(Error::InvalidInput("state does not match the grid".into()));
        }
        let dt = match self.config.stepping {
            Stepping::Explicit => self.kernel.advance(&self.grid, state, self.config.cfl, t_limit, &mut self.stats)?,
            Stepping::Implicit {
                dt_rel,
                newton_tol,
                max_newton,
            } => self.implicit_step(state, t_limit, dt_rel, newton_tol, max_newton)?,
        };
        self.stats.steps += 1;
        state.refresh(&self.grid, self.config.support_threshold);
        Ok(dt)
    }

    fn implicit_step(
        &mut self,
        state: &mut RadialState,
        t_limit: f64,
        dt_rel: f64,
        tol: f64,
        max_newton: usize,
    ) -> Result<f64> {
        let remaining = t_limit - state.time;
        let dt_explicit = self.kernel.explicit_dt(&self.grid, &state.u, self.config.cfl);
        let mut dt = dt_explicit.max(dt_rel * state.time).min(remaining);
        loop {
            if dt <= dt_explicit {
                return self.kernel.advance(&self.grid, state, self.config.cfl, t_limit, &mut self.stats);
            }
            let t0 = state.time;
            match self.kernel.implicit(&self.grid, state, dt, tol, max_newton, &mut self.stats) {
                Implicit::Accepted { .. } => {
                    if dt == remaining {
                        state.time = t_limit;
                    }
                    return Ok(state.time - t0);
                }
                Implicit::Rejected => dt = (0.5 * dt).max(dt_explicit.min(remaining)),
            }
        }
    }

    fn near_boundary(&self, state: &RadialState) -> bool {
        state.support_radius > self.grid.r_max() - 4.0 * self.grid.outer_width()
    }

    fn extend(&mut self, state: &mut RadialState) -> Result<()> {
        let u = self.grid.extend(&self.bundle, &state.u)?;
        state.u = u;
        state.refresh(&self.grid, self.config.support_threshold);
        if let Some((r, _)) = self.ball {
            self.track_ball(r)?;
        }
        self.stats.extensions += 1;
        Ok(())
    }

    pub fn observe(&self, state: &RadialState) -> Observation {
        Observation {
            t: state.time,
            sup: state.sup,
            support_radius: state.support_radius,
            mass: state.mass,
            mass_in_ball: self.mass_in_ball(state),
            r_max: self.grid.r_max(),
        }
    }

    /// Marches to `t_end`, recording observations on the schedule.
    pub fn run(&mut self, state: &mut RadialState, t_end: f64, schedule: ObservationSchedule) -> Result<RunSeries> {
        let mut series = RunSeries::default();
        if t_end == state.time {
            return Ok(series);
        }
        if !(t_end > state.time) {
            return Err(Error::InvalidInput(format!(
                "t_end = {t_end} precedes the state time {}",
                state.time
            )));
        }
        let steps0 = self.stats.steps;
        let ext0 = self.stats.extensions;
        for t_obs in schedule.times(state.time, t_end)? {
            while state.time < t_obs {
                if self.near_boundary(state) && !self.stats.truncated {
                    let can = self.config.auto_extend && 2.0 * self.grid.r_max() <= self.config.r_max_limit;
                    if can {
                        self.extend(state)?;
                    } else {
                        self.stats.truncated = true;
                        series.warnings.push(format!(
                            "support reached R_max = {} at t = {:e}; the zero-flux boundary is active from here on",
                            self.grid.r_max(),
                            state.time
                        ));
                    }
                }
                if self.stats.steps - steps0 >= self.config.max_steps {
                    return Err(Error::Numeric(format!(
                        "max_steps = {} exhausted at t = {:e}",
                        self.config.max_steps, state.time
                    )));
                }
                self.step(state, t_obs)?;
            }
            series.observations.push(self.observe(state));
        }
        series.steps = self.stats.steps - steps0;
        series.extensions = self.stats.extensions - ext0;
        series.truncated = self.stats.truncated;
        Ok(series)
    }
}

/// Writes `t,sup,support_radius,mass,rmax` rows.
pub fn write_series_csv<W: Write>(series: &[Observation], mut out: W) -> Result<()> {
    writeln!(out, "t,sup,support_radius,mass,rmax")?;
    for o in series {
        writeln!(out, "{:e},{:e},{:e},{:e},{:e}", o.t, o.sup, o.support_radius, o.mass, o.r_max)?;
    }
    Ok(())
}
