//! Edge fluxes and the explicit update.
//!
//! With `w = u^a`, `a = (p+m-2)/(p-1)`, the flux across edge `j` is
//! `G_j = kappa A_j |x_j|^{p-2} x_j` where `x_j = (w_j - w_{j-1}) / gap_j` and
//! `A_j = omega_N f(r_j)^{N-1}`. Writing `G_j = c_j (u_j - u_{j-1})` with the
//! secant `c_j >= 0`, the update is a convex combination of neighbours whenever
//! `dt (c_i + c_{i+1}) <= w_rho_i`.

use super::{grid::RadialGrid, RadialState, SchemeStats};
use crate::error::{Error, Result};
use crate::geometry::Exponents;

/// Undershoot (relative to the pre-step sup) that is clamped silently.
const UNDERSHOOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum WPow {
    One,
    Two,
    Half,
    General(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum GradPow {
    /// `p = 2`
    Zero,
    /// `p = 3`
    One,
    /// `p > 2`
    Power(f64),
    /// `p < 2`, regularized
    Singular(f64),
}

#[derive(Debug, Clone)]
pub(super) struct Kernel {
    pub(super) exps: Exponents,
    kappa: f64,
    wpow: WPow,
    gpow: GradPow,
    eps_rel: f64,
    w: Vec<f64>,
    g: Vec<f64>,
    c: Vec<f64>,
    nw: NewtonWork,
}

/// Work arrays of the backward Euler solve.
#[derive(Debug, Clone, Default)]
struct NewtonWork {
    u0: Vec<f64>,
    res: Vec<f64>,
    lo: Vec<f64>,
    di: Vec<f64>,
    up: Vec<f64>,
    dl: Vec<f64>,
    dr: Vec<f64>,
}

/// Outcome of one backward Euler attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) enum Implicit {
    Accepted { iterations: usize },
    /// Newton did not converge or undershot beyond tolerance; `state` is unchanged.
    Rejected,
}

impl Kernel {
    pub(super) fn new(exps: Exponents, eps_rel: f64) -> Self {
        let p = exps.p;
        let a = (p + exps.m - 2.0) / (p - 1.0);
        let kappa = ((p - 1.0) / (p + exps.m - 2.0)).powf(p - 1.0);
        let wpow = if a == 1.0 {
            WPow::One
        } else if a == 2.0 {
            WPow::Two
        } else if a == 0.5 {
            WPow::Half
        } else {
            WPow::General(a)
        };
        let gpow = if p == 2.0 {
            GradPow::Zero
        } else if p == 3.0 {
            GradPow::One
        } else if p > 2.0 {
            GradPow::Power(p - 2.0)
        } else {
            GradPow::Singular(p - 2.0)
        };
        Kernel {
            exps,
            kappa,
            wpow,
            gpow,
            eps_rel,
            w: Vec::new(),
            g: Vec::new(),
            c: Vec::new(),
            nw: NewtonWork::default(),
        }
    }

    fn w_of(&self, u: f64) -> f64 {
        match self.wpow {
            WPow::One => u,
            WPow::Two => u * u,
            WPow::Half => u.sqrt(),
            WPow::General(a) => u.powf(a),
        }
    }

    fn grad_factor(&self, x: f64, eps: f64) -> f64 {
        match self.gpow {
            GradPow::Zero => 1.0,
            GradPow::One => x.abs(),
            GradPow::Power(e) => x.abs().powf(e),
            GradPow::Singular(e) => (x * x + eps * eps).powf(0.5 * e),
        }
    }

    /// `dw/du`; requires `a >= 1` to stay finite at `u = 0`.
    fn dw_of(&self, u: f64) -> f64 {
        match self.wpow {
            WPow::One => 1.0,
            WPow::Two => 2.0 * u,
            WPow::Half => 0.5 / u.sqrt(),
            WPow::General(a) => a * u.powf(a - 1.0),
        }
    }

    /// `d/dx (grad_factor(x) x)`.
    fn dphi(&self, x: f64, eps: f64) -> f64 {
        match self.gpow {
            GradPow::Zero => 1.0,
            GradPow::One => 2.0 * x.abs(),
            GradPow::Power(e) => (1.0 + e) * x.abs().powf(e),
            GradPow::Singular(e) => {
                let s = x * x + eps * eps;
                s.powf(0.5 * e - 1.0) * ((1.0 + e) * x * x + eps * eps)
            }
        }
    }

    /// Whether the backward Euler Jacobian stays bounded at `u = 0`.
    pub(super) fn supports_implicit(&self) -> bool {
        !matches!(self.wpow, WPow::Half) && !matches!(self.wpow, WPow::General(a) if a < 1.0)
    }

    /// One backward Euler step of length `dt` solved by Newton with a tridiagonal Jacobian.
    ///
    /// Updates telescope, so the weighted mass is preserved up to round-off at every iterate.
    pub(super) fn implicit(
        &mut self,
        grid: &RadialGrid,
        state: &mut RadialState,
        dt: f64,
        tol: f64,
        max_iter: usize,
        stats: &mut SchemeStats,
    ) -> Implicit {
        let k = grid.cells();
        let wr = grid.weighted_volumes();
        let area = grid.edge_areas();
        let gap = grid.gaps();
        let mut nw = std::mem::take(&mut self.nw);
        for v in [&mut nw.res, &mut nw.lo, &mut nw.di, &mut nw.up] {
            v.resize(k, 0.0);
        }
        nw.dl.resize(k + 1, 0.0);
        nw.dr.resize(k + 1, 0.0);
        if self.g.len() < k + 1 {
            self.g.resize(k + 1, 0.0);
        }
        nw.u0.clear();
        nw.u0.extend_from_slice(&state.u);
        let sup = state.u.iter().copied().fold(0.0, f64::max);
        if sup == 0.0 {
            self.nw = nw;
            state.time += dt;
            return Implicit::Accepted { iterations: 0 };
        }
        let mut u = state.u.clone();
        let mut outcome = Implicit::Rejected;
        let mut worst = 0.0f64;
        let mut clamped = 0usize;
        for it in 1..=max_iter {
            let eps = if matches!(self.gpow, GradPow::Singular(_)) {
                let mut xmax = 0.0f64;
                for j in 1..k {
                    xmax = xmax.max(((self.w_of(u[j]) - self.w_of(u[j - 1])) / gap[j]).abs());
                }
                self.eps_rel * xmax
            } else {
                0.0
            };
            self.g[0] = 0.0;
            self.g[k] = 0.0;
            nw.dl[0] = 0.0;
            nw.dr[0] = 0.0;
            nw.dl[k] = 0.0;
            nw.dr[k] = 0.0;
            for j in 1..k {
                let x = (self.w_of(u[j]) - self.w_of(u[j - 1])) / gap[j];
                let coef = self.kappa * area[j];
                self.g[j] = coef * self.grad_factor(x, eps) * x;
                let d = coef * self.dphi(x, eps) / gap[j];
                nw.dr[j] = d * self.dw_of(u[j]);
                nw.dl[j] = -d * self.dw_of(u[j - 1]);
            }
            for i in 0..k {
                nw.res[i] = -(wr[i] * (u[i] - nw.u0[i]) - dt * (self.g[i + 1] - self.g[i]));
                nw.di[i] = wr[i] - dt * (nw.dl[i + 1] - nw.dr[i]);
                nw.lo[i] = dt * nw.dl[i];
                nw.up[i] = -dt * nw.dr[i + 1];
            }
            // Thomas elimination; the Jacobian is a column diagonally dominant M-matrix
            for i in 1..k {
                let f = nw.lo[i] / nw.di[i - 1];
                nw.di[i] -= f * nw.up[i - 1];
                nw.res[i] -= f * nw.res[i - 1];
            }
            nw.res[k - 1] /= nw.di[k - 1];
            for i in (0..k - 1).rev() {
                nw.res[i] = (nw.res[i] - nw.up[i] * nw.res[i + 1]) / nw.di[i];
            }
            let mut step = 0.0f64;
            let mut low = 0.0f64;
            clamped = 0;
            for i in 0..k {
                let d = nw.res[i];
                if !d.is_finite() {
                    self.nw = nw;
                    return Implicit::Rejected;
                }
                step = step.max(d.abs());
                let v = u[i] + d;
                if v < 0.0 {
                    low = low.min(v);
                    clamped += 1;
                    u[i] = 0.0;
                } else {
                    u[i] = v;
                }
            }
            worst = low / sup;
            if step <= tol * sup {
                outcome = Implicit::Accepted { iterations: it };
                break;
            }
        }
        self.nw = nw;
        if let Implicit::Accepted { .. } = outcome {
            if worst < -UNDERSHOOT_TOL {
                return Implicit::Rejected;
            }
            stats.worst_undershoot = stats.worst_undershoot.min(worst);
            stats.clamped_cells += clamped as u64;
            state.u = u;
            state.time += dt;
        }
        outcome
    }

    /// `G_j` for one interior edge (no regularization scale beyond the local gradient).
    pub(super) fn edge_flux(&self, grid: &RadialGrid, u: &[f64], j: usize) -> f64 {
        let (wl, wr) = (self.w_of(u[j - 1]), self.w_of(u[j]));
        if wl == wr {
            return 0.0;
        }
        let x = (wr - wl) / grid.gaps()[j];
        let eps = self.eps_rel * x.abs();
        self.kappa * grid.edge_areas()[j] * self.grad_factor(x, eps) * x
    }

    /// Fills fluxes and secant coefficients on `0..=last`.
    fn prepare(&mut self, grid: &RadialGrid, u: &[f64], last: usize) {
        let k = grid.cells();
        if self.w.len() < k + 1 {
            self.w.resize(k + 1, 0.0);
            self.g.resize(k + 1, 0.0);
            self.c.resize(k + 1, 0.0);
        }
        match (self.wpow, self.gpow) {
            (WPow::Two, GradPow::Zero) => self.fluxes(grid, u, last, |u| u * u, |_, _| 1.0),
            (WPow::One, GradPow::One) => self.fluxes(grid, u, last, |u| u, |x, _| x.abs()),
            (WPow::One, GradPow::Zero) => self.fluxes(grid, u, last, |u| u, |_, _| 1.0),
            (wp, gp) => {
                let wf = move |u: f64| match wp {
                    WPow::One => u,
                    WPow::Two => u * u,
                    WPow::Half => u.sqrt(),
                    WPow::General(a) => u.powf(a),
                };
                let gf = move |x: f64, eps: f64| match gp {
                    GradPow::Zero => 1.0,
                    GradPow::One => x.abs(),
                    GradPow::Power(e) => x.abs().powf(e),
                    GradPow::Singular(e) => (x * x + eps * eps).powf(0.5 * e),
                };
                self.fluxes(grid, u, last, wf, gf)
            }
        }
    }

    /// Positivity bound `min_i w_rho_i / (c_i + c_{i+1})` after [`Kernel::prepare`].
    fn bound(&self, grid: &RadialGrid, last: usize) -> f64 {
        let wr = grid.weighted_volumes();
        let mut bound = f64::INFINITY;
        for i in 0..=last {
            let d = self.c[i] + self.c[i + 1];
            if d > 0.0 {
                bound = bound.min(wr[i] / d);
            }
        }
        bound
    }

    /// `cfl` times the positivity bound of an explicit step from `u`; infinite when `u = 0`.
    pub(super) fn explicit_dt(&mut self, grid: &RadialGrid, u: &[f64], cfl: f64) -> f64 {
        let Some(active) = u.iter().rposition(|&v| v > 0.0) else {
            return f64::INFINITY;
        };
        let last = (active + 1).min(grid.cells() - 1);
        self.prepare(grid, u, last);
        cfl * self.bound(grid, last)
    }

    /// Advances `state` by one step capped at `t_limit`; returns `dt`.
    pub(super) fn advance(
        &mut self,
        grid: &RadialGrid,
        state: &mut RadialState,
        cfl: f64,
        t_limit: f64,
        stats: &mut SchemeStats,
    ) -> Result<f64> {
        let k = grid.cells();
        let remaining = t_limit - state.time;
        let Some(active) = state.u.iter().rposition(|&v| v > 0.0) else {
            state.time = t_limit;
            return Ok(remaining);
        };
        // cells beyond active + 1 stay exactly zero during this step
        let last = (active + 1).min(k - 1);
        self.prepare(grid, &state.u, last);
        let wr = grid.weighted_volumes();
        let bound = self.bound(grid, last);
        let dt_free = cfl * bound;
        if state.time > 0.0 && dt_free < 1e-15 * state.time {
            return Err(Error::Stiffness {
                dt: dt_free,
                t: state.time,
            });
        }
        let clipped = dt_free >= remaining;
        let dt = if clipped { remaining } else { dt_free };

        let sup = state.sup.max(state.u[..=last].iter().copied().fold(0.0, f64::max));
        for i in 0..=last {
            let du = dt * (self.g[i + 1] - self.g[i]) / wr[i];
            let v = state.u[i] + du;
            if v < 0.0 {
                let rel = v / sup;
                if rel < -UNDERSHOOT_TOL {
                    return Err(Error::SchemeFailure { cell: i, value: v, sup });
                }
                stats.worst_undershoot = stats.worst_undershoot.min(rel);
                stats.clamped_cells += 1;
                state.u[i] = 0.0;
            } else {
                state.u[i] = v;
            }
        }
        state.time = if clipped { t_limit } else { state.time + dt };
        Ok(dt)
    }

    /// Fills `g[0..=last+1]` (fluxes) and `c[0..=last+1]` (secant coefficients).
    fn fluxes<W, G>(&mut self, grid: &RadialGrid, u: &[f64], last: usize, wf: W, gf: G)
    where
        W: Fn(f64) -> f64,
        G: Fn(f64, f64) -> f64,
    {
        let area = grid.edge_areas();
        let gap = grid.gaps();
        for i in 0..=last {
            self.w[i] = wf(u[i]);
        }
        let eps = if matches!(self.gpow, GradPow::Singular(_)) {
            let mut xmax = 0.0f64;
            for j in 1..=last {
                xmax = xmax.max(((self.w[j] - self.w[j - 1]) / gap[j]).abs());
            }
            self.eps_rel * xmax
        } else {
            0.0
        };
        self.g[0] = 0.0;
        self.c[0] = 0.0;
        for j in 1..=last {
            let dw = self.w[j] - self.w[j - 1];
            let du = u[j] - u[j - 1];
            if du == 0.0 || dw == 0.0 {
                self.g[j] = 0.0;
                self.c[j] = 0.0;
                continue;
            }
            let x = dw / gap[j];
            let coef = self.kappa * area[j] * gf(x, eps);
            self.g[j] = coef * x;
            self.c[j] = coef * (dw / du) / gap[j];
        }
        self.g[last + 1] = 0.0;
        self.c[last + 1] = 0.0;
    }
}
