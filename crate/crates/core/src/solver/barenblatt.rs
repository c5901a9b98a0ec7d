//! Exact self-similar source solution for `p = 2`, Euclidean space, `rho = 1`.

use super::grid::RadialGrid;
use crate::error::{Error, Result};
use crate::geometry::quadrature::adaptive_simpson;
use crate::geometry::sphere_area;

/// `u(r,t) = t^{-k} (C - a r^2 t^{-2k/N})_+^{1/(m-1)}` solving
/// `u_t = div(u^{m-1} grad u)` with `k = N/(N(m-1)+2)` and `a = k(m-1)/(2N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barenblatt {
    n: f64,
    m: f64,
    k: f64,
    a: f64,
    c: f64,
    mass: f64,
}

impl Barenblatt {
    /// Solution of total mass `mass`.
    pub fn new(dimension: u32, m: f64, mass: f64) -> Result<Self> {
        if dimension < 1 || !(m > 1.0) || !(mass > 0.0) {
            return Err(Error::InvalidInput(format!(
                "Barenblatt needs N >= 1, m > 1, mass > 0 (got {dimension}, {m}, {mass})"
            )));
        }
        let n = dimension as f64;
        let k = n / (n * (m - 1.0) + 2.0);
        let a = k * (m - 1.0) / (2.0 * n);
        let gamma = 1.0 / (m - 1.0);
        // J = int_0^1 (1 - s^2)^gamma s^{N-1} ds, with s = sin(theta)
        let j = adaptive_simpson(
            |th: f64| th.cos().max(0.0).powf(2.0 * gamma + 1.0) * th.sin().powf(n - 1.0),
            0.0,
            std::f64::consts::FRAC_PI_2,
            0.0,
            1e-13,
        )?
        .value;
        // M = omega_N C^{gamma + N/2} a^{-N/2} J
        let scale = sphere_area(dimension) * a.powf(-0.5 * n) * j;
        let c = (mass / scale).powf(1.0 / (gamma + 0.5 * n));
        Ok(Barenblatt { n, m, k, a, c, mass })
    }

    /// Decay exponent `k` of the sup.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Profile coefficient `a`.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn value(&self, r: f64, t: f64) -> f64 {
        let s = self.c - self.a * r * r * t.powf(-2.0 * self.k / self.n);
        if s <= 0.0 {
            0.0
        } else {
            t.powf(-self.k) * s.powf(1.0 / (self.m - 1.0))
        }
    }

    /// Free-boundary radius at time `t`.
    pub fn front(&self, t: f64) -> f64 {
        (self.c / self.a).sqrt() * t.powf(self.k / self.n)
    }

    pub fn sup(&self, t: f64) -> f64 {
        self.value(0.0, t)
    }

    /// Exact cell averages `int u r^{N-1} dr / int r^{N-1} dr` on `grid`.
    pub fn cell_averages(&self, grid: &RadialGrid, t: f64) -> Result<Vec<f64>> {
        let front = self.front(t);
        let n = self.n;
        let mut out = Vec::with_capacity(grid.cells());
        for e in grid.edges().windows(2) {
            if e[0] >= front {
                out.push(0.0);
                continue;
            }
            let hi = e[1].min(front);
            let q = adaptive_simpson(|r| self.value(r, t) * r.powf(n - 1.0), e[0], hi, 0.0, 1e-13)?.value;
            let vol = (e[1].powf(n) - e[0].powf(n)) / n;
            out.push(q / vol);
        }
        Ok(out)
    }
}
