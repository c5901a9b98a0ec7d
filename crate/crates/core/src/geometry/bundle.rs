//! Tabulated geometric and density-derived functions on a model manifold.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::profile::{DensityProfile, ManifoldProfile};
use super::quadrature::{adaptive_simpson_split, Quad};
use super::table::{MonotoneTable, Scale};
use crate::error::{Error, Result};

/// The exponents `(p, m)` of the doubly nonlinear operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p: f64,
    pub m: f64,
}

impl Exponents {
    pub fn new(p: f64, m: f64) -> Result<Self> {
        if !(p > 1.0) || !m.is_finite() || !(m > 0.0) {
            return Err(Error::InvalidSpec(format!("exponents p = {p}, m = {m}")));
        }
        Ok(Exponents { p, m })
    }

    /// `p + m - 3`: positive in the degenerate (slow) range, negative in the singular one.
    pub fn q(&self) -> f64 {
        self.p + self.m - 3.0
    }

    pub fn is_degenerate(&self) -> bool {
        self.q() > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TabulationOptions {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub quad_tol: f64,
}

impl Default for TabulationOptions {
    fn default() -> Self {
        TabulationOptions {
            r_min: 1e-6,
            r_max: 1e4,
            nodes: 2048,
            quad_tol: 1e-10,
        }
    }
}

/// Immutable bundle of `V`, `V^{-1}`, `h`, `omega`, `V_rho`, `R_rho`, `psi`
/// and `Z = psi^{-1}` over `[r_min, r_max]`.
#[derive(Debug, Clone)]
pub struct GeometricBundle {
    manifold: ManifoldProfile,
    density: DensityProfile,
    exps: Exponents,
    opts: TabulationOptions,
    radii: Vec<f64>,
    volume: Vec<f64>,
    volume_err: Vec<f64>,
    weighted: Vec<f64>,
    breaks: Vec<f64>,
    vol_table: MonotoneTable,
    vol_rho_table: std::result::Result<MonotoneTable, String>,
    psi_table: std::result::Result<MonotoneTable, String>,
}

impl GeometricBundle {
    pub fn new(
        manifold: ManifoldProfile,
        density: DensityProfile,
        exps: Exponents,
        opts: TabulationOptions,
    ) -> Result<Self> {
        if !(opts.r_min > 0.0 && opts.r_max > opts.r_min) || opts.nodes < 16 {
            return Err(Error::InvalidInput(format!(
                "tabulation range [{}, {}] with {} nodes",
                opts.r_min, opts.r_max, opts.nodes
            )));
        }
        let n = opts.nodes;
        let ratio = (opts.r_max / opts.r_min).ln() / (n - 1) as f64;
        let mut radii: Vec<f64> = (0..n).map(|i| opts.r_min * (ratio * i as f64).exp()).collect();
        radii[n - 1] = opts.r_max;

        let mut breaks = manifold.breaks();
        breaks.extend(density.breaks());
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let area = |r: f64| manifold.area(r);
        let weighted_area = |r: f64| density.rho(r) * manifold.area(r);

        let mut volume = Vec::with_capacity(n);
        let mut volume_err = Vec::with_capacity(n);
        let mut weighted = Vec::with_capacity(n);
        let mut prev = 0.0;
        let (mut v_acc, mut e_acc, mut w_acc) = (0.0, 0.0, 0.0);
        for &r in &radii {
            let q = adaptive_simpson_split(area, prev, r, &breaks, 0.0, opts.quad_tol)?;
            let qw = adaptive_simpson_split(weighted_area, prev, r, &breaks, 0.0, opts.quad_tol)?;
            v_acc += q.value;
            e_acc += q.error;
            w_acc += qw.value;
            volume.push(v_acc);
            volume_err.push(e_acc);
            weighted.push(w_acc);
            prev = r;
        }
        let vol_table = MonotoneTable::new(radii.clone(), volume.clone(), Scale::LogLog)
            .map_err(|e| Error::InvalidAssumption(format!("volume not strictly increasing: {e}")))?;

        let vol_rho: Vec<f64> = radii
            .iter()
            .zip(&volume)
            .map(|(&r, &v)| density.rho(r) * v)
            .collect();
        let vol_rho_table = MonotoneTable::new(radii.clone(), vol_rho.clone(), Scale::LogLog)
            .and_then(|t| {
                if t.is_increasing() {
                    Ok(t)
                } else {
                    Err(Error::InvalidAssumption("decreasing".into()))
                }
            })
            .map_err(|e| format!("weighted volume rho(R)V(R) is not increasing: {e}"));

        let psi_table = {
            let psi: Vec<f64> = radii
                .iter()
                .zip(&vol_rho)
                .map(|(&r, &s)| s.powf(exps.q()) * density.rho(r) * r.powf(exps.p))
                .collect();
            MonotoneTable::new(radii.clone(), psi, Scale::LogLog)
                .and_then(|t| {
                    if t.is_increasing() {
                        Ok(t)
                    } else {
                        Err(Error::InvalidAssumption("decreasing".into()))
                    }
                })
                .map_err(|e| format!("psi not invertible; sup-estimate hypotheses fail ({e})"))
        };

        Ok(GeometricBundle {
            manifold,
            density,
            exps,
            opts,
            radii,
            volume,
            volume_err,
            weighted,
            breaks,
            vol_table,
            vol_rho_table,
            psi_table,
        })
    }

    pub fn manifold(&self) -> &ManifoldProfile {
        &self.manifold
    }

    pub fn density(&self) -> &DensityProfile {
        &self.density
    }

    pub fn exponents(&self) -> Exponents {
        self.exps
    }

    pub fn options(&self) -> &TabulationOptions {
        &self.opts
    }

    pub fn r_max(&self) -> f64 {
        self.opts.r_max
    }

    /// Tabulation nodes.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// `V` at the tabulation nodes.
    pub fn volumes(&self) -> &[f64] {
        &self.volume
    }

    /// Breakpoints of `f` and `rho` (quadrature panel boundaries).
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    fn n(&self) -> f64 {
        self.manifold.n()
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r >= 0.0) {
            return Err(Error::InvalidInput(format!("negative radius {r}")));
        }
        if r > self.opts.r_max * (1.0 + 1e-12) {
            return Err(Error::range("radius", r, 0.0, self.opts.r_max));
        }
        Ok(())
    }

    /// Node index `k` with `radii[k] <= r`, or `None` below `r_min`.
    fn node_below(&self, r: f64) -> Option<usize> {
        match self.radii.binary_search_by(|x| x.total_cmp(&r)) {
            Ok(i) => Some(i),
            Err(0) => None,
            Err(i) => Some(i - 1),
        }
    }

    fn cumulative<F: Fn(f64) -> f64>(&self, table: &[f64], g: F, r: f64) -> Result<Quad> {
        let (start, base, base_err) = match self.node_below(r) {
            Some(k) => (self.radii[k], table[k], self.volume_err[k]),
            None => (0.0, 0.0, 0.0),
        };
        let q = adaptive_simpson_split(g, start, r, &self.breaks, 0.0, self.opts.quad_tol)?;
        Ok(Quad {
            value: base + q.value,
            error: base_err + q.error,
        })
    }

    /// `V(R) = omega_N int_0^R f^{N-1}`.
    pub fn volume(&self, r: f64) -> Result<f64> {
        Ok(self.volume_quad(r)?.value)
    }

    /// `V(R)` with its quadrature error estimate.
    pub fn volume_quad(&self, r: f64) -> Result<Quad> {
        self.check_radius(r)?;
        if r == 0.0 {
            return Ok(Quad { value: 0.0, error: 0.0 });
        }
        self.cumulative(&self.volume, |s| self.manifold.area(s), r)
    }

    /// `V(R)` integrated from scratch at the given relative tolerance.
    pub fn volume_with_tol(&self, r: f64, tol: f64) -> Result<Quad> {
        self.check_radius(r)?;
        adaptive_simpson_split(|s| self.manifold.area(s), 0.0, r, &self.breaks, 0.0, tol)
    }

    /// `V'(R) = omega_N f(R)^{N-1}`.
    pub fn volume_derivative(&self, r: f64) -> f64 {
        self.manifold.area(r)
    }

    /// Inverse of `V`.
    pub fn inv_volume(&self, v: f64) -> Result<f64> {
        if !(v >= 0.0) {
            return Err(Error::InvalidInput(format!("negative volume {v}")));
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        let v_min = self.volume[0];
        let mut r = if v < v_min {
            // locally Euclidean near the pole
            self.opts.r_min * (v / v_min).powf(1.0 / self.n())
        } else {
            self.vol_table.invert(v)?
        };
        let vr = self.volume(r)?;
        let d = self.volume_derivative(r);
        if d > 0.0 {
            let rn = r - (vr - v) / d;
            if rn > 0.0 && rn <= self.opts.r_max {
                r = rn;
            }
        }
        Ok(r)
    }

    /// Ball isoperimetric profile `h(v) = omega_N f(V^{-1}(v))^{N-1}`.
    pub fn isoperimetric_h(&self, v: f64) -> Result<f64> {
        let vmax = *self.volume.last().unwrap();
        if !(v > 0.0 && v <= vmax * (1.0 + 1e-12)) {
            return Err(Error::range("volume", v, 0.0, vmax));
        }
        Ok(self.manifold.area(self.inv_volume(v)?))
    }

    /// `omega(v) = v^{(N-1)/N} / h(v)`.
    pub fn omega(&self, v: f64) -> Result<f64> {
        Ok(v.powf((self.n() - 1.0) / self.n()) / self.isoperimetric_h(v)?)
    }

    /// `omega(V(r))` evaluated without inversion.
    pub fn omega_at_radius(&self, r: f64) -> Result<f64> {
        let v = self.volume(r)?;
        Ok(v.powf((self.n() - 1.0) / self.n()) / self.manifold.area(r))
    }

    pub fn rho(&self, r: f64) -> f64 {
        self.density.rho(r)
    }

    /// `V_rho(R) = rho(R) V(R)`.
    pub fn vol_rho(&self, r: f64) -> Result<f64> {
        Ok(self.density.rho(r) * self.volume(r)?)
    }

    fn vol_rho_table(&self) -> Result<&MonotoneTable> {
        self.vol_rho_table
            .as_ref()
            .map_err(|e| Error::InvalidAssumption(e.clone()))
    }

    /// Whether `V_rho` is strictly increasing on the tabulation.
    pub fn vol_rho_is_monotone(&self) -> bool {
        self.vol_rho_table.is_ok()
    }

    /// Inverse `R_rho` of `V_rho`.
    pub fn inv_vol_rho(&self, s: f64) -> Result<f64> {
        let table = self.vol_rho_table()?;
        if !(s >= 0.0) {
            return Err(Error::InvalidInput(format!("negative weighted volume {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let (lo, hi) = table.y_range();
        if s > hi * (1.0 + 1e-12) {
            return Err(Error::range("weighted volume", s, 0.0, hi));
        }
        let mut r = if s < lo {
            self.opts.r_min * (s / lo).powf(1.0 / self.n())
        } else {
            table.invert(s)?
        };
        // Newton polish on the exact function; slope from the log-log interpolant
        let val = self.vol_rho(r)?;
        let slope = if s < lo { self.n() } else { table.transformed_slope(r) };
        let d = slope * val / r;
        if d > 0.0 && d.is_finite() {
            let rn = r - (val - s) / d;
            if rn > 0.0 && rn <= self.opts.r_max {
                r = rn;
            }
        }
        Ok(r)
    }

    /// Weighted ball measure `int_{B_R} rho dmu`.
    pub fn weighted_volume(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(self
            .cumulative(&self.weighted, |s| self.density.rho(s) * self.manifold.area(s), r)?
            .value)
    }

    /// `int_a^b rho f^{N-1} omega_N dr` for an arbitrary interval (no range limit).
    pub fn weighted_shell(&self, a: f64, b: f64) -> Result<f64> {
        Ok(adaptive_simpson_split(
            |s| self.density.rho(s) * self.manifold.area(s),
            a,
            b,
            &self.breaks,
            0.0,
            self.opts.quad_tol,
        )?
        .value)
    }

    /// `int_a^b omega_N f^{N-1} dr` for an arbitrary interval (no range limit).
    pub fn shell(&self, a: f64, b: f64) -> Result<f64> {
        Ok(adaptive_simpson_split(
            |s| self.manifold.area(s),
            a,
            b,
            &self.breaks,
            0.0,
            self.opts.quad_tol,
        )?
        .value)
    }

    /// `psi(R) = V_rho(R)^{p+m-3} rho(R) R^p`.
    pub fn psi(&self, r: f64) -> Result<f64> {
        self.psi_with(self.exps, r)
    }

    /// `psi` for exponents other than the bundle's own.
    pub fn psi_with(&self, exps: Exponents, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(self.vol_rho(r)?.powf(exps.q()) * self.density.rho(r) * r.powf(exps.p))
    }

    /// Whether `psi` is strictly increasing on the tabulation.
    pub fn psi_is_monotone(&self) -> bool {
        self.psi_table.is_ok()
    }

    /// `Z = psi^{-1}`.
    pub fn z_tilde(&self, s: f64) -> Result<f64> {
        let table = self
            .psi_table
            .as_ref()
            .map_err(|e| Error::Regime(e.clone()))?;
        if !(s >= 0.0) {
            return Err(Error::InvalidInput(format!("negative argument {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let (lo, hi) = table.y_range();
        if s > hi * (1.0 + 1e-12) {
            return Err(Error::range("psi argument", s, 0.0, hi));
        }
        let near_pole = self.n() * self.exps.q() + self.exps.p;
        if s < lo && !(near_pole > 0.0) {
            return Err(Error::Regime("psi(0+) != 0".into()));
        }
        let mut r = if s < lo {
            self.opts.r_min * (s / lo).powf(1.0 / near_pole)
        } else {
            table.invert(s)?
        };
        let val = self.psi(r)?;
        let slope = if s < lo { near_pole } else { table.transformed_slope(r) };
        let d = slope * val / r;
        if d > 0.0 && d.is_finite() {
            let rn = r - (val - s) / d;
            if rn > 0.0 && rn <= self.opts.r_max {
                r = rn;
            }
        }
        Ok(r)
    }

    /// Largest argument `Z` accepts.
    pub fn psi_max(&self) -> Option<f64> {
        self.psi_table.as_ref().ok().map(|t| t.y_range().1)
    }

    /// Largest argument `R_rho` accepts.
    pub fn vol_rho_max(&self) -> Option<f64> {
        self.vol_rho_table.as_ref().ok().map(|t| t.y_range().1)
    }

    /// `W(s) = rho(R_rho(s)) R_rho(s)^p s^{-(p-alpha2)/(N-alpha1)}`.
    pub fn characteristic_w(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::InvalidInput(format!("W needs a positive argument, got {s}")));
        }
        let r = self.inv_vol_rho(s)?;
        Ok(self.characteristic_w_at_radius(r, s))
    }

    /// `W` evaluated at a known `R = R_rho(s)`.
    pub fn characteristic_w_at_radius(&self, r: f64, s: f64) -> f64 {
        let (a1, a2) = self.density.window();
        let e = (self.exps.p - a2) / (self.n() - a1);
        self.density.rho(r) * r.powf(self.exps.p) * s.powf(-e)
    }

    /// CSV of `(r, V, h, omega, vol_rho, psi)` at the tabulation nodes.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,V,h,omega,vol_rho,psi")?;
        let n = self.n();
        for (&r, &v) in self.radii.iter().zip(&self.volume) {
            let h = self.manifold.area(r);
            let omega = v.powf((n - 1.0) / n) / h;
            let vr = self.density.rho(r) * v;
            let psi = vr.powf(self.exps.q()) * self.density.rho(r) * r.powf(self.exps.p);
            writeln!(out, "{r:.17e},{v:.17e},{h:.17e},{omega:.17e},{vr:.17e},{psi:.17e}")?;
        }
        Ok(())
    }
}
