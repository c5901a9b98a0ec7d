use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GeometricBundle;

/// Cell layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// `cells` equal cells on `[0, r_max]`.
    Uniform { cells: usize, r_max: f64 },
    /// `core_cells` equal cells on `[0, core_radius]`, then cells growing by
    /// the factor `1 + growth` up to `r_max`.
    Stretched {
        core_cells: usize,
        core_radius: f64,
        growth: f64,
        r_max: f64,
    },
}

impl GridSpec {
    pub fn r_max(&self) -> f64 {
        match *self {
            GridSpec::Uniform { r_max, .. } | GridSpec::Stretched { r_max, .. } => r_max,
        }
    }

    fn with_r_max(self, r: f64) -> Self {
        match self {
            GridSpec::Uniform { cells, .. } => GridSpec::Uniform { cells, r_max: r },
            GridSpec::Stretched {
                core_cells,
                core_radius,
                growth,
                ..
            } => GridSpec::Stretched {
                core_cells,
                core_radius,
                growth,
                r_max: r,
            },
        }
    }

    /// Cell edges `0 = r_0 < ... < r_K = r_max`.
    pub fn edges(&self) -> Result<Vec<f64>> {
        match *self {
            GridSpec::Uniform { cells, r_max } => {
                if cells < 4 || !(r_max > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "uniform grid needs >= 4 cells and r_max > 0 (got {cells}, {r_max})"
                    )));
                }
                let dr = r_max / cells as f64;
                let mut e: Vec<f64> = (0..=cells).map(|i| i as f64 * dr).collect();
                e[cells] = r_max;
                Ok(e)
            }
            GridSpec::Stretched {
                core_cells,
                core_radius,
                growth,
                r_max,
            } => {
                if core_cells < 4 || !(core_radius > 0.0) || !(r_max >= core_radius) || !(growth > 0.0) {
                    return Err(Error::InvalidInput("stretched grid parameters".into()));
                }
                let dr = core_radius / core_cells as f64;
                let mut e: Vec<f64> = (0..=core_cells).map(|i| i as f64 * dr).collect();
                e[core_cells] = core_radius;
                append_geometric(&mut e, dr, growth, r_max);
                Ok(e)
            }
        }
    }
}

fn append_geometric(edges: &mut Vec<f64>, first: f64, growth: f64, r_max: f64) {
    let mut h = first;
    let mut r = *edges.last().unwrap();
    while r < r_max * (1.0 - 1e-12) {
        h *= 1.0 + growth;
        let next = r + h;
        // fold a short remainder into the last cell
        if next >= r_max || r_max - next < 0.5 * h * (1.0 + growth) {
            edges.push(r_max);
            break;
        }
        edges.push(next);
        r = next;
    }
}

/// Finite-volume cells with Riemannian and density-weighted volumes.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    spec: GridSpec,
    edges: Vec<f64>,
    centers: Vec<f64>,
    volume: Vec<f64>,
    weighted: Vec<f64>,
    edge_area: Vec<f64>,
    gap: Vec<f64>,
}

impl RadialGrid {
    pub fn new(bundle: &GeometricBundle, spec: GridSpec) -> Result<Self> {
        let edges = spec.edges()?;
        let mut volume = Vec::with_capacity(edges.len() - 1);
        let mut weighted = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            volume.push(bundle.shell(w[0], w[1])?);
            weighted.push(bundle.weighted_shell(w[0], w[1])?);
        }
        Ok(Self::assemble(bundle, spec, edges, volume, weighted))
    }

    /// Grid over explicit edges (used when restoring checkpoints).
    pub fn from_edges(bundle: &GeometricBundle, spec: GridSpec, edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 5 || edges[0] != 0.0 || !edges.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput("edges must start at 0 and increase strictly".into()));
        }
        let mut volume = Vec::with_capacity(edges.len() - 1);
        let mut weighted = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            volume.push(bundle.shell(w[0], w[1])?);
            weighted.push(bundle.weighted_shell(w[0], w[1])?);
        }
        Ok(Self::assemble(bundle, spec, edges, volume, weighted))
    }

    fn assemble(
        bundle: &GeometricBundle,
        spec: GridSpec,
        edges: Vec<f64>,
        volume: Vec<f64>,
        weighted: Vec<f64>,
    ) -> Self {
        let k = edges.len() - 1;
        let centers: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut edge_area: Vec<f64> = edges.iter().map(|&r| bundle.manifold().area(r)).collect();
        // zero-flux contract at both ends
        edge_area[0] = 0.0;
        edge_area[k] = 0.0;
        let mut gap = vec![f64::INFINITY; k + 1];
        for j in 1..k {
            gap[j] = centers[j] - centers[j - 1];
        }
        RadialGrid {
            spec,
            edges,
            centers,
            volume,
            weighted,
            edge_area,
            gap,
        }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn cells(&self) -> usize {
        self.volume.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// `w_i = omega_N int f^{N-1}` per cell.
    pub fn cell_volumes(&self) -> &[f64] {
        &self.volume
    }

    /// `w_rho_i = omega_N int rho f^{N-1}` per cell.
    pub fn weighted_volumes(&self) -> &[f64] {
        &self.weighted
    }

    /// `omega_N f(r_j)^{N-1}` per edge (zero at both ends).
    pub fn edge_areas(&self) -> &[f64] {
        &self.edge_area
    }

    /// Center-to-center distance across each interior edge.
    pub fn gaps(&self) -> &[f64] {
        &self.gap
    }

    pub fn r_max(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Smallest cell width.
    pub fn min_width(&self) -> f64 {
        self.edges
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Width of the last cell.
    pub fn outer_width(&self) -> f64 {
        let k = self.edges.len();
        self.edges[k - 1] - self.edges[k - 2]
    }

    /// Doubles `r_max`. Uniform grids merge cell pairs (mass-exact) and
    /// append the same number of cells again; stretched grids append
    /// geometric cells. Returns the re-embedded cell averages.
    pub fn extend(&mut self, bundle: &GeometricBundle, u: &[f64]) -> Result<Vec<f64>> {
        let r_old = self.r_max();
        let r_new = 2.0 * r_old;
        match self.spec {
            GridSpec::Uniform { cells, .. } => {
                if cells % 2 != 0 {
                    return Err(Error::InvalidInput("uniform grid extension needs an even cell count".into()));
                }
                let half = cells / 2;
                let mut edges = Vec::with_capacity(cells + 1);
                let mut volume = Vec::with_capacity(cells);
                let mut weighted = Vec::with_capacity(cells);
                let mut new_u = Vec::with_capacity(cells);
                for i in 0..half {
                    let (a, b) = (2 * i, 2 * i + 1);
                    edges.push(self.edges[a]);
                    let wr = self.weighted[a] + self.weighted[b];
                    volume.push(self.volume[a] + self.volume[b]);
                    new_u.push((self.weighted[a] * u[a] + self.weighted[b] * u[b]) / wr);
                    weighted.push(wr);
                }
                let dr = r_new / cells as f64;
                for i in half..=cells {
                    edges.push(if i == cells { r_new } else { i as f64 * dr });
                }
                edges[half] = r_old;
                for i in half..cells {
                    volume.push(bundle.shell(edges[i], edges[i + 1])?);
                    weighted.push(bundle.weighted_shell(edges[i], edges[i + 1])?);
                    new_u.push(0.0);
                }
                let spec = self.spec.with_r_max(r_new);
                *self = Self::assemble(bundle, spec, edges, volume, weighted);
                Ok(new_u)
            }
            GridSpec::Stretched { growth, .. } => {
                let mut edges = self.edges.clone();
                let last = self.outer_width();
                append_geometric(&mut edges, last, growth, r_new);
                let mut volume = self.volume.clone();
                let mut weighted = self.weighted.clone();
                let mut new_u = u.to_vec();
                for i in self.cells()..edges.len() - 1 {
                    volume.push(bundle.shell(edges[i], edges[i + 1])?);
                    weighted.push(bundle.weighted_shell(edges[i], edges[i + 1])?);
                    new_u.push(0.0);
                }
                let spec = self.spec.with_r_max(r_new);
                *self = Self::assemble(bundle, spec, edges, volume, weighted);
                Ok(new_u)
            }
        }
    }

    /// Per-cell weights `int_{cell cap B_R} rho dmu / w_rho_i` for the ball `B_R`.
    pub fn ball_fractions(&self, bundle: &GeometricBundle, radius: f64) -> Result<Vec<(usize, f64)>> {
        let mut out = Vec::new();
        for (i, w) in self.edges.windows(2).enumerate() {
            if w[0] >= radius {
                break;
            }
            if w[1] <= radius {
                out.push((i, 1.0));
            } else {
                let part = bundle.weighted_shell(w[0], radius)?;
                out.push((i, part / self.weighted[i]));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProblemConfig;

    fn bundle() -> GeometricBundle {
        let mut cfg = ProblemConfig::euclidean(3, 2.0, 2.0, 1.0);
        cfg.r_max = 100.0;
        cfg.nodes = 256;
        cfg.bundle().unwrap()
    }

    #[test]
    fn uniform_cells_sum_to_ball_volume() {
        let b = bundle();
        let g = RadialGrid::new(&b, GridSpec::Uniform { cells: 64, r_max: 5.0 }).unwrap();
        let total: f64 = g.cell_volumes().iter().sum();
        let exact = b.volume(5.0).unwrap();
        assert!((total / exact - 1.0).abs() < 1e-10);
        assert!(g.cell_volumes().iter().all(|&w| w > 0.0));
        assert_eq!(g.edge_areas()[0], 0.0);
        assert_eq!(*g.edge_areas().last().unwrap(), 0.0);
    }

    #[test]
    fn stretched_grid_reaches_r_max() {
        let spec = GridSpec::Stretched {
            core_cells: 20,
            core_radius: 2.0,
            growth: 0.05,
            r_max: 1e3,
        };
        let e = spec.edges().unwrap();
        assert_eq!(*e.last().unwrap(), 1e3);
        assert!(e.windows(2).all(|w| w[1] > w[0]));
        let widths: Vec<f64> = e.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(widths[25] > widths[19]);
    }

    #[test]
    fn uniform_extension_conserves_weighted_mass() {
        let b = bundle();
        let mut g = RadialGrid::new(&b, GridSpec::Uniform { cells: 32, r_max: 4.0 }).unwrap();
        let u: Vec<f64> = g.centers().iter().map(|&r| (4.0 - r).max(0.0) * (1.0 + r)).collect();
        let m0: f64 = g.weighted_volumes().iter().zip(&u).map(|(w, v)| w * v).sum();
        let u2 = g.extend(&b, &u).unwrap();
        assert_eq!(g.cells(), 32);
        assert!((g.r_max() - 8.0).abs() < 1e-15);
        let m1: f64 = g.weighted_volumes().iter().zip(&u2).map(|(w, v)| w * v).sum();
        assert!((m1 / m0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ball_fractions_cover_partial_cells() {
        let b = bundle();
        let g = RadialGrid::new(&b, GridSpec::Uniform { cells: 10, r_max: 10.0 }).unwrap();
        let fr = g.ball_fractions(&b, 2.5).unwrap();
        assert_eq!(fr.len(), 3);
        assert_eq!(fr[0].1, 1.0);
        assert!(fr[2].1 > 0.0 && fr[2].1 < 1.0);
        let inside: f64 = fr.iter().map(|&(i, f)| f * g.weighted_volumes()[i]).sum();
        assert!((inside / b.weighted_volume(2.5).unwrap() - 1.0).abs() < 1e-9);
    }
}
