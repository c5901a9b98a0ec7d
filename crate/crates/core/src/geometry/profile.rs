//! Warping functions and radial densities.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Area of the unit sphere `S^{N-1}` in `R^N`.
pub fn sphere_area(n: u32) -> f64 {
    use std::f64::consts::PI;
    // Gamma(N/2) by recursion from Gamma(1) = 1, Gamma(1/2) = sqrt(pi)
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x + 0.5 < n as f64 / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(n as f64 / 2.0) / gamma
}

#[derive(Clone)]
pub enum Warp {
    /// `f(t) = C(A) t` for `t <= A`, `t^beta (ln t)^nu` beyond, with `C(A)`
    /// fixed by continuity.
    PowerLog { beta: f64, nu: f64, a: f64 },
    Custom { f: RadialFn, breaks: Vec<f64> },
}

impl fmt::Debug for Warp {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warp::PowerLog { beta, nu, a } => fm
                .debug_struct("PowerLog")
                .field("beta", beta)
                .field("nu", nu)
                .field("a", a)
                .finish(),
            Warp::Custom { breaks, .. } => fm
                .debug_struct("Custom")
                .field("breaks", breaks)
                .finish_non_exhaustive(),
        }
    }
}

/// Model manifold with metric `dr^2 + f(r)^2 dxi^2` on `(0, inf) x S^{N-1}`.
#[derive(Debug, Clone)]
pub struct ManifoldProfile {
    dimension: u32,
    warp: Warp,
    sphere_area: f64,
    slope_at_origin: f64,
}

impl ManifoldProfile {
    pub fn power_log(dimension: u32, beta: f64, nu: f64, a: f64) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidSpec(format!("dimension N = {dimension} < 2")));
        }
        if !(a >= std::f64::consts::E * (1.0 - 1e-15)) {
            return Err(Error::InvalidSpec(format!("matching point A = {a} < e")));
        }
        if !(beta > 0.0 && beta <= 1.0) || !nu.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "warp exponents beta = {beta}, nu = {nu} not admissible"
            )));
        }
        let slope = a.powf(beta - 1.0) * a.ln().powf(nu);
        Ok(ManifoldProfile {
            dimension,
            warp: Warp::PowerLog { beta, nu, a },
            sphere_area: sphere_area(dimension),
            slope_at_origin: slope,
        })
    }

    /// Flat `R^N`.
    pub fn euclidean(dimension: u32) -> Result<Self> {
        Self::power_log(dimension, 1.0, 0.0, std::f64::consts::E)
    }

    /// User-supplied warp; `f(0) = 0`, `f > 0` on `(0, inf)` is checked on a
    /// sample grid.
    pub fn custom(dimension: u32, f: RadialFn, breaks: Vec<f64>) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidSpec(format!("dimension N = {dimension} < 2")));
        }
        if f(0.0) != 0.0 {
            return Err(Error::InvalidSpec("warp must vanish at the origin".into()));
        }
        for i in 0..200 {
            let r = 1e-6 * 1.2f64.powi(i);
            let v = f(r);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidSpec(format!("warp not positive at r = {r:e}")));
            }
        }
        let h = 1e-8;
        let slope = f(h) / h;
        Ok(ManifoldProfile {
            dimension,
            warp: Warp::Custom { f, breaks },
            sphere_area: sphere_area(dimension),
            slope_at_origin: slope,
        })
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn n(&self) -> f64 {
        self.dimension as f64
    }

    pub fn sphere_area(&self) -> f64 {
        self.sphere_area
    }

    pub fn warp_kind(&self) -> &Warp {
        &self.warp
    }

    /// `f'(0+)`; for the built-in family this is `C(A)`.
    pub fn slope_at_origin(&self) -> f64 {
        self.slope_at_origin
    }

    pub fn warp(&self, r: f64) -> f64 {
        match &self.warp {
            Warp::PowerLog { beta, nu, a } => {
                if r <= *a {
                    self.slope_at_origin * r
                } else {
                    r.powf(*beta) * r.ln().powf(*nu)
                }
            }
            Warp::Custom { f, .. } => f(r),
        }
    }

    /// Area density `omega_N f(r)^{N-1}`, i.e. `V'(r)`.
    pub fn area(&self, r: f64) -> f64 {
        self.sphere_area * self.warp(r).powi(self.dimension as i32 - 1)
    }

    /// Points where `f` is not smooth.
    pub fn breaks(&self) -> Vec<f64> {
        match &self.warp {
            Warp::PowerLog { a, .. } => vec![*a],
            Warp::Custom { breaks, .. } => breaks.clone(),
        }
    }

    /// Continuity defect `|f(A-) - f(A+)|` of the built-in family.
    pub fn matching_defect(&self) -> f64 {
        match &self.warp {
            Warp::PowerLog { beta, nu, a } => {
                (self.slope_at_origin * a - a.powf(*beta) * a.ln().powf(*nu)).abs()
            }
            Warp::Custom { .. } => 0.0,
        }
    }

    /// Radius beyond which the profile is a pure power-log law.
    pub fn tail_start(&self) -> f64 {
        match &self.warp {
            Warp::PowerLog { a, .. } => *a,
            Warp::Custom { breaks, .. } => breaks.iter().copied().fold(1.0, f64::max),
        }
    }
}

#[derive(Clone)]
pub enum Density {
    /// `rho(t) = B^{-alpha} (ln B)^mu` for `t <= B`, `t^{-alpha} (ln t)^mu` beyond.
    PowerLog { alpha: f64, mu: f64, b: f64 },
    Custom { rho: RadialFn, alpha: f64, breaks: Vec<f64> },
}

impl fmt::Debug for Density {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::PowerLog { alpha, mu, b } => fm
                .debug_struct("PowerLog")
                .field("alpha", alpha)
                .field("mu", mu)
                .field("b", b)
                .finish(),
            Density::Custom { alpha, breaks, .. } => fm
                .debug_struct("Custom")
                .field("alpha", alpha)
                .field("breaks", breaks)
                .finish_non_exhaustive(),
        }
    }
}

/// Positive nonincreasing radial density with monotonicity window `(alpha1, alpha2)`.
#[derive(Debug, Clone)]
pub struct DensityProfile {
    kind: Density,
    window: (f64, f64),
    scale: f64,
}

impl DensityProfile {
    pub fn power_log(alpha: f64, mu: f64, b: f64, window: (f64, f64)) -> Result<Self> {
        if !(alpha >= 0.0) || !mu.is_finite() {
            return Err(Error::InvalidSpec(format!("density exponents alpha = {alpha}, mu = {mu}")));
        }
        if !(b >= std::f64::consts::E * (1.0 - 1e-15)) {
            return Err(Error::InvalidSpec(format!("density matching point B = {b} < e")));
        }
        // nonincreasing beyond B needs ln B >= mu / alpha
        if mu > 0.0 && (alpha == 0.0 || b.ln() < mu / alpha) {
            return Err(Error::InvalidSpec(format!(
                "density increases beyond B = {b} (need ln B >= mu/alpha)"
            )));
        }
        let d = DensityProfile {
            kind: Density::PowerLog { alpha, mu, b },
            window,
            scale: 1.0,
        };
        d.validate_window()?;
        Ok(d)
    }

    /// Constant density `rho = 1`.
    pub fn uniform(window: (f64, f64)) -> Result<Self> {
        Self::power_log(0.0, 0.0, std::f64::consts::E, window)
    }

    pub fn custom(rho: RadialFn, alpha: f64, breaks: Vec<f64>, window: (f64, f64)) -> Result<Self> {
        let mut prev = f64::INFINITY;
        for i in 0..300 {
            let r = if i == 0 { 0.0 } else { 1e-6 * 1.15f64.powi(i) };
            let v = rho(r);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidSpec(format!("density not positive at r = {r:e}")));
            }
            if v > prev * (1.0 + 1e-12) {
                return Err(Error::InvalidSpec(format!("density increases at r = {r:e}")));
            }
            prev = v;
        }
        let d = DensityProfile {
            kind: Density::Custom { rho, alpha, breaks },
            window,
            scale: 1.0,
        };
        d.validate_window()?;
        Ok(d)
    }

    fn validate_window(&self) -> Result<()> {
        let (a1, a2) = self.window;
        if !(a1 > 0.0 && a2 > a1) {
            return Err(Error::InvalidSpec(format!(
                "monotonicity window ({a1}, {a2}) must satisfy 0 < alpha1 < alpha2"
            )));
        }
        Ok(())
    }

    /// Multiplies the density by a positive constant.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale *= factor;
        self
    }

    pub fn kind(&self) -> &Density {
        &self.kind
    }

    pub fn alpha(&self) -> f64 {
        match &self.kind {
            Density::PowerLog { alpha, .. } | Density::Custom { alpha, .. } => *alpha,
        }
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn rho(&self, r: f64) -> f64 {
        self.scale
            * match &self.kind {
                Density::PowerLog { alpha, mu, b } => {
                    let t = r.max(*b);
                    t.powf(-alpha) * t.ln().powf(*mu)
                }
                Density::Custom { rho, .. } => rho(r),
            }
    }

    pub fn breaks(&self) -> Vec<f64> {
        match &self.kind {
            Density::PowerLog { b, .. } => vec![*b],
            Density::Custom { breaks, .. } => breaks.clone(),
        }
    }

    pub fn tail_start(&self) -> f64 {
        match &self.kind {
            Density::PowerLog { b, .. } => *b,
            Density::Custom { breaks, .. } => breaks.iter().copied().fold(1.0, f64::max),
        }
    }

    /// Continuity defect at `B` of the built-in family.
    pub fn matching_defect(&self) -> f64 {
        match &self.kind {
            Density::PowerLog { alpha, mu, b } => {
                let left = self.rho(*b);
                let right = self.scale * b.powf(-alpha) * b.ln().powf(*mu);
                (left - right).abs()
            }
            Density::Custom { .. } => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn warp_is_continuous_at_matching_point() {
        for &(beta, nu, a) in &[(0.9, 0.0, std::f64::consts::E), (0.7, 1.5, 5.0), (1.0, 1.0, 3.0)] {
            let m = ManifoldProfile::power_log(3, beta, nu, a).unwrap();
            assert!(m.matching_defect() <= 1e-14 * a, "{beta} {nu} {a}");
            let left = m.warp(a * (1.0 - 1e-12));
            let right = m.warp(a * (1.0 + 1e-12));
            assert!((left - right).abs() < 1e-9);
        }
    }

    #[test]
    fn euclidean_warp_is_identity() {
        let m = ManifoldProfile::euclidean(3).unwrap();
        for &r in &[0.0, 0.3, 2.0, 17.0] {
            assert!((m.warp(r) - r).abs() < 1e-12 * r.max(1.0));
        }
    }

    #[test]
    fn density_is_positive_nonincreasing_and_continuous() {
        let d = DensityProfile::power_log(1.3, 0.5, 4.0, (1.0, 1.6)).unwrap();
        assert!(d.matching_defect() < 1e-15);
        let mut prev = f64::INFINITY;
        for i in 0..400 {
            let r = 1e-3 * 1.05f64.powi(i);
            let v = d.rho(r);
            assert!(v > 0.0 && v <= prev);
            prev = v;
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ManifoldProfile::power_log(1, 1.0, 0.0, 3.0).is_err());
        assert!(ManifoldProfile::power_log(3, 1.0, 0.0, 2.0).is_err());
        assert!(DensityProfile::power_log(1.0, 0.0, 3.0, (0.5, 0.4)).is_err());
        assert!(DensityProfile::power_log(0.1, 2.0, 3.0, (0.05, 0.4)).is_err());
    }
}
