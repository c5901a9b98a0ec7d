//! Piecewise-linear radial test functions, integration against `dmu` and
//! `rho dmu`, and the decreasing rearrangement.

use crate::error::{Error, Result};
use crate::geometry::quadrature::GaussLegendre;
use crate::geometry::GeometricBundle;

const GL_POINTS: usize = 6;

/// Nonnegative, compactly supported function, linear between `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialTestFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl RadialTestFunction {
    /// `nodes` start at 0 and increase strictly; the last value must be 0.
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "test function needs matching node/value arrays of length >= 2 (got {} and {})",
                nodes.len(),
                values.len()
            )));
        }
        if nodes[0] != 0.0 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("nodes must start at 0 and increase strictly".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("test function values must be finite and nonnegative".into()));
        }
        if *values.last().unwrap() != 0.0 {
            return Err(Error::InvalidInput("test function must vanish at the outer node".into()));
        }
        Ok(RadialTestFunction { nodes, values })
    }

    /// Samples `f` at `nodes`; negative samples are cut to 0 and the outer value is forced to 0.
    pub fn from_fn(nodes: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values: Vec<f64> = nodes.iter().map(|&r| f(r).max(0.0)).collect();
        if let Some(v) = values.last_mut() {
            *v = 0.0;
        }
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &b| a.max(b))
    }

    /// Outer end of the last segment on which the function is positive.
    pub fn support_radius(&self) -> f64 {
        match self.values.iter().rposition(|&v| v > 0.0) {
            Some(j) => self.nodes[(j + 1).min(self.nodes.len() - 1)],
            None => 0.0,
        }
    }

    /// Exact slope on segment `j`.
    pub fn slope(&self, j: usize) -> f64 {
        (self.values[j + 1] - self.values[j]) / (self.nodes[j + 1] - self.nodes[j])
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return self.values[0];
        }
        let j = self.nodes.partition_point(|&x| x <= r);
        if j >= self.nodes.len() {
            return 0.0;
        }
        let j = j - 1;
        self.values[j] + self.slope(j) * (r - self.nodes[j])
    }

    pub fn scaled(&self, c: f64) -> Self {
        RadialTestFunction {
            nodes: self.nodes.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `r -> u(lambda r)`, carried on the nodes `r_j / lambda`.
    pub fn dilated(&self, lambda: f64) -> Self {
        RadialTestFunction {
            nodes: self.nodes.iter().map(|r| r / lambda).collect(),
            values: self.values.clone(),
        }
    }
}

/// Pointwise data handed to integrands.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub r: f64,
    pub u: f64,
    pub du: f64,
    pub rho: f64,
    /// `omega(V(r))`
    pub omega: f64,
}

/// Per-segment Gauss-Legendre rule for `dmu = V'(r) dr` on fixed nodes.
#[derive(Debug, Clone)]
pub struct Measure<'a> {
    bundle: &'a GeometricBundle,
    gl: GaussLegendre,
    nodes: Vec<f64>,
    points: Vec<f64>,
    weights: Vec<f64>,
    rho: Vec<f64>,
    omega: Vec<f64>,
    node_volume: Vec<f64>,
}

impl<'a> Measure<'a> {
    pub fn new(bundle: &'a GeometricBundle, nodes: &[f64]) -> Result<Self> {
        let last = *nodes.last().ok_or_else(|| Error::InvalidInput("empty node set".into()))?;
        if last > bundle.r_max() {
            return Err(Error::range("test function support", last, 0.0, bundle.r_max()));
        }
        let gl = GaussLegendre::new(GL_POINTS);
        let mut points = Vec::with_capacity(GL_POINTS * nodes.len());
        let mut weights = Vec::with_capacity(points.capacity());
        let mut omega = Vec::with_capacity(points.capacity());
        let mut node_volume = Vec::with_capacity(nodes.len());
        node_volume.push(bundle.volume(nodes[0])?);
        let n = bundle.manifold().n();
        for w in nodes.windows(2) {
            let (half, mid) = (0.5 * (w[1] - w[0]), 0.5 * (w[0] + w[1]));
            let v0 = *node_volume.last().unwrap();
            for (x, g) in gl.nodes.iter().zip(&gl.weights) {
                let r = mid + half * x;
                let area = bundle.volume_derivative(r);
                points.push(r);
                weights.push(g * half * area);
                let v = v0 + bundle.shell(w[0], r)?;
                omega.push(v.powf((n - 1.0) / n) / area);
            }
            node_volume.push(v0 + bundle.shell(w[0], w[1])?);
        }
        let rho = points.iter().map(|&r| bundle.rho(r)).collect();
        Ok(Measure {
            bundle,
            gl,
            nodes: nodes.to_vec(),
            points,
            weights,
            rho,
            omega,
            node_volume,
        })
    }

    fn omega_in_segment(&self, j: usize, r: f64) -> f64 {
        let n = self.bundle.manifold().n();
        let v = self.node_volume[j] + self.bundle.shell(self.nodes[j], r).unwrap_or(f64::NAN);
        v.powf((n - 1.0) / n) / self.bundle.volume_derivative(r)
    }

    /// `|{u > 0}|`
    pub fn support_measure(&self, u: &RadialTestFunction) -> Result<f64> {
        self.distribution(u, 0.0)
    }

    pub fn bundle(&self) -> &GeometricBundle {
        self.bundle
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn check(&self, u: &RadialTestFunction) -> Result<()> {
        if u.nodes != self.nodes {
            return Err(Error::InvalidInput("test function and measure use different nodes".into()));
        }
        Ok(())
    }

    /// `int_{u > k} F dmu`, with the crossing segments clipped exactly.
    pub fn integrate_above<F: Fn(Sample) -> f64>(&self, u: &RadialTestFunction, k: f64, f: F) -> Result<f64> {
        self.check(u)?;
        let mut total = 0.0;
        for j in 0..self.nodes.len() - 1 {
            let (u0, u1) = (u.values[j], u.values[j + 1]);
            if u0 <= k && u1 <= k {
                continue;
            }
            let du = u.slope(j);
            let (a, b) = (self.nodes[j], self.nodes[j + 1]);
            if u0 > k && u1 > k {
                let base = j * GL_POINTS;
                for i in 0..GL_POINTS {
                    let r = self.points[base + i];
                    let s = Sample {
                        r,
                        u: u0 + du * (r - a),
                        du,
                        rho: self.rho[base + i],
                        omega: self.omega[base + i],
                    };
                    total += self.weights[base + i] * f(s);
                }
            } else {
                let c = a + (k - u0) / du;
                let (lo, hi) = if u0 > k { (a, c) } else { (c, b) };
                total += self.gl.integrate(
                    |r| {
                        let s = Sample {
                            r,
                            u: u0 + du * (r - a),
                            du,
                            rho: self.bundle.rho(r),
                            omega: self.omega_in_segment(j, r),
                        };
                        f(s) * self.bundle.volume_derivative(r)
                    },
                    lo,
                    hi,
                );
            }
        }
        Ok(total)
    }

    pub fn integrate<F: Fn(Sample) -> f64>(&self, u: &RadialTestFunction, f: F) -> Result<f64> {
        self.integrate_above(u, 0.0, f)
    }

    /// `mu_lambda = |{u > lambda}|`, exact for the interpolant.
    pub fn distribution(&self, u: &RadialTestFunction, lambda: f64) -> Result<f64> {
        self.check(u)?;
        let mut total = 0.0;
        for j in 0..self.nodes.len() - 1 {
            let (u0, u1) = (u.values[j], u.values[j + 1]);
            if u0 <= lambda && u1 <= lambda {
                continue;
            }
            if u0 > lambda && u1 > lambda {
                total += self.node_volume[j + 1] - self.node_volume[j];
                continue;
            }
            let (a, b) = (self.nodes[j], self.nodes[j + 1]);
            let c = a + (lambda - u0) / u.slope(j);
            total += if u0 > lambda { self.bundle.shell(a, c)? } else { self.bundle.shell(c, b)? };
        }
        Ok(total)
    }

    pub fn rearrange(&self, u: &RadialTestFunction) -> Result<Rearrangement> {
        self.check(u)?;
        let mut levels: Vec<f64> = u.values.clone();
        levels.push(0.0);
        levels.sort_by(|a, b| a.total_cmp(b));
        levels.dedup();
        let measures = levels
            .iter()
            .map(|&l| self.distribution(u, l))
            .collect::<Result<Vec<_>>>()?;
        Ok(Rearrangement { u: u.clone(), levels, measures })
    }
}

/// `u*(s) = inf { lambda : mu_lambda < s }` for a piecewise-linear `u`.
#[derive(Debug, Clone)]
pub struct Rearrangement {
    u: RadialTestFunction,
    /// Distinct node values in increasing order, starting at 0.
    levels: Vec<f64>,
    /// `mu_lambda` at each level, nonincreasing.
    measures: Vec<f64>,
}

impl Rearrangement {
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    /// Measure of the support, `mu_0`.
    pub fn support_measure(&self) -> f64 {
        self.measures[0]
    }

    /// `u*(s)` by bisection on the exact distribution function.
    pub fn value(&self, measure: &Measure, s: f64) -> Result<f64> {
        if s <= 0.0 {
            return Ok(*self.levels.last().unwrap());
        }
        if s > self.measures[0] {
            return Ok(0.0);
        }
        // first level whose measure drops below s
        let i = self.measures.partition_point(|&m| m >= s);
        if i == self.levels.len() {
            return Ok(*self.levels.last().unwrap());
        }
        let (mut lo, mut hi) = (self.levels[i - 1], self.levels[i]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if measure.distribution(&self.u, mid)? < s {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// `int_0^inf phi(u*(s)) ds = int_0^sup phi'(lambda) mu_lambda dlambda`.
    pub fn layer_cake<F: Fn(f64) -> f64>(&self, measure: &Measure, dphi: F) -> Result<f64> {
        let gl = GaussLegendre::new(8);
        let mut total = 0.0;
        for w in self.levels.windows(2) {
            let (half, mid) = (0.5 * (w[1] - w[0]), 0.5 * (w[0] + w[1]));
            for (x, g) in gl.nodes.iter().zip(&gl.weights) {
                let l = mid + half * x;
                total += g * half * dphi(l) * measure.distribution(&self.u, l)?;
            }
        }
        Ok(total)
    }

    /// `(s, u*(s))` at `count` points spread over the support measure.
    pub fn table(&self, measure: &Measure, count: usize) -> Result<Vec<(f64, f64)>> {
        let total = self.measures[0];
        (0..count)
            .map(|i| {
                let s = total * (i as f64 + 0.5) / count as f64;
                Ok((s, self.value(measure, s)?))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ProblemConfig;

    fn grid(n: usize, r: f64) -> Vec<f64> {
        (0..=n).map(|i| r * i as f64 / n as f64).collect()
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RadialTestFunction::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(RadialTestFunction::new(vec![0.0, 0.0], vec![1.0, 0.0]).is_err());
        assert!(RadialTestFunction::new(vec![0.0, 1.0], vec![-1.0, 0.0]).is_err());
    }

    #[test]
    fn ball_volume_and_plateau_rearrangement() {
        let b = ProblemConfig::euclidean(3, 2.0, 2.0, 0.0).bundle().unwrap();
        let nodes = grid(200, 2.0);
        let u = RadialTestFunction::from_fn(nodes.clone(), |r| if r <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        let m = Measure::new(&b, &nodes).unwrap();
        let one = m.integrate(&u, |_| 1.0).unwrap();
        // support is [0, 1.01]; the last segment carries a linear ramp
        let v = 4.0 * std::f64::consts::PI / 3.0;
        assert!(one > v && one < v * 1.031);
        let ra = m.rearrange(&u).unwrap();
        assert_eq!(ra.value(&m, 0.5 * v).unwrap(), 1.0);
        assert_eq!(ra.value(&m, 1.1 * one).unwrap(), 0.0);
    }
}
