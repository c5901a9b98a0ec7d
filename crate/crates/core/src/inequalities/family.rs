//! Seeded families of radial test functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::function::RadialTestFunction;
use crate::error::{Error, Result};

/// One smooth bump `a (1 - ((r - c)/w)^2)_+^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn eval(&self, r: f64) -> f64 {
        let x = (r - self.center) / self.width;
        let s = 1.0 - x * x;
        if s <= 0.0 {
            0.0
        } else {
            self.amplitude * s * s
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilySpec {
    pub count: usize,
    pub seed: u64,
    /// Test functions live on `[0, radius]`.
    pub radius: f64,
    /// Segments of the piecewise-linear interpolant.
    pub segments: usize,
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec {
            count: 100,
            seed: 20_240_601,
            radius: 10.0,
            segments: 512,
        }
    }
}

impl FamilySpec {
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.segments)
            .map(|i| self.radius * i as f64 / self.segments as f64)
            .collect()
    }

    /// Bump parameters of every member, independent of `segments`.
    /// Centers lie in `[0, radius/2]`, widths are log-uniform in `[radius/40, radius/4]`,
    /// each member has 1 to 3 bumps.
    pub fn bumps(&self) -> Vec<Vec<Bump>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (wlo, whi) = ((self.radius / 40.0).ln(), (self.radius / 4.0).ln());
        (0..self.count)
            .map(|_| {
                let n = rng.gen_range(1..=3);
                (0..n)
                    .map(|_| Bump {
                        center: rng.gen_range(0.0..=0.5 * self.radius),
                        width: rng.gen_range(wlo..=whi).exp(),
                        amplitude: rng.gen_range(0.2..=1.0),
                    })
                    .collect()
            })
            .collect()
    }

    /// The `bumps100`-style family sampled on [`FamilySpec::nodes`].
    pub fn build(&self) -> Result<Vec<RadialTestFunction>> {
        if self.count == 0 || self.segments < 8 || !(self.radius > 0.0) {
            return Err(Error::InvalidInput(format!("degenerate family {self:?}")));
        }
        let nodes = self.nodes();
        self.bumps()
            .into_iter()
            .map(|bs| RadialTestFunction::from_fn(nodes.clone(), |r| bs.iter().map(|b| b.eval(r)).sum()))
            .collect()
    }
}

/// Resolves a family name used on the command line.
pub fn named_family(name: &str) -> Result<FamilySpec> {
    match name {
        "bumps100" => Ok(FamilySpec::default()),
        other => Err(Error::InvalidInput(format!("unknown family '{other}' (known: bumps100)"))),
    }
}
