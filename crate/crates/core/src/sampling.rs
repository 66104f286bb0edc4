//! Inverse-CDF sampling from a grid density and the one-sample KS distance.

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Piecewise-linear cumulative distribution of a density sampled on a grid
/// (trapezoidal cumulative sums, rescaled to end at exactly 1).
#[derive(Debug, Clone)]
pub struct GridCdf {
    points: Vec<f64>,
    cumulative: Vec<f64>,
}

impl GridCdf {
    pub fn from_density(grid: &Grid1D, density: &[f64]) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidArgument("density must be finite and non-negative".into()));
        }
        let h = grid.spacing();
        let mut cumulative = Vec::with_capacity(density.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in density.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cumulative.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::InvalidArgument("density has zero mass".into()));
        }
        cumulative.iter_mut().for_each(|c| *c /= acc);
        Ok(Self { points: grid.points(), cumulative })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.points.len();
        if x <= self.points[0] {
            return 0.0;
        }
        if x >= self.points[n - 1] {
            return 1.0;
        }
        let j = self.points.partition_point(|&p| p <= x) - 1;
        let s = (x - self.points[j]) / (self.points[j + 1] - self.points[j]);
        self.cumulative[j] + s * (self.cumulative[j + 1] - self.cumulative[j])
    }

    pub fn inverse(&self, u: f64) -> f64 {
        let n = self.points.len();
        let u = u.clamp(0.0, 1.0);
        let j = self.cumulative.partition_point(|&c| c < u).clamp(1, n - 1) - 1;
        let (c0, c1) = (self.cumulative[j], self.cumulative[j + 1]);
        let s = if c1 > c0 { ((u - c0) / (c1 - c0)).clamp(0.0, 1.0) } else { 0.0 };
        self.points[j] + s * (self.points[j + 1] - self.points[j])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.inverse(rng.gen::<f64>())).collect()
    }
}

/// Kolmogorov–Smirnov distance `sup |F_n(x) - F(x)|` between the empirical
/// distribution of `samples` and the reference CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}
