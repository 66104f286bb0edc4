use crate::error::{Error, Result};

/// Uniform position grid `min = x_0 < x_1 < ... < x_{n-1} = max`.
///
/// Points are evaluated as `(min·(n-1-i) + max·i)/(n-1)`, which equals
/// `min + i·spacing` up to rounding and makes a symmetric grid exactly
/// mirror-symmetric (`x_{n-1-i} == -x_i` bitwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    min: f64,
    max: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(Error::InvalidGrid(format!("need finite min < max, got [{min}, {max}]")));
        }
        Ok(Self { min, max, n })
    }

    /// Symmetric grid `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        let last = (self.n - 1) as f64;
        (self.min * (last - i as f64) + self.max * i as f64) / last
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.min == -self.max
    }

    /// Index of the point mirrored through the grid centre.
    pub fn mirror(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    /// Cell index `j` with `x_j <= x <= x_{j+1}`, or `None` outside the grid.
    pub fn cell(&self, x: f64) -> Option<usize> {
        if !(x >= self.min && x <= self.max) {
            return None;
        }
        let j = ((x - self.min) / self.spacing()).floor() as usize;
        Some(j.min(self.n - 2))
    }
}
