//! Uniform periodic grids on `[-T, T)` and sampled vector-valued trajectories.

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// Grid metadata: `N` nodes `t_k = -T + k dt`, `dt = 2T / N`, values in `R^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    points: usize,
    dim: usize,
}

impl Grid {
    pub fn new(half_width: f64, points: usize, dim: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidInput(format!(
                "half width T must be positive and finite, got {half_width}"
            )));
        }
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "number of points N must be a power of two >= 2, got {points}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidInput("dimension n must be positive".into()));
        }
        Ok(Grid {
            half_width,
            points,
            dim,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.dt()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |k| self.time(k))
    }

    /// Angular frequency of FFT bin `j`, i.e. `pi k / T` with `k` in `[-N/2, N/2)`.
    pub fn frequency(&self, j: usize) -> f64 {
        let n = self.points as isize;
        let k = if (j as isize) < n / 2 {
            j as isize
        } else {
            j as isize - n
        };
        std::f64::consts::PI * k as f64 / self.half_width
    }

    /// Same grid with a different value dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Grid::new(self.half_width, self.points, dim)
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "(T, N, n) = ({}, {}, {}) vs ({}, {}, {})",
                self.half_width,
                self.points,
                self.dim,
                other.half_width,
                other.points,
                other.dim
            )))
        }
    }
}

/// A trajectory `u: [-T, T) -> R^n` sampled on a [`Grid`]; row `k` holds `u(t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal {
    grid: Grid,
    values: Array2<f64>,
}

impl GridSignal {
    pub fn new(grid: Grid, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.points, grid.dim) {
            return Err(Error::Dimension(format!(
                "values have shape {:?}, grid expects ({}, {})",
                values.dim(),
                grid.points,
                grid.dim
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample {bad}")));
        }
        Ok(GridSignal { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridSignal {
            grid,
            values: Array2::zeros((grid.points, grid.dim)),
        }
    }

    /// Samples `f(t)` at every node; `f` writes `u(t)` into the provided slice.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, &mut [f64])) -> Result<Self> {
        let mut values = Array2::zeros((grid.points, grid.dim));
        let mut buf = vec![0.0; grid.dim];
        for (k, mut row) in values.axis_iter_mut(Axis(0)).enumerate() {
            buf.iter_mut().for_each(|b| *b = 0.0);
            f(grid.time(k), &mut buf);
            row.iter_mut().zip(&buf).for_each(|(r, b)| *r = *b);
        }
        GridSignal::new(grid, values)
    }

    /// Scalar profile `phi(t)` times a fixed vector.
    pub fn from_profile(grid: Grid, direction: &[f64], phi: impl Fn(f64) -> f64) -> Result<Self> {
        if direction.len() != grid.dim {
            return Err(Error::Dimension(format!(
                "direction has length {}, grid dimension is {}",
                direction.len(),
                grid.dim
            )));
        }
        GridSignal::from_fn(grid, |t, out| {
            let p = phi(t);
            out.iter_mut().zip(direction).for_each(|(o, d)| *o = p * d);
        })
    }

    /// Wraps raw values produced internally from already-valid inputs.
    pub(crate) fn from_parts(grid: Grid, values: Array2<f64>) -> Self {
        debug_assert_eq!(values.dim(), (grid.points, grid.dim));
        GridSignal { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn row(&self, k: usize) -> ArrayView1<'_, f64> {
        self.values.row(k)
    }

    pub fn component(&self, c: usize) -> ArrayView1<'_, f64> {
        self.values.column(c)
    }

    pub fn ensure_compatible(&self, other: &GridSignal) -> Result<()> {
        self.grid.ensure_same(&other.grid)
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.values.iter().find(|v| !v.is_finite()) {
            Some(bad) => Err(Error::InvalidInput(format!("non-finite sample {bad}"))),
            None => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, s: f64) -> GridSignal {
        GridSignal::from_parts(self.grid, &self.values * s)
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &GridSignal) -> Result<GridSignal> {
        self.ensure_compatible(other)?;
        let mut values = self.values.clone();
        values.scaled_add(s, &other.values);
        Ok(GridSignal::from_parts(self.grid, values))
    }

    pub fn sub(&self, other: &GridSignal) -> Result<GridSignal> {
        self.add_scaled(-1.0, other)
    }

    /// Trapezoidal (periodic) quadrature of `(u(t), v(t))`.
    pub fn dot_l2(&self, other: &GridSignal) -> Result<f64> {
        self.ensure_compatible(other)?;
        let s: f64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b)
            .sum();
        Ok(s * self.grid.dt())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dt()).sqrt()
    }

    /// `max_k |u(t_k)|` with the Euclidean norm in `R^n`.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .axis_iter(Axis(0))
            .map(|r| r.dot(&r).sqrt())
            .fold(0.0, f64::max)
    }

    /// Largest absolute sample over all components.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid mean of each component.
    pub fn means(&self) -> Vec<f64> {
        let n = self.grid.points as f64;
        self.values
            .axis_iter(Axis(1))
            .map(|c| c.sum() / n)
            .collect()
    }

    /// `u(-t)` on the same grid: node `k` maps to node `(N - k) mod N`.
    pub fn reflected(&self) -> GridSignal {
        let n = self.grid.points;
        let mut values = Array2::zeros(self.values.dim());
        for k in 0..n {
            values.row_mut(k).assign(&self.values.row((n - k) % n));
        }
        GridSignal::from_parts(self.grid, values)
    }
}
