//! Norms and inner products of `H^α` and `X^α` on the grid, and the two
//! embedding constants the mountain-pass geometry is built from.
//!
//! Conventions: time integrals use the periodic trapezoidal rule
//! `dt * sum_k`; frequency integrals use the matching discrete Plancherel
//! identity `∫ |u|^2 = (dt / N) sum_j |U_j|^2`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{tag, Error, Result};
use crate::fracops::{self, left_frac_derivative, FracOrder};
use crate::grid::{Grid, GridSignal};
use crate::problem::MatrixField;

/// `L(t_k)` at every node, with symmetry and smallest eigenvalues precomputed.
#[derive(Debug, Clone)]
pub struct SampledField {
    grid: Grid,
    /// Row-major `n x n` blocks, one per node.
    matrices: Vec<f64>,
    min_eigs: Vec<f64>,
    floors: Vec<f64>,
    asymmetric_nodes: usize,
    diagonal: bool,
}

impl SampledField {
    pub fn sample(field: &MatrixField, grid: &Grid) -> Result<Self> {
        let n = field.dim();
        if n != grid.dim() {
            return Err(Error::Dimension(format!(
                "matrix field is {n}x{n}, grid dimension is {}",
                grid.dim()
            )));
        }
        let mut matrices = Vec::with_capacity(grid.points() * n * n);
        let mut min_eigs = Vec::with_capacity(grid.points());
        let mut floors = Vec::with_capacity(grid.points());
        let mut asymmetric_nodes = 0;
        for t in grid.times() {
            let m = field.eval(t);
            if !is_symmetric(&m) {
                asymmetric_nodes += 1;
            }
            min_eigs.push(smallest_eigenvalue(&m, field.is_diagonal()));
            floors.push(field.floor(t));
            for i in 0..n {
                for j in 0..n {
                    matrices.push(m[(i, j)]);
                }
            }
        }
        if let Some(bad) = matrices.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("matrix field returned {bad}")));
        }
        Ok(SampledField {
            grid: *grid,
            matrices,
            min_eigs,
            floors,
            asymmetric_nodes,
            diagonal: field.is_diagonal(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Smallest eigenvalue of `L(t_k)` over all nodes.
    pub fn l_min(&self) -> f64 {
        self.min_eigs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_eigenvalues(&self) -> &[f64] {
        &self.min_eigs
    }

    pub fn floors(&self) -> &[f64] {
        &self.floors
    }

    pub fn asymmetric_nodes(&self) -> usize {
        self.asymmetric_nodes
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    /// Errors unless every sampled `L(t_k)` is symmetric positive definite.
    pub fn ensure_spd(&self) -> Result<()> {
        if self.asymmetric_nodes > 0 {
            return Err(Error::hypothesis(
                tag::L,
                format!("L(t) is not symmetric at {} nodes", self.asymmetric_nodes),
            ));
        }
        let l_min = self.l_min();
        if l_min <= 0.0 {
            return Err(Error::hypothesis(
                tag::L,
                format!("L(t) is not positive definite (smallest eigenvalue {l_min:e})"),
            ));
        }
        Ok(())
    }

    /// Pointwise product `L(t_k) u(t_k)`.
    pub fn apply(&self, u: &GridSignal) -> Result<GridSignal> {
        self.grid.ensure_same(u.grid())?;
        let n = self.grid.dim();
        let mut out = u.values().clone();
        for (k, mut row) in out.rows_mut().into_iter().enumerate() {
            let block = &self.matrices[k * n * n..(k + 1) * n * n];
            let uk = u.row(k);
            for i in 0..n {
                row[i] = (0..n).map(|j| block[i * n + j] * uk[j]).sum();
            }
        }
        Ok(GridSignal::from_parts(self.grid, out))
    }

    /// `∫ (L(t) u, v) dt`.
    pub fn pairing(&self, u: &GridSignal, v: &GridSignal) -> Result<f64> {
        self.apply(u)?.dot_l2(v)
    }
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= 1e-12 * scale))
}

fn smallest_eigenvalue(m: &DMatrix<f64>, diagonal: bool) -> f64 {
    if diagonal {
        return m.diagonal().iter().copied().fold(f64::INFINITY, f64::min);
    }
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub l2_norm: f64,
    pub sup_norm: f64,
    pub h_alpha_seminorm: f64,
    pub h_alpha_norm: f64,
    pub x_alpha_norm: f64,
}

/// `(dt/N) sum_j |w_j|^(2α) |U_j|^2`, the square of `| |w|^α û |_{L²}`.
pub(crate) fn seminorm_squared(u: &GridSignal, a: FracOrder) -> f64 {
    let grid = u.grid();
    let nyquist = grid.points() / 2;
    let p = 2.0 * a.value();
    let weights: Vec<f64> = (0..grid.points())
        .map(|j| {
            if j == 0 || j == nyquist {
                0.0
            } else {
                grid.frequency(j).abs().powf(p)
            }
        })
        .collect();
    let total: f64 = fracops::spectra(u)
        .iter()
        .map(|s| s.iter().zip(&weights).map(|(z, w)| w * z.norm_sqr()).sum::<f64>())
        .sum();
    total * grid.dt() / grid.points() as f64
}

/// `|u|_α = | |w|^α û |_{L²}`, normalized to equal `|-∞D_t^α u|_{L²}`.
pub fn h_alpha_seminorm(u: &GridSignal, a: FracOrder) -> Result<f64> {
    u.ensure_finite()?;
    Ok(seminorm_squared(u, a).sqrt())
}

pub fn h_alpha_norm(u: &GridSignal, a: FracOrder) -> Result<f64> {
    u.ensure_finite()?;
    Ok((u.l2_norm().powi(2) + seminorm_squared(u, a)).sqrt())
}

/// `⟨u, v⟩_X = ∫ (-∞D^α u, -∞D^α v) + (L u, v) dt`.
pub fn x_alpha_inner(
    u: &GridSignal,
    v: &GridSignal,
    field: &SampledField,
    a: FracOrder,
) -> Result<f64> {
    u.ensure_compatible(v)?;
    field.grid().ensure_same(u.grid())?;
    field.ensure_spd()?;
    let du = left_frac_derivative(u, a)?;
    let dv = left_frac_derivative(v, a)?;
    Ok(du.dot_l2(&dv)? + field.pairing(u, v)?)
}

pub fn x_alpha_norm(u: &GridSignal, field: &SampledField, a: FracOrder) -> Result<f64> {
    Ok(x_alpha_inner(u, u, field, a)?.max(0.0).sqrt())
}

pub fn norm_report(u: &GridSignal, field: &SampledField, a: FracOrder) -> Result<NormReport> {
    let semi = h_alpha_seminorm(u, a)?;
    let l2 = u.l2_norm();
    Ok(NormReport {
        l2_norm: l2,
        sup_norm: u.sup_norm(),
        h_alpha_seminorm: semi,
        h_alpha_norm: (l2 * l2 + semi * semi).sqrt(),
        x_alpha_norm: x_alpha_norm(u, field, a)?,
    })
}

/// Constant of `sup |u| <= C_α ||u||_α`:
/// `C_α = ((1/2π) ∫_R dw / (1 + |w|^(2α)))^(1/2)`, with
/// `∫_0^∞ dx / (1 + x^p) = (π/p) / sin(π/p)`. Needs `α > 1/2`.
pub fn sobolev_constant(a: FracOrder) -> Result<f64> {
    let alpha = a.value();
    if alpha <= 0.5 {
        return Err(Error::EmbeddingFails(alpha));
    }
    let p = 2.0 * alpha;
    let half_line = (PI / p) / (PI / p).sin();
    Ok((2.0 * half_line / (2.0 * PI)).sqrt())
}

/// `C_e = max(1, 1/l_min)^(1/2)` with `l_min` the smallest eigenvalue of
/// `L(t_k)` over the grid nodes.
pub fn embedding_constant_ce(field: &MatrixField, grid: &Grid) -> Result<f64> {
    let grid = grid.with_dim(field.dim())?;
    embedding_constant_from_samples(&SampledField::sample(field, &grid)?)
}

pub fn embedding_constant_from_samples(field: &SampledField) -> Result<f64> {
    let l_min = field.l_min();
    if l_min <= 0.0 {
        return Err(Error::hypothesis(
            tag::L,
            format!("smallest eigenvalue of L over the grid is {l_min:e} <= 0"),
        ));
    }
    Ok((1.0f64).max(1.0 / l_min).sqrt())
}

/// Both sides of `∫ |u|^q <= ||u||_∞^(q-2) ||u||_{L²}^2`.
pub fn lq_interpolation_check(u: &GridSignal, q: f64) -> Result<(f64, f64)> {
    if !(q >= 2.0) {
        return Err(Error::InvalidInput(format!("exponent q must be >= 2, got {q}")));
    }
    u.ensure_finite()?;
    let dt = u.grid().dt();
    let lhs = u
        .values()
        .rows()
        .into_iter()
        .map(|r| r.dot(&r).sqrt().powf(q))
        .sum::<f64>()
        * dt;
    let l2 = u.l2_norm();
    let rhs = if l2 == 0.0 {
        0.0
    } else {
        u.sup_norm().powf(q - 2.0) * l2 * l2
    };
    Ok((lhs, rhs))
}

/// `∫_{|t| > R} |u|^2 dt`.
pub fn tail_mass(u: &GridSignal, radius: f64) -> f64 {
    let g = u.grid();
    u.values()
        .rows()
        .into_iter()
        .enumerate()
        .filter(|(k, _)| g.time(*k).abs() > radius)
        .map(|(_, r)| r.dot(&r))
        .sum::<f64>()
        * g.dt()
}
