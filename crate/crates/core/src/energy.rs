//! The action functional
//!
//! `I(u) = ½ ||u||_X² - ∫ W(t, u) dt + ∫ (f, u) dt`,
//!
//! its derivative, the preconditioned (Riesz) gradient used by the solvers,
//! and the strong-form residual of the Euler–Lagrange system.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fracops::{self, composed_operator};
use crate::grid::GridSignal;
use crate::problem::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub action_value: f64,
    pub x_alpha_norm: f64,
    pub gradient_x_norm: f64,
    pub strong_residual_l2: f64,
}

fn check_grid(u: &GridSignal, p: &ProblemSpec) -> Result<()> {
    p.grid().ensure_same(u.grid())?;
    u.ensure_finite()
}

fn potential_integral(u: &GridSignal, p: &ProblemSpec) -> f64 {
    let g = u.grid();
    let w = p.potential();
    u.values()
        .rows()
        .into_iter()
        .enumerate()
        .map(|(k, row)| w.value(g.time(k), &row.to_vec()))
        .sum::<f64>()
        * g.dt()
}

/// `∇W(t_k, u(t_k))` at every node.
pub fn potential_gradient(u: &GridSignal, p: &ProblemSpec) -> Result<GridSignal> {
    check_grid(u, p)?;
    let g = *u.grid();
    let w = p.potential();
    let mut out = u.values().clone();
    let mut buf = vec![0.0; g.dim()];
    for (k, mut row) in out.rows_mut().into_iter().enumerate() {
        let x = row.to_vec();
        w.gradient(g.time(k), &x, &mut buf);
        row.iter_mut().zip(&buf).for_each(|(r, b)| *r = *b);
    }
    GridSignal::new(g, out)
}

/// `A u + L u` with `A` the composed fractional operator: the linear part of
/// the Euler–Lagrange operator, so that `⟨Qu, u⟩_{L²} = ||u||_X²`.
pub fn quadratic_operator(u: &GridSignal, p: &ProblemSpec) -> Result<GridSignal> {
    check_grid(u, p)?;
    let mut q = composed_operator(u, p.alpha())?.add_scaled(1.0, &p.sampled_field().apply(u)?)?;
    let shift = p.zero_mode_shift();
    if shift != 0.0 {
        let means = u.means();
        for mut row in q.values_mut().rows_mut() {
            row.iter_mut().zip(&means).for_each(|(r, m)| *r += shift * m);
        }
    }
    Ok(q)
}

/// `||u||_X²` evaluated as `⟨Qu, u⟩_{L²}`.
pub fn x_norm_squared(u: &GridSignal, p: &ProblemSpec) -> Result<f64> {
    quadratic_operator(u, p)?.dot_l2(u)
}

pub fn x_norm(u: &GridSignal, p: &ProblemSpec) -> Result<f64> {
    Ok(x_norm_squared(u, p)?.max(0.0).sqrt())
}

/// `⟨u, v⟩_X` evaluated as `⟨Qu, v⟩_{L²}`.
pub fn x_inner(u: &GridSignal, v: &GridSignal, p: &ProblemSpec) -> Result<f64> {
    check_grid(v, p)?;
    quadratic_operator(u, p)?.dot_l2(v)
}

pub fn action(u: &GridSignal, p: &ProblemSpec) -> Result<f64> {
    check_grid(u, p)?;
    let quad = x_norm_squared(u, p)?;
    Ok(0.5 * quad - potential_integral(u, p) + p.forcing().dot_l2(u)?)
}

/// Action and `L²` gradient from one operator application.
pub fn action_and_gradient(u: &GridSignal, p: &ProblemSpec) -> Result<(f64, GridSignal)> {
    check_grid(u, p)?;
    let qu = quadratic_operator(u, p)?;
    let value = 0.5 * qu.dot_l2(u)? - potential_integral(u, p) + p.forcing().dot_l2(u)?;
    let grad = qu
        .sub(&potential_gradient(u, p)?)?
        .add_scaled(1.0, p.forcing())?;
    Ok((value, grad))
}

/// `A u + L u - ∇W(t, u) + f`, the representer of `I'(u)` in `L²`.
pub fn l2_gradient(u: &GridSignal, p: &ProblemSpec) -> Result<GridSignal> {
    Ok(action_and_gradient(u, p)?.1)
}

/// `I'(u) v = ∫ (D u, D v) + (L u, v) - (∇W(t, u), v) + (f, v) dt`.
pub fn directional_derivative(u: &GridSignal, v: &GridSignal, p: &ProblemSpec) -> Result<f64> {
    check_grid(v, p)?;
    l2_gradient(u, p)?.dot_l2(v)
}

/// `I'(u) u = ||u||_X² - ∫ (∇W(t, u), u) dt + ∫ (f, u) dt`.
pub fn self_pairing(u: &GridSignal, p: &ProblemSpec) -> Result<f64> {
    let quad = x_norm_squared(u, p)?;
    let nonlinear = potential_gradient(u, p)?.dot_l2(u)?;
    Ok(quad - nonlinear + p.forcing().dot_l2(u)?)
}

/// `I(v) - I(u)` as `∫₀¹ I'(u + θ(v - u))(v - u) dθ` by 3-point Gauss–Legendre.
/// Exact when `W` is a polynomial of degree at most 6 in `x`; free of the
/// cancellation in subtracting two nearly equal actions.
pub fn action_difference(u: &GridSignal, v: &GridSignal, p: &ProblemSpec) -> Result<f64> {
    let delta = v.sub(u)?;
    let r = (0.6f64).sqrt() / 2.0;
    let nodes = [(0.5 - r, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + r, 5.0 / 18.0)];
    let mut total = 0.0;
    for (theta, weight) in nodes {
        total += weight * directional_derivative(&u.add_scaled(theta, &delta)?, &delta, p)?;
    }
    Ok(total)
}

/// `λ₀ = max(floor, l_min)`, the shift of the spectral preconditioner.
pub fn preconditioner_shift(p: &ProblemSpec, precond_floor: f64) -> Result<f64> {
    let lambda = precond_floor.max(p.sampled_field().l_min());
    if lambda.is_finite() && lambda > 0.0 {
        Ok(lambda)
    } else {
        Err(Error::Preconditioner(lambda))
    }
}

/// Solves `(|w|^(2α) + λ₀) ĝ = ĥ` bin by bin. The zero mode and the Nyquist
/// bin, where the composed operator vanishes, get the symbol `λ₀`.
pub fn apply_preconditioner_inverse(h: &GridSignal, p: &ProblemSpec, lambda: f64) -> Result<GridSignal> {
    check_grid(h, p)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Preconditioner(lambda));
    }
    let nyquist = h.grid().points() / 2;
    let pow = 2.0 * p.alpha().value();
    Ok(fracops::apply_bins(h, |j, w| {
        let symbol = if j == 0 || j == nyquist {
            lambda
        } else {
            w.abs().powf(pow) + lambda
        };
        Complex64::new(1.0 / symbol, 0.0)
    }))
}

/// The preconditioned gradient `P⁻¹ (A u + L u - ∇W + f)`.
pub fn riesz_gradient(u: &GridSignal, p: &ProblemSpec, precond_floor: f64) -> Result<GridSignal> {
    let lambda = preconditioner_shift(p, precond_floor)?;
    apply_preconditioner_inverse(&l2_gradient(u, p)?, p, lambda)
}

/// `-A u - L u + ∇W(t, u) - f`; vanishes at a solution.
pub fn strong_residual(u: &GridSignal, p: &ProblemSpec) -> Result<GridSignal> {
    Ok(l2_gradient(u, p)?.scaled(-1.0))
}

/// Everything the solvers need at one point: the action, `||u||_X²`, the
/// `L²` gradient `G` and its preconditioned form `g = P⁻¹ G`.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub u: GridSignal,
    pub action: f64,
    pub x_norm_sq: f64,
    pub l2_grad: GridSignal,
    pub riesz: GridSignal,
}

impl Evaluation {
    pub fn new(u: GridSignal, p: &ProblemSpec, lambda: f64) -> Result<Self> {
        check_grid(&u, p)?;
        let qu = quadratic_operator(&u, p)?;
        let x_norm_sq = qu.dot_l2(&u)?;
        let action = 0.5 * x_norm_sq - potential_integral(&u, p) + p.forcing().dot_l2(&u)?;
        let l2_grad = qu
            .sub(&potential_gradient(&u, p)?)?
            .add_scaled(1.0, p.forcing())?;
        let riesz = apply_preconditioner_inverse(&l2_grad, p, lambda)?;
        Ok(Evaluation {
            u,
            action,
            x_norm_sq,
            l2_grad,
            riesz,
        })
    }

    pub fn x_norm(&self) -> f64 {
        self.x_norm_sq.max(0.0).sqrt()
    }

    /// `⟨g, g⟩_P = ⟨G, g⟩_{L²}`.
    pub fn riesz_p_norm_sq(&self) -> f64 {
        self.l2_grad
            .dot_l2(&self.riesz)
            .expect("gradients share a grid")
    }

    pub fn report(&self, p: &ProblemSpec) -> Result<EnergyReport> {
        Ok(EnergyReport {
            action_value: self.action,
            x_alpha_norm: self.x_norm(),
            gradient_x_norm: x_norm(&self.riesz, p)?,
            strong_residual_l2: self.l2_grad.l2_norm(),
        })
    }
}

/// `⟨u, v⟩_P = (dt/N) sum_j (|w_j|^(2α) + λ₀) Re(U_j conj(V_j))`, with the
/// same bin convention as [`apply_preconditioner_inverse`].
pub fn preconditioner_inner(u: &GridSignal, v: &GridSignal, p: &ProblemSpec, lambda: f64) -> Result<f64> {
    check_grid(u, p)?;
    check_grid(v, p)?;
    let grid = *u.grid();
    let nyquist = grid.points() / 2;
    let pow = 2.0 * p.alpha().value();
    let weights: Vec<f64> = (0..grid.points())
        .map(|j| {
            if j == 0 || j == nyquist {
                lambda
            } else {
                grid.frequency(j).abs().powf(pow) + lambda
            }
        })
        .collect();
    let su = fracops::spectra(u);
    let sv = fracops::spectra(v);
    let total: f64 = su
        .iter()
        .zip(&sv)
        .map(|(a, b)| {
            a.iter()
                .zip(b)
                .zip(&weights)
                .map(|((x, y), w)| w * (x * y.conj()).re)
                .sum::<f64>()
        })
        .sum();
    Ok(total * grid.dt() / grid.points() as f64)
}

pub fn energy_report(u: &GridSignal, p: &ProblemSpec, precond_floor: f64) -> Result<EnergyReport> {
    let lambda = preconditioner_shift(p, precond_floor)?;
    Evaluation::new(u.clone(), p, lambda)?.report(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::FracOrder;
    use crate::grid::Grid;
    use crate::problem::{constant_homogeneous_potential, MatrixField};
    use crate::spaces::{x_alpha_norm, SampledField};

    fn spec(amplitude: f64, field: MatrixField) -> ProblemSpec {
        let grid = Grid::new(10.0, 128, 2).unwrap();
        ProblemSpec::unforced(
            FracOrder::new(0.75).unwrap(),
            field,
            constant_homogeneous_potential(amplitude, 4.0).unwrap(),
            grid,
        )
        .unwrap()
    }

    fn bump(g: Grid) -> GridSignal {
        GridSignal::from_fn(g, |t, o| {
            o[0] = (-t * t).exp();
            o[1] = 0.5 * t * (-0.5 * t * t).exp();
        })
        .unwrap()
    }

    #[test]
    fn zero_is_critical_with_zero_action() {
        let p = spec(1.0, MatrixField::quadratic(2, 1.0, 1.0));
        let z = GridSignal::zeros(*p.grid());
        assert_eq!(action(&z, &p).unwrap(), 0.0);
        assert!(riesz_gradient(&z, &p, 1e-3).unwrap().is_zero());
        assert!(strong_residual(&z, &p).unwrap().is_zero());
    }

    #[test]
    fn spectral_norm_matches_time_domain_inner_product() {
        let p = spec(1.0, MatrixField::quadratic(2, 1.0, 1.0));
        let u = bump(*p.grid());
        let sampled = SampledField::sample(p.field(), p.grid()).unwrap();
        let a = x_alpha_norm(&u, &sampled, p.alpha()).unwrap();
        let b = x_norm(&u, &p).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn preconditioner_inverts_quadratic_part() {
        let lambda = 2.5;
        let grid = Grid::new(10.0, 128, 2).unwrap();
        let p = ProblemSpec::unforced(
            FracOrder::new(0.75).unwrap(),
            MatrixField::scaled_identity(2, lambda),
            crate::problem::Potential::new(|_, _| 0.0, |_, _, g| g.fill(0.0), |_| 0.0, 4.0).unwrap(),
            grid,
        )
        .unwrap();
        let u = bump(grid);
        let g = riesz_gradient(&u, &p, 1e-3).unwrap();
        let diff = g.sub(&u).unwrap().max_abs();
        assert!(diff < 1e-13, "{diff}");
    }

    #[test]
    fn self_pairing_matches_derivative() {
        let p = spec(1.0, MatrixField::quadratic(2, 1.0, 1.0));
        let u = bump(*p.grid());
        let a = self_pairing(&u, &p).unwrap();
        let b = directional_derivative(&u, &u, &p).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn preconditioner_inner_is_dual_to_inverse() {
        let p = spec(1.0, MatrixField::quadratic(2, 1.0, 1.0));
        let u = bump(*p.grid());
        let v = GridSignal::from_fn(*p.grid(), |t, o| {
            o[0] = (t / 3.0).sin() * (-0.2 * t * t).exp();
            o[1] = 1.0 / (1.0 + t * t);
        })
        .unwrap();
        let lambda = 1.7;
        let pv = apply_preconditioner_inverse(&v, &p, lambda).unwrap();
        let a = preconditioner_inner(&u, &pv, &p, lambda).unwrap();
        let b = u.dot_l2(&v).unwrap();
        assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn evaluation_agrees_with_free_functions() {
        let p = spec(0.3, MatrixField::quadratic(2, 1.0, 1.0));
        let u = bump(*p.grid());
        let e = Evaluation::new(u.clone(), &p, 1.0).unwrap();
        assert!((e.action - action(&u, &p).unwrap()).abs() < 1e-13);
        let r = energy_report(&u, &p, 1.0).unwrap();
        assert_eq!(r, e.report(&p).unwrap());
        let g = riesz_gradient(&u, &p, 1.0).unwrap();
        assert!(g.sub(&e.riesz).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn action_difference_is_exact_for_quartic() {
        let p = spec(0.7, MatrixField::quadratic(2, 1.0, 1.0));
        let u = bump(*p.grid());
        let v = u.scaled(1.3).add_scaled(0.2, &u.reflected()).unwrap();
        let direct = action(&v, &p).unwrap() - action(&u, &p).unwrap();
        let quad = action_difference(&u, &v, &p).unwrap();
        assert!((direct - quad).abs() < 1e-12 * direct.abs().max(1.0), "{direct} {quad}");
    }

    #[test]
    fn bad_shift_rejected() {
        let p = spec(1.0, MatrixField::quadratic(2, 1.0, 1.0));
        let u = bump(*p.grid());
        assert!(matches!(
            apply_preconditioner_inverse(&u, &p, 0.0),
            Err(Error::Preconditioner(_))
        ));
    }
}
