use crate::energy::{action, action_and_gradient, action_difference, preconditioner_inner, preconditioner_shift, x_norm, Evaluation};
use crate::error::{tag, Error, Result};
use crate::grid::{Grid, GridSignal};
use crate::problem::ProblemSpec;

use super::scalar::illinois;
use super::{require_admissible, solver_constants, stalled, BranchOutcome, SolverConfig, TailWindow, TraceRow};

const BRANCH: &str = "mountain-pass";
const TIE_TOL: f64 = 1e-12;
const STALL_WINDOW: usize = 50;
const PHASE_A_CAP: usize = 2000;

/// `exp(-1/x)` blended into a `C^∞` step from 0 (at `x <= 0`) to 1 (at `x >= 1`).
fn smooth_step(x: f64) -> f64 {
    let psi = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        psi(x) / (psi(x) + psi(1.0 - x))
    }
}

/// Smooth bump along `direction` with `|u(t)| = |direction|` on `[0, 1]`,
/// rising on `[-1, 0]`, falling on `[1, 2]`, zero elsewhere.
pub fn plateau_bump(grid: Grid, direction: &[f64]) -> Result<GridSignal> {
    GridSignal::from_profile(grid, direction, |t| smooth_step(t + 1.0) * smooth_step(2.0 - t))
}

/// Finds `e = σ u` on the ray through a unit plateau bump with `I(e) <= 0`
/// and `||e||_X > ρ`, doubling `σ` from 1. The bump points against the mean
/// of `f` (along `e₁` when that mean vanishes).
pub fn build_endpoint(p: &ProblemSpec, cfg: &SolverConfig) -> Result<GridSignal> {
    cfg.validate()?;
    let c = solver_constants(p, cfg)?;
    require_admissible(&c)?;
    let grid = *p.grid();
    let dt = grid.dt();
    let mean: Vec<f64> = (0..grid.dim()).map(|i| p.forcing().component(i).sum() * dt).collect();
    let size = mean.iter().map(|m| m * m).sum::<f64>().sqrt();
    let direction: Vec<f64> = if size > 0.0 {
        mean.iter().map(|m| -m / size).collect()
    } else {
        let mut e = vec![0.0; grid.dim()];
        e[0] = 1.0;
        e
    };
    let u = plateau_bump(grid, &direction)?;
    let mut sigma = 1.0f64;
    while sigma <= 2f64.powi(60) {
        let e = u.scaled(sigma);
        if action(&e, p)? <= 0.0 && x_norm(&e, p)? > c.rho {
            return Ok(e);
        }
        sigma *= 2.0;
    }
    Err(Error::hypothesis(
        tag::W1,
        "action stays positive along the ray up to sigma = 2^60; superquadratic growth fails in practice",
    ))
}

#[derive(Debug, Clone)]
pub struct MountainPassOutcome {
    pub branch: BranchOutcome,
    /// The deformed path at the end of the path phase; endpoints are `0` and `e`.
    pub path: Vec<GridSignal>,
    pub initial_path_max: f64,
    pub path_iterations: usize,
}

/// Path deformation from the segment `[0, e]`: Armijo steps on the highest
/// node with neighbour smoothing, then refinement of the highest node by
/// maximizing along its ray from the origin and descending across rays.
pub fn mountain_pass(p: &ProblemSpec, e: &GridSignal, cfg: &SolverConfig) -> Result<MountainPassOutcome> {
    cfg.validate()?;
    p.grid().ensure_same(e.grid())?;
    let c = solver_constants(p, cfg)?;
    require_admissible(&c)?;
    let e_value = action(e, p)?;
    let e_norm = x_norm(e, p)?;
    if !(e_value <= 0.0 && e_norm > c.rho) {
        return Err(Error::InvalidInput(format!(
            "endpoint needs I(e) <= 0 and |e|_X > rho = {}, got I(e) = {e_value}, |e|_X = {e_norm}",
            c.rho
        )));
    }
    let lambda = preconditioner_shift(p, cfg.precond_floor)?;
    let beta = c.beta;

    let m = cfg.path_points;
    let mut path: Vec<GridSignal> = (0..m)
        .map(|j| {
            if j == 0 {
                GridSignal::zeros(*p.grid())
            } else if j == m - 1 {
                e.clone()
            } else {
                e.scaled(j as f64 / (m - 1) as f64)
            }
        })
        .collect();
    let mut energies = path.iter().map(|u| action(u, p)).collect::<Result<Vec<_>>>()?;
    let initial_path_max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut trace = Vec::new();
    let mut it = 0usize;
    let mut step = 1.0f64;
    let mut best_max = f64::INFINITY;
    let mut since_improved = 0usize;
    let switch_tol = cfg.grad_tol.sqrt().max(cfg.grad_tol);
    let phase_a_cap = PHASE_A_CAP.min(cfg.max_iters / 4).max(1);

    let mut top = loop {
        let k = highest_node(&energies);
        let cur = Evaluation::new(path[k].clone(), p, lambda)?;
        let gnorm = x_norm(&cur.riesz, p)?;
        trace.push(TraceRow {
            iteration: it,
            action: cur.action,
            gradient_x_norm: gnorm,
            x_norm: cur.x_norm(),
        });
        if k == 0 || k == m - 1 || (cur.action < beta && gnorm > cfg.grad_tol) {
            return Err(Error::GeometryViolation {
                path_max: cur.action,
                beta,
                gradient: gnorm,
            });
        }
        if cur.action < best_max - 1e-10 * best_max.abs().max(1.0) {
            best_max = cur.action;
            since_improved = 0;
        } else {
            since_improved += 1;
        }
        if gnorm <= switch_tol || since_improved >= STALL_WINDOW || it >= phase_a_cap {
            break cur;
        }
        it += 1;

        let slope = cur.riesz_p_norm_sq();
        let mut s = (2.0 * step).min(1.0);
        let mut moved = None;
        for _ in 0..200 {
            let trial = cur.u.add_scaled(-s, &cur.riesz)?;
            let value = action(&trial, p)?;
            if value <= cur.action - cfg.armijo_c * s * slope {
                moved = Some((trial, value));
                break;
            }
            s *= cfg.step_shrink;
            if s < 1e-16 {
                break;
            }
        }
        let Some((node, value)) = moved else {
            break cur;
        };
        step = s;
        path[k] = node;
        energies[k] = value;
        for j in [k - 1, k + 1] {
            if j > 0 && j < m - 1 {
                let smoothed = path[j]
                    .scaled(0.5)
                    .add_scaled(0.25, &path[j - 1])?
                    .add_scaled(0.25, &path[j + 1])?;
                energies[j] = action(&smoothed, p)?;
                path[j] = smoothed;
            }
        }
    };
    let path_iterations = it;

    // Refinement: z is kept at the maximum of I along its ray from 0.
    let mut tail = TailWindow::new(10);
    let scale = top.x_norm();
    top = ray_max(&top.u, scale, p, lambda, cfg)?;
    let mut prev: Option<(Evaluation, GridSignal)> = None;
    let mut tau = 1.0f64;
    loop {
        let gnorm = x_norm(&top.riesz, p)?;
        it += 1;
        trace.push(TraceRow {
            iteration: it,
            action: top.action,
            gradient_x_norm: gnorm,
            x_norm: top.x_norm(),
        });
        tail.push(&top.u);
        if gnorm <= cfg.grad_tol {
            return Ok(MountainPassOutcome {
                branch: BranchOutcome {
                    report: top.report(p)?,
                    tail_spread: tail.spread(p)?,
                    u: top.u,
                    iterations: it,
                    trace,
                },
                path,
                initial_path_max,
                path_iterations,
            });
        }
        if top.action < beta {
            return Err(Error::GeometryViolation {
                path_max: top.action,
                beta,
                gradient: gnorm,
            });
        }
        if it >= cfg.max_iters {
            return Err(stalled(BRANCH, it, top.action, gnorm, top.u, "iteration limit reached"));
        }

        let radial = top.l2_grad.dot_l2(&top.u)? / preconditioner_inner(&top.u, &top.u, p, lambda)?;
        let g_t = top.riesz.add_scaled(-radial, &top.u)?;
        let slope = top.l2_grad.dot_l2(&g_t)?;
        if let Some((old, old_gt)) = &prev {
            let dz = top.u.sub(&old.u)?;
            let dg = g_t.sub(old_gt)?;
            let dg_l2 = top.l2_grad.sub(&old.l2_grad)?;
            let bb = dz.dot_l2(&dg_l2)? / dg.dot_l2(&dg_l2)?;
            if bb.is_finite() && bb > 0.0 {
                tau = bb.clamp(1e-6, 1e6);
            }
        }
        let mut t = tau;
        let mut accepted = None;
        for _ in 0..200 {
            let dir = top.u.add_scaled(-t, &g_t)?;
            let next = ray_max(&dir, top.x_norm(), p, lambda, cfg)?;
            if energy_drop(&top, &next, p)? >= cfg.armijo_c * t * slope {
                accepted = Some(next);
                break;
            }
            t *= cfg.step_shrink;
            if t < 1e-16 * tau.max(1.0) {
                break;
            }
        }
        match accepted {
            Some(next) => {
                tau = t;
                let old = std::mem::replace(&mut top, next);
                prev = Some((old, g_t));
            }
            None => {
                return Err(stalled(
                    BRANCH,
                    it,
                    top.action,
                    gnorm,
                    top.u,
                    "line search across rays found no decrease",
                ))
            }
        }
    }
}

/// `I(z) - I(z')`, switching to the quadrature form when the direct
/// difference is at the roundoff level of the actions.
fn energy_drop(cur: &Evaluation, next: &Evaluation, p: &ProblemSpec) -> Result<f64> {
    let direct = cur.action - next.action;
    if direct.abs() > 1e-8 * cur.action.abs().max(1.0) {
        Ok(direct)
    } else {
        Ok(-action_difference(&cur.u, &next.u, p)?)
    }
}

/// Lowest index among nodes within `TIE_TOL` of the largest energy.
fn highest_node(energies: &[f64]) -> usize {
    let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    energies
        .iter()
        .position(|&v| v >= max - TIE_TOL)
        .expect("path is nonempty")
}

/// Maximizes `s -> I(s v̂)` near `s = guess` for the `X`-unit vector `v̂`
/// along `dir`, solving `⟨G(s v̂), v̂⟩ = 0` on a bracket.
fn ray_max(dir: &GridSignal, guess: f64, p: &ProblemSpec, lambda: f64, cfg: &SolverConfig) -> Result<Evaluation> {
    let n = x_norm(dir, p)?;
    if !(n > 0.0) {
        return Err(Error::InvalidInput("ray direction vanishes".into()));
    }
    let v = dir.scaled(1.0 / n);
    let slope = |s: f64| -> Result<f64> { action_and_gradient(&v.scaled(s), p)?.1.dot_l2(&v) };
    let ftol = 1e-3 * cfg.grad_tol;

    let mut lo = 0.9 * guess;
    let mut f_lo = slope(lo)?;
    let mut tries = 0;
    while f_lo <= 0.0 {
        lo *= 0.7;
        f_lo = slope(lo)?;
        tries += 1;
        if tries > 80 {
            return Err(Error::InvalidInput("action has no interior maximum along the ray".into()));
        }
    }
    let mut hi = 1.1 * guess.max(lo);
    let mut f_hi = slope(hi)?;
    tries = 0;
    while f_hi >= 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 1.5;
        f_hi = slope(hi)?;
        tries += 1;
        if tries > 200 {
            return Err(Error::hypothesis(tag::W1, "action increases without bound along a ray"));
        }
    }
    let (s, _) = illinois(slope, lo, hi, f_lo, f_hi, ftol, 1e-15 * hi, 200)?;
    Evaluation::new(v.scaled(s), p, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_is_one_on_unit_interval_and_vanishes_outside() {
        let g = Grid::new(8.0, 256, 2).unwrap();
        let u = plateau_bump(g, &[0.6, -0.8]).unwrap();
        for k in 0..g.points() {
            let t = g.time(k);
            let r = u.row(k).dot(&u.row(k)).sqrt();
            if (0.0..=1.0).contains(&t) {
                assert!((r - 1.0).abs() < 1e-15);
            }
            if !(-1.0..=2.0).contains(&t) {
                assert_eq!(r, 0.0);
            }
        }
        assert_eq!(smooth_step(0.5), 0.5);
    }

    #[test]
    fn tie_break_prefers_lowest_index() {
        assert_eq!(highest_node(&[0.0, 1.0, 1.0 + 5e-13, 0.5]), 1);
        assert_eq!(highest_node(&[0.0, 1.0, 1.1, 0.5]), 2);
    }
}
