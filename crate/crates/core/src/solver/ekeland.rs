use crate::energy::{
    apply_preconditioner_inverse, preconditioner_inner, preconditioner_shift, x_norm, x_norm_squared, Evaluation,
};
use crate::error::Result;
use crate::grid::GridSignal;
use crate::problem::ProblemSpec;

use super::{require_admissible, solver_constants, stalled, BranchOutcome, SolverConfig, TailWindow, TraceRow};

const BRANCH: &str = "ekeland";
const BOUNDARY_TOL: f64 = 1e-9;

/// Minimizes the action over `||u||_X <= ρ` with `ρ` from the constants report.
pub fn ekeland_minimize(p: &ProblemSpec, cfg: &SolverConfig) -> Result<BranchOutcome> {
    cfg.validate()?;
    let c = solver_constants(p, cfg)?;
    require_admissible(&c)?;
    ekeland_minimize_in_ball(p, cfg, c.rho)
}

/// Projected preconditioned descent in the ball of radius `rho`: Barzilai–Borwein
/// trial steps, monotone Armijo backtracking along the projection arc, and
/// radial projection back onto the ball.
pub fn ekeland_minimize_in_ball(p: &ProblemSpec, cfg: &SolverConfig, rho: f64) -> Result<BranchOutcome> {
    cfg.validate()?;
    let lambda = preconditioner_shift(p, cfg.precond_floor)?;
    let u0 = start_point(p, cfg, rho, lambda)?;
    let mut cur = Evaluation::new(u0, p, lambda)?;
    let mut trace = Vec::new();
    let mut tail = TailWindow::new(10);
    let mut prev: Option<(Evaluation, GridSignal)> = None;
    let mut step = 1.0f64;

    for it in 0..=cfg.max_iters {
        let dir = search_direction(&cur, p, rho, lambda)?;
        let dnorm = x_norm(&dir, p)?;
        trace.push(TraceRow {
            iteration: it,
            action: cur.action,
            gradient_x_norm: dnorm,
            x_norm: cur.x_norm(),
        });
        tail.push(&cur.u);
        if dnorm <= cfg.grad_tol {
            return Ok(BranchOutcome {
                report: cur.report(p)?,
                tail_spread: tail.spread(p)?,
                u: cur.u,
                iterations: it,
                trace,
            });
        }
        if it == cfg.max_iters {
            break;
        }
        if let Some(bb) = prev
            .as_ref()
            .and_then(|(old, old_dir)| bb_step(&cur.u, &dir, &old.u, old_dir, p, lambda))
        {
            step = bb;
        }

        let mut accepted = None;
        let mut s = step;
        for _ in 0..200 {
            let trial = project(cur.u.add_scaled(-s, &dir)?, p, rho)?;
            let t_eval = Evaluation::new(trial, p, lambda)?;
            let moved = cur.u.sub(&t_eval.u)?;
            let predicted = cur.l2_grad.dot_l2(&moved)?;
            if t_eval.action <= cur.action - cfg.armijo_c * predicted && t_eval.action <= cur.action {
                accepted = Some(t_eval);
                break;
            }
            s *= cfg.step_shrink;
            if s < 1e-16 * step.max(1.0) {
                break;
            }
        }
        match accepted {
            Some(next) => {
                step = s;
                prev = Some((std::mem::replace(&mut cur, next), dir));
            }
            None => {
                return Err(stalled(
                    BRANCH,
                    it,
                    cur.action,
                    dnorm,
                    cur.u,
                    "line search found no decrease",
                ))
            }
        }
    }
    let last = trace.last().copied();
    Err(stalled(
        BRANCH,
        cfg.max_iters,
        cur.action,
        last.map_or(f64::NAN, |r| r.gradient_x_norm),
        cur.u,
        "iteration limit reached",
    ))
}

/// `u₀ = -s P⁻¹ f`, `s` from the quadratic model, clipped to the ball and
/// halved until the action drops below `I(0) = 0`.
fn start_point(p: &ProblemSpec, cfg: &SolverConfig, rho: f64, lambda: f64) -> Result<GridSignal> {
    let zero = GridSignal::zeros(*p.grid());
    if p.forcing().is_zero() {
        return Ok(zero);
    }
    let h = apply_preconditioner_inverse(p.forcing(), p, lambda)?;
    let fh = p.forcing().dot_l2(&h)?;
    let hh = x_norm_squared(&h, p)?;
    if !(fh > 0.0 && hh > 0.0) {
        return Ok(zero);
    }
    let mut s = (fh / hh).min(rho / hh.sqrt());
    for _ in 0..60 {
        let u = h.scaled(-s);
        if crate::energy::action(&u, p)? <= -cfg.armijo_c * s * fh {
            return Ok(u);
        }
        s *= cfg.step_shrink;
    }
    Ok(zero)
}

fn project(u: GridSignal, p: &ProblemSpec, rho: f64) -> Result<GridSignal> {
    let n = x_norm(&u, p)?;
    Ok(if n > rho { u.scaled(rho / n) } else { u })
}

/// The Riesz gradient, or on the sphere with an outward-pointing descent
/// direction its component tangent to the sphere in the preconditioner metric.
fn search_direction(cur: &Evaluation, p: &ProblemSpec, rho: f64, lambda: f64) -> Result<GridSignal> {
    let g = &cur.riesz;
    if cur.x_norm() < rho * (1.0 - BOUNDARY_TOL) {
        return Ok(g.clone());
    }
    let qu = crate::energy::quadratic_operator(&cur.u, p)?;
    let outward = -qu.dot_l2(g)?;
    if outward <= 0.0 {
        return Ok(g.clone());
    }
    let normal = apply_preconditioner_inverse(&qu, p, lambda)?;
    let gn = qu.dot_l2(g)?;
    let nn = qu.dot_l2(&normal)?;
    g.add_scaled(-gn / nn, &normal)
}

/// Second Barzilai–Borwein step `⟨Δu, Δd⟩_P / ⟨Δd, Δd⟩_P` from the change in
/// the search direction. In the interior `d` is the Riesz gradient; on the
/// sphere the tangential direction carries the curvature of the constraint.
fn bb_step(
    u: &GridSignal,
    dir: &GridSignal,
    old_u: &GridSignal,
    old_dir: &GridSignal,
    p: &ProblemSpec,
    lambda: f64,
) -> Option<f64> {
    let du = u.sub(old_u).ok()?;
    let dd = dir.sub(old_dir).ok()?;
    let num = preconditioner_inner(&du, &dd, p, lambda).ok()?;
    let den = preconditioner_inner(&dd, &dd, p, lambda).ok()?;
    let s = num / den;
    (s.is_finite() && s > 0.0).then(|| s.clamp(1e-6, 1e6))
}
