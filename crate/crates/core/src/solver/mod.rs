//! Critical-point finders: projected descent in the ball `||u||_X <= ρ`
//! (local minimizer, value `c1 <= 0`) and a path-deformation mountain-pass
//! search (value `c >= β`), plus the pair assembly with its certificates.

mod ekeland;
mod mountain;
mod scalar;

use serde::{Deserialize, Serialize};

use crate::energy::{energy_report, x_norm, EnergyReport};
use crate::error::{Error, Result, Stalled};
use crate::grid::GridSignal;
use crate::problem::{constants_report, ConstantsReport, ProblemSpec, DEFAULT_SAMPLE_BUDGET};

pub use ekeland::{ekeland_minimize, ekeland_minimize_in_ball};
pub use mountain::{build_endpoint, mountain_pass, plateau_bump, MountainPassOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub grad_tol: f64,
    pub resid_tol: f64,
    pub max_iters: usize,
    pub path_points: usize,
    pub armijo_c: f64,
    pub step_shrink: f64,
    pub distinct_tol: f64,
    /// Lower bound for the preconditioner shift `λ₀ = max(floor, l_min)`.
    pub precond_floor: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grad_tol: 1e-6,
            resid_tol: 1e-4,
            max_iters: 20_000,
            path_points: 64,
            armijo_c: 1e-4,
            step_shrink: 0.5,
            distinct_tol: 1e-3,
            precond_floor: 1e-3,
            seed: 42,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grad_tol", self.grad_tol),
            ("resid_tol", self.resid_tol),
            ("distinct_tol", self.distinct_tol),
            ("precond_floor", self.precond_floor),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("armijo_c", self.armijo_c), ("step_shrink", self.step_shrink)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidInput(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be positive".into()));
        }
        if self.path_points < 8 {
            return Err(Error::InvalidInput(format!(
                "path_points must be at least 8, got {}",
                self.path_points
            )));
        }
        Ok(())
    }
}

/// One line of an iteration log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub action: f64,
    pub gradient_x_norm: f64,
    pub x_norm: f64,
}

/// Output of one solver branch.
#[derive(Debug, Clone)]
pub struct BranchOutcome {
    pub u: GridSignal,
    pub report: EnergyReport,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    /// Largest pairwise `X^α` distance among the last recorded iterates.
    pub tail_spread: f64,
}

/// Finite-dimensional shadows of the compactness and boundedness arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchDiagnostics {
    pub tail_spread: f64,
    /// `10 grad_tol ρ`.
    pub tail_spread_bound: f64,
    pub tail_cauchy: bool,
    /// `(½ - 1/μ) ||u||² - C_e (1 - 1/μ) ||f|| ||u||`.
    pub a_priori_lower_bound: f64,
    pub a_priori_holds: bool,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairDiagnostics {
    pub ekeland: BranchDiagnostics,
    pub mountain: BranchDiagnostics,
    /// `c1 <= 0 < β <= c`.
    pub energy_ordering: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SolutionPair {
    pub u_ekeland: GridSignal,
    pub u_mountain: GridSignal,
    pub report_ekeland: EnergyReport,
    pub report_mountain: EnergyReport,
    pub c1: f64,
    pub c: f64,
    pub distinct: bool,
    pub separation: f64,
    pub constants: ConstantsReport,
    pub endpoint: GridSignal,
    pub trace_ekeland: Vec<TraceRow>,
    pub trace_mountain: Vec<TraceRow>,
    pub diagnostics: PairDiagnostics,
}

/// Constants for the solver gates, sampled with the configured seed.
pub fn solver_constants(p: &ProblemSpec, cfg: &SolverConfig) -> Result<ConstantsReport> {
    constants_report(p, DEFAULT_SAMPLE_BUDGET, cfg.seed)
}

pub(crate) fn require_admissible(c: &ConstantsReport) -> Result<()> {
    if c.beta > 0.0 && c.admissible {
        Ok(())
    } else {
        Err(Error::Inadmissible { beta: c.beta })
    }
}

pub(crate) fn stalled(
    branch: &'static str,
    iterations: usize,
    action: f64,
    gradient_x_norm: f64,
    best: GridSignal,
    reason: impl Into<String>,
) -> Error {
    Error::NonConvergence(Box::new(Stalled {
        branch,
        iterations,
        action,
        gradient_x_norm,
        best,
        reason: reason.into(),
    }))
}

/// Keeps the last few iterates to measure how tightly they cluster.
pub(crate) struct TailWindow {
    items: std::collections::VecDeque<GridSignal>,
    cap: usize,
}

impl TailWindow {
    pub(crate) fn new(cap: usize) -> Self {
        TailWindow {
            items: std::collections::VecDeque::with_capacity(cap),
            cap,
        }
    }

    pub(crate) fn push(&mut self, u: &GridSignal) {
        if self.items.len() == self.cap {
            self.items.pop_front();
        }
        self.items.push_back(u.clone());
    }

    pub(crate) fn spread(&self, p: &ProblemSpec) -> Result<f64> {
        let mut worst = 0.0f64;
        for (i, a) in self.items.iter().enumerate() {
            for b in self.items.iter().skip(i + 1) {
                worst = worst.max(x_norm(&a.sub(b)?, p)?);
            }
        }
        Ok(worst)
    }
}

fn branch_diagnostics(
    out: &BranchOutcome,
    c: &ConstantsReport,
    cfg: &SolverConfig,
    p: &ProblemSpec,
) -> Result<BranchDiagnostics> {
    let mu = c.mu;
    let norm = out.report.x_alpha_norm;
    let bound = (0.5 - 1.0 / mu) * norm * norm - c.c_e * (1.0 - 1.0 / mu) * c.f_l2_norm * norm;
    // the bound follows from I(u) - I'(u)u / μ, so allow for the leftover pairing
    let slack = crate::energy::self_pairing(&out.u, p)?.abs() / mu + 1e-12 * out.report.action_value.abs().max(1.0);
    let tail_spread_bound = 10.0 * cfg.grad_tol * c.rho;
    Ok(BranchDiagnostics {
        tail_spread: out.tail_spread,
        tail_spread_bound,
        tail_cauchy: out.tail_spread <= tail_spread_bound,
        a_priori_lower_bound: bound,
        a_priori_holds: out.report.action_value >= bound - slack,
        certified: out.report.gradient_x_norm <= cfg.grad_tol && out.report.strong_residual_l2 <= cfg.resid_tol,
    })
}

/// Runs both branches and certifies the pair. Refuses inadmissible forcing.
pub fn solve_two(p: &ProblemSpec, cfg: &SolverConfig) -> Result<SolutionPair> {
    cfg.validate()?;
    let constants = solver_constants(p, cfg)?;
    require_admissible(&constants)?;

    log::info!("rho = {:.6}, beta = {:.6}", constants.rho, constants.beta);
    let eke = ekeland_minimize(p, cfg)?;
    log::info!("ekeland: {} iterations", eke.trace.last().map_or(0, |r| r.iteration));
    let endpoint = build_endpoint(p, cfg)?;
    let mp = mountain_pass(p, &endpoint, cfg)?;
    log::info!("mountain pass: {} iterations", mp.branch.trace.last().map_or(0, |r| r.iteration));

    let report_ekeland = energy_report(&eke.u, p, cfg.precond_floor)?;
    let report_mountain = energy_report(&mp.branch.u, p, cfg.precond_floor)?;
    let separation = x_norm(&eke.u.sub(&mp.branch.u)?, p)?;
    let distinct = separation > cfg.distinct_tol;
    let c1 = report_ekeland.action_value;
    let c = report_mountain.action_value;

    let ekeland_diag = branch_diagnostics(&eke, &constants, cfg, p)?;
    let mountain_diag = branch_diagnostics(&mp.branch, &constants, cfg, p)?;
    let mut warnings = Vec::new();
    if !distinct && !p.forcing().is_zero() {
        warnings.push(format!(
            "critical points coincide within {:e} (separation {separation:e}) although f is nonzero",
            cfg.distinct_tol
        ));
    }
    if p.forcing().is_zero() && report_ekeland.x_alpha_norm <= cfg.distinct_tol {
        warnings.push("minimizer in the ball is the trivial solution u = 0".into());
    }
    for (name, d) in [("ekeland", &ekeland_diag), ("mountain-pass", &mountain_diag)] {
        if !d.certified {
            warnings.push(format!("{name} point not certified by gradient and residual tolerances"));
        }
        if !d.tail_cauchy {
            warnings.push(format!(
                "{name} iterates not Cauchy: spread {:e} > {:e}",
                d.tail_spread, d.tail_spread_bound
            ));
        }
        if !d.a_priori_holds {
            warnings.push(format!("{name} point violates the a-priori lower bound"));
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let energy_ordering = c1 <= 0.0 && constants.beta > 0.0 && constants.beta <= c;
    Ok(SolutionPair {
        u_ekeland: eke.u,
        u_mountain: mp.branch.u,
        report_ekeland,
        report_mountain,
        c1,
        c,
        distinct,
        separation,
        constants,
        endpoint,
        trace_ekeland: eke.trace,
        trace_mountain: mp.branch.trace,
        diagnostics: PairDiagnostics {
            ekeland: ekeland_diag,
            mountain: mountain_diag,
            energy_ordering,
            warnings,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = [
            SolverConfig { grad_tol: 0.0, ..Default::default() },
            SolverConfig { armijo_c: 1.0, ..Default::default() },
            SolverConfig { step_shrink: 0.0, ..Default::default() },
            SolverConfig { path_points: 7, ..Default::default() },
            SolverConfig { max_iters: 0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::InvalidInput(_))), "{cfg:?}");
        }
    }
}
