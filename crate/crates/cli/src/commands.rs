use std::path::Path;

use fracpass::energy::{energy_report, EnergyReport};
use fracpass::problem::{audit_hypotheses, constants_report, ConstantsReport, DEFAULT_SAMPLE_BUDGET};
use fracpass::solver::{solve_two, PairDiagnostics, SolutionPair};
use fracpass::Error as CoreError;
use serde::Serialize;
use serde_json::json;

use crate::config::{ForcingSection, RunConfig};
use crate::csvio::{write_signal, write_trace};
use crate::error::{CliError, Result};

pub const SUMMARY_FILE: &str = "summary.json";
pub const EKELAND_FILE: &str = "u_ekeland.csv";
pub const MOUNTAIN_FILE: &str = "u_mountain.csv";
pub const EKELAND_TRACE_FILE: &str = "trace_ekeland.csv";
pub const MOUNTAIN_TRACE_FILE: &str = "trace_mp.csv";

pub fn cmd_constants(cfg: &RunConfig) -> Result<ConstantsReport> {
    let p = cfg.build_problem()?;
    Ok(constants_report(&p, DEFAULT_SAMPLE_BUDGET, cfg.seed())?)
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub report: serde_json::Value,
    pub ready: bool,
    pub failed: Vec<String>,
}

/// Audits the configured problem. A spec that cannot even be built because
/// it violates a hypothesis is reported as not ready with that tag.
pub fn cmd_check(cfg: &RunConfig) -> Result<CheckOutcome> {
    let p = match cfg.build_problem() {
        Ok(p) => p,
        Err(e) if !e.hypothesis_tags().is_empty() => {
            let failed = e.hypothesis_tags();
            // when only the forcing is at fault, the remaining hypotheses can still be audited
            let mut unforced = cfg.clone();
            unforced.forcing = ForcingSection::Zero;
            let unforced_audit = unforced
                .build_problem()
                .ok()
                .map(|p| audit_hypotheses(&p, DEFAULT_SAMPLE_BUDGET, cfg.seed()));
            return Ok(CheckOutcome {
                report: json!({
                    "solver_ready": false,
                    "failed": failed,
                    "error": e.to_string(),
                    "unforced_audit": unforced_audit,
                }),
                ready: false,
                failed,
            });
        }
        Err(e) => return Err(e),
    };
    let audit = audit_hypotheses(&p, DEFAULT_SAMPLE_BUDGET, cfg.seed());
    Ok(CheckOutcome {
        report: serde_json::to_value(&audit).expect("audit report serializes"),
        ready: audit.solver_ready,
        failed: audit.failed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemEcho {
    pub alpha: f64,
    pub n: usize,
    #[serde(rename = "T")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub zero_mode_correction: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    /// `"ok"` or `"FAILED"`.
    pub status: String,
    pub error: Option<String>,
    pub problem: ProblemEcho,
    pub constants: Option<ConstantsReport>,
    pub c1: Option<f64>,
    pub c: Option<f64>,
    pub distinct: Option<bool>,
    pub separation: Option<f64>,
    pub report_ekeland: Option<EnergyReport>,
    pub report_mountain: Option<EnergyReport>,
    pub iterations_ekeland: Option<usize>,
    pub iterations_mountain: Option<usize>,
    pub diagnostics: Option<PairDiagnostics>,
}

impl SolveSummary {
    fn failed(cfg: &RunConfig, constants: Option<ConstantsReport>, error: &CliError) -> Self {
        SolveSummary {
            status: "FAILED".into(),
            error: Some(error.to_string()),
            problem: echo(cfg),
            constants,
            c1: None,
            c: None,
            distinct: None,
            separation: None,
            report_ekeland: None,
            report_mountain: None,
            iterations_ekeland: None,
            iterations_mountain: None,
            diagnostics: None,
        }
    }

    fn from_pair(cfg: &RunConfig, pair: &SolutionPair) -> Self {
        SolveSummary {
            status: "ok".into(),
            error: None,
            problem: echo(cfg),
            constants: Some(pair.constants),
            c1: Some(pair.c1),
            c: Some(pair.c),
            distinct: Some(pair.distinct),
            separation: Some(pair.separation),
            report_ekeland: Some(pair.report_ekeland),
            report_mountain: Some(pair.report_mountain),
            iterations_ekeland: pair.trace_ekeland.last().map(|r| r.iteration),
            iterations_mountain: pair.trace_mountain.last().map(|r| r.iteration),
            diagnostics: Some(pair.diagnostics.clone()),
        }
    }
}

fn echo(cfg: &RunConfig) -> ProblemEcho {
    ProblemEcho {
        alpha: cfg.problem.alpha,
        n: cfg.problem.n,
        half_width: cfg.problem.half_width,
        points: cfg.problem.points,
        zero_mode_correction: cfg.problem.zero_mode_correction,
        seed: cfg.seed(),
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Runs both solver branches and writes the artifacts to `out_dir`. On
/// failure a summary with status `FAILED` is still written, together with the
/// best iterate of a branch that stalled, and the error is returned.
pub fn cmd_solve(cfg: &RunConfig, out_dir: &Path, trace: bool) -> Result<SolveSummary> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let summary_path = out_dir.join(SUMMARY_FILE);

    let outcome = (|| -> std::result::Result<SolutionPair, (CliError, Option<ConstantsReport>)> {
        let p = cfg.build_problem().map_err(|e| (e, None))?;
        let audit = audit_hypotheses(&p, DEFAULT_SAMPLE_BUDGET, cfg.seed());
        if !audit.solver_ready {
            return Err((CliError::NotReady(audit.failed), audit.constants));
        }
        solve_two(&p, &cfg.solver).map_err(|e| (e.into(), audit.constants))
    })();

    match outcome {
        Ok(pair) => {
            write_signal(&out_dir.join(EKELAND_FILE), &pair.u_ekeland)?;
            write_signal(&out_dir.join(MOUNTAIN_FILE), &pair.u_mountain)?;
            if trace {
                write_trace(&out_dir.join(EKELAND_TRACE_FILE), &pair.trace_ekeland)?;
                write_trace(&out_dir.join(MOUNTAIN_TRACE_FILE), &pair.trace_mountain)?;
            }
            let summary = SolveSummary::from_pair(cfg, &pair);
            write_json(&summary_path, &summary)?;
            Ok(summary)
        }
        Err((err, constants)) => {
            if let CliError::Core(CoreError::NonConvergence(stalled)) = &err {
                let file = if stalled.branch == "ekeland" { EKELAND_FILE } else { MOUNTAIN_FILE };
                write_signal(&out_dir.join(file), &stalled.best)?;
            }
            write_json(&summary_path, &SolveSummary::failed(cfg, constants, &err))?;
            Err(err)
        }
    }
}

/// Energy, gradient and strong residual of an externally supplied profile.
pub fn cmd_residual(cfg: &RunConfig, solution: &Path) -> Result<EnergyReport> {
    let p = cfg.build_problem()?;
    let u = crate::csvio::read_signal(solution, p.grid())?;
    Ok(energy_report(&u, &p, cfg.solver.precond_floor)?)
}
