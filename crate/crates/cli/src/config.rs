//! Run configuration in TOML: dotted sections `problem`, `matrix`,
//! `potential`, `forcing`, `solver`, `output`, and a top-level `seed`.
//!
//! ```toml
//! seed = 42
//!
//! [problem]
//! alpha = 0.75
//! n = 2
//! T = 20.0
//! N = 512
//!
//! [matrix]
//! kind = "quadratic"   # L(t) = (c0 + c1 t²) Id
//! c0 = 1.0
//! c1 = 1.0
//!
//! [potential]
//! kind = "homogeneous" # W(t, x) = amplitude |x|^mu
//! amplitude = 0.1
//! mu = 4.0
//!
//! [forcing]
//! kind = "gaussian"    # f = eps exp(-((t - center)/width)²) direction
//! budget_fraction = 0.5
//! direction = [1.0, 0.0]
//! ```

use std::path::{Path, PathBuf};

use fracpass::energy::{potential_gradient, quadratic_operator};
use fracpass::problem::{
    builtin_homogeneous_potential, constant_homogeneous_potential, constants_report, MatrixField, Potential,
    ProblemSpec, DEFAULT_SAMPLE_BUDGET,
};
use fracpass::solver::SolverConfig;
use fracpass::{FracOrder, Grid, GridSignal};
use serde::Deserialize;

use crate::csvio;
use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub problem: ProblemSection,
    pub matrix: MatrixSection,
    pub potential: PotentialSection,
    #[serde(default)]
    pub forcing: ForcingSection,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputSection,
    /// The file the config was read from.
    #[serde(skip)]
    pub source: PathBuf,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub alpha: f64,
    pub n: usize,
    #[serde(rename = "T")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(default)]
    pub zero_mode_correction: bool,
    pub c_alpha_override: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSection {
    Identity,
    ScaledIdentity {
        scale: f64,
    },
    /// `(c0 + c1 t²) Id`.
    Quadratic {
        #[serde(default = "one")]
        c0: f64,
        #[serde(default = "one")]
        c1: f64,
    },
    Diagonal {
        entries: Vec<f64>,
    },
    /// `(c0 + c1 t²) Id` plus `kappa` on every off-diagonal entry.
    Coupled {
        #[serde(default = "one")]
        c0: f64,
        #[serde(default = "one")]
        c1: f64,
        kappa: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSection {
    /// `amplitude |x|^mu`.
    Homogeneous { amplitude: f64, mu: f64 },
    /// `amplitude (1 + depth sin²(t)) |x|^mu`.
    Modulated { amplitude: f64, depth: f64, mu: f64 },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSection {
    #[default]
    Zero,
    /// `eps exp(-((t - center)/width)²) direction/|direction|`, where `eps` is
    /// `amplitude` or `budget_fraction` of the admissible forcing norm.
    Gaussian {
        amplitude: Option<f64>,
        budget_fraction: Option<f64>,
        direction: Option<Vec<f64>>,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// The forcing that makes `u* = amplitude exp(-(t/width)²) direction/|direction|`
    /// an exact solution.
    Manufactured {
        amplitude: f64,
        direction: Option<Vec<f64>>,
        #[serde(default = "one")]
        width: f64,
    },
    /// Samples in the profile CSV format.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    #[serde(default)]
    pub trace: bool,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_out(),
            trace: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|message| CliError::Config {
            path: path.to_path_buf(),
            message,
        })?;
        cfg.source = path.to_path_buf();
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Parses TOML text; errors carry line, column and key context.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
        cfg.set_seed(seed);
        Ok(cfg)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        self.solver.seed = seed;
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn config_error(&self, message: impl Into<String>) -> CliError {
        CliError::Config {
            path: self.source.clone(),
            message: message.into(),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        let p = &self.problem;
        Ok(Grid::new(p.half_width, p.points, p.n)?)
    }

    fn matrix_field(&self) -> Result<MatrixField> {
        let n = self.problem.n;
        Ok(match &self.matrix {
            MatrixSection::Identity => MatrixField::scaled_identity(n, 1.0),
            MatrixSection::ScaledIdentity { scale } => MatrixField::scaled_identity(n, *scale),
            MatrixSection::Quadratic { c0, c1 } => MatrixField::quadratic(n, *c0, *c1),
            MatrixSection::Diagonal { entries } => {
                if entries.len() != n {
                    return Err(self.config_error(format!(
                        "matrix.entries has {} values, problem.n = {n}",
                        entries.len()
                    )));
                }
                MatrixField::diagonal(entries.clone())
            }
            MatrixSection::Coupled { c0, c1, kappa } => MatrixField::coupled(n, *c0, *c1, *kappa),
        })
    }

    fn potential(&self) -> Result<Potential> {
        Ok(match self.potential {
            PotentialSection::Homogeneous { amplitude, mu } => constant_homogeneous_potential(amplitude, mu)?,
            PotentialSection::Modulated { amplitude, depth, mu } => {
                if !(depth >= 0.0) {
                    return Err(self.config_error(format!("potential.depth must be nonnegative, got {depth}")));
                }
                builtin_homogeneous_potential(
                    move |t| amplitude * (1.0 + depth * t.sin().powi(2)),
                    (amplitude, amplitude * (1.0 + depth)),
                    mu,
                )?
            }
        })
    }

    fn unit_direction(&self, direction: &Option<Vec<f64>>) -> Result<Vec<f64>> {
        let n = self.problem.n;
        let d = match direction {
            Some(d) => d.clone(),
            None => {
                let mut e = vec![0.0; n];
                e[0] = 1.0;
                e
            }
        };
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if d.len() != n || !(norm > 0.0 && norm.is_finite()) {
            return Err(self.config_error(format!(
                "forcing.direction must be a nonzero vector of length {n}, got {d:?}"
            )));
        }
        Ok(d.iter().map(|v| v / norm).collect())
    }

    /// The manufactured exact solution, when the forcing section asks for one.
    pub fn manufactured_solution(&self) -> Result<Option<GridSignal>> {
        match &self.forcing {
            ForcingSection::Manufactured {
                amplitude,
                direction,
                width,
            } => {
                let d = self.unit_direction(direction)?;
                let (a, w) = (*amplitude, *width);
                Ok(Some(GridSignal::from_profile(self.grid()?, &d, move |t| {
                    a * (-(t / w).powi(2)).exp()
                })?))
            }
            _ => Ok(None),
        }
    }

    pub fn build_problem(&self) -> Result<ProblemSpec> {
        let grid = self.grid()?;
        let alpha = FracOrder::new(self.problem.alpha)?;
        let mut base = ProblemSpec::unforced(alpha, self.matrix_field()?, self.potential()?, grid)?
            .with_zero_mode_correction(self.problem.zero_mode_correction);
        if let Some(c) = self.problem.c_alpha_override {
            base = base.with_c_alpha(c)?;
        }
        let forcing = match &self.forcing {
            ForcingSection::Zero => return Ok(base),
            ForcingSection::Gaussian {
                amplitude,
                budget_fraction,
                direction,
                width,
                center,
            } => {
                let d = self.unit_direction(direction)?;
                let (w, c) = (*width, *center);
                let shape = GridSignal::from_profile(grid, &d, move |t| (-((t - c) / w).powi(2)).exp())?;
                let eps = match (amplitude, budget_fraction) {
                    (Some(a), None) => *a,
                    (None, Some(frac)) => {
                        let report = constants_report(&base, DEFAULT_SAMPLE_BUDGET, self.seed())?;
                        let budget = report.forcing_budget();
                        if !(budget > 0.0) {
                            return Err(fracpass::Error::hypothesis(
                                fracpass::error::tag::WF,
                                format!(
                                    "forcing budget 1/(2 C_alpha² C_e²) - M = {budget:e} is not positive, \
                                     so forcing.budget_fraction has no admissible meaning"
                                ),
                            )
                            .into());
                        }
                        frac * budget / shape.l2_norm()
                    }
                    _ => {
                        return Err(self.config_error(
                            "forcing.gaussian needs exactly one of amplitude and budget_fraction",
                        ))
                    }
                };
                shape.scaled(eps)
            }
            ForcingSection::Manufactured { .. } => {
                let star = self.manufactured_solution()?.expect("manufactured forcing");
                potential_gradient(&star, &base)?.sub(&quadratic_operator(&star, &base)?)?
            }
            ForcingSection::File { path } => csvio::read_signal(&self.base_dir.join(path), &grid)?,
        };
        Ok(base.with_forcing(forcing)?)
    }
}
