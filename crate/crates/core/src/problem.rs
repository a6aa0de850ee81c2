//! Problem data `(α, L, W, f)`, builtin families, and the numerical audit of
//! the structural hypotheses on `L` and `W` together with the admissibility
//! window for the forcing term.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{tag, Error, Result};
use crate::fracops::FracOrder;
use crate::grid::{Grid, GridSignal};
use crate::sampling::sphere_directions;
use crate::spaces::{embedding_constant_from_samples, sobolev_constant, SampledField};

type MatrixFn = dyn Fn(f64) -> DMatrix<f64> + Send + Sync;
type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A symmetric matrix field `L(t)` with its coercivity floor `l(t)`,
/// `(L(t) x, x) >= l(t) |x|^2`.
#[derive(Clone)]
pub struct MatrixField {
    dim: usize,
    eval: Arc<MatrixFn>,
    floor: Arc<ScalarFn>,
    diagonal: bool,
    label: String,
}

impl fmt::Debug for MatrixField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatrixField({}, n = {})", self.label, self.dim)
    }
}

impl MatrixField {
    pub fn new(
        dim: usize,
        eval: impl Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
        floor: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        MatrixField {
            dim,
            eval: Arc::new(eval),
            floor: Arc::new(floor),
            diagonal: false,
            label: "custom".into(),
        }
    }

    /// `L(t) = s Id`.
    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        MatrixField {
            dim,
            eval: Arc::new(move |_| DMatrix::identity(dim, dim) * s),
            floor: Arc::new(move |_| s),
            diagonal: true,
            label: format!("{s} Id"),
        }
    }

    /// `L(t) = (c0 + c1 t^2) Id`.
    pub fn quadratic(dim: usize, c0: f64, c1: f64) -> Self {
        let l = move |t: f64| c0 + c1 * t * t;
        MatrixField {
            dim,
            eval: Arc::new(move |t| DMatrix::identity(dim, dim) * l(t)),
            floor: Arc::new(l),
            diagonal: true,
            label: format!("({c0} + {c1} t^2) Id"),
        }
    }

    /// Constant diagonal matrix; entries may be nonpositive (the audit reports it).
    pub fn diagonal(entries: Vec<f64>) -> Self {
        let dim = entries.len();
        let floor = entries.iter().copied().fold(f64::INFINITY, f64::min);
        let label = format!("diag{entries:?}");
        MatrixField {
            dim,
            eval: Arc::new(move |_| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(entries.clone()))),
            floor: Arc::new(move |_| floor),
            diagonal: true,
            label,
        }
    }

    /// `(c0 + c1 t^2) Id + κ (J - Id)` where `J` is the all-ones matrix.
    pub fn coupled(dim: usize, c0: f64, c1: f64, kappa: f64) -> Self {
        let spread = kappa.abs() * (dim as f64 - 1.0).max(0.0);
        MatrixField {
            dim,
            eval: Arc::new(move |t| {
                let mut m = DMatrix::from_element(dim, dim, kappa);
                for i in 0..dim {
                    m[(i, i)] = c0 + c1 * t * t;
                }
                m
            }),
            floor: Arc::new(move |t| c0 + c1 * t * t - spread),
            diagonal: false,
            label: format!("({c0} + {c1} t^2) Id + {kappa} (J - Id)"),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        (self.eval)(t)
    }

    pub fn floor(&self, t: f64) -> f64 {
        (self.floor)(t)
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

type ValueFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
type EnvelopeFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Potential `W(t, x)` with gradient, superquadratic exponent `μ > 2`, and a
/// nonnegative envelope dominating `|W| + |∇W|`.
#[derive(Clone)]
pub struct Potential {
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
    envelope: Arc<EnvelopeFn>,
    mu: f64,
    label: String,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Potential({}, mu = {})", self.label, self.mu)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

impl Potential {
    pub fn new(
        value: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        envelope: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        mu: f64,
    ) -> Result<Self> {
        check_mu(mu)?;
        Ok(Potential {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            envelope: Arc::new(envelope),
            mu,
            label: "custom".into(),
        })
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        (self.value)(t, x)
    }

    pub fn gradient(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.gradient)(t, x, out)
    }

    pub fn envelope(&self, x: &[f64]) -> f64 {
        (self.envelope)(x)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 2.0 {
        Ok(())
    } else {
        Err(Error::hypothesis(
            tag::W1,
            format!("superquadratic exponent mu must exceed 2, got {mu}"),
        ))
    }
}

/// `W(t, x) = a(t) |x|^μ`, `∇W = μ a(t) |x|^(μ-2) x`, envelope
/// `sup a (|x|^μ + μ |x|^(μ-1))`. `a_bounds = (inf a, sup a)`.
pub fn builtin_homogeneous_potential(
    a_func: impl Fn(f64) -> f64 + Send + Sync + 'static,
    a_bounds: (f64, f64),
    mu: f64,
) -> Result<Potential> {
    check_mu(mu)?;
    let (a_inf, a_sup) = a_bounds;
    if !(a_inf > 0.0 && a_sup.is_finite() && a_sup >= a_inf) {
        return Err(Error::InvalidInput(format!(
            "amplitude bounds must satisfy 0 < inf a <= sup a < inf, got ({a_inf}, {a_sup})"
        )));
    }
    let a = Arc::new(a_func);
    let a_grad = Arc::clone(&a);
    Ok(Potential {
        value: Arc::new(move |t, x| a(t) * norm(x).powf(mu)),
        gradient: Arc::new(move |t, x, out| {
            let r = norm(x);
            let s = if r == 0.0 {
                0.0
            } else {
                mu * a_grad(t) * r.powf(mu - 2.0)
            };
            out.iter_mut().zip(x).for_each(|(o, xi)| *o = s * xi);
        }),
        envelope: Arc::new(move |x| {
            let r = norm(x);
            a_sup * (r.powf(mu) + mu * r.powf(mu - 1.0))
        }),
        mu,
        label: format!("a(t) |x|^{mu}"),
    })
}

/// `W(t, x) = amplitude |x|^μ`.
pub fn constant_homogeneous_potential(amplitude: f64, mu: f64) -> Result<Potential> {
    builtin_homogeneous_potential(move |_| amplitude, (amplitude, amplitude), mu)
}

/// The data of the boundary-value problem on one grid.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    alpha: FracOrder,
    grid: Grid,
    field: MatrixField,
    sampled: SampledField,
    potential: Potential,
    forcing: GridSignal,
    c_alpha_override: Option<f64>,
    zero_mode_shift: f64,
}

impl ProblemSpec {
    /// Builds the spec; the grid comes from `forcing`. Requires `α > 1/2`.
    pub fn new(
        alpha: FracOrder,
        field: MatrixField,
        potential: Potential,
        forcing: GridSignal,
    ) -> Result<Self> {
        if alpha.value() <= 0.5 {
            return Err(Error::EmbeddingFails(alpha.value()));
        }
        let grid = *forcing.grid();
        if field.dim() != grid.dim() {
            return Err(Error::Dimension(format!(
                "matrix field is {0}x{0}, forcing has {1} components",
                field.dim(),
                grid.dim()
            )));
        }
        forcing.ensure_finite()?;
        let sampled = SampledField::sample(&field, &grid)?;
        Ok(ProblemSpec {
            alpha,
            grid,
            field,
            sampled,
            potential,
            forcing,
            c_alpha_override: None,
            zero_mode_shift: 0.0,
        })
    }

    /// Unforced problem on `grid`.
    pub fn unforced(
        alpha: FracOrder,
        field: MatrixField,
        potential: Potential,
        grid: Grid,
    ) -> Result<Self> {
        ProblemSpec::new(alpha, field, potential, GridSignal::zeros(grid))
    }

    pub fn with_forcing(&self, forcing: GridSignal) -> Result<Self> {
        self.grid.ensure_same(forcing.grid())?;
        forcing.ensure_finite()?;
        Ok(ProblemSpec {
            forcing,
            ..self.clone()
        })
    }

    /// Replaces the Sobolev constant used for the geometry constants.
    pub fn with_c_alpha(mut self, c_alpha: f64) -> Result<Self> {
        if !(c_alpha.is_finite() && c_alpha > 0.0) {
            return Err(Error::InvalidInput(format!("C_alpha override must be positive, got {c_alpha}")));
        }
        self.c_alpha_override = Some(c_alpha);
        Ok(self)
    }

    pub fn alpha(&self) -> FracOrder {
        self.alpha
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn field(&self) -> &MatrixField {
        &self.field
    }

    pub fn sampled_field(&self) -> &SampledField {
        &self.sampled
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn forcing(&self) -> &GridSignal {
        &self.forcing
    }

    /// Gives the zero frequency of the quadratic form the weight
    /// `σ₀ = -2 ζ(-2α) (π/T)^(2α)`. The periodic sum over `w_k = kπ/T` of
    /// `|w|^(2α) |û(w)|²` misses the integral by `2 ζ(-2α) h^(2α+1) |û(0)|²`
    /// (generalized Euler–Maclaurin expansion at the cusp of `|w|^(2α)`);
    /// `σ₀` cancels that term so energies converge faster in `T`. The
    /// fractional operators themselves are unchanged.
    pub fn with_zero_mode_correction(mut self, enabled: bool) -> Self {
        self.zero_mode_shift = if enabled {
            let p = 2.0 * self.alpha.value();
            -2.0 * zeta_negative(p) * (PI / self.grid.half_width()).powf(p)
        } else {
            0.0
        };
        self
    }

    /// Weight of the zero mode in the quadratic form (0 unless corrected).
    pub fn zero_mode_shift(&self) -> f64 {
        self.zero_mode_shift
    }

    pub fn c_alpha(&self) -> Result<f64> {
        match self.c_alpha_override {
            Some(c) => Ok(c),
            None => sobolev_constant(self.alpha),
        }
    }
}

/// `ζ(s)` for `s > 1`: ten terms of the series plus the Euler–Maclaurin tail.
fn zeta(s: f64) -> f64 {
    const B2J: [f64; 6] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0];
    let m = 10.0f64;
    let head: f64 = (1..10).map(|k| (k as f64).powf(-s)).sum();
    let mut tail = m.powf(1.0 - s) / (s - 1.0) + 0.5 * m.powf(-s);
    let mut rising = s;
    let mut fact = 2.0;
    for (j, b) in B2J.iter().enumerate() {
        let k = 2 * j + 1;
        tail += b / fact * rising * m.powf(-s - k as f64);
        rising *= (s + k as f64) * (s + k as f64 + 1.0);
        fact *= ((k + 2) * (k + 3)) as f64;
    }
    head + tail
}

/// `ζ(-p)` for `p > 0` through the functional equation
/// `ζ(-p) = 2^(-p) π^(-p-1) sin(-πp/2) Γ(1+p) ζ(1+p)`.
fn zeta_negative(p: f64) -> f64 {
    2f64.powf(-p) * PI.powf(-p - 1.0) * (-PI * p / 2.0).sin() * statrs::function::gamma::gamma(1.0 + p) * zeta(1.0 + p)
}

/// Scalar constants of the mountain-pass geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsReport {
    #[serde(rename = "C_alpha")]
    pub c_alpha: f64,
    #[serde(rename = "C_e")]
    pub c_e: f64,
    /// `max_{|u|=1}` of the envelope.
    #[serde(rename = "M")]
    pub envelope_max: f64,
    /// `min_{t in [0,1], |u|=1} W(t, u)`.
    #[serde(rename = "m")]
    pub potential_min: f64,
    pub rho: f64,
    pub beta: f64,
    pub f_l2_norm: f64,
    pub mu: f64,
    /// `1 / (2 C_α² C_e²)`.
    pub threshold: f64,
    pub admissible: bool,
}

impl ConstantsReport {
    /// Room left for `||f||_{L²}`: `threshold - M`.
    pub fn forcing_budget(&self) -> f64 {
        self.threshold - self.envelope_max
    }
}

pub const DEFAULT_SAMPLE_BUDGET: usize = 64;

pub fn constants_report(p: &ProblemSpec, sample_budget: usize, seed: u64) -> Result<ConstantsReport> {
    let c_alpha = p.c_alpha()?;
    let c_e = embedding_constant_from_samples(p.sampled_field())?;
    let dirs = sphere_directions(p.grid.dim(), sample_budget, seed);
    let envelope_max = dirs
        .iter()
        .map(|d| p.potential.envelope(d))
        .fold(f64::NEG_INFINITY, f64::max);
    let t_samples = sample_budget.max(2);
    let potential_min = (0..t_samples)
        .map(|i| i as f64 / (t_samples - 1) as f64)
        .flat_map(|t| dirs.iter().map(move |d| (t, d)))
        .map(|(t, d)| p.potential.value(t, d))
        .fold(f64::INFINITY, f64::min);
    let threshold = 1.0 / (2.0 * c_alpha * c_alpha * c_e * c_e);
    let f_l2_norm = p.forcing.l2_norm();
    let beta = threshold - envelope_max - f_l2_norm;
    Ok(ConstantsReport {
        c_alpha,
        c_e,
        envelope_max,
        potential_min,
        rho: 1.0 / (c_alpha * c_e),
        beta,
        f_l2_norm,
        mu: p.potential.mu,
        threshold,
        admissible: envelope_max < threshold && f_l2_norm < threshold - envelope_max,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LCheck {
    pub nodes: usize,
    pub symmetric_fraction: f64,
    pub coercive_fraction: f64,
    /// `min_k (λ_min(L(t_k)) - l(t_k))`; negative means the floor is not a lower bound.
    pub min_eig_minus_floor: f64,
    pub floor_min: f64,
    /// `l` nondecreasing in `|t|` outside `[-T/4, T/4]`.
    pub growth_monotone: bool,
    /// `min(l(-T), l(T)) / l(0)`, required `>= 10`.
    pub growth_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct W1Check {
    /// Extremes of `((x, ∇W) - μ W) / max(μ |W|, tiny)` over samples.
    pub min_margin_rel: f64,
    pub max_margin_rel: f64,
    pub min_value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct W2Check {
    pub radii: Vec<f64>,
    /// `max |∇W(t, x)| / |x|` over samples with `|x| = radius`.
    pub max_ratio: Vec<f64>,
    pub strictly_decreasing: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct W3Check {
    /// `min (envelope(x) - |W(t,x)| - |∇W(t,x)|)`, relative to the envelope.
    pub min_margin_rel: f64,
    pub min_envelope: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OriginCheck {
    pub max_abs_value: f64,
    pub max_abs_gradient: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientCheck {
    pub max_rel_error: f64,
    pub pass: bool,
}

/// `W(t,u) >= W(t,u/|u|) |u|^μ` for `|u| >= 1` and the reverse for `|u| <= 1`.
#[derive(Debug, Clone, Serialize)]
pub struct HomogeneityCheck {
    pub min_ratio_outside: f64,
    pub max_ratio_inside: f64,
    pub pass: bool,
}

/// Empirical `d` with `|∇W(t,u)| <= d |u|` on `|u| <= radius`.
#[derive(Debug, Clone, Serialize)]
pub struct LinearBound {
    pub radius: f64,
    pub d: f64,
    pub finite: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub l: LCheck,
    pub w1: W1Check,
    pub w2: W2Check,
    pub w3: W3Check,
    pub origin: OriginCheck,
    pub gradient_consistency: GradientCheck,
    pub homogeneity: HomogeneityCheck,
    pub linear_bound: LinearBound,
    pub constants: Option<ConstantsReport>,
    pub failed: Vec<String>,
    pub solver_ready: bool,
}

const AUDIT_RADII: [f64; 8] = [1e-4, 1e-3, 1e-2, 0.5, 1.0, 2.0, 10.0, 1.0];
const W2_RADII: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Samples `L` over the grid and `W` over spheres and reports every hypothesis.
/// Violations are reported, never raised.
pub fn audit_hypotheses(p: &ProblemSpec, sample_budget: usize, seed: u64) -> HypothesisReport {
    let grid = p.grid;
    let n = grid.dim();
    let dirs = sphere_directions(n, sample_budget, seed);
    let stride = (grid.points() / sample_budget.max(1)).max(1);
    let mut times: Vec<f64> = (0..grid.points()).step_by(stride).map(|k| grid.time(k)).collect();
    times.extend([0.0, 0.5, 1.0, grid.half_width()]);

    let l = audit_matrix_field(p);

    let pot = &p.potential;
    let mu = pot.mu;
    let mut grad = vec![0.0; n];
    let mut x = vec![0.0; n];

    let mut w1 = W1Check {
        min_margin_rel: f64::INFINITY,
        max_margin_rel: f64::NEG_INFINITY,
        min_value: f64::INFINITY,
        pass: true,
    };
    let mut w3 = W3Check {
        min_margin_rel: f64::INFINITY,
        min_envelope: f64::INFINITY,
        pass: true,
    };
    let mut origin = OriginCheck {
        max_abs_value: 0.0,
        max_abs_gradient: 0.0,
        pass: true,
    };
    let mut gcheck = GradientCheck {
        max_rel_error: 0.0,
        pass: true,
    };
    let mut homog = HomogeneityCheck {
        min_ratio_outside: f64::INFINITY,
        max_ratio_inside: f64::NEG_INFINITY,
        pass: true,
    };
    let mut linear = LinearBound {
        radius: 1.0,
        d: 0.0,
        finite: true,
    };
    let mut w2_ratio = vec![0.0f64; W2_RADII.len()];

    let zero = vec![0.0; n];
    for &t in &times {
        origin.max_abs_value = origin.max_abs_value.max(pot.value(t, &zero).abs());
        pot.gradient(t, &zero, &mut grad);
        origin.max_abs_gradient = origin.max_abs_gradient.max(norm(&grad));

        for d in &dirs {
            let w_unit = pot.value(t, d);
            for &r in &AUDIT_RADII {
                x.iter_mut().zip(d).for_each(|(xi, di)| *xi = r * di);
                let w = pot.value(t, &x);
                pot.gradient(t, &x, &mut grad);
                let gn = norm(&grad);

                let scale = (mu * w.abs()).max(f64::MIN_POSITIVE);
                let margin = (dot(&x, &grad) - mu * w) / scale;
                w1.min_margin_rel = w1.min_margin_rel.min(margin);
                w1.max_margin_rel = w1.max_margin_rel.max(margin);
                w1.min_value = w1.min_value.min(w);

                let env = pot.envelope(&x);
                w3.min_envelope = w3.min_envelope.min(env);
                let m3 = (env - w.abs() - gn) / env.abs().max(f64::MIN_POSITIVE);
                w3.min_margin_rel = w3.min_margin_rel.min(m3);

                if w_unit > 0.0 {
                    let ratio = w / (w_unit * r.powf(mu));
                    if r >= 1.0 {
                        homog.min_ratio_outside = homog.min_ratio_outside.min(ratio);
                    }
                    if r <= 1.0 {
                        homog.max_ratio_inside = homog.max_ratio_inside.max(ratio);
                    }
                } else {
                    homog.pass = false;
                }

                if r <= linear.radius {
                    linear.d = linear.d.max(gn / r);
                }

                if r >= 1e-2 {
                    let h = 1e-5 * r;
                    let mut worst = 0.0f64;
                    for i in 0..n {
                        let mut xp = x.clone();
                        let mut xm = x.clone();
                        xp[i] += h;
                        xm[i] -= h;
                        let fd = (pot.value(t, &xp) - pot.value(t, &xm)) / (2.0 * h);
                        worst = worst.max((fd - grad[i]).abs());
                    }
                    let rel = worst / gn.max(1e-300);
                    gcheck.max_rel_error = gcheck.max_rel_error.max(rel);
                }
            }
            for (slot, &r) in w2_ratio.iter_mut().zip(&W2_RADII) {
                x.iter_mut().zip(d).for_each(|(xi, di)| *xi = r * di);
                pot.gradient(t, &x, &mut grad);
                *slot = slot.max(norm(&grad) / r);
            }
        }
    }

    w1.pass = w1.min_margin_rel >= -1e-10 && w1.min_value > 0.0;
    w3.pass = w3.min_envelope >= 0.0 && w3.min_margin_rel >= -1e-12;
    origin.pass = origin.max_abs_value == 0.0 && origin.max_abs_gradient == 0.0;
    gcheck.pass = gcheck.max_rel_error <= 1e-6;
    homog.pass = homog.pass
        && homog.min_ratio_outside >= 1.0 - 1e-10
        && homog.max_ratio_inside <= 1.0 + 1e-10;
    linear.finite = linear.d.is_finite();
    let strictly_decreasing = w2_ratio.windows(2).all(|w| w[1] < w[0]);
    let w2 = W2Check {
        radii: W2_RADII.to_vec(),
        max_ratio: w2_ratio,
        strictly_decreasing,
        pass: strictly_decreasing && origin.pass,
    };

    let constants = if l.pass {
        constants_report(p, sample_budget, seed).ok()
    } else {
        None
    };

    let mut failed = Vec::new();
    if !l.pass {
        failed.push(tag::L.to_string());
    }
    if !(w1.pass && gcheck.pass) {
        failed.push(tag::W1.to_string());
    }
    if !w2.pass {
        failed.push(tag::W2.to_string());
    }
    if !(w3.pass && homog.pass && linear.finite) {
        failed.push(tag::W3.to_string());
    }
    if let Some(c) = &constants {
        if !c.admissible {
            failed.push(tag::WF.to_string());
        }
    }
    let solver_ready = failed.is_empty() && constants.is_some();
    HypothesisReport {
        l,
        w1,
        w2,
        w3,
        origin,
        gradient_consistency: gcheck,
        homogeneity: homog,
        linear_bound: linear,
        constants,
        failed,
        solver_ready,
    }
}

fn audit_matrix_field(p: &ProblemSpec) -> LCheck {
    let grid = p.grid;
    let s = p.sampled_field();
    let nodes = grid.points();
    let eig_scale = |e: f64| 1e-12 * e.abs().max(1.0);
    let coercive = s
        .min_eigenvalues()
        .iter()
        .zip(s.floors())
        .filter(|(e, l)| **l > 0.0 && **e >= **l - eig_scale(**e))
        .count();
    let min_eig_minus_floor = s
        .min_eigenvalues()
        .iter()
        .zip(s.floors())
        .map(|(e, l)| e - l)
        .fold(f64::INFINITY, f64::min);
    let floor_min = s.floors().iter().copied().fold(f64::INFINITY, f64::min);

    let quarter = grid.half_width() / 4.0;
    let mut right: Vec<(f64, f64)> = Vec::new();
    let mut left: Vec<(f64, f64)> = Vec::new();
    for (k, &l) in s.floors().iter().enumerate() {
        let t = grid.time(k);
        if t > quarter {
            right.push((t, l));
        } else if t < -quarter {
            left.push((-t, l));
        }
    }
    right.push((grid.half_width(), p.field.floor(grid.half_width())));
    left.push((grid.half_width(), p.field.floor(-grid.half_width())));
    let monotone = |pts: &mut Vec<(f64, f64)>| {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.windows(2).all(|w| w[1].1 >= w[0].1)
    };
    let growth_monotone = monotone(&mut right) && monotone(&mut left);
    let l0 = p.field.floor(0.0);
    let growth_ratio = p
        .field
        .floor(grid.half_width())
        .min(p.field.floor(-grid.half_width()))
        / l0;

    let symmetric_fraction = 1.0 - s.asymmetric_nodes() as f64 / nodes as f64;
    let coercive_fraction = coercive as f64 / nodes as f64;
    LCheck {
        nodes,
        symmetric_fraction,
        coercive_fraction,
        min_eig_minus_floor,
        floor_min,
        growth_monotone,
        growth_ratio,
        pass: s.asymmetric_nodes() == 0
            && coercive == nodes
            && l0 > 0.0
            && growth_monotone
            && growth_ratio >= 10.0,
    }
}
