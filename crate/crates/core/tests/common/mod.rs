#![allow(dead_code)]

use fracpass::problem::{constant_homogeneous_potential, constants_report, MatrixField, ProblemSpec};
use fracpass::{FracOrder, Grid, GridSignal};

/// `n = 2`, `α = 0.75`, `L = (1 + t²) Id`, `W = amplitude |x|⁴`, unforced.
pub fn quartic_problem(amplitude: f64, half_width: f64, points: usize) -> ProblemSpec {
    ProblemSpec::unforced(
        FracOrder::new(0.75).unwrap(),
        MatrixField::quadratic(2, 1.0, 1.0),
        constant_homogeneous_potential(amplitude, 4.0).unwrap(),
        Grid::new(half_width, points, 2).unwrap(),
    )
    .unwrap()
}

/// `exp(-t²) (1, 0)` scaled to `fraction` of the forcing budget.
pub fn with_budget_forcing(p: &ProblemSpec, fraction: f64) -> ProblemSpec {
    let budget = constants_report(p, 64, 42).unwrap().forcing_budget();
    let unit = GridSignal::from_profile(*p.grid(), &[1.0, 0.0], |t| (-t * t).exp()).unwrap();
    p.with_forcing(unit.scaled(fraction * budget / unit.l2_norm())).unwrap()
}

/// The admissible quartic instance used throughout: amplitude 0.1, forcing
/// at half the budget.
pub fn admissible(half_width: f64, points: usize) -> ProblemSpec {
    with_budget_forcing(&quartic_problem(0.1, half_width, points), 0.5)
}
