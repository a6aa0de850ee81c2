mod common;

use fracpass::energy::{
    action, directional_derivative, l2_gradient, potential_gradient, quadratic_operator,
    riesz_gradient, self_pairing, strong_residual, x_norm, x_norm_squared,
};
use fracpass::fracops::composed_operator;
use fracpass::problem::{constants_report, MatrixField, Potential, ProblemSpec};
use fracpass::sampling::{random_band_limited, random_smooth_signal};
use fracpass::solver::plateau_bump;
use fracpass::{FracOrder, GridSignal};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{admissible, quartic_problem};

fn no_potential() -> Potential {
    Potential::new(|_, _| 0.0, |_, _, out| out.fill(0.0), |_| 0.0, 4.0).unwrap()
}

fn ray(u: &GridSignal, p: &ProblemSpec, sigma: f64) -> f64 {
    action(&u.scaled(sigma), p).unwrap()
}

#[test]
fn central_differences_converge_at_second_order() {
    let p = quartic_problem(1.0, 10.0, 128);
    let f = GridSignal::from_profile(*p.grid(), &[0.3, -0.2], |t| (-t * t / 4.0).exp()).unwrap();
    let p = p.with_forcing(f).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let u = random_smooth_signal(*p.grid(), &mut rng).unwrap().scaled(0.5);
        let v = random_smooth_signal(*p.grid(), &mut rng).unwrap().scaled(0.5);
        let exact = directional_derivative(&u, &v, &p).unwrap();
        let fd = |h: f64| {
            (action(&u.add_scaled(h, &v).unwrap(), &p).unwrap()
                - action(&u.add_scaled(-h, &v).unwrap(), &p).unwrap())
                / (2.0 * h)
        };
        assert!((fd(1e-5) - exact).abs() <= 1e-8, "{} vs {exact}", fd(1e-5));
        let errors: Vec<f64> = [4e-2, 2e-2, 1e-2].iter().map(|&h| (fd(h) - exact).abs()).collect();
        for w in errors.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!((slope - 2.0).abs() <= 0.1, "slope {slope}");
        }
    }
}

#[test]
fn self_pairing_closed_forms() {
    let p = admissible(10.0, 128);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let u = random_smooth_signal(*p.grid(), &mut rng).unwrap();
        let sp = self_pairing(&u, &p).unwrap();
        let dd = directional_derivative(&u, &u, &p).unwrap();
        assert!((sp - dd).abs() <= 1e-10 * sp.abs().max(1.0));
        // homogeneity of the quartic: (∇W(u), u) = 4 W(u)
        let dt = p.grid().dt();
        let w_int: f64 = u.values().rows().into_iter().map(|r| 0.1 * r.dot(&r).powi(2)).sum::<f64>() * dt;
        let closed = x_norm_squared(&u, &p).unwrap() - 4.0 * w_int + p.forcing().dot_l2(&u).unwrap();
        assert!((sp - closed).abs() <= 1e-10 * sp.abs().max(1.0));
    }
    assert_eq!(self_pairing(&GridSignal::zeros(*p.grid()), &p).unwrap(), 0.0);
}

#[test]
fn trivial_values() {
    let p = admissible(10.0, 128);
    let g = *p.grid();
    let zero = GridSignal::zeros(g);
    assert_eq!(action(&zero, &p).unwrap(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v = random_smooth_signal(g, &mut rng).unwrap();
    assert_eq!(directional_derivative(&v, &zero, &p).unwrap(), 0.0);
    let at_zero = directional_derivative(&zero, &v, &p).unwrap();
    assert!((at_zero - p.forcing().dot_l2(&v).unwrap()).abs() <= 1e-14);

    let free = ProblemSpec::unforced(
        FracOrder::new(0.75).unwrap(),
        MatrixField::quadratic(2, 1.0, 1.0),
        no_potential(),
        g,
    )
    .unwrap();
    let quad = x_norm_squared(&v, &free).unwrap();
    assert!((action(&v, &free).unwrap() - 0.5 * quad).abs() <= 1e-12 * quad);
    assert_eq!(strong_residual(&zero, &free).unwrap().max_abs(), 0.0);
}

#[test]
fn small_bumps_have_positive_action() {
    let p = quartic_problem(1.0, 20.0, 512);
    let bump = plateau_bump(*p.grid(), &[1.0, 0.0]).unwrap();
    let unit = bump.scaled(1.0 / x_norm(&bump, &p).unwrap());
    for eps in [1e-3, 1e-2, 5e-2, 0.1] {
        let value = ray(&unit, &p, eps);
        assert!(value > 0.0);
        assert!(value <= 0.5 * eps * eps * (1.0 + 1e-12));
    }
}

#[test]
fn manufactured_solution_has_zero_residual() {
    let base = admissible(20.0, 512);
    let star = GridSignal::from_fn(*base.grid(), |t, o| {
        o[0] = 0.4 * (-t * t).exp();
        o[1] = 0.2 * t * (-0.5 * t * t).exp();
    })
    .unwrap();
    let f = composed_operator(&star, base.alpha())
        .unwrap()
        .add_scaled(1.0, &base.sampled_field().apply(&star).unwrap())
        .unwrap()
        .scaled(-1.0)
        .add_scaled(1.0, &potential_gradient(&star, &base).unwrap())
        .unwrap();
    let p = base.with_forcing(f).unwrap();
    assert!(strong_residual(&star, &p).unwrap().max_abs() <= 1e-12);
    // with this sign convention u* is also a critical point of the action
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let v = random_band_limited(*p.grid(), 30, &mut rng).unwrap();
    assert!(directional_derivative(&star, &v, &p).unwrap().abs() <= 1e-10);
}

#[test]
fn weak_and_strong_forms_agree() {
    let p = admissible(10.0, 256);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let u = random_smooth_signal(*p.grid(), &mut rng).unwrap();
        let v = random_band_limited(*p.grid(), 20, &mut rng).unwrap();
        let weak = directional_derivative(&u, &v, &p).unwrap();
        let strong = -strong_residual(&u, &p).unwrap().dot_l2(&v).unwrap();
        assert!((weak - strong).abs() <= 1e-8);
    }
}

#[test]
fn riesz_gradient_inverts_a_matched_quadratic_form() {
    let g = fracpass::Grid::new(10.0, 128, 2).unwrap();
    let lambda = 0.7;
    let p = ProblemSpec::unforced(
        FracOrder::new(0.75).unwrap(),
        MatrixField::scaled_identity(2, lambda),
        no_potential(),
        g,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u = random_band_limited(g, 30, &mut rng).unwrap();
    let r = riesz_gradient(&u, &p, 1e-3).unwrap();
    assert!(r.sub(&u).unwrap().max_abs() <= 1e-12);
    let zero = GridSignal::zeros(g);
    assert_eq!(riesz_gradient(&zero, &p, 1e-3).unwrap().max_abs(), 0.0);
}

#[test]
fn riesz_gradient_is_a_descent_direction() {
    let p = admissible(10.0, 128);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let u = random_smooth_signal(*p.grid(), &mut rng).unwrap();
        let g = riesz_gradient(&u, &p, 1e-3).unwrap();
        assert!(directional_derivative(&u, &g, &p).unwrap() > 0.0);
        let base = action(&u, &p).unwrap();
        for k in 4..16 {
            let s = 2f64.powi(-k);
            assert!(action(&u.add_scaled(-s, &g).unwrap(), &p).unwrap() < base, "s = {s}");
        }
    }
}

#[test]
fn preconditioner_pairing_is_nonnegative_with_equality_at_critical_points() {
    let p = admissible(10.0, 128);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let u = random_smooth_signal(*p.grid(), &mut rng).unwrap();
        let g = riesz_gradient(&u, &p, 1e-3).unwrap();
        let pairing = l2_gradient(&u, &p).unwrap().dot_l2(&g).unwrap();
        assert!(pairing >= 0.0);
    }
    let unforced = quartic_problem(0.1, 10.0, 128);
    let zero = GridSignal::zeros(*unforced.grid());
    let g = riesz_gradient(&zero, &unforced, 1e-3).unwrap();
    assert_eq!(directional_derivative(&zero, &g, &unforced).unwrap(), 0.0);
}

#[test]
fn action_decreases_along_rays() {
    let p = quartic_problem(1.0, 20.0, 512);
    let u = plateau_bump(*p.grid(), &[0.0, 1.0]).unwrap();
    let sigmas: Vec<f64> = (1..=100).map(|i| 0.1 * i as f64).collect();
    let values: Vec<f64> = sigmas.iter().map(|&s| ray(&u, &p, s)).collect();
    let peak = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert!(peak < 99);
    assert!(values[peak..].windows(2).all(|w| w[1] < w[0]));
    assert!(values[0] > 0.0 && *values.last().unwrap() < 0.0);
}

#[test]
fn sphere_of_radius_rho_sits_above_beta() {
    let p = admissible(20.0, 512);
    let c = constants_report(&p, 64, 42).unwrap();
    assert!(c.admissible && c.beta > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dt = p.grid().dt();
    let mut lowest = f64::INFINITY;
    for _ in 0..50 {
        let d = random_smooth_signal(*p.grid(), &mut rng).unwrap();
        let d = d.scaled(c.rho / x_norm(&d, &p).unwrap());
        let value = action(&d, &p).unwrap();
        // the chain of estimates, one term at a time
        let quad = 0.5 * x_norm_squared(&d, &p).unwrap();
        assert!((quad - 0.5 * c.rho * c.rho).abs() <= 1e-12);
        assert!(d.sup_norm() <= 1.0 + 1e-9);
        let l2 = d.l2_norm();
        assert!(l2 <= c.c_e * c.rho * (1.0 + 1e-12));
        let w_int: f64 = d.values().rows().into_iter().map(|r| 0.1 * r.dot(&r).powi(2)).sum::<f64>() * dt;
        assert!(w_int <= c.envelope_max * l2 * l2);
        assert!(p.forcing().dot_l2(&d).unwrap().abs() <= c.f_l2_norm * l2 * (1.0 + 1e-12));
        lowest = lowest.min(value);
    }
    assert!(lowest >= c.beta - 1e-8, "{lowest} < {}", c.beta);
}

#[test]
fn quadratic_operator_is_symmetric() {
    let p = admissible(10.0, 128).with_zero_mode_correction(true);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let u = random_smooth_signal(*p.grid(), &mut rng).unwrap();
    let v = random_smooth_signal(*p.grid(), &mut rng).unwrap();
    let uv = quadratic_operator(&u, &p).unwrap().dot_l2(&v).unwrap();
    let vu = quadratic_operator(&v, &p).unwrap().dot_l2(&u).unwrap();
    assert!((uv - vu).abs() <= 1e-12 * uv.abs().max(1.0));
}
