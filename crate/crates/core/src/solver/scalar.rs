//! One-dimensional root finding for the ray maximization.

/// Root of `f` in a sign-changing bracket `[a, b]` by the Illinois variant of
/// regula falsi, falling back to bisection when the secant stalls. Stops when
/// `|f| <= ftol` or the bracket width drops below `xtol`.
pub(crate) fn illinois<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    ftol: f64,
    xtol: f64,
    max_evals: usize,
) -> Result<(f64, f64), E> {
    debug_assert!(fa * fb <= 0.0);
    let mut side = 0i8;
    let (mut best_x, mut best_f) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..max_evals {
        if best_f.abs() <= ftol || (b - a).abs() <= xtol {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !x.is_finite() || x <= a.min(b) || x >= a.max(b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if fx.abs() < best_f.abs() {
            best_x = x;
            best_f = fx;
        }
        if fx * fb < 0.0 {
            a = b;
            fa = fb;
            b = x;
            fb = fx;
            side = 0;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok((best_x, best_f))
}
