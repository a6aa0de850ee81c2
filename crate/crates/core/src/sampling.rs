//! Deterministic sample generators: low-discrepancy sphere directions and
//! random smooth decaying trajectories.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{Grid, GridSignal};

/// `count` unit vectors in `R^n` from a shifted Kronecker (golden-ratio) sequence
/// pushed through Box–Muller. The coordinate axes `±e_i` come first.
pub fn sphere_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count + 2 * n);
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = sign;
            out.push(e);
        }
    }
    let d = 2 * n.div_ceil(2);
    // generalized golden ratio: unique positive root of x^(d+1) = x + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    let steps: Vec<f64> = (1..=d).map(|i| phi.powi(-(i as i32)).fract()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    for j in 1..=count {
        let p: Vec<f64> = (0..d)
            .map(|i| (shift[i] + j as f64 * steps[i]).fract())
            .collect();
        let mut z = Vec::with_capacity(d);
        for pair in p.chunks(2) {
            let r = (-2.0 * (1.0 - pair[0]).ln()).sqrt();
            z.push(r * (TAU * pair[1]).cos());
            z.push(r * (TAU * pair[1]).sin());
        }
        z.truncate(n);
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            out.push(z.into_iter().map(|v| v / norm).collect());
        }
    }
    out
}

/// A sum of a few Gaussian bumps with random centres in `[-T/4, T/4]`, widths
/// in `[0.5, 2.5]`, and random vector amplitudes. Smooth, decaying, nonzero.
pub fn random_smooth_signal(grid: Grid, rng: &mut impl Rng) -> Result<GridSignal> {
    let bumps = rng.gen_range(1..=4);
    let n = grid.dim();
    let spread = grid.half_width() / 4.0;
    let params: Vec<(f64, f64, Vec<f64>)> = (0..bumps)
        .map(|_| {
            let centre = rng.gen_range(-spread..spread);
            let width = rng.gen_range(0.5..2.5);
            let amp = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (centre, width, amp)
        })
        .collect();
    GridSignal::from_fn(grid, |t, out| {
        for (centre, width, amp) in &params {
            let g = (-((t - centre) / width).powi(2)).exp();
            out.iter_mut().zip(amp).for_each(|(o, a)| *o += a * g);
        }
    })
}

/// A random trigonometric polynomial with modes `1..=max_mode` (zero mean,
/// band-limited on the periodic grid).
pub fn random_band_limited(grid: Grid, max_mode: usize, rng: &mut impl Rng) -> Result<GridSignal> {
    let n = grid.dim();
    let base = std::f64::consts::PI / grid.half_width();
    let coeffs: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|_| {
            (1..=max_mode)
                .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    GridSignal::from_fn(grid, |t, out| {
        for (o, modes) in out.iter_mut().zip(&coeffs) {
            *o = modes
                .iter()
                .enumerate()
                .map(|(m, (a, b))| {
                    let w = base * (m + 1) as f64;
                    a * (w * t).cos() + b * (w * t).sin()
                })
                .sum();
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit_and_reproducible() {
        for n in 1..=4 {
            let a = sphere_directions(n, 32, 7);
            let b = sphere_directions(n, 32, 7);
            assert_eq!(a, b);
            assert!(a.len() >= 32);
            for d in &a {
                let norm: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
        assert_ne!(sphere_directions(3, 8, 1), sphere_directions(3, 8, 2));
    }
}
