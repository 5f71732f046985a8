//! Shared test oracles, independent of the implementation paths they check.

// Each test binary compiles this module but uses its own subset.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zemtwist::dynamics::{rel_geometry, EngagementState, RelGeometry, VehicleCoeffs};
use zemtwist::smallmat::Matrix;

/// Truncated-series matrix exponential with Kahan-compensated accumulation:
/// `sum_{k=0}^{terms} (A t)^k / k!`. Independent oracle for the Pade core;
/// accurate for moderate `||A t||`.
pub fn taylor_expm(a: &Matrix, t: f64, terms: usize) -> Matrix {
    let n = a.dim();
    let at = a.scale(t);
    let mut sum = Matrix::identity(n);
    let mut comp = Matrix::zeros(n); // Kahan compensation
    let mut term = Matrix::identity(n);
    for k in 1..=terms {
        term = term.mul(&at).scale(1.0 / k as f64);
        for i in 0..n {
            for j in 0..n {
                let y = term[(i, j)] - comp[(i, j)];
                let s = sum[(i, j)] + y;
                comp[(i, j)] = (s - sum[(i, j)]) - y;
                sum[(i, j)] = s;
            }
        }
    }
    sum
}

/// Series oracle for stiff matrices: exact binary halvings bring the norm
/// below 1 before the compensated series runs, then plain squarings undo
/// them. Only the elementary identity exp(A) = exp(A/2)^2 is shared with
/// the implementation under test; the rational core is not.
pub fn taylor_expm_scaled(a: &Matrix, t: f64, terms: usize) -> Matrix {
    let mut halvings = 0u32;
    let mut scale = t;
    while (a.inf_norm() * scale.abs()) > 1.0 {
        scale *= 0.5;
        halvings += 1;
    }
    let mut result = taylor_expm(a, scale, terms);
    for _ in 0..halvings {
        result = result.mul(&result);
    }
    result
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    worst
}

/// Deterministic RNG for test sampling.
pub fn test_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random closing engagement state with a valid geometry; retries until the
/// requested t_go window is hit.
pub fn random_closing_state(
    rng: &mut ChaCha8Rng,
    coeffs: &VehicleCoeffs,
    t_go_range: (f64, f64),
) -> (EngagementState, RelGeometry) {
    loop {
        let r: f64 = rng.random_range(300.0..3500.0);
        let lambda: f64 = rng.random_range(-0.5..0.5);
        let gamma_m: f64 = lambda + rng.random_range(-0.6..0.6);
        let gamma_t: f64 = rng.random_range(-0.5..0.5);
        let mut state = EngagementState {
            x_m: 0.0,
            z_m: 0.0,
            x_t: r * lambda.cos(),
            z_t: r * lambda.sin(),
            gamma_m,
            gamma_t,
            alpha: rng.random_range(-0.2..0.2),
            q: rng.random_range(-2.0..2.0),
            theta: 0.0,
            delta: rng.random_range(-0.4..0.4),
            a_t: rng.random_range(-190.0..190.0),
            t: 0.0,
        };
        state.theta = state.gamma_m + state.alpha;
        if let Ok(geom) = rel_geometry(&state, coeffs) {
            if geom.v_r < -50.0 && geom.t_go >= t_go_range.0 && geom.t_go <= t_go_range.1 {
                return (state, geom);
            }
        }
    }
}
