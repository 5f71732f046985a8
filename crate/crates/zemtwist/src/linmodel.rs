//! Frozen linearized models built from scenario coefficients and initial
//! geometry.
//!
//! Three state-space models are constructed once at scenario start and never
//! re-linearized:
//!
//! - guidance-level, state `[z, z_dot, a_tn, a_mn]`:
//!   `x_dot = A_G x + B_G a_mn_cmd + G_G a_tn_cmd`
//! - airframe, state `[alpha, q, delta]`:
//!   `x_dot = A_M x + B_M delta_cmd`
//! - integrated, state `[z, z_dot, a_tn, alpha, q, delta]`:
//!   `x_dot = A_I x + B_I delta_cmd + G_I a_tn_cmd`
//!
//! The guidance-only model (A_G) is built and tested for completeness; the
//! flown controller uses the integrated model exclusively.

use crate::dynamics::VehicleCoeffs;
use crate::smallmat::{Matrix, Vector};

/// Linearized model set, immutable after construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearModels {
    /// 4x4 guidance-level system matrix.
    pub a_g: Matrix,
    pub b_g: Vector,
    pub g_g: Vector,
    /// 3x3 airframe matrix.
    pub a_m: Matrix,
    pub b_m: Vector,
    /// Output row mapping `[alpha, q, delta]` to normal acceleration;
    /// carries the `cos(gamma_m0 - lambda0)` projection.
    pub c_m: Vector,
    /// 6x6 integrated matrix.
    pub a_i: Matrix,
    pub b_i: Vector,
    pub g_i: Vector,
    /// Linearization point [rad].
    pub gamma_m0: f64,
    pub lambda0: f64,
    /// Source coefficients, kept for consumers that need time constants and
    /// lift derivatives alongside the matrices.
    pub coeffs: VehicleCoeffs,
}

/// Which argument feeds the normal-acceleration output map.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AccelConvention {
    /// `a_mn = C_M x_M` (dimensionally consistent; flown default).
    #[default]
    State,
    /// `a_mn = C_M x_M_dot`, the literal transcription, exposed for
    /// comparison only.
    StateRate,
}

/// Populate all three models from coefficients and the initial geometry.
pub fn build_models(coeffs: &VehicleCoeffs, gamma_m0: f64, lambda0: f64) -> LinearModels {
    let cos_fac = (gamma_m0 - lambda0).cos();

    // Guidance level: z double integrator, first-order target and pursuer
    // acceleration lags.
    let mut a_g = Matrix::zeros(4);
    a_g[(0, 1)] = 1.0;
    a_g[(1, 2)] = 1.0;
    a_g[(1, 3)] = -1.0;
    a_g[(2, 2)] = -1.0 / coeffs.tau_t;
    a_g[(3, 3)] = -1.0 / coeffs.tau_m;
    let mut b_g = Vector::zeros(4);
    b_g[3] = 1.0 / coeffs.tau_m;
    let mut g_g = Vector::zeros(4);
    g_g[2] = 1.0 / coeffs.tau_t;

    // Airframe short period with first-order servo.
    let mut a_m = Matrix::zeros(3);
    a_m[(0, 0)] = -coeffs.l_alpha / coeffs.v_m;
    a_m[(0, 1)] = 1.0;
    a_m[(0, 2)] = -coeffs.l_delta / coeffs.v_m;
    a_m[(1, 0)] = coeffs.m_alpha;
    a_m[(1, 1)] = coeffs.m_q;
    a_m[(1, 2)] = coeffs.m_delta;
    a_m[(2, 2)] = -1.0 / coeffs.tau_s;
    let mut b_m = Vector::zeros(3);
    b_m[2] = 1.0 / coeffs.tau_s;
    let mut c_m = Vector::zeros(3);
    c_m[0] = coeffs.l_alpha * cos_fac;
    c_m[2] = coeffs.l_delta * cos_fac;

    // Integrated: guidance block over the airframe block, coupled through
    // -C_M in the z_ddot row.
    let mut a_i = Matrix::zeros(6);
    a_i[(0, 1)] = 1.0;
    a_i[(1, 2)] = 1.0;
    for j in 0..3 {
        a_i[(1, 3 + j)] = -c_m[j];
    }
    a_i[(2, 2)] = -1.0 / coeffs.tau_t;
    for i in 0..3 {
        for j in 0..3 {
            a_i[(3 + i, 3 + j)] = a_m[(i, j)];
        }
    }
    let mut b_i = Vector::zeros(6);
    b_i[5] = 1.0 / coeffs.tau_s;
    let mut g_i = Vector::zeros(6);
    g_i[2] = 1.0 / coeffs.tau_t;

    LinearModels {
        a_g,
        b_g,
        g_g,
        a_m,
        b_m,
        c_m,
        a_i,
        b_i,
        g_i,
        gamma_m0,
        lambda0,
        coeffs: *coeffs,
    }
}

impl LinearModels {
    /// State transition of the integrated model over `t_go`.
    pub fn phi(&self, t_go: f64) -> Matrix {
        self.a_i.exp(t_go)
    }
}

/// Normal acceleration from the airframe state `[alpha, q, delta]`.
pub fn uav_normal_accel(x_m: &Vector, models: &LinearModels, convention: AccelConvention) -> f64 {
    assert_eq!(x_m.dim(), 3);
    match convention {
        AccelConvention::State => models.c_m.dot(x_m),
        AccelConvention::StateRate => {
            // Uses the zero-command state rate A_M x_M.
            models.c_m.dot(&models.a_m.mul_vec(x_m))
        }
    }
}

/// Precomputed transition matrices on a uniform t_go grid with elementwise
/// linear interpolation. Queries beyond the grid fall back to the exact
/// exponential.
#[derive(Clone, Debug)]
pub struct PhiTable {
    step: f64,
    entries: Vec<Matrix>,
}

impl PhiTable {
    pub fn new(models: &LinearModels, t_go_max: f64, step: f64) -> Self {
        assert!(step > 0.0 && t_go_max > 0.0);
        let n = (t_go_max / step).ceil() as usize + 1;
        let entries = (0..=n).map(|k| models.phi(k as f64 * step)).collect();
        PhiTable { step, entries }
    }

    pub fn get(&self, models: &LinearModels, t_go: f64) -> Matrix {
        let pos = t_go / self.step;
        let k = pos.floor() as usize;
        if t_go < 0.0 || k + 1 >= self.entries.len() {
            return models.phi(t_go);
        }
        let w = pos - k as f64;
        let lo = &self.entries[k];
        let hi = &self.entries[k + 1];
        lo.scale(1.0 - w).add(&hi.scale(w))
    }
}

/// Transition-matrix source for the control loop: exact exponential each
/// query, or grid interpolation for performance comparison.
#[derive(Clone, Debug, Default)]
pub enum PhiProvider {
    #[default]
    Exact,
    Table(PhiTable),
}

impl PhiProvider {
    pub fn phi(&self, models: &LinearModels, t_go: f64) -> Matrix {
        match self {
            PhiProvider::Exact => models.phi(t_go),
            PhiProvider::Table(table) => table.get(models, t_go),
        }
    }
}
