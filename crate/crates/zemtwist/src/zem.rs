//! Zero-effort miss, sliding surface, and the drift decomposition of its
//! time derivative.
//!
//! The ZEM of the integrated model is
//!
//! ```text
//! Z = -V_r t_go^2 lambda_dot  +  a_tn tau_T^2 psi(t_go)  +  C Phi(t_go) x_bar
//! ```
//!
//! with `psi(x) = e^(-x/tau) + x/tau - 1`, `x_bar = [0,0,0,alpha,q,delta]`,
//! and `C = [1,0,...,0]`. Z doubles as the sliding surface; its derivative
//! splits into a drift part, a control part proportional to the canard
//! command, and target-command terms:
//!
//! ```text
//! sigma_dot = [V_lambda + a_tn tau_T (1 - e^(-t_go/tau_T)) + C Phi A x_bar]
//!             * (V_r_dot r / V_r^2)
//!           + Phi[0,5] delta_cmd / tau_s
//!           + tau_T a_tn_cmd psi
//! ```
//!
//! Target accelerations are projected onto the normal of the initial LOS:
//! `a_tn = a_t cos(gamma_t + lambda0)`.

use crate::dynamics::{los_rates, EngagementState, RelGeometry};
use crate::linmodel::LinearModels;
use crate::smallmat::{Matrix, Vector};
use thiserror::Error;

/// Below this transition-matrix entry the canard no longer moves the
/// surface; equivalent control would divide by zero.
pub const GAIN_EPSILON: f64 = 1e-6;

/// `psi(t_go) = e^(-t_go/tau_T) + t_go/tau_T - 1`.
pub fn psi(t_go: f64, tau_t: f64) -> f64 {
    (-t_go / tau_t).exp() + t_go / tau_t - 1.0
}

/// `d psi / d t_go = (t_go/tau_T - psi) / tau_T`.
pub fn psi_prime(t_go: f64, tau_t: f64) -> f64 {
    (t_go / tau_t - psi(t_go, tau_t)) / tau_t
}

/// ZEM of the linear integrated model: first component of `Phi(t_go) x_i`
/// with `x_i = [z, z_dot, a_tn, alpha, q, delta]`.
pub fn zem_linear(x_i: &Vector, a_i: &Matrix, t_go: f64) -> f64 {
    assert_eq!(x_i.dim(), 6);
    a_i.exp(t_go).row(0).dot(x_i)
}

/// Three-term ZEM decomposition at one instant.
#[derive(Clone, Copy, Debug)]
pub struct ZemBreakdown {
    /// Total ZEM / sliding surface value [m]; exact sum of the three terms.
    pub z: f64,
    /// `-V_r t_go^2 lambda_dot` [m].
    pub kinematic_term: f64,
    /// `a_tn tau_T^2 psi` [m].
    pub target_lag_term: f64,
    /// `C Phi x_bar` [m].
    pub airframe_term: f64,
    /// psi evaluated at (t_go, tau_T).
    pub psi: f64,
    /// Transition-matrix entry (row 0, col 5): canard-to-ZEM authority.
    pub phi16: f64,
    /// sigma_dot with zero canard command and zero target command [m/s];
    /// NaN on degenerate geometry (V_r = 0, t_go rate undefined).
    pub drift_no_control: f64,
}

/// Target acceleration projected on the initial-LOS normal.
pub fn target_normal_accel(a_t: f64, gamma_t: f64, lambda0: f64) -> f64 {
    a_t * (gamma_t + lambda0).cos()
}

fn airframe_state(state: &EngagementState) -> Vector {
    Vector::from_slice(&[0.0, 0.0, 0.0, state.alpha, state.q, state.delta])
        .expect("airframe state entries are finite")
}

/// Nominal-model normal acceleration used in the drift evaluation (the
/// unprojected lift from the current airframe state).
fn nominal_accel(state: &EngagementState, models: &LinearModels) -> f64 {
    models.coeffs.l_alpha * state.alpha + models.coeffs.l_delta * state.delta
}

/// ZEM with a caller-supplied transition matrix (hot-loop variant).
pub fn zem_integrated_with_phi(
    state: &EngagementState,
    geom: &RelGeometry,
    models: &LinearModels,
    phi: &Matrix,
) -> ZemBreakdown {
    let tau_t = models.coeffs.tau_t;
    let lambda_dot = geom.v_lambda / geom.r;
    let a_tn = target_normal_accel(state.a_t, state.gamma_t, models.lambda0);
    let psi_val = psi(geom.t_go, tau_t);
    let x_bar = airframe_state(state);
    let phi_row = phi.row(0);

    let kinematic_term = -geom.v_r * geom.t_go * geom.t_go * lambda_dot;
    let target_lag_term = a_tn * tau_t * tau_t * psi_val;
    let airframe_term = phi_row.dot(&x_bar);

    // Drift with delta_cmd = 0 and zero target command; V_r_dot is evaluated
    // from the nominal-model accelerations.
    let a_m = nominal_accel(state, models);
    let drift_no_control = match los_rates(state, geom, a_m, state.a_t) {
        Ok(rates) => {
            let k = rates.v_r_dot * geom.r / (geom.v_r * geom.v_r);
            let bracket = geom.v_lambda
                + a_tn * tau_t * (1.0 - (-geom.t_go / tau_t).exp())
                + phi_row.dot(&models.a_i.mul_vec(&x_bar));
            bracket * k
        }
        Err(_) => f64::NAN,
    };

    ZemBreakdown {
        z: kinematic_term + target_lag_term + airframe_term,
        kinematic_term,
        target_lag_term,
        airframe_term,
        psi: psi_val,
        phi16: phi[(0, 5)],
        drift_no_control,
    }
}

/// ZEM of the integrated formulation from the full nonlinear state.
pub fn zem_integrated(
    state: &EngagementState,
    geom: &RelGeometry,
    models: &LinearModels,
) -> ZemBreakdown {
    let phi = models.phi(geom.t_go);
    zem_integrated_with_phi(state, geom, models, &phi)
}

/// The sliding-surface derivative split into drift, control, and target
/// parts: `sigma_dot = drift + control_gain * delta_cmd + target_term`.
#[derive(Clone, Copy, Debug)]
pub struct SigmaDotTerms {
    /// Command-independent drift [m/s].
    pub drift: f64,
    /// Authority [m/s per rad of canard command]: `Phi[0,5] / tau_s`.
    pub control_gain: f64,
    /// `tau_T a_tn_cmd psi` [m/s]; lumped model-error terms are diagnostic
    /// bounds, not computed here.
    pub target_term: f64,
    /// Transition-matrix authority entry, before the 1/tau_s scaling.
    pub phi16: f64,
    /// Reconstructed total for the supplied commands [m/s].
    pub sigma_dot: f64,
}

#[derive(Debug, Error, PartialEq)]
#[error("loss of control authority: |Phi(0,5)| = {phi16:.3e} below {GAIN_EPSILON:.0e}")]
pub struct AuthorityLoss {
    pub phi16: f64,
}

/// Drift decomposition with a caller-supplied transition matrix.
pub fn sigma_dot_terms_with_phi(
    state: &EngagementState,
    geom: &RelGeometry,
    models: &LinearModels,
    phi: &Matrix,
    delta_cmd: f64,
    a_t_cmd: f64,
) -> Result<SigmaDotTerms, AuthorityLoss> {
    let phi16 = phi[(0, 5)];
    if phi16.abs() < GAIN_EPSILON {
        return Err(AuthorityLoss { phi16 });
    }
    let tau_t = models.coeffs.tau_t;
    let a_m = nominal_accel(state, models);
    let rates = los_rates(state, geom, a_m, state.a_t).expect("geometry with t_go > 0 has V_r < 0");
    let k = rates.v_r_dot * geom.r / (geom.v_r * geom.v_r);
    let a_tn = target_normal_accel(state.a_t, state.gamma_t, models.lambda0);
    let x_bar = airframe_state(state);
    let y_bar = models.a_i.mul_vec(&x_bar);
    let phi_row = phi.row(0);
    let bracket =
        geom.v_lambda + a_tn * tau_t * (1.0 - (-geom.t_go / tau_t).exp()) + phi_row.dot(&y_bar);
    let drift = bracket * k;
    let control_gain = phi16 / models.coeffs.tau_s;
    let a_tn_cmd = target_normal_accel(a_t_cmd, state.gamma_t, models.lambda0);
    let target_term = tau_t * a_tn_cmd * psi(geom.t_go, tau_t);
    Ok(SigmaDotTerms {
        drift,
        control_gain,
        target_term,
        phi16,
        sigma_dot: drift + control_gain * delta_cmd + target_term,
    })
}

/// Drift decomposition of the sliding-surface derivative.
pub fn sigma_dot_terms(
    state: &EngagementState,
    geom: &RelGeometry,
    models: &LinearModels,
    delta_cmd: f64,
    a_t_cmd: f64,
) -> Result<SigmaDotTerms, AuthorityLoss> {
    let phi = models.phi(geom.t_go);
    sigma_dot_terms_with_phi(state, geom, models, &phi, delta_cmd, a_t_cmd)
}
