//! Nonlinear continuous-time models of the engagement.
//!
//! Planar conventions (X right, Z up in the engagement plane, gravity and
//! thrust ignored):
//! - pursuer velocity: `V_M (cos gamma_m, sin gamma_m)`
//! - target velocity:  `V_T (-cos gamma_t, sin gamma_t)` (mirrored, so
//!   `gamma_t = 0` is head-on)
//! - LOS angle `lambda` is measured to the pursuer-to-target ray.
//!
//! Under these conventions the closing and transverse speeds are
//! `V_r = -[V_M cos(gamma_m - lambda) + V_T cos(gamma_t + lambda)]` and
//! `V_lambda = -V_M sin(gamma_m - lambda) + V_T sin(gamma_t + lambda)`.

use thiserror::Error;

/// Terminal-proximity threshold [m]. Below it the kinematic rates blow up
/// and the run is handed to miss-distance extraction.
pub const RANGE_EPSILON: f64 = 0.5;

/// Full nonlinear state of pursuer, target, and relative geometry at one
/// instant. Angles in radians, positions in meters, time in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngagementState {
    /// Pursuer position [m].
    pub x_m: f64,
    pub z_m: f64,
    /// Target position [m].
    pub x_t: f64,
    pub z_t: f64,
    /// Flight-path angles [rad].
    pub gamma_m: f64,
    pub gamma_t: f64,
    /// Angle of attack [rad].
    pub alpha: f64,
    /// Pitch rate [rad/s].
    pub q: f64,
    /// Pitch angle [rad]; theta = gamma_m + alpha is a checked invariant,
    /// both sides are integrated.
    pub theta: f64,
    /// Canard deflection [rad].
    pub delta: f64,
    /// Target normal acceleration [m/s^2].
    pub a_t: f64,
    /// Time [s].
    pub t: f64,
}

/// Relative geometry derived from an [`EngagementState`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelGeometry {
    /// Range [m], always above [`RANGE_EPSILON`].
    pub r: f64,
    /// LOS angle [rad].
    pub lambda: f64,
    /// Closing-rate component [m/s]; negative while closing.
    pub v_r: f64,
    /// LOS-normal relative speed [m/s].
    pub v_lambda: f64,
    /// Time to go [s]; `-r / v_r`, clamped to 0 when `v_r >= 0`.
    pub t_go: f64,
}

/// Mass- and inertia-normalized vehicle coefficients.
///
/// Lift derivatives are in m/s^2 per rad, moment derivatives in 1/s^2 (alpha
/// and delta) and 1/s (q); the vehicle mass, inertia, thrust, and drag are
/// absorbed into them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleCoeffs {
    /// Pursuer speed [m/s] (constant).
    pub v_m: f64,
    /// Target speed [m/s] (constant; 0 models a stationary target).
    pub v_t: f64,
    /// Lift per angle of attack [m/s^2 / rad].
    pub l_alpha: f64,
    /// Lift per canard deflection [m/s^2 / rad].
    pub l_delta: f64,
    /// Total pitch stiffness [1/s^2]; includes the canard-at-alpha share,
    /// see [`uav_derivs`].
    pub m_alpha: f64,
    /// Pitch damping [1/s].
    pub m_q: f64,
    /// Canard pitch effectiveness [1/s^2].
    pub m_delta: f64,
    /// Canard servo time constant [s].
    pub tau_s: f64,
    /// Target acceleration lag [s].
    pub tau_t: f64,
    /// Pursuer guidance-level lag [s] (enters only the guidance-only model).
    pub tau_m: f64,
    /// Acceleration limits [m/s^2].
    pub a_m_max: f64,
    pub a_t_max: f64,
    /// Canard deflection limit [rad].
    pub delta_max: f64,
    /// Canard command slew limit [rad/s].
    pub delta_rate_max: f64,
}

/// Injectable aerodynamic shaping functions. Identity by default; nonlinear
/// tables can be substituted without touching the derivative code.
#[derive(Clone, Copy)]
pub struct AeroShaping {
    /// Lift vs angle of attack (f1).
    pub lift_alpha: fn(f64) -> f64,
    /// Lift vs canard deflection (f2).
    pub lift_delta: fn(f64) -> f64,
    /// Moment vs angle of attack (f3).
    pub moment_alpha: fn(f64) -> f64,
    /// Moment vs control-surface local incidence alpha + delta (f4).
    pub moment_surface: fn(f64) -> f64,
}

fn ident(x: f64) -> f64 {
    x
}

impl Default for AeroShaping {
    fn default() -> Self {
        AeroShaping {
            lift_alpha: ident,
            lift_delta: ident,
            moment_alpha: ident,
            moment_surface: ident,
        }
    }
}

impl std::fmt::Debug for AeroShaping {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("AeroShaping {..}")
    }
}

/// Constant pitch-channel disturbances: `lift` [m/s^2] adds to the normal
/// acceleration, `moment` [rad/s^2] to the pitch acceleration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PitchDisturbance {
    pub lift: f64,
    pub moment: f64,
}

impl PitchDisturbance {
    pub const ZERO: PitchDisturbance = PitchDisturbance {
        lift: 0.0,
        moment: 0.0,
    };
}

#[derive(Debug, Error, PartialEq)]
#[error("engagement terminal: range {range:.3} m below {RANGE_EPSILON} m")]
pub struct TerminalProximity {
    pub range: f64,
}

#[derive(Debug, Error, PartialEq)]
#[error("degenerate closing geometry: V_r = 0, t_go rate undefined")]
pub struct DegenerateClosing;

/// Relative geometry from positions, speeds, and flight-path angles.
///
/// A range at or below [`RANGE_EPSILON`] is an engagement-terminal signal,
/// not a fault; the caller hands the run to miss-distance extraction.
pub fn rel_geometry(
    state: &EngagementState,
    coeffs: &VehicleCoeffs,
) -> Result<RelGeometry, TerminalProximity> {
    let dx = state.x_t - state.x_m;
    let dz = state.z_t - state.z_m;
    let r = dx.hypot(dz);
    if r <= RANGE_EPSILON {
        return Err(TerminalProximity { range: r });
    }
    let lambda = dz.atan2(dx);
    let v_r = -(coeffs.v_m * (state.gamma_m - lambda).cos()
        + coeffs.v_t * (state.gamma_t + lambda).cos());
    let v_lambda =
        -coeffs.v_m * (state.gamma_m - lambda).sin() + coeffs.v_t * (state.gamma_t + lambda).sin();
    let t_go = if v_r < 0.0 { -r / v_r } else { 0.0 };
    Ok(RelGeometry {
        r,
        lambda,
        v_r,
        v_lambda,
        t_go,
    })
}

/// Target lag dynamics: rate of the achieved normal acceleration and of the
/// flight-path angle.
pub fn target_derivs(a_t: f64, a_t_cmd: f64, _gamma_t: f64, coeffs: &VehicleCoeffs) -> (f64, f64) {
    let a_t_dot = (a_t_cmd - a_t) / coeffs.tau_t;
    let gamma_t_dot = if coeffs.v_t > 0.0 {
        a_t / coeffs.v_t
    } else {
        0.0
    };
    (a_t_dot, gamma_t_dot)
}

/// Airframe rates produced by [`uav_derivs`].
#[derive(Clone, Copy, Debug)]
pub struct UavRates {
    pub alpha_dot: f64,
    pub q_dot: f64,
    pub theta_dot: f64,
    pub delta_dot: f64,
    pub gamma_m_dot: f64,
    /// Achieved normal acceleration [m/s^2], disturbance included.
    pub normal_accel: f64,
}

/// Short-period airframe dynamics with first-order canard servo.
///
/// Normal acceleration: `a_m = L_alpha f1(alpha) + L_delta f2(delta) + lift
/// disturbance`. Pitch acceleration: `M_alpha f3(alpha) + M_q q + M_delta
/// [f4(alpha + delta) - f4(alpha)] + moment disturbance`. The printed
/// `M_alpha` is the total static stiffness, so the canard surface term
/// contributes only its increment over the body share; with identity shaping
/// the model reduces exactly to the linear airframe matrix.
pub fn uav_derivs(
    state: &EngagementState,
    delta_cmd: f64,
    coeffs: &VehicleCoeffs,
    shaping: &AeroShaping,
    disturbance: &PitchDisturbance,
) -> UavRates {
    let lift = coeffs.l_alpha * (shaping.lift_alpha)(state.alpha)
        + coeffs.l_delta * (shaping.lift_delta)(state.delta);
    let a_m = lift + disturbance.lift;
    let surface =
        (shaping.moment_surface)(state.alpha + state.delta) - (shaping.moment_surface)(state.alpha);
    let q_dot = coeffs.m_alpha * (shaping.moment_alpha)(state.alpha)
        + coeffs.m_q * state.q
        + coeffs.m_delta * surface
        + disturbance.moment;
    UavRates {
        alpha_dot: state.q - a_m / coeffs.v_m,
        q_dot,
        theta_dot: state.q,
        delta_dot: (delta_cmd - state.delta) / coeffs.tau_s,
        gamma_m_dot: a_m / coeffs.v_m,
        normal_accel: a_m,
    }
}

/// Second-order LOS quantities used by the sliding-surface drift terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LosRates {
    pub lambda_ddot: f64,
    pub v_r_dot: f64,
    pub v_lambda_dot: f64,
    pub t_go_dot: f64,
}

/// LOS rate derivatives given the achieved normal accelerations.
pub fn los_rates(
    state: &EngagementState,
    geom: &RelGeometry,
    a_m: f64,
    a_t: f64,
) -> Result<LosRates, DegenerateClosing> {
    if geom.v_r == 0.0 {
        return Err(DegenerateClosing);
    }
    let r = geom.r;
    let v_r_dot = geom.v_lambda * geom.v_lambda / r
        + a_m * (state.gamma_m - geom.lambda).sin()
        + a_t * (state.gamma_t + geom.lambda).sin();
    let v_lambda_dot = -geom.v_lambda * geom.v_r / r - a_m * (state.gamma_m - geom.lambda).cos()
        + a_t * (state.gamma_t + geom.lambda).cos();
    let lambda_ddot = v_lambda_dot / r - geom.v_lambda * geom.v_r / (r * r);
    let t_go_dot = -1.0 + v_r_dot * r / (geom.v_r * geom.v_r);
    Ok(LosRates {
        lambda_ddot,
        v_r_dot,
        v_lambda_dot,
        t_go_dot,
    })
}

/// Full state derivative for the fixed-step integrator: position kinematics
/// of both vehicles plus target lag and airframe rates. Commands are held
/// constant over a step (zero-order hold by the caller).
#[derive(Clone, Copy, Debug)]
pub struct StateDerivs {
    pub x_m_dot: f64,
    pub z_m_dot: f64,
    pub x_t_dot: f64,
    pub z_t_dot: f64,
    pub gamma_m_dot: f64,
    pub gamma_t_dot: f64,
    pub alpha_dot: f64,
    pub q_dot: f64,
    pub theta_dot: f64,
    pub delta_dot: f64,
    pub a_t_dot: f64,
}

pub fn state_derivs(
    state: &EngagementState,
    delta_cmd: f64,
    a_t_cmd: f64,
    coeffs: &VehicleCoeffs,
    shaping: &AeroShaping,
    disturbance: &PitchDisturbance,
) -> StateDerivs {
    let uav = uav_derivs(state, delta_cmd, coeffs, shaping, disturbance);
    let (a_t_dot, gamma_t_dot) = target_derivs(state.a_t, a_t_cmd, state.gamma_t, coeffs);
    StateDerivs {
        x_m_dot: coeffs.v_m * state.gamma_m.cos(),
        z_m_dot: coeffs.v_m * state.gamma_m.sin(),
        x_t_dot: -coeffs.v_t * state.gamma_t.cos(),
        z_t_dot: coeffs.v_t * state.gamma_t.sin(),
        gamma_m_dot: uav.gamma_m_dot,
        gamma_t_dot,
        alpha_dot: uav.alpha_dot,
        q_dot: uav.q_dot,
        theta_dot: uav.theta_dot,
        delta_dot: uav.delta_dot,
        a_t_dot,
    }
}
