//! Single-engagement execution: RK4 propagation, termination detection, and
//! miss-distance extraction.

use crate::control::{ControlMode, Controller};
use crate::dynamics::{
    rel_geometry, state_derivs, AeroShaping, EngagementState, PitchDisturbance, RelGeometry,
    StateDerivs, VehicleCoeffs,
};
use crate::linmodel::{build_models, PhiProvider, PhiTable};
use crate::sim::scenario::{target_command, ScenarioConfig};

/// Why a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminationReason {
    /// Range fell below the terminal-proximity threshold.
    RangeMin,
    /// Closing rate changed sign (closest approach passed).
    ClosingRateSignFlip,
    /// Hard time limit.
    Timeout,
    /// Non-finite state; the trace is partial.
    Diverged,
}

impl TerminationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminationReason::RangeMin => "range-min",
            TerminationReason::ClosingRateSignFlip => "closing-sign-flip",
            TerminationReason::Timeout => "timeout",
            TerminationReason::Diverged => "diverged",
        }
    }
}

/// One record per control step.
#[derive(Clone, Copy, Debug)]
pub struct TraceSample {
    pub t: f64,
    pub state: EngagementState,
    pub geom: RelGeometry,
    /// ZEM of the integrated formulation [m].
    pub z_i: f64,
    /// Sliding surface value [m] (equal to the ZEM by construction).
    pub sigma: f64,
    pub beta: f64,
    pub delta: f64,
    pub delta_cmd: f64,
    pub a_t_cmd: f64,
}

/// Terminal summary of a run.
#[derive(Clone, Copy, Debug)]
pub struct TerminalRecord {
    /// Minimum range, refined by quadratic interpolation of r^2 [m].
    pub miss_distance: f64,
    /// Time of closest approach [s].
    pub intercept_time: f64,
    pub reason: TerminationReason,
}

/// Guard stripped from the end of the trace by the terminal-ZEM-overshoot
/// metric [s].
pub const TERMINAL_GUARD: f64 = 0.1;

/// Time-indexed record of one engagement.
#[derive(Clone, Debug)]
pub struct Trace {
    pub samples: Vec<TraceSample>,
    pub terminal: TerminalRecord,
}

impl Trace {
    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Direction reversals of the command increment; chattering proxy.
    pub fn canard_reversals(&self) -> usize {
        let mut count = 0;
        let mut prev_step: Option<f64> = None;
        for pair in self.samples.windows(2) {
            let step = pair[1].delta_cmd - pair[0].delta_cmd;
            if let Some(p) = prev_step {
                if p * step < 0.0 {
                    count += 1;
                }
            }
            if step != 0.0 {
                prev_step = Some(step);
            }
        }
        count
    }

    /// Max |ZEM| over the final `window` seconds of the trace, excluding the
    /// last [`TERMINAL_GUARD`] seconds. Inside the guard t_go vanishes, the
    /// canard has no authority left, and the ZEM expression degenerates to a
    /// flyby-geometry artifact (it scales like r V_lambda / V_r as V_r
    /// crosses zero), so those samples say nothing about control quality.
    pub fn terminal_zem_overshoot(&self, window: f64) -> f64 {
        let end = match self.samples.last() {
            Some(s) => s.t,
            None => return 0.0,
        };
        self.samples
            .iter()
            .filter(|s| s.t >= end - window && s.t <= end - TERMINAL_GUARD)
            .map(|s| s.z_i.abs())
            .fold(0.0, f64::max)
    }

    /// Time average of the gain over the trace.
    pub fn mean_beta(&self) -> f64 {
        if self.samples.len() < 2 {
            return self.samples.first().map_or(0.0, |s| s.beta);
        }
        // trapezoid on the uniform grid
        let mut acc = 0.0;
        for pair in self.samples.windows(2) {
            acc += 0.5 * (pair[0].beta + pair[1].beta) * (pair[1].t - pair[0].t);
        }
        acc / self.duration()
    }

    pub fn max_abs_delta(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.delta.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_delta_cmd(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.delta_cmd.abs())
            .fold(0.0, f64::max)
    }

    /// Largest per-step command change [rad].
    pub fn max_cmd_step(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|p| (p[1].delta_cmd - p[0].delta_cmd).abs())
            .fold(0.0, f64::max)
    }

    pub fn beta_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.samples {
            lo = lo.min(s.beta);
            hi = hi.max(s.beta);
        }
        (lo, hi)
    }

    pub fn max_abs_alpha(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.state.alpha.abs())
            .fold(0.0, f64::max)
    }
}

/// Classical RK4 update with zero-order-hold commands.
pub fn step(
    state: &EngagementState,
    delta_cmd: f64,
    a_t_cmd: f64,
    coeffs: &VehicleCoeffs,
    shaping: &AeroShaping,
    disturbance: &PitchDisturbance,
    dt: f64,
) -> EngagementState {
    let eval =
        |s: &EngagementState| state_derivs(s, delta_cmd, a_t_cmd, coeffs, shaping, disturbance);
    let k1 = eval(state);
    let k2 = eval(&advance(state, &k1, dt / 2.0));
    let k3 = eval(&advance(state, &k2, dt / 2.0));
    let k4 = eval(&advance(state, &k3, dt));
    let mut next = *state;
    next.x_m += dt / 6.0 * (k1.x_m_dot + 2.0 * k2.x_m_dot + 2.0 * k3.x_m_dot + k4.x_m_dot);
    next.z_m += dt / 6.0 * (k1.z_m_dot + 2.0 * k2.z_m_dot + 2.0 * k3.z_m_dot + k4.z_m_dot);
    next.x_t += dt / 6.0 * (k1.x_t_dot + 2.0 * k2.x_t_dot + 2.0 * k3.x_t_dot + k4.x_t_dot);
    next.z_t += dt / 6.0 * (k1.z_t_dot + 2.0 * k2.z_t_dot + 2.0 * k3.z_t_dot + k4.z_t_dot);
    next.gamma_m +=
        dt / 6.0 * (k1.gamma_m_dot + 2.0 * k2.gamma_m_dot + 2.0 * k3.gamma_m_dot + k4.gamma_m_dot);
    next.gamma_t +=
        dt / 6.0 * (k1.gamma_t_dot + 2.0 * k2.gamma_t_dot + 2.0 * k3.gamma_t_dot + k4.gamma_t_dot);
    next.alpha +=
        dt / 6.0 * (k1.alpha_dot + 2.0 * k2.alpha_dot + 2.0 * k3.alpha_dot + k4.alpha_dot);
    next.q += dt / 6.0 * (k1.q_dot + 2.0 * k2.q_dot + 2.0 * k3.q_dot + k4.q_dot);
    next.theta +=
        dt / 6.0 * (k1.theta_dot + 2.0 * k2.theta_dot + 2.0 * k3.theta_dot + k4.theta_dot);
    next.delta +=
        dt / 6.0 * (k1.delta_dot + 2.0 * k2.delta_dot + 2.0 * k3.delta_dot + k4.delta_dot);
    next.a_t += dt / 6.0 * (k1.a_t_dot + 2.0 * k2.a_t_dot + 2.0 * k3.a_t_dot + k4.a_t_dot);
    next.t += dt;
    next
}

fn advance(state: &EngagementState, d: &StateDerivs, h: f64) -> EngagementState {
    EngagementState {
        x_m: state.x_m + h * d.x_m_dot,
        z_m: state.z_m + h * d.z_m_dot,
        x_t: state.x_t + h * d.x_t_dot,
        z_t: state.z_t + h * d.z_t_dot,
        gamma_m: state.gamma_m + h * d.gamma_m_dot,
        gamma_t: state.gamma_t + h * d.gamma_t_dot,
        alpha: state.alpha + h * d.alpha_dot,
        q: state.q + h * d.q_dot,
        theta: state.theta + h * d.theta_dot,
        delta: state.delta + h * d.delta_dot,
        a_t: state.a_t + h * d.a_t_dot,
        t: state.t,
    }
}

/// Integration-health check: finite, and the rotational states inside a
/// bound three orders beyond anything physical. A stiff-lag instability
/// doubles every step, so it crosses this guard long before f64 overflow.
fn state_is_sane(s: &EngagementState) -> bool {
    const ROT_GUARD: f64 = 1e3;
    let finite = [
        s.x_m, s.z_m, s.x_t, s.z_t, s.gamma_m, s.gamma_t, s.alpha, s.q, s.theta, s.delta, s.a_t,
    ]
    .iter()
    .all(|v| v.is_finite());
    finite
        && s.alpha.abs() <= ROT_GUARD
        && s.q.abs() <= ROT_GUARD
        && s.gamma_m.abs() <= ROT_GUARD
        && s.delta.abs() <= ROT_GUARD
}

/// Minimum of the sampled range history, refined by fitting a parabola to
/// r^2 over the three samples bracketing the minimum. r^2 is exactly
/// quadratic in time for a constant-velocity flyby, so the fit recovers
/// sub-sample misses that plain r interpolation cannot.
fn extract_miss(history: &[(f64, f64)]) -> (f64, f64) {
    assert!(!history.is_empty());
    let mut i_min = 0;
    for (i, &(_, r)) in history.iter().enumerate() {
        if r < history[i_min].1 {
            i_min = i;
        }
    }
    if history.len() < 3 {
        return (history[i_min].1, history[i_min].0);
    }
    // bracket: interior minimum if available, otherwise the trailing three
    // samples (termination can cut the pass short of the true vertex)
    let lo = if i_min == 0 {
        0
    } else if i_min == history.len() - 1 {
        history.len() - 3
    } else {
        i_min - 1
    };
    let (t0, r0) = history[lo];
    let (t1, r1) = history[lo + 1];
    let (t2, r2) = history[lo + 2];
    let (y0, y1, y2) = (r0 * r0, r1 * r1, r2 * r2);
    // Lagrange parabola through (t - t1, y); uniform or near-uniform grid
    let h0 = t0 - t1;
    let h2 = t2 - t1;
    let denom = h0 * h2 * (h0 - h2);
    if denom == 0.0 {
        return (history[i_min].1, history[i_min].0);
    }
    let a = (h2 * (y0 - y1) - h0 * (y2 - y1)) / denom;
    let b = (h0 * h0 * (y2 - y1) - h2 * h2 * (y0 - y1)) / denom;
    if a <= 0.0 {
        return (history[i_min].1, history[i_min].0);
    }
    let tv = -b / (2.0 * a);
    let yv = y1 + b * tv + a * tv * tv;
    // keep the vertex within one step of the bracket; otherwise trust samples
    let span = (t2 - t0).abs();
    if tv.abs() > span {
        return (history[i_min].1, history[i_min].0);
    }
    (yv.max(0.0).sqrt(), t1 + tv)
}

/// Run one engagement with an explicitly perturbed plant; the controller
/// always sees the scenario's nominal coefficients and models.
pub fn run_engagement_perturbed(
    scenario: &ScenarioConfig,
    mode: ControlMode,
    plant: &VehicleCoeffs,
    maneuver_phase: f64,
) -> Trace {
    let dt = scenario.integrator.dt;
    let models = build_models(
        &scenario.coeffs,
        scenario.initial_heading(),
        scenario.initial.lambda0,
    );
    let provider = match scenario.integrator.phi_table_step {
        Some(step) => {
            let initial = scenario.initial_state();
            let t_go_cap = match rel_geometry(&initial, &scenario.coeffs) {
                Ok(g) => (g.t_go * 1.5).max(1.0),
                Err(_) => 1.0,
            };
            PhiProvider::Table(PhiTable::new(&models, t_go_cap, step))
        }
        None => PhiProvider::Exact,
    };
    let mut controller = Controller::new(mode, scenario.control).with_phi_provider(provider);
    let maneuver = crate::sim::scenario::ManeuverSchedule {
        phase: maneuver_phase,
        ..scenario.maneuver
    };
    let shaping = AeroShaping::default();

    let mut state = scenario.initial_state();
    let mut samples = Vec::with_capacity((scenario.integrator.t_max / dt) as usize + 1);
    let mut r_history: Vec<(f64, f64)> = Vec::with_capacity(samples.capacity());
    let mut reason = TerminationReason::Timeout;

    while state.t <= scenario.integrator.t_max {
        let geom = match rel_geometry(&state, &scenario.coeffs) {
            Ok(g) => g,
            Err(terminal) => {
                r_history.push((state.t, terminal.range));
                reason = TerminationReason::RangeMin;
                break;
            }
        };
        r_history.push((state.t, geom.r));
        if geom.v_r >= 0.0 {
            reason = TerminationReason::ClosingRateSignFlip;
            break;
        }

        let out = controller.step(&state, &geom, &models, dt);
        let a_t_cmd = target_command(state.t, &maneuver);
        samples.push(TraceSample {
            t: state.t,
            state,
            geom,
            z_i: out.zem.z,
            sigma: out.sigma,
            beta: out.beta,
            delta: state.delta,
            delta_cmd: out.delta_cmd,
            a_t_cmd,
        });

        let next = step(
            &state,
            out.delta_cmd,
            a_t_cmd,
            plant,
            &shaping,
            &scenario.disturbance,
            dt,
        );
        if !state_is_sane(&next) {
            reason = TerminationReason::Diverged;
            break;
        }
        state = next;
    }

    let (miss_distance, intercept_time) = extract_miss(&r_history);
    Trace {
        samples,
        terminal: TerminalRecord {
            miss_distance,
            intercept_time,
            reason,
        },
    }
}

/// Run one engagement with the nominal plant.
pub fn run_engagement(scenario: &ScenarioConfig, mode: ControlMode) -> Trace {
    run_engagement_perturbed(scenario, mode, &scenario.coeffs, scenario.maneuver.phase)
}
