//! Scenario file schema and unit conversion.
//!
//! Config files use degrees and g at the boundary (suffixed keys make the
//! unit explicit); everything is converted to radians and m/s^2 on the way
//! in. Unknown keys are hard errors. Every field is optional; a missing
//! field takes the baked-in default, so `{}` is the full default scenario.

use serde::{Deserialize, Serialize};
use zemtwist::control::{AtsmcParams, ControlMode, LyapunovBounds};
use zemtwist::dynamics::PitchDisturbance;
use zemtwist::sim::{ScenarioConfig, STANDARD_GRAVITY};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioFile {
    pub initial: InitialFile,
    pub vehicle: VehicleFile,
    pub control: ControlFile,
    pub maneuver: ManeuverFile,
    pub uncertainty: UncertaintyFile,
    pub integrator: IntegratorFile,
    pub disturbance: DisturbanceFile,
    pub lyapunov: LyapunovFile,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialFile {
    pub r0_m: Option<f64>,
    pub lambda0_deg: Option<f64>,
    pub heading_error_deg: Option<f64>,
    pub gamma_t0_deg: Option<f64>,
    pub alpha0_deg: Option<f64>,
    pub q0_deg_s: Option<f64>,
    pub delta0_deg: Option<f64>,
    pub a_t0_g: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleFile {
    pub v_m_mps: Option<f64>,
    pub v_t_mps: Option<f64>,
    pub l_alpha_mps2: Option<f64>,
    pub l_delta_mps2: Option<f64>,
    pub m_alpha_per_s2: Option<f64>,
    pub m_q_per_s: Option<f64>,
    pub m_delta_per_s2: Option<f64>,
    pub tau_servo_s: Option<f64>,
    pub tau_target_s: Option<f64>,
    pub tau_uav_s: Option<f64>,
    pub a_m_max_g: Option<f64>,
    pub a_t_max_g: Option<f64>,
    pub delta_max_deg: Option<f64>,
    pub delta_rate_max_deg_s: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlFile {
    pub mode: Option<String>,
    pub mu: Option<f64>,
    pub mu_i: Option<f64>,
    pub gamma: Option<f64>,
    pub rho: Option<f64>,
    pub epsilon: Option<f64>,
    pub omega_bar: Option<f64>,
    pub eta: Option<f64>,
    pub beta_star: Option<f64>,
    pub beta_m: Option<f64>,
    pub beta_max: Option<f64>,
    pub beta0: Option<f64>,
    pub boundary_layer_m: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManeuverFile {
    pub period_s: Option<f64>,
    pub phase_s: Option<f64>,
    pub amplitude_g: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UncertaintyFile {
    pub fraction: Option<f64>,
    pub clip_sigmas: Option<f64>,
    pub tau_t_min_s: Option<f64>,
    pub tau_t_max_s: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorFile {
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub phi_table_step_s: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisturbanceFile {
    pub lift_mps2: Option<f64>,
    pub moment_rad_s2: Option<f64>,
    pub lift_bound_mps2: Option<f64>,
    pub moment_bound_rad_s2: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovFile {
    pub target_cmd_bound: Option<f64>,
    pub target_lag_bound: Option<f64>,
    pub model_error_bound: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid scenario file: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(#[from] zemtwist::sim::ConfigError),
    #[error("control.mode: {0}")]
    Mode(String),
}

impl ScenarioFile {
    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Materialize the full scenario, taking defaults for everything the
    /// file leaves out, and validate it.
    pub fn resolve(&self) -> Result<(ScenarioConfig, ScenarioFile), ConfigFileError> {
        let base = ScenarioConfig::default();
        let deg = |v: Option<f64>, dflt: f64| v.map_or(dflt, f64::to_radians);
        let gee = |v: Option<f64>, dflt: f64| v.map_or(dflt, |g| g * STANDARD_GRAVITY);
        let raw = |v: Option<f64>, dflt: f64| v.unwrap_or(dflt);

        let mut cfg = base;
        let i = &self.initial;
        cfg.initial.r0 = raw(i.r0_m, base.initial.r0);
        cfg.initial.lambda0 = deg(i.lambda0_deg, base.initial.lambda0);
        cfg.initial.heading_error = deg(i.heading_error_deg, base.initial.heading_error);
        cfg.initial.gamma_t0 = deg(i.gamma_t0_deg, base.initial.gamma_t0);
        cfg.initial.alpha0 = deg(i.alpha0_deg, base.initial.alpha0);
        cfg.initial.q0 = deg(i.q0_deg_s, base.initial.q0);
        cfg.initial.delta0 = deg(i.delta0_deg, base.initial.delta0);
        cfg.initial.a_t0 = gee(i.a_t0_g, base.initial.a_t0);

        let v = &self.vehicle;
        cfg.coeffs.v_m = raw(v.v_m_mps, base.coeffs.v_m);
        cfg.coeffs.v_t = raw(v.v_t_mps, base.coeffs.v_t);
        cfg.coeffs.l_alpha = raw(v.l_alpha_mps2, base.coeffs.l_alpha);
        cfg.coeffs.l_delta = raw(v.l_delta_mps2, base.coeffs.l_delta);
        cfg.coeffs.m_alpha = raw(v.m_alpha_per_s2, base.coeffs.m_alpha);
        cfg.coeffs.m_q = raw(v.m_q_per_s, base.coeffs.m_q);
        cfg.coeffs.m_delta = raw(v.m_delta_per_s2, base.coeffs.m_delta);
        cfg.coeffs.tau_s = raw(v.tau_servo_s, base.coeffs.tau_s);
        cfg.coeffs.tau_t = raw(v.tau_target_s, base.coeffs.tau_t);
        cfg.coeffs.tau_m = raw(v.tau_uav_s, base.coeffs.tau_m);
        cfg.coeffs.a_m_max = gee(v.a_m_max_g, base.coeffs.a_m_max);
        cfg.coeffs.a_t_max = gee(v.a_t_max_g, base.coeffs.a_t_max);
        cfg.coeffs.delta_max = deg(v.delta_max_deg, base.coeffs.delta_max);
        cfg.coeffs.delta_rate_max = deg(v.delta_rate_max_deg_s, base.coeffs.delta_rate_max);

        let c = &self.control;
        let base_p = AtsmcParams::default();
        cfg.control = AtsmcParams {
            mu: raw(c.mu, base_p.mu),
            mu_i: raw(c.mu_i, base_p.mu_i),
            gamma: raw(c.gamma, base_p.gamma),
            rho: raw(c.rho, base_p.rho),
            epsilon: raw(c.epsilon, base_p.epsilon),
            omega_bar: raw(c.omega_bar, base_p.omega_bar),
            eta: raw(c.eta, base_p.eta),
            beta_star: raw(c.beta_star, base_p.beta_star),
            beta_min: raw(c.beta_m, base_p.beta_min),
            beta_max: raw(c.beta_max, base_p.beta_max),
            beta0: raw(c.beta0, base_p.beta0),
            boundary_layer: raw(c.boundary_layer_m, base_p.boundary_layer),
        };
        cfg.mode = match &c.mode {
            Some(s) => s.parse::<ControlMode>().map_err(ConfigFileError::Mode)?,
            None => base.mode,
        };

        let m = &self.maneuver;
        cfg.maneuver.period = raw(m.period_s, base.maneuver.period);
        cfg.maneuver.phase = raw(m.phase_s, base.maneuver.phase);
        cfg.maneuver.amplitude = gee(m.amplitude_g, base.maneuver.amplitude);

        let u = &self.uncertainty;
        cfg.uncertainty.fraction = raw(u.fraction, base.uncertainty.fraction);
        cfg.uncertainty.clip_sigmas = raw(u.clip_sigmas, base.uncertainty.clip_sigmas);
        cfg.uncertainty.tau_t_range = (
            raw(u.tau_t_min_s, base.uncertainty.tau_t_range.0),
            raw(u.tau_t_max_s, base.uncertainty.tau_t_range.1),
        );
        cfg.uncertainty.seed = u.seed.unwrap_or(base.uncertainty.seed);

        let g = &self.integrator;
        cfg.integrator.dt = raw(g.dt, base.integrator.dt);
        cfg.integrator.t_max = raw(g.t_max, base.integrator.t_max);
        cfg.integrator.phi_table_step = g.phi_table_step_s.or(base.integrator.phi_table_step);

        let d = &self.disturbance;
        cfg.disturbance = PitchDisturbance {
            lift: raw(d.lift_mps2, base.disturbance.lift),
            moment: raw(d.moment_rad_s2, base.disturbance.moment),
        };
        cfg.disturbance_bounds = PitchDisturbance {
            lift: raw(d.lift_bound_mps2, base.disturbance_bounds.lift),
            moment: raw(d.moment_bound_rad_s2, base.disturbance_bounds.moment),
        };

        let l = &self.lyapunov;
        cfg.lyapunov_bounds = LyapunovBounds {
            target_cmd: raw(l.target_cmd_bound, base.lyapunov_bounds.target_cmd),
            target_lag: raw(l.target_lag_bound, base.lyapunov_bounds.target_lag),
            model_error: raw(l.model_error_bound, base.lyapunov_bounds.model_error),
        };

        cfg.validate()?;
        Ok((cfg, resolved_file(&cfg)))
    }
}

/// Serialize a scenario back into the file schema with every field
/// materialized; `parse(emit(cfg))` resolves to the same scenario.
pub fn resolved_file(cfg: &ScenarioConfig) -> ScenarioFile {
    let g = STANDARD_GRAVITY;
    ScenarioFile {
        initial: InitialFile {
            r0_m: Some(cfg.initial.r0),
            lambda0_deg: Some(cfg.initial.lambda0.to_degrees()),
            heading_error_deg: Some(cfg.initial.heading_error.to_degrees()),
            gamma_t0_deg: Some(cfg.initial.gamma_t0.to_degrees()),
            alpha0_deg: Some(cfg.initial.alpha0.to_degrees()),
            q0_deg_s: Some(cfg.initial.q0.to_degrees()),
            delta0_deg: Some(cfg.initial.delta0.to_degrees()),
            a_t0_g: Some(cfg.initial.a_t0 / g),
        },
        vehicle: VehicleFile {
            v_m_mps: Some(cfg.coeffs.v_m),
            v_t_mps: Some(cfg.coeffs.v_t),
            l_alpha_mps2: Some(cfg.coeffs.l_alpha),
            l_delta_mps2: Some(cfg.coeffs.l_delta),
            m_alpha_per_s2: Some(cfg.coeffs.m_alpha),
            m_q_per_s: Some(cfg.coeffs.m_q),
            m_delta_per_s2: Some(cfg.coeffs.m_delta),
            tau_servo_s: Some(cfg.coeffs.tau_s),
            tau_target_s: Some(cfg.coeffs.tau_t),
            tau_uav_s: Some(cfg.coeffs.tau_m),
            a_m_max_g: Some(cfg.coeffs.a_m_max / g),
            a_t_max_g: Some(cfg.coeffs.a_t_max / g),
            delta_max_deg: Some(cfg.coeffs.delta_max.to_degrees()),
            delta_rate_max_deg_s: Some(cfg.coeffs.delta_rate_max.to_degrees()),
        },
        control: ControlFile {
            mode: Some(cfg.mode.to_string()),
            mu: Some(cfg.control.mu),
            mu_i: Some(cfg.control.mu_i),
            gamma: Some(cfg.control.gamma),
            rho: Some(cfg.control.rho),
            epsilon: Some(cfg.control.epsilon),
            omega_bar: Some(cfg.control.omega_bar),
            eta: Some(cfg.control.eta),
            beta_star: Some(cfg.control.beta_star),
            beta_m: Some(cfg.control.beta_min),
            beta_max: Some(cfg.control.beta_max),
            beta0: Some(cfg.control.beta0),
            boundary_layer_m: Some(cfg.control.boundary_layer),
        },
        maneuver: ManeuverFile {
            period_s: Some(cfg.maneuver.period),
            phase_s: Some(cfg.maneuver.phase),
            amplitude_g: Some(cfg.maneuver.amplitude / g),
        },
        uncertainty: UncertaintyFile {
            fraction: Some(cfg.uncertainty.fraction),
            clip_sigmas: Some(cfg.uncertainty.clip_sigmas),
            tau_t_min_s: Some(cfg.uncertainty.tau_t_range.0),
            tau_t_max_s: Some(cfg.uncertainty.tau_t_range.1),
            seed: Some(cfg.uncertainty.seed),
        },
        integrator: IntegratorFile {
            dt: Some(cfg.integrator.dt),
            t_max: Some(cfg.integrator.t_max),
            phi_table_step_s: cfg.integrator.phi_table_step,
        },
        disturbance: DisturbanceFile {
            lift_mps2: Some(cfg.disturbance.lift),
            moment_rad_s2: Some(cfg.disturbance.moment),
            lift_bound_mps2: Some(cfg.disturbance_bounds.lift),
            moment_bound_rad_s2: Some(cfg.disturbance_bounds.moment),
        },
        lyapunov: LyapunovFile {
            target_cmd_bound: Some(cfg.lyapunov_bounds.target_cmd),
            target_lag_bound: Some(cfg.lyapunov_bounds.target_lag),
            model_error_bound: Some(cfg.lyapunov_bounds.model_error),
        },
    }
}
