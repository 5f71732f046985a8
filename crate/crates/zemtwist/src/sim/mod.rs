//! Engagement execution: scenario configuration, fixed-step integration,
//! termination and miss extraction, and Monte Carlo campaigns.

mod campaign;
mod engage;
mod scenario;

pub use campaign::{
    campaign_draws, monte_carlo, run_seed, sample_coeffs, splitmix64, CampaignResult, ModeStats,
    RunDraw, RunOutcome, RunRecord,
};
pub use engage::{
    run_engagement, run_engagement_perturbed, step, TerminalRecord, TerminationReason, Trace,
    TraceSample, TERMINAL_GUARD,
};
pub use scenario::{
    nominal_coeffs, target_command, ConfigError, InitialGeometry, IntegratorConfig,
    ManeuverSchedule, ScenarioConfig, UncertaintyConfig, STANDARD_GRAVITY,
};
