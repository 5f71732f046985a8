//! Monte Carlo campaigns: seeded coefficient dispersion, paired runs across
//! controller modes, and order-independent statistics.

use crate::control::ControlMode;
use crate::dynamics::VehicleCoeffs;
use crate::sim::engage::{run_engagement_perturbed, TerminationReason, Trace};
use crate::sim::scenario::ScenarioConfig;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// splitmix64 finalizer; run i of a campaign draws its stream from the i-th
/// element of the splitmix sequence started at the campaign seed.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-run seed: element `i` of the splitmix64 stream seeded at `seed`.
pub fn run_seed(seed: u64, i: u64) -> u64 {
    splitmix64(seed.wrapping_add((i + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Plant perturbation for one Monte Carlo run. The controller never sees
/// these values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunDraw {
    pub plant: VehicleCoeffs,
    /// Maneuver phase, uniform in [0, period].
    pub phase: f64,
    pub seed: u64,
}

/// Draw one perturbed coefficient set. The five aero derivatives get
/// independent clipped normal relative errors; the target lag is uniform in
/// its configured range; everything else stays nominal. A zero fraction
/// disables all draws and returns the nominal set bit-exactly.
pub fn sample_coeffs(
    nominal: &VehicleCoeffs,
    uncertainty: &crate::sim::scenario::UncertaintyConfig,
    rng: &mut ChaCha8Rng,
) -> VehicleCoeffs {
    if uncertainty.fraction == 0.0 {
        return *nominal;
    }
    let clip = uncertainty.clip_sigmas;
    let mut draw = |nom: f64| {
        let z: f64 = StandardNormal.sample(rng);
        nom + uncertainty.fraction * nom.abs() * z.clamp(-clip, clip)
    };
    let mut out = *nominal;
    out.l_alpha = draw(nominal.l_alpha);
    out.l_delta = draw(nominal.l_delta);
    out.m_alpha = draw(nominal.m_alpha);
    out.m_q = draw(nominal.m_q);
    out.m_delta = draw(nominal.m_delta);
    out.tau_t = rng.random_range(uncertainty.tau_t_range.0..=uncertainty.tau_t_range.1);
    out
}

/// Materialize the per-run draws for a campaign. Draw order within a run is
/// fixed: five aero derivatives, target lag, maneuver phase.
pub fn campaign_draws(scenario: &ScenarioConfig, n: usize, seed: u64) -> Vec<RunDraw> {
    (0..n)
        .map(|i| {
            let rs = run_seed(seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(rs);
            let plant = sample_coeffs(&scenario.coeffs, &scenario.uncertainty, &mut rng);
            let phase = rng.random_range(0.0..=scenario.maneuver.period);
            RunDraw {
                plant,
                phase,
                seed: rs,
            }
        })
        .collect()
}

/// Reduced outcome of one run under one controller mode.
#[derive(Clone, Copy, Debug)]
pub struct RunOutcome {
    pub mode: ControlMode,
    pub miss: f64,
    pub intercept_time: f64,
    pub terminal_zem_overshoot: f64,
    pub canard_reversals: usize,
    pub diverged: bool,
    pub beta_min: f64,
    pub beta_max: f64,
    pub max_abs_delta: f64,
    pub max_abs_delta_cmd: f64,
    pub max_cmd_step: f64,
    pub max_abs_alpha: f64,
}

impl RunOutcome {
    fn from_trace(mode: ControlMode, trace: &Trace) -> Self {
        let (beta_min, beta_max) = trace.beta_range();
        RunOutcome {
            mode,
            miss: trace.terminal.miss_distance,
            intercept_time: trace.terminal.intercept_time,
            terminal_zem_overshoot: trace.terminal_zem_overshoot(0.5),
            canard_reversals: trace.canard_reversals(),
            diverged: trace.terminal.reason == TerminationReason::Diverged,
            beta_min,
            beta_max,
            max_abs_delta: trace.max_abs_delta(),
            max_abs_delta_cmd: trace.max_abs_delta_cmd(),
            max_cmd_step: trace.max_cmd_step(),
            max_abs_alpha: trace.max_abs_alpha(),
        }
    }
}

/// One campaign run: the shared draw plus the per-mode outcomes, index-aligned
/// with the requested mode list.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub index: usize,
    pub draw: RunDraw,
    pub outcomes: Vec<RunOutcome>,
}

/// Aggregate statistics for one mode over the completed runs.
#[derive(Clone, Copy, Debug)]
pub struct ModeStats {
    pub mode: ControlMode,
    pub completed: usize,
    pub diverged: usize,
    pub mean_miss: f64,
    pub median_miss: f64,
    pub std_miss: f64,
    pub max_miss: f64,
    /// Miss-distance quantiles over completed runs.
    pub q50: f64,
    pub q90: f64,
    pub q95: f64,
    pub mean_zem_overshoot: f64,
    pub mean_reversals: f64,
}

/// Full campaign output.
#[derive(Clone, Debug)]
pub struct CampaignResult {
    pub modes: Vec<ControlMode>,
    pub runs: Vec<RunRecord>,
    pub stats: Vec<ModeStats>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

fn mode_stats(mode: ControlMode, runs: &[RunRecord], mode_idx: usize) -> ModeStats {
    let outcomes: Vec<&RunOutcome> = runs.iter().map(|r| &r.outcomes[mode_idx]).collect();
    let completed: Vec<&&RunOutcome> = outcomes.iter().filter(|o| !o.diverged).collect();
    let diverged = outcomes.len() - completed.len();
    let mut misses: Vec<f64> = completed.iter().map(|o| o.miss).collect();
    misses.sort_by(|a, b| a.partial_cmp(b).expect("finite miss"));
    let n = misses.len();
    let mean = if n == 0 {
        f64::NAN
    } else {
        misses.iter().sum::<f64>() / n as f64
    };
    let std = if n < 2 {
        0.0
    } else {
        (misses.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    let mean_over = if n == 0 {
        f64::NAN
    } else {
        completed
            .iter()
            .map(|o| o.terminal_zem_overshoot)
            .sum::<f64>()
            / n as f64
    };
    let mean_rev = if n == 0 {
        f64::NAN
    } else {
        completed
            .iter()
            .map(|o| o.canard_reversals as f64)
            .sum::<f64>()
            / n as f64
    };
    ModeStats {
        mode,
        completed: n,
        diverged,
        mean_miss: mean,
        median_miss: quantile(&misses, 0.5),
        std_miss: std,
        max_miss: misses.last().copied().unwrap_or(f64::NAN),
        q50: quantile(&misses, 0.5),
        q90: quantile(&misses, 0.9),
        q95: quantile(&misses, 0.95),
        mean_zem_overshoot: mean_over,
        mean_reversals: mean_rev,
    }
}

/// Run a paired campaign: `n` independent draws, each flown once per mode on
/// the identical perturbed plant and maneuver phase. Runs execute in
/// parallel; statistics are computed from the index-ordered run list, so the
/// result is independent of scheduling.
pub fn monte_carlo(
    scenario: &ScenarioConfig,
    modes: &[ControlMode],
    n: usize,
    seed: u64,
) -> CampaignResult {
    assert!(n >= 1, "campaign needs at least one run");
    let draws = campaign_draws(scenario, n, seed);
    let runs: Vec<RunRecord> = draws
        .into_par_iter()
        .enumerate()
        .map(|(index, draw)| {
            let outcomes = modes
                .iter()
                .map(|&mode| {
                    let trace = run_engagement_perturbed(scenario, mode, &draw.plant, draw.phase);
                    RunOutcome::from_trace(mode, &trace)
                })
                .collect();
            RunRecord {
                index,
                draw,
                outcomes,
            }
        })
        .collect();
    let stats = modes
        .iter()
        .enumerate()
        .map(|(k, &mode)| mode_stats(mode, &runs, k))
        .collect();
    CampaignResult {
        modes: modes.to_vec(),
        runs,
        stats,
    }
}
