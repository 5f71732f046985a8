//! Emission of plot-ready artifacts: trace tables, campaign tables, and the
//! run manifest that ties them together.
//!
//! All tables are CSV with a `#`-prefixed header block carrying the manifest
//! hash; column names carry their units. Floats are written in shortest
//! round-trip form, so identical runs produce byte-identical files.

use crate::config::ScenarioFile;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;
use zemtwist::sim::{CampaignResult, RunDraw, Trace};

/// Everything needed to reproduce the outputs exactly, plus bookkeeping.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub modes: Vec<String>,
    pub seed: u64,
    pub runs: Option<usize>,
    pub scenario: ScenarioFile,
    pub outputs: Vec<String>,
    /// Hash over the reproducibility-relevant manifest content (this field
    /// and `duration_s` zeroed); every emitted table references it.
    pub manifest_sha256: String,
    /// Wall-clock bookkeeping; excluded from the hash so reruns of the same
    /// scenario produce identical data files.
    pub duration_s: f64,
}

impl RunManifest {
    pub fn new(
        command: &str,
        modes: &[String],
        seed: u64,
        runs: Option<usize>,
        scenario: ScenarioFile,
        outputs: Vec<String>,
    ) -> Self {
        let mut manifest = RunManifest {
            schema_version: 1,
            tool: "zemtwist".to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            modes: modes.to_vec(),
            seed,
            runs,
            scenario,
            outputs,
            manifest_sha256: String::new(),
            duration_s: 0.0,
        };
        manifest.manifest_sha256 = manifest.reproducibility_hash();
        manifest
    }

    fn reproducibility_hash(&self) -> String {
        let mut hashable = self.clone();
        hashable.manifest_sha256 = String::new();
        hashable.duration_s = 0.0;
        let bytes = serde_json::to_vec(&hashable).expect("manifest serializes");
        let digest = Sha256::digest(&bytes);
        let mut hex = String::with_capacity(64);
        for b in digest {
            write!(hex, "{b:02x}").expect("write to string");
        }
        hex
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n")
    }
}

const TRACE_COLUMNS: &str = "t_s,x_m_m,z_m_m,x_t_m,z_t_m,gamma_m_rad,gamma_t_rad,alpha_rad,\
q_rad_s,theta_rad,delta_rad,a_t_mps2,r_m,lambda_rad,v_r_mps,v_lambda_mps,t_go_s,z_i_m,sigma_m,\
beta,delta_cmd_rad,a_t_cmd_mps2";

/// One engagement trace as CSV.
pub fn trace_csv(trace: &Trace, mode: &str, manifest_hash: &str) -> String {
    let mut out = String::with_capacity(trace.samples.len() * 200);
    out.push_str("# zemtwist trace v1\n");
    let _ = writeln!(out, "# manifest_sha256: {manifest_hash}");
    let _ = writeln!(out, "# mode: {mode}");
    let _ = writeln!(
        out,
        "# terminal: miss_m={} intercept_time_s={} reason={}",
        trace.terminal.miss_distance,
        trace.terminal.intercept_time,
        trace.terminal.reason.as_str()
    );
    out.push_str(TRACE_COLUMNS);
    out.push('\n');
    for s in &trace.samples {
        let st = &s.state;
        let g = &s.geom;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.t,
            st.x_m,
            st.z_m,
            st.x_t,
            st.z_t,
            st.gamma_m,
            st.gamma_t,
            st.alpha,
            st.q,
            st.theta,
            st.delta,
            st.a_t,
            g.r,
            g.lambda,
            g.v_r,
            g.v_lambda,
            g.t_go,
            s.z_i,
            s.sigma,
            s.beta,
            s.delta_cmd,
            s.a_t_cmd
        );
    }
    out
}

/// Side-by-side controller summary (one row per mode).
pub fn compare_summary_csv(rows: &[(String, &Trace)], manifest_hash: &str) -> String {
    let mut out = String::new();
    out.push_str("# zemtwist compare summary v1\n");
    let _ = writeln!(out, "# manifest_sha256: {manifest_hash}");
    out.push_str(
        "mode,miss_m,intercept_time_s,terminal_zem_overshoot_m,canard_reversals,\
         max_delta_deg,termination\n",
    );
    for (mode, trace) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            mode,
            trace.terminal.miss_distance,
            trace.terminal.intercept_time,
            trace.terminal_zem_overshoot(0.5),
            trace.canard_reversals(),
            trace.max_abs_delta().to_degrees(),
            trace.terminal.reason.as_str()
        );
    }
    out
}

/// Per-run campaign results, one row per (run, mode).
pub fn campaign_runs_csv(result: &CampaignResult, manifest_hash: &str) -> String {
    let mut out = String::new();
    out.push_str("# zemtwist campaign runs v1\n");
    let _ = writeln!(out, "# manifest_sha256: {manifest_hash}");
    out.push_str(
        "run,run_seed,phase_s,mode,miss_m,intercept_time_s,terminal_zem_overshoot_m,\
         canard_reversals,diverged\n",
    );
    for run in &result.runs {
        for o in &run.outcomes {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                run.index,
                run.draw.seed,
                run.draw.phase,
                o.mode,
                o.miss,
                o.intercept_time,
                o.terminal_zem_overshoot,
                o.canard_reversals,
                o.diverged
            );
        }
    }
    out
}

/// Aggregate statistics, one row per mode.
pub fn campaign_stats_csv(result: &CampaignResult, manifest_hash: &str) -> String {
    let mut out = String::new();
    out.push_str("# zemtwist campaign stats v1\n");
    let _ = writeln!(out, "# manifest_sha256: {manifest_hash}");
    out.push_str(
        "mode,completed,diverged,mean_miss_m,median_miss_m,std_miss_m,max_miss_m,\
         q50_miss_m,q90_miss_m,q95_miss_m,mean_terminal_zem_overshoot_m,mean_canard_reversals\n",
    );
    for s in &result.stats {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            s.mode,
            s.completed,
            s.diverged,
            s.mean_miss,
            s.median_miss,
            s.std_miss,
            s.max_miss,
            s.q50,
            s.q90,
            s.q95,
            s.mean_zem_overshoot,
            s.mean_reversals
        );
    }
    out
}

/// Sampled plant coefficients, one row per run (histogram source data).
pub fn campaign_coefficients_csv(draws: &[RunDraw], manifest_hash: &str) -> String {
    let mut out = String::new();
    out.push_str("# zemtwist campaign coefficients v1\n");
    let _ = writeln!(out, "# manifest_sha256: {manifest_hash}");
    out.push_str("run,l_alpha_mps2,l_delta_mps2,m_alpha_per_s2,m_q_per_s,m_delta_per_s2,tau_t_s\n");
    for (i, d) in draws.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            i,
            d.plant.l_alpha,
            d.plant.l_delta,
            d.plant.m_alpha,
            d.plant.m_q,
            d.plant.m_delta,
            d.plant.tau_t
        );
    }
    out
}
