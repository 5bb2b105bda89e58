//! Single runs: build the fields, propagate, summarize, write files.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use nullpass_core::{propagate, StateVector, Trajectory};
use serde::{Deserialize, Serialize};

use crate::cnum::{from_slice, CNum};
use crate::error::{AppError, EXIT_BOUNDS, EXIT_OK};
use crate::scenario::{Bounds, Built, Scenario};

/// Design diagnostics as written to the summary (one-based indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSummary {
    pub mode: String,
    pub feasible: bool,
    pub eta: CNum,
    pub pruned_pumps: Vec<usize>,
    pub effective_target_dipoles: Vec<CNum>,
    pub det_check: CNum,
    pub selected_rows: Vec<usize>,
    pub notes: Vec<String>,
    /// Designed pump pulses `(Ẽ_Pk, φ_Pk)`, design mode only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pump_pulses: Vec<[f64; 2]>,
    pub peak_rabi_pump: Vec<CNum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub satisfied: bool,
    pub residual: f64,
    pub eta_fit: CNum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub max_p_x: f64,
    pub max_p_y: f64,
    pub final_p_f: f64,
    pub final_p0: f64,
    pub max_norm_error: f64,
    pub samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsCheck {
    pub declared: Bounds,
    pub passed: bool,
    pub violations: Vec<String>,
}

/// Deterministic summary of one run. Wall-clock data lives in [`Timing`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub config_hash: String,
    pub n_intermediate: usize,
    pub n_degenerate: usize,
    pub design: DesignSummary,
    pub verify: VerifySummary,
    pub summary: TrajectorySummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsCheck>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_s: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub trajectory: Trajectory,
    pub timing: Timing,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        match &self.record.bounds {
            Some(b) if !b.passed => EXIT_BOUNDS,
            _ => EXIT_OK,
        }
    }
}

pub fn design_summary(scenario: &Scenario, built: &Built) -> DesignSummary {
    let r = &built.report;
    DesignSummary {
        mode: scenario.source.mode().to_string(),
        feasible: r.feasible,
        eta: CNum(r.eta),
        pruned_pumps: r.pruned_pumps.iter().map(|k| k + 1).collect(),
        effective_target_dipoles: from_slice(r.effective_target_dipoles.iter()),
        det_check: CNum(r.det_check),
        selected_rows: r.selected_rows.iter().map(|k| k + 1).collect(),
        notes: r.notes.clone(),
        pump_pulses: built
            .design
            .as_ref()
            .map(|d| d.pump_pulses.iter().map(|p| [p.peak_field, p.phase]).collect())
            .unwrap_or_default(),
        peak_rabi_pump: from_slice(built.fields.peak_rabi_pump.iter()),
    }
}

pub fn verify_summary(built: &Built) -> VerifySummary {
    VerifySummary {
        satisfied: built.verify.satisfied,
        residual: built.verify.residual,
        eta_fit: CNum(built.verify.eta_fit),
    }
}

fn check_bounds(b: &Bounds, s: &TrajectorySummary) -> BoundsCheck {
    let mut violations = Vec::new();
    if let Some(limit) = b.max_p_x {
        if !(s.max_p_x < limit) {
            violations.push(format!("max P_x = {:e} is not below {limit:e}", s.max_p_x));
        }
    }
    if let Some(limit) = b.max_p_y {
        if !(s.max_p_y < limit) {
            violations.push(format!("max P_y = {:e} is not below {limit:e}", s.max_p_y));
        }
    }
    if let Some(limit) = b.min_final_p_f {
        if !(s.final_p_f >= limit) {
            violations.push(format!("final P_f = {} is below {limit}", s.final_p_f));
        }
    }
    BoundsCheck {
        declared: *b,
        passed: violations.is_empty(),
        violations,
    }
}

/// Design (or verify), propagate from `|0⟩` and summarize.
pub fn run(scenario: &Scenario) -> Result<RunOutcome, AppError> {
    let clock = Instant::now();
    let started_unix_s = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let built = scenario.build()?;
    let config = &scenario.propagation;
    let initial = StateVector::initial(built.fields.dim(), config.t_start * built.fields.width);
    let traj = propagate(&scenario.system, &built.fields, &scenario.target, &initial, config)?;

    let summary = TrajectorySummary {
        max_p_x: traj.max_p_x(),
        max_p_y: traj.max_p_y(),
        final_p_f: traj.final_p_f(),
        final_p0: traj.populations.last().map(|p| p[0]).unwrap_or(1.0),
        max_norm_error: traj.max_norm_error(),
        samples: traj.times.len(),
        accepted_steps: traj.stats.accepted,
        rejected_steps: traj.stats.rejected,
        evaluations: traj.stats.evaluations,
    };
    let mut warnings = traj.warnings.clone();
    if !built.verify.satisfied {
        warnings.push(format!(
            "fields violate the design condition (residual {:e}); no null state guarantees the transfer",
            built.verify.residual
        ));
    }
    let record = RunRecord {
        label: scenario.label.clone(),
        config_hash: scenario.config_hash(),
        n_intermediate: scenario.n_intermediate(),
        n_degenerate: scenario.n_degenerate(),
        design: design_summary(scenario, &built),
        verify: verify_summary(&built),
        bounds: scenario.bounds.as_ref().map(|b| check_bounds(b, &summary)),
        summary,
        warnings,
    };
    Ok(RunOutcome {
        record,
        trajectory: traj,
        timing: Timing {
            started_unix_s,
            elapsed_s: clock.elapsed().as_secs_f64(),
        },
    })
}

/// Shortest round-trip formatting, switching to exponent form for very small
/// or very large magnitudes so that columns stay readable.
pub struct Compact(pub f64);

impl fmt::Display for Compact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || (1e-3..1e7).contains(&a) || !a.is_finite() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

/// Trajectory table: `t_over_T, p0, p_i1..p_iN, p_f1..p_fM, P_x, P_y, P_f, norm_err`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.n_intermediate;
    let m = traj.populations.first().map(|p| p.len() - 1 - n).unwrap_or(0);
    let mut out = String::from("t_over_T,p0");
    for k in 1..=n {
        let _ = write!(out, ",p_i{k}");
    }
    for j in 1..=m {
        let _ = write!(out, ",p_f{j}");
    }
    out.push_str(",P_x,P_y,P_f,norm_err\n");
    for i in 0..traj.times.len() {
        let _ = write!(out, "{}", traj.times[i]);
        for p in &traj.populations[i] {
            let _ = write!(out, ",{}", Compact(*p));
        }
        let _ = writeln!(
            out,
            ",{},{},{},{}",
            Compact(traj.p_x[i]),
            Compact(traj.p_y[i]),
            Compact(traj.p_f[i]),
            Compact(traj.norm_error[i])
        );
    }
    out
}

#[derive(Debug, Clone)]
pub struct WrittenFiles {
    pub trajectory: PathBuf,
    pub summary: PathBuf,
    pub timing: PathBuf,
}

pub fn summary_json(record: &RunRecord) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("records always serialize");
    s.push('\n');
    s
}

/// Writes `<label>.csv`, `<label>.summary.json` and `<label>.timing.json`.
pub fn write_outputs(dir: &Path, outcome: &RunOutcome) -> Result<WrittenFiles, AppError> {
    std::fs::create_dir_all(dir)?;
    let label = &outcome.record.label;
    let files = WrittenFiles {
        trajectory: dir.join(format!("{label}.csv")),
        summary: dir.join(format!("{label}.summary.json")),
        timing: dir.join(format!("{label}.timing.json")),
    };
    std::fs::write(&files.trajectory, trajectory_csv(&outcome.trajectory))?;
    std::fs::write(&files.summary, summary_json(&outcome.record))?;
    std::fs::write(&files.timing, serde_json::to_string_pretty(&outcome.timing)? + "\n")?;
    Ok(files)
}
