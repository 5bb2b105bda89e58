//! One-parameter sweeps, run in parallel and reported in value order.

use std::fmt::Write as _;
use std::path::Path;

use nullpass_core::{condition_pumps, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::AppError;
use crate::run::{run, write_outputs, Compact, RunRecord};
use crate::scenario::{FieldSource, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "axis")]
pub enum Axis {
    /// Multiplies the pulse width; peak Rabi amplitudes stay fixed, so every
    /// pulse area `Ω̃·T` scales with it.
    Width,
    /// Multiplies every field amplitude.
    AmplitudeScale,
    /// Adds a phase (radians) to one pump, zero-based index.
    PhasePerturbation { pump: usize },
    /// Rebuilds the pumps from the design condition with this `η`.
    Eta,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Width => "width",
            Axis::AmplitudeScale => "amplitude-scale",
            Axis::PhasePerturbation { .. } => "phase-perturbation",
            Axis::Eta => "eta",
        }
    }

    /// Parses the command-line axis name; `pump` is one-based.
    pub fn parse(name: &str, pump: Option<usize>) -> Result<Self, AppError> {
        match name {
            "width" => Ok(Axis::Width),
            "amplitude-scale" => Ok(Axis::AmplitudeScale),
            "eta" => Ok(Axis::Eta),
            "phase-perturbation" => match pump {
                Some(k) if k >= 1 => Ok(Axis::PhasePerturbation { pump: k - 1 }),
                _ => Err(AppError::scenario("phase-perturbation needs --pump <k> (one-based)")),
            },
            other => Err(AppError::scenario(format!(
                "unknown axis `{other}` (width, amplitude-scale, phase-perturbation, eta)"
            ))),
        }
    }
}

/// The scenario with one axis value applied.
pub fn apply_axis(base: &Scenario, axis: Axis, value: f64) -> Result<Scenario, AppError> {
    if !value.is_finite() {
        return Err(AppError::scenario(format!("sweep value {value} is not finite")));
    }
    let mut s = base.clone();
    s.label = format!("{}__{}_{}", base.label, axis.name(), value);
    match axis {
        Axis::Width => {
            if !(value > 0.0) {
                return Err(AppError::scenario("width factor must be positive"));
            }
            match &mut s.source {
                FieldSource::Direct(f) => f.width *= value,
                FieldSource::Design { width, .. } => *width *= value,
                FieldSource::Pulses { pumps, stokes } => {
                    for p in pumps.iter_mut().chain(stokes.iter_mut()) {
                        p.width *= value;
                        p.delay *= value;
                    }
                }
            }
        }
        Axis::AmplitudeScale => {
            if !(value >= 0.0) {
                return Err(AppError::scenario("amplitude scale must be nonnegative"));
            }
            match &mut s.source {
                FieldSource::Direct(f) => *f = f.scaled(value),
                FieldSource::Design { drives, .. } => drives.iter_mut().for_each(|d| d.peak_field *= value),
                FieldSource::Pulses { pumps, stokes } => pumps
                    .iter_mut()
                    .chain(stokes.iter_mut())
                    .for_each(|p| p.peak_field *= value),
            }
        }
        Axis::PhasePerturbation { pump } => {
            let n = s.n_intermediate();
            if pump >= n {
                return Err(AppError::scenario(format!("pump {} out of range 1..={n}", pump + 1)));
            }
            s.pump_phase_shift[pump] += value;
        }
        Axis::Eta => {
            let eta = C64::new(value, 0.0);
            if value == 0.0 {
                return Err(AppError::Infeasible("eta must be nonzero".into()));
            }
            match &mut s.source {
                FieldSource::Direct(f) => f.peak_rabi_pump = condition_pumps(&f.peak_rabi_stokes, &s.target, eta)?,
                FieldSource::Design { eta: e, .. } => *e = eta,
                FieldSource::Pulses { .. } => {
                    return Err(AppError::scenario("the eta axis needs direct or design mode"));
                }
            }
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub value: f64,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<RunRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub scenario: String,
    pub base_config_hash: String,
    #[serde(flatten)]
    pub axis: Axis,
    pub entries: Vec<SweepEntry>,
}

impl SweepReport {
    /// Worst exit code over the entries (errors outrank bound violations).
    pub fn exit_code(&self) -> i32 {
        self.entries.iter().map(|e| e.exit_code).max().unwrap_or(0)
    }

    /// Plot-ready table, one row per value.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("value,exit_code,max_p_x,max_p_y,final_p_f,one_minus_p_f,max_norm_err,design_satisfied\n");
        for e in &self.entries {
            match &e.record {
                Some(r) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        e.value,
                        e.exit_code,
                        Compact(r.summary.max_p_x),
                        Compact(r.summary.max_p_y),
                        Compact(r.summary.final_p_f),
                        Compact(1.0 - r.summary.final_p_f),
                        Compact(r.summary.max_norm_error),
                        r.verify.satisfied
                    );
                }
                None => {
                    let _ = writeln!(out, "{},{},,,,,,", e.value, e.exit_code);
                }
            }
        }
        out
    }
}

/// Runs every value. Failures are recorded per entry and do not stop the sweep.
/// With `out`, each run's files go to `out/<run label>.*` and the table to
/// `out/<label>__sweep_<axis>.{csv,json}`.
pub fn sweep(base: &Scenario, axis: Axis, values: &[f64], out: Option<&Path>) -> Result<SweepReport, AppError> {
    let entries: Vec<SweepEntry> = values
        .par_iter()
        .map(|&value| {
            let outcome = apply_axis(base, axis, value).and_then(|s| run(&s));
            match outcome {
                Ok(o) => {
                    let mut exit_code = o.exit_code();
                    let mut error = None;
                    if let Some(dir) = out {
                        if let Err(e) = write_outputs(dir, &o) {
                            exit_code = exit_code.max(e.exit_code());
                            error = Some(e.to_string());
                        }
                    }
                    SweepEntry {
                        value,
                        exit_code,
                        record: Some(o.record),
                        error,
                    }
                }
                Err(e) => SweepEntry {
                    value,
                    exit_code: e.exit_code(),
                    record: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let report = SweepReport {
        scenario: base.label.clone(),
        base_config_hash: base.config_hash(),
        axis,
        entries,
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let stem = format!("{}__sweep_{}", base.label, axis.name());
        std::fs::write(dir.join(format!("{stem}.csv")), report.table_csv())?;
        let json = serde_json::to_string_pretty(&report)? + "\n";
        std::fs::write(dir.join(format!("{stem}.json")), json)?;
    }
    Ok(report)
}

/// Parses `1,2,4`, also accepting `pi` multiples such as `pi`, `-0.5pi`.
pub fn parse_values(list: &str) -> Result<Vec<f64>, AppError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let parsed = match s.strip_suffix("pi") {
                Some("") => Ok(std::f64::consts::PI),
                Some("-") => Ok(-std::f64::consts::PI),
                Some(head) => head.parse::<f64>().map(|x| x * std::f64::consts::PI),
                None => s.parse::<f64>(),
            };
            parsed
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| AppError::scenario(format!("bad sweep value `{s}`")))
        })
        .collect()
}
