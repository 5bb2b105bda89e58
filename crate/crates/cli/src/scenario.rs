//! Scenario files: schema, built-in scenarios and resolution into core types.
//!
//! Indices in files are one-based; everything past [`Scenario`] is zero-based.

use std::path::{Path, PathBuf};

use nullpass_core::{
    check_feasibility, design_fields, verify_design, DMatrix, DVector, Design, DesignReport, FieldSet,
    PropagationConfig, PulseSpec, StokesDrive, SystemSpec, TargetSpec, VerifyOutcome, C64,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cnum::{from_slice, vec_of, CNum};
use crate::error::AppError;

/// Bumped whenever the canonical form changes meaning.
const CANONICAL_VERSION: &str = "nullpass-scenario-v1";

const MAX_BASE_DEPTH: usize = 8;

pub const BUILTINS: [(&str, &str); 4] = [
    ("fig2", include_str!("../scenarios/fig2.json")),
    ("fig3", include_str!("../scenarios/fig3.json")),
    ("fig4", include_str!("../scenarios/fig4.json")),
    ("fig5", include_str!("../scenarios/fig5.json")),
];

pub fn builtin_text(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

// ---------------------------------------------------------------------------
// file schema

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Built-in name or path (relative to this file) of a scenario to start from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulses: Option<PulsesFile>,
    #[serde(default)]
    pub propagation: PropagationFile,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<Override>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    /// `μ₀ₖ`, length N.
    pub mu_pump: Vec<CNum>,
    /// Rows `k` of `μₖⱼ`, N rows of length M.
    pub mu_stokes: Vec<Vec<CNum>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFile {
    /// One-based basis index of the target degenerate state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<usize>,
    /// Superposition coefficients `c_j`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<CNum>>,
    /// Rescale `coefficients` to unit norm instead of rejecting them.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum PulsesFile {
    /// Peak Rabi amplitudes given directly (units of `1/T`).
    Direct {
        #[serde(default = "one")]
        width: f64,
        rabi_pump: Vec<CNum>,
        rabi_stokes: Vec<Vec<CNum>>,
    },
    /// Stokes drives given, pumps from the design condition.
    Design {
        #[serde(default = "one")]
        width: f64,
        #[serde(default = "eta_one")]
        eta: CNum,
        stokes: Vec<DriveFile>,
    },
    /// All 2N pulses given as field amplitudes and phases.
    Pulses {
        #[serde(default = "one")]
        width: f64,
        pump: Vec<DriveFile>,
        stokes: Vec<DriveFile>,
    },
}

fn one() -> f64 {
    1.0
}

fn eta_one() -> CNum {
    CNum::real(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveFile {
    pub field: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub carrier: f64,
}

/// Window and tolerances; times in units of the width. Missing entries take
/// the library defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_tolerance: Option<f64>,
}

impl PropagationFile {
    fn merged_over(self, base: PropagationFile) -> PropagationFile {
        PropagationFile {
            t_start: self.t_start.or(base.t_start),
            t_end: self.t_end.or(base.t_end),
            rel_tol: self.rel_tol.or(base.rel_tol),
            abs_tol: self.abs_tol.or(base.abs_tol),
            max_step: self.max_step.or(base.max_step),
            stride: self.stride.or(base.stride),
            norm_tolerance: self.norm_tolerance.or(base.norm_tolerance),
        }
    }

    pub fn config(&self) -> PropagationConfig {
        let d = PropagationConfig::default();
        PropagationConfig {
            t_start: self.t_start.unwrap_or(d.t_start),
            t_end: self.t_end.unwrap_or(d.t_end),
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            max_step: self.max_step.unwrap_or(d.max_step),
            output_stride: self.stride.unwrap_or(d.output_stride),
            norm_tolerance: self.norm_tolerance.unwrap_or(d.norm_tolerance),
        }
    }

    fn from_config(c: &PropagationConfig) -> Self {
        PropagationFile {
            t_start: Some(c.t_start),
            t_end: Some(c.t_end),
            rel_tol: Some(c.rel_tol),
            abs_tol: Some(c.abs_tol),
            max_step: Some(c.max_step),
            stride: Some(c.output_stride),
            norm_tolerance: Some(c.norm_tolerance),
        }
    }
}

/// One substitution. Exactly one selector is set; `value` is the new entry
/// (complex) or, for the phase shifts, an added phase in radians.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Override {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_pump: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_stokes: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_pump: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_stokes: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_phase_shift: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stokes_phase_shift: Option<usize>,
    pub value: CNum,
}

/// Declared acceptance bounds: maxima are strict, the fidelity bound inclusive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_p_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_p_y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_final_p_f: Option<f64>,
}

// ---------------------------------------------------------------------------
// resolved scenario

#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    Direct(FieldSet),
    Design {
        eta: C64,
        width: f64,
        drives: Vec<StokesDrive>,
    },
    Pulses {
        pumps: Vec<PulseSpec>,
        stokes: Vec<PulseSpec>,
    },
}

impl FieldSource {
    pub fn mode(&self) -> &'static str {
        match self {
            FieldSource::Direct(_) => "direct",
            FieldSource::Design { .. } => "design",
            FieldSource::Pulses { .. } => "pulses",
        }
    }
}

/// A fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub system: SystemSpec,
    pub target: TargetSpec,
    pub source: FieldSource,
    /// Phases (radians) multiplied onto each pump amplitude after the fields are built.
    pub pump_phase_shift: Vec<f64>,
    /// Phases multiplied onto each Stokes row after the fields are built.
    pub stokes_phase_shift: Vec<f64>,
    pub propagation: PropagationConfig,
    pub bounds: Option<Bounds>,
}

/// Fields of a scenario together with the design diagnostics.
#[derive(Debug, Clone)]
pub struct Built {
    pub fields: FieldSet,
    pub report: DesignReport,
    pub verify: VerifyOutcome,
    pub design: Option<Design>,
}

impl Scenario {
    pub fn n_intermediate(&self) -> usize {
        self.system.n_intermediate()
    }

    pub fn n_degenerate(&self) -> usize {
        self.system.n_degenerate()
    }

    /// Runs the designer (design mode) or assembles the given fields, applies
    /// the phase shifts and checks the design condition.
    pub fn build(&self) -> Result<Built, AppError> {
        let (fields, design) = match &self.source {
            FieldSource::Direct(f) => (f.clone(), None),
            FieldSource::Design { eta, width, drives } => {
                let d = design_fields(&self.system, &self.target, *eta, *width, drives)?;
                (d.fields.clone(), Some(d))
            }
            FieldSource::Pulses { pumps, stokes } => (FieldSet::from_pulses(&self.system, pumps, stokes)?, None),
        };
        let fields = self.shifted(fields);
        let verify = verify_design(&self.system, &fields, &self.target)?;
        let report = match &design {
            Some(d) => d.report.clone(),
            None => {
                let mut r = check_feasibility(&self.system, &self.target)?;
                r.eta = verify.eta_fit;
                r
            }
        };
        Ok(Built {
            fields,
            report,
            verify,
            design,
        })
    }

    fn shifted(&self, mut fields: FieldSet) -> FieldSet {
        for (k, &phi) in self.pump_phase_shift.iter().enumerate() {
            if phi != 0.0 {
                fields.peak_rabi_pump[k] *= C64::from_polar(1.0, phi);
            }
        }
        for (k, &phi) in self.stokes_phase_shift.iter().enumerate() {
            if phi != 0.0 {
                let rot = C64::from_polar(1.0, phi);
                fields.peak_rabi_stokes.row_mut(k).iter_mut().for_each(|z| *z *= rot);
            }
        }
        fields
    }

    /// Self-contained scenario file equivalent to this scenario (no base, no
    /// selector overrides, every propagation entry explicit).
    pub fn to_file(&self) -> ScenarioFile {
        let pulses = match &self.source {
            FieldSource::Direct(f) => PulsesFile::Direct {
                width: f.width,
                rabi_pump: from_slice(f.peak_rabi_pump.iter()),
                rabi_stokes: rows_of(&f.peak_rabi_stokes),
            },
            FieldSource::Design { eta, width, drives } => PulsesFile::Design {
                width: *width,
                eta: CNum(*eta),
                stokes: drives
                    .iter()
                    .map(|d| DriveFile {
                        field: d.peak_field,
                        phase: d.phase,
                        carrier: 0.0,
                    })
                    .collect(),
            },
            FieldSource::Pulses { pumps, stokes } => {
                let conv = |p: &PulseSpec| DriveFile {
                    field: p.peak_field,
                    phase: p.phase,
                    carrier: p.carrier,
                };
                PulsesFile::Pulses {
                    width: pumps.first().map(|p| p.width).unwrap_or(1.0),
                    pump: pumps.iter().map(conv).collect(),
                    stokes: stokes.iter().map(conv).collect(),
                }
            }
        };
        let mut overrides = Vec::new();
        for (k, &phi) in self.pump_phase_shift.iter().enumerate() {
            if phi != 0.0 {
                overrides.push(Override {
                    pump_phase_shift: Some(k + 1),
                    value: CNum::real(phi),
                    ..Override::default()
                });
            }
        }
        for (k, &phi) in self.stokes_phase_shift.iter().enumerate() {
            if phi != 0.0 {
                overrides.push(Override {
                    stokes_phase_shift: Some(k + 1),
                    value: CNum::real(phi),
                    ..Override::default()
                });
            }
        }
        ScenarioFile {
            label: Some(self.label.clone()),
            base: None,
            system: Some(SystemFile {
                mu_pump: from_slice(self.system.mu_pump.iter()),
                mu_stokes: rows_of(&self.system.mu_stokes),
            }),
            target: Some(TargetFile {
                basis: None,
                coefficients: Some(from_slice(self.target.coefficients.iter())),
                normalize: false,
            }),
            pulses: Some(pulses),
            propagation: PropagationFile::from_config(&self.propagation),
            overrides,
            bounds: self.bounds,
        }
    }

    /// Canonical JSON: the compact serialization of [`Scenario::to_file`].
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("scenario files always serialize")
    }

    /// SHA-256 (hex) of the canonical JSON, tagged with the format version.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(CANONICAL_VERSION.as_bytes());
        h.update([0u8]);
        h.update(self.canonical_json().as_bytes());
        format!("{:x}", h.finalize())
    }
}

fn rows_of(m: &DMatrix<C64>) -> Vec<Vec<CNum>> {
    m.row_iter().map(|r| from_slice(r.iter())).collect()
}

// ---------------------------------------------------------------------------
// loading

/// Parses scenario text, reporting the offending field path on errors.
pub fn parse_scenario(text: &str, origin: &str) -> Result<ScenarioFile, AppError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        AppError::scenario(format!("{origin}: at `{path}`: {}", e.inner()))
    })
}

/// Loads a built-in (`fig2` … `fig5`) or a scenario file and resolves it.
///
/// A path that exists on disk wins over a built-in of the same name.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario, AppError> {
    let path = Path::new(name_or_path);
    if !path.exists() {
        if let Some(text) = builtin_text(name_or_path) {
            return resolve(parse_scenario(text, name_or_path)?, None);
        }
        return Err(AppError::scenario(format!(
            "{name_or_path}: no such file and not a built-in scenario (built-ins: fig2, fig3, fig4, fig5)"
        )));
    }
    let text = std::fs::read_to_string(path)?;
    let file = parse_scenario(&text, name_or_path)?;
    resolve(file, path.parent())
}

/// Resolves a parsed file; `dir` anchors relative `base` paths.
pub fn resolve(file: ScenarioFile, dir: Option<&Path>) -> Result<Scenario, AppError> {
    let flat = flatten(file, dir, 0)?;
    build_scenario(flat)
}

fn flatten(file: ScenarioFile, dir: Option<&Path>, depth: usize) -> Result<ScenarioFile, AppError> {
    let Some(base_name) = file.base.clone() else {
        return Ok(file);
    };
    if depth >= MAX_BASE_DEPTH {
        return Err(AppError::scenario(format!("base chain deeper than {MAX_BASE_DEPTH} (cycle?)")));
    }
    let candidate: Option<PathBuf> = dir.map(|d| d.join(&base_name)).filter(|p| p.exists());
    let (base_file, base_dir) = match candidate {
        Some(p) => {
            let text = std::fs::read_to_string(&p)?;
            let parsed = parse_scenario(&text, &p.display().to_string())?;
            let parent = p.parent().map(Path::to_path_buf);
            (parsed, parent)
        }
        None => match builtin_text(&base_name) {
            Some(text) => (parse_scenario(text, &base_name)?, None),
            None => return Err(AppError::scenario(format!("base `{base_name}` not found"))),
        },
    };
    let base = flatten(base_file, base_dir.as_deref(), depth + 1)?;
    let mut overrides = base.overrides;
    overrides.extend(file.overrides);
    Ok(ScenarioFile {
        label: file.label.or(base.label),
        base: None,
        system: file.system.or(base.system),
        target: file.target.or(base.target),
        pulses: file.pulses.or(base.pulses),
        propagation: file.propagation.merged_over(base.propagation),
        overrides,
        bounds: file.bounds.or(base.bounds),
    })
}

fn matrix_from_rows(rows: &[Vec<CNum>], what: &str) -> Result<DMatrix<C64>, AppError> {
    let n = rows.len();
    let m = rows.first().map(Vec::len).unwrap_or(0);
    if n == 0 || m == 0 {
        return Err(AppError::scenario(format!("{what}: must be a nonempty matrix")));
    }
    if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
        return Err(AppError::scenario(format!(
            "{what}: row {} has {} entries, expected {m}",
            k + 1,
            r.len()
        )));
    }
    Ok(DMatrix::from_fn(n, m, |k, j| rows[k][j].0))
}

fn check_len(what: &str, got: usize, expected: usize) -> Result<(), AppError> {
    if got != expected {
        return Err(AppError::scenario(format!("{what}: {got} entries, expected {expected}")));
    }
    Ok(())
}

fn index1(what: &str, i: usize, len: usize) -> Result<usize, AppError> {
    if i == 0 || i > len {
        return Err(AppError::scenario(format!("{what}: index {i} out of range 1..={len}")));
    }
    Ok(i - 1)
}

fn real_value(what: &str, v: CNum) -> Result<f64, AppError> {
    if v.0.im != 0.0 || !v.0.re.is_finite() {
        return Err(AppError::scenario(format!("{what}: phase shift must be a finite real number")));
    }
    Ok(v.0.re)
}

fn build_scenario(file: ScenarioFile) -> Result<Scenario, AppError> {
    let label = file.label.clone().unwrap_or_else(|| "scenario".to_string());
    if label.is_empty() || label.contains(['/', '\\']) {
        return Err(AppError::scenario(format!("label `{label}` must be nonempty and free of path separators")));
    }
    let pulses = file
        .pulses
        .clone()
        .ok_or_else(|| AppError::scenario("`pulses` is required"))?;

    // direct tables, before overrides
    let mut direct = match &pulses {
        PulsesFile::Direct {
            width,
            rabi_pump,
            rabi_stokes,
        } => {
            let s = matrix_from_rows(rabi_stokes, "pulses.rabi_stokes")?;
            check_len("pulses.rabi_pump", rabi_pump.len(), s.nrows())?;
            Some((DVector::from_vec(vec_of(rabi_pump)), s, *width))
        }
        _ => None,
    };

    let (mut mu_pump, mut mu_stokes) = match &file.system {
        Some(sys) => {
            let s = matrix_from_rows(&sys.mu_stokes, "system.mu_stokes")?;
            check_len("system.mu_pump", sys.mu_pump.len(), s.nrows())?;
            (Some(DVector::from_vec(vec_of(&sys.mu_pump))), Some(s))
        }
        None => (None, None),
    };

    let (n, m) = match (&direct, &mu_stokes) {
        (Some((_, s, _)), _) => s.shape(),
        (None, Some(s)) => s.shape(),
        (None, None) => return Err(AppError::scenario("`system` is required unless pulses are given in direct mode")),
    };
    if let (Some((_, s, _)), Some(mu)) = (&direct, &mu_stokes) {
        if s.shape() != mu.shape() {
            return Err(AppError::scenario(format!(
                "pulses.rabi_stokes is {}x{} but system.mu_stokes is {}x{}",
                s.nrows(),
                s.ncols(),
                mu.nrows(),
                mu.ncols()
            )));
        }
    }

    // amplitude overrides
    let mut pump_phase = vec![0.0; n];
    let mut stokes_phase = vec![0.0; n];
    let mut mu_edits = Vec::new();
    for (idx, o) in file.overrides.iter().enumerate() {
        let what = format!("overrides[{idx}]");
        let selectors = [
            o.rabi_pump.is_some(),
            o.rabi_stokes.is_some(),
            o.mu_pump.is_some(),
            o.mu_stokes.is_some(),
            o.pump_phase_shift.is_some(),
            o.stokes_phase_shift.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if selectors != 1 {
            return Err(AppError::scenario(format!("{what}: exactly one selector must be given")));
        }
        if let Some(k) = o.rabi_pump {
            let k = index1(&format!("{what}.rabi_pump"), k, n)?;
            let (p, _, _) = direct
                .as_mut()
                .ok_or_else(|| AppError::scenario(format!("{what}: rabi overrides need direct mode")))?;
            p[k] = o.value.0;
        } else if let Some([k, j]) = o.rabi_stokes {
            let k = index1(&format!("{what}.rabi_stokes row"), k, n)?;
            let j = index1(&format!("{what}.rabi_stokes column"), j, m)?;
            let (_, s, _) = direct
                .as_mut()
                .ok_or_else(|| AppError::scenario(format!("{what}: rabi overrides need direct mode")))?;
            s[(k, j)] = o.value.0;
        } else if let Some(k) = o.mu_pump {
            mu_edits.push((index1(&format!("{what}.mu_pump"), k, n)?, None, o.value.0));
        } else if let Some([k, j]) = o.mu_stokes {
            let k = index1(&format!("{what}.mu_stokes row"), k, n)?;
            let j = index1(&format!("{what}.mu_stokes column"), j, m)?;
            mu_edits.push((k, Some(j), o.value.0));
        } else if let Some(k) = o.pump_phase_shift {
            pump_phase[index1(&format!("{what}.pump_phase_shift"), k, n)?] += real_value(&what, o.value)?;
        } else if let Some(k) = o.stokes_phase_shift {
            stokes_phase[index1(&format!("{what}.stokes_phase_shift"), k, n)?] += real_value(&what, o.value)?;
        }
    }

    // a direct scenario without a system uses μ₀ₖ = 1 and μₖⱼ = Ω̃_Skj
    if mu_stokes.is_none() {
        let (_, s, _) = direct.as_ref().expect("checked above");
        mu_pump = Some(DVector::from_element(n, C64::new(1.0, 0.0)));
        mu_stokes = Some(s.clone());
    }
    let (mut mu_pump, mut mu_stokes) = (mu_pump.unwrap(), mu_stokes.unwrap());
    for (k, j, v) in mu_edits {
        match j {
            None => mu_pump[k] = v,
            Some(j) => mu_stokes[(k, j)] = v,
        }
    }
    let system = SystemSpec::new(mu_pump, mu_stokes)?;

    let target = match &file.target {
        None => TargetSpec::last(m),
        Some(t) => match (t.basis, &t.coefficients) {
            (Some(b), None) => TargetSpec::basis(m, index1("target.basis", b, m)?)?,
            (None, Some(c)) => {
                check_len("target.coefficients", c.len(), m)?;
                let v = DVector::from_vec(vec_of(c));
                if t.normalize {
                    TargetSpec::normalized(v)?
                } else {
                    TargetSpec::new(v).map_err(|e| AppError::scenario(format!("target.coefficients: {e}")))?
                }
            }
            _ => return Err(AppError::scenario("target: give exactly one of `basis` or `coefficients`")),
        },
    };

    let source = match pulses {
        PulsesFile::Direct { .. } => {
            let (p, s, width) = direct.expect("direct mode");
            FieldSource::Direct(FieldSet::new(p, s, width)?)
        }
        PulsesFile::Design { width, eta, stokes } => {
            check_len("pulses.stokes", stokes.len(), n)?;
            FieldSource::Design {
                eta: eta.0,
                width,
                drives: stokes.iter().map(|d| StokesDrive::new(d.field, d.phase)).collect(),
            }
        }
        PulsesFile::Pulses { width, pump, stokes } => {
            check_len("pulses.pump", pump.len(), n)?;
            check_len("pulses.stokes", stokes.len(), n)?;
            FieldSource::Pulses {
                pumps: pump.iter().map(|d| PulseSpec::pump(d.field, d.phase, d.carrier, width)).collect(),
                stokes: stokes.iter().map(|d| PulseSpec::stokes(d.field, d.phase, d.carrier, width)).collect(),
            }
        }
    };
    if let FieldSource::Design { width, .. } = &source {
        if !(*width > 0.0 && width.is_finite()) {
            return Err(AppError::scenario("pulses.width must be positive"));
        }
    }

    let propagation = file.propagation.config();
    propagation
        .validate()
        .map_err(|e| AppError::scenario(format!("propagation: {e}")))?;

    Ok(Scenario {
        label,
        system,
        target,
        source,
        pump_phase_shift: pump_phase,
        stokes_phase_shift: stokes_phase,
        propagation,
        bounds: file.bounds,
    })
}
