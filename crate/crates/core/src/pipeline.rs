//! End-to-end run: stratify, `κ`, `L0`, the oracle sweep, the fit and the
//! verdicts, plus the report files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::action::{ActionError, ActionSpec, GroupAction, StratumSignature, ValidationReport};
use crate::amplitude::{Amplitude, AmplitudeError, AmplitudeKind};
use crate::critical::{integrate_l0, kappa, CriticalError, L0Estimate, SurfaceConfig};
use crate::fit::{fit_leading_term, FitError, FitResult, RegimeCheck};
use crate::oracle::{eval_i_semianalytic_so2, Oracle, OracleConfig, OracleError, OracleValue};
use crate::resolution::{build_isotropy_tree, certify_branch, Certificate, CertifyOptions, LevelData, ResolutionError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("action stage: {0}")]
    Action(#[from] ActionError),
    #[error("amplitude stage: {0}")]
    Amplitude(#[from] AmplitudeError),
    #[error("critical-set stage: {0}")]
    Critical(#[from] CriticalError),
    #[error("oracle stage: {0}")]
    Oracle(#[from] OracleError),
    #[error("fit stage: {0}; shrink the smallest mu or add points below it")]
    Fit(#[from] FitError),
    #[error("resolution stage: {0}")]
    Resolution(#[from] ResolutionError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Geometric grid from `max` down to `min`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for MuGrid {
    fn default() -> Self {
        MuGrid {
            min: 0.02,
            max: 0.3,
            count: 12,
        }
    }
}

impl MuGrid {
    /// Strictly decreasing values.
    pub fn values(&self) -> Result<Vec<f64>, PipelineError> {
        if !(self.min > 0.0) || !(self.max > self.min) || self.count < 2 {
            return Err(PipelineError::Config(format!(
                "mu grid needs 0 < min < max and count >= 2, got {:?}",
                self
            )));
        }
        let r = (self.min / self.max).ln() / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| if i + 1 == self.count { self.min } else { self.max * (r * i as f64).exp() })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub fit_exponent_tol: f64,
    pub l0_rel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fit_exponent_tol: 0.05,
            l0_rel_tol: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub action: ActionSpec,
    pub amplitude: Amplitude,
    #[serde(default)]
    pub mu_grid: MuGrid,
    /// How many of the smallest `μ` enter the fit.
    #[serde(default = "default_fit_points")]
    pub fit_points: usize,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// Certificates for every isotropy branch are attached when present.
    #[serde(default)]
    pub resolution: Option<CertifyOptions>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_fit_points() -> usize {
    8
}

impl RunConfig {
    /// Read a config, or the config embedded in a report.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let mut v: serde_json::Value = serde_json::from_str(text)?;
        if v.get("verdicts").is_some() {
            if let Some(c) = v.get_mut("config") {
                v = c.take();
            }
        }
        Ok(serde_json::from_value(v)?)
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn group_action(&self) -> Result<GroupAction, PipelineError> {
        Ok(GroupAction::from_spec(&self.action)?.checked()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mu: f64,
    pub re_i: f64,
    pub im_i: f64,
    pub err_estimate: f64,
    pub method: String,
    pub nodes: usize,
}

impl From<&OracleValue> for SweepRow {
    fn from(v: &OracleValue) -> Self {
        SweepRow {
            mu: v.mu,
            re_i: v.value.re,
            im_i: v.value.im,
            err_estimate: v.err_estimate,
            method: v.method.label().to_string(),
            nodes: v.nodes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    /// Wall-clock time of the run; the only field that differs between reruns.
    pub timestamp: String,
    pub strata: Vec<StratumSignature>,
    pub kappa_declared: usize,
    pub kappa_fitted: Option<f64>,
    pub l0_reference: f64,
    pub l0_reference_detail: L0Estimate,
    /// `lim I(μ)/(2πμ)` from the level-set reference, for plane rotations.
    pub l0_coarea: Option<f64>,
    pub l0_fitted: Option<f64>,
    pub next_order_coeff: Option<f64>,
    pub fit: Option<FitResult>,
    pub amplitude_mass: f64,
    pub table: Vec<SweepRow>,
    pub verdicts: Vec<Verdict>,
    pub certificates: Vec<Certificate>,
    pub flags: Vec<String>,
    pub config: RunConfig,
}

impl AsymptoticsReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

/// Signatures seen on the probe points of the action.
pub fn strata(action: &GroupAction, seed: u64) -> Vec<StratumSignature> {
    action
        .stratify_sample(&action.probe_points(64, seed))
        .into_iter()
        .map(|s| s.signature)
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchSummary {
    pub label: String,
    pub chain: Vec<StratumSignature>,
    pub numerical_data: Vec<LevelData>,
    pub jacobian_exponents: Vec<i64>,
    pub lemma3: Vec<bool>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Analysis {
    pub action: String,
    pub n: usize,
    pub d: usize,
    pub validation: ValidationReport,
    pub kappa: usize,
    pub strata: Vec<StratumSignature>,
    pub branches: Vec<BranchSummary>,
    pub branch_error: Option<String>,
}

/// Validation, orbit types, `κ` and isotropy branches of the configured action.
pub fn analyze(config: &RunConfig) -> Result<Analysis, PipelineError> {
    let action = GroupAction::from_spec(&config.action)?;
    let validation = action.validate();
    let action = action.checked()?;
    let (branches, branch_error) = match build_isotropy_tree(&action) {
        Ok(b) => (b, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    Ok(Analysis {
        action: action.name().to_string(),
        n: action.n(),
        d: action.d(),
        validation,
        kappa: kappa(&action),
        strata: strata(&action, config.seed),
        branches: branches
            .iter()
            .map(|b| BranchSummary {
                label: b.label(),
                chain: b.chain.clone(),
                numerical_data: b.numerical_data(),
                jacobian_exponents: b.jacobian_exponents(),
                lemma3: b.lemma3(),
                notes: b.notes.clone(),
            })
            .collect(),
        branch_error,
    })
}

/// The oracle over the configured grid, largest `μ` first.
pub fn sweep(config: &RunConfig) -> Result<Vec<OracleValue>, PipelineError> {
    let action = config.group_action()?;
    let mus = config.mu_grid.values()?;
    let oracle = Oracle::new(&action, &config.amplitude, &config.oracle, config.mu_grid.min)?;
    Ok(mus.iter().map(|&mu| oracle.eval(mu)).collect::<Result<Vec<_>, _>>()?)
}

/// Certificates for every isotropy branch of the configured action.
pub fn resolve_check(config: &RunConfig) -> Result<Vec<Certificate>, PipelineError> {
    let action = config.group_action()?;
    let mut opts = config.resolution.clone().unwrap_or_default();
    opts.seed = config.seed;
    Ok(build_isotropy_tree(&action)?.iter().map(|b| certify_branch(b, &opts)).collect())
}

/// `|I(μ_min)| / (2πμ_min)^κ` below this fraction of the amplitude mass counts as vanishing.
pub const NULL_TOL: f64 = 1e-6;

pub fn verify_pipeline(config: &RunConfig) -> Result<AsymptoticsReport, PipelineError> {
    let action = config.group_action()?;
    config.amplitude.check(action.n(), action.d())?;
    let mut flags = Vec::new();
    if config.amplitude.kind == AmplitudeKind::GaussianProduct {
        flags.push("gaussian amplitude: not compactly supported, truncated at 8 widths".to_string());
    }
    let strata = strata(&action, config.seed);
    let k = kappa(&action);
    let l0 = integrate_l0(&action, &config.amplitude, &config.surface, config.seed)?;
    flags.extend(l0.flags.iter().cloned());
    let values = sweep(config)?;
    let table: Vec<SweepRow> = values.iter().map(SweepRow::from).collect();
    let mass = config.amplitude.mass();
    let tol = &config.tolerances;
    let two_pi = 2.0 * std::f64::consts::PI;

    let l0_coarea = eval_i_semianalytic_so2(&action, &config.amplitude, &[], config.surface.grid_nodes)
        .ok()
        .map(|s| s.slope / two_pi);

    let mut verdicts = Vec::new();
    let (fit, kappa_fitted) = if l0.l0 == 0.0 {
        let last = values.last().expect("grid has points");
        let ratio = last.value.norm() / (two_pi * last.mu).powi(k as i32);
        verdicts.push(Verdict {
            name: "PASS_NULL".into(),
            pass: ratio <= NULL_TOL * mass,
            detail: format!("|I|/(2πμ)^κ = {ratio:.3e} at μ = {}, mass {mass:.3e}", last.mu),
        });
        (None, None)
    } else {
        let take = config.fit_points.min(values.len());
        let tail = &values[values.len() - take..];
        let mu: Vec<f64> = tail.iter().map(|v| v.mu).collect();
        let vals: Vec<_> = tail.iter().map(|v| v.value).collect();
        let errs: Vec<f64> = tail.iter().map(|v| v.err_estimate).collect();
        let fit = fit_leading_term(&mu, &vals, &errs, k, RegimeCheck::default())?;
        let gap_exp = (fit.exponent - k as f64).abs();
        verdicts.push(Verdict {
            name: "PASS_EXPONENT".into(),
            pass: gap_exp <= tol.fit_exponent_tol,
            detail: format!("fitted {:.4} vs κ = {k}", fit.exponent),
        });
        let gap = (fit.l0 - l0.l0).abs() / l0.l0.abs();
        verdicts.push(Verdict {
            name: "PASS_L0".into(),
            pass: gap <= tol.l0_rel_tol,
            detail: format!("fitted {:.6} vs reference {:.6}, relative gap {gap:.3e}", fit.l0, l0.l0),
        });
        if let Some(c) = l0_coarea {
            let gap = (c - l0.l0).abs() / l0.l0.abs();
            verdicts.push(Verdict {
                name: "PASS_COAREA".into(),
                pass: gap <= tol.l0_rel_tol,
                detail: format!("level-set slope gives {c:.6}, relative gap {gap:.3e}"),
            });
        }
        let exponent = fit.exponent;
        (Some(fit), Some(exponent))
    };

    let certificates = match &config.resolution {
        Some(_) => {
            let certs = resolve_check(config)?;
            verdicts.push(Verdict {
                name: "PASS_RESOLUTION".into(),
                pass: certs.iter().all(|c| c.passed()),
                detail: format!("{} branch certificates", certs.len()),
            });
            certs
        }
        None => Vec::new(),
    };

    Ok(AsymptoticsReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.hash(),
        seed: config.seed,
        timestamp: timestamp(),
        strata,
        kappa_declared: k,
        kappa_fitted,
        l0_reference: l0.l0,
        l0_reference_detail: l0,
        l0_coarea,
        l0_fitted: fit.as_ref().map(|f| f.l0),
        next_order_coeff: fit.as_ref().map(|f| f.c1),
        fit,
        amplitude_mass: mass,
        table,
        verdicts,
        certificates,
        flags,
        config: config.clone(),
    })
}

fn timestamp() -> String {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{now}")
}

/// `mu,re_I,im_I,err_estimate,method`, one row per `μ`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("mu,re_I,im_I,err_estimate,method\n");
    for r in rows {
        out.push_str(&format!("{:e},{:e},{:e},{:e},{}\n", r.mu, r.re_i, r.im_i, r.err_estimate, r.method));
    }
    out
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect::<String>()
        .trim_matches('_')
        .to_string()
}

/// Write `certificates/<branch>.json` files under `dir`.
pub fn write_certificates(certs: &[Certificate], dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let cdir = dir.join("certificates");
    fs::create_dir_all(&cdir)?;
    let mut out = Vec::new();
    for c in certs {
        let p = cdir.join(format!("{}.json", file_label(&c.branch)));
        fs::write(&p, serde_json::to_string_pretty(c)?)?;
        out.push(p);
    }
    Ok(out)
}

/// Write `report.json`, `sweep.csv` and the certificates under `dir`.
pub fn emit_report(report: &AsymptoticsReport, dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(dir)?;
    let json = dir.join("report.json");
    fs::write(&json, serde_json::to_string_pretty(report)?)?;
    let csv = dir.join("sweep.csv");
    fs::write(&csv, sweep_csv(&report.table))?;
    let mut out = vec![json, csv];
    out.extend(write_certificates(&report.certificates, dir)?);
    Ok(out)
}
