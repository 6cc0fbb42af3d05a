//! File formats: experiment configs, CSV bodies and metadata sidecars.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::ExperimentRecord;
use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::linalg::{haar_unitary, ComplexMatrix};
use crate::nonlinear_bs::central_mode;
use crate::rng::seeded;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HaarSource {
    pub kind: String,
    pub seed: u64,
}

/// A unitary given inline or drawn from the Haar measure with a seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource {
    Haar(HaarSource),
    Matrix(ComplexMatrix),
}

impl MatrixSource {
    pub fn resolve(&self, m: usize) -> Result<ComplexMatrix> {
        match self {
            Self::Haar(h) if h.kind == "haar" => Ok(haar_unitary(m, &mut seeded(h.seed))),
            Self::Haar(h) => Err(Error::Parse(format!("unknown matrix kind {:?}", h.kind))),
            Self::Matrix(u) => {
                if u.rows() != m || u.cols() != m {
                    return Err(Error::ModeMismatch {
                        expected: m,
                        found: u.rows(),
                    });
                }
                Ok(u.clone())
            }
        }
    }
}

/// Non-linear experiment description read from JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub w_matrix: MatrixSource,
    pub v_matrix: MatrixSource,
    /// 1-based; defaults to the central mode.
    #[serde(default)]
    pub mode_x: Option<usize>,
    #[serde(default)]
    pub phi: Option<f64>,
    pub input_state: FockState,
    /// Path to a gadget JSON file.
    #[serde(default)]
    pub gadget: Option<PathBuf>,
}

/// Resolved experiment.
#[derive(Clone, Debug)]
pub struct ResolvedExperiment {
    pub w: ComplexMatrix,
    pub v: ComplexMatrix,
    pub x: usize,
    pub phi: f64,
    pub input: FockState,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        let m = self.input_state.modes();
        if m == 0 {
            return Err(Error::InvalidDimension("input state has no modes".into()));
        }
        Ok(ResolvedExperiment {
            w: self.w_matrix.resolve(m)?,
            v: self.v_matrix.resolve(m)?,
            x: self.mode_x.unwrap_or_else(|| central_mode(m)),
            phi: self.phi.unwrap_or(std::f64::consts::FRAC_PI_2),
            input: self.input_state.clone(),
        })
    }
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(m)?)?;
    Ok(())
}

/// `index,state,accepted_trial_count` rows for accepted samples.
pub fn samples_csv(samples: &[FockState], trials: &[u64]) -> String {
    let mut out = String::from("index,state,accepted_trial_count\n");
    for (i, (s, t)) in samples.iter().zip(trials).enumerate() {
        let _ = writeln!(out, "{i},\"{s}\",{t}");
    }
    out
}

pub const RECORD_HEADER: &str = "n,m,k,phi,trial,seed,tvd,p_bunch_site,p_bunch_global,p_postselect";

pub fn records_csv(records: &[ExperimentRecord]) -> String {
    let mut out = format!("{RECORD_HEADER}\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.n, r.m, r.k, r.phi, r.trial, r.seed, r.tvd, r.p_bunch_site, r.p_bunch_global, r.p_postselect
        );
    }
    out
}

/// Sidecar written next to every output: `<out>.meta.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

impl Metadata {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config,
        }
    }

    pub fn sidecar_path(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".meta.json");
        PathBuf::from(name)
    }

    pub fn write_for(&self, out: &Path) -> Result<()> {
        std::fs::write(Self::sidecar_path(out), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
