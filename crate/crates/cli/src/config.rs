//! TOML run configuration and its translation into library objects.
//!
//! Every field has a sensible default so that `nip <mode>` works without a
//! config file; unknown keys are rejected to catch typos early.  Command
//! line flags (`--window`, `--step`, `--seed`) override the corresponding
//! config entries after parsing.

use ndarray::{Array1, Array2};
use nip_core::{HamiltonianSpec, RadiusModel, Schedule, StatePair, System, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Top-level run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Model dimension `N ≥ 2`.
    pub n: usize,
    /// Seed for every randomised check (verify mode state sampling).
    pub seed: u64,
    pub schedule: ScheduleConfig,
    pub hamiltonian: HamiltonianConfig,
    pub window: WindowConfig,
    pub initial: InitialConfig,
    pub output: OutputConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            n: 4,
            seed: 0,
            schedule: ScheduleConfig::default(),
            hamiltonian: HamiltonianConfig::default(),
            window: WindowConfig::default(),
            initial: InitialConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Coupling/shift schedule selection.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleConfig {
    /// `τ = 1 − t`, `σ = 2N·√(max(0, 1 − τ²))`: the EPs sit at `t = 0`
    /// and `t = 2`.
    #[default]
    Standard,
    /// Constant coupling and shift.
    Frozen {
        tau: f64,
        #[serde(default)]
        sigma: f64,
    },
    /// Polynomials in `t` (coefficients in ascending powers).
    Polynomial {
        tau_coeffs: Vec<f64>,
        #[serde(default)]
        sigma_coeffs: Vec<f64>,
    },
}

impl ScheduleConfig {
    pub fn to_schedule(&self, n: usize) -> Schedule {
        match self {
            Self::Standard => Schedule::Standard { n },
            Self::Frozen { tau, sigma } => Schedule::Frozen {
                tau: *tau,
                sigma: *sigma,
            },
            Self::Polynomial {
                tau_coeffs,
                sigma_coeffs,
            } => Schedule::Polynomial {
                tau: tau_coeffs.clone(),
                sigma: sigma_coeffs.clone(),
            },
        }
    }
}

/// Hamiltonian selection for the Schrödinger pair.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HamiltonianConfig {
    /// `H(t) = R(t)` (default).
    #[default]
    Radius,
    /// `H(t) = Θ(t)⁻¹·Λ̃` for a constant symmetric seed.
    HermitianSeed {
        #[serde(default)]
        matrix: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        diagonal: Option<Vec<f64>>,
    },
    /// A constant matrix used verbatim.
    Direct {
        #[serde(default)]
        matrix: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        diagonal: Option<Vec<f64>>,
    },
}

fn matrix_from(
    label: &str,
    n: usize,
    matrix: &Option<Vec<Vec<f64>>>,
    diagonal: &Option<Vec<f64>>,
) -> Result<Array2<f64>, CliError> {
    match (matrix, diagonal) {
        (Some(rows), None) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(CliError::Usage(format!(
                    "{label}.matrix must be {n}x{n} to match the model dimension"
                )));
            }
            let mut m = Array2::zeros((n, n));
            for (i, row) in rows.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    m[(i, j)] = x;
                }
            }
            Ok(m)
        }
        (None, Some(diag)) => {
            if diag.len() != n {
                return Err(CliError::Usage(format!(
                    "{label}.diagonal must have {n} entries to match the model dimension"
                )));
            }
            Ok(Array2::from_diag(&Array1::from(diag.clone())))
        }
        (Some(_), Some(_)) => Err(CliError::Usage(format!(
            "{label}: give either `matrix` or `diagonal`, not both"
        ))),
        (None, None) => Err(CliError::Usage(format!(
            "{label}: one of `matrix` or `diagonal` is required"
        ))),
    }
}

impl HamiltonianConfig {
    pub fn to_spec(&self, n: usize) -> Result<HamiltonianSpec, CliError> {
        match self {
            Self::Radius => Ok(HamiltonianSpec::Radius),
            Self::HermitianSeed { matrix, diagonal } => Ok(HamiltonianSpec::HermitianSeed(
                matrix_from("hamiltonian", n, matrix, diagonal)?,
            )),
            Self::Direct { matrix, diagonal } => Ok(HamiltonianSpec::Direct(matrix_from(
                "hamiltonian",
                n,
                matrix,
                diagonal,
            )?)),
        }
    }
}

/// Integration window and step.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowConfig {
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            t0: 0.1,
            t1: 1.9,
            step: 1e-3,
        }
    }
}

/// Initial state of the conjugate pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    /// Real parts of the ket (defaults to the uniform superposition).
    pub ket_re: Option<Vec<f64>>,
    /// Imaginary parts of the ket (defaults to zero).
    pub ket_im: Option<Vec<f64>>,
    /// How the companion `|ψ⟩⟩` is chosen.
    pub companion: CompanionKind,
    /// Explicit companion, real parts (companion = "explicit" only).
    pub left_re: Option<Vec<f64>>,
    /// Explicit companion, imaginary parts.
    pub left_im: Option<Vec<f64>>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            ket_re: None,
            ket_im: None,
            companion: CompanionKind::Metric,
            left_re: None,
            left_im: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompanionKind {
    /// `|ψ⟩⟩ = Θ(t₀)|ψ⟩` — the physical pairing.
    Metric,
    /// Companion given explicitly via `left_re`/`left_im`.
    Explicit,
}

fn complex_vector(
    label: &str,
    n: usize,
    re: &Option<Vec<f64>>,
    im: &Option<Vec<f64>>,
    default_re: f64,
) -> Result<Array1<C64>, CliError> {
    let re = re
        .clone()
        .unwrap_or_else(|| vec![default_re / (n as f64).sqrt(); n]);
    let im = im.clone().unwrap_or_else(|| vec![0.0; n]);
    if re.len() != n || im.len() != n {
        return Err(CliError::Usage(format!(
            "{label} must have {n} entries to match the model dimension"
        )));
    }
    Ok(Array1::from_iter(
        re.iter().zip(im.iter()).map(|(&a, &b)| C64::new(a, b)),
    ))
}

impl InitialConfig {
    /// Build the initial pair at `t0`, pairing with the metric when asked.
    pub fn to_pair(&self, system: &System, t0: f64) -> Result<StatePair, CliError> {
        let ket = complex_vector("initial.ket", system.n(), &self.ket_re, &self.ket_im, 1.0)?;
        match self.companion {
            CompanionKind::Metric => {
                let frame = system.frame(t0)?;
                Ok(StatePair::with_metric_companion(ket, &frame.theta)?)
            }
            CompanionKind::Explicit => {
                if self.left_re.is_none() && self.left_im.is_none() {
                    return Err(CliError::Usage(
                        "initial.companion = \"explicit\" needs left_re and/or left_im".into(),
                    ));
                }
                let left = complex_vector(
                    "initial.left",
                    system.n(),
                    &self.left_re,
                    &self.left_im,
                    0.0,
                )?;
                Ok(StatePair::new(ket, left)?)
            }
        }
    }
}

/// Output shaping.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Number of grid samples for the spectrum/metric scans.
    pub grid_points: usize,
    /// Keep every `stride`-th integration step in the evolve CSV
    /// (the final step is always kept).
    pub stride: usize,
    /// Number of coupling samples for the pointwise/polynomial metric
    /// comparison in the metric mode.
    pub pointwise_samples: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            grid_points: 181,
            stride: 1,
            pointwise_samples: 13,
        }
    }
}

impl Config {
    /// Read and validate a TOML config file.
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: Config = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Structural validation beyond what serde can express.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n < 2 {
            return Err(CliError::Usage(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if self.output.grid_points < 2 {
            return Err(CliError::Usage(
                "output.grid_points must be at least 2".into(),
            ));
        }
        if self.output.stride == 0 {
            return Err(CliError::Usage("output.stride must be positive".into()));
        }
        if self.output.pointwise_samples < 2 {
            return Err(CliError::Usage(
                "output.pointwise_samples must be at least 2".into(),
            ));
        }
        if let ScheduleConfig::Polynomial { tau_coeffs, .. } = &self.schedule {
            if tau_coeffs.is_empty() {
                return Err(CliError::Usage(
                    "schedule.tau_coeffs must not be empty".into(),
                ));
            }
        }
        Ok(())
    }

    /// Assemble the library-side system.
    pub fn to_system(&self) -> Result<System, CliError> {
        let schedule = self.schedule.to_schedule(self.n);
        let model = RadiusModel::new(self.n, schedule)?;
        let spec = self.hamiltonian.to_spec(self.n)?;
        Ok(System::new(model, spec)?)
    }
}
