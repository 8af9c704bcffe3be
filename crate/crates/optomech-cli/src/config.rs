//! Run configuration: JSON schema, validation, and model assembly.
//!
//! A run is one JSON document describing the lattice, the atom, the trap,
//! the drive, and optionally the detection grid, the stochastic-oracle
//! budget, and the output layout. The schema is strict: unknown keys are
//! rejected so typos fail loudly, and every field is checked before any
//! computation starts. All inputs are dimensionless in the internal unit
//! system (rates in gamma, lengths in lambda, wavevectors in q).

use crate::fault::{CliResult, Fault};
use nalgebra::DVector;
use optomech::langevin::NoiseFactorization;
use optomech::mechanics::normal_modes;
use optomech::params::Sides;
use optomech::{
    ArrayGeometry, CooperativeResponse, DetuningSpec, DriveProfile, ForceCoefficients,
    LangevinConfig, ModeBasis, TrapParams,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Top-level run description. Sections `detection`, `oracle`, and
/// `output` are optional; subcommands that need a missing section fail
/// with a config error naming it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeSection,
    pub atom: AtomSection,
    pub trap: TrapSection,
    pub drive: DriveSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

/// Rectangular array dimensions and spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub nx: usize,
    pub ny: usize,
    pub a_over_lambda: f64,
}

/// Atomic species, reduced to its recoil-to-linewidth ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSection {
    pub recoil_over_gamma: f64,
}

/// Trap stiffness, given either directly as a frequency or as a lattice
/// depth plus spacing to reconstruct the frequency from. Exactly one of
/// the two routes must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_over_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_over_recoil: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap_length_over_lambda: Option<f64>,
}

/// Spatial envelope of the drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKind {
    Uniform,
    Gaussian,
}

/// Illumination geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SidesSpec {
    Left,
    TwoSided,
}

/// Drive beam, detuning, and illumination sides. `waist_over_lambda` is
/// required for (and only valid with) the gaussian kind; `phase` is the
/// relative phase of a two-sided drive and defaults to pi.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub kind: DriveKind,
    pub rabi_over_gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waist_over_lambda: Option<f64>,
    pub detuning_over_linewidth: f64,
    #[serde(default = "default_sides")]
    pub sides: SidesSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
}

fn default_sides() -> SidesSpec {
    SidesSpec::Left
}

/// Detection wavevectors (units q) and the envelope frequency grid.
/// Without an explicit grid the spectra default to [-2 nu, 2 nu] with
/// 4001 points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    pub k_perp: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<OmegaGridSection>,
}

/// Uniform frequency grid specification (units gamma).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaGridSection {
    pub min_over_gamma: f64,
    pub max_over_gamma: f64,
    pub points: usize,
}

/// Noise factorization route of the stochastic integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseRouteSpec {
    Eigen,
    CholeskyWithJitter,
}

fn default_noise_route() -> NoiseRouteSpec {
    NoiseRouteSpec::Eigen
}

/// Stochastic-oracle budget plus output shaping. `psd_segment_len`
/// defaults to the largest power of two at or below n_steps/8;
/// `trajectory_stride` enables decimated trajectory files when set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub dt: f64,
    pub n_steps: usize,
    pub n_ensemble: usize,
    pub seed: u64,
    pub burn_in: usize,
    #[serde(default = "default_noise_route")]
    pub noise_factorization: NoiseRouteSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd_segment_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_stride: Option<usize>,
}

impl OracleSection {
    /// Library integration config for this budget.
    pub fn langevin_config(&self) -> LangevinConfig {
        LangevinConfig {
            dt: self.dt,
            n_steps: self.n_steps,
            n_ensemble: self.n_ensemble,
            seed: self.seed,
            burn_in: self.burn_in,
            noise_factorization: match self.noise_factorization {
                NoiseRouteSpec::Eigen => NoiseFactorization::Eigen,
                NoiseRouteSpec::CholeskyWithJitter => NoiseFactorization::CholeskyWithJitter,
            },
        }
    }

    /// Welch segment length: the explicit value, or the largest power of
    /// two at or below n_steps/8 (floored at 4).
    pub fn segment_len(&self) -> usize {
        self.psd_segment_len.unwrap_or_else(|| {
            let target = (self.n_steps / 8).max(4);
            1 << (usize::BITS - 1 - target.leading_zeros())
        })
    }
}

/// File format selector for the writers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Output directory and formats. Defaults: "out", both formats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_directory() -> String {
    "out".into()
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: default_directory(), formats: default_formats() }
    }
}

impl RunConfig {
    /// Parses and validates a configuration file. Schema errors carry the
    /// offending line and column; value errors name the field.
    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Fault::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Fault::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Field-level validation, run before any computation.
    pub fn validate(&self) -> CliResult<()> {
        let fail = |msg: String| Err(Fault::Config(msg));
        if self.lattice.nx == 0 || self.lattice.ny == 0 {
            return fail("lattice.nx and lattice.ny must be at least 1".into());
        }
        if !(self.lattice.a_over_lambda > 0.0) {
            return fail(format!(
                "lattice.a_over_lambda must be positive, got {}",
                self.lattice.a_over_lambda
            ));
        }
        if !(self.atom.recoil_over_gamma > 0.0) {
            return fail(format!(
                "atom.recoil_over_gamma must be positive, got {}",
                self.atom.recoil_over_gamma
            ));
        }
        let t = &self.trap;
        match (t.nu_over_gamma, t.depth_over_recoil, t.trap_length_over_lambda) {
            (Some(nu), None, None) => {
                if !(nu > 0.0) {
                    return fail(format!("trap.nu_over_gamma must be positive, got {nu}"));
                }
            }
            (None, Some(v), Some(l)) => {
                if !(v > 0.0 && l > 0.0) {
                    return fail(format!(
                        "trap.depth_over_recoil and trap.trap_length_over_lambda \
                         must be positive, got {v} and {l}"
                    ));
                }
            }
            (None, None, None) => {
                return fail(
                    "trap: missing stiffness; give nu_over_gamma or \
                     (depth_over_recoil, trap_length_over_lambda)"
                        .into(),
                )
            }
            _ => {
                return fail(
                    "trap: give exactly one of nu_over_gamma or \
                     (depth_over_recoil, trap_length_over_lambda)"
                        .into(),
                )
            }
        }
        let d = &self.drive;
        if !(d.rabi_over_gamma >= 0.0 && d.rabi_over_gamma.is_finite()) {
            return fail(format!(
                "drive.rabi_over_gamma must be finite and nonnegative, got {}",
                d.rabi_over_gamma
            ));
        }
        match (d.kind, d.waist_over_lambda) {
            (DriveKind::Gaussian, None) => {
                return fail("drive.waist_over_lambda: required for the gaussian kind".into())
            }
            (DriveKind::Gaussian, Some(w)) if !(w > 0.0) => {
                return fail(format!("drive.waist_over_lambda must be positive, got {w}"))
            }
            (DriveKind::Uniform, Some(_)) => {
                return fail("drive.waist_over_lambda: only valid for the gaussian kind".into())
            }
            _ => {}
        }
        if !d.detuning_over_linewidth.is_finite() {
            return fail("drive.detuning_over_linewidth must be finite".into());
        }
        if d.sides == SidesSpec::Left && d.phase.is_some() {
            return fail("drive.phase: only valid for a two_sided drive".into());
        }
        if let Some(det) = &self.detection {
            if det.k_perp.is_empty() {
                return fail("detection.k_perp must list at least one wavevector".into());
            }
            if let Some(g) = &det.omega {
                if g.points < 2 {
                    return fail(format!(
                        "detection.omega.points must be at least 2, got {}",
                        g.points
                    ));
                }
                if !(g.max_over_gamma > g.min_over_gamma) {
                    return fail(format!(
                        "detection.omega: max_over_gamma {} must exceed min_over_gamma {}",
                        g.max_over_gamma, g.min_over_gamma
                    ));
                }
            }
        }
        if let Some(o) = &self.oracle {
            if let Some(seg) = o.psd_segment_len {
                if seg < 4 || seg % 2 != 0 {
                    return fail(format!(
                        "oracle.psd_segment_len must be an even number of at least 4, got {seg}"
                    ));
                }
            }
            if o.trajectory_stride == Some(0) {
                return fail("oracle.trajectory_stride must be at least 1".into());
            }
        }
        if let Some(out) = &self.output {
            if out.directory.is_empty() {
                return fail("output.directory must not be empty".into());
            }
            if out.formats.is_empty() {
                return fail("output.formats must list at least one format".into());
            }
        }
        Ok(())
    }

    /// Output section with defaults applied.
    pub fn output(&self) -> OutputSection {
        self.output.clone().unwrap_or_default()
    }

    /// Detection section, required by the spectrum subcommands.
    pub fn detection(&self) -> CliResult<&DetectionSection> {
        self.detection
            .as_ref()
            .ok_or_else(|| Fault::Config("detection: section required for this subcommand".into()))
    }

    /// Oracle section, required by the langevin subcommand.
    pub fn oracle(&self) -> CliResult<&OracleSection> {
        self.oracle
            .as_ref()
            .ok_or_else(|| Fault::Config("oracle: section required for this subcommand".into()))
    }
}

/// Fully assembled model: geometry, optical response, and mechanics.
pub struct Model {
    pub geom: ArrayGeometry,
    pub trap: TrapParams,
    pub drive: DriveProfile,
    pub coop: CooperativeResponse,
    /// Drive detuning from the shifted resonance, delta_L - Delta (gamma).
    pub detuning: f64,
    pub fc: ForceCoefficients,
    pub modes: ModeBasis,
}

/// Builds every stage of the model from a validated configuration.
pub fn build_model(cfg: &RunConfig) -> CliResult<Model> {
    let lift = Fault::from_lib;
    let geom = ArrayGeometry::build(cfg.lattice.nx, cfg.lattice.ny, cfg.lattice.a_over_lambda)
        .map_err(lift)?;
    let trap = match (
        cfg.trap.nu_over_gamma,
        cfg.trap.depth_over_recoil,
        cfg.trap.trap_length_over_lambda,
    ) {
        (Some(nu), _, _) => {
            TrapParams::from_frequency(nu, cfg.atom.recoil_over_gamma).map_err(lift)?
        }
        (None, Some(v), Some(l)) => {
            TrapParams::from_depth(v, l, cfg.atom.recoil_over_gamma).map_err(lift)?
        }
        _ => unreachable!("trap variants checked by validate"),
    };
    let d = &cfg.drive;
    let mut drive = match d.kind {
        DriveKind::Uniform => DriveProfile::uniform(&geom, d.rabi_over_gamma).map_err(lift)?,
        DriveKind::Gaussian => {
            let waist = d.waist_over_lambda.expect("waist checked by validate");
            DriveProfile::gaussian(&geom, waist, d.rabi_over_gamma).map_err(lift)?
        }
    };
    if d.sides == SidesSpec::TwoSided {
        let phase = d.phase.unwrap_or(std::f64::consts::PI);
        drive = drive.with_sides(Sides::TwoSided { phase });
    }
    let coop = CooperativeResponse::of_geometry(&geom);
    let detuning =
        DetuningSpec::OverLinewidth(d.detuning_over_linewidth).resolve(coop.delta, coop.linewidth());
    let fc = ForceCoefficients::build(&geom, &drive, &coop, &trap, detuning).map_err(lift)?;
    let modes = normal_modes(&fc, &trap).map_err(lift)?;
    Ok(Model { geom, trap, drive, coop, detuning, fc, modes })
}

/// Frequency grid for the spectrum subcommands: the configured uniform
/// grid, or [-2 nu, 2 nu] with 4001 points.
pub fn omega_grid(detection: &DetectionSection, trap: &TrapParams) -> DVector<f64> {
    match &detection.omega {
        Some(g) => {
            let n = g.points;
            let lo = g.min_over_gamma;
            let hi = g.max_over_gamma;
            let span = (n - 1) as f64;
            // Endpoint-exact blend; a running lo + i*step would round the
            // last point off the configured maximum.
            DVector::from_fn(n, |i, _| {
                (lo * (span - i as f64) + hi * i as f64) / span
            })
        }
        None => optomech::spectra::default_omega_grid(trap.nu),
    }
}
