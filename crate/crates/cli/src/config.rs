//! Run configuration. Every section carries its defaults, so an empty file
//! is a valid configuration; unknown keys are rejected.

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use meridian::biot_savart::{QuadratureSpec, TraceComponent};
use meridian::bounds::{BoundEnvelope, KernelKind, LogGrid};
use meridian::geometry::{AxialEnvelope, Profile, ScalarProfile, Support};
use meridian::norms::BmoVariant;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Seed for randomized checks.
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Output directory.
    pub out: String,
    pub quadrature: QuadratureSpec,
    pub kernel_scan: KernelScanConfig,
    pub decay: DecayConfig,
    pub feasibility: FeasibilityConfig,
    pub roundtrip: RoundtripConfig,
    pub bmo: BmoConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelScanConfig {
    pub kind: KernelKind,
    pub alphas: Vec<f64>,
    /// Relative accuracy of each kernel evaluation.
    pub rel_tol: f64,
    /// Also run the twofold refined grid and judge stability.
    pub refine: bool,
    pub grid: LogGrid,
}

impl Default for KernelScanConfig {
    fn default() -> Self {
        Self { kind: KernelKind::Gamma23, alphas: vec![0.0, 0.5, 1.0], rel_tol: 1e-8, refine: false, grid: LogGrid::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    /// Radial decay exponent of `w_θ = (1 + r)^(−β) η(z)`.
    pub beta: f64,
    pub envelope: AxialEnvelope,
    pub component: TraceComponent,
    /// Ladder `r_min · 2^j`, `j = 0 .. levels − 1`.
    pub r_min: f64,
    pub levels: usize,
    pub z: f64,
    /// Slack allowed above the predicted exponent.
    pub slope_tolerance: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            beta: 3.0,
            envelope: AxialEnvelope::default(),
            component: TraceComponent::Meridional,
            r_min: 10.0,
            levels: 8,
            z: 0.0,
            slope_tolerance: 0.1,
        }
    }
}

impl DecayConfig {
    pub fn ladder(&self) -> Vec<f64> {
        (0..self.levels).map(|j| self.r_min * 2f64.powi(j as i32)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeasibilityConfig {
    pub mus: Vec<f64>,
    pub n_delta: usize,
    pub n_q: usize,
    /// Random `μ ∈ (2/3, 10]` on which the construction is checked.
    pub random_checks: usize,
    /// Optional sweep written as a boundary curve.
    pub sweep: Option<Sweep>,
}

impl Default for FeasibilityConfig {
    fn default() -> Self {
        Self { mus: vec![0.6, 1.0], n_delta: 200, n_q: 200, random_checks: 200, sweep: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub mu_min: f64,
    pub mu_max: f64,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundtripCase {
    /// `profile` is a stream function; velocity is `(u_r, 0, u_z)`.
    NoSwirl,
    /// `profile` is `u_θ`.
    PureSwirl,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoundtripConfig {
    pub case: RoundtripCase,
    pub profile: Profile,
    /// Probe lattice `[r_lo, r_hi] × [z_lo, z_hi]`, `n_r × n_z` points.
    pub r_range: [f64; 2],
    pub z_range: [f64; 2],
    pub n_r: usize,
    pub n_z: usize,
    /// Step of the finite-difference fallback in the curl.
    pub h: f64,
    pub threshold: f64,
}

impl Default for RoundtripConfig {
    fn default() -> Self {
        Self {
            case: RoundtripCase::NoSwirl,
            profile: Profile::Bump { amp: 1.0, r0: 2.8, z0: 0.1, radius: 1.2, r_power: 2 },
            r_range: [1.6, 4.4],
            z_range: [-0.9, 0.9],
            n_r: 5,
            n_z: 4,
            h: 1e-3,
            threshold: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BmoConfig {
    /// Scales `2^k`, `k = min_exp ..= max_exp`.
    pub min_exp: i32,
    pub max_exp: i32,
    pub variants: Vec<BmoVariant>,
    pub ratio_limit: f64,
}

impl Default for BmoConfig {
    fn default() -> Self {
        Self {
            min_exp: 1,
            max_exp: 20,
            variants: vec![BmoVariant::Three, BmoVariant::TwoThirds, BmoVariant::Twelve],
            ratio_limit: 1.01,
        }
    }
}

fn finite_positive(x: f64, what: &str) -> Result<()> {
    ensure!(x > 0.0 && x.is_finite(), "{what} must be positive and finite, got {x}");
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).context("config does not parse")
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate_kernel_scan(&self) -> Result<()> {
        let c = &self.kernel_scan;
        ensure!(!c.alphas.is_empty(), "kernel_scan.alphas is empty");
        for &a in &c.alphas {
            BoundEnvelope::new(c.kind, a).with_context(|| format!("kernel_scan.alphas: {a} is not usable for {}", c.kind))?;
        }
        finite_positive(c.rel_tol, "kernel_scan.rel_tol")?;
        c.grid.validate().context("kernel_scan.grid")?;
        Ok(())
    }

    pub fn validate_decay(&self) -> Result<()> {
        let c = &self.decay;
        ensure!(c.beta > 1.0 && c.beta.is_finite(), "decay.beta must exceed 1 for the vorticity to be admissible, got {}", c.beta);
        c.envelope.validate().context("decay.envelope")?;
        ensure!(c.r_min > 1.0 && c.r_min.is_finite(), "decay.r_min must exceed 1, got {}", c.r_min);
        ensure!(c.levels >= 5, "decay.levels must be at least 5 for a fit, got {}", c.levels);
        ensure!(c.z.is_finite(), "decay.z must be finite");
        ensure!(c.slope_tolerance >= 0.0, "decay.slope_tolerance must be non-negative");
        self.quadrature.validate().context("quadrature")?;
        Ok(())
    }

    pub fn validate_feasibility(&self) -> Result<()> {
        let c = &self.feasibility;
        ensure!(!c.mus.is_empty() || c.sweep.is_some() || c.random_checks > 0, "feasibility has nothing to do");
        for &mu in &c.mus {
            finite_positive(mu, "feasibility.mus entry")?;
        }
        ensure!(c.n_delta >= 1 && c.n_q >= 1, "feasibility grids need at least one node per axis");
        if let Some(s) = &c.sweep {
            finite_positive(s.mu_min, "feasibility.sweep.mu_min")?;
            ensure!(s.mu_max >= s.mu_min && s.mu_max.is_finite(), "feasibility.sweep needs mu_max >= mu_min");
            ensure!(s.n >= 2, "feasibility.sweep.n must be at least 2");
        }
        Ok(())
    }

    pub fn validate_roundtrip(&self) -> Result<()> {
        let c = &self.roundtrip;
        ensure!(c.r_range[0] > 1.0 && c.r_range[1] >= c.r_range[0], "roundtrip.r_range must satisfy 1 < lo <= hi");
        ensure!(c.z_range[1] >= c.z_range[0], "roundtrip.z_range must satisfy lo <= hi");
        ensure!(c.n_r >= 1 && c.n_z >= 1, "roundtrip probe lattice is empty");
        finite_positive(c.h, "roundtrip.h")?;
        finite_positive(c.threshold, "roundtrip.threshold")?;
        if c.case != RoundtripCase::Zero
            && matches!(c.profile.support(), Support::Unbounded) {
                bail!("roundtrip.profile must have bounded support (a bump, or a sum of bumps)");
            }
        self.quadrature.validate().context("quadrature")?;
        Ok(())
    }

    pub fn validate_bmo(&self) -> Result<()> {
        let c = &self.bmo;
        ensure!(c.max_exp >= c.min_exp, "bmo.max_exp must be at least bmo.min_exp");
        ensure!((-60..=60).contains(&c.min_exp) && (-60..=60).contains(&c.max_exp), "bmo exponents must lie in [-60, 60]");
        ensure!(!c.variants.is_empty(), "bmo.variants is empty");
        ensure!(c.ratio_limit > 1.0, "bmo.ratio_limit must exceed 1");
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = RunConfig::default();
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("sed = 3").is_err());
        assert!(RunConfig::parse("[decay]\nbta = 3.0").is_err());
        assert!(RunConfig::parse("[kernel_scan.grid]\nn_rr = 3").is_err());
    }

    #[test]
    fn validation_messages() {
        let mut c = RunConfig::default();
        c.decay.beta = 0.9;
        assert!(c.validate_decay().unwrap_err().to_string().contains("beta"));
        let mut c = RunConfig::default();
        c.kernel_scan.kind = KernelKind::Gamma23;
        c.kernel_scan.alphas = vec![5.0];
        assert!(c.validate_kernel_scan().is_err());
        let mut c = RunConfig::default();
        c.roundtrip.r_range = [0.5, 2.0];
        assert!(c.validate_roundtrip().is_err());
        RunConfig::default().validate_bmo().unwrap();
        RunConfig::default().validate_feasibility().unwrap();
    }
}
