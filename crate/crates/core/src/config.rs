//! Configuration schema for the command-line runner.
//!
//! Strict parsing: unknown keys are rejected everywhere, and every module
//! precondition is checked eagerly by [`ExperimentConfig::validate`] with an
//! error naming the violated constraint.

use crate::blaschke::{make_blaschke, BlaschkeProduct};
use crate::error::{Error, Result};
use crate::harness::{Mode, Sampling, Thresholds};
use crate::quad::midpoint_offset;
use crate::sequences::CoefficientSequence;
use crate::C64;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Inner-function spec: `{phase_angle: radians, zeros: [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerFunctionSpec {
    #[serde(default)]
    pub phase_angle: f64,
    pub zeros: Vec<[f64; 2]>,
}

impl InnerFunctionSpec {
    pub fn build(&self) -> Result<BlaschkeProduct> {
        let zeros: Vec<C64> = self.zeros.iter().map(|z| C64::new(z[0], z[1])).collect();
        make_blaschke(C64::from_polar(1.0, self.phase_angle), &zeros)
    }
}

/// Coefficient-sequence spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    Constant { value: [f64; 2] },
    Power { exponent: f64 },
    Geometric { ratio: f64 },
    Explicit { values: Vec<[f64; 2]> },
    RandomPhase { moduli: Vec<f64>, seed: u64 },
}

impl SequenceSpec {
    pub fn build(&self) -> CoefficientSequence {
        match self {
            SequenceSpec::Constant { value } => {
                CoefficientSequence::Constant(C64::new(value[0], value[1]))
            }
            SequenceSpec::Power { exponent } => CoefficientSequence::Power(*exponent),
            SequenceSpec::Geometric { ratio } => CoefficientSequence::Geometric(*ratio),
            SequenceSpec::Explicit { values } => CoefficientSequence::Explicit(
                values.iter().map(|v| C64::new(v[0], v[1])).collect(),
            ),
            SequenceSpec::RandomPhase { moduli, seed } => {
                CoefficientSequence::RandomPhase { moduli: moduli.clone(), seed: *seed }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct ModeSpec {
    pub kind: ModeKind,
    /// Tail cutoff; omitted means auto-selection by the truncation rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Partial,
    Tail,
}

impl Default for ModeSpec {
    fn default() -> Self {
        Self { kind: ModeKind::Partial, cutoff: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct SamplingSpec {
    pub kind: SamplingKind,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Grid offset in radians; omitted means the midpoint offset π/M.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingKind {
    Grid,
    Mc,
}

impl SamplingSpec {
    pub fn build(&self, fallback_seed: u64) -> Sampling {
        match self.kind {
            SamplingKind::Grid => Sampling::Grid {
                m: self.m,
                offset: self.offset.unwrap_or_else(|| midpoint_offset(self.m)),
            },
            SamplingKind::Mc => {
                Sampling::Mc { seed: self.seed.unwrap_or(fallback_seed), m: self.m }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_modulus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_moment_window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cf_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial_p: Option<f64>,
}

impl ThresholdSpec {
    pub fn build(&self) -> Thresholds {
        let d = Thresholds::default();
        Thresholds {
            mean_modulus: self.mean_modulus,
            second_moment_window: self.second_moment_window,
            cf_gap: self.cf_gap.unwrap_or(d.cf_gap),
            ks_p: self.ks_p.unwrap_or(d.ks_p),
            radial_p: self.radial_p.unwrap_or(d.radial_p),
        }
    }
}

/// Parameters for the `blocks` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlocksSpec {
    pub n: u64,
    /// Envelope horizon for non-analytic kinds (defaults to n).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
}

/// Parameters for the `clark` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClarkSpec {
    #[serde(default = "default_alpha_count")]
    pub alpha_count: usize,
    #[serde(default = "default_l_max")]
    pub l_max: u32,
}

fn default_alpha_count() -> usize {
    64
}

fn default_l_max() -> u32 {
    8
}

/// Parameters for the `correlations`/`verify` commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationsSpec {
    #[serde(default = "default_n_max")]
    pub n_max: u32,
}

fn default_n_max() -> u32 {
    12
}

/// Top-level experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<InnerFunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u64>>,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingSpec>,
    /// Characteristic-function test points as [re, im]; must contain 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<ThresholdSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<BlocksSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clark: Option<ClarkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlations: Option<CorrelationsSpec>,
}

/// Fully validated experiment inputs for the sampling commands.
pub struct ValidatedExperiment {
    pub f: BlaschkeProduct,
    pub seq: CoefficientSequence,
    pub n_list: Vec<u64>,
    pub mode_kind: ModeKind,
    pub cutoff: Option<u64>,
    pub sampling: Sampling,
    pub t_grid: Vec<C64>,
    pub thresholds: Thresholds,
}

impl ExperimentConfig {
    pub fn check_version(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Domain(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        Ok(())
    }

    /// Validate the sampling-experiment portion (clt/tails/optimality/sweep).
    pub fn validate_experiment(&self, default_seed: u64) -> Result<ValidatedExperiment> {
        self.check_version()?;
        let inner = self
            .inner
            .as_ref()
            .ok_or_else(|| Error::Argument("config needs an [inner] section".into()))?;
        let f = inner.build()?;
        let seq_spec = self
            .sequence
            .as_ref()
            .ok_or_else(|| Error::Argument("config needs a [sequence] section".into()))?;
        let seq = seq_spec.build();
        let n_list: Vec<u64> = match (&self.n, &self.n_list) {
            (Some(n), None) => vec![*n],
            (None, Some(list)) if !list.is_empty() => list.clone(),
            _ => return Err(Error::Argument("config needs exactly one of n or n_list".into())),
        };
        if self.mode.kind == ModeKind::Tail && !seq.is_square_summable() {
            return Err(Error::DivergentSequence(
                "tail mode requires a square-summable sequence kind".into(),
            ));
        }
        let sampling_spec = self.sampling.clone().unwrap_or(SamplingSpec {
            kind: SamplingKind::Grid,
            m: 200_000,
            seed: None,
            offset: None,
        });
        if sampling_spec.m < 1 {
            return Err(Error::Argument("sampling.m must be at least 1".into()));
        }
        let t_grid: Vec<C64> = match &self.t_grid {
            None => crate::harness::default_t_grid(),
            Some(list) => {
                let pts: Vec<C64> = list.iter().map(|t| C64::new(t[0], t[1])).collect();
                if !pts.iter().any(|t| t.norm() == 0.0) {
                    return Err(Error::Argument("t_grid must contain 0".into()));
                }
                pts
            }
        };
        Ok(ValidatedExperiment {
            f,
            seq,
            n_list,
            mode_kind: self.mode.kind,
            cutoff: self.mode.cutoff,
            sampling: sampling_spec.build(default_seed),
            t_grid,
            thresholds: self.thresholds.unwrap_or_default().build(),
        })
    }

    /// Resolve the run mode for a given N (tail cutoffs may be automatic).
    pub fn resolve_mode(&self, v: &ValidatedExperiment, n: u64) -> Result<Mode> {
        match v.mode_kind {
            ModeKind::Partial => Ok(Mode::Partial),
            ModeKind::Tail => {
                let lambda = v.f.derivative_at_zero();
                let cutoff = match v.cutoff {
                    Some(c) => c,
                    None => crate::harness::auto_cutoff(&v.seq, lambda, n, 1e-3)?,
                };
                if cutoff < n {
                    return Err(Error::Argument("cutoff must be >= n".into()));
                }
                Ok(Mode::Tail { cutoff })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_toml() -> &'static str {
        r#"
schema_version = 1

[inner]
zeros = [[0.0, 0.0], [0.5, 0.0]]

[sequence]
kind = "constant"
value = [1.0, 0.0]

[mode]
kind = "partial"
"#
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let mut cfg: ExperimentConfig = toml::from_str(minimal_toml()).unwrap();
        cfg.n = Some(100);
        let v = cfg.validate_experiment(1).unwrap();
        assert_eq!(v.n_list, vec![100]);
        assert!(matches!(v.sampling, Sampling::Grid { m: 200_000, .. }));
        assert!(v.t_grid.iter().any(|t| t.norm() == 0.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = format!("{}\nunknown_key = 3\n", minimal_toml());
        assert!(toml::from_str::<ExperimentConfig>(&bad).is_err());
        let bad_inner = minimal_toml().replace("zeros =", "zeroes_typo = 1\nzeros =");
        assert!(toml::from_str::<ExperimentConfig>(&bad_inner).is_err());
    }

    #[test]
    fn zero_outside_disk_is_named() {
        let bad = minimal_toml().replace("[[0.0, 0.0], [0.5, 0.0]]", "[[0.0, 0.0], [1.5, 0.0]]");
        let mut cfg: ExperimentConfig = toml::from_str(&bad).unwrap();
        cfg.n = Some(10);
        assert!(matches!(
            cfg.validate_experiment(1),
            Err(Error::ZeroOutsideDisk(_))
        ));
    }

    #[test]
    fn tail_mode_rejects_divergent_sequence() {
        let tail = minimal_toml().replace("kind = \"partial\"", "kind = \"tail\"");
        let mut cfg: ExperimentConfig = toml::from_str(&tail).unwrap();
        cfg.n = Some(10);
        assert!(matches!(
            cfg.validate_experiment(1),
            Err(Error::DivergentSequence(_))
        ));
    }

    #[test]
    fn schema_version_is_checked() {
        let wrong = minimal_toml().replace("schema_version = 1", "schema_version = 99");
        let cfg: ExperimentConfig = toml::from_str(&wrong).unwrap();
        assert!(cfg.check_version().is_err());
    }
}
