use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::padic::{NormValue, PrecisionContext};

/// A full run description; the JSON form is `{"command": "shadow", ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Shadow(ShadowConfig),
    Conjugate(ConjugateConfig),
    Analyze(AnalyzeConfig),
    Counterexample(CounterexampleConfig),
    Suite(SuiteConfig),
}

impl ExperimentConfig {
    pub fn command(&self) -> &'static str {
        match self {
            ExperimentConfig::Shadow(_) => "shadow",
            ExperimentConfig::Conjugate(_) => "conjugate",
            ExperimentConfig::Analyze(_) => "analyze",
            ExperimentConfig::Counterexample(_) => "counterexample",
            ExperimentConfig::Suite(_) => "suite",
        }
    }
}

/// Prime, digit budget and, for ℚ_p, the exponent window.
#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContextArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    /// Digit budget N.
    #[arg(long, default_value_t = 8)]
    pub n: u32,
    /// Lowest exponent of a ℚ_p window; setting either bound selects ℚ_p.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_min: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_max: Option<i32>,
}

impl Default for ContextArgs {
    fn default() -> Self {
        ContextArgs { p: 3, n: 8, u_min: None, u_max: None }
    }
}

impl ContextArgs {
    pub fn zp(p: u32, n: u32) -> Self {
        ContextArgs { p, n, u_min: None, u_max: None }
    }

    pub fn context(&self) -> Result<PrecisionContext> {
        match (self.u_min, self.u_max) {
            (None, None) => PrecisionContext::zp(self.p, self.n),
            (lo, hi) => PrecisionContext::qp(self.p, self.n, lo.unwrap_or(0), hi.unwrap_or(0)),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleToggle {
    On,
    Off,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShadowConfig {
    #[command(flatten)]
    #[serde(flatten)]
    pub context: ContextArgs,
    /// Map spec; needs a known right-inverse family.
    #[arg(long, default_value = "shift_zp")]
    pub map: String,
    #[arg(long, default_value = "p^-3")]
    pub delta: NormValue,
    #[arg(long, default_value_t = 50)]
    pub length: usize,
    /// Number of seeded pseudo-orbits.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "on")]
    pub oracle: OracleToggle,
    /// Largest residue count the oracle enumerates.
    #[arg(long, default_value_t = 1 << 16)]
    pub oracle_limit: u64,
}

impl Default for ShadowConfig {
    fn default() -> Self {
        ShadowConfig {
            context: ContextArgs::default(),
            map: "shift_zp".into(),
            delta: NormValue::Pow(3),
            length: 50,
            seeds: 20,
            seed: 0,
            oracle: OracleToggle::On,
            oracle_limit: 1 << 16,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    /// Perturbations of a map with a covering family of right inverses.
    #[value(name = "1")]
    #[serde(rename = "1")]
    One,
    /// Perturbations of a bi-Lipschitz contraction.
    #[value(name = "3")]
    #[serde(rename = "3")]
    Three,
    /// Transferred right inverses and their Lipschitz bound.
    #[value(name = "lemma51")]
    #[serde(rename = "lemma51")]
    Lemma51,
    #[value(name = "homogeneity")]
    #[serde(rename = "homogeneity")]
    Homogeneity,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConjugateConfig {
    #[command(flatten)]
    #[serde(flatten)]
    pub context: ContextArgs,
    #[arg(long, value_enum, default_value = "1")]
    pub theorem: Theorem,
    #[arg(long, default_value = "shift_zp")]
    pub map: String,
    /// Perturbation spec; its seed is replaced by each case seed.
    #[arg(long, default_value = "digit_local(delta=p^-2)")]
    pub perturbation: String,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    #[arg(long, default_value_t = 12)]
    pub window: usize,
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sequence length for the homogeneity construction.
    #[arg(long, default_value_t = 10)]
    pub points: usize,
    /// Closeness of the homogeneity sequences.
    #[arg(long, default_value = "p^-2")]
    pub delta: NormValue,
}

impl Default for ConjugateConfig {
    fn default() -> Self {
        ConjugateConfig {
            context: ContextArgs::default(),
            theorem: Theorem::One,
            map: "shift_zp".into(),
            perturbation: "digit_local(delta=p^-2)".into(),
            depth: 6,
            window: 12,
            seeds: 10,
            seed: 0,
            points: 10,
            delta: NormValue::Pow(2),
        }
    }
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalyzeConfig {
    #[command(flatten)]
    #[serde(flatten)]
    pub context: ContextArgs,
    #[arg(long, default_value = "shift_zp")]
    pub map: String,
    /// Comma list of lip, scaling, open, expansive, locally-scaling:k[:m].
    #[arg(long, default_value = "lip,scaling,open,expansive")]
    pub checks: String,
    /// Orbit horizon of the expansivity scan; defaults to N.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            context: ContextArgs::default(),
            map: "shift_zp".into(),
            checks: "lip,scaling,open,expansive".into(),
            horizon: None,
        }
    }
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CounterexampleConfig {
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    /// Digit levels of the Cantor chart.
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
    #[arg(long, default_value = "p^-6")]
    pub delta: NormValue,
    #[arg(long, default_value = "p^-2")]
    pub epsilon: NormValue,
    /// Skip the lifted check on f.
    #[arg(long)]
    pub no_lift: bool,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig { p: 3, depth: 10, delta: NormValue::Pow(6), epsilon: NormValue::Pow(2), no_lift: false }
    }
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    /// Small battery at p ∈ {2, 3}, N = 8.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
