//! JSON experiment files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "kind": "ensemble",
//!   "name": "bilayer-case-a",
//!   "seed": 42,
//!   "network": { "case": "a", "layers": [350, 450], "intra_p": [0.04, 0.05] },
//!   "realizations": 100,
//!   "k_orders": [2, 3]
//! }
//! ```
//!
//! Unknown keys are rejected. The experiment hash is the SHA-256 of the
//! effective experiment (after `--seed` / `--paper-scale` overrides)
//! serialized as JSON.

use std::path::{Path, PathBuf};

use mlnet_core::analytics::alpha_for;
use mlnet_core::netgen::{DiagMode, MultilayerSpec, NetworkCase, OffDiagMode, Scaling};
use mlnet_core::protein::PartitionMode;
use mlnet_core::spectral::{AlphaGrid, DEFAULT_BIN_WIDTH, DEFAULT_SUPPORT_CUT};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensemble::ExperimentPlan;
use crate::error::{Error, Result};
use crate::protein::ThresholdMode;

pub const FORMAT_VERSION: u32 = 1;

const DEFAULT_PAPER_REALIZATIONS: u64 = 250;

fn default_scaling() -> Scaling {
    Scaling::ProbabilityBased
}

fn default_paper_realizations() -> u64 {
    DEFAULT_PAPER_REALIZATIONS
}

fn default_atom() -> String {
    mlnet_core::protein::DEFAULT_ATOM.into()
}

fn default_rmax() -> f64 {
    5.0
}

fn default_step() -> f64 {
    0.01
}

fn default_bin_width() -> f64 {
    DEFAULT_BIN_WIDTH
}

fn default_support_cut() -> f64 {
    DEFAULT_SUPPORT_CUT
}

/// Network description: either a `case` (a–d) or explicit block modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<NetworkCase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag_mode: Option<DiagMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub off_diag_mode: Option<OffDiagMode>,
    pub layers: Vec<usize>,
    #[serde(default)]
    pub intra_p: Vec<f64>,
    #[serde(default)]
    pub inter_p: Vec<f64>,
    #[serde(default = "default_scaling")]
    pub scaling: Scaling,
}

impl NetworkConfig {
    pub fn to_spec(&self, seed: u64) -> Result<MultilayerSpec> {
        let mut spec = match (self.case, self.diag_mode, self.off_diag_mode) {
            (Some(case), None, None) => MultilayerSpec::for_case(case, &self.layers, &self.intra_p, &self.inter_p),
            (None, Some(diag_mode), Some(off_diag_mode)) => MultilayerSpec {
                layers: self.layers.clone(),
                intra_p: self.intra_p.clone(),
                inter_p: self.inter_p.clone(),
                diag_mode,
                off_diag_mode,
                scaling: Scaling::ProbabilityBased,
                gamma: None,
                seed: 0,
            },
            _ => {
                return Err(Error::Schema(
                    "network needs either \"case\" or both \"diag_mode\" and \"off_diag_mode\"".into(),
                ))
            }
        };
        spec.scaling = self.scaling;
        spec.seed = seed;
        spec.validate()?;
        Ok(spec)
    }
}

/// Histogram and fit settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    #[serde(default = "default_support_cut")]
    pub support_cut: f64,
    #[serde(default)]
    pub alpha_grid: AlphaGrid,
    /// Reference α values whose KS distances are reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_alphas: Option<Vec<f64>>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            bin_width: DEFAULT_BIN_WIDTH,
            support_cut: DEFAULT_SUPPORT_CUT,
            alpha_grid: AlphaGrid::default(),
            candidate_alphas: None,
        }
    }
}

impl AnalysisConfig {
    fn validate(&self) -> Result<()> {
        self.alpha_grid.validate()?;
        if !(self.bin_width > 0.0 && self.support_cut > self.bin_width) {
            return Err(Error::Schema("need 0 < bin_width < support_cut".into()));
        }
        Ok(())
    }

    /// `candidate_alphas`, or the table α values for `k` and `m = 1..=4`.
    pub fn candidates(&self, k_orders: &[usize]) -> Vec<f64> {
        if let Some(c) = &self.candidate_alphas {
            return c.clone();
        }
        let mut out: Vec<f64> = k_orders
            .iter()
            .flat_map(|&k| (1..=4).filter_map(move |m| alpha_for(k, m).ok()))
            .filter(|&a| a > 0.0)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Full-figure dimensions selected by `--paper-scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaperScale {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<usize>>,
    #[serde(default = "default_paper_realizations")]
    pub realizations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleExperiment {
    pub version: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub network: NetworkConfig,
    pub realizations: u64,
    pub k_orders: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paper_scale: Option<PaperScale>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

impl EnsembleExperiment {
    pub fn plan(&self) -> Result<ExperimentPlan> {
        let mut plan = ExperimentPlan::new(self.network.to_spec(self.seed)?, self.realizations, &self.k_orders);
        plan.expected_m = self.expected_m;
        plan.validate()?;
        Ok(plan)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossoverExperiment {
    pub version: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub layers: [usize; 2],
    pub intra_p: [f64; 2],
    pub inter_p: f64,
    #[serde(default = "default_scaling")]
    pub scaling: Scaling,
    pub gammas: Vec<f64>,
    pub realizations: u64,
    pub k_orders: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paper_scale: Option<PaperScale>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

impl CrossoverExperiment {
    /// Plan at γ = first sweep value; the sweep overrides γ per point.
    pub fn plan(&self) -> Result<ExperimentPlan> {
        let gamma = self.gammas.first().copied().unwrap_or(0.0);
        let spec = MultilayerSpec::crossover(self.layers, self.intra_p[0], self.intra_p[1], self.inter_p, gamma)
            .with_scaling(self.scaling)
            .with_seed(self.seed);
        let plan = ExperimentPlan::new(spec, self.realizations, &self.k_orders);
        plan.validate()?;
        Ok(plan)
    }

    /// References: the two-block and single-block table values per order.
    pub fn candidates(&self) -> Vec<f64> {
        if let Some(c) = &self.analysis.candidate_alphas {
            return c.clone();
        }
        let mut out: Vec<f64> = self
            .k_orders
            .iter()
            .flat_map(|&k| [alpha_for(k, 2).ok(), alpha_for(k, 1).ok()])
            .flatten()
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Published edge counts at one threshold pair, for comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceCounts {
    pub td: f64,
    pub td_inter: f64,
    pub diag: Vec<u64>,
    #[serde(default)]
    pub off: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProteinExperiment {
    pub version: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// PDB file; relative paths resolve against the experiment file.
    pub structure: PathBuf,
    #[serde(default = "default_atom")]
    pub atom: String,
    pub partition: PartitionMode,
    pub mode: ThresholdMode,
    pub thresholds: Vec<f64>,
    pub k_orders: Vec<usize>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_residues: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reference_counts: Vec<ReferenceCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticExperiment {
    pub version: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub alphas: Vec<f64>,
    #[serde(default = "default_rmax")]
    pub rmax: f64,
    #[serde(default = "default_step")]
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    Ensemble(EnsembleExperiment),
    Crossover(CrossoverExperiment),
    Protein(ProteinExperiment),
    Analytic(AnalyticExperiment),
}

impl Experiment {
    /// Reads, parses and validates an experiment file. Relative structure
    /// paths are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        let mut exp: Experiment = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })?;
        if let Experiment::Protein(p) = &mut exp {
            if p.structure.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                p.structure = base.join(&p.structure);
            }
        }
        exp.validate()?;
        Ok(exp)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Ensemble(_) => "ensemble",
            Experiment::Crossover(_) => "crossover",
            Experiment::Protein(_) => "protein",
            Experiment::Analytic(_) => "analytic",
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Experiment::Ensemble(e) => &e.name,
            Experiment::Crossover(e) => &e.name,
            Experiment::Protein(e) => &e.name,
            Experiment::Analytic(e) => &e.name,
        }
    }

    fn version(&self) -> u32 {
        match self {
            Experiment::Ensemble(e) => e.version,
            Experiment::Crossover(e) => e.version,
            Experiment::Protein(e) => e.version,
            Experiment::Analytic(e) => e.version,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version() != FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                self.version()
            )));
        }
        let name = self.name();
        if name.is_empty() || name.starts_with('.') || name.contains(['/', '\\']) {
            return Err(Error::Schema(format!("name {name:?} is not a valid directory name")));
        }
        match self {
            Experiment::Ensemble(e) => {
                e.analysis.validate()?;
                e.plan()?;
            }
            Experiment::Crossover(e) => {
                e.analysis.validate()?;
                if e.gammas.is_empty() {
                    return Err(Error::Schema("gammas must not be empty".into()));
                }
                for &g in &e.gammas {
                    let mut plan = e.plan()?;
                    plan.spec.gamma = Some(g);
                    plan.validate()?;
                }
            }
            Experiment::Protein(e) => {
                e.analysis.validate()?;
                if e.thresholds.is_empty() || e.k_orders.is_empty() {
                    return Err(Error::Schema("thresholds and k_orders must not be empty".into()));
                }
                if e.thresholds.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
                    return Err(Error::Schema("thresholds must be positive".into()));
                }
                if let ThresholdMode::InterOnly { td } = e.mode {
                    if !(td > 0.0) || !td.is_finite() {
                        return Err(Error::Schema("inter_only td must be positive".into()));
                    }
                }
                if e.k_orders.contains(&0) {
                    return Err(Error::Schema("ratio orders start at k = 1".into()));
                }
            }
            Experiment::Analytic(e) => {
                if e.alphas.is_empty() {
                    return Err(Error::Schema("alphas must not be empty".into()));
                }
                if !(e.step > 0.0 && e.rmax >= e.step) || !e.rmax.is_finite() {
                    return Err(Error::Schema("need 0 < step <= rmax".into()));
                }
            }
        }
        Ok(())
    }

    /// Replaces the master seed.
    pub fn set_seed(&mut self, seed: u64) {
        match self {
            Experiment::Ensemble(e) => e.seed = seed,
            Experiment::Crossover(e) => e.seed = seed,
            Experiment::Protein(e) => e.seed = seed,
            Experiment::Analytic(e) => e.seed = seed,
        }
    }

    /// Switches to the full-figure dimensions: the `paper_scale` block's
    /// layer sizes (if any) and its realization count (default 250).
    pub fn apply_paper_scale(&mut self) -> Result<()> {
        fn apply(layers: &mut [usize], realizations: &mut u64, scale: &Option<PaperScale>) -> Result<()> {
            let default = PaperScale {
                layers: None,
                realizations: DEFAULT_PAPER_REALIZATIONS,
            };
            let scale = scale.as_ref().unwrap_or(&default);
            if let Some(l) = &scale.layers {
                if l.len() != layers.len() {
                    return Err(Error::Schema("paper_scale.layers must match the layer count".into()));
                }
                layers.copy_from_slice(l);
            }
            *realizations = scale.realizations;
            Ok(())
        }
        match self {
            Experiment::Ensemble(e) => apply(&mut e.network.layers, &mut e.realizations, &e.paper_scale)?,
            Experiment::Crossover(e) => apply(&mut e.layers, &mut e.realizations, &e.paper_scale)?,
            Experiment::Protein(_) | Experiment::Analytic(_) => {}
        }
        self.validate()
    }

    /// Hex SHA-256 of the experiment as JSON.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("experiment serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
