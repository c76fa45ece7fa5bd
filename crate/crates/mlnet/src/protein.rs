//! Threshold sweeps over residue contact networks.

use std::path::Path;

use mlnet_core::netgen::EdgeCounts;
use mlnet_core::protein::{
    build_adjacency, parse_structure, scaled_protein_matrix, LayerPartition, ProteinStructure, ThresholdConfig,
};
use mlnet_core::spectral::{eigenvalues, spacing_ratios, AlphaFitter};
use mlnet_core::BlockId;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{fit_order, OrderFit, PooledRatios, SweepAxis, SweepPoint, SweepResult};
use crate::error::{Error, Result};

/// Reads and parses a PDB file.
pub fn load_structure(path: &Path, atom: &str) -> Result<ProteinStructure> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().to_uppercase())
                .unwrap_or_else(|| "<ID>".into());
            return Err(Error::MissingStructure {
                path: path.to_owned(),
                hint: format!(
                    "download https://files.rcsb.org/download/{id}.pdb to that path \
                     (scripts/fetch_pdb.sh does this for the bundled experiments)"
                ),
            });
        }
        Err(e) => return Err(Error::Io { path: path.to_owned(), source: e }),
    };
    parse_structure(&text, atom).map_err(|source| Error::Structure {
        path: path.to_owned(),
        source,
    })
}

/// How thresholds move along a protein sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// `Td = Td_Inter`, both swept.
    Joint,
    /// `Td` fixed, `Td_Inter` swept.
    InterOnly { td: f64 },
}

impl ThresholdMode {
    pub fn thresholds(&self, value: f64) -> ThresholdConfig {
        match *self {
            ThresholdMode::Joint => ThresholdConfig::joint(value),
            ThresholdMode::InterOnly { td } => ThresholdConfig { td, td_inter: value },
        }
    }

    pub fn axis(&self) -> SweepAxis {
        match self {
            ThresholdMode::Joint => SweepAxis::Td,
            ThresholdMode::InterOnly { .. } => SweepAxis::TdInter,
        }
    }
}

/// One threshold point: counts, skipped blocks and fits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub thresholds: ThresholdConfig,
    pub edge_counts: EdgeCounts,
    pub unscaled_blocks: Vec<BlockId>,
    pub fits: Vec<OrderFit>,
    #[serde(skip)]
    pub samples: PooledRatios,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProteinSweep {
    pub source_id: String,
    pub residues: usize,
    pub skipped_residues: usize,
    pub layer_sizes: Vec<usize>,
    pub mode: ThresholdMode,
    pub points: Vec<ThresholdPoint>,
}

impl ProteinSweep {
    pub fn to_sweep_result(&self) -> SweepResult {
        let axis = self.mode.axis();
        SweepResult {
            axis,
            points: self
                .points
                .iter()
                .map(|p| SweepPoint {
                    value: match axis {
                        SweepAxis::TdInter => p.thresholds.td_inter,
                        _ => p.thresholds.td,
                    },
                    fits: p.fits.clone(),
                })
                .collect(),
        }
    }
}

/// Single-matrix analysis at one threshold pair.
pub fn analyze_threshold(
    structure: &ProteinStructure,
    partition: &LayerPartition,
    thresholds: ThresholdConfig,
    k_orders: &[usize],
    fitter: &AlphaFitter,
    candidates: &[f64],
) -> Result<ThresholdPoint> {
    let label = format!("Td={} Td_Inter={}", thresholds.td, thresholds.td_inter);
    let adjacency = build_adjacency(structure, partition, thresholds).map_err(Error::context(label.clone()))?;
    let edge_counts = adjacency.edge_counts().clone();
    let matrix = scaled_protein_matrix(adjacency).map_err(Error::context(label.clone()))?;
    let spectrum = eigenvalues(&matrix).map_err(Error::context(label.clone()))?;
    let mut samples = PooledRatios::new();
    let mut fits = Vec::new();
    for &k in k_orders {
        let mut s = spacing_ratios(&spectrum, k).map_err(Error::context(label.clone()))?;
        s.meta.layers = partition.blocks().len();
        s.meta.realizations = 1;
        fits.push(fit_order(&s, fitter, None, candidates).map_err(|e| match e {
            Error::Core(source) => Error::Context { context: label.clone(), source },
            other => other,
        })?);
        samples.insert(k, s);
    }
    Ok(ThresholdPoint {
        thresholds,
        edge_counts,
        unscaled_blocks: matrix.unscaled_blocks().to_vec(),
        fits,
        samples,
    })
}

/// Runs [`analyze_threshold`] at each value (ascending) on `jobs` threads.
#[allow(clippy::too_many_arguments)]
pub fn threshold_sweep(
    structure: &ProteinStructure,
    partition: &LayerPartition,
    mode: ThresholdMode,
    values: &[f64],
    k_orders: &[usize],
    fitter: &AlphaFitter,
    candidates: &[f64],
    jobs: usize,
) -> Result<ProteinSweep> {
    if let ThresholdMode::InterOnly { td } = mode {
        ThresholdConfig::joint(td).validate()?;
    }
    let mut values = values.to_vec();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Schema("threshold values must be finite".into()));
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Pool(e.to_string()))?;
    let points = pool.install(|| {
        values
            .par_iter()
            .map(|&v| analyze_threshold(structure, partition, mode.thresholds(v), k_orders, fitter, candidates))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(ProteinSweep {
        source_id: structure.source_id.clone(),
        residues: structure.len(),
        skipped_residues: structure.skipped_residues,
        layer_sizes: partition.layout().sizes().to_vec(),
        mode,
        points,
    })
}
