//! Residue-level distance networks from protein coordinate files.
//!
//! A structure is reduced to one representative atom per residue (the
//! alpha carbon by default). Two residues are adjacent when their distance
//! is strictly below a threshold: `td` inside a layer, `td_inter` across
//! layers.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::netgen::{edge_count_scale_factors, BlockLayout, BlockMatrix, EdgeCounts};
use crate::{Error, Result};

pub const DEFAULT_ATOM: &str = "CA";

#[derive(Debug, Clone, PartialEq)]
pub struct Residue {
    pub chain: char,
    pub seq: i32,
    /// Insertion code, `' '` when absent.
    pub icode: char,
    pub name: String,
    pub coord: [f64; 3],
}

impl Residue {
    pub fn distance_sq(&self, other: &Residue) -> f64 {
        let dx = self.coord[0] - other.coord[0];
        let dy = self.coord[1] - other.coord[1];
        let dz = self.coord[2] - other.coord[2];
        dx * dx + dy * dy + dz * dz
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProteinStructure {
    pub source_id: String,
    residues: Vec<Residue>,
    /// Residues seen in ATOM records that lack the selected atom.
    pub skipped_residues: usize,
}

impl ProteinStructure {
    /// Fails on duplicate `(chain, seq, icode)` keys, non-finite coordinates
    /// or an empty residue list.
    pub fn new(source_id: impl Into<String>, residues: Vec<Residue>) -> Result<Self> {
        if residues.is_empty() {
            return Err(Error::EmptyStructure);
        }
        let mut seen = BTreeMap::new();
        for (i, r) in residues.iter().enumerate() {
            if r.coord.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidSpec(format!("residue {i} has a non-finite coordinate")));
            }
            if seen.insert((r.chain, r.seq, r.icode), i).is_some() {
                return Err(Error::InvalidSpec(format!(
                    "duplicate residue {}{}{}",
                    r.chain,
                    r.seq,
                    r.icode.to_string().trim()
                )));
            }
        }
        Ok(ProteinStructure {
            source_id: source_id.into(),
            residues,
            skipped_residues: 0,
        })
    }

    pub fn residues(&self) -> &[Residue] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// Chain identifiers in order of first appearance.
    pub fn chains(&self) -> Vec<char> {
        let mut out: Vec<char> = Vec::new();
        for r in &self.residues {
            if out.last() != Some(&r.chain) && !out.contains(&r.chain) {
                out.push(r.chain);
            }
        }
        out
    }
}

fn columns<'a>(line: &'a str, cols: Range<usize>, line_no: usize, field: &str) -> Result<&'a str> {
    // PDB columns are 1-based and inclusive.
    line.get(cols.start - 1..cols.end).ok_or_else(|| Error::Parse {
        line: line_no,
        message: format!("missing or malformed {field} (columns {}-{})", cols.start, cols.end),
    })
}

fn column_char(line: &str, col: usize, line_no: usize, field: &str) -> Result<char> {
    Ok(columns(line, col..col, line_no, field)?.chars().next().unwrap_or(' '))
}

fn parse_coord(line: &str, cols: Range<usize>, line_no: usize, axis: &str) -> Result<f64> {
    let raw = columns(line, cols, line_no, axis)?;
    let v: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("cannot parse {axis} coordinate {raw:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line: line_no,
            message: format!("non-finite {axis} coordinate"),
        });
    }
    Ok(v)
}

/// Parses legacy fixed-column PDB text.
///
/// Reads ATOM records of the first model only (HETATM is ignored), keeps
/// one coordinate per residue from the atom named `atom` (alternate
/// locations other than blank or `A` are ignored) and counts residues that
/// lack it in [`ProteinStructure::skipped_residues`].
pub fn parse_structure(text: &str, atom: &str) -> Result<ProteinStructure> {
    let atom = atom.trim();
    let mut source_id = String::new();
    let mut order: Vec<(char, i32, char)> = Vec::new();
    let mut found: BTreeMap<(char, i32, char), Option<Residue>> = BTreeMap::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        let record = line.get(..6.min(line.len())).unwrap_or("").trim_end();
        match record {
            "HEADER" => {
                if let Some(id) = line.get(62..66) {
                    source_id = id.trim().into();
                }
            }
            "ENDMDL" => break,
            "ATOM" => {
                if line.len() < 54 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("ATOM record has {} columns, need at least 54", line.len()),
                    });
                }
                let name = columns(line, 13..16, line_no, "atom name")?.trim();
                let alt = column_char(line, 17, line_no, "alternate location")?;
                let res_name = columns(line, 18..20, line_no, "residue name")?.trim();
                let chain = column_char(line, 22, line_no, "chain identifier")?;
                let seq_raw = columns(line, 23..26, line_no, "residue sequence number")?;
                let seq: i32 = seq_raw.trim().parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("cannot parse residue sequence number {seq_raw:?}"),
                })?;
                let icode = column_char(line, 27, line_no, "insertion code")?;
                let x = parse_coord(line, 31..38, line_no, "x")?;
                let y = parse_coord(line, 39..46, line_no, "y")?;
                let z = parse_coord(line, 47..54, line_no, "z")?;

                let key = (chain, seq, icode);
                let slot = found.entry(key).or_insert_with(|| {
                    order.push(key);
                    None
                });
                if slot.is_none() && name == atom && (alt == ' ' || alt == 'A') {
                    *slot = Some(Residue {
                        chain,
                        seq,
                        icode,
                        name: res_name.into(),
                        coord: [x, y, z],
                    });
                }
            }
            _ => {}
        }
    }

    let mut residues = Vec::with_capacity(order.len());
    let mut skipped = 0;
    for key in order {
        match found.remove(&key).flatten() {
            Some(r) => residues.push(r),
            None => skipped += 1,
        }
    }
    let mut structure = ProteinStructure::new(source_id, residues)?;
    structure.skipped_residues = skipped;
    Ok(structure)
}

/// How residues are grouped into layers.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", deny_unknown_fields))]
pub enum PartitionMode {
    /// One layer per chain, in order of appearance.
    ByChain,
    /// Consecutive runs of the given sizes.
    ByCount(Vec<usize>),
    /// Explicit half-open residue index ranges `[start, end)`.
    Explicit(Vec<(usize, usize)>),
}

/// Resolved layer partition of a structure's residue list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerPartition {
    pub mode: PartitionMode,
    blocks: Vec<Range<usize>>,
}

impl LayerPartition {
    pub fn resolve(mode: PartitionMode, structure: &ProteinStructure) -> Result<Self> {
        let n = structure.len();
        let blocks: Vec<Range<usize>> = match &mode {
            PartitionMode::ByChain => {
                let mut blocks: Vec<Range<usize>> = Vec::new();
                let mut chains: Vec<char> = Vec::new();
                for (i, r) in structure.residues().iter().enumerate() {
                    match chains.last() {
                        Some(&c) if c == r.chain => {}
                        _ => {
                            if chains.contains(&r.chain) {
                                return Err(Error::InvalidSpec(format!(
                                    "chain {} is not contiguous in the residue list",
                                    r.chain
                                )));
                            }
                            if let Some(last) = blocks.last_mut() {
                                last.end = i;
                            }
                            chains.push(r.chain);
                            blocks.push(i..n);
                        }
                    }
                }
                blocks
            }
            PartitionMode::ByCount(sizes) => {
                let mut start = 0;
                sizes
                    .iter()
                    .map(|&s| {
                        let r = start..start + s;
                        start += s;
                        r
                    })
                    .collect()
            }
            PartitionMode::Explicit(ranges) => ranges.iter().map(|&(a, b)| a..b).collect(),
        };
        let mut expected = 0;
        for (j, b) in blocks.iter().enumerate() {
            if b.start != expected || b.end <= b.start {
                return Err(Error::InvalidSpec(format!(
                    "layer {} ({}..{}) must be non-empty and start at residue {expected}",
                    j + 1,
                    b.start,
                    b.end
                )));
            }
            expected = b.end;
        }
        if expected != n {
            return Err(Error::InvalidSpec(format!(
                "layers cover {expected} residues but the structure has {n}"
            )));
        }
        Ok(LayerPartition { mode, blocks })
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn layout(&self) -> BlockLayout {
        let sizes: Vec<usize> = self.blocks.iter().map(|b| b.len()).collect();
        BlockLayout::new(&sizes)
    }
}

/// Intra-layer (`td`) and inter-layer (`td_inter`) distance thresholds in Å.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThresholdConfig {
    pub td: f64,
    pub td_inter: f64,
}

impl ThresholdConfig {
    pub fn joint(td: f64) -> Self {
        ThresholdConfig { td, td_inter: td }
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.td, self.td_inter] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain {
                    what: "threshold distance must be positive",
                    value: v,
                });
            }
        }
        Ok(())
    }
}

/// Binary distance-threshold adjacency with per-block edge counts.
pub fn build_adjacency(
    structure: &ProteinStructure,
    partition: &LayerPartition,
    thresholds: ThresholdConfig,
) -> Result<BlockMatrix> {
    thresholds.validate()?;
    let layout = partition.layout();
    let n = structure.len();
    if layout.dim() != n {
        return Err(Error::InvalidSpec(format!(
            "partition covers {} residues, structure has {n}",
            layout.dim()
        )));
    }
    let intra = thresholds.td * thresholds.td;
    let inter = thresholds.td_inter * thresholds.td_inter;
    let res = structure.residues();
    let layer: Vec<usize> = (0..n).map(|i| layout.layer_of(i)).collect();
    let mut entries = vec![0.0; n * n];
    let mut counts = EdgeCounts {
        diag: vec![0; layout.num_layers()],
        off: vec![0; layout.num_pairs()],
    };
    for i in 0..n {
        for j in i + 1..n {
            let (li, lj) = (layer[i], layer[j]);
            let limit = if li == lj { intra } else { inter };
            if res[i].distance_sq(&res[j]) < limit {
                entries[i * n + j] = 1.0;
                entries[j * n + i] = 1.0;
                if li == lj {
                    counts.diag[li] += 1;
                } else {
                    counts.off[layout.pair_index(li, lj)] += 1;
                }
            }
        }
    }
    Ok(BlockMatrix::from_binary(layout, entries, counts))
}

/// Applies edge-count scaling to a binary adjacency from [`build_adjacency`].
///
/// Blocks with zero or saturated edge counts keep multiplier 1 and are
/// listed in [`BlockMatrix::unscaled_blocks`].
pub fn scaled_protein_matrix(mut adjacency: BlockMatrix) -> Result<BlockMatrix> {
    let layout = adjacency.layout().clone();
    let scaling = edge_count_scale_factors(&layout, adjacency.edge_counts());
    if scaling.skipped.len() == layout.num_layers() + layout.num_pairs() {
        return Err(Error::AllBlocksDegenerate);
    }
    adjacency.apply_scales(&scaling.scales, &scaling.skipped);
    Ok(adjacency)
}
