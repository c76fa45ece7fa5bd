//! Block-structured adjacency matrices for multilayer networks.
//!
//! An m-layer network on `n = n_1 + … + n_m` nodes has adjacency matrix
//!
//! ```text
//! [ A¹      B^{1,2}  …  B^{1,m} ]
//! [ B^{1,2}ᵀ  A²     …  B^{2,m} ]
//! [ …                            ]
//! [ B^{1,m}ᵀ  …          Aᵐ     ]
//! ```
//!
//! with diagonal blocks `A^j` (intra-layer edges, zero diagonal) and
//! off-diagonal blocks `B^{j,k}` (inter-layer edges). Random blocks are
//! Erdős–Rényi draws; the scaling rules below bring every random block to a
//! common variance so that the spectrum can be compared with GOE results.
//!
//! # Randomness
//!
//! All draws for realization `i` of a spec with master seed `s` come from a
//! ChaCha8 generator seeded with `s` on stream `i`. Every block reads its own
//! window of that stream; windows are numbered diagonal blocks first
//! (ascending), then off-diagonal blocks in row-major `(j, k)` order. A block
//! therefore sees the same bits whatever the other blocks are, which makes
//! the crossover model at γ = 0 and γ = 1 bitwise equal to case a and case d.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{BlockId, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DiagMode {
    Random,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OffDiagMode {
    Random,
    /// Multiplex coupling: every off-diagonal block is the identity.
    Identity,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scaling {
    None,
    /// Multipliers from block sizes and connection probabilities.
    ProbabilityBased,
    /// Multipliers from block sizes and realized edge counts.
    EdgeCountBased,
}

/// The four network families a–d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum NetworkCase {
    /// Intra-layer edges only; block diagonal.
    A,
    /// Random intra- and inter-layer edges.
    B,
    /// Multiplex: random layers coupled by identity blocks.
    C,
    /// Inter-layer edges only.
    D,
}

impl NetworkCase {
    /// Number of independent GOE blocks the spectrum behaves like.
    pub fn effective_blocks(self, layers: usize) -> usize {
        match self {
            NetworkCase::A => layers,
            _ => 1,
        }
    }
}

/// Declarative description of an m-layer random network.
///
/// `inter_p` lists `p_jk` for `j < k` in row-major order
/// (`(1,2), (1,3), …, (1,m), (2,3), …`).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct MultilayerSpec {
    pub layers: Vec<usize>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub intra_p: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub inter_p: Vec<f64>,
    pub diag_mode: DiagMode,
    pub off_diag_mode: OffDiagMode,
    pub scaling: Scaling,
    #[cfg_attr(feature = "serde", serde(default))]
    pub gamma: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
}

impl MultilayerSpec {
    /// Spec for one of the cases a–d with probability-based scaling.
    pub fn for_case(case: NetworkCase, layers: &[usize], intra_p: &[f64], inter_p: &[f64]) -> Self {
        let (diag_mode, off_diag_mode) = match case {
            NetworkCase::A => (DiagMode::Random, OffDiagMode::Zero),
            NetworkCase::B => (DiagMode::Random, OffDiagMode::Random),
            NetworkCase::C => (DiagMode::Random, OffDiagMode::Identity),
            NetworkCase::D => (DiagMode::Zero, OffDiagMode::Random),
        };
        MultilayerSpec {
            layers: layers.to_vec(),
            intra_p: intra_p.to_vec(),
            inter_p: inter_p.to_vec(),
            diag_mode,
            off_diag_mode,
            scaling: Scaling::ProbabilityBased,
            gamma: None,
            seed: 0,
        }
    }

    /// Bilayer crossover spec `(1-γ)·diag(A¹, A²) + γ·offdiag(B^{1,2})`.
    pub fn crossover(layers: [usize; 2], p1: f64, p2: f64, p12: f64, gamma: f64) -> Self {
        MultilayerSpec {
            layers: layers.to_vec(),
            intra_p: vec![p1, p2],
            inter_p: vec![p12],
            diag_mode: DiagMode::Random,
            off_diag_mode: OffDiagMode::Random,
            scaling: Scaling::ProbabilityBased,
            gamma: Some(gamma),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_scaling(mut self, scaling: Scaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn dim(&self) -> usize {
        self.layers.iter().sum()
    }

    pub fn layout(&self) -> BlockLayout {
        BlockLayout::new(&self.layers)
    }

    /// The case a–d this spec belongs to; `None` for crossover specs and
    /// mode combinations outside a–d.
    pub fn case(&self) -> Option<NetworkCase> {
        if self.gamma.is_some() {
            return None;
        }
        match (self.diag_mode, self.off_diag_mode) {
            (DiagMode::Random, OffDiagMode::Zero) => Some(NetworkCase::A),
            (DiagMode::Random, OffDiagMode::Random) => Some(NetworkCase::B),
            (DiagMode::Random, OffDiagMode::Identity) => Some(NetworkCase::C),
            (DiagMode::Zero, OffDiagMode::Random) => Some(NetworkCase::D),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.layers.len();
        let invalid = |msg: alloc::string::String| Err(Error::InvalidSpec(msg));
        if m == 0 {
            return invalid("at least one layer is required".into());
        }
        if let Some(j) = self.layers.iter().position(|&n| n == 0) {
            return invalid(format!("layer {} has size 0", j + 1));
        }
        if self.diag_mode == DiagMode::Random {
            if self.intra_p.len() != m {
                return invalid(format!(
                    "intra_p has {} entries, expected one per layer ({m})",
                    self.intra_p.len()
                ));
            }
            if let Some(j) = self.layers.iter().position(|&n| n < 2) {
                return invalid(format!("random layer {} needs at least 2 nodes", j + 1));
            }
        }
        let pairs = m * (m - 1) / 2;
        if self.off_diag_mode == OffDiagMode::Random && self.inter_p.len() != pairs {
            return invalid(format!(
                "inter_p has {} entries, expected {pairs} (one per layer pair)",
                self.inter_p.len()
            ));
        }
        for &p in self.intra_p.iter().chain(&self.inter_p) {
            if !(0.0..=1.0).contains(&p) {
                return invalid(format!("probability {p} outside [0, 1]"));
            }
        }
        if self.off_diag_mode == OffDiagMode::Identity {
            if m < 2 {
                return invalid("multiplex coupling needs at least two layers".into());
            }
            if self.layers.iter().any(|&n| n != self.layers[0]) {
                return invalid("multiplex (identity) coupling requires equal layer sizes".into());
            }
        }
        if let Some(gamma) = self.gamma {
            if m != 2 {
                return invalid(format!("gamma requires exactly 2 layers, got {m}"));
            }
            if !(0.0..=1.0).contains(&gamma) {
                return Err(Error::Domain {
                    what: "gamma must lie in [0, 1]",
                    value: gamma,
                });
            }
            if self.diag_mode != DiagMode::Random || self.off_diag_mode != OffDiagMode::Random {
                return invalid("the crossover model needs random diagonal and off-diagonal blocks".into());
            }
        }
        Ok(())
    }
}

/// Partition of `0..n` into consecutive layers.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockLayout {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockLayout {
    pub fn new(sizes: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &n in sizes {
            offsets.push(acc);
            acc += n;
        }
        BlockLayout {
            sizes: sizes.to_vec(),
            offsets,
        }
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn range(&self, j: usize) -> core::ops::Range<usize> {
        self.offsets[j]..self.offsets[j] + self.sizes[j]
    }

    pub fn num_pairs(&self) -> usize {
        let m = self.sizes.len();
        m * (m - 1) / 2
    }

    /// Layer pairs `(j, k)`, `j < k`, in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.sizes.len();
        (0..m).flat_map(move |j| (j + 1..m).map(move |k| (j, k)))
    }

    /// Position of `(j, k)`, `j < k`, in [`pairs`](Self::pairs).
    pub fn pair_index(&self, j: usize, k: usize) -> usize {
        debug_assert!(j < k && k < self.sizes.len());
        let m = self.sizes.len();
        j * (2 * m - j - 1) / 2 + (k - j - 1)
    }

    /// Index of the layer containing node `i`.
    pub fn layer_of(&self, i: usize) -> usize {
        // Layers are non-empty, so offsets are strictly increasing.
        match self.offsets.binary_search(&i) {
            Ok(j) => j,
            Err(j) => j - 1,
        }
    }

    /// RNG window ordinal of a block: diagonal blocks first, then pairs.
    pub fn block_ordinal(&self, block: BlockId) -> usize {
        match block {
            BlockId::Diag(j) => j,
            BlockId::Off(j, k) => self.sizes.len() + self.pair_index(j, k),
        }
    }
}

/// Per-block multipliers, indexed like [`BlockLayout`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockScales {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl BlockScales {
    pub fn ones(layout: &BlockLayout) -> Self {
        BlockScales {
            diag: vec![1.0; layout.num_layers()],
            off: vec![1.0; layout.num_pairs()],
        }
    }

    pub fn get(&self, layout: &BlockLayout, block: BlockId) -> f64 {
        match block {
            BlockId::Diag(j) => self.diag[j],
            BlockId::Off(j, k) => self.off[layout.pair_index(j, k)],
        }
    }

    fn set(&mut self, layout: &BlockLayout, block: BlockId, value: f64) {
        match block {
            BlockId::Diag(j) => self.diag[j] = value,
            BlockId::Off(j, k) => self.off[layout.pair_index(j, k)] = value,
        }
    }
}

/// Edge counts per block: `n^j` (unordered pairs) for diagonal blocks and
/// `n^{jk}` (cells) for off-diagonal blocks.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeCounts {
    pub diag: Vec<u64>,
    pub off: Vec<u64>,
}

impl EdgeCounts {
    pub fn total(&self) -> u64 {
        self.diag.iter().chain(&self.off).sum()
    }

    pub fn get(&self, layout: &BlockLayout, block: BlockId) -> u64 {
        match block {
            BlockId::Diag(j) => self.diag[j],
            BlockId::Off(j, k) => self.off[layout.pair_index(j, k)],
        }
    }
}

/// A binary block drawn from an Erdős–Rényi model, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryBlock {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<u8>,
    pub edges: u64,
}

impl BinaryBlock {
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.cells[i * self.cols + j]
    }
}

fn bernoulli(p: f64) -> Result<Bernoulli> {
    Bernoulli::new(p).map_err(|_| Error::Domain {
        what: "probability must lie in [0, 1]",
        value: p,
    })
}

/// Symmetric `G(n, p)` adjacency block with zero diagonal.
///
/// Pairs `(i, j)`, `i < j`, are drawn in row-major order.
pub fn er_diag_block<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<BinaryBlock> {
    if n < 2 {
        return Err(Error::Size {
            what: "diagonal block size",
            required: 2,
            got: n,
        });
    }
    let dist = bernoulli(p)?;
    let mut cells = vec![0u8; n * n];
    let mut edges = 0;
    for i in 0..n {
        for j in i + 1..n {
            if dist.sample(rng) {
                cells[i * n + j] = 1;
                cells[j * n + i] = 1;
                edges += 1;
            }
        }
    }
    Ok(BinaryBlock {
        rows: n,
        cols: n,
        cells,
        edges,
    })
}

/// Rectangular `n_j × n_k` block with independent cells, drawn row-major.
pub fn er_offdiag_block<R: Rng + ?Sized>(
    n_j: usize,
    n_k: usize,
    p: f64,
    rng: &mut R,
) -> Result<BinaryBlock> {
    if n_j == 0 || n_k == 0 {
        return Err(Error::Size {
            what: "off-diagonal block dimension",
            required: 1,
            got: 0,
        });
    }
    let dist = bernoulli(p)?;
    let mut edges = 0;
    let cells = (0..n_j * n_k)
        .map(|_| {
            let hit = dist.sample(rng);
            edges += hit as u64;
            hit as u8
        })
        .collect();
    Ok(BinaryBlock {
        rows: n_j,
        cols: n_k,
        cells,
        edges,
    })
}

fn degenerate_p(block: BlockId, p: f64) -> Error {
    Error::DegenerateVariance {
        block,
        detail: format!("connection probability {p}"),
    }
}

/// `1/√(4 n p (1-p))` for a diagonal `G(n, p)` block.
pub fn probability_scale_diag(n: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(degenerate_p(BlockId::Diag(0), p));
    }
    Ok(1.0 / libm::sqrt(4.0 * n as f64 * p * (1.0 - p)))
}

/// `1/√(4 √(n_j n_k) p (1-p))` for an off-diagonal block.
pub fn probability_scale_off(n_j: usize, n_k: usize, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(degenerate_p(BlockId::Off(0, 1), p));
    }
    let geo = libm::sqrt(n_j as f64 * n_k as f64);
    Ok(1.0 / libm::sqrt(4.0 * geo * p * (1.0 - p)))
}

/// Probability-based multipliers for every random block of `spec`.
///
/// Zero and identity blocks get 1. A random block with `p ∈ {0, 1}` has no
/// variance to equalize and is reported as an error.
pub fn probability_scale_factors(spec: &MultilayerSpec) -> Result<BlockScales> {
    let (scales, skipped) = probability_scales_lenient(spec);
    match skipped.first() {
        Some(&block) => {
            let p = match block {
                BlockId::Diag(j) => spec.intra_p[j],
                BlockId::Off(j, k) => spec.inter_p[spec.layout().pair_index(j, k)],
            };
            Err(degenerate_p(block, p))
        }
        None => Ok(scales),
    }
}

fn probability_scales_lenient(spec: &MultilayerSpec) -> (BlockScales, Vec<BlockId>) {
    let layout = spec.layout();
    let mut scales = BlockScales::ones(&layout);
    let mut skipped = Vec::new();
    if spec.diag_mode == DiagMode::Random {
        for (j, (&n, &p)) in spec.layers.iter().zip(&spec.intra_p).enumerate() {
            match probability_scale_diag(n, p) {
                Ok(s) => scales.diag[j] = s,
                Err(_) => skipped.push(BlockId::Diag(j)),
            }
        }
    }
    if spec.off_diag_mode == OffDiagMode::Random {
        for (idx, (j, k)) in layout.pairs().enumerate() {
            match probability_scale_off(spec.layers[j], spec.layers[k], spec.inter_p[idx]) {
                Ok(s) => scales.off[idx] = s,
                Err(_) => skipped.push(BlockId::Off(j, k)),
            }
        }
    }
    (scales, skipped)
}

/// Edge-count multiplier for a diagonal block with `n` nodes and `edges`
/// undirected edges: `1/√((8e/(n-1)) (1 - 2e/(n(n-1))))`.
pub fn edge_count_scale_diag(n: usize, edges: u64) -> Result<f64> {
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    let e = edges as f64;
    if n < 2 || edges == 0 || e >= pairs {
        return Err(Error::DegenerateVariance {
            block: BlockId::Diag(0),
            detail: format!("{edges} edges among {n} nodes"),
        });
    }
    let nm1 = n as f64 - 1.0;
    let v = (8.0 * e / nm1) * (1.0 - 2.0 * e / (n as f64 * nm1));
    Ok(1.0 / libm::sqrt(v))
}

/// Edge-count multiplier for an `n_j × n_k` off-diagonal block with `edges`
/// ones: `1/√((4e/√(n_j n_k)) (1 - e/(n_j n_k)))`.
pub fn edge_count_scale_off(n_j: usize, n_k: usize, edges: u64) -> Result<f64> {
    let cells = n_j as f64 * n_k as f64;
    let e = edges as f64;
    if edges == 0 || e >= cells {
        return Err(Error::DegenerateVariance {
            block: BlockId::Off(0, 1),
            detail: format!("{edges} edges in a {n_j}x{n_k} block"),
        });
    }
    let v = (4.0 * e / libm::sqrt(cells)) * (1.0 - e / cells);
    Ok(1.0 / libm::sqrt(v))
}

/// Edge-count multipliers plus the blocks that could not be scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCountScaling {
    pub scales: BlockScales,
    /// Blocks with zero or saturated edge counts, left at multiplier 1.
    pub skipped: Vec<BlockId>,
}

/// Edge-count multipliers for every block of `layout`.
pub fn edge_count_scale_factors(layout: &BlockLayout, counts: &EdgeCounts) -> EdgeCountScaling {
    edge_count_scales_filtered(layout, counts, |_| true)
}

fn edge_count_scales_filtered(
    layout: &BlockLayout,
    counts: &EdgeCounts,
    include: impl Fn(BlockId) -> bool,
) -> EdgeCountScaling {
    let mut scales = BlockScales::ones(layout);
    let mut skipped = Vec::new();
    for (j, &n) in layout.sizes().iter().enumerate() {
        let block = BlockId::Diag(j);
        if !include(block) {
            continue;
        }
        match edge_count_scale_diag(n, counts.diag[j]) {
            Ok(s) => scales.diag[j] = s,
            Err(_) => skipped.push(block),
        }
    }
    for (idx, (j, k)) in layout.pairs().enumerate() {
        let block = BlockId::Off(j, k);
        if !include(block) {
            continue;
        }
        match edge_count_scale_off(layout.sizes()[j], layout.sizes()[k], counts.off[idx]) {
            Ok(s) => scales.off[idx] = s,
            Err(_) => skipped.push(block),
        }
    }
    EdgeCountScaling { scales, skipped }
}

/// Dense real symmetric matrix with a recorded block partition.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    entries: Vec<f64>,
    layout: BlockLayout,
    scales: BlockScales,
    edges: EdgeCounts,
    unscaled: Vec<BlockId>,
}

impl BlockMatrix {
    /// Single-block matrix from row-major entries. Symmetry is not checked
    /// here; the eigensolver rejects asymmetric input.
    pub fn from_dense(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Size {
                what: "dense matrix entries",
                required: n * n,
                got: entries.len(),
            });
        }
        let layout = BlockLayout::new(&[n]);
        Ok(BlockMatrix {
            entries,
            scales: BlockScales::ones(&layout),
            edges: EdgeCounts {
                diag: vec![0],
                off: Vec::new(),
            },
            layout,
            unscaled: Vec::new(),
        })
    }

    /// Binary matrix from blocks; counts must match the entries.
    pub(crate) fn from_binary(layout: BlockLayout, entries: Vec<f64>, edges: EdgeCounts) -> Self {
        BlockMatrix {
            scales: BlockScales::ones(&layout),
            entries,
            layout,
            edges,
            unscaled: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    /// Multipliers applied to each block (1 where nothing was applied).
    pub fn scales(&self) -> &BlockScales {
        &self.scales
    }

    /// Edge counts recorded before scaling.
    pub fn edge_counts(&self) -> &EdgeCounts {
        &self.edges
    }

    /// Random blocks whose variance was degenerate and were left unscaled.
    pub fn unscaled_blocks(&self) -> &[BlockId] {
        &self.unscaled
    }

    /// Copy of the entries of one block, row-major.
    pub fn block(&self, block: BlockId) -> Vec<f64> {
        let (rows, cols) = match block {
            BlockId::Diag(j) => (self.layout.range(j), self.layout.range(j)),
            BlockId::Off(j, k) => (self.layout.range(j), self.layout.range(k)),
        };
        rows.flat_map(|i| self.row(i)[cols.clone()].iter().copied())
            .collect()
    }

    /// Multiplies one block (and its mirror) by `factor`.
    fn scale_block(&mut self, block: BlockId, factor: f64) {
        let n = self.dim();
        let (rows, cols) = match block {
            BlockId::Diag(j) => (self.layout.range(j), self.layout.range(j)),
            BlockId::Off(j, k) => (self.layout.range(j), self.layout.range(k)),
        };
        for i in rows {
            for c in cols.clone() {
                self.entries[i * n + c] *= factor;
                if matches!(block, BlockId::Off(..)) {
                    self.entries[c * n + i] *= factor;
                }
            }
        }
        let prev = self.scales.get(&self.layout, block);
        self.scales.set(&self.layout, block, prev * factor);
    }

    /// Applies multipliers to every block; `skipped` blocks are recorded.
    pub fn apply_scales(&mut self, scales: &BlockScales, skipped: &[BlockId]) {
        let layout = self.layout.clone();
        for j in 0..layout.num_layers() {
            let s = scales.diag[j];
            if s != 1.0 {
                self.scale_block(BlockId::Diag(j), s);
            }
        }
        for (idx, (j, k)) in layout.pairs().enumerate() {
            let s = scales.off[idx];
            if s != 1.0 {
                self.scale_block(BlockId::Off(j, k), s);
            }
        }
        self.unscaled.extend_from_slice(skipped);
    }

    fn weight_blocks(&mut self, diag_weight: f64, off_weight: f64) {
        let n = self.dim();
        for i in 0..n {
            let own = self.layout.range(self.layout.layer_of(i));
            let row = &mut self.entries[i * n..(i + 1) * n];
            for (c, x) in row.iter_mut().enumerate() {
                *x *= if own.contains(&c) { diag_weight } else { off_weight };
            }
        }
    }
}

/// Window spacing for per-block RNG streams, in 32-bit words.
const BLOCK_WINDOW_SHIFT: u32 = 44;

/// Generator for one block of one realization.
pub fn block_rng(master_seed: u64, realization: u64, block_ordinal: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(realization);
    rng.set_word_pos((block_ordinal as u128) << BLOCK_WINDOW_SHIFT);
    rng
}

/// Draws the unscaled binary matrix for realization `realization`.
fn assemble_binary(spec: &MultilayerSpec, realization: u64) -> Result<BlockMatrix> {
    let layout = spec.layout();
    let n = layout.dim();
    let mut entries = vec![0.0; n * n];
    let mut edges = EdgeCounts {
        diag: vec![0; layout.num_layers()],
        off: vec![0; layout.num_pairs()],
    };

    if spec.diag_mode == DiagMode::Random {
        for j in 0..layout.num_layers() {
            let id = BlockId::Diag(j);
            let mut rng = block_rng(spec.seed, realization, layout.block_ordinal(id));
            let block = er_diag_block(layout.sizes()[j], spec.intra_p[j], &mut rng)
                .map_err(|e| e.in_block(id))?;
            let off = layout.offsets()[j];
            for r in 0..block.rows {
                let dst = &mut entries[(off + r) * n + off..(off + r) * n + off + block.cols];
                for (d, &c) in dst.iter_mut().zip(&block.cells[r * block.cols..(r + 1) * block.cols]) {
                    *d = c as f64;
                }
            }
            edges.diag[j] = block.edges;
        }
    }

    for (idx, (j, k)) in layout.pairs().enumerate() {
        let id = BlockId::Off(j, k);
        let (oj, ok) = (layout.offsets()[j], layout.offsets()[k]);
        let (nj, nk) = (layout.sizes()[j], layout.sizes()[k]);
        match spec.off_diag_mode {
            OffDiagMode::Zero => {}
            OffDiagMode::Identity => {
                for d in 0..nj.min(nk) {
                    entries[(oj + d) * n + ok + d] = 1.0;
                    entries[(ok + d) * n + oj + d] = 1.0;
                }
                edges.off[idx] = nj.min(nk) as u64;
            }
            OffDiagMode::Random => {
                let mut rng = block_rng(spec.seed, realization, layout.block_ordinal(id));
                let block = er_offdiag_block(nj, nk, spec.inter_p[idx], &mut rng)
                    .map_err(|e| e.in_block(id))?;
                for r in 0..nj {
                    for c in 0..nk {
                        if block.get(r, c) == 1 {
                            entries[(oj + r) * n + ok + c] = 1.0;
                            entries[(ok + c) * n + oj + r] = 1.0;
                        }
                    }
                }
                edges.off[idx] = block.edges;
            }
        }
    }
    Ok(BlockMatrix::from_binary(layout, entries, edges))
}

fn apply_spec_scaling(spec: &MultilayerSpec, matrix: &mut BlockMatrix) {
    match spec.scaling {
        Scaling::None => {}
        Scaling::ProbabilityBased => {
            let (scales, skipped) = probability_scales_lenient(spec);
            matrix.apply_scales(&scales, &skipped);
        }
        Scaling::EdgeCountBased => {
            let random = |b: BlockId| match b {
                BlockId::Diag(_) => spec.diag_mode == DiagMode::Random,
                BlockId::Off(..) => spec.off_diag_mode == OffDiagMode::Random,
            };
            let s = edge_count_scales_filtered(matrix.layout(), matrix.edge_counts(), random);
            matrix.apply_scales(&s.scales, &s.skipped);
        }
    }
}

/// Builds realization `realization` of `spec` (master seed `spec.seed`).
///
/// Specs with `gamma` set are routed to [`crossover_assemble`].
pub fn assemble(spec: &MultilayerSpec, realization: u64) -> Result<BlockMatrix> {
    spec.validate()?;
    if spec.gamma.is_some() {
        return crossover_assemble(spec, realization);
    }
    let mut matrix = assemble_binary(spec, realization)?;
    apply_spec_scaling(spec, &mut matrix);
    Ok(matrix)
}

/// `(1-γ)·diag(Ã¹, Ã²) + γ·offdiag(B̃^{1,2})` where the blocks are scaled
/// Erdős–Rényi draws; the scaling is applied before the γ weighting.
pub fn crossover_assemble(spec: &MultilayerSpec, realization: u64) -> Result<BlockMatrix> {
    spec.validate()?;
    let gamma = spec.gamma.ok_or_else(|| {
        Error::InvalidSpec("crossover model requires gamma".into())
    })?;
    let mut matrix = assemble_binary(spec, realization)?;
    apply_spec_scaling(spec, &mut matrix);
    matrix.weight_blocks(1.0 - gamma, gamma);
    Ok(matrix)
}
