//! CSV and JSON artifacts.
//!
//! Every CSV starts with `# experiment-hash: <sha256>` followed by a header
//! row. Floats use Rust's shortest round-trip formatting, so reruns are
//! byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mlnet_core::analytics::AnalyticCurve;
use mlnet_core::netgen::BlockLayout;
use mlnet_core::spectral::EmpiricalHistogram;
use mlnet_core::BlockId;
use serde::Serialize;

use crate::ensemble::SweepResult;
use crate::error::{Error, Result};
use crate::experiment::ReferenceCounts;
use crate::protein::ProteinSweep;

fn preamble(hash: &str, columns: &[String]) -> String {
    format!("# experiment-hash: {hash}\n{}\n", columns.join(","))
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// `bin_center, empirical_density, analytic_density`; the analytic column
/// is empty without a reference curve.
pub fn histogram_csv(hash: &str, hist: &EmpiricalHistogram, curve: Option<&AnalyticCurve>) -> String {
    let mut out = preamble(hash, &cols(&["bin_center", "empirical_density", "analytic_density"]));
    for (c, d) in hist.centers().zip(&hist.densities) {
        let analytic = curve
            .map(|cv| cv.density(c).map(|v| v.to_string()).unwrap_or_default())
            .unwrap_or_default();
        writeln!(out, "{c},{d},{analytic}").unwrap();
    }
    out
}

/// `r, density, csrd` on `0, step, …, rmax`.
pub fn analytic_csv(hash: &str, curve: &AnalyticCurve, rmax: f64, step: f64) -> Result<String> {
    let mut out = preamble(hash, &cols(&["r", "density", "csrd"]));
    let rows = (rmax / step + 1e-9).floor() as usize + 1;
    for i in 0..rows {
        let r = i as f64 * step;
        writeln!(out, "{r},{},{}", curve.density(r)?, curve.csrd(r)?).unwrap();
    }
    Ok(out)
}

/// `<axis>, k, alpha_hat, ks_distance` with one row per point and order.
pub fn sweep_csv(hash: &str, sweep: &SweepResult) -> String {
    let mut out = preamble(hash, &[sweep.axis.column(), "k".into(), "alpha_hat".into(), "ks_distance".into()]);
    for p in &sweep.points {
        for f in &p.fits {
            writeln!(out, "{},{},{},{}", p.value, f.k, f.fit.alpha_hat, f.fit.distance).unwrap();
        }
    }
    out
}

fn block_columns(layout: &BlockLayout) -> Vec<String> {
    let mut c: Vec<String> = (0..layout.num_layers()).map(|j| format!("n_{}", j + 1)).collect();
    c.extend(layout.pairs().map(|(j, k)| format!("n_{}_{}", j + 1, k + 1)));
    c
}

/// One row per threshold point: thresholds, edge counts per block, the
/// number of unscaled blocks, `alpha_hat` per order and KS distances per
/// order and candidate α.
pub fn protein_csv(hash: &str, sweep: &ProteinSweep) -> String {
    let layout = BlockLayout::new(&sweep.layer_sizes);
    let mut columns = cols(&["td", "td_inter"]);
    columns.extend(block_columns(&layout));
    columns.push("unscaled_blocks".into());
    let first = sweep.points.first();
    if let Some(p) = first {
        for f in &p.fits {
            columns.push(format!("alpha_hat_k{}", f.k));
        }
        for f in &p.fits {
            for (a, _) in &f.candidates {
                columns.push(format!("ks_k{}_alpha{a}", f.k));
            }
        }
    }
    let mut out = preamble(hash, &columns);
    for p in &sweep.points {
        let mut row: Vec<String> = vec![p.thresholds.td.to_string(), p.thresholds.td_inter.to_string()];
        row.extend(p.edge_counts.diag.iter().chain(&p.edge_counts.off).map(u64::to_string));
        row.push(p.unscaled_blocks.len().to_string());
        row.extend(p.fits.iter().map(|f| f.fit.alpha_hat.to_string()));
        for f in &p.fits {
            row.extend(f.candidates.iter().map(|(_, d)| d.to_string()));
        }
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

/// Observed vs reference edge counts:
/// `td, td_inter, block, observed, reference, relative_difference`.
pub fn reference_csv(hash: &str, sweep: &ProteinSweep, refs: &[ReferenceCounts]) -> String {
    let layout = BlockLayout::new(&sweep.layer_sizes);
    let mut out = preamble(
        hash,
        &cols(&["td", "td_inter", "block", "observed", "reference", "relative_difference"]),
    );
    for r in refs {
        let Some(p) = sweep
            .points
            .iter()
            .find(|p| p.thresholds.td == r.td && p.thresholds.td_inter == r.td_inter)
        else {
            continue;
        };
        let blocks = (0..layout.num_layers())
            .map(BlockId::Diag)
            .zip(&r.diag)
            .chain(layout.pairs().map(|(j, k)| BlockId::Off(j, k)).zip(&r.off));
        for (block, &reference) in blocks {
            let observed = p.edge_counts.get(&layout, block);
            let rel = if reference == 0 {
                if observed == 0 { 0.0 } else { f64::INFINITY }
            } else {
                (observed as f64 - reference as f64) / reference as f64
            };
            let name = match block {
                BlockId::Diag(j) => format!("n_{}", j + 1),
                BlockId::Off(j, k) => format!("n_{}_{}", j + 1, k + 1),
            };
            writeln!(out, "{},{},{name},{observed},{reference},{rel}", r.td, r.td_inter).unwrap();
        }
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Collects artifacts for one experiment directory and writes them in
/// order.
#[derive(Debug)]
pub struct ArtifactDir {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl ArtifactDir {
    pub fn create(root: &Path, name: &str) -> Result<Self> {
        let dir = root.join(name);
        std::fs::create_dir_all(&dir).map_err(Error::io(&dir))?;
        Ok(ArtifactDir { dir, written: Vec::new() })
    }

    pub fn write(&mut self, file: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(file);
        std::fs::write(&path, contents).map_err(Error::io(&path))?;
        self.written.push(path);
        Ok(())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn into_written(self) -> Vec<PathBuf> {
        self.written
    }
}

/// Filename-safe rendering of a parameter value.
pub fn tag(value: f64) -> String {
    value.to_string().replace('-', "m")
}
