//! Acceptance suite: one PASS / FAIL / SKIP line per criterion.
//!
//! Real-structure checks read `<ID>.pdb` files from `MLNET_PDB_DIR`
//! (default `data/pdb` under the workspace root) and are skipped when the
//! files are absent.
//!
//! Failures are reported but only turn into a non-zero exit status when
//! `MLNET_ACCEPTANCE_STRICT` is set.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use mlnet::core::analytics::{csrd, csrd_closed_form, csrd_quadrature, density};
use mlnet::core::netgen::{
    edge_count_scale_diag, edge_count_scale_off, probability_scale_diag, probability_scale_off, MultilayerSpec,
    NetworkCase,
};
use mlnet::core::protein::{build_adjacency, scaled_protein_matrix, LayerPartition, PartitionMode, ThresholdConfig};
use mlnet::core::spectral::{ratios_of, AlphaFitter, AlphaGrid};
use mlnet::ensemble::{crossover_sweep, run_ensemble, run_realizations, ExperimentPlan, OrderFit};
use mlnet::experiment::{Experiment, ProteinExperiment};
use mlnet::protein::{load_structure, threshold_sweep};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Suite {
    fitters: Vec<(AlphaGrid, AlphaFitter)>,
    experiments: PathBuf,
}

impl Suite {
    fn fitter(&mut self, grid: AlphaGrid) -> &AlphaFitter {
        let i = match self.fitters.iter().position(|(g, _)| *g == grid) {
            Some(i) => i,
            None => {
                self.fitters.push((grid, AlphaFitter::new(grid).unwrap()));
                self.fitters.len() - 1
            }
        };
        &self.fitters[i].1
    }

    fn load(&self, name: &str) -> Experiment {
        Experiment::load(&self.experiments.join(format!("{name}.json"))).unwrap()
    }

    /// Runs an ensemble experiment and fits each order against `targets`.
    fn ensemble(&mut self, name: &str, targets: &[f64]) -> (Vec<OrderFit>, ExperimentPlan) {
        let Experiment::Ensemble(e) = self.load(name) else { panic!("{name} is not an ensemble") };
        let plan = e.plan().unwrap();
        let pooled = run_ensemble(&plan, 0).unwrap();
        let fitter = self.fitter(e.analysis.alpha_grid).clone();
        let fits = pooled
            .values()
            .map(|s| mlnet::ensemble::fit_order(s, &fitter, None, targets).unwrap())
            .collect();
        (fits, plan)
    }
}

fn fit_for(fits: &[OrderFit], k: usize) -> &OrderFit {
    fits.iter().find(|f| f.k == k).unwrap()
}

/// `ks < ks_max` against `target` and, when given, `|α̂ - target| <= rel·target`.
fn check_target(label: &str, fit: &OrderFit, target: f64, ks_max: f64, rel: Option<f64>) -> (bool, String) {
    let ks = fit.ks_to(target).unwrap();
    let mut ok = ks < ks_max;
    let mut line = format!("{label} k={} ks(α={target})={ks:.4}", fit.k);
    if let Some(rel) = rel {
        ok &= (fit.fit.alpha_hat - target).abs() <= rel * target;
    }
    line.push_str(&format!(" α̂={}", fit.fit.alpha_hat));
    (ok, line)
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok { Outcome::Pass(detail) } else { Outcome::Fail(detail) }
}

fn c1_analytic() -> Outcome {
    let mut worst: f64 = 0.0;
    let steps = 4000;
    for alpha in [1.0, 2.0, 4.0, 8.0] {
        for i in 0..=steps {
            let s = 0.01 * (2000f64).powf(i as f64 / steps as f64);
            let closed = csrd_closed_form(alpha, s).unwrap();
            let quad = csrd_quadrature(alpha, s).unwrap();
            worst = worst.max((closed - quad).abs());
        }
    }
    let mid = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&a| (csrd(a, 1.0).unwrap() - 0.5).abs())
        .fold(0.0, f64::max);
    verdict(
        worst <= 1e-8 && mid <= 1e-10,
        format!("sup|closed - quadrature| = {worst:.2e} on [0.01, 20]; max |F(1) - 0.5| = {mid:.2e}"),
    )
}

fn c2_goe(suite: &mut Suite) -> Outcome {
    let (fits, _) = suite.ensemble("single-layer-er", &[1.0]);
    let f = fit_for(&fits, 1);
    let ks = f.ks_to(1.0).unwrap();
    let a = f.fit.alpha_hat;
    verdict(
        ks < 0.02 && (0.85..=1.15).contains(&a),
        format!("n=800 p=0.05 x100, k=1: ks(α=1)={ks:.4}, α̂={a}"),
    )
}

fn ensemble_targets(suite: &mut Suite, runs: &[(&str, &[(usize, f64)])], ks_max: f64, rel: Option<f64>) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for &(name, targets) in runs {
        let alphas: Vec<f64> = targets.iter().map(|t| t.1).collect();
        let (fits, _) = suite.ensemble(name, &alphas);
        for &(k, target) in targets {
            let (pass, line) = check_target(name, fit_for(&fits, k), target, ks_max, rel);
            ok &= pass;
            parts.push(line);
        }
    }
    verdict(ok, parts.join("; "))
}

fn c3_superposed(suite: &mut Suite) -> Outcome {
    ensemble_targets(
        suite,
        &[
            ("bilayer-case-a", &[(2, 2.0), (3, 4.0)]),
            ("trilayer-case-a", &[(3, 3.0), (4, 5.0)]),
        ],
        0.02,
        Some(0.15),
    )
}

fn c4_single(suite: &mut Suite) -> Outcome {
    ensemble_targets(
        suite,
        &[
            ("bilayer-case-b", &[(2, 4.0), (3, 8.0)]),
            ("bilayer-case-d", &[(2, 4.0), (3, 8.0)]),
            ("trilayer-case-b", &[(3, 8.0), (4, 13.0)]),
            ("trilayer-case-d", &[(3, 8.0), (4, 13.0)]),
        ],
        0.03,
        None,
    )
}

fn c5_scaling(suite: &mut Suite) -> Outcome {
    let (fits, _) = suite.ensemble("bilayer-case-a-unscaled", &[2.0, 4.0]);
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, target) in [(2, 2.0), (3, 4.0)] {
        let f = fit_for(&fits, k);
        ok &= f.fit.distance > 0.05;
        parts.push(format!(
            "unscaled k={k} min ks={:.4} at α̂={} (ks(α={target})={:.4})",
            f.fit.distance,
            f.fit.alpha_hat,
            f.ks_to(target).unwrap()
        ));
    }
    let (pass, line) = c3_like(suite, "bilayer-case-a-contrast");
    ok &= pass;
    parts.push(line);
    verdict(ok, parts.join("; "))
}

fn c3_like(suite: &mut Suite, name: &str) -> (bool, String) {
    let (fits, _) = suite.ensemble(name, &[2.0, 4.0]);
    let (a, la) = check_target(name, fit_for(&fits, 2), 2.0, 0.02, Some(0.15));
    let (b, lb) = check_target(name, fit_for(&fits, 3), 4.0, 0.02, Some(0.15));
    (a && b, format!("{la}; {lb}"))
}

fn c6_crossover(suite: &mut Suite) -> Outcome {
    let Experiment::Crossover(e) = suite.load("crossover-bilayer") else { unreachable!() };
    let plan = e.plan().unwrap();
    let fitter = suite.fitter(e.analysis.alpha_grid).clone();
    let gammas = [0.01, 0.02, 0.04, 0.06];
    let sweep = crossover_sweep(&plan, &gammas, &fitter, &[2.0, 4.0], 0).unwrap();
    let at = |g: f64| {
        let p = sweep.points.iter().find(|p| p.value == g).unwrap();
        let f = fit_for(&p.fits, 2);
        (f.ks_to(2.0).unwrap(), f.ks_to(4.0).unwrap())
    };
    let (lo2, lo4) = at(0.01);
    let (hi2, hi4) = at(0.06);
    let traj = sweep.trajectory(2);
    let monotone = traj.windows(2).all(|w| w[1].1 >= w[0].1 - 0.3);
    let alphas: Vec<String> = traj.iter().map(|(g, a)| format!("{g}:{a}")).collect();
    verdict(
        lo2 < lo4 && hi4 < hi2 && monotone,
        format!(
            "γ=0.01 ks(2)={lo2:.4} ks(4)={lo4:.4}; γ=0.06 ks(2)={hi2:.4} ks(4)={hi4:.4}; α̂(γ) [{}]",
            alphas.join(", ")
        ),
    )
}

/// CA coordinates of `text` read straight from the fixed columns, keyed
/// by chain in file order; first of any alternate locations wins.
fn oracle_residues(text: &str) -> Vec<(char, [f64; 3])> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for line in text.lines().filter(|l| l.starts_with("ATOM  ")) {
        if line[12..16].trim() != "CA" || !matches!(&line[16..17], " " | "A") {
            continue;
        }
        let key = (line[21..22].to_string(), line[22..27].to_string());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let f = |a: usize, b: usize| line[a..b].trim().parse::<f64>().unwrap();
        out.push((line.as_bytes()[21] as char, [f(30, 38), f(38, 46), f(46, 54)]));
    }
    out
}

fn c7_fixture() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut checked = 0;
    for per_chain in [7, 16, 25] {
        let text = common::fixture_pdb(per_chain);
        let path = tmp.path().join(format!("fx{per_chain}.pdb"));
        std::fs::write(&path, &text).unwrap();
        let structure = load_structure(&path, "CA").unwrap();
        let residues = oracle_residues(&text);
        if structure.len() != residues.len() || residues.len() > 50 {
            return Outcome::Fail(format!("fixture {per_chain}: parsed {} residues", structure.len()));
        }
        let sizes = [
            residues.iter().filter(|r| r.0 == 'A').count(),
            residues.iter().filter(|r| r.0 == 'B').count(),
        ];
        let partition = LayerPartition::resolve(PartitionMode::ByChain, &structure).unwrap();
        for (td, tdi) in [(4.0, 4.0), (6.0, 9.5), (8.0, 10.0), (12.0, 7.0)] {
            let n = residues.len();
            let layer = |i: usize| usize::from(i >= sizes[0]);
            let mut adj = vec![0.0; n * n];
            let mut diag = [0u64; 2];
            let mut off = 0u64;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let (a, b) = (residues[i].1, residues[j].1);
                    let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                    let t = if layer(i) == layer(j) { td } else { tdi };
                    if d < t {
                        adj[i * n + j] = 1.0;
                        if i < j {
                            if layer(i) == layer(j) {
                                diag[layer(i)] += 1;
                            } else {
                                off += 1;
                            }
                        }
                    }
                }
            }
            let thresholds = ThresholdConfig { td, td_inter: tdi };
            let built = build_adjacency(&structure, &partition, thresholds).unwrap();
            if built.entries() != adj.as_slice() || built.edge_counts().diag != diag || built.edge_counts().off != [off] {
                return Outcome::Fail(format!("fixture {per_chain} Td=({td},{tdi}): adjacency or counts differ"));
            }
            let scale = |l: usize, m: usize, e: u64| -> Option<f64> {
                let e = e as f64;
                if l == m {
                    let nn = sizes[l] as f64;
                    let v = (8.0 * e / (nn - 1.0)) * (1.0 - 2.0 * e / (nn * (nn - 1.0)));
                    (e > 0.0 && e < nn * (nn - 1.0) / 2.0).then(|| 1.0 / v.sqrt())
                } else {
                    let cells = (sizes[l] * sizes[m]) as f64;
                    let v = (4.0 * e / cells.sqrt()) * (1.0 - e / cells);
                    (e > 0.0 && e < cells).then(|| 1.0 / v.sqrt())
                }
            };
            let scales = [
                [scale(0, 0, diag[0]), scale(0, 1, off)],
                [scale(0, 1, off), scale(1, 1, diag[1])],
            ];
            match scaled_protein_matrix(built) {
                Ok(m) => {
                    for i in 0..n {
                        for j in 0..n {
                            let want = adj[i * n + j] * scales[layer(i)][layer(j)].unwrap_or(1.0);
                            if m.get(i, j) != want {
                                return Outcome::Fail(format!(
                                    "fixture {per_chain} Td=({td},{tdi}): scaled entry ({i},{j}) {} != {want}",
                                    m.get(i, j)
                                ));
                            }
                        }
                    }
                }
                Err(_) if scales.iter().flatten().all(Option::is_none) => {}
                Err(e) => return Outcome::Fail(format!("fixture {per_chain}: {e}")),
            }
            checked += 1;
        }
    }

    let dir = tmp.path();
    common::write_fixture(dir, 20);
    let exp = common::protein_experiment(dir, "fixture", "fixture.pdb");
    let mut runs = Vec::new();
    for (i, jobs) in ["1", "2"].iter().enumerate() {
        let out = dir.join(format!("run{i}"));
        let status = Command::new(env!("CARGO_BIN_EXE_mlnet"))
            .args(["protein", "--experiment"])
            .arg(&exp)
            .args(["--svg", "--jobs", jobs, "--out"])
            .arg(&out)
            .output()
            .unwrap();
        if !status.status.success() {
            return Outcome::Fail(format!("CLI run failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        let mut files = BTreeMap::new();
        for entry in std::fs::read_dir(out.join("fixture")).unwrap() {
            let entry = entry.unwrap();
            files.insert(entry.file_name(), std::fs::read(entry.path()).unwrap());
        }
        runs.push(files);
    }
    verdict(
        runs[0] == runs[1],
        format!(
            "{checked} fixture/threshold cases match the all-pairs oracle exactly; {} CLI outputs byte-identical",
            runs[0].len()
        ),
    )
}

fn pdb_dir() -> PathBuf {
    std::env::var_os("MLNET_PDB_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| common::workspace_root().join("data/pdb"))
}

fn protein_run(suite: &mut Suite, name: &str, dir: &Path) -> Result<(ProteinExperiment, mlnet::protein::ProteinSweep), String> {
    let Experiment::Protein(mut p) = suite.load(name) else { unreachable!() };
    let file = p.structure.file_name().unwrap().to_owned();
    p.structure = dir.join(file);
    let structure = load_structure(&p.structure, &p.atom).map_err(|e| e.to_string())?;
    let partition = LayerPartition::resolve(p.partition.clone(), &structure).map_err(|e| e.to_string())?;
    let fitter = suite.fitter(p.analysis.alpha_grid).clone();
    let sweep = threshold_sweep(
        &structure,
        &partition,
        p.mode,
        &p.thresholds,
        &p.k_orders,
        &fitter,
        &p.analysis.candidates(&p.k_orders),
        0,
    )
    .map_err(|e| e.to_string())?;
    Ok((p, sweep))
}

fn c8_real(suite: &mut Suite) -> Outcome {
    let dir = pdb_dir();
    let missing: Vec<&str> = ["1EWT", "1EWK", "1UW6"]
        .into_iter()
        .filter(|id| !dir.join(format!("{id}.pdb")).exists())
        .collect();
    if !missing.is_empty() {
        return Outcome::Skip(format!(
            "{} not found in {} (set MLNET_PDB_DIR or run scripts/fetch_pdb.sh)",
            missing.join(", "),
            dir.display()
        ));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    let mut trajectories = BTreeMap::new();
    for name in ["protein-1ewt-joint", "protein-1ewt-inter", "protein-1ewk-joint", "protein-1uw6-joint"] {
        let (p, sweep) = match protein_run(suite, name, &dir) {
            Ok(r) => r,
            Err(e) => {
                ok = false;
                parts.push(format!("{name}: {e}"));
                continue;
            }
        };
        if let Some(n) = p.expected_residues {
            ok &= sweep.residues == n;
            parts.push(format!("{name}: {} residues (expected {n})", sweep.residues));
        }
        let mut worst: f64 = 0.0;
        for r in &p.reference_counts {
            let Some(point) = sweep
                .points
                .iter()
                .find(|pt| pt.thresholds.td == r.td && pt.thresholds.td_inter == r.td_inter)
            else {
                ok = false;
                parts.push(format!("{name}: no sweep point at ({}, {})", r.td, r.td_inter));
                continue;
            };
            let observed = point.edge_counts.diag.iter().chain(&point.edge_counts.off);
            for (&o, &want) in observed.zip(r.diag.iter().chain(&r.off)) {
                let dev = if want == 0 { o as f64 } else { (o as f64 - want as f64).abs() / want as f64 };
                worst = worst.max(dev);
            }
        }
        if !p.reference_counts.is_empty() {
            ok &= worst <= 0.10;
            parts.push(format!("{name}: worst edge-count deviation {:.1}%", 100.0 * worst));
        }
        trajectories.insert(name, sweep);
    }
    let closer = |name: &str, td: f64, near: f64, far: f64| -> Option<(bool, String)> {
        let sweep = trajectories.get(name)?;
        let point = sweep.points.iter().find(|p| p.thresholds.td == td)?;
        let f = fit_for(&point.fits, 2);
        let (a, b) = (f.ks_to(near)?, f.ks_to(far)?);
        Some((a < b, format!("{name} Td={td}: ks(α={near})={a:.4} vs ks(α={far})={b:.4}")))
    };
    for (name, td, near, far) in [
        ("protein-1ewt-joint", 7.0, 2.0, 4.0),
        ("protein-1ewt-joint", 11.0, 4.0, 2.0),
        ("protein-1uw6-joint", 5.5, 1.0, 2.0),
        ("protein-1uw6-joint", 10.0, 2.0, 1.0),
    ] {
        match closer(name, td, near, far) {
            Some((pass, line)) => {
                ok &= pass;
                parts.push(line);
            }
            None => {
                ok = false;
                parts.push(format!("{name} Td={td}: missing fit"));
            }
        }
    }
    verdict(ok, parts.join("; "))
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn c9_properties() -> Outcome {
    let mut rng = Lcg(7);
    let mut fails = Vec::new();

    let mut worst_affine: f64 = 0.0;
    for _ in 0..50 {
        let v: Vec<f64> = (0..60).map(|_| rng.next() * 10.0 - 5.0).collect();
        let (a, b) = (0.1 + 5.0 * rng.next(), 20.0 * rng.next() - 10.0);
        let w: Vec<f64> = v.iter().map(|x| a * x + b).collect();
        for k in 1..4 {
            let (r, s) = (ratios_of(&v, k).unwrap(), ratios_of(&w, k).unwrap());
            if r.len() != s.len() {
                fails.push("affine: sample sizes differ".to_string());
                break;
            }
            for (x, y) in r.values().iter().zip(s.values()) {
                worst_affine = worst_affine.max((x - y).abs() / x.max(1.0));
            }
        }
    }
    if worst_affine > 1e-9 {
        fails.push(format!("affine invariance off by {worst_affine:.2e}"));
    }

    let mut worst_sym: f64 = 0.0;
    for alpha in [0.5, 1.0, 1.25, 2.0, 3.0, 5.0, 8.0, 13.0] {
        for i in 1..200 {
            let r = 0.05 * i as f64;
            let (p, q) = (density(alpha, r).unwrap(), density(alpha, 1.0 / r).unwrap() / (r * r));
            worst_sym = worst_sym.max((p - q).abs() / p.max(1e-300));
        }
    }
    if worst_sym > 1e-12 {
        fails.push(format!("density symmetry off by {worst_sym:.2e}"));
    }

    for (case, seed) in [(NetworkCase::A, 1), (NetworkCase::B, 2), (NetworkCase::C, 3), (NetworkCase::D, 4)] {
        let spec = MultilayerSpec::for_case(case, &[25, 25], &[0.3, 0.4], &[0.2]).with_seed(seed);
        let plan = ExperimentPlan::new(spec, 6, &[1, 2, 3]);
        let whole = run_ensemble(&plan, 1).unwrap();
        let mut left = run_realizations(&plan, 0..2, 1).unwrap();
        let right = run_realizations(&plan, 2..6, 3).unwrap();
        for (k, s) in left.iter_mut() {
            s.merge(&right[k]);
        }
        if whole != left {
            fails.push(format!("pooling not associative for case {case:?}"));
        }
        if whole != run_ensemble(&plan, 4).unwrap() {
            fails.push(format!("case {case:?} depends on worker count"));
        }
    }

    let mut worst_scale: f64 = 0.0;
    for (n, p) in [(400usize, 0.05), (800, 0.05), (351, 0.5), (101, 0.2), (41, 0.9)] {
        let e = (p * (n * (n - 1)) as f64 / 2.0).round() as u64;
        let p_hat = e as f64 / ((n * (n - 1)) as f64 / 2.0);
        let (x, y) = (edge_count_scale_diag(n, e).unwrap(), probability_scale_diag(n, p_hat).unwrap());
        worst_scale = worst_scale.max((x - y).abs() / y);
    }
    for (nj, nk, p) in [(350usize, 450usize, 0.5), (200, 300, 0.05), (30, 70, 0.1)] {
        let e = (p * (nj * nk) as f64).round() as u64;
        let p_hat = e as f64 / (nj * nk) as f64;
        let (x, y) = (edge_count_scale_off(nj, nk, e).unwrap(), probability_scale_off(nj, nk, p_hat).unwrap());
        worst_scale = worst_scale.max((x - y).abs() / y);
    }
    if worst_scale > 1e-12 {
        fails.push(format!("scaling formulas differ by {worst_scale:.2e}"));
    }

    if fails.is_empty() {
        Outcome::Pass(format!(
            "affine {worst_affine:.1e}, symmetry {worst_sym:.1e}, scaling {worst_scale:.1e}; pooling and worker-count checks hold"
        ))
    } else {
        Outcome::Fail(fails.join("; "))
    }
}

fn main() {
    let mut suite = Suite {
        fitters: Vec::new(),
        experiments: common::workspace_root().join("experiments"),
    };
    type Check = Box<dyn Fn(&mut Suite) -> Outcome>;
    let criteria: Vec<(&str, Check)> = vec![
        ("C1 analytic fidelity", Box::new(|_| c1_analytic())),
        ("C2 GOE baseline", Box::new(c2_goe)),
        ("C3 superposed GOE", Box::new(c3_superposed)),
        ("C4 single GOE", Box::new(c4_single)),
        ("C5 scaling necessity", Box::new(c5_scaling)),
        ("C6 crossover", Box::new(c6_crossover)),
        ("C7 protein fixtures", Box::new(|_| c7_fixture())),
        ("C8 protein real data", Box::new(c8_real)),
        ("C9 properties", Box::new(|_| c9_properties())),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (name, check) in &criteria {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let t = Instant::now();
        let outcome = check(&mut suite);
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {name} ({secs:.1}s): {detail}");
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        if std::env::var_os("MLNET_ACCEPTANCE_STRICT").is_some() {
            std::process::exit(1);
        }
    }
}
