//! The `analytic`, `simulate`, `crossover` and `protein` commands.

use std::path::{Path, PathBuf};

use mlnet_core::analytics::AnalyticCurve;
use mlnet_core::protein::LayerPartition;
use mlnet_core::spectral::{histogram, AlphaFitter, EmpiricalHistogram, RatioSample};

use crate::ensemble::{crossover_sweep, expected_alpha, fit_order, run_ensemble, SweepResult};
use crate::error::{Error, Result};
use crate::experiment::{AnalyticExperiment, Experiment, FORMAT_VERSION};
use crate::output::{self, tag, ArtifactDir};
use crate::protein::{load_structure, threshold_sweep};
use crate::svg::{Bars, Plot, Series};

/// Settings shared by all commands.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub seed: Option<u64>,
    pub paper_scale: bool,
    pub svg: bool,
}

/// Loads an experiment and applies the `--seed` / `--paper-scale`
/// overrides.
pub fn load_experiment(path: &Path, opts: &RunOptions) -> Result<Experiment> {
    let mut exp = Experiment::load(path)?;
    if let Some(seed) = opts.seed {
        exp.set_seed(seed);
    }
    if opts.paper_scale {
        exp.apply_paper_scale()?;
    }
    Ok(exp)
}

fn wrong_kind(exp: &Experiment, command: &str) -> Error {
    let runner = match exp {
        Experiment::Ensemble(_) => "simulate",
        other => other.kind(),
    };
    Error::Schema(format!(
        "`{command}` cannot run experiment {:?} of kind {:?}; use `mlnet {runner}`",
        exp.name(),
        exp.kind(),
    ))
}

const CDF_POINTS: usize = 400;

fn histogram_plot(title: String, hist: &EmpiricalHistogram, curves: &[f64]) -> Result<String> {
    let mut plot = Plot::new(title, "r", "P(r)");
    plot.bars = Some(Bars {
        bins: hist
            .bin_edges
            .windows(2)
            .zip(&hist.densities)
            .map(|(w, &d)| (w[0], w[1], d))
            .collect(),
    });
    for &a in curves {
        let c = AnalyticCurve::new(a)?;
        let points = (0..=250)
            .map(|i| {
                let r = hist.support_cut * i as f64 / 250.0;
                Ok((r, c.density(r)?))
            })
            .collect::<Result<_>>()?;
        plot.series.push(Series {
            label: format!("alpha = {a}"),
            points,
        });
    }
    Ok(plot.render())
}

fn cumulative_plot(title: String, sample: &RatioSample, cut: f64, curves: &[f64]) -> Result<String> {
    let sorted = sample.sorted();
    let n = sorted.len();
    let stride = (n / CDF_POINTS).max(1);
    let empirical: Vec<(f64, f64)> = sorted
        .iter()
        .enumerate()
        .step_by(stride)
        .filter(|(_, &x)| x <= cut)
        .map(|(i, &x)| (x, (i + 1) as f64 / n as f64))
        .collect();
    let mut plot = Plot::new(title, "s", "F(s)");
    plot.series.push(Series {
        label: "empirical".into(),
        points: empirical,
    });
    for &a in curves {
        let c = AnalyticCurve::new(a)?;
        let points = (0..=250)
            .map(|i| {
                let s = cut * i as f64 / 250.0;
                (s, c.csrd_fast(s))
            })
            .collect();
        plot.series.push(Series {
            label: format!("alpha = {a}"),
            points,
        });
    }
    Ok(plot.render())
}

fn trajectory_plot(sweep: &SweepResult, k_orders: &[usize]) -> String {
    let mut plot = Plot::new("fitted alpha along the sweep", sweep.axis.column(), "alpha_hat");
    plot.markers = true;
    for &k in k_orders {
        plot.series.push(Series {
            label: format!("k = {k}"),
            points: sweep.trajectory(k),
        });
    }
    plot.render()
}

/// Writes `alpha_<α>.csv` (`r, density, csrd`) for every α.
pub fn run_analytic(exp: &AnalyticExperiment, hash: &str, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let curves = exp
        .alphas
        .iter()
        .map(|&a| AnalyticCurve::new(a))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut dir = ArtifactDir::create(&opts.out, &exp.name)?;
    for c in &curves {
        let csv = output::analytic_csv(hash, c, exp.rmax, exp.step)?;
        dir.write(&format!("alpha_{}.csv", tag(c.alpha())), &csv)?;
    }
    if opts.svg {
        let mut pdf = Plot::new("spacing-ratio densities", "r", "P(r)");
        let mut cdf = Plot::new("cumulative distributions", "s", "F(s)");
        let rows = (exp.rmax / exp.step + 1e-9).floor() as usize + 1;
        for c in &curves {
            let grid = (0..rows).map(|i| i as f64 * exp.step);
            pdf.series.push(Series {
                label: format!("alpha = {}", c.alpha()),
                points: grid.clone().map(|r| (r, c.density(r).unwrap_or(f64::NAN))).collect(),
            });
            cdf.series.push(Series {
                label: format!("alpha = {}", c.alpha()),
                points: grid.map(|s| (s, c.csrd_fast(s))).collect(),
            });
        }
        dir.write("density.svg", &pdf.render())?;
        dir.write("csrd.svg", &cdf.render())?;
    }
    Ok(dir.into_written())
}

/// `analytic` from command-line values; artifacts go to `<out>/analytic`.
pub fn cmd_analytic(alphas: &[f64], rmax: f64, step: f64, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let exp = Experiment::Analytic(AnalyticExperiment {
        version: FORMAT_VERSION,
        name: "analytic".into(),
        seed: opts.seed.unwrap_or(0),
        alphas: alphas.to_vec(),
        rmax,
        step,
    });
    exp.validate()?;
    let Experiment::Analytic(a) = &exp else { unreachable!() };
    run_analytic(a, &exp.hash(), opts)
}

/// `analytic --experiment <file>`.
pub fn cmd_analytic_file(path: &Path, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let exp = load_experiment(path, opts)?;
    match &exp {
        Experiment::Analytic(a) => run_analytic(a, &exp.hash(), opts),
        other => Err(wrong_kind(other, "analytic")),
    }
}

/// Runs an ensemble experiment: per order `hist_k<k>.csv` and
/// `fit_k<k>.json` (plus SVG overlays with `--svg`).
pub fn cmd_simulate(path: &Path, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let exp = load_experiment(path, opts)?;
    let Experiment::Ensemble(e) = &exp else {
        return Err(wrong_kind(&exp, "simulate"));
    };
    let hash = exp.hash();
    let plan = e.plan()?;
    let pooled = run_ensemble(&plan, opts.jobs)?;
    let fitter = AlphaFitter::new(e.analysis.alpha_grid)?;
    let candidates = e.analysis.candidates(&e.k_orders);
    let mut dir = ArtifactDir::create(&opts.out, &e.name)?;
    dir.write("experiment.json", &output::to_json(&exp))?;
    for (k, sample) in &pooled {
        let expected = expected_alpha(&plan, *k).ok();
        let fit = fit_order(sample, &fitter, expected, &candidates)?;
        let hist = histogram(sample, e.analysis.bin_width, e.analysis.support_cut)?;
        let reference = expected.unwrap_or(fit.fit.alpha_hat);
        let curve = AnalyticCurve::new(reference)?;
        dir.write(&format!("hist_k{k}.csv"), &output::histogram_csv(&hash, &hist, Some(&curve)))?;
        dir.write(&format!("fit_k{k}.json"), &output::to_json(&fit))?;
        if opts.svg {
            let title = format!("{}: k = {k}, fitted alpha = {}", e.name, fit.fit.alpha_hat);
            dir.write(&format!("hist_k{k}.svg"), &histogram_plot(title.clone(), &hist, &[reference])?)?;
            dir.write(
                &format!("csrd_k{k}.svg"),
                &cumulative_plot(title, sample, e.analysis.support_cut, &[reference])?,
            )?;
        }
    }
    Ok(dir.into_written())
}

/// Runs a γ sweep: `sweep.csv` (`gamma, k, alpha_hat, ks_distance`) and
/// `sweep.json`.
pub fn cmd_crossover(path: &Path, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let exp = load_experiment(path, opts)?;
    let Experiment::Crossover(c) = &exp else {
        return Err(wrong_kind(&exp, "crossover"));
    };
    let hash = exp.hash();
    let fitter = AlphaFitter::new(c.analysis.alpha_grid)?;
    let sweep = crossover_sweep(&c.plan()?, &c.gammas, &fitter, &c.candidates(), opts.jobs)?;
    let mut dir = ArtifactDir::create(&opts.out, &c.name)?;
    dir.write("experiment.json", &output::to_json(&exp))?;
    dir.write("sweep.csv", &output::sweep_csv(&hash, &sweep))?;
    dir.write("sweep.json", &output::to_json(&sweep))?;
    if opts.svg {
        dir.write("alpha_vs_gamma.svg", &trajectory_plot(&sweep, &c.k_orders))?;
    }
    Ok(dir.into_written())
}

/// Runs a protein threshold sweep: `thresholds.csv`, `sweep.csv`,
/// per-point histograms and, when the experiment lists reference counts,
/// `reference_check.csv`.
pub fn cmd_protein(path: &Path, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let exp = load_experiment(path, opts)?;
    let Experiment::Protein(p) = &exp else {
        return Err(wrong_kind(&exp, "protein"));
    };
    let hash = exp.hash();
    let structure = load_structure(&p.structure, &p.atom)?;
    if let Some(expected) = p.expected_residues {
        if expected != structure.len() {
            eprintln!(
                "warning: {} has {} residues with atom {}, experiment expects {expected}",
                p.structure.display(),
                structure.len(),
                p.atom
            );
        }
    }
    let partition = LayerPartition::resolve(p.partition.clone(), &structure).map_err(|source| Error::Structure {
        path: p.structure.clone(),
        source,
    })?;
    let fitter = AlphaFitter::new(p.analysis.alpha_grid)?;
    let candidates = p.analysis.candidates(&p.k_orders);
    let sweep = threshold_sweep(
        &structure,
        &partition,
        p.mode,
        &p.thresholds,
        &p.k_orders,
        &fitter,
        &candidates,
        opts.jobs,
    )?;
    let result = sweep.to_sweep_result();
    let mut dir = ArtifactDir::create(&opts.out, &p.name)?;
    dir.write("experiment.json", &output::to_json(&exp))?;
    dir.write("thresholds.csv", &output::protein_csv(&hash, &sweep))?;
    dir.write("sweep.csv", &output::sweep_csv(&hash, &result))?;
    dir.write("sweep.json", &output::to_json(&sweep))?;
    if !p.reference_counts.is_empty() {
        dir.write("reference_check.csv", &output::reference_csv(&hash, &sweep, &p.reference_counts))?;
    }
    let axis = result.axis.column();
    for (point, value) in sweep.points.iter().zip(result.points.iter().map(|r| r.value)) {
        for fit in &point.fits {
            let sample = &point.samples[&fit.k];
            let hist = histogram(sample, p.analysis.bin_width, p.analysis.support_cut)?;
            let curve = AnalyticCurve::new(fit.fit.alpha_hat)?;
            let stem = format!("{axis}{}_k{}", tag(value), fit.k);
            dir.write(&format!("hist_{stem}.csv"), &output::histogram_csv(&hash, &hist, Some(&curve)))?;
            if opts.svg {
                let title = format!(
                    "{}: Td = {}, Td_Inter = {}, k = {}",
                    p.name, point.thresholds.td, point.thresholds.td_inter, fit.k
                );
                let alphas: Vec<f64> = fit.candidates.iter().map(|c| c.0).collect();
                dir.write(&format!("srd_{stem}.svg"), &histogram_plot(title.clone(), &hist, &alphas)?)?;
                dir.write(
                    &format!("csrd_{stem}.svg"),
                    &cumulative_plot(title, sample, p.analysis.support_cut, &alphas)?,
                )?;
            }
        }
    }
    if opts.svg {
        dir.write("alpha_vs_threshold.svg", &trajectory_plot(&result, &p.k_orders))?;
    }
    Ok(dir.into_written())
}
