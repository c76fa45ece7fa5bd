//! Seeded ensembles of network realizations and parameter sweeps.
//!
//! Realization `i` draws its blocks from the ChaCha stream `i` of the master
//! seed, so any subset of realizations can be run independently (and in any
//! order) and pooled afterwards.

use std::collections::BTreeMap;
use std::ops::Range;

use mlnet_core::analytics::{alpha_for, AnalyticCurve};
use mlnet_core::netgen::{assemble, MultilayerSpec};
use mlnet_core::spectral::{
    eigenvalues, ks_distance_sorted, spacing_ratios, AlphaFitter, FitResult, RatioSample, SourceMeta,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A seeded ensemble: `realizations` matrices of `spec`, ratios for every
/// order in `k_orders`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub spec: MultilayerSpec,
    pub realizations: u64,
    pub k_orders: Vec<usize>,
    pub master_seed: u64,
    /// Effective block count for the α lookup; derived from the case when
    /// `None`.
    pub expected_m: Option<usize>,
}

impl ExperimentPlan {
    /// Plan seeded from `spec.seed`.
    pub fn new(spec: MultilayerSpec, realizations: u64, k_orders: &[usize]) -> Self {
        ExperimentPlan {
            master_seed: spec.seed,
            spec,
            realizations,
            k_orders: k_orders.to_vec(),
            expected_m: None,
        }
    }

    pub fn with_master_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_expected_m(mut self, m: usize) -> Self {
        self.expected_m = Some(m);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.realizations == 0 {
            return Err(Error::Schema("realizations must be at least 1".into()));
        }
        if self.k_orders.is_empty() {
            return Err(Error::Schema("k_orders must list at least one order".into()));
        }
        let n = self.spec.dim();
        for &k in &self.k_orders {
            if k == 0 || n < 2 * k + 1 {
                return Err(Error::Schema(format!(
                    "ratio order k={k} needs 1 <= k and 2k+1 <= n (n = {n})"
                )));
            }
        }
        Ok(())
    }

    /// The spec that realizations are drawn from.
    pub fn seeded_spec(&self) -> MultilayerSpec {
        self.spec.clone().with_seed(self.master_seed)
    }

    /// Effective block count: `expected_m` if given, else from the case.
    pub fn effective_blocks(&self) -> Result<usize> {
        if let Some(m) = self.expected_m {
            return Ok(m);
        }
        let case = self.spec.case().ok_or_else(|| {
            mlnet_core::Error::UnknownCase(format!(
                "diag_mode {:?}, off_diag_mode {:?}, gamma {:?}; set expected_m",
                self.spec.diag_mode, self.spec.off_diag_mode, self.spec.gamma
            ))
        })?;
        Ok(case.effective_blocks(self.spec.num_layers()))
    }
}

/// Table α for order `k`: block count `m` for case a, 1 for cases b–d.
pub fn expected_alpha(plan: &ExperimentPlan, k: usize) -> Result<f64> {
    Ok(alpha_for(k, plan.effective_blocks()?)?)
}

/// Pooled ratio samples keyed by order `k`.
pub type PooledRatios = BTreeMap<usize, RatioSample>;

fn spec_hash(spec: &MultilayerSpec) -> u64 {
    let bytes = serde_json::to_vec(spec).expect("spec serializes");
    let digest = Sha256::digest(&bytes);
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Pool(e.to_string()))
}

fn one_realization(spec: &MultilayerSpec, k_orders: &[usize], index: u64) -> Result<Vec<RatioSample>> {
    let wrap = |source| Error::Realization { index, source };
    let matrix = assemble(spec, index).map_err(wrap)?;
    let spectrum = eigenvalues(&matrix).map_err(wrap)?;
    k_orders
        .iter()
        .map(|&k| spacing_ratios(&spectrum, k).map_err(wrap))
        .collect()
}

/// Runs realizations `range` of `plan` on `jobs` worker threads (0 picks
/// the machine default). Samples are pooled in realization order, so the
/// result does not depend on `jobs`.
pub fn run_realizations(plan: &ExperimentPlan, range: Range<u64>, jobs: usize) -> Result<PooledRatios> {
    plan.validate()?;
    let spec = plan.seeded_spec();
    let per_run: Vec<Vec<RatioSample>> = pool(jobs)?.install(|| {
        range
            .clone()
            .into_par_iter()
            .map(|i| one_realization(&spec, &plan.k_orders, i))
            .collect::<Result<_>>()
    })?;
    let meta = SourceMeta {
        layers: spec.num_layers(),
        spec_hash: spec_hash(&spec),
        realizations: 0,
    };
    let mut pooled: PooledRatios = plan
        .k_orders
        .iter()
        .map(|&k| {
            let mut s = RatioSample::new(k);
            s.meta = meta;
            (k, s)
        })
        .collect();
    for samples in per_run {
        for mut s in samples {
            s.meta.realizations = 1;
            pooled.get_mut(&s.k()).expect("requested order").merge(&s);
        }
    }
    Ok(pooled)
}

/// Runs every realization of `plan`.
pub fn run_ensemble(plan: &ExperimentPlan, jobs: usize) -> Result<PooledRatios> {
    run_realizations(plan, 0..plan.realizations, jobs)
}

/// Fit of one pooled sample plus KS distances to reference curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub k: usize,
    pub fit: FitResult,
    /// Table α for this order, when the network has a known case.
    pub expected_alpha: Option<f64>,
    /// `(α, KS distance)` for each reference α.
    pub candidates: Vec<(f64, f64)>,
    pub ratios: usize,
    pub dropped: usize,
}

impl OrderFit {
    pub fn ks_to(&self, alpha: f64) -> Option<f64> {
        self.candidates.iter().find(|(a, _)| *a == alpha).map(|&(_, d)| d)
    }
}

/// Fits `sample` over the fitter's grid and measures KS distances to each
/// α in `candidates` (plus `expected`, when given).
pub fn fit_order(
    sample: &RatioSample,
    fitter: &AlphaFitter,
    expected: Option<f64>,
    candidates: &[f64],
) -> Result<OrderFit> {
    let fit = fitter.fit(sample)?;
    let sorted = sample.sorted();
    let mut alphas: Vec<f64> = candidates.to_vec();
    if let Some(a) = expected {
        if !alphas.contains(&a) {
            alphas.push(a);
        }
    }
    let candidates = alphas
        .into_iter()
        .map(|a| Ok((a, ks_distance_sorted(&sorted, &AnalyticCurve::new(a)?))))
        .collect::<Result<_>>()?;
    Ok(OrderFit {
        k: sample.k(),
        fit,
        expected_alpha: expected,
        candidates,
        ratios: sample.len(),
        dropped: sample.dropped(),
    })
}

/// The parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Gamma,
    /// Intra-layer probability of layer `j` (0-based).
    IntraP(usize),
    /// Inter-layer probability of pair `(j, k)` (0-based, `j < k`).
    InterP(usize, usize),
    Td,
    TdInter,
}

impl SweepAxis {
    /// Column name used in CSV output.
    pub fn column(&self) -> String {
        match *self {
            SweepAxis::Gamma => "gamma".into(),
            SweepAxis::IntraP(j) => format!("p_{}", j + 1),
            SweepAxis::InterP(j, k) => format!("p_{}{}", j + 1, k + 1),
            SweepAxis::Td => "td".into(),
            SweepAxis::TdInter => "td_inter".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub fits: Vec<OrderFit>,
}

/// Fits along a parameter axis, ordered by parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// `(value, α̂)` pairs for order `k`.
    pub fn trajectory(&self, k: usize) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.fits.iter().find(|f| f.k == k).map(|f| (p.value, f.fit.alpha_hat)))
            .collect()
    }
}

fn sorted_values(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Schema("sweep values must be finite".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

fn with_axis(spec: &MultilayerSpec, axis: SweepAxis, value: f64) -> Result<MultilayerSpec> {
    let mut spec = spec.clone();
    match axis {
        SweepAxis::Gamma => spec.gamma = Some(value),
        SweepAxis::IntraP(j) => {
            *spec
                .intra_p
                .get_mut(j)
                .ok_or_else(|| Error::Schema(format!("no layer {}", j + 1)))? = value
        }
        SweepAxis::InterP(j, k) => {
            let m = spec.num_layers();
            if !(j < k && k < m) {
                return Err(Error::Schema(format!("no layer pair ({}, {})", j + 1, k + 1)));
            }
            let idx = spec.layout().pair_index(j, k);
            *spec
                .inter_p
                .get_mut(idx)
                .ok_or_else(|| Error::Schema("inter_p too short for the swept pair".into()))? = value
        }
        SweepAxis::Td | SweepAxis::TdInter => {
            return Err(Error::Schema("distance thresholds apply to protein sweeps only".into()))
        }
    }
    Ok(spec)
}

/// Runs `base` at each value of `axis` and fits every order.
///
/// `candidates` are the reference α values whose KS distances are kept.
pub fn parameter_sweep(
    base: &ExperimentPlan,
    axis: SweepAxis,
    values: &[f64],
    fitter: &AlphaFitter,
    candidates: &[f64],
    jobs: usize,
) -> Result<SweepResult> {
    let mut points = Vec::new();
    for value in sorted_values(values)? {
        let plan = ExperimentPlan {
            spec: with_axis(&base.spec, axis, value)?,
            ..base.clone()
        };
        let pooled = run_ensemble(&plan, jobs)?;
        let fits = pooled
            .values()
            .map(|s| {
                let expected = expected_alpha(&plan, s.k()).ok();
                fit_order(s, fitter, expected, candidates)
            })
            .collect::<Result<_>>()?;
        points.push(SweepPoint { value, fits });
    }
    Ok(SweepResult { axis, points })
}

/// γ sweep of a bilayer crossover plan.
pub fn crossover_sweep(
    base: &ExperimentPlan,
    gammas: &[f64],
    fitter: &AlphaFitter,
    candidates: &[f64],
    jobs: usize,
) -> Result<SweepResult> {
    if base.spec.num_layers() != 2 {
        return Err(Error::Schema("crossover sweeps need a bilayer spec".into()));
    }
    parameter_sweep(base, SweepAxis::Gamma, gammas, fitter, candidates, jobs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mlnet_core::netgen::NetworkCase;
    use mlnet_core::spectral::AlphaGrid;

    fn plan(case: NetworkCase, layers: &[usize], p: &[f64], q: &[f64]) -> ExperimentPlan {
        ExperimentPlan::new(MultilayerSpec::for_case(case, layers, p, q).with_seed(17), 6, &[1, 2])
    }

    #[test]
    fn expected_alpha_follows_case() {
        let a = plan(NetworkCase::A, &[30, 40], &[0.2, 0.3], &[]);
        assert_eq!(expected_alpha(&a, 3).unwrap(), 4.0);
        let d = plan(NetworkCase::D, &[10, 20, 30], &[], &[0.1, 0.2, 0.3]);
        assert_eq!(expected_alpha(&d, 4).unwrap(), 13.0);
        let c = plan(NetworkCase::C, &[20, 20], &[0.2, 0.3], &[]);
        assert_eq!(expected_alpha(&c, 2).unwrap(), 4.0);
        let x = ExperimentPlan::new(MultilayerSpec::crossover([20, 30], 0.1, 0.2, 0.1, 0.5), 1, &[2]);
        assert!(matches!(
            expected_alpha(&x, 2),
            Err(Error::Core(mlnet_core::Error::UnknownCase(_)))
        ));
        assert_eq!(expected_alpha(&x.with_expected_m(2), 2).unwrap(), 2.0);
    }

    #[test]
    fn complete_triangles() {
        let p = ExperimentPlan::new(
            MultilayerSpec::for_case(NetworkCase::A, &[3, 3], &[1.0, 1.0], &[]),
            1,
            &[1],
        );
        let pooled = run_ensemble(&p, 1).unwrap();
        let s = &pooled[&1];
        // spectrum (-1,-1,-1,-1,2,2) scaled by 1: every ratio has a zero gap
        assert_eq!(s.len() + s.dropped(), 6 - 2);
        assert_eq!(s.meta.realizations, 1);
    }

    #[test]
    fn ratio_counts() {
        let p = plan(NetworkCase::B, &[30, 40], &[0.2, 0.3], &[0.1]);
        let pooled = run_ensemble(&p, 2).unwrap();
        for (&k, s) in &pooled {
            assert_eq!(s.len() + s.dropped(), 6 * (70 - 2 * k));
            assert_eq!(s.meta.realizations, 6);
            assert_eq!(s.meta.layers, 2);
        }
    }

    #[test]
    fn pooling_is_associative_and_job_independent() {
        let p = plan(NetworkCase::A, &[30, 40], &[0.2, 0.3], &[]);
        let whole = run_ensemble(&p, 1).unwrap();
        let mut split = run_realizations(&p, 0..2, 3).unwrap();
        let rest = run_realizations(&p, 2..6, 2).unwrap();
        for (k, s) in split.iter_mut() {
            s.merge(&rest[k]);
        }
        assert_eq!(whole, split);
        assert_eq!(whole, run_ensemble(&p, 4).unwrap());
    }

    #[test]
    fn errors_name_the_realization() {
        let mut p = plan(NetworkCase::A, &[30, 40], &[0.2, 0.3], &[]);
        p.k_orders = vec![40];
        assert!(matches!(run_ensemble(&p, 1), Err(Error::Schema(_))));
        p.k_orders = vec![1];
        p.realizations = 0;
        assert!(matches!(run_ensemble(&p, 1), Err(Error::Schema(_))));
    }

    #[test]
    fn sweep_points_are_ordered() {
        let base = ExperimentPlan::new(MultilayerSpec::crossover([20, 30], 0.2, 0.3, 0.2, 0.0), 2, &[2]);
        let fitter = AlphaFitter::new(AlphaGrid { start: 0.0, stop: 6.0, step: 0.5 }).unwrap();
        let sweep = crossover_sweep(&base, &[0.5, 0.0, 0.25], &fitter, &[2.0, 4.0], 1).unwrap();
        let values: Vec<f64> = sweep.points.iter().map(|p| p.value).collect();
        assert_eq!(values, vec![0.0, 0.25, 0.5]);
        assert_eq!(sweep.trajectory(2).len(), 3);
        assert!(sweep.points[0].fits[0].ks_to(4.0).is_some());
    }

    #[test]
    fn gamma_zero_matches_block_diagonal_case() {
        let x = ExperimentPlan::new(MultilayerSpec::crossover([20, 30], 0.2, 0.3, 0.2, 0.0).with_seed(5), 3, &[1, 2]);
        let a = ExperimentPlan::new(
            MultilayerSpec::for_case(NetworkCase::A, &[20, 30], &[0.2, 0.3], &[]).with_seed(5),
            3,
            &[1, 2],
        );
        assert_eq!(
            run_ensemble(&x, 1).unwrap()[&2].values(),
            run_ensemble(&a, 1).unwrap()[&2].values()
        );
    }

    #[test]
    fn probability_axis() {
        let base = plan(NetworkCase::B, &[20, 30], &[0.2, 0.3], &[0.1]);
        let spec = with_axis(&base.spec, SweepAxis::InterP(0, 1), 0.4).unwrap();
        assert_eq!(spec.inter_p, vec![0.4]);
        assert!(with_axis(&base.spec, SweepAxis::IntraP(5), 0.4).is_err());
        assert_eq!(SweepAxis::InterP(0, 1).column(), "p_12");
    }
}
