//! Seeded Monte Carlo engine for the forced-pair sampling design.
//!
//! Each stratum draws one guaranteed treated and one guaranteed control
//! unit; the remaining `n_total - 2` assignments are independent
//! Bernoulli(p). Replications are partitioned into fixed-size chunks, each
//! chunk owns a ChaCha stream derived from `(master_seed, chunk index)`, and
//! chunk summaries are merged in chunk-index order — so a report is a pure
//! function of `(population, schemes, config)` no matter how many threads
//! execute the chunks.
//!
//! All schemes are evaluated on the same replication draws (common random
//! numbers), which sharpens variance comparisons without biasing the
//! marginal variances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{mean_difference, weighted_contrast};
use crate::moments::aggregate_variance;
use crate::stats::RunningMoments;
use crate::strata::{PopulationSpec, StratumSpec, WeightingScheme, collapse_by_propensity};

/// How per-unit outcomes are drawn around each stratum's `(mean, variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeModel {
    /// Normal draws with the stratum's arm mean and variance.
    Gaussian,
    /// `mean ± sd` with equal probability; same first two moments.
    TwoPoint,
}

/// Replication plan for one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub replications: u64,
    pub master_seed: u64,
    pub outcome_model: OutcomeModel,
    /// Replications per deterministic chunk; part of the reproducibility
    /// contract, since it fixes the RNG stream layout.
    pub chunk_size: u64,
}

impl SimConfig {
    pub const DEFAULT_CHUNK_SIZE: u64 = 4096;

    pub fn new(replications: u64, master_seed: u64) -> Self {
        SimConfig {
            replications,
            master_seed,
            outcome_model: OutcomeModel::Gaussian,
            chunk_size: Self::DEFAULT_CHUNK_SIZE,
        }
    }

    pub fn with_outcome_model(mut self, model: OutcomeModel) -> Self {
        self.outcome_model = model;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::SimConfig("replications must be at least 1"));
        }
        if self.chunk_size < 1 {
            return Err(Error::SimConfig("chunk_size must be at least 1"));
        }
        Ok(())
    }
}

/// Empirical summary of one estimator across replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub scheme: WeightingScheme,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
}

/// Deterministic record of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub replications: u64,
    pub master_seed: u64,
    pub outcome_model: OutcomeModel,
    pub chunk_size: u64,
    pub estimators: Vec<EstimatorSummary>,
}

/// Draws the arm counts for one stratum: `n1 = 1 + Binomial(n_total - 2, p)`.
pub fn draw_assignment<R: Rng + ?Sized>(spec: &StratumSpec, rng: &mut R) -> (u64, u64) {
    let free = Binomial::new(spec.free_trials(), spec.p)
        .expect("propensity validated upstream")
        .sample(rng);
    let n1 = 1 + free;
    (n1, spec.n_total - n1)
}

/// Draws outcome sums for fixed arm counts under the requested model.
///
/// A zero-variance arm contributes `count * mean` exactly and consumes no
/// randomness.
pub fn draw_outcomes<R: Rng + ?Sized>(
    spec: &StratumSpec,
    n1: u64,
    n0: u64,
    model: OutcomeModel,
    rng: &mut R,
) -> (f64, f64) {
    let sum1 = draw_arm_sum(spec.mu1, spec.var1, n1, model, rng);
    let sum0 = draw_arm_sum(spec.mu0, spec.var0, n0, model, rng);
    (sum1, sum0)
}

fn draw_arm_sum<R: Rng + ?Sized>(
    mean: f64,
    variance: f64,
    count: u64,
    model: OutcomeModel,
    rng: &mut R,
) -> f64 {
    if variance == 0.0 {
        return count as f64 * mean;
    }
    let sd = variance.sqrt();
    let mut sum = 0.0;
    match model {
        OutcomeModel::Gaussian => {
            for _ in 0..count {
                let z: f64 = StandardNormal.sample(rng);
                sum += mean + sd * z;
            }
        }
        OutcomeModel::TwoPoint => {
            for _ in 0..count {
                sum += if rng.random::<bool>() { mean + sd } else { mean - sd };
            }
        }
    }
    sum
}

/// Per-stratum constants hoisted out of the replication loop.
struct StratumPlan {
    p: f64,
    share: f64,
    free: Binomial,
    spec: StratumSpec,
    /// Index into the hybrid group accumulators.
    group: usize,
}

struct HybridPlan {
    group_count: usize,
    group_shares: Vec<f64>,
}

/// Runs `config.replications` replications and summarizes every requested
/// scheme on the shared draws.
pub fn run_monte_carlo(
    pop: &PopulationSpec,
    schemes: &[WeightingScheme],
    config: &SimConfig,
) -> Result<MonteCarloReport> {
    pop.require_valid()?;
    config.validate()?;
    if schemes.is_empty() {
        return Err(Error::SimConfig("at least one weighting scheme is required"));
    }

    let total_size = pop.total_size() as f64;
    let (_, grouping) = collapse_by_propensity(pop)?;
    let group_index: Vec<usize> = pop
        .strata
        .iter()
        .map(|s| {
            grouping
                .groups
                .iter()
                .position(|g| g.members.contains(&s.label))
                .expect("every stratum belongs to a collapse group")
        })
        .collect();
    let mut group_shares = vec![0.0f64; grouping.groups.len()];
    for (spec, &g) in pop.strata.iter().zip(&group_index) {
        group_shares[g] += spec.n_total as f64 / total_size;
    }
    let hybrid = HybridPlan { group_count: grouping.groups.len(), group_shares };

    let plans: Vec<StratumPlan> = pop
        .strata
        .iter()
        .zip(&group_index)
        .map(|(spec, &group)| StratumPlan {
            p: spec.p,
            share: spec.n_total as f64 / total_size,
            free: Binomial::new(spec.free_trials(), spec.p)
                .expect("propensity validated upstream"),
            spec: spec.clone(),
            group,
        })
        .collect();

    let chunk_count = config.replications.div_ceil(config.chunk_size);
    let chunk_summaries: Vec<Vec<RunningMoments>> = (0..chunk_count)
        .into_par_iter()
        .map(|chunk| run_chunk(chunk, &plans, &hybrid, schemes, config))
        .collect();

    // Sequential merge in chunk-index order keeps the result independent of
    // scheduling.
    let mut totals = vec![RunningMoments::new(); schemes.len()];
    for summary in &chunk_summaries {
        for (total, part) in totals.iter_mut().zip(summary) {
            total.merge(part);
        }
    }

    let estimators = schemes
        .iter()
        .zip(&totals)
        .map(|(&scheme, acc)| EstimatorSummary {
            scheme,
            mean: acc.mean(),
            mean_se: acc.mean_standard_error(),
            variance: acc.sample_variance(),
            variance_se: acc.variance_standard_error(),
        })
        .collect();

    Ok(MonteCarloReport {
        replications: config.replications,
        master_seed: config.master_seed,
        outcome_model: config.outcome_model,
        chunk_size: config.chunk_size,
        estimators,
    })
}

fn run_chunk(
    chunk: u64,
    plans: &[StratumPlan],
    hybrid: &HybridPlan,
    schemes: &[WeightingScheme],
    config: &SimConfig,
) -> Vec<RunningMoments> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
    rng.set_stream(chunk);

    let first = chunk * config.chunk_size;
    let count = config.chunk_size.min(config.replications - first);

    let mut accumulators = vec![RunningMoments::new(); schemes.len()];
    let wants_hybrid = schemes.contains(&WeightingScheme::HybridCollapsed);
    let mut group_stats = vec![(0u64, 0u64, 0.0f64, 0.0f64); hybrid.group_count];

    for _ in 0..count {
        let mut tau_true = 0.0;
        let mut tau_est = 0.0;
        if wants_hybrid {
            group_stats.iter_mut().for_each(|g| *g = (0, 0, 0.0, 0.0));
        }
        for plan in plans {
            let free = plan.free.sample(&mut rng);
            let n1 = 1 + free;
            let n0 = plan.spec.n_total - n1;
            let (sum1, sum0) =
                draw_outcomes(&plan.spec, n1, n0, config.outcome_model, &mut rng);

            tau_true += plan.share * weighted_contrast(n1, n0, sum1, sum0, plan.p);
            tau_est += plan.share * mean_difference(n1, n0, sum1, sum0);
            if wants_hybrid {
                let g = &mut group_stats[plan.group];
                g.0 += n1;
                g.1 += n0;
                g.2 += sum1;
                g.3 += sum0;
            }
        }
        for (scheme, acc) in schemes.iter().zip(&mut accumulators) {
            let tau = match scheme {
                WeightingScheme::TruePropensity => tau_true,
                WeightingScheme::EstimatedPropensity => tau_est,
                WeightingScheme::HybridCollapsed => group_stats
                    .iter()
                    .zip(&hybrid.group_shares)
                    .map(|(&(n1, n0, sum1, sum0), &share)| {
                        share * mean_difference(n1, n0, sum1, sum0)
                    })
                    .sum(),
            };
            acc.push(tau);
        }
    }
    accumulators
}

/// Which template parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Set every stratum's propensity to the grid value.
    Propensity,
    /// Add the grid value to both outcome means of every stratum.
    MeanShift,
}

/// One scheme's closed-form and (optional) simulated variance at a grid
/// point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub scheme: WeightingScheme,
    pub exact_variance: f64,
    pub mc_variance: Option<f64>,
    pub mc_variance_se: Option<f64>,
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub cells: Vec<SweepCell>,
}

/// Evaluates closed-form aggregate variances — and, when a config is given,
/// Monte Carlo variances — for each scheme across a parameter grid applied
/// to a template population.
pub fn sweep(
    template: &PopulationSpec,
    parameter: SweepParameter,
    grid: &[f64],
    schemes: &[WeightingScheme],
    mc: Option<&SimConfig>,
) -> Result<Vec<SweepRow>> {
    template.require_valid()?;
    let mut rows = Vec::with_capacity(grid.len());
    for (index, &value) in grid.iter().enumerate() {
        let pop = apply_parameter(template, parameter, value, index)?;
        let report = match mc {
            Some(config) => Some(run_monte_carlo(&pop, schemes, config)?),
            None => None,
        };
        let mut cells = Vec::with_capacity(schemes.len());
        for (i, &scheme) in schemes.iter().enumerate() {
            let summary = report.as_ref().map(|r| &r.estimators[i]);
            cells.push(SweepCell {
                scheme,
                exact_variance: aggregate_variance(&pop, scheme)?,
                mc_variance: summary.map(|s| s.variance),
                mc_variance_se: summary.map(|s| s.variance_se),
            });
        }
        rows.push(SweepRow { value, cells });
    }
    Ok(rows)
}

fn apply_parameter(
    template: &PopulationSpec,
    parameter: SweepParameter,
    value: f64,
    index: usize,
) -> Result<PopulationSpec> {
    let mut pop = template.clone();
    match parameter {
        SweepParameter::Propensity => {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::GridPoint {
                    index,
                    reason: format!("propensity {value} is outside (0, 1)"),
                });
            }
            for spec in &mut pop.strata {
                spec.p = value;
            }
        }
        SweepParameter::MeanShift => {
            if !value.is_finite() {
                return Err(Error::GridPoint {
                    index,
                    reason: format!("mean shift {value} is not finite"),
                });
            }
            for spec in &mut pop.strata {
                spec.mu1 += value;
                spec.mu0 += value;
            }
        }
    }
    Ok(pop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::stratum_variances;
    use crate::strata::StratumSpec;

    fn fig_stratum(p: f64, mu1: f64, mu0: f64) -> StratumSpec {
        StratumSpec::new("x", p, mu1, mu0, 4.0, 16.0, 17)
    }

    #[test]
    fn minimal_cell_always_splits_one_one() {
        let spec = StratumSpec::new("x", 0.3, 0.0, 0.0, 1.0, 1.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            assert_eq!(draw_assignment(&spec, &mut rng), (1, 1));
        }
    }

    #[test]
    fn assignment_moments_match_binomial() {
        // n1 = 1 + Bin(15, 1/2): mean 8.5, variance 15/4.
        let spec = fig_stratum(0.5, 0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut acc = RunningMoments::new();
        for _ in 0..1_000_000 {
            let (n1, n0) = draw_assignment(&spec, &mut rng);
            assert!(n1 >= 1 && n0 >= 1);
            assert_eq!(n1 + n0, 17);
            acc.push(n1 as f64);
        }
        assert!((acc.mean() - 8.5).abs() <= 3.0 * acc.mean_standard_error());
        assert!((acc.sample_variance() - 3.75).abs() <= 3.0 * acc.variance_standard_error());
    }

    #[test]
    fn degenerate_outcomes_are_exact_products() {
        let spec = StratumSpec::new("x", 0.5, 0.1, -2.5, 0.0, 0.0, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (sum1, sum0) = draw_outcomes(&spec, 10, 2, OutcomeModel::Gaussian, &mut rng);
        assert_eq!(sum1, 10.0 * 0.1);
        assert_eq!(sum0, 2.0 * -2.5);
    }

    #[test]
    fn outcome_models_match_requested_moments() {
        for (model, mu, var) in [
            (OutcomeModel::TwoPoint, 0.0, 1.0),
            (OutcomeModel::Gaussian, 3.0, 16.0),
        ] {
            let spec = StratumSpec::new("x", 0.5, mu, 0.0, var, 0.0, 3);
            let mut rng = ChaCha8Rng::seed_from_u64(19);
            let mut acc = RunningMoments::new();
            for _ in 0..1_000_000 {
                let (sum1, _) = draw_outcomes(&spec, 1, 1, model, &mut rng);
                acc.push(sum1);
            }
            assert!(
                (acc.mean() - mu).abs() <= 3.0 * acc.mean_standard_error(),
                "{model:?}: mean {} vs {mu}",
                acc.mean()
            );
            assert!(
                (acc.sample_variance() - var).abs() <= 3.0 * acc.variance_standard_error(),
                "{model:?}: variance {} vs {var}",
                acc.sample_variance()
            );
        }
    }

    #[test]
    fn degenerate_population_is_noiseless() {
        let pop = PopulationSpec::new(vec![StratumSpec::new("x", 0.5, 0.0, 0.0, 0.0, 0.0, 17)]);
        let config = SimConfig::new(500, 1);
        let report = run_monte_carlo(
            &pop,
            &[WeightingScheme::TruePropensity, WeightingScheme::EstimatedPropensity],
            &config,
        )
        .unwrap();
        for summary in &report.estimators {
            assert_eq!(summary.variance, 0.0, "{:?}", summary.scheme);
            assert_eq!(summary.mean, 0.0);
        }
    }

    #[test]
    fn single_replication_reports_zero_variance() {
        let pop = PopulationSpec::new(vec![fig_stratum(0.5, 0.0, 0.0)]);
        let report = run_monte_carlo(
            &pop,
            &[WeightingScheme::EstimatedPropensity],
            &SimConfig::new(1, 9),
        )
        .unwrap();
        assert_eq!(report.estimators[0].variance, 0.0);
        assert_eq!(report.estimators[0].variance_se, 0.0);
    }

    #[test]
    fn report_is_deterministic_and_thread_independent() {
        let pop = PopulationSpec::new(vec![
            fig_stratum(0.3, 1.0, 3.0),
            StratumSpec::new("y", 0.6, -1.0, 0.5, 2.0, 3.0, 9),
        ]);
        let schemes = [
            WeightingScheme::TruePropensity,
            WeightingScheme::EstimatedPropensity,
            WeightingScheme::HybridCollapsed,
        ];
        let config = SimConfig { chunk_size: 64, ..SimConfig::new(10_000, 42) };

        let baseline = run_monte_carlo(&pop, &schemes, &config).unwrap();
        let repeat = run_monte_carlo(&pop, &schemes, &config).unwrap();
        assert_eq!(baseline, repeat);

        for threads in [1usize, 4] {
            let pool =
                rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let pooled = pool.install(|| run_monte_carlo(&pop, &schemes, &config).unwrap());
            assert_eq!(baseline, pooled, "report changed under {threads} thread(s)");
        }
    }

    #[test]
    fn estimated_scheme_mean_is_unbiased() {
        let pop = PopulationSpec::new(vec![
            StratumSpec::new("a", 0.25, 2.0, -1.0, 1.0, 4.0, 11),
            StratumSpec::new("b", 0.7, 0.0, 1.0, 9.0, 1.0, 6),
        ]);
        let truth: f64 = pop
            .strata
            .iter()
            .map(|s| s.n_total as f64 / pop.total_size() as f64 * (s.mu1 - s.mu0))
            .sum();
        let report = run_monte_carlo(
            &pop,
            &[WeightingScheme::EstimatedPropensity],
            &SimConfig::new(200_000, 5),
        )
        .unwrap();
        let summary = &report.estimators[0];
        assert!((summary.mean - truth).abs() <= 3.0 * summary.mean_se);
    }

    #[test]
    fn true_scheme_mean_reproduces_finite_sample_bias() {
        let spec = fig_stratum(0.2, 1.0, 3.0);
        let pop = PopulationSpec::new(vec![spec.clone()]);
        let expected = stratum_variances(&spec).unwrap().mean_true;
        let report = run_monte_carlo(
            &pop,
            &[WeightingScheme::TruePropensity],
            &SimConfig::new(200_000, 6),
        )
        .unwrap();
        let summary = &report.estimators[0];
        assert!(
            (summary.mean - expected).abs() <= 3.0 * summary.mean_se,
            "mean {} vs exact {expected}",
            summary.mean
        );
    }

    #[test]
    fn engine_estimates_match_the_public_estimator_route() {
        // Replay chunk 0's draw sequence by hand, package it as a Dataset,
        // and check the engine's inline estimator math against
        // stratified_estimate on every scheme.
        use crate::estimators::stratified_estimate;
        use crate::strata::{Dataset, StratumSample};

        let pop = PopulationSpec::new(vec![
            StratumSpec::new("a", 0.35, 1.0, 3.0, 4.0, 16.0, 17),
            StratumSpec::new("b", 0.35, -0.5, 0.5, 1.0, 2.0, 11),
            StratumSpec::new("c", 0.8, 2.0, 0.0, 3.0, 1.0, 6),
        ]);
        let schemes = [
            WeightingScheme::TruePropensity,
            WeightingScheme::EstimatedPropensity,
            WeightingScheme::HybridCollapsed,
        ];
        let seed = 31u64;
        let report =
            run_monte_carlo(&pop, &schemes, &SimConfig::new(1, seed)).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        let samples: Vec<StratumSample> = pop
            .strata
            .iter()
            .map(|spec| {
                let (n1, n0) = draw_assignment(spec, &mut rng);
                let (sum1, sum0) =
                    draw_outcomes(spec, n1, n0, OutcomeModel::Gaussian, &mut rng);
                StratumSample::new(spec.label.clone(), n1, n0, sum1, sum0).unwrap()
            })
            .collect();
        let data = Dataset::new(samples);

        for (scheme, summary) in schemes.iter().zip(&report.estimators) {
            let expected = stratified_estimate(&data, *scheme, &pop).unwrap().tau_hat;
            assert!(
                (summary.mean - expected).abs() <= 1e-14 * expected.abs().max(1.0),
                "{scheme:?}: engine {} vs estimator {expected}",
                summary.mean
            );
        }
    }

    #[test]
    fn sweep_single_point_matches_direct_calls() {
        let template = PopulationSpec::new(vec![fig_stratum(0.5, 0.0, 0.0)]);
        let schemes = [WeightingScheme::TruePropensity, WeightingScheme::EstimatedPropensity];
        let rows =
            sweep(&template, SweepParameter::Propensity, &[0.4], &schemes, None).unwrap();
        assert_eq!(rows.len(), 1);
        let direct = stratum_variances(&fig_stratum(0.4, 0.0, 0.0)).unwrap();
        assert_eq!(rows[0].cells[0].exact_variance, direct.v_true);
        assert_eq!(rows[0].cells[1].exact_variance, direct.v_est);
        assert_eq!(rows[0].cells[0].mc_variance, None);
    }

    #[test]
    fn sweep_rejects_invalid_grid_points() {
        let template = PopulationSpec::new(vec![fig_stratum(0.5, 0.0, 0.0)]);
        let err = sweep(
            &template,
            SweepParameter::Propensity,
            &[0.2, 1.0],
            &[WeightingScheme::EstimatedPropensity],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::GridPoint { index: 1, .. }));
    }

    #[test]
    fn mean_shift_sweep_leaves_estimated_variance_alone() {
        let template = PopulationSpec::new(vec![fig_stratum(0.3, 1.0, 3.0)]);
        let schemes = [WeightingScheme::TruePropensity, WeightingScheme::EstimatedPropensity];
        let rows = sweep(
            &template,
            SweepParameter::MeanShift,
            &[0.0, 10.0, 100.0, 1000.0],
            &schemes,
            None,
        )
        .unwrap();
        let v_est: Vec<f64> = rows.iter().map(|r| r.cells[1].exact_variance).collect();
        assert!(v_est.windows(2).all(|w| w[0] == w[1]), "estimated variance moved: {v_est:?}");
        let v_true: Vec<f64> = rows.iter().map(|r| r.cells[0].exact_variance).collect();
        assert!(
            v_true.windows(2).all(|w| w[0] < w[1]),
            "true-weighting variance should grow with the shift: {v_true:?}"
        );
    }
}
