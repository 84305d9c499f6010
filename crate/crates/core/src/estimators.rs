//! Point estimators on realized datasets.
//!
//! The unit-level form `(1/N) sum_i [y_i z_i / w(x_i) - y_i (1-z_i) / (1 -
//! w(x_i))]` and the stratified form `sum_x (N_x/N) contrast_x` are two
//! algebraic routes to the same number whenever the weighting function is
//! constant within strata; their agreement is a standing invariant of the
//! test suites.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::strata::{
    Dataset, PopulationSpec, StratumSample, WeightingScheme, collapse_by_propensity,
    collapse_dataset,
};

/// One unit-level observation: stratum membership, treatment arm, outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitRecord {
    pub label: String,
    pub treated: bool,
    pub outcome: f64,
}

impl UnitRecord {
    pub fn new(label: impl Into<String>, treated: bool, outcome: f64) -> Self {
        UnitRecord { label: label.into(), treated, outcome }
    }
}

/// A point estimate together with its per-stratum decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub tau_hat: f64,
    pub per_stratum: Vec<StratumContrast>,
}

/// One stratum's share weight `N_x/N` and weighted contrast.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumContrast {
    pub label: String,
    pub weight: f64,
    pub contrast: f64,
}

/// The stratum contrast for weighting value `w`:
/// `(p_hat/w) mean1 - ((1-p_hat)/(1-w)) mean0`.
pub(crate) fn weighted_contrast(n1: u64, n0: u64, sum1: f64, sum0: f64, w: f64) -> f64 {
    let size = (n1 + n0) as f64;
    let p_hat = n1 as f64 / size;
    p_hat / w * (sum1 / n1 as f64) - (1.0 - p_hat) / (1.0 - w) * (sum0 / n0 as f64)
}

/// Plain difference of arm means; the estimated-propensity contrast, where
/// the weights cancel to one.
pub(crate) fn mean_difference(n1: u64, n0: u64, sum1: f64, sum0: f64) -> f64 {
    sum1 / n1 as f64 - sum0 / n0 as f64
}

/// Unit-level inverse-propensity estimate for an arbitrary per-stratum
/// weighting map.
pub fn ipw_unitwise(units: &[UnitRecord], weights: &BTreeMap<String, f64>) -> Result<f64> {
    if units.is_empty() {
        return Err(Error::domain("at least one unit is required"));
    }
    for (label, &w) in weights {
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::domain(format!("weight for stratum '{label}' is {w}, not in (0, 1)")));
        }
    }
    let mut total = 0.0;
    for unit in units {
        let w = *weights
            .get(&unit.label)
            .ok_or_else(|| Error::UnknownLabel(unit.label.clone()))?;
        total += if unit.treated {
            unit.outcome / w
        } else {
            -unit.outcome / (1.0 - w)
        };
    }
    Ok(total / units.len() as f64)
}

/// Stratified estimate `sum_x (N_x/N) contrast_x` under a weighting scheme.
///
/// The estimated-propensity contrast is computed as the bare difference of
/// arm means, so it never reads the population's propensities. The hybrid
/// scheme collapses equal-propensity strata first and then applies the
/// estimated weighting to the merged cells.
pub fn stratified_estimate(
    data: &Dataset,
    scheme: WeightingScheme,
    pop: &PopulationSpec,
) -> Result<EstimateResult> {
    pop.require_valid()?;
    data.align(pop)?;

    if scheme == WeightingScheme::HybridCollapsed {
        let (collapsed_pop, grouping) = collapse_by_propensity(pop)?;
        let collapsed_data = collapse_dataset(data, &grouping)?;
        return stratified_estimate(&collapsed_data, WeightingScheme::EstimatedPropensity, &collapsed_pop);
    }

    let total_size = pop.total_size() as f64;
    let mut per_stratum = Vec::with_capacity(pop.strata.len());
    let mut tau_hat = 0.0;
    for spec in &pop.strata {
        let sample = data
            .sample(&spec.label)
            .ok_or_else(|| Error::UnknownLabel(spec.label.clone()))?;
        let contrast = match scheme {
            WeightingScheme::TruePropensity => {
                weighted_contrast(sample.n1, sample.n0, sample.sum1, sample.sum0, spec.p)
            }
            _ => mean_difference(sample.n1, sample.n0, sample.sum1, sample.sum0),
        };
        let weight = sample.size() as f64 / total_size;
        tau_hat += weight * contrast;
        per_stratum.push(StratumContrast { label: spec.label.clone(), weight, contrast });
    }
    Ok(EstimateResult { tau_hat, per_stratum })
}

/// Gap between the two routes through a shared-propensity pair of strata:
/// the size-weighted sum of the two true-propensity contrasts versus the
/// pooled contrast of the summed sufficient statistics.
///
/// When both strata truly share propensity `p` the gap is zero up to
/// rounding; callers probing mismatched propensities get the honest nonzero
/// gap back.
pub fn collapse_identity_check(data: &Dataset, p: f64) -> Result<f64> {
    if data.samples.len() != 2 {
        return Err(Error::StrataCount { expected: 2, found: data.samples.len() });
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Probability(p));
    }
    let total_size = data.total_size() as f64;
    let weighted: f64 = data
        .samples
        .iter()
        .map(|s| s.size() as f64 / total_size * weighted_contrast(s.n1, s.n0, s.sum1, s.sum0, p))
        .sum();
    let pooled = weighted_contrast(
        data.samples[0].n1 + data.samples[1].n1,
        data.samples[0].n0 + data.samples[1].n0,
        data.samples[0].sum1 + data.samples[1].sum1,
        data.samples[0].sum0 + data.samples[1].sum0,
        p,
    );
    Ok((weighted - pooled).abs())
}

/// Builds the per-stratum sufficient statistics for a list of unit records,
/// preserving first-appearance stratum order.
pub fn aggregate_units(units: &[UnitRecord]) -> Result<Dataset> {
    let mut order: Vec<&str> = Vec::new();
    let mut grouped: BTreeMap<&str, Vec<(bool, f64)>> = BTreeMap::new();
    for unit in units {
        let entry = grouped.entry(unit.label.as_str()).or_default();
        if entry.is_empty() {
            order.push(&unit.label);
        }
        entry.push((unit.treated, unit.outcome));
    }
    let samples = order
        .into_iter()
        .map(|label| StratumSample::from_units(label, &grouped[label]))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(samples))
}
