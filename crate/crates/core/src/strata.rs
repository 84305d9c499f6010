//! Data model for the discrete-covariate population and realized samples:
//! validation, propensity-equality collapsing, and sufficient-statistic
//! aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One covariate cell of the data-generating process.
///
/// `p` is the cell's true treatment propensity, `mu*`/`var*` the potential
/// outcome means and variances per arm, and `n_total` the fixed cell size.
/// Every cell is sampled with one forced treated unit and one forced control
/// unit; the remaining `n_total - 2` assignments are independent Bernoulli(p).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratumSpec {
    pub label: String,
    pub p: f64,
    pub mu1: f64,
    pub mu0: f64,
    pub var1: f64,
    pub var0: f64,
    pub n_total: u64,
}

impl StratumSpec {
    pub fn new(
        label: impl Into<String>,
        p: f64,
        mu1: f64,
        mu0: f64,
        var1: f64,
        var0: f64,
        n_total: u64,
    ) -> Self {
        StratumSpec { label: label.into(), p, mu1, mu0, var1, var0, n_total }
    }

    /// Number of freely assigned units, `n_x = N_x - 2`.
    pub fn free_trials(&self) -> u64 {
        self.n_total.saturating_sub(2)
    }

    fn collect_violations(&self, out: &mut Vec<Violation>) {
        if !(self.p > 0.0 && self.p < 1.0) {
            out.push(Violation::new(
                Some(&self.label),
                ViolationKind::Positivity,
                format!("p = {} must lie strictly inside (0, 1)", self.p),
            ));
        }
        for (name, var) in [("var1", self.var1), ("var0", self.var0)] {
            // NaN fails this check as well.
            if var < 0.0 || var.is_nan() {
                out.push(Violation::new(
                    Some(&self.label),
                    ViolationKind::NegativeVariance,
                    format!("{name} = {var} must be nonnegative"),
                ));
            }
        }
        if self.n_total < 2 {
            out.push(Violation::new(
                Some(&self.label),
                ViolationKind::CellSize,
                format!("n_total = {} leaves no room for a treated-control pair", self.n_total),
            ));
        }
        for (name, value) in [("mu1", self.mu1), ("mu0", self.mu0)] {
            if !value.is_finite() {
                out.push(Violation::new(
                    Some(&self.label),
                    ViolationKind::NonFinite,
                    format!("{name} = {value} is not finite"),
                ));
            }
        }
    }
}

/// The full discrete data-generating process: an ordered list of strata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    pub strata: Vec<StratumSpec>,
}

impl PopulationSpec {
    pub fn new(strata: Vec<StratumSpec>) -> Self {
        PopulationSpec { strata }
    }

    /// Total population size `N = sum of n_total`.
    pub fn total_size(&self) -> u64 {
        self.strata.iter().map(|s| s.n_total).sum()
    }

    pub fn stratum(&self, label: &str) -> Option<&StratumSpec> {
        self.strata.iter().find(|s| s.label == label)
    }

    pub fn validate(&self) -> ValidationResult {
        validate(self)
    }

    /// Errors unless every invariant holds; used as the precondition check by
    /// operations that require a valid population.
    pub fn require_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidPopulation(report.to_string()))
        }
    }
}

/// Which propensity enters the weighting function of the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingScheme {
    /// Weight by the known data-generating propensity p(x).
    TruePropensity,
    /// Weight by the realized within-stratum treated fraction; the stratum
    /// contrast reduces to a plain difference of arm means.
    EstimatedPropensity,
    /// Merge strata sharing the same true propensity, then weight by the
    /// treated fraction of each merged cell.
    HybridCollapsed,
}

impl fmt::Display for WeightingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            WeightingScheme::TruePropensity => "true_propensity",
            WeightingScheme::EstimatedPropensity => "estimated_propensity",
            WeightingScheme::HybridCollapsed => "hybrid_collapsed",
        };
        f.write_str(name)
    }
}

/// Realized counts and outcome sufficient statistics for one stratum.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumSample {
    pub label: String,
    /// Treated count; at least 1 under the forced-pair design.
    pub n1: u64,
    /// Control count; at least 1 under the forced-pair design.
    pub n0: u64,
    /// Sum of treated outcomes.
    pub sum1: f64,
    /// Sum of control outcomes.
    pub sum0: f64,
    /// Per-unit (treated, outcome) records, kept only when exact
    /// re-aggregation is under test.
    pub unit_outcomes: Option<Vec<(bool, f64)>>,
}

impl StratumSample {
    pub fn new(label: impl Into<String>, n1: u64, n0: u64, sum1: f64, sum0: f64) -> Result<Self> {
        let label = label.into();
        if n1 == 0 {
            return Err(Error::EmptyArm { label, arm: "treated" });
        }
        if n0 == 0 {
            return Err(Error::EmptyArm { label, arm: "control" });
        }
        Ok(StratumSample { label, n1, n0, sum1, sum0, unit_outcomes: None })
    }

    /// Aggregates per-unit records into sufficient statistics, retaining the
    /// records for re-aggregation checks.
    pub fn from_units(label: impl Into<String>, units: &[(bool, f64)]) -> Result<Self> {
        let label = label.into();
        let (mut n1, mut n0) = (0u64, 0u64);
        let (mut sum1, mut sum0) = (0.0f64, 0.0f64);
        for &(treated, y) in units {
            if treated {
                n1 += 1;
                sum1 += y;
            } else {
                n0 += 1;
                sum0 += y;
            }
        }
        let mut sample = StratumSample::new(label, n1, n0, sum1, sum0)?;
        sample.unit_outcomes = Some(units.to_vec());
        Ok(sample)
    }

    pub fn size(&self) -> u64 {
        self.n1 + self.n0
    }

    /// Estimated propensity, the realized treated fraction.
    pub fn p_hat(&self) -> f64 {
        self.n1 as f64 / self.size() as f64
    }

    pub fn mean1(&self) -> f64 {
        self.sum1 / self.n1 as f64
    }

    pub fn mean0(&self) -> f64 {
        self.sum0 / self.n0 as f64
    }
}

/// A realized sample for every stratum of a population.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<StratumSample>,
}

impl Dataset {
    pub fn new(samples: Vec<StratumSample>) -> Self {
        Dataset { samples }
    }

    pub fn sample(&self, label: &str) -> Option<&StratumSample> {
        self.samples.iter().find(|s| s.label == label)
    }

    pub fn total_size(&self) -> u64 {
        self.samples.iter().map(|s| s.size()).sum()
    }

    /// Checks one sample per stratum label with matching cell sizes.
    pub fn align(&self, pop: &PopulationSpec) -> Result<()> {
        if self.samples.len() != pop.strata.len() {
            return Err(Error::Alignment(format!(
                "{} samples for {} strata",
                self.samples.len(),
                pop.strata.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for sample in &self.samples {
            if !seen.insert(sample.label.as_str()) {
                return Err(Error::Alignment(format!("duplicate sample label '{}'", sample.label)));
            }
            let spec = pop
                .stratum(&sample.label)
                .ok_or_else(|| Error::UnknownLabel(sample.label.clone()))?;
            if sample.size() != spec.n_total {
                return Err(Error::Alignment(format!(
                    "stratum '{}': sample size {} does not match n_total {}",
                    sample.label,
                    sample.size(),
                    spec.n_total
                )));
            }
        }
        Ok(())
    }
}

/// A single violated invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub label: Option<String>,
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    fn new(label: Option<&str>, kind: ViolationKind, detail: String) -> Self {
        Violation { label: label.map(str::to_owned), kind, detail }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Positivity,
    NegativeVariance,
    CellSize,
    DuplicateLabel,
    EmptyPopulation,
    NonFinite,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ViolationKind::Positivity => "positivity",
            ViolationKind::NegativeVariance => "negative variance",
            ViolationKind::CellSize => "cell size",
            ViolationKind::DuplicateLabel => "duplicate label",
            ViolationKind::EmptyPopulation => "empty population",
            ViolationKind::NonFinite => "non-finite value",
        };
        f.write_str(name)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(label) => write!(f, "stratum '{}': {}: {}", label, self.kind, self.detail),
            None => write!(f, "population: {}: {}", self.kind, self.detail),
        }
    }
}

/// Outcome of validating a population; violations are data, not faults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every stratum- and population-level invariant, returning the full
/// list of violations (empty iff the population is valid).
pub fn validate(pop: &PopulationSpec) -> ValidationResult {
    let mut violations = Vec::new();
    if pop.strata.is_empty() {
        violations.push(Violation::new(
            None,
            ViolationKind::EmptyPopulation,
            "at least one stratum is required".to_owned(),
        ));
    }
    let mut seen = BTreeSet::new();
    for spec in &pop.strata {
        if !seen.insert(spec.label.as_str()) {
            violations.push(Violation::new(
                Some(&spec.label),
                ViolationKind::DuplicateLabel,
                "label appears more than once".to_owned(),
            ));
        }
        spec.collect_violations(&mut violations);
    }
    ValidationResult { violations }
}

/// Records how original strata map onto merged cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupingMap {
    pub groups: Vec<CollapseGroup>,
}

/// One merged cell and the original strata it absorbs, in population order.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseGroup {
    pub label: String,
    pub members: Vec<String>,
}

impl GroupingMap {
    /// Merged label for an original stratum label.
    pub fn target_of(&self, original: &str) -> Option<&str> {
        self.groups
            .iter()
            .find(|g| g.members.iter().any(|m| m == original))
            .map(|g| g.label.as_str())
    }

    /// True when no strata were merged.
    pub fn is_identity(&self) -> bool {
        self.groups.iter().all(|g| g.members.len() == 1)
    }
}

/// Merges strata whose true propensities are exactly equal (bit-identical as
/// supplied). Merged cells keep the shared `p`, add the cell sizes, and pool
/// outcome moments as the mixture over member cells, so a merged spec
/// describes the mixture distribution of its members.
pub fn collapse_by_propensity(pop: &PopulationSpec) -> Result<(PopulationSpec, GroupingMap)> {
    if pop.strata.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    pop.require_valid()?;

    // Group by exact bit pattern, preserving first-occurrence order.
    let mut order: Vec<u64> = Vec::new();
    let mut by_bits: BTreeMap<u64, Vec<&StratumSpec>> = BTreeMap::new();
    for spec in &pop.strata {
        let bits = spec.p.to_bits();
        let entry = by_bits.entry(bits).or_default();
        if entry.is_empty() {
            order.push(bits);
        }
        entry.push(spec);
    }

    let mut merged = Vec::with_capacity(order.len());
    let mut groups = Vec::with_capacity(order.len());
    for bits in order {
        let members = &by_bits[&bits];
        if members.len() == 1 {
            merged.push(members[0].clone());
            groups.push(CollapseGroup {
                label: members[0].label.clone(),
                members: vec![members[0].label.clone()],
            });
            continue;
        }
        let n_total: u64 = members.iter().map(|m| m.n_total).sum();
        let size = n_total as f64;
        let mix = |mean: fn(&StratumSpec) -> f64, var: fn(&StratumSpec) -> f64| {
            let m: f64 = members.iter().map(|s| s.n_total as f64 / size * mean(s)).sum();
            // Mixture second moment minus squared mixture mean; the clamp
            // absorbs rounding at exactly-zero spread.
            let second: f64 = members
                .iter()
                .map(|s| s.n_total as f64 / size * (var(s) + mean(s) * mean(s)))
                .sum();
            (m, (second - m * m).max(0.0))
        };
        let (mu1, var1) = mix(|s| s.mu1, |s| s.var1);
        let (mu0, var0) = mix(|s| s.mu0, |s| s.var0);
        let label = members.iter().map(|m| m.label.as_str()).collect::<Vec<_>>().join("+");
        merged.push(StratumSpec {
            label: label.clone(),
            p: members[0].p,
            mu1,
            mu0,
            var1,
            var0,
            n_total,
        });
        groups.push(CollapseGroup {
            label,
            members: members.iter().map(|m| m.label.clone()).collect(),
        });
    }

    Ok((PopulationSpec::new(merged), GroupingMap { groups }))
}

/// Adds counts and outcome sums within each collapse group. Per-unit records
/// are concatenated when every member carries them.
pub fn collapse_dataset(data: &Dataset, grouping: &GroupingMap) -> Result<Dataset> {
    let mut by_label: BTreeMap<&str, &StratumSample> = BTreeMap::new();
    for sample in &data.samples {
        if by_label.insert(sample.label.as_str(), sample).is_some() {
            return Err(Error::Alignment(format!("duplicate sample label '{}'", sample.label)));
        }
        if grouping.target_of(&sample.label).is_none() {
            return Err(Error::UnknownLabel(sample.label.clone()));
        }
    }

    let mut samples = Vec::with_capacity(grouping.groups.len());
    for group in &grouping.groups {
        let (mut n1, mut n0) = (0u64, 0u64);
        let (mut sum1, mut sum0) = (0.0f64, 0.0f64);
        let mut units: Option<Vec<(bool, f64)>> = Some(Vec::new());
        for member in &group.members {
            let sample = by_label.remove(member.as_str()).ok_or_else(|| {
                Error::Alignment(format!("no sample for stratum '{member}'"))
            })?;
            n1 += sample.n1;
            n0 += sample.n0;
            sum1 += sample.sum1;
            sum0 += sample.sum0;
            match (&mut units, &sample.unit_outcomes) {
                (Some(acc), Some(u)) => acc.extend_from_slice(u),
                _ => units = None,
            }
        }
        let mut merged = StratumSample::new(group.label.clone(), n1, n0, sum1, sum0)?;
        merged.unit_outcomes = units;
        samples.push(merged);
    }
    Ok(Dataset::new(samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(label: &str, p: f64, mu1: f64, mu0: f64, var1: f64, var0: f64, n: u64) -> StratumSpec {
        StratumSpec::new(label, p, mu1, mu0, var1, var0, n)
    }

    #[test]
    fn validates_reference_cell() {
        let pop = PopulationSpec::new(vec![spec("x", 0.5, 0.0, 0.0, 4.0, 16.0, 17)]);
        assert!(pop.validate().is_valid());
    }

    #[test]
    fn flags_positivity_at_zero() {
        let pop = PopulationSpec::new(vec![spec("x", 0.0, 0.0, 0.0, 1.0, 1.0, 10)]);
        let report = pop.validate();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::Positivity);
    }

    #[test]
    fn flags_cell_size_below_forced_pair() {
        let pop = PopulationSpec::new(vec![spec("x", 0.5, 0.0, 0.0, 1.0, 1.0, 1)]);
        let report = pop.validate();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::CellSize);
    }

    #[test]
    fn flags_duplicates_and_empty() {
        let empty = PopulationSpec::new(vec![]);
        assert_eq!(empty.validate().violations[0].kind, ViolationKind::EmptyPopulation);

        let dup = PopulationSpec::new(vec![
            spec("x", 0.5, 0.0, 0.0, 1.0, 1.0, 10),
            spec("x", 0.4, 0.0, 0.0, 1.0, 1.0, 10),
        ]);
        assert!(dup.validate().violations.iter().any(|v| v.kind == ViolationKind::DuplicateLabel));
    }

    #[test]
    fn flags_negative_variance_and_nan_propensity() {
        let pop = PopulationSpec::new(vec![spec("x", f64::NAN, 0.0, 0.0, -1.0, 1.0, 10)]);
        let kinds: Vec<_> = pop.validate().violations.iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::Positivity));
        assert!(kinds.contains(&ViolationKind::NegativeVariance));
    }

    #[test]
    fn identical_cells_merge_to_themselves() {
        let pop = PopulationSpec::new(vec![
            spec("a", 0.4, 1.0, 2.0, 3.0, 4.0, 10),
            spec("b", 0.4, 1.0, 2.0, 3.0, 4.0, 10),
        ]);
        let (collapsed, map) = collapse_by_propensity(&pop).unwrap();
        assert_eq!(collapsed.strata.len(), 1);
        let merged = &collapsed.strata[0];
        assert_eq!(merged.label, "a+b");
        assert_eq!(merged.n_total, 20);
        assert_eq!(merged.p, 0.4);
        assert_eq!(merged.mu1, 1.0);
        assert_eq!(merged.mu0, 2.0);
        assert!((merged.var1 - 3.0).abs() < 1e-12);
        assert!((merged.var0 - 4.0).abs() < 1e-12);
        assert_eq!(map.target_of("a"), Some("a+b"));
        assert_eq!(map.target_of("b"), Some("a+b"));
        assert!(!map.is_identity());
    }

    #[test]
    fn distinct_propensities_collapse_to_identity() {
        let pop = PopulationSpec::new(vec![
            spec("a", 0.3, 1.0, 2.0, 3.0, 4.0, 10),
            spec("b", 0.7, 5.0, 6.0, 7.0, 8.0, 12),
        ]);
        let (collapsed, map) = collapse_by_propensity(&pop).unwrap();
        assert_eq!(collapsed, pop);
        assert!(map.is_identity());
        assert_eq!(map.target_of("a"), Some("a"));
    }

    #[test]
    fn merged_moments_are_mixture_moments() {
        // Oracle: E[Y] and E[Y^2] over two equal-weight cells with means 0 and
        // 2 and common variance 1.5 give mean 1 and variance 1.5 + 1.
        let pop = PopulationSpec::new(vec![
            spec("a", 0.4, 0.0, 0.0, 1.5, 2.0, 10),
            spec("b", 0.4, 2.0, 0.0, 1.5, 2.0, 10),
        ]);
        let (collapsed, _) = collapse_by_propensity(&pop).unwrap();
        let merged = &collapsed.strata[0];
        assert!((merged.mu1 - 1.0).abs() < 1e-15);
        assert!((merged.var1 - 2.5).abs() < 1e-12);
        // Control arm is homogeneous, so pooling changes nothing.
        assert!((merged.mu0 - 0.0).abs() < 1e-15);
        assert!((merged.var0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn collapse_rejects_empty_population() {
        assert_eq!(
            collapse_by_propensity(&PopulationSpec::new(vec![])),
            Err(Error::EmptyPopulation)
        );
    }

    #[test]
    fn collapse_is_idempotent() {
        let pop = PopulationSpec::new(vec![
            spec("a", 0.4, 0.0, 1.0, 1.0, 2.0, 10),
            spec("b", 0.4, 2.0, 1.0, 1.0, 2.0, 14),
            spec("c", 0.6, 2.0, 1.0, 1.0, 2.0, 8),
        ]);
        let (once, _) = collapse_by_propensity(&pop).unwrap();
        let (twice, map) = collapse_by_propensity(&once).unwrap();
        assert_eq!(once, twice);
        assert!(map.is_identity());
    }

    #[test]
    fn dataset_sums_within_groups() {
        let pop = PopulationSpec::new(vec![
            spec("a", 0.4, 0.0, 0.0, 1.0, 1.0, 5),
            spec("b", 0.4, 0.0, 0.0, 1.0, 1.0, 5),
        ]);
        let (_, map) = collapse_by_propensity(&pop).unwrap();
        let data = Dataset::new(vec![
            StratumSample::new("a", 3, 2, 6.0, 4.0).unwrap(),
            StratumSample::new("b", 1, 4, 1.0, 8.0).unwrap(),
        ]);
        let collapsed = collapse_dataset(&data, &map).unwrap();
        assert_eq!(collapsed.samples.len(), 1);
        let merged = &collapsed.samples[0];
        assert_eq!((merged.n1, merged.n0), (4, 6));
        assert_eq!((merged.sum1, merged.sum0), (7.0, 12.0));
        // Estimated propensity of the merged group is the pooled fraction.
        assert_eq!(merged.p_hat(), 0.4);
    }

    #[test]
    fn identity_grouping_preserves_dataset() {
        let map = GroupingMap {
            groups: vec![
                CollapseGroup { label: "a".into(), members: vec!["a".into()] },
                CollapseGroup { label: "b".into(), members: vec!["b".into()] },
            ],
        };
        let data = Dataset::new(vec![
            StratumSample::new("a", 3, 2, 6.0, 4.0).unwrap(),
            StratumSample::new("b", 1, 4, 1.0, 8.0).unwrap(),
        ]);
        assert_eq!(collapse_dataset(&data, &map).unwrap(), data);
    }

    #[test]
    fn collapse_dataset_rejects_unknown_labels() {
        let map = GroupingMap {
            groups: vec![CollapseGroup { label: "a".into(), members: vec!["a".into()] }],
        };
        let data = Dataset::new(vec![StratumSample::new("z", 1, 1, 0.0, 0.0).unwrap()]);
        assert!(matches!(collapse_dataset(&data, &map), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn sample_requires_both_arms() {
        assert!(matches!(
            StratumSample::new("x", 0, 3, 0.0, 1.0),
            Err(Error::EmptyArm { arm: "treated", .. })
        ));
        assert!(matches!(
            StratumSample::new("x", 3, 0, 1.0, 0.0),
            Err(Error::EmptyArm { arm: "control", .. })
        ));
    }

    #[test]
    fn from_units_aggregates_exactly() {
        let units = vec![(true, 1.5), (false, 2.0), (true, -0.5), (false, 0.25)];
        let sample = StratumSample::from_units("x", &units).unwrap();
        assert_eq!((sample.n1, sample.n0), (2, 2));
        assert_eq!(sample.sum1, 1.0);
        assert_eq!(sample.sum0, 2.25);
        assert_eq!(sample.unit_outcomes.as_deref(), Some(&units[..]));
    }

    #[test]
    fn population_json_schema_is_stable() {
        let pop = PopulationSpec::new(vec![spec("x", 0.5, 0.0, 0.0, 4.0, 16.0, 17)]);
        let json = serde_json::to_string(&pop).unwrap();
        assert_eq!(
            json,
            r#"{"strata":[{"label":"x","p":0.5,"mu1":0.0,"mu0":0.0,"var1":4.0,"var0":16.0,"n_total":17}]}"#
        );
        let back: PopulationSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, pop);
        // Unknown fields are rejected rather than silently dropped.
        assert!(serde_json::from_str::<PopulationSpec>(
            r#"{"strata":[{"label":"x","p":0.5,"mu1":0,"mu0":0,"var1":4,"var0":16,"n_total":17,"typo":1}]}"#
        )
        .is_err());
    }
}
