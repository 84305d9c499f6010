//! Exact finite-sample moment engine.
//!
//! Everything here is a closed-form function of the population description:
//! negative binomial moments `E[1/(c + A)]`, the per-stratum means and
//! variances of the true- and estimated-propensity stratum contrasts, the
//! summed variance difference between the two weightings, weighted aggregate
//! variances per scheme, and the nonnegative gap between splitting and
//! pooling two cells that share a propensity.
//!
//! Every closed form has an enumeration or simulation counterpart elsewhere
//! in the crate; the pairings are exercised by the test suites.

use crate::error::{Error, Result};
use crate::numeric::{one_minus_pow_of_complement, pow_of_complement};
use crate::strata::{PopulationSpec, StratumSpec, WeightingScheme, collapse_by_propensity};

/// Enumeration guard for [`neg_moment_bruteforce`].
pub const BRUTEFORCE_MAX_TRIALS: u64 = 1_000_000;

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 { Ok(()) } else { Err(Error::Probability(p)) }
}

/// `E[1 / (1 + A)]` for `A ~ Bin(n, p)`:
///
/// ```text
/// (1 - q^(n+1)) / ((n + 1) p),   q = 1 - p.
/// ```
///
/// This is the expected reciprocal of a forced-pair arm count `1 + A`.
pub fn neg_moment_c1(n: u64, p: f64) -> Result<f64> {
    check_probability(p)?;
    let k = n as f64 + 1.0;
    Ok(one_minus_pow_of_complement(p, n + 1) / (k * p))
}

/// `E[1 / (2 + C)]` for `C ~ Bin(trials, p)`:
///
/// ```text
/// 1/((m+1)p) - (1 - q^(m+2)) / ((m+1)(m+2) p^2),   m = trials.
/// ```
///
/// Evaluated over the common denominator, `((m+2)p - (1 - q^(m+2))) /
/// ((m+1)(m+2)p^2)`, which keeps the cancellation between the two fractions
/// out of the floating-point subtraction.
pub fn neg_moment_c2(trials: u64, p: f64) -> Result<f64> {
    check_probability(p)?;
    let m1 = trials as f64 + 1.0;
    let m2 = trials as f64 + 2.0;
    let numerator = m2 * p - one_minus_pow_of_complement(p, trials + 2);
    Ok(numerator / (m1 * m2 * p * p))
}

/// Enumeration oracle for negative moments: `sum_a C(n,a) p^a q^(n-a) / (c+a)`.
///
/// The probability mass is accumulated by the term ratio recurrence anchored
/// at the distribution mode and normalized at the end, so no term is ever
/// formed from an underflowing tail start.
pub fn neg_moment_bruteforce(c: u64, n: u64, p: f64) -> Result<f64> {
    if c < 1 {
        return Err(Error::domain(format!("offset constant c must be at least 1, got {c}")));
    }
    check_probability(p)?;
    if n > BRUTEFORCE_MAX_TRIALS {
        return Err(Error::EnumerationGuard { n, max: BRUTEFORCE_MAX_TRIALS });
    }

    let nf = n as f64;
    let q = 1.0 - p;
    let ratio = p / q; // pmf(a+1)/pmf(a) * (a+1)/(n-a)
    let mode = ((nf + 1.0) * p).floor().min(nf) as u64;

    // Unnormalized mass, scanning down then up from the mode.
    let mut mass = 1.0f64;
    let mut weighted = 1.0 / (c + mode) as f64;
    let mut term = 1.0f64;
    let mut a = mode;
    while a > 0 {
        // pmf(a-1)/pmf(a) = a / ((n-a+1) ratio)
        term *= a as f64 / ((nf - a as f64 + 1.0) * ratio);
        a -= 1;
        mass += term;
        weighted += term / (c + a) as f64;
        if term < f64::MIN_POSITIVE {
            break;
        }
    }
    term = 1.0;
    a = mode;
    while a < n {
        term *= (nf - a as f64) * ratio / (a as f64 + 1.0);
        a += 1;
        mass += term;
        weighted += term / (c + a) as f64;
        if term < f64::MIN_POSITIVE {
            break;
        }
    }
    Ok(weighted / mass)
}

/// A negative-moment query `E[1/(c + A)]`, `A ~ Bin(n, p)`, restricted to the
/// two offsets with closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegMomentQuery {
    pub c: u64,
    pub n: u64,
    pub p: f64,
}

impl NegMomentQuery {
    pub fn new(c: u64, n: u64, p: f64) -> Result<Self> {
        if c != 1 && c != 2 {
            return Err(Error::domain(format!("closed forms exist for c in {{1, 2}}, got {c}")));
        }
        check_probability(p)?;
        Ok(NegMomentQuery { c, n, p })
    }

    /// Evaluates the closed form for this query.
    pub fn evaluate(&self) -> Result<f64> {
        match self.c {
            1 => neg_moment_c1(self.n, self.p),
            _ => neg_moment_c2(self.n, self.p),
        }
    }

    /// Evaluates the enumeration oracle for this query.
    pub fn brute_force(&self) -> Result<f64> {
        neg_moment_bruteforce(self.c, self.n, self.p)
    }
}

/// Exact mean and variance of both stratum contrasts for one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StratumVariances {
    /// Variance of the true-propensity contrast.
    pub v_true: f64,
    /// Variance of the estimated-propensity contrast.
    pub v_est: f64,
    /// Mean of the true-propensity contrast (biased at finite n).
    pub mean_true: f64,
    /// Mean of the estimated-propensity contrast, exactly `mu1 - mu0`.
    pub mean_est: f64,
}

/// Closed-form moments of the two stratum contrasts under the forced-pair
/// design with `n = n_total - 2` free assignments.
///
/// The true-propensity variance splits into a mean-driven quadratic term,
/// `(mu1/p + mu0/q)^2 npq/(n+2)^2`, plus reciprocal-count terms weighted by
/// the arm variances; the estimated-propensity variance is the pure
/// reciprocal-count form `var1 E[1/N1] + var0 E[1/N0]`.
pub fn stratum_variances(spec: &StratumSpec) -> Result<StratumVariances> {
    check_probability(spec.p)?;
    if spec.n_total < 2 {
        return Err(Error::domain(format!(
            "stratum '{}': n_total = {} is below the forced pair",
            spec.label, spec.n_total
        )));
    }
    let p = spec.p;
    let q = 1.0 - p;
    let n = spec.free_trials() as f64;
    let denom = (n + 2.0) * (n + 2.0);

    let quad = {
        let s = spec.mu1 / p + spec.mu0 / q;
        s * s * n * p * q / denom
    };
    let v_true = quad
        + spec.var1 * (p * n + 1.0) / (denom * p * p)
        + spec.var0 * (q * n + 1.0) / (denom * q * q);
    let v_est = spec.var1 * neg_moment_c1(spec.free_trials(), p)?
        + spec.var0 * neg_moment_c1(spec.free_trials(), q)?;
    let mean_true = spec.mu1 * (p * n + 1.0) / ((n + 2.0) * p)
        - spec.mu0 * (q * n + 1.0) / ((n + 2.0) * q);
    let mean_est = spec.mu1 - spec.mu0;
    Ok(StratumVariances { v_true, v_est, mean_true, mean_est })
}

/// Per-stratum terms of the summed variance difference.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumDifference {
    pub label: String,
    /// Mean-driven term `(mu1/p + mu0/q)^2 npq/(n+2)^2`.
    pub quadratic_term: f64,
    /// Treated-arm term `var1 ((pn+1)/((n+2)^2 p^2) - E[1/N1])`.
    pub treated_term: f64,
    /// Control-arm term `var0 ((qn+1)/((n+2)^2 q^2) - E[1/N0])`.
    pub control_term: f64,
    /// Sum of the three terms, `v_true - v_est` for this stratum.
    pub difference: f64,
}

/// The unweighted sum over strata of `v_true - v_est`, with its three-term
/// decomposition per stratum.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceDifference {
    pub total: f64,
    pub per_stratum: Vec<StratumDifference>,
}

/// Sums `v_true(x) - v_est(x)` over strata as three separate sums: the
/// quadratic mean term plus one reciprocal-count gap per arm.
///
/// Note this is the plain unweighted sum of per-stratum differences; the
/// `(N_x/N)^2`-weighted total estimator variance is [`aggregate_variance`].
pub fn variance_difference(pop: &PopulationSpec) -> Result<VarianceDifference> {
    pop.require_valid()?;
    let mut per_stratum = Vec::with_capacity(pop.strata.len());
    let mut total = 0.0;
    for spec in &pop.strata {
        let p = spec.p;
        let q = 1.0 - p;
        let n = spec.free_trials() as f64;
        let denom = (n + 2.0) * (n + 2.0);

        let s = spec.mu1 / p + spec.mu0 / q;
        let quadratic_term = s * s * n * p * q / denom;
        let treated_term = spec.var1
            * ((p * n + 1.0) / (denom * p * p) - neg_moment_c1(spec.free_trials(), p)?);
        let control_term = spec.var0
            * ((q * n + 1.0) / (denom * q * q) - neg_moment_c1(spec.free_trials(), q)?);
        let difference = quadratic_term + treated_term + control_term;
        total += difference;
        per_stratum.push(StratumDifference {
            label: spec.label.clone(),
            quadratic_term,
            treated_term,
            control_term,
            difference,
        });
    }
    Ok(VarianceDifference { total, per_stratum })
}

/// Variance of the full estimator `sum_x (N_x/N) contrast_x` under a scheme.
///
/// Cell sizes are fixed design constants and strata are sampled
/// independently, so the total is `sum_x (N_x/N)^2 v_scheme(x)`. For the
/// hybrid scheme the population is collapsed first; a merged cell built from
/// k strata carries k forced treated units, so its reciprocal-count moments
/// are `E[1/(k + A)]` with `A` binomial over the pooled free trials.
pub fn aggregate_variance(pop: &PopulationSpec, scheme: WeightingScheme) -> Result<f64> {
    pop.require_valid()?;
    let total_size = pop.total_size() as f64;
    match scheme {
        WeightingScheme::TruePropensity | WeightingScheme::EstimatedPropensity => {
            let mut total = 0.0;
            for spec in &pop.strata {
                let share = spec.n_total as f64 / total_size;
                let v = stratum_variances(spec)?;
                let v_scheme = match scheme {
                    WeightingScheme::TruePropensity => v.v_true,
                    _ => v.v_est,
                };
                total += share * share * v_scheme;
            }
            Ok(total)
        }
        WeightingScheme::HybridCollapsed => {
            let (collapsed, grouping) = collapse_by_propensity(pop)?;
            let mut total = 0.0;
            for (spec, group) in collapsed.strata.iter().zip(&grouping.groups) {
                let share = spec.n_total as f64 / total_size;
                let pairs = group.members.len() as u64;
                let free = spec.n_total - 2 * pairs;
                let p = spec.p;
                let q = 1.0 - p;
                let v = spec.var1 * neg_moment_pairs(pairs, free, p)?
                    + spec.var0 * neg_moment_pairs(pairs, free, q)?;
                total += share * share * v;
            }
            Ok(total)
        }
    }
}

/// `E[1/(pairs + A)]`, `A ~ Bin(trials, p)`: closed forms for one and two
/// forced pairs, enumeration beyond that.
fn neg_moment_pairs(pairs: u64, trials: u64, p: f64) -> Result<f64> {
    match pairs {
        1 => neg_moment_c1(trials, p),
        2 => neg_moment_c2(trials, p),
        c => neg_moment_bruteforce(c, trials, p),
    }
}

/// Variance advantage of pooling two equal-size cells that share propensity
/// `p` over keeping them split, per unit of arm variance:
///
/// ```text
/// E[1/(2(1+A))] - E[1/(2+A+B)],   A, B ~ Bin(n, p) independent,
/// ```
///
/// evaluated from the closed forms as `E[1/(1+A)]/2 - E[1/(2+A+B)]` with
/// `A + B ~ Bin(2n, p)`. The gap vanishes toward both ends of (0, 1), so the
/// two expectations must enter the final subtraction at full precision; the
/// textbook split of `E[1/(2+A+B)]` into `1/((2n+1)p)` minus a second
/// fraction loses several digits of the gap near the ends and is avoided
/// here. Nonnegative for all `p` in (0, 1); the audit grids assert it never
/// drops below -1e-15.
pub fn collapsed_pair_gap(n: u64, p: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("collapsed_pair_gap requires n >= 1".to_owned()));
    }
    Ok(neg_moment_c1(n, p)? / 2.0 - neg_moment_c2(2 * n, p)?)
}

/// The three successive polynomial reductions certifying that
/// [`collapsed_pair_gap`] is nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPolynomials {
    /// Scaled gap numerator `(1-q^(n+1))(q^n+1) - (2n+2)(1-q)q^n`;
    /// 0 at p = 0 and 1 at p = 1.
    pub g1: f64,
    /// Sign factor of `dg1/dp`, `-(n(q-1) - q(q^n-1))`; 0 at p = 0 and n at
    /// p = 1.
    pub g2: f64,
    /// `dg2/dp = (n+1)(1-(1-p)^n)`, nonnegative on all of [0, 1].
    pub g3: f64,
}

/// Evaluates the reduction chain behind the pooling inequality at any
/// `p` in [0, 1] (boundaries included).
pub fn gap_polynomials(n: u64, p: f64) -> GapPolynomials {
    debug_assert!(n >= 1, "gap polynomial chain is stated for n >= 1");
    debug_assert!((0.0..=1.0).contains(&p));
    let nf = n as f64;
    let q = 1.0 - p;
    let q_n = pow_of_complement(p, n);
    let g1 = one_minus_pow_of_complement(p, n + 1) * (q_n + 1.0) - (2.0 * nf + 2.0) * p * q_n;
    let g2 = nf * p - q * one_minus_pow_of_complement(p, n);
    let g3 = (nf + 1.0) * one_minus_pow_of_complement(p, n);
    GapPolynomials { g1, g2, g3 }
}
