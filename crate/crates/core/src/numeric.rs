//! Stable powering helpers shared by the closed-form moment routines.
//!
//! The moment formulas repeatedly need `q^k` and `1 - q^k` for `q = 1 - p`.
//! Forming `q` first and powering it loses precision in exactly the regime
//! the grid tests probe (p near 0, k in the hundreds), so both quantities are
//! evaluated through `ln_1p`/`exp_m1` without ever materializing `q`.

/// `(1 - p)^k`, evaluated as `exp(k * ln(1 - p))` with `ln_1p`.
pub(crate) fn pow_of_complement(p: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    (k as f64 * (-p).ln_1p()).exp()
}

/// `1 - (1 - p)^k`, stable when `(1 - p)^k` is close to one.
pub(crate) fn one_minus_pow_of_complement(p: f64, k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    -(k as f64 * (-p).ln_1p()).exp_m1()
}
