//! Binomial coefficients and log-space helpers.
//!
//! Counts that feed exact identities are computed with checked `u128`
//! arithmetic. Probabilities are carried as natural logarithms; `(1-p)^M`
//! with `M` in the millions is never formed by repeated multiplication.

use crate::error::{Error, Result};

/// Exact `C(n, k)`, zero when `k > n`, `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        // acc * (n - j) is divisible by (j + 1) after the multiplication.
        acc = acc.checked_mul((n - j) as u128)? / (j as u128 + 1);
    }
    Some(acc)
}

/// `C(top, k)` where `top` may be negative; negative or short tops give zero.
pub fn binomial_signed(top: i64, k: u64) -> Option<u128> {
    if top < 0 {
        Some(0)
    } else {
        binomial(top as u64, k)
    }
}

pub(crate) fn binomial_checked(n: u64, k: u64) -> Result<u128> {
    binomial(n, k).ok_or_else(|| Error::Size(format!("C({n},{k}) overflows u128")))
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k <= 256 {
        // Short product: keeps full double precision for the small k used here.
        let mut acc = 0.0;
        for j in 0..k {
            acc += ((n - j) as f64 / (j + 1) as f64).ln();
        }
        acc
    } else {
        use statrs::function::gamma::ln_gamma;
        ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
    }
}

/// `count * ln_value`, treating `0 * ±inf` as zero (an empty product).
#[inline]
pub fn scaled(count: f64, ln_value: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else {
        count * ln_value
    }
}

/// `ln (1 - p)^e`.
#[inline]
pub fn ln_pow_one_minus(p: f64, e: f64) -> f64 {
    scaled(e, (-p).ln_1p())
}

/// `ln(1 - e^x)` for `x <= 0`, accurate at both ends.
pub fn ln_one_minus_exp(x: f64) -> f64 {
    debug_assert!(x <= 0.0 || x.is_nan());
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln(e^a + e^b)`.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}` over a slice.
pub fn ln_sum_exp(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if hi == f64::INFINITY {
        return f64::INFINITY;
    }
    hi + xs.iter().map(|x| (x - hi).exp()).sum::<f64>().ln()
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// [`rel_diff`] of two positive values given by their logarithms; stays
/// accurate when the values themselves underflow.
pub fn rel_diff_ln(ln_a: f64, ln_b: f64) -> f64 {
    if ln_a == ln_b {
        0.0
    } else {
        -(-(ln_a - ln_b).abs()).exp_m1()
    }
}
