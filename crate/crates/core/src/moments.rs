//! Closed-form moments and correlation ratios.
//!
//! Notation follows the usual second-moment setup. For a fixed `k`-set `S`
//! and an outside vertex `v`, `q0 = (1-p)^M` is the probability that `v` is
//! not dominated. For two `k`-sets overlapping in `i` vertices,
//! `q00 = (1-p)^{M_i}` is the probability that `v` is dominated by neither,
//! and `q11 = 1 - 2 q0 + q00` the probability that it is dominated by both.
//!
//! Everything is evaluated in log space. The differences `q00 - q0^2` and
//! `q0 - q00` are formed as `q00 * (1 - (1-p)^{2M - M_i})` and
//! `q0 * (1 - (1-p)^{M_i - M})` so they keep full relative precision when
//! both operands are tiny.
//!
//! The per-vertex undomination events are treated as independent, which
//! is exact for `d = 2` and only asymptotically valid for `d >= 3`.
//! [`crate::solvers`] provides the exact counts to measure that gap.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::modelgen::{count_m, count_mi};
use crate::numeric::{binomial_checked, ln_add_exp, ln_binomial, ln_one_minus_exp, ln_pow_one_minus, ln_sum_exp, scaled};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    VertexCover,
    DominatingSet,
}

/// `Pr(both solutions) / (Pr(first) Pr(second))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelationRatio {
    pub value: f64,
    pub log_value: f64,
    pub regime: Regime,
}

impl CorrelationRatio {
    fn from_log(log_value: f64, regime: Regime) -> Self {
        CorrelationRatio { value: log_value.exp(), log_value, regime }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DsCorrelation {
    pub ratio: CorrelationRatio,
    /// `exp{(ln^2 n)^{2-i/k} / n^{1-i/k}}`, the large-`n` estimate.
    pub asymptotic_surrogate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub expected_count: f64,
    pub ln_expected_count: f64,
    /// `F(0..=k)`: contribution of ordered pairs overlapping in `i`.
    pub f_terms: Vec<f64>,
    pub ln_f_terms: Vec<f64>,
    pub second_moment: f64,
    pub ratio_to_square: f64,
    pub q0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuasiExpectation {
    pub expected: f64,
    pub ln_expected: f64,
    /// `E[N] / E[X] = (n-k) q0 / (1-q0)`.
    pub ratio_to_expected_count: f64,
    pub ln_ratio_to_expected_count: f64,
}

/// Terms of the quasi-dominating second moment at one overlap `i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiRow {
    pub i: usize,
    pub m_i: usize,
    pub q00: f64,
    pub q11: f64,
    pub phi: f64,
    pub ln_phi: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    /// `P1 + P2 + P3 + 2 P4`.
    pub w: f64,
    pub ln_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiMomentReport {
    pub expected_quasi: f64,
    pub ln_expected_quasi: f64,
    pub q0: f64,
    pub rows: Vec<QuasiRow>,
    pub second_moment: f64,
    pub ratio_to_square: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondMomentBounds {
    /// `delta / (1 + delta)`.
    pub lower: f64,
    /// `delta`.
    pub upper: f64,
    /// `delta (1 - delta) / (1 + delta)`.
    pub uniqueness: f64,
}

/// Log-space quantities shared by every formula at one `(n, d, k, p)`.
struct Probe {
    n: usize,
    d: usize,
    k: usize,
    ln_one_minus_p: f64,
    m: u128,
    ln_q0: f64,
    ln_one_minus_q0: f64,
}

impl Probe {
    /// Requires `k <= n - 1` so that `M` is defined.
    fn new(n: usize, d: usize, k: usize, p: f64) -> Result<Self> {
        check_p(p)?;
        let m = count_m(n, k, d)?;
        let ln_one_minus_p = (-p).ln_1p();
        let ln_q0 = scaled(m as f64, ln_one_minus_p);
        Ok(Probe { n, d, k, ln_one_minus_p, m, ln_q0, ln_one_minus_q0: ln_one_minus_exp(ln_q0) })
    }

    fn q0(&self) -> f64 {
        self.ln_q0.exp()
    }

    fn pow(&self, e: u128) -> f64 {
        scaled(e as f64, self.ln_one_minus_p)
    }

    /// `M_i`; only valid when `2k - i <= n - 1`.
    fn m_i(&self, i: usize) -> Result<u128> {
        count_mi(self.n, self.k, i, self.d)
    }

    fn ln_q00(&self, m_i: u128) -> f64 {
        self.pow(m_i)
    }

    fn ln_q11(&self, m_i: u128) -> f64 {
        if m_i == self.m {
            // Identical sets: dominated by both = dominated by one.
            return self.ln_one_minus_q0;
        }
        let ln_excess = self.ln_q00(m_i) + ln_one_minus_exp(self.pow(2 * self.m - m_i));
        ln_add_exp(2.0 * self.ln_one_minus_q0, ln_excess)
    }

    /// `ln(q0 - q00)`.
    fn ln_q0_minus_q00(&self, m_i: u128) -> f64 {
        self.ln_q0 + ln_one_minus_exp(self.pow(m_i - self.m))
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(usage(format!("p = {p} outside [0, 1]")))
    }
}

fn check_dims(n: usize, d: usize, k: usize) -> Result<()> {
    if d < 2 {
        return Err(usage(format!("d = {d} must be at least 2")));
    }
    if k > n {
        return Err(usage(format!("k = {k} exceeds n = {n}")));
    }
    Ok(())
}

/// `ln E[X]` with `E[X] = C(n,k) (1 - (1-p)^M)^{n-k}`.
pub fn ln_expected_count(n: usize, d: usize, k: usize, p: f64) -> Result<f64> {
    check_dims(n, d, k)?;
    check_p(p)?;
    if k == n {
        return Ok(0.0);
    }
    let probe = Probe::new(n, d, k, p)?;
    Ok(ln_binomial(n as u64, k as u64) + scaled((n - k) as f64, probe.ln_one_minus_q0))
}

/// Expected number of dominating sets of size `k`.
///
/// Evaluated directly when `C(n,k)` is an exact double and the result is a
/// normal double, so small cases come out exact; otherwise through
/// [`ln_expected_count`].
pub fn expected_count(n: usize, d: usize, k: usize, p: f64) -> Result<f64> {
    let ln_ex = ln_expected_count(n, d, k, p)?;
    if k == n {
        return Ok(1.0);
    }
    let choose = binomial_checked(n as u64, k as u64).ok().filter(|&c| c < 1 << f64::MANTISSA_DIGITS);
    let outside = i32::try_from(n - k).ok();
    if let (Some(choose), Some(outside)) = (choose, outside) {
        let probe = Probe::new(n, d, k, p)?;
        let q0 = probe.q0();
        let covered = if q0 <= 0.5 { 1.0 - q0 } else { probe.ln_one_minus_q0.exp() };
        let direct = choose as f64 * covered.powi(outside);
        if direct.is_normal() || direct == 0.0 && ln_ex < f64::MIN_POSITIVE.ln() {
            return Ok(direct);
        }
    }
    Ok(ln_ex.exp())
}

fn check_pairs(n: usize, d: usize, k: usize) -> Result<()> {
    check_dims(n, d, k)?;
    if k == 0 {
        return Err(usage("k must be positive"));
    }
    if 2 * k > n {
        return Err(usage(format!(
            "pair terms need n >= 2k (m_i >= 0 for every overlap), got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

/// `E[X^2] = Σ_i F(i)`.
///
/// For `i >= 1`,
/// `F(i) = C(n,k) C(k,i) C(n-k,k-i) (1-q0)^{2(k-i)} q11(i)^{n-2k+i}`.
/// The disjoint term uses the decoupled product
/// `F(0) = C(n,k) C(n-k,k) (1-q0)^{2(n-k)}`, which equals
/// `E[X]^2 C(n-k,k) / C(n,k)`. It coincides with the general expression at
/// `d = 2` and drops the `q00 - q0^2` coupling of the two disjoint sets
/// for `d >= 3`. The exact pair ratio at overlap zero stays available
/// through [`ds_correlation_ratio`].
pub fn second_moment(n: usize, d: usize, k: usize, p: f64) -> Result<MomentReport> {
    check_pairs(n, d, k)?;
    let probe = Probe::new(n, d, k, p)?;
    let ln_choose_nk = ln_binomial(n as u64, k as u64);
    let ln_ex = ln_choose_nk + scaled((n - k) as f64, probe.ln_one_minus_q0);

    let mut ln_f = Vec::with_capacity(k + 1);
    ln_f.push(ln_choose_nk + ln_binomial((n - k) as u64, k as u64) + scaled(2.0 * (n - k) as f64, probe.ln_one_minus_q0));
    for i in 1..=k {
        let m_i = n + i - 2 * k;
        let ln_q11 = if m_i == 0 { 0.0 } else { probe.ln_q11(probe.m_i(i)?) };
        ln_f.push(
            ln_choose_nk
                + ln_binomial(k as u64, i as u64)
                + ln_binomial((n - k) as u64, (k - i) as u64)
                + scaled(2.0 * (k - i) as f64, probe.ln_one_minus_q0)
                + scaled(m_i as f64, ln_q11),
        );
    }
    let ln_second = ln_sum_exp(&ln_f);
    Ok(MomentReport {
        expected_count: ln_ex.exp(),
        ln_expected_count: ln_ex,
        f_terms: ln_f.iter().map(|x| x.exp()).collect(),
        ln_f_terms: ln_f.clone(),
        second_moment: ln_second.exp(),
        ratio_to_square: (ln_second - 2.0 * ln_ex).exp(),
        q0: probe.q0(),
    })
}

/// Dominating-set pair ratio
/// `[(1 - 2q0 + q00) / (1 - q0)^2]^{n-2k+i}`.
pub fn ds_correlation_ratio(n: usize, d: usize, k: usize, i: usize, p: f64) -> Result<DsCorrelation> {
    check_dims(n, d, k)?;
    if k == 0 || i > k {
        return Err(usage(format!("need 0 <= i <= k and k >= 1, got i = {i}, k = {k}")));
    }
    if n + i < 2 * k {
        return Err(usage(format!("n - 2k + i is negative for n = {n}, k = {k}, i = {i}")));
    }
    let m_i = n + i - 2 * k;
    let log_value = if m_i == 0 {
        0.0
    } else {
        let probe = Probe::new(n, d, k, p)?;
        if probe.ln_one_minus_q0 == f64::NEG_INFINITY {
            return Err(Error::Domain("no k-set dominates anything at this p (q0 = 1)".into()));
        }
        let ln_q11 = probe.ln_q11(probe.m_i(i)?);
        m_i as f64 * (ln_q11 - 2.0 * probe.ln_one_minus_q0)
    };
    let ln_n = (n as f64).ln();
    let frac = i as f64 / k as f64;
    let asymptotic_surrogate = ((ln_n * ln_n).powf(2.0 - frac) / (n as f64).powf(1.0 - frac)).exp();
    Ok(DsCorrelation {
        ratio: CorrelationRatio::from_log(log_value, Regime::DominatingSet),
        asymptotic_surrogate,
    })
}

/// Probability that a fixed `k`-set is a vertex cover: no edge inside the
/// complement, `(1-p)^{C(n-k, d)}`.
pub fn vc_cover_prob(n: usize, k: usize, p: f64, d: usize) -> Result<f64> {
    check_dims(n, d, k)?;
    check_p(p)?;
    let inside = binomial_checked((n - k) as u64, d as u64)?;
    Ok(ln_pow_one_minus(p, inside as f64).exp())
}

/// Vertex-cover pair ratio `(1-p)^{-C(n-2k+i, d)}`.
pub fn vc_correlation_ratio(n: usize, k: usize, i: usize, p: f64, d: usize) -> Result<CorrelationRatio> {
    check_dims(n, d, k)?;
    check_p(p)?;
    if i > k || n + i < 2 * k {
        return Err(usage(format!("invalid overlap i = {i} for n = {n}, k = {k}")));
    }
    let shared = binomial_checked((n + i - 2 * k) as u64, d as u64)?;
    if p == 1.0 && shared > 0 {
        return Err(Error::Domain("both marginals vanish at p = 1".into()));
    }
    Ok(CorrelationRatio::from_log(-ln_pow_one_minus(p, shared as f64), Regime::VertexCover))
}

/// `E[N] = C(n,k) (n-k) q0 (1-q0)^{n-k-1}`, the expected number of
/// quasi-dominating `k`-sets.
pub fn quasi_expected(n: usize, d: usize, k: usize, p: f64) -> Result<QuasiExpectation> {
    check_dims(n, d, k)?;
    if k >= n {
        return Err(usage(format!("need k <= n - 1, got k = {k}, n = {n}")));
    }
    let probe = Probe::new(n, d, k, p)?;
    let ln_outside = ((n - k) as f64).ln();
    let ln_en = ln_binomial(n as u64, k as u64)
        + ln_outside
        + probe.ln_q0
        + scaled((n - k - 1) as f64, probe.ln_one_minus_q0);
    let ln_ratio = ln_outside + probe.ln_q0 - probe.ln_one_minus_q0;
    Ok(QuasiExpectation {
        expected: ln_en.exp(),
        ln_expected: ln_en,
        ratio_to_expected_count: ln_ratio.exp(),
        ln_ratio_to_expected_count: ln_ratio,
    })
}

/// `E[N^2] = Σ_i Φ(i) W(i)` with `W(i) = P1 + P2 + P3 + 2 P4`.
///
/// Cases by where the undominated vertices `x` (of `S1`) and `y` (of `S2`)
/// sit, with `A = S1 \ S2`, `B = S2 \ S1`, `R` the rest and `m_i = |R|`:
///
/// * `P1`: `x = y ∈ R`; `m_i q00 q11^{m_i-1} (1-q0)^{2(k-i)}`.
/// * `P2`: `x ≠ y`, both in `R`; `m_i (m_i-1) (q0-q00)^2 q11^{m_i-2} (1-q0)^{2(k-i)}`.
/// * `P3`: `x ∈ B`, `y ∈ A`; `(k-i)^2 q0^2 q11^{m_i} (1-q0)^{2(k-i)-2}`.
/// * `P4`: `x ∈ B`, `y ∈ R` (and the mirror case); `(k-i) m_i q0 (q0-q00) q11^{m_i-1} (1-q0)^{2(k-i)-1}`.
///
/// A term whose leading count is zero is zero; no vertex pair exists in `R`
/// when `m_i < 2`.
pub fn quasi_second_moment(n: usize, d: usize, k: usize, p: f64) -> Result<QuasiMomentReport> {
    check_pairs(n, d, k)?;
    if k >= n {
        return Err(usage(format!("need k <= n - 1, got k = {k}, n = {n}")));
    }
    let probe = Probe::new(n, d, k, p)?;
    let lq0 = probe.ln_q0;
    let l1q0 = probe.ln_one_minus_q0;
    let ln_choose_nk = ln_binomial(n as u64, k as u64);
    let expected = quasi_expected(n, d, k, p)?;

    let mut rows = Vec::with_capacity(k + 1);
    let mut ln_phi_w = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let m = n + i - 2 * k;
        let a = k - i;
        let ln_phi = ln_choose_nk + ln_binomial(k as u64, i as u64) + ln_binomial((n - k) as u64, a as u64);
        // With m = 0 there is no outside vertex and q00, q11 never enter.
        let (lq00, lq11, ldiff) = if m == 0 {
            (f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY)
        } else {
            let m_i = probe.m_i(i)?;
            (probe.ln_q00(m_i), probe.ln_q11(m_i), probe.ln_q0_minus_q00(m_i))
        };
        let mf = m as f64;
        let af = a as f64;
        let ln_p1 = if m == 0 {
            f64::NEG_INFINITY
        } else {
            mf.ln() + lq00 + scaled(mf - 1.0, lq11) + scaled(2.0 * af, l1q0)
        };
        let ln_p2 = if m < 2 {
            debug!("P2 vanishes at i = {i}: m_i = {m} leaves no vertex pair");
            f64::NEG_INFINITY
        } else {
            (mf * (mf - 1.0)).ln() + 2.0 * ldiff + scaled(mf - 2.0, lq11) + scaled(2.0 * af, l1q0)
        };
        let ln_p3 = if a == 0 {
            f64::NEG_INFINITY
        } else {
            2.0 * af.ln() + 2.0 * lq0 + scaled(mf, lq11) + scaled(2.0 * af - 2.0, l1q0)
        };
        let ln_p4 = if a == 0 || m == 0 {
            f64::NEG_INFINITY
        } else {
            (af * mf).ln() + lq0 + ldiff + scaled(mf - 1.0, lq11) + scaled(2.0 * af - 1.0, l1q0)
        };
        let ln_w = ln_sum_exp(&[ln_p1, ln_p2, ln_p3, std::f64::consts::LN_2 + ln_p4]);
        ln_phi_w.push(ln_phi + ln_w);
        rows.push(QuasiRow {
            i,
            m_i: m,
            q00: lq00.exp(),
            q11: lq11.exp(),
            phi: ln_phi.exp(),
            ln_phi,
            p1: ln_p1.exp(),
            p2: ln_p2.exp(),
            p3: ln_p3.exp(),
            p4: ln_p4.exp(),
            w: ln_w.exp(),
            ln_w,
        });
    }
    let ln_second = ln_sum_exp(&ln_phi_w);
    Ok(QuasiMomentReport {
        expected_quasi: expected.expected,
        ln_expected_quasi: expected.ln_expected,
        q0: probe.q0(),
        rows,
        second_moment: ln_second.exp(),
        ratio_to_square: (ln_second - 2.0 * expected.ln_expected).exp(),
    })
}

/// Markov upper bound, second-moment lower bound and uniqueness bound for a
/// calibrated target `delta`.
pub fn lemma2_bounds(delta: f64) -> Result<SecondMomentBounds> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(usage(format!("delta = {delta} outside (0, 1)")));
    }
    Ok(SecondMomentBounds {
        lower: delta / (1.0 + delta),
        upper: delta,
        uniqueness: delta * (1.0 - delta) / (1.0 + delta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{binomial, rel_diff, rel_diff_ln};
    use proptest::prelude::*;

    // Independent recomputation by direct double arithmetic, no log space.
    fn direct_terms(n: usize, d: usize, k: usize, i: usize, p: f64) -> (f64, f64, f64) {
        let c = |a: usize, b: usize| binomial(a as u64, b as u64).unwrap() as f64;
        let m = c(n - 1, d - 1) - c(n - 1 - k, d - 1);
        let top = n as i64 - 1 - (2 * k as i64 - i as i64);
        let mi = c(n - 1, d - 1) - if top >= 0 { c(top as usize, d - 1) } else { 0.0 };
        let q0 = (1.0 - p).powf(m);
        let q00 = (1.0 - p).powf(mi);
        (q0, q00, 1.0 - 2.0 * q0 + q00)
    }

    #[test]
    fn expected_count_examples() {
        assert!(rel_diff(expected_count(4, 3, 1, 0.5).unwrap(), 1.6875) < 1e-14);
        assert!(rel_diff(expected_count(3, 2, 1, 0.5).unwrap(), 0.75) < 1e-14);
        assert_eq!(expected_count(7, 3, 7, 0.3).unwrap(), 1.0);
        assert_eq!(expected_count(7, 3, 2, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn second_moment_example() {
        let r = second_moment(4, 3, 1, 0.5).unwrap();
        assert!(rel_diff(r.f_terms[1], 1.6875) < 1e-14);
        assert!(rel_diff(r.f_terms[0], 12.0 * 0.75f64.powi(6)) < 1e-14);
        assert!((r.f_terms[0] - 2.13574).abs() < 1e-5);
        assert!((r.second_moment - 3.82324).abs() < 1e-5);
        assert_eq!(r.q0, 0.25);
        assert!(second_moment(5, 3, 3, 0.5).is_err());
    }

    #[test]
    fn ds_ratio_examples() {
        let at_k = ds_correlation_ratio(4, 3, 1, 1, 0.5).unwrap().ratio;
        assert!(rel_diff(at_k.value, 0.75f64.powi(-3)) < 1e-13);
        assert!((at_k.value - 2.3704).abs() < 1e-4);
        let at_0 = ds_correlation_ratio(4, 3, 1, 0, 0.5).unwrap().ratio;
        assert!(rel_diff(at_0.value, (0.625f64 / 0.5625).powi(2)) < 1e-13);
        assert!((at_0.value - 1.23457).abs() < 1e-5);
        // n - 2k + i = 0
        let empty = ds_correlation_ratio(6, 3, 3, 0, 0.2).unwrap().ratio;
        assert_eq!(empty.value, 1.0);
        assert_eq!(empty.regime, Regime::DominatingSet);
        assert!(ds_correlation_ratio(6, 3, 2, 3, 0.2).is_err());
        assert!(matches!(ds_correlation_ratio(8, 3, 2, 1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn vc_examples() {
        assert!(rel_diff(vc_cover_prob(5, 2, 0.5, 2).unwrap(), 0.125) < 1e-15);
        assert_eq!(vc_cover_prob(5, 5, 0.5, 2).unwrap(), 1.0);
        assert!(rel_diff(vc_cover_prob(5, 2, 0.5, 3).unwrap(), 0.5) < 1e-15);
        let r = vc_correlation_ratio(10, 3, 2, 0.1, 2).unwrap();
        assert!(rel_diff(r.value, 0.9f64.powi(-15)) < 1e-13);
        assert!((r.value - 4.857).abs() < 1e-3);
        assert_eq!(vc_correlation_ratio(6, 3, 0, 0.7, 2).unwrap().value, 1.0);
    }

    #[test]
    fn quasi_examples() {
        let e = quasi_expected(4, 3, 1, 0.5).unwrap();
        assert!(rel_diff(e.expected, 1.6875) < 1e-14);
        assert_eq!(quasi_expected(6, 3, 2, 1.0).unwrap().expected, 0.0);

        let r = quasi_second_moment(4, 3, 1, 0.5).unwrap();
        let top = &r.rows[1];
        assert!(rel_diff(top.w, 3.0 * 0.25 * 0.75f64.powi(2)) < 1e-14);
        assert!(rel_diff(top.phi, 4.0) < 1e-14);
        assert!(rel_diff(top.phi * top.w, 1.6875) < 1e-13);

        // Hand evaluation at i = 0: m = 2, q0 = 1/4, q00 = 1/8, q11 = 5/8.
        let zero = &r.rows[0];
        let (p1, p2, p3, p4) = (
            2.0 * 0.125 * 0.625 * 0.5625,
            2.0 * 0.125f64.powi(2) * 0.5625,
            0.0625 * 0.625f64.powi(2),
            2.0 * 0.25 * 0.125 * 0.625 * 0.75,
        );
        assert!(rel_diff(zero.p1, p1) < 1e-13);
        assert!(rel_diff(zero.p2, p2) < 1e-13);
        assert!(rel_diff(zero.p3, p3) < 1e-13);
        assert!(rel_diff(zero.p4, p4) < 1e-13);
        assert!((zero.w - 0.18848).abs() < 1e-5);
        assert!(rel_diff(zero.phi, 12.0) < 1e-14);
        assert!((r.second_moment - 3.9492).abs() < 1e-4);
    }

    #[test]
    fn quasi_terms_vanish_at_p_one() {
        let r = quasi_second_moment(12, 3, 3, 1.0).unwrap();
        for row in &r.rows {
            assert_eq!((row.p1, row.p2, row.p3, row.p4), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn bounds() {
        let b = lemma2_bounds(0.5).unwrap();
        assert!((b.lower - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(b.upper, 0.5);
        assert!((b.uniqueness - 1.0 / 6.0).abs() < 1e-15);
        let tiny = lemma2_bounds(1e-9).unwrap();
        assert!(tiny.lower < 1e-8 && tiny.upper < 1e-8);
        assert!(lemma2_bounds(1.0).is_err());
    }

    fn arb_point() -> impl Strategy<Value = (usize, usize, usize, f64)> {
        (2usize..5, 1usize..6, 0.0f64..60.0).prop_flat_map(|(d, k, extra)| {
            let n_min = (2 * k + 1).max(d);
            (Just(d), Just(k), n_min..n_min + 60, Just(extra)).prop_flat_map(|(d, k, n, _)| {
                (Just(n), Just(d), Just(k), 1e-4f64..0.5)
            })
        })
    }

    proptest! {
        #[test]
        fn identities((n, d, k, p) in arb_point()) {
            let r = second_moment(n, d, k, p).unwrap();
            prop_assert!(rel_diff_ln(r.ln_f_terms[k], r.ln_expected_count) < 1e-12);
            let c = |a: usize, b: usize| ln_binomial(a as u64, b as u64);
            let ln_f0 = 2.0 * r.ln_expected_count + c(n - k, k) - c(n, k);
            prop_assert!(rel_diff_ln(r.ln_f_terms[0], ln_f0) < 1e-12);
            prop_assert!(r.f_terms.iter().all(|&f| f >= 0.0));

            let q = quasi_second_moment(n, d, k, p).unwrap();
            let top = &q.rows[k];
            prop_assert!(rel_diff_ln(top.ln_phi + top.ln_w, q.ln_expected_quasi) < 1e-12);
            for row in &q.rows {
                prop_assert!(row.p1 >= 0.0 && row.p2 >= 0.0 && row.p3 >= 0.0 && row.p4 >= 0.0);
                prop_assert!((0.0..=1.0).contains(&row.q11));
            }
            let ratio = quasi_expected(n, d, k, p).unwrap().ln_ratio_to_expected_count;
            prop_assert!(rel_diff_ln(q.ln_expected_quasi - r.ln_expected_count, ratio) < 1e-12);
        }

        #[test]
        fn ratios_at_least_one((n, d, k, p) in arb_point(), i_seed in 0usize..10) {
            let i = i_seed % (k + 1);
            let ds = ds_correlation_ratio(n, d, k, i, p).unwrap().ratio;
            prop_assert!(ds.value >= 1.0 - 1e-12);
            prop_assert!(rel_diff(ds.value, ds.log_value.exp()) < 1e-12);
            let vc = vc_correlation_ratio(n, k, i, p, d).unwrap();
            prop_assert!(vc.value >= 1.0);
        }

        #[test]
        fn log_space_matches_direct((n, d, k, p) in arb_point(), i_seed in 0usize..10) {
            let i = i_seed % (k + 1);
            let (q0, q00, q11) = direct_terms(n, d, k, i, p);
            let m = (n + i - 2 * k) as i32;
            let direct = (q11 / (1.0 - q0).powi(2)).powi(m);
            let ds = ds_correlation_ratio(n, d, k, i, p).unwrap().ratio.value;
            prop_assert!(rel_diff(ds, direct) < 1e-9, "{} vs {}", ds, direct);
            let q = quasi_second_moment(n, d, k, p).unwrap();
            prop_assert!(rel_diff(q.rows[i].q00, q00) < 1e-12);
        }
    }
}
