//! Ensemble parameters, the counts `M` and `M_i`, calibration of the edge
//! probability, and seeded sampling of `G_d(n, p)`.

use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::hypercore::{Hypergraph, Vertex};
use crate::moments;
use crate::numeric::{binomial, binomial_checked, binomial_signed};
use crate::rng::{stream_rng, SimRng, Stream};

/// Target expected count used when none is given.
pub const DEFAULT_DELTA: f64 = 0.5;

/// Upper end of the initial calibration bracket, in units of the asymptotic `p`.
const BRACKET_FACTOR: f64 = 50.0;
const MAX_BISECTIONS: usize = 200;

/// Describes one random ensemble plus the reproducibility seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub p: f64,
    /// Calibration target, when `p` came from [`calibrate_p`].
    pub delta: Option<f64>,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(n: usize, d: usize, k: usize, p: f64, seed: u64) -> Result<Self> {
        let params = ModelParams { n, d, k, p, delta: None, seed };
        params.validate()?;
        Ok(params)
    }

    /// Parameters with `p` calibrated so that `E[X] = delta`.
    pub fn calibrated(n: usize, d: usize, k: usize, delta: f64, seed: u64) -> Result<Self> {
        let cal = calibrate_p(n, d, k, delta, 1e-10)?;
        let params = ModelParams { n, d, k, p: cal.p, delta: Some(delta), seed };
        params.validate()?;
        Ok(params)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ModelParams { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 || self.d > self.n {
            return Err(usage(format!("need 2 <= d <= n, got d = {}, n = {}", self.d, self.n)));
        }
        if self.k < 1 || self.k > self.n {
            return Err(usage(format!("need 1 <= k <= n, got k = {}, n = {}", self.k, self.n)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(usage(format!("p = {} outside [0, 1]", self.p)));
        }
        if let Some(delta) = self.delta {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(usage(format!("delta = {delta} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

/// `M`, every `M_i` and every `m_i = n - 2k + i` for one `(n, k, d)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CombinatorialCounts {
    pub m: u128,
    pub m_i: Vec<u128>,
    pub residual: Vec<i64>,
}

impl CombinatorialCounts {
    /// Requires `n >= 2k` so that every overlap `0..=k` is admissible.
    pub fn new(n: usize, k: usize, d: usize) -> Result<Self> {
        if 2 * k > n {
            return Err(usage(format!("overlap counts need n >= 2k, got n = {n}, k = {k}")));
        }
        let m = count_m(n, k, d)?;
        let m_i = (0..=k).map(|i| count_mi(n, k, i, d)).collect::<Result<Vec<_>>>()?;
        let residual = (0..=k).map(|i| n as i64 - 2 * k as i64 + i as i64).collect();
        Ok(CombinatorialCounts { m, m_i, residual })
    }
}

/// Edges through a fixed outside vertex that meet a fixed `k`-set:
/// `C(n-1, d-1) - C(n-1-k, d-1)`.
pub fn count_m(n: usize, k: usize, d: usize) -> Result<u128> {
    if d < 2 {
        return Err(usage(format!("d = {d} must be at least 2")));
    }
    if n == 0 || k > n - 1 {
        return Err(usage(format!("need k <= n - 1, got k = {k}, n = {n}")));
    }
    let all = binomial_checked(n as u64 - 1, d as u64 - 1)?;
    let avoid = binomial_checked((n - 1 - k) as u64, d as u64 - 1)?;
    Ok(all - avoid)
}

/// Same as [`count_m`] for the union of two `k`-sets overlapping in `i`:
/// `C(n-1, d-1) - C(n-1-(2k-i), d-1)`.
pub fn count_mi(n: usize, k: usize, i: usize, d: usize) -> Result<u128> {
    if d < 2 {
        return Err(usage(format!("d = {d} must be at least 2")));
    }
    if i > k {
        return Err(usage(format!("overlap i = {i} exceeds k = {k}")));
    }
    let union = 2 * k - i;
    if n == 0 || union > n - 1 {
        return Err(usage(format!("need 2k - i <= n - 1, got 2k - i = {union}, n = {n}")));
    }
    let all = binomial_checked(n as u64 - 1, d as u64 - 1)?;
    let avoid = binomial_signed((n - 1 - union) as i64, d as u64 - 1)
        .ok_or_else(|| Error::Size("C(n-1-(2k-i), d-1) overflows".into()))?;
    Ok(all - avoid)
}

/// Leading-order edge probability `1 - exp(-(d-2)! / n^(d-2))`.
pub fn asymptotic_p(n: usize, d: usize) -> Result<f64> {
    if d < 3 {
        return Err(Error::Domain(format!("the asymptotic form needs d >= 3, got d = {d}")));
    }
    if n == 0 {
        return Err(usage("n must be positive"));
    }
    let ln_fact: f64 = (2..=d - 2).map(|j| (j as f64).ln()).sum();
    let x = (ln_fact - (d - 2) as f64 * (n as f64).ln()).exp();
    Ok(-(-x).exp_m1())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub p: f64,
    pub expected: f64,
    /// `|E[X](p) - delta|`.
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `E[X](p) = delta` by bisection; `E[X]` is increasing in `p`.
pub fn calibrate_p(n: usize, d: usize, k: usize, delta: f64, tol: f64) -> Result<Calibration> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(usage(format!("delta = {delta} outside (0, 1)")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(usage(format!("tolerance {tol} must be positive")));
    }
    if d < 2 || d > n {
        return Err(usage(format!("need 2 <= d <= n, got d = {d}, n = {n}")));
    }
    if k < 1 || k >= n {
        return Err(Error::Infeasible(format!(
            "E[X] is constant in p for k = {k}, n = {n}"
        )));
    }
    let ln_delta = delta.ln();
    let ln_ex = |p: f64| moments::ln_expected_count(n, d, k, p);

    let mut hi = if d >= 3 { (BRACKET_FACTOR * asymptotic_p(n, d)?).min(1.0) } else { 1.0 };
    if ln_ex(hi)? < ln_delta {
        hi = 1.0;
        if ln_ex(hi)? < ln_delta {
            return Err(Error::Infeasible(format!(
                "E[X] stays below {delta} for every p at n = {n}, d = {d}, k = {k}"
            )));
        }
    }
    let mut lo = 0.0;
    for iteration in 1..=MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let ln_mid = ln_ex(mid)?;
        let expected = ln_mid.exp();
        let residual = (expected - delta).abs();
        if residual <= tol * delta {
            return Ok(Calibration { p: mid, expected, residual, iterations: iteration });
        }
        if ln_mid < ln_delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Infeasible(format!(
        "no p within relative tolerance {tol} after {MAX_BISECTIONS} bisections"
    )))
}

/// Default dominating-set size `max(1, round(ln n))`.
pub fn choose_k(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(usage(format!("n = {n} must be at least 2")));
    }
    Ok(((n as f64).ln().round() as usize).max(1))
}

/// Draws `G_d(n, p)` from the sampler stream of `params.seed`.
pub fn sample_hypergraph(params: &ModelParams) -> Result<Hypergraph> {
    params.validate()?;
    let mut rng = stream_rng(params.seed, Stream::Sampler);
    sample_with_rng(params.n, params.d, params.p, &mut rng)
}

/// Every d-subset independently with probability `p`.
///
/// The edge count is drawn from `Binomial(C(n,d), p)` and that many distinct
/// ranks are drawn uniformly (the complement is drawn instead when more than
/// half the subsets are kept). Ranks are decoded in the combinatorial number
/// system.
pub fn sample_with_rng(n: usize, d: usize, p: f64, rng: &mut SimRng) -> Result<Hypergraph> {
    if d < 2 || d > n {
        return Err(usage(format!("need 2 <= d <= n, got d = {d}, n = {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(usage(format!("p = {p} outside [0, 1]")));
    }
    let total = binomial(n as u64, d as u64)
        .filter(|&t| t <= u64::MAX as u128)
        .ok_or_else(|| Error::Size(format!("C({n},{d}) does not fit a 64-bit rank")))? as u64;
    let count = Binomial::new(total, p)
        .map_err(|e| usage(format!("binomial edge count: {e}")))?
        .sample(rng);

    let complement = count > total / 2;
    let draws = if complement { total - count } else { count };
    let mut ranks = BTreeSet::new();
    while (ranks.len() as u64) < draws {
        ranks.insert(rng.gen_range(0..total));
    }
    let ranks: Vec<u64> = if complement {
        (0..total).filter(|r| !ranks.contains(r)).collect()
    } else {
        ranks.into_iter().collect()
    };
    let edges = ranks.into_iter().map(|r| unrank(r, n, d)).collect::<Vec<_>>();
    Hypergraph::new(n, d, edges)
}

/// Colex rank of an ascending d-subset.
pub fn rank(edge: &[Vertex]) -> u128 {
    edge.iter()
        .enumerate()
        .map(|(j, &c)| binomial(c as u64, j as u64 + 1).unwrap_or(u128::MAX))
        .sum()
}

/// Inverse of [`rank`]: the ascending d-subset of `0..n` with colex rank `r`.
pub fn unrank(mut r: u64, n: usize, d: usize) -> Vec<Vertex> {
    let mut out = vec![0; d];
    let mut upper = n as u64;
    for j in (1..=d as u64).rev() {
        // Largest c < upper with C(c, j) <= r.
        let (mut lo, mut hi) = (j - 1, upper - 1);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            match binomial(mid, j) {
                Some(b) if b <= r as u128 => lo = mid,
                _ => hi = mid - 1,
            }
        }
        out[j as usize - 1] = lo as Vertex;
        r -= binomial(lo, j).expect("bounded by the rank") as u64;
        upper = lo;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rel_diff;
    use proptest::prelude::*;

    #[test]
    fn counts() {
        assert_eq!(count_m(10, 2, 3).unwrap(), 15);
        assert_eq!(count_m(10, 0, 3).unwrap(), 0);
        assert_eq!(count_m(4, 1, 3).unwrap(), 2);
        assert!(count_m(4, 4, 3).is_err());
        assert_eq!(count_mi(10, 2, 1, 3).unwrap(), 21);
        assert_eq!(count_mi(10, 2, 0, 3).unwrap(), 26);
        assert_eq!(count_mi(10, 2, 2, 3).unwrap(), count_m(10, 2, 3).unwrap());
        assert!(count_mi(10, 2, 3, 3).is_err());
        assert!(count_mi(4, 2, 0, 3).is_err());
    }

    #[test]
    fn asymptotic_values() {
        assert!((asymptotic_p(100, 3).unwrap() - 0.009_950_166).abs() < 1e-8);
        assert!((asymptotic_p(50, 4).unwrap() - 0.000_799_680).abs() < 1e-8);
        assert!((asymptotic_p(1000, 3).unwrap() - 0.000_999_500).abs() < 1e-8);
        assert!(matches!(asymptotic_p(100, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn default_k() {
        assert_eq!(choose_k(60).unwrap(), 4);
        assert_eq!(choose_k(3).unwrap(), 1);
        assert_eq!(choose_k(2).unwrap(), 1);
        assert!(choose_k(1).is_err());
    }

    #[test]
    fn calibration_hits_target() {
        let cal = calibrate_p(100, 3, 5, 0.5, 1e-9).unwrap();
        let back = moments::expected_count(100, 3, 5, cal.p).unwrap();
        assert!((back - 0.5).abs() <= 1e-9 * 0.5);
        let low = calibrate_p(100, 3, 5, 0.1, 1e-9).unwrap().p;
        let high = calibrate_p(100, 3, 5, 0.9, 1e-9).unwrap().p;
        assert!(high > low);
        assert!(calibrate_p(100, 3, 5, 1.0, 1e-9).is_err());
        assert!(calibrate_p(100, 3, 5, 0.5, 0.0).is_err());
        assert!(matches!(calibrate_p(10, 3, 10, 0.5, 1e-9), Err(Error::Infeasible(_))));
    }

    #[test]
    fn calibration_at_d2_uses_full_bracket() {
        let cal = calibrate_p(40, 2, 4, 0.5, 1e-9).unwrap();
        assert!(rel_diff(cal.expected, 0.5) <= 1e-9);
    }

    #[test]
    fn sampler_extremes() {
        let mut rng = stream_rng(1, Stream::Sampler);
        assert_eq!(sample_with_rng(8, 3, 0.0, &mut rng).unwrap().edge_count(), 0);
        assert_eq!(sample_with_rng(8, 3, 1.0, &mut rng).unwrap().edge_count(), 56);
    }

    #[test]
    fn sampler_is_deterministic() {
        let params = ModelParams::new(30, 3, 3, 0.05, 42).unwrap();
        let a = sample_hypergraph(&params).unwrap();
        let b = sample_hypergraph(&params).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_hypergraph(&params.with_seed(43)).unwrap());
    }

    #[test]
    fn sampler_overflow() {
        let mut rng = stream_rng(1, Stream::Sampler);
        assert!(matches!(sample_with_rng(200, 100, 0.1, &mut rng), Err(Error::Size(_))));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(5, 6, 1, 0.1, 0).is_err());
        assert!(ModelParams::new(5, 3, 0, 0.1, 0).is_err());
        assert!(ModelParams::new(5, 3, 1, 1.5, 0).is_err());
        let calibrated = ModelParams::calibrated(60, 3, 4, 0.5, 1).unwrap();
        assert_eq!(calibrated.delta, Some(0.5));
    }

    #[test]
    fn mean_edge_count() {
        // C(30,3) * 0.01 = 40.6 edges on average.
        let trials = 10_000u64;
        let counts: Vec<f64> = (0..trials)
            .map(|s| {
                let params = ModelParams::new(30, 3, 3, 0.01, s).unwrap();
                sample_hypergraph(&params).unwrap().edge_count() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / trials as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        assert!((mean - 40.6).abs() <= 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn single_edge_marginal() {
        // Fixed edge {0,1,2} on n = 6, d = 3, p = 0.3 over 1e5 seeds.
        let trials = 100_000u64;
        let p = 0.3;
        let hits = (0..trials)
            .filter(|&s| {
                let params = ModelParams::new(6, 3, 1, p, s).unwrap();
                sample_hypergraph(&params).unwrap().contains_edge(&[0, 1, 2])
            })
            .count() as f64;
        let freq = hits / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() <= 3.0 * se, "freq {freq}");
    }

    proptest! {
        #[test]
        fn rank_unrank(n in 2usize..40, d in 2usize..6, seed in any::<u64>()) {
            prop_assume!(d <= n);
            let total = binomial(n as u64, d as u64).unwrap() as u64;
            let r = seed % total;
            let edge = unrank(r, n, d);
            prop_assert!(edge.windows(2).all(|w| w[0] < w[1]));
            prop_assert!((*edge.last().unwrap() as usize) < n);
            prop_assert_eq!(rank(&edge), r as u128);
        }

        #[test]
        fn mi_shape(n in 6usize..80, k in 1usize..6, d in 2usize..5) {
            prop_assume!(2 * k < n);
            let counts = CombinatorialCounts::new(n, k, d).unwrap();
            let m = counts.m;
            prop_assert!(m <= binomial(n as u64 - 1, d as u64 - 1).unwrap());
            prop_assert_eq!(counts.m_i[k], m);
            for i in 0..=k {
                prop_assert!(counts.m_i[i] >= m && counts.m_i[i] <= 2 * m);
                prop_assert!(counts.residual[i] >= 0);
                if i > 0 {
                    prop_assert!(counts.m_i[i] <= counts.m_i[i - 1]);
                }
            }
        }
    }
}
