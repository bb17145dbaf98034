//! Seeded Monte-Carlo experiments that compare empirical frequencies with
//! the closed forms in [`crate::moments`], plus a versioned CSV writer.
//!
//! Trial `t` samples its instance from seed `master ^ t`, so trials are
//! independent of scheduling. Trials run in fixed-size chunks on the rayon
//! pool; chunk tallies are integers and are merged in chunk order.
//!
//! A record is enforced (`within-3se` or `outside`) only where the formula
//! is exact for the sampled model. Everything asymptotic is `report-only`.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{usage, Error, Result};
use crate::hypercore::{Hypergraph, VertexSet};
use crate::modelgen::{calibrate_p, sample_hypergraph, ModelParams};
use crate::moments::{
    ds_correlation_ratio, expected_count, lemma2_bounds, quasi_expected, second_moment, vc_correlation_ratio, Regime,
};
use crate::numeric::rel_diff;
use crate::rng::trial_seed;
use crate::solvers::{enumerate_dominating_sets, enumerate_quasi_dominating_sets, is_vertex_cover, SolverConfig};

pub const CSV_SCHEMA_VERSION: u32 = 1;
const CHUNK: u64 = 1024;
/// Relative slack under which an estimate counts as equal to its formula
/// even when the standard error is zero.
const EXACT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    #[serde(rename = "within-3se")]
    Within3Se,
    Outside,
    ReportOnly,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Within3Se => "within-3se",
            Verdict::Outside => "outside",
            Verdict::ReportOnly => "report-only",
        }
    }
}

/// Raw integer counts behind an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Tally {
    /// Per-trial values `x_t`: `Σ x_t` and `Σ x_t²`.
    Mean { sum: u128, sum_sq: u128 },
    /// Trials where both, the first, and the second event held.
    Ratio { both: u64, first: u64, second: u64 },
    /// No sampling behind the value.
    Analytic,
}

impl Tally {
    fn kind(&self) -> &'static str {
        match self {
            Tally::Mean { .. } => "mean",
            Tally::Ratio { .. } => "ratio",
            Tally::Analytic => "analytic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    /// Overlap `i` for pair correlations.
    pub overlap: Option<usize>,
    pub p: f64,
    pub delta: Option<f64>,
    pub seed: u64,
    pub trials: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub formula_value: Option<f64>,
    pub bound_lo: Option<f64>,
    pub bound_hi: Option<f64>,
    pub verdict: Verdict,
    pub tally: Tally,
}

impl EstimateRecord {
    fn new(name: &str, params: &ModelParams, trials: u64, tally: Tally) -> Self {
        EstimateRecord {
            name: name.to_string(),
            n: params.n,
            d: params.d,
            k: params.k,
            overlap: None,
            p: params.p,
            delta: params.delta,
            seed: params.seed,
            trials,
            estimate: f64::NAN,
            std_error: 0.0,
            formula_value: None,
            bound_lo: None,
            bound_hi: None,
            verdict: Verdict::ReportOnly,
            tally,
        }
    }

    /// Sets `estimate ± std_error` from a mean tally.
    fn with_mean(mut self) -> Self {
        if let Tally::Mean { sum, sum_sq } = self.tally {
            let (mean, se) = mean_and_se(sum, sum_sq, self.trials);
            self.estimate = mean;
            self.std_error = se;
        }
        self
    }

    fn compared_to(mut self, formula: f64, enforced: bool) -> Self {
        self.formula_value = Some(formula);
        self.verdict = if enforced { judge(self.estimate, self.std_error, formula) } else { Verdict::ReportOnly };
        self
    }

    fn bounds(mut self, lo: Option<f64>, hi: Option<f64>) -> Self {
        self.bound_lo = lo;
        self.bound_hi = hi;
        self
    }

    /// Normal-approximation interval `estimate ± 1.96 std_error`.
    pub fn ci95(&self) -> (f64, f64) {
        (self.estimate - 1.96 * self.std_error, self.estimate + 1.96 * self.std_error)
    }
}

/// Sample mean and its standard error `sqrt(s² / T)` with the unbiased `s²`.
pub fn mean_and_se(sum: u128, sum_sq: u128, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (f64::NAN, f64::NAN);
    }
    let t = trials as f64;
    let mean = sum as f64 / t;
    if trials == 1 {
        return (mean, 0.0);
    }
    let centered = (sum_sq as f64 - t * mean * mean).max(0.0);
    (mean, (centered / (t - 1.0) / t).sqrt())
}

/// `within-3se` when `|estimate - formula| <= 3 se`, or when the two agree
/// to relative `1e-12` (a zero-variance estimate of an exact value).
pub fn judge(estimate: f64, std_error: f64, formula: f64) -> Verdict {
    if (estimate - formula).abs() <= 3.0 * std_error || rel_diff(estimate, formula) <= EXACT_TOL {
        Verdict::Within3Se
    } else {
        Verdict::Outside
    }
}

/// Ratio `P(AB) / (P(A) P(B))` and its delta-method standard error under the
/// multinomial model of the three indicators.
pub fn ratio_and_se(both: u64, first: u64, second: u64, trials: u64) -> Result<(f64, f64)> {
    if first == 0 || second == 0 {
        return Err(Error::Degenerate("a marginal frequency is zero".into()));
    }
    let t = trials as f64;
    let (f11, fa, fb) = (both as f64 / t, first as f64 / t, second as f64 / t);
    let ratio = f11 / (fa * fb);
    if both == 0 {
        return Ok((0.0, f64::INFINITY));
    }
    let var_log = (1.0 / f11 - 1.0 / fa - 1.0 / fb + 2.0 * f11 / (fa * fb) - 1.0) / t;
    Ok((ratio, ratio * var_log.max(0.0).sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
}

/// Records from one experiment plus any gates not expressed by a verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Experiment {
    pub records: Vec<EstimateRecord>,
    pub gates: Vec<Gate>,
}

impl Experiment {
    pub fn record(&self, name: &str) -> Option<&EstimateRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    /// No enforced record is `outside` and every extra gate holds.
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.verdict != Verdict::Outside) && self.gates.iter().all(|g| g.passed)
    }
}

/// Per-trial outcome folded into `N` integer accumulators.
trait Accumulate<const N: usize>: Fn(&Hypergraph) -> Result<[u64; N]> + Sync {}
impl<const N: usize, F: Fn(&Hypergraph) -> Result<[u64; N]> + Sync> Accumulate<N> for F {}

/// Column sums of each per-trial vector and of its squares.
fn run_trials<const N: usize>(
    params: &ModelParams,
    trials: u64,
    parallel: bool,
    trial: impl Accumulate<N>,
) -> Result<([u128; N], [u128; N])> {
    params.validate()?;
    if trials == 0 {
        return Err(usage("at least one trial is required"));
    }
    let chunk = |c: u64| -> Result<([u128; N], [u128; N])> {
        let mut sums = [0u128; N];
        let mut squares = [0u128; N];
        for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
            let g = sample_hypergraph(&params.with_seed(trial_seed(params.seed, t)))?;
            for (j, x) in trial(&g)?.into_iter().enumerate() {
                sums[j] += x as u128;
                squares[j] += (x as u128) * (x as u128);
            }
        }
        Ok((sums, squares))
    };
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<_> = if parallel {
        (0..chunks).into_par_iter().map(chunk).collect::<Result<_>>()?
    } else {
        (0..chunks).map(chunk).collect::<Result<_>>()?
    };
    let mut sums = [0u128; N];
    let mut squares = [0u128; N];
    for (s, q) in parts {
        for j in 0..N {
            sums[j] += s[j];
            squares[j] += q[j];
        }
    }
    Ok((sums, squares))
}

fn trial_solver(cfg: &SolverConfig) -> SolverConfig {
    SolverConfig { parallel: false, witness_cap: 0, ..cfg.clone() }
}

/// Mean number of size-`k` dominating sets against `E[X]`; enforced at `d = 2`.
pub fn mc_expected_count(params: &ModelParams, trials: u64, cfg: &SolverConfig) -> Result<Experiment> {
    let inner = trial_solver(cfg);
    let (sums, squares) = run_trials(params, trials, cfg.parallel, |g: &Hypergraph| {
        Ok([enumerate_dominating_sets(g, params.k, &inner)?.count])
    })?;
    let formula = expected_count(params.n, params.d, params.k, params.p)?;
    let record = EstimateRecord::new("ex", params, trials, Tally::Mean { sum: sums[0], sum_sq: squares[0] })
        .with_mean()
        .compared_to(formula, params.d == 2);
    Ok(Experiment { records: vec![record], gates: Vec::new() })
}

/// Empirical `Pr(X > 0)` and `Pr(X = 1)` with the second-moment band and
/// the uniqueness bound attached for reference. The only enforced check is
/// Markov consistency: `Pr(X > 0) <= mean(X) + 3 se`.
pub fn mc_solvable_and_unique(params: &ModelParams, trials: u64, cfg: &SolverConfig) -> Result<Experiment> {
    let inner = trial_solver(cfg);
    let (sums, squares) = run_trials(params, trials, cfg.parallel, |g: &Hypergraph| {
        let count = enumerate_dominating_sets(g, params.k, &inner)?.count;
        Ok([count, (count > 0) as u64, (count == 1) as u64])
    })?;
    let formula = expected_count(params.n, params.d, params.k, params.p)?;
    let delta = params.delta.unwrap_or(formula);
    let band = lemma2_bounds(delta).ok();

    let ex = EstimateRecord::new("ex", params, trials, Tally::Mean { sum: sums[0], sum_sq: squares[0] })
        .with_mean()
        .compared_to(formula, params.d == 2);
    let solvable = EstimateRecord::new("pr_solvable", params, trials, Tally::Mean { sum: sums[1], sum_sq: squares[1] })
        .with_mean()
        .bounds(band.map(|b| b.lower), band.map(|b| b.upper));
    let unique = EstimateRecord::new("pr_unique", params, trials, Tally::Mean { sum: sums[2], sum_sq: squares[2] })
        .with_mean()
        .bounds(band.map(|b| b.uniqueness), None);

    // One-sided: the estimate is Pr(X > 0), the reference is mean(X).
    let mut markov = solvable.clone();
    markov.name = "markov".into();
    markov.bound_lo = None;
    markov.bound_hi = Some(ex.estimate + 3.0 * ex.std_error);
    markov.formula_value = Some(ex.estimate);
    markov.verdict = if solvable.estimate <= ex.estimate + 3.0 * ex.std_error {
        Verdict::Within3Se
    } else {
        Verdict::Outside
    };
    Ok(Experiment { records: vec![ex, solvable, unique, markov], gates: Vec::new() })
}

/// The fixed sets `{0..k-1}` and `{k-i..2k-i-1}` overlapping in `i`.
pub fn overlapping_pair(n: usize, k: usize, i: usize) -> Result<(VertexSet, VertexSet)> {
    if i > k || 2 * k - i > n {
        return Err(usage(format!("no two {k}-sets overlapping in {i} fit in n = {n}")));
    }
    let first = VertexSet::new(0..k as u32, n)?;
    let second = VertexSet::new((k - i) as u32..(2 * k - i) as u32, n)?;
    Ok((first, second))
}

/// Joint over product frequency of two fixed `k`-sets being solutions,
/// against the analytic ratio. The vertex-cover formula is exact and always
/// enforced. The dominating-set formula is enforced only at `d = 2` with
/// `i = k`; for `i < k` edges inside the union couple the two events.
pub fn mc_pair_correlation(params: &ModelParams, i: usize, regime: Regime, trials: u64, parallel: bool) -> Result<Experiment> {
    let (n, d, k, p) = (params.n, params.d, params.k, params.p);
    let (a, b) = overlapping_pair(n, k, i)?;
    let holds = |g: &Hypergraph, s: &VertexSet| match regime {
        Regime::DominatingSet => g.is_dominating(s),
        Regime::VertexCover => is_vertex_cover(g, s),
    };
    let (sums, _) = run_trials(params, trials, parallel, |g: &Hypergraph| {
        let (x, y) = (holds(g, &a)?, holds(g, &b)?);
        Ok([(x && y) as u64, x as u64, y as u64])
    })?;
    let (both, first, second) = (sums[0] as u64, sums[1] as u64, sums[2] as u64);
    let (ratio, se) = ratio_and_se(both, first, second, trials)?;
    let (formula, enforced) = match regime {
        Regime::VertexCover => (vc_correlation_ratio(n, k, i, p, d)?.value, true),
        Regime::DominatingSet => (ds_correlation_ratio(n, d, k, i, p)?.ratio.value, d == 2 && i == k),
    };
    let name = match regime {
        Regime::VertexCover => "pair_ratio_vc",
        Regime::DominatingSet => "pair_ratio_ds",
    };
    let mut record = EstimateRecord::new(name, params, trials, Tally::Ratio { both, first, second });
    record.overlap = Some(i);
    record.estimate = ratio;
    record.std_error = se;
    Ok(Experiment { records: vec![record.compared_to(formula, enforced)], gates: Vec::new() })
}

/// Mean number of quasi-dominating `k`-sets against `E[N]` (enforced at
/// `d = 2`), and the report-only frequency of a quasi-dominating set
/// existing among trials without a dominating set.
pub fn mc_quasi_frequency(params: &ModelParams, trials: u64, cfg: &SolverConfig) -> Result<Experiment> {
    let inner = trial_solver(cfg);
    let (sums, squares) = run_trials(params, trials, cfg.parallel, |g: &Hypergraph| {
        let quasi = enumerate_quasi_dominating_sets(g, params.k, &inner)?.count;
        let unsolvable = enumerate_dominating_sets(g, params.k, &inner)?.count == 0;
        Ok([quasi, unsolvable as u64, (unsolvable && quasi > 0) as u64])
    })?;
    let formula = quasi_expected(params.n, params.d, params.k, params.p)?.expected;
    let mean = EstimateRecord::new("quasi_mean", params, trials, Tally::Mean { sum: sums[0], sum_sq: squares[0] })
        .with_mean()
        .compared_to(formula, params.d == 2);

    let conditioned = sums[1] as u64;
    if conditioned == 0 {
        return Err(Error::Degenerate("no trial lacked a dominating set".into()));
    }
    let hits = sums[2];
    let conditional = EstimateRecord::new("quasi_given_unsolvable", params, conditioned, Tally::Mean { sum: hits, sum_sq: hits })
        .with_mean();
    Ok(Experiment { records: vec![mean, conditional], gates: Vec::new() })
}

/// One rung of a trend ladder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrendPoint {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub delta: f64,
}

/// Analytic `E[X²]/E[X]²` at the calibrated `p` of each rung, compared with
/// `1 + 1/delta`. The gate requires the excess over that line to be
/// non-increasing along the ladder.
pub fn ratio_trend(points: &[TrendPoint]) -> Result<Experiment> {
    let mut records = Vec::with_capacity(points.len());
    for pt in points {
        let cal = calibrate_p(pt.n, pt.d, pt.k, pt.delta, 1e-10)?;
        let report = second_moment(pt.n, pt.d, pt.k, cal.p)?;
        let params = ModelParams { n: pt.n, d: pt.d, k: pt.k, p: cal.p, delta: Some(pt.delta), seed: 0 };
        let mut record = EstimateRecord::new("trend_ratio", &params, 0, Tally::Analytic);
        record.estimate = report.ratio_to_square;
        records.push(record.compared_to(1.0 + 1.0 / pt.delta, false));
    }
    let excess: Vec<f64> = records.iter().map(|r| r.estimate - r.formula_value.unwrap_or(f64::NAN)).collect();
    let passed = excess.windows(2).all(|w| w[1] <= w[0]);
    Ok(Experiment { records, gates: vec![Gate { name: "trend_non_increasing".into(), passed }] })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    schema: u32,
    name: &'a str,
    n: usize,
    d: usize,
    k: usize,
    overlap: Option<usize>,
    p: f64,
    delta: Option<f64>,
    seed: u64,
    trials: u64,
    estimate: f64,
    std_error: f64,
    formula_value: Option<f64>,
    bound_lo: Option<f64>,
    bound_hi: Option<f64>,
    verdict: &'static str,
    tally: &'static str,
    t1: Option<String>,
    t2: Option<String>,
    t3: Option<String>,
}

impl<'a> From<&'a EstimateRecord> for CsvRow<'a> {
    fn from(r: &'a EstimateRecord) -> Self {
        let (t1, t2, t3) = match r.tally {
            Tally::Mean { sum, sum_sq } => (Some(sum.to_string()), Some(sum_sq.to_string()), None),
            Tally::Ratio { both, first, second } => {
                (Some(both.to_string()), Some(first.to_string()), Some(second.to_string()))
            }
            Tally::Analytic => (None, None, None),
        };
        CsvRow {
            schema: CSV_SCHEMA_VERSION,
            name: &r.name,
            n: r.n,
            d: r.d,
            k: r.k,
            overlap: r.overlap,
            p: r.p,
            delta: r.delta,
            seed: r.seed,
            trials: r.trials,
            estimate: r.estimate,
            std_error: r.std_error,
            formula_value: r.formula_value,
            bound_lo: r.bound_lo,
            bound_hi: r.bound_hi,
            verdict: r.verdict.as_str(),
            tally: r.tally.kind(),
            t1,
            t2,
            t3,
        }
    }
}

/// One header line, then one row per record. Columns `t1..t3` hold the raw
/// tally: `sum, sum_sq` for means and `both, first, second` for ratios.
pub fn write_csv<W: Write>(records: &[EstimateRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(CsvRow::from(r))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_csv_file(records: &[EstimateRecord], path: &Path) -> Result<()> {
    write_csv(records, std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_text(records: &[EstimateRecord]) -> String {
        let mut buf = Vec::new();
        write_csv(records, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    /// Recomputes an enforced verdict from the raw tally only.
    fn recomputed(r: &EstimateRecord) -> Verdict {
        let (estimate, se) = match r.tally {
            Tally::Mean { sum, sum_sq } => {
                let t = r.trials as f64;
                let mean = sum as f64 / t;
                let var = (sum_sq as f64 - t * mean * mean) / (t - 1.0);
                (mean, (var.max(0.0) / t).sqrt())
            }
            Tally::Ratio { both, first, second } => {
                let t = r.trials as f64;
                let (f11, fa, fb) = (both as f64 / t, first as f64 / t, second as f64 / t);
                let ratio = f11 / (fa * fb);
                // Delta method on ln f11 - ln fa - ln fb.
                let var = (1.0 / f11 - 1.0 / fa - 1.0 / fb + 2.0 * f11 / (fa * fb) - 1.0) / t;
                (ratio, ratio * var.sqrt())
            }
            Tally::Analytic => unreachable!(),
        };
        let formula = r.formula_value.unwrap();
        if (estimate - formula).abs() <= 3.0 * se || (estimate - formula).abs() <= 1e-12 * formula.abs() {
            Verdict::Within3Se
        } else {
            Verdict::Outside
        }
    }

    #[test]
    fn expected_count_d2() {
        let params = ModelParams::new(12, 2, 2, 0.3, 11).unwrap();
        let exp = mc_expected_count(&params, 10_000, &SolverConfig::default()).unwrap();
        let r = exp.record("ex").unwrap();
        assert_eq!(r.verdict, Verdict::Within3Se, "{r:?}");
        assert_eq!(recomputed(r), r.verdict);
    }

    #[test]
    fn expected_count_zero_p() {
        let params = ModelParams::new(8, 3, 3, 0.0, 1).unwrap();
        let r = mc_expected_count(&params, 50, &SolverConfig::default()).unwrap().records.remove(0);
        assert_eq!((r.estimate, r.formula_value), (0.0, Some(0.0)));
        assert_eq!(r.verdict, Verdict::ReportOnly);
        let params = ModelParams::new(8, 2, 3, 0.0, 1).unwrap();
        let r = mc_expected_count(&params, 50, &SolverConfig::default()).unwrap().records.remove(0);
        assert_eq!(r.verdict, Verdict::Within3Se);
    }

    #[test]
    fn expected_count_d3_is_report_only() {
        let params = ModelParams::calibrated(30, 3, 3, 0.5, 5).unwrap();
        let r = mc_expected_count(&params, 500, &SolverConfig::default()).unwrap().records.remove(0);
        assert_eq!(r.verdict, Verdict::ReportOnly);
        assert!(r.formula_value.is_some());
    }

    #[test]
    fn complete_graph_is_solvable() {
        let params = ModelParams::new(6, 3, 1, 1.0, 1).unwrap();
        let exp = mc_solvable_and_unique(&params, 20, &SolverConfig::default()).unwrap();
        assert_eq!(exp.record("pr_solvable").unwrap().estimate, 1.0);
        assert_eq!(exp.record("pr_unique").unwrap().estimate, 0.0);
        assert!(exp.passed());
    }

    #[test]
    fn solvability_band() {
        let params = ModelParams::calibrated(24, 3, 3, 0.5, 2).unwrap();
        let exp = mc_solvable_and_unique(&params, 300, &SolverConfig::default()).unwrap();
        let solvable = exp.record("pr_solvable").unwrap();
        assert_eq!((solvable.bound_lo, solvable.bound_hi), (Some(1.0 / 3.0), Some(0.5)));
        assert!((exp.record("pr_unique").unwrap().bound_lo.unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let markov = exp.record("markov").unwrap();
        let ex = exp.record("ex").unwrap();
        assert_eq!(markov.verdict == Verdict::Within3Se, solvable.estimate <= ex.estimate + 3.0 * ex.std_error);
        assert_eq!(markov.verdict, Verdict::Within3Se);
    }

    #[test]
    fn vc_pair_correlation() {
        let params = ModelParams::new(10, 2, 3, 0.1, 3).unwrap();
        let r = mc_pair_correlation(&params, 2, Regime::VertexCover, 100_000, true).unwrap().records.remove(0);
        assert!((r.formula_value.unwrap() - 4.857).abs() < 1e-3);
        assert_eq!(r.verdict, Verdict::Within3Se, "{r:?}");
        assert_eq!(recomputed(&r), r.verdict);
    }

    #[test]
    fn disjoint_cover_pair_is_independent() {
        // n - 2k + i = 0: no shared outside vertices.
        let params = ModelParams::new(6, 2, 3, 0.2, 3).unwrap();
        let r = mc_pair_correlation(&params, 0, Regime::VertexCover, 20_000, true).unwrap().records.remove(0);
        assert_eq!(r.formula_value, Some(1.0));
        assert_eq!(r.verdict, Verdict::Within3Se);
    }

    #[test]
    fn ds_pair_enforcement() {
        let params = ModelParams::new(12, 2, 2, 0.3, 4).unwrap();
        let same = mc_pair_correlation(&params, 2, Regime::DominatingSet, 20_000, true).unwrap().records.remove(0);
        assert_eq!(same.verdict, Verdict::Within3Se, "{same:?}");
        assert_eq!(recomputed(&same), same.verdict);
        let partial = mc_pair_correlation(&params, 1, Regime::DominatingSet, 2_000, true).unwrap().records.remove(0);
        assert_eq!(partial.verdict, Verdict::ReportOnly);
    }

    #[test]
    fn zero_marginal_is_degenerate() {
        let params = ModelParams::new(8, 2, 2, 0.0, 1).unwrap();
        assert!(matches!(
            mc_pair_correlation(&params, 1, Regime::DominatingSet, 100, false),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn quasi_d2() {
        let params = ModelParams::new(12, 2, 2, 0.3, 8).unwrap();
        let exp = mc_quasi_frequency(&params, 10_000, &SolverConfig::default()).unwrap();
        let mean = exp.record("quasi_mean").unwrap();
        assert_eq!(mean.verdict, Verdict::Within3Se, "{mean:?}");
        assert_eq!(recomputed(mean), mean.verdict);
        assert_eq!(exp.record("quasi_given_unsolvable").unwrap().verdict, Verdict::ReportOnly);
    }

    #[test]
    fn quasi_needs_unsolvable_trials() {
        let params = ModelParams::new(6, 3, 1, 1.0, 1).unwrap();
        assert!(matches!(mc_quasi_frequency(&params, 10, &SolverConfig::default()), Err(Error::Degenerate(_))));
    }

    #[test]
    fn trend_ladder() {
        let ladder: Vec<TrendPoint> = [50, 100, 200, 400]
            .iter()
            .map(|&n| TrendPoint { n, d: 3, k: crate::modelgen::choose_k(n).unwrap(), delta: 0.5 })
            .collect();
        let exp = ratio_trend(&ladder).unwrap();
        assert!(exp.passed());
        assert!(exp.records.iter().all(|r| r.formula_value == Some(3.0)));
        assert!(ratio_trend(&ladder[..1]).unwrap().passed());
    }

    #[test]
    fn se_shrinks_with_trials() {
        let params = ModelParams::new(12, 2, 2, 0.3, 21).unwrap();
        let se = |t| mc_expected_count(&params, t, &SolverConfig::default()).unwrap().records[0].std_error;
        let ratio = se(2_000) / se(8_000);
        assert!((ratio - 2.0).abs() <= 0.4, "ratio {ratio}");
    }

    #[test]
    fn csv_is_reproducible() {
        let params = ModelParams::new(10, 2, 2, 0.3, 77).unwrap();
        let run = |parallel| {
            let cfg = SolverConfig { parallel, ..SolverConfig::default() };
            let mut records = mc_solvable_and_unique(&params, 3_000, &cfg).unwrap().records;
            let small = ModelParams::new(6, 2, 2, 0.3, 77).unwrap();
            records.extend(mc_pair_correlation(&small, 1, Regime::VertexCover, 3_000, parallel).unwrap().records);
            csv_text(&records)
        };
        let text = run(true);
        assert_eq!(text, run(true));
        assert_eq!(text, run(false));
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "schema,name,n,d,k,overlap,p,delta,seed,trials,estimate,std_error,formula_value,bound_lo,bound_hi,verdict,tally,t1,t2,t3"
        );
        assert!(lines.all(|l| l.starts_with("1,")));
    }

    #[test]
    fn ratio_se_matches_simulated_spread() {
        let (ratio, se) = ratio_and_se(250, 500, 500, 1000).unwrap();
        assert!((ratio - 1.0).abs() < 1e-12);
        // Var(ln r) = (1/f11 - 1/fa - 1/fb + 2 f11/(fa fb) - 1)/T = (4 - 2 - 2 + 2 - 1)/1000.
        assert!((se - (1.0f64 / 1000.0).sqrt()).abs() < 1e-12);
    }
}
