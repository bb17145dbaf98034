//! Degree-preserving two-edge swaps that flip the existence of a size-`k`
//! dominating set while leaving a protected vertex region untouched.
//!
//! Four role vertices `u, u' ∈ S` and `v, v' ∉ S` take part. The *linked*
//! configuration holds the edges `(u, v, z…)` and `(u', v', w…)`; the
//! *crossed* configuration holds `(u, u', z…)` and `(v, v', w…)`. The
//! residual tuples `z…` and `w…` never move between edges: `z…` stays with
//! `u`, `w…` stays with the second edge. A forward swap goes from linked to
//! crossed and leaves `v` undominated when `(u, v, z…)` was its only link
//! to `S`. A backward swap goes from crossed to linked and dominates a lone
//! undominated `v`.
//!
//! No edge that meets the protected region is ever removed or added.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{usage, Error, Result};
use crate::hypercore::{Hypergraph, Instance, Vertex, VertexSet};
use crate::modelgen::{count_m, sample_hypergraph, ModelParams};
use crate::numeric::{binomial_signed, ln_binomial, ln_pow_one_minus, scaled};
use crate::rng::{trial_seed, SimRng};
use crate::solvers::{enumerate_dominating_sets, SolveReport, SolverConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtectedRegion {
    pub vertices: VertexSet,
    /// Exponent used when the region was sized as `round(n^c)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent_c: Option<f64>,
}

impl ProtectedRegion {
    pub fn none() -> Self {
        ProtectedRegion { vertices: VertexSet::empty(), exponent_c: None }
    }

    pub fn explicit(vertices: VertexSet) -> Self {
        ProtectedRegion { vertices, exponent_c: None }
    }

    /// `round(n^c)` for `0 < c < 1`.
    pub fn auto_size(n: usize, c: f64) -> Result<usize> {
        if !(c > 0.0 && c < 1.0) {
            return Err(usage(format!("exponent c = {c} outside (0, 1)")));
        }
        Ok(((n as f64).powf(c).round() as usize).min(n))
    }

    /// A uniformly random region of `round(n^c)` vertices.
    pub fn sample(n: usize, c: f64, rng: &mut SimRng) -> Result<Self> {
        let size = Self::auto_size(n, c)?;
        let mut region = Self::of_size(n, size, rng)?;
        region.exponent_c = Some(c);
        Ok(region)
    }

    /// A uniformly random region of exactly `size` vertices.
    pub fn of_size(n: usize, size: usize, rng: &mut SimRng) -> Result<Self> {
        if size > n {
            return Err(usage(format!("region of {size} vertices exceeds n = {n}")));
        }
        let mut all: Vec<Vertex> = (0..n as Vertex).collect();
        let (picked, _) = all.partial_shuffle(rng, size);
        Ok(Self::explicit(VertexSet::new(picked.iter().copied(), n)?))
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.contains(v)
    }

    pub fn touches(&self, edge: &[Vertex]) -> bool {
        edge.iter().any(|&v| self.contains(v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SwapDirection {
    /// Linked to crossed: destroys the dominating set.
    Forward,
    /// Crossed to linked: completes a quasi-dominating set.
    Backward,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SwapRoles {
    pub u: Vertex,
    pub v: Vertex,
    pub u_prime: Vertex,
    pub v_prime: Vertex,
    pub z: Vec<Vertex>,
    pub w: Vec<Vertex>,
}

fn edge_of(parts: &[Vertex], rest: &[Vertex]) -> Vec<Vertex> {
    let mut e: Vec<Vertex> = parts.iter().chain(rest).copied().collect();
    e.sort_unstable();
    e
}

fn without(edge: &[Vertex], drop: &[Vertex]) -> Vec<Vertex> {
    edge.iter().copied().filter(|x| !drop.contains(x)).collect()
}

impl SwapRoles {
    /// `(u, v, z…)` and `(u', v', w…)`.
    pub fn linked(&self) -> [Vec<Vertex>; 2] {
        [edge_of(&[self.u, self.v], &self.z), edge_of(&[self.u_prime, self.v_prime], &self.w)]
    }

    /// `(u, u', z…)` and `(v, v', w…)`.
    pub fn crossed(&self) -> [Vec<Vertex>; 2] {
        [edge_of(&[self.u, self.u_prime], &self.z), edge_of(&[self.v, self.v_prime], &self.w)]
    }

    pub fn role_vertices(&self) -> [Vertex; 4] {
        [self.u, self.v, self.u_prime, self.v_prime]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SwapRecord {
    pub direction: SwapDirection,
    pub removed: [Vec<Vertex>; 2],
    pub added: [Vec<Vertex>; 2],
    pub roles: SwapRoles,
    pub protected: VertexSet,
}

/// Outside vertex `v` whose only link to `S` is the single edge `edge`,
/// shared with `u`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pivot {
    pub v: Vertex,
    pub u: Vertex,
    pub edge: Vec<Vertex>,
}

/// Analytic pivot quantities for a `k`-set in `G_d(n, p)` with a protected
/// region of `round(n^c)` vertices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PivotDiagnostics {
    /// `k C(n-1-k, d-2) p (1-p)^{M-1}`.
    pub prob_av: f64,
    /// `1 - (1-p)^M`.
    pub prob_bv: f64,
    /// `1 - (1 - Pr(A_v)/Pr(B_v))^{n - n^c - k}`.
    pub prob_any_pivot: f64,
    /// `C(n-1-n^c, d-1) - C(n-k-1-n^c, d-1)`.
    pub m_prime: u128,
    /// `C(n-n^c, k-1) (1-(1-p)^{M'})^{n-n^c-k-1}`: bound on a swapped-in
    /// vertex extending to a new dominating set.
    pub new_set_bound: f64,
}

pub fn pivot_diagnostics(n: usize, d: usize, k: usize, p: f64, c: f64) -> Result<PivotDiagnostics> {
    if !(0.0..=1.0).contains(&p) {
        return Err(usage(format!("p = {p} outside [0, 1]")));
    }
    if k == 0 {
        return Err(usage("k must be positive"));
    }
    let h = ProtectedRegion::auto_size(n, c)?;
    if h + k + 1 > n {
        return Err(usage(format!("n = {n} leaves no room outside a region of {h} and k = {k}")));
    }
    let m = count_m(n, k, d)?;
    let ln_1mp = (-p).ln_1p();
    let links = ln_binomial((n - 1 - k) as u64, d as u64 - 2);
    let prob_av = if p == 0.0 || m == 0 {
        0.0
    } else {
        ((k as f64).ln() + links + p.ln() + scaled(m as f64 - 1.0, ln_1mp)).exp()
    };
    let prob_bv = -scaled(m as f64, ln_1mp).exp_m1();
    let ratio = if prob_bv == 0.0 { 0.0 } else { (prob_av / prob_bv).min(1.0) };
    let outside = (n - h - k) as f64;
    let prob_any_pivot = -scaled(outside, (-ratio).ln_1p()).exp_m1();

    let size = |top: i64| binomial_signed(top, d as u64 - 1).ok_or_else(|| Error::Size("M' overflows".into()));
    let m_prime = size(n as i64 - 1 - h as i64)? - size(n as i64 - k as i64 - 1 - h as i64)?;
    let ln_covered = crate::numeric::ln_one_minus_exp(ln_pow_one_minus(p, m_prime as f64));
    let new_set_bound = (ln_binomial((n - h) as u64, k as u64 - 1) + scaled((n - h - k - 1) as f64, ln_covered)).exp();
    Ok(PivotDiagnostics { prob_av, prob_bv, prob_any_pivot, m_prime, new_set_bound })
}

/// All pivots in ascending `v`. A pivot whose edge meets the protected
/// region is skipped because that edge may not be swapped.
pub fn pivot_candidates(g: &Hypergraph, s: &VertexSet, region: &ProtectedRegion) -> Result<Vec<Pivot>> {
    let mut out = Vec::new();
    for v in 0..g.n() as Vertex {
        if s.contains(v) || region.contains(v) {
            continue;
        }
        let mut linking = g.incident(v)?.iter().map(|&e| g.edge(e as usize)).filter(|e| e.iter().any(|&x| s.contains(x)));
        let (Some(edge), None) = (linking.next(), linking.next()) else {
            continue;
        };
        let mut members = edge.iter().copied().filter(|&x| s.contains(x));
        let (Some(u), None) = (members.next(), members.next()) else {
            continue;
        };
        if region.touches(edge) {
            continue;
        }
        out.push(Pivot { v, u, edge: edge.to_vec() });
    }
    Ok(out)
}

/// First pivot in ascending `v`, or a uniformly shuffled choice when `rng` is given.
pub fn find_pivot(g: &Hypergraph, s: &VertexSet, region: &ProtectedRegion, rng: Option<&mut SimRng>) -> Result<Pivot> {
    if !g.is_dominating(s)? {
        return Err(usage(format!("{s} does not dominate the instance")));
    }
    let mut candidates = pivot_candidates(g, s, region)?;
    if let Some(rng) = rng {
        candidates.shuffle(rng);
    }
    candidates
        .into_iter()
        .next()
        .ok_or_else(|| Error::NotFound("no vertex is linked to the set by a single edge".into()))
}

/// Applies a swap with fully specified roles. Backward with the roles of a
/// forward record restores the original edge set, and vice versa.
pub fn swap_with_roles(
    g: &Hypergraph,
    roles: &SwapRoles,
    direction: SwapDirection,
    region: &ProtectedRegion,
) -> Result<(Hypergraph, SwapRecord)> {
    if let Some(x) = roles.role_vertices().into_iter().find(|&x| region.contains(x)) {
        return Err(usage(format!("role vertex {x} lies in the protected region")));
    }
    let (removed, added) = match direction {
        SwapDirection::Forward => (roles.linked(), roles.crossed()),
        SwapDirection::Backward => (roles.crossed(), roles.linked()),
    };
    for e in removed.iter().chain(&added) {
        if region.touches(e) {
            return Err(usage(format!("edge {e:?} meets the protected region")));
        }
    }
    for e in &removed {
        if !g.contains_edge(e) {
            return Err(usage(format!("edge {e:?} is not present")));
        }
    }
    let next = g.replace_edges(&removed, &added)?;
    let record = SwapRecord { direction, removed, added, roles: roles.clone(), protected: region.vertices.clone() };
    Ok((next, record))
}

fn crossed_edges_fit(g: &Hypergraph, edges: &[Vec<Vertex>; 2]) -> bool {
    edges.iter().all(|e| e.len() == g.d() && e.windows(2).all(|w| w[0] < w[1]) && !g.contains_edge(e))
        && edges[0] != edges[1]
}

/// Destroys the dominating set `s`: picks a pivot `(v, u, e1)` and a partner
/// edge `e2` whose only member of `s` is some `u' ≠ u` next to an outside,
/// unprotected `v'`, then swaps linked to crossed.
///
/// Partners are tried in ascending `(v', u', e2)`; pivots in ascending `v`.
/// With `rng` both lists are shuffled first. A candidate whose new edges
/// already exist is skipped.
pub fn forward_swap(
    g: &Hypergraph,
    s: &VertexSet,
    region: &ProtectedRegion,
    rng: Option<&mut SimRng>,
) -> Result<(Hypergraph, SwapRecord)> {
    if !g.is_dominating(s)? {
        return Err(usage(format!("{s} does not dominate the instance")));
    }
    let mut pivots = pivot_candidates(g, s, region)?;
    if pivots.is_empty() {
        return Err(Error::NotFound("no pivot vertex outside the protected region".into()));
    }
    let mut partners: Vec<(Vertex, Vertex, &[Vertex])> = Vec::new();
    for e2 in g.edges() {
        if region.touches(e2) {
            continue;
        }
        let mut members = e2.iter().copied().filter(|&x| s.contains(x));
        let (Some(u_prime), None) = (members.next(), members.next()) else {
            continue;
        };
        for &v_prime in e2 {
            if v_prime != u_prime {
                partners.push((v_prime, u_prime, e2));
            }
        }
    }
    partners.sort();
    if let Some(rng) = rng {
        pivots.shuffle(rng);
        partners.shuffle(rng);
    }
    for pivot in &pivots {
        for &(v_prime, u_prime, e2) in &partners {
            if u_prime == pivot.u || v_prime == pivot.v || e2 == &pivot.edge[..] {
                continue;
            }
            let roles = SwapRoles {
                u: pivot.u,
                v: pivot.v,
                u_prime,
                v_prime,
                z: without(&pivot.edge, &[pivot.u, pivot.v]),
                w: without(e2, &[u_prime, v_prime]),
            };
            if !crossed_edges_fit(g, &roles.crossed()) {
                continue;
            }
            let (next, record) = swap_with_roles(g, &roles, SwapDirection::Forward, region)?;
            debug_assert!(!next.domination_status(s)?.dominated[pivot.v as usize]);
            return Ok((next, record));
        }
    }
    Err(Error::NotFound("no partner edge completes a valid swap".into()))
}

/// Completes the quasi-dominating set `s` whose lone undominated vertex is
/// `v`: needs an edge `e1` holding two members `u, u'` of `s` and an edge
/// `e2` joining `v` to an unprotected `v'`, then swaps crossed to linked.
pub fn backward_swap(
    g: &Hypergraph,
    s: &VertexSet,
    v: Vertex,
    region: &ProtectedRegion,
    rng: Option<&mut SimRng>,
) -> Result<(Hypergraph, SwapRecord)> {
    if g.is_quasi_dominating(s)? != Some(v) {
        return Err(usage(format!("{s} is not quasi-dominating with missed vertex {v}")));
    }
    if region.contains(v) {
        return Err(Error::NotFound(format!("undominated vertex {v} is protected")));
    }
    let mut cores: Vec<(Vertex, Vertex, &[Vertex])> = Vec::new();
    for e1 in g.edges() {
        if region.touches(e1) {
            continue;
        }
        let members: Vec<Vertex> = e1.iter().copied().filter(|&x| s.contains(x)).collect();
        for &u in &members {
            for &u_prime in &members {
                if u != u_prime {
                    cores.push((u, u_prime, e1));
                }
            }
        }
    }
    let mut spokes: Vec<(Vertex, &[Vertex])> = Vec::new();
    for &e in g.incident(v)? {
        let e2 = g.edge(e as usize);
        if region.touches(e2) {
            continue;
        }
        for &v_prime in e2 {
            if v_prime != v {
                spokes.push((v_prime, e2));
            }
        }
    }
    cores.sort();
    spokes.sort();
    if let Some(rng) = rng {
        cores.shuffle(rng);
        spokes.shuffle(rng);
    }
    if cores.is_empty() {
        return Err(Error::NotFound("no edge holds two members of the set".into()));
    }
    if spokes.is_empty() {
        return Err(Error::NotFound(format!("vertex {v} shares no unprotected edge with an outside vertex")));
    }
    for &(u, u_prime, e1) in &cores {
        for &(v_prime, e2) in &spokes {
            let roles = SwapRoles {
                u,
                v,
                u_prime,
                v_prime,
                z: without(e1, &[u, u_prime]),
                w: without(e2, &[v, v_prime]),
            };
            if !crossed_edges_fit(g, &roles.linked()) {
                continue;
            }
            let (next, record) = swap_with_roles(g, &roles, SwapDirection::Backward, region)?;
            debug_assert!(next.is_dominating(s)?);
            return Ok((next, record));
        }
    }
    Err(Error::NotFound("every candidate collides with an existing edge".into()))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AttemptStats {
    pub attempts: usize,
    pub no_solution: usize,
    pub several_solutions: usize,
    pub swap_unavailable: usize,
}

/// A sampled instance with a unique size-`k` dominating set, and its swapped twin.
#[derive(Clone, Debug, Serialize)]
pub struct SelfRefPair {
    #[serde(skip)]
    pub yes: Instance,
    #[serde(skip)]
    pub no: Instance,
    pub record: SwapRecord,
    pub dominating_set: VertexSet,
    pub yes_report: SolveReport,
    pub no_report: SolveReport,
    /// The swapped instance has no dominating set of size `k` at all.
    pub flipped: bool,
    pub attempt_index: usize,
    pub stats: AttemptStats,
}

enum Attempt {
    NoSolution,
    Several,
    NoSwap,
    Done(Box<SelfRefPair>),
}

fn attempt(params: &ModelParams, index: usize, region: &ProtectedRegion, cfg: &SolverConfig) -> Result<Attempt> {
    let seed = trial_seed(params.seed, index as u64);
    let yes_graph = sample_hypergraph(&params.with_seed(seed))?;
    let yes_report = enumerate_dominating_sets(&yes_graph, params.k, cfg)?;
    match yes_report.count {
        0 => return Ok(Attempt::NoSolution),
        1 => {}
        _ => return Ok(Attempt::Several),
    }
    let s = yes_report.witnesses[0].set.clone();
    let (no_graph, record) = match forward_swap(&yes_graph, &s, region, None) {
        Ok(done) => done,
        Err(Error::NotFound(_)) => return Ok(Attempt::NoSwap),
        Err(e) => return Err(e),
    };
    let no_report = enumerate_dominating_sets(&no_graph, params.k, cfg)?;
    let stamp = |graph| Instance { graph, p: Some(params.p), seed: Some(seed) };
    Ok(Attempt::Done(Box::new(SelfRefPair {
        yes: stamp(yes_graph),
        no: stamp(no_graph),
        flipped: no_report.count == 0,
        record,
        dominating_set: s,
        yes_report,
        no_report,
        attempt_index: index,
        stats: AttemptStats::default(),
    })))
}

/// Samples instances (attempt `a` uses seed `params.seed ^ a`) until one
/// has a unique dominating set of size `k` that admits a forward swap, then
/// re-solves the swapped instance. Attempts run in parallel batches; the
/// lowest successful index wins, so the result depends only on the inputs.
pub fn build_selfref_pair(
    params: &ModelParams,
    region: &ProtectedRegion,
    retry_budget: usize,
    cfg: &SolverConfig,
) -> Result<SelfRefPair> {
    params.validate()?;
    let inner = SolverConfig { parallel: false, witness_cap: 2, ..cfg.clone() };
    let batch = rayon::current_num_threads().max(1);
    let mut stats = AttemptStats::default();
    let mut start = 0;
    while start < retry_budget {
        let end = (start + batch).min(retry_budget);
        let outcomes: Vec<Result<Attempt>> = if cfg.parallel {
            (start..end).into_par_iter().map(|a| attempt(params, a, region, &inner)).collect()
        } else {
            (start..end).map(|a| attempt(params, a, region, &inner)).collect()
        };
        for outcome in outcomes {
            stats.attempts += 1;
            match outcome? {
                Attempt::NoSolution => stats.no_solution += 1,
                Attempt::Several => stats.several_solutions += 1,
                Attempt::NoSwap => stats.swap_unavailable += 1,
                Attempt::Done(mut pair) => {
                    pair.stats = stats;
                    return Ok(*pair);
                }
            }
        }
        start = end;
    }
    Err(Error::NotFound(format!(
        "no usable instance in {} attempts ({} without a solution, {} with several, {} without a swap)",
        stats.attempts, stats.no_solution, stats.several_solutions, stats.swap_unavailable
    )))
}
