//! Exhaustive oracles for dominating, quasi-dominating and vertex-cover
//! questions on desk-scale instances.
//!
//! Each vertex gets its closed neighborhood as a bitmask. The `k`-subsets
//! are walked in colex order and the union of neighborhoods is kept per
//! depth, so extending a prefix costs one OR per word. The subsets are split
//! into contiguous blocks by their largest element; blocks run in parallel
//! and are merged in block order, so counts and witness lists do not depend
//! on scheduling.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypercore::{Hypergraph, Vertex, VertexSet};
use crate::numeric::binomial;

pub const DEFAULT_BUDGET: u128 = 1_000_000_000;
/// Widest vertex set for which neighborhood bitmasks are built.
pub const DEFAULT_MAX_BITSET_WIDTH: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    /// Largest `C(n, k)` an enumeration may visit.
    pub budget: u128,
    pub witness_cap: usize,
    pub parallel: bool,
    pub max_bitset_width: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            budget: DEFAULT_BUDGET,
            witness_cap: 16,
            parallel: true,
            max_bitset_width: DEFAULT_MAX_BITSET_WIDTH,
        }
    }
}

impl SolverConfig {
    pub fn sequential() -> Self {
        SolverConfig { parallel: false, ..Self::default() }
    }

    pub fn with_witness_cap(mut self, cap: usize) -> Self {
        self.witness_cap = cap;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub set: VertexSet,
    /// The missed vertex, for quasi-dominating witnesses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub undominated: Option<Vertex>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub k: usize,
    pub count: u64,
    /// Lowest colex ranks first.
    pub witnesses: Vec<Witness>,
    pub unique: bool,
    pub subsets_examined: u64,
    pub elapsed_ms: f64,
}

/// Closed-neighborhood bitmasks, `words` 64-bit words per vertex.
#[derive(Clone, Debug)]
pub struct NeighborhoodTable {
    words: usize,
    masks: Vec<u64>,
    full: Vec<u64>,
}

impl NeighborhoodTable {
    pub fn new(g: &Hypergraph, max_width: usize) -> Result<Self> {
        let n = g.n();
        if n > max_width {
            return Err(Error::Size(format!("n = {n} exceeds the bitset width limit {max_width}")));
        }
        let words = n.div_ceil(64).max(1);
        let mut masks = vec![0u64; n * words];
        for u in 0..n {
            let row = &mut masks[u * words..(u + 1) * words];
            row[u / 64] |= 1 << (u % 64);
        }
        for edge in g.edges() {
            let mut edge_mask = vec![0u64; words];
            for &v in edge {
                edge_mask[v as usize / 64] |= 1 << (v % 64);
            }
            for &v in edge {
                let row = &mut masks[v as usize * words..(v as usize + 1) * words];
                for (r, e) in row.iter_mut().zip(&edge_mask) {
                    *r |= e;
                }
            }
        }
        let mut full = vec![u64::MAX; words];
        if !n.is_multiple_of(64) {
            full[words - 1] = (1u64 << (n % 64)) - 1;
        }
        if n == 0 {
            full[0] = 0;
        }
        Ok(NeighborhoodTable { words, masks, full })
    }

    fn row(&self, v: usize) -> &[u64] {
        &self.masks[v * self.words..(v + 1) * self.words]
    }

    fn uncovered(&self, union: &[u64]) -> u32 {
        union.iter().zip(&self.full).map(|(u, f)| (f & !u).count_ones()).sum()
    }

    fn first_uncovered(&self, union: &[u64]) -> Option<Vertex> {
        union.iter().zip(&self.full).enumerate().find_map(|(w, (u, f))| {
            let rest = f & !u;
            (rest != 0).then(|| (w * 64) as Vertex + rest.trailing_zeros())
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Target {
    Dominating,
    Quasi,
}

#[derive(Default)]
struct BlockTally {
    count: u64,
    examined: u64,
    witnesses: Vec<Witness>,
}

/// Visits every `k`-subset whose largest element is `top`, in colex order.
/// `visit` receives the chosen vertices (largest first) and their union.
fn walk_block(table: &NeighborhoodTable, k: usize, top: usize, visit: &mut dyn FnMut(&[u32], &[u64])) {
    let w = table.words;
    let mut chosen = vec![0u32; k];
    let mut unions = vec![0u64; k * w];
    chosen[0] = top as u32;
    unions[..w].copy_from_slice(table.row(top));
    if k == 1 {
        visit(&chosen, &unions[..w]);
        return;
    }
    descend(table, k, 1, &mut chosen, &mut unions, visit);
}

fn descend(
    table: &NeighborhoodTable,
    k: usize,
    depth: usize,
    chosen: &mut [u32],
    unions: &mut [u64],
    visit: &mut dyn FnMut(&[u32], &[u64]),
) {
    let w = table.words;
    let lowest = k - 1 - depth;
    let below = chosen[depth - 1] as usize;
    for c in lowest..below {
        chosen[depth] = c as u32;
        let (done, rest) = unions.split_at_mut(depth * w);
        let prev = &done[(depth - 1) * w..];
        let cur = &mut rest[..w];
        for ((dst, a), b) in cur.iter_mut().zip(prev).zip(table.row(c)) {
            *dst = a | b;
        }
        if depth + 1 == k {
            visit(chosen, &unions[depth * w..(depth + 1) * w]);
        } else {
            descend(table, k, depth + 1, chosen, unions, visit);
        }
    }
}

fn check_size(n: usize, k: usize, budget: u128) -> Result<u128> {
    if k < 1 || k > n {
        return Err(crate::error::usage(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let needed = binomial(n as u64, k as u64).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    Ok(needed)
}

fn enumerate(g: &Hypergraph, k: usize, cfg: &SolverConfig, target: Target) -> Result<SolveReport> {
    let started = Instant::now();
    check_size(g.n(), k, cfg.budget)?;
    let table = NeighborhoodTable::new(g, cfg.max_bitset_width)?;
    let cap = cfg.witness_cap;
    let run_block = |top: usize| -> BlockTally {
        let mut tally = BlockTally::default();
        walk_block(&table, k, top, &mut |chosen, union| {
            tally.examined += 1;
            let hit = match target {
                Target::Dominating => table.uncovered(union) == 0,
                Target::Quasi => table.uncovered(union) == 1,
            };
            if hit {
                tally.count += 1;
                if tally.witnesses.len() < cap {
                    let mut members = chosen.to_vec();
                    members.reverse();
                    tally.witnesses.push(Witness {
                        set: VertexSet::from_sorted(members),
                        undominated: match target {
                            Target::Dominating => None,
                            Target::Quasi => table.first_uncovered(union),
                        },
                    });
                }
            }
        });
        tally
    };
    let tops = k - 1..g.n();
    let blocks: Vec<BlockTally> = if cfg.parallel {
        tops.into_par_iter().map(run_block).collect()
    } else {
        tops.map(run_block).collect()
    };
    let mut count = 0;
    let mut examined = 0;
    let mut witnesses = Vec::new();
    for block in blocks {
        count += block.count;
        examined += block.examined;
        let room = cap.saturating_sub(witnesses.len());
        witnesses.extend(block.witnesses.into_iter().take(room));
    }
    Ok(SolveReport {
        k,
        count,
        witnesses,
        unique: count == 1,
        subsets_examined: examined,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Counts every dominating set of size exactly `k`.
pub fn enumerate_dominating_sets(g: &Hypergraph, k: usize, cfg: &SolverConfig) -> Result<SolveReport> {
    enumerate(g, k, cfg, Target::Dominating)
}

/// Counts every `k`-set leaving exactly one vertex undominated.
pub fn enumerate_quasi_dominating_sets(g: &Hypergraph, k: usize, cfg: &SolverConfig) -> Result<SolveReport> {
    enumerate(g, k, cfg, Target::Quasi)
}

/// Existence-only search. Prunes a prefix when some uncovered vertex has no
/// neighbor among the candidates still available below it. Returns the
/// lowest-colex dominating set, if any.
pub fn find_dominating_set(g: &Hypergraph, k: usize, cfg: &SolverConfig) -> Result<Option<VertexSet>> {
    check_size(g.n(), k, cfg.budget)?;
    let table = NeighborhoodTable::new(g, cfg.max_bitset_width)?;
    let w = table.words;
    // reach[c] = union of the neighborhoods of vertices 0..c.
    let mut reach = vec![0u64; (g.n() + 1) * w];
    for c in 0..g.n() {
        let (head, tail) = reach.split_at_mut((c + 1) * w);
        for ((dst, a), b) in tail[..w].iter_mut().zip(&head[c * w..]).zip(table.row(c)) {
            *dst = a | b;
        }
    }
    let mut chosen = vec![0u32; k];
    let mut unions = vec![0u64; k * w];
    for top in k - 1..g.n() {
        chosen[0] = top as u32;
        unions[..w].copy_from_slice(table.row(top));
        if search(&table, &reach, k, 1, &mut chosen, &mut unions) {
            let mut members = chosen.clone();
            members.reverse();
            return Ok(Some(VertexSet::from_sorted(members)));
        }
    }
    Ok(None)
}

fn search(table: &NeighborhoodTable, reach: &[u64], k: usize, depth: usize, chosen: &mut [u32], unions: &mut [u64]) -> bool {
    let w = table.words;
    let current = &unions[(depth - 1) * w..depth * w];
    if depth == k {
        return table.uncovered(current) == 0;
    }
    let below = chosen[depth - 1] as usize;
    // Everything still uncovered must be reachable from 0..below.
    let reachable = &reach[below * w..(below + 1) * w];
    let stuck = current.iter().zip(reachable).zip(&table.full).any(|((u, r), f)| f & !u & !r != 0);
    if stuck {
        return false;
    }
    for c in (k - 1 - depth)..below {
        chosen[depth] = c as u32;
        let (done, rest) = unions.split_at_mut(depth * w);
        for ((dst, a), b) in rest[..w].iter_mut().zip(&done[(depth - 1) * w..]).zip(table.row(c)) {
            *dst = a | b;
        }
        if search(table, reach, k, depth + 1, chosen, unions) {
            return true;
        }
    }
    false
}

/// True when every edge meets `s`.
pub fn is_vertex_cover(g: &Hypergraph, s: &VertexSet) -> Result<bool> {
    if let Some(&v) = s.as_slice().last() {
        if v as usize >= g.n() {
            return Err(crate::error::usage(format!("set member {v} out of range for n = {}", g.n())));
        }
    }
    Ok(g.edges().all(|e| e.iter().any(|&v| s.contains(v))))
}
