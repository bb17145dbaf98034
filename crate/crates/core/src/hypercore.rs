//! Canonical d-uniform hypergraphs, domination predicates and the
//! hitting-set view.
//!
//! Vertices are dense ids `0..n`. Edges are stored as strictly ascending
//! vertex arrays, kept in lexicographic order without duplicates. A vertex
//! `v` is dominated by `S` when `v ∈ S` or some edge contains `v` and a
//! member of `S`; that is the same as `S ∩ S_v ≠ ∅` for the closed
//! neighborhood `S_v`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};

pub type Vertex = u32;

/// Sorted, duplicate-free set of vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<Vertex>);

impl VertexSet {
    pub fn empty() -> Self {
        VertexSet(Vec::new())
    }

    /// Builds a set of vertices below `n`, rejecting duplicates and
    /// out-of-range ids. Input order does not matter.
    pub fn new(members: impl IntoIterator<Item = Vertex>, n: usize) -> Result<Self> {
        let mut members: Vec<Vertex> = members.into_iter().collect();
        members.sort_unstable();
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(usage(format!("vertex {} listed twice", w[0])));
        }
        if let Some(&last) = members.last() {
            if last as usize >= n {
                return Err(usage(format!("vertex {last} out of range for n = {n}")));
            }
        }
        Ok(VertexSet(members))
    }

    /// Caller guarantees ascending, distinct members.
    pub(crate) fn from_sorted(members: Vec<Vertex>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        VertexSet(members)
    }

    pub fn all(n: usize) -> Self {
        VertexSet((0..n as Vertex).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0.iter().copied()
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        while let (Some(x), Some(y)) = (a.peek(), b.peek()) {
            match x.cmp(y) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn into_vec(self) -> Vec<Vertex> {
        self.0
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (idx, v) in self.0.iter().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Result of checking a candidate set against every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominationStatus {
    pub dominated: Vec<bool>,
    pub undominated: VertexSet,
}

impl DominationStatus {
    pub fn is_dominating(&self) -> bool {
        self.undominated.is_empty()
    }
}

/// The family `{S_u}` whose hitting sets are exactly the dominating sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HittingFamily {
    pub sets: Vec<VertexSet>,
}

impl HittingFamily {
    pub fn is_hit_by(&self, candidate: &VertexSet) -> bool {
        self.sets.iter().all(|s| s.intersects(candidate))
    }
}

/// A d-uniform hypergraph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    d: usize,
    /// Lexicographically sorted, each edge strictly ascending.
    edges: Vec<Box<[Vertex]>>,
    /// `incidence[v]` lists indices into `edges`, ascending.
    incidence: Vec<Vec<u32>>,
}

impl fmt::Debug for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hypergraph")
            .field("n", &self.n)
            .field("d", &self.d)
            .field("edges", &self.edges)
            .finish()
    }
}

impl Hypergraph {
    /// Validates and canonicalizes an edge list. Each edge may be given in
    /// any vertex order; duplicate edges are an error.
    pub fn new<I, E>(n: usize, d: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: Into<Vec<Vertex>>,
    {
        if d < 2 {
            return Err(usage(format!("edge arity d = {d} must be at least 2")));
        }
        let mut set = BTreeSet::new();
        for edge in edges {
            let mut edge: Vec<Vertex> = edge.into();
            edge.sort_unstable();
            if edge.len() != d {
                return Err(usage(format!("edge {edge:?} has {} vertices, expected {d}", edge.len())));
            }
            if edge.windows(2).any(|w| w[0] == w[1]) {
                return Err(usage(format!("edge {edge:?} repeats a vertex")));
            }
            if edge[d - 1] as usize >= n {
                return Err(usage(format!("edge {edge:?} leaves the vertex range 0..{n}")));
            }
            if !set.insert(edge.clone().into_boxed_slice()) {
                return Err(usage(format!("duplicate edge {edge:?}")));
            }
        }
        Ok(Self::from_canonical(n, d, set.into_iter().collect()))
    }

    pub fn edgeless(n: usize, d: usize) -> Result<Self> {
        Self::new(n, d, std::iter::empty::<Vec<Vertex>>())
    }

    /// Every d-subset of the vertex set.
    pub fn complete(n: usize, d: usize) -> Result<Self> {
        let mut edges = Vec::new();
        if d <= n {
            let mut combo: Vec<Vertex> = (0..d as Vertex).collect();
            loop {
                edges.push(combo.clone());
                // Lexicographic successor.
                let mut pos = d;
                while pos > 0 && combo[pos - 1] as usize == n - d + pos - 1 {
                    pos -= 1;
                }
                if pos == 0 {
                    break;
                }
                combo[pos - 1] += 1;
                for j in pos..d {
                    combo[j] = combo[j - 1] + 1;
                }
            }
        }
        Self::new(n, d, edges)
    }

    /// `edges` must already be sorted, canonical and duplicate-free.
    pub(crate) fn from_canonical(n: usize, d: usize, edges: Vec<Box<[Vertex]>>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        let mut incidence = vec![Vec::new(); n];
        for (idx, edge) in edges.iter().enumerate() {
            for &v in edge.iter() {
                incidence[v as usize].push(idx as u32);
            }
        }
        Hypergraph { n, d, edges, incidence }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[Vertex]> + '_ {
        self.edges.iter().map(|e| &e[..])
    }

    pub fn edge(&self, idx: usize) -> &[Vertex] {
        &self.edges[idx]
    }

    /// Indices of the edges containing `u`, in edge order.
    pub fn incident(&self, u: Vertex) -> Result<&[u32]> {
        self.check_vertex(u)?;
        Ok(&self.incidence[u as usize])
    }

    /// Membership test for an edge given in any vertex order.
    pub fn contains_edge(&self, edge: &[Vertex]) -> bool {
        let mut sorted = edge.to_vec();
        sorted.sort_unstable();
        self.edges.binary_search_by(|e| e[..].cmp(&sorted[..])).is_ok()
    }

    fn check_vertex(&self, u: Vertex) -> Result<()> {
        if (u as usize) < self.n {
            Ok(())
        } else {
            Err(usage(format!("vertex {u} out of range for n = {}", self.n)))
        }
    }

    fn check_set(&self, s: &VertexSet) -> Result<()> {
        match s.as_slice().last() {
            Some(&v) if v as usize >= self.n => {
                Err(usage(format!("set member {v} out of range for n = {}", self.n)))
            }
            _ => Ok(()),
        }
    }

    /// `{u}` together with every vertex sharing an edge with `u`.
    pub fn closed_neighborhood(&self, u: Vertex) -> Result<VertexSet> {
        self.check_vertex(u)?;
        let mut members: Vec<Vertex> = std::iter::once(u)
            .chain(self.incidence[u as usize].iter().flat_map(|&e| self.edges[e as usize].iter().copied()))
            .collect();
        members.sort_unstable();
        members.dedup();
        Ok(VertexSet::from_sorted(members))
    }

    /// Number of edges containing `u`.
    pub fn vertex_edge_degree(&self, u: Vertex) -> Result<usize> {
        self.check_vertex(u)?;
        Ok(self.incidence[u as usize].len())
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.incidence.iter().map(Vec::len).collect()
    }

    pub fn domination_status(&self, s: &VertexSet) -> Result<DominationStatus> {
        self.check_set(s)?;
        let mut dominated = vec![false; self.n];
        for u in s.iter() {
            dominated[u as usize] = true;
            for &e in &self.incidence[u as usize] {
                for &v in self.edges[e as usize].iter() {
                    dominated[v as usize] = true;
                }
            }
        }
        let undominated = VertexSet::from_sorted(
            (0..self.n as Vertex).filter(|&v| !dominated[v as usize]).collect(),
        );
        Ok(DominationStatus { dominated, undominated })
    }

    pub fn is_dominating(&self, s: &VertexSet) -> Result<bool> {
        Ok(self.domination_status(s)?.is_dominating())
    }

    /// The single undominated vertex when `S` misses exactly one.
    pub fn is_quasi_dominating(&self, s: &VertexSet) -> Result<Option<Vertex>> {
        let status = self.domination_status(s)?;
        Ok(match status.undominated.as_slice() {
            [v] => Some(*v),
            _ => None,
        })
    }

    pub fn to_hitting_instance(&self) -> HittingFamily {
        let sets = (0..self.n as Vertex)
            .map(|u| self.closed_neighborhood(u).expect("vertex in range"))
            .collect();
        HittingFamily { sets }
    }

    /// Removes `remove` and inserts `add`. Every removed edge must be
    /// present and every added edge absent afterwards.
    pub fn replace_edges(&self, remove: &[Vec<Vertex>], add: &[Vec<Vertex>]) -> Result<Hypergraph> {
        let mut set: BTreeSet<Box<[Vertex]>> = self.edges.iter().cloned().collect();
        for edge in remove {
            let mut e = edge.clone();
            e.sort_unstable();
            if !set.remove(&e[..]) {
                return Err(usage(format!("edge {e:?} is not present")));
            }
        }
        let all = set.into_iter().map(Vec::from).chain(add.iter().cloned());
        Hypergraph::new(self.n, self.d, all)
    }
}

/// On-disk instance: the hypergraph plus the generating parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub graph: Hypergraph,
    pub p: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    d: usize,
    edges: Vec<Vec<Vertex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl Instance {
    pub fn new(graph: Hypergraph) -> Self {
        Instance { graph, p: None, seed: None }
    }

    /// Canonical single-line JSON: `{"n":..,"d":..,"edges":[..],"p":..,"seed":..}`.
    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            n: self.graph.n,
            d: self.graph.d,
            edges: self.graph.edges().map(<[Vertex]>::to_vec).collect(),
            p: self.p,
            seed: self.seed,
        };
        serde_json::to_string(&file).expect("instance serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if let Some(p) = file.p {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Format(format!("p = {p} outside [0, 1]")));
            }
        }
        let graph = Hypergraph::new(file.n, file.d, file.edges).map_err(|e| Error::Format(e.to_string()))?;
        Ok(Instance { graph, p: file.p, seed: file.seed })
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}
