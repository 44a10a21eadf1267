//! Pairwise independent network (PIN) models.
//!
//! Every edge of the base graph is replicated `n` times and each edge instance
//! carries an independent fair bit seen by both endpoints. Columns of every
//! matrix over a [`PinInstance`] are those edge instances, in canonical order:
//! edges sorted by `(min endpoint, max endpoint, insertion index)`, then copy
//! index `0..n`.

mod packing;
mod protocol;
mod rank_formulas;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitVec, ColumnLabel, ColumnSpace};
use crate::partition_lp::{self, EntropyTable};
use crate::rational::{self, Rational};
use crate::source_model::SubsetMask;

pub use packing::{
    all_partitions, pack_spanning_trees, packing_rate, partition_bound, partition_bound_min,
    spanning_tree_packing_rate_limit, TreePacking,
};
pub use protocol::{compile_tree_protocol, PinProtocol};
pub use rank_formulas::{cmi_rank, cmi_rank_lower_bound, cmi_rank_with, incidence_rank_inequality};

/// Undirected multigraph on vertices `1..=m`, no self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::Graph("a graph needs at least one vertex".into()));
        }
        if vertices > 31 {
            return Err(Error::Graph("at most 31 vertices are supported".into()));
        }
        for &(u, v) in &edges {
            if u == v {
                return Err(Error::Graph(format!("self-loop at vertex {u}")));
            }
            if u == 0 || v == 0 || u > vertices || v > vertices {
                return Err(Error::Graph(format!(
                    "edge ({u},{v}) has an endpoint outside 1..={vertices}"
                )));
            }
        }
        Ok(Self { vertices, edges })
    }

    pub fn complete(m: usize) -> Self {
        let edges = (1..=m)
            .flat_map(|u| (u + 1..=m).map(move |v| (u, v)))
            .collect();
        Self::new(m, edges).expect("complete graph is valid")
    }

    pub fn path(m: usize) -> Self {
        Self::new(m, (1..m).map(|u| (u, u + 1)).collect()).expect("path is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Simple complete graph: every pair joined by exactly one edge.
    pub fn is_complete(&self) -> bool {
        let m = self.vertices;
        if self.edges.len() != m * (m - 1) / 2 {
            return false;
        }
        let mut seen = vec![false; m * m];
        for &(u, v) in &self.edges {
            let (a, b) = (u.min(v) - 1, u.max(v) - 1);
            if seen[a * m + b] {
                return false;
            }
            seen[a * m + b] = true;
        }
        true
    }

    pub fn is_connected(&self) -> bool {
        let mut dsu = Dsu::new(self.vertices);
        for &(u, v) in &self.edges {
            dsu.union(u - 1, v - 1);
        }
        dsu.components == 1
    }

    /// Whitespace edge list: one `u v` pair per line, `#` comments. An
    /// optional first line holding a single integer fixes the vertex count;
    /// otherwise it is the largest endpoint.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| {
                        Error::Parse(format!("line {}: invalid vertex {t:?}", lineno + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match nums.as_slice() {
                [m] if declared.is_none() && edges.is_empty() => declared = Some(*m),
                [u, v] => edges.push((*u, *v)),
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: expected two vertex ids, got {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        let m = declared.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0));
        Self::new(m, edges)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            vertices: self.vertices,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

/// JSON graph format: `{"vertices": m, "edges": [[u, v], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphFile {
    pub fn into_graph(self) -> Result<Graph> {
        Graph::new(self.vertices, self.edges.into_iter().map(|[u, v]| (u, v)).collect())
    }
}

/// JSON form of a PIN instance: the graph plus the replication count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PinFile {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
    pub n: usize,
}

/// One column of a PIN instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeInstance {
    /// Position of the base edge in canonical order.
    pub edge: usize,
    pub u: usize,
    pub v: usize,
    pub copy: usize,
}

/// The `n`-fold PIN model on a graph.
#[derive(Debug, Clone)]
pub struct PinInstance {
    graph: Graph,
    n: usize,
    space: Arc<ColumnSpace>,
    columns: Vec<EdgeInstance>,
    incidence: Vec<BitVec>,
}

impl PartialEq for PinInstance {
    fn eq(&self, other: &Self) -> bool {
        self.graph == other.graph && self.n == other.n
    }
}

impl PinInstance {
    pub fn build(graph: Graph, n: usize) -> Result<Self> {
        let m = graph.vertex_count();
        if m < 2 {
            return Err(Error::Graph("a PIN model needs at least two terminals".into()));
        }
        if n == 0 {
            return Err(Error::Argument("replication count must be at least 1".into()));
        }
        let mut order: Vec<(usize, usize, usize)> = graph
            .edges()
            .iter()
            .enumerate()
            .map(|(k, &(u, v))| (u.min(v), u.max(v), k))
            .collect();
        order.sort_unstable();
        let mut columns = Vec::with_capacity(order.len() * n);
        for (edge, &(u, v, _)) in order.iter().enumerate() {
            for copy in 0..n {
                columns.push(EdgeInstance { edge, u, v, copy });
            }
        }
        let labels = columns
            .iter()
            .map(|c| ColumnLabel::new(format!("e{}:{}-{}#{}", c.edge, c.u, c.v, c.copy)))
            .collect();
        let space = Arc::new(ColumnSpace::new(labels)?);
        let p = columns.len();
        let mut incidence = vec![BitVec::zeros(p); m];
        for (k, c) in columns.iter().enumerate() {
            incidence[c.u - 1].set(k, true);
            incidence[c.v - 1].set(k, true);
        }
        Ok(Self {
            graph,
            n,
            space,
            columns,
            incidence,
        })
    }

    pub fn complete(m: usize, n: usize) -> Result<Self> {
        Self::build(Graph::complete(m), n)
    }

    pub fn from_file(file: PinFile) -> Result<Self> {
        let graph = GraphFile {
            vertices: file.vertices,
            edges: file.edges,
        }
        .into_graph()?;
        Self::build(graph, file.n)
    }

    pub fn to_file(&self) -> PinFile {
        let g = self.graph.to_file();
        PinFile {
            vertices: g.vertices,
            edges: g.edges,
            n: self.n,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn terminals(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> &Arc<ColumnSpace> {
        &self.space
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[EdgeInstance] {
        &self.columns
    }

    pub fn is_complete(&self) -> bool {
        self.graph.is_complete()
    }

    /// Column mask `E_i` of edge instances incident with terminal `i` (1-based).
    pub fn incidence(&self, i: usize) -> &BitVec {
        &self.incidence[i - 1]
    }

    pub fn incidence_labels(&self, i: usize) -> Vec<ColumnLabel> {
        self.incidence(i)
            .iter_ones()
            .map(|c| self.space.label(c).clone())
            .collect()
    }

    /// Edge instances incident with at least one terminal of `a`.
    pub fn incident_to(&self, a: SubsetMask) -> BitVec {
        let mut mask = BitVec::zeros(self.column_count());
        for i in a.members() {
            for c in self.incidence(i).iter_ones() {
                mask.set(c, true);
            }
        }
        mask
    }

    /// `H(X_A^n)`: the number of edge instances incident to `A`.
    pub fn subset_entropy(&self, a: SubsetMask) -> usize {
        self.incident_to(a).count_ones()
    }
}

/// Integer entropies `H(X_A^n)` for every subset `A`, ready for the LP.
pub fn pin_subset_entropies(pin: &PinInstance) -> EntropyTable {
    let m = pin.terminals();
    EntropyTable::from_fn(m, |a| rational::int(pin.subset_entropy(a) as i64))
}

/// Secret-key capacity per symbol, from the LP over the PIN entropies.
pub fn pin_capacity(pin: &PinInstance) -> Result<Rational> {
    let result = partition_lp::solve_capacity(&pin_subset_entropies(pin))?;
    Ok(result.capacity / rational::int(pin.n() as i64))
}

/// Communication rate for omniscience, `H(X_M) - I(X_M)` per symbol.
pub fn r_co(pin: &PinInstance) -> Result<Rational> {
    let table = pin_subset_entropies(pin);
    let result = partition_lp::solve_capacity(&table)?;
    Ok((result.joint_entropy - result.capacity) / rational::int(pin.n() as i64))
}

pub(crate) struct Dsu {
    parent: Vec<usize>,
    pub(crate) components: usize,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            components: n,
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        self.components -= 1;
        true
    }
}
