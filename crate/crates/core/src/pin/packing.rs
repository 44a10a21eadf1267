//! Edge-disjoint spanning tree packing of the replicated graph.
//!
//! Packing `k` trees is matroid partitioning over `k` copies of the graphic
//! matroid: edges are inserted one at a time along shortest augmenting paths
//! (Edmonds). The largest feasible `k` is found by doubling and bisection, and
//! can be certified against the partition bound of Nash-Williams and Tutte.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::ColumnLabel;
use crate::rational::{self, Rational};

use super::{Dsu, Graph, PinInstance};

/// Exhaustive partition enumeration is limited to this many vertices.
pub const MAX_PARTITION_VERTICES: usize = 10;

/// Edge-disjoint spanning trees, each a sorted list of column indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TreePacking {
    pub trees: Vec<Vec<usize>>,
}

impl TreePacking {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Total number of edge instances used.
    pub fn edges_used(&self) -> usize {
        self.trees.iter().map(Vec::len).sum()
    }

    pub fn labels(&self, pin: &PinInstance) -> Vec<Vec<ColumnLabel>> {
        self.trees
            .iter()
            .map(|t| t.iter().map(|&c| pin.space().label(c).clone()).collect())
            .collect()
    }

    /// Checks that every tree spans the graph and trees share no instance.
    pub fn validate(&self, pin: &PinInstance) -> Result<()> {
        let m = pin.terminals();
        let mut used = vec![false; pin.column_count()];
        for (t, tree) in self.trees.iter().enumerate() {
            if tree.len() != m - 1 {
                return Err(Error::Structure(format!(
                    "tree {t} has {} edges, expected {}",
                    tree.len(),
                    m - 1
                )));
            }
            let mut dsu = Dsu::new(m);
            for &c in tree {
                if c >= used.len() {
                    return Err(Error::Structure(format!("tree {t} uses unknown column {c}")));
                }
                if used[c] {
                    return Err(Error::Structure(format!(
                        "column {} appears in more than one tree",
                        pin.space().label(c)
                    )));
                }
                used[c] = true;
                let e = pin.columns()[c];
                if !dsu.union(e.u - 1, e.v - 1) {
                    return Err(Error::Structure(format!("tree {t} contains a cycle")));
                }
            }
        }
        Ok(())
    }
}

/// `k` forests over a fixed edge list, grown by matroid partitioning.
struct Forests<'a> {
    vertices: usize,
    ends: &'a [(usize, usize)],
    k: usize,
    owner: Vec<Option<usize>>,
}

impl<'a> Forests<'a> {
    fn new(vertices: usize, ends: &'a [(usize, usize)], k: usize) -> Self {
        Self {
            vertices,
            ends,
            k,
            owner: vec![None; ends.len()],
        }
    }

    fn adjacency(&self, forest: usize) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for (e, o) in self.owner.iter().enumerate() {
            if *o == Some(forest) {
                let (u, v) = self.ends[e];
                adj[u].push((v, e));
                adj[v].push((u, e));
            }
        }
        adj
    }

    /// Edges of the forest path from `u` to `v`, or `None` if disconnected.
    fn path(adj: &[Vec<(usize, usize)>], u: usize, v: usize) -> Option<Vec<usize>> {
        let mut via = vec![None; adj.len()];
        let mut seen = vec![false; adj.len()];
        seen[u] = true;
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            if x == v {
                break;
            }
            for &(y, e) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    via[y] = Some((x, e));
                    queue.push_back(y);
                }
            }
        }
        if !seen[v] {
            return None;
        }
        let mut out = Vec::new();
        let mut x = v;
        while let Some((p, e)) = via[x] {
            out.push(e);
            x = p;
        }
        Some(out)
    }

    /// Tries to place edge `start`, reshuffling along a shortest path.
    fn insert(&mut self, start: usize) -> bool {
        let adj: Vec<_> = (0..self.k).map(|f| self.adjacency(f)).collect();
        let mut label: Vec<Option<(usize, usize)>> = vec![None; self.ends.len()];
        let mut visited = vec![false; self.ends.len()];
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            let (u, v) = self.ends[x];
            for f in 0..self.k {
                if self.owner[x] == Some(f) {
                    continue;
                }
                match Self::path(&adj[f], u, v) {
                    None => {
                        self.augment(x, f, &label);
                        return true;
                    }
                    Some(cycle) => {
                        for y in cycle {
                            if !visited[y] {
                                visited[y] = true;
                                label[y] = Some((x, f));
                                queue.push_back(y);
                            }
                        }
                    }
                }
            }
        }
        false
    }

    fn augment(&mut self, end: usize, forest: usize, label: &[Option<(usize, usize)>]) {
        let mut cur = end;
        let mut target = forest;
        loop {
            self.owner[cur] = Some(target);
            match label[cur] {
                Some((prev, f)) => {
                    cur = prev;
                    target = f;
                }
                None => break,
            }
        }
    }

    fn trees(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (e, o) in self.owner.iter().enumerate() {
            if let Some(f) = o {
                out[*f].push(e);
            }
        }
        out
    }
}

/// Packs `k` spanning trees if possible.
fn try_pack(vertices: usize, ends: &[(usize, usize)], k: usize) -> Option<Vec<Vec<usize>>> {
    let target = k * (vertices - 1);
    if target > ends.len() {
        return None;
    }
    let mut forests = Forests::new(vertices, ends, k);
    let mut placed = 0;
    for e in 0..ends.len() {
        if forests.insert(e) {
            placed += 1;
            if placed == target {
                break;
            }
        }
        // Even placing every remaining edge would fall short.
        if placed + (ends.len() - e - 1) < target {
            return None;
        }
    }
    (placed == target).then(|| forests.trees())
}

/// A maximum set of edge-disjoint spanning trees of the replicated graph;
/// empty when the base graph is disconnected.
pub fn pack_spanning_trees(pin: &PinInstance) -> TreePacking {
    let m = pin.terminals();
    if !pin.graph().is_connected() {
        return TreePacking::default();
    }
    let ends: Vec<(usize, usize)> = pin.columns().iter().map(|c| (c.u - 1, c.v - 1)).collect();
    let upper = ends.len() / (m - 1);
    let mut best = try_pack(m, &ends, 1).unwrap_or_default();
    let mut lo = 1;
    let mut hi = upper + 1;
    let mut k = 2;
    while k <= upper {
        match try_pack(m, &ends, k) {
            Some(t) => {
                best = t;
                lo = k;
                k *= 2;
            }
            None => {
                hi = k;
                break;
            }
        }
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        match try_pack(m, &ends, mid) {
            Some(t) => {
                best = t;
                lo = mid;
            }
            None => hi = mid,
        }
    }
    TreePacking { trees: best }
}

/// Number of packed trees per replication.
pub fn packing_rate(graph: &Graph, n: usize) -> Result<Rational> {
    let pin = PinInstance::build(graph.clone(), n)?;
    Ok(rational::ratio(pack_spanning_trees(&pin).len() as i64, n as i64))
}

/// All set partitions of `{1..=m}` as block indices per vertex
/// (restricted growth strings).
pub fn all_partitions(m: usize) -> Result<Vec<Vec<usize>>> {
    if m == 0 || m > MAX_PARTITION_VERTICES {
        return Err(Error::Argument(format!(
            "partition enumeration supports 1..={MAX_PARTITION_VERTICES} vertices"
        )));
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; m];
    fn rec(i: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max + 1 {
            cur[i] = b;
            rec(i + 1, max.max(b), cur, out);
        }
    }
    rec(1, 0, &mut cur, &mut out);
    Ok(out)
}

fn crossing_and_parts(graph: &Graph, blocks: &[usize]) -> (usize, usize) {
    let parts = blocks.iter().max().map_or(0, |b| b + 1);
    let crossing = graph
        .edges()
        .iter()
        .filter(|&&(u, v)| blocks[u - 1] != blocks[v - 1])
        .count();
    (crossing, parts)
}

/// `⌊n·crossing / (parts - 1)⌋` for one partition; an upper bound on the
/// number of edge-disjoint spanning trees.
pub fn partition_bound(graph: &Graph, n: usize, blocks: &[usize]) -> Result<usize> {
    if blocks.len() != graph.vertex_count() {
        return Err(Error::Argument("partition must assign every vertex".into()));
    }
    let (crossing, parts) = crossing_and_parts(graph, blocks);
    if parts < 2 {
        return Err(Error::Argument("partition needs at least two blocks".into()));
    }
    Ok(n * crossing / (parts - 1))
}

/// Minimum partition bound over all partitions with at least two blocks.
/// Equal to the maximum packing size.
pub fn partition_bound_min(graph: &Graph, n: usize) -> Result<usize> {
    let mut best = usize::MAX;
    for p in all_partitions(graph.vertex_count())? {
        let (crossing, parts) = crossing_and_parts(graph, &p);
        if parts >= 2 {
            best = best.min(n * crossing / (parts - 1));
        }
    }
    if best == usize::MAX {
        return Err(Error::Argument("a single vertex has no proper partition".into()));
    }
    Ok(best)
}

/// `min crossing / (parts - 1)` over partitions: the packing rate as `n → ∞`.
pub fn spanning_tree_packing_rate_limit(graph: &Graph) -> Result<Rational> {
    let mut best: Option<Rational> = None;
    for p in all_partitions(graph.vertex_count())? {
        let (crossing, parts) = crossing_and_parts(graph, &p);
        if parts >= 2 {
            let r = rational::ratio(crossing as i64, parts as i64 - 1);
            if best.as_ref().map_or(true, |b| r < *b) {
                best = Some(r);
            }
        }
    }
    best.ok_or_else(|| Error::Argument("a single vertex has no proper partition".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pin::pin_capacity;
    use crate::rational::{int, ratio};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn k4_packs_two_trees() {
        let pin = PinInstance::complete(4, 1).unwrap();
        let p = pack_spanning_trees(&pin);
        assert_eq!(p.len(), 2);
        p.validate(&pin).unwrap();
        assert_eq!(p.edges_used(), 6);
    }

    #[test]
    fn k3_twice_exhausts_instances() {
        let pin = PinInstance::complete(3, 2).unwrap();
        let p = pack_spanning_trees(&pin);
        assert_eq!(p.len(), 3);
        p.validate(&pin).unwrap();
        assert_eq!(p.edges_used(), 6);
    }

    #[test]
    fn k3_once_packs_one() {
        let pin = PinInstance::complete(3, 1).unwrap();
        assert_eq!(pack_spanning_trees(&pin).len(), 1);
    }

    #[test]
    fn rates() {
        assert_eq!(packing_rate(&Graph::complete(5), 2).unwrap(), ratio(5, 2));
        assert_eq!(packing_rate(&Graph::complete(3), 2).unwrap(), ratio(3, 2));
        assert_eq!(packing_rate(&Graph::path(3), 1).unwrap(), int(1));
        assert_eq!(packing_rate(&Graph::complete(3), 1).unwrap(), int(1));
        let split = Graph::new(4, vec![(1, 2), (3, 4)]).unwrap();
        assert_eq!(packing_rate(&split, 3).unwrap(), int(0));
    }

    #[test]
    fn complete_graphs_with_even_nm_are_exhausted() {
        for (m, n) in [(2, 3), (4, 2), (5, 2), (6, 1), (6, 2)] {
            let pin = PinInstance::complete(m, n).unwrap();
            let p = pack_spanning_trees(&pin);
            p.validate(&pin).unwrap();
            assert_eq!(p.len(), n * m / 2);
            assert_eq!(p.edges_used(), pin.column_count());
        }
    }

    #[test]
    fn odd_nm_reports_floor() {
        let pin = PinInstance::complete(5, 1).unwrap();
        assert_eq!(pack_spanning_trees(&pin).len(), 2);
    }

    #[test]
    fn validate_rejects_bad_packings() {
        let pin = PinInstance::complete(3, 1).unwrap();
        let short = TreePacking { trees: vec![vec![0]] };
        assert!(matches!(short.validate(&pin), Err(Error::Structure(_))));
        let shared = TreePacking {
            trees: vec![vec![0, 1], vec![1, 2]],
        };
        assert!(matches!(shared.validate(&pin), Err(Error::Structure(_))));
        let doubled = PinInstance::complete(3, 2).unwrap();
        // Both copies of edge 1-2: a cycle of length two.
        let cyc = TreePacking { trees: vec![vec![0, 1]] };
        assert!(matches!(cyc.validate(&doubled), Err(Error::Structure(_))));
    }

    #[test]
    fn partitions_are_counted_by_bell_numbers() {
        let bell = [1, 2, 5, 15, 52, 203];
        for (m, b) in (1..=6).zip(bell) {
            assert_eq!(all_partitions(m).unwrap().len(), b);
        }
        assert!(all_partitions(11).is_err());
    }

    #[test]
    fn partition_bound_examples() {
        let k4 = Graph::complete(4);
        assert_eq!(partition_bound(&k4, 1, &[0, 1, 2, 3]).unwrap(), 2);
        assert_eq!(partition_bound(&k4, 1, &[0, 0, 1, 1]).unwrap(), 4);
        assert!(partition_bound(&k4, 1, &[0, 0, 0, 0]).is_err());
    }

    fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
        let m = rng.gen_range(2..=6);
        let count = rng.gen_range(0..=2 * m * (m - 1) / 2);
        let edges = (0..count)
            .map(|_| {
                let u = rng.gen_range(1..=m);
                let mut v = rng.gen_range(1..m);
                if v >= u {
                    v += 1;
                }
                (u, v)
            })
            .collect();
        Graph::new(m, edges).unwrap()
    }

    #[test]
    fn packing_meets_partition_bound_on_random_multigraphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..150 {
            let g = random_graph(&mut rng);
            let n = rng.gen_range(1..=3);
            let pin = PinInstance::build(g.clone(), n).unwrap();
            let p = pack_spanning_trees(&pin);
            p.validate(&pin).unwrap();
            assert_eq!(p.len(), partition_bound_min(&g, n).unwrap(), "{g:?} n={n}");
        }
    }

    #[test]
    fn rate_limit_matches_lp_capacity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..40 {
            let g = random_graph(&mut rng);
            let pin = PinInstance::build(g.clone(), 1).unwrap();
            assert_eq!(
                spanning_tree_packing_rate_limit(&g).unwrap(),
                pin_capacity(&pin).unwrap(),
                "{g:?}"
            );
        }
        assert_eq!(spanning_tree_packing_rate_limit(&Graph::complete(5)).unwrap(), ratio(5, 2));
    }
}
