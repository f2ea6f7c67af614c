use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::bridges::{find_bridges, two_edge_component};
use super::{Config, SampleSpec};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, HammingGraph, Vertex};

/// Largest volume for which visit marks are kept in a dense array.
const DENSE_LIMIT: u64 = 1 << 24;

/// One cluster together with its cycle structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub source: Vertex,
    /// Cluster vertices in breadth-first discovery order (source first).
    pub vertices: Vec<Vertex>,
    pub open_edges: u64,
    pub surplus: u64,
    /// Vertices joined to the source by two edge-disjoint open paths,
    /// including the source itself.
    pub bridge_component_of_source: Vec<Vertex>,
}

impl ClusterReport {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }
}

/// Reusable per-thread buffers for cluster growth.
pub(crate) struct ClusterScratch {
    dense: Vec<(u32, u32)>,
    epoch: u32,
    sparse: HashMap<u64, u32>,
    use_dense: bool,
    pub queue: Vec<u64>,
    pub level: Vec<u32>,
    pub edges: Vec<(u32, u32)>,
}

impl ClusterScratch {
    pub fn new(graph: &HammingGraph) -> Self {
        let use_dense = graph.volume() <= DENSE_LIMIT;
        Self {
            dense: if use_dense { vec![(0, 0); graph.volume() as usize] } else { Vec::new() },
            epoch: 0,
            sparse: HashMap::new(),
            use_dense,
            queue: Vec::new(),
            level: Vec::new(),
            edges: Vec::new(),
        }
    }

    fn reset(&mut self) {
        self.queue.clear();
        self.level.clear();
        self.edges.clear();
        if self.use_dense {
            self.epoch = self.epoch.wrapping_add(1);
            if self.epoch == 0 {
                self.dense.iter_mut().for_each(|s| *s = (0, 0));
                self.epoch = 1;
            }
        } else {
            self.sparse.clear();
        }
    }

    #[inline]
    pub fn index_of(&self, v: u64) -> Option<u32> {
        if self.use_dense {
            let (e, i) = self.dense[v as usize];
            (e == self.epoch).then_some(i)
        } else {
            self.sparse.get(&v).copied()
        }
    }

    #[inline]
    fn insert(&mut self, v: u64, idx: u32) {
        if self.use_dense {
            self.dense[v as usize] = (self.epoch, idx);
        } else {
            self.sparse.insert(v, idx);
        }
    }
}

/// Breadth-first growth of the open cluster of `source` into `scratch`.
///
/// With `TRACK_EDGES`, every open edge inside the cluster is appended once
/// to `scratch.edges` as a pair of local (discovery-order) indices.
pub(crate) fn grow_into<const TRACK_EDGES: bool>(
    cfg: &Config<'_>,
    source: Vertex,
    cap: usize,
    scratch: &mut ClusterScratch,
) -> Result<()> {
    let g = cfg.graph;
    let d = g.dimension();
    let n = g.side() as u64;
    let pairs = n * (n - 1) / 2;
    let top = g.axis_weight(d - 1);
    scratch.reset();
    scratch.insert(source.0, 0);
    scratch.queue.push(source.0);
    scratch.level.push(0);
    let mut head = 0usize;
    while head < scratch.queue.len() {
        let v = scratch.queue[head];
        let cur = head as u32;
        let cur_level = scratch.level[head];
        head += 1;
        for axis in 0..d {
            let w = g.axis_weight(axis);
            let a = (v / w) % n;
            let line_base = v - a * w;
            let edge_base = (axis as u64 * top + (v / (w * n)) * w + v % w) * pairs;
            for b in 0..n {
                if b == a {
                    continue;
                }
                let u = line_base + b * w;
                let seen = scratch.index_of(u);
                if let Some(j) = seen {
                    // explored vertices already contributed this edge
                    if !TRACK_EDGES || j < cur {
                        continue;
                    }
                }
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let e = EdgeId(edge_base + lo * (2 * n - lo - 1) / 2 + (hi - lo - 1));
                if !cfg.is_open(e) {
                    continue;
                }
                let j = match seen {
                    Some(j) => j,
                    None => {
                        let j = scratch.queue.len() as u32;
                        if scratch.queue.len() >= cap {
                            return Err(Error::ClusterCap { cap });
                        }
                        scratch.insert(u, j);
                        scratch.queue.push(u);
                        scratch.level.push(cur_level + 1);
                        j
                    }
                };
                if TRACK_EDGES {
                    scratch.edges.push((cur, j));
                }
            }
        }
    }
    Ok(())
}

pub(crate) fn cluster_size(
    cfg: &Config<'_>,
    source: Vertex,
    cap: usize,
    scratch: &mut ClusterScratch,
) -> Result<usize> {
    grow_into::<false>(cfg, source, cap, scratch)?;
    Ok(scratch.queue.len())
}

pub(crate) fn report_from_scratch(source: Vertex, scratch: &ClusterScratch) -> ClusterReport {
    let size = scratch.queue.len();
    let open_edges = scratch.edges.len() as u64;
    let is_bridge = find_bridges(size, &scratch.edges);
    let comp = two_edge_component(size, &scratch.edges, &is_bridge, 0);
    ClusterReport {
        source,
        vertices: scratch.queue.iter().map(|&v| Vertex(v)).collect(),
        open_edges,
        surplus: open_edges + 1 - size as u64,
        bridge_component_of_source: comp
            .into_iter()
            .map(|i| Vertex(scratch.queue[i as usize]))
            .collect(),
    }
}

/// Grows the cluster of `source` in the configuration given by `spec`.
pub fn grow_cluster(spec: &SampleSpec<'_>, source: Vertex, cap: usize) -> Result<ClusterReport> {
    if !spec.graph.contains(source) {
        return Err(Error::invalid(format!("source rank {} outside the graph", source.0)));
    }
    let mut scratch = ClusterScratch::new(spec.graph);
    grow_into::<true>(&spec.config(), source, cap, &mut scratch)?;
    Ok(report_from_scratch(source, &scratch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percolation::edge_open;
    use std::collections::HashSet;

    #[test]
    fn closed_configuration_gives_singleton() {
        let g = HammingGraph::new(3, 5).unwrap();
        let spec = SampleSpec::new(&g, 0.0, 1, 1).unwrap();
        let r = grow_cluster(&spec, Vertex(17), 100).unwrap();
        assert_eq!(r.vertices, vec![Vertex(17)]);
        assert_eq!((r.open_edges, r.surplus), (0, 0));
        assert_eq!(r.bridge_component_of_source, vec![Vertex(17)]);
    }

    #[test]
    fn open_triangle() {
        let g = HammingGraph::complete(3).unwrap();
        let spec = SampleSpec::new(&g, 1.0, 0, 0).unwrap();
        let r = grow_cluster(&spec, Vertex(0), 100).unwrap();
        assert_eq!(r.size(), 3);
        assert_eq!((r.open_edges, r.surplus), (3, 1));
        assert_eq!(r.bridge_component_of_source.len(), 3);
    }

    #[test]
    fn cap_is_an_error_not_a_truncation() {
        let g = HammingGraph::new(2, 10).unwrap();
        let spec = SampleSpec::new(&g, 1.0, 0, 0).unwrap();
        assert_eq!(grow_cluster(&spec, Vertex(0), 50), Err(Error::ClusterCap { cap: 50 }));
        assert_eq!(grow_cluster(&spec, Vertex(0), 100).unwrap().size(), 100);
    }

    /// Naive reference: BFS with explicit edge queries and an edge set.
    fn naive(spec: &SampleSpec<'_>, source: Vertex) -> (HashSet<Vertex>, u64) {
        let g = spec.graph;
        let mut seen = HashSet::from([source]);
        let mut stack = vec![source];
        let mut edges = HashSet::new();
        while let Some(v) = stack.pop() {
            for w in g.neighbors(v).unwrap() {
                let e = g.edge_id(v, w).unwrap();
                if edge_open(spec, e) {
                    edges.insert(e);
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
        }
        (seen, edges.len() as u64)
    }

    #[test]
    fn matches_naive_reference() {
        for (d, n, p) in [(2, 10, 0.1), (3, 6, 0.08), (1, 12, 0.2), (2, 5, 0.4)] {
            let g = HammingGraph::new(d, n).unwrap();
            for rep in 0..200 {
                let spec = SampleSpec::new(&g, p, 77, rep).unwrap();
                let src = Vertex(rep % g.volume());
                let r = grow_cluster(&spec, src, 1 << 20).unwrap();
                let (set, edges) = naive(&spec, src);
                assert_eq!(r.vertices.iter().copied().collect::<HashSet<_>>(), set);
                assert_eq!(r.open_edges, edges);
                assert!(r.open_edges + 1 >= r.size() as u64);
                let comp: HashSet<_> = r.bridge_component_of_source.iter().collect();
                assert!(comp.contains(&src));
                assert!(comp.iter().all(|v| set.contains(v)));
            }
        }
    }

    #[test]
    fn surplus_zero_iff_tree() {
        let g = HammingGraph::new(2, 6).unwrap();
        for rep in 0..300 {
            let spec = SampleSpec::new(&g, 0.25, 3, rep).unwrap();
            let r = grow_cluster(&spec, Vertex(0), 1000).unwrap();
            let is_tree = r.open_edges == r.size() as u64 - 1;
            assert_eq!(r.surplus == 0, is_tree);
            if r.surplus == 0 {
                assert_eq!(r.bridge_component_of_source, vec![Vertex(0)]);
            }
        }
    }

    #[test]
    fn monotone_coupling_in_p() {
        let g = HammingGraph::new(2, 10).unwrap();
        for rep in 0..200 {
            let lo = grow_cluster(&SampleSpec::new(&g, 0.05, 9, rep).unwrap(), Vertex(0), 1000)
                .unwrap();
            let hi = grow_cluster(&SampleSpec::new(&g, 0.12, 9, rep).unwrap(), Vertex(0), 1000)
                .unwrap();
            let big: HashSet<_> = hi.vertices.iter().collect();
            assert!(lo.vertices.iter().all(|v| big.contains(v)));
        }
    }

    #[test]
    fn sparse_visit_map_agrees_with_dense() {
        // V = 2^25 forces the hash-map path
        let big = HammingGraph::new(25, 2).unwrap();
        let mut nontrivial = 0;
        for rep in 0..20 {
            let spec = SampleSpec::new(&big, 0.035, 4, rep).unwrap();
            let r = grow_cluster(&spec, Vertex(12345), 1 << 20).unwrap();
            let (set, edges) = naive(&spec, Vertex(12345));
            assert_eq!(r.size(), set.len());
            assert_eq!(r.open_edges, edges);
            nontrivial += (r.size() > 1) as usize;
        }
        assert!(nontrivial > 5);
    }
}
