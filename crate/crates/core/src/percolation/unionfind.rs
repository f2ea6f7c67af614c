use serde::{Deserialize, Serialize};

use super::{Caps, Config, SampleSpec};
use crate::error::Result;
use crate::graph::{EdgeId, Vertex};

/// Disjoint sets with union by size, path halving, and an edge counter per set.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    edges: Vec<u64>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        Self {
            parent: (0..len as u32).collect(),
            size: vec![1; len],
            edges: vec![0; len],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    /// Adds the edge `{a, b}`, merging their sets if needed.
    pub fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            self.edges[ra as usize] += 1;
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.edges[ra as usize] += self.edges[rb as usize] + 1;
    }

    pub fn set_size(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSummary {
    /// Smallest rank in the cluster; identifies it.
    pub min_rank: u64,
    pub size: u64,
    pub open_edges: u64,
    pub surplus: u64,
}

/// Partition of all vertices into open clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterPartition {
    /// Index into `clusters` for every vertex rank.
    pub label: Vec<u32>,
    /// Clusters ordered by `min_rank`.
    pub clusters: Vec<ClusterSummary>,
    /// Index of the largest cluster; ties go to the lowest `min_rank`.
    pub largest: usize,
}

impl ClusterPartition {
    pub fn cluster_of(&self, v: Vertex) -> &ClusterSummary {
        &self.clusters[self.label[v.0 as usize] as usize]
    }

    pub fn largest_size(&self) -> u64 {
        self.clusters[self.largest].size
    }
}

/// Union-find over every edge of the configuration.
pub fn full_config_clusters(spec: &SampleSpec<'_>, caps: &Caps) -> Result<ClusterPartition> {
    caps.check_volume(spec.graph)?;
    Ok(partition(&spec.config()))
}

pub(crate) fn partition(cfg: &Config<'_>) -> ClusterPartition {
    let g = cfg.graph;
    let volume = g.volume() as usize;
    let n = g.side() as u64;
    let d = g.dimension();
    let pairs = n * (n - 1) / 2;
    let top = g.axis_weight(d - 1);
    let mut uf = UnionFind::new(volume);
    for v in 0..volume as u64 {
        for axis in 0..d {
            let w = g.axis_weight(axis);
            let a = (v / w) % n;
            let edge_base = (axis as u64 * top + (v / (w * n)) * w + v % w) * pairs;
            // each edge once, from its endpoint with the smaller digit
            for b in (a + 1)..n {
                let e = EdgeId(edge_base + a * (2 * n - a - 1) / 2 + (b - a - 1));
                if cfg.is_open(e) {
                    uf.union(v as u32, (v + (b - a) * w) as u32);
                }
            }
        }
    }
    let mut label = vec![u32::MAX; volume];
    let mut root_label = vec![u32::MAX; volume];
    let mut clusters = Vec::new();
    for v in 0..volume as u32 {
        let r = uf.find(v) as usize;
        if root_label[r] == u32::MAX {
            root_label[r] = clusters.len() as u32;
            let size = uf.size[r] as u64;
            let open_edges = uf.edges[r];
            clusters.push(ClusterSummary {
                min_rank: v as u64,
                size,
                open_edges,
                surplus: open_edges + 1 - size,
            });
        }
        label[v as usize] = root_label[r];
    }
    let mut largest = 0;
    for (i, c) in clusters.iter().enumerate() {
        if c.size > clusters[largest].size {
            largest = i;
        }
    }
    ClusterPartition { label, clusters, largest }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::graph::HammingGraph;
    use crate::percolation::grow_cluster;

    #[test]
    fn extremes() {
        let g = HammingGraph::new(2, 5).unwrap();
        let caps = Caps::default();
        let none = full_config_clusters(&SampleSpec::new(&g, 0.0, 1, 0).unwrap(), &caps).unwrap();
        assert_eq!(none.clusters.len(), 25);
        assert!(none.clusters.iter().all(|c| c.size == 1 && c.surplus == 0));
        assert_eq!(none.largest, 0);
        let all = full_config_clusters(&SampleSpec::new(&g, 1.0, 1, 0).unwrap(), &caps).unwrap();
        assert_eq!(all.clusters.len(), 1);
        assert_eq!(all.largest_size(), 25);
        assert_eq!(all.clusters[0].open_edges, g.edge_count());
    }

    #[test]
    fn volume_cap() {
        let g = HammingGraph::new(3, 10).unwrap();
        let caps = Caps { cluster: 10, volume: 999 };
        let spec = SampleSpec::new(&g, 0.1, 1, 0).unwrap();
        assert_eq!(
            full_config_clusters(&spec, &caps),
            Err(Error::VolumeCap { volume: 1000, cap: 999 })
        );
    }

    #[test]
    fn agrees_with_cluster_growth() {
        let g = HammingGraph::new(2, 10).unwrap();
        let caps = Caps::default();
        for &p in &[0.05, 0.1, 0.2] {
            for rep in 0..100u64 {
                let spec = SampleSpec::new(&g, p, 31, rep).unwrap();
                let part = full_config_clusters(&spec, &caps).unwrap();
                let src = Vertex((rep * 37) % g.volume());
                let r = grow_cluster(&spec, src, 1000).unwrap();
                let c = part.cluster_of(src);
                assert_eq!(c.size, r.size() as u64);
                assert_eq!(c.surplus, r.surplus);
                let l = part.label[src.0 as usize];
                assert!(r.vertices.iter().all(|v| part.label[v.0 as usize] == l));
            }
        }
    }

    #[test]
    fn largest_tie_breaks_on_lowest_rank() {
        let g = HammingGraph::complete(4).unwrap();
        // search a configuration with two clusters of size two
        for rep in 0..500u64 {
            let spec = SampleSpec::new(&g, 0.3, 8, rep).unwrap();
            let part = full_config_clusters(&spec, &Caps::default()).unwrap();
            let twos: Vec<_> = part.clusters.iter().filter(|c| c.size == 2).collect();
            if twos.len() == 2 {
                assert_eq!(part.clusters[part.largest].min_rank, 0);
                return;
            }
        }
        panic!("no tied configuration found");
    }
}
