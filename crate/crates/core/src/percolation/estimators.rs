use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bridges::{find_bridges, two_edge_component};
use super::cluster::{cluster_size, grow_into, ClusterScratch};
use super::unionfind::partition;
use super::{check_probability, Caps, Config};
use crate::error::{Error, Result};
use crate::graph::{HammingGraph, Vertex};
use crate::prf::ReplicateKey;
use crate::scalar::Scalar;
use crate::stats::{EstimateWithError, Moments};

type FieldAcc = (ClusterScratch, Vec<u64>, Vec<(u64, u64)>);

pub(crate) fn check_reps(reps: u64) -> Result<()> {
    if reps < 2 {
        return Err(Error::invalid(format!("need at least 2 replicates, got {reps}")));
    }
    Ok(())
}

/// Runs `f` once per replicate index in parallel and returns the results in
/// replicate order, so any later reduction is independent of scheduling.
pub(crate) fn per_replicate<T, F>(graph: &HammingGraph, reps: Range<u64>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ClusterScratch, u64) -> Result<T> + Sync + Send,
{
    reps.into_par_iter()
        .map_init(|| ClusterScratch::new(graph), |s, r| f(s, r))
        .collect()
}

/// Origin cluster sizes for the given replicate indices.
pub(crate) fn cluster_sizes(
    graph: &HammingGraph,
    p: f64,
    seed: u64,
    reps: Range<u64>,
    cap: usize,
) -> Result<Vec<u64>> {
    check_probability(p)?;
    per_replicate(graph, reps, |s, r| {
        let cfg = Config::new(graph, p, ReplicateKey::new(seed, r));
        cluster_size(&cfg, graph.origin(), cap, s).map(|k| k as u64)
    })
}

pub(crate) fn estimate_of(samples: impl IntoIterator<Item = f64>) -> EstimateWithError {
    let mut m = Moments::default();
    for x in samples {
        m.push(x);
    }
    m.estimate()
}

/// Mean size of the origin's cluster over replicates `0..reps`.
pub fn estimate_chi(
    graph: &HammingGraph,
    p: f64,
    reps: u64,
    seed: u64,
    caps: &Caps,
) -> Result<EstimateWithError> {
    check_reps(reps)?;
    let sizes = cluster_sizes(graph, p, seed, 0..reps, caps.cluster)?;
    Ok(estimate_of(sizes.into_iter().map(|k| k as f64)))
}

/// Estimated two-point function: entry `z` is the fraction of replicates in
/// which `z` lies in the origin's cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointField {
    pub values: Vec<f64>,
    pub replicates: u64,
    /// Origin cluster size over the same replicates; its mean equals the
    /// sum of `values`.
    pub chi: EstimateWithError,
}

impl TwoPointField {
    /// Standard error of `values[z]` as a Bernoulli mean.
    pub fn standard_error(&self, z: usize) -> f64 {
        let q = self.values[z];
        (q * (1.0 - q) / (self.replicates - 1) as f64).sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

pub fn estimate_two_point_field(
    graph: &HammingGraph,
    p: f64,
    reps: u64,
    seed: u64,
    caps: &Caps,
) -> Result<TwoPointField> {
    check_reps(reps)?;
    check_probability(p)?;
    caps.check_volume(graph)?;
    let (counts, sizes) = hit_counts(graph, p, seed, reps, caps.cluster, |_, _| true)?;
    let values = counts.iter().map(|&c| c as f64 / reps as f64).collect();
    Ok(TwoPointField {
        values,
        replicates: reps,
        chi: estimate_of(sizes.into_iter().map(|k| k as f64)),
    })
}

/// Per-vertex counts of replicates in which the origin cluster contains the
/// vertex and `keep(level, r)` holds for its breadth-first level, together
/// with the per-replicate cluster sizes. Integer counts make the result
/// independent of how replicates are split across threads.
fn hit_counts(
    graph: &HammingGraph,
    p: f64,
    seed: u64,
    reps: u64,
    cap: usize,
    keep: impl Fn(u32, u64) -> bool + Sync,
) -> Result<(Vec<u64>, Vec<u64>)> {
    let volume = graph.volume() as usize;
    let (counts, mut sizes) = (0..reps)
        .into_par_iter()
        .fold(
            || Ok((ClusterScratch::new(graph), vec![0u64; volume], Vec::new())),
            |acc: Result<FieldAcc>, r| {
                let (mut s, mut counts, mut sizes) = acc?;
                let cfg = Config::new(graph, p, ReplicateKey::new(seed, r));
                grow_into::<false>(&cfg, graph.origin(), cap, &mut s)?;
                for (i, &v) in s.queue.iter().enumerate() {
                    if keep(s.level[i], r) {
                        counts[v as usize] += 1;
                    }
                }
                sizes.push((r, s.queue.len() as u64));
                Ok((s, counts, sizes))
            },
        )
        .map(|acc| acc.map(|(_, c, s)| (c, s)))
        .try_reduce(
            || (vec![0u64; volume], Vec::new()),
            |(mut a, mut sa), (b, sb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                sa.extend(sb);
                Ok((a, sa))
            },
        )?;
    sizes.sort_unstable();
    Ok((counts, sizes.into_iter().map(|(_, k)| k).collect()))
}

/// Mean number of vertices other than the origin that are doubly connected
/// to it.
pub fn estimate_pi0(
    graph: &HammingGraph,
    p: f64,
    reps: u64,
    seed: u64,
    caps: &Caps,
) -> Result<EstimateWithError> {
    check_reps(reps)?;
    check_probability(p)?;
    let counts = per_replicate(graph, 0..reps, |s, r| {
        let cfg = Config::new(graph, p, ReplicateKey::new(seed, r));
        doubly_connected_count(&cfg, graph.origin(), caps.cluster, s)
    })?;
    Ok(estimate_of(counts.into_iter().map(|k| k as f64)))
}

/// Largest edge count accepted by [`pi0_exhaustive`].
pub const MAX_EXHAUSTIVE_EDGES: u64 = 22;

/// `sum_{x != 0} P(0 <=> x)` by enumerating every configuration.
pub fn pi0_exhaustive<S: Scalar>(graph: &HammingGraph, p: &S) -> Result<S> {
    let edges = graph.edge_count();
    if edges > MAX_EXHAUSTIVE_EDGES {
        return Err(Error::invalid(format!(
            "{edges} edges exceed the enumeration limit {MAX_EXHAUSTIVE_EDGES}"
        )));
    }
    let e = edges as usize;
    let volume = graph.volume() as usize;
    // doubly connected totals by number of open edges
    let mut tally = vec![0u64; e + 1];
    let mut local = vec![u32::MAX; volume];
    for mask in 0u64..1 << e {
        let mut queue = vec![graph.origin()];
        local[0] = 0;
        let mut list: Vec<(u32, u32)> = Vec::new();
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for w in graph.neighbors(x)? {
                if mask >> graph.edge_id(x, w)?.0 & 1 == 0 {
                    continue;
                }
                let wi = w.0 as usize;
                if local[wi] == u32::MAX {
                    local[wi] = queue.len() as u32;
                    queue.push(w);
                }
                if x.0 < w.0 {
                    list.push((local[x.0 as usize], local[wi]));
                }
            }
        }
        let bridges = find_bridges(queue.len(), &list);
        tally[mask.count_ones() as usize] += two_edge_component(queue.len(), &list, &bridges, 0).len() as u64 - 1;
        for x in queue {
            local[x.0 as usize] = u32::MAX;
        }
    }
    let q = S::one() - p.clone();
    let mut total = S::zero();
    for (k, &c) in tally.iter().enumerate() {
        if c > 0 {
            total = total + S::from_count(c as usize) * p.pow_usize(k) * q.pow_usize(e - k);
        }
    }
    Ok(total)
}

pub(crate) fn doubly_connected_count(
    cfg: &Config<'_>,
    source: Vertex,
    cap: usize,
    s: &mut ClusterScratch,
) -> Result<u64> {
    grow_into::<true>(cfg, source, cap, s)?;
    if s.edges.len() < s.queue.len() {
        // a tree has only bridges
        return Ok(0);
    }
    let size = s.queue.len();
    let bridges = find_bridges(size, &s.edges);
    Ok(two_edge_component(size, &s.edges, &bridges, 0).len() as u64 - 1)
}

/// Mean size of the largest cluster, from full configurations.
pub fn estimate_largest_cluster(
    graph: &HammingGraph,
    p: f64,
    reps: u64,
    seed: u64,
    caps: &Caps,
) -> Result<EstimateWithError> {
    check_reps(reps)?;
    check_probability(p)?;
    caps.check_volume(graph)?;
    let sizes: Vec<u64> = (0..reps)
        .into_par_iter()
        .map(|r| partition(&Config::new(graph, p, ReplicateKey::new(seed, r))).largest_size())
        .collect();
    Ok(estimate_of(sizes.into_iter().map(|k| k as f64)))
}

/// Largest over `y` of the estimated probability that `y` is in the origin's
/// cluster at open-subgraph distance greater than `r`.
pub fn estimate_long_connection(
    graph: &HammingGraph,
    p: f64,
    r: u64,
    reps: u64,
    seed: u64,
    caps: &Caps,
) -> Result<EstimateWithError> {
    check_reps(reps)?;
    check_probability(p)?;
    caps.check_volume(graph)?;
    let (counts, _) = hit_counts(graph, p, seed, reps, caps.cluster, |level, _| level as u64 > r)?;
    let best = counts.iter().copied().max().unwrap_or(0);
    let q = best as f64 / reps as f64;
    Ok(EstimateWithError {
        mean: q,
        standard_error: (q * (1.0 - q) / (reps - 1) as f64).sqrt(),
        replicates: reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_at_extremes() {
        let g = HammingGraph::new(2, 5).unwrap();
        let caps = Caps::default();
        let e = estimate_chi(&g, 0.0, 10, 1, &caps).unwrap();
        assert_eq!((e.mean, e.standard_error, e.replicates), (1.0, 0.0, 10));
        let e = estimate_chi(&g, 1.0, 10, 1, &caps).unwrap();
        assert_eq!((e.mean, e.standard_error), (25.0, 0.0));
        assert!(estimate_chi(&g, 0.5, 1, 1, &caps).is_err());
    }

    #[test]
    fn two_point_field_extremes_and_sum() {
        let g = HammingGraph::new(2, 6).unwrap();
        let caps = Caps::default();
        let f = estimate_two_point_field(&g, 0.0, 5, 3, &caps).unwrap();
        assert_eq!(f.values[0], 1.0);
        assert!(f.values[1..].iter().all(|&v| v == 0.0));
        let f = estimate_two_point_field(&g, 1.0, 5, 3, &caps).unwrap();
        assert!(f.values.iter().all(|&v| v == 1.0));
        let f = estimate_two_point_field(&g, 0.15, 2000, 3, &caps).unwrap();
        let chi = estimate_chi(&g, 0.15, 2000, 3, &caps).unwrap();
        assert!((f.sum() - chi.mean).abs() < 1e-9);
        assert!((f.chi.mean - chi.mean).abs() < 1e-12);
    }

    #[test]
    fn pi0_on_triangle() {
        let g = HammingGraph::complete(3).unwrap();
        let caps = Caps::default();
        assert_eq!(estimate_pi0(&g, 1.0, 4, 0, &caps).unwrap().mean, 2.0);
        assert_eq!(estimate_pi0(&g, 0.0, 4, 0, &caps).unwrap().mean, 0.0);
    }

    #[test]
    fn largest_cluster_extremes() {
        let g = HammingGraph::new(2, 4).unwrap();
        let caps = Caps::default();
        assert_eq!(estimate_largest_cluster(&g, 0.0, 3, 0, &caps).unwrap().mean, 1.0);
        assert_eq!(estimate_largest_cluster(&g, 1.0, 3, 0, &caps).unwrap().mean, 16.0);
    }

    #[test]
    fn long_connection_trivial_cases() {
        let g = HammingGraph::new(2, 5).unwrap();
        let caps = Caps::default();
        assert_eq!(estimate_long_connection(&g, 0.0, 0, 10, 0, &caps).unwrap().mean, 0.0);
        assert_eq!(estimate_long_connection(&g, 0.9, 25, 10, 0, &caps).unwrap().mean, 0.0);
        // all open: every non-origin vertex is at distance at least 1
        assert_eq!(estimate_long_connection(&g, 1.0, 0, 10, 0, &caps).unwrap().mean, 1.0);
    }

    #[test]
    fn pi0_enumeration_small_cases() {
        use num_rational::Rational64;
        let p = Rational64::new(1, 3);
        let k3 = HammingGraph::complete(3).unwrap();
        assert_eq!(pi0_exhaustive(&k3, &p).unwrap(), Rational64::new(2, 27));
        let k2 = HammingGraph::complete(2).unwrap();
        assert_eq!(pi0_exhaustive(&k2, &0.5f64).unwrap(), 0.0);
        let sq = HammingGraph::new(2, 2).unwrap();
        // the 4-cycle is doubly connected only when fully open
        assert_eq!(pi0_exhaustive(&sq, &p).unwrap(), Rational64::new(3, 81));
        assert!(pi0_exhaustive(&HammingGraph::new(2, 4).unwrap(), &0.5f64).is_err());
    }

    #[test]
    fn pi0_estimate_matches_enumeration() {
        let g = HammingGraph::complete(6).unwrap();
        let exact = pi0_exhaustive(&g, &0.3f64).unwrap();
        let est = estimate_pi0(&g, 0.3, 40_000, 3, &Caps::default()).unwrap();
        assert!(est.z_against_value(exact).abs() < 3.0, "{est:?} {exact}");
    }
}
