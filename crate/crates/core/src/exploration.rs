//! Exploration processes for a cluster: breadth-first with surplus edges,
//! the branching random walk with ghosts, and the line-by-line exploration
//! together with its dominating branching process.

use std::collections::{HashMap, VecDeque};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::errg;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, HammingGraph, Vertex};
use crate::percolation::estimators::{check_reps, estimate_of, per_replicate};
use crate::percolation::{check_probability, cluster_size, grow_into, Caps, ClusterScratch, Config, SampleSpec};
use crate::prf::ReplicateKey;
use crate::stats::{z_score, EstimateWithError};

const ACTIVE: u8 = 1;
const DEAD: u8 = 2;

/// Salt separating branching-walk streams from edge-state streams.
const BRW_SALT: u64 = 0xB5A7_0001;
const GW_SALT: u64 = 0xB5A7_0002;

/// Record of a breadth-first exploration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BfTrace {
    /// `|D(t)|` for `t = 0..=T`.
    pub dead_size_by_step: Vec<u64>,
    /// `|A(t)|` for `t = 0..=T`.
    pub active_size_by_step: Vec<u64>,
    /// Open edges found between the explored vertex and an active one.
    pub surplus_edges: Vec<EdgeId>,
    /// Termination step.
    pub steps: u64,
    /// Dead vertices in the order they were explored.
    pub dead: Vec<Vertex>,
}

/// Breadth-first exploration of the cluster of `v`. The oldest active vertex
/// is explored first; newly found vertices join in increasing rank order.
pub fn bf_explore(spec: &SampleSpec<'_>, v: Vertex, cap: usize) -> Result<BfTrace> {
    let g = spec.graph;
    if !g.contains(v) {
        return Err(Error::invalid(format!("source rank {} outside the graph", v.0)));
    }
    let cfg = spec.config();
    let mut state: HashMap<u64, u8> = HashMap::from([(v.0, ACTIVE)]);
    let mut active = VecDeque::from([v]);
    let mut trace = BfTrace {
        dead_size_by_step: vec![0],
        active_size_by_step: vec![1],
        surplus_edges: Vec::new(),
        steps: 0,
        dead: Vec::new(),
    };
    let mut fresh = Vec::new();
    while let Some(x) = active.pop_front() {
        fresh.clear();
        g.for_each_neighbor(x, |axis, b, w| match state.get(&w.0) {
            Some(&DEAD) => {}
            Some(_) => {
                let e = g.edge_along(x, axis, b);
                if cfg.is_open(e) {
                    trace.surplus_edges.push(e);
                }
            }
            None => {
                if cfg.is_open(g.edge_along(x, axis, b)) {
                    fresh.push(w);
                }
            }
        });
        fresh.sort_unstable();
        for &w in &fresh {
            state.insert(w.0, ACTIVE);
            active.push_back(w);
        }
        state.insert(x.0, DEAD);
        trace.dead.push(x);
        if trace.dead.len() + active.len() > cap {
            return Err(Error::ClusterCap { cap });
        }
        trace.steps += 1;
        trace.dead_size_by_step.push(trace.dead.len() as u64);
        trace.active_size_by_step.push(active.len() as u64);
    }
    Ok(trace)
}

/// Summary of one branching-random-walk exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BrwTrace {
    pub dead: u64,
    pub ghosts_active: u64,
    pub ghosts_dead: u64,
    /// `sum_{t=1}^{T} |D(t-1)|`.
    pub cumulative_dead_sum: u64,
}

/// Neighbor of `x` with canonical index `i` in `0..m`.
fn neighbor_by_index(g: &HammingGraph, x: Vertex, i: usize) -> Vertex {
    let n = g.side();
    let axis = i / (n - 1);
    let j = i % (n - 1);
    let a = g.digit(x, axis);
    let b = if j < a { j } else { j + 1 };
    let w = g.axis_weight(axis);
    Vertex(x.0 - a as u64 * w + b as u64 * w)
}

/// One exploration of the `p`-branching random walk started at the origin.
///
/// Each explored individual has `Bin(m, p)` children placed on distinct
/// uniformly chosen neighbors of its position. A child landing on the
/// position of a dead individual is a dead ghost, one landing on an active
/// position an active ghost; ghosts are never explored. The randomness is a
/// pure function of `(seed, run)`.
pub fn brw_explore(graph: &HammingGraph, p: f64, seed: u64, run: u64, cap: usize) -> Result<BrwTrace> {
    check_probability(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ReplicateKey::new(seed, run).stream_seed(BRW_SALT));
    let m = graph.degree();
    let offspring = Binomial::new(m as u64, p).map_err(|e| Error::invalid(e.to_string()))?;
    let origin = graph.origin();
    let mut state: HashMap<u64, u8> = HashMap::from([(origin.0, ACTIVE)]);
    let mut active = VecDeque::from([origin]);
    let mut trace = BrwTrace::default();
    let mut fresh = Vec::new();
    while let Some(x) = active.pop_front() {
        trace.cumulative_dead_sum += trace.dead;
        let k = offspring.sample(&mut rng) as usize;
        fresh.clear();
        for i in sample(&mut rng, m, k).into_iter() {
            let y = neighbor_by_index(graph, x, i);
            match state.get(&y.0) {
                Some(&DEAD) => trace.ghosts_dead += 1,
                Some(_) => trace.ghosts_active += 1,
                None => fresh.push(y),
            }
        }
        fresh.sort_unstable();
        for &y in &fresh {
            state.insert(y.0, ACTIVE);
            active.push_back(y);
        }
        state.insert(x.0, DEAD);
        trace.dead += 1;
        if trace.dead as usize + active.len() > cap {
            return Err(Error::ProgenyCap { cap });
        }
    }
    Ok(trace)
}

/// One discrepancy in units of its joint standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub observed: EstimateWithError,
    pub reference: EstimateWithError,
    pub z: f64,
}

impl Discrepancy {
    fn new(observed: EstimateWithError, reference: EstimateWithError) -> Self {
        Self { observed, reference, z: observed.z_against(&reference) }
    }

    fn against_value(observed: EstimateWithError, value: f64) -> Self {
        let reference = EstimateWithError { mean: value, standard_error: 0.0, replicates: 0 };
        Self { observed, reference, z: observed.z_against_value(value) }
    }
}

/// Monte Carlo check of the coupling between the branching-walk and the
/// breadth-first explorations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub p: f64,
    pub replicates: u64,
    /// Dead individuals against cluster sizes.
    pub size: Discrepancy,
    /// Active ghosts against cluster surplus.
    pub surplus: Discrepancy,
    /// Dead ghosts against `p` times the cumulative dead count, paired per run.
    pub dead_ghosts: Discrepancy,
    /// On `K_n`: dead individuals against the exact susceptibility.
    pub size_exact: Option<Discrepancy>,
    /// On `K_n`: active ghosts against the exact expected surplus.
    pub surplus_exact: Option<Discrepancy>,
}

impl CouplingReport {
    pub fn max_abs_z(&self) -> f64 {
        [Some(self.size), Some(self.surplus), Some(self.dead_ghosts), self.size_exact, self.surplus_exact]
            .iter()
            .flatten()
            .map(|d| d.z.abs())
            .fold(0.0, f64::max)
    }
}

pub fn check_coupling(
    graph: &HammingGraph,
    p: f64,
    reps: u64,
    seed: u64,
    caps: &Caps,
) -> Result<CouplingReport> {
    check_reps(reps)?;
    check_probability(p)?;
    let brw: Vec<BrwTrace> = (0..reps)
        .into_par_iter()
        .map(|r| brw_explore(graph, p, seed, r, caps.cluster))
        .collect::<Result<_>>()?;
    let clusters: Vec<(u64, u64)> = per_replicate(graph, 0..reps, |s, r| {
        let cfg = Config::new(graph, p, ReplicateKey::new(seed, r));
        grow_into::<true>(&cfg, graph.origin(), caps.cluster, s)?;
        let size = s.queue.len() as u64;
        Ok((size, s.edges.len() as u64 + 1 - size))
    })?;
    let dead = estimate_of(brw.iter().map(|b| b.dead as f64));
    let ghosts_active = estimate_of(brw.iter().map(|b| b.ghosts_active as f64));
    let paired = estimate_of(
        brw.iter().map(|b| b.ghosts_dead as f64 - p * b.cumulative_dead_sum as f64),
    );
    let sizes = estimate_of(clusters.iter().map(|c| c.0 as f64));
    let surplus = estimate_of(clusters.iter().map(|c| c.1 as f64));
    let (size_exact, surplus_exact) = if graph.dimension() == 1 {
        let m = errg::errg_moments(graph.side(), p, errg::Precision::Compensated)?;
        (
            Some(Discrepancy::against_value(dead, m.susceptibility)),
            Some(Discrepancy::against_value(ghosts_active, m.expected_surplus)),
        )
    } else {
        (None, None)
    };
    Ok(CouplingReport {
        p,
        replicates: reps,
        size: Discrepancy::new(dead, sizes),
        surplus: Discrepancy::new(ghosts_active, surplus),
        dead_ghosts: Discrepancy {
            observed: estimate_of(brw.iter().map(|b| b.ghosts_dead as f64)),
            reference: estimate_of(brw.iter().map(|b| p * b.cumulative_dead_sum as f64)),
            z: z_score(paired.mean, paired.standard_error),
        },
        size_exact,
        surplus_exact,
    })
}

/// Record of a line-by-line exploration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinewiseTrace {
    /// Explored vertices in order.
    pub dead: Vec<Vertex>,
    /// For every non-root dead vertex, the open line edge that found it.
    pub parent_edges: Vec<EdgeId>,
    pub steps: u64,
}

/// Cluster of `x` using only open edges along `axis`, as `(vertex, edge to
/// its discoverer)` pairs excluding `x` itself.
fn line_cluster(cfg: &Config<'_>, x: Vertex, axis: usize, out: &mut Vec<(Vertex, EdgeId)>) {
    let g = cfg.graph;
    let n = g.side();
    let w = g.axis_weight(axis);
    let base = x.0 - g.digit(x, axis) as u64 * w;
    let mut seen = vec![false; n];
    seen[g.digit(x, axis)] = true;
    out.clear();
    let mut head = 0;
    let mut frontier = vec![x];
    while head < frontier.len() {
        let y = frontier[head];
        head += 1;
        for b in 0..n {
            if seen[b] {
                continue;
            }
            let e = g.edge_along(y, axis, b);
            if cfg.is_open(e) {
                seen[b] = true;
                let z = Vertex(base + b as u64 * w);
                frontier.push(z);
                out.push((z, e));
            }
        }
    }
}

/// Line-by-line exploration: each explored vertex reveals its line clusters
/// in every direction other than the one it was found along. Vertices that
/// are already dead or active are not activated again.
pub fn linewise_explore(spec: &SampleSpec<'_>, v: Vertex, cap: usize) -> Result<LinewiseTrace> {
    let g = spec.graph;
    if !g.contains(v) {
        return Err(Error::invalid(format!("source rank {} outside the graph", v.0)));
    }
    let cfg = spec.config();
    let mut state: HashMap<u64, u8> = HashMap::from([(v.0, ACTIVE)]);
    let mut active: VecDeque<(Vertex, Option<usize>)> = VecDeque::from([(v, None)]);
    let mut trace = LinewiseTrace { dead: Vec::new(), parent_edges: Vec::new(), steps: 0 };
    let mut found = Vec::new();
    while let Some((x, parent_axis)) = active.pop_front() {
        for axis in (0..g.dimension()).filter(|&i| Some(i) != parent_axis) {
            line_cluster(&cfg, x, axis, &mut found);
            for &(y, e) in &found {
                if let std::collections::hash_map::Entry::Vacant(slot) = state.entry(y.0) {
                    slot.insert(ACTIVE);
                    active.push_back((y, Some(axis)));
                    trace.parent_edges.push(e);
                }
            }
        }
        state.insert(x.0, DEAD);
        trace.dead.push(x);
        trace.steps += 1;
        if trace.dead.len() + active.len() > cap {
            return Err(Error::ClusterCap { cap });
        }
    }
    Ok(trace)
}

/// Total progeny of the branching process whose root has `d` and every other
/// individual `d - 1` independent line clusters of `K_n` as offspring
/// (cluster size minus one each).
pub fn sample_gw_progeny(n: usize, p: f64, d: usize, seed: u64, run: u64, cap: usize) -> Result<u64> {
    check_probability(p)?;
    if d < 1 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let line = HammingGraph::complete(n)?;
    let stream = ReplicateKey::new(seed, run).stream_seed(GW_SALT);
    let mut scratch = ClusterScratch::new(&line);
    let mut draws = 0u64;
    let mut offspring = |count: usize, scratch: &mut ClusterScratch| -> Result<u64> {
        let mut total = 0;
        for _ in 0..count {
            let cfg = Config::new(&line, p, ReplicateKey::new(stream, draws));
            draws += 1;
            total += cluster_size(&cfg, line.origin(), n, scratch)? as u64 - 1;
        }
        Ok(total)
    };
    let mut total = 1u64;
    let mut pending = offspring(d, &mut scratch)?;
    while pending > 0 {
        total += 1;
        pending -= 1;
        if total as usize > cap {
            return Err(Error::ProgenyCap { cap });
        }
        pending += offspring(d - 1, &mut scratch)?;
    }
    Ok(total)
}

/// Mean total progeny over runs `0..reps`.
pub fn estimate_gw_progeny(
    n: usize,
    p: f64,
    d: usize,
    reps: u64,
    seed: u64,
    cap: usize,
) -> Result<EstimateWithError> {
    check_reps(reps)?;
    let runs: Vec<u64> = (0..reps)
        .into_par_iter()
        .map(|r| sample_gw_progeny(n, p, d, seed, r, cap))
        .collect::<Result<_>>()?;
    Ok(estimate_of(runs.into_iter().map(|z| z as f64)))
}

/// Mean progeny predicted from the exact line susceptibility,
/// `1 + d (chi - 1) / (1 - (d - 1)(chi - 1))`.
pub fn gw_progeny_mean_exact(n: usize, p: f64, d: usize) -> Result<f64> {
    let chi = errg::exact_susceptibility(n, p)?;
    let mu = (d as f64 - 1.0) * (chi - 1.0);
    if mu >= 1.0 {
        return Err(Error::NoSolution(format!("branching process is not subcritical (mean {mu})")));
    }
    Ok(1.0 + d as f64 * (chi - 1.0) / (1.0 - mu))
}
