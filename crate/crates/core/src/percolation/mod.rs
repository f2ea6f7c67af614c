//! Seed-deterministic bond percolation on `H(d, n)`.
//!
//! No edge list is ever stored. A configuration is the pair
//! `(master_seed, replicate)`; edge states are recomputed from the keyed
//! PRF whenever they are needed, so repeated growth of the same cluster is
//! consistent and arbitrarily large graphs can be explored locally.

mod bridges;
mod cluster;
pub(crate) mod estimators;
mod unionfind;

pub use cluster::{grow_cluster, ClusterReport};
pub use estimators::{
    estimate_chi, estimate_largest_cluster, estimate_long_connection, estimate_pi0,
    estimate_two_point_field, pi0_exhaustive, TwoPointField, MAX_EXHAUSTIVE_EDGES,
};
pub use unionfind::{full_config_clusters, ClusterPartition, ClusterSummary, UnionFind};

pub(crate) use cluster::{cluster_size, grow_into, ClusterScratch};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, HammingGraph};
use crate::prf::{ReplicateKey, Threshold};

/// Resource limits for Monte Carlo work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest cluster a single growth may reach before failing.
    pub cluster: usize,
    /// Largest volume that may be materialized (union-find, fields).
    pub volume: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Self { cluster: 10_000_000, volume: 10_000_000 }
    }
}

impl Caps {
    pub(crate) fn check_volume(&self, graph: &HammingGraph) -> Result<()> {
        if graph.volume() > self.volume {
            Err(Error::VolumeCap { volume: graph.volume(), cap: self.volume })
        } else {
            Ok(())
        }
    }
}

/// Everything needed to determine one percolation configuration.
#[derive(Debug, Clone, Copy)]
pub struct SampleSpec<'g> {
    pub graph: &'g HammingGraph,
    pub p: f64,
    pub master_seed: u64,
    pub replicate: u64,
}

impl<'g> SampleSpec<'g> {
    pub fn new(graph: &'g HammingGraph, p: f64, master_seed: u64, replicate: u64) -> Result<Self> {
        check_probability(p)?;
        Ok(Self { graph, p, master_seed, replicate })
    }

    pub(crate) fn config(&self) -> Config<'g> {
        Config::new(self.graph, self.p, ReplicateKey::new(self.master_seed, self.replicate))
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("probability {p} outside [0, 1]")))
    }
}

/// Status of edge `e` in the configuration described by `spec`.
pub fn edge_open(spec: &SampleSpec<'_>, e: EdgeId) -> bool {
    spec.config().is_open(e)
}

/// Resolved configuration: replicate key plus threshold, optionally with
/// one edge forced closed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Config<'g> {
    pub graph: &'g HammingGraph,
    key: ReplicateKey,
    threshold: Threshold,
    forced_closed: Option<EdgeId>,
}

impl<'g> Config<'g> {
    pub fn new(graph: &'g HammingGraph, p: f64, key: ReplicateKey) -> Self {
        Self { graph, key, threshold: Threshold::new(p), forced_closed: None }
    }

    pub fn with_closed(mut self, e: EdgeId) -> Self {
        self.forced_closed = Some(e);
        self
    }

    #[inline]
    pub fn is_open(&self, e: EdgeId) -> bool {
        self.forced_closed != Some(e) && self.threshold.admits(self.key.uniform(e))
    }
}
