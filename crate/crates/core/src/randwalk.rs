//! Simple and non-backtracking random walks on `H(d, n)`, lumped by the
//! Hamming distance to the starting vertex.
//!
//! The stabilizer of a vertex `x` in the automorphism group of `H(d, n)`
//! permutes coordinates and relabels digits fixing `x`; it acts transitively
//! on each sphere around `x`. Point probabilities of a walk started at `x`
//! therefore depend only on the distance `k`, and the distance process is a
//! Markov chain on `0..=d`. For the non-backtracking walk the forbidden move
//! (undoing the last step) is a decrease, lateral or increase move exactly
//! when the last step was an increase, lateral or decrease move, so the pair
//! `(k, last move type)` is again Markov.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{distance_class_size, HammingGraph, Vertex};
use crate::scalar::{binomial, Scalar};

/// Default iteration cap for [`mixing_time`].
pub const DEFAULT_MIXING_CAP: usize = 100_000;

/// Type of the most recent step of a non-backtracking walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    Decrease = 0,
    Lateral = 1,
    Increase = 2,
}

const MOVES: [Move; 3] = [Move::Decrease, Move::Lateral, Move::Increase];

fn check_shape(d: usize, n: usize) -> Result<()> {
    if d < 1 || n < 2 {
        return Err(Error::invalid(format!("need d >= 1 and n >= 2, got d={d}, n={n}")));
    }
    Ok(())
}

/// Distance chain of the simple random walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LumpedSrwChain {
    pub d: usize,
    pub n: usize,
}

impl LumpedSrwChain {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        check_shape(d, n)?;
        Ok(Self { d, n })
    }

    /// `(to k-1, stay at k, to k+1)` probabilities from distance `k`.
    pub fn row<S: Scalar>(&self, k: usize) -> (S, S, S) {
        let (d, n) = (self.d, self.n);
        let m = S::from_count(d * (n - 1));
        (
            S::from_count(k) / m.clone(),
            S::from_count(k * (n - 2)) / m.clone(),
            S::from_count((d - k) * (n - 1)) / m,
        )
    }

    pub fn step<S: Scalar>(&self, dist: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.d + 1];
        for (k, mass) in dist.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            let (down, stay, up) = self.row::<S>(k);
            if k > 0 {
                out[k - 1] = out[k - 1].clone() + mass.clone() * down;
            }
            out[k] = out[k].clone() + mass.clone() * stay;
            if k < self.d {
                out[k + 1] = out[k + 1].clone() + mass.clone() * up;
            }
        }
        out
    }
}

/// Law of the distance from the start after `t` simple random walk steps.
pub fn srw_distance_distribution<S: Scalar>(d: usize, n: usize, t: usize) -> Result<Vec<S>> {
    let chain = LumpedSrwChain::new(d, n)?;
    let mut dist = vec![S::zero(); d + 1];
    dist[0] = S::one();
    for _ in 0..t {
        dist = chain.step(&dist);
    }
    Ok(dist)
}

/// Distance chain of the non-backtracking walk, with the type of the last
/// move as part of the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LumpedNbwChain {
    pub d: usize,
    pub n: usize,
}

/// `state[k][tau]` probabilities.
pub type NbwState<S> = Vec<[S; 3]>;

impl LumpedNbwChain {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        check_shape(d, n)?;
        if d == 1 && n == 2 {
            return Err(Error::invalid("the non-backtracking walk on K_2 cannot move"));
        }
        Ok(Self { d, n })
    }

    /// Number of admissible moves of each type out of `(k, last)`.
    pub fn move_counts(&self, k: usize, last: Move) -> [usize; 3] {
        let (d, n) = (self.d, self.n);
        let minus = |c: usize, forbidden: bool| c - usize::from(forbidden);
        [
            minus(k, last == Move::Increase),
            minus(k * (n - 2), last == Move::Lateral),
            minus((d - k) * (n - 1), last == Move::Decrease),
        ]
    }

    /// State after the first step: distance 1, last move an increase.
    pub fn initial<S: Scalar>(&self) -> NbwState<S> {
        let mut s: NbwState<S> = (0..=self.d).map(|_| zero3()).collect();
        s[1][Move::Increase as usize] = S::one();
        s
    }

    pub fn step<S: Scalar>(&self, state: &NbwState<S>) -> NbwState<S> {
        let denom = S::from_count(self.d * (self.n - 1) - 1);
        let mut out: NbwState<S> = (0..=self.d).map(|_| zero3()).collect();
        for (k, masses) in state.iter().enumerate() {
            for last in MOVES {
                let mass = &masses[last as usize];
                if mass.is_zero() {
                    continue;
                }
                let counts = self.move_counts(k, last);
                for (mv, &c) in MOVES.iter().zip(&counts) {
                    if c == 0 {
                        continue;
                    }
                    let target = match mv {
                        Move::Decrease => k - 1,
                        Move::Lateral => k,
                        Move::Increase => k + 1,
                    };
                    let cell = &mut out[target][*mv as usize];
                    *cell = cell.clone() + mass.clone() * S::from_count(c) / denom.clone();
                }
            }
        }
        out
    }
}

fn zero3<S: Scalar>() -> [S; 3] {
    [S::zero(), S::zero(), S::zero()]
}

fn class_masses<S: Scalar>(state: &NbwState<S>) -> Vec<S> {
    state
        .iter()
        .map(|m| m[0].clone() + m[1].clone() + m[2].clone())
        .collect()
}

/// Law of the distance from the start after `t` non-backtracking steps.
pub fn nbw_distance_distribution<S: Scalar>(d: usize, n: usize, t: usize) -> Result<Vec<S>> {
    let chain = LumpedNbwChain::new(d, n)?;
    if t == 0 {
        let mut out = vec![S::zero(); d + 1];
        out[0] = S::one();
        return Ok(out);
    }
    let mut state = chain.initial::<S>();
    for _ in 1..t {
        state = chain.step(&state);
    }
    Ok(class_masses(&state))
}

fn class_size<S: Scalar>(d: usize, n: usize, k: usize) -> S {
    binomial::<S>(d, k) * S::from_count(n - 1).pow_usize(k)
}

fn point_max<S: Scalar>(d: usize, n: usize, classes: &[S]) -> S {
    let mut best = S::zero();
    for (k, mass) in classes.iter().enumerate() {
        let v = mass.clone() / class_size::<S>(d, n, k);
        if v > best {
            best = v;
        }
    }
    best
}

/// `max_{x,y}` of the `t`-step non-backtracking transition probability.
pub fn nbw_point_max<S: Scalar>(d: usize, n: usize, t: usize) -> Result<S> {
    let classes = nbw_distance_distribution::<S>(d, n, t)?;
    Ok(point_max(d, n, &classes))
}

/// Smallest `t >= 1` with `nbw_point_max(t) <= (1 + alpha) / V`.
pub fn mixing_time<S: Scalar>(d: usize, n: usize, alpha: S, cap: usize) -> Result<usize> {
    if !(alpha > S::zero()) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha:?}")));
    }
    let chain = LumpedNbwChain::new(d, n)?;
    let volume = S::from_count(n).pow_usize(d);
    let threshold = (S::one() + alpha) / volume;
    let mut state = chain.initial::<S>();
    for t in 1..=cap {
        if point_max(d, n, &class_masses(&state)) <= threshold {
            return Ok(t);
        }
        state = chain.step(&state);
    }
    Err(Error::IterationCap { cap, what: format!("mixing time of H({d},{n})") })
}

/// Point probabilities of the simple random walk from the origin, computed
/// on the full vertex set.
pub fn srw_full_chain<S: Scalar>(graph: &HammingGraph, t: usize) -> Vec<S> {
    let v = graph.volume() as usize;
    let m = S::from_count(graph.degree());
    let mut dist = vec![S::zero(); v];
    dist[0] = S::one();
    for _ in 0..t {
        let mut next = vec![S::zero(); v];
        for (x, mass) in dist.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            let share = mass.clone() / m.clone();
            graph.for_each_neighbor(Vertex(x as u64), |_, _, y| {
                let c = &mut next[y.0 as usize];
                *c = c.clone() + share.clone();
            });
        }
        dist = next;
    }
    dist
}

/// Point probabilities of the non-backtracking walk from the origin,
/// computed on the chain of directed edges `(previous, current)`.
pub fn nbw_full_chain<S: Scalar>(graph: &HammingGraph, t: usize) -> Result<Vec<S>> {
    LumpedNbwChain::new(graph.dimension(), graph.side())?;
    let v = graph.volume() as usize;
    let m = graph.degree();
    let mut out = vec![S::zero(); v];
    if t == 0 {
        out[0] = S::one();
        return Ok(out);
    }
    let adj: Vec<Vec<u64>> = (0..v as u64)
        .map(|x| graph.neighbors(Vertex(x)).unwrap().into_iter().map(|w| w.0).collect())
        .collect();
    // state index: current * m + slot of previous in adj[current]
    let slot = |cur: u64, prev: u64| adj[cur as usize].iter().position(|&w| w == prev).unwrap();
    let mut mass = vec![S::zero(); v * m];
    let first = S::one() / S::from_count(m);
    for &w in &adj[0] {
        mass[w as usize * m + slot(w, 0)] = first.clone();
    }
    let step = S::one() / S::from_count(m - 1);
    for _ in 1..t {
        let mut next = vec![S::zero(); v * m];
        for cur in 0..v {
            for j in 0..m {
                let q = &mass[cur * m + j];
                if q.is_zero() {
                    continue;
                }
                let prev = adj[cur][j];
                let share = q.clone() * step.clone();
                for &x in &adj[cur] {
                    if x != prev {
                        let c = &mut next[x as usize * m + slot(x, cur as u64)];
                        *c = c.clone() + share.clone();
                    }
                }
            }
        }
        mass = next;
    }
    for cur in 0..v {
        for j in 0..m {
            out[cur] = out[cur].clone() + mass[cur * m + j].clone();
        }
    }
    Ok(out)
}

/// Mixing time computed from the directed-edge chain.
pub fn mixing_time_full_chain<S: Scalar>(graph: &HammingGraph, alpha: S, cap: usize) -> Result<usize> {
    let threshold = (S::one() + alpha) / S::from_count(graph.volume() as usize);
    for t in 1..=cap {
        let dist = nbw_full_chain::<S>(graph, t)?;
        let max = dist.into_iter().fold(S::zero(), |a, b| if b > a { b } else { a });
        if max <= threshold {
            return Ok(t);
        }
    }
    Err(Error::IterationCap { cap, what: "directed-edge mixing time".into() })
}

/// Projects point probabilities onto distance classes from the origin.
pub fn project_to_classes<S: Scalar>(graph: &HammingGraph, dist: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); graph.dimension() + 1];
    for (x, mass) in dist.iter().enumerate() {
        let k = graph.distance(graph.origin(), Vertex(x as u64));
        out[k] = out[k].clone() + mass.clone();
    }
    out
}

/// Number of vertices at distance `k`, as a float.
pub fn sphere_size(d: usize, n: usize, k: usize) -> f64 {
    distance_class_size(d, n, k) as f64
}
