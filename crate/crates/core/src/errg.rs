//! Exact moments of the cluster of a fixed vertex in `G(n, p)`.
//!
//! The cluster is revealed by a breadth-first exploration whose state after
//! `t` steps is the number `u` of still-unseen vertices; `n - t - u` vertices
//! are active. Exploring one active vertex reveals `Bin(u, p)` new ones, and
//! each edge from it to another active vertex is open with probability `p`
//! and closes a cycle. Propagating the law of `u` step by step gives the
//! exact size distribution and the expected surplus with only non-negative
//! terms, which keeps the computation stable for `n` in the thousands.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{chi_formula, second_moment_formula, surplus_formula};
use crate::error::{Error, Result};
use crate::percolation::check_probability;
use crate::scalar::{binomial, ln_factorial_table, Compensated, Real, Scalar};

/// Largest vertex count accepted by the exact routines.
pub const MAX_VERTICES: usize = 5000;

/// Largest vertex count for exhaustive enumeration.
pub const MAX_BRUTE_FORCE: usize = 7;

/// Log-weight below the row maximum at which binomial terms are dropped.
const LOG_CUTOFF: f64 = 90.0;

/// Working precision of the exploration recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Precision {
    Double,
    /// Neumaier-compensated accumulation of every probability cell.
    #[default]
    Compensated,
}

/// Exact moments of `|C(v)|` in `G(n, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrgMoments<T> {
    pub n: usize,
    pub p: T,
    /// `pmf[k - 1] = P(|C(v)| = k)`.
    pub pmf: Vec<T>,
    pub susceptibility: T,
    pub second_moment: T,
    pub expected_edges: T,
    pub expected_surplus: T,
}

trait Accumulator<T: Real>: Copy {
    fn zero() -> Self;
    fn add(&mut self, x: T);
    fn get(&self) -> T;
}

impl<T: Real> Accumulator<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn add(&mut self, x: T) {
        *self = *self + x;
    }
    fn get(&self) -> T {
        *self
    }
}

impl<T: Real> Accumulator<T> for Compensated<T> {
    fn zero() -> Self {
        Compensated::new()
    }
    fn add(&mut self, x: T) {
        Compensated::add(self, x)
    }
    fn get(&self) -> T {
        self.value()
    }
}

/// `Bin(u, p)` probabilities restricted to a window outside of which every
/// term is negligible.
struct BinomialRow<T> {
    first: usize,
    probs: Vec<T>,
}

fn binomial_row<T: Real>(u: usize, p: f64, lnfact: &[f64]) -> BinomialRow<T> {
    if p == 0.0 || u == 0 {
        return BinomialRow { first: 0, probs: vec![T::one()] };
    }
    if p == 1.0 {
        return BinomialRow { first: u, probs: vec![T::one()] };
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let logw = |k: usize| lnfact[u] - lnfact[k] - lnfact[u - k] + k as f64 * lp + (u - k) as f64 * lq;
    let mode = (((u + 1) as f64) * p).floor().min(u as f64) as usize;
    let peak = logw(mode);
    let mut lo = mode;
    while lo > 0 && logw(lo - 1) > peak - LOG_CUTOFF {
        lo -= 1;
    }
    let mut hi = mode;
    while hi < u && logw(hi + 1) > peak - LOG_CUTOFF {
        hi += 1;
    }
    let probs = (lo..=hi).map(|k| T::from_f64(logw(k).exp()).unwrap()).collect();
    BinomialRow { first: lo, probs }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("vertex count must be at least 1"));
    }
    if n > MAX_VERTICES {
        return Err(Error::invalid(format!("vertex count {n} exceeds the maximum {MAX_VERTICES}")));
    }
    Ok(())
}

fn explore<T: Real, A: Accumulator<T>>(n: usize, p: T) -> ErrgMoments<T> {
    let pf = p.approx_f64();
    let lnfact = ln_factorial_table(n);
    let rows: Vec<BinomialRow<T>> = (0..n).map(|u| binomial_row(u, pf, &lnfact)).collect();
    let mut pmf = vec![T::zero(); n];
    let mut surplus = Compensated::<T>::new();
    // cur[u] = P(after t steps, u vertices are unseen and the process is alive)
    let mut cur = vec![A::zero(); n];
    cur[n - 1].add(T::one());
    let mut next = vec![A::zero(); n];
    for t in 0..n {
        next.iter_mut().for_each(|c| *c = A::zero());
        let mut alive = false;
        for u in 0..n - t {
            let mass = cur[u].get();
            if mass == T::zero() {
                continue;
            }
            let active = n - t - u;
            surplus.add(p * T::from_count(active - 1) * mass);
            let row = &rows[u];
            for (i, &b) in row.probs.iter().enumerate() {
                let k = row.first + i;
                if active == 1 && k == 0 {
                    pmf[t] = pmf[t] + mass * b;
                } else {
                    next[u - k].add(mass * b);
                    alive = true;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        if !alive {
            break;
        }
    }
    let mut chi = Compensated::<T>::new();
    let mut m2 = Compensated::<T>::new();
    for (i, &q) in pmf.iter().enumerate() {
        let k = T::from_count(i + 1);
        chi.add(k * q);
        m2.add(k * k * q);
    }
    let (chi, surplus) = (chi.value(), surplus.value());
    ErrgMoments {
        n,
        p,
        pmf,
        susceptibility: chi,
        second_moment: m2.value(),
        expected_edges: chi - T::one() + surplus,
        expected_surplus: surplus,
    }
}

/// All exact moments of the cluster of a vertex in `G(n, p)`.
pub fn errg_moments<T: Real>(n: usize, p: T, precision: Precision) -> Result<ErrgMoments<T>> {
    check_size(n)?;
    check_probability(p.approx_f64())?;
    Ok(match precision {
        Precision::Double => explore::<T, T>(n, p),
        Precision::Compensated => explore::<T, Compensated<T>>(n, p),
    })
}

fn moments(n: usize, p: f64) -> Result<ErrgMoments<f64>> {
    errg_moments(n, p, Precision::Compensated)
}

/// `P(|C(v)| = k)` for `k = 1..=n`.
pub fn component_size_pmf(n: usize, p: f64) -> Result<Vec<f64>> {
    Ok(moments(n, p)?.pmf)
}

pub fn exact_susceptibility(n: usize, p: f64) -> Result<f64> {
    Ok(moments(n, p)?.susceptibility)
}

pub fn exact_second_moment(n: usize, p: f64) -> Result<f64> {
    Ok(moments(n, p)?.second_moment)
}

pub fn exact_expected_edges(n: usize, p: f64) -> Result<f64> {
    Ok(moments(n, p)?.expected_edges)
}

pub fn exact_expected_surplus(n: usize, p: f64) -> Result<f64> {
    Ok(moments(n, p)?.expected_surplus)
}

/// Probability that `G(k, p)` is connected, read off as the full-size mass
/// of the exploration on `k` vertices.
pub fn connected_probability(k: usize, p: f64) -> Result<f64> {
    Ok(*moments(k, p)?.pmf.last().unwrap())
}

/// Connectivity probability by the classical inclusion recursion over the
/// size of the component containing a fixed vertex.
///
/// Exact over rationals. In floating point the alternating cancellation
/// destroys all accuracy once `k` reaches a few hundred, which is why the
/// float entry points use the exploration recursion instead.
pub fn connected_probability_inclusion<S: Scalar>(k: usize, p: &S) -> Result<Vec<S>> {
    check_size(k)?;
    let q = S::one() - p.clone();
    let mut qpow = vec![S::one()];
    for _ in 0..k * k / 4 + 1 {
        let last = qpow.last().unwrap().clone();
        qpow.push(last * q.clone());
    }
    let mut c: Vec<S> = vec![S::one()];
    for size in 2..=k {
        let mut acc = S::zero();
        for j in 1..size {
            acc = acc
                + binomial::<S>(size - 1, j - 1) * c[j - 1].clone() * qpow[j * (size - j)].clone();
        }
        c.push(S::one() - acc);
    }
    Ok(c)
}

/// Exact rational connectivity probabilities `C_1..C_k`.
pub fn connected_probability_exact(k: usize, p: &BigRational) -> Result<Vec<BigRational>> {
    connected_probability_inclusion(k, p)
}

/// Moments obtained by enumerating every graph on `n` labelled vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForce<S> {
    pub n: usize,
    pub pmf: Vec<S>,
    pub connected_probability: S,
    pub susceptibility: S,
    pub second_moment: S,
    pub expected_edges: S,
    pub expected_surplus: S,
}

/// Exhaustive enumeration over all `2^(n(n-1)/2)` graphs, exact in the
/// scalar field.
pub fn brute_force_oracle<S: Scalar>(n: usize, p: &S) -> Result<BruteForce<S>> {
    if n == 0 || n > MAX_BRUTE_FORCE {
        return Err(Error::invalid(format!(
            "exhaustive enumeration needs 1 <= n <= {MAX_BRUTE_FORCE}, got {n}"
        )));
    }
    check_probability(p.approx_f64())?;
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
    let total = pairs.len();
    // tally[e][k - 1] = (#graphs with e open edges and |C(0)| = k, summed
    // internal edge count over those graphs)
    let mut tally = vec![vec![(0u64, 0u64); n]; total + 1];
    let mut adj = vec![0u32; n];
    for mask in 0u64..(1u64 << total) {
        adj.iter_mut().for_each(|a| *a = 0);
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
        }
        let mut comp = 1u32;
        let mut frontier = 1u32;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = adj[v] & !comp;
            comp |= fresh;
            frontier |= fresh;
        }
        let inside = pairs
            .iter()
            .enumerate()
            .filter(|&(i, &(a, _))| mask >> i & 1 == 1 && comp >> a & 1 == 1)
            .count() as u64;
        let cell = &mut tally[mask.count_ones() as usize][comp.count_ones() as usize - 1];
        cell.0 += 1;
        cell.1 += inside;
    }
    let q = S::one() - p.clone();
    let mut pmf = vec![S::zero(); n];
    let mut edges = S::zero();
    for (e, row) in tally.iter().enumerate() {
        let w = p.pow_usize(e) * q.pow_usize(total - e);
        for (k, &(count, inside)) in row.iter().enumerate() {
            if count > 0 {
                pmf[k] = pmf[k].clone() + S::from_count(count as usize) * w.clone();
                edges = edges + S::from_count(inside as usize) * w.clone();
            }
        }
    }
    let mut chi = S::zero();
    let mut m2 = S::zero();
    for (i, q) in pmf.iter().enumerate() {
        let k = S::from_count(i + 1);
        chi = chi + k.clone() * q.clone();
        m2 = m2 + k.clone() * k * q.clone();
    }
    let surplus = edges.clone() - chi.clone() + S::one();
    Ok(BruteForce {
        n,
        connected_probability: pmf[n - 1].clone(),
        pmf,
        susceptibility: chi,
        second_moment: m2,
        expected_edges: edges,
        expected_surplus: surplus,
    })
}

/// One row of the residual table at `p = lambda / (n - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub n: usize,
    pub p: f64,
    pub chi_exact: f64,
    pub chi_formula: f64,
    /// `|chi_exact - chi_formula| * n^2`
    pub chi_residual_n2: f64,
    pub surplus_exact: f64,
    pub surplus_formula: f64,
    /// `|surplus_exact - surplus_formula| * n^2`
    pub surplus_residual_n2: f64,
    pub second_moment_exact: f64,
    pub second_moment_formula: f64,
    /// `|m2_exact - m2_formula| * n`
    pub second_moment_residual_n: f64,
}

impl ResidualRow {
    pub fn chi_residual(&self) -> f64 {
        self.chi_residual_n2 / (self.n * self.n) as f64
    }

    pub fn surplus_residual(&self) -> f64 {
        self.surplus_residual_n2 / (self.n * self.n) as f64
    }
}

/// Exact moments against their second-order asymptotic expansions.
pub fn residual_scaling_report(lambda: f64, n_list: &[usize]) -> Result<Vec<ResidualRow>> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    n_list
        .iter()
        .map(|&n| {
            if n < 2 {
                return Err(Error::invalid("residual table needs n >= 2"));
            }
            let p = lambda / (n - 1) as f64;
            let m = moments(n, p)?;
            let nf = n as f64;
            let chi_f = chi_formula(lambda, nf)?;
            let sp_f = surplus_formula(lambda, nf)?;
            let m2_f = second_moment_formula(lambda)?;
            Ok(ResidualRow {
                n,
                p,
                chi_exact: m.susceptibility,
                chi_formula: chi_f,
                chi_residual_n2: (m.susceptibility - chi_f).abs() * nf * nf,
                surplus_exact: m.expected_surplus,
                surplus_formula: sp_f,
                surplus_residual_n2: (m.expected_surplus - sp_f).abs() * nf * nf,
                second_moment_exact: m.second_moment,
                second_moment_formula: m2_f,
                second_moment_residual_n: (m.second_moment - m2_f).abs() * nf,
            })
        })
        .collect()
}
