//! Critical-point estimation: the `p` at which the susceptibility reaches
//! `theta V^{1/3}`, the logarithmic-derivative maximizer, and checks built
//! on top of them.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{pc_expansion, pl_lower_bound};
use crate::errg::exact_susceptibility;
use crate::error::{Error, Result};
use crate::graph::{HammingGraph, Vertex};
use crate::percolation::estimators::{cluster_sizes, estimate_of};
use crate::percolation::{estimate_two_point_field, Caps};
use crate::stats::EstimateWithError;

/// How a bisection ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PcStatus {
    /// Bracket narrower than the requested tolerance.
    Converged,
    /// A midpoint could not be classified within the per-point replicate
    /// cap; the bracket is valid but cannot be narrowed at this resolution.
    ResolutionLimited,
    /// The total budget ran out; the result is inconclusive.
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcEstimate {
    pub theta: f64,
    pub target: f64,
    pub p_hat: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    /// Susceptibility at the bracket ends (`None` where it is known exactly,
    /// as at `p = 0`).
    pub chi_lo: Option<EstimateWithError>,
    pub chi_hi: Option<EstimateWithError>,
    /// Cluster growths consumed.
    pub growths: u64,
    pub iterations: u32,
    pub status: PcStatus,
}

impl PcEstimate {
    pub fn width(&self) -> f64 {
        self.p_hi - self.p_lo
    }

    pub fn is_conclusive(&self) -> bool {
        self.status != PcStatus::BudgetExhausted
    }
}

/// Tuning of the stochastic bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop once `p_hi - p_lo <= tol`.
    pub tol: f64,
    /// Total number of cluster growths allowed.
    pub budget: u64,
    /// Largest number of replicates spent on one point.
    pub point_cap: u64,
    /// Replicates in the first batch at each point; later batches double.
    pub first_batch: u64,
    /// Confidence half-width in standard errors.
    pub z: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-6, budget: 10_000_000, point_cap: 1_000_000, first_batch: 256, z: 3.0 }
    }
}

fn target_of(graph: &HammingGraph, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::invalid(format!("theta must be positive, got {theta}")));
    }
    let target = theta * (graph.volume() as f64).cbrt();
    if target <= 1.0 {
        return Err(Error::invalid(format!(
            "theta V^(1/3) = {target} does not exceed chi(0) = 1"
        )));
    }
    Ok(target)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Below,
    Above,
    Undecided,
}

struct Sampler<'a> {
    graph: &'a HammingGraph,
    seed: u64,
    caps: &'a Caps,
    opts: SolverOptions,
    used: u64,
    starved: bool,
}

impl Sampler<'_> {
    /// Grows replicates `0, 1, ...` at `p` until the confidence interval of
    /// the mean excludes `target`. Every point uses the same replicate
    /// indices, so estimates are monotone in `p` replicate by replicate.
    fn classify(&mut self, p: f64, target: f64) -> Result<(Side, Option<EstimateWithError>)> {
        let mut sizes: Vec<u64> = Vec::new();
        let mut batch = self.opts.first_batch.max(2);
        loop {
            let start = sizes.len() as u64;
            let end = (start + batch).min(self.opts.point_cap);
            let over_budget = self.used + (end - start) > self.opts.budget;
            if end <= start || over_budget {
                self.starved |= over_budget;
                let est = (sizes.len() >= 2).then(|| estimate_of(sizes.iter().map(|&k| k as f64)));
                return Ok((Side::Undecided, est));
            }
            sizes.extend(cluster_sizes(self.graph, p, self.seed, start..end, self.caps.cluster)?);
            self.used += end - start;
            let est = estimate_of(sizes.iter().map(|&k| k as f64));
            let half = self.opts.z * est.standard_error;
            if est.mean + half < target {
                return Ok((Side::Below, Some(est)));
            }
            if est.mean - half > target {
                return Ok((Side::Above, Some(est)));
            }
            batch = end;
        }
    }

    fn exhausted(&self) -> bool {
        self.starved || self.used >= self.opts.budget
    }
}

/// Stochastic bisection for `chi(p) = theta V^{1/3}`.
///
/// The lower end starts at `p = 0`, where `chi = 1` exactly. The upper end
/// starts a few window widths above the second-order expansion (or `2/m` on
/// `K_n`) and is pushed up until it is certified above the target.
pub fn solve_pc(
    graph: &HammingGraph,
    theta: f64,
    opts: SolverOptions,
    seed: u64,
    caps: &Caps,
) -> Result<PcEstimate> {
    let target = target_of(graph, theta)?;
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let m = graph.degree() as f64;
    let v13 = (graph.volume() as f64).cbrt();
    let guess = match pc_expansion(graph.dimension(), graph.side()) {
        Ok(e) => e.value,
        Err(_) => 1.0 / m,
    };
    let mut sampler = Sampler { graph, seed, caps, opts, used: 0, starved: false };
    let mut est = PcEstimate {
        theta,
        target,
        p_hat: f64::NAN,
        p_lo: 0.0,
        p_hi: (guess + 3.0 / (m * v13)).min(1.0),
        chi_lo: None,
        chi_hi: None,
        growths: 0,
        iterations: 0,
        status: PcStatus::Converged,
    };
    // certify the upper end
    loop {
        let (side, chi) = sampler.classify(est.p_hi, target)?;
        match side {
            Side::Above => {
                est.chi_hi = chi;
                break;
            }
            Side::Undecided if sampler.exhausted() => {
                est.status = PcStatus::BudgetExhausted;
                est.growths = sampler.used;
                return Ok(est);
            }
            _ if est.p_hi >= 1.0 => {
                return Err(Error::NoSolution(format!(
                    "susceptibility does not exceed {target} below p = 1"
                )));
            }
            Side::Below => {
                est.p_lo = est.p_hi;
                est.chi_lo = chi;
                est.p_hi = (2.0 * est.p_hi).min(1.0);
            }
            Side::Undecided => est.p_hi = (est.p_hi * (1.0 + 1.0 / v13)).min(1.0),
        }
    }
    while est.p_hi - est.p_lo > opts.tol {
        let mid = 0.5 * (est.p_lo + est.p_hi);
        est.iterations += 1;
        let (side, chi) = sampler.classify(mid, target)?;
        match side {
            Side::Below => {
                est.p_lo = mid;
                est.chi_lo = chi;
            }
            Side::Above => {
                est.p_hi = mid;
                est.chi_hi = chi;
            }
            Side::Undecided => {
                est.status = if sampler.exhausted() {
                    PcStatus::BudgetExhausted
                } else {
                    PcStatus::ResolutionLimited
                };
                break;
            }
        }
    }
    est.p_hat = 0.5 * (est.p_lo + est.p_hi);
    est.growths = sampler.used;
    Ok(est)
}

/// Deterministic bisection on `K_n` with the exact susceptibility.
pub fn solve_pc_exact(n: usize, theta: f64) -> Result<PcEstimate> {
    let g = HammingGraph::complete(n)?;
    let target = target_of(&g, theta)?;
    if exact_susceptibility(n, 1.0)? <= target {
        return Err(Error::NoSolution(format!("chi stays below {target} on K_{n}")));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut iterations = 0;
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if exact_susceptibility(n, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let exact = |p: f64| EstimateWithError {
        mean: exact_susceptibility(n, p).unwrap(),
        standard_error: 0.0,
        replicates: 0,
    };
    Ok(PcEstimate {
        theta,
        target,
        p_hat: 0.5 * (lo + hi),
        p_lo: lo,
        p_hi: hi,
        chi_lo: Some(exact(lo)),
        chi_hi: Some(exact(hi)),
        growths: 0,
        iterations,
        status: PcStatus::Converged,
    })
}

/// Grid maximizer of the logarithmic derivative of `chi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcTilde {
    pub index: usize,
    pub p: f64,
    /// Maximizer at the first or last interior grid point.
    pub boundary: bool,
    pub chi: Vec<EstimateWithError>,
    /// Centered difference of `ln chi` at interior points (`NaN` at the ends).
    pub log_derivative: Vec<f64>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 5 {
        return Err(Error::invalid(format!("grid needs at least 5 points, got {}", grid.len())));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) || grid[0] < 0.0 || grid[grid.len() - 1] > 1.0 {
        return Err(Error::invalid("grid must be strictly increasing inside [0, 1]"));
    }
    Ok(())
}

fn argmax_log_derivative(grid: &[f64], chi: Vec<EstimateWithError>) -> PcTilde {
    let k = grid.len();
    let mut deriv = vec![f64::NAN; k];
    let mut best = 1;
    for i in 1..k - 1 {
        deriv[i] = (chi[i + 1].mean.ln() - chi[i - 1].mean.ln()) / (grid[i + 1] - grid[i - 1]);
        // strict comparison keeps the smaller p on ties
        if deriv[i] > deriv[best] {
            best = i;
        }
    }
    PcTilde { index: best, p: grid[best], boundary: best == 1 || best == k - 2, chi, log_derivative: deriv }
}

/// Monte Carlo version; all grid points share replicate indices.
pub fn pc_tilde(graph: &HammingGraph, grid: &[f64], reps: u64, seed: u64, caps: &Caps) -> Result<PcTilde> {
    check_grid(grid)?;
    let chi = grid
        .iter()
        .map(|&p| crate::percolation::estimate_chi(graph, p, reps, seed, caps))
        .collect::<Result<Vec<_>>>()?;
    Ok(argmax_log_derivative(grid, chi))
}

/// Exact version on `K_n`.
pub fn pc_tilde_exact(n: usize, grid: &[f64]) -> Result<PcTilde> {
    check_grid(grid)?;
    let chi = grid
        .iter()
        .map(|&p| {
            Ok(EstimateWithError { mean: exact_susceptibility(n, p)?, standard_error: 0.0, replicates: 0 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(argmax_log_derivative(grid, chi))
}

/// One `(n, theta)` cell of the window study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub d: usize,
    pub n: usize,
    pub theta: f64,
    pub m: u64,
    pub estimate: PcEstimate,
    /// `m^2 (p_hat - 1/m)` and the same at the bracket ends.
    pub c2_hat: f64,
    pub c2_lo: f64,
    pub c2_hi: f64,
    pub p_lower_bound: f64,
    pub expansion: f64,
    pub expansion_c2: f64,
}

pub fn window_study(
    d: usize,
    n_list: &[usize],
    theta_list: &[f64],
    opts: SolverOptions,
    seed: u64,
    caps: &Caps,
) -> Result<Vec<WindowRow>> {
    let mut rows = Vec::new();
    for &n in n_list {
        let g = HammingGraph::new(d, n)?;
        let m = g.degree() as f64;
        let expansion = pc_expansion(d, n)?;
        for &theta in theta_list {
            let est = solve_pc(&g, theta, opts, seed, caps)?;
            let c2 = |p: f64| m * m * (p - 1.0 / m);
            rows.push(WindowRow {
                d,
                n,
                theta,
                m: g.degree() as u64,
                c2_hat: c2(est.p_hat),
                c2_lo: c2(est.p_lo),
                c2_hi: c2(est.p_hi),
                p_lower_bound: pl_lower_bound(d, n, theta)?,
                expansion: expansion.value,
                expansion_c2: num_traits::ToPrimitive::to_f64(&expansion.terms[1].1).unwrap(),
                estimate: est,
            });
        }
    }
    Ok(rows)
}

/// Residual of the estimated two-point function at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointResidual {
    pub distance: usize,
    pub vertex: u64,
    pub tau_hat: f64,
    pub prediction: f64,
    pub residual: f64,
    pub standard_error: f64,
    /// `m^{max(distance, 2)}`
    pub scale: f64,
    pub scaled_residual: f64,
    pub scaled_standard_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointCheck {
    pub p: f64,
    pub chi: EstimateWithError,
    /// `p m` far from one puts the prediction out of its regime.
    pub near_critical: bool,
    pub rows: Vec<TwoPointResidual>,
}

/// Compares `tau_hat(w)` with `delta + d/((d-1)m) 1{w ~ 0} + chi/V` at a
/// vertex of each distance `0, 1, 2, d`.
pub fn verify_twopoint(graph: &HammingGraph, p: f64, reps: u64, seed: u64, caps: &Caps) -> Result<TwoPointCheck> {
    let d = graph.dimension();
    if d < 2 {
        return Err(Error::invalid("the two-point prediction needs d >= 2"));
    }
    let field = estimate_two_point_field(graph, p, reps, seed, caps)?;
    let m = graph.degree() as f64;
    let volume = graph.volume() as f64;
    let mut distances = vec![0, 1, 2, d];
    distances.dedup();
    let rows = distances
        .into_iter()
        .map(|k| {
            let digits: Vec<usize> = (0..d).map(|i| usize::from(i < k)).collect();
            let w = graph.from_digits(&digits)?;
            let z = w.0 as usize;
            let prediction = f64::from(u8::from(k == 0))
                + if k == 1 { d as f64 / ((d - 1) as f64 * m) } else { 0.0 }
                + field.chi.mean / volume;
            let residual = field.values[z] - prediction;
            let scale = m.powi(k.max(2) as i32);
            let se = field.standard_error(z);
            Ok(TwoPointResidual {
                distance: k,
                vertex: Vertex(w.0).0,
                tau_hat: field.values[z],
                prediction,
                residual,
                standard_error: se,
                scale,
                scaled_residual: residual * scale,
                scaled_standard_error: se * scale,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TwoPointCheck { p, chi: field.chi, near_critical: (p * m - 1.0).abs() < 0.5, rows })
}
