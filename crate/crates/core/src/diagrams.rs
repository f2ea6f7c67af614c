//! Diagram sums built from a two-point function on the group `Z_n^d`.
//!
//! A field is indexed by the rank of a difference vector. Throughout,
//! `P(x <-> y)` is read as `tau(x - y)`.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{HammingGraph, Vertex};
use crate::percolation::estimators::{check_reps, estimate_of};
use crate::percolation::{check_probability, grow_into, Caps, ClusterScratch, Config};
use crate::prf::ReplicateKey;
use crate::scalar::Real;
use crate::stats::EstimateWithError;

/// Volume up to which convolutions are summed directly.
pub const DIRECT_LIMIT: usize = 4096;

/// Default volume cap for [`pi1_ladder_bound`].
pub const LADDER_CAP: u64 = 4096;

/// A real function on `Z_n^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupField<T> {
    pub d: usize,
    pub n: usize,
    pub values: Vec<T>,
}

impl<T: Real> GroupField<T> {
    pub fn zeros(d: usize, n: usize) -> Result<Self> {
        let g = HammingGraph::new(d, n)?;
        Ok(Self { d, n, values: vec![T::zero(); g.volume() as usize] })
    }

    pub fn from_values(d: usize, n: usize, values: Vec<T>) -> Result<Self> {
        let g = HammingGraph::new(d, n)?;
        if values.len() as u64 != g.volume() {
            return Err(Error::invalid(format!(
                "field of length {} on a group of order {}",
                values.len(),
                g.volume()
            )));
        }
        Ok(Self { d, n, values })
    }

    /// Indicator of `z`.
    pub fn delta(d: usize, n: usize, z: usize) -> Result<Self> {
        let mut f = Self::zeros(d, n)?;
        f.values[z] = T::one();
        Ok(f)
    }

    pub fn constant(d: usize, n: usize, c: T) -> Result<Self> {
        let mut f = Self::zeros(d, n)?;
        f.values.iter_mut().for_each(|v| *v = c);
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.d != other.d || self.n != other.n {
            return Err(Error::invalid(format!(
                "group mismatch: Z_{}^{} against Z_{}^{}",
                self.n, self.d, other.n, other.d
            )));
        }
        Ok(())
    }

    /// Rank of `a + b` (coordinate-wise mod `n`).
    pub fn add_ranks(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, |x, y, n| (x + y) % n)
    }

    /// Rank of `a - b`.
    pub fn sub_ranks(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, |x, y, n| (x + n - y) % n)
    }

    fn combine(&self, mut a: usize, mut b: usize, op: impl Fn(usize, usize, usize) -> usize) -> usize {
        let n = self.n;
        let (mut out, mut w) = (0, 1);
        for _ in 0..self.d {
            out += op(a % n, b % n, n) * w;
            a /= n;
            b /= n;
            w *= n;
        }
        out
    }

    pub fn pointwise(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).collect();
        Ok(Self { d: self.d, n: self.n, values })
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { d: self.d, n: self.n, values: self.values.iter().map(|&v| v * c).collect() }
    }

    /// `z -> f(-z)`.
    pub fn reflected(&self) -> Self {
        let values = (0..self.len()).map(|z| self.values[self.sub_ranks(0, z)]).collect();
        Self { d: self.d, n: self.n, values }
    }
}

/// Uniform distribution on the `m` neighbors of the identity.
pub fn step_distribution<T: Real>(d: usize, n: usize) -> Result<GroupField<T>> {
    let g = HammingGraph::new(d, n)?;
    let mut f = GroupField::zeros(d, n)?;
    let w = T::one() / T::from_count(g.degree());
    g.for_each_neighbor(g.origin(), |_, _, y| f.values[y.0 as usize] = w);
    Ok(f)
}

/// `(f * g)(x) = sum_y f(y) g(x - y)` by direct summation.
pub fn convolve_direct<T: Real>(f: &GroupField<T>, g: &GroupField<T>) -> Result<GroupField<T>> {
    f.check_same(g)?;
    let v = f.len();
    let values = (0..v)
        .into_par_iter()
        .map(|x| {
            let mut acc = T::zero();
            for y in 0..v {
                acc = acc + f.values[y] * g.values[f.sub_ranks(x, y)];
            }
            acc
        })
        .collect();
    Ok(GroupField { d: f.d, n: f.n, values })
}

/// In-place `d`-dimensional DFT, one length-`n` transform per line.
fn dft_in_place<T: Real>(data: &mut [Complex<T>], d: usize, n: usize, inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let v = data.len();
    let mut line = vec![Complex::new(T::zero(), T::zero()); n];
    let mut stride = 1;
    for _ in 0..d {
        for start in 0..v {
            // lines along this axis start where the axis digit is zero
            if (start / stride) % n != 0 {
                continue;
            }
            for (j, c) in line.iter_mut().enumerate() {
                *c = data[start + j * stride];
            }
            fft.process(&mut line);
            for (j, c) in line.iter().enumerate() {
                data[start + j * stride] = *c;
            }
        }
        stride *= n;
    }
}

/// Convolution through the discrete Fourier transform.
pub fn convolve_dft<T: Real>(f: &GroupField<T>, g: &GroupField<T>) -> Result<GroupField<T>> {
    f.check_same(g)?;
    let to_complex = |h: &GroupField<T>| -> Vec<Complex<T>> {
        h.values.iter().map(|&x| Complex::new(x, T::zero())).collect()
    };
    let (mut a, mut b) = (to_complex(f), to_complex(g));
    dft_in_place(&mut a, f.d, f.n, false);
    dft_in_place(&mut b, f.d, f.n, false);
    a.iter_mut().zip(&b).for_each(|(x, y)| *x = *x * *y);
    dft_in_place(&mut a, f.d, f.n, true);
    let scale = T::from_count(f.len());
    Ok(GroupField { d: f.d, n: f.n, values: a.into_iter().map(|c| c.re / scale).collect() })
}

/// Circular convolution, summed directly on small groups.
pub fn group_convolve<T: Real>(f: &GroupField<T>, g: &GroupField<T>) -> Result<GroupField<T>> {
    if f.len() <= DIRECT_LIMIT {
        convolve_direct(f, g)
    } else {
        convolve_dft(f, g)
    }
}

fn check_p<T: Real>(p: T) -> Result<()> {
    check_probability(p.approx_f64())
}

/// `i`-fold convolution power.
fn convolution_power<T: Real>(tau: &GroupField<T>, i: usize) -> Result<GroupField<T>> {
    let mut acc = tau.clone();
    for _ in 1..i {
        acc = group_convolve(&acc, tau)?;
    }
    Ok(acc)
}

/// `f -> p m (D * f)`.
fn open_edge<T: Real>(f: &GroupField<T>, p: T) -> Result<GroupField<T>> {
    let step = step_distribution::<T>(f.d, f.n)?;
    let m = T::from_count(f.d * (f.n - 1));
    Ok(group_convolve(&step, f)?.scaled(p * m))
}

/// The triangle field `tau * tau * tau`.
pub fn triangle_field<T: Real>(tau: &GroupField<T>) -> Result<GroupField<T>> {
    convolution_power(tau, 3)
}

pub fn triangle_diagram<T: Real>(tau: &GroupField<T>, z: usize) -> Result<T> {
    Ok(triangle_field(tau)?.values[z])
}

/// Excess of the triangle at zero over its mean-field value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleReport {
    pub triangle_at_zero: f64,
    pub chi: f64,
    pub volume: u64,
    /// `triangle(0) - 1 - 10 chi^3 / V`
    pub excess: f64,
    /// `m * excess`
    pub scaled_excess: f64,
}

pub fn triangle_at_zero_report<T: Real>(tau: &GroupField<T>, chi: f64) -> Result<TriangleReport> {
    let g = HammingGraph::new(tau.d, tau.n)?;
    let nabla0 = triangle_diagram(tau, 0)?.approx_f64();
    let volume = g.volume();
    let excess = nabla0 - 1.0 - 10.0 * chi.powi(3) / volume as f64;
    Ok(TriangleReport {
        triangle_at_zero: nabla0,
        chi,
        volume,
        excess,
        scaled_excess: excess * g.degree() as f64,
    })
}

/// `p m (D * tau * tau * tau)`.
pub fn open_triangle_field<T: Real>(tau: &GroupField<T>, p: T) -> Result<GroupField<T>> {
    check_p(p)?;
    open_edge(&triangle_field(tau)?, p)
}

pub fn open_triangle<T: Real>(tau: &GroupField<T>, p: T, z: usize) -> Result<T> {
    Ok(open_triangle_field(tau, p)?.values[z])
}

/// The `i`-gon summed over intermediate points, with an open first edge when
/// `j = 1`.
pub fn polygon_field<T: Real>(tau: &GroupField<T>, p: T, i: usize, j: usize) -> Result<GroupField<T>> {
    check_p(p)?;
    if i < 2 || j > 1 {
        return Err(Error::invalid(format!("polygon needs i >= 2 and j in {{0, 1}}, got i={i}, j={j}")));
    }
    let base = convolution_power(tau, i)?;
    if j == 1 {
        open_edge(&base, p)
    } else {
        Ok(base)
    }
}

pub fn polygon_diagram<T: Real>(tau: &GroupField<T>, p: T, i: usize, j: usize, z: usize) -> Result<T> {
    Ok(polygon_field(tau, p, i, j)?.values[z])
}

/// The ladder bound with its excluded term, together with a crude
/// product-of-triangles upper bound for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderBound<T> {
    pub value: T,
    pub crude_bound: T,
}

/// Sum over `u, t, z, y, x` of
/// `tau(-u) tau(u-t) tau(t) * p sum_{v~u} tau(v-y) tau(y-z) tau(z-t) * tau(y-x) tau(x-z)`,
/// leaving out the single term `u = t = 0, x = y = z`.
///
/// The sum over `x` gives `(tau*tau)(y-z)`; with `W = tau . (tau*tau)` the
/// sums over `y, z` give `(tau*W*tau)(v-t)`, and the neighbor sum turns this
/// into `R = p m D*(tau*W*tau)` at `u - t`. What is left is
/// `sum_s tau(s) R(s) (tau*tau)(-s)`.
pub fn pi1_ladder_bound<T: Real>(tau: &GroupField<T>, p: T, cap: u64) -> Result<LadderBound<T>> {
    check_p(p)?;
    if tau.len() as u64 > cap {
        return Err(Error::VolumeCap { volume: tau.len() as u64, cap });
    }
    let bubble = group_convolve(tau, tau)?;
    let w = tau.pointwise(&bubble)?;
    let q = group_convolve(&group_convolve(tau, &w)?, tau)?;
    let r = open_edge(&q, p)?;
    let bubble_neg = bubble.reflected();
    let mut total = T::zero();
    for s in 0..tau.len() {
        total = total + tau.values[s] * r.values[s] * bubble_neg.values[s];
    }
    // u = t = 0 and x = y = z
    let step = step_distribution::<T>(tau.d, tau.n)?;
    let m = T::from_count(tau.d * (tau.n - 1));
    let t0 = tau.values[0];
    let neighbor_bubble: T = (0..tau.len()).map(|e| step.values[e] * bubble.values[e]).sum();
    let excluded = p * m * t0.powi(6) * neighbor_bubble;
    let nabla = triangle_field(tau)?;
    let crude = p * m * bubble.max() * nabla.max() * nabla.values[0];
    Ok(LadderBound { value: total - excluded, crude_bound: crude })
}

/// Monte Carlo estimate of `p m sum_x P(0 <-> x off {0, v}) P(v <-> x)` for
/// a fixed neighbor `v` of the origin.
///
/// Replicate `r` uses the configuration `2r` with the edge `{0, v}` forced
/// closed for the first connection and the independent configuration
/// `2r + 1` for the second; the overlap of the two clusters is an unbiased
/// estimate of the sum over `x`.
pub fn estimate_m(
    graph: &HammingGraph,
    p: f64,
    reps: u64,
    seed: u64,
    caps: &Caps,
) -> Result<EstimateWithError> {
    check_reps(reps)?;
    check_probability(p)?;
    caps.check_volume(graph)?;
    let origin = graph.origin();
    let v = Vertex(1);
    let e = graph.edge_id(origin, v)?;
    let overlaps: Vec<u64> = (0..reps)
        .into_par_iter()
        .map_init(
            || (ClusterScratch::new(graph), ClusterScratch::new(graph)),
            |(a, b), r| -> Result<u64> {
                let cut = Config::new(graph, p, ReplicateKey::new(seed, 2 * r)).with_closed(e);
                let other = Config::new(graph, p, ReplicateKey::new(seed, 2 * r + 1));
                grow_into::<false>(&cut, origin, caps.cluster, a)?;
                grow_into::<false>(&other, v, caps.cluster, b)?;
                Ok(b.queue.iter().filter(|&&x| a.index_of(x).is_some()).count() as u64)
            },
        )
        .collect::<Result<_>>()?;
    let scale = p * graph.degree() as f64;
    Ok(estimate_of(overlaps.into_iter().map(|k| k as f64 * scale)))
}

/// Literal nested-sum evaluations over explicit vertex loops. Cost grows as
/// a power of the volume; meant for checking the convolution forms on tiny
/// graphs.
pub mod literal {
    use super::GroupField;
    use crate::error::Result;
    use crate::graph::{HammingGraph, Vertex};
    use crate::scalar::Real;

    struct Ops<'a, T> {
        tau: &'a GroupField<T>,
        g: HammingGraph,
    }

    impl<'a, T: Real> Ops<'a, T> {
        fn new(tau: &'a GroupField<T>) -> Result<Self> {
            Ok(Self { tau, g: HammingGraph::new(tau.d, tau.n)? })
        }

        /// `tau(a - b)`
        fn t(&self, a: usize, b: usize) -> T {
            self.tau.values[self.tau.sub_ranks(a, b)]
        }

        fn neighbors(&self, u: usize) -> Vec<usize> {
            self.g.neighbors(Vertex(u as u64)).unwrap_or_default().into_iter().map(|w| w.0 as usize).collect()
        }

        /// Sum over `x_1..x_{k-1}` of `tau(x_1 - a) tau(x_2 - x_1) ... tau(b - x_{k-1})`.
        fn chain(&self, a: usize, b: usize, k: usize) -> T {
            if k == 1 {
                return self.t(b, a);
            }
            (0..self.tau.len()).map(|x| self.t(x, a) * self.chain(x, b, k - 1)).sum()
        }
    }

    pub fn triangle<T: Real>(tau: &GroupField<T>, z: usize) -> Result<T> {
        let o = Ops::new(tau)?;
        let v = tau.len();
        let mut total = T::zero();
        for x in 0..v {
            for y in 0..v {
                total = total + o.t(x, 0) * o.t(y, x) * o.t(z, y);
            }
        }
        Ok(total)
    }

    pub fn polygon<T: Real>(tau: &GroupField<T>, p: T, i: usize, j: usize, z: usize) -> Result<T> {
        let o = Ops::new(tau)?;
        if j == 0 {
            return Ok(o.chain(0, z, i));
        }
        Ok(o.neighbors(0).into_iter().map(|u| p * o.chain(u, z, i)).sum())
    }

    pub fn open_triangle<T: Real>(tau: &GroupField<T>, p: T, z: usize) -> Result<T> {
        polygon(tau, p, 3, 1, z)
    }

    pub fn ladder<T: Real>(tau: &GroupField<T>, p: T) -> Result<T> {
        let o = Ops::new(tau)?;
        let v = tau.len();
        let mut total = T::zero();
        for u in 0..v {
            let nb = o.neighbors(u);
            for t in 0..v {
                let left = o.t(0, u) * o.t(u, t) * o.t(t, 0);
                for z in 0..v {
                    for y in 0..v {
                        let rung: T = nb.iter().map(|&w| o.t(w, y)).sum::<T>() * p;
                        for x in 0..v {
                            if u == 0 && t == 0 && x == y && y == z {
                                continue;
                            }
                            total = total
                                + left * rung * o.t(y, z) * o.t(z, t) * o.t(y, x) * o.t(x, z);
                        }
                    }
                }
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(d: usize, n: usize, seed: u64) -> GroupField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = n.pow(d as u32);
        GroupField::from_values(d, n, (0..v).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    #[test]
    fn identity_and_constants() {
        let f = random_field(2, 4, 1);
        let delta = GroupField::delta(2, 4, 0).unwrap();
        assert_eq!(convolve_direct(&f, &delta).unwrap(), f);
        let a = GroupField::constant(2, 3, 2.0f64).unwrap();
        let b = GroupField::constant(2, 3, 0.5).unwrap();
        let c = convolve_dft(&a, &b).unwrap();
        assert!(c.values.iter().all(|&x| (x - 9.0).abs() < 1e-12));
        assert!(convolve_direct(&a, &random_field(3, 2, 1)).is_err());
    }

    #[test]
    fn dft_matches_direct() {
        for (d, n) in [(2, 3), (3, 4), (1, 7), (2, 5)] {
            let (f, g) = (random_field(d, n, 2), random_field(d, n, 3));
            let a = convolve_direct(&f, &g).unwrap();
            let b = convolve_dft(&f, &g).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn convolution_is_commutative_and_conserves_mass() {
        let (f, g) = (random_field(2, 5, 4), random_field(2, 5, 5));
        let a = group_convolve(&f, &g).unwrap();
        let b = group_convolve(&g, &f).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((a.sum() - f.sum() * g.sum()).abs() < 1e-9);
        let p = polygon_field(&f, 0.1, 4, 0).unwrap();
        assert!((p.sum() - f.sum().powi(4)).abs() < 1e-9 * p.sum());
    }

    #[test]
    fn step_distribution_is_uniform_on_neighbors() {
        let s = step_distribution::<f64>(3, 4).unwrap();
        assert!((s.sum() - 1.0).abs() < 1e-15);
        let g = HammingGraph::new(3, 4).unwrap();
        for (z, &v) in s.values.iter().enumerate() {
            let dist = g.distance(g.origin(), Vertex(z as u64));
            assert_eq!(v > 0.0, dist == 1);
        }
    }

    #[test]
    fn diagrams_at_zero_probability() {
        let delta = GroupField::<f64>::delta(2, 3, 0).unwrap();
        assert_eq!(triangle_diagram(&delta, 0).unwrap(), 1.0);
        assert_eq!(triangle_diagram(&delta, 4).unwrap(), 0.0);
        assert!(open_triangle_field(&delta, 0.0).unwrap().values.iter().all(|&x| x == 0.0));
        assert_eq!(polygon_field(&delta, 0.0, 2, 0).unwrap(), delta);
        assert_eq!(pi1_ladder_bound(&delta, 0.0, LADDER_CAP).unwrap().value, 0.0);
        assert!(polygon_field(&delta, 0.0, 1, 0).is_err());
        assert!(polygon_field(&delta, 0.0, 3, 2).is_err());
    }

    #[test]
    fn polygon_three_is_the_triangle() {
        let f = random_field(2, 3, 9);
        assert_eq!(polygon_field(&f, 0.2, 3, 0).unwrap(), triangle_field(&f).unwrap());
    }

    #[test]
    fn ladder_cap() {
        let f = GroupField::<f64>::delta(2, 70, 0).unwrap();
        assert!(matches!(pi1_ladder_bound(&f, 0.1, LADDER_CAP), Err(Error::VolumeCap { .. })));
    }

    #[test]
    fn m_vanishes_without_edges() {
        let g = HammingGraph::new(2, 5).unwrap();
        let e = estimate_m(&g, 0.0, 10, 1, &Caps::default()).unwrap();
        assert_eq!((e.mean, e.standard_error), (0.0, 0.0));
    }

    #[test]
    fn literal_sums_agree_on_small_graph() {
        let tau = random_field(2, 3, 9);
        let p = 0.3;
        for z in 0..tau.len() {
            let pairs = [
                (triangle_diagram(&tau, z).unwrap(), literal::triangle(&tau, z).unwrap()),
                (open_triangle(&tau, p, z).unwrap(), literal::open_triangle(&tau, p, z).unwrap()),
                (polygon_diagram(&tau, p, 4, 1, z).unwrap(), literal::polygon(&tau, p, 4, 1, z).unwrap()),
                (polygon_diagram(&tau, p, 2, 0, z).unwrap(), literal::polygon(&tau, p, 2, 0, z).unwrap()),
            ];
            for (a, b) in pairs {
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{a} {b}");
            }
        }
        let fast = pi1_ladder_bound(&tau, p, LADDER_CAP).unwrap().value;
        let slow = literal::ladder(&tau, p).unwrap();
        assert!((fast - slow).abs() <= 1e-10 * slow.abs(), "{fast} {slow}");
    }
}
