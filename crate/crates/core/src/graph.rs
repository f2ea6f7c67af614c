//! Hamming graph geometry.
//!
//! Vertices of `H(d, n)` are `d`-digit base-`n` strings; they are carried as
//! their rank `sum_i digit_i * n^i` and decomposed on demand. Coordinates are
//! indexed from zero (`axis` in `0..d`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vertex of `H(d, n)`, stored as its rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex(pub u64);

impl Vertex {
    pub fn rank(self) -> u64 {
        self.0
    }
}

/// Canonical identifier of an unordered edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub u64);

/// Immutable description of `H(d, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HammingGraph {
    d: usize,
    n: usize,
    degree: usize,
    volume: u64,
    /// `n^i` for `i = 0..=d`.
    powers: Vec<u64>,
}

impl HammingGraph {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::invalid(format!("dimension d must be at least 1, got {d}")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("side length n must be at least 2, got {n}")));
        }
        let mut powers = Vec::with_capacity(d + 1);
        let mut acc: u64 = 1;
        powers.push(acc);
        for _ in 0..d {
            acc = acc.checked_mul(n as u64).ok_or_else(|| {
                Error::invalid(format!("volume {n}^{d} does not fit in 64 bits"))
            })?;
            powers.push(acc);
        }
        // Edge ids use V * m / 2 < 2^64.
        let degree = d * (n - 1);
        (acc as u128 * degree as u128 / 2 <= u64::MAX as u128)
            .then_some(())
            .ok_or_else(|| Error::invalid("edge count does not fit in 64 bits"))?;
        Ok(Self { d, n, degree, volume: acc, powers })
    }

    /// The complete graph `K_n`, i.e. `H(1, n)`.
    pub fn complete(n: usize) -> Result<Self> {
        Self::new(1, n)
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        self.n
    }

    /// The degree `m = d (n - 1)`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The number of vertices `V = n^d`.
    pub fn volume(&self) -> u64 {
        self.volume
    }

    pub fn edge_count(&self) -> u64 {
        self.volume * self.degree as u64 / 2
    }

    pub fn origin(&self) -> Vertex {
        Vertex(0)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.0 < self.volume
    }

    fn check(&self, v: Vertex) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::invalid(format!("vertex rank {} outside [0, {})", v.0, self.volume)))
        }
    }

    pub fn from_digits(&self, digits: &[usize]) -> Result<Vertex> {
        if digits.len() != self.d {
            return Err(Error::invalid(format!(
                "expected {} digits, got {}",
                self.d,
                digits.len()
            )));
        }
        let mut rank = 0u64;
        for (i, &x) in digits.iter().enumerate() {
            if x >= self.n {
                return Err(Error::invalid(format!("digit {x} out of range for n = {}", self.n)));
            }
            rank += x as u64 * self.powers[i];
        }
        Ok(Vertex(rank))
    }

    pub fn digits(&self, v: Vertex) -> Vec<usize> {
        let mut out = vec![0; self.d];
        self.fill_digits(v, &mut out);
        out
    }

    #[inline]
    pub(crate) fn fill_digits(&self, v: Vertex, out: &mut [usize]) {
        let n = self.n as u64;
        let mut r = v.0;
        for slot in out.iter_mut() {
            *slot = (r % n) as usize;
            r /= n;
        }
    }

    #[inline]
    pub fn digit(&self, v: Vertex, axis: usize) -> usize {
        ((v.0 / self.powers[axis]) % self.n as u64) as usize
    }

    /// Weight `n^axis` of coordinate `axis` in the rank.
    #[inline]
    pub fn axis_weight(&self, axis: usize) -> u64 {
        self.powers[axis]
    }

    /// Neighbors ordered by axis, then by digit.
    pub fn neighbors(&self, v: Vertex) -> Result<Vec<Vertex>> {
        self.check(v)?;
        let mut out = Vec::with_capacity(self.degree);
        self.for_each_neighbor(v, |_, _, w| out.push(w));
        Ok(out)
    }

    /// Visits every neighbor `w` of `v` as `(axis, new_digit, w)`, in the
    /// canonical axis-major order.
    #[inline]
    pub fn for_each_neighbor(&self, v: Vertex, mut f: impl FnMut(usize, usize, Vertex)) {
        for axis in 0..self.d {
            let w = self.powers[axis];
            let a = ((v.0 / w) % self.n as u64) as usize;
            let base = v.0 - a as u64 * w;
            for b in 0..self.n {
                if b != a {
                    f(axis, b, Vertex(base + b as u64 * w));
                }
            }
        }
    }

    /// Hamming distance.
    pub fn distance(&self, v: Vertex, w: Vertex) -> usize {
        let n = self.n as u64;
        let (mut a, mut b) = (v.0, w.0);
        let mut k = 0;
        for _ in 0..self.d {
            if a % n != b % n {
                k += 1;
            }
            a /= n;
            b /= n;
        }
        k
    }

    /// The `axis`-directional line through `v`, in digit order.
    pub fn line(&self, v: Vertex, axis: usize) -> Result<Vec<Vertex>> {
        self.check(v)?;
        if axis >= self.d {
            return Err(Error::invalid(format!(
                "direction {axis} out of range for dimension {}",
                self.d
            )));
        }
        let w = self.powers[axis];
        let base = v.0 - self.digit(v, axis) as u64 * w;
        Ok((0..self.n as u64).map(|b| Vertex(base + b * w)).collect())
    }

    /// The axis along which adjacent `v` and `w` differ.
    pub fn adjacency_axis(&self, v: Vertex, w: Vertex) -> Option<usize> {
        if !self.contains(v) || !self.contains(w) || v == w {
            return None;
        }
        let n = self.n as u64;
        let (mut a, mut b) = (v.0, w.0);
        let mut found = None;
        for axis in 0..self.d {
            if a % n != b % n {
                if found.is_some() {
                    return None;
                }
                found = Some(axis);
            }
            a /= n;
            b /= n;
        }
        found
    }

    pub fn edge_id(&self, v: Vertex, w: Vertex) -> Result<EdgeId> {
        let axis = self.adjacency_axis(v, w).ok_or(Error::NotAdjacent(v.0, w.0))?;
        Ok(self.edge_along(v, axis, self.digit(w, axis)))
    }

    /// Id of the edge from `v` to the vertex obtained by setting coordinate
    /// `axis` to `other` (which must differ from `v`'s digit there).
    #[inline]
    pub fn edge_along(&self, v: Vertex, axis: usize, other: usize) -> EdgeId {
        let w = self.powers[axis];
        let a = ((v.0 / w) % self.n as u64) as usize;
        debug_assert_ne!(a, other);
        let (lo, hi) = if a < other { (a, other) } else { (other, a) };
        let high = v.0 / self.powers[axis + 1];
        let low = v.0 % w;
        // rank with coordinate `axis` deleted
        let base = high * w + low;
        let n = self.n as u64;
        let pairs = n * (n - 1) / 2;
        let (lo, hi) = (lo as u64, hi as u64);
        let pair = lo * (2 * n - lo - 1) / 2 + (hi - lo - 1);
        EdgeId((axis as u64 * self.powers[self.d - 1] + base) * pairs + pair)
    }
}

/// Number of vertices at Hamming distance `k` from any fixed vertex.
pub fn distance_class_size(d: usize, n: usize, k: usize) -> u128 {
    if k > d {
        return 0;
    }
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (d - i) as u128 / (i + 1) as u128;
    }
    c * ((n - 1) as u128).pow(k as u32)
}
