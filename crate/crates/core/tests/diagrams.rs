use hyperperc::critpoint::{solve_pc, SolverOptions};
use hyperperc::diagrams::{
    convolve_dft, convolve_direct, estimate_m, group_convolve, literal, open_triangle,
    pi1_ladder_bound, polygon_diagram, polygon_field, triangle_at_zero_report, triangle_diagram,
    triangle_field, GroupField, LADDER_CAP,
};
use hyperperc::percolation::{estimate_two_point_field, UnionFind};
use hyperperc::prf::ReplicateKey;
use hyperperc::{Caps, EdgeId, Field32, Field64, HammingGraph, Vertex};
use proptest::prelude::*;

fn field(d: usize, n: usize, stream: u64) -> Field64 {
    let key = ReplicateKey::new(99, stream);
    let v = n.pow(d as u32) as u64;
    Field64::from_values(d, n, (0..v).map(|i| key.uniform(EdgeId(i)) as f64 / 2f64.powi(64)).collect()).unwrap()
}

fn estimated_tau(d: usize, n: usize, p: f64, reps: u64) -> (Field64, f64) {
    let g = HammingGraph::new(d, n).unwrap();
    let f = estimate_two_point_field(&g, p, reps, 5, &Caps::default()).unwrap();
    (Field64::from_values(d, n, f.values).unwrap(), f.chi.mean)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn convolution_basics() {
    let f = field(2, 3, 0);
    assert_eq!(group_convolve(&f, &Field64::delta(2, 3, 0).unwrap()).unwrap(), f);
    let g = field(2, 3, 1);
    let (a, b) = (convolve_dft(&f, &g).unwrap(), convolve_direct(&f, &g).unwrap());
    assert!(a.values.iter().zip(&b.values).all(|(x, y)| (x - y).abs() < 1e-9));
    let c = convolve_dft(&Field64::constant(3, 4, 1.5).unwrap(), &Field64::constant(3, 4, 2.0).unwrap()).unwrap();
    assert!(c.values.iter().all(|&x| (x - 3.0 * 64.0).abs() < 1e-9));
    let h: Field32 = GroupField::constant(2, 5, 0.5f32).unwrap();
    assert!(convolve_dft(&h, &h).unwrap().values.iter().all(|&x| (x - 6.25).abs() < 1e-4));
}

#[test]
fn trivial_two_point_function() {
    let delta = Field64::delta(2, 4, 0).unwrap();
    let tri = triangle_field(&delta).unwrap();
    assert_eq!(tri.values[0], 1.0);
    assert!(tri.values[1..].iter().all(|&x| x == 0.0));
    assert!((0..16).all(|z| open_triangle(&delta, 0.0, z).unwrap() == 0.0));
    assert_eq!(polygon_field(&delta, 0.0, 2, 0).unwrap(), delta);
    assert_eq!(pi1_ladder_bound(&delta, 0.0, LADDER_CAP).unwrap().value, 0.0);
    let g = HammingGraph::new(2, 4).unwrap();
    assert_eq!(estimate_m(&g, 0.0, 10, 1, &Caps::default()).unwrap().mean, 0.0);
    assert!(polygon_field(&delta, 0.1, 1, 0).is_err());
    assert!(polygon_field(&delta, 0.1, 3, 2).is_err());
}

#[test]
fn literal_sums_on_small_graph() {
    let tau = field(2, 3, 2);
    for z in 0..9 {
        assert!(close(triangle_diagram(&tau, z).unwrap(), literal::triangle(&tau, z).unwrap(), 1e-9));
        assert!(close(open_triangle(&tau, 0.2, z).unwrap(), literal::open_triangle(&tau, 0.2, z).unwrap(), 1e-9));
        assert!(close(polygon_diagram(&tau, 0.2, 4, 1, z).unwrap(), literal::polygon(&tau, 0.2, 4, 1, z).unwrap(), 1e-9));
        assert_eq!(polygon_diagram(&tau, 0.2, 3, 0, z).unwrap(), triangle_diagram(&tau, z).unwrap());
    }
    let (tau, _) = estimated_tau(2, 3, 0.05, 5000);
    let fast = pi1_ladder_bound(&tau, 0.05, LADDER_CAP).unwrap().value;
    assert!(close(fast, literal::ladder(&tau, 0.05).unwrap(), 1e-8));
}

#[test]
fn ladder_on_complete_graph() {
    let (tau, _) = estimated_tau(1, 20, 0.02, 20_000);
    let b = pi1_ladder_bound(&tau, 0.02, LADDER_CAP).unwrap();
    assert!(b.value.is_finite() && b.value > 0.0);
    assert!(b.value <= b.crude_bound, "{b:?}");
    let big = Field64::zeros(3, 20).unwrap();
    assert!(pi1_ladder_bound(&big, 0.1, LADDER_CAP).unwrap_err().is_resource_cap());
}

/// `p m sum_x P(0 <-> x with {0, v} closed) P(v <-> x)` on `K_n` by enumeration.
fn m_exhaustive(n: usize, p: f64) -> f64 {
    let g = HammingGraph::complete(n).unwrap();
    let edges: Vec<(u32, u32)> = (0..n as u32)
        .flat_map(|a| (a + 1..n as u32).map(move |b| (a, b)))
        .collect();
    let cut = edges.iter().position(|&e| e == (0, 1)).unwrap();
    let (mut from_origin, mut from_v) = (vec![0.0; n], vec![0.0; n]);
    for mask in 0u32..1 << edges.len() {
        let mut uf = UnionFind::new(n);
        for (k, &(a, b)) in edges.iter().enumerate() {
            if mask >> k & 1 == 1 {
                uf.union(a, b);
            }
        }
        let open = mask.count_ones() as i32;
        let w = p.powi(open) * (1.0 - p).powi(edges.len() as i32 - open);
        for x in 0..n as u32 {
            if uf.find(x) == uf.find(1) {
                from_v[x as usize] += w;
            }
            if mask >> cut & 1 == 0 && uf.find(x) == uf.find(0) {
                // the cut edge is closed with probability 1 - p
                from_origin[x as usize] += w / (1.0 - p);
            }
        }
    }
    let m = g.degree() as f64;
    p * m * from_origin.iter().zip(&from_v).map(|(a, b)| a * b).sum::<f64>()
}

#[test]
fn main_ladder_term() {
    let k6 = HammingGraph::complete(6).unwrap();
    let exact = m_exhaustive(6, 0.3);
    let est = estimate_m(&k6, 0.3, 100_000, 3, &Caps::default()).unwrap();
    assert!(est.z_against_value(exact).abs() < 3.0, "{est:?} {exact}");
    assert_eq!(m_exhaustive(3, 0.0), 0.0);
}

#[test]
fn near_critical_diagram_sizes() {
    let caps = Caps::default();
    for n in [10, 12, 15, 20] {
        let g = HammingGraph::new(3, n).unwrap();
        let m = g.degree() as f64;
        let v = g.volume() as f64;
        let opts = SolverOptions { tol: 1e-5, budget: 2_000_000, ..Default::default() };
        let p = solve_pc(&g, 1.0, opts, 5, &caps).unwrap().p_hat;
        if n == 12 {
            let mm = estimate_m(&g, p, 20_000, 7, &caps).unwrap();
            // 11/4 plus a finite-volume part of order m V^{-1/3}
            assert!((11.0 / 8.0..=11.0 / 2.0).contains(&(m * mm.mean)), "{mm:?}");
            continue;
        }
        let (tau, chi) = estimated_tau(3, n, p, 20_000);
        let report = triangle_at_zero_report(&tau, chi).unwrap();
        assert!(report.scaled_excess < 20.0, "{report:?}");
        assert!(report.triangle_at_zero >= 1.0);
        if n == 15 {
            let open = open_triangle(&tau, p, 0).unwrap();
            assert!(m * (open - 3.0 * chi.powi(3) / v) < 20.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn convolution_paths_agree(d in 1usize..=3, n in 2usize..=6, s in 0u64..1000) {
        let (f, g) = (field(d, n, 2 * s), field(d, n, 2 * s + 1));
        let a = convolve_dft(&f, &g).unwrap();
        let b = convolve_direct(&f, &g).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!((a.sum() - f.sum() * g.sum()).abs() < 1e-8 * a.sum().max(1.0));
    }

    #[test]
    fn triangle_is_symmetric_for_symmetric_tau(n in 2usize..=6, s in 0u64..1000) {
        let raw = field(2, n, s);
        let sym = raw.pointwise(&raw.reflected()).unwrap();
        let tri = triangle_field(&sym).unwrap();
        let refl = tri.reflected();
        for (x, y) in tri.values.iter().zip(&refl.values) {
            prop_assert!((x - y).abs() < 1e-9 * x.abs().max(1.0));
        }
        let _ = Vertex(0);
    }
}
