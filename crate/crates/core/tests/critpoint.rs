use hyperperc::asymptotics::pl_lower_bound;
use hyperperc::critpoint::{
    pc_tilde, pc_tilde_exact, solve_pc, solve_pc_exact, verify_twopoint, window_study, PcStatus,
    SolverOptions,
};
use hyperperc::errg::exact_susceptibility;
use hyperperc::{Caps, HammingGraph};
use proptest::prelude::*;

fn grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}

#[test]
fn exact_solver_on_complete_graphs() {
    for n in [27, 64, 125, 1000] {
        let e = solve_pc_exact(n, 1.0).unwrap();
        let target = (n as f64).cbrt();
        assert!((exact_susceptibility(n, e.p_hat).unwrap() - target).abs() < 1e-9 * target);
        assert!(e.width() <= 1e-14);
        assert!((n as f64 * e.p_hat - 1.0).abs() < 1.0);
    }
    assert!(solve_pc_exact(8, 0.5).is_err());
    assert!(solve_pc_exact(27, 20.0).is_err());
}

#[test]
fn estimate_respects_lower_bound() {
    let g = HammingGraph::new(2, 10).unwrap();
    let opts = SolverOptions { tol: 1e-5, budget: 2_000_000, ..Default::default() };
    let e = solve_pc(&g, 1.0, opts, 11, &Caps::default()).unwrap();
    assert!(e.p_hat >= pl_lower_bound(2, 10, 1.0).unwrap() - 3.0 * e.width(), "{e:?}");
    assert!(e.p_lo < e.p_hat && e.p_hat < e.p_hi);
    assert!(e.growths <= opts.budget);
}

#[test]
fn starved_solver_reports_exhaustion() {
    let g = HammingGraph::new(2, 10).unwrap();
    let opts = SolverOptions { budget: 2_000, ..Default::default() };
    let e = solve_pc(&g, 1.0, opts, 1, &Caps::default()).unwrap();
    assert_eq!(e.status, PcStatus::BudgetExhausted);
    assert!(!e.is_conclusive());
}

#[test]
fn log_derivative_maximizer_on_complete_graph() {
    let n = 50;
    let t = pc_tilde_exact(n, &grid(0.2 / n as f64, 2.0 / n as f64, 91)).unwrap();
    assert!(!t.boundary);
    assert!((0.7..=1.3).contains(&(n as f64 * t.p)), "{}", t.p);
    let shifted = pc_tilde_exact(n, &grid(0.6 / n as f64, 2.4 / n as f64, 91)).unwrap();
    assert!((shifted.p - t.p).abs() <= 2.0 * 1.8 / 90.0 / n as f64);
    let edge = pc_tilde_exact(n, &grid(0.1 / n as f64, 0.5 / n as f64, 9)).unwrap();
    assert!(edge.boundary);
    assert!(pc_tilde_exact(n, &[0.1, 0.2, 0.3, 0.4]).is_err());
    assert!(pc_tilde_exact(n, &[0.1, 0.2, 0.2, 0.3, 0.4]).is_err());
}

#[test]
fn monte_carlo_maximizer_tracks_exact_one() {
    let n = 50;
    let g = HammingGraph::complete(n).unwrap();
    let pts = grid(0.5 / n as f64, 1.5 / n as f64, 11);
    let exact = pc_tilde_exact(n, &pts).unwrap();
    let mc = pc_tilde(&g, &pts, 20_000, 3, &Caps::default()).unwrap();
    assert!(mc.index.abs_diff(exact.index) <= 2, "{} {}", mc.index, exact.index);
}

#[test]
fn window_rows_are_consistent() {
    let opts = SolverOptions { tol: 1e-5, budget: 2_000_000, ..Default::default() };
    let rows = window_study(3, &[15], &[0.5, 1.0, 2.0], opts, 9, &Caps::default()).unwrap();
    assert_eq!(rows.len(), 3);
    let scale = rows[0].m as f64 * (15f64.powi(3)).cbrt();
    for w in rows.windows(2) {
        assert!(w[0].estimate.p_hat <= w[1].estimate.p_hat + w[1].estimate.width());
        assert!((w[1].estimate.p_hat - w[0].estimate.p_hat) * scale < 20.0);
    }
    for r in &rows {
        let m = r.m as f64;
        assert!((r.c2_hat - m * m * (r.estimate.p_hat - 1.0 / m)).abs() < 1e-9 * m);
        assert!(r.c2_lo <= r.c2_hat && r.c2_hat <= r.c2_hi);
    }
}

#[test]
fn two_point_residuals() {
    let g = HammingGraph::new(2, 6).unwrap();
    let c = verify_twopoint(&g, 0.0, 10, 1, &Caps::default()).unwrap();
    assert_eq!(c.chi.mean, 1.0);
    assert!(!c.near_critical);
    let d: Vec<usize> = c.rows.iter().map(|r| r.distance).collect();
    assert_eq!(d, [0, 1, 2]);
    assert!((c.rows[0].residual + 1.0 / 36.0).abs() < 1e-12);
    assert!(c.rows[1..].iter().all(|r| (r.residual + 1.0 / 36.0 + if r.distance == 1 { 2.0 / 10.0 } else { 0.0 }).abs() < 1e-12));
    assert!(verify_twopoint(&HammingGraph::complete(6).unwrap(), 0.1, 10, 1, &Caps::default()).is_err());
}

#[test]
fn neighbor_residual_near_critical() {
    let g = HammingGraph::new(2, 30).unwrap();
    let opts = SolverOptions { tol: 1e-5, budget: 2_000_000, ..Default::default() };
    let p = solve_pc(&g, 1.0, opts, 2, &Caps::default()).unwrap().p_hat;
    let c = verify_twopoint(&g, p, 1_000_000, 4, &Caps::default()).unwrap();
    assert!(c.near_critical);
    let nb = c.rows.iter().find(|r| r.distance == 1).unwrap();
    assert!((-20.0..=20.0).contains(&nb.scaled_residual), "{nb:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn exact_solution_increases_with_theta(n in 30usize..300, a in 0.5f64..3.0, b in 0.5f64..3.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(lo * (n as f64).cbrt() > 1.0 && hi < b + 1e-12);
        let (x, y) = (solve_pc_exact(n, lo).unwrap(), solve_pc_exact(n, hi).unwrap());
        prop_assert!(x.p_hat <= y.p_hat);
    }
}
