use hyperperc::asymptotics::{
    chi_formula, chi_line_coefficient, chi_line_formula, gw_mean_progeny, pc_expansion,
    pc_from_pi, pc_second_coefficient, pi_coefficients, pl_lower_bound, second_moment_formula,
    surplus_formula,
};
use hyperperc::errg::exact_susceptibility;
use num_rational::Rational64;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn random_graph_formulas() {
    for n in [10.0, 100.0, 1000.0] {
        assert!(close(chi_formula(0.5, n).unwrap(), 2.0 - 3.5 / n, 1e-12));
        assert!(close(surplus_formula(0.5, n).unwrap(), 0.25 / n, 1e-15));
    }
    assert!(close(chi_formula(0.5, 100.0).unwrap(), 1.965, 1e-12));
    assert_eq!(second_moment_formula(0.5).unwrap(), 8.0);
    assert!(close(second_moment_formula(0.7).unwrap(), 37.037_037, 1e-5));
    assert!(close(surplus_formula(0.7, 1.0).unwrap(), 1.905_555_6, 1e-6));
    assert!(close(chi_formula(1e-9, 50.0).unwrap(), 1.0, 1e-8));
    assert!(close(second_moment_formula(1e-9).unwrap(), 1.0, 1e-8));
    assert!(surplus_formula(0.0, 10.0).unwrap() == 0.0);
    assert!(chi_formula(1.0, 10.0).is_err());
    assert!((chi_formula(0.5f32, 10.0).unwrap() - 1.65).abs() < 1e-6);
}

#[test]
fn line_susceptibility() {
    assert_eq!(chi_line_coefficient(2).unwrap(), Rational64::new(7, 2));
    assert_eq!(chi_line_coefficient(3).unwrap(), Rational64::new(17, 16));
    assert!(chi_line_coefficient(1).is_err());
    // at p = 1/m the main term is d/(d-1)
    for (d, n) in [(2, 1000), (3, 2000)] {
        let m = (d * (n - 1)) as f64;
        let c = chi_line_coefficient(d).unwrap();
        let correction = 1.0 - *c.numer() as f64 / *c.denom() as f64 / m;
        let main = chi_line_formula(1.0 / m, d, n).unwrap() / correction;
        assert!(close(main, d as f64 / (d - 1) as f64, 1e-12), "{main}");
        let exact = exact_susceptibility(n, 1.0 / m).unwrap();
        // what is left is far below the first-order correction
        let first_order = main * (1.0 - correction);
        let diff = (exact - chi_line_formula(1.0 / m, d, n).unwrap()).abs();
        assert!(diff < 0.1 * first_order, "{diff} {first_order}");
    }
}

#[test]
fn critical_point_expansion() {
    assert_eq!(pc_second_coefficient(2).unwrap(), Rational64::new(7, 2));
    assert_eq!(pc_second_coefficient(3).unwrap(), Rational64::new(17, 8));
    assert_eq!(pc_second_coefficient(4).unwrap(), Rational64::new(31, 18));
    let e = pc_expansion(4, 100).unwrap();
    assert_eq!(e.m, 396);
    assert!(close(e.term_value(1).unwrap(), 0.002_525_25, 1e-8));
    assert!(close(e.term_value(2).unwrap(), 0.000_010_98, 1e-8));
    assert!(close(e.value, 0.002_536_23, 1e-8));
    assert_eq!(e.term_value(3), None);
}

#[test]
fn lace_coefficients() {
    let c3 = pi_coefficients(3).unwrap();
    assert_eq!((c3.pi0_lower, c3.pi1_upper), (Rational64::new(5, 8), Rational64::new(11, 4)));
    let c2 = pi_coefficients(2).unwrap();
    assert_eq!((c2.pi0_lower, c2.pi1_upper), (Rational64::new(3, 2), Rational64::from_integer(5)));
    let big = pi_coefficients(1000).unwrap();
    let to_f = |r: Rational64| *r.numer() as f64 / *r.denom() as f64;
    assert!(to_f(big.pi0_lower) < 2e-3);
    assert!(close(to_f(big.pi1_upper), 1.0, 5e-3));
}

#[test]
fn critical_point_from_doubly_connected_sum() {
    let m = 76.0;
    let v = 160_000.0;
    assert!(close(pc_from_pi(0.0, 1e12, m, v).unwrap(), 1.0 / m, 1e-12));
    let c = 1.5;
    let p = pc_from_pi(-c / m, 1e12, m, v).unwrap();
    assert!(close(p * m, 1.0 + c / m, 2.0 * (c / m).powi(2)));
    assert!(pc_from_pi(-1.0, 1.0, m, v).is_err());
}

#[test]
fn branching_progeny() {
    assert_eq!(gw_mean_progeny(1.0, 3).unwrap(), 1.0);
    assert!(close(gw_mean_progeny(1.5, 2).unwrap(), 3.0, 1e-15));
    assert!(close(gw_mean_progeny(1.25, 3).unwrap(), 2.5, 1e-15));
    assert!(gw_mean_progeny(2.0, 2).is_err());
    assert!(gw_mean_progeny(0.5, 2).is_err());
}

#[test]
fn lower_bound_point() {
    assert_eq!(pl_lower_bound(3, 8, 0.125).unwrap(), 0.0);
    let (d, n) = (2, 50);
    let p = pl_lower_bound(d, n, 1.0).unwrap();
    let chi = exact_susceptibility(n, p).unwrap();
    let progeny = gw_mean_progeny(chi, d).unwrap();
    let target = (2500f64).cbrt();
    assert!(((progeny - target) / target).abs() < 1e-10);
    for d in 2..=4 {
        for n in (10..=50).step_by(5) {
            let pl = pl_lower_bound(d, n, 1.0).unwrap();
            let e = pc_expansion(d, n).unwrap();
            assert!(pl < e.value, "d={d} n={n}: {pl} vs {}", e.value);
        }
    }
}
