use hyperperc::randwalk::{
    mixing_time, mixing_time_full_chain, nbw_distance_distribution, nbw_full_chain, nbw_point_max,
    project_to_classes, srw_distance_distribution, srw_full_chain, DEFAULT_MIXING_CAP,
};
use hyperperc::HammingGraph;
use num_rational::BigRational;
use proptest::prelude::*;

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn simple_walk() {
    assert_eq!(srw_distance_distribution::<f64>(2, 3, 0).unwrap(), vec![1.0, 0.0, 0.0]);
    assert_eq!(srw_distance_distribution::<f64>(2, 3, 1).unwrap(), vec![0.0, 1.0, 0.0]);
    let g = HammingGraph::new(2, 3).unwrap();
    let full = project_to_classes(&g, &srw_full_chain::<f64>(&g, 3));
    assert!(max_diff(&full, &srw_distance_distribution::<f64>(2, 3, 3).unwrap()) < 1e-14);
}

#[test]
fn non_backtracking_walk() {
    let (d, n) = (2, 3);
    let m = 4.0;
    assert_eq!(nbw_distance_distribution::<f64>(d, n, 1).unwrap(), vec![0.0, 1.0, 0.0]);
    assert!((nbw_point_max::<f64>(d, n, 1).unwrap() - 1.0 / m).abs() < 1e-15);
    let k = nbw_distance_distribution::<f64>(1, 7, 2).unwrap();
    assert_eq!(k[0], 0.0);
    let g = HammingGraph::new(d, n).unwrap();
    for t in 0..=6 {
        let full = project_to_classes(&g, &nbw_full_chain::<f64>(&g, t).unwrap());
        assert!(max_diff(&full, &nbw_distance_distribution::<f64>(d, n, t).unwrap()) < 1e-14);
    }
    assert!(nbw_distance_distribution::<f64>(1, 2, 3).is_err());
}

#[test]
fn mixing_times() {
    // 1/m <= (1 + alpha)/V already at the first step
    assert_eq!(mixing_time::<f64>(2, 5, 24.0, 100).unwrap(), 1);
    let g = HammingGraph::new(2, 3).unwrap();
    assert_eq!(mixing_time::<f64>(2, 3, 1.0 / 3.0, 100).unwrap(), 4);
    assert_eq!(mixing_time_full_chain::<f64>(&g, 1.0 / 3.0, 100).unwrap(), 4);
    assert_eq!(mixing_time::<f64>(2, 8, 1.0 / 8.0, 100).unwrap(), 4);
    let third = BigRational::new(1.into(), 3.into());
    assert_eq!(mixing_time::<BigRational>(2, 3, third, 100).unwrap(), 4);
    assert!(mixing_time::<f64>(2, 3, 0.0, 100).is_err());
    assert!(mixing_time::<f64>(2, 3, 1e-300, 3).unwrap_err().is_resource_cap());
}

#[test]
fn mixing_grows_logarithmically() {
    for n in 10..=200 {
        let t = mixing_time::<f64>(2, n, 1.0 / n as f64, DEFAULT_MIXING_CAP).unwrap();
        assert!(t as f64 / (n as f64).ln() <= 10.0, "n={n} t={t}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn distributions_sum_to_one(d in 1usize..=5, n in 3usize..=12, t in 0usize..40) {
        let srw: f64 = srw_distance_distribution::<f64>(d, n, t).unwrap().iter().sum();
        let nbw: f64 = nbw_distance_distribution::<f64>(d, n, t).unwrap().iter().sum();
        prop_assert!((srw - 1.0).abs() < 1e-12);
        prop_assert!((nbw - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lumped_chain_matches_directed_edges(d in 2usize..=3, n in 3usize..=4, t in 0usize..=8) {
        let g = HammingGraph::new(d, n).unwrap();
        let full = project_to_classes(&g, &nbw_full_chain::<f64>(&g, t).unwrap());
        prop_assert!(max_diff(&full, &nbw_distance_distribution::<f64>(d, n, t).unwrap()) < 1e-14);
    }

    #[test]
    fn point_max_is_at_least_uniform(d in 1usize..=4, n in 3usize..=9, t in 1usize..30) {
        let v = (n as f64).powi(d as i32);
        prop_assert!(nbw_point_max::<f64>(d, n, t).unwrap() >= 1.0 / v - 1e-15);
    }
}
