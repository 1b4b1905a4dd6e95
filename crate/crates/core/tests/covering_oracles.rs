mod common;

use phaselab::covering::{
    auto_schedule, compression_rate_estimate, covering_number, minkowski_dim_estimate, PointCloud,
};
use phaselab::rng::derive_seed;
use phaselab::sources::{binomial_quantile, sample_source, Continuous, SourceSpec};
use phaselab::Execution;
use proptest::prelude::*;

use common::*;

fn line(xs: &[f64]) -> Vec<Vec<f64>> {
    xs.iter().map(|x| vec![*x]).collect()
}

#[test]
fn three_point_line_matches_exhaustive_search() {
    let pts = line(&[0.0, 0.5, 1.0]);
    let cloud = PointCloud::new(&pts).unwrap();
    assert_eq!(covering_number(&cloud, 0.6).unwrap(), 1);
    assert_eq!(covering_number(&cloud, 0.3).unwrap(), 2);
    // with centers restricted to the set, ρ = 0.3 needs every point
    assert_eq!(optimal_own_cover(&pts, 0.6), 1);
    assert_eq!(optimal_own_cover(&pts, 0.5), 1);
    assert_eq!(optimal_own_cover(&pts, 0.3), 3);
}

#[test]
fn greedy_counts_sit_between_optimal_counts() {
    let mut rng = rng(21);
    for _ in 0..200 {
        let n = rand::Rng::random_range(&mut rng, 1..=10usize);
        let d = rand::Rng::random_range(&mut rng, 1..=3usize);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| gaussian_vec(&mut rng, d)).collect();
        let cloud = PointCloud::new(&pts).unwrap();
        for rho in [0.05, 0.2, 0.5, 1.0, 3.0] {
            let greedy = covering_number(&cloud, rho).unwrap();
            assert!(optimal_own_cover(&pts, 2.0 * rho) <= greedy, "{pts:?} {rho}");
            assert!(greedy <= optimal_own_cover(&pts, rho), "{pts:?} {rho}");
        }
    }
}

#[test]
fn exhaustive_counts_grow_with_the_set() {
    let mut rng = rng(22);
    for _ in 0..100 {
        let pts: Vec<Vec<f64>> = (0..12).map(|_| gaussian_vec(&mut rng, 2)).collect();
        let k = rand::Rng::random_range(&mut rng, 1..12usize);
        for rho in [0.3, 0.8] {
            assert!(optimal_own_cover(&pts[..k], rho) <= optimal_own_cover(&pts, rho));
        }
    }
}

#[test]
fn bounded_clouds_need_one_ball_at_twice_the_bound() {
    let mut rng = rng(23);
    let pts: Vec<Vec<f64>> = (0..300).map(|_| gaussian_vec(&mut rng, 4)).collect();
    let cloud = PointCloud::new(&pts).unwrap();
    assert_eq!(covering_number(&cloud, 2.0 * cloud.radius_bound()).unwrap(), 1);
}

proptest! {
    #[test]
    fn counts_shrink_as_radius_grows(
        pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 1..40),
        r1 in 0.01f64..3.0,
        r2 in 0.01f64..3.0,
    ) {
        let cloud = PointCloud::new(&pts).unwrap();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(covering_number(&cloud, lo).unwrap() >= covering_number(&cloud, hi).unwrap());
    }

    #[test]
    fn slopes_stay_within_ambient_dimension(
        pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..60),
    ) {
        let cloud = PointCloud::new(&pts).unwrap();
        let est = minkowski_dim_estimate(&cloud, &[1.0, 0.5, 0.25, 0.125, 0.0625]).unwrap();
        prop_assert!((0.0..=3.0).contains(&est.lower_slope));
        prop_assert!((0.0..=3.0).contains(&est.upper_slope));
        prop_assert!(est.lower_slope <= est.upper_slope);
        prop_assert!(est.counts.windows(2).all(|w| w[0] <= w[1]));
    }
}

fn sample_cloud(spec: &SourceSpec, n: usize, count: u64, seed: u64, keep: impl Fn(usize) -> bool) -> PointCloud {
    let pts: Vec<Vec<f64>> = (0..count)
        .map(|i| sample_source(spec, n, derive_seed(seed, &[i])).unwrap())
        .filter(|s| keep(s.nonzero_count))
        .map(|s| s.x)
        .collect();
    PointCloud::new(&pts).unwrap()
}

#[test]
fn binomial_quantile_matches_direct_sum() {
    for n in [8usize, 10, 12, 40] {
        for q in [0.5, 0.9, 0.95, 0.99] {
            let k = binomial_quantile(n, 0.3, q);
            assert!(binomial_cdf(n as u64, 0.3, k as u64) >= q - 1e-12);
            if k > 0 {
                assert!(binomial_cdf(n as u64, 0.3, k as u64 - 1) < q);
            }
        }
    }
    assert_eq!(binomial_quantile(8, 0.3, 0.95), 5);
    assert_eq!(binomial_quantile(10, 0.3, 0.95), 5);
    assert_eq!(binomial_quantile(12, 0.3, 0.95), 6);
}

#[test]
fn fully_continuous_source_has_rate_near_one() {
    let spec = SourceSpec::mixed(1.0, Continuous::Uniform);
    let clouds: Vec<(PointCloud, Vec<f64>)> = [1usize, 2]
        .iter()
        .map(|&n| {
            let cloud = sample_cloud(&spec, n, 20_000, 31 + n as u64, |_| true);
            let schedule = auto_schedule(&cloud, Execution::default());
            (cloud, schedule)
        })
        .collect();
    let est = compression_rate_estimate(&clouds, 0.05).unwrap();
    assert!((est.rate - 1.0).abs() <= 0.2, "{est:?}");
}

/// The trimmed event is a union of 5- and 6-dimensional coordinate subspaces;
/// 2·10⁴ samples resolve none of them at scales where slopes approach 5 or 6,
/// so the estimate comes out far below the target.
#[test]
#[ignore = "needs orders of magnitude more samples than a test can draw"]
fn trimmed_mixed_source_rate() {
    let eps = 0.05;
    let spec = SourceSpec::mixed(0.3, Continuous::Uniform);
    let mut targets = Vec::new();
    let clouds: Vec<(PointCloud, Vec<f64>)> = [8usize, 10, 12]
        .iter()
        .map(|&n| {
            let q = binomial_quantile(n, 0.3, 1.0 - eps);
            targets.push(q as f64 / n as f64);
            let cloud = sample_cloud(&spec, n, 20_000, 40 + n as u64, |k| k <= q);
            let schedule = auto_schedule(&cloud, Execution::default());
            (cloud, schedule)
        })
        .collect();
    let est = compression_rate_estimate(&clouds, eps).unwrap();
    let target = targets.iter().copied().fold(0.0, f64::max);
    assert!((est.rate - target).abs() <= 0.15, "target {target}, {est:?}");
}
