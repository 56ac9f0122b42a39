use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stablelab::estimators::{fit_line, harmonic_eval_many, BoundaryData, Moments};
use stablelab::geometry::{Ball, Domain, LipschitzGraph, Point};
use stablelab::kernels::{green_ball, green_global, poisson_ball, poisson_half_space};
use stablelab::sampler::{wos_exit, ExitRadiusLaw, WosConfig};

fn alpha() -> impl Strategy<Value = f64> {
    0.2..1.8f64
}

fn planar(max: f64) -> impl Strategy<Value = [f64; 2]> {
    [-max..max, -max..max]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ball_green_is_symmetric_and_below_the_global(a in alpha(), x in planar(0.7), y in planar(0.7)) {
        let ball = Ball::centered(2, 1.0).unwrap();
        prop_assume!(x != y);
        let gxy = green_ball(&ball, a, &x, &y).unwrap();
        let gyx = green_ball(&ball, a, &y, &x).unwrap();
        prop_assert!((gxy - gyx).abs() <= 1e-10 * gxy.abs().max(1e-300));
        prop_assert!(gxy > 0.0);
        let g = green_global(a, &x, &y).unwrap();
        prop_assert!(gxy <= g * (1.0 + 1e-10));
    }

    #[test]
    fn poisson_kernels_are_positive(a in alpha(), x in planar(0.9), z in planar(4.0)) {
        let ball = Ball::centered(2, 1.0).unwrap();
        prop_assume!(x[0].hypot(x[1]) < 0.99 && z[0].hypot(z[1]) > 1.01);
        prop_assert!(poisson_ball(&ball, a, &x, &z).unwrap() > 0.0);
        let xh = [x[0], x[1].abs() + 0.01];
        let zh = [z[0], -z[1].abs() - 0.01];
        prop_assert!(poisson_half_space(a, &xh, &zh).unwrap() > 0.0);
    }

    #[test]
    fn poisson_ball_scales_as_a_density(a in alpha(), x in planar(0.6), z in planar(3.0), lambda in 0.1..10.0f64) {
        prop_assume!(x[0].hypot(x[1]) < 0.9 && z[0].hypot(z[1]) > 1.1);
        let unit = Ball::centered(2, 1.0).unwrap();
        let big = Ball::centered(2, lambda).unwrap();
        let k = poisson_ball(&unit, a, &x, &z).unwrap();
        let ks = poisson_ball(&big, a, &[lambda * x[0], lambda * x[1]], &[lambda * z[0], lambda * z[1]]).unwrap();
        prop_assert!((ks * lambda * lambda / k - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exit_radius_law_is_a_distribution(a in alpha(), r in 0.01..10.0f64, seed in any::<u64>()) {
        let law = ExitRadiusLaw::new(a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..32 {
            prop_assert!(law.sample(r, &mut rng) >= r);
        }
        let mut prev = 0.0;
        for k in 1..20 {
            let c = law.cdf(r, r * (1.0 + 0.5 * k as f64));
            prop_assert!((0.0..=1.0).contains(&c) && c >= prev);
            prev = c;
        }
    }

    #[test]
    fn walks_exit_the_domain(a in alpha(), x1 in -2.0..2.0f64, x2 in 0.01..3.0f64, seed in any::<u64>()) {
        let graph = LipschitzGraph::sine(2, 0.1, 2.0, 0.32).unwrap();
        let domain = Domain::Graph(graph.clone());
        let x = [x1, x2 + graph.gamma(&[x1])];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = wos_exit(&domain, a, &x, &WosConfig::default(), &mut rng).unwrap();
        prop_assert!(!domain.contains(&out.exit_point));
        prop_assert!(out.steps >= 1);
    }

    #[test]
    fn distance_bracket_is_ordered(x1 in -3.0..3.0f64, x2 in 0.001..3.0f64, slope in 0.0..2.0f64) {
        let graph = LipschitzGraph::abs_cone(2, slope, slope.max(1e-9)).unwrap();
        let x = [x1, x2 + graph.gamma(&[x1])];
        let (lo, hi) = Domain::Graph(graph.clone()).dist_to_boundary(&x).unwrap();
        prop_assert!(0.0 < lo && lo <= hi * (1.0 + 1e-12));
        prop_assert!(graph.rho(&graph.boundary_point(&[x1])).abs() < 1e-12);
    }

    #[test]
    fn moments_merge_in_any_split(data in prop::collection::vec(-1e3..1e3f64, 2..200), cut in 0.0..1.0f64) {
        let k = ((data.len() as f64 * cut) as usize).min(data.len());
        let mut all = Moments::new(1);
        data.iter().for_each(|v| all.push(&[*v]));
        let mut a = Moments::new(1);
        let mut b = Moments::new(1);
        data[..k].iter().for_each(|v| a.push(&[*v]));
        data[k..].iter().for_each(|v| b.push(&[*v]));
        a.merge(&b);
        prop_assert_eq!(a.count(), all.count());
        prop_assert!((a.mean(0) - all.mean(0)).abs() <= 1e-9 * (1.0 + all.mean(0).abs()));
        prop_assert!((a.cov(0, 0) - all.cov(0, 0)).abs() <= 1e-9 * (1.0 + all.cov(0, 0)));
    }

    #[test]
    fn exact_lines_are_recovered(slope in -5.0..5.0f64, intercept in -5.0..5.0f64) {
        let xs: Vec<f64> = (0..6).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| slope * x + intercept).collect();
        let (s, _, i) = fit_line(&xs, &ys, &[]).unwrap();
        prop_assert!((s - slope).abs() < 1e-10 && (i - intercept).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn scaling_the_data_scales_the_estimate_exactly(c in 0.1..10.0f64, seed in any::<u64>()) {
        let domain = Domain::half_space(2).unwrap();
        let f = BoundaryData::slab(0, 1.0, 3.0).unwrap();
        let fs = [f.clone(), f.scaled(c)];
        let run = harmonic_eval_many(&domain, 1.0, &fs, &[0.0, 0.5], 2000, seed, &WosConfig::default()).unwrap();
        let (u, v) = (run.estimate(0), run.estimate(1));
        prop_assert!((v.mean - c * u.mean).abs() <= 1e-12 * v.mean.abs().max(1e-300));
        prop_assert!((v.stderr - c * u.stderr).abs() <= 1e-9 * v.stderr.abs().max(1e-300));
    }

    #[test]
    fn unit_data_give_unit_estimates(a in alpha(), seed in any::<u64>()) {
        let domain = Domain::ball(Point::zeros(2), 1.0).unwrap();
        let run = harmonic_eval_many(&domain, a, &[BoundaryData::Constant(1.0)], &[0.3, 0.2], 500, seed, &WosConfig::default()).unwrap();
        let e = run.estimate(0);
        prop_assert_eq!(e.mean, 1.0);
        prop_assert_eq!(e.stderr, 0.0);
    }
}
