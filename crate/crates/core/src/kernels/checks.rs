//! Identity checks over the closed forms, shared by the command line and the
//! test suites. Each check returns one row per case.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::*;
use crate::sampler::{ExitRadiusLaw, RngStream};
use crate::specfun::{integrate_1d, Bound, EndpointHints, QuadOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub case: String,
    pub value: f64,
    pub reference: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seconds: f64,
}

impl CheckRow {
    fn new(check: &str, case: String, value: f64, reference: f64, deviation: f64, tolerance: f64, t0: Instant) -> Self {
        Self {
            check: check.into(),
            case,
            value,
            reference,
            deviation,
            tolerance,
            pass: deviation.is_finite() && deviation < tolerance,
            seconds: t0.elapsed().as_secs_f64(),
        }
    }
}

/// `∫_{|z|>r} K_{B(0,r)}(x, z) dz` in the plane, radial integral outside an
/// angular one.
pub fn poisson_mass_planar(alpha: f64, r: f64, x: [f64; 2], tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let xn = norm_of(&x);
    if xn >= r {
        return Err(Error::Domain(format!("point {x:?} is not inside the ball")));
    }
    let c = crate::specfun::poisson_constant(2, alpha) * ((r - xn) * (r + xn)).powf(0.5 * alpha);
    let inner = QuadOptions::with_rel_tol(tol * 0.05);
    // integrate over the offset e = s − r so the boundary layer keeps full precision
    let angular = |e: f64| -> f64 {
        let s = r + e;
        let radial = c * (e * (s + r)).powf(-0.5 * alpha);
        integrate_1d(
            |t: f64| s * radial / ((s * t.cos() - x[0]).powi(2) + (s * t.sin() - x[1]).powi(2)),
            0.0,
            Bound::Finite(2.0 * PI),
            &EndpointHints::default(),
            &inner,
        )
        .map(|q| q.value)
        .unwrap_or(f64::NAN)
    };
    let hints = EndpointHints {
        left: Some(0.5 * alpha),
        right: None,
        tail_decay: Some(alpha),
    };
    Ok(integrate_1d(angular, 0.0, Bound::Infinity, &hints, &QuadOptions::with_rel_tol(tol))?.value)
}

/// `∫ K_{B(x,ρ)}(x, z) w(z) dz` in the plane for `w(z) = ((z_2)^+)^{α/2}`,
/// by polar quadrature about `x`; equals `w(x)` when `B(x, ρ)` lies in the
/// upper half-plane.
pub fn ball_mean_value_half_power(alpha: f64, x: [f64; 2], rho: f64, tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(rho > 0.0 && rho <= x[1]) {
        return Err(Error::Domain(format!("B({x:?}, {rho}) must lie in the upper half-plane")));
    }
    let c = crate::specfun::poisson_constant(2, alpha) * rho.powf(alpha);
    let p = 0.5 * alpha;
    let inner = QuadOptions::with_rel_tol(tol * 0.05);
    let angular = |e: f64| -> f64 {
        let s = rho + e;
        let radial = c * (e * (s + rho)).powf(-p) / s;
        // w > 0 on the arc (−a, π + a); the integrand is symmetric about π/2
        let a = if s > x[1] { (x[1] / s).asin() } else { 0.5 * PI };
        integrate_1d(
            |t: f64| (x[1] + s * t.sin()).max(0.0).powf(p),
            -a,
            Bound::Finite(0.5 * PI),
            &EndpointHints::default(),
            &inner,
        )
        .map(|q| 2.0 * radial * q.value)
        .unwrap_or(f64::NAN)
    };
    let hints = EndpointHints {
        left: Some(p),
        right: None,
        tail_decay: Some(p),
    };
    Ok(integrate_1d(angular, 0.0, Bound::Infinity, &hints, &QuadOptions::with_rel_tol(tol))?.value)
}

/// Monte-Carlo estimate of `∫ K_{B(0,1)}(x, z) dz` by importance sampling
/// from the centre exit law. Returns `(mean, stderr)`.
pub fn poisson_mass_mc(d: usize, alpha: f64, x: &[f64], n: usize, seed: u64) -> Result<(f64, f64)> {
    let xn = norm_of(x);
    if x.len() != d || xn >= 1.0 {
        return Err(Error::Domain(format!("point {x:?} is not inside the unit ball in R^{d}")));
    }
    let law = ExitRadiusLaw::new(alpha)?;
    // K(x, z)/K(0, z); the (|z|² − 1) factors cancel
    let lift = ((1.0 - xn) * (1.0 + xn)).powf(0.5 * alpha);
    let blocks = 64usize;
    let per = n.div_ceil(blocks);
    let sums: Vec<(f64, f64, usize)> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = RngStream::new(seed, blk as u64).rng();
            let (mut s1, mut s2, mut m) = (0.0, 0.0, 0usize);
            for _ in 0..per.min(n.saturating_sub(blk * per)) {
                let s = law.sample(1.0, &mut rng);
                let z = sample_sphere_direction(d, &mut rng).scale(s);
                let w = lift * (s / dist(&z, x)).powi(d as i32);
                s1 += w;
                s2 += w * w;
                m += 1;
            }
            (s1, s2, m)
        })
        .collect();
    let (s1, s2, m) = sums
        .into_iter()
        .fold((0.0, 0.0, 0usize), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let mf = m as f64;
    let mean = s1 / mf;
    let var = (s2 / mf - mean * mean).max(0.0) * mf / (mf - 1.0);
    Ok((mean, (var / mf).sqrt()))
}

/// Total mass of the ball Poisson kernel: quadrature in the plane for each
/// α and `|x|/r`, plus Monte-Carlo rows in `d = 3`.
pub fn poisson_normalization(alphas: &[f64], ratios: &[f64], mc_samples: usize, seed: u64) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for &alpha in alphas {
        for &q in ratios {
            let t0 = Instant::now();
            let m = poisson_mass_planar(alpha, 1.0, [q, 0.0], 1e-10)?;
            rows.push(CheckRow::new(
                "poisson-normalization",
                format!("d=2 alpha={alpha} |x|/r={q}"),
                m,
                1.0,
                (m - 1.0).abs(),
                1e-6,
                t0,
            ));
        }
    }
    if mc_samples > 0 {
        for &alpha in alphas {
            for &q in ratios {
                let t0 = Instant::now();
                let (m, se) = poisson_mass_mc(3, alpha, &[q, 0.0, 0.0], mc_samples, seed)?;
                let mut row = CheckRow::new(
                    "poisson-normalization",
                    format!("d=3 alpha={alpha} |x|/r={q} (MC, n={mc_samples})"),
                    m,
                    1.0,
                    (m - 1.0).abs() / se.max(1e-300),
                    3.0,
                    t0,
                );
                if se == 0.0 {
                    row.pass = m == 1.0;
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// Default near- and far-field pairs for the Dynkin comparison.
pub fn dynkin_default_cases() -> Vec<([f64; 2], [f64; 2])> {
    let s2 = std::f64::consts::SQRT_2;
    vec![
        ([0.0, 0.0], [s2, 0.0]),
        ([0.0, 0.0], [4.0, 0.0]),
        ([0.0, 0.0], [1.05, 0.0]),
        ([0.5, 0.0], [1.2, 0.3]),
        ([0.3, -0.4], [-2.0, 2.5]),
        ([-0.6, 0.2], [-1.1, 0.1]),
    ]
}

/// `∫_B G_B J dy` against the closed-form Poisson kernel.
pub fn dynkin(alphas: &[f64], cases: &[([f64; 2], [f64; 2])]) -> Result<Vec<CheckRow>> {
    let ball = Ball::centered(2, 1.0)?;
    let mut work = Vec::new();
    for &alpha in alphas {
        for c in cases {
            work.push((alpha, *c));
        }
    }
    work.into_par_iter()
        .map(|(alpha, (x, z))| {
            let t0 = Instant::now();
            let params = StableParams::basic(2, alpha, 0.5 * alpha)?;
            let quad = dynkin_poisson_oracle(&ball, &params, &BFunction::Zero, &x, &z, 1e-6)?;
            let exact = poisson_ball(&ball, alpha, &x, &z)?;
            Ok(CheckRow::new(
                "dynkin",
                format!("alpha={alpha} x={x:?} z={z:?}"),
                quad,
                exact,
                rel_dev(quad, exact),
                1e-3,
                t0,
            ))
        })
        .collect()
}

/// Scaling identities for the listed coefficients and scale factors.
pub fn scaling(params: &StableParams, bs: &[BFunction], lambdas: &[f64], samples: usize) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for b in bs {
        for &lambda in lambdas {
            let t0 = Instant::now();
            let sampling = SampleSpec {
                pairs: samples,
                seed: 11,
                ..Default::default()
            };
            let rep = scaling_checks(params, b, lambda, &sampling)?;
            let dev = rep.max_dev_jump.max(rep.max_dev_green).max(rep.max_dev_poisson);
            rows.push(CheckRow::new(
                "scaling",
                format!("b={} lambda={lambda} (J {:.1e}, G {:.1e}, K {:.1e})", b.describe(), rep.max_dev_jump, rep.max_dev_green, rep.max_dev_poisson),
                dev,
                0.0,
                dev,
                1e-12,
                t0,
            ));
        }
    }
    Ok(rows)
}

fn central_difference<F: Fn(&[f64]) -> Result<f64>>(f: F, x: &[f64], h: f64) -> Result<Point> {
    let mut g = Point::zeros(x.len());
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = f(&xp)?;
        xp[i] = x[i] - h;
        let fm = f(&xp)?;
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

fn vec_rel_dev(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    diff / norm_of(a).max(norm_of(b))
}

fn norm_of(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Analytic gradients against central differences, and the gradient
/// envelope `d G/(|x−y| ∧ δ)` against a finite-differenced ball Green
/// function.
pub fn gradient_fd(configs: usize, envelope_pairs: usize, seed: u64) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_fixed, mut worst_moving, mut worst_green) = (0.0f64, 0.0f64, 0.0f64);
    let t0 = Instant::now();
    for _ in 0..configs {
        let d = rng.random_range(2..=4usize);
        let alpha: f64 = rng.random_range(0.1..1.9);
        let r: f64 = rng.random_range(0.3..3.0);
        let center: Point = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ball = Ball::new(center.clone(), r)?;
        let x = center.offset(r * rng.random_range(0.0..0.9), &sample_sphere_direction(d, &mut rng));
        let z = x.offset(r * rng.random_range(1.1..4.0), &sample_sphere_direction(d, &mut rng));
        if ball.contains(&z) {
            continue;
        }
        let h = 1e-6 * r;
        let g = grad_poisson_ball_fixed(&ball, alpha, &x, &z)?;
        let fd = central_difference(|p| poisson_ball(&ball, alpha, p, &z), &x, h)?;
        worst_fixed = worst_fixed.max(vec_rel_dev(&g, &fd));

        let gm = grad_poisson_ball_moving(r, alpha, &x, &z)?;
        let fdm = central_difference(
            |p| {
                let moving = Ball::new(Point::from(p), r)?;
                poisson_ball(&moving, alpha, p, &z)
            },
            &x,
            h,
        )?;
        worst_moving = worst_moving.max(vec_rel_dev(&gm, &fdm));

        let y = center.offset(r * rng.random_range(0.0..0.9), &sample_sphere_direction(d, &mut rng));
        if dist(&x, &y) > 1e-3 * r {
            let gg = grad_green_ball(&ball, alpha, &x, &y)?;
            let hs = 1e-5 * dist(&x, &y).min(ball.signed_depth(&x));
            let fdg = central_difference(|p| green_ball(&ball, alpha, p, &y), &x, hs)?;
            worst_green = worst_green.max(vec_rel_dev(&gg, &fdg));
        }
    }
    let mut rows = vec![
        CheckRow::new("gradient-fd", format!("fixed-ball Poisson gradient, {configs} configs"), worst_fixed, 0.0, worst_fixed, 1e-6, t0),
        CheckRow::new("gradient-fd", format!("moving-ball Poisson gradient, {configs} configs"), worst_moving, 0.0, worst_moving, 1e-6, t0),
        CheckRow::new("gradient-fd", format!("ball Green gradient, {configs} configs"), worst_green, 0.0, worst_green, 1e-6, t0),
    ];

    let t1 = Instant::now();
    let mut worst_ratio = 0.0f64;
    for _ in 0..envelope_pairs {
        let d = rng.random_range(2..=3usize);
        let alpha: f64 = rng.random_range(0.2..1.8);
        let ball = Ball::centered(d, 1.0)?;
        let x = sample_sphere_direction(d, &mut rng).scale(rng.random_range(0.0..0.98));
        let y = sample_sphere_direction(d, &mut rng).scale(rng.random_range(0.0..0.98));
        let s = dist(&x, &y);
        if s < 1e-4 {
            continue;
        }
        let delta = ball.signed_depth(&x);
        let hs = 1e-5 * s.min(delta);
        let fd = central_difference(|p| green_ball(&ball, alpha, p, &y), &x, hs)?;
        let g = green_ball(&ball, alpha, &x, &y)?;
        let bound = grad_green_bound(&Domain::Ball(ball.clone()), &x, &y, g)?;
        worst_ratio = worst_ratio.max(norm_of(&fd) / bound);
    }
    let mut row = CheckRow::new(
        "gradient-fd",
        format!("|grad G_B| / (d G_B/(|x-y| ^ delta)), {envelope_pairs} pairs"),
        worst_ratio,
        1.0,
        worst_ratio,
        1.0,
        t1,
    );
    row.pass = worst_ratio <= 1.0;
    rows.push(row);
    Ok(rows)
}

/// Assumption 1 on the sample for one coefficient.
pub fn assumption1(params: &StableParams, b: &BFunction, sampling: &SampleSpec) -> Result<Vec<CheckRow>> {
    let t0 = Instant::now();
    let rep = check_assumption1(params, b, sampling)?;
    let mut row = CheckRow::new(
        "assumption1",
        format!(
            "b={} eps0={} M2={}: ratio in [{:.6}, {:.6}]",
            b.describe(),
            params.eps0,
            params.m2,
            rep.ratio_min,
            rep.ratio_max
        ),
        rep.ratio_max,
        params.m2,
        (rep.ratio_max * params.m2).max(1.0 / (rep.ratio_min * params.m2)) - 1.0,
        0.0,
        t0,
    );
    row.pass = rep.pass;
    Ok(vec![row])
}

/// `∫_{B(0,1)} G_B(0, y) dy` in the plane by two routes: the planar rule
/// with a point singularity at the origin, and the radial reduction
/// `2π ∫_0^1 s G_B(0, s e_1) ds`.
pub fn mean_exit_time_routes(alpha: f64, tol: f64) -> Result<(f64, f64)> {
    let ball = Ball::centered(2, 1.0)?;
    let planar = integrate_ball_2d(
        |y| {
            if y == [0.0, 0.0] || ball.signed_depth(&y) <= 0.0 {
                0.0
            } else {
                green_ball(&ball, alpha, &[0.0, 0.0], &y).unwrap_or(f64::NAN)
            }
        },
        PlanarRegion::Disc {
            center: [0.0, 0.0],
            radius: 1.0,
        },
        Some(PointSingularity {
            location: [0.0, 0.0],
            exponent: 2.0 - alpha,
        }),
        tol,
    )?
    .value;
    let hints = EndpointHints {
        left: (alpha < 1.0).then_some(1.0 - alpha),
        ..Default::default()
    };
    let radial = 2.0
        * PI
        * integrate_1d(
            |s: f64| {
                if s <= 0.0 || s >= 1.0 {
                    0.0
                } else {
                    s * green_ball(&ball, alpha, &[0.0, 0.0], &[s, 0.0]).unwrap_or(f64::NAN)
                }
            },
            0.0,
            Bound::Finite(1.0),
            &hints,
            &QuadOptions::with_rel_tol(tol),
        )?
        .value;
    Ok((planar, radial))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_power_has_the_mean_value_property() {
        for &(alpha, rho) in &[(1.0, 0.5), (0.6, 0.9), (1.5, 0.3)] {
            let m = ball_mean_value_half_power(alpha, [0.2, 1.0], rho, 1e-10).unwrap();
            assert!((m - 1.0).abs() < 1e-6, "alpha={alpha} rho={rho}: {m}");
        }
    }

    #[test]
    fn planar_mass_is_one_at_centre() {
        let m = poisson_mass_planar(1.0, 1.0, [0.0, 0.0], 1e-10).unwrap();
        assert!((m - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dynkin_single_case() {
        let rows = dynkin(&[1.0], &[([0.0, 0.0], [std::f64::consts::SQRT_2, 0.0])]).unwrap();
        assert!(rows[0].pass, "{rows:?}");
    }
}
