//! Gradient estimators for harmonic functions and the gradient-bound
//! statistics.
//!
//! The score estimator differentiates the mean-value identity on the fixed
//! ball `B(x, r)`: `∇u(x) = ∫ ∇_x K_{B(x,r)}(x, z) u(z) dz`, and at the
//! centre `∇_x log K = d (z − x)/|z − x|²`, which is bounded by `d/r`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{point_seed, run_paths, BoundaryData, ExperimentReport, MCEstimate, PathRun};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::sampler::{sample_sphere_direction, ExitRadiusLaw, WalkOnSpheres, WosConfig};

/// Per-path outputs `[u sample, score_1 · u, ..., score_d · u]`.
#[allow(clippy::too_many_arguments)]
pub fn score_moments(
    domain: &Domain,
    alpha: f64,
    f: &BoundaryData,
    x: &[f64],
    r: f64,
    n: usize,
    seed: u64,
    wos: &WosConfig,
) -> Result<PathRun> {
    let d = domain.dim();
    let (lower, _) = domain.dist_to_boundary(x)?;
    if !(r > 0.0 && r < lower) {
        return Err(Error::Domain(format!(
            "score ball radius {r} must lie in (0, {lower}), the lower distance to the boundary"
        )));
    }
    let law = ExitRadiusLaw::new(alpha)?;
    let walk = WalkOnSpheres::new(domain, alpha, *wos)?;
    let xp = Point::from(x);
    let df = d as f64;
    run_paths(n, d + 1, seed, |rng, out| {
        let s = law.sample(r, rng);
        let dir = sample_sphere_direction(d, rng);
        let z = xp.offset(s, &dir);
        let exit = if domain.contains(&z) { walk.run(&z, rng)?.exit_point } else { z };
        let v = f.eval(&exit);
        out[0] = v;
        for i in 0..d {
            out[1 + i] = v * df * dir[i] / s;
        }
        Ok(())
    })
}

/// One-ball score estimate of `∇u(x)`, one estimate per component.
#[allow(clippy::too_many_arguments)]
pub fn gradient_score_estimate(
    domain: &Domain,
    alpha: f64,
    f: &BoundaryData,
    x: &[f64],
    r: f64,
    n: usize,
    seed: u64,
    wos: &WosConfig,
) -> Result<Vec<MCEstimate>> {
    let run = score_moments(domain, alpha, f, x, r, n, seed, wos)?;
    Ok((1..=domain.dim()).map(|i| run.estimate(i)).collect())
}

/// Central differences `(u(x + h e_i) − u(x − h e_i)) / 2h` with both
/// walks of a pair driven by the same random numbers.
#[allow(clippy::too_many_arguments)]
pub fn gradient_fd_estimate(
    domain: &Domain,
    alpha: f64,
    f: &BoundaryData,
    x: &[f64],
    h: f64,
    n: usize,
    seed: u64,
    wos: &WosConfig,
) -> Result<Vec<MCEstimate>> {
    let d = domain.dim();
    if !(h > 0.0) {
        return Err(Error::Parameter(format!("difference step must be positive, got {h}")));
    }
    let xp = Point::from(x);
    let shifted: Vec<(Point, Point)> = (0..d)
        .map(|i| {
            let e = Point::axis(d, i, h);
            (xp.add(&e), xp.sub(&e))
        })
        .collect();
    for (p, m) in &shifted {
        for q in [p, m] {
            if !domain.contains(q) {
                return Err(Error::OutsideDomain(q.to_vec()));
            }
        }
    }
    let walk = WalkOnSpheres::new(domain, alpha, *wos)?;
    let run = run_paths(n, d, seed, |rng, out| {
        let path_seed: u64 = rng.random();
        for (i, (p, m)) in shifted.iter().enumerate() {
            let up = walk.run(p, &mut ChaCha8Rng::seed_from_u64(path_seed))?.exit_point;
            let down = walk.run(m, &mut ChaCha8Rng::seed_from_u64(path_seed))?.exit_point;
            out[i] = (f.eval(&up) - f.eval(&down)) / (2.0 * h);
        }
        Ok(())
    })?;
    Ok((0..d).map(|i| run.estimate(i)).collect())
}

#[derive(Debug, Clone)]
pub struct GradientBoundConfig {
    pub domain: Domain,
    pub alpha: f64,
    pub f: BoundaryData,
    pub grid: Vec<Point>,
    /// Score ball radius as a fraction of the lower distance to `∂D`.
    pub radius_fraction: f64,
    pub n: usize,
    pub wos: WosConfig,
    /// Analytic value of both statistics, when known.
    pub expected: Option<f64>,
}

/// `|∇u|·(1∧δ)/u` (upper) and `|∇u|·δ/u` (lower) over the grid, each with
/// a delta-method error from the joint moments of `(u, ∇u)` on the same
/// paths.
pub fn gradient_bound_experiment(cfg: &GradientBoundConfig, seed: u64) -> Result<ExperimentReport> {
    let t0 = Instant::now();
    if !(cfg.radius_fraction > 0.0 && cfg.radius_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "radius fraction must lie in (0, 1), got {}",
            cfg.radius_fraction
        )));
    }
    if cfg.grid.is_empty() {
        return Err(Error::Parameter("empty grid".into()));
    }
    let d = cfg.domain.dim();
    let mut rep = ExperimentReport::new("gradient-bound", seed);
    rep.param("alpha", cfg.alpha)
        .param("data", cfg.f.describe())
        .param("grid", format!("{:?}", cfg.grid))
        .param("radius_fraction", cfg.radius_fraction)
        .param("n", cfg.n);
    let mut upper: Option<(f64, f64)> = None;
    let mut lower: Option<(f64, f64)> = None;
    for (i, x) in cfg.grid.iter().enumerate() {
        let (lo, delta) = cfg.domain.dist_to_boundary(x)?;
        let r = cfg.radius_fraction * lo;
        let run = score_moments(&cfg.domain, cfg.alpha, &cfg.f, x, r, cfg.n, point_seed(seed, "gradient", i), &cfg.wos)?;
        let m = &run.moments;
        let u = m.mean(0);
        if !(u > 2.0 * m.stderr(0)) {
            return Err(Error::Degenerate(format!("u({x:?}) = {u} ± {} is consistent with zero", m.stderr(0))));
        }
        let g: Vec<f64> = (1..=d).map(|k| m.mean(k)).collect();
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        rep.point("u", x, run.estimate(0));
        for k in 0..d {
            rep.point(format!("grad_{k}"), x, run.estimate(1 + k));
        }
        for (scale, slot, name) in [(delta.min(1.0), &mut upper, "upper"), (delta, &mut lower, "lower")] {
            let value = gn * scale / u;
            // ∂/∂u and ∂/∂g_k of |g| scale / u
            let mut grad = vec![-value / u];
            grad.extend(g.iter().map(|gk| scale * gk / (gn * u)));
            let mut var = 0.0;
            for a in 0..=d {
                for b in 0..=d {
                    var += grad[a] * grad[b] * m.cov(a, b);
                }
            }
            let se = (var.max(0.0) / m.count() as f64).sqrt();
            rep.stat(format!("{name}_{i}"), value, se);
            let better = match slot {
                None => true,
                Some((v, _)) => {
                    if name == "upper" {
                        value > *v
                    } else {
                        value < *v
                    }
                }
            };
            if better {
                *slot = Some((value, se));
            }
        }
    }
    let (uv, us) = upper.expect("grid is non-empty");
    let (lv, ls) = lower.expect("grid is non-empty");
    rep.stat("upper", uv, us);
    rep.stat("lower", lv, ls);
    let mut pass = uv.is_finite() && lv.is_finite() && lv > 0.0;
    rep.tolerance = "statistics finite and positive".into();
    if let Some(target) = cfg.expected {
        pass &= (uv - target).abs() <= 3.0 * us && (lv - target).abs() <= 3.0 * ls;
        rep.tolerance = format!("both statistics within 3 sigma of {target}");
    }
    rep.pass = pass;
    Ok(rep.finish(t0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Ball, LipschitzGraph};

    fn half_disc() -> Domain {
        Domain::graph_ball(LipschitzGraph::flat(2), Ball::centered(2, 8.0).unwrap()).unwrap()
    }

    #[test]
    fn unit_data_have_zero_gradient() {
        let g = gradient_score_estimate(
            &half_disc(),
            1.0,
            &BoundaryData::Constant(1.0),
            &[0.0, 1.0],
            0.5,
            20_000,
            3,
            &WosConfig::default(),
        )
        .unwrap();
        for e in g {
            assert!(e.within(0.0, 4.0), "{e:?}");
        }
    }

    #[test]
    fn score_radius_must_fit() {
        let r = gradient_score_estimate(
            &half_disc(),
            1.0,
            &BoundaryData::Constant(1.0),
            &[0.0, 1.0],
            1.5,
            10,
            3,
            &WosConfig::default(),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
