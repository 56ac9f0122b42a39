//! The barrier function of a boundary box: the probability of leaving
//! `D^+(z0, h, 2r)` anywhere except into the inverted box below the graph.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{run_paths, ExperimentReport};
use crate::error::{Error, Result};
use crate::geometry::{dist, make_box, Domain, LipschitzGraph, Orientation, Point, BOUNDARY_TOL};
use crate::sampler::{WalkOnSpheres, WosConfig};

#[derive(Debug, Clone)]
pub struct BarrierConfig {
    pub graph: LipschitzGraph,
    pub z0: Point,
    pub r: f64,
    pub alpha: f64,
    /// Heights `t` of the points `z0 + t e_d`, increasing.
    pub heights: Vec<f64>,
    pub n: usize,
    pub wos: WosConfig,
}

impl BarrierConfig {
    /// Box height `4r√(1+λ0²)`.
    pub fn box_height(&self) -> f64 {
        4.0 * self.r * (1.0 + self.graph.lambda0().powi(2)).sqrt()
    }

    /// `m` heights evenly spaced strictly inside the box.
    pub fn even_heights(&self, m: usize) -> Vec<f64> {
        let h = self.box_height();
        (1..=m).map(|i| h * i as f64 / (m + 1) as f64).collect()
    }
}

/// `ĝ(z0 + t e_d)` for every height on common random numbers, with the
/// monotonicity check and the centred-difference statistic
/// `(∂_d ĝ)·δ/ĝ` at interior heights.
pub fn barrier_experiment(cfg: &BarrierConfig, seed: u64) -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let d = cfg.graph.dim();
    if cfg.z0.dim() != d || cfg.graph.rho(&cfg.z0).abs() > BOUNDARY_TOL {
        return Err(Error::Domain(format!("anchor {:?} is not on the graph", cfg.z0)));
    }
    let hb = cfg.box_height();
    let m = cfg.heights.len();
    if m < 3 {
        return Err(Error::Parameter("need at least three heights".into()));
    }
    if cfg.heights.windows(2).any(|w| w[0] >= w[1]) || cfg.heights[0] <= 0.0 || cfg.heights[m - 1] >= hb {
        return Err(Error::Parameter(format!("heights must increase strictly inside (0, {hb})")));
    }
    let bx = make_box(&cfg.graph, cfg.z0.clone(), hb, 2.0 * cfg.r, Orientation::Plus)?;
    let domain = Domain::Box(bx);
    let walk = WalkOnSpheres::new(&domain, cfg.alpha, cfg.wos)?;
    let up = Point::axis(d, d - 1, 1.0);
    let starts: Vec<Point> = cfg.heights.iter().map(|t| cfg.z0.offset(*t, &up)).collect();
    let z0_tilde = cfg.z0.tilde().to_vec();
    let width = 2.0 * cfg.r;

    let mut rep = ExperimentReport::new("barrier", seed);
    rep.param("graph", cfg.graph.name())
        .param("z0", format!("{:?}", cfg.z0))
        .param("r", cfg.r)
        .param("alpha", cfg.alpha)
        .param("box_height", hb)
        .param("heights", format!("{:?}", cfg.heights))
        .param("n", cfg.n);

    // outputs: ĝ at each height, then the count of near-ties
    let run = run_paths(cfg.n, m + 1, seed, |rng, out| {
        let path_seed: u64 = rng.random();
        let mut ties = 0.0;
        for (i, x) in starts.iter().enumerate() {
            let y = walk.run(x, &mut ChaCha8Rng::seed_from_u64(path_seed))?.exit_point;
            let rho = cfg.graph.rho(&y);
            if rho.abs() <= BOUNDARY_TOL {
                ties += 1.0;
            }
            // ρ ≤ 0 on the lower side: the half-open convention of D^−
            let below = rho <= 0.0 && dist(&y[..d - 1], &z0_tilde) < width;
            out[i] = if below { 0.0 } else { 1.0 };
        }
        out[m] = ties;
        Ok(())
    })?;
    let mo = &run.moments;
    for (i, x) in starts.iter().enumerate() {
        rep.point(format!("t={}", cfg.heights[i]), x, run.estimate(i));
    }
    let mut violations = 0usize;
    for i in 0..m - 1 {
        let (dg, se) = mo.diff(i + 1, i);
        if dg < -2.0 * se {
            violations += 1;
        }
    }
    rep.stat("monotonicity_violations", violations as f64, 0.0);
    rep.stat("g_top", mo.mean(m - 1), mo.stderr(m - 1));
    rep.stat("ties", mo.mean(m), mo.stderr(m));
    let mut min_ratio = f64::INFINITY;
    for i in 1..m - 1 {
        let span = cfg.heights[i + 1] - cfg.heights[i - 1];
        let delta = cfg.graph.rho(&starts[i]);
        let g = mo.mean(i);
        let slope = (mo.mean(i + 1) - mo.mean(i - 1)) / span;
        let value = slope * delta / g;
        // gradient in (g_{i−1}, g_i, g_{i+1})
        let w = [-delta / (span * g), -value / g, delta / (span * g)];
        let idx = [i - 1, i, i + 1];
        let mut var = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                var += w[a] * w[b] * mo.cov(idx[a], idx[b]);
            }
        }
        let se = (var.max(0.0) / mo.count() as f64).sqrt();
        rep.stat(format!("ratio_t{i}"), value, se);
        min_ratio = min_ratio.min(value);
    }
    rep.stat("min_interior_ratio", min_ratio, 0.0);
    rep.tolerance = "no decrease beyond 2 sigma; interior ratios positive".into();
    rep.pass = violations == 0 && min_ratio > 0.0;
    Ok(rep.finish(t0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barrier_rises_with_height() {
        let cfg = BarrierConfig {
            graph: LipschitzGraph::flat(2),
            z0: Point::zeros(2),
            r: 0.5,
            alpha: 1.0,
            heights: vec![],
            n: 4000,
            wos: WosConfig::default(),
        };
        let cfg = BarrierConfig {
            heights: cfg.even_heights(4),
            ..cfg
        };
        let rep = barrier_experiment(&cfg, 5).unwrap();
        let gs: Vec<f64> = rep.points.iter().map(|p| p.estimate.mean).collect();
        assert!(gs.windows(2).all(|w| w[1] >= w[0] - 0.05), "{gs:?}");
        assert!(gs[0] > 0.0 && gs[3] < 1.0);
    }
}
