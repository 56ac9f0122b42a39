//! Monte-Carlo experiments.
//!
//! Every path-based quantity goes through [`run_paths`], which splits the
//! paths into fixed blocks with their own random streams and folds the
//! block moments in block order. Results therefore do not depend on the
//! number of worker threads.

mod barrier;
mod data;
mod gradient;
mod harmonic;
mod mixed;

use std::collections::BTreeMap;
use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampler::RngStream;
use crate::specfun::chi_squared_sf;

pub use barrier::{barrier_experiment, BarrierConfig};
pub use data::BoundaryData;
pub use gradient::{
    gradient_bound_experiment, gradient_fd_estimate, gradient_score_estimate, score_moments, GradientBoundConfig,
};
pub use harmonic::{
    bhp_experiment, boundary_decay_fit, boundary_ratio_limit_experiment, chained_harnack_experiment,
    decay_experiment, harmonic_eval, harmonic_eval_many, harnack_experiment, BhpConfig, DecayConfig,
    HarnackConfig, RatioLimitConfig,
};
pub use mixed::{mixed_harmonic_eval, mixed_refinement, RefinementStep};

/// Paths per block; blocks are the unit of parallel work and of seeding.
pub const BLOCK_PATHS: usize = 1024;
/// Largest tolerated fraction of non-terminating paths.
pub const MAX_FAILURE_RATE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
    /// Paths dropped because they hit the step budget.
    pub failed: usize,
}

impl MCEstimate {
    pub fn rel_err(&self) -> f64 {
        self.stderr / self.mean.abs()
    }

    /// `|mean − target| ≤ k·stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

/// Running means and co-moments of a vector of per-path outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    n: usize,
    mean: Vec<f64>,
    co: Vec<f64>,
}

impl Moments {
    pub fn new(m: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; m],
            co: vec![0.0; m * m],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, x: &[f64]) {
        let m = self.dim();
        self.n += 1;
        let inv = 1.0 / self.n as f64;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        for (mu, dl) in self.mean.iter_mut().zip(&delta) {
            *mu += dl * inv;
        }
        for i in 0..m {
            for j in 0..m {
                self.co[i * m + j] += delta[i] * (x[j] - self.mean[j]);
            }
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let m = self.dim();
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta: Vec<f64> = other.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        for i in 0..m {
            for j in 0..m {
                self.co[i * m + j] += other.co[i * m + j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for (mu, dl) in self.mean.iter_mut().zip(&delta) {
            *mu += dl * nb / n;
        }
        self.n += other.n;
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.mean[i]
    }

    /// Sample covariance of components `i` and `j`.
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.co[i * self.dim() + j] / (self.n - 1) as f64
    }

    pub fn stderr(&self, i: usize) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.cov(i, i).max(0.0) / self.n as f64).sqrt()
    }

    pub fn estimate(&self, i: usize, seed: u64, failed: usize) -> MCEstimate {
        MCEstimate {
            mean: self.mean(i),
            stderr: self.stderr(i),
            n: self.n,
            seed,
            failed,
        }
    }

    /// `mean_i / mean_j` with its delta-method standard error.
    pub fn ratio(&self, i: usize, j: usize) -> (f64, f64) {
        let (a, b) = (self.mean(i), self.mean(j));
        let q = a / b;
        let var = (self.cov(i, i) - 2.0 * q * self.cov(i, j) + q * q * self.cov(j, j)) / (b * b);
        (q, (var.max(0.0) / self.n as f64).sqrt())
    }

    /// `mean_i − mean_j` with its standard error.
    pub fn diff(&self, i: usize, j: usize) -> (f64, f64) {
        let var = self.cov(i, i) - 2.0 * self.cov(i, j) + self.cov(j, j);
        (self.mean(i) - self.mean(j), (var.max(0.0) / self.n as f64).sqrt())
    }
}

/// Moments of `m` per-path outputs plus the number of dropped paths.
#[derive(Debug, Clone)]
pub struct PathRun {
    pub moments: Moments,
    pub failed: usize,
    pub seed: u64,
}

impl PathRun {
    pub fn estimate(&self, i: usize) -> MCEstimate {
        self.moments.estimate(i, self.seed, self.failed)
    }
}

/// Runs `n` independent paths, each writing `m` outputs. Paths ending in a
/// non-termination error are dropped and counted; the run fails when more
/// than [`MAX_FAILURE_RATE`] of them are dropped. Other errors abort.
pub fn run_paths<F>(n: usize, m: usize, seed: u64, path: F) -> Result<PathRun>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()> + Sync,
{
    if n == 0 {
        return Err(Error::Parameter("need at least one path".into()));
    }
    let blocks = n.div_ceil(BLOCK_PATHS);
    let parts: Vec<Result<(Moments, usize)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = RngStream::new(seed, b as u64).rng();
            let mut acc = Moments::new(m);
            let mut out = vec![0.0; m];
            let mut failed = 0;
            let count = BLOCK_PATHS.min(n - b * BLOCK_PATHS);
            for _ in 0..count {
                out.iter_mut().for_each(|v| *v = 0.0);
                match path(&mut rng, &mut out) {
                    Ok(()) => acc.push(&out),
                    Err(Error::NonTermination { .. }) | Err(Error::Truncation { .. }) => failed += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok((acc, failed))
        })
        .collect();
    let mut moments = Moments::new(m);
    let mut failed = 0;
    for part in parts {
        let (acc, f) = part?;
        moments.merge(&acc);
        failed += f;
    }
    if failed as f64 > MAX_FAILURE_RATE * n as f64 {
        return Err(Error::TooManyFailures { failed, total: n });
    }
    Ok(PathRun { moments, failed, seed })
}

/// Seed for the `i`-th evaluation point of an experiment.
pub fn point_seed(seed: u64, tag: &str, i: usize) -> u64 {
    RngStream::derive_seed(seed, &format!("{tag}/{i}"))
}

/// Weighted least-squares line `y = a + b x`. Zero or missing weights fall
/// back to an unweighted fit. Returns `(slope, slope stderr, intercept)`.
pub fn fit_line(xs: &[f64], ys: &[f64], sigmas: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Parameter("a line fit needs at least two points".into()));
    }
    let weighted = sigmas.len() == xs.len() && sigmas.iter().all(|s| s.is_finite() && *s > 0.0);
    let w: Vec<f64> = if weighted {
        sigmas.iter().map(|s| 1.0 / (s * s)).collect()
    } else {
        vec![1.0; xs.len()]
    };
    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(xs).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(ys).map(|(w, y)| w * y).sum();
    let sxx: f64 = w.iter().zip(xs).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = w.iter().zip(xs).zip(ys).map(|((w, x), y)| w * x * y).sum();
    let det = sw * sxx - sx * sx;
    if det.abs() <= f64::EPSILON * sw * sxx {
        return Err(Error::Degenerate("abscissae of the line fit coincide".into()));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;
    let slope_err = if weighted {
        (sw / det).sqrt()
    } else {
        let k = xs.len() as f64;
        let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        if k > 2.0 {
            (rss / (k - 2.0) * sw / det).sqrt()
        } else {
            0.0
        }
    };
    Ok((slope, slope_err, intercept))
}

/// Agreement of one statistic across independent seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedStability {
    pub values: Vec<(f64, f64)>,
    pub weighted_mean: f64,
    pub chi2: f64,
    pub p_value: f64,
    /// Largest `|a − b| / √(σa² + σb²)` over pairs.
    pub max_pair_z: f64,
    pub pass: bool,
}

/// Pass when every pair of `(value, stderr)` agrees within `k` combined
/// standard errors.
pub fn seed_stability(values: &[(f64, f64)], k: f64) -> Result<SeedStability> {
    if values.len() < 2 {
        return Err(Error::Parameter("seed stability needs at least two runs".into()));
    }
    let mut max_pair_z: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            let s = (a.1 * a.1 + b.1 * b.1).sqrt();
            let z = if s > 0.0 {
                (a.0 - b.0).abs() / s
            } else if a.0 == b.0 {
                0.0
            } else {
                f64::INFINITY
            };
            max_pair_z = max_pair_z.max(z);
        }
    }
    let ws: Vec<f64> = values.iter().map(|v| if v.1 > 0.0 { 1.0 / (v.1 * v.1) } else { 0.0 }).collect();
    let wsum: f64 = ws.iter().sum();
    let (weighted_mean, chi2, p_value) = if wsum > 0.0 {
        let m = ws.iter().zip(values).map(|(w, v)| w * v.0).sum::<f64>() / wsum;
        let c: f64 = ws.iter().zip(values).map(|(w, v)| w * (v.0 - m).powi(2)).sum();
        (m, c, chi_squared_sf(c, (values.len() - 1) as f64))
    } else {
        let m = values.iter().map(|v| v.0).sum::<f64>() / values.len() as f64;
        (m, 0.0, 1.0)
    };
    Ok(SeedStability {
        values: values.to_vec(),
        weighted_mean,
        chi2,
        p_value,
        max_pair_z,
        pass: max_pair_z <= k,
    })
}

/// One evaluation point of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointEstimate {
    pub label: String,
    pub point: Vec<f64>,
    pub estimate: MCEstimate,
}

/// A derived quantity with its propagated uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Statistic {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub parameters: BTreeMap<String, String>,
    pub points: Vec<PointEstimate>,
    pub statistics: Vec<Statistic>,
    pub pass: bool,
    pub tolerance: String,
    pub flags: Vec<String>,
    pub runtime_seconds: f64,
    pub seed: u64,
}

impl ExperimentReport {
    pub(crate) fn new(experiment: &str, seed: u64) -> Self {
        Self {
            experiment: experiment.into(),
            parameters: BTreeMap::new(),
            points: Vec::new(),
            statistics: Vec::new(),
            pass: false,
            tolerance: String::new(),
            flags: Vec::new(),
            runtime_seconds: 0.0,
            seed,
        }
    }

    pub(crate) fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub(crate) fn point(&mut self, label: impl Into<String>, point: &[f64], estimate: MCEstimate) {
        self.points.push(PointEstimate {
            label: label.into(),
            point: point.to_vec(),
            estimate,
        });
    }

    pub(crate) fn stat(&mut self, name: impl Into<String>, value: f64, stderr: f64) {
        self.statistics.push(Statistic {
            name: name.into(),
            value,
            stderr,
        });
    }

    pub(crate) fn finish(mut self, t0: Instant) -> Self {
        self.runtime_seconds = t0.elapsed().as_secs_f64();
        self
    }

    /// Looks up a statistic by name.
    pub fn statistic(&self, name: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.name == name)
    }

    /// Value and stderr of a statistic; panics on a missing name.
    pub fn value(&self, name: &str) -> (f64, f64) {
        let s = self
            .statistic(name)
            .unwrap_or_else(|| panic!("report '{}' has no statistic '{name}'", self.experiment));
        (s.value, s.stderr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn moments_merge_matches_sequential() {
        let data: Vec<[f64; 2]> = (0..257).map(|i| [(i as f64).sin(), (i as f64 * 0.3).cos()]).collect();
        let mut all = Moments::new(2);
        data.iter().for_each(|x| all.push(x));
        let mut a = Moments::new(2);
        let mut b = Moments::new(2);
        data[..100].iter().for_each(|x| a.push(x));
        data[100..].iter().for_each(|x| b.push(x));
        a.merge(&b);
        for i in 0..2 {
            assert_relative_eq!(a.mean(i), all.mean(i), epsilon = 1e-14);
            for j in 0..2 {
                assert_relative_eq!(a.cov(i, j), all.cov(i, j), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn constant_outputs_have_zero_stderr() {
        let run = run_paths(5000, 1, 9, |_, out| {
            out[0] = 1.0;
            Ok(())
        })
        .unwrap();
        let e = run.estimate(0);
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.n, 5000);
    }

    #[test]
    fn runner_is_independent_of_thread_count() {
        let f = |rng: &mut ChaCha8Rng, out: &mut [f64]| {
            out[0] = rng.random::<f64>();
            Ok(())
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_paths(10_000, 1, 3, f)).unwrap();
        let b = four.install(|| run_paths(10_000, 1, 3, f)).unwrap();
        assert_eq!(a.estimate(0), b.estimate(0));
    }

    #[test]
    fn failures_beyond_budget_abort() {
        let r = run_paths(2000, 1, 1, |rng, out| {
            if rng.random::<f64>() < 0.01 {
                return Err(Error::NonTermination { steps: 1, position: vec![] });
            }
            out[0] = 1.0;
            Ok(())
        });
        assert!(matches!(r, Err(Error::TooManyFailures { .. })));
    }

    #[test]
    fn line_fit_recovers_slope() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 - 1.5 * x).collect();
        let (b, _, a) = fit_line(&xs, &ys, &[]).unwrap();
        assert_relative_eq!(b, -1.5, epsilon = 1e-12);
        assert_relative_eq!(a, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn seed_stability_flags_outliers() {
        let ok = seed_stability(&[(1.0, 0.1), (1.1, 0.1), (0.95, 0.1)], 3.0).unwrap();
        assert!(ok.pass);
        let bad = seed_stability(&[(1.0, 0.01), (2.0, 0.01)], 3.0).unwrap();
        assert!(!bad.pass);
    }
}
