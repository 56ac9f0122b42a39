//! Harmonic measure of the mixed-stable process `Y + ε^{1/β} Z` from
//! time-discretised paths, with step halving.

use serde::Serialize;

use super::{run_paths, BoundaryData, MCEstimate};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::kernels::StableParams;
use crate::sampler::mixed_path_exit;

/// `E_x[f(first grid position outside D)]` on the time grid of step `h`.
#[allow(clippy::too_many_arguments)]
pub fn mixed_harmonic_eval(
    domain: &Domain,
    params: &StableParams,
    eps: f64,
    f: &BoundaryData,
    x: &[f64],
    h: f64,
    n: usize,
    max_steps: usize,
    seed: u64,
) -> Result<MCEstimate> {
    let run = run_paths(n, 1, seed, |rng, out| {
        out[0] = f.eval(&mixed_path_exit(domain, params, eps, x, h, max_steps, rng)?);
        Ok(())
    })?;
    Ok(run.estimate(0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementStep {
    pub h: f64,
    pub estimate: MCEstimate,
    /// `|est(h) − est(2h)|` over the combined stderr.
    pub change_z: Option<f64>,
}

/// Halves the time step from `h0` until the estimate moves by less than
/// one combined standard error, or `max_halvings` is reached.
#[allow(clippy::too_many_arguments)]
pub fn mixed_refinement(
    domain: &Domain,
    params: &StableParams,
    eps: f64,
    f: &BoundaryData,
    x: &[f64],
    h0: f64,
    n: usize,
    max_steps: usize,
    max_halvings: usize,
    seed: u64,
) -> Result<Vec<RefinementStep>> {
    if !(h0 > 0.0) {
        return Err(Error::Parameter(format!("initial step must be positive, got {h0}")));
    }
    let mut steps: Vec<RefinementStep> = Vec::new();
    let mut h = h0;
    for level in 0..=max_halvings {
        let budget = max_steps << level;
        let e = mixed_harmonic_eval(domain, params, eps, f, x, h, n, budget, seed.wrapping_add(level as u64))?;
        let change_z = steps.last().map(|p| {
            let s = (p.estimate.stderr.powi(2) + e.stderr.powi(2)).sqrt();
            (e.mean - p.estimate.mean).abs() / s
        });
        steps.push(RefinementStep { h, estimate: e, change_z });
        if change_z.is_some_and(|z| z < 1.0) {
            break;
        }
        h *= 0.5;
    }
    Ok(steps)
}
