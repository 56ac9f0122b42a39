//! Statistical checks of the exit sampler against quadrature of the ball
//! Poisson kernel.

use std::f64::consts::PI;

use serde::Serialize;

use super::{wos_exit, RngStream, WosConfig};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::specfun::{chi_squared_sf, gamma_fn, integrate_1d, poisson_constant, Bound, EndpointHints, QuadOptions};

/// Radial exit density at offset `e = s − r` for a start at the centre:
/// `|S^{d−1}| C_K r^α (s² − r²)^{−α/2} / s`.
fn radial_density(d: usize, alpha: f64, r: f64, e: f64) -> f64 {
    if e <= 0.0 {
        return 0.0;
    }
    let sphere = 2.0 * PI.powf(0.5 * d as f64) / gamma_fn(0.5 * d as f64);
    let s = r + e;
    sphere * poisson_constant(d, alpha) * r.powf(alpha) * (e * (s + r)).powf(-0.5 * alpha) / s
}

/// `P(|X_τ − c| ≤ s)` for the ball `B(c, r)` started at `c`, by quadrature
/// of the Poisson kernel (independent of the sampler's closed form).
pub fn exit_radius_cdf_quadrature(d: usize, alpha: f64, r: f64, s: f64) -> Result<f64> {
    if s <= r {
        return Ok(0.0);
    }
    Ok(integrate_1d(
        |e| radial_density(d, alpha, r, e),
        0.0,
        Bound::Finite(s - r),
        &EndpointHints::left(0.5 * alpha),
        &QuadOptions::with_rel_tol(1e-12),
    )?
    .value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitLawCheck {
    pub d: usize,
    pub alpha: f64,
    /// Kolmogorov-Smirnov distance of the exit radii.
    pub ks: f64,
    pub n_radial: usize,
    pub chi2: f64,
    pub chi2_p: f64,
    pub bins: usize,
    pub n_angular: usize,
}

/// Walk-on-spheres on `B(0, 1)` from the centre: radial KS distance against
/// the quadrature CDF and a χ² test of the direction (polar angle for
/// `d = 2`, last coordinate for `d = 3`, which is uniform on `[−1, 1]`).
pub fn single_ball_exit_check(
    d: usize,
    alpha: f64,
    n_radial: usize,
    n_angular: usize,
    bins: usize,
    seed: u64,
) -> Result<ExitLawCheck> {
    if !(d == 2 || d == 3) {
        return Err(Error::Unsupported(format!("exit law check covers d = 2, 3, got {d}")));
    }
    if bins < 2 || n_radial == 0 || n_angular == 0 {
        return Err(Error::Parameter("need samples and at least two bins".into()));
    }
    let ball = Domain::ball(Point::zeros(d), 1.0)?;
    let origin = Point::zeros(d);
    let cfg = WosConfig::default();
    let mut rng = RngStream::new(seed, 0).rng();
    let mut radii = Vec::with_capacity(n_radial);
    for _ in 0..n_radial {
        radii.push(wos_exit(&ball, alpha, &origin, &cfg, &mut rng)?.exit_point.norm());
    }
    radii.sort_by(f64::total_cmp);
    let mut ks: f64 = 0.0;
    let mut cdf = 0.0;
    let mut prev = 0.0;
    let opts = QuadOptions::with_rel_tol(1e-12);
    for (i, s) in radii.iter().enumerate() {
        let e = s - 1.0;
        let hints = if prev == 0.0 { EndpointHints::left(0.5 * alpha) } else { EndpointHints::default() };
        cdf += integrate_1d(|t| radial_density(d, alpha, 1.0, t), prev, Bound::Finite(e), &hints, &opts)?.value;
        prev = e;
        let n = n_radial as f64;
        ks = ks.max((cdf - i as f64 / n).abs()).max(((i + 1) as f64 / n - cdf).abs());
    }
    let mut counts = vec![0usize; bins];
    let mut rng = RngStream::new(seed, 1).rng();
    for _ in 0..n_angular {
        let z = wos_exit(&ball, alpha, &origin, &cfg, &mut rng)?.exit_point;
        let u = if d == 2 {
            (z[1].atan2(z[0]) + PI) / (2.0 * PI)
        } else {
            0.5 * (z[2] / z.norm() + 1.0)
        };
        counts[((u * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let expect = n_angular as f64 / bins as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    Ok(ExitLawCheck {
        d,
        alpha,
        ks,
        n_radial,
        chi2,
        chi2_p: chi_squared_sf(chi2, (bins - 1) as f64),
        bins,
        n_angular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::ExitRadiusLaw;

    #[test]
    fn quadrature_cdf_matches_closed_form() {
        for &(d, alpha) in &[(2, 1.0), (2, 0.4), (3, 1.7)] {
            let law = ExitRadiusLaw::new(alpha).unwrap();
            for &s in &[1.01, 1.5, 3.0, 20.0] {
                let q = exit_radius_cdf_quadrature(d, alpha, 1.0, s).unwrap();
                assert!((q - law.cdf(1.0, s)).abs() < 1e-10, "d={d} alpha={alpha} s={s}");
            }
        }
        // (2/π) arccos(1/s) for d = 2, α = 1
        let q = exit_radius_cdf_quadrature(2, 1.0, 1.0, 2f64.sqrt()).unwrap();
        assert!((q - 0.5).abs() < 1e-12);
    }
}
