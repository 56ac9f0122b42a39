//! Special functions and quadrature.
//!
//! Everything here is a pure function of its arguments. The constants of the
//! stable potential theory (`A(d, −σ)`, the Green and Poisson normalisers)
//! are built on a Lanczos Gamma function; the incomplete integral of the ball
//! Green function is evaluated by adaptive quadrature after substitutions
//! that remove its endpoint singularity.

pub mod gamma;
pub mod planar;
pub mod quad;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

pub use gamma::{beta, chi_squared_sf, gamma as gamma_fn, incomplete_beta_reg, ln_gamma};
pub use planar::{integrate_ball_2d, PlanarRegion, PointSingularity};
pub use quad::{integrate_1d, integrate_tanh_sinh, Bound, EndpointHints, QuadOptions, QuadResult};

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Parameter(format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

fn check_index(name: &str, sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::Parameter(format!("{name} must lie in (0, 2), got {sigma}")));
    }
    Ok(())
}

/// `A(d, −σ) = σ 2^{σ−1} π^{−d/2} Γ((d+σ)/2) / Γ(1−σ/2)`, the constant that
/// makes `A(d,−σ)|z|^{−d−σ}` the Lévy density of `Δ^{σ/2}`.
pub fn normalizing_constant(d: usize, sigma: f64) -> Result<f64> {
    check_dim(d)?;
    check_index("sigma", sigma)?;
    let df = d as f64;
    let log = sigma.ln() + (sigma - 1.0) * 2f64.ln() - 0.5 * df * PI.ln() + ln_gamma(0.5 * (df + sigma))
        - ln_gamma(1.0 - 0.5 * sigma);
    Ok(log.exp())
}

/// `Γ(d/2) / (2^α π^{d/2} Γ(α/2)²)`, prefactor of the Green functions.
pub fn green_constant(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    let log = ln_gamma(0.5 * df) - alpha * 2f64.ln() - 0.5 * df * PI.ln() - 2.0 * ln_gamma(0.5 * alpha);
    log.exp()
}

/// `Γ(d/2) sin(πα/2) / π^{d/2+1}`, prefactor of the ball Poisson kernel.
pub fn poisson_constant(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    (ln_gamma(0.5 * df) - (0.5 * df + 1.0) * PI.ln()).exp() * (0.5 * PI * alpha).sin()
}

/// Constants attached to a parameter triple `(d, α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub a_alpha: f64,
    pub a_beta: f64,
    pub c_green: f64,
    pub c_poisson: f64,
}

impl Constants {
    pub fn new(d: usize, alpha: f64, beta: f64) -> Result<Self> {
        check_dim(d)?;
        check_index("alpha", alpha)?;
        if !(beta > 0.0 && beta < alpha) {
            return Err(Error::Parameter(format!("beta must lie in (0, alpha), got {beta}")));
        }
        Ok(Self {
            d,
            alpha,
            beta,
            a_alpha: normalizing_constant(d, alpha)?,
            a_beta: normalizing_constant(d, beta)?,
            c_green: green_constant(d, alpha),
            c_poisson: poisson_constant(d, alpha),
        })
    }
}

/// `I(∞) = B(α/2, (d−α)/2)`.
pub fn ball_green_integral_limit(d: usize, alpha: f64) -> f64 {
    beta(0.5 * alpha, 0.5 * (d as f64 - alpha))
}

const GREEN_INTEGRAL_TOL: f64 = 1e-13;

/// `I(z) = ∫_0^z (u+1)^{−d/2} u^{α/2−1} du`.
///
/// For `z ≤ 1` the substitution `u = v^{2/α}` gives a smooth integrand on
/// `[0, z^{α/2}]`. For `z > 1` the value is `I(∞)` minus the tail, and the
/// tail is mapped by `u = 1/t`, `t = s^{2/(d−α)}` onto a smooth integrand on
/// `[0, z^{−(d−α)/2}]`.
pub fn ball_green_integral(z: f64, d: usize, alpha: f64) -> Result<f64> {
    check_dim(d)?;
    check_index("alpha", alpha)?;
    if z.is_nan() || z < 0.0 {
        return Err(Error::Domain(format!("incomplete integral needs z >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let half_d = 0.5 * d as f64;
    let opts = QuadOptions::with_rel_tol(GREEN_INTEGRAL_TOL);
    if z <= 1.0 {
        let k = 2.0 / alpha;
        let upper = z.powf(0.5 * alpha);
        let r = integrate_1d(
            |v: f64| k * (v.powf(k) + 1.0).powf(-half_d),
            0.0,
            Bound::Finite(upper),
            &EndpointHints::default(),
            &opts,
        )?;
        Ok(r.value)
    } else if z.is_infinite() {
        Ok(ball_green_integral_limit(d, alpha))
    } else {
        let gap = d as f64 - alpha;
        let k = 2.0 / gap;
        let upper = z.powf(-0.5 * gap);
        let tail = integrate_1d(
            |s: f64| k * (1.0 + s.powf(k)).powf(-half_d),
            0.0,
            Bound::Finite(upper),
            &EndpointHints::default(),
            &opts,
        )?;
        Ok(ball_green_integral_limit(d, alpha) - tail.value)
    }
}

/// Derivative `I'(z) = (z+1)^{−d/2} z^{α/2−1}`.
pub fn ball_green_integrand(z: f64, d: usize, alpha: f64) -> f64 {
    (z + 1.0).powf(-0.5 * d as f64) * z.powf(0.5 * alpha - 1.0)
}
