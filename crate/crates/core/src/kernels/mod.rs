//! Closed-form kernels of the stable process and its perturbation.
//!
//! Ball formulas are evaluated after translating the centre to the origin,
//! with `r² − |x|²` formed as `(r − |x|)(r + |x|)`.

mod bfunc;
pub mod checks;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{dist, dot, Ball, Domain, Point};
use crate::sampler::sample_sphere_direction;
use crate::specfun::{
    ball_green_integral, ball_green_integrand, integrate_ball_2d, Constants, PlanarRegion, PointSingularity,
};

pub use bfunc::{BFunction, Named, PointFn, RadialFn};

/// Parameter block `(d, α, β, ε0, M1, M2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StableParams {
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub eps0: f64,
    pub m1: f64,
    pub m2: f64,
    pub consts: Constants,
}

impl StableParams {
    pub fn new(d: usize, alpha: f64, beta: f64, eps0: f64, m1: f64, m2: f64) -> Result<Self> {
        let consts = Constants::new(d, alpha, beta)?;
        if !(0.0..=1.0).contains(&eps0) {
            return Err(Error::Parameter(format!("eps0 must lie in [0, 1], got {eps0}")));
        }
        if !(m1 >= 1.0 && m2 >= 1.0) {
            return Err(Error::Parameter(format!("M1 and M2 must be at least 1, got {m1}, {m2}")));
        }
        Ok(Self {
            d,
            alpha,
            beta,
            eps0,
            m1,
            m2,
            consts,
        })
    }

    /// `ε0 = 0`, `M1 = M2 = 1`.
    pub fn basic(d: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(d, alpha, beta, 0.0, 1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub stable_part: f64,
    pub perturbation_part: f64,
}

fn check_points(d: usize, pts: &[&[f64]]) -> Result<()> {
    for p in pts {
        if p.len() != d {
            return Err(Error::Parameter(format!("expected dimension {d}, got a point of dimension {}", p.len())));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("non-finite point {p:?}")));
        }
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    Ok(())
}

/// `J^b(x, y) = A(d,−α)|x−y|^{−d−α} + A(d,−β) b(x, y−x) |x−y|^{−d−β}`.
pub fn jump_kernel(params: &StableParams, b: &BFunction, x: &[f64], y: &[f64]) -> Result<KernelValue> {
    check_points(params.d, &[x, y])?;
    let r = dist(x, y);
    if r == 0.0 {
        return Err(Error::Singularity("jump kernel at x = y".into()));
    }
    let d = params.d as f64;
    let z: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let stable_part = params.consts.a_alpha * r.powf(-d - params.alpha);
    let perturbation_part = params.consts.a_beta * b.eval(params, x, &z) * r.powf(-d - params.beta);
    let value = stable_part + perturbation_part;
    if value < 0.0 {
        return Err(Error::KernelNegativity(format!("J^b(x, y) = {value} at x={x:?}, y={y:?}")));
    }
    Ok(KernelValue {
        value,
        stable_part,
        perturbation_part,
    })
}

/// `J^{ε0}(r) = A(d,−α) r^{−d−α} + ε0 A(d,−β) r^{−d−β}`.
pub fn jump_kernel_reference(params: &StableParams, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("reference kernel needs r > 0, got {r}")));
    }
    let d = params.d as f64;
    Ok(params.consts.a_alpha * r.powf(-d - params.alpha) + params.eps0 * params.consts.a_beta * r.powf(-d - params.beta))
}

/// Point pairs with log-spaced separations in `[r_min, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSpec {
    pub pairs: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            pairs: 1000,
            r_min: 1e-3,
            r_max: 1e3,
            seed: 1,
        }
    }
}

impl SampleSpec {
    /// `(x, y)` pairs: `x` uniform in `[−2, 2]^d`, `y − x` uniform in
    /// direction with log-spaced length.
    pub fn pairs(&self, d: usize) -> Vec<(Point, Point)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = self.pairs.max(1);
        (0..n)
            .map(|i| {
                let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                let r = self.r_min * (self.r_max / self.r_min).powf(t);
                let x: Point = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
                let dir = sample_sphere_direction(d, &mut rng);
                let y = x.offset(r, &dir);
                (x, y)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Assumption1Report {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub pass: bool,
}

/// Range of `J^b / J^{ε0}` over the sample and whether it lies in `[1/M2, M2]`.
pub fn check_assumption1(params: &StableParams, b: &BFunction, sampling: &SampleSpec) -> Result<Assumption1Report> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (x, y) in sampling.pairs(params.d) {
        let j = jump_kernel(params, b, &x, &y)?.value;
        let reference = jump_kernel_reference(params, dist(&x, &y))?;
        let q = j / reference;
        lo = lo.min(q);
        hi = hi.max(q);
    }
    let tol = 1e-12;
    let pass = lo >= (1.0 / params.m2) * (1.0 - tol) && hi <= params.m2 * (1.0 + tol);
    Ok(Assumption1Report {
        ratio_min: lo,
        ratio_max: hi,
        pass,
    })
}

/// Green function of `R^d`, `C_G I(∞) |x − y|^{α−d}` where
/// `C_G I(∞) = Γ((d−α)/2) / (2^α π^{d/2} Γ(α/2))` is the Riesz constant.
/// It is the `r → ∞` limit of [`green_ball`].
pub fn green_global(alpha: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    check_points(x.len(), &[y])?;
    let d = x.len();
    let r = dist(x, y);
    if r == 0.0 {
        return Err(Error::Singularity("Green function at x = y".into()));
    }
    Ok(riesz_constant(d, alpha) * r.powf(alpha - d as f64))
}

/// `Γ((d−α)/2) / (2^α π^{d/2} Γ(α/2))`.
pub fn riesz_constant(d: usize, alpha: f64) -> f64 {
    use crate::specfun::ln_gamma;
    let df = d as f64;
    (ln_gamma(0.5 * (df - alpha)) - alpha * 2f64.ln() - 0.5 * df * std::f64::consts::PI.ln() - ln_gamma(0.5 * alpha)).exp()
}

struct Centred {
    x: Point,
    /// `r² − |x'|²`
    gap: f64,
}

fn centred_inside(ball: &Ball, x: &[f64]) -> Result<Centred> {
    check_points(ball.dim(), &[x])?;
    let xp = Point::from(x).sub(&ball.center);
    let n = xp.norm();
    if n >= ball.radius {
        return Err(Error::Domain(format!("point {x:?} is not inside the ball")));
    }
    let gap = (ball.radius - n) * (ball.radius + n);
    Ok(Centred { x: xp, gap })
}

fn centred_outside(ball: &Ball, z: &[f64]) -> Result<Centred> {
    check_points(ball.dim(), &[z])?;
    let zp = Point::from(z).sub(&ball.center);
    let n = zp.norm();
    if n <= ball.radius {
        return Err(Error::Domain(format!("point {z:?} is not outside the closed ball")));
    }
    let gap = (n - ball.radius) * (n + ball.radius);
    Ok(Centred { x: zp, gap })
}

/// Dimensionless argument `(r²−|x|²)(r²−|y|²) / (r²|x−y|²)` of the ball
/// Green function.
fn green_argument(ball: &Ball, cx: &Centred, cy: &Centred, s2: f64) -> f64 {
    cx.gap * cy.gap / (ball.radius * ball.radius * s2)
}

/// `G_B(x, y) = C_G |x−y|^{α−d} I(z)` for the ball `B`.
pub fn green_ball(ball: &Ball, alpha: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    let cx = centred_inside(ball, x)?;
    let cy = centred_inside(ball, y)?;
    let s = dist(x, y);
    if s == 0.0 {
        return Err(Error::Singularity("ball Green function at x = y".into()));
    }
    let d = ball.dim();
    let z = green_argument(ball, &cx, &cy, s * s);
    let c = crate::specfun::green_constant(d, alpha);
    Ok(c * s.powf(alpha - d as f64) * ball_green_integral(z, d, alpha)?)
}

/// `∇_x G_B(x, y)`, differentiated analytically.
pub fn grad_green_ball(ball: &Ball, alpha: f64, x: &[f64], y: &[f64]) -> Result<Point> {
    check_alpha(alpha)?;
    let cx = centred_inside(ball, x)?;
    let cy = centred_inside(ball, y)?;
    let s = dist(x, y);
    if s == 0.0 {
        return Err(Error::Singularity("ball Green function at x = y".into()));
    }
    let d = ball.dim();
    let df = d as f64;
    let s2 = s * s;
    let z = green_argument(ball, &cx, &cy, s2);
    let c = crate::specfun::green_constant(d, alpha);
    let i = ball_green_integral(z, d, alpha)?;
    let di = ball_green_integrand(z, d, alpha);
    let base = s.powf(alpha - df);
    Ok((0..d)
        .map(|k| {
            let diff = x[k] - y[k];
            let dz = z * (-2.0 * cx.x[k] / cx.gap - 2.0 * diff / s2);
            c * ((alpha - df) * base / s2 * diff * i + base * di * dz)
        })
        .collect())
}

/// `m(x, y) = |x−y|^{α−d} (1 ∧ δ(x)/|x−y|)^{α/2} (1 ∧ δ(y)/|x−y|)^{α/2}`.
pub fn green_ball_envelope(ball: &Ball, alpha: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    centred_inside(ball, x)?;
    centred_inside(ball, y)?;
    let s = dist(x, y);
    if s == 0.0 {
        return Err(Error::Singularity("envelope at x = y".into()));
    }
    let dx = ball.signed_depth(x);
    let dy = ball.signed_depth(y);
    let d = ball.dim() as f64;
    Ok(s.powf(alpha - d) * (dx / s).min(1.0).powf(0.5 * alpha) * (dy / s).min(1.0).powf(0.5 * alpha))
}

/// `K_B(x, z) = C_K (r²−|x|²)^{α/2} (|z|²−r²)^{−α/2} |x−z|^{−d}`.
pub fn poisson_ball(ball: &Ball, alpha: f64, x: &[f64], z: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    let cx = centred_inside(ball, x)?;
    let cz = centred_outside(ball, z)?;
    let d = ball.dim();
    let c = crate::specfun::poisson_constant(d, alpha);
    Ok(c * (cx.gap / cz.gap).powf(0.5 * alpha) * dist(x, z).powi(-(d as i32)))
}

/// Half-space Poisson kernel `C_K (x_d/|z_d|)^{α/2} |x−z|^{−d}` for
/// `x_d > 0 ≥ z_d`.
pub fn poisson_half_space(alpha: f64, x: &[f64], z: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    check_points(x.len(), &[z])?;
    let d = x.len();
    let (xd, zd) = (x[d - 1], z[d - 1]);
    if !(xd > 0.0) {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    if !(zd < 0.0) {
        return Err(Error::Domain(format!("z = {z:?} must lie strictly below the boundary")));
    }
    let c = crate::specfun::poisson_constant(d, alpha);
    Ok(c * (xd / -zd).powf(0.5 * alpha) * dist(x, z).powi(-(d as i32)))
}

/// `∇_x K_B(x, z)` with the ball held fixed.
pub fn grad_poisson_ball_fixed(ball: &Ball, alpha: f64, x: &[f64], z: &[f64]) -> Result<Point> {
    let k = poisson_ball(ball, alpha, x, z)?;
    let cx = centred_inside(ball, x)?;
    let d = ball.dim() as f64;
    let s2 = dist(x, z).powi(2);
    Ok((0..ball.dim())
        .map(|i| k * (-alpha * cx.x[i] / cx.gap + d * (z[i] - x[i]) / s2))
        .collect())
}

/// `∇_x K_{B(x, r)}(x, z)`, the ball moving with `x`.
pub fn grad_poisson_ball_moving(r: f64, alpha: f64, x: &[f64], z: &[f64]) -> Result<Point> {
    check_alpha(alpha)?;
    check_points(x.len(), &[z])?;
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("radius must be positive, got {r}")));
    }
    let d = x.len();
    let w: Vec<f64> = z.iter().zip(x).map(|(a, b)| a - b).collect();
    let n = dot(&w, &w).sqrt();
    if n <= r {
        return Err(Error::Domain(format!("|z − x| = {n} must exceed r = {r}")));
    }
    let df = d as f64;
    let gap = (n - r) * (n + r);
    let c = crate::specfun::poisson_constant(d, alpha) * r.powf(alpha);
    let f = c * (alpha * gap.powf(-0.5 * alpha - 1.0) * n.powf(-df) + df * gap.powf(-0.5 * alpha) * n.powf(-df - 2.0));
    Ok(w.iter().map(|wi| f * wi).collect())
}

/// `∫_B G_B(x, y) J(y, z) dy` by planar quadrature (`d = 2`, `b = Zero`).
pub fn dynkin_poisson_oracle(
    ball: &Ball,
    params: &StableParams,
    b: &BFunction,
    x: &[f64],
    z: &[f64],
    tol: f64,
) -> Result<f64> {
    if params.d != 2 || ball.dim() != 2 {
        return Err(Error::Unsupported("the Dynkin oracle is planar (d = 2)".into()));
    }
    if !matches!(b, BFunction::Zero) {
        return Err(Error::Unsupported(format!(
            "no closed-form Green function for b = {}",
            b.describe()
        )));
    }
    centred_inside(ball, x)?;
    centred_outside(ball, z)?;
    let alpha = params.alpha;
    let a = params.consts.a_alpha;
    let integrand = |y: [f64; 2]| -> f64 {
        if ball.signed_depth(&y) <= 0.0 || (y[0] == x[0] && y[1] == x[1]) {
            return 0.0;
        }
        let g = green_ball(ball, alpha, x, &y).unwrap_or(0.0);
        g * a * dist(&y, z).powf(-2.0 - alpha)
    };
    let r = integrate_ball_2d(
        integrand,
        PlanarRegion::Disc {
            center: [ball.center[0], ball.center[1]],
            radius: ball.radius,
        },
        Some(PointSingularity {
            location: [x[0], x[1]],
            exponent: 2.0 - alpha,
        }),
        tol,
    )?;
    Ok(r.value)
}

/// The envelope `h_B(x, y)` with its three regimes `α >, =, < 2β`.
pub fn h_envelope(ball: &Ball, alpha: f64, beta: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    if !(beta > 0.0 && beta < alpha) {
        return Err(Error::Parameter(format!("beta must lie in (0, alpha), got {beta}")));
    }
    centred_inside(ball, x)?;
    centred_inside(ball, y)?;
    let s = dist(x, y);
    if s == 0.0 {
        return Err(Error::Singularity("h envelope at x = y".into()));
    }
    let d = ball.dim() as f64;
    let dx = ball.signed_depth(x);
    let dy = ball.signed_depth(y);
    let near_y = (dy / s).min(1.0);
    let h = if (alpha - 2.0 * beta).abs() <= 1e-12 * alpha {
        s.powf(beta - d) * near_y.powf(beta) * (s / dx).ln().max(1.0)
    } else if alpha > 2.0 * beta {
        s.powf(alpha - beta - d) * near_y.powf(0.5 * alpha)
    } else {
        s.powf(alpha - beta - d) * near_y.powf(0.5 * alpha) * (s / dx).max(1.0).powf(beta - 0.5 * alpha)
    };
    Ok(h)
}

/// `d · g / (|x − y| ∧ δ_D(x))`, with the lower end of the δ bracket.
pub fn grad_green_bound(domain: &Domain, x: &[f64], y: &[f64], g: f64) -> Result<f64> {
    let (delta, _) = domain.dist_to_boundary(x)?;
    let s = dist(x, y);
    if s == 0.0 {
        return Err(Error::Singularity("gradient bound at x = y".into()));
    }
    Ok(domain.dim() as f64 * g / s.min(delta))
}

/// `b_λ(x, z) = λ^{β−α} b(x/λ, z/λ)`.
pub fn scale_b(b: &BFunction, params: &StableParams, lambda: f64) -> Result<BFunction> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("scale must be positive, got {lambda}")));
    }
    if lambda == 1.0 {
        return Ok(b.clone());
    }
    Ok(match b {
        BFunction::Zero => BFunction::Zero,
        BFunction::Constant(e) => BFunction::Constant(lambda.powf(params.beta - params.alpha) * e),
        BFunction::Scaled { base, lambda: l } => BFunction::Scaled {
            base: base.clone(),
            lambda: l * lambda,
        },
        other => BFunction::Scaled {
            base: Box::new(other.clone()),
            lambda,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingReport {
    pub lambda: f64,
    pub samples: usize,
    pub max_dev_jump: f64,
    pub max_dev_green: f64,
    pub max_dev_poisson: f64,
    pub pass: bool,
}

fn rel_dev(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Pointwise scaling identities for `J^b`, `G_B` and `K_B` on random tuples.
pub fn scaling_checks(params: &StableParams, b: &BFunction, lambda: f64, sampling: &SampleSpec) -> Result<ScalingReport> {
    let bl = scale_b(b, params, lambda)?;
    let d = params.d;
    let df = d as f64;
    let alpha = params.alpha;
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let (mut dj, mut dg, mut dk) = (0.0f64, 0.0f64, 0.0f64);
    let inside = |rng: &mut ChaCha8Rng, r: f64| -> Point {
        let dir = sample_sphere_direction(d, rng);
        let u: f64 = rng.random_range(0.0..0.95);
        dir.scale(r * u.powf(1.0 / df))
    };
    for _ in 0..sampling.pairs {
        let r: f64 = rng.random_range(0.2..3.0);
        let ball = Ball::centered(d, r)?;
        let big = Ball::centered(d, lambda * r)?;
        let x = inside(&mut rng, r);
        let y = inside(&mut rng, r);
        let zdir = sample_sphere_direction(d, &mut rng);
        let z = zdir.scale(r * rng.random_range(1.01..4.0));

        let lhs = jump_kernel(params, &bl, &x, &y)?.value * lambda.powf(df + alpha);
        let rhs = jump_kernel(params, b, &x.scale(1.0 / lambda), &y.scale(1.0 / lambda))?.value;
        dj = dj.max(rel_dev(lhs, rhs));

        let g = green_ball(&ball, alpha, &x, &y)?;
        let gl = lambda.powf(df - alpha) * green_ball(&big, alpha, &x.scale(lambda), &y.scale(lambda))?;
        dg = dg.max(rel_dev(g, gl));

        let k = poisson_ball(&ball, alpha, &x, &z)?;
        let kl = lambda.powf(df) * poisson_ball(&big, alpha, &x.scale(lambda), &z.scale(lambda))?;
        dk = dk.max(rel_dev(k, kl));
    }
    let tol = 1e-12;
    Ok(ScalingReport {
        lambda,
        samples: sampling.pairs,
        max_dev_jump: dj,
        max_dev_green: dg,
        max_dev_poisson: dk,
        pass: dj < tol && dg < tol && dk < tol,
    })
}

/// `E_x τ_{B(0,r)} = Γ(d/2) / (2^α Γ(1+α/2) Γ((d+α)/2)) (r² − |x|²)^{α/2}`.
pub fn mean_exit_time_ball(ball: &Ball, alpha: f64, x: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    let cx = centred_inside(ball, x)?;
    let d = ball.dim() as f64;
    use crate::specfun::ln_gamma;
    let c = (ln_gamma(0.5 * d) - alpha * 2f64.ln() - ln_gamma(1.0 + 0.5 * alpha) - ln_gamma(0.5 * (d + alpha))).exp();
    Ok(c * cx.gap.powf(0.5 * alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_disc() -> Ball {
        Ball::centered(2, 1.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(StableParams::new(2, 1.0, 0.5, 0.0, 1.0, 1.0).is_ok());
        assert!(StableParams::new(1, 1.0, 0.5, 0.0, 1.0, 1.0).is_err());
        assert!(StableParams::new(2, 1.0, 1.2, 0.0, 1.0, 1.0).is_err());
        assert!(StableParams::new(2, 1.0, 0.5, 1.5, 1.0, 1.0).is_err());
        assert!(StableParams::new(2, 1.0, 0.5, 0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn jump_kernel_examples() {
        let p = StableParams::basic(2, 1.0, 0.5).unwrap();
        let v = jump_kernel(&p, &BFunction::Zero, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_relative_eq!(v.value, 1.0 / (2.0 * PI), max_relative = 1e-14);
        let v = jump_kernel(&p, &BFunction::Constant(1.0), &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_relative_eq!(v.value, p.consts.a_alpha + p.consts.a_beta, max_relative = 1e-14);
        assert_relative_eq!(v.value, v.stable_part + v.perturbation_part, max_relative = 1e-15);
        let v = jump_kernel(&p, &BFunction::TruncatedIndicator { c1: 1.0 }, &[0.0, 0.0], &[2.0, 0.0]).unwrap();
        assert_eq!(v.perturbation_part, 0.0);
        assert!(matches!(
            jump_kernel(&p, &BFunction::Zero, &[0.0, 0.0], &[0.0, 0.0]),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn negative_kernel_is_rejected() {
        let p = StableParams::new(2, 1.0, 0.5, 0.0, 100.0, 1.0).unwrap();
        let b = BFunction::Constant(-50.0);
        assert!(matches!(
            jump_kernel(&p, &b, &[0.0, 0.0], &[100.0, 0.0]),
            Err(Error::KernelNegativity(_))
        ));
        assert!(b.validate(&p).is_err());
    }

    #[test]
    fn reference_kernel() {
        let p0 = StableParams::basic(2, 1.0, 0.5).unwrap();
        assert_relative_eq!(jump_kernel_reference(&p0, 2.0).unwrap(), p0.consts.a_alpha * 2f64.powf(-3.0));
        let p1 = StableParams::new(2, 1.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            jump_kernel_reference(&p1, 1.0).unwrap(),
            p1.consts.a_alpha + p1.consts.a_beta,
            max_relative = 1e-15
        );
        assert!(jump_kernel_reference(&p1, 1.5).unwrap() < jump_kernel_reference(&p1, 1.0).unwrap());
        assert!(jump_kernel_reference(&p1, 0.0).is_err());
    }

    #[test]
    fn assumption1_examples() {
        let sampling = SampleSpec {
            pairs: 200,
            ..Default::default()
        };
        let p = StableParams::new(2, 1.0, 0.5, 0.3, 1.0, 1.0).unwrap();
        let r = check_assumption1(&p, &BFunction::Constant(0.3), &sampling).unwrap();
        assert!(r.pass);
        assert_relative_eq!(r.ratio_min, 1.0, max_relative = 1e-12);
        let p0 = StableParams::basic(2, 1.0, 0.5).unwrap();
        assert!(check_assumption1(&p0, &BFunction::Zero, &sampling).unwrap().pass);
        let r = check_assumption1(&p0, &BFunction::TruncatedIndicator { c1: 1.0 }, &sampling).unwrap();
        assert!(!r.pass && r.ratio_max > 1.0);
    }

    #[test]
    fn green_global_example() {
        // Cauchy process in the plane: 1/(2π|x−y|)
        let g = green_global(1.0, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_relative_eq!(g, 1.0 / (2.0 * PI), max_relative = 1e-14);
        // α = 2 limit in d = 3 would be 1/(4π); check the constant identity instead
        assert_relative_eq!(
            riesz_constant(3, 1.5),
            crate::specfun::green_constant(3, 1.5) * crate::specfun::ball_green_integral_limit(3, 1.5),
            max_relative = 1e-13
        );
        let g2 = green_global(1.0, &[0.0, 0.0], &[2.0, 0.0]).unwrap();
        assert_relative_eq!(g2, g * 0.5, max_relative = 1e-14);
    }

    #[test]
    fn green_ball_basic_properties() {
        let b = unit_disc();
        let x = [0.1, 0.2];
        let y = [-0.3, 0.4];
        let g = green_ball(&b, 1.0, &x, &y).unwrap();
        assert_relative_eq!(g, green_ball(&b, 1.0, &y, &x).unwrap(), max_relative = 1e-14);
        assert!(g > 0.0 && g < green_global(1.0, &x, &y).unwrap());
        assert!(green_ball(&b, 1.0, &x, &[0.999_999_9, 0.0]).unwrap() < 1e-3 * g);
        assert!(matches!(green_ball(&b, 1.0, &x, &[1.0, 0.1]), Err(Error::Domain(_))));
    }

    #[test]
    fn green_ball_near_diagonal_matches_global() {
        let b = unit_disc();
        let x = [0.05, -0.1];
        let y = [0.05 + 1e-9, -0.1];
        let ratio = green_ball(&b, 1.3, &x, &y).unwrap() / green_global(1.3, &x, &y).unwrap();
        assert!((ratio - 1.0).abs() < 1e-4);
    }

    #[test]
    fn poisson_ball_example() {
        let b = unit_disc();
        let k = poisson_ball(&b, 1.0, &[0.0, 0.0], &[2f64.sqrt(), 0.0]).unwrap();
        assert_relative_eq!(k, 1.0 / (2.0 * PI * PI), max_relative = 1e-14);
        assert!(matches!(poisson_ball(&b, 1.0, &[0.0, 0.0], &[0.5, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn off_centre_ball_is_translation_invariant() {
        let b0 = unit_disc();
        let b1 = Ball::new(Point::from([10.0, -3.0]), 1.0).unwrap();
        let k0 = poisson_ball(&b0, 0.7, &[0.2, 0.1], &[1.5, 0.3]).unwrap();
        let k1 = poisson_ball(&b1, 0.7, &[10.2, -2.9], &[11.5, -2.7]).unwrap();
        assert_relative_eq!(k0, k1, max_relative = 1e-12);
    }

    #[test]
    fn grad_poisson_at_centre() {
        let b = unit_disc();
        let z = [1.2, -0.7];
        let k = poisson_ball(&b, 1.0, &[0.0, 0.0], &z).unwrap();
        let g = grad_poisson_ball_fixed(&b, 1.0, &[0.0, 0.0], &z).unwrap();
        let n2 = z[0] * z[0] + z[1] * z[1];
        assert_relative_eq!(g[0], k * 2.0 * z[0] / n2, max_relative = 1e-14);
        assert_relative_eq!(g[1], k * 2.0 * z[1] / n2, max_relative = 1e-14);
    }

    #[test]
    fn grad_poisson_reflection() {
        let b = unit_disc();
        let x = [0.0, 0.3];
        let g1 = grad_poisson_ball_fixed(&b, 1.2, &x, &[0.8, 1.1]).unwrap();
        let g2 = grad_poisson_ball_fixed(&b, 1.2, &x, &[-0.8, 1.1]).unwrap();
        assert_relative_eq!(g1[0], -g2[0], max_relative = 1e-14);
        assert_relative_eq!(g1[1], g2[1], max_relative = 1e-14);
    }

    #[test]
    fn grad_poisson_moving_points_away() {
        let x = [0.3, -0.2];
        let z = [2.0, 1.0];
        let g = grad_poisson_ball_moving(1.0, 0.8, &x, &z).unwrap();
        let w = [z[0] - x[0], z[1] - x[1]];
        assert!(g[0] * w[0] > 0.0 && g[1] * w[1] > 0.0);
        assert_relative_eq!(g[0] / w[0], g[1] / w[1], max_relative = 1e-14);
        assert!(grad_poisson_ball_moving(1.0, 0.8, &x, &[0.5, 0.0]).is_err());
    }

    #[test]
    fn h_envelope_regimes() {
        let b = unit_disc();
        let x = [0.0, 0.0];
        let y = [0.5, 0.0];
        let s: f64 = 0.5;
        let h = h_envelope(&b, 1.5, 0.5, &x, &y).unwrap();
        assert_relative_eq!(h, s.powf(1.5 - 0.5 - 2.0), max_relative = 1e-14);
        // α = 2β: log factor only when |x−y| > e δ(x)
        let xn = [0.0, 0.99];
        let yn = [0.0, -0.5];
        let s: f64 = 1.49;
        let h = h_envelope(&b, 1.0, 0.5, &xn, &yn).unwrap();
        let expected = s.powf(0.5 - 2.0) * (0.5 / s).powf(0.5) * (s / 0.01f64).ln();
        assert_relative_eq!(h, expected, max_relative = 1e-12);
        let h = h_envelope(&b, 1.0, 0.75, &xn, &yn).unwrap();
        let expected = s.powf(1.0 - 0.75 - 2.0) * (0.5 / s).powf(0.5) * (s / 0.01f64).powf(0.25);
        assert_relative_eq!(h, expected, max_relative = 1e-12);
    }

    #[test]
    fn scale_b_examples() {
        let p = StableParams::basic(2, 1.0, 0.5).unwrap();
        let c = scale_b(&BFunction::Constant(0.4), &p, 2.0).unwrap();
        match c {
            BFunction::Constant(e) => assert_relative_eq!(e, 2f64.powf(-0.5) * 0.4, max_relative = 1e-15),
            _ => panic!("constant expected"),
        }
        assert!(matches!(scale_b(&BFunction::Zero, &p, 1.0).unwrap(), BFunction::Zero));
        assert!(scale_b(&BFunction::Zero, &p, 0.0).is_err());
    }

    #[test]
    fn mean_exit_time_unit_disc() {
        let t = mean_exit_time_ball(&unit_disc(), 1.0, &[0.0, 0.0]).unwrap();
        assert_relative_eq!(t, 2.0 / PI, max_relative = 1e-14);
    }

    #[test]
    fn builtin_b_functions_validate() {
        let p = StableParams::new(3, 1.2, 0.6, 0.0, 2.0, 4.0).unwrap();
        for b in [
            BFunction::Zero,
            BFunction::Constant(0.5),
            BFunction::TruncatedIndicator { c1: 1.0 },
            BFunction::radial("bump", "trunc").unwrap(),
            BFunction::radial("osc", "exp").unwrap(),
            BFunction::sde("osc").unwrap(),
        ] {
            b.validate(&p).unwrap();
        }
        let tb = BFunction::TruncatedWithBase { c2: 1.0, gamma: 0.3 };
        let big = StableParams::new(3, 1.2, 0.6, 0.0, 10.0, 4.0).unwrap();
        tb.validate(&big).unwrap();
        assert!(BFunction::TruncatedWithBase { c2: 1.0, gamma: 0.7 }.validate(&big).is_err());
    }
}
