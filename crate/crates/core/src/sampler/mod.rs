//! Random variates and exit sampling for stable processes.
//!
//! [`wos_exit`] produces exact samples of `X_{τ_D}` for the isotropic
//! α-stable process: every step exits a ball centred at the current point,
//! whose radial exit law is `r/√U` with `U ~ Beta(α/2, 1 − α/2)`, in a
//! uniform direction. [`mixed_path_exit`] is a time-discretised chain for the
//! sum of an α-stable and a scaled β-stable process; it overshoots the
//! boundary and is biased by construction.

pub mod checks;

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp1, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::kernels::StableParams;
use crate::specfun::incomplete_beta_reg;

/// Counter-based stream `(master_seed, stream_index)` backed by ChaCha8.
///
/// Distinct indices select disjoint ChaCha streams, so a path's randomness
/// depends only on its index and not on which worker runs it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Seed for a named sub-experiment, mixed by splitmix64.
    pub fn derive_seed(master_seed: u64, tag: &str) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in tag.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        splitmix64(master_seed ^ splitmix64(h))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform point of the unit sphere `S^{d−1}`.
pub fn sample_sphere_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Point {
    loop {
        let g: Point = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = g.norm();
        if n > 1e-300 {
            return g.scale(1.0 / n);
        }
    }
}

/// Law of `|X_{τ_B} − c|` for a start at the centre of `B(c, r)`.
///
/// `r²/S²` is `Beta(α/2, 1 − α/2)` in every dimension.
#[derive(Debug, Clone)]
pub struct ExitRadiusLaw {
    alpha: f64,
    beta: Beta<f64>,
}

impl ExitRadiusLaw {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 2), got {alpha}")));
        }
        let beta = Beta::new(0.5 * alpha, 1.0 - 0.5 * alpha)
            .map_err(|e| Error::Parameter(format!("exit radius law: {e}")))?;
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Exit radius for a ball of radius `r`.
    pub fn sample<R: Rng + ?Sized>(&self, r: f64, rng: &mut R) -> f64 {
        loop {
            let u = self.beta.sample(rng);
            if u > 0.0 {
                return r / u.sqrt();
            }
        }
    }

    /// `P(S ≤ s) = 1 − I_{r²/s²}(α/2, 1 − α/2)` for `s > r`.
    pub fn cdf(&self, r: f64, s: f64) -> f64 {
        if s <= r {
            return 0.0;
        }
        let a = 0.5 * self.alpha;
        incomplete_beta_reg(1.0 - a, a, 1.0 - (r / s).powi(2))
    }
}

/// One draw of `|X_{τ_{B(c,r)}} − c|` under `P_c`.
pub fn sample_exit_radius_center<R: Rng + ?Sized>(d: usize, alpha: f64, r: f64, rng: &mut R) -> Result<f64> {
    if d < 2 {
        return Err(Error::Parameter(format!("d must be at least 2, got {d}")));
    }
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("radius must be positive, got {r}")));
    }
    Ok(ExitRadiusLaw::new(alpha)?.sample(r, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WosConfig {
    /// Ball radius is `gamma · δ_lower` at each step.
    pub gamma: f64,
    pub max_steps: usize,
    pub record_trace: bool,
}

impl Default for WosConfig {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            max_steps: 10_000,
            record_trace: false,
        }
    }
}

impl WosConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Parameter(format!("wos gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if self.max_steps == 0 {
            return Err(Error::Parameter("wos max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WosOutcome {
    pub exit_point: Point,
    pub steps: usize,
    pub trace: Option<Vec<(Point, f64)>>,
}

/// Reusable walk-on-spheres sampler for one domain and one α.
#[derive(Debug, Clone)]
pub struct WalkOnSpheres<'a> {
    pub domain: &'a Domain,
    pub law: ExitRadiusLaw,
    pub cfg: WosConfig,
}

impl<'a> WalkOnSpheres<'a> {
    pub fn new(domain: &'a Domain, alpha: f64, cfg: WosConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            domain,
            law: ExitRadiusLaw::new(alpha)?,
            cfg,
        })
    }

    pub fn run<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<WosOutcome> {
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        let d = self.domain.dim();
        let mut pos = Point::from(x);
        let mut trace = self.cfg.record_trace.then(Vec::new);
        for step in 1..=self.cfg.max_steps {
            let radius = self.cfg.gamma * self.domain.delta_lower(&pos);
            if let Some(t) = trace.as_mut() {
                t.push((pos.clone(), radius));
            }
            let s = self.law.sample(radius, rng);
            let dir = sample_sphere_direction(d, rng);
            pos = pos.offset(s, &dir);
            if !self.domain.contains(&pos) {
                return Ok(WosOutcome {
                    exit_point: pos,
                    steps: step,
                    trace,
                });
            }
        }
        Err(Error::NonTermination {
            steps: self.cfg.max_steps,
            position: pos.to_vec(),
        })
    }
}

/// Exact sample of `X_{τ_D}` under `P_x`.
pub fn wos_exit<R: Rng + ?Sized>(
    domain: &Domain,
    alpha: f64,
    x: &[f64],
    cfg: &WosConfig,
    rng: &mut R,
) -> Result<WosOutcome> {
    WalkOnSpheres::new(domain, alpha, *cfg)?.run(x, rng)
}

/// Positive strictly stable variate with `E e^{−λS} = e^{−λ^a}`, `0 < a < 1`
/// (Kanter's form of the Chambers-Mallows-Stuck construction).
pub fn sample_one_sided_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Parameter(format!("one-sided index must lie in (0, 1), got {a}")));
    }
    loop {
        let u: f64 = rng.random();
        let e: f64 = rng.sample(Exp1);
        if u <= 0.0 || e <= 0.0 {
            continue;
        }
        let pu = PI * u;
        let s = (a * pu).sin() / pu.sin().powf(1.0 / a) * ((1.0 - a) * pu).sin().powf((1.0 - a) / a)
            / e.powf((1.0 - a) / a);
        if s.is_finite() && s > 0.0 {
            return Ok(s);
        }
    }
}

/// Increment over time `t` of the process with characteristic exponent
/// `|ξ|^α`: `√(2S) G` with `S = t^{2/α} S_{α/2}` and `G` standard Gaussian.
pub fn sample_isotropic_stable_increment<R: Rng + ?Sized>(d: usize, alpha: f64, t: f64, rng: &mut R) -> Result<Point> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    if !(t > 0.0) {
        return Err(Error::Parameter(format!("time step must be positive, got {t}")));
    }
    let s = t.powf(2.0 / alpha) * sample_one_sided_stable(0.5 * alpha, rng)?;
    let scale = (2.0 * s).sqrt();
    Ok((0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect())
}

/// First grid position outside `D` of `Y + ε^{1/β} Z` on the time grid of
/// step `h` (`Y` α-stable, `Z` β-stable). Biased by overshoot and by jumps
/// out and back within a step.
pub fn mixed_path_exit<R: Rng + ?Sized>(
    domain: &Domain,
    params: &StableParams,
    eps: f64,
    x: &[f64],
    h: f64,
    max_steps: usize,
    rng: &mut R,
) -> Result<Point> {
    if !(eps >= 0.0) {
        return Err(Error::Parameter(format!("eps must be nonnegative, got {eps}")));
    }
    if !domain.contains(x) {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    let d = domain.dim();
    let z_scale = eps.powf(1.0 / params.beta);
    let mut pos = Point::from(x);
    for _ in 0..max_steps {
        let y = sample_isotropic_stable_increment(d, params.alpha, h, rng)?;
        pos = pos.add(&y);
        if z_scale > 0.0 {
            let z = sample_isotropic_stable_increment(d, params.beta, h, rng)?;
            pos = pos.offset(z_scale, &z);
        }
        if !domain.contains(&pos) {
            return Ok(pos);
        }
    }
    Err(Error::Truncation { steps: max_steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = RngStream::new(7, 3).rng().random();
        let b: u64 = RngStream::new(7, 3).rng().random();
        let c: u64 = RngStream::new(7, 4).rng().random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(RngStream::derive_seed(1, "a"), RngStream::derive_seed(1, "b"));
    }

    #[test]
    fn sphere_direction_has_unit_norm() {
        let mut rng = RngStream::new(1, 0).rng();
        for d in 2..6 {
            let v = sample_sphere_direction(d, &mut rng);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exit_radius_closed_form_alpha_one() {
        // CDF (2/π) arccos(r/s); the median is s = √2
        let law = ExitRadiusLaw::new(1.0).unwrap();
        assert_relative_eq!(law.cdf(1.0, 2f64.sqrt()), 0.5, max_relative = 1e-13);
        for &s in &[1.01, 1.5, 3.0, 50.0] {
            assert_relative_eq!(law.cdf(1.0, s), 2.0 / PI * (1.0 / s).acos(), max_relative = 1e-12);
        }
    }

    #[test]
    fn exit_radius_support() {
        let mut rng = RngStream::new(2, 0).rng();
        for _ in 0..10_000 {
            assert!(sample_exit_radius_center(3, 0.7, 2.0, &mut rng).unwrap() > 2.0);
        }
    }

    #[test]
    fn single_ball_walk_exits_in_one_step() {
        let ball = Domain::ball(Point::zeros(2), 1.0).unwrap();
        let cfg = WosConfig {
            gamma: 0.999_999,
            ..Default::default()
        };
        let mut rng = RngStream::new(3, 0).rng();
        let out = wos_exit(&ball, 1.0, &[0.0, 0.0], &cfg, &mut rng).unwrap();
        assert_eq!(out.steps, 1);
        assert!(!ball.contains(&out.exit_point));
    }

    #[test]
    fn non_termination_is_reported() {
        let h = Domain::half_space(2).unwrap();
        let cfg = WosConfig {
            gamma: 1e-6,
            max_steps: 1,
            record_trace: true,
        };
        let mut rng = RngStream::new(4, 0).rng();
        let mut hit = false;
        for _ in 0..20 {
            if let Err(Error::NonTermination { steps, .. }) = wos_exit(&h, 1.0, &[0.0, 1.0], &cfg, &mut rng) {
                assert_eq!(steps, 1);
                hit = true;
            }
        }
        assert!(hit);
    }

    #[test]
    fn one_sided_stable_is_positive() {
        let mut rng = RngStream::new(5, 0).rng();
        for _ in 0..10_000 {
            assert!(sample_one_sided_stable(0.3, &mut rng).unwrap() > 0.0);
        }
        assert!(sample_one_sided_stable(1.0, &mut rng).is_err());
    }
}
