use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::StableParams;
use crate::error::{Error, Result};
use crate::geometry::norm;
use crate::sampler::sample_sphere_direction;
use crate::specfun::normalizing_constant;

pub type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A callback with the name it was registered under.
#[derive(Clone)]
pub struct Named<F> {
    pub name: String,
    pub f: F,
}

impl<F> fmt::Debug for Named<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Coefficient `b(x, z)` of the perturbation `S^b`.
#[derive(Debug, Clone)]
pub enum BFunction {
    Zero,
    Constant(f64),
    /// `1_{|z| ≤ c1}`
    TruncatedIndicator { c1: f64 },
    /// `1 + (A(d,−γ)/A(d,−β)) |z|^{β−γ} 1_{|z| ≤ c2}`
    TruncatedWithBase { c2: f64, gamma: f64 },
    /// `φ(x̃) ψ(|z|)`
    RadialProduct { phi: Named<PointFn>, psi: Named<RadialFn> },
    /// `|C(x)|^β`
    SdeCoefficient { c: Named<PointFn> },
    /// `λ^{β−α} b(x/λ, z/λ)`
    Scaled { base: Box<BFunction>, lambda: f64 },
}

impl BFunction {
    /// Built-in `φ` callbacks on `R^{d−1}`.
    pub fn phi_named(name: &str) -> Result<Named<PointFn>> {
        let f: PointFn = match name {
            "one" => Arc::new(|_: &[f64]| 1.0),
            "bump" => Arc::new(|x: &[f64]| 1.0 / (1.0 + x.iter().map(|v| v * v).sum::<f64>())),
            "osc" => Arc::new(|x: &[f64]| 0.75 + 0.25 * x.first().map_or(0.0, |v| v.cos())),
            _ => return Err(Error::Parameter(format!("unknown phi '{name}'"))),
        };
        Ok(Named { name: name.into(), f })
    }

    /// Built-in `ψ` callbacks on radii.
    pub fn psi_named(name: &str) -> Result<Named<RadialFn>> {
        let f: RadialFn = match name {
            "one" => Arc::new(|_: f64| 1.0),
            "trunc" => Arc::new(|r: f64| if r <= 1.0 { 1.0 } else { 0.0 }),
            "exp" => Arc::new(|r: f64| (-r).exp()),
            _ => return Err(Error::Parameter(format!("unknown psi '{name}'"))),
        };
        Ok(Named { name: name.into(), f })
    }

    /// Built-in `C` callbacks on points.
    pub fn c_named(name: &str) -> Result<Named<PointFn>> {
        let f: PointFn = match name {
            "one" => Arc::new(|_: &[f64]| 1.0),
            "osc" => Arc::new(|x: &[f64]| 1.0 + 0.5 * x[0].sin()),
            _ => return Err(Error::Parameter(format!("unknown C '{name}'"))),
        };
        Ok(Named { name: name.into(), f })
    }

    pub fn radial(phi: &str, psi: &str) -> Result<Self> {
        Ok(BFunction::RadialProduct {
            phi: Self::phi_named(phi)?,
            psi: Self::psi_named(psi)?,
        })
    }

    pub fn sde(c: &str) -> Result<Self> {
        Ok(BFunction::SdeCoefficient { c: Self::c_named(c)? })
    }

    /// Short textual form matching the configuration grammar.
    pub fn describe(&self) -> String {
        match self {
            BFunction::Zero => "zero".into(),
            BFunction::Constant(e) => format!("const:{e}"),
            BFunction::TruncatedIndicator { c1 } => format!("trunc:{c1}"),
            BFunction::TruncatedWithBase { c2, gamma } => format!("truncbase:{c2},{gamma}"),
            BFunction::RadialProduct { phi, psi } => format!("radial:{},{}", phi.name, psi.name),
            BFunction::SdeCoefficient { c } => format!("sde:{}", c.name),
            BFunction::Scaled { base, lambda } => format!("scaled({},{lambda})", base.describe()),
        }
    }

    /// `b(x, z)`.
    pub fn eval(&self, params: &StableParams, x: &[f64], z: &[f64]) -> f64 {
        match self {
            BFunction::Zero => 0.0,
            BFunction::Constant(e) => *e,
            BFunction::TruncatedIndicator { c1 } => {
                if norm(z) <= *c1 {
                    1.0
                } else {
                    0.0
                }
            }
            BFunction::TruncatedWithBase { c2, gamma } => {
                let r = norm(z);
                if r <= *c2 {
                    let ratio = normalizing_constant(params.d, *gamma).unwrap_or(f64::NAN) / params.consts.a_beta;
                    1.0 + ratio * r.powf(params.beta - gamma)
                } else {
                    1.0
                }
            }
            BFunction::RadialProduct { phi, psi } => (phi.f)(&x[..x.len() - 1]) * (psi.f)(norm(z)),
            BFunction::SdeCoefficient { c } => (c.f)(x).abs().powf(params.beta),
            BFunction::Scaled { base, lambda } => {
                let xs: Vec<f64> = x.iter().map(|v| v / lambda).collect();
                let zs: Vec<f64> = z.iter().map(|v| v / lambda).collect();
                lambda.powf(params.beta - params.alpha) * base.eval(params, &xs, &zs)
            }
        }
    }

    fn check_shape(&self, params: &StableParams) -> Result<()> {
        match self {
            BFunction::Constant(e) if !(e.is_finite() && *e >= 0.0) => {
                Err(Error::Parameter(format!("constant coefficient must be nonnegative, got {e}")))
            }
            BFunction::TruncatedIndicator { c1 } if !(*c1 > 0.0) => {
                Err(Error::Parameter(format!("truncation radius must be positive, got {c1}")))
            }
            BFunction::TruncatedWithBase { c2, gamma } => {
                if !(*c2 > 0.0) {
                    return Err(Error::Parameter(format!("truncation radius must be positive, got {c2}")));
                }
                if !(*gamma > 0.0 && *gamma < params.beta) {
                    return Err(Error::Parameter(format!("gamma must lie in (0, beta), got {gamma}")));
                }
                Ok(())
            }
            BFunction::Scaled { base, lambda } => {
                if !(*lambda > 0.0) {
                    return Err(Error::Parameter(format!("scale must be positive, got {lambda}")));
                }
                base.check_shape(params)
            }
            _ => Ok(()),
        }
    }

    /// Sampled validation of symmetry in `z`, `sup |b| ≤ M1`, nonnegativity
    /// of `j^b` on a log-spaced `|z|` grid and, for radial products,
    /// monotonicity of `ψ(r)/r^{d+β}`.
    pub fn validate(&self, params: &StableParams) -> Result<()> {
        self.check_shape(params)?;
        let d = params.d;
        let mut rng = ChaCha8Rng::seed_from_u64(0x6266_756e);
        let grid: Vec<f64> = (0..=120).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 120.0)).collect();
        for _ in 0..40 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let dir = sample_sphere_direction(d, &mut rng);
            for &r in &grid {
                let z: Vec<f64> = dir.iter().map(|v| v * r).collect();
                let zm: Vec<f64> = z.iter().map(|v| -v).collect();
                let b = self.eval(params, &x, &z);
                let bm = self.eval(params, &x, &zm);
                if (b - bm).abs() > 1e-12 * (1.0 + b.abs()) {
                    return Err(Error::Parameter(format!("b is not symmetric in z at x={x:?}, |z|={r}")));
                }
                if !b.is_finite() || b.abs() > params.m1 * (1.0 + 1e-12) {
                    return Err(Error::Parameter(format!("|b| = {b} exceeds M1 = {}", params.m1)));
                }
                let j = params.consts.a_alpha * r.powf(-params.alpha) + params.consts.a_beta * b * r.powf(-params.beta);
                if j < 0.0 {
                    return Err(Error::KernelNegativity(format!("j^b < 0 at x={x:?}, |z|={r}")));
                }
            }
        }
        if let BFunction::RadialProduct { psi, .. } = self {
            let e = d as f64 + params.beta;
            for w in grid.windows(2) {
                let (a, b) = ((psi.f)(w[0]) / w[0].powf(e), (psi.f)(w[1]) / w[1].powf(e));
                if b > a * (1.0 + 1e-12) {
                    return Err(Error::Parameter(format!(
                        "psi(r)/r^(d+beta) increases between r={} and r={}",
                        w[0], w[1]
                    )));
                }
            }
        }
        Ok(())
    }
}
