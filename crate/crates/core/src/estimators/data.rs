use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::kernels::{Named, PointFn};
use crate::sampler::sample_sphere_direction;

/// Bounded nonnegative exterior data `f`.
#[derive(Clone)]
pub enum BoundaryData {
    Constant(f64),
    /// Indicator of `{lo ≤ x_axis ≤ hi}`.
    Slab { axis: usize, lo: f64, hi: f64 },
    /// Indicator of `{r_in ≤ |x − c| ≤ r_out}` with polar angle of
    /// `(x − c)_1, (x − c)_2` in `[theta_lo, theta_hi]`.
    AnnulusSector {
        center: Point,
        r_in: f64,
        r_out: f64,
        theta_lo: f64,
        theta_hi: f64,
    },
    /// `((x_d)^+)^{p}`, truncated at `cap` so the data stay bounded.
    HalfSpacePower { p: f64, cap: f64 },
    Custom { f: Named<PointFn>, sup: f64 },
    Scaled(Box<BoundaryData>, f64),
    /// `f(c + s·(x − c))`; keeps data attached to a ball `B(c, r)` when
    /// the ball is rescaled.
    Rescaled { base: Box<BoundaryData>, center: Point, factor: f64 },
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

impl BoundaryData {
    /// `((x_d)^+)^{α/2}`, harmonic in the upper half-space. The cap is far
    /// beyond anything a bounded experiment reaches with positive
    /// probability at double precision.
    pub fn w_halfspace(alpha: f64) -> Self {
        BoundaryData::HalfSpacePower {
            p: 0.5 * alpha,
            cap: f64::MAX,
        }
    }

    pub fn slab(axis: usize, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Parameter(format!("slab needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(BoundaryData::Slab { axis, lo, hi })
    }

    pub fn annulus_sector(center: Point, r_in: f64, r_out: f64, theta_lo: f64, theta_hi: f64) -> Result<Self> {
        if !(0.0 <= r_in && r_in < r_out) {
            return Err(Error::Parameter(format!("annulus needs 0 <= r_in < r_out, got {r_in}, {r_out}")));
        }
        if !(theta_lo < theta_hi) {
            return Err(Error::Parameter("sector needs theta_lo < theta_hi".into()));
        }
        if center.dim() < 2 {
            return Err(Error::Parameter("annulus sector needs d >= 2".into()));
        }
        Ok(BoundaryData::AnnulusSector {
            center,
            r_in,
            r_out,
            theta_lo,
            theta_hi,
        })
    }

    pub fn scaled(self, c: f64) -> Self {
        BoundaryData::Scaled(Box::new(self), c)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            BoundaryData::Constant(c) => *c,
            BoundaryData::Slab { axis, lo, hi } => {
                let v = x[*axis];
                if *lo <= v && v <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            BoundaryData::AnnulusSector {
                center,
                r_in,
                r_out,
                theta_lo,
                theta_hi,
            } => {
                let s = center.dist(x);
                if s < *r_in || s > *r_out {
                    return 0.0;
                }
                let theta = (x[1] - center[1]).atan2(x[0] - center[0]);
                // accept the angle modulo 2π
                let k = ((theta_lo - theta) / std::f64::consts::TAU).ceil();
                let t = theta + k * std::f64::consts::TAU;
                if t <= *theta_hi {
                    1.0
                } else {
                    0.0
                }
            }
            BoundaryData::HalfSpacePower { p, cap } => {
                let h = x[x.len() - 1];
                if h > 0.0 {
                    h.powf(*p).min(*cap)
                } else {
                    0.0
                }
            }
            BoundaryData::Custom { f, .. } => (f.f)(x),
            BoundaryData::Scaled(base, c) => c * base.eval(x),
            BoundaryData::Rescaled { base, center, factor } => {
                let y: Vec<f64> = x.iter().zip(center.iter()).map(|(a, c)| c + factor * (a - c)).collect();
                base.eval(&y)
            }
        }
    }

    /// Declared bound on `f`.
    pub fn sup(&self) -> f64 {
        match self {
            BoundaryData::Constant(c) => *c,
            BoundaryData::Slab { .. } | BoundaryData::AnnulusSector { .. } => 1.0,
            BoundaryData::HalfSpacePower { cap, .. } => *cap,
            BoundaryData::Custom { sup, .. } => *sup,
            BoundaryData::Scaled(base, c) => c * base.sup(),
            BoundaryData::Rescaled { base, .. } => base.sup(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            BoundaryData::Constant(c) => format!("const:{c}"),
            BoundaryData::Slab { axis, lo, hi } => format!("slab:{axis},{lo},{hi}"),
            BoundaryData::AnnulusSector {
                center,
                r_in,
                r_out,
                theta_lo,
                theta_hi,
            } => format!("sector:{center:?},{r_in},{r_out},{theta_lo},{theta_hi}"),
            BoundaryData::HalfSpacePower { p, .. } => format!("halfpower:{p}"),
            BoundaryData::Custom { f, .. } => format!("custom:{}", f.name),
            BoundaryData::Scaled(base, c) => format!("{c}*{}", base.describe()),
            BoundaryData::Rescaled { base, factor, .. } => format!("rescaled({},{factor})", base.describe()),
        }
    }

    /// Sampled check of `0 ≤ f ≤ sup` on `B(center, radius)` and of
    /// `f = 0` on `D^c ∩ B(center, vanish_radius)`.
    pub fn validate(&self, domain: &Domain, center: &[f64], radius: f64, vanish_radius: f64) -> Result<()> {
        let sup = self.sup();
        if !(sup >= 0.0) {
            return Err(Error::Parameter(format!("declared sup {sup} is negative")));
        }
        let d = domain.dim();
        if center.len() != d {
            return Err(Error::Parameter("validation centre has the wrong dimension".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x6461_7461);
        let outer = radius.max(vanish_radius);
        for _ in 0..4000 {
            let dir = sample_sphere_direction(d, &mut rng);
            let s = outer * rng.random::<f64>().powf(1.0 / d as f64);
            let x = Point::from(center).offset(s, &dir);
            let v = self.eval(&x);
            if !(v >= 0.0 && v <= sup * (1.0 + 1e-12)) {
                return Err(Error::Parameter(format!(
                    "boundary data {} takes the value {v} at {x:?}, outside [0, {sup}]",
                    self.describe()
                )));
            }
            if s < vanish_radius && !domain.contains(&x) && v != 0.0 {
                return Err(Error::Parameter(format!(
                    "boundary data {} must vanish on the complement near the anchor, but f({x:?}) = {v}",
                    self.describe()
                )));
            }
        }
        Ok(())
    }

    /// Sampled check that `f` vanishes on `B(center, radius)`.
    pub fn vanishes_in_ball(&self, center: &[f64], radius: f64) -> Result<()> {
        let d = center.len();
        let mut rng = ChaCha8Rng::seed_from_u64(0x7375_7070);
        for _ in 0..4000 {
            let dir = sample_sphere_direction(d, &mut rng);
            let s = radius * rng.random::<f64>().powf(1.0 / d as f64);
            let x = Point::from(center).offset(s, &dir);
            let v = self.eval(&x);
            if v != 0.0 {
                return Err(Error::Parameter(format!(
                    "boundary data {} must vanish on B({center:?}, {radius}), but f({x:?}) = {v}",
                    self.describe()
                )));
            }
        }
        Ok(())
    }
}
