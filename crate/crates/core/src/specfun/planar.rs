//! Polar-decomposition quadrature over discs and annuli in the plane.

use std::cell::Cell;
use std::f64::consts::PI;

use super::quad::{integrate_1d, Bound, EndpointHints, QuadOptions, QuadResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanarRegion {
    Disc { center: [f64; 2], radius: f64 },
    Annulus { center: [f64; 2], inner: f64, outer: f64 },
}

/// Integrable point singularity `f(y) ~ |y − location|^{−exponent}`, exponent < 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSingularity {
    pub location: [f64; 2],
    pub exponent: f64,
}

/// Integral of `f` over a disc or annulus.
///
/// The angular integral is the outer adaptive rule; each angular node runs
/// an inner radial integral at a tighter tolerance. With a declared point
/// singularity the polar frame is centred on it, so the radial integrand
/// behaves like `ρ^{1−exponent}` and is regularised by an endpoint hint.
pub fn integrate_ball_2d<F: Fn([f64; 2]) -> f64>(
    f: F,
    region: PlanarRegion,
    singularity: Option<PointSingularity>,
    rel_tol: f64,
) -> Result<QuadResult> {
    let inner_opts = QuadOptions {
        rel_tol: rel_tol * 0.05,
        abs_tol: 1e-300,
        max_intervals: 4000,
    };
    let outer_opts = QuadOptions {
        rel_tol,
        abs_tol: 1e-300,
        max_intervals: 4000,
    };
    let failure: Cell<Option<Error>> = Cell::new(None);
    let evaluations = Cell::new(0usize);

    let radial = |origin: [f64; 2], theta: f64, lo: f64, hi: f64, hints: EndpointHints| -> f64 {
        let (s, c) = theta.sin_cos();
        let g = |rho: f64| rho * f([origin[0] + rho * c, origin[1] + rho * s]);
        match integrate_1d(g, lo, Bound::Finite(hi), &hints, &inner_opts) {
            Ok(r) => {
                evaluations.set(evaluations.get() + r.evaluations);
                r.value
            }
            Err(e) => {
                if let Error::Quadrature { estimate, .. } = e {
                    let first = failure.take().unwrap_or(e);
                    failure.set(Some(first));
                    estimate
                } else {
                    failure.set(Some(e));
                    f64::NAN
                }
            }
        }
    };

    let outer = match (region, singularity) {
        (PlanarRegion::Disc { center, radius }, None) => integrate_1d(
            |theta| radial(center, theta, 0.0, radius, EndpointHints::default()),
            0.0,
            Bound::Finite(2.0 * PI),
            &EndpointHints::default(),
            &outer_opts,
        ),
        (PlanarRegion::Annulus { center, inner, outer }, None) => {
            if !(0.0 <= inner && inner < outer) {
                return Err(Error::Parameter(format!("annulus radii {inner} .. {outer}")));
            }
            integrate_1d(
                |theta| radial(center, theta, inner, outer, EndpointHints::default()),
                0.0,
                Bound::Finite(2.0 * PI),
                &EndpointHints::default(),
                &outer_opts,
            )
        }
        (PlanarRegion::Disc { center, radius }, Some(sing)) => {
            if sing.exponent >= 2.0 {
                return Err(Error::Parameter(format!(
                    "point singularity exponent {} is not integrable in the plane",
                    sing.exponent
                )));
            }
            let p = [sing.location[0] - center[0], sing.location[1] - center[1]];
            let p2 = p[0] * p[0] + p[1] * p[1];
            if p2 >= radius * radius {
                return Err(Error::Domain("singularity must lie inside the disc".into()));
            }
            let hints = if sing.exponent > 1.0 {
                EndpointHints::left(sing.exponent - 1.0)
            } else {
                EndpointHints::default()
            };
            integrate_1d(
                |theta| {
                    let (s, c) = f64::sin_cos(theta);
                    let b = p[0] * c + p[1] * s;
                    let reach = -b + (b * b + radius * radius - p2).sqrt();
                    radial(sing.location, theta, 0.0, reach, hints)
                },
                0.0,
                Bound::Finite(2.0 * PI),
                &EndpointHints::default(),
                &outer_opts,
            )
        }
        (PlanarRegion::Annulus { .. }, Some(_)) => {
            return Err(Error::Unsupported(
                "point singularities inside an annulus".into(),
            ))
        }
    }?;

    if let Some(e) = failure.take() {
        return Err(match e {
            Error::Quadrature { .. } => Error::Quadrature {
                estimate: outer.value,
                abs_error: f64::NAN,
            },
            other => other,
        });
    }
    Ok(QuadResult {
        value: outer.value,
        abs_error: outer.abs_error,
        evaluations: evaluations.get(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_disc_area() {
        let r = integrate_ball_2d(
            |_| 1.0,
            PlanarRegion::Disc {
                center: [0.0, 0.0],
                radius: 1.0,
            },
            None,
            1e-10,
        )
        .unwrap();
        assert!((r.value - PI).abs() < 1e-9);
    }

    #[test]
    fn inverse_distance_on_disc() {
        let r = integrate_ball_2d(
            |y| 1.0 / (y[0] * y[0] + y[1] * y[1]).sqrt(),
            PlanarRegion::Disc {
                center: [0.0, 0.0],
                radius: 1.0,
            },
            Some(PointSingularity {
                location: [0.0, 0.0],
                exponent: 1.0,
            }),
            1e-10,
        )
        .unwrap();
        assert_relative_eq!(r.value, 2.0 * PI, max_relative = 1e-9);
    }

    #[test]
    fn off_centre_singularity() {
        // ∫_{B(0,1)} |y − p|^{-1} dy = 4 E(|p|), E the complete elliptic
        // integral of the second kind, evaluated here as a smooth 1D integral.
        let p = [0.3, -0.4];
        let k2: f64 = p[0] * p[0] + p[1] * p[1];
        let elliptic_e = integrate_1d(
            |t: f64| (1.0 - k2 * t.sin().powi(2)).sqrt(),
            0.0,
            Bound::Finite(PI / 2.0),
            &EndpointHints::default(),
            &QuadOptions::with_rel_tol(1e-13),
        )
        .unwrap()
        .value;
        let r = integrate_ball_2d(
            |y| 1.0 / ((y[0] - p[0]).powi(2) + (y[1] - p[1]).powi(2)).sqrt(),
            PlanarRegion::Disc {
                center: [0.0, 0.0],
                radius: 1.0,
            },
            Some(PointSingularity {
                location: p,
                exponent: 1.0,
            }),
            1e-10,
        )
        .unwrap();
        assert_relative_eq!(r.value, 4.0 * elliptic_e, max_relative = 1e-9);
    }

    #[test]
    fn annulus_area() {
        let r = integrate_ball_2d(
            |_| 1.0,
            PlanarRegion::Annulus {
                center: [1.0, 2.0],
                inner: 1.0,
                outer: 2.0,
            },
            None,
            1e-10,
        )
        .unwrap();
        assert_relative_eq!(r.value, 3.0 * PI, max_relative = 1e-10);
    }
}
