//! Domains, boundary distances and corkscrew points.
//!
//! Distances to the boundary are returned as a bracket `(lower, upper)`.
//! Balls and half-spaces are exact; for domains above a Lipschitz graph the
//! vertical distance `ρ(x) = x_d − Γ(x̃)` gives `ρ/√(1+λ0²) ≤ δ_D(x) ≤ ρ`.
//! Samplers use the lower end, so their balls never leave the domain.

mod point;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sampler::sample_sphere_direction;

pub use point::{dist, dot, norm, Point};

/// Tolerance for boundary anchors.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Smallest κ accepted by [`kappa_fat_probe`].
pub const KAPPA_MIN: f64 = 1e-3;

fn check_dim_of(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::Parameter(format!("expected a point of dimension {d}, got {}", x.len())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Parameter(format!("ball radius must be positive, got {radius}")));
        }
        if center.dim() < 2 {
            return Err(Error::Parameter("balls need dimension at least 2".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn centered(d: usize, radius: f64) -> Result<Self> {
        Self::new(Point::zeros(d), radius)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// `r − |x − c|`, positive inside.
    pub fn signed_depth(&self, x: &[f64]) -> f64 {
        self.radius - self.center.dist(x)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_depth(x) > 0.0
    }
}

pub type GraphFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `{x : x_d > Γ(x̃)}` for a Lipschitz function `Γ: R^{d−1} → R`.
#[derive(Clone)]
pub struct LipschitzGraph {
    dim: usize,
    name: String,
    gamma: GraphFn,
    lambda0: f64,
}

impl fmt::Debug for LipschitzGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LipschitzGraph")
            .field("dim", &self.dim)
            .field("name", &self.name)
            .field("lambda0", &self.lambda0)
            .finish()
    }
}

impl LipschitzGraph {
    /// Builds the domain and checks `|Γ(x̃) − Γ(ỹ)| ≤ λ0 |x̃ − ỹ|` on random pairs.
    pub fn new(dim: usize, name: impl Into<String>, gamma: GraphFn, lambda0: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Parameter(format!("graph domains need d >= 2, got {dim}")));
        }
        if !(lambda0 >= 0.0 && lambda0.is_finite()) {
            return Err(Error::Parameter(format!("lambda0 must be nonnegative, got {lambda0}")));
        }
        let graph = Self {
            dim,
            name: name.into(),
            gamma,
            lambda0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x4c49_5053);
        let m = dim - 1;
        for i in 0..2000 {
            let spread = if i % 2 == 0 { 10.0 } else { 0.05 };
            let a: Vec<f64> = (0..m).map(|_| rng.random_range(-10.0..10.0)).collect();
            let b: Vec<f64> = a.iter().map(|v| v + rng.random_range(-spread..spread)).collect();
            let lhs = ((graph.gamma)(&a) - (graph.gamma)(&b)).abs();
            let rhs = lambda0 * dist(&a, &b);
            if lhs > rhs * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::Parameter(format!(
                    "graph '{}' violates the Lipschitz bound {lambda0} at {a:?}, {b:?}",
                    graph.name
                )));
            }
        }
        Ok(graph)
    }

    /// `Γ ≡ 0`.
    pub fn flat(dim: usize) -> Self {
        Self::new(dim, "flat", Arc::new(|_: &[f64]| 0.0), 0.0).expect("flat graph is Lipschitz")
    }

    /// `Γ ≡ c`.
    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(dim, "constant", Arc::new(move |_: &[f64]| c), 0.0).expect("constant graph is Lipschitz")
    }

    /// `Γ(x̃) = slope · |x̃|`.
    pub fn abs_cone(dim: usize, slope: f64, lambda0: f64) -> Result<Self> {
        Self::new(dim, format!("abs-cone({slope})"), Arc::new(move |x: &[f64]| slope * norm(x)), lambda0)
    }

    /// `Γ(x̃) = A sin(2π x̃_1 / P)`.
    pub fn sine(dim: usize, amplitude: f64, period: f64, lambda0: f64) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::Parameter(format!("sine period must be positive, got {period}")));
        }
        let k = 2.0 * std::f64::consts::PI / period;
        Self::new(
            dim,
            format!("sine({amplitude},{period})"),
            Arc::new(move |x: &[f64]| amplitude * (k * x[0]).sin()),
            lambda0,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn gamma(&self, x_tilde: &[f64]) -> f64 {
        (self.gamma)(x_tilde)
    }

    /// `ρ(x) = x_d − Γ(x̃)`.
    pub fn rho(&self, x: &[f64]) -> f64 {
        let d = x.len();
        x[d - 1] - (self.gamma)(&x[..d - 1])
    }

    /// Point of the graph above `x̃`.
    pub fn boundary_point(&self, x_tilde: &[f64]) -> Point {
        let mut p: Point = x_tilde.iter().copied().collect();
        let mut v = p.to_vec();
        v.push(self.gamma(x_tilde));
        p = v.into();
        p
    }

    fn slope_factor(&self) -> f64 {
        (1.0 + self.lambda0 * self.lambda0).sqrt()
    }

    fn bracket(&self, x: &[f64]) -> (f64, f64) {
        let rho = self.rho(x);
        (rho / self.slope_factor(), rho)
    }
}

/// `ρ` for a graph domain.
pub fn rho(graph: &LipschitzGraph, x: &[f64]) -> f64 {
    graph.rho(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `{0 < ρ < h, |ỹ − z̃0| < r}`.
    Plus,
    /// `{−h < ρ ≤ 0, |ỹ − z̃0| < r}`.
    Minus,
}

#[derive(Debug, Clone)]
pub struct BoxDomain {
    pub graph: LipschitzGraph,
    pub anchor: Point,
    pub height: f64,
    pub width: f64,
    pub orientation: Orientation,
}

impl BoxDomain {
    pub fn lateral_gap(&self, x: &[f64]) -> f64 {
        self.width - dist(&x[..x.len() - 1], self.anchor.tilde())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let rho = self.graph.rho(x);
        let vertical = match self.orientation {
            Orientation::Plus => rho > 0.0 && rho < self.height,
            Orientation::Minus => rho > -self.height && rho <= 0.0,
        };
        vertical && self.lateral_gap(x) > 0.0
    }
}

/// `D^±(z0, h, r)` above (or below) the graph.
pub fn make_box(
    graph: &LipschitzGraph,
    anchor: Point,
    h: f64,
    r: f64,
    orientation: Orientation,
) -> Result<BoxDomain> {
    if !(h > 0.0 && r > 0.0) {
        return Err(Error::Parameter(format!("box needs h > 0 and r > 0, got h={h}, r={r}")));
    }
    check_dim_of(&anchor, graph.dim())?;
    Ok(BoxDomain {
        graph: graph.clone(),
        anchor,
        height: h,
        width: r,
        orientation,
    })
}

#[derive(Debug, Clone)]
pub enum Domain {
    Ball(Ball),
    /// `{x_d > 0}` in dimension `d`.
    HalfSpace(usize),
    Graph(LipschitzGraph),
    Box(BoxDomain),
    /// Graph domain intersected with a ball.
    GraphBall(LipschitzGraph, Ball),
}

impl Domain {
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        Ok(Domain::Ball(Ball::new(center, radius)?))
    }

    pub fn half_space(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Parameter(format!("half-space needs d >= 2, got {d}")));
        }
        Ok(Domain::HalfSpace(d))
    }

    pub fn graph_ball(graph: LipschitzGraph, ball: Ball) -> Result<Self> {
        if graph.dim() != ball.dim() {
            return Err(Error::Parameter("graph and ball dimensions differ".into()));
        }
        Ok(Domain::GraphBall(graph, ball))
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball(b) => b.dim(),
            Domain::HalfSpace(d) => *d,
            Domain::Graph(g) => g.dim(),
            Domain::Box(b) => b.graph.dim(),
            Domain::GraphBall(g, _) => g.dim(),
        }
    }

    /// Lipschitz constant of the graph part, zero for balls and half-spaces.
    pub fn lambda0(&self) -> f64 {
        match self {
            Domain::Ball(_) | Domain::HalfSpace(_) => 0.0,
            Domain::Graph(g) | Domain::GraphBall(g, _) => g.lambda0(),
            Domain::Box(b) => b.graph.lambda0(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Ball(b) => b.contains(x),
            Domain::HalfSpace(_) => x[x.len() - 1] > 0.0,
            Domain::Graph(g) => g.rho(x) > 0.0,
            Domain::Box(b) => b.contains(x),
            Domain::GraphBall(g, b) => g.rho(x) > 0.0 && b.contains(x),
        }
    }

    /// Bracket of `δ_D(x)` without the membership check; negative values
    /// mean `x` is outside.
    pub fn bracket_unchecked(&self, x: &[f64]) -> (f64, f64) {
        match self {
            Domain::Ball(b) => {
                let s = b.signed_depth(x);
                (s, s)
            }
            Domain::HalfSpace(_) => {
                let s = x[x.len() - 1];
                (s, s)
            }
            Domain::Graph(g) => g.bracket(x),
            Domain::Box(bx) => {
                let rho = bx.graph.rho(x);
                let k = bx.graph.slope_factor();
                let lateral = bx.lateral_gap(x);
                let (below, above) = match bx.orientation {
                    Orientation::Plus => (rho, bx.height - rho),
                    Orientation::Minus => (rho + bx.height, -rho),
                };
                let lower = (below / k).min(above / k).min(lateral);
                let upper = below.min(above).min(lateral);
                (lower, upper)
            }
            Domain::GraphBall(g, b) => {
                let (lo, hi) = g.bracket(x);
                let s = b.signed_depth(x);
                (lo.min(s), hi.min(s))
            }
        }
    }

    /// `(lower, upper)` with `lower ≤ δ_D(x) ≤ upper`.
    pub fn dist_to_boundary(&self, x: &[f64]) -> Result<(f64, f64)> {
        check_dim_of(x, self.dim())?;
        if !self.contains(x) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        Ok(self.bracket_unchecked(x))
    }

    /// Lower end of the bracket, used for walk-on-spheres radii.
    pub fn delta_lower(&self, x: &[f64]) -> f64 {
        self.bracket_unchecked(x).0
    }

    /// `r_D(x, y) = δ_D(x) + δ_D(y) + |x − y|` with the upper bracket ends.
    pub fn quasi_distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let (_, dx) = self.dist_to_boundary(x)?;
        let (_, dy) = self.dist_to_boundary(y)?;
        Ok(dx + dy + dist(x, y))
    }

    /// Smallest signed depth over the constraints defining the domain.
    /// Zero on `∂D`, positive inside.
    fn boundary_residual(&self, z: &[f64]) -> f64 {
        match self {
            Domain::Ball(b) => b.signed_depth(z),
            Domain::HalfSpace(_) => z[z.len() - 1],
            Domain::Graph(g) => g.rho(z),
            Domain::Box(bx) => {
                let rho = bx.graph.rho(z);
                let lateral = bx.lateral_gap(z);
                match bx.orientation {
                    Orientation::Plus => rho.min(bx.height - rho).min(lateral),
                    Orientation::Minus => (rho + bx.height).min(-rho).min(lateral),
                }
            }
            Domain::GraphBall(g, b) => g.rho(z).min(b.signed_depth(z)),
        }
    }

    fn inward_directions(&self, z: &[f64]) -> Vec<Point> {
        let d = self.dim();
        let up = Point::axis(d, d - 1, 1.0);
        let toward = |c: &Point| -> Option<Point> {
            let v = c.sub(z);
            let n = v.norm();
            (n > 0.0).then(|| v.scale(1.0 / n))
        };
        match self {
            Domain::Ball(b) => toward(&b.center).into_iter().collect(),
            Domain::HalfSpace(_) | Domain::Graph(_) => vec![up],
            Domain::Box(bx) => {
                let down = Point::axis(d, d - 1, -1.0);
                let mut mid = bx.anchor.clone();
                mid[d - 1] = z[d - 1];
                let mut v = vec![up, down];
                v.extend(toward(&mid));
                v
            }
            Domain::GraphBall(_, b) => {
                let mut v = vec![up];
                v.extend(toward(&b.center));
                v
            }
        }
    }
}

/// Corkscrew point `A` and the achieved `κ` with `B(A, κr) ⊆ D ∩ B(z, r)`.
///
/// Candidates lie on inward rays from `z`; the best one is checked by
/// sampling `10^4` uniform points of `B(A, κr)` and κ is shrunk until no
/// sample falls outside `D ∩ B(z, r)`.
pub fn kappa_fat_probe(domain: &Domain, z: &[f64], r: f64) -> Result<(Point, f64)> {
    let d = domain.dim();
    check_dim_of(z, d)?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Parameter(format!("probe radius must lie in (0, 1], got {r}")));
    }
    let residual = domain.boundary_residual(z);
    if residual.abs() > BOUNDARY_TOL {
        return Err(Error::Domain(format!(
            "anchor {z:?} is not on the boundary (residual {residual:e})"
        )));
    }
    let zp = Point::from(z);
    let mut best: Option<(Point, f64)> = None;
    for dir in domain.inward_directions(z) {
        let score = |t: f64| -> f64 {
            let a = zp.offset(t, &dir);
            if !domain.contains(&a) {
                return 0.0;
            }
            (domain.delta_lower(&a).min(r - t) / r).max(0.0)
        };
        let n = 400;
        let (mut t_best, mut s_best) = (0.0, 0.0);
        for i in 1..n {
            let t = r * i as f64 / n as f64;
            let s = score(t);
            if s > s_best {
                t_best = t;
                s_best = s;
            }
        }
        // golden-section refinement around the grid maximum
        let (mut lo, mut hi) = ((t_best - r / n as f64).max(0.0), (t_best + r / n as f64).min(r));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if score(a) < score(b) {
                lo = a;
            } else {
                hi = b;
            }
        }
        let t = 0.5 * (lo + hi);
        let (t, s) = if score(t) >= s_best { (t, score(t)) } else { (t_best, s_best) };
        if s > best.as_ref().map_or(0.0, |b| b.1) {
            best = Some((zp.offset(t, &dir), s));
        }
    }
    let (a, mut kappa) = best.ok_or(Error::Fatness { kappa_min: KAPPA_MIN })?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x006b_6170_7061);
    'verify: while kappa >= KAPPA_MIN {
        let radius = kappa * r;
        for _ in 0..10_000 {
            let u: f64 = rng.random();
            let dir = sample_sphere_direction(d, &mut rng);
            let y = a.offset(radius * u.powf(1.0 / d as f64), &dir);
            if !domain.contains(&y) || dist(&y, z) >= r {
                kappa *= 0.9;
                continue 'verify;
            }
        }
        return Ok((a, kappa));
    }
    Err(Error::Fatness { kappa_min: KAPPA_MIN })
}
