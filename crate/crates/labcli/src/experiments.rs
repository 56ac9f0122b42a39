//! Experiment registry: keys with defaults and the runner behind each name.

use stablelab::estimators::*;
use stablelab::geometry::Point;
use stablelab::kernels::BFunction;

use crate::config::{key, Key, Resolved, MODEL_KEYS, SEED_KEY, WOS_KEYS};
use crate::error::CliError;
use crate::grammar;

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
    pub run: fn(&Resolved, u64) -> Result<ExperimentReport, CliError>,
}

impl Experiment {
    /// Model, walk and seed keys followed by the experiment's own.
    pub fn all_keys(&self) -> Vec<Key> {
        let mut keys: Vec<Key> = MODEL_KEYS.iter().chain(WOS_KEYS).copied().collect();
        keys.push(SEED_KEY);
        keys.extend_from_slice(self.keys);
        keys
    }
}

pub fn registry() -> &'static [Experiment] {
    REGISTRY
}

pub fn find(name: &str) -> Result<&'static Experiment, CliError> {
    REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = REGISTRY.iter().map(|e| e.name).collect();
        CliError::Config(format!("unknown experiment '{name}' (one of {})", names.join(", ")))
    })
}

const REGISTRY: &[Experiment] = &[
    Experiment {
        name: "harnack",
        about: "sup/inf of u over B(x0, r/2) for exterior data, at each radius",
        keys: &[
            key("experiment.x0", "0,0", "ball centre"),
            key("experiment.radii", "1, 0.5", "radii; data are rescaled about x0 for radii after the first"),
            key("experiment.data", "sector(0, 0, 2, 3, 0, 1.5707963267948966)", "exterior data at the first radius"),
            key("experiment.grid", "5", "grid points per axis"),
            key("experiment.n", "100000", "paths per grid point"),
            key("experiment.scale_tolerance", "0.2", "largest relative change of the ratio across radii"),
        ],
        run: run_harnack,
    },
    Experiment {
        name: "chained-harnack",
        about: "u(x1)/u(x2) against the chain envelope 2^(k(d+alpha))",
        keys: &[
            key("experiment.domain", "halfspace(2)", "domain"),
            key("experiment.x1", "0,1", "first point"),
            key("experiment.x2", "2,1", "second point"),
            key("experiment.r", "0.5", "ball radius around both points"),
            key("experiment.k", "3", "chain length, |x1 - x2| < 2^k r"),
            key("experiment.data", "slab(1, 4, 6)", "exterior data"),
            key("experiment.n", "100000", "paths per point"),
        ],
        run: run_chained,
    },
    Experiment {
        name: "bhp",
        about: "largest double ratio of two harmonic functions over D n B(z0, r)",
        keys: &[
            key("experiment.domain", "halfspace(2)", "half-space or graph domain"),
            key("experiment.z0", "0,0", "boundary anchor"),
            key("experiment.r", "1", "scale"),
            key("experiment.f1", "slab(1, 2, 3)", "data of u"),
            key("experiment.f2", "slab(1, -40, -10)", "data of v"),
            key("experiment.grid", "5", "grid points per axis"),
            key("experiment.n", "100000", "paths per grid point"),
        ],
        run: run_bhp,
    },
    Experiment {
        name: "ratio-limit",
        about: "u/v along dyadic corkscrew points and the decay of its oscillation",
        keys: &[
            key("experiment.domain", "halfspace(2)", "half-space or graph domain"),
            key("experiment.z0", "0,0", "boundary anchor"),
            key("experiment.r", "1", "scale"),
            key("experiment.f1", "slab(1, 2, 3)", "data of u"),
            key("experiment.f2", "slab(1, -40, -10)", "data of v"),
            key("experiment.levels", "6", "dyadic levels, at least 6"),
            key("experiment.n", "1000000", "paths per level"),
        ],
        run: run_ratio_limit,
    },
    Experiment {
        name: "decay",
        about: "truncated functions u_k at dyadic points and their log2 slope",
        keys: &[
            key("experiment.domain", "halfspace(2)", "half-space or graph domain"),
            key("experiment.z0", "0,0", "boundary anchor"),
            key("experiment.r", "1", "scale, at most 1"),
            key("experiment.data", "slab(1, 3, 5)", "exterior data"),
            key("experiment.levels", "5", "dyadic levels"),
            key("experiment.n", "100000", "paths per level"),
            key("experiment.slope_tolerance", "0.15", "window around -alpha for the fitted slope"),
        ],
        run: run_decay,
    },
    Experiment {
        name: "gradient",
        about: "|grad u| delta/u from the score estimator over a grid",
        keys: &[
            key("experiment.domain", "halfspace(2, 8)", "domain"),
            key("experiment.data", "w", "exterior data"),
            key("experiment.grid", "0,1; 1,0.5; -0.5,0.25", "evaluation points"),
            key("experiment.radius_fraction", "0.5", "score ball radius over the distance to the boundary"),
            key("experiment.n", "100000", "paths per point"),
            key("experiment.expected", "0.5", "analytic value of both statistics, or none"),
        ],
        run: run_gradient,
    },
    Experiment {
        name: "barrier",
        about: "barrier function of a boundary box at increasing heights",
        keys: &[
            key("experiment.domain", "lipschitz(sine(0.1, 2), 0.32)", "graph domain"),
            key("experiment.anchor", "0", "first d-1 coordinates of the boundary anchor"),
            key("experiment.r", "0.5", "box half-width over two"),
            key("experiment.heights", "10", "number of evenly spaced heights, or an explicit list"),
            key("experiment.n", "100000", "paths"),
        ],
        run: run_barrier,
    },
    Experiment {
        name: "boundary-decay",
        about: "exponent p of u ~ rho^p along the vertical approach",
        keys: &[
            key("experiment.domain", "halfspace(2)", "half-space or graph domain"),
            key("experiment.anchor", "0", "first d-1 coordinates of the boundary anchor"),
            key("experiment.r", "1", "scale"),
            key("experiment.data", "slab(1, 3, 5)", "exterior data"),
            key("experiment.level_min", "2", "first dyadic level"),
            key("experiment.level_max", "7", "last dyadic level"),
            key("experiment.n", "100000", "paths per level"),
            key("experiment.gamma_floor", "0.05", "required gap below alpha"),
            key("experiment.expected", "none", "expected exponent and window as 'p, w', or none"),
        ],
        run: run_boundary_decay,
    },
];

/// Validated model parameters; the exact samplers need `b = zero`.
fn alpha_of(c: &Resolved) -> Result<f64, CliError> {
    let (params, b) = c.model()?;
    if !matches!(b, BFunction::Zero) {
        return Err(CliError::Config(format!(
            "experiments sample the unperturbed process; model.b must be zero, got {}",
            b.describe()
        )));
    }
    Ok(params.alpha)
}

fn anchor(c: &Resolved, name: &str, domain_key: &str) -> Result<Point, CliError> {
    let d = c.usize("model.d")?;
    let graph = grammar::parse_graph(c.str(domain_key), d).map_err(|e| CliError::Config(format!("{domain_key}: {e}")))?;
    let tilde = c.list(name)?;
    if tilde.len() != d - 1 {
        return Err(CliError::Config(format!("{name} needs {} coordinates", d - 1)));
    }
    Ok(graph.boundary_point(&tilde))
}

fn run_harnack(c: &Resolved, seed: u64) -> Result<ExperimentReport, CliError> {
    let cfg = HarnackConfig {
        alpha: alpha_of(c)?,
        x0: c.point("experiment.x0")?,
        radii: c.list("experiment.radii")?,
        data: c.data("experiment.data")?,
        grid_size: c.usize("experiment.grid")?,
        n: c.usize("experiment.n")?,
        wos: c.wos()?,
        scale_tolerance: c.f64("experiment.scale_tolerance")?,
    };
    Ok(harnack_experiment(&cfg, seed)?)
}

fn run_chained(c: &Resolved, seed: u64) -> Result<ExperimentReport, CliError> {
    let alpha = alpha_of(c)?;
    let k = c.usize("experiment.k")?;
    Ok(chained_harnack_experiment(
        &c.domain("experiment.domain")?,
        &c.point("experiment.x1")?,
        &c.point("experiment.x2")?,
        c.f64("experiment.r")?,
        u32::try_from(k).map_err(|_| CliError::Config(format!("experiment.k = {k} is too large")))?,
        alpha,
        &c.data("experiment.data")?,
        c.usize("experiment.n")?,
        seed,
        &c.wos()?,
    )?)
}

fn run_bhp(c: &Resolved, seed: u64) -> Result<ExperimentReport, CliError> {
    let cfg = BhpConfig {
        alpha: alpha_of(c)?,
        domain: c.domain("experiment.domain")?,
        z0: c.point("experiment.z0")?,
        r: c.f64("experiment.r")?,
        f1: c.data("experiment.f1")?,
        f2: c.data("experiment.f2")?,
        grid_size: c.usize("experiment.grid")?,
        n: c.usize("experiment.n")?,
        wos: c.wos()?,
    };
    Ok(bhp_experiment(&cfg, seed)?)
}

fn run_ratio_limit(c: &Resolved, seed: u64) -> Result<ExperimentReport, CliError> {
    let cfg = RatioLimitConfig {
        alpha: alpha_of(c)?,
        domain: c.domain("experiment.domain")?,
        z0: c.point("experiment.z0")?,
        r: c.f64("experiment.r")?,
        f1: c.data("experiment.f1")?,
        f2: c.data("experiment.f2")?,
        levels: c.usize("experiment.levels")?,
        n: c.usize("experiment.n")?,
        wos: c.wos()?,
    };
    Ok(boundary_ratio_limit_experiment(&cfg, seed)?)
}

fn run_decay(c: &Resolved, seed: u64) -> Result<ExperimentReport, CliError> {
    let cfg = DecayConfig {
        alpha: alpha_of(c)?,
        domain: c.domain("experiment.domain")?,
        z0: c.point("experiment.z0")?,
        r: c.f64("experiment.r")?,
        f: c.data("experiment.data")?,
        levels: c.usize("experiment.levels")?,
        n: c.usize("experiment.n")?,
        wos: c.wos()?,
        slope_tolerance: c.f64("experiment.slope_tolerance")?,
    };
    Ok(decay_experiment(&cfg, seed)?)
}

fn run_gradient(c: &Resolved, seed: u64) -> Result<ExperimentReport, CliError> {
    let cfg = GradientBoundConfig {
        alpha: alpha_of(c)?,
        domain: c.domain("experiment.domain")?,
        f: c.data("experiment.data")?,
        grid: c.points("experiment.grid")?,
        radius_fraction: c.f64("experiment.radius_fraction")?,
        n: c.usize("experiment.n")?,
        wos: c.wos()?,
        expected: c.opt_f64("experiment.expected")?,
    };
    Ok(gradient_bound_experiment(&cfg, seed)?)
}

fn run_barrier(c: &Resolved, seed: u64) -> Result<ExperimentReport, CliError> {
    let alpha = alpha_of(c)?;
    let d = c.usize("model.d")?;
    let graph = grammar::parse_graph(c.str("experiment.domain"), d).map_err(CliError::Config)?;
    let base = BarrierConfig {
        graph,
        z0: anchor(c, "experiment.anchor", "experiment.domain")?,
        r: c.f64("experiment.r")?,
        alpha,
        heights: Vec::new(),
        n: c.usize("experiment.n")?,
        wos: c.wos()?,
    };
    let heights = if c.str("experiment.heights").contains(',') {
        c.list("experiment.heights")?
    } else {
        base.even_heights(c.usize("experiment.heights")?)
    };
    Ok(barrier_experiment(&BarrierConfig { heights, ..base }, seed)?)
}

fn run_boundary_decay(c: &Resolved, seed: u64) -> Result<ExperimentReport, CliError> {
    let alpha = alpha_of(c)?;
    let expected = match c.str("experiment.expected") {
        "none" => None,
        _ => match c.list("experiment.expected")?.as_slice() {
            [p, w] => Some((*p, *w)),
            _ => return Err(CliError::Config("experiment.expected must be 'p, window' or none".into())),
        },
    };
    Ok(boundary_decay_fit(
        &c.domain("experiment.domain")?,
        &anchor(c, "experiment.anchor", "experiment.domain")?,
        c.f64("experiment.r")?,
        alpha,
        &c.data("experiment.data")?,
        c.usize("experiment.level_min")?..=c.usize("experiment.level_max")?,
        c.usize("experiment.n")?,
        seed,
        &c.wos()?,
        c.f64("experiment.gamma_floor")?,
        expected,
    )?)
}
