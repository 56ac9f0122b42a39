//! Harmonic measure experiments: mean values, Harnack chains, boundary
//! Harnack ratios and boundary decay.

use std::time::Instant;

use rand_chacha::ChaCha8Rng;

use super::{fit_line, point_seed, run_paths, BoundaryData, ExperimentReport, MCEstimate, PathRun};
use crate::error::{Error, Result};
use crate::geometry::{dist, kappa_fat_probe, Ball, Domain, LipschitzGraph, Point};
use crate::sampler::{WalkOnSpheres, WosConfig};

fn check_start(domain: &Domain, x: &[f64]) -> Result<()> {
    if x.len() != domain.dim() {
        return Err(Error::Parameter(format!(
            "start point has dimension {}, domain has {}",
            x.len(),
            domain.dim()
        )));
    }
    if !domain.contains(x) {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    Ok(())
}

/// `u(x) = E_x[f(X_{τ_D})]` for several data sets on common paths.
pub fn harmonic_eval_many(
    domain: &Domain,
    alpha: f64,
    fs: &[BoundaryData],
    x: &[f64],
    n: usize,
    seed: u64,
    wos: &WosConfig,
) -> Result<PathRun> {
    check_start(domain, x)?;
    let walk = WalkOnSpheres::new(domain, alpha, *wos)?;
    run_paths(n, fs.len(), seed, |rng, out| {
        let exit = walk.run(x, rng)?.exit_point;
        for (o, f) in out.iter_mut().zip(fs) {
            *o = f.eval(&exit);
        }
        Ok(())
    })
}

/// Mean-value estimate `u(x) = E_x[f(X_{τ_D})]` by walk-on-spheres.
pub fn harmonic_eval(
    domain: &Domain,
    alpha: f64,
    f: &BoundaryData,
    x: &[f64],
    n: usize,
    seed: u64,
    wos: &WosConfig,
) -> Result<MCEstimate> {
    Ok(harmonic_eval_many(domain, alpha, std::slice::from_ref(f), x, n, seed, wos)?.estimate(0))
}

/// Offset tensor grid with `g` points per axis on `[−h, h]^d` around `c`,
/// filtered by `keep`.
fn tensor_grid(c: &[f64], h: f64, g: usize, keep: impl Fn(&Point) -> bool) -> Vec<Point> {
    let d = c.len();
    let mut out = Vec::new();
    let total = g.pow(d as u32);
    for idx in 0..total {
        let mut k = idx;
        let p: Point = (0..d)
            .map(|i| {
                let j = k % g;
                k /= g;
                c[i] - h + (j as f64 + 0.5) * 2.0 * h / g as f64
            })
            .collect();
        if keep(&p) {
            out.push(p);
        }
    }
    out
}

/// `q = a/b` of independent estimates with the first-order error.
fn ratio_indep(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let q = a.0 / b.0;
    (q, q.abs() * ((a.1 / a.0).powi(2) + (b.1 / b.0).powi(2)).sqrt())
}

fn est_pair(e: &MCEstimate) -> (f64, f64) {
    (e.mean, e.stderr)
}

fn nondegenerate(e: &MCEstimate, what: &str) -> Result<()> {
    if !(e.mean > 2.0 * e.stderr) || e.mean <= 0.0 {
        return Err(Error::Degenerate(format!(
            "{what} = {} ± {} is consistent with zero",
            e.mean, e.stderr
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct HarnackConfig {
    pub x0: Point,
    /// Ball radii; the data are given at the first radius and rescaled
    /// about `x0` for the others.
    pub radii: Vec<f64>,
    pub alpha: f64,
    pub data: BoundaryData,
    pub grid_size: usize,
    pub n: usize,
    pub wos: WosConfig,
    /// Largest tolerated relative change of the ratio across radii.
    pub scale_tolerance: f64,
}

/// Sup/inf ratio of `u(y) = E_y[f(X_{τ_{B(x0,r)}})]` over a grid in
/// `B(x0, r/2)`, for each radius.
pub fn harnack_experiment(cfg: &HarnackConfig, seed: u64) -> Result<ExperimentReport> {
    let t0 = Instant::now();
    if cfg.radii.is_empty() {
        return Err(Error::Parameter("need at least one radius".into()));
    }
    let mut rep = ExperimentReport::new("harnack", seed);
    rep.param("x0", format!("{:?}", cfg.x0))
        .param("radii", format!("{:?}", cfg.radii))
        .param("alpha", cfg.alpha)
        .param("data", cfg.data.describe())
        .param("grid_size", cfg.grid_size)
        .param("n", cfg.n);
    rep.tolerance = format!("ratios across radii within {}", cfg.scale_tolerance);
    let r_ref = cfg.radii[0];
    let mut ratios = Vec::new();
    for (ri, &r) in cfg.radii.iter().enumerate() {
        let ball = Ball::new(cfg.x0.clone(), r)?;
        let data = if ri == 0 {
            cfg.data.clone()
        } else {
            BoundaryData::Rescaled {
                base: Box::new(cfg.data.clone()),
                center: cfg.x0.clone(),
                factor: r_ref / r,
            }
        };
        data.vanishes_in_ball(&cfg.x0, r)?;
        let domain = Domain::Ball(ball);
        let grid = tensor_grid(&cfg.x0, 0.5 * r, cfg.grid_size, |p| cfg.x0.dist(p) < 0.5 * r);
        let mut ests = Vec::with_capacity(grid.len());
        for (i, y) in grid.iter().enumerate() {
            let e = harmonic_eval(&domain, cfg.alpha, &data, y, cfg.n, point_seed(seed, &format!("harnack/{ri}"), i), &cfg.wos)?;
            if e.rel_err() > 0.1 {
                rep.flags.push(format!("low precision at r={r}, y={y:?}: {:.3}", e.rel_err()));
            }
            nondegenerate(&e, "u")?;
            rep.point(format!("r={r}"), y, e);
            ests.push(e);
        }
        let hi = ests.iter().max_by(|a, b| a.mean.total_cmp(&b.mean)).expect("grid is non-empty");
        let lo = ests.iter().min_by(|a, b| a.mean.total_cmp(&b.mean)).expect("grid is non-empty");
        let q = ratio_indep(est_pair(hi), est_pair(lo));
        rep.stat(format!("ratio_r{ri}"), q.0, q.1);
        ratios.push(q);
    }
    let mut pass = ratios.iter().all(|q| q.0.is_finite() && q.0 >= 1.0);
    for (ri, q) in ratios.iter().enumerate().skip(1) {
        let c = ratio_indep(*q, ratios[0]);
        rep.stat(format!("scale_change_r{ri}"), c.0 - 1.0, c.1);
        pass &= (c.0 - 1.0).abs() <= cfg.scale_tolerance;
    }
    rep.pass = pass;
    Ok(rep.finish(t0))
}

/// `u(x1)/u(x2)` against the chain envelope `2^{±k(d+α)}`.
#[allow(clippy::too_many_arguments)]
pub fn chained_harnack_experiment(
    domain: &Domain,
    x1: &[f64],
    x2: &[f64],
    r: f64,
    k: u32,
    alpha: f64,
    f: &BoundaryData,
    n: usize,
    seed: u64,
    wos: &WosConfig,
) -> Result<ExperimentReport> {
    let t0 = Instant::now();
    if !(dist(x1, x2) < 2f64.powi(k as i32) * r) {
        return Err(Error::Parameter(format!("need |x1 − x2| < 2^k r, got {} with k={k}, r={r}", dist(x1, x2))));
    }
    for x in [x1, x2] {
        check_start(domain, x)?;
        if domain.delta_lower(x) < r {
            return Err(Error::Parameter(format!("B({x:?}, {r}) is not inside the domain")));
        }
        f.vanishes_in_ball(x, r)?;
    }
    let mut rep = ExperimentReport::new("chained-harnack", seed);
    rep.param("x1", format!("{x1:?}"))
        .param("x2", format!("{x2:?}"))
        .param("r", r)
        .param("k", k)
        .param("alpha", alpha)
        .param("data", f.describe())
        .param("n", n);
    // the two points share one stream so the statistic is antisymmetric
    let e1 = harmonic_eval(domain, alpha, f, x1, n, seed, wos)?;
    let e2 = harmonic_eval(domain, alpha, f, x2, n, seed, wos)?;
    nondegenerate(&e1, "u(x1)")?;
    nondegenerate(&e2, "u(x2)")?;
    rep.point("x1", x1, e1);
    rep.point("x2", x2, e2);
    let q = ratio_indep(est_pair(&e1), est_pair(&e2));
    let env = 2f64.powf(k as f64 * (domain.dim() as f64 + alpha));
    let c_needed = q.0.max(1.0 / q.0) / env;
    rep.stat("ratio", q.0, q.1);
    rep.stat("envelope", env, 0.0);
    rep.stat("c_hat", c_needed, c_needed * q.1 / q.0);
    rep.tolerance = "max(ratio, 1/ratio) <= c_hat * 2^{k(d+alpha)}".into();
    rep.pass = q.0.is_finite() && q.0 > 0.0;
    Ok(rep.finish(t0))
}

#[derive(Debug, Clone)]
pub struct BhpConfig {
    pub domain: Domain,
    pub z0: Point,
    pub r: f64,
    pub alpha: f64,
    pub f1: BoundaryData,
    pub f2: BoundaryData,
    pub grid_size: usize,
    pub n: usize,
    pub wos: WosConfig,
}

fn check_anchor(domain: &Domain, z0: &[f64]) -> Result<()> {
    if z0.len() != domain.dim() {
        return Err(Error::Parameter("anchor has the wrong dimension".into()));
    }
    let gap = domain.bracket_unchecked(z0).1.abs();
    if gap > crate::geometry::BOUNDARY_TOL {
        return Err(Error::Domain(format!("anchor {z0:?} is not on the boundary")));
    }
    Ok(())
}

fn bhp_validate(domain: &Domain, z0: &[f64], r: f64, fs: [&BoundaryData; 2]) -> Result<()> {
    check_anchor(domain, z0)?;
    for f in fs {
        f.validate(domain, z0, 2.0 * r, 2.0 * r)?;
        f.vanishes_in_ball(z0, 2.0 * r)?;
    }
    Ok(())
}

/// Largest double ratio `(u(x)/v(x)) / (u(y)/v(y))` over a grid in
/// `D ∩ B(z0, r)`.
pub fn bhp_experiment(cfg: &BhpConfig, seed: u64) -> Result<ExperimentReport> {
    let t0 = Instant::now();
    bhp_validate(&cfg.domain, &cfg.z0, cfg.r, [&cfg.f1, &cfg.f2])?;
    let mut rep = ExperimentReport::new("bhp", seed);
    rep.param("z0", format!("{:?}", cfg.z0))
        .param("r", cfg.r)
        .param("alpha", cfg.alpha)
        .param("f1", cfg.f1.describe())
        .param("f2", cfg.f2.describe())
        .param("grid_size", cfg.grid_size)
        .param("n", cfg.n);
    let grid = tensor_grid(&cfg.z0, cfg.r, cfg.grid_size, |p| cfg.domain.contains(p) && cfg.z0.dist(p) < cfg.r);
    if grid.is_empty() {
        return Err(Error::Parameter("the grid misses D ∩ B(z0, r)".into()));
    }
    let fs = [cfg.f1.clone(), cfg.f2.clone()];
    let mut qs = Vec::with_capacity(grid.len());
    for (i, x) in grid.iter().enumerate() {
        let run = harmonic_eval_many(&cfg.domain, cfg.alpha, &fs, x, cfg.n, point_seed(seed, "bhp", i), &cfg.wos)?;
        let (u, v) = (run.estimate(0), run.estimate(1));
        nondegenerate(&v, "v")?;
        nondegenerate(&u, "u")?;
        rep.point("u", x, u);
        rep.point("v", x, v);
        qs.push(run.moments.ratio(0, 1));
    }
    let hi = qs.iter().copied().max_by(|a, b| a.0.total_cmp(&b.0)).expect("grid is non-empty");
    let lo = qs.iter().copied().min_by(|a, b| a.0.total_cmp(&b.0)).expect("grid is non-empty");
    let m = ratio_indep(hi, lo);
    rep.stat("max_pair_ratio", m.0, m.1);
    rep.stat("min_uv", lo.0, lo.1);
    rep.stat("max_uv", hi.0, hi.1);
    rep.tolerance = "max pair-ratio finite".into();
    rep.pass = m.0.is_finite() && m.0 >= 1.0;
    Ok(rep.finish(t0))
}

#[derive(Debug, Clone)]
pub struct RatioLimitConfig {
    pub domain: Domain,
    pub z0: Point,
    pub r: f64,
    pub alpha: f64,
    pub f1: BoundaryData,
    pub f2: BoundaryData,
    /// Dyadic levels `k = 1..=levels`.
    pub levels: usize,
    pub n: usize,
    pub wos: WosConfig,
}

/// `u/v` along `x_k = z0 + 2^{−k} r e_d` and the decay of its
/// oscillation.
pub fn boundary_ratio_limit_experiment(cfg: &RatioLimitConfig, seed: u64) -> Result<ExperimentReport> {
    let t0 = Instant::now();
    if cfg.levels < 6 {
        return Err(Error::Parameter("need at least six dyadic levels".into()));
    }
    bhp_validate(&cfg.domain, &cfg.z0, cfg.r, [&cfg.f1, &cfg.f2])?;
    let mut rep = ExperimentReport::new("ratio-limit", seed);
    rep.param("z0", format!("{:?}", cfg.z0))
        .param("r", cfg.r)
        .param("alpha", cfg.alpha)
        .param("f1", cfg.f1.describe())
        .param("f2", cfg.f2.describe())
        .param("levels", cfg.levels)
        .param("n", cfg.n);
    let d = cfg.domain.dim();
    let fs = [cfg.f1.clone(), cfg.f2.clone()];
    let mut qs = Vec::with_capacity(cfg.levels);
    for k in 1..=cfg.levels {
        let x = cfg.z0.offset(cfg.r * 0.5f64.powi(k as i32), &Point::axis(d, d - 1, 1.0));
        let run = harmonic_eval_many(&cfg.domain, cfg.alpha, &fs, &x, cfg.n, point_seed(seed, "ratio-limit", k), &cfg.wos)?;
        nondegenerate(&run.estimate(1), "v")?;
        rep.point(format!("u k={k}"), &x, run.estimate(0));
        rep.point(format!("v k={k}"), &x, run.estimate(1));
        let q = run.moments.ratio(0, 1);
        rep.stat(format!("q{k}"), q.0, q.1);
        qs.push(q);
    }
    let osc = |w: &[(f64, f64)]| -> (f64, f64) {
        let hi = w.iter().copied().max_by(|a, b| a.0.total_cmp(&b.0)).expect("window is non-empty");
        let lo = w.iter().copied().min_by(|a, b| a.0.total_cmp(&b.0)).expect("window is non-empty");
        (hi.0 - lo.0, (hi.1 * hi.1 + lo.1 * lo.1).sqrt())
    };
    let first = osc(&qs[..3]);
    let last = osc(&qs[qs.len() - 3..]);
    rep.stat("osc_first", first.0, first.1);
    rep.stat("osc_last", last.0, last.1);
    // successive oscillations over sliding windows of three levels
    let (mut xs, mut ys, mut ss) = (Vec::new(), Vec::new(), Vec::new());
    for (j, w) in qs.windows(3).enumerate() {
        let o = osc(w);
        if o.0 > 0.0 {
            xs.push(j as f64 + 1.0);
            ys.push(o.0.log2());
            ss.push(o.1 / (o.0 * std::f64::consts::LN_2));
        }
    }
    let (slope, slope_err, _) = fit_line(&xs, &ys, &ss)?;
    rep.stat("gamma1", -slope, slope_err);
    let drop = (first.0 - last.0, (first.1 * first.1 + last.1 * last.1).sqrt());
    rep.stat("osc_drop", drop.0, drop.1);
    rep.tolerance = "osc_first - osc_last > 2 sigma and gamma1 > 0".into();
    rep.pass = drop.0 > 2.0 * drop.1 && -slope > 0.0;
    Ok(rep.finish(t0))
}

/// The graph behind a half-space or graph domain.
fn graph_of(domain: &Domain) -> Result<LipschitzGraph> {
    match domain {
        Domain::HalfSpace(d) => Ok(LipschitzGraph::flat(*d)),
        Domain::Graph(g) => Ok(g.clone()),
        _ => Err(Error::Unsupported("experiment needs a half-space or graph domain".into())),
    }
}

#[derive(Debug, Clone)]
pub struct DecayConfig {
    pub domain: Domain,
    pub z0: Point,
    pub r: f64,
    pub alpha: f64,
    pub f: BoundaryData,
    pub levels: usize,
    pub n: usize,
    pub wos: WosConfig,
    /// Window around `−α` for the fitted slope.
    pub slope_tolerance: f64,
}

/// Truncated functions `u_j(x) = E_x[u(X_{τ_{D∩B_j}}); X_{τ_{D∩B_j}} ∉ B_0]`
/// at corkscrew points `x_k`, from nested walks: one path from `x_k` exits
/// `D∩B_k`, then `D∩B_{k−1}`, ..., then `D`, so every `u_j(x_k)` and
/// `u(x_k)` come from the same path.
pub fn decay_experiment(cfg: &DecayConfig, seed: u64) -> Result<ExperimentReport> {
    let t0 = Instant::now();
    if !(cfg.r > 0.0 && cfg.r <= 1.0) {
        return Err(Error::Parameter(format!("decay radius must lie in (0, 1], got {}", cfg.r)));
    }
    if cfg.levels < 2 {
        return Err(Error::Parameter("need at least two levels".into()));
    }
    check_anchor(&cfg.domain, &cfg.z0)?;
    cfg.f.validate(&cfg.domain, &cfg.z0, 2.0 * cfg.r, 2.0 * cfg.r)?;
    let graph = graph_of(&cfg.domain)?;
    let k_max = cfg.levels;
    let balls: Vec<Ball> = (0..=k_max)
        .map(|j| Ball::new(cfg.z0.clone(), cfg.r * 0.5f64.powi(j as i32)))
        .collect::<Result<_>>()?;
    let nested: Vec<Domain> = balls
        .iter()
        .map(|b| Domain::graph_ball(graph.clone(), b.clone()))
        .collect::<Result<_>>()?;
    let walks: Vec<WalkOnSpheres> = nested
        .iter()
        .map(|u| WalkOnSpheres::new(u, cfg.alpha, cfg.wos))
        .collect::<Result<_>>()?;
    let outer = WalkOnSpheres::new(&cfg.domain, cfg.alpha, cfg.wos)?;
    let b0 = &balls[0];

    let mut rep = ExperimentReport::new("decay", seed);
    rep.param("z0", format!("{:?}", cfg.z0))
        .param("r", cfg.r)
        .param("alpha", cfg.alpha)
        .param("data", cfg.f.describe())
        .param("levels", k_max)
        .param("n", cfg.n);

    let path = |k: usize, x: &Point, rng: &mut ChaCha8Rng, out: &mut [f64]| -> Result<()> {
        // out[0] = f(X_τD); out[1 + j] = f(X_τD) · 1{X_{τ_{U_j}} ∉ B_0}, j = 0..=k
        let mut pos = x.clone();
        let mut escaped = vec![false; k + 1];
        for j in (0..=k).rev() {
            if nested[j].contains(&pos) {
                pos = walks[j].run(&pos, rng)?.exit_point;
            }
            escaped[j] = !b0.contains(&pos);
        }
        if cfg.domain.contains(&pos) {
            pos = outer.run(&pos, rng)?.exit_point;
        }
        let v = cfg.f.eval(&pos);
        out[0] = v;
        for j in 0..=k {
            out[1 + j] = if escaped[j] { v } else { 0.0 };
        }
        Ok(())
    };

    let (mut lit_x, mut lit_y, mut lit_s) = (Vec::new(), Vec::new(), Vec::new());
    let (mut nrm_y, mut nrm_s) = (Vec::new(), Vec::new());
    let mut u_first: Option<MCEstimate> = None;
    let mut violations = 0usize;
    for k in 1..=k_max {
        let (xk, _) = kappa_fat_probe(&cfg.domain, &cfg.z0, balls[k].radius)?;
        let run = run_paths(cfg.n, k + 2, point_seed(seed, "decay", k), |rng, out| path(k, &xk, rng, out))?;
        let u = run.estimate(0);
        let uk = run.estimate(1 + k);
        nondegenerate(&u, "u(x_k)")?;
        nondegenerate(&uk, "u_k(x_k)")?;
        rep.point(format!("u k={k}"), &xk, u);
        rep.point(format!("u_k k={k}"), &xk, uk);
        for j in 1..=k {
            let (dlt, se) = run.moments.diff(1 + j, j);
            if dlt > 2.0 * se && dlt > 0.0 {
                violations += 1;
            }
        }
        let q = run.moments.ratio(1 + k, 0);
        rep.stat(format!("uk_over_u_k{k}"), q.0, q.1);
        lit_x.push(k as f64);
        lit_y.push(q.0.log2());
        lit_s.push(q.1 / (q.0 * std::f64::consts::LN_2));
        let u1 = *u_first.get_or_insert(u);
        let p = ratio_indep(est_pair(&uk), est_pair(&u1));
        rep.stat(format!("uk_over_u1_k{k}"), p.0, p.1);
        nrm_y.push(p.0.log2());
        nrm_s.push(p.1 / (p.0 * std::f64::consts::LN_2));
    }
    let (slope, slope_err, _) = fit_line(&lit_x, &lit_y, &lit_s)?;
    let (slope_n, slope_n_err, _) = fit_line(&lit_x, &nrm_y, &nrm_s)?;
    rep.stat("slope", slope, slope_err);
    rep.stat("slope_vs_u_x1", slope_n, slope_n_err);
    rep.stat("monotonicity_violations", violations as f64, 0.0);
    rep.tolerance = format!("|slope + alpha| <= {} and u_j <= u_(j-1) within 2 sigma", cfg.slope_tolerance);
    rep.pass = (slope + cfg.alpha).abs() <= cfg.slope_tolerance && violations == 0;
    Ok(rep.finish(t0))
}

/// Exponent `p` in `u(x) ∝ ρ(x)^p` along `x_j = z0 + 2^{−j} r e_d`.
#[allow(clippy::too_many_arguments)]
pub fn boundary_decay_fit(
    domain: &Domain,
    z0: &[f64],
    r: f64,
    alpha: f64,
    f: &BoundaryData,
    levels: std::ops::RangeInclusive<usize>,
    n: usize,
    seed: u64,
    wos: &WosConfig,
    gamma_floor: f64,
    expected: Option<(f64, f64)>,
) -> Result<ExperimentReport> {
    let t0 = Instant::now();
    check_anchor(domain, z0)?;
    graph_of(domain)?;
    f.validate(domain, z0, 2.0 * r, 2.0 * r)?;
    f.vanishes_in_ball(z0, 2.0 * r)?;
    if levels.clone().count() < 3 {
        return Err(Error::Parameter("need at least three heights".into()));
    }
    let mut rep = ExperimentReport::new("boundary-decay", seed);
    rep.param("z0", format!("{z0:?}"))
        .param("r", r)
        .param("alpha", alpha)
        .param("data", f.describe())
        .param("levels", format!("{}..={}", levels.start(), levels.end()))
        .param("n", n)
        .param("gamma_floor", gamma_floor);
    let d = domain.dim();
    let (mut xs, mut ys, mut ss) = (Vec::new(), Vec::new(), Vec::new());
    for j in levels {
        let h = r * 0.5f64.powi(j as i32);
        let x = Point::from(z0).offset(h, &Point::axis(d, d - 1, 1.0));
        let e = harmonic_eval(domain, alpha, f, &x, n, point_seed(seed, "boundary-decay", j), wos)?;
        nondegenerate(&e, "u")?;
        rep.point(format!("rho={h}"), &x, e);
        let rho = graph_of(domain)?.rho(&x);
        xs.push(rho.log2());
        ys.push(e.mean.log2());
        ss.push(e.stderr / (e.mean * std::f64::consts::LN_2));
    }
    let (p, p_err, _) = fit_line(&xs, &ys, &ss)?;
    rep.stat("exponent", p, p_err);
    let mut pass = p <= alpha - gamma_floor;
    rep.tolerance = format!("exponent <= alpha - {gamma_floor}");
    if let Some((target, window)) = expected {
        pass &= (p - target).abs() <= window;
        rep.tolerance.push_str(&format!(" and |exponent - {target}| <= {window}"));
    }
    rep.pass = pass;
    Ok(rep.finish(t0))
}
