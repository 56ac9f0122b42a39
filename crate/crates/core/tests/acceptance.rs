//! Acceptance criteria, one line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the verdict lines are
//! printed by `cargo test` without `--nocapture`. The process fails when a
//! criterion outside `KNOWN_RED` fails.

use std::f64::consts::PI;
use std::time::Instant;

use stablelab::estimators::*;
use stablelab::geometry::{Ball, Domain, LipschitzGraph, Point};
use stablelab::kernels::checks::*;
use stablelab::kernels::{BFunction, StableParams};
use stablelab::sampler::checks::single_ball_exit_check;
use stablelab::sampler::WosConfig;
use stablelab::Result;

/// Criteria that cannot hold as stated; see the decay notes in the README.
const KNOWN_RED: &[usize] = &[9];

type Criterion = fn() -> Result<Verdict>;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict {
        pass,
        detail: detail.into(),
    })
}

fn wos() -> WosConfig {
    WosConfig::default()
}

fn half_disc(radius: f64) -> Domain {
    Domain::graph_ball(LipschitzGraph::flat(2), Ball::centered(2, radius).unwrap()).unwrap()
}

fn c1() -> Result<Verdict> {
    let rows = poisson_normalization(&[0.5, 1.0, 1.5], &[0.0, 0.5, 0.9], 1_000_000, 11)?;
    let planar: Vec<_> = rows.iter().filter(|r| r.case.starts_with("d=2")).collect();
    let mc: Vec<_> = rows.iter().filter(|r| r.case.starts_with("d=3")).collect();
    let worst = planar.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let slowest = planar.iter().map(|r| r.seconds).fold(0.0, f64::max);
    let worst_z = mc.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let pass = planar.len() == 9 && mc.len() == 9 && planar.iter().all(|r| r.pass && r.seconds < 1.0) && mc.iter().all(|r| r.pass);
    verdict(
        pass,
        format!("d=2 max |mass-1| = {worst:.1e} (slowest {slowest:.3} s); d=3 MC max {worst_z:.2} stderr"),
    )
}

fn c2() -> Result<Verdict> {
    let t0 = Instant::now();
    let rows = dynkin(&[0.5, 1.0, 1.5], &dynkin_default_cases())?;
    let secs = t0.elapsed().as_secs_f64();
    let worst = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    verdict(
        rows.iter().all(|r| r.pass) && secs < 30.0,
        format!("{} cases, max rel dev {worst:.1e}, {secs:.2} s", rows.len()),
    )
}

fn c3() -> Result<Verdict> {
    let t0 = Instant::now();
    let p = StableParams::new(2, 1.2, 0.6, 0.4, 2.0, 2.0)?;
    let bs = [BFunction::Constant(0.4), BFunction::Constant(1.5)];
    let rows = scaling(&p, &bs, &[0.25, 0.5, 2.0, 8.0], 100)?;
    let secs = t0.elapsed().as_secs_f64();
    let worst = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    verdict(
        rows.iter().all(|r| r.pass) && secs < 1.0,
        format!("max rel dev {worst:.1e} over {} runs of 100 tuples, {secs:.3} s", rows.len()),
    )
}

fn c4() -> Result<Verdict> {
    let (planar, radial) = mean_exit_time_routes(1.0, 1e-10)?;
    let target = 2.0 / PI;
    let pass = (planar - target).abs() < 1e-6 && (radial - target).abs() < 1e-6 && (planar - radial).abs() < 1e-6;
    verdict(pass, format!("planar {planar:.12}, radial {radial:.12}, 2/pi {target:.12}"))
}

fn c5() -> Result<Verdict> {
    let rows = gradient_fd(100, 1000, 17)?;
    let detail: Vec<String> = rows.iter().map(|r| format!("{:.2e}", r.value)).collect();
    verdict(
        rows.iter().all(|r| r.pass),
        format!("fixed/moving/green rel dev and envelope ratio: {}", detail.join(", ")),
    )
}

fn c6() -> Result<Verdict> {
    let t0 = Instant::now();
    let law = single_ball_exit_check(2, 1.0, 100_000, 10_000, 20, 23)?;
    let oracle = ball_mean_value_half_power(1.0, [0.0, 1.0], 0.5, 1e-10)?;
    let w = BoundaryData::w_halfspace(1.0);
    let e = harmonic_eval(&half_disc(8.0), 1.0, &w, &[0.0, 1.0], 100_000, 29, &wos())?;
    let secs = t0.elapsed().as_secs_f64();
    let pass = law.ks < 0.01 && law.chi2_p > 0.001 && (oracle - 1.0).abs() < 1e-6 && e.within(1.0, 3.0) && secs < 60.0;
    verdict(
        pass,
        format!(
            "KS {:.4} (n={}), chi2 p {:.3}; ball oracle {:.9}; E[w(exit)] = {:.4} +- {:.4}; {secs:.1} s",
            law.ks, law.n_radial, law.chi2_p, oracle, e.mean, e.stderr
        ),
    )
}

fn c7() -> Result<Verdict> {
    let data = BoundaryData::annulus_sector(Point::zeros(2), 2.0, 3.0, 0.0, 0.5 * PI)?;
    let mut ratios = Vec::new();
    let mut scale_ok = true;
    let mut changes = Vec::new();
    for seed in 0..5 {
        let cfg = HarnackConfig {
            x0: Point::zeros(2),
            radii: vec![1.0, 0.5],
            alpha: 1.0,
            data: data.clone(),
            grid_size: 5,
            n: 20_000,
            wos: wos(),
            scale_tolerance: 0.2,
        };
        let rep = harnack_experiment(&cfg, 100 + seed)?;
        ratios.push(rep.value("ratio_r0"));
        changes.push(rep.value("scale_change_r1").0);
        scale_ok &= rep.pass;
    }
    let st = seed_stability(&ratios, 3.0)?;
    let finite = ratios.iter().all(|r| r.0.is_finite());
    verdict(
        finite && st.pass && scale_ok,
        format!(
            "sup/inf {:.3} (5 seeds, max pair z {:.2}); change r -> r/2 up to {:.1}%",
            st.weighted_mean,
            st.max_pair_z,
            100.0 * changes.iter().map(|c| c.abs()).fold(0.0, f64::max)
        ),
    )
}

fn c8() -> Result<Verdict> {
    let h = Domain::half_space(2)?;
    let f1 = BoundaryData::slab(0, 2.0, 3.0)?;
    let f2 = BoundaryData::slab(0, -40.0, -10.0)?;
    let mut pairs = Vec::new();
    for seed in 0..5 {
        let cfg = BhpConfig {
            domain: h.clone(),
            z0: Point::zeros(2),
            r: 1.0,
            alpha: 1.0,
            f1: f1.clone(),
            f2: f2.clone(),
            grid_size: 5,
            n: 20_000,
            wos: wos(),
        };
        pairs.push(bhp_experiment(&cfg, 200 + seed)?.value("max_pair_ratio"));
    }
    let st = seed_stability(&pairs, 3.0)?;
    let lim = boundary_ratio_limit_experiment(
        &RatioLimitConfig {
            domain: h,
            z0: Point::zeros(2),
            r: 1.0,
            alpha: 1.0,
            f1,
            f2,
            levels: 6,
            n: 1_000_000,
            wos: wos(),
        },
        31,
    )?;
    let (g1, g1e) = lim.value("gamma1");
    let (of, _) = lim.value("osc_first");
    let (ol, _) = lim.value("osc_last");
    let qs: Vec<String> = (1..=6).map(|k| format!("{:.3}", lim.value(&format!("q{k}")).0)).collect();
    verdict(
        st.pass && pairs.iter().all(|p| p.0.is_finite()) && lim.pass,
        format!(
            "max pair-ratio {:.3} (max pair z {:.2}); u/v {}; osc {of:.4} -> {ol:.4}; gamma1 {g1:.2} +- {g1e:.2}",
            st.weighted_mean,
            st.max_pair_z,
            qs.join(" ")
        ),
    )
}

fn c9() -> Result<Verdict> {
    let cfg = DecayConfig {
        domain: Domain::half_space(2)?,
        z0: Point::zeros(2),
        r: 1.0,
        alpha: 1.0,
        f: BoundaryData::slab(0, 3.0, 5.0)?,
        levels: 5,
        n: 100_000,
        wos: wos(),
        slope_tolerance: 0.15,
    };
    let rep = decay_experiment(&cfg, 41)?;
    let (s, se) = rep.value("slope");
    let (sn, sne) = rep.value("slope_vs_u_x1");
    let (viol, _) = rep.value("monotonicity_violations");
    verdict(
        rep.pass,
        format!(
            "slope of log2(u_k(x_k)/u(x_k)) = {s:.3} +- {se:.3} (target -1 +- 0.15); \
             slope of log2(u_k(x_k)/u(x_1)) = {sn:.3} +- {sne:.3}; monotonicity violations {viol}"
        ),
    )
}

fn c10() -> Result<Verdict> {
    let u = half_disc(8.0);
    let w = BoundaryData::w_halfspace(1.0);
    let grid = vec![Point::from([0.0, 1.0]), Point::from([1.0, 0.5]), Point::from([-0.5, 0.25])];
    let cfg = GradientBoundConfig {
        domain: u.clone(),
        alpha: 1.0,
        f: w.clone(),
        grid,
        radius_fraction: 0.5,
        n: 100_000,
        wos: wos(),
        expected: Some(0.5),
    };
    let rep = gradient_bound_experiment(&cfg, 53)?;
    let scaled = gradient_bound_experiment(
        &GradientBoundConfig {
            f: w.clone().scaled(3.0),
            ..cfg.clone()
        },
        53,
    )?;
    let (up, ups) = rep.value("upper");
    let (lo, los) = rep.value("lower");
    let up3 = scaled.value("upper").0;
    let invariant = ((up3 - up) / up).abs() <= 1e-12;

    let x = [0.0, 1.0];
    let score = gradient_score_estimate(&u, 1.0, &w, &x, 0.5, 100_000, 59, &wos())?;
    let fd = gradient_fd_estimate(&u, 1.0, &w, &x, 0.05, 100_000, 61, &wos())?;
    let agree = score
        .iter()
        .zip(&fd)
        .all(|(a, b)| (a.mean - b.mean).abs() <= 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt());
    verdict(
        rep.pass && invariant && agree,
        format!(
            "upper {up:.3} +- {ups:.3}, lower {lo:.3} +- {los:.3}; d/dx2 score {:.3} +- {:.3} vs FD {:.3} +- {:.3}; \
             |upper(3f)/upper(f) - 1| = {:.1e}",
            score[1].mean,
            score[1].stderr,
            fd[1].mean,
            fd[1].stderr,
            ((up3 - up) / up).abs()
        ),
    )
}

fn c11() -> Result<Verdict> {
    let graph = LipschitzGraph::sine(2, 0.1, 2.0, 0.32)?;
    let base = BarrierConfig {
        graph: graph.clone(),
        z0: graph.boundary_point(&[0.0]),
        r: 0.5,
        alpha: 1.0,
        heights: vec![],
        n: 20_000,
        wos: wos(),
    };
    let cfg = BarrierConfig {
        heights: base.even_heights(10),
        ..base
    };
    let mut mono = true;
    let mut positive = true;
    let mut mids = Vec::new();
    let mut tops = Vec::new();
    for seed in 0..5 {
        let rep = barrier_experiment(&cfg, 300 + seed)?;
        mono &= rep.value("monotonicity_violations").0 == 0.0;
        positive &= rep.value("min_interior_ratio").0 > 0.0;
        mids.push(rep.value("ratio_t5"));
        tops.push(rep.value("g_top").0);
    }
    let st = seed_stability(&mids, 3.0)?;
    verdict(
        mono && positive && st.pass,
        format!(
            "monotone in all 5 seeds: {mono}; mid-height ratio {:.3} (max pair z {:.2}); g at top height {:.3}",
            st.weighted_mean,
            st.max_pair_z,
            tops.iter().sum::<f64>() / tops.len() as f64
        ),
    )
}

fn c12() -> Result<Verdict> {
    let f = BoundaryData::slab(0, 3.0, 5.0)?;
    let h = Domain::half_space(2)?;
    let main = boundary_decay_fit(&h, &[0.0, 0.0], 1.0, 1.0, &f, 2..=7, 50_000, 71, &wos(), 0.05, Some((0.5, 0.1)))?;
    let (p, pe) = main.value("exponent");
    let mut below = main.pass;
    let mut others = Vec::new();
    let sine = LipschitzGraph::sine(2, 0.1, 2.0, 0.32)?;
    let configs = [
        (h.clone(), 0.5, Point::zeros(2)),
        (h.clone(), 1.5, Point::zeros(2)),
        (Domain::Graph(sine.clone()), 1.0, sine.boundary_point(&[0.0])),
    ];
    for (i, (dom, alpha, z0)) in configs.iter().enumerate() {
        let rep = boundary_decay_fit(dom, z0, 1.0, *alpha, &f, 2..=7, 50_000, 73 + i as u64, &wos(), 0.05, None)?;
        let q = rep.value("exponent").0;
        below &= rep.pass;
        others.push(format!("{q:.3} (alpha {alpha})"));
    }
    verdict(below, format!("half-space exponent {p:.3} +- {pe:.3}; others {}", others.join(", ")))
}

fn main() {
    let criteria: [(&str, Criterion); 12] = [
        ("Poisson kernel normalization", c1),
        ("Dynkin identity", c2),
        ("scaling identities", c3),
        ("mean exit time", c4),
        ("gradient closed forms", c5),
        ("walk-on-spheres exactness", c6),
        ("Harnack ratio", c7),
        ("boundary Harnack and ratio limit", c8),
        ("decay", c9),
        ("gradient bounds", c10),
        ("barrier", c11),
        ("boundary decay", c12),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut unexpected = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let t0 = Instant::now();
        let (pass, detail) = match run() {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = match (pass, KNOWN_RED.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("[{tag}] {id:>2} {name}: {detail} [{:.1} s]", t0.elapsed().as_secs_f64());
        if !pass && !KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
