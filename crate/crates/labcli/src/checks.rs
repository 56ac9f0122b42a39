//! Check suites over the kernel identities.

use stablelab::kernels::checks::{self as kc, CheckRow};
use stablelab::kernels::{BFunction, SampleSpec};

use crate::config::{key, Key, Resolved, MODEL_KEYS, SEED_KEY};
use crate::error::CliError;
use crate::grammar;

pub struct Suite {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
    pub uses_model: bool,
    pub run: fn(&Resolved) -> Result<Vec<CheckRow>, CliError>,
}

impl Suite {
    pub fn all_keys(&self) -> Vec<Key> {
        let mut keys = Vec::new();
        if self.uses_model {
            keys.extend_from_slice(MODEL_KEYS);
        }
        keys.push(SEED_KEY);
        keys.extend_from_slice(self.keys);
        keys
    }
}

pub fn find(name: &str) -> Result<&'static Suite, CliError> {
    SUITES.iter().find(|s| s.name == name).ok_or_else(|| {
        let names: Vec<&str> = SUITES.iter().map(|s| s.name).collect();
        CliError::Config(format!("unknown check '{name}' (one of {})", names.join(", ")))
    })
}

pub fn suites() -> &'static [Suite] {
    SUITES
}

const SUITES: &[Suite] = &[
    Suite {
        name: "poisson-normalization",
        about: "total mass of the ball Poisson kernel: quadrature in d=2, Monte Carlo in d=3",
        keys: &[
            key("check.alphas", "0.5, 1, 1.5", "stability indices"),
            key("check.ratios", "0, 0.5, 0.9", "|x|/r of the start points"),
            key("check.mc_samples", "1000000", "Monte Carlo samples per d=3 case"),
        ],
        uses_model: false,
        run: |c| Ok(kc::poisson_normalization(&c.list("check.alphas")?, &c.list("check.ratios")?, c.usize("check.mc_samples")?, c.u64("run.seed")?)?),
    },
    Suite {
        name: "dynkin",
        about: "ball Poisson kernel against the Green-times-jump-kernel integral in d=2",
        keys: &[key("check.alphas", "0.5, 1, 1.5", "stability indices")],
        uses_model: false,
        run: |c| Ok(kc::dynkin(&c.list("check.alphas")?, &kc::dynkin_default_cases())?),
    },
    Suite {
        name: "scaling",
        about: "scaling identities of b, the jump kernel and the Green and Poisson kernels",
        keys: &[
            key("check.b_list", "zero; const:0.4; radial:bump,exp", "coefficients to test, separated by ';'"),
            key("check.lambdas", "0.25, 0.5, 2, 8", "scale factors"),
            key("check.samples", "100", "random tuples per coefficient and scale"),
        ],
        uses_model: true,
        run: run_scaling,
    },
    Suite {
        name: "gradient-fd",
        about: "closed-form Poisson-kernel gradients against finite differences, and the Green gradient envelope",
        keys: &[
            key("check.configs", "100", "random configurations"),
            key("check.envelope_pairs", "1000", "pairs for the envelope"),
        ],
        uses_model: false,
        run: |c| Ok(kc::gradient_fd(c.usize("check.configs")?, c.usize("check.envelope_pairs")?, c.u64("run.seed")?)?),
    },
    Suite {
        name: "assumption1",
        about: "two-sided comparison of J^b with the reference kernel J^eps0",
        keys: &[
            key("check.pairs", "1000", "point pairs"),
            key("check.r_min", "1e-3", "smallest separation"),
            key("check.r_max", "1e3", "largest separation"),
        ],
        uses_model: true,
        run: run_assumption1,
    },
];

fn run_scaling(c: &Resolved) -> Result<Vec<CheckRow>, CliError> {
    let (params, _) = c.model()?;
    let bs: Vec<BFunction> = c
        .str("check.b_list")
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| grammar::parse_b(s).map_err(|e| CliError::Config(format!("check.b_list: {e}"))))
        .collect::<Result<_, _>>()?;
    Ok(kc::scaling(&params, &bs, &c.list("check.lambdas")?, c.usize("check.samples")?)?)
}

fn run_assumption1(c: &Resolved) -> Result<Vec<CheckRow>, CliError> {
    let (params, b) = c.model()?;
    let sampling = SampleSpec {
        pairs: c.usize("check.pairs")?,
        r_min: c.f64("check.r_min")?,
        r_max: c.f64("check.r_max")?,
        seed: c.u64("run.seed")?,
    };
    Ok(kc::assumption1(&params, &b, &sampling)?)
}

/// Fixed-width table of check rows.
pub fn table(rows: &[CheckRow]) -> String {
    let mut out = format!(
        "{:<22} {:<60} {:>14} {:>14} {:>10} {:>10} {:>8} {:>5}\n",
        "check", "case", "value", "reference", "deviation", "tolerance", "seconds", "pass"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<22} {:<60} {:>14.8e} {:>14.8e} {:>10.2e} {:>10.1e} {:>8.3} {:>5}\n",
            r.check,
            r.case,
            r.value,
            r.reference,
            r.deviation,
            r.tolerance,
            r.seconds,
            if r.pass { "ok" } else { "FAIL" }
        ));
    }
    out
}
