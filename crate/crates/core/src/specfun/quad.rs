//! One-dimensional quadrature: globally adaptive 10/21-point Gauss-Kronrod
//! bisection with endpoint-singularity hints, and an independent
//! double-exponential (tanh-sinh) rule used as a cross-check.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Non-negative Kronrod abscissae on [-1, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_059,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_114,
    0.562_757_134_668_604_683_339_000_099_272,
    0.433_395_394_129_247_190_799_265_943_165,
    0.294_392_862_701_460_198_131_126_603_103,
    0.148_874_338_981_631_210_884_826_001_129,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_244,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_325,
    0.123_491_976_262_065_851_077_208_524_406,
    0.134_709_217_311_473_325_928_054_001_771,
    0.142_775_938_577_060_080_797_094_273_138,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_389,
];

/// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_657,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Upper limit of integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    Infinity,
}

/// Behaviour declared by the caller at the ends of the interval.
///
/// `left = Some(p)` declares `f(x) ~ (x − a)^{−p}` near `a` (p < 1), and
/// likewise `right` at a finite `b`. `tail_decay = Some(q)` declares
/// `f(t) ~ t^{−1−q}` as t → ∞; without it the tail is mapped by `t = c/u`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EndpointHints {
    pub left: Option<f64>,
    pub right: Option<f64>,
    pub tail_decay: Option<f64>,
}

impl EndpointHints {
    pub fn left(p: f64) -> Self {
        Self {
            left: Some(p),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
fn kronrod21<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut result_k = WGK[10] * fc;
    let mut result_g = 0.0;
    let mut result_abs = result_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        result_k += WGK[j] * (f1 + f2);
        result_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            result_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * result_k;
    let mut result_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        result_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = result_k * half;
    let result_abs = result_abs * half.abs();
    let result_asc = result_asc * half.abs();
    let mut err = ((result_k - result_g) * half).abs();
    if result_asc != 0.0 && err != 0.0 {
        err = result_asc * (200.0 * err / result_asc).powf(1.5).min(1.0);
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * result_abs);
    }
    (value, err)
}

/// Globally adaptive bisection of a finite interval.
fn adaptive<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, opts: &QuadOptions) -> Result<QuadResult> {
    let (value, error) = kronrod21(f, lo, hi);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { lo, hi, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut evaluations = 21;
    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Quadrature {
                estimate: total,
                abs_error: total_err,
            });
        }
        if total_err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                estimate: total,
                abs_error: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // interval exhausted at machine resolution; keep it and stop refining it
            return Err(Error::Quadrature {
                estimate: total,
                abs_error: total_err,
            });
        }
        let (v1, e1) = kronrod21(f, worst.lo, mid);
        let (v2, e2) = kronrod21(f, mid, worst.hi);
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            lo: worst.lo,
            hi: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            lo: mid,
            hi: worst.hi,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed the drift of the running totals
    let (value, abs_error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(QuadResult {
        value,
        abs_error,
        evaluations,
    })
}

fn combine(a: QuadResult, b: QuadResult) -> QuadResult {
    QuadResult {
        value: a.value + b.value,
        abs_error: a.abs_error + b.abs_error,
        evaluations: a.evaluations + b.evaluations,
    }
}

/// ∫_a^{a+len} f with f ~ (x − a)^{−p}; substitutes x = a + len·u^k, k = 1/(1−p).
fn left_singular<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    len: f64,
    p: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let k = 1.0 / (1.0 - p);
    let g = |u: f64| {
        let uk = u.powf(k);
        let x = a + len * uk;
        if x == a {
            return 0.0;
        }
        f(x) * len * k * uk / u
    };
    adaptive(&g, 0.0, 1.0, opts)
}

/// ∫_{b−len}^{b} f with f ~ (b − x)^{−p}.
fn right_singular<F: Fn(f64) -> f64>(
    f: &F,
    b: f64,
    len: f64,
    p: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let k = 1.0 / (1.0 - p);
    let g = |u: f64| {
        let uk = u.powf(k);
        let x = b - len * uk;
        if x == b {
            return 0.0;
        }
        f(x) * len * k * uk / u
    };
    adaptive(&g, 0.0, 1.0, opts)
}

fn finite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    left: Option<f64>,
    right: Option<f64>,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    for p in [left, right].into_iter().flatten() {
        if p >= 1.0 {
            return Err(Error::Parameter(format!(
                "endpoint exponent {p} is not integrable"
            )));
        }
    }
    match (left, right) {
        (None, None) => adaptive(f, a, b, opts),
        (Some(p), None) => left_singular(f, a, b - a, p, opts),
        (None, Some(p)) => right_singular(f, b, b - a, p, opts),
        (Some(p), Some(q)) => {
            let mid = 0.5 * (a + b);
            let l = left_singular(f, a, mid - a, p, opts)?;
            let r = right_singular(f, b, b - mid, q, opts)?;
            Ok(combine(l, r))
        }
    }
}

/// Adaptive integral of `f` over `(a, b)`.
///
/// Infinite upper limits are split at `c` and the tail `[c, ∞)` is mapped
/// onto `(0, 1]` by `t = c·u^{−1/q}`, which turns a `t^{−1−q}` tail into a
/// bounded integrand.
pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: Bound,
    hints: &EndpointHints,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    match b {
        Bound::Finite(b) => {
            if b == a {
                return Ok(QuadResult {
                    value: 0.0,
                    abs_error: 0.0,
                    evaluations: 0,
                });
            }
            if b < a {
                let r = finite(&f, b, a, hints.right, hints.left, opts)?;
                return Ok(QuadResult {
                    value: -r.value,
                    ..r
                });
            }
            finite(&f, a, b, hints.left, hints.right, opts)
        }
        Bound::Infinity => {
            let c = if a > 0.0 { 2.0 * a } else { a + 1.0 };
            let head = finite(&f, a, c, hints.left, None, opts)?;
            let q = hints.tail_decay.unwrap_or(1.0);
            if q <= 0.0 {
                return Err(Error::Parameter(format!("tail decay {q} is not integrable")));
            }
            // shift so the map is anchored at a positive point
            let shift = if c > 0.0 { 0.0 } else { 1.0 - c };
            let c0 = c + shift;
            let g = |u: f64| {
                let t = c0 * u.powf(-1.0 / q);
                if !t.is_finite() {
                    return 0.0;
                }
                f(t - shift) * t / (q * u)
            };
            let tail = adaptive(&g, 0.0, 1.0, opts)?;
            Ok(combine(head, tail))
        }
    }
}

/// Double-exponential (tanh-sinh) quadrature on a finite interval.
///
/// Integrable endpoint singularities need no hints. Nodes are generated in
/// complementary form so points next to an endpoint keep full precision.
pub fn integrate_tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadResult> {
    use std::f64::consts::FRAC_PI_2;
    const T_MAX: f64 = 4.5;
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let node = |t: f64| -> (f64, f64, f64) {
        // returns (offset from each endpoint as a fraction of `half`, weight)
        let s = FRAC_PI_2 * t.sinh();
        let cosh_s = s.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cosh_s * cosh_s);
        let delta = 2.0 / (1.0 + (2.0 * s).exp()); // 1 − tanh(s)
        (delta, w, s)
    };
    let eval_pair = |t: f64| -> (f64, usize) {
        let (delta, w, _) = node(t);
        let mut sum = 0.0;
        let mut count = 0;
        let xl = a + half * delta;
        let xr = b - half * delta;
        if xl > a && xl < b {
            sum += w * f(xl);
            count += 1;
        }
        if xr < b && xr > a {
            sum += w * f(xr);
            count += 1;
        }
        (sum, count)
    };
    let mut h = 1.0;
    let mut sum = FRAC_PI_2 * f(center);
    let mut evaluations = 1;
    let mut t = h;
    while t <= T_MAX {
        let (s, c) = eval_pair(t);
        sum += s;
        evaluations += c;
        t += h;
    }
    let mut estimate = sum * h * half;
    for _level in 0..12 {
        h *= 0.5;
        let mut t = h;
        while t <= T_MAX {
            let (s, c) = eval_pair(t);
            sum += s;
            evaluations += c;
            t += 2.0 * h;
        }
        let next = sum * h * half;
        let diff = (next - estimate).abs();
        estimate = next;
        if !estimate.is_finite() {
            break;
        }
        if diff <= rel_tol * estimate.abs() {
            return Ok(QuadResult {
                value: estimate,
                abs_error: diff,
                evaluations,
            });
        }
    }
    Err(Error::Quadrature {
        estimate,
        abs_error: f64::NAN,
    })
}
