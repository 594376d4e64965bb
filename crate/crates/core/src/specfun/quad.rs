//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! Finite pieces are bisected in order of decreasing error estimate until the
//! summed estimate meets `max(abs_tol, rel_tol * |value|)`. A trailing
//! semi-infinite piece `[p, ∞)` is mapped onto `[0, 1)` with
//! `y = p + t / (1 - t)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{EvalPath, SeriesEval};
use crate::{Error, Result};

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadOptions {
    pub const DEFAULT_TOL: f64 = 1e-8;
    pub const DEFAULT_BUDGET: usize = 2000;

    /// Mixed criterion `err <= tol * max(1, |value|)`.
    pub const fn with_tol(tol: f64) -> Self {
        QuadOptions { abs_tol: tol, rel_tol: tol, max_subdivisions: Self::DEFAULT_BUDGET }
    }

    pub const fn relative(rel_tol: f64, abs_tol: f64) -> Self {
        QuadOptions { abs_tol, rel_tol, max_subdivisions: Self::DEFAULT_BUDGET }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self::with_tol(Self::DEFAULT_TOL)
    }
}

/// `∫_a^b f` with the mixed tolerance `tol * max(1, |value|)`.
///
/// `b` may be `f64::INFINITY`.
pub fn quad_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<SeriesEval> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    integrate(f, a, b, QuadOptions::with_tol(tol))
}

/// `∫_a^b f` under `opts`. Reversed limits flip the sign.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<SeriesEval> {
    if a == b {
        return Ok(SeriesEval::exact(0.0, EvalPath::Integral));
    }
    if a > b {
        let mut r = integrate_breaks(f, &[b, a], opts)?;
        r.value = -r.value;
        return Ok(r);
    }
    integrate_breaks(f, &[a, b], opts)
}

/// Integrates over consecutive pieces `points[0]..points[1]..points[n]`.
///
/// `points` must be nondecreasing with every entry finite except possibly the
/// last, which may be `+∞`. Breakpoints are where the integrand has kinks or
/// sharp features; each piece starts as its own interval.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64], opts: QuadOptions) -> Result<SeriesEval> {
    if points.len() < 2 {
        return Err(Error::domain("integration needs at least two points"));
    }
    if points.iter().any(|p| p.is_nan()) || points[..points.len() - 1].iter().any(|p| !p.is_finite()) {
        return Err(Error::domain("only the last integration point may be infinite"));
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("integration points must be nondecreasing"));
    }

    let mut queue = Adaptive::new(opts);
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi == lo {
            continue;
        }
        let mapping = if hi.is_infinite() { Mapping::Tail(lo) } else { Mapping::Identity };
        let (a, b) = match mapping {
            Mapping::Identity => (lo, hi),
            Mapping::Tail(_) => (0.0, 1.0),
        };
        queue.push_new(&f, mapping, a, b)?;
    }
    queue.run(&f)
}

#[derive(Debug, Clone, Copy)]
enum Mapping {
    Identity,
    /// `y = origin + t / (1 - t)` for `t ∈ [0, 1)`.
    Tail(f64),
}

impl Mapping {
    #[inline]
    fn eval<F: Fn(f64) -> f64>(&self, f: &F, x: f64) -> f64 {
        match *self {
            Mapping::Identity => f(x),
            Mapping::Tail(origin) => {
                let one_minus = 1.0 - x;
                let y = origin + x / one_minus;
                let v = f(y);
                if v == 0.0 {
                    0.0
                } else {
                    v / (one_minus * one_minus)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    mapping: Mapping,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.a.total_cmp(&self.a))
    }
}

struct Adaptive {
    opts: QuadOptions,
    heap: BinaryHeap<Segment>,
    /// Segments too narrow to split further.
    frozen: Vec<Segment>,
    evaluations: usize,
    segments: usize,
}

impl Adaptive {
    fn new(opts: QuadOptions) -> Self {
        Adaptive { opts, heap: BinaryHeap::new(), frozen: Vec::new(), evaluations: 0, segments: 0 }
    }

    fn push_new<F: Fn(f64) -> f64>(&mut self, f: &F, mapping: Mapping, a: f64, b: f64) -> Result<(f64, f64)> {
        let (value, err) = gk21(|x| mapping.eval(f, x), a, b);
        self.evaluations += 21;
        self.segments += 1;
        if !value.is_finite() || !err.is_finite() {
            return Err(Error::domain(format!("integrand is not finite on [{a}, {b}] ({value})")));
        }
        self.heap.push(Segment { a, b, mapping, value, err });
        Ok((value, err))
    }

    fn totals(&self) -> (f64, f64) {
        self.heap.iter().chain(self.frozen.iter()).fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.err))
    }

    fn run<F: Fn(f64) -> f64>(mut self, f: &F) -> Result<SeriesEval> {
        let (mut value, mut err) = self.totals();
        let mut splits = 0usize;
        loop {
            if err <= self.opts.target(value) {
                break;
            }
            if self.segments >= self.opts.max_subdivisions {
                break;
            }
            let Some(worst) = self.heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            let width = worst.b - worst.a;
            if width <= 64.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE)
                || mid <= worst.a
                || mid >= worst.b
            {
                self.frozen.push(worst);
                continue;
            }
            let (v1, e1) = self.push_new(f, worst.mapping, worst.a, mid)?;
            let (v2, e2) = self.push_new(f, worst.mapping, mid, worst.b)?;
            // Incremental update; exact totals are recomputed periodically.
            value += v1 + v2 - worst.value;
            err += e1 + e2 - worst.err;
            splits += 1;
            if splits % 64 == 0 {
                (value, err) = self.totals();
            }
        }
        let (value, err) = self.totals();
        let result = SeriesEval { value, err_estimate: err, effort: self.evaluations, path: EvalPath::Integral };
        if err <= self.opts.target(value) {
            Ok(result)
        } else {
            Err(Error::NoConvergence { best: result })
        }
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
fn gk21<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_k = WGK[10] * f_center;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let result = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();

    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}
