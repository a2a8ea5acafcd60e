//! Globally adaptive Gauss–Kronrod (10/21) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

// Kronrod 21-point abscissae (positive half, descending) and weights.
#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
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

// Gauss 10-point weights, matching XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerance and subdivision budget for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-8, max_subdivisions: 2000 }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(invalid(format!("quadrature tolerance {abs_tol} must be positive")));
        }
        if max_subdivisions == 0 {
            return Err(invalid("max_subdivisions must be at least 1"));
        }
        Ok(Self { abs_tol, max_subdivisions })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// One 21-point Kronrod rule on `[a, b]` with its Gauss-10 error estimate.
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        res_k += WGK[j] * s;
        if j % 2 == 1 {
            res_g += WG[j / 2] * s;
        }
    }
    Estimate { value: res_k * half, error: ((res_k - res_g) * half).abs() }
}

struct Segment {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
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
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Integrates `f` over `[a, b]`, bisecting the worst segment until the summed
/// error estimate drops below `cfg.abs_tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("integration limits must be finite"));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let first = gk21(&mut f, lo, hi);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a: lo, b: hi, est: first });
    let mut total = first;
    let mut splits = 0;
    while total.error > cfg.abs_tol {
        if splits >= cfg.max_subdivisions {
            return Err(Error::Quadrature { estimate: sign * total.value, error: total.error });
        }
        let seg = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Segment below floating resolution; keep its estimate.
            heap.push(seg);
            break;
        }
        let left = gk21(&mut f, seg.a, mid);
        let right = gk21(&mut f, mid, seg.b);
        total.value += left.value + right.value - seg.est.value;
        total.error += left.error + right.error - seg.est.error;
        heap.push(Segment { a: seg.a, b: mid, est: left });
        heap.push(Segment { a: mid, b: seg.b, est: right });
        splits += 1;
        if splits % 64 == 0 {
            // Refresh the running sums to shed accumulated cancellation.
            total = heap.iter().fold(Estimate { value: 0.0, error: 0.0 }, |acc, s| Estimate {
                value: acc.value + s.est.value,
                error: acc.error + s.est.error,
            });
        }
    }
    let value = heap.iter().map(|s| s.est.value).sum::<f64>();
    Ok(Estimate { value: sign * value, error: total.error.max(0.0) })
}

/// Integrates over consecutive pieces `[p0, p1], [p1, p2], ...`; the tolerance
/// is shared equally among the pieces.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], cfg: &QuadratureConfig) -> Result<Estimate> {
    let pieces = breaks.len().saturating_sub(1).max(1);
    let sub = QuadratureConfig { abs_tol: cfg.abs_tol / pieces as f64, ..*cfg };
    let mut out = Estimate { value: 0.0, error: 0.0 };
    for w in breaks.windows(2) {
        let e = integrate(&mut f, w[0], w[1], &sub)?;
        out.value += e.value;
        out.error += e.error;
    }
    Ok(out)
}
