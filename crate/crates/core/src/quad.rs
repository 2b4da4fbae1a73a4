//! Quadrature helpers: globally adaptive Gauss-Kronrod (21 point) for real or
//! complex integrands, and fixed composite Gauss-Legendre rules.

use std::num::NonZeroUsize;
use std::ops::{Add, Mul, Sub};

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

// Kronrod abscissae on [0, 1]; odd entries are the embedded Gauss nodes.
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

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn gk21<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron = kron + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).magnitude())
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Self {
            abs: 0.0,
            rel,
            max_intervals: 2000,
        }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }
}

/// Adaptive integral of `f` over `[a, b]`. Always bisects the interval with the
/// largest error estimate (lowest index on ties), so results are reproducible.
pub fn integrate<T: QuadValue>(
    operation: &str,
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<T> {
    let mut intervals = vec![{
        let (v, e) = gk21(&mut f, a, b);
        (a, b, v, e)
    }];
    loop {
        let (mut total, mut err) = (T::zero(), 0.0);
        for iv in &intervals {
            total = total + iv.2;
            err += iv.3;
        }
        let target = tol.abs.max(tol.rel * total.magnitude());
        if err <= target {
            return Ok(total);
        }
        if intervals.len() >= tol.max_intervals {
            return Err(Error::Integration {
                operation: operation.to_string(),
                achieved: err / total.magnitude().max(f64::MIN_POSITIVE),
                requested: tol.rel,
            });
        }
        let mut worst = 0;
        for (i, iv) in intervals.iter().enumerate() {
            if iv.3 > intervals[worst].3 {
                worst = i;
            }
        }
        let (lo, hi, _, _) = intervals[worst];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval can no longer be split in floating point.
            return Err(Error::Integration {
                operation: operation.to_string(),
                achieved: err / total.magnitude().max(f64::MIN_POSITIVE),
                requested: tol.rel,
            });
        }
        let (v1, e1) = gk21(&mut f, lo, mid);
        let (v2, e2) = gk21(&mut f, mid, hi);
        intervals[worst] = (lo, mid, v1, e1);
        intervals.push((mid, hi, v2, e2));
    }
}

/// Fixed Gauss-Legendre rule mapped to arbitrary intervals.
#[derive(Debug, Clone)]
pub struct Legendre {
    pairs: Vec<(f64, f64)>,
}

impl Legendre {
    pub fn new(order: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(order.max(1)).unwrap());
        let mut pairs = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { pairs }
    }

    pub fn integrate<T: QuadValue>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = T::zero();
        for &(x, w) in &self.pairs {
            acc = acc + f(c + h * x) * w;
        }
        acc * h
    }

    /// Same rule applied on `panels` equal sub-intervals.
    pub fn composite<T: QuadValue>(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> T) -> T {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut acc = T::zero();
        for p in 0..panels {
            let lo = a + width * p as f64;
            acc = acc + self.integrate(lo, lo + width, &mut f);
        }
        acc
    }
}
