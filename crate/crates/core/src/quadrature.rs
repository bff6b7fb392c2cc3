//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature.
//!
//! The rule never evaluates the interval endpoints, so integrands with an
//! integrable singularity at an endpoint can be handled by bisection alone;
//! callers with a known endpoint singularity should still prefer a change of
//! variables that removes it (see [`integrate_to_infinity`]).

use serde::{Deserialize, Serialize};

use crate::error::{PaprError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec<T> {
    pub relative_tolerance: T,
    pub absolute_tolerance: T,
    pub max_subdivisions: usize,
}

impl<T: Real> QuadratureSpec<T> {
    pub fn new(relative_tolerance: T, absolute_tolerance: T, max_subdivisions: usize) -> Result<Self> {
        if !(relative_tolerance > T::zero()) || !(absolute_tolerance > T::zero()) {
            return Err(PaprError::Domain(format!(
                "quadrature tolerances must be positive (rel {relative_tolerance}, abs {absolute_tolerance})"
            )));
        }
        if max_subdivisions == 0 {
            return Err(PaprError::Domain("max_subdivisions must be at least 1".into()));
        }
        Ok(Self {
            relative_tolerance,
            absolute_tolerance,
            max_subdivisions,
        })
    }
}

impl<T: Real> Default for QuadratureSpec<T> {
    /// 1e-10 relative / 1e-12 absolute in double precision. Narrower types
    /// floor both tolerances at 100 machine epsilons.
    fn default() -> Self {
        let floor = T::epsilon() * T::lit(100.0);
        Self {
            relative_tolerance: T::lit(1e-10).max(floor),
            absolute_tolerance: T::lit(1e-12).max(floor),
            max_subdivisions: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub subdivisions: usize,
}

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
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
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

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

/// One 21-point Kronrod panel on [a, b] with the embedded 10-point Gauss
/// rule used for the error estimate.
fn kronrod21<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let f_center = f(center);

    let mut kronrod = f_center * T::lit(WGK[10]);
    let mut gauss = T::zero();
    let mut res_abs = kronrod.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];

    for j in 0..10 {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        kronrod = kronrod + w * (f1 + f2);
        res_abs = res_abs + w * (f1.abs() + f2.abs());
        // odd Kronrod abscissae are the Gauss nodes
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }

    let mean = kronrod * half;
    let mut res_asc = T::lit(WGK[10]) * (f_center - mean).abs();
    for j in 0..10 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = kronrod * half_len;
    let res_abs = res_abs * half_len.abs();
    let res_asc = res_asc * half_len.abs();
    let mut error = ((kronrod - gauss) * half_len).abs();
    if res_asc != T::zero() && error != T::zero() {
        let scale = (T::lit(200.0) * error / res_asc).powf(T::lit(1.5));
        error = res_asc * scale.min(T::one());
    }
    let round_off = T::lit(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) {
        error = error.max(round_off);
    }

    Segment { a, b, value, error }
}

/// Integrate `f` over the finite interval [a, b].
pub fn integrate<T, F>(f: F, a: T, b: T, spec: &QuadratureSpec<T>) -> Result<Integral<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(PaprError::Domain("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(Integral {
            value: T::zero(),
            error: T::zero(),
            subdivisions: 0,
        });
    }

    let mut segments = vec![kronrod21(&f, a, b)];
    loop {
        let value: T = segments.iter().map(|s| s.value).sum();
        let error: T = segments.iter().map(|s| s.error).sum();
        let target = spec.absolute_tolerance.max(spec.relative_tolerance * value.abs());
        if error <= target {
            return Ok(Integral {
                value,
                error,
                subdivisions: segments.len(),
            });
        }

        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, s)| {
                if s.error > be {
                    (i, s.error)
                } else {
                    (bi, be)
                }
            });
        let seg = segments[worst];
        let mid = T::lit(0.5) * (seg.a + seg.b);
        let exhausted = segments.len() >= spec.max_subdivisions;
        let too_narrow = mid <= seg.a || mid >= seg.b;
        if exhausted || too_narrow || !value.is_finite() {
            return Err(PaprError::NoConvergence {
                estimate: value.as_f64(),
                error: error.as_f64(),
                subdivisions: segments.len(),
            });
        }
        segments[worst] = kronrod21(&f, seg.a, mid);
        segments.push(kronrod21(&f, mid, seg.b));
    }
}

/// Integrate `f` over [a, ∞) through the map x = a + t/(1 − t), t ∈ [0, 1).
pub fn integrate_to_infinity<T, F>(f: F, a: T, spec: &QuadratureSpec<T>) -> Result<Integral<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    let mapped = |t: T| {
        let one_minus = T::one() - t;
        let x = a + t / one_minus;
        let fx = f(x);
        if fx == T::zero() {
            T::zero()
        } else {
            fx / (one_minus * one_minus)
        }
    };
    integrate(mapped, T::zero(), T::one(), spec)
}
