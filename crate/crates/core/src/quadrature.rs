//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite intervals.
//!
//! Finite intervals use a globally adaptive 21-point Gauss–Kronrod scheme:
//! the segment with the largest error estimate is bisected until the summed
//! error meets the tolerance. Semi-infinite integrals are truncated at a point
//! `T` found by doubling, where the integrand has fallen below
//! `tail_cutoff_ratio` times the largest value seen so far and the caller's
//! tail bound for `∫_T^∞` is negligible. That bound is added to the reported
//! error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tolerance: f64,
    pub abs_tolerance: f64,
    /// Upper limit on the number of segments kept by the adaptive scheme.
    pub max_subdivisions: usize,
    /// Truncate a semi-infinite integral once the integrand drops below this
    /// fraction of its running peak.
    pub tail_cutoff_ratio: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rel_tolerance: 1e-8, abs_tolerance: 1e-12, max_subdivisions: 2000, tail_cutoff_ratio: 1e-14 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        let ok = self.rel_tolerance > 0.0
            && self.abs_tolerance > 0.0
            && self.tail_cutoff_ratio > 0.0
            && self.max_subdivisions >= 50;
        if ok {
            Ok(())
        } else {
            Err(QuadratureError::InvalidSpec(format!("{self:?}")))
        }
    }

    /// Same spec with both tolerances divided by `factor`; used for inner
    /// integrals of nested quadrature.
    pub fn tightened(&self, factor: f64) -> Self {
        QuadratureSpec {
            rel_tolerance: self.rel_tolerance / factor,
            abs_tolerance: self.abs_tolerance / factor,
            ..*self
        }
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tolerance.max(self.rel_tolerance * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Estimated absolute error, including any truncated tail.
    pub error: f64,
    /// Segments used by the adaptive scheme.
    pub subdivisions: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge in {subdivisions} subdivisions (value {value}, error {error:e})")]
    NoConvergence { value: f64, error: f64, subdivisions: usize },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("no truncation point found up to x = {upper:e}")]
    NoTruncation { upper: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
}

/// How to bound the part of a semi-infinite integral beyond the truncation
/// point.
pub enum Tail<'a> {
    /// Caller-supplied bound on `∫_T^∞ |f|`.
    Bound(&'a dyn Fn(f64) -> f64),
    /// The integrand decays at least as fast as `exp(-rate·x)` beyond `T`,
    /// so the tail is at most `f(T) / rate`.
    Decay { rate: f64 },
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
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
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
        self.error.total_cmp(&other.error)
    }
}

fn checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64, QuadratureError> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(QuadratureError::NonFinite { x })
    }
}

/// One 21-point Gauss–Kronrod panel with the QUADPACK error heuristic.
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment, QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = checked(f, center)?;
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let y1 = checked(f, center - dx)?;
        let y2 = checked(f, center + dx)?;
        fv1[j] = y1;
        fv2[j] = y2;
        res_k += WGK[j] * (y1 + y2);
        res_abs += WGK[j] * (y1.abs() + y2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (y1 + y2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral, QuadratureError> {
    integrate_pieces(&f, &[a, b], spec)
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the given
/// breakpoints and refining wherever the error is largest.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: &F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    spec.validate()?;
    let mut heap = BinaryHeap::with_capacity(spec.max_subdivisions + 1);
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(gk21(f, w[0], w[1])?);
        }
    }
    loop {
        let (value, error) = totals(&heap);
        if error <= spec.tolerance(value) {
            return Ok(Integral { value, error, subdivisions: heap.len() });
        }
        let worst = match heap.peek() {
            Some(s) => *s,
            None => return Ok(Integral { value: 0.0, error: 0.0, subdivisions: 0 }),
        };
        let mid = 0.5 * (worst.a + worst.b);
        if heap.len() >= spec.max_subdivisions || !(worst.a < mid && mid < worst.b) {
            return Err(QuadratureError::NoConvergence { value, error, subdivisions: heap.len() });
        }
        heap.pop();
        heap.push(gk21(f, worst.a, mid)?);
        heap.push(gk21(f, mid, worst.b)?);
    }
}

fn totals(heap: &BinaryHeap<Segment>) -> (f64, f64) {
    heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
}

const MAX_DOUBLINGS: usize = 200;
const SAMPLES_PER_PIECE: usize = 16;

/// Integrates `f` over `[a, ∞)`.
///
/// `scale` is the length of the first piece and should be of the order of
/// the integrand's characteristic width. Pieces double in length until the
/// truncation rule is met.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    tail: Tail<'_>,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    spec.validate()?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(QuadratureError::InvalidSpec(format!("truncation scale {scale}")));
    }
    let tail_at = |t: f64, ft: f64| match &tail {
        Tail::Bound(bound) => bound(t),
        Tail::Decay { rate } => ft.abs() / rate,
    };

    let mut points = vec![a];
    let mut peak = 0.0f64;
    let mut rough = 0.0;
    let mut lo = a;
    let mut hi = a + scale;
    for _ in 0..MAX_DOUBLINGS {
        let step = (hi - lo) / SAMPLES_PER_PIECE as f64;
        let mut f_hi = 0.0;
        for k in 1..=SAMPLES_PER_PIECE {
            let x = if k == SAMPLES_PER_PIECE { hi } else { lo + step * k as f64 };
            let y = checked(&f, x)?.abs();
            peak = peak.max(y);
            rough += y * step;
            f_hi = y;
        }
        points.push(hi);
        let tail_est = tail_at(hi, f_hi);
        if f_hi <= spec.tail_cutoff_ratio * peak && tail_est <= 0.1 * spec.tolerance(rough) {
            let mut out = integrate_pieces(&f, &points, spec)?;
            out.error += tail_est;
            return Ok(out);
        }
        lo = hi;
        hi = a + 2.0 * (hi - a);
    }
    Err(QuadratureError::NoTruncation { upper: hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec { rel_tolerance: 1e-12, ..Default::default() }
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, &spec()).unwrap();
        assert!((r.value - 8.0).abs() < 1e-14);
        assert_eq!(r.subdivisions, 1);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ x^(-0.2) dx = 1.25
        let r = integrate(|x: f64| x.powf(-0.2), 0.0, 1.0, &spec()).unwrap();
        assert!((r.value - 1.25).abs() < 1e-11, "{r:?}");
        assert!(r.subdivisions > 1);
    }

    #[test]
    fn exponential_tail() {
        let bound = |t: f64| (-t).exp();
        let r = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, 1.0, Tail::Bound(&bound), &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
        let r = integrate_to_infinity(|x: f64| (-2.0 * x).exp(), 0.0, 1.0, Tail::Decay { rate: 2.0 }, &spec()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lorentzian_with_power_tail() {
        // ∫₀^∞ 1/(1+x²) = π/2, tail beyond T is atan(1/T) ≤ 1/T.
        let bound = |t: f64| 1.0 / t;
        let r = integrate_to_infinity(
            |x: f64| 1.0 / (1.0 + x * x),
            0.0,
            1.0,
            Tail::Bound(&bound),
            &QuadratureSpec { rel_tolerance: 1e-6, ..Default::default() },
        )
        .unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn reports_non_convergence() {
        let tight =
            QuadratureSpec { max_subdivisions: 50, rel_tolerance: 1e-15, abs_tolerance: 1e-300, ..Default::default() };
        let err = integrate(|x: f64| x.powf(-0.9), 0.0, 1.0, &tight).unwrap_err();
        assert!(matches!(err, QuadratureError::NoConvergence { .. }));
    }

    #[test]
    fn rejects_non_finite_integrand() {
        let err = integrate(|x: f64| 1.0 / (x - 0.5), 0.0, 1.0, &spec()).unwrap_err();
        assert!(matches!(err, QuadratureError::NonFinite { .. }));
        let bound = |_t: f64| 0.0;
        let err = integrate_to_infinity(|x: f64| x.exp(), 0.0, 1.0, Tail::Bound(&bound), &spec()).unwrap_err();
        assert!(matches!(err, QuadratureError::NonFinite { .. } | QuadratureError::NoTruncation { .. }));
    }

    #[test]
    fn spec_validation() {
        let mut s = QuadratureSpec::default();
        assert!(s.validate().is_ok());
        s.max_subdivisions = 10;
        assert!(s.validate().is_err());
        let s = QuadratureSpec { rel_tolerance: 0.0, ..Default::default() };
        assert!(integrate(|x| x, 0.0, 1.0, &s).is_err());
    }
}
