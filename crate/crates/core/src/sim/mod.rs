//! Monte Carlo engine.
//!
//! Each trial samples every operator's base stations and users as PPPs on a
//! disk centred at the origin, draws Rayleigh fading independently per link
//! and sub-band, sets buyer powers, and places the typical user of the
//! evaluated operator at the origin. Trials run in parallel, each on its own
//! ChaCha stream `(seed, trial)`, and are reduced in trial order, so a run is
//! bit-reproducible whatever the thread count.

mod estimate;
mod realization;

pub use estimate::{sample_max_gains, ConstraintReport, EdgeShift, MetricEstimate, RunMeta, SimOptions, Simulator};
pub use realization::{BandState, ConstraintTally, NetworkRealization, ProbeFading};

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn dist2(&self, other: &Point2D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn norm2(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

/// Homogeneous PPP of `intensity` points per square meter on the disk of
/// radius `radius` centred at the origin.
pub fn sample_ppp<R: Rng + ?Sized>(intensity: f64, radius: f64, rng: &mut R) -> Vec<Point2D> {
    let mean = intensity * PI * radius * radius;
    if !(mean > 0.0) {
        return Vec::new();
    }
    let n = Poisson::new(mean).expect("positive finite Poisson mean").sample(rng) as usize;
    (0..n)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            Point2D::new(r * theta.cos(), r * theta.sin())
        })
        .collect()
}

/// `d^(-α)` from the squared distance `d2`.
#[inline]
pub fn path_gain(d2: f64, alpha: f64) -> f64 {
    if alpha == 4.0 {
        1.0 / (d2 * d2)
    } else if alpha == 5.0 {
        1.0 / (d2 * d2 * d2.sqrt())
    } else {
        d2.powf(-alpha / 2.0)
    }
}

/// Received gain `h · d^(-α)` of one link. Every interference check and every
/// maximum goes through this function so that they round identically.
#[inline]
pub fn link_gain(fading: f64, d2: f64, alpha: f64) -> f64 {
    fading * path_gain(d2, alpha)
}

/// `max_i h_i |bs - y_i|^(-α)`, or `None` when there are no users to protect.
pub fn max_interference_gain(bs: Point2D, ues: &[Point2D], fading: &[f64], alpha: f64) -> Option<f64> {
    debug_assert_eq!(ues.len(), fading.len());
    ues.iter().zip(fading).map(|(ue, &h)| link_gain(h, bs.dist2(ue), alpha)).reduce(f64::max)
}

/// Base station with the largest average received power `P_f |ue - x_f|^(-α)`
/// at `ue`. Ties go to the lowest index; `None` for an empty list.
pub fn associate(ue: Point2D, bss: &[Point2D], powers: &[f64], alpha: f64) -> Option<usize> {
    debug_assert_eq!(bss.len(), powers.len());
    let mut best: Option<(usize, f64)> = None;
    for (i, (bs, &p)) in bss.iter().zip(powers).enumerate() {
        let rx = p * path_gain(ue.dist2(bs), alpha);
        if best.is_none_or(|(_, b)| rx > b) {
            best = Some((i, rx));
        }
    }
    best.map(|(i, _)| i)
}

/// How buyer base stations pick their power on a leased sub-band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum PowerRule {
    /// `P = ζ / H` with `H` the largest gain towards any seller user.
    #[default]
    MaxGain,
    /// `P` drawn independently per base station from its marginal law, as the
    /// closed-form engine assumes.
    IndependentMarks,
    /// `P = ζ · d_min^α` with `d_min` the distance to the nearest seller user,
    /// ignoring fading. The comparison strategy; it can break the constraint.
    NearestDistance,
}

impl PowerRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            PowerRule::MaxGain => "max-gain",
            PowerRule::IndependentMarks => "independent-marks",
            PowerRule::NearestDistance => "nearest-distance",
        }
    }
}

impl fmt::Display for PowerRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Seed for sub-run `index` of a run seeded with `master` (splitmix64).
/// Sub-runs never share a stream and adding one never shifts another.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
