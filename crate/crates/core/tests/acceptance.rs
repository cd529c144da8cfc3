//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Every seed and trial count is fixed here,
//! before any run.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spectra::analytic::{buyer_power_cdf, buyer_power_moment, buyer_power_moment_quadrature, max_gain_cdf, Analytic};
use spectra::config::table_one;
use spectra::quadrature::QuadratureSpec;
use spectra::sim::{derive_seed, sample_max_gains, MetricEstimate, PowerRule, Simulator};
use spectra::stats::{ks_statistic, Moments};
use spectra::units::{db_to_ratio, intensity_per_disk};
use spectra::{OperatorId, ScenarioConfig, SubBandId};

const BAND: SubBandId = SubBandId { seller: 0, band: 0 };
const COVERAGE_TRIALS: u64 = 20_000;
const RATE_TRIALS: u64 = 20_000;
const SWEEP_TRIALS: u64 = 5_000;
const CONSTRAINT_REALIZATIONS: u64 = 10_000;
const EDGE_TRIALS: u64 = 10_000;
const KS_SAMPLES: u64 = 100_000;

const SEED_KS: u64 = 1;
const SEED_COVERAGE: u64 = 2;
const SEED_RATE: u64 = 3;
const SEED_TRENDS: u64 = 4;
const SEED_SWEEP: u64 = 5;
const SEED_MOMENT: u64 = 6;
const SEED_CONSTRAINT: u64 = 7;
const SEED_DETERMINISM: u64 = 8;
const SEED_EDGE: u64 = 9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn beta_grid() -> Vec<f64> {
    (0..13).map(|i| db_to_ratio(-10.0 + 2.5 * i as f64)).collect()
}

fn operators() -> [OperatorId; 2] {
    [OperatorId::seller(0), OperatorId::buyer(0)]
}

fn analytic_grid(cfg: &ScenarioConfig, op: OperatorId) -> Vec<f64> {
    let ctx = cfg.derive_context(BAND, op).unwrap();
    let a = Analytic::default();
    beta_grid().iter().map(|&b| a.coverage(b, &ctx).unwrap().value).collect()
}

fn sim_grid(cfg: &ScenarioConfig, op: OperatorId, seed: u64) -> Vec<MetricEstimate> {
    Simulator::default().estimate_coverage_grid(cfg, BAND, op, &beta_grid(), COVERAGE_TRIALS, seed).unwrap()
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn power_law_oracle() -> Outcome {
    let zeta = table_one().derive_context(BAND, OperatorId::seller(0)).unwrap().threshold;
    let mut pass = true;
    let mut detail = Vec::new();
    for &(mu, alpha) in &[(intensity_per_disk(50.0, 500.0), 5.0), (1e-4, 4.0)] {
        let (mut h, _) = sample_max_gains(mu, alpha, 1000.0, KS_SAMPLES, SEED_KS).unwrap();
        let mut p: Vec<f64> = h.iter().map(|x| zeta / x).collect();
        let ks_h = ks_statistic(&mut h, |z| max_gain_cdf(z, mu, alpha).unwrap());
        let ks_p = ks_statistic(&mut p, |z| buyer_power_cdf(z, mu, alpha, zeta).unwrap());
        pass &= ks_h < 0.01 && ks_p < 0.01;
        detail.push(format!("μ={mu:.3e} α={alpha}: KS_H={ks_h:.4} KS_P={ks_p:.4}"));
    }
    Outcome { pass, detail: detail.join("; ") }
}

fn coverage_agreement() -> Outcome {
    let cfg = table_one();
    let mut pass = true;
    let mut detail = Vec::new();
    for op in operators() {
        let a = analytic_grid(&cfg, op);
        let s = sim_grid(&cfg, op, SEED_COVERAGE);
        let gap = worst(a.iter().zip(&s).map(|(a, s)| a - s.mean));
        pass &= gap < 0.03;
        detail.push(format!("{op} worst |Δ|={gap:.4}"));
    }
    Outcome { pass, detail: detail.join("; ") }
}

fn rate_agreement() -> Outcome {
    let cfg = table_one();
    let mut pass = true;
    let mut detail = Vec::new();
    for op in operators() {
        let a = Analytic::default().operator_rate(&cfg, op).unwrap().value;
        let s = Simulator::default().estimate_rate(&cfg, op, RATE_TRIALS, SEED_RATE).unwrap();
        let rel = s.mean / a - 1.0;
        pass &= rel.abs() < 0.03;
        detail.push(format!(
            "{op} analytic={a:.4} sim={:.4}±{:.4} nats rel={:+.2}%",
            s.mean,
            s.half_width_95,
            100.0 * rel
        ));
    }
    Outcome { pass, detail: detail.join("; ") }
}

/// Coverage deltas `after - before` for both engines and both operators.
struct TrendDeltas {
    analytic: [Vec<f64>; 2],
    sim: [Vec<f64>; 2],
    sim_ci: [Vec<f64>; 2],
}

fn trend_deltas(before: &ScenarioConfig, after: &ScenarioConfig) -> TrendDeltas {
    let mut d = TrendDeltas { analytic: Default::default(), sim: Default::default(), sim_ci: Default::default() };
    for (k, op) in operators().into_iter().enumerate() {
        let (a0, a1) = (analytic_grid(before, op), analytic_grid(after, op));
        d.analytic[k] = a1.iter().zip(&a0).map(|(x, y)| x - y).collect();
        let (s0, s1) = (sim_grid(before, op, SEED_TRENDS), sim_grid(after, op, SEED_TRENDS));
        d.sim[k] = s1.iter().zip(&s0).map(|(x, y)| x.mean - y.mean).collect();
        d.sim_ci[k] = s1.iter().zip(&s0).map(|(x, y)| x.half_width_95.hypot(y.half_width_95)).collect();
    }
    d
}

fn range(v: &[f64]) -> String {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    format!("[{lo:+.4}, {hi:+.4}]")
}

fn buyer_density_trend() -> Outcome {
    let before = table_one();
    let mut after = before.clone();
    after.buyers[0].bs_intensity = intensity_per_disk(16.0, 500.0);
    let d = trend_deltas(&before, &after);
    let buyer_up = d.analytic[1].iter().chain(&d.sim[1]).all(|&x| x > 0.0);
    let seller_flat = worst(d.analytic[0].iter().chain(&d.sim[0]).cloned()) < 0.02;
    Outcome {
        pass: buyer_up && seller_flat,
        detail: format!(
            "buyer Δ analytic {} sim {}; seller Δ analytic {} sim {} (bound 0.02)",
            range(&d.analytic[1]),
            range(&d.sim[1]),
            range(&d.analytic[0]),
            range(&d.sim[0])
        ),
    }
}

fn seller_users_trend() -> Outcome {
    let before = table_one();
    let mut after = before.clone();
    after.sellers[0].ue_intensity = intensity_per_disk(70.0, 500.0);
    let d = trend_deltas(&before, &after);
    let buyer_down = d.analytic[1].iter().chain(&d.sim[1]).all(|&x| x < 0.0);
    let outside = d.sim[0].iter().zip(&d.sim_ci[0]).filter(|(x, ci)| x.abs() > **ci).count();
    Outcome {
        pass: buyer_down && outside == 0,
        detail: format!(
            "buyer Δ analytic {} sim {}; seller Δ analytic {} sim {} with {outside}/13 points outside the 95% CI",
            range(&d.analytic[1]),
            range(&d.sim[1]),
            range(&d.analytic[0]),
            range(&d.sim[0])
        ),
    }
}

fn zeta_grid() -> Vec<f64> {
    (0..13).map(|i| -130.0 + 5.0 * i as f64).collect()
}

fn strictly_unimodal(curve: &[f64]) -> Option<usize> {
    let peak = curve.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1))?.0;
    let rises = curve[..=peak].windows(2).all(|w| w[1] > w[0]);
    let falls = curve[peak..].windows(2).all(|w| w[1] < w[0]);
    (peak > 0 && peak + 1 < curve.len() && rises && falls).then_some(peak)
}

/// Simulated total sum-rate under the max-gain rule, and its paired
/// difference against the distance baseline, at one ζ.
fn paired_sum_rates(cfg: &ScenarioConfig, seed: u64) -> (f64, f64, f64) {
    let ours = Simulator::default();
    let baseline = Simulator::with_rule(PowerRule::NearestDistance);
    let (mut total, mut diff, mut var) = (0.0, 0.0, 0.0);
    for (i, op) in cfg.operators().enumerate() {
        let mu = cfg.ue_intensity(op);
        let s = derive_seed(seed, i as u64);
        let (a, _) = ours.rate_samples(cfg, op, SWEEP_TRIALS, s).unwrap();
        let (b, _) = baseline.rate_samples(cfg, op, SWEEP_TRIALS, s).unwrap();
        let m: Moments = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        total += mu * a.iter().sum::<f64>() / a.len() as f64;
        diff += mu * m.mean();
        var += (mu * m.half_width_95()).powi(2);
    }
    (total, diff, var.sqrt())
}

fn sum_rate_sweep() -> (Outcome, Outcome) {
    let base = table_one();
    let analytic: Vec<f64> =
        zeta_grid().iter().map(|&z| Analytic::default().total_sum_rate(&base.with_threshold_dbm(z)).unwrap()).collect();
    let sim: Vec<(f64, f64, f64)> = zeta_grid()
        .iter()
        .enumerate()
        .map(|(i, &z)| paired_sum_rates(&base.with_threshold_dbm(z), derive_seed(SEED_SWEEP, i as u64)))
        .collect();
    let sim_curve: Vec<f64> = sim.iter().map(|s| s.0).collect();
    let a_peak = strictly_unimodal(&analytic);
    let s_peak = sim_curve.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).map(|p| p.0).unwrap();
    let s_interior = s_peak > 0 && s_peak + 1 < sim_curve.len();
    let shape = Outcome {
        pass: a_peak.is_some() && s_interior,
        detail: format!(
            "analytic peak at {} dBm ({}); simulated peak at {} dBm",
            a_peak.map_or("none".into(), |p| format!("{}", zeta_grid()[p])),
            if a_peak.is_some() { "strictly rises then falls" } else { "not unimodal" },
            zeta_grid()[s_peak]
        ),
    };
    let diffs: Vec<String> =
        zeta_grid().iter().zip(&sim).map(|(z, s)| format!("{z}:{:+.2e}±{:.1e}", s.1, s.2)).collect();
    let losing = sim.iter().filter(|s| s.1 < 0.0).count();
    let dominance = Outcome {
        pass: losing == 0,
        detail: format!(
            "baseline ahead at {losing}/13 points; paired max-gain minus baseline (ζ dBm: diff ± ci95) {}",
            diffs.join(" ")
        ),
    };
    (shape, dominance)
}

fn moment_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_MOMENT);
    let spec = QuadratureSpec { rel_tolerance: 1e-12, abs_tolerance: 1e-300, ..Default::default() };
    let mut worst_rel: f64 = 0.0;
    for _ in 0..5 {
        let alpha = rng.random_range(2.2..8.0);
        let mu = 10f64.powf(rng.random_range(-6.0..-2.0));
        let zeta = 10f64.powf(rng.random_range(-14.0..-6.0));
        let closed = buyer_power_moment(mu, alpha, zeta).unwrap();
        let quad = buyer_power_moment_quadrature(mu, alpha, zeta, &spec).unwrap();
        worst_rel = worst_rel.max((quad / closed - 1.0).abs());
    }
    Outcome { pass: worst_rel < 1e-9, detail: format!("worst relative gap {worst_rel:.2e} over 5 tuples") }
}

fn constraint_invariant() -> Outcome {
    let cfg = table_one();
    let ours = Simulator::default().constraint_violations(&cfg, CONSTRAINT_REALIZATIONS, SEED_CONSTRAINT).unwrap();
    let base = Simulator::with_rule(PowerRule::NearestDistance)
        .constraint_violations(&cfg, CONSTRAINT_REALIZATIONS, SEED_CONSTRAINT)
        .unwrap();
    Outcome {
        pass: ours.violations == 0,
        detail: format!(
            "max-gain {} violations over {} pairs (worst ratio {:.6}); baseline violation rate {:.4} of pairs, {} of {} realizations",
            ours.violations,
            ours.pairs,
            ours.worst_ratio,
            base.violation_rate(),
            base.violating_realizations,
            base.realizations
        ),
    }
}

fn determinism_and_edges() -> Outcome {
    let cfg = table_one();
    let sim = Simulator::default();
    let run = || {
        (
            sim.estimate_coverage_grid(&cfg, BAND, OperatorId::buyer(0), &beta_grid(), 2000, SEED_DETERMINISM).unwrap(),
            sim.estimate_rate(&cfg, OperatorId::seller(0), 2000, SEED_DETERMINISM).unwrap(),
        )
    };
    let (first, second) = (run(), run());
    let identical = first.0.iter().zip(&second.0).all(|(x, y)| x.mean.to_bits() == y.mean.to_bits())
        && first.1.mean.to_bits() == second.1.mean.to_bits()
        && first.1.half_width_95.to_bits() == second.1.half_width_95.to_bits();
    let mut shifts = Vec::new();
    for op in operators() {
        let e = sim.edge_shift(&cfg, BAND, op, &beta_grid(), EDGE_TRIALS, SEED_EDGE).unwrap();
        shifts.push((op, worst(e.iter().map(|s| s.shift))));
    }
    let edges_ok = shifts.iter().all(|s| s.1 < 0.01);
    Outcome {
        pass: identical && edges_ok,
        detail: format!(
            "reruns {}; worst coverage shift {} → {} m: {}",
            if identical { "bit-identical" } else { "DIFFER" },
            cfg.region_radius,
            2.0 * cfg.region_radius,
            shifts.iter().map(|(op, s)| format!("{op} {s:.4}")).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn report(id: &str, name: &str, outcome: &Outcome, elapsed: Duration, budget: Option<Duration>) -> bool {
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let pass = outcome.pass && in_time;
    let budget_note = budget.map_or(String::new(), |b| format!(" / budget {} s", b.as_secs()));
    println!(
        "{} {id} {name}: {} [{:.1} s{budget_note}]",
        if pass { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed.as_secs_f64()
    );
    pass
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn main() -> ExitCode {
    let mut all = true;
    let minute = Duration::from_secs(60);

    let (o, t) = timed(power_law_oracle);
    all &= report("C1", "max-gain and power laws", &o, t, Some(minute));
    let (o, t) = timed(coverage_agreement);
    all &= report("C2", "cross-engine coverage", &o, t, Some(10 * minute));
    let (o, t) = timed(rate_agreement);
    all &= report("C3", "cross-engine rate", &o, t, Some(10 * minute));
    let (o, t) = timed(buyer_density_trend);
    all &= report("C4", "buyer density trend", &o, t, None);
    let (o, t) = timed(seller_users_trend);
    all &= report("C5", "seller user density trend", &o, t, None);
    let ((shape, dominance), t) = timed(sum_rate_sweep);
    all &= report("C6a", "sum-rate peak over threshold", &shape, t, None);
    all &= report("C6b", "max-gain beats distance baseline", &dominance, t, None);
    let (o, t) = timed(moment_identity);
    all &= report("C7", "power moment identity", &o, t, None);
    let (o, t) = timed(constraint_invariant);
    all &= report("C8", "interference constraint", &o, t, None);
    let (o, t) = timed(determinism_and_edges);
    all &= report("C9", "determinism and window edge", &o, t, None);

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
