use spectra::analytic::{buyer_power_cdf, max_gain_cdf, Analytic};
use spectra::config::table_one;
use spectra::sim::{sample_max_gains, trial_rng, NetworkRealization, PowerRule, Simulator};
use spectra::stats::ks_statistic;
use spectra::units::{db_to_ratio, intensity_per_disk};
use spectra::{OperatorId, SubBandId};

const BAND: SubBandId = SubBandId { seller: 0, band: 0 };

#[test]
fn max_gain_follows_its_law() {
    for &(mu, alpha) in &[(intensity_per_disk(50.0, 500.0), 5.0), (1e-4, 4.0)] {
        let (mut h, empty) = sample_max_gains(mu, alpha, 500.0, 100_000, 21).unwrap();
        assert_eq!(empty, 0);
        let mut p: Vec<f64> = h.iter().map(|x| 1e-10 / x).collect();
        let ks = ks_statistic(&mut h, |z| max_gain_cdf(z, mu, alpha).unwrap());
        assert!(ks < 0.01, "H: KS {ks} for μ={mu}, α={alpha}");
        let ks = ks_statistic(&mut p, |z| buyer_power_cdf(z, mu, alpha, 1e-10).unwrap());
        assert!(ks < 0.01, "P: KS {ks} for μ={mu}, α={alpha}");
    }
}

#[test]
fn independent_marks_follow_the_power_law() {
    let cfg = table_one();
    let ctx = cfg.derive_context(BAND, OperatorId::seller(0)).unwrap();
    let mut p = Vec::new();
    for t in 0..2000 {
        let r = NetworkRealization::sample(&cfg, &[BAND], PowerRule::IndependentMarks, false, &mut trial_rng(8, t))
            .unwrap();
        p.extend_from_slice(&r.bands[0].buyer_power[0]);
    }
    let ks = ks_statistic(&mut p, |z| buyer_power_cdf(z, ctx.seller_ue_intensity, ctx.alpha, ctx.threshold).unwrap());
    assert!(ks < 0.01, "KS {ks} over {} marks", p.len());
}

#[test]
fn laplace_matches_closed_form() {
    let cfg = table_one();
    let analytic = Analytic::default();
    let sim = Simulator::default();
    let beta = 1.0;
    for op in [OperatorId::seller(0), OperatorId::buyer(0)] {
        let ctx = cfg.derive_context(BAND, op).unwrap();
        let l = |k: f64| {
            if op.is_seller() {
                analytic.laplace_seller(k, &ctx, beta).unwrap()
            } else {
                analytic.laplace_buyer(k, &ctx, beta).unwrap()
            }
        };
        // κ at which the closed form equals 1/2, by bisection in log space.
        let (mut lo, mut hi) = (1.0f64, 1e40f64);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if l(mid) > 0.5 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let want = l(lo);
        assert!(want > 0.0 && want < 1.0);
        let got = sim.estimate_laplace(&cfg, BAND, op, lo, beta, 10_000, 31).unwrap();
        assert!((got.mean / want - 1.0).abs() < 0.02, "{op}: {} vs {want}", got.mean);
    }
}

#[test]
fn coverage_decreases_with_threshold() {
    let cfg = table_one();
    let betas: Vec<f64> = (0..13).map(|i| db_to_ratio(-10.0 + 2.5 * i as f64)).collect();
    for op in [OperatorId::seller(0), OperatorId::buyer(0)] {
        let est = Simulator::default().estimate_coverage_grid(&cfg, BAND, op, &betas, 2000, 5).unwrap();
        for w in est.windows(2) {
            assert!(w[1].mean <= w[0].mean + w[0].half_width_95.max(w[1].half_width_95));
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = table_one();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let sim = Simulator::default();
            (
                sim.estimate_rate(&cfg, OperatorId::buyer(0), 500, 99).unwrap(),
                sim.estimate_coverage(&cfg, BAND, OperatorId::seller(0), 1.0, 500, 99).unwrap(),
            )
        })
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn without_buyers_both_engines_see_one_tier() {
    let mut cfg = table_one();
    cfg.buyers.clear();
    cfg.sharing_groups.values_mut().for_each(|g| g.clear());
    let ctx = cfg.derive_context(BAND, OperatorId::seller(0)).unwrap();
    let betas: Vec<f64> = (0..7).map(|i| db_to_ratio(-10.0 + 5.0 * i as f64)).collect();
    let sim = Simulator::default().estimate_coverage_grid(&cfg, BAND, OperatorId::seller(0), &betas, 5000, 12).unwrap();
    for (beta, e) in betas.iter().zip(&sim) {
        let a = Analytic::default().coverage_seller(*beta, &ctx).unwrap().value;
        assert!((a - e.mean).abs() < 0.02, "β={beta}: {a} vs {}", e.mean);
    }
}

#[test]
fn buyer_power_cap_is_counted() {
    let mut cfg = table_one();
    cfg.sellers[0].ue_intensity = 0.0;
    let e = Simulator::default().estimate_coverage(&cfg, BAND, OperatorId::buyer(0), 1.0, 50, 1).unwrap();
    assert!(e.meta.cap_events > 0);
}
