use rand::Rng;
use rayon::prelude::*;

use super::realization::{ConstraintTally, NetworkRealization};
use super::{derive_seed, max_interference_gain, sample_ppp, trial_rng, Point2D, PowerRule};
use crate::error::{Error, Result};
use crate::model::{OperatorId, ScenarioConfig, SubBandId};
use crate::stats::{binomial_half_width_95, Moments};

/// Knobs shared by every estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub rule: PowerRule,
    /// Count the typical seller user among the users buyer base stations
    /// protect. Off by default: the closed forms treat buyer powers as
    /// independent of the typical user.
    pub protect_probe: bool,
    /// Resampling budget per trial when the evaluated operator has no base
    /// station in the window.
    pub max_resamples: u32,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { rule: PowerRule::MaxGain, protect_probe: false, max_resamples: 1000 }
    }
}

/// Bookkeeping attached to every estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMeta {
    pub rule: PowerRule,
    pub probe_protected: bool,
    pub window_radius: f64,
    /// Realizations redrawn because the evaluated operator had no server.
    pub resamples: u64,
    /// Buyer base stations that fell back to the power cap.
    pub cap_events: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub trials: u64,
    pub seed: u64,
    pub meta: RunMeta,
}

/// Per-threshold coverage change when the window radius is doubled, from
/// coupled realizations: the inner window is the outer one restricted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeShift {
    pub beta: f64,
    pub inner: f64,
    pub outer: f64,
    /// Mean of `1{SINR_outer > β} - 1{SINR_inner > β}` with its 95% half-width.
    pub shift: f64,
    pub half_width_95: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstraintReport {
    pub realizations: u64,
    pub pairs: u64,
    pub violations: u64,
    /// Realizations with at least one violation.
    pub violating_realizations: u64,
    pub worst_ratio: f64,
}

impl ConstraintReport {
    pub fn violation_rate(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.violations as f64 / self.pairs as f64
        }
    }
}

/// Monte Carlo estimators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Simulator {
    pub options: SimOptions,
}

struct TrialOutput<T> {
    value: T,
    resamples: u64,
    cap_events: u64,
}

impl Simulator {
    pub fn new(options: SimOptions) -> Self {
        Simulator { options }
    }

    pub fn with_rule(rule: PowerRule) -> Self {
        Simulator { options: SimOptions { rule, ..Default::default() } }
    }

    fn meta(&self, config: &ScenarioConfig) -> RunMeta {
        RunMeta {
            rule: self.options.rule,
            probe_protected: self.options.protect_probe,
            window_radius: config.region_radius,
            resamples: 0,
            cap_events: 0,
        }
    }

    /// Runs `trials` independent trials in parallel and returns their
    /// outputs in trial order. A trial whose realization gives `server` no
    /// base station is redrawn from the same stream.
    fn run<T, F>(
        &self,
        config: &ScenarioConfig,
        bands: &[SubBandId],
        server: Option<OperatorId>,
        trials: u64,
        seed: u64,
        f: F,
    ) -> Result<(Vec<T>, RunMeta)>
    where
        T: Send,
        F: Fn(&NetworkRealization) -> Result<T> + Sync,
    {
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        config.ensure_valid()?;
        let opts = self.options;
        let outputs: Vec<TrialOutput<T>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(seed, t);
                let mut resamples = 0;
                loop {
                    let r = NetworkRealization::sample(config, bands, opts.rule, opts.protect_probe, &mut rng)?;
                    if server.is_none_or(|op| !r.base_stations(op).is_empty()) {
                        return Ok(TrialOutput { value: f(&r)?, resamples, cap_events: r.cap_events() });
                    }
                    resamples += 1;
                    if resamples > u64::from(opts.max_resamples) {
                        return Err(Error::NoServer { operator: server.unwrap(), attempts: resamples });
                    }
                }
            })
            .collect::<Result<_>>()?;
        let mut meta = self.meta(config);
        let mut values = Vec::with_capacity(outputs.len());
        for o in outputs {
            meta.resamples += o.resamples;
            meta.cap_events += o.cap_events;
            values.push(o.value);
        }
        Ok((values, meta))
    }

    /// Per-trial SINR of the typical user of `op` on `band`.
    pub fn sinr_samples(
        &self,
        config: &ScenarioConfig,
        band: SubBandId,
        op: OperatorId,
        trials: u64,
        seed: u64,
    ) -> Result<(Vec<f64>, RunMeta)> {
        config.derive_context(band, op)?;
        self.run(config, &[band], Some(op), trials, seed, |r| {
            Ok(r.sinr(band, op)?.expect("server guaranteed by resampling"))
        })
    }

    /// `P[SINR > β]` for the typical user of `op` on `band`.
    pub fn estimate_coverage(
        &self,
        config: &ScenarioConfig,
        band: SubBandId,
        op: OperatorId,
        beta: f64,
        trials: u64,
        seed: u64,
    ) -> Result<MetricEstimate> {
        Ok(self.estimate_coverage_grid(config, band, op, &[beta], trials, seed)?[0])
    }

    /// Coverage at every threshold in `betas`, all read off the same trials.
    pub fn estimate_coverage_grid(
        &self,
        config: &ScenarioConfig,
        band: SubBandId,
        op: OperatorId,
        betas: &[f64],
        trials: u64,
        seed: u64,
    ) -> Result<Vec<MetricEstimate>> {
        if let Some(b) = betas.iter().find(|b| !(**b >= 0.0)) {
            return Err(Error::InvalidArgument(format!("SINR threshold must be non-negative (got {b})")));
        }
        let (sinr, meta) = self.sinr_samples(config, band, op, trials, seed)?;
        Ok(betas
            .iter()
            .map(|&beta| {
                let hits = sinr.iter().filter(|&&s| s > beta).count();
                let p = hits as f64 / trials as f64;
                MetricEstimate { mean: p, half_width_95: binomial_half_width_95(p, trials), trials, seed, meta }
            })
            .collect())
    }

    /// Per-trial `Σ_bands ln(1 + SINR)` for the typical user of `op`, in
    /// nats. Two simulators with different power rules produce paired samples
    /// from the same seed: geometry and fading are shared trial by trial.
    pub fn rate_samples(
        &self,
        config: &ScenarioConfig,
        op: OperatorId,
        trials: u64,
        seed: u64,
    ) -> Result<(Vec<f64>, RunMeta)> {
        let bands = config.bands_of(op);
        if bands.is_empty() {
            config.ensure_valid()?;
            return Ok((vec![0.0; trials as usize], self.meta(config)));
        }
        self.run(config, &bands, Some(op), trials, seed, |r| {
            let mut total = 0.0;
            for &band in &bands {
                total += r.sinr(band, op)?.expect("server guaranteed by resampling").ln_1p();
            }
            Ok(total)
        })
    }

    /// Mean over trials of `Σ_bands ln(1 + SINR)` for the typical user of
    /// `op`, in nats. Exactly zero for an operator with no bands.
    pub fn estimate_rate(
        &self,
        config: &ScenarioConfig,
        op: OperatorId,
        trials: u64,
        seed: u64,
    ) -> Result<MetricEstimate> {
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        let (values, meta) = self.rate_samples(config, op, trials, seed)?;
        let m: Moments = values.into_iter().collect();
        Ok(MetricEstimate { mean: m.mean(), half_width_95: m.half_width_95(), trials, seed, meta })
    }

    /// `Σ μ_k R_k` over all operators with users and bands. Each operator runs
    /// on its own derived seed; the half-width combines the per-operator ones
    /// in quadrature.
    pub fn estimate_total_sum_rate(&self, config: &ScenarioConfig, trials: u64, seed: u64) -> Result<MetricEstimate> {
        config.ensure_valid()?;
        let mut mean = 0.0;
        let mut var = 0.0;
        let mut meta = self.meta(config);
        for (i, op) in config.operators().enumerate() {
            let mu = config.ue_intensity(op);
            if mu == 0.0 || config.bands_of(op).is_empty() {
                continue;
            }
            let e = self.estimate_rate(config, op, trials, derive_seed(seed, i as u64))?;
            mean += mu * e.mean;
            var += (mu * e.half_width_95).powi(2);
            meta.resamples += e.meta.resamples;
            meta.cap_events += e.meta.cap_events;
        }
        Ok(MetricEstimate { mean, half_width_95: var.sqrt(), trials, seed, meta })
    }

    /// Paired estimate of `self`'s total sum-rate minus `other`'s. Both run
    /// on the same seeds, so trial `t` of every operator sees the same
    /// geometry and fading under both power rules and most of the sampling
    /// noise cancels.
    pub fn sum_rate_difference(
        &self,
        other: &Simulator,
        config: &ScenarioConfig,
        trials: u64,
        seed: u64,
    ) -> Result<MetricEstimate> {
        config.ensure_valid()?;
        let mut mean = 0.0;
        let mut var = 0.0;
        let mut meta = self.meta(config);
        for (i, op) in config.operators().enumerate() {
            let mu = config.ue_intensity(op);
            if mu == 0.0 || config.bands_of(op).is_empty() {
                continue;
            }
            let s = derive_seed(seed, i as u64);
            let (a, ma) = self.rate_samples(config, op, trials, s)?;
            let (b, _) = other.rate_samples(config, op, trials, s)?;
            let d: Moments = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            mean += mu * d.mean();
            var += (mu * d.half_width_95()).powi(2);
            meta.resamples += ma.resamples;
            meta.cap_events += ma.cap_events;
        }
        Ok(MetricEstimate { mean, half_width_95: var.sqrt(), trials, seed, meta })
    }

    /// `E[exp(-κ I)]` where `I` is the interference at the typical user of
    /// `op` given a serving base station of average received power `β/κ`.
    /// Interferers of `op` itself are those weaker than that level.
    #[allow(clippy::too_many_arguments)]
    pub fn estimate_laplace(
        &self,
        config: &ScenarioConfig,
        band: SubBandId,
        op: OperatorId,
        kappa: f64,
        beta: f64,
        trials: u64,
        seed: u64,
    ) -> Result<MetricEstimate> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!("kappa must be non-negative (got {kappa})")));
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidArgument(format!("threshold must be positive (got {beta})")));
        }
        config.derive_context(band, op)?;
        let (values, meta) = self.run(config, &[band], None, trials, seed, |r| {
            if kappa == 0.0 {
                return Ok(1.0);
            }
            Ok((-kappa * r.conditional_interference(band, op, kappa, beta)?).exp())
        })?;
        let m: Moments = values.into_iter().collect();
        Ok(MetricEstimate { mean: m.mean(), half_width_95: m.half_width_95(), trials, seed, meta })
    }

    /// Checks every (buyer base station, seller user, band) triple in every
    /// realization against the seller's threshold.
    pub fn constraint_violations(&self, config: &ScenarioConfig, trials: u64, seed: u64) -> Result<ConstraintReport> {
        let bands: Vec<SubBandId> = config.bands().collect();
        let (tallies, _) = self.run(config, &bands, None, trials, seed, |r| Ok(r.constraint_tally()))?;
        let mut rep = ConstraintReport { realizations: trials, ..Default::default() };
        for ConstraintTally { pairs, violations, worst_ratio } in tallies {
            rep.pairs += pairs;
            rep.violations += violations;
            rep.violating_realizations += u64::from(violations > 0);
            rep.worst_ratio = rep.worst_ratio.max(worst_ratio);
        }
        Ok(rep)
    }

    /// Coverage at `config.region_radius` against twice that radius, on
    /// coupled realizations.
    pub fn edge_shift(
        &self,
        config: &ScenarioConfig,
        band: SubBandId,
        op: OperatorId,
        betas: &[f64],
        trials: u64,
        seed: u64,
    ) -> Result<Vec<EdgeShift>> {
        config.derive_context(band, op)?;
        let radius = config.region_radius;
        let mut outer_cfg = config.clone();
        outer_cfg.region_radius = 2.0 * radius;
        let (pairs, _) = self.run(&outer_cfg, &[band], Some(op), trials, seed, |r| {
            let inner = r.restricted(radius);
            let outer_sinr = r.sinr(band, op)?.expect("server guaranteed by resampling");
            // An empty inner window is an outage there.
            let inner_sinr = inner.sinr(band, op)?.unwrap_or(0.0);
            Ok((inner_sinr, outer_sinr))
        })?;
        let n = trials as f64;
        Ok(betas
            .iter()
            .map(|&beta| {
                let m: Moments =
                    pairs.iter().map(|&(i, o)| f64::from(u8::from(o > beta)) - f64::from(u8::from(i > beta))).collect();
                EdgeShift {
                    beta,
                    inner: pairs.iter().filter(|p| p.0 > beta).count() as f64 / n,
                    outer: pairs.iter().filter(|p| p.1 > beta).count() as f64 / n,
                    shift: m.mean(),
                    half_width_95: m.half_width_95(),
                }
            })
            .collect())
    }
}

/// `n` independent draws of the largest gain from a base station at the
/// origin to users of intensity `ue_intensity` on a disk of radius `radius`,
/// with unit-mean Rayleigh fading. Draws with no user at all are redrawn;
/// their count is returned alongside.
pub fn sample_max_gains(ue_intensity: f64, alpha: f64, radius: f64, n: u64, seed: u64) -> Result<(Vec<f64>, u64)> {
    if !(ue_intensity > 0.0 && radius > 0.0 && alpha > 2.0) {
        return Err(Error::InvalidArgument(
            "need positive intensity and radius and a path-loss exponent above 2".into(),
        ));
    }
    let draws: Vec<(f64, u64)> = (0..n)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let mut empty = 0;
            loop {
                let ues = sample_ppp(ue_intensity, radius, &mut rng);
                let fading: Vec<f64> = ues.iter().map(|_| rng.sample::<f64, _>(rand_distr::Exp1)).collect();
                if let Some(h) = max_interference_gain(Point2D::ORIGIN, &ues, &fading, alpha) {
                    return (h, empty);
                }
                empty += 1;
            }
        })
        .collect();
    let empty = draws.iter().map(|d| d.1).sum();
    Ok((draws.into_iter().map(|d| d.0).collect(), empty))
}
