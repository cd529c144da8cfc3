//! Parameter sweeps over a scenario, evaluated by any mix of the closed-form
//! engine, the simulator, and the simulator under the distance baseline.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::Result;
use clap::ValueEnum;
use rayon::prelude::*;

use spectra::analytic::{Analytic, LaplaceSign};
use spectra::config::config_hash;
use spectra::sim::{derive_seed, PowerRule, RunMeta, Simulator};
use spectra::stats::Moments;
use spectra::units::db_to_ratio;
use spectra::{OperatorId, ScenarioConfig, SubBandId};

use crate::grid::check_grid;
use crate::table::{Row, SweepResult};
use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweptParameter {
    /// SINR threshold β in dB.
    SinrThresholdDb,
    /// Every seller's interference threshold ζ in dBm.
    InterferenceThresholdDbm,
    /// Every buyer's base-station intensity, per square meter.
    BuyerBsIntensity,
    /// Every seller's user intensity, per square meter.
    SellerUeIntensity,
}

impl SweptParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweptParameter::SinrThresholdDb => "sinr_threshold_db",
            SweptParameter::InterferenceThresholdDbm => "interference_threshold_dbm",
            SweptParameter::BuyerBsIntensity => "buyer_bs_intensity",
            SweptParameter::SellerUeIntensity => "seller_ue_intensity",
        }
    }

    fn units(&self) -> &'static str {
        match self {
            SweptParameter::SinrThresholdDb => "dB",
            SweptParameter::InterferenceThresholdDbm => "dBm",
            _ => "per m^2",
        }
    }

    /// The scenario at grid value `value`. A `β` sweep leaves it unchanged.
    pub fn apply(&self, base: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut cfg = base.clone();
        match self {
            SweptParameter::SinrThresholdDb => {}
            SweptParameter::InterferenceThresholdDbm => cfg = base.with_threshold_dbm(value),
            SweptParameter::BuyerBsIntensity => cfg.buyers.iter_mut().for_each(|b| b.bs_intensity = value),
            SweptParameter::SellerUeIntensity => cfg.sellers.iter_mut().for_each(|s| s.ue_intensity = value),
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Engines {
    pub analytic: bool,
    pub sim: bool,
    pub baseline: bool,
}

impl FromStr for Engines {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut e = Engines::default();
        for name in s.split(',').map(str::trim) {
            match name {
                "analytic" => e.analytic = true,
                "sim" | "simulation" => e.sim = true,
                "baseline" => e.baseline = true,
                other => return Err(format!("unknown engine `{other}` (expected analytic, sim or baseline)")),
            }
        }
        Ok(e)
    }
}

impl fmt::Display for Engines {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.analytic, "analytic"), (self.sim, "sim"), (self.baseline, "baseline")]
            .into_iter()
            .filter_map(|(on, n)| on.then_some(n))
            .collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub parameter: SweptParameter,
    pub grid: Vec<f64>,
    pub engines: Engines,
    pub trials: u64,
    pub seed: u64,
    /// Sub-band whose operators get coverage columns.
    pub band: SubBandId,
    /// SINR threshold for coverage columns when `β` is not the swept
    /// parameter.
    pub beta_db: f64,
    pub sign: LaplaceSign,
}

impl SweepSpec {
    fn check(&self) -> Result<(), ConfigError> {
        check_grid(&self.grid).map_err(|e| ConfigError(e.to_string()))?;
        let fail = |m: &str| Err(ConfigError(m.into()));
        if !(self.engines.analytic || self.engines.sim || self.engines.baseline) {
            return fail("no engine selected");
        }
        if (self.engines.sim || self.engines.baseline) && self.trials == 0 {
            return fail("trials must be positive when a simulation engine is selected");
        }
        if !self.beta_db.is_finite() {
            return fail("SINR threshold must be finite");
        }
        Ok(())
    }

    fn sweeps_beta(&self) -> bool {
        self.parameter == SweptParameter::SinrThresholdDb
    }
}

/// Operators transmitting on `band`: its seller, then its buyers.
pub fn band_operators(config: &ScenarioConfig, band: SubBandId) -> Vec<OperatorId> {
    std::iter::once(band.owner()).chain(config.group(band).map(OperatorId::buyer)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Metric {
    Coverage(OperatorId),
    Rate(OperatorId),
    TotalSumRate,
}

impl Metric {
    fn name(&self) -> String {
        match self {
            Metric::Coverage(op) => format!("{op}.coverage"),
            Metric::Rate(op) => format!("{op}.rate"),
            Metric::TotalSumRate => "total.sum_rate".into(),
        }
    }
}

const MARGIN: &str = "total.sum_rate_margin_sim";

#[derive(Debug, Clone, Copy, Default)]
struct Counters {
    resamples: u64,
    cap_events: u64,
    baseline_resamples: u64,
    baseline_cap_events: u64,
}

impl Counters {
    fn add(&mut self, meta: &RunMeta, baseline: bool) {
        if baseline {
            self.baseline_resamples += meta.resamples;
            self.baseline_cap_events += meta.cap_events;
        } else {
            self.resamples += meta.resamples;
            self.cap_events += meta.cap_events;
        }
    }

    fn merge(mut self, o: Counters) -> Counters {
        self.resamples += o.resamples;
        self.cap_events += o.cap_events;
        self.baseline_resamples += o.baseline_resamples;
        self.baseline_cap_events += o.baseline_cap_events;
        self
    }
}

/// One grid point in progress: named cells plus failure notes.
#[derive(Default)]
struct Cells {
    values: BTreeMap<String, f64>,
    notes: Vec<String>,
    counters: Counters,
}

impl Cells {
    fn set(&mut self, name: String, v: f64) {
        self.values.insert(name, v);
    }

    fn fail(&mut self, engine: &str, err: impl fmt::Display) {
        let note = format!("{engine} failed: {err}");
        if !self.notes.contains(&note) {
            self.notes.push(note);
        }
    }

    /// Looks up `column`; a `rate_bits` column is the matching nats value
    /// divided by ln 2.
    fn get(&self, column: &str) -> f64 {
        let (name, scale) = if column.contains(".rate_bits") {
            (column.replacen(".rate_bits", ".rate", 1), std::f64::consts::LOG2_E)
        } else {
            (column.to_string(), 1.0)
        };
        self.values.get(&name).map_or(f64::NAN, |v| v * scale)
    }

    fn into_row(self, value: f64, columns: &[String]) -> (Row, Counters) {
        let values = columns.iter().map(|c| self.get(c)).collect();
        let status = if self.notes.is_empty() { "ok".to_string() } else { self.notes.join("; ") };
        (Row { value, values, status }, self.counters)
    }
}

fn columns(metrics: &[Metric], engines: Engines) -> Vec<String> {
    let mut cols = Vec::new();
    for m in metrics {
        let n = m.name();
        if engines.analytic {
            cols.push(n.clone());
        }
        if engines.sim {
            cols.push(format!("{n}_sim"));
            cols.push(format!("{n}_sim.ci95"));
        }
        if engines.baseline {
            cols.push(format!("{n}_baseline"));
            cols.push(format!("{n}_baseline.ci95"));
        }
        if let Metric::Rate(op) = m {
            for (on, suffix) in [(engines.analytic, ""), (engines.sim, "_sim"), (engines.baseline, "_baseline")] {
                if on {
                    cols.push(format!("{op}.rate_bits{suffix}"));
                }
            }
        }
    }
    if engines.sim && engines.baseline && metrics.contains(&Metric::TotalSumRate) {
        cols.push(MARGIN.into());
        cols.push(format!("{MARGIN}.ci95"));
    }
    cols
}

/// Runs `spec` on `config`. Grid points that make the scenario invalid are
/// rejected up front as a [`ConfigError`]; numerical failures at a point are
/// recorded in that row's status and the sweep goes on.
pub fn run_sweep(config: &ScenarioConfig, spec: &SweepSpec) -> Result<SweepResult> {
    spec.check()?;
    config.ensure_valid().map_err(ConfigError::from)?;
    if config.sellers.get(spec.band.seller).is_none_or(|s| spec.band.band >= s.num_subbands) {
        return Err(ConfigError(format!("scenario has no sub-band {}", spec.band)).into());
    }
    for &v in &spec.grid {
        spec.parameter
            .apply(config, v)
            .ensure_valid()
            .map_err(|e| ConfigError(format!("{} = {v} gives an invalid scenario: {e}", spec.parameter.name())))?;
    }

    let band_ops = band_operators(config, spec.band);
    let mut metrics: Vec<Metric> = band_ops.iter().map(|&op| Metric::Coverage(op)).collect();
    if !spec.sweeps_beta() {
        metrics.extend(config.operators().map(Metric::Rate));
        metrics.push(Metric::TotalSumRate);
    }
    let columns = columns(&metrics, spec.engines);

    let cells = if spec.sweeps_beta() { beta_sweep(config, spec, &band_ops) } else { point_sweep(config, spec) };
    let mut rows = Vec::with_capacity(cells.len());
    let mut counters = Counters::default();
    for (value, c) in spec.grid.iter().zip(cells) {
        let (row, k) = c.into_row(*value, &columns);
        rows.push(row);
        counters = counters.merge(k);
    }

    let mut meta = vec![
        ("tool".to_string(), format!("spectra-cli {}", env!("CARGO_PKG_VERSION"))),
        ("config_hash".into(), config_hash(config)),
        ("swept_parameter".into(), spec.parameter.name().into()),
        ("parameter_units".into(), spec.parameter.units().into()),
        ("engines".into(), spec.engines.to_string()),
        ("seed".into(), spec.seed.to_string()),
        ("trials".into(), spec.trials.to_string()),
        ("band".into(), spec.band.to_string()),
    ];
    if !spec.sweeps_beta() {
        meta.push(("sinr_threshold_db".into(), format_value(spec.beta_db)));
        meta.push(("rate_units".into(), "nats; rate_bits columns are derived as nats / ln 2".into()));
        meta.push(("sum_rate_weighting".into(), "user intensity per m^2".into()));
    }
    meta.extend([
        ("laplace_sign".into(), format!("{:?}", spec.sign).to_lowercase()),
        ("power_rule".into(), PowerRule::MaxGain.to_string()),
        (
            "baseline".into(),
            format!(
                "{}: P = zeta * d_min^alpha to the nearest seller user, fading ignored",
                PowerRule::NearestDistance
            ),
        ),
        ("probe_protected".into(), "false".into()),
        ("window_radius_m".into(), format_value(config.region_radius)),
        ("resamples".into(), counters.resamples.to_string()),
        ("cap_events".into(), counters.cap_events.to_string()),
        ("baseline_resamples".into(), counters.baseline_resamples.to_string()),
        ("baseline_cap_events".into(), counters.baseline_cap_events.to_string()),
    ]);
    Ok(SweepResult { meta, parameter: spec.parameter.name().into(), columns, rows })
}

fn format_value(x: f64) -> String {
    format!("{x}")
}

fn analytic_engine(sign: LaplaceSign) -> Analytic {
    Analytic { sign, ..Analytic::default() }
}

fn simulators(engines: Engines) -> Vec<(Simulator, &'static str, bool)> {
    let mut v = Vec::new();
    if engines.sim {
        v.push((Simulator::default(), "_sim", false));
    }
    if engines.baseline {
        v.push((Simulator::with_rule(PowerRule::NearestDistance), "_baseline", true));
    }
    v
}

/// `β` sweeps evaluate every threshold on the same trials: the SINR samples
/// do not depend on `β`, so each operator is simulated once on seed
/// `derive_seed(seed, k)` and the coverage columns come out monotone.
fn beta_sweep(config: &ScenarioConfig, spec: &SweepSpec, ops: &[OperatorId]) -> Vec<Cells> {
    let betas: Vec<f64> = spec.grid.iter().map(|&db| db_to_ratio(db)).collect();
    let mut cells: Vec<Cells> = betas.iter().map(|_| Cells::default()).collect();
    if spec.engines.analytic {
        let a = analytic_engine(spec.sign);
        for &op in ops {
            let ctx = config.derive_context(spec.band, op);
            let out: Vec<_> = betas
                .par_iter()
                .map(|&b| {
                    ctx.as_ref().map_err(|e| e.to_string()).and_then(|c| a.coverage(b, c).map_err(|e| e.to_string()))
                })
                .collect();
            for (cell, r) in cells.iter_mut().zip(out) {
                match r {
                    Ok(v) => cell.set(Metric::Coverage(op).name(), v.value),
                    Err(e) => cell.fail("analytic", e),
                }
            }
        }
    }
    for (sim, suffix, baseline) in simulators(spec.engines) {
        for (k, &op) in ops.iter().enumerate() {
            let seed = derive_seed(spec.seed, k as u64);
            match sim.estimate_coverage_grid(config, spec.band, op, &betas, spec.trials, seed) {
                Ok(est) => {
                    cells[0].counters.add(&est[0].meta, baseline);
                    for (cell, e) in cells.iter_mut().zip(est) {
                        let n = format!("{}{suffix}", Metric::Coverage(op).name());
                        cell.set(format!("{n}.ci95"), e.half_width_95);
                        cell.set(n, e.mean);
                    }
                }
                Err(e) => cells.iter_mut().for_each(|c| c.fail(suffix.trim_start_matches('_'), &e)),
            }
        }
    }
    cells
}

/// Every other sweep runs each grid point on its own seed
/// `derive_seed(seed, i)`, so adding points never changes existing rows.
fn point_sweep(base: &ScenarioConfig, spec: &SweepSpec) -> Vec<Cells> {
    spec.grid
        .par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let cfg = spec.parameter.apply(base, value);
            evaluate_point(&cfg, spec, derive_seed(spec.seed, i as u64))
        })
        .collect()
}

fn evaluate_point(cfg: &ScenarioConfig, spec: &SweepSpec, point_seed: u64) -> Cells {
    let mut cells = Cells::default();
    let beta = db_to_ratio(spec.beta_db);
    let band_ops = band_operators(cfg, spec.band);
    let ops: Vec<OperatorId> = cfg.operators().collect();

    if spec.engines.analytic {
        let a = analytic_engine(spec.sign);
        for &op in &band_ops {
            match cfg.derive_context(spec.band, op).and_then(|c| a.coverage(beta, &c)) {
                Ok(v) => cells.set(Metric::Coverage(op).name(), v.value),
                Err(e) => cells.fail("analytic", e),
            }
        }
        let mut total = 0.0;
        let mut total_ok = true;
        for &op in &ops {
            match a.operator_rate(cfg, op) {
                Ok(r) => {
                    cells.set(Metric::Rate(op).name(), r.value);
                    total += cfg.ue_intensity(op) * r.value;
                }
                Err(e) => {
                    total_ok = false;
                    cells.fail("analytic", e);
                }
            }
        }
        if total_ok {
            cells.set(Metric::TotalSumRate.name(), total);
        }
    }

    // Rate runs use `derive_seed(point, i)` for operator `i`; coverage runs
    // continue the sequence past the last operator.
    let rate_seed = |i: usize| derive_seed(point_seed, i as u64);
    let coverage_seed = |k: usize| derive_seed(point_seed, (ops.len() + k) as u64);
    let mut per_rule_samples: Vec<Option<Vec<Vec<f64>>>> = Vec::new();
    for (sim, suffix, baseline) in simulators(spec.engines) {
        let engine = suffix.trim_start_matches('_');
        for (k, &op) in band_ops.iter().enumerate() {
            match sim.estimate_coverage(cfg, spec.band, op, beta, spec.trials, coverage_seed(k)) {
                Ok(e) => {
                    cells.counters.add(&e.meta, baseline);
                    let n = format!("{}{suffix}", Metric::Coverage(op).name());
                    cells.set(format!("{n}.ci95"), e.half_width_95);
                    cells.set(n, e.mean);
                }
                Err(e) => cells.fail(engine, e),
            }
        }
        let mut samples = Vec::with_capacity(ops.len());
        let (mut total, mut var) = (0.0, 0.0);
        for (i, &op) in ops.iter().enumerate() {
            match sim.rate_samples(cfg, op, spec.trials, rate_seed(i)) {
                Ok((v, meta)) => {
                    cells.counters.add(&meta, baseline);
                    let m: Moments = v.iter().copied().collect();
                    let n = format!("{}{suffix}", Metric::Rate(op).name());
                    cells.set(format!("{n}.ci95"), m.half_width_95());
                    cells.set(n, m.mean());
                    let mu = cfg.ue_intensity(op);
                    total += mu * m.mean();
                    var += (mu * m.half_width_95()).powi(2);
                    samples.push(v);
                }
                Err(e) => cells.fail(engine, e),
            }
        }
        if samples.len() == ops.len() {
            let n = format!("{}{suffix}", Metric::TotalSumRate.name());
            cells.set(format!("{n}.ci95"), var.sqrt());
            cells.set(n, total);
            per_rule_samples.push(Some(samples));
        } else {
            per_rule_samples.push(None);
        }
    }

    // Both rules ran on the same seeds, so trial t of each operator saw the
    // same geometry and fading; the paired difference cancels most noise.
    if let [Some(ours), Some(theirs)] = &per_rule_samples[..] {
        let (mut diff, mut var) = (0.0, 0.0);
        for (i, &op) in ops.iter().enumerate() {
            let d: Moments = ours[i].iter().zip(&theirs[i]).map(|(a, b)| a - b).collect();
            let mu = cfg.ue_intensity(op);
            diff += mu * d.mean();
            var += (mu * d.half_width_95()).powi(2);
        }
        cells.set(MARGIN.into(), diff);
        cells.set(format!("{MARGIN}.ci95"), var.sqrt());
    }
    cells
}

/// Human-readable notes on a finished sweep: the sum-rate maximizer for
/// every total column, and how often the baseline beat the max-gain rule.
pub fn summary(result: &SweepResult) -> Vec<String> {
    let mut out = Vec::new();
    for col in ["total.sum_rate", "total.sum_rate_sim", "total.sum_rate_baseline"] {
        let Some(values) = result.column(col) else { continue };
        let best = values.iter().enumerate().filter(|(_, v)| v.is_finite()).max_by(|a, b| a.1.total_cmp(b.1));
        if let Some((i, v)) = best {
            out.push(format!("argmax {col}: {} = {} ({v:.6e})", result.parameter, result.rows[i].value));
        }
    }
    if let Some(margin) = result.column(MARGIN) {
        let behind = margin.iter().filter(|m| **m < 0.0).count();
        out.push(format!("max-gain rule behind the baseline at {behind} of {} points", margin.len()));
    }
    let flagged = result.rows.iter().filter(|r| r.status != "ok").count();
    if flagged > 0 {
        out.push(format!("{flagged} row(s) flagged; see the status column"));
    }
    out
}
