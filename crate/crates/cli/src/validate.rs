//! Cross-validation of the closed-form coverage against the simulator.

use anyhow::Result;
use spectra::analytic::{Analytic, LaplaceSign};
use spectra::sim::{derive_seed, Simulator};
use spectra::units::db_to_ratio;
use spectra::{OperatorId, ScenarioConfig, SubBandId};

use crate::grid::check_grid;
use crate::sweep::band_operators;
use crate::ConfigError;

#[derive(Debug, Clone)]
pub struct ValidateSpec {
    pub grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub tolerance: f64,
    pub band: SubBandId,
    pub sign: LaplaceSign,
}

#[derive(Debug, Clone)]
pub struct PointCheck {
    pub operator: OperatorId,
    pub beta_db: f64,
    pub analytic: std::result::Result<f64, String>,
    pub sim: f64,
    pub ci95: f64,
}

impl PointCheck {
    /// `|analytic - sim|`, infinite when the closed form failed.
    pub fn gap(&self) -> f64 {
        self.analytic.as_ref().map_or(f64::INFINITY, |a| (a - self.sim).abs())
    }

    pub fn allowed(&self, tolerance: f64) -> f64 {
        tolerance.max(self.ci95)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.gap() <= self.allowed(tolerance)
    }

    pub fn describe(&self, tolerance: f64) -> String {
        let analytic = match &self.analytic {
            Ok(a) => format!("{a:.6}"),
            Err(e) => format!("failed ({e})"),
        };
        format!(
            "{} at β = {} dB: analytic {analytic}, sim {:.6} ± {:.6}, |Δ| {:.6} vs allowed {:.6}",
            self.operator,
            self.beta_db,
            self.sim,
            self.ci95,
            self.gap(),
            self.allowed(tolerance)
        )
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub tolerance: f64,
    pub points: Vec<PointCheck>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.passes(self.tolerance))
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| !p.passes(self.tolerance)).count()
    }

    /// The point with the largest gap relative to what it is allowed.
    pub fn worst(&self) -> Option<&PointCheck> {
        self.points
            .iter()
            .max_by(|a, b| (a.gap() / a.allowed(self.tolerance)).total_cmp(&(b.gap() / b.allowed(self.tolerance))))
    }
}

/// Coverage of every operator on `spec.band` at every grid threshold, by
/// both engines. A point passes when `|analytic - sim| ≤ max(tolerance,
/// ci95)`. Operator `k` is simulated on seed `derive_seed(seed, k)`, as in a
/// threshold sweep.
pub fn validate_engines(config: &ScenarioConfig, spec: &ValidateSpec) -> Result<Report> {
    check_grid(&spec.grid_db).map_err(|e| ConfigError(e.to_string()))?;
    if spec.trials == 0 {
        return Err(ConfigError("trials must be positive".into()).into());
    }
    if !(spec.tolerance >= 0.0) {
        return Err(ConfigError("tolerance must be non-negative".into()).into());
    }
    config.ensure_valid().map_err(ConfigError::from)?;
    if config.sellers.get(spec.band.seller).is_none_or(|s| spec.band.band >= s.num_subbands) {
        return Err(ConfigError(format!("scenario has no sub-band {}", spec.band)).into());
    }
    let analytic = Analytic { sign: spec.sign, ..Analytic::default() };
    let sim = Simulator::default();
    let betas: Vec<f64> = spec.grid_db.iter().map(|&db| db_to_ratio(db)).collect();
    let mut points = Vec::new();
    for (k, op) in band_operators(config, spec.band).into_iter().enumerate() {
        let ctx = config.derive_context(spec.band, op)?;
        let est =
            sim.estimate_coverage_grid(config, spec.band, op, &betas, spec.trials, derive_seed(spec.seed, k as u64))?;
        for ((&db, &beta), e) in spec.grid_db.iter().zip(&betas).zip(est) {
            points.push(PointCheck {
                operator: op,
                beta_db: db,
                analytic: analytic.coverage(beta, &ctx).map(|c| c.value).map_err(|e| e.to_string()),
                sim: e.mean,
                ci95: e.half_width_95,
            });
        }
    }
    Ok(Report { tolerance: spec.tolerance, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(sign: LaplaceSign) -> ValidateSpec {
        ValidateSpec {
            grid_db: vec![-5.0, 5.0, 15.0],
            trials: 3000,
            seed: 1,
            tolerance: 0.03,
            band: SubBandId::new(0, 0),
            sign,
        }
    }

    #[test]
    fn engines_agree_on_the_reference_scenario() {
        let r = validate_engines(&spectra::config::table_one(), &spec(LaplaceSign::Negative)).unwrap();
        assert_eq!(r.points.len(), 6);
        assert!(r.passed(), "{}", r.worst().unwrap().describe(r.tolerance));
    }

    #[test]
    fn flipped_sign_is_caught() {
        let r = validate_engines(&spectra::config::table_one(), &spec(LaplaceSign::AsPrinted)).unwrap();
        assert!(!r.passed());
        assert!(r.worst().unwrap().gap() > 0.03);
    }
}
