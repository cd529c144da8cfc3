//! Closed-form and empirical laws of the largest interference gain `H` and
//! the buyer power `P = ζ / H`, tabulated on log-spaced grids.

use anyhow::{bail, Result};
use spectra::analytic::{buyer_power_cdf, buyer_power_pdf, max_gain_cdf, max_gain_pdf};
use spectra::config::config_hash;
use spectra::sim::sample_max_gains;
use spectra::special::gamma;
use spectra::stats::{empirical_cdf, ks_statistic};
use spectra::{ScenarioConfig, SubBandId};

use crate::table::{Row, SweepResult};
use crate::ConfigError;

/// Tail probability left outside the tabulated range at each end.
const TAIL: f64 = 1e-12;

pub fn show_distributions(
    config: &ScenarioConfig,
    band: SubBandId,
    samples: u64,
    seed: u64,
    points: usize,
) -> Result<SweepResult> {
    if points < 2 {
        bail!("need at least two grid points");
    }
    if samples == 0 {
        bail!("samples must be positive");
    }
    let ctx = config.derive_context(band, band.owner()).map_err(ConfigError::from)?;
    let (mu, alpha, zeta) = (ctx.seller_ue_intensity, ctx.alpha, ctx.threshold);
    if !(mu > 0.0) {
        return Err(ConfigError(format!("seller {} has no users, so H and P are degenerate", band.seller)).into());
    }

    // F_H(h) = exp(-c h^(-δ)), so the q-quantile is (c / -ln q)^(1/δ).
    let delta = 2.0 / alpha;
    let c = std::f64::consts::PI * mu * gamma(1.0 + delta);
    let quantile = |q: f64| (c / -q.ln()).powf(1.0 / delta);
    let (lo, hi) = (quantile(TAIL).ln(), quantile(1.0 - TAIL).ln());
    let h: Vec<f64> = (0..points).map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp()).collect();
    let p: Vec<f64> = h.iter().rev().map(|x| zeta / x).collect();

    let (mut hs, empty) = sample_max_gains(mu, alpha, config.region_radius, samples, seed)?;
    let mut ps: Vec<f64> = hs.iter().map(|x| zeta / x).collect();
    let ks_h = ks_statistic(&mut hs, |z| max_gain_cdf(z, mu, alpha).unwrap_or(f64::NAN));
    let ks_p = ks_statistic(&mut ps, |z| buyer_power_cdf(z, mu, alpha, zeta).unwrap_or(f64::NAN));

    let mut rows = Vec::with_capacity(points);
    for (&hv, &pv) in h.iter().zip(&p) {
        rows.push(Row {
            value: hv,
            values: vec![
                max_gain_cdf(hv, mu, alpha)?,
                max_gain_pdf(hv, mu, alpha)?,
                empirical_cdf(&hs, hv),
                pv,
                buyer_power_cdf(pv, mu, alpha, zeta)?,
                buyer_power_pdf(pv, mu, alpha, zeta)?,
                empirical_cdf(&ps, pv),
            ],
            status: "ok".into(),
        });
    }
    let meta = vec![
        ("tool".to_string(), format!("spectra-cli {}", env!("CARGO_PKG_VERSION"))),
        ("config_hash".into(), config_hash(config)),
        ("band".into(), band.to_string()),
        ("seed".into(), seed.to_string()),
        ("samples".into(), samples.to_string()),
        ("window_radius_m".into(), format!("{}", config.region_radius)),
        ("empty_draws".into(), empty.to_string()),
        ("ks_h".into(), format!("{ks_h:.6}")),
        ("ks_p".into(), format!("{ks_p:.6}")),
    ];
    let columns = ["cdf_h", "pdf_h", "cdf_h_empirical", "p_mw", "cdf_p", "pdf_p", "cdf_p_empirical"];
    Ok(SweepResult { meta, parameter: "h".into(), columns: columns.map(String::from).to_vec(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_consistent() {
        let r = show_distributions(&spectra::config::table_one(), SubBandId::new(0, 0), 20_000, 4, 120).unwrap();
        for col in ["cdf_h", "cdf_p", "cdf_h_empirical", "cdf_p_empirical", "p_mw"] {
            let v = r.column(col).unwrap();
            assert!(v.windows(2).all(|w| w[1] >= w[0]), "{col} not monotone");
        }
        assert!(1.0 - r.column("cdf_h").unwrap().last().unwrap() < 1e-9);
        assert!(1.0 - r.column("cdf_p").unwrap().last().unwrap() < 1e-9);
        let ks: f64 = r.meta("ks_h").unwrap().parse().unwrap();
        assert!(ks < 0.02);
    }
}
