//! Scenario files.
//!
//! A scenario is a TOML document whose keys mirror [`ScenarioConfig`]. Units
//! are carried by key suffixes: `_dbm` for powers, `_m` for lengths, and
//! intensities are given either absolutely (`_per_m2`) or as an expected
//! count over a disk (`_per_disk = { count, radius_m }`).
//!
//! ```toml
//! path_loss_exponent = 5.0
//! noise_power_dbm = -120.0
//! region_radius_m = 1000.0
//!
//! [[sellers]]
//! bs_intensity_per_disk = { count = 8, radius_m = 500 }
//! ue_intensity_per_disk = { count = 50, radius_m = 500 }
//! num_subbands = 1
//! tx_power_dbm = 10.0
//! interference_threshold_dbm = -100.0
//!
//! [[buyers]]
//! bs_intensity_per_disk = { count = 8, radius_m = 500 }
//! ue_intensity_per_m2 = 6.366e-5
//!
//! [[sharing_groups]]
//! seller = 0
//! band = 0
//! buyers = [0]
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{BuyerConfig, ScenarioConfig, SellerConfig, SubBandId, DEFAULT_BUYER_POWER_CAP_DBM};
use crate::units::intensity_per_disk;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    path_loss_exponent: f64,
    noise_power_dbm: f64,
    region_radius_m: f64,
    buyer_power_cap_dbm: Option<f64>,
    sellers: Vec<SellerEntry>,
    #[serde(default)]
    buyers: Vec<BuyerEntry>,
    #[serde(default)]
    sharing_groups: Vec<GroupEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiskCount {
    count: f64,
    radius_m: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SellerEntry {
    bs_intensity_per_m2: Option<f64>,
    bs_intensity_per_disk: Option<DiskCount>,
    ue_intensity_per_m2: Option<f64>,
    ue_intensity_per_disk: Option<DiskCount>,
    num_subbands: usize,
    tx_power_dbm: f64,
    interference_threshold_dbm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuyerEntry {
    bs_intensity_per_m2: Option<f64>,
    bs_intensity_per_disk: Option<DiskCount>,
    ue_intensity_per_m2: Option<f64>,
    ue_intensity_per_disk: Option<DiskCount>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupEntry {
    seller: usize,
    band: usize,
    #[serde(default)]
    buyers: Vec<usize>,
}

fn intensity(who: &str, per_m2: Option<f64>, per_disk: Option<DiskCount>) -> Result<f64> {
    match (per_m2, per_disk) {
        (Some(v), None) => Ok(v),
        (None, Some(d)) => {
            if !(d.radius_m > 0.0) {
                return Err(Error::Parse(format!("{who}: disk radius must be positive")));
            }
            Ok(intensity_per_disk(d.count, d.radius_m))
        }
        (Some(_), Some(_)) => Err(Error::Parse(format!("{who}: give either _per_m2 or _per_disk, not both"))),
        (None, None) => Err(Error::Parse(format!("{who}: missing (_per_m2 or _per_disk)"))),
    }
}

/// Parses a scenario document. The result is not validated; call
/// [`ScenarioConfig::validate`].
pub fn from_toml_str(text: &str) -> Result<ScenarioConfig> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;

    let mut sellers = Vec::with_capacity(file.sellers.len());
    for (i, s) in file.sellers.into_iter().enumerate() {
        sellers.push(SellerConfig {
            bs_intensity: intensity(
                &format!("sellers[{i}].bs_intensity"),
                s.bs_intensity_per_m2,
                s.bs_intensity_per_disk,
            )?,
            ue_intensity: intensity(
                &format!("sellers[{i}].ue_intensity"),
                s.ue_intensity_per_m2,
                s.ue_intensity_per_disk,
            )?,
            num_subbands: s.num_subbands,
            tx_power_dbm: s.tx_power_dbm,
            interference_threshold_dbm: s.interference_threshold_dbm,
        });
    }
    let mut buyers = Vec::with_capacity(file.buyers.len());
    for (i, b) in file.buyers.into_iter().enumerate() {
        buyers.push(BuyerConfig {
            bs_intensity: intensity(
                &format!("buyers[{i}].bs_intensity"),
                b.bs_intensity_per_m2,
                b.bs_intensity_per_disk,
            )?,
            ue_intensity: intensity(
                &format!("buyers[{i}].ue_intensity"),
                b.ue_intensity_per_m2,
                b.ue_intensity_per_disk,
            )?,
        });
    }
    let mut sharing_groups = BTreeMap::new();
    for g in file.sharing_groups {
        let band = SubBandId::new(g.seller, g.band);
        let members: BTreeSet<usize> = g.buyers.into_iter().collect();
        if sharing_groups.insert(band, members).is_some() {
            return Err(Error::Parse(format!("sub-band {band} listed twice in sharing_groups")));
        }
    }

    Ok(ScenarioConfig {
        sellers,
        buyers,
        sharing_groups,
        path_loss_exponent: file.path_loss_exponent,
        noise_power_dbm: file.noise_power_dbm,
        region_radius: file.region_radius_m,
        buyer_power_cap_dbm: file.buyer_power_cap_dbm.unwrap_or(DEFAULT_BUYER_POWER_CAP_DBM),
    })
}

pub fn load(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    from_toml_str(&text)
}

/// Short stable fingerprint of every field of the scenario.
///
/// `f64` debug formatting is shortest-round-trip, so two configs hash equal
/// exactly when all their fields are equal.
pub fn config_hash(config: &ScenarioConfig) -> String {
    let digest = Sha256::digest(format!("{config:?}").as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// The single-seller, single-buyer reference deployment (low buyer density),
/// simulated over a 1000 m window.
///
/// Intensities are 8 seller BSs, 8 buyer BSs and 50 users per operator per
/// 500 m disk; `P^S` = 10 dBm, `ζ` = -100 dBm, `σ²` = -120 dBm, `α` = 5.
pub fn table_one() -> ScenarioConfig {
    let per_disk = |n| intensity_per_disk(n, 500.0);
    ScenarioConfig {
        sellers: vec![SellerConfig {
            bs_intensity: per_disk(8.0),
            ue_intensity: per_disk(50.0),
            num_subbands: 1,
            tx_power_dbm: 10.0,
            interference_threshold_dbm: -100.0,
        }],
        buyers: vec![BuyerConfig { bs_intensity: per_disk(8.0), ue_intensity: per_disk(50.0) }],
        sharing_groups: [(SubBandId::new(0, 0), [0].into_iter().collect())].into_iter().collect(),
        path_loss_exponent: 5.0,
        noise_power_dbm: -120.0,
        region_radius: 1000.0,
        buyer_power_cap_dbm: DEFAULT_BUYER_POWER_CAP_DBM,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE_ONE: &str = r#"
        path_loss_exponent = 5.0
        noise_power_dbm = -120.0
        region_radius_m = 1000.0

        [[sellers]]
        bs_intensity_per_disk = { count = 8, radius_m = 500 }
        ue_intensity_per_disk = { count = 50, radius_m = 500 }
        num_subbands = 1
        tx_power_dbm = 10.0
        interference_threshold_dbm = -100.0

        [[buyers]]
        bs_intensity_per_disk = { count = 8, radius_m = 500 }
        ue_intensity_per_disk = { count = 50, radius_m = 500 }

        [[sharing_groups]]
        seller = 0
        band = 0
        buyers = [0]
    "#;

    #[test]
    fn parses_table_one() {
        let c = from_toml_str(TABLE_ONE).unwrap();
        assert_eq!(c, table_one());
        assert!(c.validate().is_empty());
    }

    #[test]
    fn shipped_scenario_matches() {
        let c = load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/table1.toml")).unwrap();
        assert_eq!(c, table_one());
    }

    #[test]
    fn intensity_forms_are_exclusive() {
        let both = TABLE_ONE.replacen("[[buyers]]\n", "[[buyers]]\n        bs_intensity_per_m2 = 1e-5\n", 1);
        assert!(matches!(from_toml_str(&both), Err(Error::Parse(_))));
        let none = TABLE_ONE
            .replace("[[buyers]]\n        bs_intensity_per_disk = { count = 8, radius_m = 500 }", "[[buyers]]");
        assert!(matches!(from_toml_str(&none), Err(Error::Parse(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{TABLE_ONE}\nsurprise = 1\n");
        assert!(from_toml_str(&text).is_err());
    }

    #[test]
    fn duplicate_group_is_rejected() {
        let text = format!("{TABLE_ONE}\n[[sharing_groups]]\nseller = 0\nband = 0\n");
        assert!(matches!(from_toml_str(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn hash_tracks_every_field() {
        let base = table_one();
        let h = config_hash(&base);
        assert_eq!(h, config_hash(&table_one()));
        let mut variants = Vec::new();
        let mut c = base.clone();
        c.noise_power_dbm = -119.0;
        variants.push(c);
        let mut c = base.clone();
        c.region_radius = 1000.0000000001;
        variants.push(c);
        let mut c = base.clone();
        c.buyers[0].ue_intensity *= 1.0 + f64::EPSILON;
        variants.push(c);
        let mut c = base.clone();
        c.sharing_groups.insert(SubBandId::new(0, 0), BTreeSet::new());
        variants.push(c);
        variants.push(base.with_threshold_dbm(-90.0));
        for v in &variants {
            assert_ne!(config_hash(v), h);
        }
    }
}
