//! Scenario description, validation and per-sub-band analytic contexts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::units::dbm_to_linear;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OperatorKind {
    Seller,
    Buyer,
}

/// A mobile network operator, identified by kind and position in the
/// scenario's seller or buyer list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperatorId {
    pub kind: OperatorKind,
    pub index: usize,
}

impl OperatorId {
    pub fn seller(index: usize) -> Self {
        OperatorId { kind: OperatorKind::Seller, index }
    }

    pub fn buyer(index: usize) -> Self {
        OperatorId { kind: OperatorKind::Buyer, index }
    }

    pub fn is_seller(&self) -> bool {
        self.kind == OperatorKind::Seller
    }
}

impl fmt::Display for OperatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OperatorKind::Seller => write!(f, "seller{}", self.index),
            OperatorKind::Buyer => write!(f, "buyer{}", self.index),
        }
    }
}

/// Licensed sub-band `band` of seller `seller`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubBandId {
    pub seller: usize,
    pub band: usize,
}

impl SubBandId {
    pub fn new(seller: usize, band: usize) -> Self {
        SubBandId { seller, band }
    }

    pub fn owner(&self) -> OperatorId {
        OperatorId::seller(self.seller)
    }
}

impl fmt::Display for SubBandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}b{}", self.seller, self.band)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SellerConfig {
    /// Base stations per square meter.
    pub bs_intensity: f64,
    /// Users per square meter.
    pub ue_intensity: f64,
    pub num_subbands: usize,
    pub tx_power_dbm: f64,
    /// Largest interference a single buyer base station may cause at any of
    /// this seller's users.
    pub interference_threshold_dbm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuyerConfig {
    pub bs_intensity: f64,
    pub ue_intensity: f64,
}

/// Default buyer power when a realization contains no seller user to protect.
pub const DEFAULT_BUYER_POWER_CAP_DBM: f64 = 40.0;

/// Full multi-operator scenario. Intensities are absolute (per square meter);
/// powers stay in dBm until a [`SubBandContext`] is derived.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub sellers: Vec<SellerConfig>,
    pub buyers: Vec<BuyerConfig>,
    /// Buyers leasing each sub-band. The owning seller is implicit.
    pub sharing_groups: BTreeMap<SubBandId, BTreeSet<usize>>,
    pub path_loss_exponent: f64,
    pub noise_power_dbm: f64,
    /// Radius of the simulation window in meters. Ignored by the analytic engine.
    pub region_radius: f64,
    /// Power used by the simulator when a buyer base station has no seller
    /// user to protect.
    pub buyer_power_cap_dbm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationCode {
    PathLossExponent,
    NonFinite,
    NegativeIntensity,
    RegionRadius,
    NoSubbands,
    UnknownSeller,
    UnknownBand,
    UnknownBuyer,
    MissingSharingGroup,
}

impl ViolationCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationCode::PathLossExponent => "path-loss-exponent",
            ViolationCode::NonFinite => "non-finite",
            ViolationCode::NegativeIntensity => "negative-intensity",
            ViolationCode::RegionRadius => "region-radius",
            ViolationCode::NoSubbands => "no-subbands",
            ViolationCode::UnknownSeller => "unknown-seller",
            ViolationCode::UnknownBand => "unknown-band",
            ViolationCode::UnknownBuyer => "unknown-buyer",
            ViolationCode::MissingSharingGroup => "missing-sharing-group",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

impl Violation {
    fn new(code: ViolationCode, message: impl Into<String>) -> Self {
        Violation { code, message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code.as_str(), self.message)
    }
}

/// Everything the closed-form expressions need for one operator on one
/// sub-band, in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct SubBandContext {
    pub band: SubBandId,
    pub evaluated: OperatorId,
    pub alpha: f64,
    /// Noise power, mW.
    pub noise: f64,
    pub seller_bs_intensity: f64,
    pub seller_ue_intensity: f64,
    /// Seller base-station power, mW.
    pub seller_power: f64,
    /// Interference threshold `ζ_s`, mW.
    pub threshold: f64,
    /// Base-station intensity of the evaluated buyer; zero when a seller is
    /// evaluated.
    pub buyer_bs_intensity: f64,
    /// Summed intensity of the other buyers on this band, excluding the
    /// evaluated one.
    pub cross_buyer_intensity: f64,
    /// Summed intensity of every buyer on this band.
    pub total_buyer_intensity: f64,
}

impl ScenarioConfig {
    /// Every invariant violation, in a stable order. Empty when the scenario is
    /// usable.
    pub fn validate(&self) -> Vec<Violation> {
        use ViolationCode::*;
        let mut out = Vec::new();

        let alpha = self.path_loss_exponent;
        if !alpha.is_finite() {
            out.push(Violation::new(NonFinite, "path-loss exponent is not finite"));
        } else if alpha <= 2.0 {
            out.push(Violation::new(PathLossExponent, format!("path-loss exponent must exceed 2 (got {alpha})")));
        }
        if !self.noise_power_dbm.is_finite() {
            out.push(Violation::new(NonFinite, "noise power is not finite"));
        }
        if !self.buyer_power_cap_dbm.is_finite() {
            out.push(Violation::new(NonFinite, "buyer power cap is not finite"));
        }
        if !(self.region_radius.is_finite() && self.region_radius > 0.0) {
            out.push(Violation::new(
                RegionRadius,
                format!("region radius must be positive (got {})", self.region_radius),
            ));
        }

        let mut intensity = |who: String, what: &str, v: f64| {
            if !v.is_finite() {
                out.push(Violation::new(NonFinite, format!("{who} {what} is not finite")));
            } else if v < 0.0 {
                out.push(Violation::new(NegativeIntensity, format!("{who} {what} must be non-negative (got {v})")));
            }
        };
        for (i, s) in self.sellers.iter().enumerate() {
            intensity(format!("seller{i}"), "bs intensity", s.bs_intensity);
            intensity(format!("seller{i}"), "ue intensity", s.ue_intensity);
        }
        for (i, b) in self.buyers.iter().enumerate() {
            intensity(format!("buyer{i}"), "bs intensity", b.bs_intensity);
            intensity(format!("buyer{i}"), "ue intensity", b.ue_intensity);
        }

        for (i, s) in self.sellers.iter().enumerate() {
            if s.num_subbands == 0 {
                out.push(Violation::new(NoSubbands, format!("seller{i} has no sub-bands")));
            }
            if !s.tx_power_dbm.is_finite() {
                out.push(Violation::new(NonFinite, format!("seller{i} tx power is not finite")));
            }
            if !s.interference_threshold_dbm.is_finite() {
                out.push(Violation::new(NonFinite, format!("seller{i} interference threshold is not finite")));
            }
        }

        for (band, buyers) in &self.sharing_groups {
            match self.sellers.get(band.seller) {
                None => out.push(Violation::new(
                    UnknownSeller,
                    format!("sharing group {band} names unknown seller {}", band.seller),
                )),
                Some(s) if band.band >= s.num_subbands => out.push(Violation::new(
                    UnknownBand,
                    format!("sharing group {band}: seller{} has {} sub-band(s)", band.seller, s.num_subbands),
                )),
                Some(_) => {}
            }
            for &b in buyers {
                if b >= self.buyers.len() {
                    out.push(Violation::new(UnknownBuyer, format!("sharing group {band} names unknown buyer {b}")));
                }
            }
        }
        for (i, s) in self.sellers.iter().enumerate() {
            for l in 0..s.num_subbands {
                let band = SubBandId::new(i, l);
                if !self.sharing_groups.contains_key(&band) {
                    out.push(Violation::new(
                        MissingSharingGroup,
                        format!("sub-band {band} has no sharing group entry"),
                    ));
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(violations))
        }
    }

    /// All sub-bands in ascending (seller, band) order.
    pub fn bands(&self) -> impl Iterator<Item = SubBandId> + '_ {
        self.sellers.iter().enumerate().flat_map(|(s, cfg)| (0..cfg.num_subbands).map(move |l| SubBandId::new(s, l)))
    }

    /// Buyers leasing `band`, ascending. Empty for unknown bands.
    pub fn group(&self, band: SubBandId) -> impl Iterator<Item = usize> + '_ {
        self.sharing_groups.get(&band).into_iter().flatten().copied()
    }

    /// Sub-bands on which `operator` transmits: all own bands for a seller,
    /// leased bands for a buyer.
    pub fn bands_of(&self, operator: OperatorId) -> Vec<SubBandId> {
        match operator.kind {
            OperatorKind::Seller => self.bands().filter(|b| b.seller == operator.index).collect(),
            OperatorKind::Buyer => {
                self.sharing_groups.iter().filter(|(_, g)| g.contains(&operator.index)).map(|(b, _)| *b).collect()
            }
        }
    }

    pub fn operators(&self) -> impl Iterator<Item = OperatorId> + '_ {
        (0..self.sellers.len()).map(OperatorId::seller).chain((0..self.buyers.len()).map(OperatorId::buyer))
    }

    pub fn bs_intensity(&self, op: OperatorId) -> f64 {
        match op.kind {
            OperatorKind::Seller => self.sellers[op.index].bs_intensity,
            OperatorKind::Buyer => self.buyers[op.index].bs_intensity,
        }
    }

    pub fn ue_intensity(&self, op: OperatorId) -> f64 {
        match op.kind {
            OperatorKind::Seller => self.sellers[op.index].ue_intensity,
            OperatorKind::Buyer => self.buyers[op.index].ue_intensity,
        }
    }

    /// Builds the analytic inputs for `evaluated` on `band`.
    ///
    /// Intensity aggregates are summed in ascending buyer index, always in
    /// the same order.
    pub fn derive_context(&self, band: SubBandId, evaluated: OperatorId) -> Result<SubBandContext> {
        self.ensure_valid()?;
        let seller =
            self.sellers.get(band.seller).filter(|s| band.band < s.num_subbands).ok_or(Error::UnknownBand(band))?;
        let group = &self.sharing_groups[&band];

        let buyer_bs_intensity = match evaluated.kind {
            OperatorKind::Seller if evaluated.index == band.seller => 0.0,
            OperatorKind::Buyer if group.contains(&evaluated.index) => self.buyers[evaluated.index].bs_intensity,
            _ => return Err(Error::NotInSharingGroup { operator: evaluated, band }),
        };

        let evaluated_buyer = (evaluated.kind == OperatorKind::Buyer).then_some(evaluated.index);
        let mut total = 0.0;
        let mut cross = 0.0;
        for &b in group {
            let lam = self.buyers[b].bs_intensity;
            total += lam;
            if evaluated_buyer.is_some_and(|e| e != b) {
                cross += lam;
            }
        }

        Ok(SubBandContext {
            band,
            evaluated,
            alpha: self.path_loss_exponent,
            noise: dbm_to_linear(self.noise_power_dbm),
            seller_bs_intensity: seller.bs_intensity,
            seller_ue_intensity: seller.ue_intensity,
            seller_power: dbm_to_linear(seller.tx_power_dbm),
            threshold: dbm_to_linear(seller.interference_threshold_dbm),
            buyer_bs_intensity,
            cross_buyer_intensity: cross,
            total_buyer_intensity: total,
        })
    }

    /// Contexts for every band the operator transmits on.
    pub fn contexts_of(&self, operator: OperatorId) -> Result<Vec<SubBandContext>> {
        self.bands_of(operator).into_iter().map(|b| self.derive_context(b, operator)).collect()
    }

    /// A copy with every seller's interference threshold set to `dbm`.
    pub fn with_threshold_dbm(&self, dbm: f64) -> Self {
        let mut c = self.clone();
        for s in &mut c.sellers {
            s.interference_threshold_dbm = dbm;
        }
        c
    }
}
