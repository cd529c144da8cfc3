//! Coverage and rate analysis for downlink spectrum sharing between seller and
//! buyer mobile operators.
//!
//! Every operator deploys base stations and users as independent homogeneous
//! Poisson point processes. A seller owns licensed sub-bands; buyers lease them
//! non-orthogonally, and every buyer base station scales its power so that the
//! interference it causes at any seller user stays below the seller's threshold
//! `ζ_s`.
//!
//! Two engines evaluate the same metrics:
//!
//! * [`analytic`] evaluates the closed-form coverage and rate integrals by
//!   adaptive quadrature ([`quadrature`]).
//! * [`sim`] samples network realizations and estimates the same quantities by
//!   Monte Carlo, with confidence intervals and seed-reproducible parallel
//!   trials.
//!
//! Scenarios are described by a [`ScenarioConfig`], usually loaded from a TOML
//! file via [`config`].
//!
//! ```
//! use spectra::{analytic::Analytic, OperatorId, SubBandId};
//!
//! let scenario = spectra::config::table_one();
//! let band = SubBandId::new(0, 0);
//! let ctx = scenario.derive_context(band, OperatorId::seller(0)).unwrap();
//! let coverage = Analytic::default().coverage_seller(1.0, &ctx).unwrap();
//! assert!(coverage.value > 0.5 && coverage.value < 0.6);
//! ```

pub mod analytic;
pub mod config;
mod error;
pub mod model;
pub mod quadrature;
pub mod sim;
pub mod special;
pub mod stats;
pub mod units;

pub use crate::error::{Error, Result};
pub use crate::model::{
    BuyerConfig, OperatorId, OperatorKind, ScenarioConfig, SellerConfig, SubBandContext, SubBandId, Violation,
    ViolationCode,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/scenarios.md")]
    pub struct Scenarios;
    #[doc = include_str!("../../../book/src/power-control.md")]
    pub struct PowerControl;
    #[doc = include_str!("../../../book/src/coverage.md")]
    pub struct Coverage;
    #[doc = include_str!("../../../book/src/rates.md")]
    pub struct Rates;
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub struct Simulation;
    #[doc = include_str!("../../../book/src/quadrature.md")]
    pub struct Quadrature;
}
