//! Closed-form coverage probability and average rate for typical seller and
//! buyer users, evaluated by adaptive quadrature.
//!
//! A typical user at the origin is served by the base station of its own
//! operator with the largest average received power. Under independent
//! power marks the serving "effective distance" `z = x² / P^(2/α)` is
//! exponential with rate `w = π λ E[P^(2/α)]`, and the coverage probability
//! at threshold `β` is
//!
//! ```text
//! C(β) = ∫₀^∞ w · exp(-β σ² z^(α/2)) · exp(-w z) · L_I(β z^(α/2)) dz
//! ```
//!
//! where the interference Laplace transform factorises over the operators on
//! the sub-band. Each factor has the form `exp(-π λ E[P^(2/α)] κ^(2/α) ρ)`,
//! with `ρ(α, β)` for the serving operator (interferers lie beyond the
//! serving station) and `ρ(α, ∞)` for every other operator.
//!
//! The exponents are negative. [`LaplaceSign::AsPrinted`] flips them; it
//! exists only as a negative control for engine validation, and with it the
//! coverage integral leaves `[0, 1]` or diverges.

pub mod distributions;

use std::cell::RefCell;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{OperatorId, OperatorKind, ScenarioConfig, SubBandContext};
use crate::quadrature::{integrate, integrate_to_infinity, QuadratureSpec, Tail};

pub use distributions::{
    buyer_power_cdf, buyer_power_moment, buyer_power_moment_quadrature, buyer_power_pdf, max_gain_cdf, max_gain_pdf,
};

/// How `E[P^(2/α)]` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentMethod {
    #[default]
    ClosedForm,
    Quadrature,
}

/// Sign of the exponents in the interference Laplace transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaplaceSign {
    #[default]
    Negative,
    /// Positive exponents, which do not define a Laplace transform. Only for
    /// negative-control tests.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageResult {
    pub value: f64,
    pub estimated_quadrature_error: f64,
    pub subdivisions: usize,
}

/// Average rate in nats per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub value: f64,
    pub estimated_quadrature_error: f64,
    pub subdivisions: usize,
}

impl RateResult {
    pub fn bits(&self) -> f64 {
        self.value / std::f64::consts::LN_2
    }
}

/// `ρ(α, β) = ∫_{β^(-2/α)}^∞ dν / (1 + ν^(α/2))`; pass `f64::INFINITY` for
/// `ρ(α, ∞)`, whose lower limit is zero.
///
/// The range is split at `c = L + max(L, 1)`. Beyond `c` the substitution
/// `ν = c · w^(-1/(m-1))` with `m = α/2` turns the power-law tail into
///
/// ```text
/// c^(1-m)/(m-1) · ∫₀¹ dw / (1 + c^(-m) w^(m/(m-1)))
/// ```
///
/// whose integrand is bounded and smooth for every `α > 2`.
pub fn rho(alpha: f64, beta: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(alpha > 2.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("path-loss exponent must exceed 2 (got {alpha})")));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be positive (got {beta})")));
    }
    let lower = if beta.is_infinite() { 0.0 } else { beta.powf(-2.0 / alpha) };
    let m = alpha / 2.0;
    let split = lower + lower.max(1.0);
    let head = integrate(|v: f64| 1.0 / (1.0 + v.powf(m)), lower, split, quad)?.value;
    let k = split.powf(-m);
    let e = m / (m - 1.0);
    let tail = integrate(|w: f64| 1.0 / (1.0 + k * w.powf(e)), 0.0, 1.0, quad)?.value;
    Ok(head + split.powf(1.0 - m) / (m - 1.0) * tail)
}

/// Analytic engine: quadrature settings plus the two switches used by
/// validation tooling.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Analytic {
    pub quad: QuadratureSpec,
    pub moment: MomentMethod,
    pub sign: LaplaceSign,
}

/// Coefficients of a coverage integral: serving weight `w` and the Laplace
/// exponent `c` such that `L_I(κ) = exp(-c κ^(2/α))`.
struct CoverageTerms {
    weight: f64,
    exponent: f64,
}

impl Analytic {
    pub fn new(quad: QuadratureSpec) -> Self {
        Analytic { quad, ..Default::default() }
    }

    fn sign(&self) -> f64 {
        match self.sign {
            LaplaceSign::Negative => -1.0,
            LaplaceSign::AsPrinted => 1.0,
        }
    }

    pub fn rho(&self, alpha: f64, beta: f64) -> Result<f64> {
        rho(alpha, beta, &self.quad.tightened(100.0))
    }

    /// `E[P^(2/α)]` for buyer base stations on the context's sub-band.
    pub fn power_moment(&self, ctx: &SubBandContext) -> Result<f64> {
        match self.moment {
            MomentMethod::ClosedForm => buyer_power_moment(ctx.seller_ue_intensity, ctx.alpha, ctx.threshold),
            MomentMethod::Quadrature => buyer_power_moment_quadrature(
                ctx.seller_ue_intensity,
                ctx.alpha,
                ctx.threshold,
                &self.quad.tightened(1e4),
            ),
        }
    }

    fn require(&self, ctx: &SubBandContext, kind: OperatorKind) -> Result<()> {
        if ctx.evaluated.kind != kind {
            return Err(Error::InvalidArgument(format!("context evaluates {}, expected a {kind:?}", ctx.evaluated)));
        }
        Ok(())
    }

    fn buyer_terms(&self, ctx: &SubBandContext, beta: f64) -> Result<CoverageTerms> {
        self.require(ctx, OperatorKind::Buyer)?;
        let d = 2.0 / ctx.alpha;
        let buyers = ctx.buyer_bs_intensity + ctx.cross_buyer_intensity;
        let moment = if buyers > 0.0 { self.power_moment(ctx)? } else { 0.0 };
        let rho_inf = self.rho(ctx.alpha, f64::INFINITY)?;
        let own = PI * ctx.buyer_bs_intensity * moment;
        let exponent = own * self.rho(ctx.alpha, beta)?
            + PI * ctx.seller_bs_intensity * ctx.seller_power.powf(d) * rho_inf
            + PI * ctx.cross_buyer_intensity * moment * rho_inf;
        Ok(CoverageTerms { weight: own, exponent })
    }

    fn seller_terms(&self, ctx: &SubBandContext, beta: f64) -> Result<CoverageTerms> {
        self.require(ctx, OperatorKind::Seller)?;
        let d = 2.0 / ctx.alpha;
        let moment = if ctx.total_buyer_intensity > 0.0 { self.power_moment(ctx)? } else { 0.0 };
        let own = PI * ctx.seller_bs_intensity * ctx.seller_power.powf(d);
        let mut exponent = own * self.rho(ctx.alpha, beta)?;
        if ctx.total_buyer_intensity > 0.0 {
            exponent += PI * ctx.total_buyer_intensity * moment * self.rho(ctx.alpha, f64::INFINITY)?;
        }
        Ok(CoverageTerms { weight: own, exponent })
    }

    fn laplace(&self, terms: &CoverageTerms, kappa: f64, alpha: f64) -> Result<f64> {
        if !(kappa >= 0.0) {
            return Err(Error::InvalidArgument(format!("kappa must be non-negative (got {kappa})")));
        }
        Ok((self.sign() * terms.exponent * kappa.powf(2.0 / alpha)).exp())
    }

    /// Laplace transform of the interference at a typical buyer user whose
    /// serving station sits at the coverage boundary for threshold `beta`.
    pub fn laplace_buyer(&self, kappa: f64, ctx: &SubBandContext, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        let terms = self.buyer_terms(ctx, beta)?;
        self.laplace(&terms, kappa, ctx.alpha)
    }

    pub fn laplace_seller(&self, kappa: f64, ctx: &SubBandContext, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        let terms = self.seller_terms(ctx, beta)?;
        self.laplace(&terms, kappa, ctx.alpha)
    }

    /// SINR coverage probability of a typical buyer user on one sub-band.
    pub fn coverage_buyer(&self, beta: f64, ctx: &SubBandContext) -> Result<CoverageResult> {
        check_beta(beta)?;
        if !(ctx.buyer_bs_intensity > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{} has no base stations to serve a typical user",
                ctx.evaluated
            )));
        }
        let terms = self.buyer_terms(ctx, beta)?;
        self.coverage_integral(beta, ctx, &terms, &self.quad)
    }

    /// SINR coverage probability of a typical seller user on one sub-band.
    pub fn coverage_seller(&self, beta: f64, ctx: &SubBandContext) -> Result<CoverageResult> {
        check_beta(beta)?;
        if !(ctx.seller_bs_intensity > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{} has no base stations to serve a typical user",
                ctx.evaluated
            )));
        }
        let terms = self.seller_terms(ctx, beta)?;
        self.coverage_integral(beta, ctx, &terms, &self.quad)
    }

    /// Dispatches on the evaluated operator's kind.
    pub fn coverage(&self, beta: f64, ctx: &SubBandContext) -> Result<CoverageResult> {
        match ctx.evaluated.kind {
            OperatorKind::Seller => self.coverage_seller(beta, ctx),
            OperatorKind::Buyer => self.coverage_buyer(beta, ctx),
        }
    }

    fn coverage_integral(
        &self,
        beta: f64,
        ctx: &SubBandContext,
        terms: &CoverageTerms,
        quad: &QuadratureSpec,
    ) -> Result<CoverageResult> {
        let alpha = ctx.alpha;
        let w = terms.weight;
        let beta_d = beta.powf(2.0 / alpha);
        let sign = self.sign();
        let noise = ctx.noise;
        let integrand = |z: f64| {
            let noise_term = if noise > 0.0 { (-beta * noise * z.powf(alpha / 2.0)).exp() } else { 1.0 };
            // L_I(β z^(α/2)) with (β z^(α/2))^(2/α) = β^(2/α) z.
            w * noise_term * (-w * z).exp() * (sign * terms.exponent * beta_d * z).exp()
        };
        let bound = |t: f64| (-w * t).exp();
        let scale = 1.0 / (w + terms.exponent * beta_d);
        let r = integrate_to_infinity(integrand, 0.0, scale, Tail::Bound(&bound), quad)?;
        if r.value < -r.error || r.value > 1.0 + r.error || !r.value.is_finite() {
            return Err(Error::CoverageOutOfRange { value: r.value, error: r.error });
        }
        Ok(CoverageResult {
            value: r.value.clamp(0.0, 1.0),
            estimated_quadrature_error: r.error,
            subdivisions: r.subdivisions,
        })
    }

    /// `∫₀^∞ C(e^t - 1) dt` for one sub-band.
    fn band_rate(&self, ctx: &SubBandContext) -> Result<RateResult> {
        let inner = self.quad.tightened(100.0);
        let failure = RefCell::new(None);
        let integrand = |t: f64| {
            let beta = t.exp_m1();
            let cov = self.terms_for(ctx, beta).and_then(|terms| self.coverage_integral(beta, ctx, &terms, &inner));
            match cov {
                Ok(c) => c.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        };
        // Interference-limited coverage decays like β^(-2/α) = e^(-2t/α).
        let result =
            integrate_to_infinity(integrand, 0.0, ctx.alpha / 2.0, Tail::Decay { rate: 2.0 / ctx.alpha }, &self.quad);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let r = result?;
        Ok(RateResult { value: r.value.max(0.0), estimated_quadrature_error: r.error, subdivisions: r.subdivisions })
    }

    fn terms_for(&self, ctx: &SubBandContext, beta: f64) -> Result<CoverageTerms> {
        match ctx.evaluated.kind {
            OperatorKind::Seller => {
                if !(ctx.seller_bs_intensity > 0.0) {
                    return Err(Error::InvalidArgument("seller has no base stations".into()));
                }
                self.seller_terms(ctx, beta)
            }
            OperatorKind::Buyer => {
                if !(ctx.buyer_bs_intensity > 0.0) {
                    return Err(Error::InvalidArgument("buyer has no base stations".into()));
                }
                self.buyer_terms(ctx, beta)
            }
        }
    }

    fn sum_rates(&self, ctxs: &[SubBandContext], kind: OperatorKind) -> Result<RateResult> {
        let mut total = RateResult { value: 0.0, estimated_quadrature_error: 0.0, subdivisions: 0 };
        for ctx in ctxs {
            self.require(ctx, kind)?;
            let r = self.band_rate(ctx)?;
            total.value += r.value;
            total.estimated_quadrature_error += r.estimated_quadrature_error;
            total.subdivisions = total.subdivisions.max(r.subdivisions);
        }
        Ok(total)
    }

    /// Average rate of a typical buyer user summed over its leased bands.
    pub fn rate_buyer(&self, ctxs: &[SubBandContext]) -> Result<RateResult> {
        self.sum_rates(ctxs, OperatorKind::Buyer)
    }

    /// Average rate of a typical seller user summed over its own bands.
    pub fn rate_seller(&self, ctxs: &[SubBandContext]) -> Result<RateResult> {
        self.sum_rates(ctxs, OperatorKind::Seller)
    }

    pub fn operator_rate(&self, config: &ScenarioConfig, op: OperatorId) -> Result<RateResult> {
        let ctxs = config.contexts_of(op)?;
        self.sum_rates(&ctxs, op.kind)
    }

    /// `Σ_s μ_s R_s + Σ_b μ_b R_b`: rate per unit area over all operators'
    /// users, in nats per channel use per square meter.
    pub fn total_sum_rate(&self, config: &ScenarioConfig) -> Result<f64> {
        config.ensure_valid()?;
        let mut total = 0.0;
        for op in config.operators() {
            let mu = config.ue_intensity(op);
            if mu == 0.0 || config.bands_of(op).is_empty() {
                continue;
            }
            total += mu * self.operator_rate(config, op)?.value;
        }
        Ok(total)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("SINR threshold must be positive (got {beta})")))
    }
}
