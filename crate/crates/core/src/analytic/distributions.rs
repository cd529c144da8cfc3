//! Distributions of the largest buyer-to-seller-user channel gain `H` and of
//! the resulting buyer transmit power `P = ζ/H`.
//!
//! With seller users forming a PPP of intensity `μ` and unit-mean Rayleigh
//! fading, `H = max_i h_i d_i^(-α)` has
//!
//! ```text
//! F_H(z) = exp(-π μ Γ(1 + 2/α) z^(-2/α))
//! ```
//!
//! so `P^(2/α)` is exponential with rate `π μ Γ(1 + 2/α) / ζ^(2/α)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, QuadratureSpec, Tail};
use crate::special::gamma;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 2.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("path-loss exponent must exceed 2 (got {alpha})")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive (got {v})")))
    }
}

fn check_intensity(mu: f64) -> Result<()> {
    if mu >= 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("intensity must be non-negative (got {mu})")))
    }
}

/// `π μ Γ(1 + 2/α)`, the rate shared by every expression in this module.
pub fn gain_rate(ue_intensity: f64, alpha: f64) -> f64 {
    PI * ue_intensity * gamma(1.0 + 2.0 / alpha)
}

/// CDF of the largest interference gain `H` from one buyer base station to
/// the seller's users.
pub fn max_gain_cdf(z: f64, ue_intensity: f64, alpha: f64) -> Result<f64> {
    check_positive("z", z)?;
    check_intensity(ue_intensity)?;
    check_alpha(alpha)?;
    Ok((-gain_rate(ue_intensity, alpha) * z.powf(-2.0 / alpha)).exp())
}

pub fn max_gain_pdf(z: f64, ue_intensity: f64, alpha: f64) -> Result<f64> {
    check_positive("z", z)?;
    check_intensity(ue_intensity)?;
    check_alpha(alpha)?;
    let c = gain_rate(ue_intensity, alpha);
    let d = 2.0 / alpha;
    Ok(d * c * z.powf(-1.0 - d) * (-c * z.powf(-d)).exp())
}

/// CDF of the buyer transmit power `P = ζ/H`.
pub fn buyer_power_cdf(z: f64, ue_intensity: f64, alpha: f64, threshold: f64) -> Result<f64> {
    check_positive("z", z)?;
    check_positive("interference threshold", threshold)?;
    check_intensity(ue_intensity)?;
    check_alpha(alpha)?;
    Ok(-(-gain_rate(ue_intensity, alpha) * (z / threshold).powf(2.0 / alpha)).exp_m1())
}

pub fn buyer_power_pdf(z: f64, ue_intensity: f64, alpha: f64, threshold: f64) -> Result<f64> {
    check_positive("z", z)?;
    check_positive("interference threshold", threshold)?;
    check_intensity(ue_intensity)?;
    check_alpha(alpha)?;
    let c = gain_rate(ue_intensity, alpha);
    let d = 2.0 / alpha;
    let u = (z / threshold).powf(d);
    Ok(d * c * u / z * (-c * u).exp())
}

/// `E[P^(2/α)] = ζ^(2/α) / (π μ Γ(1 + 2/α))`.
pub fn buyer_power_moment(ue_intensity: f64, alpha: f64, threshold: f64) -> Result<f64> {
    check_positive("interference threshold", threshold)?;
    check_intensity(ue_intensity)?;
    check_alpha(alpha)?;
    if ue_intensity == 0.0 {
        return Err(Error::UnboundedMoment);
    }
    Ok(threshold.powf(2.0 / alpha) / gain_rate(ue_intensity, alpha))
}

/// `E[P^(2/α)]` by direct quadrature of `z^(2/α) f_P(z)` over `(0, ∞)`.
pub fn buyer_power_moment_quadrature(
    ue_intensity: f64,
    alpha: f64,
    threshold: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_positive("interference threshold", threshold)?;
    check_intensity(ue_intensity)?;
    check_alpha(alpha)?;
    if ue_intensity == 0.0 {
        return Err(Error::UnboundedMoment);
    }
    let d = 2.0 / alpha;
    let c = gain_rate(ue_intensity, alpha);
    let median = threshold * (std::f64::consts::LN_2 / c).powf(alpha / 2.0);
    let integrand = |z: f64| {
        if z <= 0.0 {
            return 0.0;
        }
        z.powf(d) * buyer_power_pdf(z, ue_intensity, alpha, threshold).unwrap_or(0.0)
    };
    // Beyond T the integrand is the tail of an exponential first moment in
    // y = P^(2/α): ∫ y c' e^(-c' y) dy = e^(-c' y_T)(y_T + 1/c').
    let rate = c / threshold.powf(d);
    let tail = move |t: f64| {
        let y = t.powf(d);
        (-rate * y).exp() * (y + 1.0 / rate)
    };
    let r = integrate_to_infinity(integrand, 0.0, median, Tail::Bound(&tail), quad)?;
    Ok(r.value)
}

/// Draws `P` from its marginal distribution by inversion, given a uniform
/// variate in `(0, 1)`.
pub fn buyer_power_from_uniform(u: f64, ue_intensity: f64, alpha: f64, threshold: f64) -> f64 {
    let c = gain_rate(ue_intensity, alpha);
    let y = -(-u).ln_1p() / c;
    threshold * y.powf(alpha / 2.0)
}
