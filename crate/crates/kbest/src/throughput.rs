//! Average and effective throughput of the k-th best SU: closed-form
//! asymptotics from the inverse-gamma limit, and exact finite-N quadrature
//! references.
//!
//! All values are per unit bandwidth (bit/s/Hz).

use crate::channel::ChannelParams;
use crate::order_stats::{exact_kth_pdf, limit_pdf, scale_b, LimitLaw, OrderStatsError, SelectionSpec};
use crate::quad::{self, QuadError};
use crate::specfun::{self, SpecFunError, EULER_GAMMA};
use serde::Serialize;
use std::f64::consts::LN_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThroughputError {
    #[error(transparent)]
    OrderStats(#[from] OrderStatsError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("delay exponent A must be nonnegative, got {0}")]
    NegativeExponent(f64),
    #[error("scale b must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("A=0 has no effective-throughput form of its own; use the average throughput")]
    ZeroExponent,
}

/// Normalized delay exponent A = θTB/ln 2; A = 0 means no delay constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosSpec {
    a_exponent: f64,
}

impl QosSpec {
    pub fn new(a_exponent: f64) -> Result<Self, ThroughputError> {
        if !a_exponent.is_finite() || a_exponent < 0.0 {
            return Err(ThroughputError::NegativeExponent(a_exponent));
        }
        Ok(Self { a_exponent })
    }

    /// From the raw triple (θ, T, B); only the product enters the math.
    pub fn from_theta(theta: f64, block_len: f64, bandwidth: f64) -> Result<Self, ThroughputError> {
        Self::new(theta * block_len * bandwidth / LN_2)
    }

    pub fn a_exponent(&self) -> f64 {
        self.a_exponent
    }

    pub fn is_unconstrained(&self) -> bool {
        self.a_exponent == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Asymptotic,
    Quadrature,
    Montecarlo,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Asymptotic => "asymptotic",
            Method::Quadrature => "quadrature",
            Method::Montecarlo => "montecarlo",
        })
    }
}

/// A throughput value in bit/s/Hz; Monte Carlo estimates carry a CI halfwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThroughputEstimate {
    pub value: f64,
    pub ci_halfwidth: Option<f64>,
    pub method: Method,
}

impl ThroughputEstimate {
    pub fn exact(value: f64, method: Method) -> Self {
        Self {
            value,
            ci_halfwidth: None,
            method,
        }
    }
}

/// Neumaier compensated accumulator; keeps the alternating inner sums of the
/// average-throughput closed form from losing digits at large b.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Asymptotic average throughput of the k-th best SU (closed form), in nats
/// converted to bit/s/Hz:
///
///   [ln b - ψ(k)]/ln2 + (1/ln2) Σ_{μ=0}^{k-1} (1/(k-μ-1)!) ·
///     [ (-1)^{k-μ-2} b^{k-μ-1} e^b Ei(-b) + Σ_{v=1}^{k-μ-1} (v-1)!(-b)^{k-μ-1-v} ]
///
/// with e^b Ei(-b) formed as -e1_scaled(b) so nothing overflows.
pub fn asymptotic_avg_at_scale(rank: u32, b: f64) -> Result<f64, ThroughputError> {
    if !b.is_finite() || b <= 0.0 {
        return Err(ThroughputError::NonPositiveScale(b));
    }
    let e1s = specfun::e1_scaled(b)?;
    let mut nats = CompensatedSum::default();
    nats.add(b.ln() - specfun::digamma_int(rank));
    for mu in 0..rank {
        let n = (rank - mu - 1) as i32;
        let mut bracket = CompensatedSum::default();
        // (-1)^{n-1} b^n e^b Ei(-b) = (-1)^n b^n e1_scaled(b)
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        bracket.add(sign * b.powi(n) * e1s);
        for v in 1..=n {
            bracket.add(specfun::factorial(v as u32 - 1) * (-b).powi(n - v));
        }
        nats.add(bracket.value() / specfun::factorial(n as u32));
    }
    Ok(nats.value() / LN_2)
}

/// Asymptotic average throughput for a selection among N users.
pub fn asymptotic_avg(
    sel: SelectionSpec,
    p: &ChannelParams,
) -> Result<ThroughputEstimate, ThroughputError> {
    let b = scale_b(sel.n_users(), p)?;
    Ok(ThroughputEstimate::exact(
        asymptotic_avg_at_scale(sel.rank(), b)?,
        Method::Asymptotic,
    ))
}

/// Best-user (k = 1) special case: [ln b + γ - e^b Ei(-b)]/ln 2.
pub fn avg_k1_closed_form(b: f64) -> Result<f64, ThroughputError> {
    if !b.is_finite() || b <= 0.0 {
        return Err(ThroughputError::NonPositiveScale(b));
    }
    Ok((b.ln() + EULER_GAMMA + specfun::e1_scaled(b)?) / LN_2)
}

/// Inner expectation of the asymptotic effective throughput,
/// E[(1+bZ)^{-A}] = b^k U(A+k; k+1; b) Γ(A+k)/(k-1)!, assembled in log space.
pub fn eff_inner_expectation(rank: u32, a_exponent: f64, b: f64) -> Result<f64, ThroughputError> {
    let k = rank as f64;
    let u = specfun::tricomi_u(a_exponent + k, k + 1.0, b)?;
    let ln_i3 = k * b.ln() + u.ln() + specfun::ln_gamma(a_exponent + k)?
        - specfun::ln_gamma(k)?;
    Ok(ln_i3.exp())
}

/// Asymptotic effective throughput: -(1/A) log₂ E[(1+bZ)^{-A}].
/// A = 0 is defined by continuous extension to the average throughput.
pub fn asymptotic_eff(
    sel: SelectionSpec,
    qos: QosSpec,
    p: &ChannelParams,
) -> Result<ThroughputEstimate, ThroughputError> {
    if qos.is_unconstrained() {
        return asymptotic_avg(sel, p);
    }
    let b = scale_b(sel.n_users(), p)?;
    let a = qos.a_exponent();
    let inner = eff_inner_expectation(sel.rank(), a, b)?;
    Ok(ThroughputEstimate::exact(
        -inner.ln() / (a * LN_2),
        Method::Asymptotic,
    ))
}

/// Exact finite-N average throughput by quadrature of the k-th order-statistic
/// density: ∫₀^∞ log₂(1+z) f_{(N-k+1)}(z) dz.
pub fn exact_avg_quadrature(
    sel: SelectionSpec,
    p: &ChannelParams,
) -> Result<ThroughputEstimate, ThroughputError> {
    let v = quad::integrate_to_inf(
        |z| (1.0 + z).log2() * exact_kth_pdf(z, sel, p),
        0.0,
        1e-9,
        1e-9,
    )?;
    Ok(ThroughputEstimate::exact(v, Method::Quadrature))
}

/// Exact finite-N effective throughput: -(1/A) log₂ ∫ (1+z)^{-A} f_{(N-k+1)} dz.
pub fn exact_eff_quadrature(
    sel: SelectionSpec,
    qos: QosSpec,
    p: &ChannelParams,
) -> Result<ThroughputEstimate, ThroughputError> {
    if qos.is_unconstrained() {
        return exact_avg_quadrature(sel, p);
    }
    let a = qos.a_exponent();
    let inner = quad::integrate_to_inf(
        |z| (1.0 + z).powf(-a) * exact_kth_pdf(z, sel, p),
        0.0,
        1e-12,
        1e-10,
    )?;
    Ok(ThroughputEstimate::exact(
        -inner.ln() / (a * LN_2),
        Method::Quadrature,
    ))
}

/// Quadrature of the defining integral of the asymptotic average throughput,
/// ∫₀^∞ log₂(1+bz) f^{(k)}(z) dz. This is the independent reference the
/// closed form is checked against.
pub fn avg_limit_quadrature(rank: u32, b: f64) -> Result<f64, ThroughputError> {
    let law = LimitLaw::new(rank, b);
    Ok(quad::integrate_to_inf(
        |z| (1.0 + b * z).ln() / LN_2 * limit_pdf(z, &law),
        0.0,
        1e-13,
        1e-11,
    )?)
}

/// Quadrature of E[(1+bZ)^{-A}] under the limit law; reference for
/// `eff_inner_expectation`.
pub fn eff_inner_quadrature(rank: u32, a_exponent: f64, b: f64) -> Result<f64, ThroughputError> {
    let law = LimitLaw::new(rank, b);
    Ok(quad::integrate_to_inf(
        |z| (1.0 + b * z).powf(-a_exponent) * limit_pdf(z, &law),
        0.0,
        1e-16,
        1e-11,
    )?)
}
