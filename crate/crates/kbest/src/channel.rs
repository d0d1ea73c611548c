//! Underlay CR channel model: the SNR law of a single secondary user under
//! interference-cap power adaptation, with MRC over M receive antennas.
//!
//! The SNR is Z = (1/ρ) γ / |g|² with |g|² ~ Exp(λ), γ a sum of M i.i.d.
//! Exp(η) variates, and ρ = N₀/Q. Its CDF is (ρz / (λ/η + ρz))^M.

use crate::rng::RandomStream;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("antenna count must be at least 1")]
    ZeroAntennas,
}

/// Fading and interference parameters of one SU → SR link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    lambda: f64,
    eta: f64,
    rho: f64,
    m_antennas: u32,
}

impl ChannelParams {
    pub fn new(lambda: f64, eta: f64, rho: f64, m_antennas: u32) -> Result<Self, ParamError> {
        for (name, value) in [("lambda", lambda), ("eta", eta), ("rho", rho)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(ParamError::NonPositive { name, value });
            }
        }
        if m_antennas == 0 {
            return Err(ParamError::ZeroAntennas);
        }
        Ok(Self {
            lambda,
            eta,
            rho,
            m_antennas,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn m_antennas(&self) -> u32 {
        self.m_antennas
    }

    pub fn with_rho(self, rho: f64) -> Result<Self, ParamError> {
        Self::new(self.lambda, self.eta, rho, self.m_antennas)
    }

    pub fn with_antennas(self, m: u32) -> Result<Self, ParamError> {
        Self::new(self.lambda, self.eta, self.rho, m)
    }

    /// λ/(η·ρ), the SNR scale (also the M=1 median).
    pub fn snr_scale(&self) -> f64 {
        self.lambda / (self.eta * self.rho)
    }
}

/// One instantaneous SNR realization (linear scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSample(pub f64);

/// CDF of the single-user SNR: (ρz / (λ/η + ρz))^M for z > 0.
pub fn snr_cdf(z: f64, p: &ChannelParams) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let rz = p.rho * z;
    (rz / (p.lambda / p.eta + rz)).powi(p.m_antennas as i32)
}

/// PDF of the single-user SNR.
pub fn snr_pdf(z: f64, p: &ChannelParams) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let m = p.m_antennas as f64;
    let s = p.lambda / p.eta;
    let rz = p.rho * z;
    m * s * p.rho * rz.powi(p.m_antennas as i32 - 1) / (s + rz).powi(p.m_antennas as i32 + 1)
}

/// Draw one SNR sample: |g|² ~ Exp(λ), γ = Σ_{j=1}^{M} Exp(η), Z = γ/(ρ|g|²).
pub fn sample_snr(p: &ChannelParams, rng: &mut RandomStream) -> SnrSample {
    let g2 = rng.exponential(p.lambda);
    let mut gamma = 0.0;
    for _ in 0..p.m_antennas {
        gamma += rng.exponential(p.eta);
    }
    SnrSample(gamma / (p.rho * g2))
}
