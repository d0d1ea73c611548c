//! Special functions needed by the closed-form throughput expressions:
//! integer-order upper incomplete gamma, integer digamma, the scaled
//! exponential integral e^x E1(x), log-gamma, and the Tricomi confluent
//! hypergeometric function U(a; b; z).
//!
//! Only the integer orders the throughput formulas actually use are
//! supported; there is no general-order incomplete gamma here.

use crate::quad;
use thiserror::Error;

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577215664901532860606512090082;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("argument {arg} outside domain of {func}")]
    Domain { func: &'static str, arg: f64 },
    #[error("quadrature for U(a;b;z) did not converge: {0}")]
    NonConvergence(#[from] quad::QuadError),
}

/// n! as f64, exact for n ≤ 170 (beyond that f64 overflows anyway).
pub fn factorial(n: u32) -> f64 {
    let mut acc = 1.0f64;
    for j in 2..=n as u64 {
        acc *= j as f64;
    }
    acc
}

/// Upper incomplete gamma Γ(k, x) at integer order k ≥ 1, x ≥ 0.
///
/// Uses the finite-sum identity Γ(k, x) = (k-1)! e^{-x} Σ_{j<k} x^j / j!,
/// with the sum accumulated by the term ratio x/j.
pub fn upper_incomplete_gamma(k: u32, x: f64) -> f64 {
    debug_assert!(k >= 1 && x >= 0.0);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for j in 1..k {
        term *= x / j as f64;
        sum += term;
    }
    factorial(k - 1) * (-x).exp() * sum
}

/// Digamma ψ(k) at integer k ≥ 1: ψ(k) = -γ + Σ_{j=1}^{k-1} 1/j.
pub fn digamma_int(k: u32) -> f64 {
    debug_assert!(k >= 1);
    let mut sum = -EULER_GAMMA;
    for j in 1..k {
        sum += 1.0 / j as f64;
    }
    sum
}

/// Scaled exponential integral e^x E1(x) for x > 0, where E1(x) = -Ei(-x).
///
/// The scaled product stays O(1/x) for large x, while e^x alone overflows
/// near x ≈ 710; callers that need e^b Ei(-b) must use -e1_scaled(b).
/// Series below x = 1, continued fraction above.
pub fn e1_scaled(x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(SpecFunError::Domain {
            func: "e1_scaled",
            arg: x,
        });
    }
    if x <= 1.0 {
        // E1(x) = -γ - ln x + Σ_{n≥1} (-1)^{n+1} x^n / (n·n!)
        let mut sum = 0.0f64;
        let mut term = 1.0f64; // x^n / n!
        for n in 1..200u32 {
            term *= x / n as f64;
            let contrib = if n % 2 == 1 { term } else { -term } / n as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        Ok(x.exp() * (-EULER_GAMMA - x.ln() + sum))
    } else {
        // e^x E1(x) = 1/(x+1 - 1²/(x+3 - 2²/(x+5 - ...))), modified Lentz
        let tiny = 1e-300;
        let mut f = x + 1.0;
        let mut c = f;
        let mut d = 0.0f64;
        for n in 1..500u64 {
            let an = -((n * n) as f64);
            let bn = x + (2 * n + 1) as f64;
            d = bn + an * d;
            if d == 0.0 {
                d = tiny;
            }
            c = bn + an / c;
            if c == 0.0 {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok(1.0 / f)
    }
}

// Lanczos approximation, g = 7, n = 9 (Godfrey coefficients).
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Log-gamma ln Γ(x) for x > 0 via the Lanczos approximation.
pub fn ln_gamma(x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(SpecFunError::Domain {
            func: "ln_gamma",
            arg: x,
        });
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + sum.ln())
}

/// Tricomi confluent hypergeometric U(a; b; z) for a > 0, z > 0, evaluated
/// from its integral representation
/// U(a;b;z) = (1/Γ(a)) ∫₀^∞ e^{-zt} t^{a-1} (1+t)^{b-a-1} dt.
///
/// The integral is rescaled by t = u/z so the dominant mass sits at u = O(a),
/// and for a < 1 the endpoint singularity is removed by u = s^m with
/// m = ceil(1/a).
pub fn tricomi_u(a: f64, b: f64, z: f64) -> Result<f64, SpecFunError> {
    if !a.is_finite() || a <= 0.0 {
        return Err(SpecFunError::Domain {
            func: "tricomi_u(a)",
            arg: a,
        });
    }
    if !z.is_finite() || z <= 0.0 {
        return Err(SpecFunError::Domain {
            func: "tricomi_u(z)",
            arg: z,
        });
    }
    // U = z^{-a}/Γ(a) ∫₀^∞ e^{-u} u^{a-1} (1+u/z)^{b-a-1} du
    let expo = b - a - 1.0;
    let raw = move |u: f64| -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        ((-u) + (a - 1.0) * u.ln() + expo * (u / z).ln_1p()).exp()
    };

    let split = (2.0 * a).max(2.0);
    let abs_tol = 1e-305;
    let rel_tol = 1e-11;

    let head = if a < 1.0 {
        // remove the u^{a-1} singularity: u = s^m, du = m s^{m-1} ds
        let m = (1.0 / a).ceil();
        let s_hi = split.powf(1.0 / m);
        quad::integrate(
            move |s| {
                if s <= 0.0 {
                    return 0.0;
                }
                let u = s.powf(m);
                // m s^{m-1} e^{-u} u^{a-1} (...) = m e^{-u} s^{ma-1} (...)
                m * ((-u) + (m * a - 1.0) * s.ln() + expo * (u / z).ln_1p()).exp()
            },
            0.0,
            s_hi,
            abs_tol,
            rel_tol,
        )?
    } else {
        quad::integrate(raw, 0.0, split, abs_tol, rel_tol)?
    };
    let tail = quad::integrate_to_inf(raw, split, 1e-16 * head.abs().max(1e-305), rel_tol)?;

    let ln_gamma_a = ln_gamma(a)?;
    Ok((head + tail) * (-a * z.ln() - ln_gamma_a).exp())
}
