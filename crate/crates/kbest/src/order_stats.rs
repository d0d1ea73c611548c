//! Exact and limiting laws of the k-th highest SNR among N users.
//!
//! The exact k-th order-statistic PDF is k C(N,k) f F^{N-k} (1-F)^{k-1}.
//! For fixed k and N → ∞, Z_{(N-k+1)}/b converges in distribution to an
//! inverse gamma law G^{(k)}(z) = Γ(k, 1/z)/(k-1)!, where the scale b is the
//! (1 - 1/N)-quantile of the single-user SNR CDF.

use crate::channel::{sample_snr, snr_cdf, snr_pdf, ChannelParams};
use crate::rng::RandomStream;
use crate::specfun::{factorial, ln_gamma, upper_incomplete_gamma};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderStatsError {
    #[error("selection rank k={rank} must satisfy 1 <= k <= N={n_users}")]
    RankOutOfRange { rank: u32, n_users: u32 },
    #[error("scale b is undefined for N=1 (quantile at probability 0)")]
    DegenerateScale,
}

/// Which user to schedule: the k-th best of N (k = 1 is the best).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionSpec {
    n_users: u32,
    rank: u32,
}

impl SelectionSpec {
    pub fn new(n_users: u32, rank: u32) -> Result<Self, OrderStatsError> {
        if rank == 0 || n_users == 0 || rank > n_users {
            return Err(OrderStatsError::RankOutOfRange { rank, n_users });
        }
        Ok(Self { n_users, rank })
    }

    pub fn n_users(&self) -> u32 {
        self.n_users
    }
    pub fn rank(&self) -> u32 {
        self.rank
    }
}

/// The limiting inverse-gamma law of the k-th extreme, with its scale b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitLaw {
    rank: u32,
    scale_b: f64,
}

impl LimitLaw {
    pub fn new(rank: u32, scale_b: f64) -> Self {
        assert!(rank >= 1 && scale_b > 0.0 && scale_b.is_finite());
        Self { rank, scale_b }
    }

    pub fn for_selection(sel: SelectionSpec, p: &ChannelParams) -> Result<Self, OrderStatsError> {
        Ok(Self::new(sel.rank, scale_b(sel.n_users, p)?))
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }
    pub fn scale_b(&self) -> f64 {
        self.scale_b
    }
}

/// Exact PDF of the k-th highest of N i.i.d. SNRs, Eq.-(3)-style.
/// The combinatorial prefactor is formed in log space so the density stays
/// usable at N well past the factorial overflow point.
pub fn exact_kth_pdf(z: f64, sel: SelectionSpec, p: &ChannelParams) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let n = sel.n_users as f64;
    let k = sel.rank as f64;
    let ln_coeff = k.ln() + ln_gamma(n + 1.0).expect("n >= 1")
        - ln_gamma(k + 1.0).expect("k >= 1")
        - ln_gamma(n - k + 1.0).expect("n >= k");
    let f = snr_cdf(z, p);
    ln_coeff.exp()
        * snr_pdf(z, p)
        * f.powi((sel.n_users - sel.rank) as i32)
        * (1.0 - f).powi(sel.rank as i32 - 1)
}

/// Normalizing scale b = F^{-1}(1 - 1/N), inverted analytically:
/// b = (λ/(ηρ)) / ((1 - 1/N)^{-1/M} - 1). Requires N ≥ 2.
pub fn scale_b(n_users: u32, p: &ChannelParams) -> Result<f64, OrderStatsError> {
    if n_users < 2 {
        return Err(OrderStatsError::DegenerateScale);
    }
    let q = 1.0 - 1.0 / n_users as f64;
    let denom = q.powf(-1.0 / p.m_antennas() as f64) - 1.0;
    Ok(p.snr_scale() / denom)
}

/// CDF of the unscaled limit: G^{(k)}(z) = Γ(k, 1/z)/(k-1)! for z > 0.
/// Callers compare against samples divided by `law.scale_b`.
pub fn limit_cdf(z: f64, law: &LimitLaw) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    // clamp: the finite-sum evaluation can land one ulp above 1
    (upper_incomplete_gamma(law.rank, 1.0 / z) / factorial(law.rank - 1)).min(1.0)
}

/// PDF of the unscaled limit: e^{-1/z} / (z^{k+1} (k-1)!).
pub fn limit_pdf(z: f64, law: &LimitLaw) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let k = law.rank as f64;
    (-1.0 / z - (k + 1.0) * z.ln() - ln_gamma(k).expect("k >= 1")).exp()
}

/// Draw the k-th largest of N SNR samples; `buf` is a caller-owned scratch
/// buffer so hot loops avoid per-trial allocation.
pub fn sample_kth_largest(
    sel: SelectionSpec,
    p: &ChannelParams,
    rng: &mut RandomStream,
    buf: &mut Vec<f64>,
) -> f64 {
    buf.clear();
    buf.extend((0..sel.n_users).map(|_| sample_snr(p, rng).0));
    // k-th largest sits at ascending index N-k; O(N) partial selection
    let idx = (sel.n_users - sel.rank) as usize;
    *buf.select_nth_unstable_by(idx, |a, b| a.total_cmp(b)).1
}

/// Two-sided KS statistic between sorted samples and a reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Empirical convergence diagnostic: KS distance between `trials` draws of
/// Z_{(N-k+1)}/b and the limiting CDF. Trials run on independent substreams
/// and the statistic is order-free, so the result is reproducible under any
/// parallelism.
pub fn ks_convergence(
    sel: SelectionSpec,
    p: &ChannelParams,
    trials: u32,
    rng: &RandomStream,
) -> Result<f64, OrderStatsError> {
    let law = LimitLaw::for_selection(sel, p)?;
    let b = law.scale_b();
    let mut samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(sel.n_users as usize),
            |buf, i| {
                let mut stream = rng.substream(i);
                sample_kth_largest(sel, p, &mut stream, buf) / b
            },
        )
        .collect();
    samples.sort_by(|a, b| a.total_cmp(b));
    Ok(ks_statistic(&samples, |z| limit_cdf(z, &law)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_to_inf;

    fn params(m: u32) -> ChannelParams {
        ChannelParams::new(2.0, 1.0 / 3.0, 1.0, m).unwrap()
    }

    #[test]
    fn selection_spec_validation() {
        assert!(SelectionSpec::new(5, 0).is_err());
        assert!(SelectionSpec::new(5, 6).is_err());
        assert!(SelectionSpec::new(5, 5).is_ok());
    }

    #[test]
    fn single_user_reduces_to_snr_pdf() {
        let p = params(2);
        let sel = SelectionSpec::new(1, 1).unwrap();
        for &z in &[0.5, 5.0, 50.0] {
            assert!((exact_kth_pdf(z, sel, &p) - snr_pdf(z, &p)).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_pdf_normalizes() {
        let p = params(2);
        for &(n, k) in &[(5u32, 1u32), (5, 3), (20, 2)] {
            let sel = SelectionSpec::new(n, k).unwrap();
            let total =
                integrate_to_inf(|z| exact_kth_pdf(z, sel, &p), 0.0, 1e-11, 1e-10).unwrap();
            assert!((total - 1.0).abs() < 1e-8, "(N={n},k={k}): {total}");
        }
    }

    #[test]
    fn exact_pdfs_partition_the_density() {
        // Σ_{k=1..N} f_{(N-k+1)}(z) = N f(z)
        let p = params(2);
        let n = 5;
        for &z in &[0.4, 3.0, 12.0, 80.0] {
            let sum: f64 = (1..=n)
                .map(|k| exact_kth_pdf(z, SelectionSpec::new(n, k).unwrap(), &p))
                .sum();
            assert!((sum - n as f64 * snr_pdf(z, &p)).abs() < 1e-9, "z={z}");
        }
    }

    #[test]
    fn scale_b_closed_form() {
        // M=1: b = (λ/(ηρ))(N-1); at the Fig. 1 parameters, N=2 gives b=6
        let p = params(1);
        let b = scale_b(2, &p).unwrap();
        assert!((b - 6.0).abs() < 1e-12);
        assert!((snr_cdf(b, &p) - 0.5).abs() < 1e-13);
        assert!(scale_b(1, &p).is_err());
    }

    #[test]
    fn scale_b_is_the_quantile() {
        for m in 1..=3 {
            let p = params(m);
            for &n in &[2u32, 10, 100] {
                let b = scale_b(n, &p).unwrap();
                assert!(
                    (snr_cdf(b, &p) - (1.0 - 1.0 / n as f64)).abs() < 1e-12,
                    "N={n} M={m}"
                );
            }
        }
    }

    #[test]
    fn scale_b_m2_pinned_by_bisection() {
        // M=2, N=5: bisection on F(b) = 0.8 pins b ≈ 50.8328
        let p = params(2);
        let (mut lo, mut hi) = (1e-9, 1e9);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if snr_cdf(mid, &p) < 0.8 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let b = scale_b(5, &p).unwrap();
        assert!((b - lo).abs() < 1e-6);
        assert!((b - 50.832815729997456).abs() < 1e-9);
    }

    #[test]
    fn scale_b_monotone() {
        let p = params(2);
        let mut prev = 0.0;
        for &n in &[2u32, 5, 10, 50, 200] {
            let b = scale_b(n, &p).unwrap();
            assert!(b > prev);
            prev = b;
        }
        // decreasing in ρ (increasing in Q)
        let mut prev = f64::INFINITY;
        for &rho in &[0.1, 0.5, 1.0, 4.0] {
            let b = scale_b(10, &p.with_rho(rho).unwrap()).unwrap();
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn limit_cdf_frechet_and_tail() {
        let law1 = LimitLaw::new(1, 1.0);
        for &z in &[0.2, 1.0, 7.0] {
            assert!((limit_cdf(z, &law1) - (-1.0 / z).exp()).abs() < 1e-15);
        }
        for k in 1..=5 {
            let law = LimitLaw::new(k, 1.0);
            assert!(1.0 - limit_cdf(1e8, &law) < 1e-7);
            assert_eq!(limit_cdf(0.0, &law), 0.0);
        }
        // k=2, z=1: 2/e
        let law2 = LimitLaw::new(2, 1.0);
        assert!((limit_cdf(1.0, &law2) - 0.7357588823428847).abs() < 1e-14);
    }

    #[test]
    fn limit_pdf_normalizes_and_differentiates() {
        for k in 1..=6 {
            let law = LimitLaw::new(k, 1.0);
            let total = integrate_to_inf(|z| limit_pdf(z, &law), 0.0, 1e-12, 1e-11).unwrap();
            assert!((total - 1.0).abs() < 1e-10, "k={k}: {total}");
        }
        let law = LimitLaw::new(3, 1.0);
        let h = 1e-6;
        for &z in &[0.2, 1.0, 5.0] {
            let fd = (limit_cdf(z + h, &law) - limit_cdf(z - h, &law)) / (2.0 * h);
            assert!((fd - limit_pdf(z, &law)).abs() < 1e-6, "z={z}");
        }
    }

    #[test]
    fn limit_pdf_mode() {
        // mode at z = 1/(k+1): derivative changes sign there
        for k in 1..=2u32 {
            let law = LimitLaw::new(k, 1.0);
            let m = 1.0 / (k as f64 + 1.0);
            assert!(limit_pdf(m, &law) > limit_pdf(m * 0.9, &law));
            assert!(limit_pdf(m, &law) > limit_pdf(m * 1.1, &law));
        }
    }

    #[test]
    fn limit_laws_stochastically_ordered() {
        // the (k+1)-th best is stochastically smaller: G^{(k+1)} >= G^{(k)}
        for k in 1..=5u32 {
            let lo = LimitLaw::new(k, 1.0);
            let hi = LimitLaw::new(k + 1, 1.0);
            for i in 1..=60 {
                let z = 0.05 * i as f64;
                assert!(limit_cdf(z, &hi) >= limit_cdf(z, &lo) - 1e-15, "k={k} z={z}");
            }
        }
    }

    #[test]
    fn limit_is_reciprocal_gamma() {
        // 1/Gamma(k,1) transformed samples follow limit_cdf
        let k = 3u32;
        let law = LimitLaw::new(k, 1.0);
        let mut rng = RandomStream::from_seed(99);
        let n = 100_000;
        let mut samples: Vec<f64> = (0..n)
            .map(|_| {
                let g: f64 = (0..k).map(|_| rng.exponential(1.0)).sum();
                1.0 / g
            })
            .collect();
        samples.sort_by(|a, b| a.total_cmp(b));
        let d = ks_statistic(&samples, |z| limit_cdf(z, &law));
        assert!(d < 0.01, "KS = {d}");
    }

    #[test]
    fn kth_largest_sample_matches_exact_law() {
        let p = params(2);
        let sel = SelectionSpec::new(10, 3).unwrap();
        let mut rng = RandomStream::from_seed(31);
        let mut buf = Vec::new();
        let n = 200_000;
        let mut samples: Vec<f64> = (0..n)
            .map(|_| sample_kth_largest(sel, &p, &mut rng, &mut buf))
            .collect();
        samples.sort_by(|a, b| a.total_cmp(b));
        // independent route: CDF of the k-th largest is the binomial tail
        // P(at most k-1 of N exceed z) = Σ_{i<k} C(N,i)(1-F)^i F^{N-i}
        let exact_cdf = |z: f64| {
            let f = snr_cdf(z, &p);
            let (n, k) = (sel.n_users(), sel.rank());
            let mut c = 1.0f64;
            let mut total = 0.0;
            for i in 0..k {
                total += c * (1.0 - f).powi(i as i32) * f.powi((n - i) as i32);
                c *= (n - i) as f64 / (i + 1) as f64;
            }
            total
        };
        let d = ks_statistic(&samples, exact_cdf);
        assert!(d < 0.005, "KS = {d}");
    }

    #[test]
    fn ks_convergence_deterministic_and_shrinking() {
        let p = params(2);
        let rng = RandomStream::from_seed(7);
        let sel = |n| SelectionSpec::new(n, 2).unwrap();
        let d1 = ks_convergence(sel(5), &p, 20_000, &rng).unwrap();
        let d2 = ks_convergence(sel(100), &p, 20_000, &rng).unwrap();
        let d3 = ks_convergence(sel(1000), &p, 20_000, &rng).unwrap();
        assert!(d3 < d1, "{d1} -> {d2} -> {d3}");
        let again = ks_convergence(sel(100), &p, 20_000, &rng).unwrap();
        assert_eq!(d2, again);
    }

    #[test]
    fn ks_convergence_frechet_case() {
        let p = params(1);
        let rng = RandomStream::from_seed(13);
        let sel = SelectionSpec::new(10_000, 1).unwrap();
        let d = ks_convergence(sel, &p, 100_000, &rng).unwrap();
        assert!(d < 0.02, "KS = {d}");
    }
}
