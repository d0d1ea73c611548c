//! Built-in verification suite.
//!
//! Each criterion checks the closed-form asymptotics against an independent
//! route (quadrature of the defining integral, Monte Carlo, or an analytic
//! identity) at pinned parameter points and tolerances. `Fast` runs the
//! deterministic quadrature checks; `Full` adds the Monte Carlo criteria.

use crate::montecarlo::{simulate_avg, SimulationConfig};
use crate::order_stats::{exact_kth_pdf, ks_convergence, limit_pdf, LimitLaw, SelectionSpec};
use crate::quad::integrate_to_inf;
use crate::rng::RandomStream;
use crate::snr_pdf;
use crate::sweep::default_channel;
use crate::throughput::{
    asymptotic_avg, asymptotic_avg_at_scale, asymptotic_eff, avg_k1_closed_form,
    avg_limit_quadrature, eff_inner_expectation, eff_inner_quadrature, exact_eff_quadrature,
    QosSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Criterion 1: the average-throughput closed form equals quadrature of its
/// defining integral to 1e-8 over (k, b) in {1..5} x {0.5, 2, 10, 50, 500}.
fn avg_identity() -> CriterionResult {
    let mut worst = 0.0f64;
    let mut worst_at = (0u32, 0.0f64);
    for k in 1..=5u32 {
        for &b in &[0.5, 2.0, 10.0, 50.0, 500.0] {
            let err = match (asymptotic_avg_at_scale(k, b), avg_limit_quadrature(k, b)) {
                (Ok(cf), Ok(q)) => rel_err(cf, q),
                _ => f64::INFINITY,
            };
            if err > worst {
                worst = err;
                worst_at = (k, b);
            }
        }
    }
    CriterionResult::new(
        "avg closed form vs defining integral",
        worst <= 1e-8,
        format!(
            "worst rel err {:.3e} at k={} b={} (tol 1e-8)",
            worst, worst_at.0, worst_at.1
        ),
    )
}

/// Criterion 2: the effective-throughput inner expectation equals quadrature
/// to 1e-8 over (k, A, b) in {1..4} x {0.1, 1, 2} x {0.5, 5, 50}.
fn eff_identity() -> CriterionResult {
    let mut worst = 0.0f64;
    let mut worst_at = (0u32, 0.0f64, 0.0f64);
    for k in 1..=4u32 {
        for &a in &[0.1, 1.0, 2.0] {
            for &b in &[0.5, 5.0, 50.0] {
                let err = match (eff_inner_expectation(k, a, b), eff_inner_quadrature(k, a, b)) {
                    (Ok(cf), Ok(q)) => rel_err(cf, q),
                    _ => f64::INFINITY,
                };
                if err > worst {
                    worst = err;
                    worst_at = (k, a, b);
                }
            }
        }
    }
    CriterionResult::new(
        "eff inner expectation vs defining integral",
        worst <= 1e-8,
        format!(
            "worst rel err {:.3e} at k={} A={} b={} (tol 1e-8)",
            worst, worst_at.0, worst_at.1, worst_at.2
        ),
    )
}

/// Criterion 3: the general closed form collapses to the k=1 special case to
/// 1e-14 relative at b in {0.5, 6, 100, 5000}.
fn k1_degeneracy() -> CriterionResult {
    let mut worst = 0.0f64;
    for &b in &[0.5, 6.0, 100.0, 5000.0] {
        let err = match (asymptotic_avg_at_scale(1, b), avg_k1_closed_form(b)) {
            (Ok(full), Ok(special)) => rel_err(full, special),
            _ => f64::INFINITY,
        };
        worst = worst.max(err);
    }
    CriterionResult::new(
        "k=1 degeneracy",
        worst <= 1e-14,
        format!("worst rel err {worst:.3e} (tol 1e-14)"),
    )
}

/// Criterion 4: KS distance between scaled k-th extreme samples and the
/// limiting law shrinks in N and meets the pinned thresholds.
fn limit_convergence(seed: u64) -> CriterionResult {
    let p = default_channel(2);
    let trials = 100_000u32;
    let rng = RandomStream::from_seed(seed);
    let ks: Vec<f64> = [10u32, 100, 1000]
        .iter()
        .map(|&n| ks_convergence(SelectionSpec::new(n, 2).unwrap(), &p, trials, &rng).unwrap())
        .collect();
    let noise = 1.63 / (trials as f64).sqrt();
    let mut inversions = 0;
    let mut inversion_ok = true;
    for w in ks.windows(2) {
        if w[1] > w[0] {
            inversions += 1;
            if w[1] - w[0] > 2.0 * noise {
                inversion_ok = false;
            }
        }
    }
    let passed = ks[1] < 0.05 && ks[2] < 0.02 && inversions <= 1 && inversion_ok;
    CriterionResult::new(
        "limit law convergence (KS)",
        passed,
        format!(
            "KS(N=10)={:.4} KS(N=100)={:.4} KS(N=1000)={:.4}, thresholds 0.05/0.02, {} inversion(s)",
            ks[0], ks[1], ks[2], inversions
        ),
    )
}

/// Criterion 5: at the figure-1 parameters the asymptotic average throughput
/// sits inside the 99% Monte Carlo CI or within 2% relative, and the
/// near-degenerate (N=5, k=3) gap exceeds the (N=50, k=3) gap.
fn fig1_regime(seed: u64) -> CriterionResult {
    let p = default_channel(2);
    let cfg = SimulationConfig::new(1_000_000, seed).unwrap();
    let mut detail = String::new();
    let mut passed = true;
    for &n in &[20u32, 30, 40, 50] {
        for k in 1..=2u32 {
            let sel = SelectionSpec::new(n, k).unwrap();
            let asym = asymptotic_avg(sel, &p).unwrap().value;
            let mc = simulate_avg(sel, &p, &cfg).unwrap();
            let in_ci = (asym - mc.value).abs() <= mc.ci_halfwidth.unwrap();
            let rel = rel_err(asym, mc.value);
            if !(in_ci || rel <= 0.02) {
                passed = false;
                detail.push_str(&format!("N={n} k={k}: gap {rel:.4} outside CI; "));
            }
        }
    }
    let gap = |n: u32, k: u32| {
        let sel = SelectionSpec::new(n, k).unwrap();
        let asym = asymptotic_avg(sel, &p).unwrap().value;
        let mc = simulate_avg(sel, &p, &cfg).unwrap().value;
        rel_err(asym, mc)
    };
    let near = gap(5, 3);
    let far = gap(50, 3);
    if near <= far {
        passed = false;
    }
    detail.push_str(&format!(
        "near-degenerate gap(N=5,k=3)={near:.4} vs gap(N=50,k=3)={far:.4}"
    ));
    CriterionResult::new("figure-1 regime agreement", passed, detail)
}

/// Criterion 6: effective-throughput asymptotics match the exact quadrature
/// within 3% at the figure-3/4 parameter points, and throughput is
/// nondecreasing in Q along a 10-point sweep.
fn fig34_regime() -> CriterionResult {
    let mut passed = true;
    let mut worst = 0.0f64;
    for &(a, m, n) in &[(2.0f64, 1u32, 50u32), (1.0, 3, 50)] {
        let p = default_channel(m);
        let qos = QosSpec::new(a).unwrap();
        for k in 1..=2u32 {
            let sel = SelectionSpec::new(n, k).unwrap();
            let asym = asymptotic_eff(sel, qos, &p).unwrap().value;
            let exact = exact_eff_quadrature(sel, qos, &p).unwrap().value;
            let rel = rel_err(asym, exact);
            worst = worst.max(rel);
            if rel > 0.03 {
                passed = false;
            }
        }
    }
    // Q sweep: ρ = 1/Q_lin over 10 points, all columns nondecreasing
    let mut monotone = true;
    for &a in &[0.0, 1.0] {
        for k in 1..=2u32 {
            let sel = SelectionSpec::new(50, k).unwrap();
            let qos = QosSpec::new(a).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..10 {
                let q_db = 2.0 * i as f64;
                let p = default_channel(3)
                    .with_rho(1.0 / 10f64.powf(q_db / 10.0))
                    .unwrap();
                let v = asymptotic_eff(sel, qos, &p).unwrap().value;
                if v < prev {
                    monotone = false;
                }
                prev = v;
            }
        }
    }
    passed = passed && monotone;
    CriterionResult::new(
        "figure-3/4 regime agreement",
        passed,
        format!("worst asym-vs-quadrature rel err {worst:.4} (tol 0.03), Q-monotone={monotone}"),
    )
}

/// Criterion 7: every implemented density integrates to 1 within 1e-8.
fn normalization() -> CriterionResult {
    let mut worst = 0.0f64;
    for m in 1..=3u32 {
        let p = default_channel(m);
        let total = integrate_to_inf(|z| snr_pdf(z, &p), 0.0, 1e-11, 1e-10).unwrap_or(f64::NAN);
        worst = worst.max((total - 1.0).abs());
    }
    let p = default_channel(2);
    for &(n, k) in &[(5u32, 1u32), (5, 3), (20, 2)] {
        let sel = SelectionSpec::new(n, k).unwrap();
        let total =
            integrate_to_inf(|z| exact_kth_pdf(z, sel, &p), 0.0, 1e-11, 1e-10).unwrap_or(f64::NAN);
        worst = worst.max((total - 1.0).abs());
    }
    for k in 1..=6u32 {
        let law = LimitLaw::new(k, 1.0);
        let total =
            integrate_to_inf(|z| limit_pdf(z, &law), 0.0, 1e-11, 1e-10).unwrap_or(f64::NAN);
        worst = worst.max((total - 1.0).abs());
    }
    CriterionResult::new(
        "density normalization",
        worst <= 1e-8,
        format!("worst |∫pdf - 1| = {worst:.3e} (tol 1e-8)"),
    )
}

/// Criterion 8: monotonicity of the asymptotic laws over the default grid —
/// decreasing in k, increasing in N, eff <= avg, eff decreasing in A.
fn ordering() -> CriterionResult {
    let p = default_channel(2);
    let ns = [10u32, 20, 50];
    let ks = [1u32, 2, 3];
    let a_grid = [0.5, 1.0, 2.0];
    let mut violations = 0u32;

    let avg = |n: u32, k: u32| {
        asymptotic_avg(SelectionSpec::new(n, k).unwrap(), &p)
            .unwrap()
            .value
    };
    let eff = |n: u32, k: u32, a: f64| {
        asymptotic_eff(
            SelectionSpec::new(n, k).unwrap(),
            QosSpec::new(a).unwrap(),
            &p,
        )
        .unwrap()
        .value
    };

    for &n in &ns {
        for w in ks.windows(2) {
            if avg(n, w[1]) >= avg(n, w[0]) {
                violations += 1;
            }
            for &a in &a_grid {
                if eff(n, w[1], a) >= eff(n, w[0], a) {
                    violations += 1;
                }
            }
        }
    }
    for &k in &ks {
        for w in ns.windows(2) {
            if avg(w[1], k) <= avg(w[0], k) {
                violations += 1;
            }
            for &a in &a_grid {
                if eff(w[1], k, a) <= eff(w[0], k, a) {
                    violations += 1;
                }
            }
        }
    }
    for &n in &ns {
        for &k in &ks {
            let bar = avg(n, k);
            let mut prev = bar;
            for &a in &a_grid {
                let e = eff(n, k, a);
                if e > bar {
                    violations += 1;
                }
                if e >= prev && a > a_grid[0] {
                    violations += 1;
                }
                prev = e;
            }
        }
    }
    CriterionResult::new(
        "ordering suite",
        violations == 0,
        format!("{violations} violation(s) over the default grid"),
    )
}

/// Criterion 9: Monte Carlo estimates are bit-identical under reruns with the
/// same seed and under different chunking hints.
fn determinism(seed: u64) -> CriterionResult {
    let p = default_channel(2);
    let sel = SelectionSpec::new(20, 2).unwrap();
    let cfg = SimulationConfig::new(100_000, seed).unwrap();
    let a = simulate_avg(sel, &p, &cfg.with_chunks(1)).unwrap();
    let b = simulate_avg(sel, &p, &cfg.with_chunks(32)).unwrap();
    let c = simulate_avg(sel, &p, &cfg).unwrap();
    let passed = a.value == b.value
        && b.value == c.value
        && a.ci_halfwidth == b.ci_halfwidth
        && b.ci_halfwidth == c.ci_halfwidth;
    CriterionResult::new(
        "simulation determinism",
        passed,
        format!("estimate {:.12} reproduced across reruns and chunkings", a.value),
    )
}

/// Run the suite. `Fast` covers the deterministic checks; `Full` adds the
/// Monte Carlo criteria. Results are in fixed order and depend only on seed.
pub fn run(level: Level, seed: u64) -> Vec<CriterionResult> {
    let mut out = vec![
        avg_identity(),
        eff_identity(),
        k1_degeneracy(),
        normalization(),
        ordering(),
        fig34_regime(),
    ];
    if level == Level::Full {
        out.push(limit_convergence(seed));
        out.push(fig1_regime(seed));
        out.push(determinism(seed));
    }
    out
}

/// Render one pass/fail line per criterion plus a summary footer. Contains
/// no timestamps, so reruns with the same seed are byte-identical.
pub fn render_report(results: &[CriterionResult], seed: u64) -> String {
    let mut s = format!("validation report (seed {seed})\n");
    for r in results {
        s.push_str(&format!(
            "{} {} — {}\n",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        ));
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    s.push_str(&format!(
        "{}/{} criteria passed\n",
        results.len() - failed,
        results.len()
    ));
    s
}
