//! Numerical checks of the efficiency loss from median-split discretization
//! of bivariate normal data.
//!
//! For a bivariate normal pair with correlation `rho`, the correlation of the
//! two population-median-split indicators equals the Kendall rank correlation
//! `tau = (2/pi) asin(rho)` — [`arcsine_check`] verifies that identity on
//! pooled samples. The variance analysis behind the efficiency-loss curve
//! concerns the concordance (Kendall tau-a) estimator of the same `tau`: with
//! `rho_tau_hat = sin(pi/2 * tau_hat)`,
//!
//! `Var(rho_tau_hat) / Var(rho_s_hat)
//!     = 4 * (1/9 - ((2/pi) asin(rho/2))^2) * (pi^2/4) / (1 - rho^2)`
//!
//! against the sample Pearson correlation `rho_s_hat`, a curve that grows
//! from `pi^2/9 ~ 1.0966` at `rho = 0` toward `2 sqrt(3) pi / 9 ~ 1.2092` as
//! `|rho| -> 1`. The indicator correlation shares the population value of
//! `tau` but not this variance (its sampling noise is larger), so
//! [`efficiency_ratio`] estimates `tau_hat` by pairwise concordance.
//!
//! This module splits at the *population* median (zero), matching the
//! analysis setting; empirical-median splitting lives in [`crate::discretize`].

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Lower bound of the variance ratio, attained at independence.
pub fn ratio_lower_bound() -> f64 {
    PI * PI / 9.0
}

/// Upper bound of the variance ratio, approached at perfect correlation.
pub fn ratio_upper_bound() -> f64 {
    2.0 * 3.0f64.sqrt() * PI / 9.0
}

/// The analytic variance-ratio curve.
pub fn theoretical_efficiency_ratio(rho: f64) -> f64 {
    assert!(rho.abs() < 1.0, "the ratio is defined for |rho| < 1");
    let tau_var = 4.0 * (1.0 / 9.0 - ((2.0 / PI) * (rho / 2.0).asin()).powi(2));
    tau_var * (PI * PI / 4.0) / (1.0 - rho * rho)
}

/// One row of the arcsine-relation check.
#[derive(Debug, Clone, Copy)]
pub struct ArcsineRow {
    pub rho: f64,
    /// `(2/pi) asin(rho)`.
    pub tau_theory: f64,
    /// Pooled indicator correlation over `n * reps` draws.
    pub indicator_corr: f64,
    pub abs_error: f64,
}

fn sample_pair(rng: &mut ChaCha8Rng, rho: f64) -> (f64, f64) {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    (z1, rho * z1 + (1.0 - rho * rho).sqrt() * z2)
}

/// Pearson correlation of two binary indicator margins from joint counts.
fn indicator_corr_from_counts(n11: u64, n1x: u64, nx1: u64, total: u64) -> f64 {
    let n = total as f64;
    let p11 = n11 as f64 / n;
    let px = n1x as f64 / n;
    let py = nx1 as f64 / n;
    let denom = (px * (1.0 - px) * py * (1.0 - py)).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    (p11 - px * py) / denom
}

/// Samples `n * reps` bivariate normal pairs, median-splits both margins at
/// the population median (zero), and compares the pooled indicator
/// correlation against `(2/pi) asin(rho)`. Accepts `|rho| <= 1`.
pub fn arcsine_check(rho: f64, n: usize, reps: usize, seed: u64) -> ArcsineRow {
    assert!(rho.abs() <= 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = (n * reps) as u64;
    let mut n11 = 0u64;
    let mut n1x = 0u64;
    let mut nx1 = 0u64;
    for _ in 0..n * reps {
        let (x, y) = sample_pair(&mut rng, rho);
        let a = x > 0.0;
        let b = y > 0.0;
        n11 += u64::from(a && b);
        n1x += u64::from(a);
        nx1 += u64::from(b);
    }
    let indicator_corr = indicator_corr_from_counts(n11, n1x, nx1, total);
    let tau_theory = (2.0 / PI) * rho.asin();
    ArcsineRow {
        rho,
        tau_theory,
        indicator_corr,
        abs_error: (indicator_corr - tau_theory).abs(),
    }
}

/// Kendall tau-a by pairwise concordance: the U-statistic
/// `4 * mean(I(x2 > x1) I(y2 > y1)) - 1` over unordered sample pairs.
pub fn kendall_tau(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    assert!(n >= 2 && ys.len() == n);
    let mut concordant_minus_discordant = 0i64;
    for a in 0..n {
        for b in a + 1..n {
            let s = (xs[a] - xs[b]) * (ys[a] - ys[b]);
            if s > 0.0 {
                concordant_minus_discordant += 1;
            } else if s < 0.0 {
                concordant_minus_discordant -= 1;
            }
        }
    }
    concordant_minus_discordant as f64 / (n * (n - 1) / 2) as f64
}

/// Per-replication estimates of `rho` by the two routes: the sine-transformed
/// concordance estimator and the sample Pearson correlation.
fn estimate_once(rng: &mut ChaCha8Rng, rho: f64, n: usize) -> (f64, f64) {
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, y) = sample_pair(rng, rho);
        xs.push(x);
        ys.push(y);
    }
    let rho_tau = (PI / 2.0 * kendall_tau(&xs, &ys)).sin();

    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    let rho_s = cov / (vx.sqrt() * vy.sqrt());
    (rho_tau, rho_s)
}

/// Monte-Carlo estimate of `Var(rho_tau_hat) / Var(rho_s_hat)`: both
/// estimators are computed on the same samples, rep by rep, and their
/// variances taken across replications.
pub fn efficiency_ratio(rho: f64, n: usize, reps: usize, seed: u64) -> f64 {
    assert!(rho.abs() < 1.0);
    assert!(reps >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tau_ests = Vec::with_capacity(reps);
    let mut s_ests = Vec::with_capacity(reps);
    for _ in 0..reps {
        let (rho_tau, rho_s) = estimate_once(&mut rng, rho, n);
        tau_ests.push(rho_tau);
        s_ests.push(rho_s);
    }
    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
    };
    var(&tau_ests) / var(&s_ests)
}

/// One row of the full efficiency-loss report.
#[derive(Debug, Clone, Copy)]
pub struct EffLossRow {
    pub rho: f64,
    pub tau_theory: f64,
    pub indicator_corr: f64,
    /// The discretized estimate of rho itself: `sin(pi/2 * indicator_corr)`.
    pub rho_tau: f64,
    pub variance_ratio: f64,
    pub variance_ratio_theory: f64,
}

/// The grid report behind the `check-efficiency` command.
#[derive(Debug, Clone)]
pub struct EffLossReport {
    pub n: usize,
    pub reps: usize,
    pub rows: Vec<EffLossRow>,
}

/// Runs the arcsine and variance-ratio checks over a grid of correlations;
/// grid points are independent and evaluated in parallel.
pub fn efficiency_report(grid: &[f64], n: usize, reps: usize, seed: u64) -> EffLossReport {
    let rows: Vec<EffLossRow> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, &rho)| {
            let row_seed = seed.wrapping_add(1 + idx as u64);
            let arc = arcsine_check(rho, n, reps, row_seed);
            EffLossRow {
                rho,
                tau_theory: arc.tau_theory,
                indicator_corr: arc.indicator_corr,
                rho_tau: (PI / 2.0 * arc.indicator_corr).sin(),
                variance_ratio: efficiency_ratio(rho, n, reps, row_seed ^ 0xA5A5_A5A5),
                variance_ratio_theory: theoretical_efficiency_ratio(rho),
            }
        })
        .collect();
    EffLossReport { n, reps, rows }
}
