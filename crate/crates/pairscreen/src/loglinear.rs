//! Log-likelihood scoring of three-way tables: the saturated fit, the
//! homogeneous-association fit via iterative proportional fitting, and the
//! Kirkwood superposition approximation that upper-bounds the increment.
//!
//! All fits are reported through the log-likelihood kernel
//! `L(mu) = sum n_ijk ln(mu_ijk) - sum mu_ijk` (with `0 ln 0 := 0`). The
//! saturated fit maximizes the kernel outright (`mu = n`), so screening
//! increments are formed as `kernel_saturated - kernel_model`, which is
//! nonnegative for every nested model and equals half the G-squared deviance.
//! Zero cells take the standard conventions (`0 ln 0 = 0`, `0/0 = 0` inside
//! proportional-fitting updates); an optional pseudo-count can be added to
//! every cell instead.

use crate::contingency::ContingencyTable3;

/// Convergence controls for iterative proportional fitting.
#[derive(Debug, Clone, Copy)]
pub struct IpfOptions {
    /// Maximum absolute gap between fitted and observed two-way margins.
    pub tol: f64,
    pub max_cycles: usize,
}

impl Default for IpfOptions {
    fn default() -> Self {
        IpfOptions {
            tol: 1e-8,
            max_cycles: 100,
        }
    }
}

/// A fitted log-linear model on a three-way table.
#[derive(Debug, Clone)]
pub struct LogLinearFit {
    /// Fitted expected counts, same layout as the table.
    pub mu: Vec<f64>,
    pub dims: (usize, usize, usize),
    /// `sum n ln(mu) - sum mu` at the fit.
    pub loglik_kernel: f64,
    pub cycles: usize,
    /// False when the cycle budget ran out; the fit is still usable and the
    /// remaining margin gap is reported.
    pub converged: bool,
    pub max_margin_gap: f64,
}

/// Options for [`score_pair`].
#[derive(Debug, Clone, Copy)]
pub struct ScoreOptions {
    pub ipf: IpfOptions,
    /// Also evaluate the Kirkwood bound and attach it to the score.
    pub with_ksa: bool,
    /// Added to every cell before fitting when positive.
    pub pseudo_count: f64,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            ipf: IpfOptions::default(),
            with_ksa: false,
            pseudo_count: 0.0,
        }
    }
}

/// Likelihood-increment score for one pair's table.
#[derive(Debug, Clone, Copy)]
pub struct PairScore {
    /// Kernel gap between the saturated and homogeneous-association fits;
    /// clamped at zero against convergence-level noise.
    pub increment: f64,
    /// `2 * increment`: the G-squared deviance, referred to chi-squared.
    pub statistic: f64,
    /// `(I-1)(J-1)(K-1)` over levels that actually occur, at least 1.
    pub df: u32,
    /// Kirkwood upper bound on the increment, when requested.
    pub ksa_bound: Option<f64>,
    pub converged: bool,
    pub cycles: usize,
}

fn float_counts(t: &ContingencyTable3, pseudo_count: f64) -> Vec<f64> {
    t.counts()
        .iter()
        .map(|&n| n as f64 + pseudo_count)
        .collect()
}

/// `sum c ln c - sum c` with `0 ln 0 := 0`.
fn saturated_kernel(counts: &[f64]) -> f64 {
    counts
        .iter()
        .map(|&c| if c > 0.0 { c * c.ln() - c } else { 0.0 })
        .sum()
}

/// `sum n ln(mu) - sum mu` with `0 ln 0 := 0`.
fn kernel_at(counts: &[f64], mu: &[f64]) -> f64 {
    counts
        .iter()
        .zip(mu)
        .map(|(&n, &m)| if n > 0.0 { n * m.ln() - m } else { -m })
        .sum()
}

struct Margins {
    ij: Vec<f64>,
    ik: Vec<f64>,
    jk: Vec<f64>,
}

fn two_way_margins(counts: &[f64], dims: (usize, usize, usize)) -> Margins {
    let (i_dim, j_dim, k_dim) = dims;
    let mut m = Margins {
        ij: vec![0.0; i_dim * j_dim],
        ik: vec![0.0; i_dim * k_dim],
        jk: vec![0.0; j_dim * k_dim],
    };
    for a in 0..i_dim {
        for b in 0..j_dim {
            for c in 0..k_dim {
                let v = counts[(a * j_dim + b) * k_dim + c];
                m.ij[a * j_dim + b] += v;
                m.ik[a * k_dim + c] += v;
                m.jk[b * k_dim + c] += v;
            }
        }
    }
    m
}

fn max_margin_gap(mu: &[f64], target: &Margins, dims: (usize, usize, usize)) -> f64 {
    let fitted = two_way_margins(mu, dims);
    let mut gap = 0.0f64;
    for (f, t) in fitted.ij.iter().zip(&target.ij) {
        gap = gap.max((f - t).abs());
    }
    for (f, t) in fitted.ik.iter().zip(&target.ik) {
        gap = gap.max((f - t).abs());
    }
    for (f, t) in fitted.jk.iter().zip(&target.jk) {
        gap = gap.max((f - t).abs());
    }
    gap
}

/// One IPF run on float counts. `init` is the starting cell value table.
fn ipf_core(
    counts: &[f64],
    dims: (usize, usize, usize),
    init: &[f64],
    opts: &IpfOptions,
) -> LogLinearFit {
    let (i_dim, j_dim, k_dim) = dims;
    let target = two_way_margins(counts, dims);
    let mut mu = init.to_vec();

    let mut cycles = 0usize;
    let mut gap = max_margin_gap(&mu, &target, dims);
    let mut converged = gap <= opts.tol;
    while !converged && cycles < opts.max_cycles {
        // Step 1: match the ij margins (scale each (a, b) tube over k).
        for a in 0..i_dim {
            for b in 0..j_dim {
                let base = (a * j_dim + b) * k_dim;
                let fitted: f64 = mu[base..base + k_dim].iter().sum();
                let factor = if fitted > 0.0 {
                    target.ij[a * j_dim + b] / fitted
                } else {
                    0.0
                };
                for c in 0..k_dim {
                    mu[base + c] *= factor;
                }
            }
        }
        // Step 2: match the ik margins.
        for a in 0..i_dim {
            for c in 0..k_dim {
                let mut fitted = 0.0;
                for b in 0..j_dim {
                    fitted += mu[(a * j_dim + b) * k_dim + c];
                }
                let factor = if fitted > 0.0 {
                    target.ik[a * k_dim + c] / fitted
                } else {
                    0.0
                };
                for b in 0..j_dim {
                    mu[(a * j_dim + b) * k_dim + c] *= factor;
                }
            }
        }
        // Step 3: match the jk margins.
        for b in 0..j_dim {
            for c in 0..k_dim {
                let mut fitted = 0.0;
                for a in 0..i_dim {
                    fitted += mu[(a * j_dim + b) * k_dim + c];
                }
                let factor = if fitted > 0.0 {
                    target.jk[b * k_dim + c] / fitted
                } else {
                    0.0
                };
                for a in 0..i_dim {
                    mu[(a * j_dim + b) * k_dim + c] *= factor;
                }
            }
        }
        cycles += 1;
        gap = max_margin_gap(&mu, &target, dims);
        converged = gap <= opts.tol;
    }

    let loglik_kernel = kernel_at(counts, &mu);
    LogLinearFit {
        mu,
        dims,
        loglik_kernel,
        cycles,
        converged,
        max_margin_gap: gap,
    }
}

fn ksa_mu_core(counts: &[f64], dims: (usize, usize, usize)) -> Vec<f64> {
    let (i_dim, j_dim, k_dim) = dims;
    let m = two_way_margins(counts, dims);
    let mut i_margin = vec![0.0; i_dim];
    let mut j_margin = vec![0.0; j_dim];
    let mut k_margin = vec![0.0; k_dim];
    for a in 0..i_dim {
        for b in 0..j_dim {
            i_margin[a] += m.ij[a * j_dim + b];
        }
    }
    for b in 0..j_dim {
        for c in 0..k_dim {
            j_margin[b] += m.jk[b * k_dim + c];
        }
    }
    for a in 0..i_dim {
        for c in 0..k_dim {
            k_margin[c] += m.ik[a * k_dim + c];
        }
    }
    let total: f64 = counts.iter().sum();

    // The probability ratio pi_ij pi_ik pi_jk / (pi_i pi_j pi_k) reduces to
    // the same ratio of counts; cells with a zero one-way margin contribute 0.
    let mut ratio = vec![0.0; counts.len()];
    let mut eta = 0.0;
    for a in 0..i_dim {
        for b in 0..j_dim {
            for c in 0..k_dim {
                let denom = i_margin[a] * j_margin[b] * k_margin[c];
                if denom > 0.0 {
                    let num =
                        m.ij[a * j_dim + b] * m.ik[a * k_dim + c] * m.jk[b * k_dim + c];
                    let r = num / denom;
                    ratio[(a * j_dim + b) * k_dim + c] = r;
                    eta += r;
                }
            }
        }
    }
    if eta > 0.0 {
        for r in ratio.iter_mut() {
            *r *= total / eta;
        }
    }
    ratio
}

/// Kernel of the saturated fit (`mu = n`): `sum n ln n - sum n`.
pub fn saturated_loglik(t: &ContingencyTable3) -> f64 {
    saturated_kernel(&float_counts(t, 0.0))
}

/// Homogeneous-association fit by iterative proportional fitting from the
/// uniform start `mu = n / (IJK)`.
pub fn ipf_fit(t: &ContingencyTable3, opts: &IpfOptions) -> LogLinearFit {
    let counts = float_counts(t, 0.0);
    let dims = t.dims();
    let total: f64 = counts.iter().sum();
    let init = vec![total / counts.len() as f64; counts.len()];
    ipf_core(&counts, dims, &init, opts)
}

/// Kirkwood superposition estimate of the expected counts, normalized so
/// they sum to n.
pub fn ksa_mu(t: &ContingencyTable3) -> Vec<f64> {
    ksa_mu_core(&float_counts(t, 0.0), t.dims())
}

/// Kernel evaluated at the Kirkwood superposition estimate.
pub fn ksa_loglik(t: &ContingencyTable3) -> f64 {
    let counts = float_counts(t, 0.0);
    let mu = ksa_mu_core(&counts, t.dims());
    kernel_at(&counts, &mu)
}

/// Degrees of freedom `(I-1)(J-1)(K-1)` using only levels that occur in the
/// table, floored at 1.
pub fn effective_df(t: &ContingencyTable3) -> u32 {
    let (i_dim, j_dim, k_dim) = t.dims();
    let i_eff = (0..i_dim).filter(|&a| t.margin_i(a) > 0).count();
    let j_eff = (0..j_dim).filter(|&b| t.margin_j(b) > 0).count();
    let k_eff = (0..k_dim).filter(|&c| t.margin_k(c) > 0).count();
    let df = i_eff.saturating_sub(1) * j_eff.saturating_sub(1) * k_eff.saturating_sub(1);
    df.max(1) as u32
}

/// Scores one pair's table: the likelihood increment between the saturated
/// and homogeneous-association fits, its deviance statistic, and optionally
/// the Kirkwood upper bound.
pub fn score_pair(t: &ContingencyTable3, opts: &ScoreOptions) -> PairScore {
    let counts = float_counts(t, opts.pseudo_count.max(0.0));
    let dims = t.dims();
    let sat = saturated_kernel(&counts);

    let total: f64 = counts.iter().sum();
    let init = vec![total / counts.len() as f64; counts.len()];
    let fit = ipf_core(&counts, dims, &init, &opts.ipf);
    let increment = (sat - fit.loglik_kernel).max(0.0);

    let ksa_bound = if opts.with_ksa {
        let mu = ksa_mu_core(&counts, dims);
        Some((sat - kernel_at(&counts, &mu)).max(0.0))
    } else {
        None
    };

    PairScore {
        increment,
        statistic: 2.0 * increment,
        df: effective_df(t),
        ksa_bound,
        converged: fit.converged,
        cycles: fit.cycles,
    }
}

/// Saturated-minus-KSA kernel gap: the prunable upper bound on the increment,
/// on the same scale as [`PairScore::increment`].
pub fn ksa_increment(t: &ContingencyTable3, pseudo_count: f64) -> f64 {
    let counts = float_counts(t, pseudo_count.max(0.0));
    let sat = saturated_kernel(&counts);
    let mu = ksa_mu_core(&counts, t.dims());
    (sat - kernel_at(&counts, &mu)).max(0.0)
}
