//! Per-pair marginal GLM fits and the exact likelihood-increment score.
//!
//! For a pair (i, j) the 3-parameter model uses (1, X_i, X_j) and the
//! 4-parameter model adds X_i * X_j. Fits minimize the empirical average of
//! `l(theta, y) = b(theta) - theta * y` under the canonical link, dropping
//! the `c(y)` constant and the dispersion parameter:
//!
//! * Gaussian (`b(theta) = theta^2 / 2`): closed-form least squares via the
//!   normal equations;
//! * Binomial (`b(theta) = ln(1 + e^theta)`): Newton/IRLS with step-halving,
//!   warm-started from the 3-parameter fit.
//!
//! The score is the per-sample drop in the minimized objective when the
//! interaction column enters; nested-model monotonicity keeps it >= 0.

use crate::dataset::{Dataset, Family, PairIndex};
use crate::error::{Error, Result};

/// Coefficient cap signalling logistic separation: a fit pushed to the cap
/// is returned (the pair is maximally interesting) but marked unconverged.
pub const BETA_CAP: f64 = 30.0;
const IRLS_MAX_ITER: usize = 50;
const IRLS_BETA_TOL: f64 = 1e-8;
const IRLS_SCORE_TOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 30;

/// One fitted marginal model.
#[derive(Debug, Clone)]
pub struct MarginalFit {
    /// Intercept, main effects, then the interaction coefficient if present.
    pub beta: Vec<f64>,
    /// `mean(b(theta_hat) - theta_hat * y)`.
    pub neg_loglik: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Cholesky solve of a small symmetric positive-definite system, in place.
/// Returns None when a pivot collapses (collinear design).
fn cholesky_solve(a: &mut [[f64; 4]; 4], b: &mut [f64; 4], dim: usize) -> Option<()> {
    let max_diag = (0..dim).map(|i| a[i][i].abs()).fold(0.0f64, f64::max);
    let floor = max_diag * 1e-12;
    for i in 0..dim {
        for j in 0..i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / a[j][j];
        }
        let mut d = a[i][i];
        for k in 0..i {
            d -= a[i][k] * a[i][k];
        }
        if !d.is_finite() || d <= floor {
            return None;
        }
        a[i][i] = d.sqrt();
    }
    // Forward then backward substitution.
    for i in 0..dim {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i][k] * b[k];
        }
        b[i] = s / a[i][i];
    }
    for i in (0..dim).rev() {
        let mut s = b[i];
        for k in i + 1..dim {
            s -= a[k][i] * b[k];
        }
        b[i] = s / a[i][i];
    }
    Some(())
}

#[inline]
fn design_row(xi: f64, xj: f64, dim: usize) -> [f64; 4] {
    [1.0, xi, xj, if dim == 4 { xi * xj } else { 0.0 }]
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` without overflow.
#[inline]
fn log1p_exp(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn gaussian_fit(xi: &[f64], xj: &[f64], y: &[f64], dim: usize, pair: PairIndex) -> Result<MarginalFit> {
    let n = y.len();
    let mut gram = [[0.0f64; 4]; 4];
    let mut rhs = [0.0f64; 4];
    for s in 0..n {
        let row = design_row(xi[s], xj[s], dim);
        for a in 0..dim {
            for b in 0..=a {
                gram[a][b] += row[a] * row[b];
            }
            rhs[a] += row[a] * y[s];
        }
    }
    for a in 0..dim {
        for b in a + 1..dim {
            gram[a][b] = gram[b][a];
        }
    }
    cholesky_solve(&mut gram, &mut rhs, dim)
        .ok_or(Error::Collinear { i: pair.i, j: pair.j })?;
    let beta = rhs;

    let mut nll = 0.0;
    for s in 0..n {
        let row = design_row(xi[s], xj[s], dim);
        let theta: f64 = (0..dim).map(|a| beta[a] * row[a]).sum();
        nll += 0.5 * theta * theta - theta * y[s];
    }
    Ok(MarginalFit {
        beta: beta[..dim].to_vec(),
        neg_loglik: nll / n as f64,
        iterations: 0,
        converged: true,
    })
}

fn logistic_nll(xi: &[f64], xj: &[f64], y: &[f64], beta: &[f64; 4], dim: usize) -> f64 {
    let n = y.len();
    let mut nll = 0.0;
    for s in 0..n {
        let row = design_row(xi[s], xj[s], dim);
        let theta: f64 = (0..dim).map(|a| beta[a] * row[a]).sum();
        nll += log1p_exp(theta) - theta * y[s];
    }
    nll / n as f64
}

fn logistic_fit(
    xi: &[f64],
    xj: &[f64],
    y: &[f64],
    dim: usize,
    warm: Option<&[f64]>,
    pair: PairIndex,
) -> Result<MarginalFit> {
    let n = y.len();
    let nf = n as f64;
    let mut beta = [0.0f64; 4];
    if let Some(w) = warm {
        beta[..w.len()].copy_from_slice(w);
    }
    let mut nll = logistic_nll(xi, xj, y, &beta, dim);
    let mut capped = false;
    let mut converged = false;
    let mut iterations = 0usize;

    for it in 1..=IRLS_MAX_ITER {
        iterations = it;
        let mut hess = [[0.0f64; 4]; 4];
        let mut grad = [0.0f64; 4];
        for s in 0..n {
            let row = design_row(xi[s], xj[s], dim);
            let theta: f64 = (0..dim).map(|a| beta[a] * row[a]).sum();
            let p = sigmoid(theta);
            let w = p * (1.0 - p);
            let r = p - y[s];
            for a in 0..dim {
                grad[a] += row[a] * r;
                for b in 0..=a {
                    hess[a][b] += w * row[a] * row[b];
                }
            }
        }
        for a in 0..dim {
            grad[a] /= nf;
            for b in 0..=a {
                hess[a][b] /= nf;
                hess[b][a] = hess[a][b];
            }
        }

        let grad_norm = grad[..dim].iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_norm <= IRLS_SCORE_TOL {
            converged = true;
            break;
        }

        let mut step = grad;
        if cholesky_solve(&mut hess, &mut step, dim).is_none() {
            // Under separation the weights collapse and the Hessian can go
            // singular even for a full-rank design; a collinear design fails
            // on the very first iteration where W is constant.
            if it == 1 {
                return Err(Error::Collinear { i: pair.i, j: pair.j });
            }
            capped = true;
            break;
        }

        // Newton step with halving until the objective stops increasing.
        let mut scale = 1.0f64;
        let mut candidate = beta;
        let mut cand_nll;
        let mut halvings = 0usize;
        loop {
            for a in 0..dim {
                candidate[a] = beta[a] - scale * step[a];
            }
            cand_nll = logistic_nll(xi, xj, y, &candidate, dim);
            if cand_nll <= nll + 1e-12 || halvings >= MAX_HALVINGS {
                break;
            }
            scale *= 0.5;
            halvings += 1;
        }

        let mut clipped = false;
        for c in candidate.iter_mut().take(dim) {
            if c.abs() > BETA_CAP {
                *c = c.clamp(-BETA_CAP, BETA_CAP);
                clipped = true;
            }
        }
        if clipped {
            capped = true;
            cand_nll = logistic_nll(xi, xj, y, &candidate, dim);
        }

        let delta = (0..dim)
            .map(|a| (candidate[a] - beta[a]).abs())
            .fold(0.0f64, f64::max);
        beta = candidate;
        nll = cand_nll;
        if delta <= IRLS_BETA_TOL {
            converged = true;
            break;
        }
    }

    Ok(MarginalFit {
        beta: beta[..dim].to_vec(),
        neg_loglik: nll,
        iterations,
        converged: converged && !capped,
    })
}

/// Fits the marginal model for one pair, with or without the interaction
/// column. The 4-parameter logistic fit is warm-started from the
/// 3-parameter one.
pub fn fit_marginal(ds: &Dataset, pair: PairIndex, with_interaction: bool) -> Result<MarginalFit> {
    let xi = ds.column(pair.i);
    let xj = ds.column(pair.j);
    let y = ds.y();
    let dim = if with_interaction { 4 } else { 3 };
    match ds.family() {
        Family::Gaussian => gaussian_fit(xi, xj, y, dim, pair),
        Family::Binomial => {
            if with_interaction {
                let base = logistic_fit(xi, xj, y, 3, None, pair)?;
                logistic_fit(xi, xj, y, 4, Some(&base.beta), pair)
            } else {
                logistic_fit(xi, xj, y, 3, None, pair)
            }
        }
    }
}

/// Both marginal fits at once; spares the duplicate 3-parameter solve that
/// [`fit_marginal`] would repeat during a sweep.
pub fn fit_pair_models(ds: &Dataset, pair: PairIndex) -> Result<(MarginalFit, MarginalFit)> {
    let xi = ds.column(pair.i);
    let xj = ds.column(pair.j);
    let y = ds.y();
    match ds.family() {
        Family::Gaussian => {
            let fit3 = gaussian_fit(xi, xj, y, 3, pair)?;
            let fit4 = gaussian_fit(xi, xj, y, 4, pair)?;
            Ok((fit3, fit4))
        }
        Family::Binomial => {
            let fit3 = logistic_fit(xi, xj, y, 3, None, pair)?;
            let fit4 = logistic_fit(xi, xj, y, 4, Some(&fit3.beta), pair)?;
            Ok((fit3, fit4))
        }
    }
}

/// The SSI score: the empirical likelihood increment from adding the
/// interaction column, clamped at zero against solver noise.
pub fn ssi_score(ds: &Dataset, pair: PairIndex) -> Result<f64> {
    let (fit3, fit4) = fit_pair_models(ds, pair)?;
    Ok((fit3.neg_loglik - fit4.neg_loglik).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian_dataset(xi: Vec<f64>, xj: Vec<f64>, y: Vec<f64>) -> Dataset {
        Dataset::from_columns(vec![xi, xj], y, Family::Gaussian, None).unwrap()
    }

    /// Gauss-Jordan inverse of the normal matrix: an independent route to
    /// the least-squares solution for cross-checking the Cholesky path.
    fn normal_equation_oracle(xi: &[f64], xj: &[f64], y: &[f64], dim: usize) -> Vec<f64> {
        let n = y.len();
        let mut g = vec![vec![0.0f64; dim]; dim];
        let mut v = vec![0.0f64; dim];
        for s in 0..n {
            let row = [1.0, xi[s], xj[s], xi[s] * xj[s]];
            for a in 0..dim {
                for b in 0..dim {
                    g[a][b] += row[a] * row[b];
                }
                v[a] += row[a] * y[s];
            }
        }
        // Invert g by Gauss-Jordan with partial pivoting.
        let mut aug: Vec<Vec<f64>> = (0..dim)
            .map(|r| {
                let mut row = g[r].clone();
                row.extend((0..dim).map(|c| f64::from(u8::from(c == r))));
                row
            })
            .collect();
        for col in 0..dim {
            let pivot = (col..dim)
                .max_by(|&a, &b| aug[a][col].abs().partial_cmp(&aug[b][col].abs()).unwrap())
                .unwrap();
            aug.swap(col, pivot);
            let d = aug[col][col];
            for c in 0..2 * dim {
                aug[col][c] /= d;
            }
            for r in 0..dim {
                if r != col {
                    let f = aug[r][col];
                    for c in 0..2 * dim {
                        aug[r][c] -= f * aug[col][c];
                    }
                }
            }
        }
        (0..dim)
            .map(|r| (0..dim).map(|c| aug[r][dim + c] * v[c]).sum())
            .collect()
    }

    fn rss(xi: &[f64], xj: &[f64], y: &[f64], beta: &[f64]) -> f64 {
        let dim = beta.len();
        y.iter()
            .enumerate()
            .map(|(s, &ys)| {
                let row = [1.0, xi[s], xj[s], xi[s] * xj[s]];
                let fitted: f64 = (0..dim).map(|a| beta[a] * row[a]).sum();
                (ys - fitted) * (ys - fitted)
            })
            .sum()
    }

    #[test]
    fn noise_free_interaction_is_interpolated() {
        let xi = vec![0.5, -1.2, 2.0, 0.3, -0.7, 1.5, -2.1, 0.9];
        let xj = vec![1.0, 0.4, -0.6, -1.5, 2.2, 0.1, 0.8, -0.9];
        let y: Vec<f64> = xi
            .iter()
            .zip(&xj)
            .map(|(&a, &b)| 1.0 + 2.0 * a - b + 3.0 * a * b)
            .collect();
        let ds = gaussian_dataset(xi, xj, y);
        let fit = fit_marginal(&ds, PairIndex::new(0, 1), true).unwrap();
        let expected = [1.0, 2.0, -1.0, 3.0];
        for (b, e) in fit.beta.iter().zip(&expected) {
            assert_abs_diff_eq!(b, e, epsilon = 1e-8);
        }
    }

    #[test]
    fn gaussian_beta_matches_second_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..25 {
            let n = 20;
            let xi: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let xj: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let ds = gaussian_dataset(xi.clone(), xj.clone(), y.clone());
            for dim in [3usize, 4] {
                let fit = fit_marginal(&ds, PairIndex::new(0, 1), dim == 4).unwrap();
                let oracle = normal_equation_oracle(&xi, &xj, &y, dim);
                for (b, e) in fit.beta.iter().zip(&oracle) {
                    assert_abs_diff_eq!(b, e, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn gaussian_score_equals_rss_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..25 {
            let n = 40;
            let xi: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let xj: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let y: Vec<f64> = xi
                .iter()
                .zip(&xj)
                .map(|(&a, &b)| 0.3 * a + 0.8 * a * b + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let ds = gaussian_dataset(xi.clone(), xj.clone(), y.clone());
            let pair = PairIndex::new(0, 1);
            let score = ssi_score(&ds, pair).unwrap();
            let (fit3, fit4) = fit_pair_models(&ds, pair).unwrap();
            let expected =
                (rss(&xi, &xj, &y, &fit3.beta) - rss(&xi, &xj, &y, &fit4.beta)) / (2.0 * n as f64);
            assert_abs_diff_eq!(score, expected, epsilon = 1e-10);
            assert!(fit4.neg_loglik <= fit3.neg_loglik + 1e-10);
        }
    }

    #[test]
    fn identical_columns_are_collinear() {
        let xi = vec![0.5, -1.2, 2.0, 0.3, -0.7, 1.5];
        let ds = gaussian_dataset(xi.clone(), xi, vec![1.0, 0.0, 2.0, -1.0, 0.5, 0.2]);
        let err = ssi_score(&ds, PairIndex::new(0, 1)).unwrap_err();
        assert!(matches!(err, Error::Collinear { i: 0, j: 1 }));
    }

    #[test]
    fn score_is_symmetric_in_i_and_j() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 60;
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|s| cols[0][s] * cols[1][s] + 0.2 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        for family in [Family::Gaussian, Family::Binomial] {
            let y = match family {
                Family::Gaussian => y.clone(),
                Family::Binomial => y.iter().map(|&v| f64::from(u8::from(v > 0.0))).collect(),
            };
            let ds = Dataset::from_columns(cols.clone(), y, family, None).unwrap();
            // Swapping i and j permutes the design columns, which leaves the
            // minimized objective unchanged.
            let forward = ssi_score(&ds, PairIndex { i: 0, j: 1 }).unwrap();
            let swapped_cols = vec![cols[1].clone(), cols[0].clone(), cols[2].clone()];
            let ds_swapped =
                Dataset::from_columns(swapped_cols, ds.y().to_vec(), family, None).unwrap();
            let backward = ssi_score(&ds_swapped, PairIndex { i: 0, j: 1 }).unwrap();
            assert_abs_diff_eq!(forward, backward, epsilon = 1e-9);
        }
    }

    #[test]
    fn null_logistic_scores_are_small() {
        // Independent fair-coin response: 2n * L is asymptotically chi^2(1),
        // so L should fall below q_{0.999} / (2n) in at least 99% of runs.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 200;
        let threshold = crate::chisq::chisq_critical(1, 0.001).unwrap() / (2.0 * n as f64);
        let mut below = 0usize;
        let reps = 500;
        for _ in 0..reps {
            let xi: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let xj: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let y: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..2u8))).collect();
            let ds = Dataset::from_columns(vec![xi, xj], y, Family::Binomial, None).unwrap();
            let score = ssi_score(&ds, PairIndex::new(0, 1)).unwrap();
            assert!(score >= 0.0);
            if score < threshold {
                below += 1;
            }
        }
        assert!(below >= (reps * 99) / 100, "only {below}/{reps} below threshold");
    }

    #[test]
    fn separation_caps_coefficients_and_flags() {
        // A perfectly separable response diverges under plain Newton; the
        // fit must come back capped and unconverged instead of blowing up.
        let n = 80;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let xi: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let xj: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let y: Vec<f64> = xi.iter().map(|&v| f64::from(u8::from(v > 0.0))).collect();
        let ds = Dataset::from_columns(vec![xi, xj], y, Family::Binomial, None).unwrap();
        let fit = fit_marginal(&ds, PairIndex::new(0, 1), true).unwrap();
        assert!(!fit.converged);
        assert!(fit.beta.iter().all(|b| b.abs() <= BETA_CAP + 1e-9));
        assert!(fit.neg_loglik.is_finite());
    }

    #[test]
    fn strong_interaction_outranks_null_pairs() {
        // Monte-Carlo oracle: a single planted pure interaction at n = 500
        // should beat the 99th percentile of the null-pair scores nearly
        // always.
        let n = 500;
        let p = 12;
        let reps = 100;
        let mut wins = 0usize;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..reps {
            let cols: Vec<Vec<f64>> = (0..p)
                .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                .collect();
            let y: Vec<f64> = (0..n)
                .map(|s| 2.0 * cols[3][s] * cols[7][s] + 2.0 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let ds = Dataset::from_columns(cols, y, Family::Gaussian, None).unwrap();
            let mut null_scores = Vec::new();
            let mut true_score = 0.0;
            for pair in crate::dataset::pair_iterator(p) {
                let s = ssi_score(&ds, pair).unwrap();
                if pair == (PairIndex { i: 3, j: 7 }) {
                    true_score = s;
                } else {
                    null_scores.push(s);
                }
            }
            null_scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let q99 = null_scores[(null_scores.len() as f64 * 0.99) as usize - 1];
            if true_score > q99 {
                wins += 1;
            }
        }
        assert!(wins >= 95, "true pair won only {wins}/{reps} runs");
    }
}
