//! The full O(p^2) pairwise sweep: exact SSI, BOLT-SSI, or BOLT-SSI with
//! Kirkwood pruning, with data-parallel work partitioning and top-d /
//! threshold / Bonferroni selection.
//!
//! Pairs are processed by their linearized upper-triangular index, so worker
//! chunks are contiguous and the collected outcome vector is independent of
//! the thread count; the final ranking sorts by (score desc, pair lex),
//! which makes the whole result deterministic for a fixed input.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bitmat::{build_bitmatrix, BitMatrix};
use crate::chisq::chisq_critical;
use crate::contingency::build_table;
use crate::dataset::{pair_count, pair_from_linear, Dataset, PairIndex};
use crate::discretize::{discretize, DiscretizationSpec};
use crate::error::{Error, Result};
use crate::glm;
use crate::loglinear::{self, IpfOptions, ScoreOptions};

/// Which screening statistic drives the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Exact marginal GLM likelihood increments on the raw data.
    Ssi,
    /// Discretize, bit-pack, and score by the log-linear deviance.
    BoltSsi,
    /// BOLT-SSI with the Kirkwood upper bound as a pruning pre-pass.
    BoltSsiKsa,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Ssi => write!(f, "ssi"),
            Method::BoltSsi => write!(f, "bolt"),
            Method::BoltSsiKsa => write!(f, "bolt-ksa"),
        }
    }
}

/// How the scored pairs are selected into the screening set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// Keep the `d` highest scores (ties broken lexicographically).
    TopD(usize),
    /// The method's conventional d: `n - 1` for SSI, `max(n, p)` for BOLT.
    TopDAuto,
    /// `floor(n / ln n)`, the conservative alternative.
    TopDNLogN,
    /// Keep scores `>= gamma` (increment scale).
    Threshold(f64),
    /// Keep pairs whose deviance statistic clears the chi-squared critical
    /// value at level `alpha / (p(p-1)/2)`, each at its own df.
    BonferroniAlpha(f64),
}

/// Threshold for the Kirkwood pruning pass (deviance scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KsaGamma {
    Value(f64),
    /// Bonferroni-corrected chi-squared critical value at each pair's df.
    BonferroniAlpha(f64),
}

#[derive(Debug, Clone)]
pub struct ScreenConfig {
    pub method: Method,
    pub selection: Selection,
    /// Only consulted by [`Method::BoltSsiKsa`].
    pub ksa_gamma: KsaGamma,
    /// Discretization for the BOLT methods.
    pub arity: DiscretizationSpec,
    /// Worker threads; 0 means rayon's default.
    pub threads: usize,
    pub ipf: IpfOptions,
    /// Added to every contingency cell when positive.
    pub pseudo_count: f64,
    /// Keep the per-pair Kirkwood statistics of pruned pairs (debug aid;
    /// costs memory proportional to the pruned count).
    pub record_pruned: bool,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        ScreenConfig {
            method: Method::BoltSsi,
            selection: Selection::TopDAuto,
            ksa_gamma: KsaGamma::Value(0.0),
            arity: DiscretizationSpec::default(),
            threads: 0,
            ipf: IpfOptions::default(),
            pseudo_count: 0.0,
            record_pruned: false,
        }
    }
}

/// Why a pair produced no score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// A member variable has fewer than two levels after discretization.
    Degenerate,
    /// The marginal design matrix was singular.
    Collinear,
    /// The fit produced a non-finite score.
    NonFinite,
}

impl std::fmt::Display for SkipReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SkipReason::Degenerate => write!(f, "degenerate"),
            SkipReason::Collinear => write!(f, "collinear"),
            SkipReason::NonFinite => write!(f, "non-finite"),
        }
    }
}

/// One scored pair in the ranked output.
#[derive(Debug, Clone, Copy)]
pub struct RankedPair {
    pub pair: PairIndex,
    /// Likelihood-increment score (the ranking key).
    pub score: f64,
    /// Deviance-scale statistic: `2 * increment` for BOLT scores,
    /// `2n * increment` for SSI.
    pub statistic: f64,
    pub df: u32,
    pub converged: bool,
    pub selected: bool,
}

/// Outcome of a full sweep.
#[derive(Debug, Clone)]
pub struct ScreenResult {
    /// Scored pairs sorted by score descending, ties by (i, j).
    pub ranked: Vec<RankedPair>,
    pub skipped: Vec<(PairIndex, SkipReason)>,
    /// Pruned pairs and their Kirkwood statistics when
    /// [`ScreenConfig::record_pruned`] is set.
    pub pruned: Vec<(PairIndex, f64)>,
    pub n_evaluated: usize,
    pub n_pruned_by_ksa: usize,
    pub n_skipped: usize,
    pub n_selected: usize,
    pub wall_time: Duration,
    pub method: Method,
    pub n: usize,
    pub p: usize,
}

impl ScreenResult {
    /// The selected pairs in rank order.
    pub fn selected_pairs(&self) -> impl Iterator<Item = PairIndex> + '_ {
        self.ranked.iter().filter(|r| r.selected).map(|r| r.pair)
    }
}

enum Outcome {
    Scored {
        score: f64,
        statistic: f64,
        df: u32,
        converged: bool,
    },
    Pruned(f64),
    Skipped(SkipReason),
}

/// Resolves the automatic top-d conventions into a concrete rule.
pub fn resolve_selection(selection: Selection, method: Method, n: usize, p: usize) -> Selection {
    match selection {
        Selection::TopDAuto => Selection::TopD(match method {
            Method::Ssi => (n - 1).max(1),
            Method::BoltSsi | Method::BoltSsiKsa => n.max(p),
        }),
        Selection::TopDNLogN => {
            let d = (n as f64 / (n as f64).ln()).floor() as usize;
            Selection::TopD(d.max(1))
        }
        other => other,
    }
}

fn validate_selection(selection: &Selection) -> Result<()> {
    match selection {
        Selection::TopD(d) if *d < 1 => Err(Error::InvalidArgument(
            "top-d selection requires d >= 1".to_string(),
        )),
        Selection::Threshold(g) if g.is_nan() || *g < 0.0 => Err(Error::InvalidArgument(
            "threshold selection requires gamma >= 0".to_string(),
        )),
        Selection::BonferroniAlpha(a) if !(*a > 0.0 && *a < 1.0) => Err(Error::InvalidArgument(
            "Bonferroni selection requires 0 < alpha < 1".to_string(),
        )),
        _ => Ok(()),
    }
}

/// Applies a concrete selection rule to scored pairs, returning one flag per
/// entry. `n` and `p` are the dataset dimensions behind the sweep.
pub fn select(scored: &[RankedPair], rule: &Selection, n: usize, p: usize) -> Result<Vec<bool>> {
    let _ = n;
    validate_selection(rule)?;
    match rule {
        Selection::TopDAuto | Selection::TopDNLogN => Err(Error::InvalidArgument(
            "selection rule must be resolved before applying".to_string(),
        )),
        Selection::TopD(d) => {
            let mut order: Vec<usize> = (0..scored.len()).collect();
            order.sort_by(|&a, &b| {
                scored[b]
                    .score
                    .partial_cmp(&scored[a].score)
                    .unwrap()
                    .then_with(|| scored[a].pair.cmp(&scored[b].pair))
            });
            let mut flags = vec![false; scored.len()];
            for &idx in order.iter().take(*d) {
                flags[idx] = true;
            }
            Ok(flags)
        }
        Selection::Threshold(gamma) => Ok(scored.iter().map(|s| s.score >= *gamma).collect()),
        Selection::BonferroniAlpha(alpha) => {
            let q = pair_count(p);
            let level = alpha / q as f64;
            if level <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "Bonferroni level underflows at q = {q}"
                )));
            }
            let mut cache: std::collections::HashMap<u32, f64> = std::collections::HashMap::new();
            let mut flags = Vec::with_capacity(scored.len());
            for s in scored {
                let crit = match cache.get(&s.df) {
                    Some(&c) => c,
                    None => {
                        let c = chisq_critical(s.df, level)?;
                        cache.insert(s.df, c);
                        c
                    }
                };
                flags.push(s.statistic >= crit);
            }
            Ok(flags)
        }
    }
}

struct BoltContext {
    bm: BitMatrix,
    degenerate: Vec<bool>,
    score_opts: ScoreOptions,
    /// Kirkwood prune thresholds per df (deviance scale); None disables the
    /// pruning pass.
    ksa_threshold: Option<KsaThreshold>,
    record_pruned: bool,
}

enum KsaThreshold {
    Constant(f64),
    PerDf(Vec<f64>),
}

impl KsaThreshold {
    fn for_df(&self, df: u32) -> f64 {
        match self {
            KsaThreshold::Constant(g) => *g,
            KsaThreshold::PerDf(v) => v[df as usize],
        }
    }
}

fn bolt_pair(ctx: &BoltContext, pair: PairIndex) -> Outcome {
    if ctx.degenerate[pair.i] || ctx.degenerate[pair.j] {
        return Outcome::Skipped(SkipReason::Degenerate);
    }
    let table = match build_table(&ctx.bm, pair) {
        Ok(t) => t,
        Err(_) => return Outcome::Skipped(SkipReason::Degenerate),
    };

    if let Some(threshold) = &ctx.ksa_threshold {
        let df = loglinear::effective_df(&table);
        let ksa_statistic = 2.0 * loglinear::ksa_increment(&table, ctx.score_opts.pseudo_count);
        if ksa_statistic < threshold.for_df(df) {
            return Outcome::Pruned(if ctx.record_pruned { ksa_statistic } else { f64::NAN });
        }
    }

    let score = loglinear::score_pair(&table, &ctx.score_opts);
    if !score.increment.is_finite() {
        return Outcome::Skipped(SkipReason::NonFinite);
    }
    Outcome::Scored {
        score: score.increment,
        statistic: score.statistic,
        df: score.df,
        converged: score.converged,
    }
}

fn ssi_pair(ds: &Dataset, pair: PairIndex) -> Outcome {
    match glm::fit_pair_models(ds, pair) {
        Ok((fit3, fit4)) => {
            let score = (fit3.neg_loglik - fit4.neg_loglik).max(0.0);
            if !score.is_finite() {
                return Outcome::Skipped(SkipReason::NonFinite);
            }
            Outcome::Scored {
                score,
                statistic: 2.0 * ds.n() as f64 * score,
                df: 1,
                converged: fit3.converged && fit4.converged,
            }
        }
        Err(_) => Outcome::Skipped(SkipReason::Collinear),
    }
}

/// Runs the configured sweep over every pair. Synchronous: returns when the
/// whole ranked result is assembled.
pub fn screen(ds: &Dataset, cfg: &ScreenConfig) -> Result<ScreenResult> {
    validate_selection(&cfg.selection)?;
    if let KsaGamma::BonferroniAlpha(a) = cfg.ksa_gamma {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidArgument(
                "Kirkwood Bonferroni level requires 0 < alpha < 1".to_string(),
            ));
        }
    }
    if cfg.pseudo_count < 0.0 {
        return Err(Error::InvalidArgument(
            "pseudo-count must be nonnegative".to_string(),
        ));
    }

    let started = Instant::now();
    let n = ds.n();
    let p = ds.p();
    let q = pair_count(p);

    let bolt_ctx = match cfg.method {
        Method::Ssi => None,
        Method::BoltSsi | Method::BoltSsiKsa => {
            let dm = discretize(ds, &cfg.arity)?;
            if (0..p).filter(|&k| !dm.is_degenerate(k)).count() < 2 {
                return Err(Error::InvalidArgument(
                    "fewer than two screenable columns after discretization".to_string(),
                ));
            }
            let degenerate: Vec<bool> = (0..p).map(|k| dm.is_degenerate(k)).collect();
            let bm = build_bitmatrix(&dm);
            let ksa_threshold = match cfg.method {
                Method::BoltSsiKsa => Some(match cfg.ksa_gamma {
                    KsaGamma::Value(g) => KsaThreshold::Constant(g.max(0.0)),
                    KsaGamma::BonferroniAlpha(alpha) => {
                        let level = alpha / q as f64;
                        let max_df = {
                            let max_arity =
                                (0..p).map(|k| dm.arity(k) as usize).max().unwrap_or(2);
                            ((max_arity - 1) * (max_arity - 1)).max(1)
                        };
                        let mut per_df = vec![0.0f64; max_df + 1];
                        for (df, slot) in per_df.iter_mut().enumerate().skip(1) {
                            *slot = chisq_critical(df as u32, level)?;
                        }
                        KsaThreshold::PerDf(per_df)
                    }
                }),
                _ => None,
            };
            Some(BoltContext {
                bm,
                degenerate,
                score_opts: ScoreOptions {
                    ipf: cfg.ipf,
                    with_ksa: false,
                    pseudo_count: cfg.pseudo_count,
                },
                ksa_threshold,
                record_pruned: cfg.record_pruned,
            })
        }
    };

    let sweep = || -> Vec<Outcome> {
        (0..q)
            .into_par_iter()
            .map(|t| {
                let pair = pair_from_linear(t, p);
                match &bolt_ctx {
                    Some(ctx) => bolt_pair(ctx, pair),
                    None => ssi_pair(ds, pair),
                }
            })
            .collect()
    };
    let outcomes = if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(sweep)
    } else {
        sweep()
    };

    let mut ranked = Vec::new();
    let mut skipped = Vec::new();
    let mut pruned = Vec::new();
    let mut n_pruned = 0usize;
    for (t, outcome) in outcomes.into_iter().enumerate() {
        let pair = pair_from_linear(t, p);
        match outcome {
            Outcome::Scored {
                score,
                statistic,
                df,
                converged,
            } => ranked.push(RankedPair {
                pair,
                score,
                statistic,
                df,
                converged,
                selected: false,
            }),
            Outcome::Pruned(stat) => {
                n_pruned += 1;
                if cfg.record_pruned {
                    pruned.push((pair, stat));
                }
            }
            Outcome::Skipped(reason) => skipped.push((pair, reason)),
        }
    }

    ranked.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then_with(|| a.pair.cmp(&b.pair))
    });

    let rule = resolve_selection(cfg.selection, cfg.method, n, p);
    let flags = select(&ranked, &rule, n, p)?;
    for (entry, flag) in ranked.iter_mut().zip(flags) {
        entry.selected = flag;
    }

    let n_evaluated = ranked.len();
    let n_skipped = skipped.len();
    let n_selected = ranked.iter().filter(|r| r.selected).count();
    debug_assert_eq!(n_evaluated + n_pruned + n_skipped, q);

    Ok(ScreenResult {
        ranked,
        skipped,
        pruned,
        n_evaluated,
        n_pruned_by_ksa: n_pruned,
        n_skipped,
        n_selected,
        wall_time: started.elapsed(),
        method: cfg.method,
        n,
        p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Family;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn planted_dataset(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|s| 3.0 * cols[0][s] * cols[1][s] + 0.5 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Dataset::from_columns(cols, y, Family::Gaussian, None).unwrap()
    }

    #[test]
    fn planted_pair_ranks_first_under_every_method() {
        let ds = planted_dataset(300, 3, 42);
        for method in [Method::Ssi, Method::BoltSsi, Method::BoltSsiKsa] {
            let cfg = ScreenConfig {
                method,
                selection: Selection::TopD(1),
                ..Default::default()
            };
            let result = screen(&ds, &cfg).unwrap();
            assert_eq!(result.ranked.len(), 3);
            assert_eq!(result.ranked[0].pair, PairIndex { i: 0, j: 1 }, "{method}");
            assert!(result.ranked[0].selected);
            assert_eq!(result.n_selected, 1);
        }
    }

    #[test]
    fn zero_ksa_gamma_prunes_nothing_and_matches_bolt() {
        let ds = planted_dataset(150, 8, 7);
        let bolt = screen(
            &ds,
            &ScreenConfig {
                method: Method::BoltSsi,
                ..Default::default()
            },
        )
        .unwrap();
        let ksa = screen(
            &ds,
            &ScreenConfig {
                method: Method::BoltSsiKsa,
                ksa_gamma: KsaGamma::Value(0.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(ksa.n_pruned_by_ksa, 0);
        assert_eq!(bolt.ranked.len(), ksa.ranked.len());
        for (a, b) in bolt.ranked.iter().zip(&ksa.ranked) {
            assert_eq!(a.pair, b.pair);
            assert_eq!(a.score.to_bits(), b.score.to_bits());
            assert_eq!(a.selected, b.selected);
        }
    }

    #[test]
    fn ksa_pruning_is_sound() {
        let ds = planted_dataset(200, 10, 19);
        let gamma = 2.0;
        let pruned_run = screen(
            &ds,
            &ScreenConfig {
                method: Method::BoltSsiKsa,
                ksa_gamma: KsaGamma::Value(gamma),
                record_pruned: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(pruned_run.n_pruned_by_ksa > 0, "gamma too small to exercise pruning");
        // Rescore the pruned pairs with the plain method: every IPF statistic
        // must fall below gamma, and pruned pairs never enter the ranking.
        let full = screen(
            &ds,
            &ScreenConfig {
                method: Method::BoltSsi,
                ..Default::default()
            },
        )
        .unwrap();
        for (pair, ksa_stat) in &pruned_run.pruned {
            assert!(*ksa_stat < gamma);
            let entry = full.ranked.iter().find(|r| r.pair == *pair).unwrap();
            assert!(
                entry.statistic < gamma,
                "pruned pair {pair} has IPF statistic {}",
                entry.statistic
            );
            assert!(!pruned_run.ranked.iter().any(|r| r.pair == *pair));
        }
        assert_eq!(
            pruned_run.n_evaluated + pruned_run.n_pruned_by_ksa + pruned_run.n_skipped,
            pair_count(ds.p())
        );
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let ds = planted_dataset(120, 12, 3);
        for method in [Method::Ssi, Method::BoltSsi] {
            let run = |threads: usize| {
                screen(
                    &ds,
                    &ScreenConfig {
                        method,
                        threads,
                        ..Default::default()
                    },
                )
                .unwrap()
            };
            let single = run(1);
            let multi = run(8);
            assert_eq!(single.ranked.len(), multi.ranked.len());
            for (a, b) in single.ranked.iter().zip(&multi.ranked) {
                assert_eq!(a.pair, b.pair);
                assert_eq!(a.score.to_bits(), b.score.to_bits());
                assert_eq!(a.selected, b.selected);
            }
        }
    }

    #[test]
    fn topd_is_monotone_in_d() {
        let ds = planted_dataset(100, 9, 11);
        let run = |d: usize| {
            screen(
                &ds,
                &ScreenConfig {
                    method: Method::BoltSsi,
                    selection: Selection::TopD(d),
                    ..Default::default()
                },
            )
            .unwrap()
        };
        let small = run(3);
        let large = run(9);
        let small_set: Vec<_> = small.selected_pairs().collect();
        let large_set: Vec<_> = large.selected_pairs().collect();
        assert_eq!(small_set.len(), 3);
        assert_eq!(large_set.len(), 9);
        for pair in small_set {
            assert!(large_set.contains(&pair));
        }
    }

    #[test]
    fn selection_rules_apply_exactly() {
        let scored: Vec<RankedPair> = [3.0, 1.0, 2.0]
            .iter()
            .enumerate()
            .map(|(k, &score)| RankedPair {
                pair: PairIndex { i: 0, j: k + 1 },
                score,
                statistic: 2.0 * score,
                df: 1,
                converged: true,
                selected: false,
            })
            .collect();
        let flags = select(&scored, &Selection::TopD(2), 10, 4).unwrap();
        assert_eq!(flags, vec![true, false, true]);
        let flags = select(&scored, &Selection::Threshold(2.0), 10, 4).unwrap();
        assert_eq!(flags, vec![true, false, true]);
    }

    #[test]
    fn bonferroni_uses_each_pairs_df() {
        // At the GWAS-scale level, 63.332 clears the df=4 critical value
        // (62.237) while 53.566 does not; with df=1 (critical 50.880) it
        // would. Both facts pin the df bookkeeping.
        let p = 319_156usize;
        let mk = |statistic: f64, df: u32, j: usize| RankedPair {
            pair: PairIndex { i: 0, j },
            score: statistic / 2.0,
            statistic,
            df,
            converged: true,
            selected: false,
        };
        let scored = vec![mk(63.332, 4, 1), mk(53.566, 4, 2), mk(53.566, 1, 3)];
        let flags = select(&scored, &Selection::BonferroniAlpha(0.05), 5123, p).unwrap();
        assert_eq!(flags, vec![true, false, true]);
    }

    #[test]
    fn degenerate_columns_are_skipped_not_fatal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 60;
        let mut cols: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        cols[2] = vec![1.0; n]; // constant: collapses to one level
        let y: Vec<f64> = (0..n).map(|s| cols[0][s] * cols[1][s]).collect();
        let ds = Dataset::from_columns(cols, y, Family::Gaussian, None).unwrap();
        let result = screen(
            &ds,
            &ScreenConfig {
                method: Method::BoltSsi,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(result.n_skipped, 3); // pairs (0,2), (1,2), (2,3)
        assert!(result
            .skipped
            .iter()
            .all(|(pair, reason)| (pair.i == 2 || pair.j == 2) && *reason == SkipReason::Degenerate));
        assert_eq!(result.n_evaluated + result.n_skipped, pair_count(4));
    }

    #[test]
    fn work_accounting_holds() {
        let ds = planted_dataset(80, 7, 23);
        let result = screen(
            &ds,
            &ScreenConfig {
                method: Method::BoltSsiKsa,
                ksa_gamma: KsaGamma::Value(1.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            result.n_evaluated + result.n_pruned_by_ksa + result.n_skipped,
            pair_count(7)
        );
        assert_eq!(result.n_selected, result.ranked.iter().filter(|r| r.selected).count());
        // Ranking is sorted nonincreasing with lexicographic tie-breaks.
        for w in result.ranked.windows(2) {
            assert!(
                w[0].score > w[1].score || (w[0].score == w[1].score && w[0].pair < w[1].pair)
            );
        }
    }
}
