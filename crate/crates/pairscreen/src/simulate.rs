//! Simulation designs with AR(1)-correlated Gaussian covariates, linear or
//! logistic responses, planted main and interaction effects under four
//! heredity structures, and the screening metrics ACR / AMS.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dataset::{Dataset, Family, PairIndex};
use crate::error::{Error, Result};
use crate::screen::{screen, ScreenConfig, ScreenResult};

/// Which published interaction set a design plants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heredity {
    /// Both parents of every interaction carry a main effect.
    Strong,
    /// Exactly one parent does.
    Weak,
    /// Neither parent does.
    Anti,
    /// A mix of the three.
    Mixed,
}

/// The ten planted interaction pairs for a heredity structure. Indices are
/// zero-based; the printed tables are one-based.
pub fn heredity_pairs(heredity: Heredity) -> Vec<PairIndex> {
    let one_based: [(usize, usize); 10] = match heredity {
        Heredity::Strong => [
            (1, 2),
            (1, 3),
            (2, 3),
            (2, 5),
            (3, 4),
            (6, 8),
            (6, 10),
            (7, 8),
            (7, 9),
            (9, 10),
        ],
        Heredity::Weak => [
            (1, 2),
            (1, 13),
            (2, 3),
            (2, 15),
            (3, 4),
            (6, 10),
            (6, 18),
            (7, 9),
            (7, 18),
            (10, 19),
        ],
        Heredity::Anti => [
            (11, 12),
            (11, 13),
            (12, 13),
            (12, 15),
            (13, 14),
            (16, 18),
            (16, 20),
            (17, 18),
            (17, 19),
            (19, 20),
        ],
        Heredity::Mixed => [
            (1, 2),
            (1, 3),
            (2, 3),
            (2, 15),
            (6, 18),
            (7, 18),
            (16, 20),
            (17, 18),
            (17, 19),
            (19, 20),
        ],
    };
    one_based
        .iter()
        .map(|&(a, b)| PairIndex::new(a - 1, b - 1))
        .collect()
}

/// One simulation design: covariates are rows of an AR(1) Gaussian process
/// with lag-one correlation `rho`; the first ten columns carry unit main
/// effects; the heredity structure fixes the ten interacting pairs.
#[derive(Debug, Clone)]
pub struct SimDesign {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub family: Family,
    /// Gaussian noise standard deviation (ignored for logistic designs).
    pub sigma: f64,
    /// Interaction coefficient: 2 in the linear designs, the signal knob in
    /// the logistic ones.
    pub beta_inter: f64,
    pub heredity: Heredity,
    pub seed: u64,
}

impl SimDesign {
    /// The numbered designs: 1-4 are linear with strong/weak/anti/mixed
    /// heredity and `signal` as the noise sd; 5-8 are their logistic twins
    /// with `signal` as the interaction coefficient.
    pub fn example(example: u8, n: usize, p: usize, rho: f64, signal: f64, seed: u64) -> Result<Self> {
        if !(1..=8).contains(&example) {
            return Err(Error::InvalidArgument(format!(
                "example must be 1..=8, got {example}"
            )));
        }
        let heredity = match (example - 1) % 4 {
            0 => Heredity::Strong,
            1 => Heredity::Weak,
            2 => Heredity::Anti,
            _ => Heredity::Mixed,
        };
        match example {
            1..=4 => Ok(SimDesign {
                n,
                p,
                rho,
                family: Family::Gaussian,
                sigma: signal,
                beta_inter: 2.0,
                heredity,
                seed,
            }),
            _ => Ok(SimDesign {
                n,
                p,
                rho,
                family: Family::Binomial,
                sigma: 0.0,
                beta_inter: signal,
                heredity,
                seed,
            }),
        }
    }

    /// The planted interaction set of this design.
    pub fn true_pairs(&self) -> Vec<PairIndex> {
        heredity_pairs(self.heredity)
    }

    fn validate(&self) -> Result<()> {
        let max_index = self
            .true_pairs()
            .iter()
            .map(|pr| pr.j)
            .max()
            .expect("ten pairs");
        if self.p <= max_index {
            return Err(Error::InvalidArgument(format!(
                "p = {} is too small for the planted pairs (need p > {max_index})",
                self.p
            )));
        }
        if self.n < 4 {
            return Err(Error::DimensionTooSmall { n: self.n, p: self.p });
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidArgument(format!(
                "rho must lie in [0, 1), got {}",
                self.rho
            )));
        }
        Ok(())
    }
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

/// Generates one dataset from the design; bit-identical for a fixed seed.
pub fn generate(design: &SimDesign) -> Result<Dataset> {
    design.validate()?;
    let n = design.n;
    let p = design.p;
    let mut rng = ChaCha8Rng::seed_from_u64(design.seed);

    // Stationary AR(1) recursion along the column index keeps every
    // marginal N(0, 1) with corr(x_j, x_k) = rho^{|j-k|}.
    let mut x = vec![0.0f64; n * p]; // column-major
    let innovation = (1.0 - design.rho * design.rho).sqrt();
    for s in 0..n {
        let mut prev: f64 = rng.sample(StandardNormal);
        x[s] = prev;
        for k in 1..p {
            let z: f64 = rng.sample(StandardNormal);
            prev = design.rho * prev + innovation * z;
            x[k * n + s] = prev;
        }
    }

    let truth = design.true_pairs();
    let mut eta = vec![0.0f64; n];
    for s in 0..n {
        let mut acc = 0.0;
        for k in 0..10 {
            acc += x[k * n + s];
        }
        for pr in &truth {
            acc += design.beta_inter * x[pr.i * n + s] * x[pr.j * n + s];
        }
        eta[s] = acc;
    }

    let y: Vec<f64> = match design.family {
        Family::Gaussian => eta
            .iter()
            .map(|&e| e + design.sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
        Family::Binomial => eta
            .iter()
            .map(|&e| f64::from(rng.random::<f64>() < sigmoid(e)))
            .collect(),
    };

    let columns: Vec<Vec<f64>> = (0..p).map(|k| x[k * n..(k + 1) * n].to_vec()).collect();
    Dataset::from_columns(columns, y, design.family, None)
}

/// Per-replication screening outcome.
#[derive(Debug, Clone, Copy)]
pub struct RepOutcome {
    pub rep: usize,
    /// Planted pairs that made the selected set.
    pub covered: usize,
    pub truth_size: usize,
    /// Size of the selected set.
    pub selected: usize,
}

/// Aggregated screening metrics over replications.
#[derive(Debug, Clone, Copy)]
pub struct SimMetrics {
    /// Average coverage rate: mean fraction of planted pairs selected.
    pub acr: f64,
    pub acr_se: f64,
    /// Average selected model size.
    pub ams: f64,
    pub ams_se: f64,
    pub reps: usize,
    /// Out-of-sample percentage R^2, when a refit predictor was evaluated.
    pub r2_out: Option<f64>,
    /// Predictive misclassification rate, when a classifier was evaluated.
    pub pmr: Option<f64>,
}

/// Counts how many planted pairs a screening run selected.
pub fn coverage(result: &ScreenResult, truth: &[PairIndex], rep: usize) -> RepOutcome {
    let selected: std::collections::HashSet<PairIndex> = result.selected_pairs().collect();
    let covered = truth.iter().filter(|pr| selected.contains(pr)).count();
    RepOutcome {
        rep,
        covered,
        truth_size: truth.len(),
        selected: selected.len(),
    }
}

/// Aggregates per-rep outcomes into ACR / AMS with standard errors.
pub fn evaluate(outcomes: &[RepOutcome]) -> SimMetrics {
    let reps = outcomes.len();
    assert!(reps > 0, "no replications to evaluate");
    let rates: Vec<f64> = outcomes
        .iter()
        .map(|o| o.covered as f64 / o.truth_size as f64)
        .collect();
    let sizes: Vec<f64> = outcomes.iter().map(|o| o.selected as f64).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let se = |v: &[f64]| {
        if v.len() < 2 {
            return 0.0;
        }
        let m = mean(v);
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0);
        (var / v.len() as f64).sqrt()
    };
    SimMetrics {
        acr: mean(&rates),
        acr_se: se(&rates),
        ams: mean(&sizes),
        ams_se: se(&sizes),
        reps,
        r2_out: None,
        pmr: None,
    }
}

fn rep_seed(base: u64, rep: usize) -> u64 {
    base.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(rep as u64 + 1))
}

/// Runs `reps` replications of the design under one screening
/// configuration; replications are independent and run in parallel with
/// derived seeds.
pub fn run_design(
    design: &SimDesign,
    cfg: &ScreenConfig,
    reps: usize,
) -> Result<(SimMetrics, Vec<RepOutcome>)> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be >= 1".to_string()));
    }
    let truth = design.true_pairs();
    let outcomes: Result<Vec<RepOutcome>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let per_rep = SimDesign {
                seed: rep_seed(design.seed, rep),
                ..design.clone()
            };
            let ds = generate(&per_rep)?;
            let result = screen(&ds, cfg)?;
            Ok(coverage(&result, &truth, rep))
        })
        .collect();
    let outcomes = outcomes?;
    Ok((evaluate(&outcomes), outcomes))
}

/// Out-of-sample percentage R^2 of a row predictor on held-out data.
pub fn out_of_sample_r2<F: Fn(&[f64]) -> f64>(predict: F, test: &Dataset) -> f64 {
    let n = test.n();
    let mut row = vec![0.0f64; test.p()];
    let y = test.y();
    let y_bar = y.iter().sum::<f64>() / n as f64;
    let mut sse = 0.0;
    let mut sst = 0.0;
    for s in 0..n {
        test.row_into(s, &mut row);
        let fitted = predict(&row);
        sse += (y[s] - fitted) * (y[s] - fitted);
        sst += (y[s] - y_bar) * (y[s] - y_bar);
    }
    100.0 * (1.0 - sse / sst)
}

/// Misclassification rate of a probability predictor thresholded at 1/2.
pub fn misclassification_rate<F: Fn(&[f64]) -> f64>(predict: F, test: &Dataset) -> f64 {
    let n = test.n();
    let mut row = vec![0.0f64; test.p()];
    let mut wrong = 0usize;
    for s in 0..n {
        test.row_into(s, &mut row);
        let label = f64::from(predict(&row) > 0.5);
        if label != test.y()[s] {
            wrong += 1;
        }
    }
    wrong as f64 / n as f64
}
