//! Equal-frequency (quantile) discretization of continuous predictors and the
//! response.
//!
//! Cutpoints are order statistics: for arity `l` the k-th cutpoint is the
//! value at rank `ceil(n*k/l)` (1-indexed), and a value lands in the lowest
//! level whose upper cutpoint is `>=` it, so ties at a cutpoint go down.
//! Levels that end up empty are compacted away and the column's effective
//! arity shrinks accordingly; a column that collapses to a single level is
//! flagged degenerate and excluded from screening.
//!
//! A continuous response is always split at its empirical median with the
//! strict rule `code = 1 iff y > median`. A binomial response passes through
//! as 0/1 codes.

use crate::dataset::{Dataset, Family};
use crate::error::{Error, Result};

pub const MIN_ARITY: u8 = 2;
pub const MAX_ARITY: u8 = 16;
pub const DEFAULT_ARITY: u8 = 3;

/// Requested arities for predictors and the response.
#[derive(Debug, Clone)]
pub struct DiscretizationSpec {
    uniform: u8,
    per_column: Option<Vec<u8>>,
}

impl DiscretizationSpec {
    /// Same arity for every predictor column.
    pub fn uniform(arity: u8) -> Result<Self> {
        check_arity(arity)?;
        Ok(DiscretizationSpec {
            uniform: arity,
            per_column: None,
        })
    }

    /// Heterogeneous per-column arities.
    pub fn per_column(arities: Vec<u8>) -> Result<Self> {
        for &a in &arities {
            check_arity(a)?;
        }
        Ok(DiscretizationSpec {
            uniform: DEFAULT_ARITY,
            per_column: Some(arities),
        })
    }

    pub fn arity_for(&self, column: usize) -> u8 {
        match &self.per_column {
            Some(v) => v[column],
            None => self.uniform,
        }
    }

    /// Response arity: 2 classes, either the two sides of the median split
    /// or the two observed binomial classes.
    pub fn response_arity(&self) -> u8 {
        2
    }
}

impl Default for DiscretizationSpec {
    fn default() -> Self {
        DiscretizationSpec {
            uniform: DEFAULT_ARITY,
            per_column: None,
        }
    }
}

fn check_arity(arity: u8) -> Result<()> {
    if !(MIN_ARITY..=MAX_ARITY).contains(&arity) {
        return Err(Error::InvalidArgument(format!(
            "arity must lie in {MIN_ARITY}..={MAX_ARITY}, got {arity}"
        )));
    }
    Ok(())
}

/// Level codes for every column plus the discretized response.
#[derive(Debug, Clone)]
pub struct DiscreteMatrix {
    codes: Vec<u8>, // column-major, n * p
    arities: Vec<u8>,
    degenerate: Vec<bool>,
    response_codes: Vec<u8>,
    response_arity: u8,
    n: usize,
    p: usize,
}

impl DiscreteMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn column_codes(&self, k: usize) -> &[u8] {
        &self.codes[k * self.n..(k + 1) * self.n]
    }

    /// Effective arity of column `k` after empty levels were compacted.
    pub fn arity(&self, k: usize) -> u8 {
        self.arities[k]
    }

    pub fn arities(&self) -> &[u8] {
        &self.arities
    }

    /// True when the column collapsed below two levels and cannot be screened.
    pub fn is_degenerate(&self, k: usize) -> bool {
        self.degenerate[k]
    }

    pub fn response_codes(&self) -> &[u8] {
        &self.response_codes
    }

    pub fn response_arity(&self) -> u8 {
        self.response_arity
    }

    /// Test-support constructor for hand-built code matrices.
    pub fn from_codes(
        columns: Vec<Vec<u8>>,
        response_codes: Vec<u8>,
        response_arity: u8,
    ) -> Result<Self> {
        let p = columns.len();
        let n = response_codes.len();
        if p == 0 || n == 0 {
            return Err(Error::InvalidArgument("empty code matrix".to_string()));
        }
        let mut codes = Vec::with_capacity(n * p);
        let mut arities = Vec::with_capacity(p);
        let mut degenerate = Vec::with_capacity(p);
        for (k, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "column {k} length mismatch"
                )));
            }
            let arity = col.iter().copied().max().unwrap() + 1;
            arities.push(arity);
            degenerate.push(arity < 2);
            codes.extend_from_slice(col);
        }
        if response_codes.iter().any(|&c| c >= response_arity) {
            return Err(Error::InvalidArgument(
                "response code exceeds arity".to_string(),
            ));
        }
        Ok(DiscreteMatrix {
            codes,
            arities,
            degenerate,
            response_codes,
            response_arity,
            n,
            p,
        })
    }
}

/// Bins one column at its empirical `k/l`-quantiles and compacts empty
/// levels. Returns the codes and the effective arity.
pub fn bin_column(values: &[f64], arity: u8) -> (Vec<u8>, u8) {
    let n = values.len();
    debug_assert!(n > 0);
    let l = arity as usize;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Cutpoint k (1-indexed, k = 1..l-1) is the order statistic at rank
    // ceil(n*k/l); a value belongs to the lowest interval, i.e. its raw code
    // counts the cutpoints strictly below it.
    let cutpoints: Vec<f64> = (1..l)
        .map(|k| sorted[(n * k).div_ceil(l) - 1])
        .collect();

    let raw: Vec<u8> = values
        .iter()
        .map(|&v| cutpoints.iter().filter(|&&c| c < v).count() as u8)
        .collect();

    // Compact: relabel occupied levels densely so every level is nonempty.
    let mut occupied = vec![false; l];
    for &c in &raw {
        occupied[c as usize] = true;
    }
    let mut remap = vec![0u8; l];
    let mut next = 0u8;
    for (level, occ) in occupied.iter().enumerate() {
        if *occ {
            remap[level] = next;
            next += 1;
        }
    }
    let codes = raw.into_iter().map(|c| remap[c as usize]).collect();
    (codes, next)
}

/// Median with the usual midpoint convention for even sample sizes.
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Discretizes every predictor column and the response.
///
/// Degenerate columns (effective arity 1) are flagged rather than rejected;
/// a response that collapses to a single class is a hard error because no
/// stratified table can be formed.
pub fn discretize(ds: &Dataset, spec: &DiscretizationSpec) -> Result<DiscreteMatrix> {
    let n = ds.n();
    let p = ds.p();
    let mut codes = Vec::with_capacity(n * p);
    let mut arities = Vec::with_capacity(p);
    let mut degenerate = Vec::with_capacity(p);
    for k in 0..p {
        let (col_codes, eff) = bin_column(ds.column(k), spec.arity_for(k));
        codes.extend_from_slice(&col_codes);
        arities.push(eff);
        degenerate.push(eff < 2);
    }

    let response_codes: Vec<u8> = match ds.family() {
        Family::Binomial => ds.y().iter().map(|&v| if v == 1.0 { 1 } else { 0 }).collect(),
        Family::Gaussian => {
            let med = median(ds.y());
            ds.y().iter().map(|&v| u8::from(v > med)).collect()
        }
    };
    if !(response_codes.contains(&0) && response_codes.contains(&1)) {
        return Err(Error::DegenerateResponse);
    }

    Ok(DiscreteMatrix {
        codes,
        arities,
        degenerate,
        response_codes,
        response_arity: 2,
        n,
        p,
    })
}
