//! Three-way contingency tables (levels of X_i x levels of X_j x response
//! classes) with cached one-way and two-way margins. Counts are exact
//! integers; likelihood code converts to floating point at its boundary.

use crate::bitmat::BitMatrix;
use crate::dataset::PairIndex;
use crate::error::{Error, Result};

/// Dense `I x J x K` count table. Cell `(a, b, c)` is stored at
/// `(a * J + b) * K + c`.
#[derive(Debug, Clone)]
pub struct ContingencyTable3 {
    counts: Vec<u64>,
    i_dim: usize,
    j_dim: usize,
    k_dim: usize,
    ij: Vec<u64>,
    ik: Vec<u64>,
    jk: Vec<u64>,
    i_margin: Vec<u64>,
    j_margin: Vec<u64>,
    k_margin: Vec<u64>,
    total: u64,
}

impl ContingencyTable3 {
    /// Builds a table (and all margins) from raw cell counts.
    pub fn from_counts(counts: Vec<u64>, i_dim: usize, j_dim: usize, k_dim: usize) -> Result<Self> {
        if counts.len() != i_dim * j_dim * k_dim || i_dim == 0 || j_dim == 0 || k_dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "count vector of length {} does not match {}x{}x{}",
                counts.len(),
                i_dim,
                j_dim,
                k_dim
            )));
        }
        let mut t = ContingencyTable3 {
            counts,
            i_dim,
            j_dim,
            k_dim,
            ij: vec![0; i_dim * j_dim],
            ik: vec![0; i_dim * k_dim],
            jk: vec![0; j_dim * k_dim],
            i_margin: vec![0; i_dim],
            j_margin: vec![0; j_dim],
            k_margin: vec![0; k_dim],
            total: 0,
        };
        t.recompute_margins();
        Ok(t)
    }

    fn recompute_margins(&mut self) {
        for v in self.ij.iter_mut() {
            *v = 0;
        }
        for v in self.ik.iter_mut() {
            *v = 0;
        }
        for v in self.jk.iter_mut() {
            *v = 0;
        }
        for v in self.i_margin.iter_mut() {
            *v = 0;
        }
        for v in self.j_margin.iter_mut() {
            *v = 0;
        }
        for v in self.k_margin.iter_mut() {
            *v = 0;
        }
        self.total = 0;
        for a in 0..self.i_dim {
            for b in 0..self.j_dim {
                for c in 0..self.k_dim {
                    let n = self.counts[(a * self.j_dim + b) * self.k_dim + c];
                    self.ij[a * self.j_dim + b] += n;
                    self.ik[a * self.k_dim + c] += n;
                    self.jk[b * self.k_dim + c] += n;
                    self.i_margin[a] += n;
                    self.j_margin[b] += n;
                    self.k_margin[c] += n;
                    self.total += n;
                }
            }
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.i_dim, self.j_dim, self.k_dim)
    }

    pub fn count(&self, a: usize, b: usize, c: usize) -> u64 {
        self.counts[(a * self.j_dim + b) * self.k_dim + c]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.total
    }

    pub fn margin_ij(&self, a: usize, b: usize) -> u64 {
        self.ij[a * self.j_dim + b]
    }

    pub fn margin_ik(&self, a: usize, c: usize) -> u64 {
        self.ik[a * self.k_dim + c]
    }

    pub fn margin_jk(&self, b: usize, c: usize) -> u64 {
        self.jk[b * self.k_dim + c]
    }

    pub fn margin_i(&self, a: usize) -> u64 {
        self.i_margin[a]
    }

    pub fn margin_j(&self, b: usize) -> u64 {
        self.j_margin[b]
    }

    pub fn margin_k(&self, c: usize) -> u64 {
        self.k_margin[c]
    }

    /// Exact integer consistency of all cached margins against the cells.
    pub fn margins_consistent(&self) -> bool {
        let mut copy = self.clone();
        copy.recompute_margins();
        copy.ij == self.ij
            && copy.ik == self.ik
            && copy.jk == self.jk
            && copy.i_margin == self.i_margin
            && copy.j_margin == self.j_margin
            && copy.k_margin == self.k_margin
            && copy.total == self.total
    }

    /// The same table with the first two axes swapped.
    pub fn transposed(&self) -> ContingencyTable3 {
        let mut counts = vec![0u64; self.counts.len()];
        for a in 0..self.i_dim {
            for b in 0..self.j_dim {
                for c in 0..self.k_dim {
                    counts[(b * self.i_dim + a) * self.k_dim + c] = self.count(a, b, c);
                }
            }
        }
        ContingencyTable3::from_counts(counts, self.j_dim, self.i_dim, self.k_dim)
            .expect("dims preserved")
    }
}

/// Assembles the `I x J x K` table for one pair from the bit matrix.
pub fn build_table(bm: &BitMatrix, pair: PairIndex) -> Result<ContingencyTable3> {
    let p = bm.n_vars();
    if pair.j >= p {
        return Err(Error::IndexOutOfRange(format!(
            "pair {pair} out of range for {p} variables"
        )));
    }
    let i_dim = bm.arity(pair.i) as usize;
    let j_dim = bm.arity(pair.j) as usize;
    let k_dim = bm.n_classes();
    if i_dim < 2 || j_dim < 2 {
        return Err(Error::DegeneratePair {
            i: pair.i,
            j: pair.j,
        });
    }
    let mut counts = vec![0u64; i_dim * j_dim * k_dim];
    for a in 0..i_dim {
        for b in 0..j_dim {
            for c in 0..k_dim {
                counts[(a * j_dim + b) * k_dim + c] = bm.joint_count_raw(pair.i, a, pair.j, b, c);
            }
        }
    }
    ContingencyTable3::from_counts(counts, i_dim, j_dim, k_dim)
}
