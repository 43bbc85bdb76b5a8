//! Bit-packed Boolean representation of a discretized matrix.
//!
//! Each (variable, level, response-class) triple owns one packed bit row of
//! length `n_c` (samples in that class), so the joint count of any two
//! levels inside a class is a word-wise AND followed by a population count.
//! Rows are stored contiguously, grouped by variable, which keeps a pair
//! sweep on two compact blocks of memory.
//!
//! Bit `s` of a row is sample `s` in stratum order (little-endian within
//! 64-bit words); samples keep their original relative order inside each
//! class. Padding bits beyond `n_c` are zero, so whole-word popcounts are
//! exact.

use crate::discretize::DiscreteMatrix;
use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[derive(Debug, Clone)]
pub struct BitMatrix {
    words: Vec<u64>,
    arities: Vec<u8>,
    n_classes: usize,
    strata_sizes: Vec<usize>,
    /// Words per stratum row segment: `ceil(n_c / 64)`.
    stratum_words: Vec<usize>,
    /// Word offset of class `c` inside one level's row group.
    stratum_offset: Vec<usize>,
    words_per_level: usize,
    var_offsets: Vec<usize>,
    n: usize,
}

/// Packs a discretized matrix into its Boolean representation.
pub fn build_bitmatrix(dm: &DiscreteMatrix) -> BitMatrix {
    let n = dm.n();
    let p = dm.p();
    let m = dm.response_arity() as usize;

    let mut strata_sizes = vec![0usize; m];
    for &c in dm.response_codes() {
        strata_sizes[c as usize] += 1;
    }
    let stratum_words: Vec<usize> = strata_sizes.iter().map(|&s| s.div_ceil(WORD_BITS)).collect();
    let mut stratum_offset = Vec::with_capacity(m);
    let mut acc = 0usize;
    for &w in &stratum_words {
        stratum_offset.push(acc);
        acc += w;
    }
    let words_per_level = acc;

    let mut var_offsets = Vec::with_capacity(p);
    let mut total_words = 0usize;
    for k in 0..p {
        var_offsets.push(total_words);
        total_words += dm.arity(k) as usize * words_per_level;
    }
    let mut words = vec![0u64; total_words];

    // Position of each sample inside its stratum, preserving input order.
    let mut pos = vec![0usize; n];
    let mut counters = vec![0usize; m];
    for (s, &c) in dm.response_codes().iter().enumerate() {
        pos[s] = counters[c as usize];
        counters[c as usize] += 1;
    }

    for k in 0..p {
        let codes = dm.column_codes(k);
        let base = var_offsets[k];
        for (s, &a) in codes.iter().enumerate() {
            let c = dm.response_codes()[s] as usize;
            let bit = pos[s];
            let w = base + a as usize * words_per_level + stratum_offset[c] + bit / WORD_BITS;
            words[w] |= 1u64 << (bit % WORD_BITS);
        }
    }

    BitMatrix {
        words,
        arities: dm.arities().to_vec(),
        n_classes: m,
        strata_sizes,
        stratum_words,
        stratum_offset,
        words_per_level,
        var_offsets,
        n,
    }
}

impl BitMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_vars(&self) -> usize {
        self.arities.len()
    }

    pub fn arity(&self, var: usize) -> u8 {
        self.arities[var]
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn strata_sizes(&self) -> &[usize] {
        &self.strata_sizes
    }

    /// Total words stored, for memory accounting.
    pub fn word_len(&self) -> usize {
        self.words.len()
    }

    /// The packed row for `(var, level, class)`.
    pub fn row(&self, var: usize, level: usize, class: usize) -> &[u64] {
        assert!(var < self.n_vars(), "variable {var} out of range");
        assert!(
            level < self.arities[var] as usize,
            "level {level} out of range for variable {var}"
        );
        assert!(class < self.n_classes, "class {class} out of range");
        let start =
            self.var_offsets[var] + level * self.words_per_level + self.stratum_offset[class];
        &self.words[start..start + self.stratum_words[class]]
    }

    /// Count of samples with `var = level` in response class `class`.
    pub fn level_count(&self, var: usize, level: usize, class: usize) -> u64 {
        self.row(var, level, class)
            .iter()
            .map(|w| u64::from(w.count_ones()))
            .sum()
    }

    /// Joint count `#{samples: var_i = a, var_j = b, class = c}` by AND +
    /// popcount over the two packed rows.
    pub fn joint_count(
        &self,
        var_i: usize,
        a: usize,
        var_j: usize,
        b: usize,
        class: usize,
    ) -> Result<u64> {
        let bounds_ok = var_i < self.n_vars()
            && var_j < self.n_vars()
            && class < self.n_classes
            && a < self.arities[var_i] as usize
            && b < self.arities[var_j] as usize;
        if !bounds_ok {
            return Err(Error::IndexOutOfRange(format!(
                "joint_count({var_i}, {a}, {var_j}, {b}, {class})"
            )));
        }
        Ok(self.joint_count_raw(var_i, a, var_j, b, class))
    }

    #[inline]
    pub(crate) fn joint_count_raw(
        &self,
        var_i: usize,
        a: usize,
        var_j: usize,
        b: usize,
        class: usize,
    ) -> u64 {
        let ra = self.row(var_i, a, class);
        let rb = self.row(var_j, b, class);
        ra.iter()
            .zip(rb)
            .map(|(x, y)| u64::from((x & y).count_ones()))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::DiscreteMatrix;
    use proptest::prelude::*;

    /// Packs a bit string like "10001000" (leftmost char = first sample).
    fn bits(s: &str) -> Vec<u64> {
        let mut words = vec![0u64; s.len().div_ceil(64)];
        for (i, ch) in s.chars().enumerate() {
            if ch == '1' {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        words
    }

    /// The worked 16-sample example: two 3-level variables, binary response,
    /// first 8 samples in class 0. Levels here are zero-based, one below the
    /// printed 1..3 labels.
    fn worked_example() -> DiscreteMatrix {
        let x1: Vec<u8> = [1, 3, 2, 3, 1, 2, 3, 2, 2, 2, 1, 1, 3, 2, 2, 1]
            .iter()
            .map(|v| v - 1)
            .collect();
        let x2: Vec<u8> = [3, 2, 1, 1, 3, 2, 2, 1, 2, 3, 2, 3, 1, 2, 3, 2]
            .iter()
            .map(|v| v - 1)
            .collect();
        let y = vec![0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1];
        DiscreteMatrix::from_codes(vec![x1, x2], y, 2).unwrap()
    }

    #[test]
    fn worked_example_rows_match_printed_bit_strings() {
        let bm = build_bitmatrix(&worked_example());
        assert_eq!(bm.strata_sizes(), &[8, 8]);

        assert_eq!(bm.row(0, 0, 0), bits("10001000").as_slice());
        assert_eq!(bm.row(0, 1, 0), bits("00100101").as_slice());
        assert_eq!(bm.row(0, 2, 0), bits("01010010").as_slice());
        assert_eq!(bm.row(1, 0, 0), bits("00110001").as_slice());
        assert_eq!(bm.row(1, 1, 0), bits("01000110").as_slice());
        assert_eq!(bm.row(1, 2, 0), bits("10001000").as_slice());

        assert_eq!(bm.row(0, 0, 1), bits("00110001").as_slice());
        assert_eq!(bm.row(0, 1, 1), bits("11000110").as_slice());
        assert_eq!(bm.row(0, 2, 1), bits("00001000").as_slice());
        assert_eq!(bm.row(1, 0, 1), bits("00001000").as_slice());
        assert_eq!(bm.row(1, 1, 1), bits("10100101").as_slice());
        assert_eq!(bm.row(1, 2, 1), bits("01010010").as_slice());
    }

    #[test]
    fn worked_example_and_counts() {
        let bm = build_bitmatrix(&worked_example());
        // Printed levels 2 & 2: AND of 00100101 and 01000110 is 00000100.
        let and_word = bm.row(0, 1, 0)[0] & bm.row(1, 1, 0)[0];
        assert_eq!(vec![and_word], bits("00000100"));
        assert_eq!(bm.joint_count(0, 1, 1, 1, 0).unwrap(), 1);
        // Printed levels 1 & 3 in class 0: two samples by direct enumeration.
        assert_eq!(bm.joint_count(0, 0, 1, 2, 0).unwrap(), 2);
    }

    #[test]
    fn single_sample_sets_one_bit_per_variable() {
        let dm = DiscreteMatrix::from_codes(vec![vec![0u8]], vec![0u8], 2).unwrap();
        let bm = build_bitmatrix(&dm);
        let total: u64 = (0..bm.n_vars())
            .map(|k| {
                (0..bm.arity(k) as usize)
                    .map(|a| {
                        (0..bm.n_classes())
                            .map(|c| bm.level_count(k, a, c))
                            .sum::<u64>()
                    })
                    .sum::<u64>()
            })
            .sum();
        assert_eq!(total, 1);
    }

    #[test]
    fn out_of_range_indices_error() {
        let bm = build_bitmatrix(&worked_example());
        assert!(bm.joint_count(0, 3, 1, 0, 0).is_err());
        assert!(bm.joint_count(2, 0, 1, 0, 0).is_err());
        assert!(bm.joint_count(0, 0, 1, 0, 2).is_err());
    }

    fn random_discrete(
        n: usize,
        p: usize,
        arity: u8,
        seed: u64,
    ) -> DiscreteMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<u8>> = (0..p)
            .map(|_| (0..n).map(|_| rng.random_range(0..arity)).collect())
            .collect();
        // Force every level and both classes to appear.
        let mut cols = cols;
        for col in &mut cols {
            for (lvl, slot) in col.iter_mut().take(arity as usize).enumerate() {
                *slot = lvl as u8;
            }
        }
        let mut y: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        y[0] = 0;
        y[1] = 1;
        DiscreteMatrix::from_codes(cols, y, 2).unwrap()
    }

    #[test]
    fn popcounts_match_naive_loops() {
        for seed in 0..30 {
            let n = 1 + (seed as usize * 37) % 200;
            let dm = random_discrete(n.max(4), 5, 4, seed);
            let bm = build_bitmatrix(&dm);
            for k in 0..dm.p() {
                for a in 0..dm.arity(k) as usize {
                    for c in 0..2usize {
                        let naive = dm
                            .column_codes(k)
                            .iter()
                            .zip(dm.response_codes())
                            .filter(|&(&code, &y)| code as usize == a && y as usize == c)
                            .count() as u64;
                        assert_eq!(bm.level_count(k, a, c), naive);
                    }
                }
            }
        }
    }

    #[test]
    fn memory_accounting_bound() {
        let dm = random_discrete(200, 5, 4, 7);
        let bm = build_bitmatrix(&dm);
        let bits_stored = bm.word_len() * 64;
        let bound: usize = (0..dm.p())
            .map(|k| dm.arity(k) as usize * (dm.n() + 2 * 64))
            .sum();
        assert!(bits_stored <= bound, "{bits_stored} > {bound}");
    }

    proptest! {
        /// Level rows partition each stratum: OR over levels is all-ones on
        /// the first n_c bits, pairwise ANDs are zero, and joint counts are
        /// symmetric and sum to n.
        #[test]
        fn partition_and_symmetry(seed in 0u64..500) {
            let n = 4 + (seed as usize % 150);
            let dm = random_discrete(n, 3, 3, seed);
            let bm = build_bitmatrix(&dm);

            for k in 0..dm.p() {
                for c in 0..2usize {
                    let n_c = bm.strata_sizes()[c];
                    let words = n_c.div_ceil(64);
                    let mut or_acc = vec![0u64; words];
                    for a in 0..dm.arity(k) as usize {
                        let row = bm.row(k, a, c);
                        for (acc, w) in or_acc.iter_mut().zip(row) {
                            prop_assert_eq!(*acc & w, 0, "levels overlap");
                            *acc |= w;
                        }
                    }
                    let ones: u64 = or_acc.iter().map(|w| u64::from(w.count_ones())).sum();
                    prop_assert_eq!(ones as usize, n_c);
                }
            }

            let mut total = 0u64;
            for a in 0..dm.arity(0) as usize {
                for b in 0..dm.arity(1) as usize {
                    for c in 0..2usize {
                        let fwd = bm.joint_count(0, a, 1, b, c).unwrap();
                        let rev = bm.joint_count(1, b, 0, a, c).unwrap();
                        prop_assert_eq!(fwd, rev);
                        total += fwd;
                    }
                }
            }
            prop_assert_eq!(total as usize, n);
        }

        /// Marginalization identity: summing joint counts over the partner
        /// variable and classes recovers the level count of (i, a).
        #[test]
        fn joint_counts_marginalize(seed in 0u64..200) {
            let n = 4 + (seed as usize % 100);
            let dm = random_discrete(n, 2, 3, seed.wrapping_add(999));
            let bm = build_bitmatrix(&dm);
            for a in 0..dm.arity(0) as usize {
                let mut sum = 0u64;
                for b in 0..dm.arity(1) as usize {
                    for c in 0..2usize {
                        sum += bm.joint_count(0, a, 1, b, c).unwrap();
                    }
                }
                let level_total: u64 = (0..2usize).map(|c| bm.level_count(0, a, c)).sum();
                prop_assert_eq!(sum, level_total);
            }
        }
    }
}
