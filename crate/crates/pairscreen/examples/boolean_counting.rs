//! The bit-packed Boolean representation on a tiny worked dataset: pack two
//! 3-level variables into per-(level, class) bit rows, then count a joint
//! cell with a single AND + popcount.
//!
//! ```bash
//! cargo run --release --example boolean_counting
//! ```

use pairscreen::bitmat::build_bitmatrix;
use pairscreen::contingency::build_table;
use pairscreen::discretize::DiscreteMatrix;
use pairscreen::PairIndex;

fn row_string(words: &[u64], len: usize) -> String {
    (0..len)
        .map(|b| {
            if words[b / 64] >> (b % 64) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

fn main() {
    // 16 samples, two discretized predictors with 3 levels each; the first
    // eight samples fall in response class 0, the rest in class 1.
    let x1 = vec![0u8, 2, 1, 2, 0, 1, 2, 1, 1, 1, 0, 0, 2, 1, 1, 0];
    let x2 = vec![2u8, 1, 0, 0, 2, 1, 1, 0, 1, 2, 1, 2, 0, 1, 2, 1];
    let y = vec![0u8, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1];
    let dm = DiscreteMatrix::from_codes(vec![x1, x2], y, 2).expect("valid codes");

    let bm = build_bitmatrix(&dm);
    println!("strata sizes: {:?}", bm.strata_sizes());
    println!("\nbit rows (class 0 | class 1):");
    for var in 0..bm.n_vars() {
        for level in 0..bm.arity(var) as usize {
            let c0 = row_string(bm.row(var, level, 0), bm.strata_sizes()[0]);
            let c1 = row_string(bm.row(var, level, 1), bm.strata_sizes()[1]);
            println!("  x{}={}:  {}  {}", var + 1, level + 1, c0, c1);
        }
    }

    // Joint count of (x1 level 2, x2 level 2) within class 0: AND the two
    // rows and count set bits.
    let a = bm.row(0, 1, 0);
    let b = bm.row(1, 1, 0);
    let and_word = a[0] & b[0];
    println!(
        "\nAND({}, {}) = {}",
        row_string(a, 8),
        row_string(b, 8),
        row_string(&[and_word], 8)
    );
    println!(
        "joint count (x1=2, x2=2, class 0) = {}",
        bm.joint_count(0, 1, 1, 1, 0).unwrap()
    );

    // The full 3x3x2 contingency table falls out of the same operation.
    let table = build_table(&bm, PairIndex::new(0, 1)).unwrap();
    println!("\ncontingency table ({}x{}x{}):", table.dims().0, table.dims().1, table.dims().2);
    for c in 0..2 {
        println!("  class {c}:");
        for a in 0..3 {
            let row: Vec<u64> = (0..3).map(|b| table.count(a, b, c)).collect();
            println!("    {row:?}");
        }
    }
    println!("total n = {}", table.n());
}
