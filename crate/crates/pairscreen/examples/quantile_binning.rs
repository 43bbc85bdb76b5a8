//! Equal-frequency discretization up close: cutpoints as order statistics,
//! tie handling, level collapsing, and the strict median split for a
//! continuous response.
//!
//! ```bash
//! cargo run --release --example quantile_binning
//! ```

use pairscreen::dataset::{Dataset, Family};
use pairscreen::discretize::{bin_column, discretize, median, DiscretizationSpec};

fn main() {
    println!("tie-free column, arity 3:");
    let values = [0.9, 2.1, -0.4, 3.3, 1.7, -1.2, 0.1, 2.8, 1.0];
    let (codes, arity) = bin_column(&values, 3);
    for (v, c) in values.iter().zip(&codes) {
        println!("  {v:>5.1} -> level {c}");
    }
    println!("  effective arity {arity}\n");

    println!("heavy ties collapse levels:");
    let tied = [1.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 9.0];
    let (codes, arity) = bin_column(&tied, 4);
    println!("  values {tied:?}");
    println!("  codes  {codes:?}  (arity requested 4, effective {arity})\n");

    println!("median split of a continuous response uses the strict rule:");
    let y = [-1.0, 0.5, 2.0, -3.0];
    println!("  y = {y:?}, median = {}", median(&y));
    let ds = Dataset::from_columns(
        vec![vec![1.0, 2.0, 3.0, 4.0], vec![4.0, 1.0, 3.0, 2.0]],
        y.to_vec(),
        Family::Gaussian,
        None,
    )
    .unwrap();
    let dm = discretize(&ds, &DiscretizationSpec::uniform(2).unwrap()).unwrap();
    println!("  response codes = {:?}  (1 iff y > median)", dm.response_codes());

    println!("\nrank invariance: exp() preserves every code:");
    let transformed: Vec<f64> = values.iter().map(|v| v.exp()).collect();
    let (codes_raw, _) = bin_column(&values, 3);
    let (codes_exp, _) = bin_column(&transformed, 3);
    println!("  raw codes {codes_raw:?}");
    println!("  exp codes {codes_exp:?}  equal: {}", codes_raw == codes_exp);
}
