//! Bonferroni-corrected chi-squared thresholds across problem sizes: the
//! critical values that a pair's deviance must clear when testing all
//! p(p-1)/2 interactions at familywise level 0.05.
//!
//! ```bash
//! cargo run --release --example bonferroni_thresholds
//! ```

use pairscreen::chisq::{chisq_critical, chisq_sf};
use pairscreen::pair_count;

fn main() {
    println!("  p            q = p(p-1)/2     alpha/q        df=1      df=4");
    for &p in &[100usize, 1_000, 10_000, 319_156, 1_000_000] {
        let q = pair_count(p);
        let level = 0.05 / q as f64;
        let c1 = chisq_critical(1, level).unwrap();
        let c4 = chisq_critical(4, level).unwrap();
        println!("  {p:<12} {q:<16} {level:<12.3e} {c1:<9.3} {c4:<9.3}");
    }

    // Round-trip sanity at an extreme tail.
    let level = 0.05 / pair_count(319_156) as f64;
    let x = chisq_critical(4, level).unwrap();
    println!(
        "\nround trip at the GWAS scale: sf(critical) / alpha = {:.6}",
        chisq_sf(x, 4) / level
    );
}
