//! How much estimation efficiency does a median split cost? Tabulates the
//! arcsine identity for the split-indicator correlation and the
//! variance ratio of the sine-transformed concordance estimator against the
//! sample Pearson correlation, next to their analytic curves.
//!
//! ```bash
//! cargo run --release --example efficiency_loss
//! ```

use pairscreen::efficiency::{
    efficiency_report, ratio_lower_bound, ratio_upper_bound,
};

fn main() {
    let grid: Vec<f64> = (0..=8).map(|k| k as f64 * 0.1).collect();
    let report = efficiency_report(&grid, 500, 400, 17);

    println!(
        "variance ratio is bounded in [{:.4}, {:.4}]\n",
        ratio_lower_bound(),
        ratio_upper_bound()
    );
    println!("  rho   tau=(2/pi)asin(rho)   indicator_corr   rho_tau   var_ratio   var_ratio_theory");
    for row in &report.rows {
        println!(
            "  {:.1}   {:>19.4}   {:>14.4}   {:>7.4}   {:>9.4}   {:>16.4}",
            row.rho,
            row.tau_theory,
            row.indicator_corr,
            row.rho_tau,
            row.variance_ratio,
            row.variance_ratio_theory
        );
    }
    println!("\n(n = {} per replication, {} replications per grid point)", report.n, report.reps);
}
