//! Exhaustive screening of pairwise interaction effects in high-dimensional
//! generalized linear models.
//!
//! Two screening routes share one ranking-and-selection pipeline:
//!
//! * **SSI** — for every pair (i, j), fit the marginal GLM with and without
//!   the product column X_i X_j and rank pairs by the empirical
//!   likelihood increment. Exact, O(p^2 n), practical into the thousands of
//!   predictors.
//! * **BOLT-SSI** — discretize each variable by equal-frequency binning,
//!   pack the level indicators into bit rows per response class, build each
//!   pair's three-way contingency table with AND + popcount, and score the
//!   likelihood gap between the saturated and homogeneous-association
//!   log-linear fits (iterative proportional fitting). The deviance
//!   `2 * increment` refers to chi-squared with `(I-1)(J-1)(K-1)` degrees
//!   of freedom. An optional Kirkwood-superposition pass upper-bounds the
//!   increment in closed form and prunes hopeless pairs before any IPF.
//!
//! Selection is by top-d (`d = n - 1` or `max(n, p)` by convention), a raw
//! score threshold, or a Bonferroni-corrected chi-squared critical value.
//!
//! ```
//! use pairscreen::{screen, Method, ScreenConfig, Selection, SimDesign, simulate};
//!
//! // A small planted-interaction design, screened by BOLT-SSI.
//! let design = SimDesign::example(1, 120, 25, 0.3, 1.0, 7).unwrap();
//! let data = simulate::generate(&design).unwrap();
//! let cfg = ScreenConfig {
//!     method: Method::BoltSsi,
//!     selection: Selection::TopD(30),
//!     ..Default::default()
//! };
//! let result = screen(&data, &cfg).unwrap();
//! assert_eq!(result.n_selected, 30);
//! ```
//!
//! The `examples/` directory walks each capability end to end; the
//! `pairscreen` binary wraps the same pipeline behind `screen`, `simulate`,
//! `bench`, and `check-efficiency` subcommands.

// The table and margin kernels read several arrays through one dense index;
// explicit loops are the clearer form there.
#![allow(clippy::needless_range_loop)]

pub mod bitmat;
pub mod chisq;
pub mod contingency;
pub mod dataset;
pub mod discretize;
pub mod efficiency;
pub mod error;
pub mod glm;
pub mod loglinear;
pub mod screen;
pub mod simulate;

pub use bitmat::{build_bitmatrix, BitMatrix};
pub use chisq::{chisq_cdf, chisq_critical, chisq_sf};
pub use contingency::{build_table, ContingencyTable3};
pub use dataset::{
    load_delimited, pair_count, pair_iterator, Dataset, Family, HeaderMode, LoadOptions,
    PairIndex, ResponseSelector,
};
pub use discretize::{discretize, DiscretizationSpec, DiscreteMatrix};
pub use error::{Error, Result};
pub use glm::{fit_marginal, ssi_score, MarginalFit};
pub use loglinear::{
    ipf_fit, ksa_loglik, saturated_loglik, score_pair, IpfOptions, LogLinearFit, PairScore,
    ScoreOptions,
};
pub use screen::{
    screen, select, KsaGamma, Method, RankedPair, ScreenConfig, ScreenResult, Selection,
    SkipReason,
};
pub use simulate::{Heredity, SimDesign, SimMetrics};
