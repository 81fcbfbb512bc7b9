//! Mantel-Haenszel indicators for stratified 2×2 tables.
//!
//! Each stratum cross-classifies articles by group membership (`G`) and
//! whether they mention a topic. Cells follow the layout
//!
//! | | mentioned | not mentioned |
//! |---|---|---|
//! | in `G` | `a` | `b` |
//! | not in `G` | `c` | `d` |
//!
//! The crate computes the four pooled indicators (MHRR, MHCR, MHOR, MHq),
//! their log-scale variances and Wald intervals, and runs the Monte Carlo
//! studies that check the MHq variance estimators.
//!
//! ```
//! use mhq_core::{estimate, filter_informative, parse_csv, IndicatorKind, VarianceMethod};
//!
//! let ds = parse_csv("stratum,a,b,c,d\ncat1,26,7,18,13\ncat2,15,7,15,9\ncat3,3,3,13,9\n")?;
//! let kept = filter_informative(ds)?;
//! let e = estimate(kept.strata(), IndicatorKind::Mhq, VarianceMethod::Skm, 0.95)?;
//! assert_eq!(format!("{:.2} [{:.2}, {:.2}]", e.value, e.ci_low, e.ci_high), "1.30 [0.84, 2.00]");
//! # Ok::<(), mhq_core::Error>(())
//! ```

pub mod error;
pub mod estimators;
pub mod normal;
pub mod report;
pub mod simulation;
pub mod table;
pub mod variance;

pub use error::{Error, ErrorCategory, Result};
pub use estimators::{
    indicator, mh_col_risk_ratio, mh_odds_ratio, mh_row_risk_ratio, mhq, stratum_ratios,
    stratum_weights, world_comparison_row, IndicatorKind, StratumRatios, WeightVector,
};
pub use table::{
    filter_informative, from_cross_table, parse_csv, parse_json, Counts, CrossTableRow,
    ExcludedStratum, ExclusionReason, StratifiedDataset, StratumTable, TwoByTwo,
};
pub use variance::{confidence_interval, estimate, IndicatorEstimate, SkmRatio, VarianceMethod};
