//! Stratum-level ratios and the Mantel-Haenszel summary indicators.
//!
//! Every indicator is evaluated as a ratio of sums, never as a weighted sum
//! of stratum ratios, so strata with zero cells are handled without special
//! cases: they simply add nothing to one or both sums.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{Counts, TwoByTwo};

/// Risk ratios and odds ratio of one stratum. `None` marks a ratio whose
/// defining fraction has a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StratumRatios {
    pub row_rr: Option<f64>,
    pub col_rr: Option<f64>,
    pub odds_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndicatorKind {
    #[serde(rename = "MHRR")]
    Mhrr,
    #[serde(rename = "MHCR")]
    Mhcr,
    #[serde(rename = "MHOR")]
    Mhor,
    #[serde(rename = "MHq")]
    Mhq,
}

impl IndicatorKind {
    pub const ALL: [IndicatorKind; 4] = [
        IndicatorKind::Mhrr,
        IndicatorKind::Mhcr,
        IndicatorKind::Mhor,
        IndicatorKind::Mhq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IndicatorKind::Mhrr => "MHRR",
            IndicatorKind::Mhcr => "MHCR",
            IndicatorKind::Mhor => "MHOR",
            IndicatorKind::Mhq => "MHq",
        }
    }

    /// Raw stratum weight and numerator term of the closed form.
    fn terms(self, t: Counts) -> (f64, f64) {
        let [a, b, c, d] = t.as_f64();
        let n = a + b + c + d;
        match self {
            IndicatorKind::Mhrr => (c * (a + b) / n, a * (c + d) / n),
            IndicatorKind::Mhcr => (b * (a + c) / n, a * (b + d) / n),
            IndicatorKind::Mhor => (b * c / n, a * d / n),
            IndicatorKind::Mhq => {
                let denom = a + b + n;
                (b * (a + c) / denom, a * (b + d) / denom)
            }
        }
    }

    /// The stratum ratio this indicator averages.
    pub fn stratum_ratio(self, r: &StratumRatios) -> Option<f64> {
        match self {
            IndicatorKind::Mhrr => r.row_rr,
            IndicatorKind::Mhcr | IndicatorKind::Mhq => r.col_rr,
            IndicatorKind::Mhor => r.odds_ratio,
        }
    }
}

impl fmt::Display for IndicatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

fn proportion_ratio(x: u64, x_total: u64, y: u64, y_total: u64) -> Option<f64> {
    let px = ratio(x as f64, x_total as f64)?;
    let py = ratio(y as f64, y_total as f64)?;
    ratio(px, py)
}

pub fn stratum_ratios<T: TwoByTwo>(t: &T) -> StratumRatios {
    let Counts { a, b, c, d } = t.cells();
    StratumRatios {
        row_rr: proportion_ratio(a, a + b, c, c + d),
        col_rr: proportion_ratio(a, a + c, b, b + d),
        odds_ratio: ratio(a as f64, b as f64)
            .zip(ratio(c as f64, d as f64))
            .and_then(|(x, y)| ratio(x, y)),
    }
}

/// Numerator and denominator sums of an indicator's closed form.
pub(crate) fn indicator_sums<T: TwoByTwo>(strata: &[T], kind: IndicatorKind) -> (f64, f64) {
    strata.iter().fold((0.0, 0.0), |(num, den), t| {
        let (w, x) = kind.terms(t.cells());
        (num + x, den + w)
    })
}

/// Evaluates one of the four indicators on (already filtered) strata.
pub fn indicator<T: TwoByTwo>(strata: &[T], kind: IndicatorKind) -> Result<f64> {
    if strata.is_empty() {
        return Err(Error::NoInformativeStrata);
    }
    let (num, den) = indicator_sums(strata, kind);
    if den == 0.0 {
        return Err(Error::undefined(kind.name(), "denominator sum is zero"));
    }
    Ok(num / den)
}

/// Σ a(c+d)/n ÷ Σ c(a+b)/n
pub fn mh_row_risk_ratio<T: TwoByTwo>(strata: &[T]) -> Result<f64> {
    indicator(strata, IndicatorKind::Mhrr)
}

/// Σ a(b+d)/n ÷ Σ b(a+c)/n
pub fn mh_col_risk_ratio<T: TwoByTwo>(strata: &[T]) -> Result<f64> {
    indicator(strata, IndicatorKind::Mhcr)
}

/// Σ ad/n ÷ Σ bc/n
pub fn mh_odds_ratio<T: TwoByTwo>(strata: &[T]) -> Result<f64> {
    indicator(strata, IndicatorKind::Mhor)
}

/// Σ a(b+d)/(a+b+n) ÷ Σ b(a+c)/(a+b+n)
pub fn mhq<T: TwoByTwo>(strata: &[T]) -> Result<f64> {
    indicator(strata, IndicatorKind::Mhq)
}

/// Normalized stratum weights, aligned with the input strata.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub fn stratum_weights<T: TwoByTwo>(strata: &[T], kind: IndicatorKind) -> Result<WeightVector> {
    let raw: Vec<f64> = strata.iter().map(|t| kind.terms(t.cells()).0).collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::undefined(
            format!("{kind} weights"),
            "every raw stratum weight is zero",
        ));
    }
    Ok(WeightVector(raw.into_iter().map(|w| w / total).collect()))
}

/// Ratio of the mention rate in group G to the mention rate of the whole
/// stratum: `(a/(a+b)) / ((a+c)/n)`, equal to `RR / (1 + f(RR − 1))` with
/// `f = (a+b)/n`.
pub fn world_comparison_row<T: TwoByTwo>(t: &T) -> Result<f64> {
    let cells = t.cells();
    if stratum_ratios(t).row_rr.is_none() {
        return Err(Error::undefined(
            "world comparison",
            "row risk ratio is undefined",
        ));
    }
    if cells.mentioned() == 0 {
        return Err(Error::undefined(
            "world comparison",
            "no mentioned articles",
        ));
    }
    let [a, b, c, d] = cells.as_f64();
    let n = a + b + c + d;
    Ok((a / (a + b)) / ((a + c) / n))
}
