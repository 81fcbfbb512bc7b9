//! Full analysis of one dataset, rendered as text, JSON or CSV.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::estimators::{stratum_ratios, stratum_weights, world_comparison_row, IndicatorKind};
use crate::table::{filter_informative, ExclusionReason, StratifiedDataset};
use crate::variance::{estimate, IndicatorEstimate, VarianceMethod};

/// Annotation attached to every BH interval.
pub const BH_NOTE: &str = "deprecated: overestimates variance";

/// Rendering of an undefined ratio in every output format.
pub const UNDEFINED: &str = "undefined";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub level: f64,
    /// Include BH intervals for MHq next to the default SKM ones.
    pub include_bh: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            level: 0.95,
            include_bh: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaybeRatio(pub Option<f64>);

impl Serialize for MaybeRatio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Some(x) => s.serialize_f64(x),
            None => s.serialize_str(UNDEFINED),
        }
    }
}

impl MaybeRatio {
    fn fixed(self, places: usize) -> String {
        self.0
            .map_or_else(|| UNDEFINED.to_string(), |x| format!("{x:.places$}"))
    }

    fn full(self) -> String {
        self.0
            .map_or_else(|| UNDEFINED.to_string(), |x| x.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumRow {
    pub label: String,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub row_rr: MaybeRatio,
    pub col_rr: MaybeRatio,
    pub odds_ratio: MaybeRatio,
    /// Group mention rate over the stratum-wide mention rate.
    pub world_comparison: MaybeRatio,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excluded: Option<ExclusionReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightRow {
    pub indicator: IndicatorKind,
    /// Normalized weights of the retained strata, in input order.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    #[serde(flatten)]
    pub estimate: IndicatorEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMeta {
    pub tool: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub meta: ReportMeta,
    pub level: f64,
    pub retained: Vec<String>,
    pub strata: Vec<StratumRow>,
    pub weights: Vec<WeightRow>,
    pub estimates: Vec<EstimateRow>,
}

impl AnalysisReport {
    /// Analyzes `ds` as parsed, i.e. before [`filter_informative`]. Every
    /// stratum gets a ratio row; only informative strata enter the pooled
    /// indicators.
    pub fn build(ds: &StratifiedDataset, opts: &ReportOptions) -> Result<Self> {
        let filtered = filter_informative(ds.clone())?;
        let excluded_reason = |label: &str| {
            filtered
                .excluded()
                .iter()
                .find(|e| e.table.label == label)
                .map(|e| e.reason)
        };
        let strata = ds
            .strata()
            .iter()
            .map(|t| {
                let r = stratum_ratios(t);
                StratumRow {
                    label: t.label.clone(),
                    a: t.a(),
                    b: t.b(),
                    c: t.c(),
                    d: t.d(),
                    row_rr: MaybeRatio(r.row_rr),
                    col_rr: MaybeRatio(r.col_rr),
                    odds_ratio: MaybeRatio(r.odds_ratio),
                    world_comparison: MaybeRatio(world_comparison_row(t).ok()),
                    excluded: excluded_reason(&t.label),
                }
            })
            .collect();

        let kept = filtered.strata();
        let weights = IndicatorKind::ALL
            .iter()
            .map(|&kind| {
                Ok(WeightRow {
                    indicator: kind,
                    weights: stratum_weights(kept, kind)?.into_inner(),
                })
            })
            .collect::<Result<_>>()?;

        let mut estimates = Vec::new();
        for kind in IndicatorKind::ALL {
            let method = VarianceMethod::default_for(kind);
            estimates.push(EstimateRow {
                estimate: estimate(kept, kind, method, opts.level)?,
                note: None,
            });
            if kind == IndicatorKind::Mhq && opts.include_bh {
                estimates.push(EstimateRow {
                    estimate: estimate(kept, kind, VarianceMethod::Bh, opts.level)?,
                    note: Some(BH_NOTE),
                });
            }
        }

        Ok(AnalysisReport {
            meta: ReportMeta {
                tool: "mhq",
                version: env!("CARGO_PKG_VERSION"),
            },
            level: opts.level,
            retained: kept.iter().map(|t| t.label.clone()).collect(),
            strata,
            weights,
            estimates,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned tables with ratios and estimates at 2 decimal places.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let excluded: Vec<_> = self
            .strata
            .iter()
            .filter(|s| s.excluded.is_some())
            .collect();
        let _ = writeln!(
            out,
            "Strata: {} retained, {} excluded",
            self.retained.len(),
            excluded.len()
        );
        for s in &excluded {
            let _ = writeln!(
                out,
                "  excluded {}: {}",
                s.label,
                s.excluded.expect("filtered")
            );
        }

        let width = self
            .strata
            .iter()
            .map(|s| s.label.len())
            .chain(std::iter::once("stratum".len()))
            .max()
            .unwrap_or(0);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<width$}  {:>6} {:>6} {:>6} {:>6}  {:>9} {:>9} {:>9} {:>9}",
            "stratum", "a", "b", "c", "d", "row RR", "col RR", "OR", "world"
        );
        for s in &self.strata {
            let _ = writeln!(
                out,
                "{:<width$}  {:>6} {:>6} {:>6} {:>6}  {:>9} {:>9} {:>9} {:>9}",
                s.label,
                s.a,
                s.b,
                s.c,
                s.d,
                s.row_rr.fixed(2),
                s.col_rr.fixed(2),
                s.odds_ratio.fixed(2),
                s.world_comparison.fixed(2),
            );
        }

        let _ = writeln!(out);
        let _ = writeln!(out, "Indicators ({}% CI):", fmt_level(self.level));
        for e in &self.estimates {
            let est = &e.estimate;
            let _ = write!(
                out,
                "  {:<5} {:>6.2}  [{:.2}, {:.2}]  {}",
                est.kind.name(),
                est.value,
                est.ci_low,
                est.ci_high,
                est.method
            );
            if let Some(note) = e.note {
                let _ = write!(out, "  ({note})");
            }
            let _ = writeln!(out);
        }

        let _ = writeln!(out);
        let _ = writeln!(out, "Weights ({}):", self.retained.join(", "));
        for w in &self.weights {
            let ws: Vec<String> = w.weights.iter().map(|x| format!("{x:.3}")).collect();
            let _ = writeln!(out, "  {:<5} {}", w.indicator.name(), ws.join("  "));
        }
        out
    }

    /// Long-format CSV `section,label,quantity,value` at full precision.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut row = |section: &str, label: &str, quantity: &str, value: String| {
            w.write_record([section, label, quantity, &value])
                .expect("in-memory write");
        };
        row("section", "label", "quantity", "value".into());
        for s in &self.strata {
            row("stratum", &s.label, "row_rr", s.row_rr.full());
            row("stratum", &s.label, "col_rr", s.col_rr.full());
            row("stratum", &s.label, "odds_ratio", s.odds_ratio.full());
            row(
                "stratum",
                &s.label,
                "world_comparison",
                s.world_comparison.full(),
            );
            if let Some(reason) = s.excluded {
                row("stratum", &s.label, "excluded", reason.to_string());
            }
        }
        for wr in &self.weights {
            for (label, x) in self.retained.iter().zip(&wr.weights) {
                row("weight", label, wr.indicator.name(), x.to_string());
            }
        }
        for e in &self.estimates {
            let est = &e.estimate;
            let label = format!("{} {}", est.kind.name(), est.method);
            row("estimate", &label, "value", est.value.to_string());
            row(
                "estimate",
                &label,
                "log_variance",
                est.log_variance.to_string(),
            );
            row("estimate", &label, "ci_low", est.ci_low.to_string());
            row("estimate", &label, "ci_high", est.ci_high.to_string());
            row("estimate", &label, "level", est.level.to_string());
            if let Some(note) = e.note {
                row("estimate", &label, "note", note.to_string());
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 labels")
    }
}

fn fmt_level(level: f64) -> String {
    let pct = level * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round())
    } else {
        format!("{pct}")
    }
}
