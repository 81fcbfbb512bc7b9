use std::fmt;

use serde::{Deserialize, Serialize};

use super::design::SimulationDesign;
use super::rng::RNG_ALGORITHM;
use super::studies::{
    bias_study, convergence_check, coverage_study, BiasRecord, ConvergenceConfig, ConvergencePoint,
    CoverageRecord,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    Bias,
    Coverage,
    Width,
    Convergence,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Bias => "bias",
            StudyKind::Coverage => "coverage",
            StudyKind::Width => "width",
            StudyKind::Convergence => "convergence",
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasAggregate {
    pub mean_true_sd: f64,
    pub mean_skm_bias: f64,
    /// Standard error of `mean_skm_bias` across repetitions.
    pub skm_bias_se: f64,
    pub mean_bh_bias: f64,
    pub bh_bias_se: f64,
    /// Share of repetitions with `bh_bias > 0`.
    pub bh_positive_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageAggregate {
    pub mean_skm_coverage: f64,
    pub mean_bh_coverage: f64,
    pub mean_skm_width: f64,
    pub mean_bh_width: f64,
    /// `mean_bh_width / mean_skm_width`.
    pub width_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum StudyBody {
    Bias {
        design: SimulationDesign,
        aggregate: BiasAggregate,
        records: Vec<BiasRecord>,
    },
    Coverage {
        design: SimulationDesign,
        aggregate: CoverageAggregate,
        records: Vec<CoverageRecord>,
    },
    Convergence {
        config: ConvergenceConfig,
        records: Vec<ConvergencePoint>,
    },
}

/// Output of one study run, serializable as CSV rows or a JSON document
/// carrying the full configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudySummary {
    pub study: StudyKind,
    pub seed: u64,
    pub rng_algorithm: &'static str,
    pub total_dropped: usize,
    #[serde(flatten)]
    pub body: StudyBody,
}

fn mean_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, f64::NAN);
    }
    let ss: f64 = xs.map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0) / n).sqrt())
}

impl BiasAggregate {
    pub fn from_records(records: &[BiasRecord]) -> Self {
        let (mean_skm_bias, skm_bias_se) = mean_se(records.iter().map(|r| r.skm_bias));
        let (mean_bh_bias, bh_bias_se) = mean_se(records.iter().map(|r| r.bh_bias));
        let n = records.len() as f64;
        BiasAggregate {
            mean_true_sd: records.iter().map(|r| r.true_sd).sum::<f64>() / n,
            mean_skm_bias,
            skm_bias_se,
            mean_bh_bias,
            bh_bias_se,
            bh_positive_fraction: records.iter().filter(|r| r.bh_bias > 0.0).count() as f64 / n,
        }
    }
}

impl CoverageAggregate {
    pub fn from_records(records: &[CoverageRecord]) -> Self {
        let n = records.len() as f64;
        let mean = |f: fn(&CoverageRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
        let mean_skm_width = mean(|r| r.skm_mean_width);
        let mean_bh_width = mean(|r| r.bh_mean_width);
        CoverageAggregate {
            mean_skm_coverage: mean(|r| r.skm_coverage),
            mean_bh_coverage: mean(|r| r.bh_coverage),
            mean_skm_width,
            mean_bh_width,
            width_ratio: mean_bh_width / mean_skm_width,
        }
    }
}

impl StudySummary {
    /// Runs a bias, coverage or width study. Width reuses the coverage
    /// records; only the digest differs.
    pub fn run(kind: StudyKind, design: &SimulationDesign) -> Result<Self> {
        let body = match kind {
            StudyKind::Bias => {
                let records = bias_study(design)?;
                StudyBody::Bias {
                    design: design.clone(),
                    aggregate: BiasAggregate::from_records(&records),
                    records,
                }
            }
            StudyKind::Coverage | StudyKind::Width => {
                let records = coverage_study(design)?;
                StudyBody::Coverage {
                    design: design.clone(),
                    aggregate: CoverageAggregate::from_records(&records),
                    records,
                }
            }
            StudyKind::Convergence => {
                return Err(Error::InvalidDesign {
                    flag: "scales",
                    message: "convergence runs take a ConvergenceConfig".into(),
                })
            }
        };
        Ok(Self::wrap(kind, design.seed, body))
    }

    pub fn convergence(config: &ConvergenceConfig) -> Result<Self> {
        let records = convergence_check(config)?;
        let body = StudyBody::Convergence {
            config: config.clone(),
            records,
        };
        Ok(Self::wrap(StudyKind::Convergence, config.seed, body))
    }

    fn wrap(study: StudyKind, seed: u64, body: StudyBody) -> Self {
        let total_dropped = match &body {
            StudyBody::Bias { records, .. } => records.iter().map(|r| r.dropped).sum(),
            StudyBody::Coverage { records, .. } => records.iter().map(|r| r.dropped).sum(),
            StudyBody::Convergence { records, .. } => records.iter().map(|r| r.dropped).sum(),
        };
        StudySummary {
            study,
            seed,
            rng_algorithm: RNG_ALGORITHM,
            total_dropped,
            body,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let rows: Vec<Vec<String>> = match &self.body {
            StudyBody::Bias { records, .. } => {
                w.write_record(["rep", "true_sd", "skm_sd", "bh_sd", "skm_bias", "bh_bias"])
                    .expect("in-memory write");
                records
                    .iter()
                    .map(|r| {
                        vec![
                            r.rep.to_string(),
                            r.true_sd.to_string(),
                            r.skm_sd.to_string(),
                            r.bh_sd.to_string(),
                            r.skm_bias.to_string(),
                            r.bh_bias.to_string(),
                        ]
                    })
                    .collect()
            }
            StudyBody::Coverage { records, .. } => {
                w.write_record([
                    "setting",
                    "psi",
                    "skm_coverage",
                    "bh_coverage",
                    "skm_mean_width",
                    "bh_mean_width",
                    "dropped",
                ])
                .expect("in-memory write");
                records
                    .iter()
                    .map(|r| {
                        vec![
                            r.setting.to_string(),
                            r.psi.to_string(),
                            r.skm_coverage.to_string(),
                            r.bh_coverage.to_string(),
                            r.skm_mean_width.to_string(),
                            r.bh_mean_width.to_string(),
                            r.dropped.to_string(),
                        ]
                    })
                    .collect()
            }
            StudyBody::Convergence { records, .. } => {
                w.write_record([
                    "scale",
                    "mean_abs_dev",
                    "mean_abs_dev_se",
                    "mean_mhq",
                    "mean_mhq_se",
                    "dropped",
                ])
                .expect("in-memory write");
                records
                    .iter()
                    .map(|r| {
                        vec![
                            r.scale.to_string(),
                            r.mean_abs_dev.to_string(),
                            r.mean_abs_dev_se.to_string(),
                            r.mean_mhq.to_string(),
                            r.mean_mhq_se.to_string(),
                            r.dropped.to_string(),
                        ]
                    })
                    .collect()
            }
        };
        for row in rows {
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// One-line human summary.
    pub fn digest(&self) -> String {
        match &self.body {
            StudyBody::Bias {
                design,
                aggregate: g,
                records,
            } => format!(
                "bias: psi={} reps={} datasets={} mean_true_sd={:.4} skm_bias={:+.5} (se {:.5}) \
                 bh_bias={:+.5} (se {:.5}) bh_positive={:.0}% dropped={}",
                design.psi,
                records.len(),
                design.datasets_per_rep,
                g.mean_true_sd,
                g.mean_skm_bias,
                g.skm_bias_se,
                g.mean_bh_bias,
                g.bh_bias_se,
                100.0 * g.bh_positive_fraction,
                self.total_dropped,
            ),
            StudyBody::Coverage {
                design,
                aggregate: g,
                records,
            } => match self.study {
                StudyKind::Width => format!(
                    "width: psi={} settings={} skm_mean_width={:.4} bh_mean_width={:.4} \
                     bh/skm={:.4} dropped={}",
                    design.psi,
                    records.len(),
                    g.mean_skm_width,
                    g.mean_bh_width,
                    g.width_ratio,
                    self.total_dropped,
                ),
                _ => format!(
                    "coverage: psi={} settings={} skm_coverage={:.4} bh_coverage={:.4} \
                     bh/skm_width={:.4} dropped={}",
                    design.psi,
                    records.len(),
                    g.mean_skm_coverage,
                    g.mean_bh_coverage,
                    g.width_ratio,
                    self.total_dropped,
                ),
            },
            StudyBody::Convergence { config, records } => {
                let ladder: Vec<String> = records
                    .iter()
                    .map(|p| {
                        format!(
                            "s={}: {:.5}±{:.5}",
                            p.scale, p.mean_abs_dev, p.mean_abs_dev_se
                        )
                    })
                    .collect();
                format!(
                    "convergence: psi={} replicates={} mean|MHq-psi| {} dropped={}",
                    config.psi,
                    config.replicates,
                    ladder.join(", "),
                    self.total_dropped,
                )
            }
        }
    }
}
