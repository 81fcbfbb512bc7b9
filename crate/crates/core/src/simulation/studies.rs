use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design::SimulationDesign;
use super::rng::{Stream, Streams};
use crate::error::{Error, Result};
use crate::estimators::mhq;
use crate::table::{Counts, StratifiedDataset, StratumTable};
use crate::variance::{
    confidence_interval, validate_params, var_bh_log_mhq, var_bh_log_mhq_true, var_skm_log_mhq,
    var_skm_log_mhq_true, BinomialParams,
};

/// Nominal level of the intervals checked by the coverage study.
pub const COVERAGE_LEVEL: f64 = 0.95;

/// Default replicate count per scale of [`convergence_check`].
pub const DEFAULT_CONVERGENCE_REPLICATES: usize = 1000;

/// `k` draws from `Uniform[p1_low, p1_high)`; exactly `p1_low` when the
/// bounds coincide.
pub fn draw_p1<R: Rng + ?Sized>(design: &SimulationDesign, rng: &mut R) -> Vec<f64> {
    (0..design.k)
        .map(|_| {
            if design.p1_high > design.p1_low {
                rng.random_range(design.p1_low..design.p1_high)
            } else {
                design.p1_low
            }
        })
        .collect()
}

/// Column-binomial sampler for a fixed parameter set.
#[derive(Debug, Clone)]
pub struct DatasetSampler {
    strata: Vec<(u64, Binomial, u64, Binomial)>,
}

impl DatasetSampler {
    pub fn new(params: &[BinomialParams]) -> Result<Self> {
        validate_params(params)?;
        let strata = params
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let bin = |n, prob| {
                    Binomial::new(n, prob).map_err(|e| Error::InvalidParams {
                        stratum: i,
                        message: e.to_string(),
                    })
                };
                Ok((p.n1, bin(p.n1, p.p1)?, p.n2, bin(p.n2, p.p2)?))
            })
            .collect::<Result<_>>()?;
        Ok(DatasetSampler { strata })
    }

    /// One dataset, drawing `a_1, b_1, a_2, b_2, …` in that order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Counts> {
        self.strata
            .iter()
            .map(|(n1, bin_a, n2, bin_b)| {
                let a = bin_a.sample(rng);
                let b = bin_b.sample(rng);
                Counts::new(a, b, n1 - a, n2 - b)
            })
            .collect()
    }
}

/// Raw counts of one simulated dataset.
pub fn generate_counts<R: Rng + ?Sized>(
    params: &[BinomialParams],
    rng: &mut R,
) -> Result<Vec<Counts>> {
    Ok(DatasetSampler::new(params)?.sample(rng))
}

/// One simulated dataset with strata labelled `s1, s2, …`.
pub fn generate_dataset<R: Rng + ?Sized>(
    design: &SimulationDesign,
    p1s: &[f64],
    rng: &mut R,
) -> Result<StratifiedDataset> {
    let counts = generate_counts(&design.params(p1s), rng)?;
    let strata = counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| StratumTable::new(format!("s{}", i + 1), c.a, c.b, c.c, c.d))
        .collect::<Result<Vec<_>>>()?;
    StratifiedDataset::new(strata)
}

/// Sample standard deviation of ln(MHq) over simulated datasets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub sd: f64,
    pub defined: usize,
    pub dropped: usize,
}

fn check_drops(rep: usize, dropped: usize, total: usize) -> Result<()> {
    if dropped * 100 > total {
        return Err(Error::ExcessiveDrops {
            rep,
            dropped,
            total,
        });
    }
    Ok(())
}

fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Ground-truth SD of ln(MHq) for repetition `rep` (1-based) at fixed
/// `p1s`. Dataset `j` uses stream `(Dataset, rep, j)` of `design.seed`.
/// Replicates with R = 0 or S = 0 are dropped and counted.
pub fn ground_truth_sd(design: &SimulationDesign, p1s: &[f64], rep: usize) -> Result<GroundTruth> {
    let sampler = DatasetSampler::new(&design.params(p1s))?;
    let streams = Streams::new(design.seed);
    let logs: Vec<Option<f64>> = (0..design.datasets_per_rep)
        .into_par_iter()
        .map(|j| {
            let mut rng = streams.rng(Stream::Dataset, rep as u64, j as u64);
            let counts = sampler.sample(&mut rng);
            mhq(&counts).ok().filter(|&m| m > 0.0).map(f64::ln)
        })
        .collect();
    let defined: Vec<f64> = logs.into_iter().flatten().collect();
    let dropped = design.datasets_per_rep - defined.len();
    check_drops(rep, dropped, design.datasets_per_rep)?;
    if defined.len() < 2 {
        return Err(Error::InsufficientReplicates {
            rep,
            defined: defined.len(),
        });
    }
    let (_, sd) = mean_and_sd(&defined);
    Ok(GroundTruth {
        sd,
        defined: defined.len(),
        dropped,
    })
}

fn rep_p1s(design: &SimulationDesign, rep: usize) -> Vec<f64> {
    let mut rng = Streams::new(design.seed).rng(Stream::P1Draw, rep as u64, 0);
    draw_p1(design, &mut rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasRecord {
    pub rep: usize,
    pub true_sd: f64,
    pub skm_sd: f64,
    pub bh_sd: f64,
    pub skm_bias: f64,
    pub bh_bias: f64,
    pub dropped: usize,
}

/// Per repetition: fresh `p1` draws, the simulated SD of ln(MHq), and the
/// SKM and BH standard deviations evaluated at the true parameters.
pub fn bias_study(design: &SimulationDesign) -> Result<Vec<BiasRecord>> {
    design.validate()?;
    (1..=design.reps)
        .map(|rep| {
            let p1s = rep_p1s(design, rep);
            let params = design.params(&p1s);
            let truth = ground_truth_sd(design, &p1s, rep)?;
            let skm_sd = var_skm_log_mhq_true(&params)?.sqrt();
            let bh_sd = var_bh_log_mhq_true(&params)?.sqrt();
            Ok(BiasRecord {
                rep,
                true_sd: truth.sd,
                skm_sd,
                bh_sd,
                skm_bias: skm_sd - truth.sd,
                bh_bias: bh_sd - truth.sd,
                dropped: truth.dropped,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageRecord {
    /// Repetition number; each repetition is one `p1` setting.
    pub setting: usize,
    pub psi: f64,
    pub skm_coverage: f64,
    pub bh_coverage: f64,
    pub skm_mean_width: f64,
    pub bh_mean_width: f64,
    pub dropped: usize,
}

struct Interval {
    covers: bool,
    width: f64,
}

fn interval(value: f64, log_variance: f64, psi: f64) -> Result<Interval> {
    let (lo, hi) = confidence_interval(value, log_variance, COVERAGE_LEVEL)?;
    Ok(Interval {
        covers: lo <= psi && psi <= hi,
        width: hi - lo,
    })
}

fn dataset_intervals(counts: &[Counts], psi: f64) -> Result<(Interval, Interval)> {
    let value = mhq(counts)?;
    Ok((
        interval(value, var_skm_log_mhq(counts)?, psi)?,
        interval(value, var_bh_log_mhq(counts)?, psi)?,
    ))
}

/// Per repetition: empirical coverage of the 95% SKM and BH intervals for
/// the true `psi`, and their mean widths. Datasets where MHq or either
/// interval is undefined are dropped and counted.
pub fn coverage_study(design: &SimulationDesign) -> Result<Vec<CoverageRecord>> {
    design.validate()?;
    let streams = Streams::new(design.seed);
    (1..=design.reps)
        .map(|rep| {
            let sampler = DatasetSampler::new(&design.params(&rep_p1s(design, rep)))?;
            let outcomes: Vec<Option<(Interval, Interval)>> = (0..design.datasets_per_rep)
                .into_par_iter()
                .map(|j| {
                    let mut rng = streams.rng(Stream::Dataset, rep as u64, j as u64);
                    dataset_intervals(&sampler.sample(&mut rng), design.psi).ok()
                })
                .collect();
            let defined: Vec<_> = outcomes.into_iter().flatten().collect();
            let dropped = design.datasets_per_rep - defined.len();
            check_drops(rep, dropped, design.datasets_per_rep)?;
            if defined.is_empty() {
                return Err(Error::InsufficientReplicates { rep, defined: 0 });
            }
            let n = defined.len() as f64;
            let rate = |f: fn(&(Interval, Interval)) -> bool| {
                defined.iter().filter(|x| f(x)).count() as f64 / n
            };
            let mean = |f: fn(&(Interval, Interval)) -> f64| defined.iter().map(f).sum::<f64>() / n;
            Ok(CoverageRecord {
                setting: rep,
                psi: design.psi,
                skm_coverage: rate(|(s, _)| s.covers),
                bh_coverage: rate(|(_, b)| b.covers),
                skm_mean_width: mean(|(s, _)| s.width),
                bh_mean_width: mean(|(_, b)| b.width),
                dropped,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub psi: f64,
    /// Base parameters; the sample sizes are multiplied by each scale.
    pub base: Vec<BinomialParams>,
    pub scales: Vec<u64>,
    pub replicates: usize,
    pub seed: u64,
}

impl ConvergenceConfig {
    /// Homogeneous parameters `p2_i = p1_i / psi` with common sample sizes.
    pub fn homogeneous(
        psi: f64,
        p1s: &[f64],
        n1: u64,
        n2: u64,
        scales: Vec<u64>,
        seed: u64,
    ) -> Self {
        ConvergenceConfig {
            psi,
            base: p1s
                .iter()
                .map(|&p1| BinomialParams {
                    p1,
                    p2: p1 / psi,
                    n1,
                    n2,
                })
                .collect(),
            scales,
            replicates: DEFAULT_CONVERGENCE_REPLICATES,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.psi > 0.0 && self.psi.is_finite()) {
            return Err(Error::InvalidDesign {
                flag: "psi",
                message: format!("{} is not a positive finite number", self.psi),
            });
        }
        if self.scales.is_empty() || self.scales.contains(&0) {
            return Err(Error::InvalidDesign {
                flag: "scales",
                message: "need one or more positive scales".into(),
            });
        }
        if self.replicates < 2 {
            return Err(Error::InvalidDesign {
                flag: "replicates",
                message: "need at least 2 replicates per scale".into(),
            });
        }
        validate_params(&self.base)?;
        for (i, p) in self.base.iter().enumerate() {
            let ratio = p.p1 / p.p2;
            if (ratio - self.psi).abs() > 1e-9 * self.psi {
                return Err(Error::InvalidParams {
                    stratum: i,
                    message: format!("p1/p2 = {ratio} differs from psi = {}", self.psi),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub scale: u64,
    pub mean_abs_dev: f64,
    /// Monte Carlo standard error of `mean_abs_dev`.
    pub mean_abs_dev_se: f64,
    pub mean_mhq: f64,
    pub mean_mhq_se: f64,
    pub dropped: usize,
}

/// Mean |MHq − psi| over `replicates` datasets at each scale of the sample
/// sizes. Replicate `j` at scale position `s` uses stream
/// `(Convergence, s, j)`.
pub fn convergence_check(config: &ConvergenceConfig) -> Result<Vec<ConvergencePoint>> {
    config.validate()?;
    let streams = Streams::new(config.seed);
    config
        .scales
        .iter()
        .enumerate()
        .map(|(pos, &scale)| {
            let scaled: Vec<_> = config
                .base
                .iter()
                .map(|p| BinomialParams {
                    n1: p.n1 * scale,
                    n2: p.n2 * scale,
                    ..*p
                })
                .collect();
            let sampler = DatasetSampler::new(&scaled)?;
            let values: Vec<Option<f64>> = (0..config.replicates)
                .into_par_iter()
                .map(|j| {
                    let mut rng = streams.rng(Stream::Convergence, pos as u64, j as u64);
                    mhq(&sampler.sample(&mut rng)).ok()
                })
                .collect();
            let values: Vec<f64> = values.into_iter().flatten().collect();
            let dropped = config.replicates - values.len();
            check_drops(pos + 1, dropped, config.replicates)?;
            if values.len() < 2 {
                return Err(Error::InsufficientReplicates {
                    rep: pos + 1,
                    defined: values.len(),
                });
            }
            let root_n = (values.len() as f64).sqrt();
            let devs: Vec<f64> = values.iter().map(|v| (v - config.psi).abs()).collect();
            let (mean_abs_dev, dev_sd) = mean_and_sd(&devs);
            let (mean_mhq, mhq_sd) = mean_and_sd(&values);
            Ok(ConvergencePoint {
                scale,
                mean_abs_dev,
                mean_abs_dev_se: dev_sd / root_n,
                mean_mhq,
                mean_mhq_se: mhq_sd / root_n,
                dropped,
            })
        })
        .collect()
}
