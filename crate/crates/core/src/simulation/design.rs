use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::variance::BinomialParams;

/// Column-binomial generator settings shared by the bias and coverage
/// studies.
///
/// Each repetition draws `k` values `p1_i ~ Uniform[p1_low, p1_high)`, sets
/// `p2_i = p1_i / psi`, and generates `datasets_per_rep` datasets with
/// `a_i ~ Bin(n_mentioned, p1_i)` and `b_i ~ Bin(n_not_mentioned, p2_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationDesign {
    pub k: usize,
    pub n_mentioned: u64,
    pub n_not_mentioned: u64,
    pub psi: f64,
    pub p1_low: f64,
    pub p1_high: f64,
    pub datasets_per_rep: usize,
    pub reps: usize,
    pub seed: u64,
}

impl Default for SimulationDesign {
    fn default() -> Self {
        SimulationDesign {
            k: 30,
            n_mentioned: 100,
            n_not_mentioned: 1000,
            psi: 1.0,
            p1_low: 0.01,
            p1_high: 0.2,
            datasets_per_rep: 10_000,
            reps: 20,
            seed: 42,
        }
    }
}

impl SimulationDesign {
    pub fn validate(&self) -> Result<()> {
        let invalid =
            |flag: &'static str, message: String| Err(Error::InvalidDesign { flag, message });
        if self.k == 0 {
            return invalid("k", "need at least one stratum".into());
        }
        if self.n_mentioned == 0 {
            return invalid("n-mentioned", "sample size must be positive".into());
        }
        if self.n_not_mentioned == 0 {
            return invalid("n-not-mentioned", "sample size must be positive".into());
        }
        if !(self.psi > 0.0 && self.psi.is_finite()) {
            return invalid(
                "psi",
                format!("{} is not a positive finite number", self.psi),
            );
        }
        if !(self.p1_low > 0.0 && self.p1_low <= 1.0) {
            return invalid("p1-low", format!("{} is outside (0, 1]", self.p1_low));
        }
        if !(self.p1_high >= self.p1_low && self.p1_high <= 1.0) {
            return invalid(
                "p1-high",
                format!(
                    "{} must lie in [p1-low, 1] = [{}, 1]",
                    self.p1_high, self.p1_low
                ),
            );
        }
        let max_p2 = self.p1_high / self.psi;
        if max_p2 > 1.0 {
            return invalid(
                "psi",
                format!(
                    "p2 = p1-high / psi = {} / {} = {max_p2:.4} would exceed 1",
                    self.p1_high, self.psi
                ),
            );
        }
        if self.datasets_per_rep == 0 {
            return invalid(
                "datasets",
                "need at least one dataset per repetition".into(),
            );
        }
        if self.reps == 0 {
            return invalid("reps", "need at least one repetition".into());
        }
        Ok(())
    }

    /// Binomial parameters of every stratum for the given `p1` draws.
    pub fn params(&self, p1s: &[f64]) -> Vec<BinomialParams> {
        p1s.iter()
            .map(|&p1| BinomialParams {
                p1,
                p2: p1 / self.psi,
                n1: self.n_mentioned,
                n2: self.n_not_mentioned,
            })
            .collect()
    }
}
