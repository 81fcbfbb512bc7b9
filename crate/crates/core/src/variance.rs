//! Log-scale variance estimators and Wald-type confidence intervals.
//!
//! MHq is `R / S` with `R = Σ R_i`, `S = Σ S_i`, where
//! `R_i = a_i(b_i+d_i)/(a_i+b_i+n_i)` and `S_i = b_i(a_i+c_i)/(a_i+b_i+n_i)`.
//! Its variance estimators are built from per-stratum moments of `R_i` and
//! `S_i` obtained by linearization. Those moments come either from the
//! observed table ([`skm_components`]) or from the column-binomial
//! parameters ([`BinomialParams`]); the same combination step serves both,
//! so plugging observed proportions into the parameter form reproduces the
//! data form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{indicator, IndicatorKind};
use crate::normal::two_sided_z;
use crate::table::{stratum_name, Counts, TwoByTwo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum VarianceMethod {
    /// Linearized estimator for ln(MHq).
    Skm,
    /// Odds-ratio variance applied to group-vs-world cross-tables. Overstates
    /// the variance of ln(MHq); kept for comparison.
    Bh,
    /// Greenland-Robins estimator for the log MH risk ratios.
    Gr,
    /// Robins-Breslow-Greenland estimator for the log MH odds ratio.
    Rbg,
    /// Single-table log risk ratio variance.
    Katz,
}

impl VarianceMethod {
    pub fn name(self) -> &'static str {
        match self {
            VarianceMethod::Skm => "SKM",
            VarianceMethod::Bh => "BH",
            VarianceMethod::Gr => "GR",
            VarianceMethod::Rbg => "RBG",
            VarianceMethod::Katz => "KATZ",
        }
    }

    /// The method used for `kind` unless the caller asks otherwise.
    pub fn default_for(kind: IndicatorKind) -> Self {
        match kind {
            IndicatorKind::Mhrr | IndicatorKind::Mhcr => VarianceMethod::Gr,
            IndicatorKind::Mhor => VarianceMethod::Rbg,
            IndicatorKind::Mhq => VarianceMethod::Skm,
        }
    }
}

impl fmt::Display for VarianceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which ratio weights the stratum terms of the SKM estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SkmRatio {
    /// `(1/R²) Σ (V_i − 2ψ Q_i + ψ² W_i)` with the pooled `ψ = R/S`: the
    /// linearized variance of `ln R − ln S`. Defined for any strata with
    /// non-zero column totals, including zero `a_i` or `b_i`.
    #[default]
    Pooled,
    /// `(1/RS) Σ [(V_i + R_i²)/P_i − 2(Q_i + R_i S_i) + P_i(W_i + S_i²)]` with
    /// the stratum column risk ratio `P_i`. Requires `a_i > 0` and `b_i > 0`.
    PerStratum,
}

/// Per-stratum ingredients of the SKM variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkmStratum {
    pub r: f64,
    pub s: f64,
    /// `a(b+d) / (b(a+c))`; `None` when `b = 0`.
    pub p: Option<f64>,
    /// Estimated `Var[R_i]`.
    pub v: f64,
    /// Estimated `Var[S_i]`.
    pub w: f64,
    /// Estimated `Cov[R_i, S_i]`.
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkmComponents {
    pub strata: Vec<SkmStratum>,
    pub r_total: f64,
    pub s_total: f64,
}

pub fn skm_components<T: TwoByTwo>(t: &T) -> Result<SkmStratum> {
    skm_stratum(t, 0)
}

fn skm_stratum<T: TwoByTwo>(t: &T, index: usize) -> Result<SkmStratum> {
    let cells = t.cells();
    if cells.mentioned() == 0 || cells.not_mentioned() == 0 {
        return Err(Error::StratumUndefined {
            stratum: stratum_name(t, index),
            message: "zero column total; filter the dataset first".into(),
        });
    }
    let [a, b, c, d] = cells.as_f64();
    let n = a + b + c + d;
    let m1 = a + c;
    let m2 = b + d;
    let t4 = (a + b + n).powi(4);
    let r = a * m2 / (a + b + n);
    let s = b * m1 / (a + b + n);
    let var_a = a * c / m1;
    let var_b = b * d / m2;
    Ok(SkmStratum {
        r,
        s,
        p: (b > 0.0).then(|| a * m2 / (b * m1)),
        v: m2 * m2 * ((n + b).powi(2) * var_a + a * a * var_b) / t4,
        w: m1 * m1 * (b * b * var_a + (n + a).powi(2) * var_b) / t4,
        q: -m1 * m2 / t4 * (var_a * b * (b + n) + var_b * a * (a + n)),
    })
}

pub fn skm_components_all<T: TwoByTwo>(strata: &[T]) -> Result<SkmComponents> {
    let strata = strata
        .iter()
        .enumerate()
        .map(|(i, t)| skm_stratum(t, i))
        .collect::<Result<Vec<_>>>()?;
    let r_total = strata.iter().map(|c| c.r).sum();
    let s_total = strata.iter().map(|c| c.s).sum();
    Ok(SkmComponents {
        strata,
        r_total,
        s_total,
    })
}

/// First and second moments of `(R_i, S_i)` for one stratum.
struct Moments {
    mean_r: f64,
    mean_s: f64,
    var_r: f64,
    var_s: f64,
    cov: f64,
}

fn combine_skm(moments: &[Moments], form: SkmRatio, name: impl Fn(usize) -> String) -> Result<f64> {
    let r: f64 = moments.iter().map(|m| m.mean_r).sum();
    let s: f64 = moments.iter().map(|m| m.mean_s).sum();
    if r <= 0.0 || s <= 0.0 {
        return Err(Error::undefined(
            "SKM variance of ln(MHq)",
            if r <= 0.0 {
                "R = 0 (no a_i > 0)"
            } else {
                "S = 0 (no b_i > 0)"
            },
        ));
    }
    match form {
        SkmRatio::Pooled => {
            let psi = r / s;
            let total: f64 = moments
                .iter()
                .map(|m| m.var_r - 2.0 * psi * m.cov + psi * psi * m.var_s)
                .sum();
            Ok(total / (r * r))
        }
        SkmRatio::PerStratum => {
            let mut total = 0.0;
            for (i, m) in moments.iter().enumerate() {
                if m.mean_r <= 0.0 || m.mean_s <= 0.0 {
                    return Err(Error::StratumUndefined {
                        stratum: name(i),
                        message: "stratum column risk ratio P_i is zero or undefined \
                                  (needs a > 0 and b > 0)"
                            .into(),
                    });
                }
                let p = m.mean_r / m.mean_s;
                total += (m.var_r + m.mean_r * m.mean_r) / p - 2.0 * (m.cov + m.mean_r * m.mean_s)
                    + p * (m.var_s + m.mean_s * m.mean_s);
            }
            Ok(total / (r * s))
        }
    }
}

/// SKM variance of ln(MHq) in the default pooled form.
pub fn var_skm_log_mhq<T: TwoByTwo>(strata: &[T]) -> Result<f64> {
    var_skm_log_mhq_with(strata, SkmRatio::Pooled)
}

pub fn var_skm_log_mhq_with<T: TwoByTwo>(strata: &[T], form: SkmRatio) -> Result<f64> {
    if strata.is_empty() {
        return Err(Error::NoInformativeStrata);
    }
    let moments = strata
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let c = skm_stratum(t, i)?;
            Ok(Moments {
                mean_r: c.r,
                mean_s: c.s,
                var_r: c.v,
                var_s: c.w,
                cov: c.q,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    combine_skm(&moments, form, |i| stratum_name(&strata[i], i))
}

/// Robins-Breslow-Greenland variance of the log MH odds ratio over cells
/// `[A, B, C, D, N]`.
fn rbg(cells: impl Iterator<Item = [f64; 5]>) -> Option<f64> {
    let (mut sum_r, mut sum_s) = (0.0, 0.0);
    let (mut pr, mut ps_qr, mut qs) = (0.0, 0.0, 0.0);
    for [a, b, c, d, n] in cells {
        let p = (a + d) / n;
        let q = (b + c) / n;
        let r = a * d / n;
        let s = b * c / n;
        sum_r += r;
        sum_s += s;
        pr += p * r;
        ps_qr += p * s + q * r;
        qs += q * s;
    }
    if sum_r <= 0.0 || sum_s <= 0.0 {
        return None;
    }
    Some(pr / (2.0 * sum_r * sum_r) + ps_qr / (2.0 * sum_r * sum_s) + qs / (2.0 * sum_s * sum_s))
}

/// Group-vs-world cross-table cells `[a, b, a+c, b+d, a+b+n]`.
fn cross_cells([a, b, c, d]: [f64; 4]) -> [f64; 5] {
    let n = a + b + c + d;
    [a, b, a + c, b + d, a + b + n]
}

/// Odds-ratio variance evaluated on cross-tables. At K = 1 this is
/// `1/a + 1/(a+c) + 1/b + 1/(b+d)`.
pub fn var_bh_log_mhq<T: TwoByTwo>(strata: &[T]) -> Result<f64> {
    rbg(strata.iter().map(|t| cross_cells(t.cells().as_f64())))
        .ok_or_else(|| Error::undefined("BH variance of ln(MHq)", "R = 0 or S = 0"))
}

pub fn var_rbg_log_mhor<T: TwoByTwo>(strata: &[T]) -> Result<f64> {
    rbg(strata.iter().map(|t| {
        let [a, b, c, d] = t.cells().as_f64();
        [a, b, c, d, a + b + c + d]
    }))
    .ok_or_else(|| Error::undefined("RBG variance of ln(MHOR)", "Σ ad/n = 0 or Σ bc/n = 0"))
}

fn greenland_robins(strata: impl Iterator<Item = Counts>) -> Option<f64> {
    let (mut num, mut sum_r, mut sum_s) = (0.0, 0.0, 0.0);
    for t in strata {
        let [a, b, c, d] = t.as_f64();
        let n = a + b + c + d;
        num += ((a + b) * (c + d) * (a + c) - a * c * n) / (n * n);
        sum_r += a * (c + d) / n;
        sum_s += c * (a + b) / n;
    }
    (sum_r > 0.0 && sum_s > 0.0).then(|| num / (sum_r * sum_s))
}

pub fn var_gr_log_mhrr<T: TwoByTwo>(strata: &[T]) -> Result<f64> {
    greenland_robins(strata.iter().map(|t| t.cells())).ok_or_else(|| {
        Error::undefined(
            "GR variance of ln(MHRR)",
            "Σ a(c+d)/n = 0 or Σ c(a+b)/n = 0",
        )
    })
}

/// Greenland-Robins on the transposed tables (`b` and `c` swapped).
pub fn var_gr_log_mhcr<T: TwoByTwo>(strata: &[T]) -> Result<f64> {
    greenland_robins(strata.iter().map(|t| t.cells().transpose())).ok_or_else(|| {
        Error::undefined(
            "GR variance of ln(MHCR)",
            "Σ a(b+d)/n = 0 or Σ b(a+c)/n = 0",
        )
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Compares `a/(a+b)` with `c/(c+d)`.
    Row,
    /// Compares `a/(a+c)` with `b/(b+d)`.
    Column,
}

pub fn katz_var_log_rr<T: TwoByTwo>(t: &T, orientation: Orientation) -> Result<f64> {
    let cells = t.cells();
    let [a, b, c, d] = cells.as_f64();
    let (x, x_total, y, y_total) = match orientation {
        Orientation::Row => (a, a + b, c, c + d),
        Orientation::Column => (a, a + c, b, b + d),
    };
    if x == 0.0 || y == 0.0 {
        return Err(Error::StratumUndefined {
            stratum: stratum_name(t, 0),
            message: format!("Katz {orientation:?} variance needs non-zero reciprocal cells"),
        });
    }
    Ok(1.0 / x - 1.0 / x_total + 1.0 / y - 1.0 / y_total)
}

/// `exp(ln value ± z·√log_variance)` for the two-sided `level`.
pub fn confidence_interval(value: f64, log_variance: f64, level: f64) -> Result<(f64, f64)> {
    let z = two_sided_z(level)?;
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::undefined(
            "confidence interval",
            format!("point estimate {value} is not a positive finite number"),
        ));
    }
    if !(log_variance >= 0.0 && log_variance.is_finite()) {
        return Err(Error::undefined(
            "confidence interval",
            format!("log variance {log_variance} is not a non-negative finite number"),
        ));
    }
    let half = z * log_variance.sqrt();
    let centre = value.ln();
    Ok(((centre - half).exp(), (centre + half).exp()))
}

/// Column-binomial parameters of one stratum: `a ~ Bin(n1, p1)` among the
/// mentioned, `b ~ Bin(n2, p2)` among the not mentioned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialParams {
    pub p1: f64,
    pub p2: f64,
    pub n1: u64,
    pub n2: u64,
}

impl BinomialParams {
    /// Observed proportions of a table with non-zero column totals.
    pub fn from_table<T: TwoByTwo>(t: &T) -> Self {
        let c = t.cells();
        BinomialParams {
            p1: c.a as f64 / c.mentioned() as f64,
            p2: c.b as f64 / c.not_mentioned() as f64,
            n1: c.mentioned(),
            n2: c.not_mentioned(),
        }
    }

    /// Cell expectations `[n1·p1, n2·p2, n1(1−p1), n2(1−p2)]`.
    pub fn expected_cells(&self) -> [f64; 4] {
        let (n1, n2) = (self.n1 as f64, self.n2 as f64);
        [
            n1 * self.p1,
            n2 * self.p2,
            n1 * (1.0 - self.p1),
            n2 * (1.0 - self.p2),
        ]
    }

    fn validate(&self, stratum: usize) -> Result<()> {
        let bad = |message: String| Err(Error::InvalidParams { stratum, message });
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(p > 0.0 && p <= 1.0) {
                return bad(format!("{name} = {p} is outside (0, 1]"));
            }
        }
        if self.n1 == 0 || self.n2 == 0 {
            return bad("sample sizes must be positive".into());
        }
        Ok(())
    }

    fn moments(&self) -> Moments {
        let (n1, n2) = (self.n1 as f64, self.n2 as f64);
        let (p1, p2) = (self.p1, self.p2);
        let n = n1 + n2;
        let ea = n1 * p1;
        let eb = n2 * p2;
        let var_a = ea * (1.0 - p1);
        let var_b = eb * (1.0 - p2);
        let t = ea + eb + n;
        let t4 = t.powi(4);
        Moments {
            mean_r: n2 * ea / t,
            mean_s: n1 * eb / t,
            var_r: n2 * n2 * ((n + eb).powi(2) * var_a + ea * ea * var_b) / t4,
            var_s: n1 * n1 * (eb * eb * var_a + (n + ea).powi(2) * var_b) / t4,
            cov: -n1 * n1 * n2 * n2 * p1 * p2 / t4
                * ((1.0 - p1) * (eb + n) + (1.0 - p2) * (ea + n)),
        }
    }
}

pub(crate) fn validate_params(params: &[BinomialParams]) -> Result<()> {
    if params.is_empty() {
        return Err(Error::NoInformativeStrata);
    }
    params
        .iter()
        .enumerate()
        .try_for_each(|(i, p)| p.validate(i))
}

/// SKM variance of ln(MHq) at known binomial parameters, weighting each
/// stratum by its own ratio `p1/p2`.
pub fn var_skm_log_mhq_true(params: &[BinomialParams]) -> Result<f64> {
    var_skm_log_mhq_true_with(params, SkmRatio::PerStratum)
}

pub fn var_skm_log_mhq_true_with(params: &[BinomialParams], form: SkmRatio) -> Result<f64> {
    validate_params(params)?;
    let moments: Vec<_> = params.iter().map(BinomialParams::moments).collect();
    combine_skm(&moments, form, |i| format!("#{}", i + 1))
}

/// BH variance with every cell replaced by its expectation.
pub fn var_bh_log_mhq_true(params: &[BinomialParams]) -> Result<f64> {
    validate_params(params)?;
    rbg(params.iter().map(|p| cross_cells(p.expected_cells())))
        .ok_or_else(|| Error::undefined("BH variance of ln(MHq)", "degenerate parameters"))
}

/// A point estimate with its log-scale variance and confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorEstimate {
    pub kind: IndicatorKind,
    pub value: f64,
    pub log_variance: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub method: VarianceMethod,
}

/// Point estimate, variance and interval for one indicator.
pub fn estimate<T: TwoByTwo>(
    strata: &[T],
    kind: IndicatorKind,
    method: VarianceMethod,
    level: f64,
) -> Result<IndicatorEstimate> {
    use IndicatorKind::*;
    use VarianceMethod::*;

    two_sided_z(level)?;
    let value = indicator(strata, kind)?;
    if value <= 0.0 {
        return Err(Error::undefined(
            kind.name(),
            "estimate is zero (no stratum has a > 0), so its logarithm is undefined",
        ));
    }
    let not_applicable = |detail: &str| Error::MethodNotApplicable {
        method: method.name(),
        kind: kind.name(),
        detail: detail.to_string(),
    };
    let log_variance = match (kind, method) {
        (Mhq, Skm) => var_skm_log_mhq(strata)?,
        (Mhq, Bh) => var_bh_log_mhq(strata)?,
        (Mhrr, Gr) => var_gr_log_mhrr(strata)?,
        (Mhcr, Gr) => var_gr_log_mhcr(strata)?,
        (Mhor, Rbg) => var_rbg_log_mhor(strata)?,
        (Mhrr | Mhcr | Mhq, Katz) => match strata {
            [single] => katz_var_log_rr(
                single,
                if kind == Mhrr {
                    Orientation::Row
                } else {
                    Orientation::Column
                },
            )?,
            _ => return Err(not_applicable(" (single-stratum data only)")),
        },
        _ => return Err(not_applicable("")),
    };
    let (ci_low, ci_high) = confidence_interval(value, log_variance, level)?;
    Ok(IndicatorEstimate {
        kind,
        value,
        log_variance,
        ci_low,
        ci_high,
        level,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_world() -> Vec<Counts> {
        vec![
            Counts::new(26, 7, 18, 13),
            Counts::new(15, 7, 15, 9),
            Counts::new(3, 3, 13, 9),
        ]
    }

    fn rounded(x: f64) -> String {
        format!("{x:.2}")
    }

    #[test]
    fn first_stratum_components() {
        let c = skm_components(&Counts::new(26, 7, 18, 13)).unwrap();
        assert_relative_eq!(c.r, 26.0 * 20.0 / 97.0, max_relative = 1e-15);
        assert_relative_eq!(c.s, 7.0 * 44.0 / 97.0, max_relative = 1e-15);
        assert_relative_eq!(
            c.p.unwrap(),
            26.0 * 20.0 / (7.0 * 44.0),
            max_relative = 1e-15
        );
        // Exact rational evaluation of the displayed formulas.
        assert_relative_eq!(c.v, 0.25615800083549345, max_relative = 1e-13);
        assert_relative_eq!(c.w, 0.8173599421868116, max_relative = 1e-13);
        assert_relative_eq!(c.q, -0.15838014091631444, max_relative = 1e-13);
    }

    #[test]
    fn zero_a_components() {
        let c = skm_components(&Counts::new(0, 4, 6, 9)).unwrap();
        assert_eq!((c.r, c.v, c.q), (0.0, 0.0, 0.0));
        assert_eq!(c.p, Some(0.0));
        assert!(c.s > 0.0 && c.w > 0.0);
        assert!(skm_components(&Counts::new(0, 4, 0, 9)).is_err());
        assert_eq!(skm_components(&Counts::new(3, 0, 6, 9)).unwrap().p, None);
    }

    #[test]
    fn skm_small_world() {
        let s = small_world();
        let pooled = var_skm_log_mhq(&s).unwrap();
        assert_relative_eq!(pooled, 0.04906759372350476, max_relative = 1e-12);
        let (lo, hi) = confidence_interval(mhq_value(&s), pooled, 0.95).unwrap();
        assert_eq!(
            (rounded(lo).as_str(), rounded(hi).as_str()),
            ("0.84", "2.00")
        );

        let per_stratum = var_skm_log_mhq_with(&s, SkmRatio::PerStratum).unwrap();
        assert_relative_eq!(per_stratum, 0.0506298525130248, max_relative = 1e-12);
    }

    fn mhq_value(s: &[Counts]) -> f64 {
        crate::estimators::mhq(s).unwrap()
    }

    #[test]
    fn skm_single_stratum_is_katz() {
        let t = [Counts::new(26, 7, 18, 13)];
        let katz = 1.0 / 26.0 - 1.0 / 44.0 + 1.0 / 7.0 - 1.0 / 20.0;
        assert_relative_eq!(katz, 0.10859140859140859, max_relative = 1e-14);
        for form in [SkmRatio::Pooled, SkmRatio::PerStratum] {
            assert_relative_eq!(
                var_skm_log_mhq_with(&t, form).unwrap(),
                katz,
                max_relative = 1e-12
            );
        }
        let two = [t[0], t[0]];
        let v2 = var_skm_log_mhq(&two).unwrap();
        assert!(v2 < katz);
        assert_relative_eq!(v2, 0.054295704295704295, max_relative = 1e-12);
    }

    #[test]
    fn per_stratum_form_rejects_zero_cells() {
        let s = [Counts::new(26, 7, 18, 13), Counts::new(4, 0, 6, 10)];
        let pooled = var_skm_log_mhq(&s).unwrap();
        assert!(pooled.is_finite() && pooled > 0.0);
        let err = var_skm_log_mhq_with(&s, SkmRatio::PerStratum).unwrap_err();
        assert!(err.to_string().contains("#2"), "{err}");

        let labelled = [
            crate::table::StratumTable::new("w", 26, 7, 18, 13).unwrap(),
            crate::table::StratumTable::new("x", 0, 3, 5, 10).unwrap(),
        ];
        let err = var_skm_log_mhq_with(&labelled, SkmRatio::PerStratum).unwrap_err();
        assert!(err.to_string().contains("`x`"), "{err}");
    }

    #[test]
    fn skm_undefined_sums() {
        let s = [Counts::new(0, 3, 5, 10)];
        assert!(matches!(var_skm_log_mhq(&s), Err(Error::Undefined { .. })));
    }

    #[test]
    fn bh_small_world_and_reduction() {
        let s = small_world();
        let bh = var_bh_log_mhq(&s).unwrap();
        assert_relative_eq!(bh, 0.11651749747893496, max_relative = 1e-12);
        assert!(bh > var_skm_log_mhq(&s).unwrap());

        let t = [Counts::new(26, 7, 18, 13)];
        let expected = 1.0 / 26.0 + 1.0 / 44.0 + 1.0 / 7.0 + 1.0 / 20.0;
        assert_relative_eq!(var_bh_log_mhq(&t).unwrap(), expected, max_relative = 1e-12);
        assert_relative_eq!(
            var_bh_log_mhq(&t).unwrap() - var_skm_log_mhq(&t).unwrap(),
            2.0 / 44.0 + 2.0 / 20.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn gr_small_world() {
        let s = small_world();
        let rr = crate::estimators::mh_row_risk_ratio(&s).unwrap();
        let v = var_gr_log_mhrr(&s).unwrap();
        assert_relative_eq!(v, 0.01727852177964373, max_relative = 1e-12);
        let (lo, hi) = confidence_interval(rr, v, 0.95).unwrap();
        assert_eq!(
            (rounded(lo).as_str(), rounded(hi).as_str()),
            ("0.91", "1.53")
        );

        let cr = crate::estimators::mh_col_risk_ratio(&s).unwrap();
        let v = var_gr_log_mhcr(&s).unwrap();
        assert_relative_eq!(v, 0.049933701950622855, max_relative = 1e-12);
        let (lo, hi) = confidence_interval(cr, v, 0.95).unwrap();
        assert_eq!(
            (rounded(lo).as_str(), rounded(hi).as_str()),
            ("0.85", "2.04")
        );

        let transposed: Vec<_> = s.iter().map(Counts::transpose).collect();
        assert_eq!(
            var_gr_log_mhcr(&s).unwrap(),
            var_gr_log_mhrr(&transposed).unwrap()
        );
    }

    #[test]
    fn gr_single_and_doubled() {
        let t = [Counts::new(26, 7, 18, 13)];
        let row_katz = 1.0 / 26.0 - 1.0 / 33.0 + 1.0 / 18.0 - 1.0 / 31.0;
        assert_relative_eq!(row_katz, 0.03145599919793468, max_relative = 1e-14);
        assert_relative_eq!(var_gr_log_mhrr(&t).unwrap(), row_katz, max_relative = 1e-12);
        assert_relative_eq!(
            var_gr_log_mhcr(&t).unwrap(),
            0.10859140859140859,
            max_relative = 1e-12
        );
        let two = [t[0], t[0]];
        assert_relative_eq!(
            var_gr_log_mhrr(&two).unwrap(),
            row_katz / 2.0,
            max_relative = 1e-10
        );
    }

    #[test]
    fn rbg_values() {
        let s = small_world();
        let or = crate::estimators::mh_odds_ratio(&s).unwrap();
        let v = var_rbg_log_mhor(&s).unwrap();
        assert_relative_eq!(v, 0.1399221804880643, max_relative = 1e-12);
        let (lo, hi) = confidence_interval(or, v, 0.95).unwrap();
        assert_eq!(
            (rounded(lo).as_str(), rounded(hi).as_str()),
            ("0.78", "3.39")
        );

        let single = [Counts::new(26, 7, 18, 13)];
        let sum_recip = 1.0 / 26.0 + 1.0 / 7.0 + 1.0 / 18.0 + 1.0 / 13.0;
        assert_relative_eq!(
            var_rbg_log_mhor(&single).unwrap(),
            sum_recip,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            var_rbg_log_mhor(&[Counts::new(5, 5, 5, 5)]).unwrap(),
            0.8,
            max_relative = 1e-14
        );
        assert!(var_rbg_log_mhor(&[Counts::new(0, 5, 5, 5)]).is_err());
    }

    #[test]
    fn katz() {
        let t = Counts::new(26, 7, 18, 13);
        assert_relative_eq!(
            katz_var_log_rr(&t, Orientation::Column).unwrap(),
            0.10859140859140859,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            katz_var_log_rr(&t, Orientation::Row).unwrap(),
            0.03145599919793468,
            max_relative = 1e-14
        );
        let big = Counts::new(1_000_000, 1_000_000, 1_000_000, 1_000_000);
        let v = katz_var_log_rr(&big, Orientation::Column).unwrap();
        assert_relative_eq!(v, 1e-6, max_relative = 1e-9);
        assert!(katz_var_log_rr(&Counts::new(0, 1, 1, 1), Orientation::Row).is_err());
        assert!(katz_var_log_rr(&Counts::new(1, 1, 0, 1), Orientation::Row).is_err());
        assert!(katz_var_log_rr(&Counts::new(1, 0, 1, 1), Orientation::Column).is_err());
        assert!(katz_var_log_rr(&Counts::new(1, 0, 1, 1), Orientation::Row).is_ok());
    }

    #[test]
    fn interval_edges() {
        assert_eq!(confidence_interval(1.7, 0.0, 0.9).unwrap(), (1.7, 1.7));
        let (lo, hi) = confidence_interval(1.2963, 0.0490, 0.95).unwrap();
        assert_eq!(
            (rounded(lo).as_str(), rounded(hi).as_str()),
            ("0.84", "2.00")
        );
        assert!(matches!(
            confidence_interval(1.0, 0.1, 1.0),
            Err(Error::InvalidLevel(_))
        ));
        assert!(matches!(
            confidence_interval(1.0, 0.1, -0.2),
            Err(Error::InvalidLevel(_))
        ));
        assert!(confidence_interval(0.0, 0.1, 0.95).is_err());
        assert!(confidence_interval(1.0, -0.1, 0.95).is_err());
    }

    #[test]
    fn bh_true_reduction() {
        let p = [BinomialParams {
            p1: 0.1,
            p2: 0.1,
            n1: 100,
            n2: 1000,
        }];
        assert_relative_eq!(
            var_bh_log_mhq_true(&p).unwrap(),
            0.121,
            max_relative = 1e-12
        );
        let skm = var_skm_log_mhq_true(&p).unwrap();
        assert!(skm > 0.0 && skm < 0.121);
        // Katz at expected counts.
        assert_relative_eq!(
            skm,
            1.0 / 10.0 - 1.0 / 100.0 + 1.0 / 100.0 - 1.0 / 1000.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn params_validation() {
        let bad = [BinomialParams {
            p1: 0.0,
            p2: 0.1,
            n1: 10,
            n2: 10,
        }];
        assert!(matches!(
            var_skm_log_mhq_true(&bad),
            Err(Error::InvalidParams { .. })
        ));
        let bad = [BinomialParams {
            p1: 0.2,
            p2: 1.2,
            n1: 10,
            n2: 10,
        }];
        assert!(matches!(
            var_bh_log_mhq_true(&bad),
            Err(Error::InvalidParams { .. })
        ));
        let bad = [BinomialParams {
            p1: 0.2,
            p2: 0.2,
            n1: 0,
            n2: 10,
        }];
        assert!(var_skm_log_mhq_true(&bad).is_err());
        assert!(var_skm_log_mhq_true(&[]).is_err());
    }

    #[test]
    fn estimate_dispatch() {
        let s = small_world();
        let e = estimate(&s, IndicatorKind::Mhq, VarianceMethod::Skm, 0.95).unwrap();
        assert!(e.ci_low <= e.value && e.value <= e.ci_high);
        assert!(matches!(
            estimate(&s, IndicatorKind::Mhor, VarianceMethod::Gr, 0.95),
            Err(Error::MethodNotApplicable { .. })
        ));
        assert!(matches!(
            estimate(&s, IndicatorKind::Mhq, VarianceMethod::Katz, 0.95),
            Err(Error::MethodNotApplicable { .. })
        ));
        let single = [s[0]];
        let k = estimate(&single, IndicatorKind::Mhq, VarianceMethod::Katz, 0.95).unwrap();
        let skm = estimate(&single, IndicatorKind::Mhq, VarianceMethod::Skm, 0.95).unwrap();
        assert_relative_eq!(k.log_variance, skm.log_variance, max_relative = 1e-12);
        let zero = [Counts::new(0, 3, 4, 5)];
        assert!(estimate(&zero, IndicatorKind::Mhq, VarianceMethod::Skm, 0.95).is_err());
    }
}
