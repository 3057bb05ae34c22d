//! Classical versus quantum round counts at matched confidence, and scaling
//! sweeps over instance families.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandit::BanditInstance;
use crate::classical::ucbe_min_rounds;
use crate::error::{Error, Result};
use crate::hilbert::DENSE_CAP;
use crate::qbai::{analytic_recommendation, build_operators, success_probability, uniform_alpha};

/// Where the failure probability used for the classical round count came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaSource {
    /// `1 - a* / (N E[a])`, the failure probability at the ideal iteration count.
    Mapped,
    /// `1 - P_{n*}(x*)` at the integer iteration count, used when the mapped value is 0.
    Attained,
    /// Perfect confidence is demanded; the classical bound does not apply.
    NotApplicable,
    /// The matched-confidence mapping assumes a uniform preparation.
    NonUniformAlpha,
}

impl fmt::Display for DeltaSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DeltaSource::Mapped => "mapped",
            DeltaSource::Attained => "attained",
            DeltaSource::NotApplicable => "not-applicable",
            DeltaSource::NonUniformAlpha => "non-uniform-alpha",
        };
        f.write_str(s)
    }
}

/// Failure probabilities at or below this are treated as zero.
const DELTA_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub arms: usize,
    pub env: usize,
    pub p_success: f64,
    pub n_star: usize,
    /// Closed-form `P_{n*}(x*)`.
    pub qbai_success: f64,
    pub delta_mapped: f64,
    /// Failure probability handed to the classical bound, if any.
    pub delta: Option<f64>,
    pub delta_source: DeltaSource,
    pub t_classical: Option<u64>,
    /// `t_classical / max(n_star, 1)`.
    pub ratio: Option<f64>,
    /// `sqrt(E[a]) H1 ln(2 N^2 E[a] / (N E[a] - a*)) + sqrt(E[a]) N`, when finite.
    pub order_diagnostic: Option<f64>,
    /// Whether the closed form was checked against state-vector simulation.
    pub simulated: bool,
    /// Largest `|P_sim - P_closed|` over arms at `n_star`, when simulated.
    pub sim_deviation: Option<f64>,
}

pub fn compare(inst: &BanditInstance, alpha: &[Complex64]) -> Result<ComparisonReport> {
    compare_with_cap(inst, alpha, DENSE_CAP)
}

/// Like [`compare`]; instances with `N * M > sim_cap` skip the simulation cross-check.
pub fn compare_with_cap(
    inst: &BanditInstance,
    alpha: &[Complex64],
    sim_cap: usize,
) -> Result<ComparisonReport> {
    let params = success_probability(inst, alpha)?;
    let summary = inst.summarize()?;
    let arms = inst.n_arms();
    // a single arm is recommended with certainty without any rounds
    let n_star = if arms == 1 { 0 } else { params.n_star };
    let p_rec = analytic_recommendation(inst, alpha, n_star)?;
    let qbai_success = p_rec[summary.x_star];

    let total: f64 = summary.a.iter().sum();
    let delta_mapped = 1.0 - summary.a_star / total;
    let uniform = alpha
        .iter()
        .all(|a| (a.norm_sqr() - 1.0 / arms as f64).abs() <= 1e-12);

    let (delta, delta_source) = if !uniform {
        (None, DeltaSource::NonUniformAlpha)
    } else if delta_mapped > DELTA_FLOOR {
        (Some(delta_mapped), DeltaSource::Mapped)
    } else if 1.0 - qbai_success > DELTA_FLOOR {
        (Some(1.0 - qbai_success), DeltaSource::Attained)
    } else {
        (None, DeltaSource::NotApplicable)
    };
    let t_classical = delta.map(|d| ucbe_min_rounds(&summary, d)).transpose()?;
    let ratio = t_classical.map(|t| t as f64 / n_star.max(1) as f64);

    let mean = total / arms as f64;
    let n = arms as f64;
    let order_diagnostic = {
        let log_arg = 2.0 * n * n * mean / (n * mean - summary.a_star);
        let value = mean.sqrt() * summary.h1 * log_arg.ln() + mean.sqrt() * n;
        (log_arg > 0.0 && value.is_finite()).then_some(value)
    };

    let (simulated, sim_deviation) = if inst.dims().len() <= sim_cap {
        let run = build_operators(inst, alpha)?.run(n_star)?;
        let dev = run
            .p_rec
            .iter()
            .zip(&p_rec)
            .map(|(s, a)| (s - a).abs())
            .fold(0.0, f64::max);
        (true, Some(dev))
    } else {
        (false, None)
    };

    Ok(ComparisonReport {
        arms,
        env: inst.n_env(),
        p_success: params.p_success,
        n_star,
        qbai_success,
        delta_mapped,
        delta,
        delta_source,
        t_classical,
        ratio,
        order_diagnostic,
        simulated,
        sim_deviation,
    })
}

/// Parametrized instance families for scaling sweeps. Every family realizes
/// arm values with two environment states (`nu_x = (a_x, 1 - a_x)`, `f = (1, 0)`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Arm 0 has value `best`, every other arm 0.
    OneGoodArm { best: f64 },
    /// Arm 0 has value `best`, every other arm `rest`.
    TwoLevel { best: f64, rest: f64 },
}

impl Family {
    pub fn arm_values(&self, arms: usize) -> Vec<f64> {
        let (best, rest) = match *self {
            Family::OneGoodArm { best } => (best, 0.0),
            Family::TwoLevel { best, rest } => (best, rest),
        };
        (0..arms).map(|x| if x == 0 { best } else { rest }).collect()
    }

    pub fn instance(&self, arms: usize) -> Result<BanditInstance> {
        if arms == 0 {
            return Err(Error::InvalidParameter("family size must be positive".into()));
        }
        BanditInstance::from_arm_values(&self.arm_values(arms))
    }
}

impl Default for Family {
    fn default() -> Self {
        Family::OneGoodArm { best: 0.5 }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::OneGoodArm { best } => write!(f, "one-good-arm:{best}"),
            Family::TwoLevel { best, rest } => write!(f, "two-level:{best}:{rest}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// `one-good-arm[:best]` or `two-level:best:rest`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default();
        let nums = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad number {p:?} in family {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let family = match (name, nums.as_slice()) {
            ("one-good-arm", []) => Family::default(),
            ("one-good-arm", [best]) => Family::OneGoodArm { best: *best },
            ("two-level", [best, rest]) => Family::TwoLevel { best: *best, rest: *rest },
            _ => return Err(Error::InvalidParameter(format!("unknown family {s:?}"))),
        };
        let values = match family {
            Family::OneGoodArm { best } => vec![best],
            Family::TwoLevel { best, rest } => vec![best, rest],
        };
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter(format!("family {s:?} has values outside [0, 1]")));
        }
        Ok(family)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub arms: usize,
    pub report: std::result::Result<ComparisonReport, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub family: Family,
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `ln n_star` against `ln N` over rows with `n_star >= 1`.
    pub slope: Option<f64>,
}

/// One uniform-preparation comparison per size, in input order.
pub fn scaling_experiment(family: Family, sizes: &[usize], sim_cap: usize) -> ScalingTable {
    let rows: Vec<ScalingRow> = sizes
        .par_iter()
        .map(|&arms| {
            let report = family
                .instance(arms)
                .and_then(|inst| compare_with_cap(&inst, &uniform_alpha(arms), sim_cap))
                .map_err(|e| e.to_string());
            ScalingRow { arms, report }
        })
        .collect();
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|row| row.report.as_ref().ok().map(|r| (row.arms, r.n_star)))
        .filter(|&(_, n)| n >= 1)
        .map(|(arms, n)| ((arms as f64).ln(), (n as f64).ln()))
        .collect();
    ScalingTable { family, rows, slope: regression_slope(&points) }
}

/// Ordinary least-squares slope; `None` with fewer than two distinct abscissae.
pub fn regression_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
