//! Bandit instances `(X, Y, nu, f)` and the classical quantities derived from
//! them: arm values, the optimal arm, gaps, the hardness `H1`, regret and the
//! misidentification probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::Dims;

/// Row sums within this distance of 1 are accepted as-is.
pub const ROW_SUM_TOL: f64 = 1e-9;
/// Row sums within this distance of 1 (but outside [`ROW_SUM_TOL`]) are renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-6;
/// Gaps at or below this are treated as ties with the optimum.
pub const TIE_TOL: f64 = 1e-12;

/// A best-arm-identification problem with Bernoulli rewards
/// `r = f(x, y)`, `y ~ nu_x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BanditInstance {
    nu: Vec<Vec<f64>>,
    rewards: Vec<Vec<bool>>,
}

impl BanditInstance {
    /// Validates and builds an instance; renormalization notices are logged.
    pub fn new(nu: Vec<Vec<f64>>, rewards: Vec<Vec<bool>>) -> Result<Self> {
        let (inst, warnings) = Self::with_warnings(nu, rewards)?;
        for w in &warnings {
            log::warn!("{w}");
        }
        Ok(inst)
    }

    /// Like [`BanditInstance::new`] but hands the renormalization notices back.
    pub fn with_warnings(
        mut nu: Vec<Vec<f64>>,
        rewards: Vec<Vec<bool>>,
    ) -> Result<(Self, Vec<String>)> {
        let arms = nu.len();
        if arms == 0 {
            return Err(Error::InvalidInstance("at least one arm is required".into()));
        }
        let env = nu[0].len();
        if env == 0 {
            return Err(Error::InvalidInstance("at least one environment state is required".into()));
        }
        if rewards.len() != arms {
            return Err(Error::InvalidInstance(format!(
                "f has {} rows, nu has {arms}",
                rewards.len()
            )));
        }
        let mut warnings = Vec::new();
        for (x, row) in nu.iter_mut().enumerate() {
            if row.len() != env {
                return Err(Error::InvalidInstance(format!(
                    "nu row {x} has {} entries, expected {env}",
                    row.len()
                )));
            }
            if rewards[x].len() != env {
                return Err(Error::InvalidInstance(format!(
                    "f row {x} has {} entries, expected {env}",
                    rewards[x].len()
                )));
            }
            if let Some(y) = row.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "nu[{x}][{y}] = {} is not a probability",
                    row[y]
                )));
            }
            let sum: f64 = row.iter().sum();
            let drift = (sum - 1.0).abs();
            if drift > RENORMALIZE_TOL {
                return Err(Error::InvalidInstance(format!("nu row {x} sums to {sum}, expected 1")));
            }
            if drift > ROW_SUM_TOL {
                warnings.push(format!("nu row {x} sums to {sum}; renormalized"));
                row.iter_mut().for_each(|v| *v /= sum);
            }
        }
        Ok((Self { nu, rewards }, warnings))
    }

    /// Two-state instance realizing the given arm values: `nu_x = (a_x, 1 - a_x)`,
    /// `f(x, .) = (1, 0)`.
    pub fn from_arm_values(values: &[f64]) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidInstance(format!("arm value {v} outside [0, 1]")));
        }
        let nu = values.iter().map(|&a| vec![a, 1.0 - a]).collect();
        let rewards = values.iter().map(|_| vec![true, false]).collect();
        Self::new(nu, rewards)
    }

    pub fn n_arms(&self) -> usize {
        self.nu.len()
    }

    pub fn n_env(&self) -> usize {
        self.nu[0].len()
    }

    pub fn dims(&self) -> Dims {
        Dims { arms: self.n_arms(), env: self.n_env() }
    }

    pub fn nu(&self, x: usize) -> &[f64] {
        &self.nu[x]
    }

    pub fn nu_rows(&self) -> &[Vec<f64>] {
        &self.nu
    }

    pub fn reward(&self, x: usize, y: usize) -> bool {
        self.rewards[x][y]
    }

    pub fn reward_rows(&self) -> &[Vec<bool>] {
        &self.rewards
    }

    /// `f` flattened in register order `x * M + y`.
    pub fn reward_mask(&self) -> Vec<bool> {
        self.rewards.iter().flatten().copied().collect()
    }

    /// `a_x = sum_y nu_x(y) f(x, y)`, clamped to [0, 1] against rounding in the row sum.
    pub fn average_reward(&self, x: usize) -> Result<f64> {
        if x >= self.n_arms() {
            return Err(Error::IndexOutOfRange { index: x, len: self.n_arms() });
        }
        let a: f64 = self.nu[x]
            .iter()
            .zip(&self.rewards[x])
            .filter(|(_, &r)| r)
            .map(|(p, _)| p)
            .sum();
        Ok(a.min(1.0))
    }

    pub fn arm_values(&self) -> Vec<f64> {
        (0..self.n_arms())
            .map(|x| self.average_reward(x).expect("index in range"))
            .collect()
    }

    /// Lowest-index argmax of the arm values, with its value. Never fails, even
    /// on tied instances.
    pub fn optimal_arm(&self) -> (usize, f64) {
        argmax(&self.arm_values())
    }

    pub fn summarize(&self) -> Result<InstanceSummary> {
        InstanceSummary::from_values(self.arm_values())
    }
}

/// Lowest-index maximum of a non-empty slice.
pub(crate) fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    (best, values[best])
}

/// Arm values, optimal arm, gaps and hardness of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub a: Vec<f64>,
    pub x_star: usize,
    pub a_star: f64,
    pub delta: Vec<f64>,
    pub h1: f64,
}

impl InstanceSummary {
    /// Fails with `DegenerateInstance` when a second arm ties the optimum,
    /// since `H1` is then unbounded.
    pub fn from_values(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInstance("no arms".into()));
        }
        let (x_star, a_star) = argmax(&a);
        let delta: Vec<f64> = a.iter().map(|v| a_star - v).collect();
        let mut h1 = 0.0;
        for (x, d) in delta.iter().enumerate() {
            if x == x_star {
                continue;
            }
            if *d <= TIE_TOL {
                return Err(Error::DegenerateInstance(format!(
                    "arm {x} ties the optimal arm {x_star} at value {a_star}"
                )));
            }
            h1 += 1.0 / (d * d);
        }
        Ok(Self { a, x_star, a_star, delta, h1 })
    }

    pub fn n_arms(&self) -> usize {
        self.a.len()
    }

    /// `R = sum_x P(x) Delta_x`.
    pub fn average_regret(&self, p_rec: &[f64]) -> Result<f64> {
        check_distribution(p_rec, self.n_arms())?;
        Ok(p_rec.iter().zip(&self.delta).map(|(p, d)| p * d).sum())
    }

    /// `e = 1 - P(x*)`.
    pub fn error_probability(&self, p_rec: &[f64]) -> Result<f64> {
        check_distribution(p_rec, self.n_arms())?;
        Ok((1.0 - p_rec[self.x_star]).clamp(0.0, 1.0))
    }
}

pub(crate) fn check_distribution(p: &[f64], len: usize) -> Result<()> {
    if p.len() != len {
        return Err(Error::InvalidDistribution(format!(
            "distribution has {} entries, expected {len}",
            p.len()
        )));
    }
    if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < -1e-12) {
        return Err(Error::InvalidDistribution(format!("entry {v} is not a probability")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
    }
    Ok(())
}
