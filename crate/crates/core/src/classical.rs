//! Classical best arm identification: the environment interaction loop, the
//! UCB-E agent, Monte Carlo estimation of the misidentification probability
//! `e_T`, and the UCB-E error bound with its minimum-rounds corollary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandit::{argmax, BanditInstance, InstanceSummary};
use crate::error::{Error, Result};

/// A reproducible random stream identified by `(seed, stream)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// Draws `y ~ nu_x` by inverse CDF on one uniform and returns `(y, f(x, y))`.
pub fn sample_env(inst: &BanditInstance, x: usize, rng: &mut RngStream) -> Result<(usize, bool)> {
    if x >= inst.n_arms() {
        return Err(Error::IndexOutOfRange { index: x, len: inst.n_arms() });
    }
    let row = inst.nu(x);
    let u = rng.uniform();
    let mut cumulative = 0.0;
    let mut y = None;
    for (i, p) in row.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            y = Some(i);
            break;
        }
    }
    // rounding can leave the last partial sum just under 1
    let y = y.unwrap_or_else(|| row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1));
    Ok((y, inst.reward(x, y)))
}

/// Confidence bonus of the UCB-E index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BonusVariant {
    /// `sqrt(explore / |Omega_x|)` with the per-arm pull count.
    #[default]
    PerArm,
    /// `sqrt(explore / (t - 1))`, the same for every arm.
    Printed,
}

/// One UCB-E episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcbeTrace {
    pub rounds: usize,
    pub pulls: Vec<usize>,
    pub means: Vec<f64>,
    pub rewards_total: u64,
    pub recommendation: usize,
}

/// `(25/36) (T - N) / H1`; zero for a single arm.
pub fn default_explore(summary: &InstanceSummary, rounds: usize) -> f64 {
    let arms = summary.n_arms();
    if arms < 2 || rounds <= arms {
        return 0.0;
    }
    25.0 / 36.0 * (rounds - arms) as f64 / summary.h1
}

pub fn run_ucbe(
    inst: &BanditInstance,
    rounds: usize,
    explore: f64,
    rng: &mut RngStream,
) -> Result<UcbeTrace> {
    run_ucbe_with(inst, rounds, explore, BonusVariant::PerArm, rng)
}

pub fn run_ucbe_with(
    inst: &BanditInstance,
    rounds: usize,
    explore: f64,
    bonus: BonusVariant,
    rng: &mut RngStream,
) -> Result<UcbeTrace> {
    let arms = inst.n_arms();
    if rounds < arms {
        return Err(Error::InsufficientBudget { rounds, arms });
    }
    if !(explore >= 0.0) || !explore.is_finite() {
        return Err(Error::InvalidParameter(format!("exploration parameter {explore}")));
    }
    let mut pulls = vec![0usize; arms];
    let mut sums = vec![0u64; arms];
    let mut scores = vec![0.0; arms];
    for t in 1..=rounds {
        let x = if t <= arms {
            t - 1
        } else {
            for (x, score) in scores.iter_mut().enumerate() {
                let mean = sums[x] as f64 / pulls[x] as f64;
                let width = match bonus {
                    BonusVariant::PerArm => explore / pulls[x] as f64,
                    BonusVariant::Printed => explore / (t - 1) as f64,
                };
                *score = mean + width.sqrt();
            }
            argmax(&scores).0
        };
        let (_, reward) = sample_env(inst, x, rng)?;
        pulls[x] += 1;
        sums[x] += reward as u64;
    }
    let means: Vec<f64> = sums.iter().zip(&pulls).map(|(&s, &n)| s as f64 / n as f64).collect();
    let recommendation = argmax(&means).0;
    Ok(UcbeTrace { rounds, pulls, means, rewards_total: sums.iter().sum(), recommendation })
}

/// Monte Carlo estimate of `e_T` with a 95% normal-approximation half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub e_hat: f64,
    pub ci_halfwidth: f64,
    pub trials: usize,
    pub failures: usize,
}

/// Runs `trials` independent episodes; episode `i` draws from stream `(seed, i)`,
/// so the estimate does not depend on the number of worker threads.
pub fn estimate_error(
    inst: &BanditInstance,
    rounds: usize,
    explore: f64,
    trials: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    estimate_error_with(inst, rounds, explore, BonusVariant::PerArm, trials, seed)
}

pub fn estimate_error_with(
    inst: &BanditInstance,
    rounds: usize,
    explore: f64,
    bonus: BonusVariant,
    trials: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    let x_star = inst.summarize()?.x_star;
    let failures = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = RngStream::new(seed, trial);
            run_ucbe_with(inst, rounds, explore, bonus, &mut rng)
                .map(|trace| usize::from(trace.recommendation != x_star))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    let e_hat = failures as f64 / trials as f64;
    let ci_halfwidth = 1.96 * (e_hat * (1.0 - e_hat) / trials as f64).sqrt();
    Ok(ErrorEstimate { e_hat, ci_halfwidth, trials, failures })
}

/// `2 T N exp(-(T - N) / (18 H1))`; may exceed 1.
pub fn ucbe_error_bound(summary: &InstanceSummary, rounds: usize) -> Result<f64> {
    let arms = summary.n_arms();
    if rounds <= arms {
        return Err(Error::InvalidParameter(format!(
            "the bound needs T > N, got T = {rounds}, N = {arms}"
        )));
    }
    let (t, n) = (rounds as f64, arms as f64);
    Ok(2.0 * t * n * (-(t - n) / (18.0 * summary.h1)).exp())
}

/// Smallest integer strictly greater than `18 H1 ln(2N / delta) + N`.
pub fn ucbe_min_rounds(summary: &InstanceSummary, delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 1)")));
    }
    let n = summary.n_arms() as f64;
    let threshold = 18.0 * summary.h1 * (2.0 * n / delta).ln() + n;
    Ok(threshold.floor() as u64 + 1)
}
