//! Quantum best arm identification by amplitude amplification.
//!
//! The register is `|x> (x) |y>` (agent arm, environment state). Preparation is
//! `W = O_e (A (x) I)`, where `A|0> = sum_x alpha_x |x>` and
//! `O_e |x 0> = |x> sum_y sqrt(nu_x(y)) |y>`. One Grover step is
//! `G = W S W^dagger O_f`: the sign oracle `O_f` marks `f(x, y) = 1`, and `S` is
//! a reflection about `|00>` (or, optionally, the tensor product of the two
//! single-register reflections).
//!
//! Besides exact simulation, the module evaluates the closed form
//! `P_n(x) = |alpha_x|^2 (1 + (a_x - p) C(p, n))` with
//! `C(p, n) = (sin^2((2n+1) theta) - p) / (p (1 - p))` and `p = sin^2 theta`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{argmax, BanditInstance};
use crate::completion::complete_unitary;
use crate::error::{Error, Result};
use crate::hilbert::{OperatorSpec, StateVector};

/// Reflection used inside the Grover step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReflectionVariant {
    /// `2|00><00| - I`, giving the diffusion `2|Psi><Psi| - I`.
    #[default]
    Composite,
    /// `(2|0><0| - I) (x) (2|0><0| - I)`.
    Tensor,
}

/// Phases of the environment amplitudes `<y|psi_x>`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseVariant {
    /// `<y|psi_x> = sqrt(nu_x(y))`.
    #[default]
    Real,
    /// `<y|psi_x> = sqrt(nu_x(y)) e^{i phi}` with seeded uniform phases.
    Random { seed: u64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QbaiOptions {
    pub reflection: ReflectionVariant,
    pub phases: PhaseVariant,
}

/// `alpha_x = 1 / sqrt(N)` for every arm.
pub fn uniform_alpha(arms: usize) -> Vec<Complex64> {
    let amp = 1.0 / (arms as f64).sqrt();
    vec![Complex64::new(amp, 0.0); arms]
}

fn check_alpha(inst: &BanditInstance, alpha: &[Complex64]) -> Result<()> {
    if alpha.len() != inst.n_arms() {
        return Err(Error::InvalidParameter(format!(
            "alpha has {} entries for {} arms",
            alpha.len(),
            inst.n_arms()
        )));
    }
    let norm_sqr: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "alpha has squared norm {norm_sqr}, expected 1"
        )));
    }
    Ok(())
}

/// The operators of one QBAI instance and the prepared state `|Psi> = W|00>`.
#[derive(Clone, Debug)]
pub struct QbaiOperators {
    pub prep_agent: OperatorSpec,
    pub prep_env: OperatorSpec,
    pub oracle: OperatorSpec,
    pub reflection: OperatorSpec,
    pub psi0_state: StateVector,
    good_mask: Vec<bool>,
}

pub fn build_operators(inst: &BanditInstance, alpha: &[Complex64]) -> Result<QbaiOperators> {
    build_operators_with(inst, alpha, QbaiOptions::default())
}

pub fn build_operators_with(
    inst: &BanditInstance,
    alpha: &[Complex64],
    options: QbaiOptions,
) -> Result<QbaiOperators> {
    check_alpha(inst, alpha)?;
    let dims = inst.dims();

    let mut phase_rng = match options.phases {
        PhaseVariant::Real => None,
        PhaseVariant::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let blocks = inst
        .nu_rows()
        .iter()
        .map(|row| {
            let column: Vec<Complex64> = row
                .iter()
                .map(|&p| match phase_rng.as_mut() {
                    None => Complex64::new(p.sqrt(), 0.0),
                    Some(rng) => Complex64::from_polar(p.sqrt(), rng.random_range(0.0..2.0 * PI)),
                })
                .collect();
            complete_unitary(&column)
        })
        .collect::<Result<Vec<_>>>()?;
    let prep_env = OperatorSpec::block_env(blocks)?;
    let prep_agent = OperatorSpec::prep(complete_unitary(alpha)?, dims.env)?;

    let good_mask = inst.reward_mask();
    let oracle = OperatorSpec::diagonal_sign(dims, good_mask.clone())?;
    let reflection = match options.reflection {
        ReflectionVariant::Composite => OperatorSpec::composite_reflection(dims, 0)?,
        ReflectionVariant::Tensor => OperatorSpec::tensor_reflection(dims, 0, 0)?,
    };

    let origin = StateVector::basis(dims, 0, 0)?;
    let psi0_state = prep_env.apply(&prep_agent.apply(&origin)?)?;
    Ok(QbaiOperators { prep_agent, prep_env, oracle, reflection, psi0_state, good_mask })
}

impl QbaiOperators {
    /// `G s = W S W^dagger O_f s`.
    pub fn grover_step(&self, s: &StateVector) -> Result<StateVector> {
        let marked = self.oracle.apply(s)?;
        let unprepared = self.prep_agent.apply_adjoint(&self.prep_env.apply_adjoint(&marked)?)?;
        let reflected = self.reflection.apply(&unprepared)?;
        self.prep_env.apply(&self.prep_agent.apply(&reflected)?)
    }

    /// `f(x, y)` flattened in register order.
    pub fn good_mask(&self) -> &[bool] {
        &self.good_mask
    }

    /// Norms of the projections of `s` onto the good and bad subspaces.
    pub fn subspace_amplitudes(&self, s: &StateVector) -> Result<(f64, f64)> {
        let good = s.masked_weight(&self.good_mask)?;
        let bad_mask: Vec<bool> = self.good_mask.iter().map(|m| !m).collect();
        let bad = s.masked_weight(&bad_mask)?;
        Ok((good.sqrt(), bad.sqrt()))
    }

    /// Norm of the component of `s` outside `span{|Psi_1>, |Psi_0>}`, the
    /// normalized good and bad projections of the prepared state.
    pub fn rotation_plane_residual(&self, s: &StateVector) -> Result<f64> {
        let dims = self.psi0_state.dims();
        if s.dims() != dims {
            return Err(Error::Dimension("state does not match the operators".into()));
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut residual: Vec<Complex64> = s.amps().to_vec();
        for target in [true, false] {
            let axis: Vec<Complex64> = self
                .psi0_state
                .amps()
                .iter()
                .zip(&self.good_mask)
                .map(|(&a, &m)| if m == target { a } else { zero })
                .collect();
            let norm = axis.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-300 {
                continue;
            }
            let overlap: Complex64 =
                axis.iter().zip(&residual).map(|(a, r)| a.conj() * r).sum::<Complex64>() / norm;
            for (r, a) in residual.iter_mut().zip(&axis) {
                *r -= overlap * a / norm;
            }
        }
        Ok(residual.iter().map(|r| r.norm_sqr()).sum::<f64>().sqrt())
    }

    /// Applies `n` Grover steps to the prepared state.
    pub fn run(&self, n: usize) -> Result<QbaiRun> {
        let mut state = self.psi0_state.clone();
        for _ in 0..n {
            state = self.grover_step(&state)?;
        }
        let (good_amp, bad_amp) = self.subspace_amplitudes(&state)?;
        let p_rec = state.marginal_over_y();
        Ok(QbaiRun { n, final_state: state, p_rec, good_amp, bad_amp })
    }
}

/// Success probability `p = sin^2 theta` of the prepared state and the
/// iteration count that best rotates it onto the good subspace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplificationParams {
    pub p_success: f64,
    pub theta: f64,
    pub n_star: usize,
}

impl AmplificationParams {
    /// Fails with `NoGoodStates` for `p = 0`.
    pub fn from_p(p_success: f64) -> Result<Self> {
        if !(p_success > 0.0) {
            return Err(Error::NoGoodStates);
        }
        // summation roundoff on an all-good instance
        let p_success = if p_success > 1.0 - 1e-14 { 1.0 } else { p_success };
        let theta = p_success.sqrt().asin();
        let n_star = if p_success >= 1.0 { 0 } else { optimal_iterations(theta) };
        Ok(Self { p_success, theta, n_star })
    }

    /// `sin^2((2n + 1) theta)`, the good-subspace weight after `n` steps.
    pub fn good_weight(&self, n: usize) -> f64 {
        ((2 * n + 1) as f64 * self.theta).sin().powi(2)
    }
}

/// Of `floor` and `ceil` of `pi / (4 theta) - 1/2` (clamped at 0), the one with the
/// larger `sin^2((2n+1) theta)`, preferring the smaller on ties.
pub fn optimal_iterations(theta: f64) -> usize {
    let target = (PI / (4.0 * theta) - 0.5).max(0.0);
    let lo = target.floor() as usize;
    let hi = target.ceil() as usize;
    let weight = |n: usize| ((2 * n + 1) as f64 * theta).sin().powi(2);
    if weight(hi) > weight(lo) + 1e-15 {
        hi
    } else {
        lo
    }
}

/// `p = sum_x |alpha_x|^2 a_x`.
pub fn success_probability(inst: &BanditInstance, alpha: &[Complex64]) -> Result<AmplificationParams> {
    check_alpha(inst, alpha)?;
    let p: f64 = alpha.iter().zip(inst.arm_values()).map(|(a, v)| a.norm_sqr() * v).sum();
    AmplificationParams::from_p(p)
}

/// `C(p, n) = (sin^2((2n+1) theta) - p) / (p (1 - p))`; requires `0 < p < 1`.
pub fn amplification_factor(params: &AmplificationParams, n: usize) -> f64 {
    let p = params.p_success;
    (params.good_weight(n) - p) / (p * (1.0 - p))
}

/// Outcome of `n` simulated Grover steps.
#[derive(Clone, Debug)]
pub struct QbaiRun {
    pub n: usize,
    pub final_state: StateVector,
    pub p_rec: Vec<f64>,
    pub good_amp: f64,
    pub bad_amp: f64,
}

pub fn run_qbai(inst: &BanditInstance, alpha: &[Complex64], n: usize) -> Result<QbaiRun> {
    build_operators(inst, alpha)?.run(n)
}

/// Closed-form recommendation distribution after `n` steps.
pub fn analytic_recommendation(inst: &BanditInstance, alpha: &[Complex64], n: usize) -> Result<Vec<f64>> {
    let params = success_probability(inst, alpha)?;
    let weights = alpha.iter().map(|a| a.norm_sqr());
    if params.p_success >= 1.0 {
        return Ok(weights.collect());
    }
    let c = amplification_factor(&params, n);
    Ok(weights
        .zip(inst.arm_values())
        .map(|(w, a)| w * (1.0 + (a - params.p_success) * c))
        .collect())
}

/// Recommendation probabilities at `n_star` against the ceiling
/// `|alpha_{x*}|^2 a* / p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub n_star: usize,
    pub p_rec: Vec<f64>,
    pub ceiling: f64,
    /// Lowest-index arm of maximal value.
    pub x_star: usize,
    /// Lowest-index arm of maximal recommendation probability.
    pub recommended: usize,
    pub agrees: bool,
}

pub fn theorem1_probability(inst: &BanditInstance, alpha: &[Complex64]) -> Result<Theorem1Report> {
    let params = success_probability(inst, alpha)?;
    let p_rec = analytic_recommendation(inst, alpha, params.n_star)?;
    let (x_star, a_star) = inst.optimal_arm();
    let ceiling = alpha[x_star].norm_sqr() * a_star / params.p_success;
    let (recommended, _) = argmax(&p_rec);
    Ok(Theorem1Report {
        n_star: params.n_star,
        p_rec,
        ceiling,
        x_star,
        recommended,
        agrees: recommended == x_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::DENSE_CAP;

    fn four_arm() -> BanditInstance {
        BanditInstance::from_arm_values(&[1.0, 0.0, 0.0, 0.0]).unwrap()
    }

    fn coin_instance() -> BanditInstance {
        BanditInstance::new(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![true, false], vec![false, false]],
        )
        .unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn prepared_state_examples() {
        let inst = BanditInstance::new(vec![vec![0.5, 0.5]], vec![vec![true, false]]).unwrap();
        let ops = build_operators(&inst, &[Complex64::new(1.0, 0.0)]).unwrap();
        let amps: Vec<f64> = ops.psi0_state.amps().iter().map(|a| a.re).collect();
        assert!(close(&amps, &[0.5f64.sqrt(), 0.5f64.sqrt()], 1e-15));

        let inst = BanditInstance::new(
            vec![vec![1.0, 0.0], vec![1.0, 0.0]],
            vec![vec![true, false], vec![false, false]],
        )
        .unwrap();
        let ops = build_operators(&inst, &uniform_alpha(2)).unwrap();
        let s = 0.5f64.sqrt();
        assert!(ops
            .psi0_state
            .amps()
            .iter()
            .zip([s, 0.0, s, 0.0])
            .all(|(a, e)| (a - Complex64::new(e, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn environment_blocks_reproduce_nu() {
        let inst = BanditInstance::new(
            vec![vec![0.2, 0.3, 0.5], vec![0.0, 1.0, 0.0]],
            vec![vec![true, false, true], vec![false, true, false]],
        )
        .unwrap();
        let alpha = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let ops = build_operators(&inst, &alpha).unwrap();
        for x in 0..2 {
            let col = ops.prep_env.apply(&StateVector::basis(inst.dims(), x, 0).unwrap()).unwrap();
            for y in 0..3 {
                assert!((col.amplitude(x, y).norm_sqr() - inst.nu(x)[y]).abs() < 1e-12);
            }
        }
        let agent = ops.prep_agent.apply(&StateVector::basis(inst.dims(), 0, 0).unwrap()).unwrap();
        for x in 0..2 {
            assert!((agent.amplitude(x, 0).norm_sqr() - alpha[x].norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_reward_oracle_is_identity() {
        let inst = BanditInstance::new(vec![vec![0.3, 0.7]; 3], vec![vec![false, false]; 3]).unwrap();
        assert!(matches!(success_probability(&inst, &uniform_alpha(3)), Err(Error::NoGoodStates)));
        let ops = build_operators(&inst, &uniform_alpha(3)).unwrap();
        let s = ops.psi0_state.clone();
        assert_eq!(ops.oracle.apply(&s).unwrap(), s);

        // with f = 0 the step is a pure reflection, so two steps return any state
        let probe = StateVector::basis(inst.dims(), 2, 1).unwrap();
        let twice = ops.grover_step(&ops.grover_step(&probe).unwrap()).unwrap();
        let dense = ops.reflection.densify(DENSE_CAP).unwrap();
        let w_env = ops.prep_env.densify(DENSE_CAP).unwrap();
        let w_agent = ops.prep_agent.densify(DENSE_CAP).unwrap();
        let w = &w_env * &w_agent;
        let g = &w * dense * w.adjoint();
        let gg = &g * &g;
        let v = nalgebra::DVector::from_column_slice(probe.amps());
        let expected = gg * v;
        for (a, e) in twice.amps().iter().zip(expected.iter()) {
            assert!((a - e).norm() < 1e-12);
        }
        assert!(twice.amps().iter().zip(probe.amps()).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn step_negates_states_orthogonal_to_psi_and_good_space() {
        // arm 1 never rewards, so |1 y> is bad; pick the component orthogonal to |Psi>
        let inst = BanditInstance::new(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![true, false], vec![false, false]],
        )
        .unwrap();
        let ops = build_operators(&inst, &uniform_alpha(2)).unwrap();
        let s = StateVector::normalized(
            inst.dims(),
            vec![0.0, 0.0, 1.0, -1.0].into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        )
        .unwrap();
        assert!(ops.psi0_state.inner(&s).unwrap().norm() < 1e-15);
        let out = ops.grover_step(&s).unwrap();
        assert!(out.amps().iter().zip(s.amps()).all(|(a, b)| (a + b).norm() < 1e-12));
    }

    #[test]
    fn success_probability_examples() {
        let params = success_probability(&four_arm(), &uniform_alpha(4)).unwrap();
        assert!((params.p_success - 0.25).abs() < 1e-15);
        assert!((params.theta - PI / 6.0).abs() < 1e-15);
        assert_eq!(params.n_star, 1);

        let single = BanditInstance::from_arm_values(&[0.5]).unwrap();
        let params = success_probability(&single, &uniform_alpha(1)).unwrap();
        assert!((params.theta - PI / 4.0).abs() < 1e-15);

        let all_good = BanditInstance::new(vec![vec![0.4, 0.6]; 2], vec![vec![true, true]; 2]).unwrap();
        let params = success_probability(&all_good, &uniform_alpha(2)).unwrap();
        assert_eq!((params.p_success, params.n_star), (1.0, 0));
    }

    #[test]
    fn n_star_prefers_fewer_iterations_on_ties() {
        // theta = pi/4: target 0.5, n = 0 and n = 1 both give sin^2 = 1/2
        assert_eq!(optimal_iterations(PI / 4.0), 0);
        assert_eq!(optimal_iterations(PI / 6.0), 1);
    }

    #[test]
    fn exact_grover_cases() {
        let run = run_qbai(&four_arm(), &uniform_alpha(4), 1).unwrap();
        assert!((run.good_amp - 1.0).abs() < 1e-12);
        assert!(close(&run.p_rec, &[1.0, 0.0, 0.0, 0.0], 1e-12));

        let run = run_qbai(&coin_instance(), &uniform_alpha(2), 1).unwrap();
        assert!(close(&run.p_rec, &[1.0, 0.0], 1e-12));
    }

    #[test]
    fn no_amplification_at_zero_steps() {
        let inst = coin_instance();
        let alpha = vec![Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.6)];
        let run = run_qbai(&inst, &alpha, 0).unwrap();
        assert!(close(&run.p_rec, &[0.64, 0.36], 1e-12));
        assert!(close(&analytic_recommendation(&inst, &alpha, 0).unwrap(), &[0.64, 0.36], 1e-12));
    }

    #[test]
    fn analytic_examples() {
        let p = analytic_recommendation(&four_arm(), &uniform_alpha(4), 1).unwrap();
        assert!(close(&p, &[1.0, 0.0, 0.0, 0.0], 1e-12));
        let params = success_probability(&four_arm(), &uniform_alpha(4)).unwrap();
        assert!((amplification_factor(&params, 1) - 4.0).abs() < 1e-12);

        let inst = BanditInstance::from_arm_values(&[0.5, 0.1, 0.1, 0.1]).unwrap();
        let report = theorem1_probability(&inst, &uniform_alpha(4)).unwrap();
        assert!((report.ceiling - 0.625).abs() < 1e-12);
        assert!(report.p_rec[0] <= report.ceiling + 1e-12);
        assert!(report.agrees);
    }

    #[test]
    fn best_arm_report_single_arm() {
        let inst = BanditInstance::from_arm_values(&[0.3]).unwrap();
        let report = theorem1_probability(&inst, &uniform_alpha(1)).unwrap();
        assert!((report.ceiling - 1.0).abs() < 1e-15);
        for n in 0..5 {
            assert!(close(&run_qbai(&inst, &uniform_alpha(1), n).unwrap().p_rec, &[1.0], 1e-12));
        }
    }

    #[test]
    fn non_uniform_alpha_can_disagree_with_best_arm() {
        // almost all preparation weight on the worse arm
        let inst = BanditInstance::from_arm_values(&[0.6, 0.5]).unwrap();
        let alpha = vec![Complex64::new(0.1, 0.0), Complex64::new(0.99f64.sqrt(), 0.0)];
        let report = theorem1_probability(&inst, &alpha).unwrap();
        assert_eq!(report.x_star, 0);
        assert_eq!(report.recommended, 1);
        assert!(!report.agrees);
    }

    #[test]
    fn invalid_alpha() {
        let inst = coin_instance();
        assert!(build_operators(&inst, &[Complex64::new(1.0, 0.0)]).is_err());
        assert!(build_operators(&inst, &[Complex64::new(0.5, 0.0); 2]).is_err());
    }

    #[test]
    fn random_phases_leave_recommendations_unchanged() {
        let inst = BanditInstance::new(
            vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.1, 0.3], vec![0.1, 0.1, 0.8]],
            vec![vec![true, false, true], vec![false, true, false], vec![false, false, true]],
        )
        .unwrap();
        let alpha = uniform_alpha(3);
        let plain = build_operators(&inst, &alpha).unwrap();
        let phased = build_operators_with(
            &inst,
            &alpha,
            QbaiOptions { phases: PhaseVariant::Random { seed: 7 }, ..Default::default() },
        )
        .unwrap();
        assert_ne!(plain.psi0_state, phased.psi0_state);
        for n in 0..12 {
            assert!(close(&plain.run(n).unwrap().p_rec, &phased.run(n).unwrap().p_rec, 1e-12));
        }
    }

    #[test]
    fn tensor_reflection_differs_from_composite() {
        let inst = BanditInstance::from_arm_values(&[0.5, 0.1, 0.1, 0.1]).unwrap();
        let alpha = uniform_alpha(4);
        let composite = build_operators(&inst, &alpha).unwrap().run(1).unwrap();
        let tensor = build_operators_with(
            &inst,
            &alpha,
            QbaiOptions { reflection: ReflectionVariant::Tensor, ..Default::default() },
        )
        .unwrap()
        .run(1)
        .unwrap();
        assert!((tensor.p_rec.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(!close(&composite.p_rec, &tensor.p_rec, 1e-6));
    }
}
