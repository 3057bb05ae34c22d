use num_complex::Complex64;
use serde_json::{json, Value};

use super::output::{opt, render, Table};
use super::{
    instance::{load_instance, write_instance},
    BonusFlag, Command, InstanceArgs, PhaseFlag, ReflectionFlag, RunConfig,
};
use crate::analysis::{compare_with_cap, scaling_experiment, ComparisonReport, Family};
use crate::bandit::BanditInstance;
use crate::classical::{
    default_explore, estimate_error_with, run_ucbe_with, ucbe_error_bound, BonusVariant, RngStream,
};
use crate::error::{Error, Result};
use crate::qbai::{
    amplification_factor, analytic_recommendation, build_operators, build_operators_with,
    success_probability, uniform_alpha, PhaseVariant, QbaiOptions, ReflectionVariant,
};

/// Result of one command: a table, or raw text for `generate`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutput {
    pub table: Option<Table>,
    pub text: Option<String>,
    pub exit_code: i32,
}

impl CommandOutput {
    fn table(table: Table) -> Self {
        Self { table: Some(table), text: None, exit_code: 0 }
    }

    /// The bytes to write for this run.
    pub fn render(&self, cfg: &RunConfig) -> Result<String> {
        match (&self.table, &self.text) {
            (Some(table), _) => render(table, cfg.command.name(), cfg, cfg.format),
            (None, Some(text)) => Ok(text.clone()),
            (None, None) => Ok(String::new()),
        }
    }
}

pub const COMPARE_COLUMNS: &[&str] = &[
    "N",
    "M",
    "p_success",
    "n_star",
    "qbai_success",
    "delta",
    "t_classical",
    "ratio",
    "delta_mapped",
    "delta_source",
    "order_diagnostic",
    "simulated",
    "sim_deviation",
];

fn compare_row(r: &ComparisonReport) -> Vec<Value> {
    vec![
        json!(r.arms),
        json!(r.env),
        json!(r.p_success),
        json!(r.n_star),
        json!(r.qbai_success),
        opt(r.delta),
        opt(r.t_classical),
        opt(r.ratio),
        json!(r.delta_mapped),
        json!(r.delta_source.to_string()),
        opt(r.order_diagnostic),
        json!(r.simulated),
        opt(r.sim_deviation),
    ]
}

fn resolve(source: &InstanceArgs) -> Result<(BanditInstance, Vec<Complex64>)> {
    match (&source.instance, &source.family, source.arms) {
        (Some(path), _, _) => {
            let loaded = load_instance(path)?;
            let arms = loaded.instance.n_arms();
            Ok((loaded.instance, loaded.alpha.unwrap_or_else(|| uniform_alpha(arms))))
        }
        (None, Some(spec), Some(arms)) => {
            let inst = spec.parse::<Family>()?.instance(arms)?;
            Ok((inst, uniform_alpha(arms)))
        }
        _ => Err(Error::InvalidParameter(
            "an instance is required: --instance FILE or --family SPEC --arms N".into(),
        )),
    }
}

pub fn run_command(cfg: &RunConfig) -> Result<CommandOutput> {
    match &cfg.command {
        Command::Simulate(args) => {
            let (inst, alpha) = resolve(&args.source)?;
            let params = success_probability(&inst, &alpha)?;
            let options = QbaiOptions {
                reflection: match args.reflection {
                    ReflectionFlag::Composite => ReflectionVariant::Composite,
                    ReflectionFlag::Tensor => ReflectionVariant::Tensor,
                },
                phases: match args.phases {
                    PhaseFlag::Real => PhaseVariant::Real,
                    PhaseFlag::Random => PhaseVariant::Random { seed: cfg.seed },
                },
            };
            let ops = build_operators_with(&inst, &alpha, options)?;
            let n_max = args.n.unwrap_or(params.n_star);

            let mut table = Table::new(&["n", "x", "probability", "good_amp", "bad_amp"]);
            let mut state = ops.psi0_state.clone();
            for n in 0..=n_max {
                if n > 0 {
                    state = ops.grover_step(&state)?;
                }
                let (good, bad) = ops.subspace_amplitudes(&state)?;
                for (x, p) in state.marginal_over_y().into_iter().enumerate() {
                    table.push(vec![json!(n), json!(x), json!(p), json!(good), json!(bad)]);
                }
            }
            table.add_summary("p_success", params.p_success);
            table.add_summary("theta", params.theta);
            table.add_summary("n_star", params.n_star);
            Ok(CommandOutput::table(table))
        }

        Command::Analytic(args) => {
            let (inst, alpha) = resolve(&args.source)?;
            let params = success_probability(&inst, &alpha)?;
            let n_max = args.n.unwrap_or(params.n_star);
            let mut table = Table::new(&["n", "x", "probability", "c_factor"]);
            for n in 0..=n_max {
                let c = (params.p_success < 1.0).then(|| amplification_factor(&params, n));
                for (x, p) in analytic_recommendation(&inst, &alpha, n)?.into_iter().enumerate() {
                    table.push(vec![json!(n), json!(x), json!(p), opt(c)]);
                }
            }
            table.add_summary("p_success", params.p_success);
            table.add_summary("theta", params.theta);
            table.add_summary("n_star", params.n_star);
            Ok(CommandOutput::table(table))
        }

        Command::Ucbe(args) => {
            let (inst, _) = resolve(&args.source)?;
            let summary = inst.summarize()?;
            let bonus = match args.bonus {
                BonusFlag::PerArm => BonusVariant::PerArm,
                BonusFlag::Printed => BonusVariant::Printed,
            };
            let mut table = if args.traces {
                Table::new(&["T", "trial", "explore", "recommendation", "correct", "rewards_total", "pulls", "means"])
            } else {
                Table::new(&["T", "explore", "trials", "failures", "e_hat", "ci_halfwidth", "bound"])
            };
            for &rounds in &args.rounds {
                let explore = args.explore.unwrap_or_else(|| default_explore(&summary, rounds));
                if args.traces {
                    for trial in 0..args.trials {
                        let mut rng = RngStream::new(cfg.seed, trial as u64);
                        let trace = run_ucbe_with(&inst, rounds, explore, bonus, &mut rng)?;
                        let join = |v: Vec<String>| v.join(";");
                        table.push(vec![
                            json!(rounds),
                            json!(trial),
                            json!(explore),
                            json!(trace.recommendation),
                            json!(trace.recommendation == summary.x_star),
                            json!(trace.rewards_total),
                            json!(join(trace.pulls.iter().map(|p| p.to_string()).collect())),
                            json!(join(trace.means.iter().map(|m| m.to_string()).collect())),
                        ]);
                    }
                } else {
                    let est = estimate_error_with(&inst, rounds, explore, bonus, args.trials, cfg.seed)?;
                    let bound = ucbe_error_bound(&summary, rounds).ok();
                    table.push(vec![
                        json!(rounds),
                        json!(explore),
                        json!(est.trials),
                        json!(est.failures),
                        json!(est.e_hat),
                        json!(est.ci_halfwidth),
                        opt(bound),
                    ]);
                }
            }
            table.add_summary("x_star", summary.x_star);
            table.add_summary("h1", summary.h1);
            Ok(CommandOutput::table(table))
        }

        Command::Compare(args) => {
            let (inst, alpha) = resolve(&args.source)?;
            let report = compare_with_cap(&inst, &alpha, args.sim_cap)?;
            let mut table = Table::new(COMPARE_COLUMNS);
            table.push(compare_row(&report));
            Ok(CommandOutput::table(table))
        }

        Command::Scale(args) => {
            let family: Family = args.family.parse()?;
            let sweep = scaling_experiment(family, &args.sizes, args.sim_cap);
            let mut columns = COMPARE_COLUMNS.to_vec();
            columns.push("status");
            let mut table = Table::new(&columns);
            for row in &sweep.rows {
                match &row.report {
                    Ok(report) => {
                        let mut cells = compare_row(report);
                        cells.push(json!("ok"));
                        table.push(cells);
                    }
                    Err(message) => {
                        let mut cells = vec![Value::Null; COMPARE_COLUMNS.len()];
                        cells[0] = json!(row.arms);
                        cells.push(json!(format!("failed: {message}")));
                        table.push(cells);
                    }
                }
            }
            table.add_summary("family", family.to_string());
            table.add_summary("slope_log_n_star_vs_log_n", opt(sweep.slope));
            Ok(CommandOutput::table(table))
        }

        Command::Validate(args) => {
            let (inst, alpha) = resolve(&args.source)?;
            let params = success_probability(&inst, &alpha)?;
            let ops = build_operators(&inst, &alpha)?;
            let mut table = Table::new(&[
                "n",
                "max_deviation",
                "good_amp_deviation",
                "plane_residual",
                "normalization_deviation",
            ]);
            let mut worst = 0.0f64;
            let mut state = ops.psi0_state.clone();
            for n in 0..=args.n_max {
                if n > 0 {
                    state = ops.grover_step(&state)?;
                }
                let simulated = state.marginal_over_y();
                let analytic = analytic_recommendation(&inst, &alpha, n)?;
                let deviation = simulated
                    .iter()
                    .zip(&analytic)
                    .map(|(s, a)| (s - a).abs())
                    .fold(0.0, f64::max);
                let (good, _) = ops.subspace_amplitudes(&state)?;
                let good_dev = (good - params.good_weight(n).sqrt()).abs();
                let residual = ops.rotation_plane_residual(&state)?;
                let norm_dev = (simulated.iter().sum::<f64>() - 1.0)
                    .abs()
                    .max((analytic.iter().sum::<f64>() - 1.0).abs());
                worst = worst.max(deviation).max(good_dev).max(residual);
                table.push(vec![json!(n), json!(deviation), json!(good_dev), json!(residual), json!(norm_dev)]);
            }
            let pass = worst <= args.tolerance;
            table.add_summary("max_deviation", worst);
            table.add_summary("pass", pass);
            Ok(CommandOutput { table: Some(table), text: None, exit_code: if pass { 0 } else { 3 } })
        }

        Command::Generate(args) => {
            let family: Family = args.family.parse()?;
            let inst = family.instance(args.arms)?;
            let alpha = args.with_alpha.then(|| uniform_alpha(args.arms));
            let text = write_instance(&inst, alpha.as_deref())?;
            Ok(CommandOutput { table: None, text: Some(text), exit_code: 0 })
        }
    }
}
