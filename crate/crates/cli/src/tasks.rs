//! Task execution: build domain objects from the validated config, run the
//! requested computation, and write the report and CSV tables.

use crate::config::{
    CompositionVariantConfig, ExperimentConfig, KernelConfig, PotentialOpConfig, RunConfig,
    SandwichVariantConfig, SurrogateConfig, TaskKind,
};
use crate::report::{field_csv, field_summary, num, num_list, obj, table_csv};
use serde_json::Value;
use std::fs;
use std::path::Path;
use wolffkit_core::{
    capacity_upper, composition_bound, exp_integrability, grid_eval, necessary_condition_ratio,
    picard_solve, pde_surrogate_bound, sandwich, AxisBox, CapacityOptions, CompositionVariant,
    DivergenceKind, Error as CoreError, KernelKind, OrliczPair, PotentialOp, ProblemSpec,
    SandwichVariant, ScalarField, SolveReport, StructuralConstants, SurrogateKind,
    SurrogateOptions,
};

#[derive(Debug)]
pub enum TaskError {
    Io(String),
    Core(CoreError),
}

impl From<CoreError> for TaskError {
    fn from(e: CoreError) -> Self {
        TaskError::Core(e)
    }
}

impl std::fmt::Display for TaskError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TaskError::Io(m) => write!(f, "io error: {m}"),
            TaskError::Core(e) => write!(f, "{e}"),
        }
    }
}

/// Outcome categories that still produce a report file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Divergence, smallness failure, or nonconvergence: exit code 4.
    Degraded(String),
}

pub fn execute(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, TaskError> {
    fs::create_dir_all(out_dir).map_err(|e| TaskError::Io(e.to_string()))?;
    let mut outputs: Vec<String> = Vec::new();
    let mut body: Vec<(&str, Value)> = Vec::new();
    let mut outcome = Outcome::Success;

    match cfg.task {
        TaskKind::Potential => {
            let grid = cfg.grid_spec()?;
            let measure = cfg.build_measure()?;
            let pp = cfg.potential_params();
            let op = match cfg.potential_task.as_ref().map(|t| t.op) {
                Some(PotentialOpConfig::Wolff) => PotentialOp::Wolff,
                Some(PotentialOpConfig::Riesz) => PotentialOp::Riesz,
                Some(PotentialOpConfig::FracMaximal) => PotentialOp::FracMaximal,
                Some(PotentialOpConfig::Bessel) => PotentialOp::Bessel,
                None => unreachable!("validated"),
            };
            match op {
                PotentialOp::Wolff => pp.validate_wolff()?,
                _ => pp.validate_order()?,
            }
            let field = grid_eval(op, &measure, &pp, &grid);
            write_out(out_dir, "field.csv", &field_csv(&field), &mut outputs)?;
            body.push(("field", field_summary(&field)));
        }

        TaskKind::Solve => {
            let (spec, force) = build_problem_spec(cfg)?;
            spec.validate()?;
            let smallness = wolffkit_core::smallness_check(&spec)?;
            if !smallness.passed && !force {
                body.push(("smallness", smallness_json(&smallness)));
                body.push(("ran_iteration", Value::Bool(false)));
                outcome = Outcome::Degraded("smallness_failed".into());
            } else {
                let report = picard_solve(&spec)?;
                write_out(
                    out_dir,
                    "solution.csv",
                    &field_csv(&report.solution),
                    &mut outputs,
                )?;
                write_out(
                    out_dir,
                    "envelope.csv",
                    &field_csv(&report.envelope),
                    &mut outputs,
                )?;
                body.push(("solve", solve_json(&report)));
                body.push(("ran_iteration", Value::Bool(true)));
                if let Some(kind) = report.diverged {
                    outcome = Outcome::Degraded(
                        match kind {
                            DivergenceKind::Overflow => "diverged_overflow",
                            DivergenceKind::BoundViolation => "diverged_bound_violation",
                        }
                        .into(),
                    );
                } else if !report.converged {
                    outcome = Outcome::Degraded("nonconvergence".into());
                }
            }
        }

        TaskKind::Capacity => {
            let grid = cfg.grid_spec()?;
            let cap = cfg.capacity.as_ref().expect("validated");
            let q = OrliczPair::new(cap.orlicz.p, cap.orlicz.l, cap.orlicz.beta)?;
            let kernel = match cap.kernel {
                KernelConfig::Bessel => KernelKind::Bessel,
                KernelConfig::Riesz => KernelKind::Riesz,
            };
            let sets = cfg.build_sets(grid.dim());
            let opts = CapacityOptions {
                budget: cap.budget,
                step: cap.step,
                seed: cfg.seed,
                random_init: false,
            };
            let mut rows = Vec::new();
            let mut sets_json = Vec::new();
            for (i, set) in sets.iter().enumerate() {
                let est = capacity_upper(set, &q, cap.alpha_p, kernel, &grid, &opts)?;
                let mut entry = vec![
                    ("index", Value::from(i)),
                    ("upper_bound", num(est.upper_bound)),
                    ("constraint_violation", num(est.constraint_violation)),
                    ("settled", Value::Bool(est.settled)),
                ];
                let mut row = vec![i as f64, est.upper_bound, est.constraint_violation];
                if cap.two_start {
                    let alt = capacity_upper(
                        set,
                        &q,
                        cap.alpha_p,
                        kernel,
                        &grid,
                        &CapacityOptions {
                            random_init: true,
                            seed: cfg.seed.wrapping_add(1),
                            ..opts.clone()
                        },
                    )?;
                    let gap = if est.upper_bound > 0.0 {
                        (est.upper_bound - alt.upper_bound).abs() / est.upper_bound
                    } else {
                        0.0
                    };
                    entry.push(("second_start_bound", num(alt.upper_bound)));
                    entry.push(("two_start_gap", num(gap)));
                    row.push(gap);
                }
                sets_json.push(obj(entry));
                rows.push(row);
            }
            let header: &[&str] = if cap.two_start {
                &["index", "upper_bound", "constraint_violation", "two_start_gap"]
            } else {
                &["index", "upper_bound", "constraint_violation"]
            };
            write_out(out_dir, "capacity.csv", &table_csv(header, &rows), &mut outputs)?;
            body.push(("capacity", Value::Array(sets_json)));

            if cap.necessary_condition {
                let (spec, _) = build_problem_spec(cfg)?;
                spec.validate()?;
                let report = picard_solve(&spec)?;
                if !report.converged {
                    outcome = Outcome::Degraded("nonconvergence".into());
                }
                let nl = cfg.nonlinearity().expect("validated");
                let ratios = necessary_condition_ratio(
                    &report.solution,
                    &nl,
                    &spec.mu,
                    &q,
                    cap.alpha_p,
                    kernel,
                    &sets,
                    &grid,
                    &opts,
                )?;
                body.push(("necessary_condition_ratios", num_list(&ratios)));
            }
        }

        TaskKind::Verify => {
            let grid = cfg.grid_spec()?;
            let measure = cfg.build_measure()?;
            let pp = cfg.potential_params();
            let verify = cfg.verify.as_ref().expect("validated");
            let mut entries = Vec::new();
            let mut rows = Vec::new();
            for (i, e) in verify.experiments.iter().enumerate() {
                match e {
                    ExperimentConfig::Sandwich { variant, q } => {
                        let v = match variant {
                            SandwichVariantConfig::RieszIne0 => SandwichVariant::RieszIne0,
                            SandwichVariantConfig::BesselIne2 => SandwichVariant::BesselIne2,
                            SandwichVariantConfig::RieszBesselIne3 => {
                                SandwichVariant::RieszBesselIne3
                            }
                        };
                        let rep = sandwich(&measure, &pp, *q, v, &grid)?;
                        entries.push(obj(vec![
                            ("experiment", Value::from(i)),
                            ("type", Value::from("sandwich")),
                            ("q", num(rep.q)),
                            ("lhs_integral", num(rep.lhs_integral)),
                            ("mid_integral", num(rep.mid_integral)),
                            ("implied_lower_c", num(rep.implied_lower_c)),
                            ("implied_upper_c", num(rep.implied_upper_c)),
                            ("degenerate", Value::Bool(rep.degenerate)),
                        ]));
                        rows.push(vec![
                            i as f64,
                            rep.lhs_integral,
                            rep.mid_integral,
                            rep.implied_lower_c,
                            rep.implied_upper_c,
                        ]);
                    }
                    ExperimentConfig::ExpIntegrability { center, r, delta } => {
                        let avg = exp_integrability(&measure, &pp, center, *r, *delta, &grid)?;
                        entries.push(obj(vec![
                            ("experiment", Value::from(i)),
                            ("type", Value::from("exp_integrability")),
                            ("average", num(avg)),
                        ]));
                        rows.push(vec![i as f64, avg, f64::NAN, f64::NAN, f64::NAN]);
                    }
                    ExperimentConfig::Composition { variant, delta } => {
                        let nl = cfg.nonlinearity().expect("validated");
                        let v = match variant {
                            CompositionVariantConfig::ExpSupBound => {
                                CompositionVariant::ExpSupBound
                            }
                            CompositionVariantConfig::ExpPointwise => {
                                CompositionVariant::ExpPointwise
                            }
                            CompositionVariantConfig::TruncatedExpPointwise => {
                                CompositionVariant::TruncatedExpPointwise
                            }
                        };
                        let rep = composition_bound(&measure, &pp, &nl, v, *delta, &grid)?;
                        entries.push(obj(vec![
                            ("experiment", Value::from(i)),
                            ("type", Value::from("composition")),
                            ("ratio_sup", num(rep.ratio_sup)),
                            ("delta_used", num(rep.delta_used)),
                            ("overflowed", Value::Bool(rep.overflowed)),
                        ]));
                        rows.push(vec![
                            i as f64,
                            rep.ratio_sup,
                            rep.delta_used,
                            f64::NAN,
                            f64::NAN,
                        ]);
                    }
                }
            }
            write_out(
                out_dir,
                "verify.csv",
                &table_csv(&["experiment", "v1", "v2", "v3", "v4"], &rows),
                &mut outputs,
            )?;
            body.push(("experiments", Value::Array(entries)));
        }

        TaskKind::Surrogate => {
            let grid = cfg.grid_spec()?;
            let measure = cfg.build_measure()?;
            let sur = cfg.surrogate.as_ref().expect("validated");
            let (kind, diam, k_const, opts) = match sur {
                SurrogateConfig::PLaplace {
                    p,
                    domain_diam,
                    k_const,
                    domain,
                } => (
                    SurrogateKind::PLaplace { p: *p },
                    *domain_diam,
                    *k_const,
                    SurrogateOptions {
                        b_offset: 0.0,
                        domain: domain
                            .as_ref()
                            .map(|b| AxisBox::new(b.min.clone(), b.max.clone()))
                            .transpose()?,
                    },
                ),
                SurrogateConfig::KHessian {
                    k,
                    domain_diam,
                    k_const,
                    b_offset,
                    domain,
                } => (
                    SurrogateKind::KHessian { k: *k },
                    *domain_diam,
                    *k_const,
                    SurrogateOptions {
                        b_offset: *b_offset,
                        domain: domain
                            .as_ref()
                            .map(|b| AxisBox::new(b.min.clone(), b.max.clone()))
                            .transpose()?,
                    },
                ),
            };
            let env = pde_surrogate_bound(kind, &measure, diam, k_const, &grid, &opts)?;
            write_out(
                out_dir,
                "surrogate_upper.csv",
                &field_csv(&env.upper),
                &mut outputs,
            )?;
            body.push(("upper", field_summary(&env.upper)));
            if let Some(lower) = &env.lower {
                write_out(
                    out_dir,
                    "surrogate_lower.csv",
                    &field_csv(lower),
                    &mut outputs,
                )?;
                body.push(("lower", field_summary(lower)));
            }
        }
    }

    // assemble the deterministic report: echoed config, version, outputs
    let mut entries = vec![
        (
            "config",
            serde_json::to_value(cfg).map_err(|e| TaskError::Io(e.to_string()))?,
        ),
        (
            "library_version",
            Value::from(env!("CARGO_PKG_VERSION")),
        ),
        (
            "outcome",
            Value::from(match &outcome {
                Outcome::Success => "success".to_string(),
                Outcome::Degraded(reason) => reason.clone(),
            }),
        ),
        (
            "outputs",
            Value::Array(outputs.iter().map(|s| Value::from(s.as_str())).collect()),
        ),
    ];
    entries.extend(body);
    let report = obj(entries);
    let text = serde_json::to_string_pretty(&report).map_err(|e| TaskError::Io(e.to_string()))?;
    fs::write(out_dir.join("report.json"), text.as_bytes())
        .map_err(|e| TaskError::Io(e.to_string()))?;

    Ok(outcome)
}

fn build_problem_spec(cfg: &RunConfig) -> Result<(ProblemSpec, bool), TaskError> {
    let grid = cfg.grid_spec()?;
    let solve = cfg.solve.as_ref().expect("validated");
    let nl = cfg.nonlinearity().expect("validated");
    let f = match &solve.f_values {
        Some(values) => ScalarField::new(grid.clone(), values.clone())?,
        None => ScalarField::constant(grid.clone(), solve.f_constant),
    };
    let spec = ProblemSpec {
        pp: cfg.potential_params(),
        nl,
        mu: cfg.build_measure()?,
        f,
        epsilon: solve.epsilon,
        k_const: solve.k_const,
        m_override: solve.m_override,
        structural: StructuralConstants {
            delta0: solve.delta0,
            c_growth: solve.c_growth,
        },
        support_radius: solve.support_radius,
        max_iters: solve.max_iters,
        tol: solve.tol,
    };
    Ok((spec, solve.force))
}

fn smallness_json(s: &wolffkit_core::SmallnessReport) -> Value {
    obj(vec![
        ("passed", Value::Bool(s.passed)),
        ("sup_mu", num(s.sup_mu)),
        ("sup_mu1", num(s.sup_mu1)),
        ("m_used", num(s.m_used)),
    ])
}

fn solve_json(r: &SolveReport) -> Value {
    obj(vec![
        ("converged", Value::Bool(r.converged)),
        (
            "diverged",
            match r.diverged {
                None => Value::Null,
                Some(DivergenceKind::Overflow) => Value::from("overflow"),
                Some(DivergenceKind::BoundViolation) => Value::from("bound_violation"),
            },
        ),
        ("iterations", Value::from(r.iterations)),
        ("residual", num(r.residual)),
        ("apriori_margin", num(r.apriori_margin)),
        ("monotone", Value::Bool(r.monotone)),
        ("iterates_sup_norm", num_list(&r.iterates_sup_norm)),
        ("smallness", smallness_json(&r.smallness)),
        (
            "constants",
            obj(vec![
                ("c_p", num(r.constants.c_p)),
                ("c_a_eps", num(r.constants.c_a_eps)),
                ("a_bar", num(r.constants.a_bar)),
            ]),
        ),
        ("solution", field_summary(&r.solution)),
        ("envelope", field_summary(&r.envelope)),
    ])
}

fn write_out(
    dir: &Path,
    name: &str,
    content: &str,
    outputs: &mut Vec<String>,
) -> Result<(), TaskError> {
    fs::write(dir.join(name), content.as_bytes()).map_err(|e| TaskError::Io(e.to_string()))?;
    outputs.push(name.to_string());
    Ok(())
}
