//! Validated experiments and their runners.

use std::path::{Path, PathBuf};

use levywave_core::fields::{Coefficient, InitialDisplacement, InitialVelocity, LowerBoundData, Scenario, Table};
use levywave_core::levy_measure::{Atom, LevyMeasure, TabulatedDensity};
use levywave_core::moments::{lyapunov_fit, FitMode, MomentEstimate, MomentPlan};
use levywave_core::oracle_bounds::{
    linear_second_moment, lower_bound_crossing, lower_bound_moment, second_moment_kernel, upper_bound_moment,
    volterra_solve, BoundConstants, RenewalKernel, RosenthalProbe,
};
use levywave_core::prm::{Cutoff, NoiseGrid, ResolvedTruncation, SmallJumpMode, TruncationPolicy};
use levywave_core::rng::StreamKey;
use levywave_core::solver::{successive_differences, GridGeometry, LatticeSolver, Scheme};
use levywave_core::step::{Rect, StepFunction};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    CoefficientSpec, Command, CutoffSpec, DisplacementSpec, ExperimentConfig, FitModeSpec, KernelSpec, MeasureSpec,
    ModeSpec, SchemeSpec, VelocitySpec,
};
use crate::emit::{write_csv, write_json};
use crate::error::{invalid, CliError};

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

/// Files written by a run and the one-line summaries it printed.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub summaries: Vec<String>,
}

/// A config whose cross-field checks have all passed.
#[derive(Debug)]
pub struct Experiment {
    config: ExperimentConfig,
    task: Task,
}

#[derive(Debug)]
enum Task {
    Simulate { solver: LatticeSolver, truncation: ResolvedTruncation, scheme: Scheme, replicate: u64 },
    Moments { plan: MomentPlan, p_list: Vec<f64>, window: Option<(f64, f64)>, mode: FitMode },
    Picard { solver: LatticeSolver, truncation: ResolvedTruncation, iterations: usize, replicate: u64 },
    Oracle { a2: f64, kernel: RenewalKernel, horizon: f64, step: f64, lower: Option<(LowerBoundData, f64)> },
    Bounds { constants: BoundConstants, measure: LevyMeasure, p_list: Vec<f64>, times: Vec<f64> },
    Rosenthal { probe: RosenthalProbe, p_list: Vec<f64>, replicates: usize },
    NoiseTest { truncation: ResolvedTruncation, grid: NoiseGrid, m2: f64, replicates: usize },
}

fn missing(what: &str, command: Command) -> CliError {
    CliError::Validation(format!("command {} needs {what}", command.name()))
}

impl Experiment {
    pub fn build(config: ExperimentConfig) -> Result<Self, CliError> {
        let command = config.command;
        let measure =
            || config.measure.as_ref().ok_or_else(|| missing("a [measure] section", command)).and_then(build_measure);
        let scenario = || {
            config.scenario.as_ref().ok_or_else(|| missing("a [scenario] section", command)).and_then(build_scenario)
        };
        let geometry = || {
            let g = config.geometry.ok_or_else(|| missing("a [geometry] section", command))?;
            let geometry = GridGeometry::new(g.horizon, g.half_width, g.step).map_err(invalid("geometry"))?;
            let scheme = match g.scheme {
                SchemeSpec::ConeSum => Scheme::ConeSum,
                SchemeSpec::Diamond => Scheme::Diamond,
            };
            Ok::<_, CliError>((geometry, scheme))
        };
        let policy = build_policy(&config);
        let replicates = |min: usize| {
            let r = config.replicates.ok_or_else(|| missing("`replicates`", command))?;
            if r < min {
                return Err(CliError::Validation(format!("replicates must be at least {min}, got {r}")));
            }
            Ok(r)
        };
        let p_list = || {
            let p = config.p_list.clone().ok_or_else(|| missing("`p_list`", command))?;
            if let Some(bad) = p.iter().find(|p| !(**p >= 2.0 && p.is_finite())) {
                return Err(CliError::Validation(format!("moment orders must be finite and >= 2, got {bad}")));
            }
            Ok(p)
        };
        let finite_moments = |m: &LevyMeasure, p_list: &[f64]| {
            for &p in p_list {
                let mp = m.max_moment(p).map_err(invalid("measure"))?;
                if !mp.is_finite() {
                    return Err(CliError::Validation(format!("measure has infinite moment of order {p}")));
                }
            }
            Ok(())
        };

        let task = match command {
            Command::Simulate => {
                let (g, scheme) = geometry()?;
                let truncation = policy.resolve(&measure()?).map_err(invalid("policy"))?;
                Task::Simulate {
                    solver: LatticeSolver::new(&scenario()?, &g),
                    truncation,
                    scheme,
                    replicate: config.simulate.unwrap_or_default().replicate,
                }
            }
            Command::Moments => {
                let (g, scheme) = geometry()?;
                let (m, s, p_list) = (measure()?, scenario()?, p_list()?);
                finite_moments(&m, &p_list)?;
                let spec = config.moments.unwrap_or_default();
                let mode = match spec.fit_mode {
                    FitModeSpec::Sup => FitMode::Sup,
                    FitModeSpec::Inf => FitMode::Inf,
                    FitModeSpec::AtX => {
                        let x =
                            spec.fit_x.ok_or_else(|| missing("`moments.fit_x` for fit_mode = \"at-x\"", command))?;
                        if g.window_index(x).is_none() {
                            return Err(CliError::Validation(format!("fit_x = {x} is not a window grid point")));
                        }
                        FitMode::AtX(x)
                    }
                };
                if let Some((t0, t1)) = spec.fit_window {
                    if !(t0 < t1 && t0 >= 0.0 && t1 <= g.horizon()) {
                        return Err(CliError::Validation(format!(
                            "fit window [{t0}, {t1}] must lie in [0, {}]",
                            g.horizon()
                        )));
                    }
                }
                let plan = MomentPlan::new(&s, &g, &m, &policy, &p_list, replicates(2)?, config.seed)
                    .map_err(invalid("moments"))?
                    .with_scheme(scheme);
                Task::Moments { plan, p_list, window: spec.fit_window, mode }
            }
            Command::Picard => {
                let spec = config.picard.ok_or_else(|| missing("a [picard] section", command))?;
                if spec.iterations == 0 {
                    return Err(CliError::Validation("picard.iterations must be positive".into()));
                }
                let (g, _) = geometry()?;
                let truncation = policy.resolve(&measure()?).map_err(invalid("policy"))?;
                Task::Picard {
                    solver: LatticeSolver::new(&scenario()?, &g),
                    truncation,
                    iterations: spec.iterations,
                    replicate: spec.replicate,
                }
            }
            Command::Oracle => {
                let spec = config.oracle.clone().ok_or_else(|| missing("an [oracle] section", command))?;
                let (a2, kernel, lower) = match spec.kernel {
                    KernelSpec::Scenario => {
                        let (m, s) = (measure()?, scenario()?);
                        let data = s.lower_bound_data().map_err(invalid("lower-bound scenario"))?;
                        if let Some(a2) = spec.a2 {
                            if a2 != data.a * data.a {
                                return Err(CliError::Validation(format!(
                                    "oracle.a2 = {a2} disagrees with v0 = {}",
                                    data.a
                                )));
                            }
                        }
                        let kernel = second_moment_kernel(data.lower_lipschitz_sigma, m.m2());
                        (data.a * data.a, kernel, Some((data, m.m2())))
                    }
                    ref k => {
                        let a2 = spec.a2.ok_or_else(|| missing("`oracle.a2`", command))?;
                        let kernel = match k {
                            KernelSpec::Linear { c } => RenewalKernel::Linear(*c),
                            KernelSpec::Constant { c } => RenewalKernel::Constant(*c),
                            KernelSpec::Tabulated { t, g } => RenewalKernel::Tabulated(
                                Table::new(t.clone(), g.clone()).map_err(invalid("oracle kernel"))?,
                            ),
                            KernelSpec::Scenario => unreachable!(),
                        };
                        (a2, kernel, None)
                    }
                };
                if !(a2 > 0.0 && a2.is_finite()) {
                    return Err(CliError::Validation(format!("oracle.a2 must be positive, got {a2}")));
                }
                // a zero-length solve runs every parameter check
                volterra_solve(a2, kernel.clone(), 0.0, spec.step).map_err(invalid("oracle"))?;
                let r = spec.horizon / spec.step;
                if !spec.horizon.is_finite() || spec.horizon <= 0.0 || (r - r.round()).abs() > 1e-9 * r.max(1.0) {
                    return Err(CliError::Validation(format!(
                        "oracle.horizon = {} must be a positive multiple of the step {}",
                        spec.horizon, spec.step
                    )));
                }
                Task::Oracle { a2, kernel, horizon: spec.horizon, step: spec.step, lower }
            }
            Command::Bounds => {
                let spec = config.bounds.ok_or_else(|| missing("a [bounds] section", command))?;
                let (m, s, p_list) = (measure()?, scenario()?, p_list()?);
                finite_moments(&m, &p_list)?;
                let constants = BoundConstants::from_scenario(&s, &m, spec.c0).map_err(invalid("bounds"))?;
                let times = time_grid(spec.horizon, spec.step)?;
                Task::Bounds { constants, measure: m, p_list, times }
            }
            Command::Rosenthal => {
                let spec = config.rosenthal.clone().ok_or_else(|| missing("a [rosenthal] section", command))?;
                let (m, p_list) = (measure()?, p_list()?);
                finite_moments(&m, &p_list)?;
                let pieces = spec.integrand.iter().map(|p| (Rect::new(p.t0, p.t1, p.x0, p.x1), p.value)).collect();
                let integrand = StepFunction::new(pieces).map_err(invalid("rosenthal integrand"))?;
                let probe = RosenthalProbe::with_time_steps(&integrand, &m, &policy, spec.horizon, spec.time_steps)
                    .map_err(invalid("rosenthal"))?;
                Task::Rosenthal { probe, p_list, replicates: replicates(1)? }
            }
            Command::NoiseTest => {
                let (g, _) = geometry()?;
                let m = measure()?;
                let truncation = policy.resolve(&m).map_err(invalid("policy"))?;
                Task::NoiseTest { truncation, grid: g.noise_grid(), m2: m.m2(), replicates: replicates(2)? }
            }
        };
        Ok(Self { config, task })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    /// Output directory from the config, `out` by default.
    pub fn default_out_dir(&self) -> PathBuf {
        self.config.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Runs on the current rayon pool and writes `<stem>.csv` and
    /// `<stem>.json` into `out_dir`.
    pub fn run(&self, out_dir: &Path) -> Result<RunOutput, CliError> {
        std::fs::create_dir_all(out_dir)?;
        let stem = self.config.output.stem.clone().unwrap_or_else(|| self.config.command.name().to_string());
        let csv = out_dir.join(format!("{stem}.csv"));
        let json_path = out_dir.join(format!("{stem}.json"));
        let seed = self.config.seed;
        let mut summaries = Vec::new();
        let body = match &self.task {
            Task::Simulate { solver, truncation, scheme, replicate } => {
                let noise = truncation.noise_field(solver.geometry().noise_grid(), StreamKey::new(seed, *replicate));
                let sol = solver.simulate(&noise, *scheme)?;
                write_csv(&csv, &["t", "x", "u"], sol.triples().map(|(t, x, u)| [t, x, u]))?;
                let g = solver.geometry();
                let at_origin = sol.at(g.horizon(), 0.0);
                summaries.push(format!(
                    "simulate replicate {replicate}: u(T, 0) = {}, sup |u| = {:.6}",
                    at_origin.map_or("n/a".into(), |u| format!("{u:.6}")),
                    sol.sup_norm()
                ));
                json!({
                    "replicate": replicate,
                    "scheme": scheme_name(*scheme),
                    "truncation": truncation_json(truncation),
                    "u_at_horizon_origin": at_origin,
                    "sup_norm": sol.sup_norm(),
                })
            }
            Task::Moments { plan, p_list, window, mode } => {
                let blocks = (0..plan.block_count())
                    .into_par_iter()
                    .map(|b| plan.run_block(b))
                    .collect::<Result<Vec<_>, _>>()?;
                let estimates = plan.finish(&blocks)?;
                write_csv(
                    &csv,
                    &["p", "t", "x", "mean", "stderr"],
                    estimates.iter().flat_map(|e| e.rows().map(move |(t, x, m, s)| [e.p(), t, x, m, s])),
                )?;
                let g = plan.geometry();
                let mut entries = Vec::new();
                for e in &estimates {
                    let (entry, line) = moment_summary(e, g, *window, *mode);
                    summaries.push(line);
                    entries.push(entry);
                }
                json!({
                    "replicates": plan.replicates(),
                    "blocks": plan.block_count(),
                    "p_list": p_list,
                    "truncation": truncation_json(plan.truncation()),
                    "window_x": [-g.half_width(), g.half_width()],
                    "summaries": entries,
                })
            }
            Task::Picard { solver, truncation, iterations, replicate } => {
                let noise = truncation.noise_field(solver.geometry().noise_grid(), StreamKey::new(seed, *replicate));
                let iterates = solver.picard_sequence(&noise, *iterations)?;
                let d = successive_differences(&iterates);
                write_csv(&csv, &["n", "sup_diff"], d.iter().enumerate().map(|(k, &v)| [(k + 1) as f64, v]))?;
                let exact = solver.simulate(&noise, Scheme::ConeSum)?;
                let gap = iterates[*iterations].sup_distance(&exact);
                summaries.push(format!(
                    "picard: {iterations} iterations, last sup diff {:.3e}, distance to solution {gap:.3e}",
                    d[d.len() - 1]
                ));
                json!({
                    "replicate": replicate,
                    "iterations": iterations,
                    "sup_diff": d,
                    "distance_to_solution": gap,
                })
            }
            Task::Oracle { a2, kernel, horizon, step, lower } => {
                let sol = volterra_solve(*a2, kernel.clone(), *horizon, *step)?;
                write_csv(&csv, &["t", "f"], sol.points().map(|(t, f)| [t, f]))?;
                let f_end = sol.values()[sol.values().len() - 1];
                let closed = match kernel {
                    RenewalKernel::Linear(c) => Some(|t: f64| a2 * (c.sqrt() * t).cosh()),
                    _ => None,
                }
                .map(|f| sol.points().map(|(t, v)| (v - f(t)).abs()).fold(0.0, f64::max));
                let mut out = json!({
                    "a2": a2,
                    "kernel": kernel_json(kernel),
                    "horizon": horizon,
                    "step": step,
                    "f_at_horizon": f_end,
                    "max_error_vs_closed_form": closed,
                });
                let mut line = format!("oracle: f({horizon}) = {f_end:.6}");
                if let Some((data, m2)) = lower {
                    let crossing = lower_bound_crossing(&sol, data.a, data.lower_lipschitz_sigma, *m2);
                    out["lower_bound"] = json!({
                        "a": data.a,
                        "l_sigma": data.lower_lipschitz_sigma,
                        "m2": m2,
                        "closed_form_at_horizon": linear_second_moment(data.a, data.lower_lipschitz_sigma, *m2, *horizon),
                        "envelope_at_horizon": lower_bound_moment(data.a, data.lower_lipschitz_sigma, *m2, *horizon),
                        "crossing_time": crossing,
                    });
                    line.push_str(&format!(
                        ", lower envelope below from t* = {}",
                        crossing.map_or("never".into(), |t| t.to_string())
                    ));
                }
                summaries.push(line);
                out
            }
            Task::Bounds { constants, measure, p_list, times } => {
                let mut rows = Vec::new();
                let mut per_p = Vec::new();
                for &p in p_list {
                    for &t in times {
                        let b = upper_bound_moment(constants, measure, p, t)?;
                        rows.push([p, t, b.log_value, b.value]);
                    }
                    let log_beta = constants.log_beta(measure, p)?;
                    let last = rows[rows.len() - 1];
                    summaries.push(format!(
                        "bounds p={p}: log sup_x E|u|^p <= {:.6} at t = {}, ln beta = {log_beta:.6}",
                        last[2], last[1]
                    ));
                    per_p.push(json!({"p": p, "log_beta": log_beta, "beta": log_beta.exp()}));
                }
                write_csv(&csv, &["p", "t", "log_upper", "upper"], rows.into_iter())?;
                json!({
                    "constants": {
                        "K": constants.k(),
                        "L": constants.l(),
                        "C0": constants.c0(),
                        "m2": constants.m2(),
                        "L_sigma": constants.l_sigma(),
                        "gamma": constants.gamma(),
                        "L1": constants.l1(),
                        "L2": constants.l2(),
                        "lambda": constants.lambda(),
                    },
                    "in_proof_regime": constants.in_proof_regime(),
                    "orders": per_p,
                })
            }
            Task::Rosenthal { probe, p_list, replicates } => {
                let sups: Vec<f64> =
                    (0..*replicates).into_par_iter().map(|r| probe.sup_path(StreamKey::new(seed, r as u64))).collect();
                let reports = p_list.iter().map(|&p| probe.report(p, &sups)).collect::<Result<Vec<_>, _>>()?;
                write_csv(
                    &csv,
                    &["p", "lhs_p_norm", "lhs_moment_stderr", "term_quadratic", "term_jump", "empirical_ratio"],
                    reports.iter().map(|r| {
                        [r.p, r.lhs_p_norm, r.lhs_moment_stderr, r.term_quadratic, r.term_jump, r.empirical_ratio]
                    }),
                )?;
                let entries: Vec<Value> = reports
                    .iter()
                    .map(|r| {
                        summaries.push(format!(
                            "rosenthal p={}: lhs {:.6}, rhs terms {:.6} + {:.6}, ratio {:.6}",
                            r.p, r.lhs_p_norm, r.term_quadratic, r.term_jump, r.empirical_ratio
                        ));
                        json!({
                            "p": r.p,
                            "lhs_p_norm": r.lhs_p_norm,
                            "lhs_moment_stderr": r.lhs_moment_stderr,
                            "term_quadratic": r.term_quadratic,
                            "term_jump": r.term_jump,
                            "empirical_ratio": r.empirical_ratio,
                            "ratio_over_p_by_ln_p": r.empirical_ratio * r.p.ln() / r.p,
                        })
                    })
                    .collect();
                json!({
                    "replicates": replicates,
                    "truncation": truncation_json(probe.truncation()),
                    "reports": entries,
                })
            }
            Task::NoiseTest { truncation, grid, m2, replicates } => {
                let per_replicate: Vec<[f64; 3]> = (0..*replicates)
                    .into_par_iter()
                    .map(|r| {
                        let f = truncation.noise_field(*grid, StreamKey::new(seed, r as u64));
                        let (s1, s2) = f.increments().iter().fold((0.0, 0.0), |(a, b), v| (a + v, b + v * v));
                        [f.total(), s1, s2]
                    })
                    .collect();
                let cells = (grid.cell_count() * replicates) as f64;
                let (mut s1, mut s2) = (0.0, 0.0);
                for row in &per_replicate {
                    s1 += row[1];
                    s2 += row[2];
                }
                let cell_mean = s1 / cells;
                let cell_var = (s2 - cells * cell_mean * cell_mean) / (cells - 1.0);
                let totals: Vec<f64> = per_replicate.iter().map(|r| r[0]).collect();
                let n = totals.len() as f64;
                let tm = totals.iter().sum::<f64>() / n;
                let tv = totals.iter().map(|v| (v - tm) * (v - tm)).sum::<f64>() / (n - 1.0);
                let rate = truncation.info().simulated_variance_rate();
                let area = grid.cell_area() * grid.cell_count() as f64;
                write_csv(&csv, &["replicate", "total"], totals.iter().enumerate().map(|(r, &v)| [r as f64, v]))?;
                summaries.push(format!(
                    "noise-test: cell variance {cell_var:.6} (expected {:.6}), total variance {tv:.6} (expected {:.6})",
                    rate * grid.cell_area(),
                    rate * area
                ));
                json!({
                    "replicates": replicates,
                    "cells_per_replicate": grid.cell_count(),
                    "truncation": truncation_json(truncation),
                    "m2": m2,
                    "cell_mean": cell_mean,
                    "cell_variance": cell_var,
                    "expected_cell_variance": rate * grid.cell_area(),
                    "total_mean": tm,
                    "total_variance": tv,
                    "expected_total_variance": rate * area,
                })
            }
        };
        let mut doc = json!({
            "version": VERSION,
            "command": self.config.command.name(),
            "seed": seed,
            "config": self.config,
        });
        if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
            d.extend(b);
        }
        write_json(&json_path, &doc)?;
        Ok(RunOutput { csv, json: json_path, summaries })
    }
}

fn moment_summary(e: &MomentEstimate, g: &GridGeometry, window: Option<(f64, f64)>, mode: FitMode) -> (Value, String) {
    let (mode_name, x) = match mode {
        FitMode::Sup => ("sup".to_string(), None),
        FitMode::Inf => ("inf".to_string(), None),
        FitMode::AtX(x) => (format!("at_x({x})"), Some(x)),
    };
    let last = g.time_steps();
    let origin = e.column_of(0.0).map(|i| (e.mean_at(last, i), e.stderr_at(last, i)));
    let fit = lyapunov_fit(e, window, mode);
    let mut line = format!("moments p={}:", e.p());
    if let Some((m, s)) = origin {
        line.push_str(&format!(" E|u(T,0)|^p = {m:.6} ± {s:.6},"));
    }
    let mut entry = json!({
        "p": e.p(),
        "sup_inf_mode": mode_name,
        "fit_x": x,
        "mean_at_origin": origin.map(|(m, s)| json!({"t": g.horizon(), "x": 0.0, "mean": m, "stderr": s})),
    });
    match fit {
        Ok(f) => {
            line.push_str(&format!(
                " {mode_name} slope {:.6} ± {:.6} on [{}, {}]",
                f.slope, f.ci_half_width, f.window.0, f.window.1
            ));
            entry["window"] = json!([f.window.0, f.window.1]);
            entry["slope"] = json!(f.slope);
            entry["ci"] = json!(f.ci_half_width);
            entry["fit_points"] = json!(f.points);
        }
        Err(err) => {
            line.push_str(&format!(" no growth fit ({err})"));
            let horizon = g.horizon();
            let w = window.unwrap_or((0.5 * horizon, horizon));
            entry["window"] = json!([w.0, w.1]);
            entry["slope"] = Value::Null;
            entry["ci"] = Value::Null;
            entry["fit_error"] = json!(err.to_string());
        }
    }
    (entry, line)
}

fn time_grid(horizon: f64, step: f64) -> Result<Vec<f64>, CliError> {
    let r = horizon / step;
    if !(step > 0.0 && horizon >= 0.0 && r.is_finite()) || (r - r.round()).abs() > 1e-9 * r.max(1.0) {
        return Err(CliError::Validation(format!("horizon {horizon} must be a nonnegative multiple of step {step}")));
    }
    Ok((0..=r.round() as usize).map(|n| n as f64 * step).collect())
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::ConeSum => "cone-sum",
        Scheme::Diamond => "diamond",
    }
}

fn truncation_json(t: &ResolvedTruncation) -> Value {
    let info = t.info();
    json!({
        "eps": info.eps,
        "mode": match info.mode {
            SmallJumpMode::Drop => "drop",
            SmallJumpMode::GaussianSubstitute => "gaussian-substitute",
        },
        "tail_mass": info.tail_mass,
        "small_jump_variance": info.small_jump_variance,
        "simulated_variance_rate": info.simulated_variance_rate(),
    })
}

fn kernel_json(k: &RenewalKernel) -> Value {
    match k {
        RenewalKernel::Linear(c) => json!({"kind": "linear", "c": c}),
        RenewalKernel::Constant(c) => json!({"kind": "constant", "c": c}),
        RenewalKernel::Tabulated(t) => json!({"kind": "tabulated", "t": t.xs(), "g": t.ys()}),
    }
}

fn build_policy(config: &ExperimentConfig) -> TruncationPolicy {
    TruncationPolicy {
        cutoff: match config.policy.cutoff {
            CutoffSpec::Fixed { eps } => Cutoff::Fixed(eps),
            CutoffSpec::Auto { target_variance_fraction } => Cutoff::Auto { target_variance_fraction },
        },
        mode: match config.policy.mode {
            ModeSpec::Drop => SmallJumpMode::Drop,
            ModeSpec::GaussianSubstitute => SmallJumpMode::GaussianSubstitute,
        },
    }
}

fn build_measure(spec: &MeasureSpec) -> Result<LevyMeasure, CliError> {
    match spec {
        MeasureSpec::Gamma { alpha, beta } => LevyMeasure::gamma(*alpha, *beta),
        MeasureSpec::Dirac { atoms } => {
            LevyMeasure::dirac(atoms.iter().map(|a| Atom::new(a.mass, a.location)).collect())
        }
        MeasureSpec::Tabulated { abscissae, positive, negative, tail_index } => {
            LevyMeasure::tabulated(TabulatedDensity {
                abscissae: abscissae.clone(),
                positive: positive.clone(),
                negative: negative.clone(),
                tail_index: *tail_index,
            })
        }
    }
    .map_err(invalid("measure"))
}

fn coefficient(c: CoefficientSpec) -> Coefficient {
    match c {
        CoefficientSpec::Linear { slope } => Coefficient::Linear(slope),
        CoefficientSpec::Affine { slope, intercept } => Coefficient::Affine { slope, intercept },
        CoefficientSpec::Constant { value } => Coefficient::Constant(value),
        CoefficientSpec::Zero => Coefficient::Zero,
    }
}

fn build_scenario(spec: &crate::config::ScenarioSpec) -> Result<Scenario, CliError> {
    let table = |x: &Vec<f64>, y: &Vec<f64>| Table::new(x.clone(), y.clone()).map_err(invalid("scenario table"));
    let v0 = match &spec.v0 {
        DisplacementSpec::Constant { value } => InitialDisplacement::Constant(*value),
        DisplacementSpec::Cosine { amplitude, frequency } => {
            InitialDisplacement::Cosine { amplitude: *amplitude, frequency: *frequency }
        }
        DisplacementSpec::Tabulated { x, y } => InitialDisplacement::Tabulated(table(x, y)?),
    };
    let v1 = match &spec.v1 {
        VelocitySpec::Zero => InitialVelocity::Zero,
        VelocitySpec::Indicator { left, right } => InitialVelocity::Indicator { left: *left, right: *right },
        VelocitySpec::Tabulated { x, y } => InitialVelocity::Tabulated(table(x, y)?),
    };
    let s = Scenario::new(v0, v1, coefficient(spec.sigma), coefficient(spec.b)).map_err(invalid("scenario"))?;
    match spec.lipschitz {
        Some(l) => s.with_lipschitz(l).map_err(invalid("scenario")),
        None => Ok(s),
    }
}
