//! Command implementations: validate, eigen, bounds, sweep, nonlinear.

use serde::Serialize;

use fdl_core::bounds::{audit, sweep, BoundsReport, SweepReport};
use fdl_core::dynamics::{extinction_experiment, find_periodic_solution, poincare_map};
use fdl_core::floquet::principal_eigenvalue;
use fdl_core::solver::Field;
use fdl_core::{Domain, FieldF64, Grid};

use crate::config::{ExperimentConfig, NumericsConfig, RunKind};
use crate::emit::{fmt_f64, opt_f64, write_json, write_text, CsvTable};
use crate::error::CliError;
use crate::{Command, RunArgs};

/// Margin by which f'(0) must clear μ before the persistence machinery is
/// attempted; mirrors the solver's own threshold slack.
const THRESHOLD_SLACK: f64 = 1e-4;

pub fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Validate(args) => run(args, None),
        Command::Eigen(args) => run(args, Some(RunKind::Eigen)),
        Command::Bounds(args) => run(args, Some(RunKind::Bounds)),
        Command::Sweep(args) => run(args, Some(RunKind::Sweep)),
        Command::Nonlinear(args) => run(args, Some(RunKind::Nonlinear)),
    }
}

fn run(args: RunArgs, expected: Option<RunKind>) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&args.config)?;
    if let Some(expected) = expected {
        if cfg.run.kind != expected {
            return Err(CliError::config(format!(
                "run.kind is '{}' but the subcommand expects '{}'",
                cfg.run.kind.name(),
                expected.name()
            )));
        }
    }
    cfg.check()?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))?;

    let work = || match expected {
        None => cmd_validate(&cfg, &args),
        Some(RunKind::Eigen) => cmd_eigen(&cfg, &args),
        Some(RunKind::Bounds) => cmd_bounds(&cfg, &args),
        Some(RunKind::Sweep) => cmd_sweep(&cfg, &args),
        Some(RunKind::Nonlinear) => cmd_nonlinear(&cfg, &args),
        Some(RunKind::Validate) => cmd_validate(&cfg, &args),
    };

    match args.jobs {
        None => work(),
        Some(0) => Err(CliError::config("jobs: must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config(format!("jobs: {e}")))?
            .install(work),
    }
}

/// The library objects every run needs, built at one resolution level.
struct Instruments {
    domain: Domain,
    reaction: fdl_core::Reaction,
    grid: Grid,
    step: fdl_core::StepConfigF64,
    fl: fdl_core::EigenConfig,
    numerics: NumericsConfig,
}

fn instruments(cfg: &ExperimentConfig, refine: u32) -> Result<Instruments, CliError> {
    let numerics = cfg.numerics.refined(refine)?;
    let domain = cfg.domain.build()?;
    let reaction = cfg.reaction.build()?;
    let grid = numerics.grid(domain.l0())?;
    let step = numerics.step()?;
    let fl = numerics.eigen()?;
    Ok(Instruments {
        domain,
        reaction,
        grid,
        step,
        fl,
        numerics,
    })
}

// ---------------------------------------------------------------- validate

fn cmd_validate(cfg: &ExperimentConfig, args: &RunArgs) -> Result<(), CliError> {
    // Echo the configuration with all defaults resolved (and any --refine
    // applied), after the constructors have accepted every value.
    let mut resolved = cfg.clone();
    resolved.numerics = cfg.numerics.refined(args.refine)?;
    let text = crate::emit::to_json_text(&resolved)?;
    write_text(&args.out.join("resolved.json"), &text)?;
    print!("{text}");
    Ok(())
}

// ------------------------------------------------------------------- eigen

#[derive(Serialize)]
struct EigenLevel {
    m: usize,
    nt: usize,
    mu: f64,
    growth_factor: f64,
    iterations: usize,
    residual: f64,
    periodicity_residual: f64,
}

#[derive(Serialize)]
struct EigenArtifact {
    mu: f64,
    levels: Vec<EigenLevel>,
}

fn cmd_eigen(cfg: &ExperimentConfig, args: &RunArgs) -> Result<(), CliError> {
    let mut levels = Vec::new();
    for k in 0..=args.refine {
        let ins = instruments(cfg, k)?;
        let result = principal_eigenvalue(
            &ins.domain,
            ins.reaction.diffusivity(),
            &ins.grid,
            &ins.step,
            &ins.fl,
        )?;
        levels.push(EigenLevel {
            m: ins.numerics.m,
            nt: ins.numerics.nt,
            mu: result.mu,
            growth_factor: result.growth_factor,
            iterations: result.iterations,
            residual: result.residual,
            periodicity_residual: result.periodicity_residual,
        });
    }
    let artifact = EigenArtifact {
        mu: levels.last().expect("at least one level").mu,
        levels,
    };
    write_json(&args.out.join("eigen.json"), &artifact)?;
    println!("mu = {}", fmt_f64(artifact.mu));
    Ok(())
}

// ------------------------------------------------------------------ bounds

#[derive(Serialize)]
struct BoundsArtifact {
    m: usize,
    nt: usize,
    report: BoundsReport<f64>,
}

fn cmd_bounds(cfg: &ExperimentConfig, args: &RunArgs) -> Result<(), CliError> {
    let ins = instruments(cfg, args.refine)?;
    let d = ins.reaction.diffusivity();
    let mu = principal_eigenvalue(&ins.domain, d, &ins.grid, &ins.step, &ins.fl)?.mu;
    let report = audit(&ins.domain, d, mu);
    let ok = report.all_pass();
    let failing: Vec<&str> = report
        .flags
        .iter()
        .filter(|f| !f.passed)
        .map(|f| f.name)
        .collect();
    let artifact = BoundsArtifact {
        m: ins.numerics.m,
        nt: ins.numerics.nt,
        report,
    };
    write_json(&args.out.join("bounds.json"), &artifact)?;
    println!(
        "mu = {}; bounds {}",
        fmt_f64(mu),
        if ok { "PASS" } else { "FAIL" }
    );
    if ok {
        Ok(())
    } else {
        Err(CliError::Audit(format!(
            "mu = {} violates: {}",
            fmt_f64(mu),
            failing.join(", ")
        )))
    }
}

// ------------------------------------------------------------------- sweep

#[derive(Serialize)]
struct SweepArtifact {
    m: usize,
    base_steps_per_period: usize,
    report: SweepReport<f64>,
}

fn cmd_sweep(cfg: &ExperimentConfig, args: &RunArgs) -> Result<(), CliError> {
    let ins = instruments(cfg, args.refine)?;
    let d = ins.reaction.diffusivity();
    let omegas = cfg
        .run
        .omegas
        .as_deref()
        .ok_or_else(|| CliError::config("run.omegas: required for sweep"))?;
    let report = sweep(&ins.domain, d, omegas, &ins.grid, &ins.step, &ins.fl)?;

    let mut csv = CsvTable::new(&[
        "omega",
        "steps_per_period",
        "mu",
        "q_lower",
        "q_upper",
        "scaling_lower",
        "scaling_upper",
    ]);
    for p in &report.points {
        csv.row(&[
            fmt_f64(p.omega),
            p.steps_per_period.to_string(),
            opt_f64(p.mu),
            fmt_f64(p.q_lower),
            fmt_f64(p.q_upper),
            fmt_f64(p.scaling_lower),
            fmt_f64(p.scaling_upper),
        ]);
    }
    write_text(&args.out.join("sweep.csv"), csv.text())?;

    let artifact = SweepArtifact {
        m: ins.numerics.m,
        base_steps_per_period: ins.numerics.nt,
        report,
    };
    write_json(&args.out.join("sweep.json"), &artifact)?;
    let report = &artifact.report;

    println!(
        "{} points, monotone = {}",
        report.points.len(),
        report.monotone
    );

    // Failures are recorded per point in the artifacts; surface them in the
    // exit code only after everything is written.
    if let Some(p) = report.points.iter().find(|p| p.error.is_some()) {
        return Err(CliError::Solver(format!(
            "omega = {}: {}",
            p.omega,
            p.error.as_deref().unwrap_or("unknown")
        )));
    }
    let mut violations = Vec::new();
    for p in &report.points {
        let mu = p.mu.expect("points without errors carry a value");
        let spec = ins
            .domain
            .with_omega(p.omega)
            .map_err(|e| CliError::config(format!("run.omegas: {e}")))?;
        let point_report = audit(&spec, d, mu);
        for f in point_report.flags.iter().filter(|f| !f.passed) {
            violations.push(format!("omega = {}: {}", p.omega, f.name));
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Audit(violations.join("; ")))
    }
}

// --------------------------------------------------------------- nonlinear

#[derive(Serialize)]
struct SeedOutcome {
    amplitude: f64,
    final_sup: f64,
    final_distance: f64,
}

#[derive(Serialize)]
struct NonlinearVerdict {
    verdict: &'static str,
    mu: f64,
    fprime0: f64,
    margin: f64,
    horizon_periods: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_decay_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sup_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sup_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    periodicity_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bracket_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solution_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seeds: Option<Vec<SeedOutcome>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_pairwise_distance: Option<f64>,
}

/// ½ ∫ u² over the moving interval via the reference-grid trapezoid rule
/// (walls are zero) with Jacobian L(t)/L0.
fn energy(state: &FieldF64, grid: &Grid, spec: &Domain) -> f64 {
    let sum: f64 = state.values.iter().map(|v| v * v).sum();
    0.5 * (spec.length(state.time) / spec.l0()) * grid.spacing() * sum
}

/// Iterate the period map from `start`, recording one CSV row per period:
/// period index, time, sup-norm, sup-distance to the attractor, energy.
fn trajectory_rows(
    csv: &mut CsvTable,
    start: FieldF64,
    attractor: Option<&FieldF64>,
    horizon: usize,
    ins: &Instruments,
) -> Result<FieldF64, CliError> {
    let mut state = start;
    for n in 0..=horizon {
        let distance = match attractor {
            Some(target) => state.sup_distance(target),
            None => state.sup_norm(),
        };
        csv.row(&[
            n.to_string(),
            fmt_f64(state.time),
            fmt_f64(state.sup_norm()),
            fmt_f64(distance),
            fmt_f64(energy(&state, &ins.grid, &ins.domain)),
        ]);
        if n < horizon {
            state = poincare_map(&state, &ins.grid, &ins.domain, &ins.reaction, &ins.step)?;
        }
    }
    Ok(state)
}

fn cmd_nonlinear(cfg: &ExperimentConfig, args: &RunArgs) -> Result<(), CliError> {
    let ins = instruments(cfg, args.refine)?;
    let d = ins.reaction.diffusivity();
    let k = ins.reaction.carrying_capacity();
    let fprime0 = ins.reaction.fprime0();
    let horizon = cfg.run.horizon_periods.unwrap_or(40);

    let mu = principal_eigenvalue(&ins.domain, d, &ins.grid, &ins.step, &ins.fl)?.mu;
    let slack = THRESHOLD_SLACK * (1.0 + mu.abs());
    let persistent = fprime0 > mu + slack;

    let mut csv = CsvTable::new(&["n", "t", "sup_norm", "distance_to_attractor", "energy"]);

    let verdict = if persistent {
        if ins.reaction.is_linear() {
            return Err(CliError::config(
                "reaction: persistence requires a monostable kind (f'(0) > mu with a carrying capacity)",
            ));
        }
        let ustar = find_periodic_solution(
            &ins.domain,
            &ins.reaction,
            &ins.grid,
            &ins.step,
            &ins.fl,
            ins.numerics.max_periods,
        )?;

        let amplitudes = cfg
            .run
            .seeds
            .clone()
            .unwrap_or_else(|| vec![1e-3, 0.5, 1.0]);
        let mut outcomes = Vec::new();
        let mut finals: Vec<FieldF64> = Vec::new();
        for (i, amp) in amplitudes.iter().enumerate() {
            let mut seed = Field::half_sine(&ins.grid, 0.0);
            seed.scale(amp * k);
            let final_state = if i == 0 {
                trajectory_rows(&mut csv, seed, Some(ustar.initial()), horizon, &ins)?
            } else {
                let mut state = seed;
                for _ in 0..horizon {
                    state =
                        poincare_map(&state, &ins.grid, &ins.domain, &ins.reaction, &ins.step)?;
                }
                state
            };
            outcomes.push(SeedOutcome {
                amplitude: *amp,
                final_sup: final_state.sup_norm(),
                final_distance: final_state.sup_distance(ustar.initial()),
            });
            finals.push(final_state);
        }
        let mut max_pairwise: f64 = 0.0;
        for i in 0..finals.len() {
            for j in i + 1..finals.len() {
                max_pairwise = max_pairwise.max(finals[i].sup_distance(&finals[j]));
            }
        }

        NonlinearVerdict {
            verdict: "persistence",
            mu,
            fprime0,
            margin: fprime0 - mu,
            horizon_periods: horizon,
            decay_rate: None,
            expected_decay_rate: None,
            sup_start: None,
            sup_end: None,
            periodicity_residual: Some(ustar.periodicity_residual),
            bracket_iterations: Some(ustar.iterations),
            solution_floor: Some(ustar.floor),
            seeds: Some(outcomes),
            max_pairwise_distance: Some(max_pairwise),
        }
    } else {
        let fit = extinction_experiment(&ins.domain, &ins.reaction, &ins.grid, &ins.step, horizon)?;
        let mut start = Field::half_sine(&ins.grid, 0.0);
        start.scale(0.5 * k);
        trajectory_rows(&mut csv, start, None, horizon, &ins)?;
        NonlinearVerdict {
            verdict: "extinction",
            mu,
            fprime0,
            margin: fprime0 - mu,
            horizon_periods: horizon,
            decay_rate: Some(fit.rate),
            expected_decay_rate: Some(mu - fprime0),
            sup_start: Some(fit.sup_start),
            sup_end: Some(fit.sup_end),
            periodicity_residual: None,
            bracket_iterations: None,
            solution_floor: None,
            seeds: None,
            max_pairwise_distance: None,
        }
    };

    write_text(&args.out.join("timeseries.csv"), csv.text())?;
    write_json(&args.out.join("verdict.json"), &verdict)?;
    println!(
        "verdict = {} (mu = {}, f'(0) = {})",
        verdict.verdict,
        fmt_f64(mu),
        fmt_f64(fprime0)
    );
    Ok(())
}
