//! Subcommand implementations. Each returns the process exit code; mapping
//! of error kinds to codes lives in `exit_code_for`.

use std::path::Path;

use serde::Serialize;

use seqtest::csnr::{self, phi0_roots, solve_phi0};
use seqtest::error::{Error, Result};
use seqtest::fbp::{extract_boundaries, solve_vi, validate_boundaries, BoundaryPair, SolveParams};
use seqtest::minimax::{find_lfd, verify_saddle, LfdSettings};
use seqtest::model::{check_assumptions, Regime};
use seqtest::risk::{estimate_jbar, estimate_jbar_mixture};
use seqtest::simulate::{
    run_rule, simulate_joint, ExitSide, Measure, RngSpec, StoppingRule,
};
use seqtest::{Boundaries, Model, Scalar};

use crate::config::{build_running_cost, BoundarySource, RuleSpec, RunConfig};
use crate::output::{format_float, write_csv, write_json, Manifest};

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::Expr(_)
        | Error::OutsideBracket { .. }
        | Error::OutsideDomain { .. }
        | Error::Io(_)
        | Error::Json(_) => 1,
        Error::Regime(_) => 2,
        Error::NonConvergence(_)
        | Error::NoSolution(_)
        | Error::Quadrature(_)
        | Error::SignPattern(_)
        | Error::StepFailure { .. }
        | Error::DegenerateModel(_)
        | Error::McQuality(_) => 3,
        Error::Extraction(_) => 4,
        Error::NoSignChange(_) => 5,
    }
}

fn check_grid(config: &RunConfig, model: &Model) -> Result<Vec<Scalar>> {
    Ok(match &config.grid {
        Some(g) => g.build(model)?.x_nodes,
        None => seqtest::model::default_check_grid(model),
    })
}

pub fn cmd_check(config: &RunConfig, out: &Path) -> Result<i32> {
    let model = config.require_model()?;
    let xs = check_grid(config, &model)?;
    let report = check_assumptions(&model, &xs)?;
    let json = crate::output::to_json_string(&report)?;
    println!("{json}");
    write_json(out, "report.json", &report)?;
    Manifest::new("check", config.clone(), vec!["report.json".into()]).write(out)?;
    Ok(if report.regime.certified() { 0 } else { 2 })
}

#[derive(Serialize)]
struct SolveSidecar<'a> {
    regime: Regime,
    residual: f64,
    iterations: usize,
    contact_tol: f64,
    grid: &'a seqtest::Grid,
    boundaries_pass: bool,
    first_violation: Option<(usize, String)>,
}

fn run_solve(config: &RunConfig, model: &Model) -> Result<(seqtest::Surface, Boundaries, Regime, f64)> {
    let grid = config.require_grid(model)?;
    let report = check_assumptions(model, &grid.x_nodes)?;
    let surface = solve_vi(model, &grid, &SolveParams::default())?;
    let contact_tol = config
        .solve
        .as_ref()
        .and_then(|s| s.contact_tol)
        .unwrap_or(1e-7 * (1.0 + model.cost_rate()));
    let pair = extract_boundaries(&surface, contact_tol)?;
    Ok((surface, pair, report.regime, contact_tol))
}

pub fn cmd_solve(config: &RunConfig, out: &Path) -> Result<i32> {
    let model = config.require_model()?;
    let (surface, pair, regime, contact_tol) = run_solve(config, &model)?;
    let report = validate_boundaries(&pair, regime);

    write_csv(out, "boundaries.csv", |buf| pair.write_csv(buf))?;
    write_csv(out, "value.csv", |buf| surface.write_csv(buf))?;
    write_json(
        out,
        "solve.json",
        &SolveSidecar {
            regime,
            residual: surface.residual,
            iterations: surface.iterations,
            contact_tol,
            grid: &surface.grid,
            boundaries_pass: report.pass,
            first_violation: report.first_violation.clone(),
        },
    )?;
    Manifest::new(
        "solve",
        config.clone(),
        vec!["boundaries.csv".into(), "value.csv".into(), "solve.json".into()],
    )
    .write(out)?;
    if !report.pass {
        eprintln!(
            "boundary validation failed: {:?}",
            report.first_violation
        );
        return Ok(4);
    }
    Ok(0)
}

#[derive(Serialize)]
struct CsnrOutput {
    summary: seqtest::csnr::CsnrSummary<Scalar>,
    phi0_roots: Vec<f64>,
    f: seqtest::model::RunningCostSpec,
}

fn solve_csnr(config: &RunConfig) -> Result<(seqtest::BandSolution, Vec<f64>)> {
    let section = config.require_csnr()?;
    let f = build_running_cost(&section.f)?;
    let mut sol = if section.symmetric_shortcut {
        csnr::symmetric_shortcut(section.rho0, &f)?
    } else {
        csnr::solve_boundaries(section.rho0, &f)?
    };
    if sol.phi0.is_none() {
        sol.phi0 = Some(solve_phi0(&sol)?);
    }
    let roots = phi0_roots(&sol)?;
    Ok((sol, roots))
}

pub fn cmd_csnr(config: &RunConfig, out: &Path) -> Result<i32> {
    let section = config.require_csnr()?;
    let (sol, roots) = solve_csnr(config)?;

    let mut outputs = vec!["csnr.json".into()];
    if let Some(curve) = &section.psi_curve {
        if curve.n < 2 || !(curve.lo > 0.0 && curve.hi > curve.lo) {
            return Err(Error::Config("psi_curve needs 0 < lo < hi and n >= 2".into()));
        }
        let phi0 = sol.phi0.expect("attached above");
        write_csv(out, "ubar_curve.csv", |buf| {
            use std::io::Write;
            writeln!(buf, "psi,ubar")?;
            for i in 0..curve.n {
                let t = i as f64 / (curve.n - 1) as f64;
                let psi = (curve.lo.ln() + (curve.hi.ln() - curve.lo.ln()) * t).exp();
                let u = csnr::eval_ubar(&sol, psi, phi0)?;
                writeln!(buf, "{},{}", format_float(psi), format_float(u))?;
            }
            Ok(())
        })?;
        outputs.push("ubar_curve.csv".into());
    }
    write_json(
        out,
        "csnr.json",
        &CsnrOutput {
            summary: sol.summary(),
            phi0_roots: roots,
            f: section.f.clone(),
        },
    )?;
    Manifest::new("csnr", config.clone(), outputs).write(out)?;
    Ok(0)
}

fn load_boundaries_csv(path: &Path) -> Result<Boundaries> {
    let doc = std::fs::read_to_string(path)?;
    let mut lines = doc.lines();
    match lines.next() {
        Some(h) if h.trim() == "x,l0,l1" => {}
        other => {
            return Err(Error::Config(format!(
                "boundaries csv must start with 'x,l0,l1', found {other:?}"
            )))
        }
    }
    let mut x_nodes = Vec::new();
    let mut l0 = Vec::new();
    let mut l1 = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = |what: &str| -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| Error::Config(format!("line {}: missing {what}", i + 2)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 2)))
        };
        x_nodes.push(next("x")?);
        l0.push(next("l0")?);
        l1.push(next("l1")?);
    }
    if x_nodes.len() < 2 {
        return Err(Error::Config("boundaries csv needs at least two rows".into()));
    }
    Ok(BoundaryPair { x_nodes, l0, l1 })
}

fn resolve_boundaries(config: &RunConfig, model: &Model, out: &Path) -> Result<(Boundaries, Vec<String>)> {
    let source = config
        .lfd
        .as_ref()
        .map(|l| l.boundaries.clone())
        .unwrap_or_default();
    match source {
        BoundarySource::Solve => {
            let (_, pair, regime, _) = run_solve(config, model)?;
            let report = validate_boundaries(&pair, regime);
            if !report.pass {
                return Err(Error::Extraction(format!(
                    "solved boundaries failed validation: {:?}",
                    report.first_violation
                )));
            }
            write_csv(out, "boundaries.csv", |buf| pair.write_csv(buf))?;
            Ok((pair, vec!["boundaries.csv".into()]))
        }
        BoundarySource::Csnr => {
            let (sol, _) = solve_csnr(config)?;
            let (lo, hi) = model.domain();
            let x_lo = if lo.is_finite() { lo + 1e-9 } else { -1e6 };
            let x_hi = if hi.is_finite() { hi - 1e-9 } else { 1e6 };
            Ok((BoundaryPair::constant(x_lo, x_hi, sol.l0, sol.l1), Vec::new()))
        }
        BoundarySource::Csv { path } => Ok((load_boundaries_csv(Path::new(&path))?, Vec::new())),
    }
}

#[derive(Serialize)]
struct LfdOutput {
    lfd: seqtest::Lfd,
    saddle: seqtest::minimax::SaddleReport<Scalar>,
}

pub fn cmd_lfd(config: &RunConfig, out: &Path) -> Result<i32> {
    let model = config.require_model()?;
    let x0 = config.require_x0()?;
    model.check_interior(x0)?;
    let (pair, mut outputs) = resolve_boundaries(config, &model, out)?;

    let lfd_cfg = config.lfd.clone().unwrap_or_else(|| crate::config::LfdConfig {
        grid_points: 17,
        tol: 1e-3,
        psi_grid: vec![0.25, 0.5, 0.8, 1.25, 2.0, 4.0],
        boundaries: BoundarySource::Solve,
        bracket_override: None,
    });
    let settings = LfdSettings {
        grid_points: lfd_cfg.grid_points,
        tol: lfd_cfg.tol,
        bracket_override: lfd_cfg.bracket_override,
        ..LfdSettings::default()
    };
    let mc = config.mc.settings();
    let rng = RngSpec::new(config.mc.seed, 0);
    let lfd = find_lfd(&model, x0, &pair, &settings, &mc, rng)?;

    let phi0 = lfd.roots[0].phi0;
    let saddle = verify_saddle(&model, x0, phi0, &pair, &lfd_cfg.psi_grid, &mc, rng)?;

    write_csv(out, "derivative_curve.csv", |buf| {
        use std::io::Write;
        writeln!(buf, "phi,derivative,stderr")?;
        for e in &lfd.grid {
            writeln!(
                buf,
                "{},{},{}",
                format_float(e.phi),
                format_float(e.value),
                format_float(e.stderr)
            )?;
        }
        Ok(())
    })?;
    let saddle_pass = saddle.pass;
    write_json(out, "lfd.json", &LfdOutput { lfd, saddle })?;
    outputs.extend(["derivative_curve.csv".into(), "lfd.json".into()]);
    Manifest::new("lfd", config.clone(), outputs).write(out)?;
    if !saddle_pass {
        eprintln!("saddle verification failed");
        return Ok(6);
    }
    Ok(0)
}

fn resolve_rule(config: &RunConfig, spec: &RuleSpec) -> Result<seqtest::Rule> {
    Ok(match spec {
        RuleSpec::Immediate => StoppingRule::immediate(),
        RuleSpec::Bands { l0, l1 } => {
            if !(0.0 < *l0 && l0 < l1) {
                return Err(Error::Config("bands rule needs 0 < l0 < l1".into()));
            }
            StoppingRule::bands(*l0, *l1)
        }
        RuleSpec::Csnr => {
            let (sol, _) = solve_csnr(config)?;
            StoppingRule::bands(sol.l0, sol.l1)
        }
        RuleSpec::BoundariesCsv { path } => {
            StoppingRule::from_pair(&load_boundaries_csv(Path::new(path))?)
        }
    })
}

#[derive(Serialize)]
struct SimulateSummary {
    psi: f64,
    n_paths: usize,
    change_of_measure: seqtest::Risk,
    mixture: seqtest::Risk,
    mean_tau_null: f64,
    mean_tau_alternative: f64,
    error_rate_null: f64,
    error_rate_alternative: f64,
    horizon_fraction: f64,
    domain_exit_fraction: f64,
}

pub fn cmd_simulate(config: &RunConfig, out: &Path) -> Result<i32> {
    let model = config.require_model()?;
    let x0 = config.require_x0()?;
    let section = config
        .simulate
        .as_ref()
        .ok_or_else(|| Error::Config("missing 'simulate' section".into()))?;
    if !(section.psi > 0.0) {
        return Err(Error::Config("simulate.psi must be positive".into()));
    }
    let rule = resolve_rule(config, &section.rule)?;
    let mc = config.mc.settings();
    let rng = RngSpec::new(config.mc.seed, 0);

    let com = estimate_jbar(&model, x0, section.psi, &rule, &mc, rng)?;
    let mix = estimate_jbar_mixture(&model, x0, section.psi, &rule, &mc, rng.with_stream(1 << 20))?;

    // decision/exit statistics per measure on a dedicated pass
    let horizon = match mc.horizon {
        Some(h) => h,
        None => model.suggested_horizon(&[x0])?,
    };
    let stat_paths = mc.n_paths.min(20_000).max(1);
    let mut summary = SimulateSummary {
        psi: section.psi,
        n_paths: com.n_paths,
        change_of_measure: com,
        mixture: mix,
        mean_tau_null: 0.0,
        mean_tau_alternative: 0.0,
        error_rate_null: 0.0,
        error_rate_alternative: 0.0,
        horizon_fraction: 0.0,
        domain_exit_fraction: 0.0,
    };
    for (measure, tau_slot, err_slot) in [
        (Measure::Null, 0usize, 0usize),
        (Measure::Alternative, 1, 1),
    ] {
        let mut tau = 0.0;
        let mut wrong = 0usize;
        let mut horizon_hits = 0usize;
        let mut domain_hits = 0usize;
        for p in 0..stat_paths {
            let spec = rng.with_stream((2 << 20) + p as u64);
            let run = run_rule(&model, x0, section.psi, &rule, mc.dt, horizon, spec, measure)?;
            tau += run.outcome.tau;
            match run.outcome.exited_side {
                ExitSide::Horizon => horizon_hits += 1,
                ExitSide::Domain => domain_hits += 1,
                _ => {}
            }
            let d = run.outcome.decision.resolve();
            let is_wrong = match measure {
                Measure::Null => d == 1,
                Measure::Alternative => d == 0,
            };
            if is_wrong {
                wrong += 1;
            }
        }
        let mean_tau = tau / stat_paths as f64;
        let rate = wrong as f64 / stat_paths as f64;
        if tau_slot == 0 {
            summary.mean_tau_null = mean_tau;
        } else {
            summary.mean_tau_alternative = mean_tau;
        }
        if err_slot == 0 {
            summary.error_rate_null = rate;
        } else {
            summary.error_rate_alternative = rate;
        }
        summary.horizon_fraction += horizon_hits as f64 / (2.0 * stat_paths as f64);
        summary.domain_exit_fraction += domain_hits as f64 / (2.0 * stat_paths as f64);
    }

    let mut outputs = vec!["simulate.json".into()];
    if section.dump_paths > 0 {
        let run_id = format!("run{:08x}", config.mc.seed);
        let dt = mc.dt;
        for stream in 0..section.dump_paths {
            let spec = rng.with_stream((3 << 20) + stream as u64);
            let path = simulate_joint(&model, x0, dt, horizon.min(1.0), spec)?;
            let name = format!("{run_id}_{stream}.csv");
            write_csv(out, &name, |buf| path.write_csv(buf))?;
            outputs.push(name);
        }
    }
    write_json(out, "simulate.json", &summary)?;
    Manifest::new("simulate", config.clone(), outputs).write(out)?;
    Ok(0)
}

/// Replays a manifest into a scratch directory and byte-compares every
/// listed output plus the manifest itself.
pub fn cmd_verify(out: &Path) -> Result<i32> {
    let manifest = Manifest::load(out)?;
    let replay = out.join(".verify-replay");
    if replay.exists() {
        std::fs::remove_dir_all(&replay)?;
    }
    std::fs::create_dir_all(&replay)?;
    let code = dispatch(&manifest.command, &manifest.config, &replay)?;
    let mut mismatches = Vec::new();
    if code != 0 {
        mismatches.push(format!("replay exited with code {code}"));
    }
    let mut names = manifest.outputs.clone();
    names.push("manifest.json".to_string());
    for name in &names {
        let a = std::fs::read(out.join(name));
        let b = std::fs::read(replay.join(name));
        match (a, b) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(_), Ok(_)) => mismatches.push(format!("{name}: contents differ")),
            (_, Err(e)) => mismatches.push(format!("{name}: replay missing ({e})")),
            (Err(e), _) => mismatches.push(format!("{name}: original missing ({e})")),
        }
    }
    std::fs::remove_dir_all(&replay)?;
    if mismatches.is_empty() {
        println!("verified: {} file(s) byte-identical", names.len());
        Ok(0)
    } else {
        for m in &mismatches {
            eprintln!("mismatch: {m}");
        }
        Ok(7)
    }
}

pub fn dispatch(command: &str, config: &RunConfig, out: &Path) -> Result<i32> {
    std::fs::create_dir_all(out)?;
    match command {
        "check" => cmd_check(config, out),
        "solve" => cmd_solve(config, out),
        "lfd" => cmd_lfd(config, out),
        "csnr" => cmd_csnr(config, out),
        "simulate" => cmd_simulate(config, out),
        other => Err(Error::Config(format!("unknown command '{other}'"))),
    }
}
