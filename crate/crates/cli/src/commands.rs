use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use phaseseg::convexgraph::Interval;
use phaseseg::diagnostics::{
    estimate_monitors, fmt_num, snapshot_csv, sweep_compare, trace_csv, MonitorEntry, MonitorTolerance, RunTrace, SWEEP_COLUMNS,
};
use phaseseg::grid::Grid;
use phaseseg::hysteresis::{self, PwlInput};
use phaseseg::initdata::InitialData;
use phaseseg::limit_solver::limit_run;
use phaseseg::model::{check_box_compat, verify_assumptions};
use phaseseg::sigma_solver::{self, RunAborted, RunOutput};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SigmaValue};
use crate::{CliError, Common};

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

/// Reads the config and applies the command-line overrides.
fn load(args: &Common) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(&args.config).map_err(|e| io_err(&args.config, e))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.reseed(seed);
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    cfg.summary = None;
    Ok(cfg)
}

pub fn check(args: &Common) -> Result<(), CliError> {
    let cfg = load(args)?;
    let report =
        verify_assumptions(&cfg.model, cfg.tolerances.check_density).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut text = report.to_string();
    let mut failed: Vec<String> = report.failures().map(|c| c.name.to_string()).collect();
    if cfg.model.box_bounds.is_some() {
        let boxes = check_box_compat(&cfg.model).map_err(|e| CliError::Validation(e.to_string()))?;
        text += &format!("box_compat = {}\n", if boxes.passed() { "pass" } else { "FAIL" });
        for v in &boxes.violations {
            text += &format!("  {v}\n");
        }
        if !boxes.passed() {
            failed.push("box_compat".into());
        }
    }
    create_dir(&cfg.output.dir)?;
    write(&cfg.output.dir.join("assumptions.txt"), &text)?;
    print!("{text}");
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("assumptions failed: {}", failed.join(", "))))
    }
}

fn monitor_table(entries: &[MonitorEntry]) -> toml::Table {
    entries
        .iter()
        .map(|m| {
            let mut t = toml::Table::new();
            t.insert("max_slack".into(), m.max_slack.into());
            t.insert("measured_c".into(), m.measured_c.into());
            t.insert("allowed".into(), m.allowed.into());
            t.insert("flagged".into(), m.flagged.into());
            (m.name.to_string(), toml::Value::Table(t))
        })
        .collect()
}

fn monitors_of(cfg: &ExperimentConfig, out: &RunOutput) -> Vec<MonitorEntry> {
    let tol = MonitorTolerance { rel: cfg.tolerances.monitor_rel, c_abs: cfg.tolerances.monitor_c };
    estimate_monitors(&out.trace, &tol)
}

/// Resolved config followed by a `[summary]` table; rerunnable as a config.
fn summary_text(cfg: &ExperimentConfig, sigma: Option<f64>, out: &RunOutput, monitors: &[MonitorEntry]) -> String {
    let tr = &out.trace;
    let e = &tr.extremes;
    let mut s = toml::Table::new();
    s.insert("sigma".into(), sigma.map_or(toml::Value::from("limit"), toml::Value::from));
    s.insert("steps".into(), (tr.steps as i64).into());
    s.insert("halvings".into(), (tr.halvings as i64).into());
    s.insert("t_end".into(), out.state.t.into());
    for (k, v) in [
        ("min_mu", e.min_mu),
        ("min_rho", e.min_rho),
        ("max_rho", e.max_rho),
        ("min_xi", e.min_xi),
        ("max_xi", e.max_xi),
        ("max_u_defect", e.max_u_defect),
    ] {
        s.insert(k.into(), v.into());
    }
    s.insert("monitors".into(), toml::Value::Table(monitor_table(monitors)));
    let mut wrapper = toml::Table::new();
    wrapper.insert("summary".into(), toml::Value::Table(s));
    format!("{}\n{}", cfg.to_toml(), toml::to_string(&wrapper).expect("summary serializes"))
}

fn write_trace(dir: &Path, cfg: &ExperimentConfig, out_trace: &RunTrace) -> Result<(), CliError> {
    create_dir(dir)?;
    write(&dir.join("trace.csv"), &trace_csv(out_trace))?;
    if cfg.output.snapshots {
        let snaps = dir.join("snapshots");
        create_dir(&snaps)?;
        for (k, snap) in out_trace.snapshots.iter().enumerate() {
            write(&snaps.join(format!("snapshot_{k:05}.csv")), &snapshot_csv(&out_trace.grid, snap))?;
        }
    }
    Ok(())
}

fn write_member(dir: &Path, cfg: &ExperimentConfig, sigma: Option<f64>, out: &RunOutput) -> Result<(), CliError> {
    write_trace(dir, cfg, &out.trace)?;
    let monitors = monitors_of(cfg, out);
    write(&dir.join("summary.toml"), &summary_text(cfg, sigma, out, &monitors))?;
    write(&dir.join("resolved_config.toml"), &cfg.to_toml())
}

fn solve(cfg: &ExperimentConfig, grid: &Grid, init: &InitialData, sigma: Option<f64>) -> Result<RunOutput, RunAborted> {
    match sigma {
        None => limit_run(init, &cfg.solver_config(0.0), grid, &cfg.model),
        Some(s) => sigma_solver::run(init, &cfg.solver_config(s), grid, &cfg.model),
    }
}

pub fn run(args: &Common) -> Result<(), CliError> {
    let cfg = load(args)?;
    let sigma = match &cfg.sigma.value {
        SigmaValue::Limit(_) => None,
        SigmaValue::Single(s) => Some(*s),
        SigmaValue::List(_) => return Err(CliError::Validation("run needs a single sigma or \"limit\"; use sweep for a list".into())),
    };
    let grid = cfg.build_grid()?;
    let init = cfg.initial_data(&grid)?;
    let dir = cfg.output.dir.clone();
    match solve(&cfg, &grid, &init, sigma) {
        Ok(out) => {
            write_member(&dir, &cfg, sigma, &out)?;
            println!("{} steps, t = {}, output in {}", out.trace.steps, out.state.t, dir.display());
            Ok(())
        }
        Err(aborted) => {
            write_trace(&dir, &cfg, &aborted.partial)?;
            Err(CliError::Solver(format!("step {}: {}", aborted.step, aborted.error)))
        }
    }
}

struct Member {
    sigma: Option<f64>,
    dir: PathBuf,
    result: Result<RunOutput, RunAborted>,
    seconds: f64,
}

fn sigma_or_zero(s: Option<f64>) -> f64 {
    s.unwrap_or(0.0)
}

pub fn sweep(args: &Common) -> Result<(), CliError> {
    let cfg = load(args)?;
    let sigmas = match &cfg.sigma.value {
        SigmaValue::List(l) => l.clone(),
        SigmaValue::Single(s) => vec![*s],
        SigmaValue::Limit(_) => return Err(CliError::Validation("sweep needs sigma values, got \"limit\"".into())),
    };
    let grid = cfg.build_grid()?;
    let init = cfg.initial_data(&grid)?;
    let root = cfg.output.dir.clone();
    create_dir(&root)?;
    let mut plan: Vec<(Option<f64>, PathBuf)> = vec![(None, root.join("limit"))];
    plan.extend(sigmas.iter().enumerate().map(|(i, s)| (Some(*s), root.join(format!("sigma_{i:02}")))));

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    let members: Vec<Member> = pool.install(|| {
        plan.par_iter()
            .map(|(sigma, dir)| {
                let start = Instant::now();
                let result = solve(&cfg, &grid, &init, *sigma);
                Member { sigma: *sigma, dir: dir.clone(), result, seconds: start.elapsed().as_secs_f64() }
            })
            .collect()
    });

    let mut failures = Vec::new();
    for m in &members {
        match &m.result {
            Ok(out) => write_member(&m.dir, &cfg, m.sigma, out)?,
            Err(a) => {
                write_trace(&m.dir, &cfg, &a.partial)?;
                failures.push(format!("sigma {}: step {}: {}", m.sigma.map_or("limit".into(), |s| s.to_string()), a.step, a.error));
            }
        }
    }

    let limit = members[0].result.as_ref().ok();
    let mut table = SWEEP_COLUMNS.join(",") + ",status\n";
    for m in &members[1..] {
        let row = match (limit, &m.result) {
            (Some(l), Ok(run)) => sweep_compare(&l.trace, &[&run.trace]).ok().and_then(|mut r| r.pop()),
            _ => None,
        };
        let s = sigma_or_zero(m.sigma);
        let line = match row {
            Some(r) => {
                let vals = [r.sigma, r.d_rho, r.d_mu, r.sigma_grad_rho_sq, r.max_slacks[0], r.max_slacks[1], r.max_slacks[2]];
                vals.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(",") + ",ok"
            }
            None => {
                let mut vals = vec![fmt_num(s)];
                vals.extend(std::iter::repeat_n(fmt_num(f64::NAN), SWEEP_COLUMNS.len() - 1));
                vals.join(",") + ",failed"
            }
        };
        table += &line;
        table.push('\n');
    }
    write(&root.join("sweep.csv"), &table)?;

    let mut monitors = String::from("sigma,monitor,max_slack,measured_c,allowed,flagged\n");
    for m in &members {
        if let Ok(out) = &m.result {
            for e in monitors_of(&cfg, out) {
                monitors += &format!(
                    "{},{},{},{},{},{}\n",
                    fmt_num(sigma_or_zero(m.sigma)),
                    e.name,
                    fmt_num(e.max_slack),
                    fmt_num(e.measured_c),
                    fmt_num(e.allowed),
                    e.flagged
                );
            }
        }
    }
    write(&root.join("monitors.csv"), &monitors)?;

    let mut timings = String::from("sigma,seconds\n");
    for m in &members {
        timings += &format!("{},{}\n", fmt_num(sigma_or_zero(m.sigma)), fmt_num(m.seconds));
    }
    write(&root.join("timings.csv"), &timings)?;
    write(&root.join("resolved_config.toml"), &cfg.to_toml())?;

    print!("{table}");
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Solver(failures.join("; ")))
    }
}

pub fn stop_demo(args: &Common) -> Result<(), CliError> {
    let cfg = load(args)?;
    let block = cfg.stop_demo.as_ref().ok_or_else(|| CliError::Validation("config has no [stop_demo] section".into()))?;
    let input = PwlInput::new(block.t.clone(), block.w.clone()).map_err(|e| CliError::Validation(format!("stop_demo: {e}")))?;
    let k = Interval::closed(block.lo, block.hi);
    let invalid = |e: phaseseg::Error| CliError::Validation(format!("stop_demo: {e}"));
    let rho = if block.refined {
        hysteresis::stop_refined(&input, block.rho0, k).map_err(invalid)?
    } else {
        hysteresis::stop(&input, block.rho0, k).map_err(invalid)?
    };
    let mut csv = String::from("t,w,rho,p\n");
    for (t, r) in rho.t.iter().zip(&rho.w) {
        let w = input.eval(*t);
        csv += &format!("{},{},{},{}\n", fmt_num(*t), fmt_num(w), fmt_num(*r), fmt_num(w - r));
    }
    create_dir(&cfg.output.dir)?;
    write(&cfg.output.dir.join("stop.csv"), &csv)?;
    write(&cfg.output.dir.join("resolved_config.toml"), &cfg.to_toml())
}
