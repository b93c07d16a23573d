//! Batch commands behind the `lobexec` binary. Each writes plot-ready CSV
//! and JSON into the configured output directory and returns what it wrote.
//! Outputs depend only on the config and root seed.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Model, RunConfig};
use crate::error::{Error, Result};
use crate::market::{
    simulate_steps, stream_seed, write_trace_csv, CostModel, CostReport, MarketPath, MarketParams, Strategy,
};
use crate::policy::{greedy_strategy, rollout, synthesize, FieldObstacle, Policy};
use crate::qvi::{solve, ValueField};
use crate::stats::Estimate;
use crate::verification::{run_suite, SuiteReport};

pub const FIELD_FILE: &str = "value_field.bin";

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut out = create(dir, name)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(dir.join(name))
}

/// Solves the QVI and writes the field plus `(k, q, v)` slices at the node
/// nearest `x₀` for the first, middle and last time slices.
pub fn cmd_solve(cfg: &RunConfig) -> Result<ValueField> {
    let Model { utility, penalty, params } = cfg.model()?;
    let field = solve(&cfg.grid, &utility, &penalty, &params)?;
    let dir = &cfg.output.dir;
    let mut out = create(dir, FIELD_FILE)?;
    field.write_binary(&mut out)?;
    out.flush()?;
    let grid = field.grid();
    let i = grid.x.nearest(params.x0);
    let last = grid.t.n - 1;
    for n in [0, last / 2, last] {
        let mut out = create(dir, &format!("slice_t{n}.csv"))?;
        field.write_slice_csv(&mut out, n, i)?;
        out.flush()?;
    }
    write_json(dir, "scheme.json", field.scheme())?;
    info!(
        "solved {} nodes; v(0, x0, 0, q0) = {:.6}",
        grid.len(),
        field.interpolate(0.0, params.x0, 0.0, params.q0)
    );
    Ok(field)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateRecord {
    pub path: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub cost: CostReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub strategy: String,
    pub root_seed: u64,
    pub steps: usize,
    pub j: Estimate,
    pub j0: Estimate,
    pub j1: Estimate,
    pub shortfall: Estimate,
    pub records: Vec<SimulateRecord>,
}

fn build_strategy(name: &str, plan: &[(f64, f64)], path: &MarketPath, params: &MarketParams) -> Result<Strategy> {
    let (n, dt) = (path.n_steps(), path.dt());
    match name {
        "twap" => Strategy::twap(0.0, params.target, n, dt).make_admissible(path, params),
        "terminal" => Ok(Strategy::idle(0.0, n, dt)),
        "greedy" => greedy_strategy(path, params),
        "jumps" => Strategy::schedule(0.0, n, dt, plan)?.make_admissible(path, params),
        other => Err(Error::config("simulate.strategy", format!("unknown strategy `{other}`"))),
    }
}

/// Evaluates one strategy on `mc.paths` simulated markets.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<SimulateSummary> {
    let Model { utility, penalty, params } = cfg.model()?;
    let cost = CostModel { utility: &utility, penalty: &penalty, params: &params };
    let name = cfg.simulate.strategy.as_str();
    let plan: Vec<(f64, f64)> = cfg.simulate.jumps.iter().map(|&[t, s]| (t, s)).collect();
    let keep = cfg.simulate.write_paths.min(cfg.mc.paths);
    info!("simulate `{name}`: root seed {}, {} paths", cfg.mc.seed, cfg.mc.paths);
    let runs: Vec<(SimulateRecord, Option<(MarketPath, Strategy)>)> = (0..cfg.mc.paths)
        .into_par_iter()
        .map(|p| {
            let seed = stream_seed(cfg.mc.seed, p as u64);
            let path = simulate_steps(&params, cfg.mc.steps, seed)?;
            let strat = build_strategy(name, &plan, &path, &params)?;
            let record = SimulateRecord { path: p, seed, cost: cost.evaluate(&path, &strat)? };
            Ok((record, (p < keep).then_some((path, strat))))
        })
        .collect::<Result<_>>()?;

    let dir = &cfg.output.dir;
    let mut out = create(dir, "costs.csv")?;
    writeln!(out, "path,seed,J,J0,J1,terminal_penalty,shortfall")?;
    for (r, _) in &runs {
        let c = r.cost;
        writeln!(out, "{},{},{},{},{},{},{}", r.path, r.seed, c.j, c.j0, c.j1, c.terminal_penalty, c.shortfall)?;
    }
    out.flush()?;
    for (r, kept) in &runs {
        if let Some((path, strat)) = kept {
            let trace = cost.running_cost(path, strat)?.1;
            let mut out = create(dir, &format!("path_{}.csv", r.path))?;
            write_trace_csv(&mut out, path, &trace)?;
            out.flush()?;
        }
    }
    let col = |f: fn(&CostReport) -> f64| -> Estimate {
        Estimate::from_samples(&runs.iter().map(|(r, _)| f(&r.cost)).collect::<Vec<_>>())
    };
    let summary = SimulateSummary {
        strategy: name.into(),
        root_seed: cfg.mc.seed,
        steps: cfg.mc.steps,
        j: col(|c| c.j),
        j0: col(|c| c.j0),
        j1: col(|c| c.j1),
        shortfall: col(|c| c.shortfall),
        records: runs.into_iter().map(|(r, _)| r).collect(),
    };
    write_json(dir, "simulate.json", &summary)?;
    info!("J1 = {:.4} ± {:.4}", summary.j1.mean, summary.j1.stderr);
    Ok(summary)
}

/// Reads a stored value field, or solves when `field` is `None` and no
/// field exists in the output directory.
pub fn load_or_solve(cfg: &RunConfig, field: Option<&Path>) -> Result<ValueField> {
    let stored = cfg.output.dir.join(FIELD_FILE);
    let path = match field {
        Some(p) => p.to_path_buf(),
        None if stored.exists() => stored,
        None => return cmd_solve(cfg),
    };
    info!("reading value field from {}", path.display());
    ValueField::read_binary(std::io::BufReader::new(File::open(&path)?))
}

/// Extracts the policy, writes synthesized traces for the first paths and
/// the rollout statistics.
pub fn cmd_policy(cfg: &RunConfig, field: Option<&Path>) -> Result<crate::policy::RolloutReport> {
    let Model { utility, penalty, params } = cfg.model()?;
    let field = load_or_solve(cfg, field)?;
    let dir = &cfg.output.dir;
    let src = FieldObstacle::new(&field, &utility, &params);
    let mut out = create(dir, "policy.csv")?;
    Policy::extract(&src).write_csv(&mut out)?;
    out.flush()?;

    let cost = CostModel { utility: &utility, penalty: &penalty, params: &params };
    for p in 0..cfg.simulate.write_paths.min(cfg.mc.paths) {
        let path = simulate_steps(&params, cfg.mc.steps, stream_seed(cfg.mc.seed, p as u64))?;
        let star = synthesize(&src, &path, &params)?;
        let trace = cost.running_cost(&path, &star)?.1;
        let mut out = create(dir, &format!("policy_path_{p}.csv"))?;
        write_trace_csv(&mut out, &path, &trace)?;
        out.flush()?;
    }
    info!("rollout: root seed {}, {} paths", cfg.mc.seed, cfg.mc.paths);
    let report = rollout(&field, &utility, &penalty, &params, &cfg.rollout())?;
    write_json(dir, "rollout.json", &report)?;
    info!(
        "J1(optimal) = {:.4} ± {:.4} against v = {:.4}",
        report.optimal.j1.controlled.mean, report.optimal.j1.controlled.stderr, report.value
    );
    Ok(report)
}

/// Runs the verification suite and writes one JSON object per check.
pub fn cmd_verify(cfg: &RunConfig) -> Result<SuiteReport> {
    let Model { utility, penalty, params } = cfg.model()?;
    info!("verification root seed {}", cfg.mc.seed);
    let report = run_suite(&utility, &penalty, &params, &cfg.suite())?;
    for c in &report.checks {
        info!("{:<26} {:?} in {:.2}s", c.name, c.status, c.seconds);
    }
    write_json(&cfg.output.dir, "verify.json", &report.checks)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    /// `v(0, x₀, 0, q₀)`.
    pub v0: f64,
    /// `v0 − K·x₀`, the expected cost above the fundamental value.
    pub premium: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: String,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    /// Whether `v0` moves in one direction along the sweep, up to the
    /// scheme tolerance.
    pub fn monotone(&self) -> bool {
        let up = self.points.windows(2).all(|w| w[1].v0 >= w[0].v0 - w[0].tolerance);
        let down = self.points.windows(2).all(|w| w[1].v0 <= w[0].v0 + w[0].tolerance);
        up || down
    }
}

/// Solves once per value of `axis` and stacks the `t = 0` slices at `x₀`.
pub fn cmd_sweep(cfg: &RunConfig, axis: Option<&str>, values: Option<&[f64]>) -> Result<SweepReport> {
    let axis = axis.unwrap_or(&cfg.sweep.axis);
    let values = values.unwrap_or(&cfg.sweep.values);
    let dir = &cfg.output.dir;
    let mut out = create(dir, "sweep.csv")?;
    writeln!(out, "axis,value,k,q,v")?;
    let mut points = Vec::with_capacity(values.len());
    for &value in values {
        let c = cfg.with_axis(axis, value)?;
        let Model { utility, penalty, params } = c.model()?;
        let field = solve(&c.grid, &utility, &penalty, &params)?;
        let grid = field.grid();
        for m in 0..grid.k.n {
            for l in 0..grid.q.n {
                let v = field.interpolate(0.0, params.x0, grid.k.value(m), grid.q.value(l));
                writeln!(out, "{axis},{value},{},{},{v}", grid.k.value(m), grid.q.value(l))?;
            }
        }
        let v0 = field.interpolate(0.0, params.x0, 0.0, params.q0);
        info!("{axis} = {value}: v0 = {v0:.6}");
        points.push(SweepPoint { value, v0, premium: v0 - params.target * params.x0, tolerance: field.scheme().tolerance });
    }
    out.flush()?;
    let report = SweepReport { axis: axis.into(), points };
    let mut out = create(dir, "sweep_summary.csv")?;
    writeln!(out, "axis,value,v0,premium,tolerance")?;
    for p in &report.points {
        writeln!(out, "{},{},{},{},{}", report.axis, p.value, p.v0, p.premium, p.tolerance)?;
    }
    out.flush()?;
    info!("v0 monotone along {axis}: {}", report.monotone());
    Ok(report)
}
