use std::collections::BTreeMap;
use std::io::Write;

use chrono::Utc;
use rayon::prelude::*;
use serde_json::{json, Value};

use hyperperc::asymptotics::{pc_expansion, pc_from_pi, pi_coefficients, pl_lower_bound};
use hyperperc::critpoint::{
    pc_tilde, pc_tilde_exact, solve_pc, solve_pc_exact, verify_twopoint, PcEstimate, PcStatus,
    SolverOptions, window_study,
};
use hyperperc::diagrams::{
    estimate_m, open_triangle, pi1_ladder_bound, polygon_diagram, triangle_at_zero_report,
    triangle_diagram, LADDER_CAP,
};
use hyperperc::errg::{brute_force_oracle, errg_moments, Precision};
use hyperperc::exploration::{
    bf_explore, brw_explore, check_coupling, estimate_gw_progeny, gw_progeny_mean_exact,
    linewise_explore,
};
use hyperperc::percolation::{estimate_chi, estimate_two_point_field, grow_cluster};
use hyperperc::randwalk::mixing_time;
use hyperperc::stats::EstimateWithError;
use hyperperc::{Caps, Field64, HammingGraph, SampleSpec};

use crate::args::{Cli, Command, DiagramKind, ExploreMode, Global};
use crate::criteria;
use crate::error::CliError;
use crate::manifest::{write_run, RunManifest};
use crate::output::{Report, Status, Table};

const DEFAULT_REPS: u64 = 1000;
pub const THREADS_ENV: &str = "HYPERPERC_THREADS";

type CliResult<T> = std::result::Result<T, CliError>;

fn need<T: Copy>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Validation(format!("--{flag} is required for this command")))
}

impl Global {
    fn graph(&self) -> CliResult<HammingGraph> {
        Ok(HammingGraph::new(self.d.unwrap_or(1), need(self.n, "n")?)?)
    }

    fn complete_graph_side(&self) -> CliResult<usize> {
        match self.d {
            None | Some(1) => need(self.n, "n"),
            Some(d) => Err(CliError::Validation(format!("exact mode needs d = 1, got d = {d}"))),
        }
    }

    fn reps(&self) -> u64 {
        self.reps.unwrap_or(DEFAULT_REPS)
    }

    fn caps(&self) -> Caps {
        match self.cap {
            Some(c) => Caps { cluster: c, volume: c as u64 },
            None => Caps::default(),
        }
    }

    fn theta(&self) -> f64 {
        self.theta.unwrap_or(1.0)
    }
}

/// Thread count from the environment, then the flag.
pub fn thread_count(global: &Global) -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| CliError::Validation(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        Err(_) => match global.threads {
            Some(0) => Err(CliError::Validation("--threads must be positive".into())),
            t => Ok(t),
        },
    }
}

/// Parses nothing, runs everything: thread setup, dispatch, output and
/// manifest. Returns the process exit code.
pub fn main_with(cli: Cli) -> CliResult<u8> {
    let threads = thread_count(&cli.global)?;
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    if let Some(out) = &cli.global.out {
        crate::manifest::check_writable(&[out, &crate::manifest::manifest_path(out)], cli.global.force)?;
    }
    let started_at = Utc::now();
    let report = execute(&cli)?;
    let data = report.render(cli.global.format)?;
    match &cli.global.out {
        Some(out) => {
            let manifest = RunManifest {
                command: command_name(&cli.command).to_string(),
                parameters: serde_json::to_value(&cli)?,
                master_seed: cli.global.seed,
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                started_at,
                finished_at: Utc::now(),
                outputs: BTreeMap::new(),
            };
            let digest = write_run(out, &data, manifest, cli.global.force)?;
            println!("{} sha256={digest}", out.display());
        }
        None => std::io::stdout().write_all(&data)?,
    }
    match report.status {
        Status::Ok => Ok(0),
        Status::Inconclusive(why) => {
            eprintln!("inconclusive: {why}");
            Ok(3)
        }
        Status::ChecksFailed(k) => Err(CliError::ChecksFailed(k)),
    }
}

pub fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Chi => "chi",
        Command::Twopoint { .. } => "twopoint",
        Command::Pc { .. } => "pc",
        Command::PcBounds { .. } => "pc-bounds",
        Command::PcTilde { .. } => "pc-tilde",
        Command::Errg { .. } => "errg",
        Command::Explore { .. } => "explore",
        Command::Mixing { .. } => "mixing",
        Command::Diagrams { .. } => "diagrams",
        Command::WindowStudy { .. } => "window-study",
        Command::Verify { .. } => "verify",
    }
}

pub fn execute(cli: &Cli) -> CliResult<Report> {
    let g = &cli.global;
    match &cli.command {
        Command::Chi => chi(g),
        Command::Twopoint { check } => twopoint(g, *check),
        &Command::Pc { exact, tol, budget, point_cap } => {
            let opts = SolverOptions { tol, budget, point_cap, ..Default::default() };
            pc(g, exact, opts)
        }
        Command::PcBounds { pi_hat } => pc_bounds(g, *pi_hat),
        &Command::PcTilde { p_min, p_max, points, exact } => pc_tilde_cmd(g, p_min, p_max, points, exact),
        Command::Errg { mode } => {
            if mode.brute {
                errg_brute(g)
            } else if mode.mc {
                errg_mc(g)
            } else {
                errg_exact(g)
            }
        }
        &Command::Explore { mode, run } => explore(g, mode, run),
        &Command::Mixing { alpha, max_steps } => mixing(g, alpha, max_steps),
        &Command::Diagrams { kind, i, j, z } => diagrams(g, kind, i, j, z),
        Command::WindowStudy { n_list, theta_list, tol, budget, point_cap } => {
            let opts = SolverOptions { tol: *tol, budget: *budget, point_cap: *point_cap, ..Default::default() };
            window(g, n_list, theta_list, opts)
        }
        &Command::Verify { suite } => verify(g, suite),
    }
}

fn chi(g: &Global) -> CliResult<Report> {
    let graph = g.graph()?;
    let p = need(g.p, "p")?;
    let est = estimate_chi(&graph, p, g.reps(), g.seed, &g.caps())?;
    Report::new(json!({ "d": graph.dimension(), "n": graph.side(), "p": p, "seed": g.seed, "chi": est }))
}

fn twopoint(g: &Global, check: bool) -> CliResult<Report> {
    let graph = g.graph()?;
    let p = need(g.p, "p")?;
    if check {
        let c = verify_twopoint(&graph, p, g.reps(), g.seed, &g.caps())?;
        let rows: Vec<Value> = c.rows.iter().map(|r| serde_json::to_value(r).unwrap_or_default()).collect();
        let note = (!c.near_critical).then_some("p m is far from 1; the prediction does not apply");
        let report = Report::new(json!({ "check": c, "note": note }))?;
        return Ok(report.with_table(Table::from_records(&rows)));
    }
    let field = estimate_two_point_field(&graph, p, g.reps(), g.seed, &g.caps())?;
    let mut table = Table::new(["vertex", "distance", "tau", "standard_error"]);
    for (z, &t) in field.values.iter().enumerate() {
        let dist = graph.distance(graph.origin(), hyperperc::Vertex(z as u64));
        table.push(vec![z.to_string(), dist.to_string(), t.to_string(), field.standard_error(z).to_string()]);
    }
    let se: Vec<f64> = (0..field.values.len()).map(|z| field.standard_error(z)).collect();
    Ok(Report::new(json!({
        "d": graph.dimension(), "n": graph.side(), "p": p, "chi": field.chi,
        "replicates": field.replicates, "tau": field.values, "standard_error": se,
    }))?
    .with_table(table))
}

fn pc_value(est: &PcEstimate, m: f64) -> Value {
    let c2 = |p: f64| m * m * (p - 1.0 / m);
    json!({ "estimate": est, "m": m, "c2_hat": c2(est.p_hat), "c2_lo": c2(est.p_lo), "c2_hi": c2(est.p_hi) })
}

fn pc(g: &Global, exact: bool, opts: SolverOptions) -> CliResult<Report> {
    let theta = g.theta();
    if exact {
        let n = g.complete_graph_side()?;
        let est = solve_pc_exact(n, theta)?;
        return Report::new(pc_value(&est, (n - 1) as f64));
    }
    let graph = g.graph()?;
    let est = solve_pc(&graph, theta, opts, g.seed, &g.caps())?;
    let exhausted = est.status == PcStatus::BudgetExhausted;
    Ok(Report::new(pc_value(&est, graph.degree() as f64))?
        .inconclusive_if(exhausted, "budget exhausted before the bracket was certified"))
}

fn pc_bounds(g: &Global, pi_hat: Option<f64>) -> CliResult<Report> {
    let graph = g.graph()?;
    let (d, n) = (graph.dimension(), graph.side());
    let theta = g.theta();
    let e = pc_expansion(d, n)?;
    let m = graph.degree() as f64;
    let window = 1.0 / (m * (graph.volume() as f64).cbrt());
    let second = e.term_value(2).unwrap_or(0.0);
    let terms: Vec<Value> = e
        .terms
        .iter()
        .map(|(k, c)| json!({ "order": k, "coefficient": c.to_string(), "value": e.term_value(*k) }))
        .collect();
    let pi = pi_coefficients(d)?;
    let from_pi = match pi_hat {
        Some(x) => Some(pc_from_pi(x, theta, m, graph.volume() as f64)?),
        None => None,
    };
    Report::new(json!({
        "d": d, "n": n, "m": m, "theta": theta,
        "expansion": { "terms": terms, "value": e.value, "error_order": e.error_order },
        "p_lower_bound": pl_lower_bound(d, n, theta)?,
        "window_width": window,
        "window": if second > window { "second-order-resolved" } else { "within-window" },
        "pi_coefficients": { "pi0_lower": pi.pi0_lower.to_string(), "pi1_upper": pi.pi1_upper.to_string() },
        "pc_from_pi": from_pi,
    }))
}

fn pc_tilde_cmd(g: &Global, p_min: f64, p_max: f64, points: usize, exact: bool) -> CliResult<Report> {
    if points < 2 || p_min.partial_cmp(&p_max) != Some(std::cmp::Ordering::Less) {
        return Err(CliError::Validation("need p-min < p-max and at least 2 points".into()));
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| p_min + (p_max - p_min) * i as f64 / (points - 1) as f64)
        .collect();
    let t = if exact {
        pc_tilde_exact(g.complete_graph_side()?, &grid)?
    } else {
        pc_tilde(&g.graph()?, &grid, g.reps(), g.seed, &g.caps())?
    };
    let mut table = Table::new(["p", "chi", "chi_standard_error", "log_derivative"]);
    for (i, p) in grid.iter().enumerate() {
        table.push(vec![
            p.to_string(),
            t.chi[i].mean.to_string(),
            t.chi[i].standard_error.to_string(),
            if t.log_derivative[i].is_nan() { String::new() } else { t.log_derivative[i].to_string() },
        ]);
    }
    let boundary = t.boundary;
    Ok(Report::new(json!({ "grid": grid, "result": t }))?
        .with_table(table)
        .inconclusive_if(boundary, "maximizer on the grid boundary"))
}

fn errg_exact(g: &Global) -> CliResult<Report> {
    let n = g.complete_graph_side()?;
    let p = need(g.p, "p")?;
    let m = errg_moments::<f64>(n, p, Precision::Compensated)?;
    let mut table = Table::new(["size", "probability"]);
    for (k, q) in m.pmf.iter().enumerate() {
        table.push(vec![(k + 1).to_string(), q.to_string()]);
    }
    Ok(Report::new(json!({
        "n": n, "p": p, "chi": m.susceptibility, "second_moment": m.second_moment,
        "surplus": m.expected_surplus, "edges": m.expected_edges, "pmf": m.pmf,
    }))?
    .with_table(table))
}

fn errg_brute(g: &Global) -> CliResult<Report> {
    let n = g.complete_graph_side()?;
    let p = need(g.p, "p")?;
    let b = brute_force_oracle::<f64>(n, &p)?;
    Report::new(json!({
        "n": n, "p": p, "chi": b.susceptibility, "second_moment": b.second_moment,
        "surplus": b.expected_surplus, "edges": b.expected_edges,
        "connected_probability": b.connected_probability, "pmf": b.pmf,
    }))
}

fn errg_mc(g: &Global) -> CliResult<Report> {
    let n = g.complete_graph_side()?;
    let p = need(g.p, "p")?;
    let graph = HammingGraph::complete(n)?;
    let reps = g.reps();
    if reps < 2 {
        return Err(CliError::Validation("need at least 2 replicates".into()));
    }
    let cap = g.caps().cluster;
    let samples: Vec<(f64, f64)> = (0..reps)
        .into_par_iter()
        .map(|r| -> hyperperc::Result<(f64, f64)> {
            let spec = SampleSpec::new(&graph, p, g.seed, r)?;
            let c = grow_cluster(&spec, graph.origin(), cap)?;
            Ok((c.size() as f64, c.surplus as f64))
        })
        .collect::<hyperperc::Result<_>>()?;
    let est = |f: &dyn Fn(&(f64, f64)) -> f64| {
        EstimateWithError::from_samples(&samples.iter().map(f).collect::<Vec<_>>())
    };
    Report::new(json!({
        "n": n, "p": p, "replicates": reps,
        "chi": est(&|s| s.0)?, "second_moment": est(&|s| s.0 * s.0)?, "surplus": est(&|s| s.1)?,
    }))
}

fn explore(g: &Global, mode: ExploreMode, run: u64) -> CliResult<Report> {
    let p = need(g.p, "p")?;
    let caps = g.caps();
    match mode {
        ExploreMode::Bf => {
            let graph = g.graph()?;
            let spec = SampleSpec::new(&graph, p, g.seed, run)?;
            let t = bf_explore(&spec, graph.origin(), caps.cluster)?;
            let mut table = Table::new(["step", "dead", "active"]);
            for (s, (a, b)) in t.dead_size_by_step.iter().zip(&t.active_size_by_step).enumerate() {
                table.push(vec![s.to_string(), a.to_string(), b.to_string()]);
            }
            Ok(Report::new(json!({
                "run": run, "steps": t.steps, "size": t.dead.len(), "surplus": t.surplus_edges.len(),
                "dead_size_by_step": t.dead_size_by_step, "active_size_by_step": t.active_size_by_step,
            }))?
            .with_table(table))
        }
        ExploreMode::Brw => {
            let graph = g.graph()?;
            Report::new(json!({ "run": run, "trace": brw_explore(&graph, p, g.seed, run, caps.cluster)? }))
        }
        ExploreMode::Linewise => {
            let graph = g.graph()?;
            let spec = SampleSpec::new(&graph, p, g.seed, run)?;
            let t = linewise_explore(&spec, graph.origin(), caps.cluster)?;
            Report::new(json!({ "run": run, "steps": t.steps, "size": t.dead.len() }))
        }
        ExploreMode::Coupling => {
            let graph = g.graph()?;
            let r = check_coupling(&graph, p, g.reps(), g.seed, &caps)?;
            Report::new(json!({ "report": r, "max_abs_z": r.max_abs_z() }))
        }
        ExploreMode::Gw => {
            let d = need(g.d, "d")?;
            let n = need(g.n, "n")?;
            let est = estimate_gw_progeny(n, p, d, g.reps(), g.seed, caps.cluster)?;
            Report::new(json!({ "d": d, "n": n, "p": p, "progeny": est, "exact_mean": gw_progeny_mean_exact(n, p, d).ok() }))
        }
    }
}

fn mixing(g: &Global, alpha: Option<f64>, max_steps: usize) -> CliResult<Report> {
    let d = g.d.unwrap_or(1);
    let n = need(g.n, "n")?;
    let alpha = alpha.unwrap_or(1.0 / n as f64);
    let t = mixing_time::<f64>(d, n, alpha, max_steps)?;
    Report::new(json!({ "d": d, "n": n, "alpha": alpha, "t_mix": t, "t_mix_over_ln_n": t as f64 / (n as f64).ln() }))
}

fn diagrams(g: &Global, kind: DiagramKind, i: usize, j: usize, z: u64) -> CliResult<Report> {
    let graph = g.graph()?;
    let p = need(g.p, "p")?;
    let caps = g.caps();
    if z >= graph.volume() {
        return Err(CliError::Validation(format!("--z must be below the volume {}", graph.volume())));
    }
    if kind == DiagramKind::M {
        let est = estimate_m(&graph, p, g.reps(), g.seed, &caps)?;
        return Report::new(json!({ "p": p, "M": est }));
    }
    let field = estimate_two_point_field(&graph, p, g.reps(), g.seed, &caps)?;
    let tau = Field64::from_values(graph.dimension(), graph.side(), field.values)?;
    let z = z as usize;
    let value = match kind {
        DiagramKind::Triangle => json!({
            "triangle": triangle_diagram(&tau, z)?,
            "at_zero": triangle_at_zero_report(&tau, field.chi.mean)?,
        }),
        DiagramKind::OpenTriangle => json!({ "open_triangle": open_triangle(&tau, p, z)? }),
        DiagramKind::Polygon => json!({ "i": i, "j": j, "polygon": polygon_diagram(&tau, p, i, j, z)? }),
        DiagramKind::Ladder => json!({ "ladder": pi1_ladder_bound(&tau, p, LADDER_CAP)? }),
        DiagramKind::M => unreachable!(),
    };
    Report::new(json!({ "p": p, "z": z, "chi": field.chi, "diagram": value }))
}

fn window(g: &Global, n_list: &[usize], theta_list: &[f64], opts: SolverOptions) -> CliResult<Report> {
    let d = need(g.d, "d")?;
    let rows = window_study(d, n_list, theta_list, opts, g.seed, &g.caps())?;
    let exhausted = rows.iter().any(|r| r.estimate.status == PcStatus::BudgetExhausted);
    let records: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "n": r.n, "theta": r.theta, "p_hat": r.estimate.p_hat, "p_lo": r.estimate.p_lo,
                "p_hi": r.estimate.p_hi, "c2_hat": r.c2_hat, "c2_lo": r.c2_lo, "c2_hi": r.c2_hi,
                "p_lower_bound": r.p_lower_bound, "expansion": r.expansion,
                "expansion_c2": r.expansion_c2, "status": r.estimate.status, "growths": r.estimate.growths,
            })
        })
        .collect();
    Ok(Report::new(json!({ "d": d, "rows": rows }))?
        .with_table(Table::from_records(&records))
        .inconclusive_if(exhausted, "at least one bracket ran out of budget"))
}

fn verify(g: &Global, suite: criteria::Suite) -> CliResult<Report> {
    let mut outcomes = Vec::new();
    for id in criteria::suite_ids(suite) {
        let start = std::time::Instant::now();
        let o = criteria::run(id, suite, g.seed)?;
        eprintln!(
            "check {:>2} {:<45} {} ({:.1?})",
            o.id,
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            start.elapsed()
        );
        outcomes.push(o);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let mut table = Table::new(["id", "name", "passed", "summary"]);
    for o in &outcomes {
        table.push(vec![o.id.to_string(), o.name.clone(), o.passed.to_string(), o.summary.clone()]);
    }
    let mut report = Report::new(json!({ "suite": suite, "seed": g.seed, "checks": outcomes, "failed": failed }))?
        .with_table(table);
    if failed > 0 {
        report.status = Status::ChecksFailed(failed);
    }
    Ok(report)
}
