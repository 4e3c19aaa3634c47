use std::path::PathBuf;

use clap::Parser;
use serde_json::{json, Map, Value};

use super::config::{parse_grid, parse_number, read_invocations, Invocation};
use super::output::{Cell, Format, Report, Table};
use super::{
    BalancedArgs, BoundArgs, Cli, CliError, Command, MinArgs, OutArgs, ParamArgs, PmfArgs, SimArgs, SimKind, SweepArgs,
    TableArgs, ThroughputArgs, ThroughputCommand, ToleranceArgs,
};
use crate::balanced::{balance_params, ccdf_x, ccdf_xk, cdf_x, cdf_xk, simulate_chain};
use crate::bounds::{beta_star, tolerance_check, BoundEngine, BoundKind, BoundReport};
use crate::params::MiningParams;
use crate::series::{pmf_series, pmf_series_to, MAX_ORDER};
use crate::sim::{self, SimConfig, SimEstimate};
use crate::stats::Z95;
use crate::throughput::{fork_cap, optimize, throughput_rate_cap, ThroughputProblem};

type Res<T> = Result<T, CliError>;

/// Output of one invocation, ready to be written.
struct Rendered {
    text: String,
    out: Option<PathBuf>,
}

pub(super) fn execute(command: Command) -> Res<()> {
    if let Command::Replay(args) = command {
        let text = std::fs::read_to_string(&args.file)?;
        let mut all = String::new();
        for inv in read_invocations(&text)? {
            let argv = std::iter::once("naklab".to_string()).chain(inv.argv());
            let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(format!("[{}]: {e}", inv.command)))?;
            if matches!(cli.command, Command::Replay(_)) {
                return Err(CliError::Usage("a config file cannot contain replay".into()));
            }
            all.push_str(&dispatch(cli.command)?.text);
        }
        return write(&Rendered { text: all, out: args.out });
    }
    write(&dispatch(command)?)
}

fn write(r: &Rendered) -> Res<()> {
    match &r.out {
        Some(path) => std::fs::write(path, &r.text)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(r.text.as_bytes())?;
        }
    }
    Ok(())
}

fn dispatch(command: Command) -> Res<Rendered> {
    match command {
        Command::Tolerance(a) => finish(Invocation::new("tolerance", &a), &a.out, Format::Csv, tolerance(&a)?),
        Command::BalancedCdf(a) => finish(Invocation::new("balanced-cdf", &a), &a.out, Format::Csv, balanced(&a)?),
        Command::PmfM(a) => finish(Invocation::new("pmf-m", &a), &a.out, Format::Csv, pmf(&a)?),
        Command::Bound(a) => {
            let inv = Invocation::new(format!("bound {}", a.kind), &a);
            finish(inv, &a.out, Format::Csv, bound(&a)?)
        }
        Command::MinDepth(a) => finish(Invocation::new("min-depth", &a), &a.out, Format::Csv, min_latency(&a, true)?),
        Command::MinTime(a) => finish(Invocation::new("min-time", &a), &a.out, Format::Csv, min_latency(&a, false)?),
        Command::TableDepth(a) => finish(Invocation::new("table-depth", &a), &a.out, Format::Csv, table_depth(&a)?),
        Command::Throughput(ThroughputCommand::Opt(a)) => {
            let inv = Invocation::new("throughput opt", &a);
            let report = throughput(&a, &inv)?;
            finish(inv, &a.out, Format::Csv, report)
        }
        Command::Simulate(a) => {
            let inv = Invocation::new(format!("simulate {}", a.kind.name()), &a);
            let default = match a.kind {
                SimKind::MaxDiff | SimKind::Lead => Format::Csv,
                _ => Format::Json,
            };
            finish(inv, &a.out, default, simulate(&a)?)
        }
        Command::Sweep(a) => finish(Invocation::new("sweep", &a), &a.out, Format::Csv, sweep(&a)?),
        Command::Replay(_) => unreachable!("handled by execute"),
    }
}

fn finish(inv: Invocation, out: &OutArgs, default: Format, report: Report) -> Res<Rendered> {
    let text = match out.format.unwrap_or(default) {
        Format::Csv => inv.header(&report.resolved) + &report.table.csv(),
        Format::Json => {
            let envelope = json!({
                "command": inv.command,
                "config": Value::Object(inv.args.clone()),
                "resolved": Value::Object(report.resolved.clone()),
                "result": report.json.clone().unwrap_or_else(|| report.table.json_rows()),
            });
            serde_json::to_string_pretty(&envelope).expect("JSON values serialize") + "\n"
        }
    };
    Ok(Rendered { text, out: out.out.clone() })
}

fn num_opt(s: &Option<String>) -> Res<Option<f64>> {
    s.as_deref().map(parse_number).transpose()
}

fn nums(list: &[String]) -> Res<Vec<f64>> {
    list.iter().map(|s| parse_number(s)).collect()
}

impl ParamArgs {
    fn delta(&self) -> Res<f64> {
        num_opt(&self.delta)?.ok_or_else(|| CliError::Usage("--delta is required".into()))
    }

    pub(super) fn resolve(&self) -> Res<MiningParams> {
        let delta = self.delta()?;
        let (a, h, lambda, beta) = (num_opt(&self.a)?, num_opt(&self.h)?, num_opt(&self.lambda)?, num_opt(&self.beta)?);
        let p = match (a, h, lambda, beta) {
            (Some(a), Some(h), None, None) => MiningParams::new(a, h, delta)?,
            (None, None, Some(l), Some(b)) => MiningParams::from_total(l, b, delta)?,
            _ => return Err(CliError::Usage("give exactly one of (--a, --h) or (--lambda, --beta)".into())),
        };
        Ok(p)
    }
}

fn resolved_params(p: &MiningParams) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("a".into(), json!(p.a));
    m.insert("h".into(), json!(p.h));
    m.insert("delta".into(), json!(p.delta));
    m.insert("lambda".into(), json!(p.a + p.h));
    m.insert("beta".into(), json!(p.beta()));
    m
}

fn tolerance(args: &ToleranceArgs) -> Res<Report> {
    let pa = &args.params;
    let mut table = Table::new(&["lambda", "delta", "beta_star", "beta", "within", "margin"]);
    let mut resolved = Map::new();
    if pa.a.is_none() && pa.h.is_none() && pa.beta.is_none() {
        let lambda = num_opt(&pa.lambda)?.ok_or_else(|| CliError::Usage("--lambda is required".into()))?;
        let delta = pa.delta()?;
        resolved.insert("lambda".into(), json!(lambda));
        resolved.insert("delta".into(), json!(delta));
        table.push(vec![
            lambda.into(),
            delta.into(),
            beta_star(lambda, delta).into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
        ]);
    } else {
        let p = pa.resolve()?;
        let tol = tolerance_check(&p);
        resolved = resolved_params(&p);
        table.push(vec![
            (p.a + p.h).into(),
            p.delta.into(),
            tol.beta_star.into(),
            p.beta().into(),
            tol.within.into(),
            tol.margin.into(),
        ]);
    }
    Ok(Report { resolved, table, json: None })
}

fn balanced(args: &BalancedArgs) -> Res<Report> {
    let p = args.params.resolve()?;
    let bp = balance_params(&p);
    let mut resolved = resolved_params(&p);
    resolved.insert("epsilon".into(), json!(bp.epsilon));
    resolved.insert("escape".into(), json!(bp.delta));
    resolved.insert("ratio".into(), json!(bp.ratio));
    let chain = args.empirical_trials.map(|n| simulate_chain(&bp, n, args.seed)).transpose()?;
    let mut cols = vec!["n", "F", "ccdf"];
    if args.k.is_some() {
        cols.extend(["F_k", "ccdf_k"]);
    }
    if chain.is_some() {
        cols.extend(["empirical", "empirical_lo", "empirical_hi"]);
    }
    let mut table = Table::new(&cols);
    for n in 0..=args.n {
        let mut row: Vec<Cell> = vec![n.into(), cdf_x(&bp, n).into(), ccdf_x(&bp, n).into()];
        if let Some(k) = args.k {
            row.extend([cdf_xk(&bp, n, k).into(), ccdf_xk(&bp, n, k).into()]);
        }
        if let Some(c) = &chain {
            let (lo, hi) = c.cdf_ci(n as usize, Z95);
            row.extend([c.cdf(n as usize).into(), lo.into(), hi.into()]);
        }
        table.push(row);
    }
    Ok(Report { resolved, table, json: None })
}

fn pmf(args: &PmfArgs) -> Res<Report> {
    let p = args.params.resolve()?;
    let series = match args.n {
        Some(n) => pmf_series(&p, n)?,
        None => pmf_series_to(&p, args.tol.unwrap_or(crate::series::DEFAULT_RESIDUAL), MAX_ORDER)?,
    };
    let mut resolved = resolved_params(&p);
    resolved.insert("order".into(), json!(series.n_max));
    resolved.insert("residual".into(), json!(series.residual));
    let mut table = Table::new(&["i", "e_i", "cdf"]);
    for i in 0..=series.n_max {
        table.push(vec![(i as u64).into(), series.get(i).into(), series.cdf(i).into()]);
    }
    Ok(Report { resolved, table, json: None })
}

const BOUND_COLUMNS: [&str; 15] = [
    "latency",
    "value",
    "unclamped",
    "n_star",
    "series_order",
    "series_residual",
    "i0",
    "j0",
    "k0",
    "panels",
    "quad_change",
    "u_max",
    "tail_term",
    "n_scanned",
    "warnings",
];

fn latency_cell(kind: BoundKind, x: f64) -> Cell {
    if kind.is_depth() {
        Cell::U(x as u64)
    } else {
        Cell::F(x)
    }
}

fn bound_row(r: &BoundReport) -> Vec<Cell> {
    let t = &r.truncation;
    let mut warnings = r.warnings.clone();
    if r.value.was_clamped() {
        warnings.push(format!("clamped from {:e}", r.value.unclamped));
    }
    vec![
        latency_cell(r.kind, r.latency),
        r.value.value.into(),
        r.value.unclamped.into(),
        r.n_star.into(),
        (t.series_order as u64).into(),
        t.series_residual.into(),
        (t.i0 as u64).into(),
        (t.j0 as u64).into(),
        (t.k0 as u64).into(),
        (t.panels as u64).into(),
        t.quad_change.into(),
        t.u_max.into(),
        t.tail_term.into(),
        t.n_scanned.into(),
        Cell::S(warnings.join("; ")),
    ]
}

fn bound(args: &BoundArgs) -> Res<Report> {
    let p = args.params.resolve()?;
    let engine = BoundEngine::new(p, args.variant)?;
    let mut table = Table::new(&BOUND_COLUMNS);
    let mut reports = Vec::new();
    for x in nums(&args.latency)? {
        let r = engine.eval(args.kind, x)?;
        table.push(bound_row(&r));
        reports.push(r);
    }
    let json = serde_json::to_value(&reports).ok();
    Ok(Report { resolved: resolved_params(&p), table, json })
}

fn min_latency(args: &MinArgs, depth: bool) -> Res<Report> {
    let p = args.params.resolve()?;
    let target = parse_number(&args.target)?;
    let kind = args.kind.unwrap_or(if depth { BoundKind::DepthUpper } else { BoundKind::TimeUpper });
    if kind.is_depth() != depth {
        return Err(CliError::Usage(format!("{kind} is not a {} bound", if depth { "depth" } else { "time" })));
    }
    let engine = BoundEngine::new(p, args.variant)?;
    let name = Cell::S(kind.name().to_string());
    let table = if depth {
        let s = engine.min_depth(kind, target)?;
        let mut t = Table::new(&["kind", "target", "k", "value", "value_below"]);
        t.push(vec![name, target.into(), s.k.into(), s.value.into(), s.value_below.into()]);
        t
    } else {
        let s = engine.min_time(kind, target)?;
        let mut t = Table::new(&["kind", "target", "t", "t_lo", "t_hi", "value"]);
        t.push(vec![name, target.into(), s.t.into(), s.t_lo.into(), s.t_hi.into(), s.value.into()]);
        t
    };
    Ok(Report { resolved: resolved_params(&p), table, json: None })
}

fn table_depth(args: &TableArgs) -> Res<Report> {
    let lambda = parse_number(&args.lambda)?;
    let delta = parse_number(&args.delta)?;
    let target = parse_number(&args.target)?;
    let mut table = Table::new(&["beta", "chernoff", "upper", "lower", "upper_value", "lower_value"]);
    for beta in nums(&args.betas)? {
        let engine = BoundEngine::new(MiningParams::from_total(lambda, beta, delta)?, args.variant)?;
        let ch = engine.min_depth(BoundKind::DepthChernoff, target)?;
        let up = engine.min_depth(BoundKind::DepthUpper, target)?;
        let lo = engine.min_depth(BoundKind::DepthLower, target)?;
        table.push(vec![beta.into(), ch.k.into(), up.k.into(), lo.k.into(), up.value.into(), lo.value.into()]);
    }
    let mut resolved = Map::new();
    resolved.insert("lambda".into(), json!(lambda));
    resolved.insert("delta".into(), json!(delta));
    Ok(Report { resolved, table, json: None })
}

fn throughput(args: &ThroughputArgs, inv: &Invocation) -> Res<Report> {
    let mut problem = ThroughputProblem::new(
        parse_number(&args.beta)?,
        parse_number(&args.r)?,
        parse_number(&args.nu)?,
        parse_number(&args.q)?,
        parse_number(&args.d)?,
    );
    problem.fork_numbers = nums(&args.fork_number)?;
    problem.b_min = parse_number(&args.b_min)?;
    problem.b_max = parse_number(&args.b_max)?;
    problem.grid = args.grid;
    problem.variant = args.variant;
    let sol = optimize(&problem, args.safety)?;
    let mut resolved = Map::new();
    resolved.insert("fork_cap".into(), json!(fork_cap(problem.beta)?));
    resolved.insert("rate_cap".into(), json!(throughput_rate_cap(problem.beta, problem.r)));
    if let Some(path) = &args.frontier {
        let mut t = Table::new(&["lambda", "B", "delta_B", "k", "p", "throughput", "feasible"]);
        for f in &sol.frontier {
            t.push(vec![
                f.lambda.into(),
                f.b.into(),
                f.delta_b.into(),
                f.k.into(),
                f.p.into(),
                f.throughput.into(),
                f.feasible.into(),
            ]);
        }
        std::fs::write(path, inv.header(&resolved) + &t.csv())?;
    }
    let b = &sol.best;
    let mut table = Table::new(&[
        "lambda",
        "B",
        "delta_B",
        "k",
        "p",
        "throughput",
        "fork_number",
        "safety_margin",
        "latency_margin",
    ]);
    table.push(vec![
        b.lambda.into(),
        b.b.into(),
        b.delta_b.into(),
        b.k.into(),
        b.p.into(),
        b.throughput.into(),
        sol.fork_number.into(),
        b.safety_margin.into(),
        b.latency_margin.into(),
    ]);
    let json = Some(json!({ "best": b, "fork_number": sol.fork_number }));
    Ok(Report { resolved, table, json })
}

fn attack_table(rows: &[SimEstimate], depth: bool) -> Table {
    let mut t = Table::new(&["latency", "successes", "trials", "p_hat", "ci_lo", "ci_hi", "truncated_trials"]);
    for e in rows {
        let latency = if depth { Cell::U(e.latency as u64) } else { Cell::F(e.latency) };
        t.push(vec![
            latency,
            e.successes.into(),
            e.trials.into(),
            e.p_hat.into(),
            e.ci95.0.into(),
            e.ci95.1.into(),
            e.truncated_trials.into(),
        ]);
    }
    t
}

fn simulate(args: &SimArgs) -> Res<Report> {
    let p = args.params.resolve()?;
    let mut cfg = SimConfig::new(p, args.trials, args.seed);
    if let Some(h) = num_opt(&args.horizon)? {
        cfg.horizon = h;
    }
    if let Some(w) = num_opt(&args.warmup)? {
        cfg.warmup = w;
    }
    cfg.stop_margin = args.stop_margin;
    cfg.lead = args.lead_dist;
    let mut resolved = resolved_params(&p);
    resolved.insert("horizon".into(), json!(cfg.horizon));
    resolved.insert("warmup".into(), json!(cfg.warmup));
    resolved.insert("seed".into(), json!(cfg.seed));
    resolved.insert("rng".into(), json!(sim::rng::RNG_CONTRACT));
    let (table, json) = match args.kind {
        SimKind::MaxDiff | SimKind::Lead => {
            let hist = if args.kind == SimKind::MaxDiff { sim::sim_max_diff(&cfg)? } else { sim::sim_lead(&cfg)? };
            let len = hist.counts.len();
            let series = if args.kind == SimKind::MaxDiff { Some(pmf_series(&p, len.max(1) - 1)?) } else { None };
            let mut cols = vec!["i", "count", "pmf", "ccdf"];
            if series.is_some() {
                cols.push("e_i");
            }
            let mut t = Table::new(&cols);
            for i in 0..len {
                let mut row: Vec<Cell> =
                    vec![(i as u64).into(), hist.counts[i].into(), hist.pmf(i).into(), hist.ccdf(i).into()];
                if let Some(s) = &series {
                    row.push(s.get(i).into());
                }
                t.push(row);
            }
            resolved.insert("truncated_trials".into(), json!(hist.truncated_trials));
            (t, serde_json::to_value(&hist).ok())
        }
        SimKind::AttackDepth => {
            if args.k.is_empty() {
                return Err(CliError::Usage("attack-depth needs --k".into()));
            }
            let est = sim::sim_private_attack_depth_batch(&cfg, &args.k)?;
            (attack_table(&est, true), serde_json::to_value(&est).ok())
        }
        SimKind::AttackTime => {
            if args.t.is_empty() {
                return Err(CliError::Usage("attack-time needs --t".into()));
            }
            let est = sim::sim_private_attack_time_batch(&cfg, &nums(&args.t)?)?;
            (attack_table(&est, false), serde_json::to_value(&est).ok())
        }
        SimKind::Invariants => {
            let r = sim::sim_lemma_instrumentation(&cfg)?;
            let mut t = Table::new(&["trials", "blocks", "pacers", "jumpers", "checks", "violations"]);
            t.push(vec![
                r.trials.into(),
                r.blocks.into(),
                r.pacers.into(),
                r.jumpers.into(),
                r.checks.into(),
                r.violations.into(),
            ]);
            (t, serde_json::to_value(&r).ok())
        }
    };
    Ok(Report { resolved, table, json })
}

fn sweep(args: &SweepArgs) -> Res<Report> {
    let depth = args.kind[0].is_depth();
    if args.kind.iter().any(|k| k.is_depth() != depth) {
        return Err(CliError::Usage("sweep kinds must be all depth or all time bounds".into()));
    }
    let mut grid = parse_grid(&args.grid)?;
    if depth {
        if grid.iter().any(|&x| x < 0.0) {
            return Err(CliError::Usage("depth grid must be non-negative".into()));
        }
        grid = grid.iter().map(|x| x.round()).collect();
        grid.dedup();
    }
    let points: Vec<MiningParams> = if args.betas.is_empty() {
        vec![args.params.resolve()?]
    } else {
        let pa = &args.params;
        if pa.a.is_some() || pa.h.is_some() || pa.beta.is_some() {
            return Err(CliError::Usage("--betas takes --lambda and --delta only".into()));
        }
        let lambda = num_opt(&pa.lambda)?.ok_or_else(|| CliError::Usage("--betas needs --lambda".into()))?;
        let delta = pa.delta()?;
        nums(&args.betas)?.into_iter().map(|b| MiningParams::from_total(lambda, b, delta)).collect::<Result<_, _>>()?
    };
    let mut cols = vec!["beta", "latency"];
    cols.extend(args.kind.iter().map(|k| k.name()));
    let mut table = Table::new(&cols);
    for p in &points {
        let engine = BoundEngine::new(*p, args.variant)?;
        for &x in &grid {
            let mut row = vec![p.beta().into(), latency_cell(args.kind[0], x)];
            for &kind in &args.kind {
                row.push(engine.eval(kind, x)?.value.value.into());
            }
            table.push(row);
        }
    }
    let mut resolved = Map::new();
    if let [p] = points.as_slice() {
        resolved = resolved_params(p);
    }
    Ok(Report { resolved, table, json: None })
}
