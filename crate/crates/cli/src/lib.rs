//! Command-line front end of `bruin-core`.
//!
//! Each subcommand turns flags into one or more parameter points, runs the
//! matching estimator and writes one record per point as CSV or JSON.

pub mod args;
pub mod config;
pub mod output;

use std::fmt;
use std::fs;
use std::io::Write;
use std::time::Instant;

use bruin_core::asymptotics::{
    approx_cumulative_many, approx_parisian_many, bounds_parisian_fixed_h, bounds_simultaneous,
    constant_cumulative_sweep, constant_parisian_sweep, exact_tail, ruin_time_rate,
    tail_asym_gaussian, AsymptoticApprox, TailMode,
};
use bruin_core::functionals::sojourn_points;
use bruin_core::model::{rescale_to_unit_horizon, ModelParams, Window};
use bruin_core::montecarlo::{ruin_time_survival_curve, simulate_sweep, Estimate, McConfig, RuinKind};
use bruin_core::validation::{run_criterion, ValidationConfig, CRITERIA};
use clap::Parser;

use args::{ApproxKind, BoundKind, Cli, Command, Format, McArgs, ModelArgs, OutArgs, SimKind, TailArg};
use output::{emit_csv, emit_json, Table, Value};

pub const SEED_ENV: &str = "BRUIN_SEED";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(bruin_core::Error),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<bruin_core::Error> for CliError {
    fn from(e: bruin_core::Error) -> Self {
        CliError::Core(e)
    }
}

type Res<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Runs the program on `argv` (including the program name) and returns the
/// exit code: 0 on success, 1 on usage or numerical errors, 2 when the
/// validation suite fails.
pub fn run(argv: Vec<String>) -> i32 {
    run_to(argv, &mut std::io::stdout())
}

/// As [`run`], with records that would go to standard output written to `sink`.
pub fn run_to(argv: Vec<String>, sink: &mut dyn Write) -> i32 {
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(m) => {
            eprintln!("error: {m}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command, sink) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command, sink: &mut dyn Write) -> Res<bool> {
    let started = Instant::now();
    let (table, out, passed) = match cmd {
        Command::Tail { model, out } => (tail(&model, &out)?, out, true),
        Command::Simulate { kind, model, mc, out } => (simulate(kind, &model, &mc, &out)?, out, true),
        Command::Constant { kind, model, mc, out } => (constant(kind, &model, &mc, &out)?, out, true),
        Command::Approx { kind, tail, model, mc, out } => {
            (approx(kind, tail, &model, &mc, &out)?, out, true)
        }
        Command::Ruintime { l1, l2, x, model, mc, out } => {
            (ruintime(l1, l2, &x, &model, &mc, &out)?, out, true)
        }
        Command::Bounds { kind, model, mc, out } => (bounds(kind, &model, &mc, &out)?, out, true),
        Command::Validate { criteria, seed, workers, out } => {
            let (t, ok) = validate(&criteria, seed, workers)?;
            (t, out, ok)
        }
    };
    let mut table = table;
    let ms = if out.timing { started.elapsed().as_millis() as u64 } else { 0 };
    table.set_all("wall_time_ms", Value::Int(ms));
    write_table(&table, &out, sink)?;
    Ok(passed)
}

fn write_table(t: &Table, out: &OutArgs, sink: &mut dyn Write) -> Res<()> {
    let bytes = match out.format {
        Format::Csv => emit_csv(t).map_err(|e| CliError::Io(e.to_string()))?,
        Format::Json => emit_json(t),
    };
    match &out.output {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => sink
            .write_all(&bytes)
            .map_err(|e| CliError::Io(format!("cannot write to standard output: {e}"))),
    }
}

fn parse_sweep(out: &OutArgs, allowed: &[&str]) -> Res<Option<(String, Vec<f64>)>> {
    let Some(spec) = &out.sweep else {
        return Ok(None);
    };
    let (name, list) = spec
        .split_once('=')
        .ok_or_else(|| usage(format!("--sweep expects NAME=v1,v2,..., got `{spec}`")))?;
    let name = name.trim();
    if !allowed.contains(&name) {
        return Err(usage(format!(
            "--sweep: cannot sweep `{name}` here; choose one of {}",
            allowed.join(", ")
        )));
    }
    let values = list
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("--sweep: `{v}` is not a number")))
        })
        .collect::<Res<Vec<f64>>>()?;
    Ok(Some((name.to_string(), values)))
}

/// Parameter points for the model flags and an optional sweep.
fn points(model: &ModelArgs, sweep: &Option<(String, Vec<f64>)>, need_u: bool) -> Res<Vec<ModelParams>> {
    let variants: Vec<ModelArgs> = match sweep {
        None => vec![model.clone()],
        Some((name, values)) => values
            .iter()
            .map(|&v| {
                let mut m = model.clone();
                match name.as_str() {
                    "u" => m.u = Some(v),
                    "rho" => m.rho = Some(v),
                    "H" => m.h = Some(v),
                    "S" => m.s = Some(v),
                    "L" => m.l = Some(v),
                    _ => unreachable!("sweep names are checked"),
                }
                m
            })
            .collect(),
    };
    variants.iter().map(|m| point(m, need_u)).collect()
}

fn point(m: &ModelArgs, need_u: bool) -> Res<ModelParams> {
    let u = match m.u {
        Some(u) => u,
        None if need_u => return Err(usage("missing --u")),
        None => 1.0,
    };
    let a = m.a.ok_or_else(|| usage("missing --a"))?;
    let rho = m.rho.ok_or_else(|| usage("missing --rho"))?;
    let window = match (m.h, m.s) {
        (Some(_), Some(_)) => return Err(usage("--H and --S are mutually exclusive")),
        (Some(h), None) => Window::AbsoluteH(h),
        (None, Some(s)) => Window::ScaledS(s),
        (None, None) => Window::AbsoluteH(0.0),
    };
    Ok(ModelParams::new(u, a, rho, m.c1.unwrap_or(0.0), m.c2.unwrap_or(0.0), m.horizon.unwrap_or(1.0))?
        .with_window(window)?
        .with_sojourn_budget(m.l.unwrap_or(0.0))?)
}

/// Seed from the flags, else from the environment (announced on stderr),
/// else the default.
fn resolve_seed(flag: Option<u64>) -> Res<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => {
            let s = v
                .trim()
                .parse()
                .map_err(|_| usage(format!("{SEED_ENV}={v} is not an unsigned integer")))?;
            eprintln!("note: seed {s} taken from {SEED_ENV}");
            Ok(s)
        }
        Err(_) => Ok(McConfig::default().seed),
    }
}

fn mc_config(a: &McArgs) -> Res<McConfig> {
    let d = McConfig::default();
    let cfg = McConfig {
        n_paths: a.n_paths.unwrap_or(d.n_paths),
        dt: a.dt.unwrap_or(d.dt),
        seed: resolve_seed(a.seed)?,
        batch_size: a.batch_size.unwrap_or(d.batch_size),
        ci_level: a.ci_level.unwrap_or(d.ci_level),
        t_trunc: a.t_trunc.unwrap_or(d.t_trunc),
        truncation_check_paths: a.truncation_check_paths.unwrap_or(d.truncation_check_paths),
        workers: a.workers.unwrap_or(d.workers),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn estimate_fields(e: &Estimate) -> Vec<(&'static str, Value)> {
    vec![
        ("value", e.value.into()),
        ("stderr", e.stderr.into()),
        ("ci_low", e.ci_low.into()),
        ("ci_high", e.ci_high.into()),
        ("n_paths", e.n_paths.into()),
        ("dt", e.dt.into()),
        ("seed", e.seed.into()),
    ]
}

fn model_fields(p: &ModelParams) -> Vec<(&'static str, Value)> {
    vec![
        ("u", p.u().into()),
        ("a", p.a().into()),
        ("rho", p.rho().into()),
        ("c1", p.c1().into()),
        ("c2", p.c2().into()),
        ("T", p.horizon().into()),
        ("regime", p.regime().as_str().into()),
    ]
}

fn warn_truncation(e: &Estimate) {
    if let Some(c) = e.effective.truncation_change {
        if c.abs() > 0.01 {
            eprintln!(
                "warning: the constant changes by {:.2}% when T_trunc = {} doubles; consider a larger --t-trunc",
                100.0 * c,
                e.effective.t_trunc.unwrap_or(f64::NAN)
            );
        }
    }
}

const TAIL_COLUMNS: &[&str] = &[
    "command", "u", "a", "rho", "c1", "c2", "T", "exact", "asymptotic", "ratio", "value", "stderr",
    "ci_low", "ci_high", "n_paths", "dt", "seed", "regime", "wall_time_ms",
];

fn tail(model: &ModelArgs, out: &OutArgs) -> Res<Table> {
    let sweep = parse_sweep(out, &["u", "rho"])?;
    let mut t = Table::new(TAIL_COLUMNS);
    for p in points(model, &sweep, true)? {
        let q = rescale_to_unit_horizon(&p);
        let exact = exact_tail(&q)?;
        let asym = tail_asym_gaussian(q.u(), q.a(), q.rho(), q.c1(), q.c2())?;
        let mut row = vec![
            ("command", "tail".into()),
            ("exact", exact.into()),
            ("asymptotic", asym.into()),
            ("ratio", (exact / asym).into()),
            ("value", exact.into()),
        ];
        row.extend(model_fields(&q));
        t.push(row);
    }
    Ok(t)
}

const SIM_COLUMNS: &[&str] = &[
    "command", "kind", "u", "a", "rho", "c1", "c2", "T", "H", "S", "L", "value", "stderr", "ci_low",
    "ci_high", "n_paths", "dt", "seed", "regime", "wall_time_ms",
];

fn simulate(kind: SimKind, model: &ModelArgs, mc: &McArgs, out: &OutArgs) -> Res<Table> {
    let sweep = parse_sweep(out, &["u", "S", "L", "H", "rho"])?;
    let pts = points(model, &sweep, true)?;
    let cfg = mc_config(mc)?;
    let (rk, name) = match kind {
        SimKind::Simultaneous => (RuinKind::Simultaneous, "simultaneous"),
        SimKind::Parisian => (RuinKind::Parisian, "parisian"),
        SimKind::Cumulative => (RuinKind::Cumulative, "cumulative"),
    };
    let est = simulate_sweep(rk, &pts, &cfg)?;
    let mut t = Table::new(SIM_COLUMNS);
    for (p, e) in pts.iter().zip(&est) {
        let mut row = vec![("command", "simulate".into()), ("kind", name.into())];
        row.extend(model_fields(p));
        row.extend(estimate_fields(e));
        row.extend([
            ("T", e.effective.horizon.into()),
            ("H", e.effective.h.into()),
            ("S", e.effective.s.into()),
            ("L", e.effective.sojourn_budget.into()),
        ]);
        t.push(row);
    }
    Ok(t)
}

const CONSTANT_COLUMNS: &[&str] = &[
    "command", "kind", "a", "rho", "S", "L", "t_trunc", "truncation_change", "value", "stderr",
    "ci_low", "ci_high", "n_paths", "dt", "seed", "regime", "wall_time_ms",
];

fn constant(kind: ApproxKind, model: &ModelArgs, mc: &McArgs, out: &OutArgs) -> Res<Table> {
    let key = match kind {
        ApproxKind::Parisian => "S",
        ApproxKind::Cumulative => "L",
    };
    if model.h.is_some() {
        return Err(usage("--H has no meaning for a constant; give the scaled window --S"));
    }
    let sweep = parse_sweep(out, &[key, "rho"])?;
    let pts = points(model, &sweep, false)?;
    let cfg = mc_config(mc)?;
    let mut t = Table::new(CONSTANT_COLUMNS);
    // consecutive points with the same rho share one pass
    let mut i = 0;
    while i < pts.len() {
        let rho = pts[i].rho();
        let j = i + pts[i..].iter().take_while(|p| p.rho() == rho).count();
        let group = &pts[i..j];
        let est = match kind {
            ApproxKind::Parisian => {
                let s: Vec<f64> = group.iter().map(|p| p.s()).collect();
                constant_parisian_sweep(group[0].a(), rho, &s, &cfg)?
            }
            ApproxKind::Cumulative => {
                let l: Vec<f64> = group.iter().map(|p| p.sojourn_budget()).collect();
                constant_cumulative_sweep(group[0].a(), rho, &l, &cfg)?
            }
        };
        for (p, e) in group.iter().zip(&est) {
            warn_truncation(e);
            let mut row = vec![
                ("command", "constant".into()),
                ("kind", key_kind(kind).into()),
                ("a", p.a().into()),
                ("rho", p.rho().into()),
                ("S", e.effective.s.into()),
                ("L", e.effective.sojourn_budget.into()),
                ("t_trunc", e.effective.t_trunc.into()),
                ("truncation_change", e.effective.truncation_change.into()),
                ("regime", p.regime().as_str().into()),
            ];
            row.extend(estimate_fields(e));
            t.push(row);
        }
        i = j;
    }
    Ok(t)
}

fn key_kind(kind: ApproxKind) -> &'static str {
    match kind {
        ApproxKind::Parisian => "parisian",
        ApproxKind::Cumulative => "cumulative",
    }
}

const APPROX_COLUMNS: &[&str] = &[
    "command", "kind", "tail_mode", "u", "a", "rho", "c1", "c2", "T", "H", "S", "L", "t_trunc",
    "truncation_change", "constant", "constant_stderr", "tail_factor", "value", "stderr", "ci_low",
    "ci_high", "n_paths", "dt", "seed", "regime", "wall_time_ms",
];

fn approx(kind: ApproxKind, tail: TailArg, model: &ModelArgs, mc: &McArgs, out: &OutArgs) -> Res<Table> {
    let sweep = parse_sweep(out, &["u", "S", "L", "H", "rho"])?;
    let pts = points(model, &sweep, true)?;
    let cfg = mc_config(mc)?;
    let mode = match tail {
        TailArg::Exact => TailMode::Exact,
        TailArg::ClosedForm => TailMode::ClosedForm,
    };
    let mut results: Vec<AsymptoticApprox> = Vec::with_capacity(pts.len());
    let mut i = 0;
    while i < pts.len() {
        let rho = pts[i].rho();
        let j = i + pts[i..].iter().take_while(|p| p.rho() == rho).count();
        results.extend(match kind {
            ApproxKind::Parisian => approx_parisian_many(&pts[i..j], &cfg, mode)?,
            ApproxKind::Cumulative => approx_cumulative_many(&pts[i..j], &cfg, mode)?,
        });
        i = j;
    }
    let mut t = Table::new(APPROX_COLUMNS);
    for r in &results {
        let c = &r.constant;
        warn_truncation(c);
        let q = &r.params;
        let s = c.effective.s;
        let mut row = vec![
            ("command", "approx".into()),
            ("kind", key_kind(kind).into()),
            ("tail_mode", r.tail_mode.as_str().into()),
            ("H", (s / (q.u() * q.u())).into()),
            ("S", s.into()),
            ("L", c.effective.sojourn_budget.into()),
            ("t_trunc", c.effective.t_trunc.into()),
            ("truncation_change", c.effective.truncation_change.into()),
            ("constant", c.value.into()),
            ("constant_stderr", c.stderr.into()),
            ("tail_factor", r.tail_factor.into()),
        ];
        row.extend(model_fields(q));
        row.extend(estimate_fields(c));
        row.extend([
            ("value", r.approx_value.into()),
            ("stderr", (c.stderr * r.tail_factor).into()),
            ("ci_low", (c.ci_low * r.tail_factor).into()),
            ("ci_high", (c.ci_high * r.tail_factor).into()),
        ]);
        t.push(row);
    }
    Ok(t)
}

const RUINTIME_COLUMNS: &[&str] = &[
    "command", "u", "a", "rho", "c1", "c2", "T", "L1", "L2", "x", "rate", "limit", "value", "stderr",
    "ci_low", "ci_high", "n_paths", "dt", "seed", "regime", "wall_time_ms",
];

fn ruintime(l1: Option<f64>, l2: Option<f64>, xs: &[f64], model: &ModelArgs, mc: &McArgs, out: &OutArgs) -> Res<Table> {
    let l1 = l1.ok_or_else(|| usage("missing --L1"))?;
    let l2 = l2.ok_or_else(|| usage("missing --L2"))?;
    if xs.is_empty() {
        return Err(usage("missing --x"));
    }
    let sweep = parse_sweep(out, &["u", "rho"])?;
    let pts = points(model, &sweep, true)?;
    let cfg = mc_config(mc)?;
    let mut t = Table::new(RUINTIME_COLUMNS);
    for p in &pts {
        let curve = ruin_time_survival_curve(p, l1, l2, xs, &cfg)?;
        let q = rescale_to_unit_horizon(p);
        let rate = ruin_time_rate(q.a(), q.rho())?;
        let u2 = q.u() * q.u();
        let l2_eff = (sojourn_points(l2 / u2, cfg.dt) - 1) as f64 * cfg.dt * u2;
        for (&x, e) in xs.iter().zip(&curve) {
            // the ratio of constants is 1 when the budgets coincide
            let limit = (l1 == l2).then(|| (-rate * x).exp());
            let mut row = vec![
                ("command", "ruintime".into()),
                ("L1", e.effective.sojourn_budget.into()),
                ("L2", l2_eff.into()),
                ("x", x.into()),
                ("rate", rate.into()),
                ("limit", limit.into()),
            ];
            row.extend(model_fields(&q));
            row.extend(estimate_fields(e));
            t.push(row);
        }
    }
    Ok(t)
}

const BOUNDS_COLUMNS: &[&str] = &[
    "command", "kind", "u", "a", "rho", "c1", "c2", "T", "H", "lower", "upper", "lower_first",
    "lower_first_stderr", "lower_second", "lower_second_stderr", "value", "stderr", "ci_low",
    "ci_high", "n_paths", "dt", "seed", "regime", "wall_time_ms",
];

fn bounds(kind: BoundKind, model: &ModelArgs, mc: &McArgs, out: &OutArgs) -> Res<Table> {
    let mut t = Table::new(BOUNDS_COLUMNS);
    match kind {
        BoundKind::Simultaneous => {
            let sweep = parse_sweep(out, &["u", "rho"])?;
            for p in points(model, &sweep, true)? {
                let q = rescale_to_unit_horizon(&p);
                let (lower, upper) = bounds_simultaneous(&p)?;
                let mut row = vec![
                    ("command", "bounds".into()),
                    ("kind", "simultaneous".into()),
                    ("lower", lower.into()),
                    ("upper", upper.into()),
                ];
                row.extend(model_fields(&q));
                t.push(row);
            }
        }
        BoundKind::Parisian => {
            let sweep = parse_sweep(out, &["u", "H", "S", "rho"])?;
            let cfg = mc_config(mc)?;
            for p in points(model, &sweep, true)? {
                let b = bounds_parisian_fixed_h(&p, &cfg)?;
                let mut row = vec![
                    ("command", "bounds".into()),
                    ("kind", "parisian".into()),
                    ("upper", b.upper.into()),
                    ("H", p.h().into()),
                ];
                row.extend(model_fields(&p));
                if let Some(l) = b.lower {
                    row.extend([
                        ("lower", l.value.into()),
                        ("lower_first", l.first.value.into()),
                        ("lower_first_stderr", l.first.stderr.into()),
                        ("lower_second", l.second.value.into()),
                        ("lower_second_stderr", l.second.stderr.into()),
                        ("H", l.first.effective.h.into()),
                        ("T", l.first.effective.horizon.into()),
                        ("n_paths", l.first.n_paths.into()),
                        ("dt", l.first.dt.into()),
                        ("seed", l.first.seed.into()),
                    ]);
                }
                t.push(row);
            }
        }
    }
    Ok(t)
}

const VALIDATE_COLUMNS: &[&str] = &["criterion", "title", "passed", "details"];

fn validate(criteria: &[u32], seed: Option<u64>, workers: Option<usize>) -> Res<(Table, bool)> {
    let ids: Vec<u32> = if criteria.is_empty() { CRITERIA.to_vec() } else { criteria.to_vec() };
    let vc = ValidationConfig { seed: resolve_seed(seed)?, workers: workers.unwrap_or(0) };
    let mut t = Table::new(VALIDATE_COLUMNS);
    let mut all = true;
    for id in ids {
        let r = run_criterion(id, &vc).map_err(|e| usage(format!("--criteria: {e}")))?;
        eprint!("{r}");
        all &= r.passed;
        t.push(vec![
            ("criterion", u64::from(r.id).into()),
            ("title", r.title.into()),
            ("passed", r.passed.into()),
            ("details", r.details.join(" | ").into()),
        ]);
    }
    Ok((t, all))
}
