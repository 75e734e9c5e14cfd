//! Subcommand implementations.

use std::fmt::Write as _;

use expfact_core::bounds::{bound_coefficients, extrapolate_radius};
use expfact_core::csv::{format_f64, CsvTable};
use expfact_core::experiments::{
    dyson_check, lin_space, log_space, so3_trace_experiment, su2_sweep, ErrorSweep,
};
use expfact_core::fer::{fer_terms, modified_fer_terms};
use expfact_core::perm::{commutator_json, to_commutator_basis, wilcox_weights};
use expfact_core::wilcox::{wilcox_terms, MAX_ORDER};
use expfact_core::zassenhaus::{bellman_c1_series, zassenhaus_exponents, zassenhaus_terms};
use expfact_core::{Grid, GridSeries, OperatorFunction, TimeOperator};
use serde_json::json;

use crate::error::{check_cap, CliError, CliResult};
use crate::output::{csv_text, describe_grid, emit, Context};
use crate::{
    BellmanArgs, BoundArgs, Command, DysonArgs, FerArgs, Format, GridArgs, ModifiedFerArgs,
    OutputArgs, SeriesArgs, So3Args, Su2Args, WeightsArgs, ZassenhausArgs,
};

pub const MAX_NODES: usize = 1_000_001;
pub const MAX_BOUND_ORDER: usize = 5000;
pub const MAX_FER_TRANSFORMS: usize = 8;
pub const MAX_C1_POWER: usize = 16;
pub const MAX_SWEEP_POINTS: usize = 10_000;

pub fn run(cmd: Command, ctx: &Context) -> CliResult<()> {
    match cmd {
        Command::WilcoxWeights(a) => weights(a),
        Command::Zassenhaus(a) => zassenhaus(a),
        Command::BellmanC1(a) => bellman_c1(a),
        Command::WilcoxNumeric(a) => wilcox_numeric(a, ctx),
        Command::FerNumeric(a) => fer_numeric(a, ctx),
        Command::ModifiedFer(a) => modified_fer(a, ctx),
        Command::ConvergenceBound(a) => convergence_bound(a, ctx),
        Command::Su2Sweep(a) => su2(a, ctx),
        Command::So3Sweep(a) => so3(a, ctx),
        Command::DysonCheck(a) => dyson(a, ctx),
    }
}

fn emit_json(out: &OutputArgs, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::precondition(format!("JSON encoding failed: {e}")))?;
    text.push('\n');
    emit(out.output.as_deref(), &text)
}

fn to_value(v: impl serde::Serialize) -> CliResult<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| CliError::precondition(format!("JSON encoding failed: {e}")))
}

fn weights(args: WeightsArgs) -> CliResult<()> {
    let w = wilcox_weights(args.n)?;
    let fixed_last = args.fixed_last.unwrap_or(args.n.min(u8::MAX as usize) as u8);
    let comm = if args.n >= 2 { Some(to_commutator_basis(&w, fixed_last)?) } else { None };
    match args.format {
        Format::Json => {
            let commutator = match &comm {
                Some(terms) => to_value(commutator_json(args.n, fixed_last, terms)?)?,
                None => serde_json::Value::Null,
            };
            let doc = json!({
                "degree": args.n,
                "permutation": to_value(w.to_json()?)?,
                "commutator": commutator,
            });
            emit_json(&args.out, &doc)
        }
        Format::Text => {
            let mut text = format!("W_{} over permutation words:\n", args.n);
            for (word, c) in w.terms() {
                writeln!(text, "  {c} {word:?}").expect("writing to a String cannot fail");
            }
            if let Some(terms) = &comm {
                writeln!(text, "over right-nested commutators ending in {fixed_last}:")
                    .expect("writing to a String cannot fail");
                for (word, c) in terms {
                    writeln!(text, "  {c} {word:?}").expect("writing to a String cannot fail");
                }
            }
            emit(args.out.output.as_deref(), &text)
        }
    }
}

fn zassenhaus(args: ZassenhausArgs) -> CliResult<()> {
    let poly = if args.time_dependent {
        zassenhaus_terms(args.n)?.pop()
    } else {
        zassenhaus_exponents(args.n)?.pop()
    }
    .expect("order >= 1 yields at least one term");
    emit_json(&args.out, &to_value(poly.to_json()?)?)
}

fn bellman_c1(args: BellmanArgs) -> CliResult<()> {
    check_cap("k", args.k, MAX_C1_POWER)?;
    emit_json(&args.out, &to_value(bellman_c1_series(args.k).to_json()?)?)
}

fn build_grid(t0: f64, t1: f64, nodes: usize) -> CliResult<Grid> {
    check_cap("nodes", nodes, MAX_NODES)?;
    Ok(Grid::new(t0, t1, nodes)?)
}

fn load(args: &GridArgs) -> CliResult<(OperatorFunction, Grid)> {
    if args.stride == 0 {
        return Err(CliError::precondition("stride must be >= 1"));
    }
    let op = crate::opspec::parse(&args.op)?;
    let grid = build_grid(args.t0, args.t1, args.nodes)?;
    Ok((op, grid))
}

/// Wide table: `t`, then `{label}_{i}_{j}_re`, `{label}_{i}_{j}_im` per series.
fn series_table(series: &[(String, &GridSeries)], stride: usize) -> CsvTable {
    let grid = *series[0].1.grid();
    let dim = series[0].1.dim();
    let mut header = vec!["t".to_string()];
    for (label, _) in series {
        for i in 1..=dim {
            for j in 1..=dim {
                header.push(format!("{label}_{i}_{j}_re"));
                header.push(format!("{label}_{i}_{j}_im"));
            }
        }
    }
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = CsvTable::new(&refs);
    let last = grid.n_nodes() - 1;
    for k in (0..=last).filter(|k| k % stride == 0 || *k == last) {
        let mut row = vec![format_f64(grid.node(k))];
        for (_, s) in series {
            for z in s.values()[k].entries() {
                row.push(format_f64(z.re));
                row.push(format_f64(z.im));
            }
        }
        t.push_row(row);
    }
    t
}

fn wilcox_numeric(args: SeriesArgs, ctx: &Context) -> CliResult<()> {
    let (op, grid) = load(&args.grid)?;
    let terms = wilcox_terms(&op, grid, args.n)?;
    let series: Vec<(String, &GridSeries)> =
        (1..=args.n).map(|n| (format!("W{n}"), terms.w(n))).collect();
    let mut t = series_table(&series, args.grid.stride);
    t.meta("dim", op.dim());
    t.meta("order", args.n);
    emit(args.out.output.as_deref(), &csv_text(ctx, &describe_grid(&grid), t))
}

fn fer_numeric(args: FerArgs, ctx: &Context) -> CliResult<()> {
    check_cap("n", args.n, MAX_FER_TRANSFORMS)?;
    let (op, grid) = load(&args.grid)?;
    let state = fer_terms(&op, grid, args.n, args.tol, args.kmax)?;
    let series: Vec<(String, &GridSeries)> =
        (1..=args.n).map(|n| (format!("Omega{n}"), state.omega(n))).collect();
    let mut t = series_table(&series, args.grid.stride);
    t.meta("dim", op.dim());
    t.meta("transforms", args.n);
    t.meta("tol", format_f64(args.tol));
    t.meta("kmax", args.kmax);
    for n in 1..=args.n {
        t.meta(&format!("max_abs_B{n}"), format_f64(state.b(n).max_abs()));
    }
    emit(args.out.output.as_deref(), &csv_text(ctx, &describe_grid(&grid), t))
}

fn modified_fer(args: ModifiedFerArgs, ctx: &Context) -> CliResult<()> {
    let (op, grid) = load(&args.grid)?;
    let mf = modified_fer_terms(&op, grid)?;
    let series: Vec<(String, &GridSeries)> =
        (1..=3).map(|n| (format!("Omega{n}"), mf.omega(n))).collect();
    let mut t = series_table(&series, args.grid.stride);
    let b2 = mf.residual_b2(&op, expfact_core::fer::DEFAULT_TOL, expfact_core::fer::DEFAULT_KMAX)?;
    t.meta("dim", op.dim());
    t.meta("max_abs_B2", format_f64(b2.max_abs()));
    emit(args.out.output.as_deref(), &csv_text(ctx, &describe_grid(&grid), t))
}

fn convergence_bound(args: BoundArgs, ctx: &Context) -> CliResult<()> {
    check_cap("n", args.n, MAX_BOUND_ORDER)?;
    let table = bound_coefficients(args.n)?;
    let radius = extrapolate_radius(&table.d_series(), args.tail)?;
    let mut t = table.to_csv();
    t.meta("tail", format_f64(args.tail));
    t.meta("d_inf", format_f64(radius.d_inf));
    t.meta("xi_w", format_f64(radius.xi_w));
    let grid = format!("n=1..{}", args.n);
    emit(args.out.output.as_deref(), &csv_text(ctx, &grid, t))?;
    if args.out.output.is_some() {
        let summary = format!(
            "D_inf = {}\nxi_W = {}\n",
            format_f64(radius.d_inf),
            format_f64(radius.xi_w)
        );
        emit(None, &summary)?;
    }
    Ok(())
}

fn emit_sweep(sweep: ErrorSweep, grid: &Grid, out: &OutputArgs, ctx: &Context) -> CliResult<()> {
    if !sweep.is_finite() {
        return Err(CliError::precondition("sweep produced non-finite values"));
    }
    emit(out.output.as_deref(), &csv_text(ctx, &describe_grid(grid), sweep.to_csv()))
}

fn check_points(points: usize) -> CliResult<()> {
    if points == 0 {
        return Err(CliError::precondition("points must be >= 1"));
    }
    check_cap("points", points, MAX_SWEEP_POINTS)
}

fn su2(args: Su2Args, ctx: &Context) -> CliResult<()> {
    check_points(args.points)?;
    check_cap("max-order", args.max_order, MAX_ORDER)?;
    if !(args.eps_min > 0.0 && args.eps_max >= args.eps_min && args.eps_max.is_finite()) {
        return Err(CliError::precondition("need 0 < eps-min <= eps-max"));
    }
    let grid = build_grid(0.0, 1.0, args.nodes)?;
    let eps = log_space(args.eps_min, args.eps_max, args.points);
    let sweep = su2_sweep(args.a, &eps, args.max_order, grid)?;
    emit_sweep(sweep, &grid, &args.out, ctx)
}

fn so3(args: So3Args, ctx: &Context) -> CliResult<()> {
    check_points(args.points)?;
    check_cap("max-order", args.max_order, MAX_ORDER)?;
    let grid = build_grid(0.0, 1.0, args.nodes)?;
    let thetas = lin_space(0.0, std::f64::consts::FRAC_PI_2, args.points);
    let sweep = so3_trace_experiment(args.alpha, &thetas, args.max_order, grid)?;
    emit_sweep(sweep, &grid, &args.out, ctx)
}

fn dyson(args: DysonArgs, ctx: &Context) -> CliResult<()> {
    check_cap("n", args.n, MAX_ORDER)?;
    check_points(args.samples)?;
    let (op, grid) = load(&args.grid)?;
    let sweep = dyson_check(&op, grid, args.n, args.samples)?;
    emit_sweep(sweep, &grid, &args.out, ctx)
}
