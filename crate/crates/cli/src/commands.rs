use std::ffi::OsString;
use std::io::Write as _;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::{json, Value};
use vge_core::asymptotics::{analyze, AnalyzeOptions, AsymptoticsReport};
use vge_core::counting::{ArithmeticityReport, Limits};
use vge_core::graph::{check_hypotheses, MetricGraph};
use vge_core::origami::{
    arc_count_bounds, enumerate_saddles, hypothesis_check_surface, surface_entropy, volume_bounds,
    BoundedCurve, SaddleConnection, Surface, SurfaceEntropyOptions,
};
use vge_core::spectral::{entropy, eta, eta_all, residue, EntropyOptions, EtaValue};

use crate::args::{
    Cli, Command, Emit, GraphCmd, OrigamiCmd, Quantity, Radii, SurfaceInput, Window,
};
use crate::cache::{cache_dir, saddle_table, saddles_cached, CacheStatus};
use crate::drivers::{graph_counts, surface_arcs, surface_volume};
use crate::formats::{
    curve_table, fmt_num, num, radius_grid, read_graph, read_origami, Output, Table,
};
use crate::CliError;

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Which output format a command produces when `--emit` is absent.
fn default_emit(cmd: &Command) -> Emit {
    match cmd {
        Command::Graph(GraphCmd::Count { .. })
        | Command::Origami(
            OrigamiCmd::Volume { .. } | OrigamiCmd::Arcs { .. } | OrigamiCmd::Saddles { .. },
        ) => Emit::Csv,
        _ => Emit::Json,
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    let defaults = Limits::default();
    let limits = Limits {
        visit_cap: g.visit_cap.unwrap_or(defaults.visit_cap),
        frontier_cap: g.frontier_cap.unwrap_or(defaults.frontier_cap),
    };
    let ctx = Ctx {
        limits,
        threads: g.threads as usize,
    };
    let out = match &cli.command {
        Command::Graph(c) => graph_command(c, &ctx)?,
        Command::Origami(c) => origami_command(c, &ctx)?,
    };
    let text = match g.emit.unwrap_or_else(|| default_emit(&cli.command)) {
        Emit::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).expect("json values serialise");
            s.push('\n');
            s
        }
        Emit::Csv => out.table.to_csv(),
    };
    match &g.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

struct Ctx {
    limits: Limits,
    threads: usize,
}

fn grid(r: &Radii) -> Result<Vec<f64>, CliError> {
    radius_grid(r.rmin.unwrap_or(r.step), r.rmax, r.step)
}

fn analyze_opts(w: &Window) -> AnalyzeOptions {
    AnalyzeOptions {
        window: w.window,
        osc_threshold: w.osc_threshold,
    }
}

fn pairs(v: &[(f64, f64)]) -> Value {
    Value::Array(v.iter().map(|&(a, b)| json!([num(a), num(b)])).collect())
}

fn arithmeticity_json(r: &ArithmeticityReport) -> Value {
    json!({
        "is_arithmetic": r.is_arithmetic,
        "d": r.d.map(num),
        "candidate": num(r.candidate),
        "max_residual": num(r.max_residual),
        "near_tol": r.near_tol,
        "witnesses": pairs(&r.witnesses),
    })
}

fn report_json(r: &AsymptoticsReport) -> Value {
    let mut v = json!({
        "h_used": num(r.h_used),
        "window_start": num(r.window_start),
        "c_estimate": num(r.c_estimate),
        "fluctuation": num(r.fluctuation),
        "alternations": r.alternations,
        "verdict": r.verdict.as_str(),
    });
    if let Some((res, ratio)) = r.residue_comparison {
        v["residue"] = num(res);
        v["residue_over_h"] = num(ratio);
    }
    v
}

fn summary_table(pairs: &[(&str, String)]) -> Table {
    let mut t = Table::new(&["key", "value"]);
    for (k, v) in pairs {
        t.push(vec![k.to_string(), v.clone()]);
    }
    t
}

fn graph_command(cmd: &GraphCmd, ctx: &Ctx) -> Result<Output, CliError> {
    match cmd {
        GraphCmd::Entropy {
            input,
            trunc,
            tol,
            ladder,
            ladder_tol,
        } => {
            let graph = read_graph(input)?;
            let opts = EntropyOptions {
                k: trunc.k,
                k_cut: trunc.k_cut,
                tol: *tol,
                ladder: *ladder,
                ladder_tol: *ladder_tol,
                ..EntropyOptions::default()
            };
            let r = entropy(&graph, &opts)?;
            let json = json!({
                "h": num(r.h),
                "bracket": [num(r.bracket.0), num(r.bracket.1)],
                "rho_residual": num(r.rho_residual),
                "ladder": r.ladder.iter().map(|s| json!({"k": s.k, "K": s.k_cut, "h": num(s.h)})).collect::<Vec<_>>(),
                "subexponential": r.subexponential,
                "h_upper": r.h_upper.map(num),
            });
            let mut table = Table::new(&["k", "K", "h"]);
            for s in &r.ladder {
                table.push(vec![s.k.to_string(), s.k_cut.to_string(), fmt_num(s.h)]);
            }
            if r.ladder.is_empty() {
                table.push(vec![
                    opts.k.to_string(),
                    opts.k_cut.to_string(),
                    fmt_num(r.h),
                ]);
            }
            Ok(Output { json, table })
        }
        GraphCmd::Count { input, x, radii } => {
            let graph = read_graph(input)?;
            let grid = grid(radii)?;
            let curve = graph_counts(&graph, *x, &grid, &ctx.limits, ctx.threads)?;
            let mut table = Table::new(&["R", "count"]);
            for (r, c) in curve.radii.iter().zip(&curve.counts) {
                table.push(vec![fmt_num(*r), c.to_string()]);
            }
            let json = json!({
                "start_vertex": curve.start_vertex,
                "radii": curve.radii.iter().map(|&r| num(r)).collect::<Vec<_>>(),
                "counts": curve.counts,
            });
            Ok(Output { json, table })
        }
        GraphCmd::Eta {
            input,
            z,
            x,
            k_cut,
            residue: with_residue,
        } => {
            let graph = read_graph(input)?;
            let mut values: Vec<(usize, EtaValue)> = Vec::new();
            for &zi in z {
                match x {
                    Some(v) => values.push((*v, eta(&graph, *v, zi, *k_cut)?)),
                    None => values.extend(eta_all(&graph, zi, *k_cut)?.into_iter().enumerate()),
                }
            }
            let mut table = Table::new(&["z", "vertex", "eta", "tail_bound"]);
            let mut list = Vec::new();
            for (v, e) in &values {
                table.push(vec![
                    fmt_num(e.z),
                    v.to_string(),
                    fmt_num(e.value),
                    fmt_num(e.series_tail_bound),
                ]);
                list.push(json!({"z": num(e.z), "vertex": v, "eta": num(e.value), "tail_bound": num(e.series_tail_bound)}));
            }
            let mut json = json!({ "values": list });
            if *with_residue {
                let h = entropy(&graph, &EntropyOptions::default())?.h;
                let res = residue(&graph, x.unwrap_or(0), h, *k_cut)?;
                json["residue"] = json!({
                    "vertex": x.unwrap_or(0),
                    "h": num(res.h),
                    "residue": num(res.residue),
                    "deltas_used": res.deltas_used.iter().map(|&d| num(d)).collect::<Vec<_>>(),
                    "extrapolation_error": num(res.extrapolation_error),
                });
            }
            Ok(Output { json, table })
        }
        GraphCmd::Asym {
            input,
            x,
            radii,
            window,
            h,
        } => {
            let graph = read_graph(input)?;
            let h = match h {
                Some(h) => *h,
                None => entropy(&graph, &EntropyOptions::default())?.h,
            };
            let grid = grid(radii)?;
            let curve = graph_counts(&graph, *x, &grid, &ctx.limits, ctx.threads)?;
            let mut report = analyze(&curve.samples(), h, &analyze_opts(window))?;
            let res = residue(&graph, *x, h, EntropyOptions::default().k_cut);
            let mut json_extra = None;
            match res {
                Ok(r) => report = report.with_residue(r.residue),
                Err(e) => json_extra = Some(e.to_string()),
            }
            let mut json = report_json(&report);
            if let Some(msg) = json_extra {
                json["residue_error"] = Value::String(msg);
            }
            let table = curve_table("normalized", &report.normalized);
            Ok(Output { json, table })
        }
        GraphCmd::Check {
            input,
            k_cut,
            max_len,
            tol,
        } => {
            let graph: MetricGraph = read_graph(input)?;
            let r = check_hypotheses(&graph, *k_cut, *max_len, *tol);
            let json = json!({
                "summable": r.h1_ok,
                "strongly_connected": r.h2_ok,
                "arithmeticity": r.h3.as_ref().map(arithmeticity_json),
            });
            let table = summary_table(&[
                ("summable", r.h1_ok.to_string()),
                ("strongly_connected", r.h2_ok.to_string()),
                (
                    "non_arithmetic",
                    r.h3.as_ref()
                        .map_or("unknown".into(), |a| (!a.is_arithmetic).to_string()),
                ),
            ]);
            Ok(Output { json, table })
        }
    }
}

fn load_surface(s: &SurfaceInput) -> Result<Surface, CliError> {
    Ok(Surface::new(read_origami(&s.input)?, s.marked)?)
}

fn saddles_json(saddles: &[SaddleConnection]) -> Value {
    Value::Array(
        saddles
            .iter()
            .map(|s| {
                json!({
                    "id": s.id,
                    "start": {"cone": s.start.cone, "corner": s.start.corner_index, "theta": num(s.start.theta())},
                    "end": {"cone": s.end.cone, "corner": s.end.corner_index, "theta": num(s.end.theta())},
                    "direction": [s.direction.0, s.direction.1],
                    "multiplicity": s.multiplicity,
                    "holonomy": [s.holonomy.0, s.holonomy.1],
                    "length": num(s.length),
                    "reverse_id": s.reverse_id,
                })
            })
            .collect(),
    )
}

fn bounded_output(value: &str, c: &BoundedCurve, delta: f64) -> Output {
    let mut table = Table::new(&["R", &format!("{value}_lower"), &format!("{value}_upper")]);
    for i in 0..c.radii.len() {
        table.push(vec![
            fmt_num(c.radii[i]),
            fmt_num(c.lower[i]),
            fmt_num(c.upper[i]),
        ]);
    }
    let json = json!({
        "delta": num(delta),
        "radii": c.radii.iter().map(|&r| num(r)).collect::<Vec<_>>(),
        "lower": c.lower.iter().map(|&r| num(r)).collect::<Vec<_>>(),
        "upper": c.upper.iter().map(|&r| num(r)).collect::<Vec<_>>(),
    });
    Output { json, table }
}

fn origami_command(cmd: &OrigamiCmd, ctx: &Ctx) -> Result<Output, CliError> {
    match cmd {
        OrigamiCmd::Info { surface } => {
            let o = read_origami(&surface.input)?;
            let s = Surface::new(o, surface.marked)?;
            let cones: Vec<Value> = s
                .cones()
                .iter()
                .map(|c| {
                    json!({
                        "id": c.id,
                        "k": c.k,
                        "angle": num(c.angle),
                        "corners": c.corners.iter().map(|&(sq, k)| json!([sq, k.index()])).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let json = json!({"n": s.origami().n(), "genus": s.genus(), "cones": cones});
            let mut table = Table::new(&["cone", "k", "angle", "corners"]);
            for c in s.cones() {
                table.push(vec![
                    c.id.to_string(),
                    c.k.to_string(),
                    fmt_num(c.angle),
                    c.corners.len().to_string(),
                ]);
            }
            Ok(Output { json, table })
        }
        OrigamiCmd::Saddles { surface, l, cache } => {
            let s = load_surface(surface)?;
            let (saddles, status) = if *cache {
                let (v, st, _) = saddles_cached(&s, surface.marked, *l, &cache_dir())?;
                (v, Some(st))
            } else {
                (enumerate_saddles(&s, *l)?, None)
            };
            let mut json = json!({
                "max_len": num(*l),
                "count": saddles.len(),
                "saddles": saddles_json(&saddles),
            });
            if let Some(st) = status {
                json["cache"] = Value::String(
                    if st == CacheStatus::Hit {
                        "hit"
                    } else {
                        "written"
                    }
                    .into(),
                );
            }
            let mut table = saddle_table(&saddles);
            // reports carry 12 digits like every other table
            for row in &mut table.rows {
                let last = row.len() - 1;
                row[last] = fmt_num(row[last].parse().unwrap_or(f64::NAN));
            }
            Ok(Output { json, table })
        }
        OrigamiCmd::Entropy {
            surface,
            l_start,
            l_max,
            ladder_tol,
            tol,
        } => {
            let s = load_surface(surface)?;
            let opts = SurfaceEntropyOptions {
                l_start: *l_start,
                l_max: *l_max,
                tol_ladder: *ladder_tol,
                tol: *tol,
                ..SurfaceEntropyOptions::default()
            };
            let r = surface_entropy(&s, &opts)?;
            let json = json!({
                "h": num(r.h),
                "bracket": [num(r.bracket.0), num(r.bracket.1)],
                "rho_residual": num(r.rho_residual),
                "ladder": r.ladder.iter().map(|st| json!({"L": num(st.l), "saddles": st.count, "h": num(st.h)})).collect::<Vec<_>>(),
                "subexponential": false,
            });
            let mut table = Table::new(&["L", "saddles", "h"]);
            for st in &r.ladder {
                table.push(vec![fmt_num(st.l), st.count.to_string(), fmt_num(st.h)]);
            }
            Ok(Output { json, table })
        }
        OrigamiCmd::Volume {
            surface,
            center,
            radii,
            delta,
        } => {
            let s = load_surface(surface)?;
            let grid = grid(radii)?;
            if let Some(d) = delta {
                let c = volume_bounds(&s, *center, &grid, *d, &ctx.limits)?;
                return Ok(bounded_output("volume", &c, *d));
            }
            let v = surface_volume(&s, *center, &grid, &ctx.limits, ctx.threads)?;
            let samples = v.samples();
            let json = json!({"center": v.center, "curve": pairs(&samples)});
            Ok(Output {
                json,
                table: curve_table("value", &samples),
            })
        }
        OrigamiCmd::Arcs {
            surface,
            x,
            y,
            radii,
            delta,
        } => {
            let s = load_surface(surface)?;
            let grid = grid(radii)?;
            if let Some(d) = delta {
                let c = arc_count_bounds(&s, *x, *y, &grid, *d, &ctx.limits)?;
                return Ok(bounded_output("count", &c, *d));
            }
            let c = surface_arcs(&s, *x, *y, &grid, &ctx.limits, ctx.threads)?;
            let mut table = Table::new(&["R", "value"]);
            for (r, n) in c.radii.iter().zip(&c.counts) {
                table.push(vec![fmt_num(*r), n.to_string()]);
            }
            let json = json!({"from": x, "to": y, "radii": c.radii.iter().map(|&r| num(r)).collect::<Vec<_>>(), "counts": c.counts});
            Ok(Output { json, table })
        }
        OrigamiCmd::Asym {
            surface,
            quantity,
            x,
            y,
            radii,
            delta,
            window,
            h,
        } => {
            let s = load_surface(surface)?;
            let h = match h {
                Some(h) => *h,
                None => surface_entropy(&s, &SurfaceEntropyOptions::default())?.h,
            };
            let grid = grid(radii)?;
            let opts = analyze_opts(window);
            let curves: Vec<(&str, Vec<(f64, f64)>)> = match (quantity, delta) {
                (Quantity::Volume, Some(d)) => {
                    let c = volume_bounds(&s, *x, &grid, *d, &ctx.limits)?;
                    vec![("lower", c.lower_samples()), ("upper", c.upper_samples())]
                }
                (Quantity::Arcs, Some(d)) => {
                    let c = arc_count_bounds(&s, *x, *y, &grid, *d, &ctx.limits)?;
                    vec![("lower", c.lower_samples()), ("upper", c.upper_samples())]
                }
                (Quantity::Volume, None) => {
                    vec![(
                        "exact",
                        surface_volume(&s, *x, &grid, &ctx.limits, ctx.threads)?.samples(),
                    )]
                }
                (Quantity::Arcs, None) => {
                    vec![(
                        "exact",
                        surface_arcs(&s, *x, *y, &grid, &ctx.limits, ctx.threads)?.samples(),
                    )]
                }
            };
            let mut reports = Vec::new();
            for (name, samples) in &curves {
                reports.push((*name, analyze(samples, h, &opts)?));
            }
            let mut json = json!({});
            for (name, r) in &reports {
                json[*name] = report_json(r);
            }
            let mut header = vec!["R".to_string()];
            header.extend(reports.iter().map(|(n, _)| format!("normalized_{n}")));
            let mut table = Table {
                header,
                rows: Vec::new(),
            };
            for (i, &r) in grid.iter().enumerate() {
                let mut row = vec![fmt_num(r)];
                row.extend(reports.iter().map(|(_, r)| fmt_num(r.normalized[i].1)));
                table.push(row);
            }
            Ok(Output { json, table })
        }
        OrigamiCmd::Check { surface, l } => {
            let s = load_surface(surface)?;
            let r = hypothesis_check_surface(&s, *l, &ctx.limits)?;
            let json = json!({
                "max_len": num(r.max_len),
                "quadratic_growth": r.t1_ratios.iter().map(|&(l, n, q)| json!({"L": num(l), "count": n, "ratio": num(q)})).collect::<Vec<_>>(),
                "ratio_spread": num(r.t1_spread),
                "strongly_connected": r.t2_connected,
                "arithmeticity": arithmeticity_json(&r.t3),
            });
            let table = summary_table(&[
                ("ratio_spread", fmt_num(r.t1_spread)),
                ("strongly_connected", r.t2_connected.to_string()),
                ("non_arithmetic", (!r.t3.is_arithmetic).to_string()),
            ]);
            Ok(Output { json, table })
        }
    }
}
