//! Command-line surface. Exit codes: 0 all checks passed, 1 a check
//! failed (witnesses are in the printed report), 2 input or usage error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::engine::{detect_origin, generate, verify_reduction_isomorphism};
use crate::growth::{
    check_growth_sandwich, estimate_dimensions, growth_function, safe_radius, GrowthCurve,
};
use crate::invariants::{
    check_bounded_geometry, check_cell_volume, check_cells_lemma, check_diameters,
    check_edge_boundary, classify_geometry, deep_parameters, GeometryReport,
};
use crate::io::{export_graph, model_to_json, parse_model, render_report, ExportFormat};
use crate::model::{builtin, model_parameters, validate, CellModel, BUILTIN_NAMES};
use crate::report::TheoremReport;
use crate::K_MAX_DEFAULT;

#[derive(Parser)]
#[command(
    name = "selfsim",
    version,
    about = "Build finite approximations of self-similar graphs and verify their structure",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model document against the cell axioms
    Validate {
        /// Builtin name, a model file path, or '-' for stdin
        model: String,
    },
    /// Build G_n and print a construction summary (or dump with --format)
    Generate {
        model: String,
        #[arg(long)]
        level: usize,
        /// dot, edges or json
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Model parameters with a deep census
    Params {
        model: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Run theorem checkers
    Check {
        model: String,
        #[arg(long, default_value_t = 4)]
        level: usize,
        /// all, boundary, volume, diameter, geometry, origin, selfsim,
        /// sandwich or cells
        #[arg(long, default_value = "all")]
        theorem: String,
    },
    /// Exact growth curve from one center
    Growth {
        model: String,
        #[arg(long)]
        level: usize,
        /// 'auto' (max safe radius, smallest id on ties) or a vertex id
        #[arg(long, default_value = "auto")]
        center: String,
        /// Write the curve as CSV to this path
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Growth dimension estimate against log mu / log nu
    Dim {
        model: String,
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = 0.1)]
        tol: f64,
    },
    /// Dump G_n in dot, edges or json form
    Export {
        model: String,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_model(source: &str, err: &mut dyn Write) -> Option<CellModel> {
    if BUILTIN_NAMES.contains(&source) {
        return builtin(source).ok();
    }
    let text = if source == "-" {
        let mut buf = String::new();
        if let Err(e) = std::io::Read::read_to_string(&mut std::io::stdin(), &mut buf) {
            let _ = writeln!(err, "error: cannot read stdin: {e}");
            return None;
        }
        buf
    } else {
        match std::fs::read_to_string(source) {
            Ok(t) => t,
            Err(e) => {
                let _ = writeln!(err, "error: cannot read '{source}': {e}");
                return None;
            }
        }
    };
    match parse_model(&text) {
        Ok(m) => Some(m),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            None
        }
    }
}

fn emit(out: &mut dyn Write, path: &Option<PathBuf>, text: &str, err: &mut dyn Write) -> i32 {
    match path {
        Some(p) => match std::fs::write(p, text) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: cannot write '{}': {e}", p.display());
                2
            }
        },
        None => {
            let _ = out.write_all(text.as_bytes());
            0
        }
    }
}

#[derive(Serialize)]
struct GenerateSummary {
    vertices: usize,
    edges: usize,
    boundary: Vec<usize>,
    level_histogram: Vec<(usize, usize)>,
    cells_per_level: Vec<(usize, usize)>,
}

#[derive(Serialize, Default)]
struct CheckPayload {
    reports: Vec<TheoremReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classification: Option<GeometryReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    origin: Option<crate::engine::OriginInfo>,
}

fn theorem_line(out: &mut dyn Write, rep: &TheoremReport) {
    let verdict = if !rep.applicable {
        "N/A "
    } else if rep.pass {
        "PASS"
    } else {
        "FAIL"
    };
    let _ = writeln!(out, "[{verdict}] {} ({})", rep.theorem, rep.model);
}

fn run_check(
    m: &CellModel,
    level: usize,
    theorem: &str,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let mut payload = CheckPayload::default();
    let deep = level.max(3);
    let run = |name: &str| theorem == "all" || theorem == name;
    let mut usage_error: Option<String> = None;

    macro_rules! push {
        ($res:expr) => {
            match $res {
                Ok(rep) => payload.reports.push(rep),
                Err(e) => {
                    usage_error = Some(e.to_string());
                }
            }
        };
    }

    if ![
        "all", "boundary", "volume", "diameter", "geometry", "origin", "selfsim", "sandwich",
        "cells",
    ]
    .contains(&theorem)
    {
        let _ = writeln!(err, "error: unknown theorem '{theorem}'");
        return 2;
    }

    if run("selfsim") {
        push!(verify_reduction_isomorphism(m, level.max(2)));
    }
    if run("boundary") {
        push!(check_edge_boundary(m, level));
    }
    if run("volume") {
        push!(check_cell_volume(m, level));
    }
    if run("diameter") {
        push!(check_diameters(m, level));
    }
    if run("cells") {
        push!(check_cells_lemma(m, deep));
    }
    if run("geometry") {
        push!(check_bounded_geometry(m, deep));
        match classify_geometry(m, deep) {
            Ok(report) => payload.classification = Some(report),
            Err(e) => usage_error = Some(e.to_string()),
        }
    }
    if run("origin") {
        match detect_origin(m, deep, K_MAX_DEFAULT) {
            Ok(info) => payload.origin = Some(info),
            Err(e) => usage_error = Some(e.to_string()),
        }
    }
    if run("sandwich") {
        let hi = level.saturating_sub(3).max(1);
        push!(check_growth_sandwich(m, level.max(4), 1..=hi));
    }

    if let Some(e) = usage_error {
        let _ = writeln!(err, "error: {e}");
        return 2;
    }

    for rep in &payload.reports {
        theorem_line(out, rep);
    }
    if let Some(cls) = &payload.classification {
        let label = cls
            .class
            .map(|c| c.to_string())
            .unwrap_or_else(|| "inapplicable (no constant inner degree)".to_string());
        let _ = writeln!(out, "[INFO] classification: {label}");
    }
    if let Some(origin) = &payload.origin {
        let what = match &origin.kind {
            crate::engine::OriginKind::Vertex { address, .. } => {
                format!("origin vertex at address {address}")
            }
            crate::engine::OriginKind::Cell { slot_path } => {
                format!("origin cell at slot path {slot_path:?}")
            }
        };
        let _ = writeln!(
            out,
            "[INFO] origin: {what} (power {})",
            origin.stabilizing_power
        );
    }
    let all_ok = payload.reports.iter().all(|r| r.ok());
    let text = render_report("check", m.name(), level, &payload);
    let _ = out.write_all(text.as_bytes());
    if all_ok {
        0
    } else {
        1
    }
}

/// Entry point used by both `main` and the tests; returns the exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return 2;
        }
    };
    match cli.command {
        Command::Validate { model } => {
            let Some(m) = load_model(&model, err) else {
                return 2;
            };
            let report = validate(&m);
            let pass = report.pass;
            let text = render_report("validate", m.name(), 1, &report);
            let _ = out.write_all(text.as_bytes());
            if pass {
                0
            } else {
                1
            }
        }
        Command::Generate {
            model,
            level,
            format,
            out: out_path,
        } => {
            let Some(m) = load_model(&model, err) else {
                return 2;
            };
            let hg = match generate(&m, level) {
                Ok(hg) => hg,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return 2;
                }
            };
            match format {
                Some(fmt) => {
                    let fmt: ExportFormat = match fmt.parse() {
                        Ok(f) => f,
                        Err(e) => {
                            let _ = writeln!(err, "error: {e}");
                            return 2;
                        }
                    };
                    emit(out, &out_path, &export_graph(&hg, fmt), err)
                }
                None => {
                    let mut level_histogram = vec![0usize; level + 1];
                    for v in 0..hg.graph().vertex_count() {
                        level_histogram[hg.level(v)] += 1;
                    }
                    let cells_per_level = (1..=level)
                        .map(|k| (k, hg.cells().iter().filter(|c| c.level == k).count()))
                        .collect();
                    let summary = GenerateSummary {
                        vertices: hg.graph().vertex_count(),
                        edges: hg.graph().edge_count(),
                        boundary: hg.boundary().to_vec(),
                        level_histogram: level_histogram.into_iter().enumerate().collect(),
                        cells_per_level,
                    };
                    emit(
                        out,
                        &out_path,
                        &render_report("generate", m.name(), level, &summary),
                        err,
                    )
                }
            }
        }
        Command::Params { model, depth } => {
            let Some(m) = load_model(&model, err) else {
                return 2;
            };
            match deep_parameters(&m, depth) {
                Ok(params) => {
                    let text = render_report("params", m.name(), depth, &params);
                    let _ = out.write_all(text.as_bytes());
                    let _ = out.write_all(model_to_json(&m).as_bytes());
                    0
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    2
                }
            }
        }
        Command::Check {
            model,
            level,
            theorem,
        } => {
            let Some(m) = load_model(&model, err) else {
                return 2;
            };
            run_check(&m, level, &theorem, out, err)
        }
        Command::Growth {
            model,
            level,
            center,
            csv,
        } => {
            let Some(m) = load_model(&model, err) else {
                return 2;
            };
            let hg = match generate(&m, level) {
                Ok(hg) => hg,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return 2;
                }
            };
            let center_id = if center == "auto" {
                // Maximal safe radius, smallest id on ties.
                let mut best = (0usize, 0usize);
                for v in 0..hg.graph().vertex_count() {
                    let sr = safe_radius(&hg, v);
                    if !sr.on_boundary && sr.radius > best.1 {
                        best = (v, sr.radius);
                    }
                }
                best.0
            } else {
                match center.parse::<usize>() {
                    Ok(v) if v < hg.graph().vertex_count() => v,
                    _ => {
                        let _ = writeln!(err, "error: invalid center '{center}'");
                        return 2;
                    }
                }
            };
            let curve: GrowthCurve = match growth_function(&hg, center_id) {
                Ok(c) => c,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return 2;
                }
            };
            if let Some(path) = &csv {
                let code = emit(
                    out,
                    &Some(path.clone()),
                    &crate::io::write_growth_csv(&curve),
                    err,
                );
                if code != 0 {
                    return code;
                }
            }
            let text = render_report("growth", m.name(), level, &curve);
            let _ = out.write_all(text.as_bytes());
            0
        }
        Command::Dim { model, level, tol } => {
            let Some(m) = load_model(&model, err) else {
                return 2;
            };
            let hg = match generate(&m, level) {
                Ok(hg) => hg,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return 2;
                }
            };
            match estimate_dimensions(&hg) {
                Ok(est) => {
                    let within = est.deviation <= tol;
                    if let Ok(p) = model_parameters(&m) {
                        if p.inner_degree != Some(p.theta - 1) {
                            let _ = writeln!(
                                out,
                                "[INFO] geometry not bounded; comparison to the predicted dimension is advisory"
                            );
                        }
                    }
                    let _ = writeln!(
                        out,
                        "[{}] dimension: slopes ({:.4}, {:.4}) vs predicted {:.4}, deviation {:.4} (tol {tol})",
                        if within { "PASS" } else { "FAIL" },
                        est.slope_lower,
                        est.slope_upper,
                        est.dim_predicted,
                        est.deviation
                    );
                    let text = render_report("dim", m.name(), level, &est);
                    let _ = out.write_all(text.as_bytes());
                    if within {
                        0
                    } else {
                        1
                    }
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    2
                }
            }
        }
        Command::Export {
            model,
            level,
            format,
            out: out_path,
        } => {
            let Some(m) = load_model(&model, err) else {
                return 2;
            };
            let fmt: ExportFormat = match format.parse() {
                Ok(f) => f,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return 2;
                }
            };
            match generate(&m, level) {
                Ok(hg) => emit(out, &out_path, &export_graph(&hg, fmt), err),
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    2
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_to_string(args: &[&str]) -> (i32, String, String) {
        let argv: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(&argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn validate_builtin_exits_zero() {
        let (code, out, _) = run_to_string(&["selfsim", "validate", "sierpinski"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"pass\": true"));
    }

    #[test]
    fn unknown_subcommand_and_bad_args_exit_two() {
        let (code, _, _) = run_to_string(&["selfsim", "frobnicate"]);
        assert_eq!(code, 2);
        let (code, _, err) = run_to_string(&["selfsim", "generate", "sierpinski", "--level", "99"]);
        assert_eq!(code, 2);
        assert!(err.contains("cap"));
        let (code, _, _) = run_to_string(&["selfsim", "validate", "no_such_model.json"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn check_geometry_of_diamond_open_reports_class() {
        let (code, out, _) = run_to_string(&[
            "selfsim",
            "check",
            "diamond_open",
            "--level",
            "4",
            "--theorem",
            "geometry",
        ]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("locally-finite-unbounded"));
    }

    #[test]
    fn check_all_on_line_level_4() {
        let (code, out, err) = run_to_string(&["selfsim", "check", "line", "--level", "4"]);
        assert_eq!(code, 0, "out:\n{out}\nerr:\n{err}");
        assert!(out.contains("[PASS] reduction-self-similarity"));
    }

    #[test]
    fn unknown_theorem_is_usage_error() {
        let (code, _, err) = run_to_string(&["selfsim", "check", "line", "--theorem", "volume2"]);
        assert_eq!(code, 2);
        assert!(err.contains("unknown theorem"));
    }

    #[test]
    fn export_edges_to_stdout() {
        let (code, out, _) = run_to_string(&[
            "selfsim", "export", "line", "--level", "1", "--format", "edges",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out, "0 1\n1 2\n");
    }

    #[test]
    fn dim_on_the_line_passes() {
        let (code, out, _) =
            run_to_string(&["selfsim", "dim", "line", "--level", "7", "--tol", "0.1"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("[PASS] dimension"));
    }

    #[test]
    fn growth_auto_center_writes_csv() {
        let dir = std::env::temp_dir().join("selfsim-test-growth");
        std::fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("curve.csv");
        let (code, out, err) = run_to_string(&[
            "selfsim",
            "growth",
            "line",
            "--level",
            "5",
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "out:\n{out}\nerr:\n{err}");
        let text = std::fs::read_to_string(&csv).unwrap();
        assert!(text.starts_with("r,volume\n"));
        // Midpoint of the level-5 path: V(r) = 4r + 2 up to radius 15.
        assert!(text.lines().count() >= 16);
        std::fs::remove_file(&csv).unwrap();
    }
}
