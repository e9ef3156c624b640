//! Scenario-driven front end.
//!
//! Exit codes: 0 all checks and assertions passed, 1 an assertion or check
//! failed, 2 input error (arguments, files, schema), 3 internal error.

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};
use fieldindex_core::flow::FlowConfig;
use fieldindex_core::index::{index_at_zero, vector_field_index, IndexConfig, Region};
use fieldindex_core::scenario::{run_scenario, CheckStatus, Report, Scenario, ScenarioError};
use fieldindex_core::{detect_cycles, export, find_zeros, parse_field, Surface, SurfaceSpec, Vec2};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fieldindex",
    version,
    about = "Topological indices of planar vector fields: zeros, blocks, winding numbers, and scenario verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and print its report.
    Run {
        /// Path to a scenario JSON file.
        scenario: PathBuf,
        /// Write the full report JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Print only the verdict lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Run every `*.json` scenario in a directory.
    Batch {
        dir: PathBuf,
        /// Write one report per scenario into this directory.
        #[arg(long)]
        report_dir: Option<PathBuf>,
    },
    /// Compute an index: either of an isolated zero (--at/--radius) or of
    /// the zeros enclosed by a region (--region).
    Index(IndexArgs),
    /// Scan a field for zeros on a surface.
    Zeros {
        #[arg(long)]
        field: String,
        #[arg(long)]
        surface: String,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
    },
    /// Detect cycles of a field from seed points.
    Cycles {
        #[arg(long)]
        field: String,
        #[arg(long)]
        surface: String,
        /// Seed points, e.g. "1,0;0.2,0.4".
        #[arg(long)]
        seeds: String,
        #[arg(long, default_value_t = 50.0)]
        t_budget: f64,
        /// Also write the cycle polylines as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Extract plot-ready CSV files from a report produced by `run`.
    Export {
        report: PathBuf,
        #[arg(long, default_value = "plot-data")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct IndexArgs {
    /// Field expression, e.g. "(-y, x)".
    #[arg(long)]
    field: String,
    /// Surface: "disk(cx,cy,r)", "annulus(cx,cy,ri,ro)", "window(x0,x1,h)",
    /// or a JSON surface object.
    #[arg(long)]
    surface: String,
    /// Isolated zero to probe, as "x,y"; needs --radius.
    #[arg(long)]
    at: Option<String>,
    /// Probe circle radius for --at.
    #[arg(long)]
    radius: Option<f64>,
    /// Region enclosing the zeros: "disk(cx,cy,r)", "annulus(cx,cy,ri,ro)",
    /// or "full" for the whole surface.
    #[arg(long)]
    region: Option<String>,
}

/// Errors that must map to exit code 2.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for InputError {}

fn input_err<T>(message: impl Into<String>) -> anyhow::Result<T> {
    Err(anyhow::Error::new(InputError(message.into())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| {
                c.downcast_ref::<InputError>().is_some()
                    || c.downcast_ref::<ScenarioError>()
                        .map(|s| !matches!(s, ScenarioError::Io(_)))
                        .unwrap_or(false)
                    || c.downcast_ref::<std::io::Error>().is_some()
            }) {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run {
            scenario,
            report,
            quiet,
        } => cmd_run(&scenario, report.as_deref(), quiet),
        Command::Batch { dir, report_dir } => cmd_batch(&dir, report_dir.as_deref()),
        Command::Index(args) => cmd_index(args),
        Command::Zeros {
            field,
            surface,
            resolution,
        } => cmd_zeros(&field, &surface, resolution),
        Command::Cycles {
            field,
            surface,
            seeds,
            t_budget,
            csv,
        } => cmd_cycles(&field, &surface, &seeds, t_budget, csv.as_deref()),
        Command::Export { report, out } => cmd_export(&report, &out),
    }
}

fn report_exit(report: &Report) -> ExitCode {
    if report.has_errors() {
        ExitCode::from(3)
    } else if report.overall_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn print_report_lines(report: &Report) {
    for check in &report.checks {
        let status = match check.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Flagged => "FLAG",
            CheckStatus::Error => "ERROR",
        };
        let notes = if check.notes.is_empty() {
            String::new()
        } else {
            format!("  [{}]", check.notes.join("; "))
        };
        println!("{:<18} {}{}", check.kind.name(), status, notes);
    }
    for failure in &report.failed_expectations {
        println!("expected           FAIL  [{failure}]");
    }
    println!(
        "{:<18} {}",
        "overall",
        if report.overall_pass { "PASS" } else { "FAIL" }
    );
}

fn cmd_run(path: &Path, report_path: Option<&Path>, quiet: bool) -> anyhow::Result<ExitCode> {
    let scenario = Scenario::from_path(path)
        .with_context(|| format!("loading scenario {}", path.display()))?;
    let report = run_scenario(&scenario)?;
    if !quiet {
        println!("scenario: {}", report.scenario);
    }
    print_report_lines(&report);
    if let Some(out) = report_path {
        let json = serde_json::to_string_pretty(&report)?;
        std::fs::write(out, json).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(report_exit(&report))
}

fn cmd_batch(dir: &Path, report_dir: Option<&Path>) -> anyhow::Result<ExitCode> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return input_err(format!("no scenario files in {}", dir.display()));
    }

    // scenarios are independent; run them on worker threads and report in
    // deterministic path order
    let results: Vec<anyhow::Result<Report>> = std::thread::scope(|scope| {
        let handles: Vec<_> = paths
            .iter()
            .map(|p| {
                scope.spawn(move || {
                    let scenario = Scenario::from_path(p)
                        .with_context(|| format!("loading {}", p.display()))?;
                    Ok(run_scenario(&scenario)?)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });

    let mut exit = ExitCode::SUCCESS;
    let mut worst = 0u8;
    for (path, result) in paths.iter().zip(results) {
        match result {
            Ok(report) => {
                println!(
                    "{}: {}",
                    path.file_name().unwrap_or_default().to_string_lossy(),
                    if report.overall_pass { "PASS" } else { "FAIL" }
                );
                if let Some(dir) = report_dir {
                    std::fs::create_dir_all(dir)?;
                    let name = path
                        .file_stem()
                        .unwrap_or_default()
                        .to_string_lossy()
                        .to_string();
                    let out = dir.join(format!("{name}.report.json"));
                    std::fs::write(&out, serde_json::to_string_pretty(&report)?)?;
                }
                let code = if report.has_errors() {
                    3
                } else if report.overall_pass {
                    0
                } else {
                    1
                };
                worst = worst.max(code);
            }
            Err(e) => return Err(e),
        }
    }
    if worst > 0 {
        exit = ExitCode::from(worst);
    }
    Ok(exit)
}

fn parse_surface_arg(text: &str) -> anyhow::Result<Surface> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let spec: SurfaceSpec = serde_json::from_str(trimmed)
            .map_err(|e| anyhow::Error::new(InputError(format!("bad surface JSON: {e}"))))?;
        return Ok(spec.build()?);
    }
    let (kind, args) = trimmed
        .split_once('(')
        .and_then(|(k, rest)| rest.strip_suffix(')').map(|a| (k.trim(), a)))
        .ok_or_else(|| InputError(format!("cannot parse surface '{trimmed}'")))
        .map_err(anyhow::Error::new)?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| anyhow::Error::new(InputError(format!("bad surface number: {e}"))))?;
    let surface = match (kind, nums.as_slice()) {
        ("disk", [cx, cy, r]) => Surface::disk(Vec2::new(*cx, *cy), *r)?,
        ("annulus", [cx, cy, ri, ro]) => Surface::annulus(Vec2::new(*cx, *cy), *ri, *ro)?,
        ("window", [x0, x1, h]) => Surface::halfplane_window(*x0, *x1, *h)?,
        _ => {
            return input_err(format!(
                "unknown surface '{kind}' with {} parameters",
                nums.len()
            ))
        }
    };
    Ok(surface)
}

fn parse_point_arg(text: &str) -> anyhow::Result<Vec2> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| anyhow::Error::new(InputError(format!("bad point '{text}': {e}"))))?;
    if parts.len() != 2 {
        return input_err(format!("point '{text}' must have two coordinates"));
    }
    Ok(Vec2::new(parts[0], parts[1]))
}

fn parse_field_arg(text: &str) -> anyhow::Result<fieldindex_core::FieldExpr> {
    parse_field(text).map_err(|e| anyhow::Error::new(InputError(format!("bad field: {e}"))))
}

fn index_result_json(r: &fieldindex_core::index::IndexResult) -> serde_json::Value {
    serde_json::json!({
        "value": r.value,
        "tau": r.tau,
        "min_modulus": r.min_modulus,
        "contour_points": r
            .contours
            .iter()
            .map(|c| c.vertices.iter().map(|p| vec![p.x, p.y]).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

fn cmd_index(args: IndexArgs) -> anyhow::Result<ExitCode> {
    let field = parse_field_arg(&args.field)?;
    let surface = parse_surface_arg(&args.surface)?;
    let index_cfg = IndexConfig::default();
    let result = match (&args.at, &args.region) {
        (Some(at), None) => {
            let p = parse_point_arg(at)?;
            let Some(radius) = args.radius else {
                return input_err("--at requires --radius");
            };
            index_at_zero(&field, p, radius, &index_cfg)?
        }
        (None, Some(region_text)) => {
            let region = match region_text.trim() {
                "full" => Region::full_surface(&surface),
                other => parse_region_arg(other)?,
            };
            vector_field_index(
                &field,
                &surface,
                &region,
                &FlowConfig::default(),
                &index_cfg,
            )?
        }
        _ => return input_err("use exactly one of --at (with --radius) or --region"),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&index_result_json(&result))?
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_region_arg(text: &str) -> anyhow::Result<Region> {
    let (kind, args) = text
        .split_once('(')
        .and_then(|(k, rest)| rest.strip_suffix(')').map(|a| (k.trim(), a)))
        .ok_or_else(|| InputError(format!("cannot parse region '{text}'")))
        .map_err(anyhow::Error::new)?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| anyhow::Error::new(InputError(format!("bad region number: {e}"))))?;
    match (kind, nums.as_slice()) {
        ("disk", [cx, cy, r]) => Ok(Region::disk(Vec2::new(*cx, *cy), *r, 128)),
        ("annulus", [cx, cy, ri, ro]) => Ok(Region::annulus(Vec2::new(*cx, *cy), *ri, *ro, 128)),
        _ => input_err(format!("unknown region '{kind}'")),
    }
}

fn cmd_zeros(field: &str, surface: &str, resolution: usize) -> anyhow::Result<ExitCode> {
    let field = parse_field_arg(field)?;
    let surface = parse_surface_arg(surface)?;
    let scan = find_zeros(&field, &surface, resolution)?;
    let json = serde_json::json!({
        "zeros": scan
            .zeros
            .iter()
            .map(|z| serde_json::json!({
                "point": [z.point.x, z.point.y],
                "residual": z.residual,
                "cell": [z.cell.0, z.cell.1],
            }))
            .collect::<Vec<_>>(),
        "suspect_cells": scan
            .suspect_cells
            .iter()
            .map(|&(ix, iy)| {
                let c = scan.grid.cell_center(ix, iy);
                serde_json::json!([ix, iy, c.x, c.y])
            })
            .collect::<Vec<_>>(),
        "grid": scan.grid,
    });
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_cycles(
    field: &str,
    surface: &str,
    seeds: &str,
    t_budget: f64,
    csv: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let field = parse_field_arg(field)?;
    let surface = parse_surface_arg(surface)?;
    let seeds: Vec<Vec2> = seeds
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_point_arg)
        .collect::<Result<_, _>>()?;
    if seeds.is_empty() {
        return input_err("--seeds must name at least one point");
    }
    let cycles = detect_cycles(&field, &surface, &seeds, t_budget, &FlowConfig::default());
    let json = serde_json::json!({
        "cycle_count": cycles.len(),
        "cycles": cycles
            .iter()
            .map(|c| serde_json::json!({
                "period": c.period,
                "closure_gap": c.closure_gap,
                "points": c.points.iter().map(|p| vec![p.x, p.y]).collect::<Vec<_>>(),
            }))
            .collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&json)?);
    if let Some(path) = csv {
        export::write_cycles_csv(path, &cycles)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_export(report_path: &Path, out: &Path) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(report_path)
        .with_context(|| format!("reading {}", report_path.display()))?;
    let report: Report = serde_json::from_str(&text)
        .map_err(|e| anyhow::Error::new(InputError(format!("bad report JSON: {e}"))))?;
    let written = export::export_report_sections(&report, out)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    if written.is_empty() {
        println!("report has no exportable sections");
    }
    Ok(ExitCode::SUCCESS)
}
