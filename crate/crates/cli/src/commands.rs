//! The subcommands. Each returns a [`Report`]; artifact files are written
//! here, the report itself by the caller.

use std::fs;
use std::path::{Path, PathBuf};

use ndf_core::bounds::{bounds_report, proposition1_plan};
use ndf_core::flow::{flow_displacement_bound_check, random_boundary_polynomial, FlowIntegrator};
use ndf_core::mz::{mz_sweep, MZOptions, MZReport};
use ndf_core::optimizer::{auto_extend, extend_design, trace_csv, InitStrategy};
use ndf_core::partition::equal_area_partition;
use ndf_core::pointset::{LoadedPointSet, PointSet};
use ndf_core::residual::certify_points;
use ndf_core::{Error, Point, SphereDim};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{write_atomic, Report};
use crate::CliError;

/// Flow traces whose mean drops by more than this per step are reported as
/// failures.
pub const MEAN_DECREASE_TOL: f64 = 1e-9;

pub fn load_points(path: &Path) -> Result<LoadedPointSet, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    PointSet::parse(&text).map_err(|e| match e {
        Error::Format { .. } => CliError::usage(format!("{}:{e}", path.display())),
        other => other.into(),
    })
}

fn dimension(flag: Option<usize>, from_file: Option<SphereDim>) -> Result<SphereDim, CliError> {
    match (flag, from_file) {
        (Some(d), Some(f)) if d != f.get() => Err(CliError::usage(format!(
            "--dim {d} disagrees with the file dimension {}",
            f.get()
        ))),
        (_, Some(f)) => Ok(f),
        (Some(d), None) => Ok(SphereDim::new(d)?),
        (None, None) => Ok(SphereDim::TWO),
    }
}

fn envelope(command: &str, cfg: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert(
        "config".into(),
        serde_json::to_value(cfg).expect("serializable config"),
    );
    m
}

pub struct VerifyArgs {
    pub file: PathBuf,
    pub degree: Option<usize>,
    pub dim: Option<usize>,
}

pub fn verify(args: &VerifyArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let loaded = load_points(&args.file)?;
    let set = &loaded.set;
    let dim = dimension(args.dim, Some(set.dim))?;
    let t = args
        .degree
        .or(set.degree)
        .ok_or_else(|| CliError::usage("no --degree given and the file header has none"))?;
    let cert = certify_points(t, dim, &set.points, cfg.tol)?;
    let positive = cert.is_design == Some(true);
    let mut m = envelope("verify", cfg);
    m.insert("file".into(), json!(args.file));
    m.insert("max_correction".into(), json!(loaded.max_correction));
    m.insert(
        "certificate".into(),
        serde_json::to_value(&cert).expect("serializable"),
    );
    Ok(Report {
        json: Value::Object(m),
        rows: None,
        positive,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointCount {
    Fixed(usize),
    /// Grow from the heuristic floor up to the existence bound, capped.
    Auto {
        cap: usize,
    },
}

pub struct ExtendArgs {
    pub fixed: Option<PathBuf>,
    pub degree: usize,
    pub dim: Option<usize>,
    pub count: PointCount,
    pub init: Option<InitStrategy>,
    pub out: PathBuf,
    pub trace: bool,
}

pub fn extend(args: &ExtendArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let loaded = args.fixed.as_deref().map(load_points).transpose()?;
    let dim = dimension(args.dim, loaded.as_ref().map(|l| l.set.dim))?;
    let fixed: Vec<Point> = loaded
        .as_ref()
        .map(|l| l.set.points.clone())
        .unwrap_or_default();
    let mut opts = cfg.extend_options();
    opts.record_trace = args.trace;
    opts.init_strategy = args.init.unwrap_or(if dim == SphereDim::TWO {
        InitStrategy::EqualAreaCenters
    } else {
        InitStrategy::Spiral
    });
    let t = args.degree;
    let mut res = match args.count {
        PointCount::Fixed(n) => extend_design(t, dim, &fixed, n, &opts)?,
        PointCount::Auto { cap } => auto_extend(t, dim, &fixed, cap, &cfg.constants(dim)?, &opts)?,
    };
    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", args.out.display())))?;
    let free_path = args.out.join("free.txt");
    let union_path = args.out.join("union.txt");
    let result_path = args.out.join("result.json");
    let free = PointSet::new(dim, res.free_points.clone())?.with_degree(t);
    let union = PointSet::new(dim, res.union())?.with_degree(t);
    write_atomic(&free_path, &free.to_text())?;
    write_atomic(&union_path, &union.to_text())?;
    let mut files = json!({
        "free": free_path,
        "union": union_path,
        "result": result_path,
    });
    if let Some(rows) = res.trace.take() {
        let trace_path = args.out.join("trace.csv");
        write_atomic(&trace_path, &trace_csv(&rows))?;
        files["trace"] = json!(trace_path);
    }
    let mut full = envelope("extend", cfg);
    full.insert(
        "max_correction".into(),
        json!(loaded.as_ref().map(|l| l.max_correction)),
    );
    full.insert(
        "result".into(),
        serde_json::to_value(&res).expect("serializable"),
    );
    let mut text = serde_json::to_string_pretty(&Value::Object(full)).expect("serializable");
    text.push('\n');
    write_atomic(&result_path, &text)?;

    let mut m = envelope("extend", cfg);
    m.insert("degree".into(), json!(t));
    m.insert("dim".into(), json!(dim.get()));
    m.insert("m".into(), json!(fixed.len()));
    m.insert("n".into(), json!(res.free_points.len()));
    m.insert("converged".into(), json!(res.converged));
    m.insert("iterations_used".into(), json!(res.iterations_used));
    m.insert("restarts_used".into(), json!(res.restarts_used));
    m.insert("warnings".into(), json!(res.warnings));
    m.insert(
        "certificate".into(),
        serde_json::to_value(&res.certificate).expect("serializable"),
    );
    m.insert("files".into(), files);
    Ok(Report {
        json: Value::Object(m),
        rows: None,
        positive: res.converged,
    })
}

pub struct BoundsArgs {
    pub dim: Option<usize>,
    pub degree: usize,
    pub t1: Option<usize>,
    pub m: usize,
}

pub fn bounds(args: &BoundsArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let dim = dimension(args.dim, None)?;
    let consts = cfg.constants(dim)?;
    let report = bounds_report(args.degree, args.t1, args.m, dim, &consts)?;
    let plan = args
        .t1
        .and_then(|t1| proposition1_plan(t1, args.degree, dim).ok());
    let mut m = envelope("bounds", cfg);
    m.insert(
        "report".into(),
        serde_json::to_value(&report).expect("serializable"),
    );
    m.insert(
        "proposition1_plan".into(),
        serde_json::to_value(&plan).expect("serializable"),
    );
    Ok(Report {
        json: Value::Object(m),
        rows: None,
        positive: true,
    })
}

pub struct PartitionArgs {
    pub dim: Option<usize>,
    pub n: usize,
}

pub fn partition(args: &PartitionArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let dim = dimension(args.dim, None)?;
    if dim != SphereDim::TWO {
        return Err(Error::UnsupportedDimension {
            d: dim.get(),
            what: "partitions",
        }
        .into());
    }
    let r = equal_area_partition(args.n)?;
    let cells: Vec<Value> = r
        .cells()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            json!({
                "index": i,
                "kind": c.kind,
                "theta": [c.theta.0, c.theta.1],
                "phi": [c.phi.0, c.phi.1],
                "area": c.area(),
                "diameter": c.diameter(),
            })
        })
        .collect();
    let area_sum: f64 = r.cells().iter().map(|c| c.area()).sum();
    let header = [
        "index", "kind", "theta0", "theta1", "phi0", "phi1", "area", "diameter",
    ]
    .map(String::from)
    .to_vec();
    let rows = r
        .cells()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let kind = serde_json::to_value(c.kind).expect("serializable");
            vec![
                i.to_string(),
                kind.as_str().unwrap_or_default().to_string(),
                format!("{:.17e}", c.theta.0),
                format!("{:.17e}", c.theta.1),
                format!("{:.17e}", c.phi.0),
                format!("{:.17e}", c.phi.1),
                format!("{:.17e}", c.area()),
                format!("{:.17e}", c.diameter()),
            ]
        })
        .collect();
    let mut m = envelope("partition", cfg);
    m.insert("n".into(), json!(r.len()));
    m.insert("norm".into(), json!(r.norm()));
    m.insert("area_sum".into(), json!(area_sum));
    m.insert("cells".into(), Value::Array(cells));
    Ok(Report {
        json: Value::Object(m),
        rows: Some((header, rows)),
        positive: true,
    })
}

pub struct FlowArgs {
    pub dim: Option<usize>,
    pub degree: usize,
    pub starts: usize,
    pub out: Option<PathBuf>,
}

pub fn flow_demo(args: &FlowArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let dim = dimension(args.dim, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p = random_boundary_polynomial(args.degree, dim, &mut rng)?;
    let starts: Vec<Point> = (0..args.starts)
        .map(|_| Point::random(dim, &mut rng))
        .collect();
    let trace = FlowIntegrator::new(cfg.r_d, cfg.flow_steps).run(&p, &starts)?;
    let displacement_ok = flow_displacement_bound_check(&trace, &starts);
    let decrease = trace.max_mean_decrease();
    let monotone = decrease <= MEAN_DECREASE_TOL;
    let header = vec!["s".to_string(), "mean_value".to_string()];
    let rows: Vec<Vec<String>> = trace
        .times
        .iter()
        .zip(&trace.mean_values)
        .map(|(s, v)| vec![format!("{s:.17e}"), format!("{v:.17e}")])
        .collect();
    let mut m = envelope("flow-demo", cfg);
    m.insert("degree".into(), json!(args.degree));
    m.insert("dim".into(), json!(dim.get()));
    m.insert("starts".into(), json!(args.starts));
    m.insert("terminal_time".into(), json!(trace.terminal_time()));
    m.insert("max_mean_decrease".into(), json!(decrease));
    m.insert("monotone".into(), json!(monotone));
    m.insert("displacement_within_bound".into(), json!(displacement_ok));
    m.insert("times".into(), json!(trace.times));
    m.insert("mean_values".into(), json!(trace.mean_values));
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
        let mut csv = header.join(",") + "\n";
        for r in &rows {
            csv.push_str(&r.join(","));
            csv.push('\n');
        }
        write_atomic(&dir.join("trace.csv"), &csv)?;
        let ends = PointSet::new(dim, trace.endpoints.clone())?;
        write_atomic(&dir.join("endpoints.txt"), &ends.to_text())?;
        let mut text = serde_json::to_string_pretty(&m).expect("serializable");
        text.push('\n');
        write_atomic(&dir.join("report.json"), &text)?;
    }
    Ok(Report {
        json: Value::Object(m),
        rows: Some((header, rows)),
        positive: monotone && displacement_ok,
    })
}

pub struct MzArgs {
    pub degree: usize,
    pub n: usize,
    pub cases: usize,
}

pub fn mz_check(args: &MzArgs, cfg: &RunConfig) -> Result<Report, CliError> {
    let r = equal_area_partition(args.n)?;
    let opts = MZOptions {
        r_d: cfg.r_d,
        quad_order: cfg.quad_order.unwrap_or(0),
        ..MZOptions::default()
    };
    let sweep = mz_sweep(&r, args.degree, args.cases, cfg.seed, &opts)?;
    let header = MZReport::CSV_HEADER.split(',').map(String::from).collect();
    let rows = sweep
        .cases
        .iter()
        .map(|c| c.csv_row().split(',').map(String::from).collect())
        .collect();
    let mut m = envelope("mz-check", cfg);
    m.insert(
        "sweep".into(),
        serde_json::to_value(&sweep).expect("serializable"),
    );
    Ok(Report {
        json: Value::Object(m),
        rows: Some((header, rows)),
        positive: sweep.all_pass,
    })
}
