//! Command-line front end: experiment configs, subcommands and artifacts.
//!
//! Each subcommand builds its artifacts in memory, prints the one matching
//! `--format` to standard output and, when an output directory is set, writes
//! all of them there atomically. Every record carries the run seed and the
//! config digest, and floats are printed with 17 significant digits.

mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::dynamics::{
    attractor, classify_boundedness, denjoy_wolff, fixed_point_search, iterate, probe_trace, semigroup_attractor,
    semigroup_orbit, AttractorEstimate, Boundedness, OrbitTrace, SelfMap,
};
use crate::exec::map_slice;
use crate::geometry::Vector;
use crate::horoballs::{horoball_grid, HoroballSpec};
use crate::metrics::{MetricInstance, MetricSpace};
use crate::verify::{run_suite, CheckContext, ExtraInstance, SUITES};

pub use config::{interior_points, point, ExperimentConfig, HoroballConfig, OutputConfig, SeedPolicy};
pub use output::{coord_columns, fmt17, to_json, write_atomic, Table};

/// Exit status for unreadable or invalid configuration and usage errors.
pub const EXIT_CONFIG: i32 = 64;
/// Exit status for failures while computing or writing results.
pub const EXIT_NUMERIC: i32 = 70;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

const ORBIT_COLUMNS: &str = "CSV columns: seed (index into the seed list), step, time (equal to step for maps), \
x1..xn (point coordinates), d_to_start (distance to the first point), step_d (distance to the next point, \
empty on the last row).";

#[derive(Debug, Parser)]
#[command(name = "hdlab", version, about = "Hilbert-metric geometry and nonexpansive dynamics experiments")]
#[command(after_help = "Environment: HD_THREADS caps the number of worker threads.\n\
Exit status: 0 success or all checks pass, 1 check violation, 2 inconclusive, 64 bad configuration, 70 numeric failure.")]
pub struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for artifacts; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Format printed to standard output.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance between two points.
    #[command(after_help = "CSV columns: distance, precision_warning (1 when a point is near the boundary).")]
    Dist(DistArgs),
    /// Orbits of the configured map, or of the semigroup on its time grid.
    #[command(after_help = ORBIT_COLUMNS)]
    Orbit,
    /// Omega-limit clusters, Denjoy-Wolff point or fixed point of the map.
    #[command(after_help = "CSV columns: cluster, x1..xn (representative), multiplicity, n_sources, location.")]
    Attractor,
    /// Horofunction bracket and horoball membership on a grid.
    #[command(after_help = "CSV columns: x1..xn (chart coordinates), horofunction_lo, horofunction_hi, member (0/1).")]
    Horoball,
    /// Skeleton and dense-time attractors of the semigroup, and its orbits.
    #[command(after_help = ORBIT_COLUMNS)]
    Semigroup,
    /// Run a named property suite.
    #[command(after_help = "Suites: condition-C, axiom5, kobayashi, axiom2star, a3prime, axiom4, wolff-denjoy, \
attractor-inclusions, semigroup-attractor, nonexpansive, horoballs, all.\n\
CSV columns: check_name, instance, negative_control, n_samples, n_violations, worst_margin, tolerance, verdict.")]
    Verify {
        suite: String,
    },
}

#[derive(Debug, Args)]
pub struct DistArgs {
    /// First point, comma-separated coordinates (default: `points[0]`).
    #[arg(allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Second point (default: `points[1]`).
    #[arg(allow_hyphen_values = true)]
    pub y: Option<String>,
}

/// What a command produced: named artifacts and the exit status.
struct Outcome {
    json: Value,
    csv: Option<Table>,
    stem: &'static str,
    default_format: Format,
    code: i32,
}

/// Parses `args` and runs; usage errors exit with [`EXIT_CONFIG`].
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            code
        }
    }
}

/// Runs a parsed command line and returns the exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "hdlab: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Command::Dist(args) = &cli.command {
        for (slot, arg) in [(0, &args.x), (1, &args.y)] {
            if let Some(text) = arg {
                let coords = parse_coords(text)?;
                if cfg.points.len() <= slot {
                    cfg.points.resize(slot + 1, Vec::new());
                }
                cfg.points[slot] = coords;
            }
        }
    }
    let digest = cfg.digest();
    let outcome = match &cli.command {
        Command::Dist(_) => dist(&cfg)?,
        Command::Orbit => orbit(&cfg)?,
        Command::Attractor => attractor_cmd(&cfg)?,
        Command::Horoball => horoball(&cfg)?,
        Command::Semigroup => semigroup(&cfg)?,
        Command::Verify { suite } => verify(&cfg, &digest, suite)?,
    };
    let mut json = outcome.json;
    if let Value::Object(map) = &mut json {
        map.insert("seed".into(), json!(cfg.seed));
        map.insert("config_digest".into(), json!(digest));
    }
    let json_text = to_json(&json);
    let csv_text = outcome.csv.as_ref().map(Table::to_csv);
    if let Some(dir) = cli.out.clone().or_else(|| cfg.output.dir.clone()) {
        write_atomic(&dir, &format!("{}.json", outcome.stem), &json_text).map_err(numeric)?;
        if let Some(csv) = &csv_text {
            write_atomic(&dir, &format!("{}.csv", outcome.stem), csv).map_err(numeric)?;
        }
        log::info!("artifacts written to {}", dir.display());
    }
    let text = match (cli.format.unwrap_or(outcome.default_format), &csv_text) {
        (Format::Csv, Some(csv)) => csv,
        _ => &json_text,
    };
    out.write_all(text.as_bytes()).map_err(numeric)?;
    Ok(outcome.code)
}

fn parse_coords(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| CliError::Config(format!("bad coordinate {s:?}: {e}"))))
        .collect()
}

fn coords(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}

fn dist(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let metric = cfg.metric()?;
    let [x, y] = cfg.points.as_slice() else {
        return Err(CliError::Config("dist needs exactly two points".into()));
    };
    let x = point(&metric, x, "x")?;
    let y = point(&metric, y, "y")?;
    let reading = metric.distance_checked(&x, &y).map_err(|e| CliError::Config(e.to_string()))?;
    let mut table = Table::new(["distance", "precision_warning"]);
    table.push(vec![fmt17(reading.value), flag(reading.precision_warning)]);
    Ok(Outcome {
        json: json!({
            "command": "dist",
            "metric": metric.kind(),
            "x": coords(&x),
            "y": coords(&y),
            "distance": reading.value,
            "precision_warning": reading.precision_warning,
        }),
        csv: Some(table),
        stem: "dist",
        default_format: Format::Csv,
        code: 0,
    })
}

/// Orbit rows for every seed plus one summary record per seed.
fn orbit_artifacts(
    metric: &MetricInstance,
    seeds: &[Vector],
    traces: &[OrbitTrace],
    probes: &[Boundedness],
) -> (Table, Vec<Value>) {
    let mut header = vec!["seed".to_string(), "step".into(), "time".into()];
    header.extend(coord_columns("x", metric.point_dim()));
    header.extend(["d_to_start".to_string(), "step_d".into()]);
    let mut table = Table::new(header);
    let mut summaries = Vec::with_capacity(traces.len());
    for (i, (trace, b)) in traces.iter().zip(probes).enumerate() {
        for (k, p) in trace.points.iter().enumerate() {
            let mut row = vec![i.to_string(), k.to_string(), fmt17(trace.times[k])];
            row.extend(p.iter().map(|v| fmt17(*v)));
            row.push(fmt17(trace.d_to_start[k]));
            row.push(trace.step_d.get(k).map(|v| fmt17(*v)).unwrap_or_default());
            table.push(row);
        }
        summaries.push(json!({
            "seed_index": i,
            "x0": coords(&seeds[i]),
            "length": trace.len(),
            "final_point": trace.points.last().map(coords),
            "final_d_to_start": trace.d_to_start.last(),
            "boundary_hit": trace.boundary_hit.as_ref().map(coords),
            "max_step_increase": if trace.step_d.len() > 1 { Some(trace.max_step_increase()) } else { None },
            "boundedness": b,
        }));
    }
    (table, summaries)
}

fn orbit(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let metric = cfg.metric()?;
    let seeds = cfg.seed_points(&metric, cfg.seed)?;
    let dp = &cfg.params.dynamics;
    let (traces, probe_map): (Vec<OrbitTrace>, Box<dyn SelfMap>) = if cfg.map.is_some() {
        let map = cfg.map_spec()?;
        let traces = map_slice(&seeds, |x0| iterate(&metric, &map, x0, dp.n_steps));
        (traces.into_iter().collect::<Result<_, _>>().map_err(numeric)?, Box::new(map))
    } else {
        let sg = cfg.semigroup()?;
        let grid = cfg.t_grid()?;
        let traces = map_slice(&seeds, |x0| semigroup_orbit(&metric, &sg, x0, &grid));
        let traces = traces.into_iter().collect::<Result<_, _>>().map_err(numeric)?;
        (traces, Box::new(sg.time_map(cfg.t0).map_err(|e| CliError::Config(e.to_string()))?))
    };
    let probes = boundedness_probes(&metric, probe_map.as_ref(), &seeds, cfg)?;
    let (table, summaries) = orbit_artifacts(&metric, &seeds, &traces, &probes);
    Ok(Outcome {
        json: json!({ "command": "orbit", "metric": metric.kind(), "orbits": summaries }),
        csv: Some(table),
        stem: "orbit",
        default_format: Format::Csv,
        code: 0,
    })
}

fn boundedness_probes(
    metric: &MetricInstance,
    map: &dyn SelfMap,
    seeds: &[Vector],
    cfg: &ExperimentConfig,
) -> Result<Vec<Boundedness>, CliError> {
    let dp = &cfg.params.dynamics;
    map_slice(seeds, |x0| {
        let probe = probe_trace(metric, map, x0, dp.probe_len)?;
        classify_boundedness(&probe, dp)
    })
    .into_iter()
    .collect::<Result<_, _>>()
    .map_err(numeric)
}

fn attractor_json(metric: &MetricInstance, est: &AttractorEstimate) -> Value {
    let clusters: Vec<Value> = est
        .omega_points
        .iter()
        .map(|c| {
            json!({
                "representative": coords(&c.representative),
                "multiplicity": c.multiplicity,
                "sources": c.sources,
                "location": metric.locate(&c.representative).ok(),
            })
        })
        .collect();
    json!({
        "boundedness": est.boundedness,
        "per_seed": est.per_seed,
        "low_confidence": est.low_confidence,
        "omega_clusters": clusters,
        "dw_point": est.dw_point.as_ref().map(coords),
    })
}

fn cluster_table(metric: &MetricInstance, est: &AttractorEstimate) -> Table {
    let mut header = vec!["cluster".to_string()];
    header.extend(coord_columns("x", metric.point_dim()));
    header.extend(["multiplicity".to_string(), "n_sources".into(), "location".into()]);
    let mut table = Table::new(header);
    for (i, c) in est.omega_points.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(c.representative.iter().map(|v| fmt17(*v)));
        row.push(c.multiplicity.to_string());
        row.push(c.sources.len().to_string());
        row.push(metric.locate(&c.representative).map(|l| format!("{l:?}").to_lowercase()).unwrap_or_default());
        table.push(row);
    }
    table
}

fn attractor_cmd(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let metric = cfg.metric()?;
    let map = cfg.map_spec()?;
    let seeds = cfg.seed_points(&metric, cfg.seed)?;
    let dp = &cfg.params.dynamics;
    let est = attractor(&metric, &map, &seeds, dp).map_err(numeric)?;
    let mut record = attractor_json(&metric, &est);
    let mut fixed = Value::Null;
    let mut dw = Value::Null;
    match est.boundedness {
        Boundedness::Bounded => {
            if let Some(fp) = fixed_point_search(&metric, &map, &seeds, dp).map_err(numeric)? {
                fixed = json!({ "point": coords(&fp.point), "residual": fp.residual, "seed_index": fp.seed_index });
            }
        }
        Boundedness::Unbounded if est.dw_point.is_some() => {
            let test = cfg.test_points(&metric, &seeds)?;
            let curve = denjoy_wolff(&metric, &map, &seeds, &test, dp).map_err(numeric)?;
            dw = json!({
                "xi": coords(&curve.xi),
                "final_sup": curve.final_sup(),
                "tail_increase": curve.tail_increase(dp.tail_fraction),
                "n_test_points": test.len(),
            });
        }
        _ => {}
    }
    if let Value::Object(m) = &mut record {
        m.insert("command".into(), json!("attractor"));
        m.insert("metric".into(), json!(metric.kind()));
        m.insert("fixed_point".into(), fixed);
        m.insert("denjoy_wolff".into(), dw);
        m.insert("n_seeds".into(), json!(seeds.len()));
    }
    Ok(Outcome {
        json: record,
        csv: Some(cluster_table(&metric, &est)),
        stem: "attractor",
        default_format: Format::Json,
        code: 0,
    })
}

fn horoball(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let metric = cfg.metric()?;
    let hc = cfg.horoball.as_ref().ok_or_else(|| CliError::Config("horoball needs a `horoball` section".into()))?;
    let body = metric.body().ok_or_else(|| CliError::Config("horoballs need a convex body".into()))?;
    let pole = match &hc.pole {
        Some(p) => point(&metric, p, "horoball.pole")?,
        None => metric.from_chart(body.interior_point()),
    };
    let center = point(&metric, &hc.center, "horoball.center")?;
    let spec = HoroballSpec::new(&metric, pole, center, hc.radius, hc.kind).map_err(|e| CliError::Config(e.to_string()))?;
    let rows = horoball_grid(&metric, &spec, hc.grid, &cfg.params.approach).map_err(numeric)?;
    let dim = body.dim();
    let mut header = coord_columns("x", dim);
    header.extend(["horofunction_lo".to_string(), "horofunction_hi".into(), "member".into()]);
    let mut table = Table::new(header);
    for r in &rows {
        let mut row: Vec<String> = r.point.iter().map(|v| fmt17(*v)).collect();
        row.extend([fmt17(r.lo), fmt17(r.hi), flag(r.member)]);
        table.push(row);
    }
    let json_rows: Vec<Value> =
        rows.iter().map(|r| json!({ "point": r.point, "lo": r.lo, "hi": r.hi, "member": r.member })).collect();
    Ok(Outcome {
        json: json!({
            "command": "horoball",
            "metric": metric.kind(),
            "pole": coords(&spec.pole),
            "center": coords(&spec.center),
            "radius": spec.radius,
            "kind": spec.kind,
            "n_points": rows.len(),
            "n_members": rows.iter().filter(|r| r.member).count(),
            "rows": json_rows,
        }),
        csv: Some(table),
        stem: "horoball",
        default_format: Format::Csv,
        code: 0,
    })
}

fn semigroup(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let metric = cfg.metric()?;
    let sg = cfg.semigroup()?;
    let seeds = cfg.seed_points(&metric, cfg.seed)?;
    let grid = cfg.t_grid()?;
    let dp = &cfg.params.dynamics;
    let sa = semigroup_attractor(&metric, &sg, cfg.t0, &seeds, dp).map_err(numeric)?;
    let traces = map_slice(&seeds, |x0| semigroup_orbit(&metric, &sg, x0, &grid));
    let traces: Vec<OrbitTrace> = traces.into_iter().collect::<Result<_, _>>().map_err(numeric)?;
    let (table, summaries) = orbit_artifacts(&metric, &seeds, &traces, &sa.skeleton.per_seed);
    Ok(Outcome {
        json: json!({
            "command": "semigroup",
            "metric": metric.kind(),
            "t0": cfg.t0,
            "skeleton": attractor_json(&metric, &sa.skeleton),
            "dense": attractor_json(&metric, &sa.dense),
            "hausdorff": sa.hausdorff,
            "orbits": summaries,
        }),
        csv: Some(table),
        stem: "semigroup",
        default_format: Format::Json,
        code: 0,
    })
}

fn verify(cfg: &ExperimentConfig, digest: &str, suite: &str) -> Result<Outcome, CliError> {
    if !SUITES.contains(&suite) {
        return Err(CliError::Config(format!("unknown suite {suite:?}; known: {}", SUITES.join(", "))));
    }
    let extra = match &cfg.body {
        Some(_) => {
            let metric = cfg.metric()?;
            let map = if cfg.map.is_some() { Some(cfg.map_spec()?) } else { None };
            let seeds = cfg.seed_points(&metric, cfg.seed)?;
            Some(ExtraInstance { name: "config".into(), metric, map, seeds })
        }
        None => None,
    };
    let ctx = CheckContext::new(cfg.seed, digest, cfg.params.clone());
    let report = run_suite(suite, &ctx, extra.as_ref()).expect("suite name checked above");
    let mut table = Table::new([
        "check_name",
        "instance",
        "negative_control",
        "n_samples",
        "n_violations",
        "worst_margin",
        "tolerance",
        "verdict",
    ]);
    for c in &report.checks {
        table.push(vec![
            c.check_name.clone(),
            c.instance.clone(),
            flag(c.negative_control),
            c.n_samples.to_string(),
            c.n_violations.to_string(),
            fmt17(c.worst_margin),
            fmt17(c.tolerance),
            format!("{:?}", c.verdict).to_lowercase(),
        ]);
    }
    let code = report.verdict.exit_code();
    let json = serde_json::to_value(&report).map_err(numeric)?;
    Ok(Outcome { json, csv: Some(table), stem: "verify", default_format: Format::Json, code })
}
