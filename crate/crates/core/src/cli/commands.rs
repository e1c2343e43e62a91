//! The five subcommands. Each writes its files into the output directory
//! and returns whether its check (if any) passed.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::Config;
use super::output::{write_json, Artifacts, Cell, CsvWriter, Header};
use crate::analysis::{
    chain_report, convergence_study, elliptic_deviation, isothermic_deviation, transform_check, ChainOptions,
    ChainReport, RateTable, RowDeviation, StudyKind, StudyParams, TransformCheck,
};
use crate::discretization::io::write_field_csv;
use crate::elliptic::{exact_ball_v, max_residuals, solve_transmission};
use crate::geometry::{
    critical_plane_scan_with, pt, symmetry_report, MovingPlaneResult, PlaneEvent, ScanOptions, Shape,
};
use crate::parabolic::{solve_cauchy, RunStats, TimeScheme, TruncationCheck};
use crate::Result;

/// What a command produced.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// `false` only when a check command's check failed.
    pub passed: bool,
    /// One-line human-readable summary.
    pub summary: String,
}

fn prepare(config: &Config, command: &str) -> Result<(Header, Artifacts)> {
    std::fs::create_dir_all(&config.output.dir)?;
    Ok((Header { command: command.into(), config_hash: config.hash() }, Artifacts::default()))
}

/// Common keys of the JSON reports.
#[derive(Serialize)]
struct RunInfo {
    warnings: Vec<String>,
    sigma_plus: f64,
    sigma_minus: f64,
    n: usize,
    half_width: f64,
    h: f64,
}

fn run_info(config: &Config, n: usize, half_width: f64) -> RunInfo {
    RunInfo {
        warnings: config.warnings(),
        sigma_plus: config.physics.sigma_plus,
        sigma_minus: config.physics.sigma_minus,
        n,
        half_width,
        h: 2.0 * half_width / n as f64,
    }
}

#[derive(Serialize)]
struct SimulateReport {
    #[serde(flatten)]
    info: RunInfo,
    horizon: f64,
    scheme: TimeScheme,
    samples: usize,
    #[serde(flatten)]
    stats: RunStats,
    truncation: TruncationCheck,
    max_range: f64,
    max_std: f64,
    final_range: f64,
    final_std: f64,
    rows: Vec<RowDeviation>,
}

/// Parabolic run: `traces.csv`, `samples.csv`, `deviation.json`.
pub fn simulate(config: &Config) -> Result<Outcome> {
    let (header, mut files) = prepare(config, "simulate")?;
    let dir = config.output.dir.clone();
    let scenario = config.scenario()?;
    let scenario = crate::parabolic::Scenario { store_fields: false, ..scenario };
    let traj = solve_cauchy(&scenario)?;
    let weights = traj.sample_weights();
    let deviation = isothermic_deviation(&traj.traces, Some(&traj.times), &weights)?;

    let mut columns = vec!["t".to_string(), "mean".into(), "range".into(), "std".into()];
    columns.extend((0..traj.samples.len()).map(|m| format!("u_{m}")));
    let mut csv = CsvWriter::create(&files.path(&dir, "traces.csv"), &header, &columns)?;
    for (row, values) in deviation.rows.iter().zip(&traj.traces) {
        let mut cells = vec![Cell::from(row.time.unwrap_or(0.0)), row.mean.into(), row.range.into(), row.std.into()];
        cells.extend(values.iter().map(|&v| Cell::from(v)));
        csv.row(&cells)?;
    }
    csv.finish()?;
    write_samples(&files.path(&dir, "samples.csv"), &header, &traj.samples)?;

    let last = *deviation.rows.last().expect("at least one row");
    let grid = scenario.grid;
    let report = SimulateReport {
        info: run_info(config, grid.n(), grid.half_width()),
        horizon: scenario.horizon,
        scheme: scenario.scheme,
        samples: traj.samples.len(),
        stats: traj.stats.clone(),
        truncation: scenario.truncation_check(config.tolerances.truncation),
        max_range: deviation.max_range,
        max_std: deviation.max_std,
        final_range: last.range,
        final_std: last.std,
        rows: deviation.rows.clone(),
    };
    write_json(&files.path(&dir, "deviation.json"), &header, &report)?;
    Ok(Outcome {
        files: files.files,
        passed: true,
        summary: format!(
            "simulate: {} steps, final range {:.3e}, max range {:.3e}, heat drift {:.3e}",
            traj.stats.steps, last.range, deviation.max_range, traj.stats.heat_drift
        ),
    })
}

fn write_samples(path: &std::path::Path, header: &Header, samples: &[crate::geometry::InterfaceSample]) -> Result<()> {
    let mut csv = CsvWriter::create(
        path,
        header,
        &["index", "component", "parameter", "x", "y", "normal_x", "normal_y", "weight"],
    )?;
    for (m, s) in samples.iter().enumerate() {
        csv.row(&[
            m.into(),
            s.component.into(),
            s.parameter.into(),
            s.point.x.into(),
            s.point.y.into(),
            s.normal.x.into(),
            s.normal.y.into(),
            s.weight.into(),
        ])?;
    }
    csv.finish()
}

#[derive(Serialize)]
struct EllipticReport {
    #[serde(flatten)]
    info: RunInfo,
    samples: usize,
    a_star: f64,
    a_star_std: f64,
    a_star_range: f64,
    /// Exact value and error when the shape is a single ball.
    a_star_exact: Option<f64>,
    a_star_error: Option<f64>,
    max_jump_value: f64,
    max_jump_flux: f64,
    collisions: usize,
    solver_iterations: usize,
    solver_residual: f64,
}

/// Transmission solve: `residuals.csv`, `v_field.csv`, `elliptic.json`.
pub fn elliptic(config: &Config) -> Result<Outcome> {
    let (header, mut files) = prepare(config, "elliptic")?;
    let dir = config.output.dir.clone();
    let scenario = config.scenario()?;
    let sol = solve_transmission(&scenario)?;
    let weights: Vec<f64> = sol.samples.iter().map(|s| s.weight).collect();
    let deviation = elliptic_deviation(&sol.a_star_samples, &weights)?;

    let mut csv = CsvWriter::create(
        &files.path(&dir, "residuals.csv"),
        &header,
        &["index", "component", "x", "y", "a_star_sample", "jump_value", "jump_flux", "collision"],
    )?;
    for (m, ((s, a), r)) in sol.samples.iter().zip(&sol.a_star_samples).zip(&sol.residuals).enumerate() {
        csv.row(&[
            m.into(),
            s.component.into(),
            s.point.x.into(),
            s.point.y.into(),
            (*a).into(),
            r.jump_value.into(),
            r.jump_flux.into(),
            r.collision.into(),
        ])?;
    }
    csv.finish()?;
    let mut out = BufWriter::new(File::create(files.path(&dir, "v_field.csv"))?);
    write_field_csv(&mut out, &sol.field, &header.lines())?;
    out.flush()?;

    let exact = match scenario.shape.as_ball() {
        Some((_, radius)) => Some(exact_ball_v(radius, sol.sigma_plus, sol.sigma_minus, 2)?.a_star_exact),
        None => None,
    };
    let (max_jump_value, max_jump_flux) = max_residuals(&sol.residuals);
    let grid = scenario.grid;
    let report = EllipticReport {
        info: run_info(config, grid.n(), grid.half_width()),
        samples: sol.samples.len(),
        a_star: sol.a_star,
        a_star_std: sol.a_star_std,
        a_star_range: deviation.max_range,
        a_star_exact: exact,
        a_star_error: exact.map(|e| (sol.a_star - e).abs()),
        max_jump_value,
        max_jump_flux,
        collisions: sol.residuals.iter().filter(|r| r.collision).count(),
        solver_iterations: sol.solver_iterations,
        solver_residual: sol.solver_residual,
    };
    write_json(&files.path(&dir, "elliptic.json"), &header, &report)?;
    Ok(Outcome {
        files: files.files,
        passed: true,
        summary: format!("elliptic: a* = {:.6e}, std {:.3e}", sol.a_star, sol.a_star_std),
    })
}

#[derive(Serialize)]
struct TransformReport {
    #[serde(flatten)]
    info: RunInfo,
    #[serde(flatten)]
    check: TransformCheck,
}

/// Time transform against the elliptic solve: `transform_check.json`; fails
/// when the error exceeds the budget.
pub fn transform(config: &Config) -> Result<Outcome> {
    let (header, mut files) = prepare(config, "transform-check")?;
    let dir = config.output.dir.clone();
    let scenario = config.scenario()?;
    let check = transform_check(&scenario)?;
    let summary = format!(
        "transform-check: error {:.3e} vs budget {:.3e} ({})",
        check.error,
        check.budget,
        if check.passed { "pass" } else { "FAIL" }
    );
    let passed = check.passed;
    let grid = scenario.grid;
    let report = TransformReport { info: run_info(config, grid.n(), grid.half_width()), check };
    write_json(&files.path(&dir, "transform_check.json"), &header, &report)?;
    Ok(Outcome { files: files.files, passed, summary })
}

/// One row of the plane table.
#[derive(Serialize)]
struct PlaneRow {
    source: &'static str,
    gamma: [f64; 2],
    lambda_star: f64,
    event: PlaneEvent,
    contact: [f64; 2],
    hausdorff: f64,
    symmetric: bool,
    side_condition: bool,
    ambiguous: bool,
}

impl PlaneRow {
    fn new(source: &'static str, r: &MovingPlaneResult) -> Self {
        let g = r.plane.gamma();
        Self {
            source,
            gamma: [g.x, g.y],
            lambda_star: r.lambda_star,
            event: r.event,
            contact: [r.contact_point.x, r.contact_point.y],
            hausdorff: r.hausdorff,
            symmetric: r.symmetric,
            side_condition: r.side_condition,
            ambiguous: r.ambiguity.is_some(),
        }
    }
}

#[derive(Serialize)]
struct MovingPlanesReport {
    warnings: Vec<String>,
    ball_like: bool,
    center: [f64; 2],
    center_residual: f64,
    directions: Vec<PlaneRow>,
    random_directions: Vec<PlaneRow>,
    random_all_symmetric: bool,
    chain: Option<ChainReport>,
}

/// Plane scans and symmetry-argument diagnostics: `planes.csv`, `moving_planes.json`.
pub fn moving_planes(config: &Config) -> Result<Outcome> {
    let (header, mut files) = prepare(config, "moving-planes")?;
    let dir = config.output.dir.clone();
    let shape = config.shape.build()?;
    let a = &config.analysis;
    let scan =
        ScanOptions { tol: config.tolerances.scan, samples_per_component: a.scan_samples, ..ScanOptions::default() };
    let symmetry = symmetry_report(&shape, a.directions, &scan, config.tolerances.center)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let random = (0..a.random_directions)
        .map(|_| {
            let theta = TAU * rng.random::<f64>();
            critical_plane_scan_with(&shape, pt(theta.cos(), theta.sin()), &scan)
        })
        .collect::<Result<Vec<_>>>()?;
    let chain = if a.chain {
        let options = ChainOptions {
            sigma_plus: config.physics.sigma_plus,
            sigma_minus: config.physics.sigma_minus,
            half_width: config.half_width(&shape),
            resolution: config.grid.n,
            directions: a.directions,
            scan: scan.clone(),
            samples_per_component: a.samples,
            center_tol: config.tolerances.center,
        };
        Some(chain_report(&shape, &options)?)
    } else {
        None
    };

    let rows: Vec<PlaneRow> = symmetry.results.iter().map(|r| PlaneRow::new("equispaced", r)).collect();
    let random_rows: Vec<PlaneRow> = random.iter().map(|r| PlaneRow::new("random", r)).collect();
    let mut csv = CsvWriter::create(
        &files.path(&dir, "planes.csv"),
        &header,
        &[
            "index",
            "source",
            "gamma_x",
            "gamma_y",
            "lambda_star",
            "event",
            "contact_x",
            "contact_y",
            "hausdorff",
            "symmetric",
            "side_condition",
            "ambiguous",
        ],
    )?;
    for (k, r) in rows.iter().chain(&random_rows).enumerate() {
        let event = match r.event {
            PlaneEvent::InternalTangency => "internal_tangency",
            PlaneEvent::Orthogonality => "orthogonality",
        };
        csv.row(&[
            k.into(),
            r.source.into(),
            r.gamma[0].into(),
            r.gamma[1].into(),
            r.lambda_star.into(),
            event.into(),
            r.contact[0].into(),
            r.contact[1].into(),
            r.hausdorff.into(),
            r.symmetric.into(),
            r.side_condition.into(),
            r.ambiguous.into(),
        ])?;
    }
    csv.finish()?;

    let failures = chain.as_ref().map(|c| c.persistent_failures.clone());
    let report = MovingPlanesReport {
        warnings: config.warnings(),
        ball_like: symmetry.ball_like,
        center: [symmetry.center.x, symmetry.center.y],
        center_residual: symmetry.center_residual,
        random_all_symmetric: random_rows.iter().all(|r| r.symmetric),
        directions: rows,
        random_directions: random_rows,
        chain,
    };
    write_json(&files.path(&dir, "moving_planes.json"), &header, &report)?;
    Ok(Outcome {
        files: files.files,
        passed: true,
        summary: format!(
            "moving-planes: {} (center residual {:.3e}){}",
            if symmetry.ball_like { "ball-like" } else { "not ball-like" },
            symmetry.center_residual,
            failures.map_or(String::new(), |f| format!(", persistent failures {f:?}"))
        ),
    })
}

#[derive(Serialize)]
struct StudyReport {
    study: StudyKind,
    tables: Vec<RateTable>,
}

#[derive(Serialize)]
struct ConvergeReport {
    warnings: Vec<String>,
    sigma_plus: f64,
    sigma_minus: f64,
    half_width: f64,
    samples: usize,
    studies: Vec<StudyReport>,
}

/// Rate tables on the unit ball and a manufactured problem: `rates.csv`, `rates.json`.
pub fn converge(config: &Config) -> Result<Outcome> {
    let (header, mut files) = prepare(config, "converge")?;
    let dir = config.output.dir.clone();
    let ball = Shape::ball(pt(0.0, 0.0), 1.0)?;
    let params = StudyParams {
        sigma_plus: config.physics.sigma_plus,
        sigma_minus: config.physics.sigma_minus,
        half_width: config.half_width(&ball),
        samples: config.analysis.samples,
    };
    let studies = config
        .analysis
        .studies
        .iter()
        .map(|&study| {
            convergence_study(study, &config.analysis.resolutions, &params).map(|tables| StudyReport { study, tables })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut csv = CsvWriter::create(
        &files.path(&dir, "rates.csv"),
        &header,
        &["label", "resolution", "h", "error", "pairwise_order", "fitted_order"],
    )?;
    for table in studies.iter().flat_map(|s| &s.tables) {
        for k in 0..table.resolutions.len() {
            let order = if k == 0 { Cell::Text(String::new()) } else { table.pairwise_orders[k - 1].into() };
            csv.row(&[
                table.label.as_str().into(),
                table.resolutions[k].into(),
                table.h[k].into(),
                table.errors[k].into(),
                order,
                table.fitted_order.into(),
            ])?;
        }
    }
    csv.finish()?;
    let summary = studies
        .iter()
        .flat_map(|s| &s.tables)
        .map(|t| format!("{} {:.2}", t.label, t.fitted_order))
        .collect::<Vec<_>>()
        .join(", ");
    let report = ConvergeReport {
        warnings: config.warnings(),
        sigma_plus: params.sigma_plus,
        sigma_minus: params.sigma_minus,
        half_width: params.half_width,
        samples: params.samples,
        studies,
    };
    write_json(&files.path(&dir, "rates.json"), &header, &report)?;
    Ok(Outcome { files: files.files, passed: true, summary: format!("converge: fitted orders {summary}") })
}
