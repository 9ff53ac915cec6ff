//! IFE interpolation, error norms and mesh-refinement studies on the circle
//! benchmark.

mod config;
mod exact;

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use config::{
    cell_name, parse_cell, parse_config, parse_flux, parse_partition, read_config, Mode,
    StudyConfig, CONFIG_KEYS,
};
pub use exact::{CircleBenchmark, ExactSolution, LayeredLinear};

use crate::error::{Error, Result};
use crate::geometry::{build_mesh, Domain, EdgeClass, Partition, Point, Side};
use crate::quad::{adaptive_integral, ARC_TOLERANCE};
use crate::system::{assemble, solve, Discretization};

fn segment_average(u: &dyn ExactSolution, side: Side, a: &Point, b: &Point) -> f64 {
    adaptive_integral(0.0, 1.0, ARC_TOLERANCE, &|s| u.value(&(a + (b - a) * s), side))
}

/// Edge averages of `u`; a cut edge uses `u⁻` and `u⁺` on its two pieces.
pub fn interpolate(disc: &Discretization, u: &dyn ExactSolution) -> Vec<f64> {
    let mesh = disc.mesh;
    mesh.edges
        .par_iter()
        .zip(disc.classification.edges.par_iter())
        .map(|(edge, class)| {
            let (a, b) = (edge.start, edge.end);
            match *class {
                EdgeClass::Minus => segment_average(u, Side::Minus, &a, &b),
                EdgeClass::Plus => segment_average(u, Side::Plus, &a, &b),
                EdgeClass::Split { point, start_side } => {
                    let len = (b - a).norm();
                    let first = (point - a).norm();
                    let second = (b - point).norm();
                    let mut total = 0.0;
                    if first > 0.0 {
                        total += first * segment_average(u, start_side, &a, &point);
                    }
                    if second > 0.0 {
                        total += second * segment_average(u, start_side.opposite(), &point, &b);
                    }
                    total / len
                }
            }
        })
        .collect()
}

/// `(‖u - u_h‖_0, |u - u_h|_1)`. On interface elements `u^s` is compared with the
/// `s` piece of `u_h` over the subregions cut out by the curve itself, whatever
/// partition the space was built with.
pub fn error_norms(disc: &Discretization, dofs: &[f64], u: &dyn ExactSolution) -> Result<(f64, f64)> {
    let (l2, h1) = (0..disc.mesh.n_elements())
        .into_par_iter()
        .map(|t| -> Result<(f64, f64)> {
            let local = &disc.locals[t];
            let coefficients = disc.dofs.gather(t, dofs);
            let mut acc = (0.0, 0.0);
            for (side, rule) in disc.cubature(t, Partition::Curve)? {
                let uh = local.combine(&coefficients, side);
                for (p, w) in rule {
                    let e = u.value(&p, side) - uh.eval(&p);
                    let g = u.gradient(&p, side) - uh.grad(&p);
                    acc.0 += w * e * e;
                    acc.1 += w * g.norm_squared();
                }
            }
            Ok(acc)
        })
        .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok((l2.sqrt(), h1.sqrt()))
}

/// One refinement level of a study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub n: usize,
    pub h: f64,
    pub l2_error: f64,
    pub l2_rate: Option<f64>,
    pub h1_error: f64,
    pub h1_rate: Option<f64>,
}

/// `log(e_coarse/e_fine) / log(h_coarse/h_fine)`
pub fn convergence_rate(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

/// Builds rows from `(n, h, l2, h1)` levels, filling in the rates.
pub fn rows_with_rates(levels: &[(usize, f64, f64, f64)]) -> Vec<Row> {
    let mut rows: Vec<Row> = Vec::with_capacity(levels.len());
    for &(n, h, l2, h1) in levels {
        let prev = rows.last();
        rows.push(Row {
            n,
            h,
            l2_error: l2,
            l2_rate: prev.map(|p| convergence_rate(p.l2_error, l2, p.h, h)),
            h1_error: h1,
            h1_rate: prev.map(|p| convergence_rate(p.h1_error, h1, p.h, h)),
        });
    }
    rows
}

/// Result of [`run_study`]: one table per study kind that was run.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub interp: Option<Vec<Row>>,
    pub solve: Option<Vec<Row>>,
}

/// Errors of interpolation and/or Galerkin solution on one level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelErrors {
    pub interp: Option<(f64, f64)>,
    pub solve: Option<(f64, f64)>,
}

/// Runs one level with `n` cells per side.
pub fn run_level(config: &StudyConfig, n: usize) -> Result<LevelErrors> {
    let mesh = build_mesh(Domain::symmetric(1.0), n, config.mesh)?;
    let u = config.benchmark();
    let curve = u.curve();
    let disc = Discretization::new(&mesh, &curve, config.scheme())?;
    let interp = match config.mode {
        Mode::Interp | Mode::Both => {
            let dofs = interpolate(&disc, &u);
            Some(error_norms(&disc, &dofs, &u)?)
        }
        Mode::Solve => None,
    };
    let solved = match config.mode {
        Mode::Solve | Mode::Both => {
            let system = assemble(&disc, &|p, s| u.source(p, s), &|p| u.boundary(p))?;
            let solution = solve(&system)?;
            Some(error_norms(&disc, &solution.dofs, &u)?)
        }
        Mode::Interp => None,
    };
    Ok(LevelErrors { interp, solve: solved })
}

/// Runs every level of `config`, and writes the CSV file(s) when `config.out` is set.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    run_study_with(config, |_, _, _| {})
}

/// Like [`run_study`], calling `progress(level, n, errors)` after every level.
pub fn run_study_with(
    config: &StudyConfig,
    mut progress: impl FnMut(usize, usize, &LevelErrors),
) -> Result<StudyReport> {
    config.validate()?;
    let mut interp = Vec::new();
    let mut solved = Vec::new();
    for (level, n) in config.level_sizes().into_iter().enumerate() {
        let errors = run_level(config, n).map_err(|e| Error::Level {
            level,
            n,
            source: Box::new(e),
        })?;
        progress(level, n, &errors);
        let h = 2.0 / n as f64;
        if let Some((l2, h1)) = errors.interp {
            interp.push((n, h, l2, h1));
        }
        if let Some((l2, h1)) = errors.solve {
            solved.push((n, h, l2, h1));
        }
    }
    let report = StudyReport {
        config: config.clone(),
        interp: (!interp.is_empty()).then(|| rows_with_rates(&interp)),
        solve: (!solved.is_empty()).then(|| rows_with_rates(&solved)),
    };
    if let Some(out) = &config.out {
        write_report(&report, out)?;
    }
    Ok(report)
}

pub const CSV_HEADER: &str = "h,l2_error,l2_rate,h1_error,h1_rate";

fn format_float(x: f64) -> String {
    format!("{x:.5e}")
}

/// CSV text with the fixed header, 6 significant digits and empty first-row rates.
pub fn csv_string(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let rate = |r: Option<f64>| r.map(format_float).unwrap_or_default();
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_float(row.h),
            format_float(row.l2_error),
            rate(row.l2_rate),
            format_float(row.h1_error),
            rate(row.h1_rate)
        ));
    }
    out
}

/// Writes [`csv_string`] to `path`, creating missing parent directories.
pub fn write_csv(rows: &[Row], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(csv_string(rows).as_bytes())?;
    Ok(())
}

/// Output files for a report: `out` itself for a single study, or
/// `<stem>_interp.csv` and `<stem>_solve.csv` next to it for `Mode::Both`.
pub fn output_paths(out: &Path, mode: Mode) -> Vec<(Mode, PathBuf)> {
    match mode {
        Mode::Both => {
            let stem = out
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "study".into());
            let dir = out.parent().unwrap_or_else(|| Path::new(""));
            vec![
                (Mode::Interp, dir.join(format!("{stem}_interp.csv"))),
                (Mode::Solve, dir.join(format!("{stem}_solve.csv"))),
            ]
        }
        mode => vec![(mode, out.to_path_buf())],
    }
}

pub fn write_report(report: &StudyReport, out: &Path) -> Result<()> {
    for (mode, path) in output_paths(out, report.config.mode) {
        let rows = match mode {
            Mode::Interp => report.interp.as_deref(),
            _ => report.solve.as_deref(),
        };
        if let Some(rows) = rows {
            write_csv(rows, &path)?;
        }
    }
    Ok(())
}
