//! The three subcommands, written against `io::Write` so they can be driven
//! from tests as well as from the binary.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use layerpot_core::discretization::relative_residual;
use layerpot_core::single_layer::eval_potential;
use layerpot_core::study::{
    l2_surface_error, run_convergence_study, solve_level, ConvergenceReport, ErrorReference,
    LevelSolution, ManufacturedProblem, StudyConfig, ERROR_QUAD_ORDER,
};
use layerpot_core::{DensityFunction, Quadrature, SystemDiagnostics};

use crate::config::{ConfigError, RunConfig};
use crate::files::{self, FileError};
use crate::report::{self, ReportError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver failure: {0}")]
    Solver(#[from] layerpot_core::Error),
    #[error(transparent)]
    File(#[from] FileError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{0} acceptance check(s) failed")]
    CheckFailed(usize),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    /// 2 for bad configuration or input files, 3 for numerical failures,
    /// 4 for failed acceptance thresholds.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::File(_) | CliError::Report(_) | CliError::Output(_) => {
                2
            }
            CliError::Solver(_) => 3,
            CliError::CheckFailed(_) => 4,
        }
    }
}

/// Seconds since the first call in this process.
pub fn wall_clock() -> impl Fn() -> f64 {
    let start = Instant::now();
    move || start.elapsed().as_secs_f64()
}

/// Run a convergence study with wall-clock timings.
pub fn run_study(config: &StudyConfig) -> Result<ConvergenceReport, layerpot_core::Error> {
    run_convergence_study(config, &wall_clock())
}

fn write_diagnostics(out: &mut dyn Write, d: &SystemDiagnostics) -> std::io::Result<()> {
    writeln!(out, "symmetry defect     {:.3e}", d.symmetry_defect)?;
    writeln!(out, "condition estimate  {:.3e}", d.condition_estimate)?;
    writeln!(out, "mu_hat              {:.3e}", d.mu_hat)?;
    if let Some(h) = d.hadamard {
        writeln!(
            out,
            "hadamard dominant   {} (min margin {:.3e}, spacing ok {})",
            h.dominant, h.min_margin, h.spacing_ok
        )?;
    }
    Ok(())
}

pub struct SolveOptions {
    pub level: usize,
    pub dump: Option<PathBuf>,
    pub density_out: Option<PathBuf>,
    pub diagnostics: bool,
}

/// Assemble and solve one level, print coefficient statistics and write the
/// optional matrix dump and density file.
pub fn solve(
    config: &RunConfig,
    opts: &SolveOptions,
    out: &mut dyn Write,
) -> Result<LevelSolution, CliError> {
    let study = StudyConfig {
        diagnostics: opts.diagnostics,
        ..config.study.clone()
    };
    let quad = Quadrature::new(study.quad)?;
    let sol = solve_level(&study, opts.level, &quad, &wall_clock())?;
    if let Some(path) = &opts.dump {
        files::save_matrix_dump(&sol.system, path)?;
    }
    if let Some(path) = &opts.density_out {
        files::save_density(&sol.solution, path)?;
    }

    let u = &sol.solution;
    let n = u.len() as f64;
    let min = u.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    writeln!(out, "method              {:?}", sol.system.method)?;
    writeln!(out, "N                   {}", u.len())?;
    writeln!(out, "h_edge              {:.6e}", sol.grid.h_edge())?;
    writeln!(out, "density min         {min:.6e}")?;
    writeln!(out, "density max         {max:.6e}")?;
    writeln!(out, "density mean        {:.6e}", u.iter().sum::<f64>() / n)?;
    writeln!(
        out,
        "relative residual   {:.3e}",
        relative_residual(&sol.system, u)
    )?;
    let problem = ManufacturedProblem::new(study.problem, study.surface)?;
    if problem.has_exact_density() {
        let err = l2_surface_error(
            &sol.grid,
            &sol.density(),
            &|p| problem.exact_density(p.x).unwrap_or(f64::NAN),
            ERROR_QUAD_ORDER,
        )?;
        writeln!(out, "l2 density error    {err:.6e}")?;
    }
    writeln!(out, "assemble_s          {:.3}", sol.assemble_s)?;
    writeln!(out, "solve_s             {:.3}", sol.solve_s)?;
    if let Some(d) = &sol.diagnostics {
        write_diagnostics(out, d)?;
    }
    Ok(sol)
}

/// Run the study, write the CSV (to `csv_path`, or to `out` when there is
/// none) and a human-readable summary to `summary`. With `check`, failed
/// acceptance thresholds become [`CliError::CheckFailed`].
pub fn study(
    config: &RunConfig,
    csv_path: Option<&Path>,
    check: bool,
    diagnostics: bool,
    out: &mut dyn Write,
    summary: &mut dyn Write,
) -> Result<ConvergenceReport, CliError> {
    let study = StudyConfig {
        diagnostics,
        ..config.study.clone()
    };
    let report = run_study(&study)?;
    match csv_path.or(config.csv_path.as_deref()) {
        Some(path) => report::emit_report(&report, path)?,
        None => report::write_csv(&report, &mut *out)?,
    }

    if report.reference == ErrorReference::FinestLevel {
        writeln!(summary, "errors measured against the finest level")?;
    }
    writeln!(summary, "surface area {:.10}", report.area)?;
    for r in &report.rows {
        writeln!(
            summary,
            "level {}  N {:>6}  err {:.3e}  order {:>6.3}  bound {}  sharp bound {}",
            r.level, r.n_dofs, r.l2_density_err, r.order_edge, r.bound43_ok, r.sharp_bound_ok
        )?;
        if let Some(d) = &r.diagnostics {
            write_diagnostics(summary, d)?;
        }
    }
    let checks = report::acceptance_checks(&report);
    for c in &checks {
        writeln!(
            summary,
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if check && failed > 0 {
        return Err(CliError::CheckFailed(failed));
    }
    Ok(report)
}

/// Evaluate the potential of a stored density at the given points, writing
/// `x,y,z,side,delta,value` rows.
pub fn eval_potential_file(
    config: &RunConfig,
    level: usize,
    density: &Path,
    points: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let study = &config.study;
    let atlas = study.surface.atlas()?;
    let scale = 1usize << level;
    let subs = vec![(study.n * scale, study.k * scale); atlas.len()];
    let grid = layerpot_core::atlas::build_grid(&atlas, &subs, study.degree)?;
    let basis = layerpot_core::study::build_basis(study.family, &grid)?;
    let coeffs = files::load_density(density)?;
    if coeffs.len() != basis.len() {
        return Err(FileError::Format {
            path: density.to_path_buf(),
            reason: format!(
                "{} coefficients but the configured basis has {} functions",
                coeffs.len(),
                basis.len()
            ),
        }
        .into());
    }
    let u = DensityFunction::discrete(basis.as_ref(), &coeffs)?;
    let quad = Quadrature::new(study.quad)?;
    let pts = files::load_points(points)?;

    let mut w = csv::Writer::from_writer(out);
    let csv_io = |e: csv::Error| CliError::Output(e.into());
    w.write_record(["x", "y", "z", "side", "delta", "value"])
        .map_err(csv_io)?;
    for x in pts {
        let s = eval_potential(&grid, &u, x, &quad)?;
        w.write_record([
            x.x().to_string(),
            x.y().to_string(),
            x.z().to_string(),
            s.side.as_str().to_string(),
            s.delta.to_string(),
            s.value.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}
