//! CSV output of convergence reports and the acceptance summary of `study --check`.

use std::io::Write;
use std::path::Path;

use layerpot_core::study::ConvergenceReport;

/// Column names, in order.
pub const CSV_HEADER: [&str; 12] = [
    "level",
    "h_edge",
    "h_area",
    "N",
    "l2_density_err",
    "order_edge",
    "order_area",
    "pot_err_interior",
    "pot_err_exterior",
    "bound43_ok",
    "assemble_s",
    "solve_s",
];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("report has no rows")]
    Empty,
    #[error("cannot write report to {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Write the report as CSV; undefined values (first-row orders, unknown
/// potentials) are written as `NaN`.
pub fn write_csv<W: Write>(report: &ConvergenceReport, out: W) -> Result<(), ReportError> {
    if report.rows.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.level.to_string(),
            r.h_edge.to_string(),
            r.h_area.to_string(),
            r.n_dofs.to_string(),
            r.l2_density_err.to_string(),
            r.order_edge.to_string(),
            r.order_area.to_string(),
            r.pot_err_interior.to_string(),
            r.pot_err_exterior.to_string(),
            r.bound43_ok.to_string(),
            r.assemble_s.to_string(),
            r.solve_s.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn emit_report(report: &ConvergenceReport, path: &Path) -> Result<(), ReportError> {
    let io = |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let file = std::fs::File::create(path).map_err(io)?;
    write_csv(report, std::io::BufWriter::new(file))
}

/// One acceptance threshold and whether the report meets it.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Window for the observed edge-h order of a degree-`m` basis at the finest pair.
pub fn order_window(degree: usize) -> (f64, f64) {
    let m = degree as f64;
    (m + 0.5, m + 1.8)
}

/// Thresholds applied by `study --check`: strictly decreasing density
/// errors, the finest edge-h order inside [`order_window`], the potential
/// bound at every probe, and area orders close to half the edge orders.
pub fn acceptance_checks(report: &ConvergenceReport) -> Vec<Check> {
    let rows = &report.rows;
    let mut checks = Vec::new();

    let errs: Vec<f64> = rows.iter().map(|r| r.l2_density_err).collect();
    checks.push(Check {
        name: "density error decreases".into(),
        passed: errs.windows(2).all(|w| w[1] < w[0]),
        detail: errs
            .iter()
            .map(|e| format!("{e:.3e}"))
            .collect::<Vec<_>>()
            .join(" > "),
    });

    let (lo, hi) = order_window(report.config.degree);
    let last = report.final_order_edge();
    checks.push(Check {
        name: "edge-h order".into(),
        passed: last.is_some_and(|o| (lo..=hi).contains(&o)),
        detail: match last {
            Some(o) => format!("{o:.3} in [{lo}, {hi}]"),
            None => "fewer than two measured levels".into(),
        },
    });

    checks.push(Check {
        name: "potential bound".into(),
        passed: rows.iter().all(|r| r.bound43_ok),
        detail: format!(
            "{} of {} levels",
            rows.iter().filter(|r| r.bound43_ok).count(),
            rows.len()
        ),
    });

    let ratios: Vec<f64> = rows
        .iter()
        .skip(1)
        .map(|r| r.order_area / r.order_edge)
        .collect();
    checks.push(Check {
        name: "area order is half the edge order".into(),
        passed: !ratios.is_empty() && ratios.iter().all(|q| (q - 0.5).abs() <= 0.15 * 0.5),
        detail: format!("ratios {ratios:.3?}"),
    });
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use layerpot_core::study::{ErrorReference, ReportRow, StudyConfig};

    fn row(level: usize, err: f64, order: f64) -> ReportRow {
        let h = 0.5f64.powi(level as i32);
        ReportRow {
            level,
            h_edge: h,
            h_area: h * h,
            n_dofs: 96 << (2 * level),
            l2_density_err: err,
            order_edge: order,
            order_area: order / 2.0,
            pot_err_interior: 1e-4,
            pot_err_exterior: f64::NAN,
            bound43_ok: true,
            sharp_bound_ok: true,
            assemble_s: 0.25,
            solve_s: 0.5,
            probes: vec![],
            diagnostics: None,
        }
    }

    fn report(rows: Vec<ReportRow>) -> ConvergenceReport {
        ConvergenceReport {
            config: StudyConfig::default(),
            reference: ErrorReference::Exact,
            area: 4.0 * std::f64::consts::PI,
            rows,
        }
    }

    #[test]
    fn csv_layout() {
        let rep = report(vec![
            row(0, 4e-3, f64::NAN),
            row(1, 2e-3, 1.0),
            row(2, 1e-3, 1.0),
        ]);
        let mut buf = Vec::new();
        write_csv(&rep, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines[1], "0,1,1,96,0.004,NaN,NaN,0.0001,NaN,true,0.25,0.5");
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 12));
    }

    #[test]
    fn empty_report_rejected() {
        assert!(matches!(
            write_csv(&report(vec![]), Vec::new()),
            Err(ReportError::Empty)
        ));
    }

    #[test]
    fn checks_pass_and_fail() {
        let good = report(vec![
            row(0, 4e-3, f64::NAN),
            row(1, 2e-3, 1.0),
            row(2, 1e-3, 1.0),
        ]);
        assert!(acceptance_checks(&good).iter().all(|c| c.passed));

        let mut flat = good.clone();
        flat.rows[2].l2_density_err = 2e-3;
        flat.rows[2].order_edge = 0.0;
        flat.rows[2].order_area = 0.0;
        let failed: Vec<String> = acceptance_checks(&flat)
            .into_iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        assert!(failed.contains(&"density error decreases".to_string()));
        assert!(failed.contains(&"edge-h order".to_string()));
    }
}
