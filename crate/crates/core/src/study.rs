//! Manufactured problems with analytic solutions and refinement studies that
//! measure observed convergence orders.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // float methods come from libm when core lacks them
use num_traits::Float;

use crate::atlas::{ellipsoid_atlas, unit_sphere_atlas, ChartAtlas, SurfaceGrid, SurfacePoint};
use crate::basis::GlobalBasis;
use crate::bspline::GlobalBSplineBasis;
use crate::discretization::{
    assemble_collocation, assemble_galerkin, choose_collocation_points, diagnose_system,
    quadrature_nodes, solve_dense, DenseSystem, Method, NodePlacement, Pairing, Restriction,
    SystemDiagnostics,
};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::lagrange::GlobalLagrangeBasis;
use crate::quadrature::{surface_integral, QuadConfig, Quadrature};
use crate::single_layer::{
    eval_potential, potential_error_bound, sharp_potential_error_bound, surface_area,
    DensityFunction, Side,
};

/// Quadrature order used for error norms and areas.
pub const ERROR_QUAD_ORDER: usize = 6;

/// The closed surface of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceSpec {
    Sphere { radius: f64 },
    Ellipsoid { semi_axes: [f64; 3] },
}

impl SurfaceSpec {
    pub fn atlas(&self) -> Result<ChartAtlas> {
        match *self {
            SurfaceSpec::Sphere { radius } => unit_sphere_atlas(radius),
            SurfaceSpec::Ellipsoid { semi_axes } => ellipsoid_atlas(semi_axes),
        }
    }

    /// Radius if the surface is a sphere (an ellipsoid with equal axes counts).
    pub fn sphere_radius(&self) -> Option<f64> {
        match *self {
            SurfaceSpec::Sphere { radius } => Some(radius),
            SurfaceSpec::Ellipsoid {
                semi_axes: [a, b, c],
            } => (a == b && b == c).then_some(a),
        }
    }

    fn axes(&self) -> [f64; 3] {
        match *self {
            SurfaceSpec::Sphere { radius } => [radius; 3],
            SurfaceSpec::Ellipsoid { semi_axes } => semi_axes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisFamily {
    BSpline,
    Lagrange,
}

pub fn build_basis(family: BasisFamily, grid: &SurfaceGrid) -> Result<Box<dyn GlobalBasis>> {
    Ok(match family {
        BasisFamily::BSpline => Box::new(GlobalBSplineBasis::build(grid)?),
        BasisFamily::Lagrange => Box::new(GlobalLagrangeBasis::build(grid)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    /// `f ≡ value`.
    Constant { value: f64 },
    /// `f = 1/(4π|x − x₀|)` for a source `x₀` inside Γ.
    PointSource { source: Vec3 },
    /// `f` = the solid zonal harmonic `(r/R)ⁿ Pₙ(x₃/r)`, `R` the surface scale.
    Harmonic { degree: usize },
}

/// Legendre polynomial `Pₙ(t)` by the three-term recurrence.
pub fn legendre(n: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `rⁿ Pₙ(x₃/r)`, harmonic in all of R³.
fn solid_harmonic(n: usize, x: Vec3) -> f64 {
    let r = x.norm();
    if r == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    Float::powi(r, n as i32) * legendre(n, x.z() / r)
}

/// Dirichlet data on Γ together with whatever exact solutions are known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedProblem {
    pub kind: ProblemKind,
    pub surface: SurfaceSpec,
    scale: f64,
}

/// Minimum distance of a point source from Γ, relative to the surface scale.
pub const MIN_SOURCE_DISTANCE: f64 = 0.2;

impl ManufacturedProblem {
    pub fn new(kind: ProblemKind, surface: SurfaceSpec) -> Result<Self> {
        let atlas = surface.atlas()?;
        if let ProblemKind::PointSource { source } = kind {
            let min = MIN_SOURCE_DISTANCE * atlas.scale();
            let (d, _) = atlas.distance_to_surface(source);
            let inside = atlas.implicit_value(source) < 0.0;
            if !inside || d < min {
                return Err(Error::SourcePlacement {
                    distance: if inside { d } else { -d },
                    min,
                });
            }
        }
        if let ProblemKind::Harmonic { degree } = kind {
            if degree > 8 {
                return Err(Error::InvalidArgument(alloc::format!(
                    "harmonic degree {degree} above 8 is not supported"
                )));
            }
        }
        Ok(ManufacturedProblem {
            kind,
            surface,
            scale: atlas.scale(),
        })
    }

    /// Boundary data `f(x)`.
    pub fn boundary_data(&self, x: Vec3) -> f64 {
        match self.kind {
            ProblemKind::Constant { value } => value,
            ProblemKind::PointSource { source } => 1.0 / (4.0 * PI * x.distance(source)),
            ProblemKind::Harmonic { degree } => {
                solid_harmonic(degree, x) / Float::powi(self.scale, degree as i32)
            }
        }
    }

    pub fn has_exact_density(&self) -> bool {
        self.surface.sphere_radius().is_some()
    }

    /// The density `u*` with `Au* = f`, known in closed form on spheres.
    pub fn exact_density(&self, x: Vec3) -> Option<f64> {
        let r = self.surface.sphere_radius()?;
        Some(match self.kind {
            ProblemKind::Constant { value } => value / r,
            // the jump of the normal derivative between the exterior field of
            // the source and its harmonic interior extension: the Poisson kernel
            ProblemKind::PointSource { source } => {
                let d = x.distance(source);
                (r * r - source.norm_squared()) / (4.0 * PI * r * d * d * d)
            }
            ProblemKind::Harmonic { degree } => (2 * degree + 1) as f64 / r * self.boundary_data(x),
        })
    }

    /// The potential `v*` at `x ∉ Γ` on the given side, when known.
    pub fn exact_potential(&self, x: Vec3, side: Side) -> Option<f64> {
        match (self.kind, side) {
            (ProblemKind::Constant { value }, Side::Interior) => Some(value),
            (ProblemKind::Constant { value }, Side::Exterior) => {
                let r = self.surface.sphere_radius()?;
                Some(value * r / x.norm())
            }
            (ProblemKind::PointSource { source }, Side::Exterior) => {
                Some(1.0 / (4.0 * PI * x.distance(source)))
            }
            (ProblemKind::PointSource { source }, Side::Interior) => {
                let r = self.surface.sphere_radius()?;
                let s2 = source.norm_squared();
                if s2 == 0.0 {
                    return Some(1.0 / (4.0 * PI * r));
                }
                // Kelvin image: (R/|x₀|) / (4π|x − R²x₀/|x₀|²|)
                let image = source * (r * r / s2);
                Some(r / s2.sqrt() / (4.0 * PI * x.distance(image)))
            }
            (ProblemKind::Harmonic { .. }, Side::Interior) => Some(self.boundary_data(x)),
            (ProblemKind::Harmonic { degree }, Side::Exterior) => {
                let r = self.surface.sphere_radius()?;
                let rho = x.norm();
                Some(Float::powi(r / rho, degree as i32 + 1) * legendre(degree, x.z() / rho))
            }
        }
    }
}

/// `√∫_Γ (approx − exact)² dΓ`.
pub fn l2_surface_error(
    grid: &SurfaceGrid,
    approx: &DensityFunction<'_>,
    exact: &dyn Fn(&SurfacePoint) -> f64,
    q: usize,
) -> Result<f64> {
    let sq = surface_integral(
        grid,
        |p| {
            let d = approx.eval(p) - exact(p);
            d * d
        },
        q,
    )?;
    Ok(sq.max(0.0).sqrt())
}

/// `log(e₁/e₂) / log(h₁/h₂)`.
pub fn observed_order(e1: f64, e2: f64, h1: f64, h2: f64) -> f64 {
    (e1 / e2).ln() / (h1 / h2).ln()
}

/// Six exterior probes at twice the largest semi-axis and six interior
/// probes at 0.4 of the smallest, on the coordinate axes.
pub fn probe_points(surface: &SurfaceSpec) -> Vec<(Vec3, Side)> {
    let axes = surface.axes();
    let big = 2.0 * axes.iter().cloned().fold(0.0, f64::max);
    let small = 0.4 * axes.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut out = Vec::with_capacity(12);
    for (r, side) in [(big, Side::Exterior), (small, Side::Interior)] {
        for k in 0..3 {
            for s in [1.0, -1.0] {
                let mut v = [0.0; 3];
                v[k] = s * r;
                out.push((Vec3(v), side));
            }
        }
    }
    out
}

/// Everything that defines a refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub surface: SurfaceSpec,
    pub family: BasisFamily,
    pub degree: usize,
    /// Subdivisions of the coarsest level, on every chart.
    pub n: usize,
    pub k: usize,
    /// Number of levels; level `ℓ` uses `(n·2^ℓ, k·2^ℓ)`.
    pub levels: usize,
    pub method: Method,
    pub pairing: Pairing,
    pub restriction: Restriction,
    /// Fixed collocation radius; `None` uses the per-point default.
    pub delta: Option<f64>,
    pub quad: QuadConfig,
    pub problem: ProblemKind,
    /// Also compute matrix diagnostics at every level.
    pub diagnostics: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            surface: SurfaceSpec::Sphere { radius: 1.0 },
            family: BasisFamily::BSpline,
            degree: 0,
            n: 4,
            k: 4,
            levels: 3,
            method: Method::Galerkin,
            pairing: Pairing::Surface,
            restriction: Restriction::Point,
            delta: None,
            quad: QuadConfig::default(),
            problem: ProblemKind::Constant { value: 1.0 },
            diagnostics: false,
        }
    }
}

/// The basis, system and solution of one refinement level.
pub struct LevelSolution {
    pub grid: SurfaceGrid,
    pub basis: Box<dyn GlobalBasis>,
    pub system: DenseSystem,
    pub solution: Vec<f64>,
    pub diagnostics: Option<SystemDiagnostics>,
    pub assemble_s: f64,
    pub solve_s: f64,
}

impl LevelSolution {
    pub fn density(&self) -> DensityFunction<'_> {
        DensityFunction::Discrete {
            basis: self.basis.as_ref(),
            coeffs: &self.solution,
        }
    }
}

/// Assemble and solve one level; `clock` returns seconds from any origin.
pub fn solve_level(
    config: &StudyConfig,
    level: usize,
    quad: &Quadrature,
    clock: &dyn Fn() -> f64,
) -> Result<LevelSolution> {
    let atlas = config.surface.atlas()?;
    let problem = ManufacturedProblem::new(config.problem, config.surface)?;
    let scale = 1usize << level;
    let subs = alloc::vec![(config.n * scale, config.k * scale); atlas.len()];
    let grid = crate::atlas::build_grid(&atlas, &subs, config.degree)?;
    let basis = build_basis(config.family, &grid)?;
    let f = |p: &SurfacePoint| problem.boundary_data(p.x);

    let t0 = clock();
    let (system, colloc) = match config.method {
        Method::Galerkin => (
            assemble_galerkin(basis.as_ref(), &f, config.pairing, quad)?,
            None,
        ),
        Method::Collocation => {
            let c = choose_collocation_points(basis.as_ref())?
                .with_restriction(config.restriction, config.delta)?;
            (assemble_collocation(basis.as_ref(), &c, &f, quad)?, Some(c))
        }
    };
    let t1 = clock();
    let solution = solve_dense(&system);
    let t2 = clock();

    let diagnostics = if config.diagnostics || solution.is_err() {
        let nodes = match &colloc {
            Some(c) => Some(quadrature_nodes(
                &grid,
                &c.points,
                NodePlacement::default(),
            )?),
            None => None,
        };
        Some(diagnose_system(&system, colloc.as_ref(), nodes.as_deref())?)
    } else {
        None
    };
    let solution = solution.map_err(|e| Error::LevelFailed {
        level,
        condition: diagnostics.map_or(f64::NAN, |d| d.condition_estimate),
        source: Box::new(e),
    })?;
    Ok(LevelSolution {
        grid,
        basis,
        system,
        solution,
        diagnostics,
        assemble_s: t1 - t0,
        solve_s: t2 - t1,
    })
}

/// Potential at one probe point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResult {
    pub x: Vec3,
    pub side: Side,
    pub delta: f64,
    pub value: f64,
    pub exact: Option<f64>,
    /// `mesΓ·e/δ`.
    pub bound: f64,
    /// `√mesΓ·e/(4πδ)`.
    pub sharp_bound: f64,
}

impl ProbeResult {
    pub fn error(&self) -> Option<f64> {
        self.exact.map(|v| (v - self.value).abs())
    }
}

/// One row of a convergence report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub level: usize,
    pub h_edge: f64,
    pub h_area: f64,
    pub n_dofs: usize,
    pub l2_density_err: f64,
    /// Undefined (NaN) on the first row.
    pub order_edge: f64,
    pub order_area: f64,
    /// Largest probe error on each side; NaN if `v*` is unknown there.
    pub pot_err_interior: f64,
    pub pot_err_exterior: f64,
    pub bound43_ok: bool,
    pub sharp_bound_ok: bool,
    pub assemble_s: f64,
    pub solve_s: f64,
    pub probes: Vec<ProbeResult>,
    pub diagnostics: Option<SystemDiagnostics>,
}

/// How density errors were measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorReference {
    /// Against the analytic density.
    Exact,
    /// Against the finest level, which therefore gets no row.
    FinestLevel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub config: StudyConfig,
    pub reference: ErrorReference,
    /// `mesΓ`.
    pub area: f64,
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    /// Order between the last two rows.
    pub fn final_order_edge(&self) -> Option<f64> {
        self.rows
            .last()
            .map(|r| r.order_edge)
            .filter(|o| o.is_finite())
    }
}

/// Solve every level, then measure density errors (against `u*` or the finest
/// level), probe potentials, the potential bound and observed orders.
pub fn run_convergence_study(
    config: &StudyConfig,
    clock: &dyn Fn() -> f64,
) -> Result<ConvergenceReport> {
    if config.levels < 2 {
        return Err(Error::TooFewLevels(config.levels));
    }
    let quad = Quadrature::new(config.quad)?;
    let problem = ManufacturedProblem::new(config.problem, config.surface)?;
    let reference = if problem.has_exact_density() {
        ErrorReference::Exact
    } else {
        ErrorReference::FinestLevel
    };

    let mut levels = Vec::with_capacity(config.levels);
    for level in 0..config.levels {
        let sol = solve_level(config, level, &quad, clock)?;
        log::info!(
            "level {level}: N = {}, assembly {:.2}s, solve {:.2}s",
            sol.basis.len(),
            sol.assemble_s,
            sol.solve_s
        );
        levels.push(sol);
    }
    let area = surface_area(&levels.last().expect("levels ≥ 2").grid, ERROR_QUAD_ORDER)?;

    let measured = match reference {
        ErrorReference::Exact => levels.len(),
        ErrorReference::FinestLevel => levels.len() - 1,
    };
    let finest = levels.last().expect("levels ≥ 2");
    let mut rows: Vec<ReportRow> = Vec::with_capacity(measured);
    for (level, sol) in levels.iter().enumerate().take(measured) {
        let err = match reference {
            ErrorReference::Exact => l2_surface_error(
                &sol.grid,
                &sol.density(),
                &|p| problem.exact_density(p.x).unwrap_or(f64::NAN),
                ERROR_QUAD_ORDER,
            )?,
            ErrorReference::FinestLevel => {
                let coarse = sol.density();
                l2_surface_error(
                    &finest.grid,
                    &finest.density(),
                    &|p| coarse.eval(p),
                    ERROR_QUAD_ORDER,
                )?
            }
        };

        let mut probes = Vec::new();
        for (x, _) in probe_points(&config.surface) {
            let s = eval_potential(&sol.grid, &sol.density(), x, &quad)?;
            probes.push(ProbeResult {
                x,
                side: s.side,
                delta: s.delta,
                value: s.value,
                exact: problem.exact_potential(x, s.side),
                bound: potential_error_bound(area, s.delta, err, 0)?,
                sharp_bound: sharp_potential_error_bound(area, s.delta, err)?,
            });
        }
        let side_max = |side: Side| {
            probes
                .iter()
                .filter(|p| p.side == side)
                .filter_map(|p| p.error())
                .fold(f64::NAN, f64::max)
        };
        let checked = probes.iter().filter(|p| p.delta >= 0.5 * problem.scale);
        let bound43_ok = checked
            .clone()
            .all(|p| p.error().map_or(true, |e| e <= p.bound));
        let sharp_bound_ok = checked
            .clone()
            .all(|p| p.error().map_or(true, |e| e <= p.sharp_bound));

        let (h_edge, h_area) = (sol.grid.h_edge(), sol.grid.h_area());
        let (order_edge, order_area) = match rows.last() {
            Some(prev) => (
                observed_order(prev.l2_density_err, err, prev.h_edge, h_edge),
                observed_order(prev.l2_density_err, err, prev.h_area, h_area),
            ),
            None => (f64::NAN, f64::NAN),
        };
        rows.push(ReportRow {
            level,
            h_edge,
            h_area,
            n_dofs: sol.basis.len(),
            l2_density_err: err,
            order_edge,
            order_area,
            pot_err_interior: side_max(Side::Interior),
            pot_err_exterior: side_max(Side::Exterior),
            bound43_ok,
            sharp_bound_ok,
            assemble_s: sol.assemble_s,
            solve_s: sol.solve_s,
            probes,
            diagnostics: sol.diagnostics,
        });
    }
    Ok(ConvergenceReport {
        config: config.clone(),
        reference,
        area,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> SurfaceSpec {
        SurfaceSpec::Sphere { radius: 1.0 }
    }

    #[test]
    fn legendre_values() {
        for t in [-1.0, -0.3, 0.0, 0.4, 1.0] {
            assert_eq!(legendre(0, t), 1.0);
            assert_eq!(legendre(1, t), t);
            assert!((legendre(2, t) - (3.0 * t * t - 1.0) / 2.0).abs() < 1e-15);
            assert!((legendre(3, t) - (5.0 * t * t * t - 3.0 * t) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_problem_on_sphere() {
        let p = ManufacturedProblem::new(ProblemKind::Constant { value: 1.0 }, sphere()).unwrap();
        assert_eq!(p.exact_density(Vec3::new(0.0, 0.0, 1.0)), Some(1.0));
        let r2 = ManufacturedProblem::new(
            ProblemKind::Constant { value: 3.0 },
            SurfaceSpec::Sphere { radius: 2.0 },
        )
        .unwrap();
        assert_eq!(r2.exact_density(Vec3::new(2.0, 0.0, 0.0)), Some(1.5));
        assert_eq!(
            r2.exact_potential(Vec3::new(4.0, 0.0, 0.0), Side::Exterior),
            Some(1.5)
        );
    }

    #[test]
    fn harmonic_degree_one() {
        let p = ManufacturedProblem::new(ProblemKind::Harmonic { degree: 1 }, sphere()).unwrap();
        let x = Vec3::new(0.6, 0.0, 0.8);
        assert!((p.boundary_data(x) - 0.8).abs() < 1e-15);
        assert!((p.exact_density(x).unwrap() - 2.4).abs() < 1e-15);
    }

    #[test]
    fn centred_source_reduces_to_constant() {
        let p = ManufacturedProblem::new(ProblemKind::PointSource { source: Vec3::ZERO }, sphere())
            .unwrap();
        let c = ManufacturedProblem::new(
            ProblemKind::Constant {
                value: 1.0 / (4.0 * PI),
            },
            sphere(),
        )
        .unwrap();
        let x = Vec3::new(0.0, 0.6, 0.8);
        assert!((p.boundary_data(x) - c.boundary_data(x)).abs() < 1e-16);
        assert!((p.exact_density(x).unwrap() - c.exact_density(x).unwrap()).abs() < 1e-16);
        let y = Vec3::new(0.1, 0.2, 0.0);
        assert!((p.exact_potential(y, Side::Interior).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn interior_image_matches_boundary_data() {
        // on Γ the Kelvin-image field coincides with the source field
        let s = Vec3::new(0.2, -0.1, 0.3);
        let p = ManufacturedProblem::new(ProblemKind::PointSource { source: s }, sphere()).unwrap();
        for x in [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.6, -0.8)] {
            let inner = p.exact_potential(x, Side::Interior).unwrap();
            assert!((inner - p.boundary_data(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn source_placement_checked() {
        for s in [Vec3::new(0.9, 0.0, 0.0), Vec3::new(1.5, 0.0, 0.0)] {
            assert!(matches!(
                ManufacturedProblem::new(ProblemKind::PointSource { source: s }, sphere()),
                Err(Error::SourcePlacement { .. })
            ));
        }
    }

    #[test]
    fn orders_and_probes() {
        assert!((observed_order(4.0, 1.0, 0.2, 0.1) - 2.0).abs() < 1e-15);
        let probes = probe_points(&sphere());
        assert_eq!(probes.len(), 12);
        assert_eq!(probes.iter().filter(|p| p.1 == Side::Interior).count(), 6);
        assert!(probes.iter().all(|(x, s)| match s {
            Side::Exterior => (x.norm() - 2.0).abs() < 1e-15,
            Side::Interior => (x.norm() - 0.4).abs() < 1e-15,
        }));
    }

    #[test]
    fn single_level_rejected() {
        let cfg = StudyConfig {
            levels: 1,
            ..StudyConfig::default()
        };
        assert!(matches!(
            run_convergence_study(&cfg, &|| 0.0),
            Err(Error::TooFewLevels(1))
        ));
    }

    #[test]
    fn l2_error_of_offset() {
        let atlas = unit_sphere_atlas(1.0).unwrap();
        let grid = SurfaceGrid::uniform(&atlas, 4, 0).unwrap();
        let f = |p: &SurfacePoint| p.x.z() + 0.5;
        let u = DensityFunction::Closed(&f);
        let same = l2_surface_error(&grid, &u, &|p| p.x.z() + 0.5, 6).unwrap();
        assert!(same < 1e-13);
        let off = l2_surface_error(&grid, &u, &|p| p.x.z(), 6).unwrap();
        assert!((off - 0.5 * (4.0 * PI).sqrt()).abs() < 1e-6);
    }
}
