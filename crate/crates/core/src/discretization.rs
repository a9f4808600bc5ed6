//! Dense Galerkin and collocation systems `A_N u_N = f_N` for the
//! single-layer equation, their solution, and stability diagnostics.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // float methods come from libm when core lacks them
use num_traits::Float;

use crate::atlas::{ChartAtlas, SurfaceGrid, SurfacePoint};
use crate::basis::{GlobalBasis, MAX_LOCAL};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::linalg::{extreme_singular_values, inf_norm, Cholesky, DenseMatrix, Lu};
use crate::quadrature::{
    classify, gauss_rule, panel_points, regular_points, Proximity, QuadRule1D, Quadrature, Target,
};

const FOUR_PI: f64 = 4.0 * PI;

/// Relative residual accepted after a dense solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Collocation points closer than this (relative to the surface scale) coincide.
pub const COINCIDENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Galerkin,
    Collocation,
}

impl Method {
    /// Numeric tag used in binary matrix dumps.
    pub fn code(self) -> u64 {
        match self {
            Method::Galerkin => 1,
            Method::Collocation => 2,
        }
    }

    pub fn from_code(code: u64) -> Option<Self> {
        match code {
            1 => Some(Method::Galerkin),
            2 => Some(Method::Collocation),
            _ => None,
        }
    }
}

/// Measure used for the outer (test) integral of a Galerkin system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pairing {
    /// `dΓ`: symmetric positive definite matrices.
    Surface,
    /// `dξ` on the chart rectangles, without the metric factor.
    Parameter,
}

/// How boundary data are sampled in a collocation row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Restriction {
    /// Value at the collocation point.
    Point,
    /// Value at the point of the δ-disc where `|f|` is smallest.
    Min,
    /// Mean over the δ-disc.
    Mean,
}

/// An assembled system.
#[derive(Debug, Clone)]
pub struct DenseSystem {
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
    pub method: Method,
    /// Set for Galerkin systems.
    pub pairing: Option<Pairing>,
    /// Set for collocation systems.
    pub restriction: Option<Restriction>,
    /// `‖φ_i‖_{L2(Γ)}` of the basis the system was built from.
    pub basis_norms: Vec<f64>,
}

impl DenseSystem {
    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    /// Whether the matrix is expected to be symmetric positive definite.
    pub fn is_spd(&self) -> bool {
        self.method == Method::Galerkin && self.pairing == Some(Pairing::Surface)
    }
}

#[cfg(feature = "parallel")]
fn map_indexed<T: Send>(
    range: core::ops::Range<usize>,
    f: impl Fn(usize) -> T + Sync + Send,
) -> Vec<T> {
    use rayon::prelude::*;
    range.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indexed<T>(range: core::ops::Range<usize>, f: impl Fn(usize) -> T) -> Vec<T> {
    range.map(f).collect()
}

/// A quadrature point of a panel with the local basis values there.
#[derive(Clone, Copy)]
struct BasisPoint {
    p: SurfacePoint,
    /// `dΓ` weight.
    w: f64,
    /// `dξ` weight.
    w_param: f64,
    vals: [f64; MAX_LOCAL],
}

fn basis_points(basis: &dyn GlobalBasis, panel: usize, rule: &QuadRule1D) -> Vec<BasisPoint> {
    let grid = basis.grid();
    let chart = grid.panels()[panel].chart;
    let c = &grid.atlas().charts[chart];
    let nl = basis.local_len();
    let mut out = Vec::with_capacity(rule.order() * rule.order());
    regular_points(grid, chart, &grid.panel_rect(panel), rule, |kp| {
        let mut vals = [0.0; MAX_LOCAL];
        basis.eval_local(panel, kp.xi, &mut vals[..nl]);
        out.push(BasisPoint {
            p: SurfacePoint {
                chart,
                xi: kp.xi,
                x: kp.y,
            },
            w: kp.weight,
            w_param: kp.weight / c.metric_factor(kp.xi),
            vals,
        });
    });
    out
}

/// `‖φ_i‖_{L2(Γ)}` for every basis function, by tensor Gauss of order `q`.
pub fn basis_l2_norms(basis: &dyn GlobalBasis, q: usize) -> Result<Vec<f64>> {
    let rule = gauss_rule(q)?;
    let nl = basis.local_len();
    let mut sq = alloc::vec![0.0; basis.len()];
    for panel in 0..basis.grid().len() {
        let pts = basis_points(basis, panel, &rule);
        let dofs = basis.panel_dofs(panel);
        // a merged function may appear twice on one panel only if the grid is
        // degenerate, so the local values can be squared independently
        let mut acc = [0.0; MAX_LOCAL];
        for bp in &pts {
            for a in 0..nl {
                acc[a] += bp.w * bp.vals[a] * bp.vals[a];
            }
        }
        for (a, &d) in dofs.iter().enumerate() {
            sq[d] += acc[a];
        }
    }
    Ok(sq.into_iter().map(|v| v.sqrt()).collect())
}

/// Whether two panels share at least a vertex.
fn panels_touch(grid: &SurfaceGrid, p: usize, q: usize, quad: &Quadrature) -> bool {
    if p == q {
        return true;
    }
    let (pp, qq) = (grid.panels()[p], grid.panels()[q]);
    if pp.chart == qq.chart {
        return pp.i.abs_diff(qq.i) <= 1 && pp.j.abs_diff(qq.j) <= 1;
    }
    let corner_on = |a: usize, b: usize| {
        let chart = &grid.atlas().charts[grid.panels()[a].chart];
        grid.panel_rect(a).corners().iter().any(|&xi| {
            let target = Target::Surface(SurfacePoint {
                chart: grid.panels()[a].chart,
                xi,
                x: chart.map(xi),
            });
            matches!(
                classify(grid, b, &target, &quad.config),
                Proximity::On { .. }
            )
        })
    };
    corner_on(p, q) || corner_on(q, p)
}

fn panels_far(grid: &SurfaceGrid, p: usize, q: usize, quad: &Quadrature) -> bool {
    let (gp, gq) = (grid.panel_geometry(p), grid.panel_geometry(q));
    let gap = gp.center.distance(gq.center) - gp.radius - gq.radius;
    gap > quad.config.near_factor * gp.diameter.max(gq.diameter)
}

struct GalerkinContext<'a> {
    basis: &'a dyn GlobalBasis,
    quad: &'a Quadrature,
    pairing: Pairing,
    regular: Vec<Vec<BasisPoint>>,
    singular: Vec<Vec<BasisPoint>>,
}

impl GalerkinContext<'_> {
    fn outer_weight(&self, bp: &BasisPoint) -> f64 {
        match self.pairing {
            Pairing::Surface => bp.w,
            Pairing::Parameter => bp.w_param,
        }
    }

    /// `∫_P ∫_Q φ_a(x) φ_b(y) / |x−y| dΓ_y dμ_x` for the local functions of
    /// panels `p` (outer) and `q` (inner), row-major in `(a, b)`.
    fn block(&self, p: usize, q: usize, out: &mut [f64]) {
        let nl = self.basis.local_len();
        let grid = self.basis.grid();
        out[..nl * nl].iter_mut().for_each(|v| *v = 0.0);
        if panels_far(grid, p, q, self.quad) {
            for bo in &self.regular[p] {
                let wo = self.outer_weight(bo);
                let mut g = [0.0; MAX_LOCAL];
                for bi in &self.regular[q] {
                    let k = bi.w / bo.p.x.distance(bi.p.x);
                    for b in 0..nl {
                        g[b] += k * bi.vals[b];
                    }
                }
                for a in 0..nl {
                    let f = wo * bo.vals[a];
                    for b in 0..nl {
                        out[a * nl + b] += f * g[b];
                    }
                }
            }
            return;
        }
        let outer = if panels_touch(grid, p, q, self.quad) {
            &self.singular[p]
        } else {
            &self.regular[p]
        };
        let mut vals = [0.0; MAX_LOCAL];
        for bo in outer {
            let wo = self.outer_weight(bo);
            let mut g = [0.0; MAX_LOCAL];
            panel_points(grid, q, &Target::Surface(bo.p), self.quad, |kp| {
                self.basis.eval_local(q, kp.xi, &mut vals[..nl]);
                let k = kp.weight / bo.p.x.distance(kp.y);
                for b in 0..nl {
                    g[b] += k * vals[b];
                }
            });
            for a in 0..nl {
                let f = wo * bo.vals[a];
                for b in 0..nl {
                    out[a * nl + b] += f * g[b];
                }
            }
        }
    }
}

/// Outer panels handled per parallel batch; bounds the memory of pending blocks.
const PANEL_BATCH: usize = 32;

/// Galerkin system `A_ij = ⟨φ_i, Aφ_j⟩`, `f_i = ⟨φ_i, f⟩`.
///
/// With [`Pairing::Surface`] only blocks with outer panel ≤ inner panel are
/// integrated; the others are their transposes, so the matrix is exactly
/// symmetric.
pub fn assemble_galerkin<F>(
    basis: &dyn GlobalBasis,
    f: &F,
    pairing: Pairing,
    quad: &Quadrature,
) -> Result<DenseSystem>
where
    F: Fn(&SurfacePoint) -> f64 + Sync,
{
    let grid = basis.grid();
    let n_panels = grid.len();
    let nl = basis.local_len();
    let ctx = GalerkinContext {
        basis,
        quad,
        pairing,
        regular: (0..n_panels)
            .map(|p| basis_points(basis, p, &quad.regular))
            .collect(),
        singular: (0..n_panels)
            .map(|p| basis_points(basis, p, &quad.singular))
            .collect(),
    };
    let symmetric = pairing == Pairing::Surface;
    let n = basis.len();
    let mut a = DenseMatrix::zeros(n, n);

    let mut start = 0;
    while start < n_panels {
        let end = (start + PANEL_BATCH).min(n_panels);
        let rows: Vec<Vec<f64>> = map_indexed(start..end, |p| {
            let first_q = if symmetric { p } else { 0 };
            let mut blocks = alloc::vec![0.0; (n_panels - first_q) * nl * nl];
            for (k, q) in (first_q..n_panels).enumerate() {
                ctx.block(p, q, &mut blocks[k * nl * nl..(k + 1) * nl * nl]);
            }
            blocks
        });
        for (p, blocks) in (start..end).zip(rows) {
            let first_q = if symmetric { p } else { 0 };
            let dp = basis.panel_dofs(p);
            for (k, q) in (first_q..n_panels).enumerate() {
                let block = &blocks[k * nl * nl..(k + 1) * nl * nl];
                let dq = basis.panel_dofs(q);
                for (ia, &i) in dp.iter().enumerate() {
                    for (jb, &j) in dq.iter().enumerate() {
                        let v = block[ia * nl + jb] / FOUR_PI;
                        if symmetric && p == q {
                            let vt = block[jb * nl + ia] / FOUR_PI;
                            a[(i, j)] += 0.5 * (v + vt);
                        } else {
                            a[(i, j)] += v;
                            if symmetric {
                                a[(j, i)] += v;
                            }
                        }
                    }
                }
            }
        }
        start = end;
    }
    if symmetric {
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = s;
                a[(j, i)] = s;
            }
        }
    }

    let mut rhs = alloc::vec![0.0; n];
    for p in 0..n_panels {
        let dp = basis.panel_dofs(p);
        for bp in &ctx.singular[p] {
            let w = ctx.outer_weight(bp) * f(&bp.p);
            for (ia, &i) in dp.iter().enumerate() {
                rhs[i] += w * bp.vals[ia];
            }
        }
    }

    Ok(DenseSystem {
        matrix: a,
        rhs,
        method: Method::Galerkin,
        pairing: Some(pairing),
        restriction: None,
        basis_norms: basis_l2_norms(basis, quad.config.singular_order)?,
    })
}

/// Collocation points `Y_N` with their δ-neighbourhood radii.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSet {
    pub points: Vec<SurfacePoint>,
    /// Radius `δ_j` of the neighbourhood of each point.
    pub deltas: Vec<f64>,
    pub restriction: Restriction,
}

impl CollocationSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Switch the restriction variant. `delta` fixes every radius; `None`
    /// keeps the default radii. Min and mean variants require the
    /// neighbourhoods to be free of other collocation points.
    pub fn with_restriction(
        mut self,
        restriction: Restriction,
        delta: Option<f64>,
    ) -> Result<Self> {
        if let Some(d) = delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::NonPositiveDistance(d));
            }
            self.deltas.iter_mut().for_each(|v| *v = d);
        }
        self.restriction = restriction;
        if restriction != Restriction::Point {
            check_separation(&self.points, &self.deltas)?;
        }
        Ok(self)
    }
}

fn nearest_neighbour_distances(points: &[SurfacePoint]) -> Vec<(f64, usize)> {
    let mut best = alloc::vec![(f64::INFINITY, usize::MAX); points.len()];
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = points[i].x.distance(points[j].x);
            if d < best[i].0 {
                best[i] = (d, j);
            }
            if d < best[j].0 {
                best[j] = (d, i);
            }
        }
    }
    best
}

fn check_separation(points: &[SurfacePoint], deltas: &[f64]) -> Result<()> {
    for (j, &(d, i)) in nearest_neighbour_distances(points).iter().enumerate() {
        if i != usize::MAX && d <= deltas[j] {
            return Err(Error::NeighborhoodOverlap {
                center: j,
                inside: i,
            });
        }
    }
    Ok(())
}

/// Fraction of the containing panel's diameter used as default radius.
pub const DEFAULT_DELTA_FRACTION: f64 = 0.5;

/// One collocation point per basis function: Lagrange nodes or Greville
/// points of the splines. The default radius is half the containing panel's
/// diameter, reduced where needed so no other point falls inside.
pub fn choose_collocation_points(basis: &dyn GlobalBasis) -> Result<CollocationSet> {
    let grid = basis.grid();
    let points = basis.collocation_points();
    let nn = nearest_neighbour_distances(&points);
    let tol = COINCIDENCE_TOL * grid.atlas().scale();
    for (j, &(d, i)) in nn.iter().enumerate() {
        if d <= tol {
            return Err(Error::CoincidentPoints(i.min(j), i.max(j)));
        }
    }
    let deltas = points
        .iter()
        .zip(&nn)
        .map(|(p, &(d, _))| {
            let panel = grid.panel_at(p.chart, p.xi);
            (DEFAULT_DELTA_FRACTION * grid.panel_diameter(panel)).min(0.9 * d)
        })
        .collect();
    Ok(CollocationSet {
        points,
        deltas,
        restriction: Restriction::Point,
    })
}

/// Points and weights of a δ-disc about `center`: a polar rule in the
/// tangent plane projected radially onto Γ. Weights sum to the area of the
/// projected disc.
pub fn disc_rule(
    atlas: &ChartAtlas,
    center: &SurfacePoint,
    delta: f64,
) -> Result<Vec<(SurfacePoint, f64)>> {
    const ANGLES: usize = 8;
    let radial = gauss_rule(3)?;
    let (e1, e2, n) = tangent_frame(atlas, center);
    let _ = n;
    let mut out = Vec::with_capacity(radial.order() * ANGLES);
    for (t, wt) in radial.nodes.iter().zip(&radial.weights) {
        let rho = t * delta;
        for k in 0..ANGLES {
            let th = 2.0 * PI * k as f64 / ANGLES as f64;
            let p = center.x + e1 * (rho * th.cos()) + e2 * (rho * th.sin());
            let jac = atlas.radial_projection_jacobian(p, e1, e2);
            let w = wt * delta * rho * (2.0 * PI / ANGLES as f64) * jac;
            out.push((atlas.project_radial(p), w));
        }
    }
    Ok(out)
}

fn tangent_frame(atlas: &ChartAtlas, p: &SurfacePoint) -> (Vec3, Vec3, Vec3) {
    let chart = &atlas.charts[p.chart];
    let n = chart.unit_normal(p.xi);
    let [t1, _] = chart.tangents(p.xi);
    let e1 = (t1 - n * t1.dot(n)).normalized();
    let e2 = n.cross(e1);
    (e1, e2, n)
}

/// Minimiser of `|f|` over the δ-disc: 33 samples (centre and four rings of
/// eight) followed by a compass search in the tangent plane.
pub fn min_abs_in_disc<F>(
    atlas: &ChartAtlas,
    center: &SurfacePoint,
    delta: f64,
    f: &F,
) -> SurfacePoint
where
    F: Fn(&SurfacePoint) -> f64,
{
    let (e1, e2, _) = tangent_frame(atlas, center);
    let at = |u: f64, v: f64| atlas.project_radial(center.x + e1 * u + e2 * v);
    let mut best = (f(center).abs(), 0.0, 0.0, *center);
    for ring in 1..=4 {
        let r = delta * ring as f64 / 4.0;
        for k in 0..8 {
            let th = 2.0 * PI * k as f64 / 8.0;
            let (u, v) = (r * th.cos(), r * th.sin());
            let p = at(u, v);
            let val = f(&p).abs();
            if val < best.0 {
                best = (val, u, v, p);
            }
        }
    }
    let mut step = delta / 8.0;
    while step > delta / 256.0 {
        let mut moved = false;
        for (du, dv) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let (u, v) = (best.1 + du, best.2 + dv);
            if u * u + v * v > delta * delta {
                continue;
            }
            let p = at(u, v);
            let val = f(&p).abs();
            if val < best.0 {
                best = (val, u, v, p);
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    best.3
}

/// `(Aφ_i)(x)` for all `i`, accumulated into `row` (length `N`).
fn operator_row(
    basis: &dyn GlobalBasis,
    x: &SurfacePoint,
    quad: &Quadrature,
    scale: f64,
    row: &mut [f64],
) {
    let grid = basis.grid();
    let nl = basis.local_len();
    let mut vals = [0.0; MAX_LOCAL];
    for q in 0..grid.len() {
        let mut g = [0.0; MAX_LOCAL];
        panel_points(grid, q, &Target::Surface(*x), quad, |kp| {
            basis.eval_local(q, kp.xi, &mut vals[..nl]);
            let k = kp.weight / x.x.distance(kp.y);
            for b in 0..nl {
                g[b] += k * vals[b];
            }
        });
        for (b, &d) in basis.panel_dofs(q).iter().enumerate() {
            row[d] += scale * g[b] / FOUR_PI;
        }
    }
}

/// Collocation system: row `j` is the chosen restriction of `Aφ_i` and of
/// `f` at collocation point `j`.
pub fn assemble_collocation<F>(
    basis: &dyn GlobalBasis,
    colloc: &CollocationSet,
    f: &F,
    quad: &Quadrature,
) -> Result<DenseSystem>
where
    F: Fn(&SurfacePoint) -> f64 + Sync,
{
    let n = basis.len();
    if colloc.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: colloc.len(),
        });
    }
    if colloc.restriction != Restriction::Point {
        check_separation(&colloc.points, &colloc.deltas)?;
    }
    let atlas = basis.grid().atlas();
    let rows: Vec<Result<(Vec<f64>, f64)>> = map_indexed(0..n, |j| {
        let y = &colloc.points[j];
        let mut row = alloc::vec![0.0; n];
        let rhs = match colloc.restriction {
            Restriction::Point => {
                operator_row(basis, y, quad, 1.0, &mut row);
                f(y)
            }
            Restriction::Min => {
                let p = min_abs_in_disc(atlas, y, colloc.deltas[j], f);
                operator_row(basis, &p, quad, 1.0, &mut row);
                f(&p)
            }
            Restriction::Mean => {
                let disc = disc_rule(atlas, y, colloc.deltas[j])?;
                let mes: f64 = disc.iter().map(|(_, w)| w).sum();
                let mut rhs = 0.0;
                for (p, w) in &disc {
                    operator_row(basis, p, quad, w / mes, &mut row);
                    rhs += w / mes * f(p);
                }
                rhs
            }
        };
        Ok((row, rhs))
    });
    let mut matrix = DenseMatrix::zeros(n, n);
    let mut rhs = alloc::vec![0.0; n];
    for (j, r) in rows.into_iter().enumerate() {
        let (row, v) = r?;
        matrix.row_mut(j).copy_from_slice(&row);
        rhs[j] = v;
    }
    Ok(DenseSystem {
        matrix,
        rhs,
        method: Method::Collocation,
        pairing: None,
        restriction: Some(colloc.restriction),
        basis_norms: basis_l2_norms(basis, quad.config.singular_order)?,
    })
}

/// `‖A u − f‖∞ / ‖f‖∞` (absolute when `f = 0`).
pub fn relative_residual(system: &DenseSystem, u: &[f64]) -> f64 {
    let au = system.matrix.mul_vec(u);
    let r: Vec<f64> = au.iter().zip(&system.rhs).map(|(a, b)| a - b).collect();
    let fnorm = inf_norm(&system.rhs);
    if fnorm > 0.0 {
        inf_norm(&r) / fnorm
    } else {
        inf_norm(&r)
    }
}

/// Solves the system: Cholesky for SPD Galerkin matrices (failure is an
/// error), LU with partial pivoting otherwise. Up to three steps of
/// iterative refinement enforce the residual tolerance.
pub fn solve_dense(system: &DenseSystem) -> Result<Vec<f64>> {
    let a = &system.matrix;
    if a.rows() != system.rhs.len() || !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: system.rhs.len(),
        });
    }
    type Solver = alloc::boxed::Box<dyn Fn(&[f64]) -> Vec<f64>>;
    let solver: Solver = if system.is_spd() {
        let c = Cholesky::factor(a)?;
        alloc::boxed::Box::new(move |b| c.solve(b))
    } else {
        let lu = match Lu::factor(a) {
            Ok(lu) => lu,
            Err(Error::SingularMatrix { pivot, .. }) => {
                let (smin, smax) = extreme_singular_values(a);
                return Err(Error::SingularMatrix {
                    pivot,
                    condition: if smin > 0.0 {
                        smax / smin
                    } else {
                        f64::INFINITY
                    },
                });
            }
            Err(e) => return Err(e),
        };
        alloc::boxed::Box::new(move |b| lu.solve(b))
    };
    let mut u = solver(&system.rhs);
    for _ in 0..3 {
        if relative_residual(system, &u) <= RESIDUAL_TOL {
            break;
        }
        let au = a.mul_vec(&u);
        let r: Vec<f64> = system.rhs.iter().zip(&au).map(|(f, g)| f - g).collect();
        let du = solver(&r);
        u.iter_mut().zip(&du).for_each(|(x, d)| *x += d);
    }
    let res = relative_residual(system, &u);
    if !(res <= RESIDUAL_TOL) {
        return Err(Error::Residual {
            residual: res,
            tolerance: RESIDUAL_TOL,
        });
    }
    Ok(u)
}

/// Dominance of the matrix `R_N = {1/|x_k − ỹ_j|}` built from collocation
/// points `ỹ_j` and quadrature nodes `x_k`, row `j` fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HadamardReport {
    /// `r_j(x_j) > Σ_{k≠j} r_j(x_k)` for every `j`. Dominance makes `R_N`,
    /// and with it the quadrature-perturbed system, non-degenerate.
    pub dominant: bool,
    /// `min_j (r_j(x_j) − Σ_{k≠j} r_j(x_k)) / r_j(x_j)`.
    pub min_margin: f64,
    /// `max_j |x_j − ỹ_j|`.
    pub epsilon: f64,
    /// `min_{j≠k} |x_k − ỹ_j|`.
    pub d: f64,
    /// `d/(N−1)`.
    pub spacing_bound: f64,
    /// `ε < d/(N−1)`.
    pub spacing_ok: bool,
}

pub fn hadamard_report(points: &[SurfacePoint], nodes: &[SurfacePoint]) -> Result<HadamardReport> {
    if points.len() != nodes.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: nodes.len(),
        });
    }
    let n = points.len();
    let mut dominant = true;
    let mut min_margin = f64::INFINITY;
    let mut epsilon = 0.0f64;
    let mut d = f64::INFINITY;
    for (j, y) in points.iter().enumerate() {
        let diag_dist = y.x.distance(nodes[j].x);
        epsilon = epsilon.max(diag_dist);
        let diag = 1.0 / diag_dist;
        let mut off = 0.0;
        for (k, x) in nodes.iter().enumerate() {
            if k != j {
                let r = y.x.distance(x.x);
                d = d.min(r);
                off += 1.0 / r;
            }
        }
        dominant &= diag > off;
        min_margin = min_margin.min((diag - off) / diag);
    }
    let spacing_bound = if n < 2 {
        f64::INFINITY
    } else {
        d / (n - 1) as f64
    };
    Ok(HadamardReport {
        dominant,
        min_margin,
        epsilon,
        d,
        spacing_bound,
        spacing_ok: epsilon < spacing_bound,
    })
}

/// Placement of one quadrature node per collocation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodePlacement {
    /// Shift each point along the surface by `fraction · d/(N−1)`, where `d`
    /// is the smallest distance between distinct collocation points.
    Offset { fraction: f64 },
    /// The interior Gauss point of order `order` nearest to the point in its
    /// panel.
    NearestGauss { order: usize },
}

impl Default for NodePlacement {
    fn default() -> Self {
        NodePlacement::Offset { fraction: 0.5 }
    }
}

pub fn quadrature_nodes(
    grid: &SurfaceGrid,
    points: &[SurfacePoint],
    placement: NodePlacement,
) -> Result<Vec<SurfacePoint>> {
    let atlas = grid.atlas();
    match placement {
        NodePlacement::Offset { fraction } => {
            let n = points.len();
            let dmin = nearest_neighbour_distances(points)
                .iter()
                .map(|(d, _)| *d)
                .fold(f64::INFINITY, f64::min);
            let eps = if n > 1 {
                fraction * dmin / (n - 1) as f64
            } else {
                fraction * atlas.scale()
            };
            points
                .iter()
                .map(|p| {
                    let chart = &atlas.charts[p.chart];
                    let [t1, _] = chart.tangents(p.xi);
                    let dxi = eps / t1.norm();
                    let forward = [p.xi[0] + dxi, p.xi[1]];
                    let xi = if chart.contains(forward) {
                        forward
                    } else {
                        [p.xi[0] - dxi, p.xi[1]]
                    };
                    atlas.map_point(p.chart, xi)
                })
                .collect()
        }
        NodePlacement::NearestGauss { order } => {
            let rule = gauss_rule(order)?;
            Ok(points
                .iter()
                .map(|p| {
                    let panel = grid.panel_at(p.chart, p.xi);
                    let mut best = (f64::INFINITY, *p);
                    regular_points(grid, p.chart, &grid.panel_rect(panel), &rule, |kp| {
                        let d = kp.y.distance(p.x);
                        if d < best.0 {
                            best = (
                                d,
                                SurfacePoint {
                                    chart: p.chart,
                                    xi: kp.xi,
                                    x: kp.y,
                                },
                            );
                        }
                    });
                    best.1
                })
                .collect())
        }
    }
}

/// Matrix-level diagnostics of an assembled system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemDiagnostics {
    /// Present when collocation points and quadrature nodes were supplied.
    pub hadamard: Option<HadamardReport>,
    /// `max |a_ij − a_ji| / max |a_ij|`.
    pub symmetry_defect: f64,
    /// `σ_max / σ_min` (infinite for a numerically singular matrix).
    pub condition_estimate: f64,
    /// Smallest singular value after scaling by basis norms: two-sided for
    /// Galerkin systems, columns only for collocation systems.
    pub mu_hat: f64,
}

impl SystemDiagnostics {
    pub fn hadamard_dominant(&self) -> Option<bool> {
        self.hadamard.map(|h| h.dominant)
    }
}

pub fn diagnose_system(
    system: &DenseSystem,
    colloc: Option<&CollocationSet>,
    nodes: Option<&[SurfacePoint]>,
) -> Result<SystemDiagnostics> {
    let a = &system.matrix;
    let max = a.max_abs();
    let symmetry_defect = if max > 0.0 {
        a.symmetry_defect() / max
    } else {
        0.0
    };
    let (smin, smax) = extreme_singular_values(a);
    let condition_estimate = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    let inv: Vec<f64> = system
        .basis_norms
        .iter()
        .map(|&v| if v > 0.0 { 1.0 / v } else { 1.0 })
        .collect();
    let inv = if inv.len() == a.rows() {
        inv
    } else {
        alloc::vec![1.0; a.rows()]
    };
    let ones = alloc::vec![1.0; a.rows()];
    let scaled = match system.method {
        Method::Galerkin => a.scaled(&inv, &inv),
        Method::Collocation => a.scaled(&ones, &inv),
    };
    let (mu_hat, _) = extreme_singular_values(&scaled);
    let hadamard = match (colloc, nodes) {
        (Some(c), Some(x)) => Some(hadamard_report(&c.points, x)?),
        _ => None,
    };
    if let Some(h) = hadamard {
        if !h.spacing_ok {
            log::warn!(
                "quadrature nodes violate the spacing rule: ε = {:e} ≥ d/(N−1) = {:e}",
                h.epsilon,
                h.spacing_bound
            );
        }
    }
    Ok(SystemDiagnostics {
        hadamard,
        symmetry_defect,
        condition_estimate,
        mu_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::unit_sphere_atlas;
    use crate::bspline::GlobalBSplineBasis;
    use crate::lagrange::GlobalLagrangeBasis;
    use crate::quadrature::QuadConfig;

    fn sphere_basis(n: usize, m: usize) -> GlobalBSplineBasis {
        let atlas = unit_sphere_atlas(1.0).unwrap();
        GlobalBSplineBasis::build(&SurfaceGrid::uniform(&atlas, n, m).unwrap()).unwrap()
    }

    fn quad() -> Quadrature {
        Quadrature::new(QuadConfig::default()).unwrap()
    }

    fn system_from(
        m: DenseMatrix,
        rhs: Vec<f64>,
        method: Method,
        pairing: Option<Pairing>,
    ) -> DenseSystem {
        let n = rhs.len();
        DenseSystem {
            matrix: m,
            rhs,
            method,
            pairing,
            restriction: None,
            basis_norms: alloc::vec![1.0; n],
        }
    }

    #[test]
    fn solve_identity_and_two_by_two() {
        let s = system_from(
            DenseMatrix::identity(3),
            alloc::vec![1.0, 2.0, 3.0],
            Method::Collocation,
            None,
        );
        assert_eq!(solve_dense(&s).unwrap(), alloc::vec![1.0, 2.0, 3.0]);
        let a = DenseMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let s = system_from(
            a,
            alloc::vec![3.0, 3.0],
            Method::Galerkin,
            Some(Pairing::Surface),
        );
        let u = solve_dense(&s).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-15 && (u[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn indefinite_surface_galerkin_is_an_error() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        let s = system_from(
            a,
            alloc::vec![1.0, 1.0],
            Method::Galerkin,
            Some(Pairing::Surface),
        );
        assert!(matches!(solve_dense(&s), Err(Error::CholeskyFailed { .. })));
    }

    #[test]
    fn singular_collocation_is_an_error() {
        let a = DenseMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        let s = system_from(a, alloc::vec![1.0, 1.0], Method::Collocation, None);
        assert!(matches!(solve_dense(&s), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn identity_diagnostics() {
        let s = system_from(
            DenseMatrix::identity(5),
            alloc::vec![0.0; 5],
            Method::Galerkin,
            Some(Pairing::Surface),
        );
        let d = diagnose_system(&s, None, None).unwrap();
        assert!((d.condition_estimate - 1.0).abs() < 1e-12);
        assert!((d.mu_hat - 1.0).abs() < 1e-12);
        assert_eq!(d.symmetry_defect, 0.0);
        assert!(d.hadamard.is_none());
    }

    #[test]
    fn method_codes_round_trip() {
        for m in [Method::Galerkin, Method::Collocation] {
            assert_eq!(Method::from_code(m.code()), Some(m));
        }
        assert_eq!(Method::from_code(0), None);
    }

    #[test]
    fn small_galerkin_is_symmetric_and_positive() {
        let b = sphere_basis(2, 0);
        let s = assemble_galerkin(&b, &|_: &SurfacePoint| 1.0, Pairing::Surface, &quad()).unwrap();
        assert_eq!(s.matrix.symmetry_defect(), 0.0);
        for i in 0..s.len() {
            assert!(s.matrix[(i, i)] > 0.0);
        }
        Cholesky::factor(&s.matrix).unwrap();
        // rhs_i = ∫ φ_i dΓ adds up to the sphere area
        let area: f64 = s.rhs.iter().sum();
        assert!((area - 4.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn parameter_pairing_weights_drop_metric() {
        let b = sphere_basis(2, 0);
        let s =
            assemble_galerkin(&b, &|_: &SurfacePoint| 1.0, Pairing::Parameter, &quad()).unwrap();
        let a = b.grid().atlas().charts[0].rect_dims;
        let total: f64 = s.rhs.iter().sum();
        assert!((total - 6.0 * a[0] * a[1]).abs() < 1e-12);
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let b = sphere_basis(2, 0);
        let c = choose_collocation_points(&b).unwrap();
        let s = assemble_collocation(&b, &c, &|_: &SurfacePoint| 0.0, &quad()).unwrap();
        assert!(s.rhs.iter().all(|&v| v == 0.0));
        assert!(solve_dense(&s).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn collocation_points_match_basis() {
        let b = sphere_basis(3, 0);
        let c = choose_collocation_points(&b).unwrap();
        assert_eq!(c.len(), b.len());
        for (p, panel) in c.points.iter().zip(0..) {
            let centre = b.grid().panel_center(panel);
            assert!(p.x.distance(centre.x) < 1e-14);
        }
        let atlas = unit_sphere_atlas(1.0).unwrap();
        let l = GlobalLagrangeBasis::build(&SurfaceGrid::uniform(&atlas, 2, 1).unwrap()).unwrap();
        assert_eq!(choose_collocation_points(&l).unwrap().len(), 26);
    }

    #[test]
    fn overlapping_neighbourhoods_rejected() {
        let b = sphere_basis(3, 0);
        let c = choose_collocation_points(&b).unwrap();
        assert!(matches!(
            c.clone().with_restriction(Restriction::Mean, Some(2.0)),
            Err(Error::NeighborhoodOverlap { .. })
        ));
        assert!(c.clone().with_restriction(Restriction::Mean, None).is_ok());
        assert!(matches!(
            c.with_restriction(Restriction::Min, Some(-1.0)),
            Err(Error::NonPositiveDistance(_))
        ));
    }

    #[test]
    fn disc_area_matches_spherical_cap() {
        // radial projection of a tangent disc of radius δ onto the unit sphere
        // is a cap of half-angle atan δ with area 2π(1 − cos atan δ)
        let atlas = unit_sphere_atlas(1.0).unwrap();
        let c = atlas.map_point(4, [0.3, 0.5]).unwrap();
        let delta = 0.1;
        let area: f64 = disc_rule(&atlas, &c, delta)
            .unwrap()
            .iter()
            .map(|(_, w)| w)
            .sum();
        let want = 2.0 * PI * (1.0 - delta.atan().cos());
        assert!((area - want).abs() < 1e-6 * want, "{area} vs {want}");
    }

    #[test]
    fn min_search_finds_zero_of_linear_data() {
        let atlas = unit_sphere_atlas(1.0).unwrap();
        let c = atlas.map_point(0, [0.785, 0.785]).unwrap();
        // f = x₂ − c₂ − 0.03 vanishes on a line crossing the disc
        let shift = c.x.y() + 0.03;
        let f = |p: &SurfacePoint| p.x.y() - shift;
        let p = min_abs_in_disc(&atlas, &c, 0.1, &f);
        assert!(f(&p).abs() < 2e-3, "{}", f(&p));
        assert!(p.x.distance(c.x) <= 0.11);
    }

    #[test]
    fn offset_nodes_are_dominant() {
        let b = sphere_basis(4, 0);
        let c = choose_collocation_points(&b).unwrap();
        let nodes = quadrature_nodes(b.grid(), &c.points, NodePlacement::default()).unwrap();
        let h = hadamard_report(&c.points, &nodes).unwrap();
        assert!(h.dominant && h.spacing_ok, "{h:?}");
        assert!(h.epsilon > 0.0);
    }
}
