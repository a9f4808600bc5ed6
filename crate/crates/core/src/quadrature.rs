//! Gauss–Legendre rules and surface quadrature for the `1/|x−y|` kernel.
//!
//! Panels are integrated in chart parameters with the metric factor folded
//! into the weights. Relative to a target point `x` a panel is
//!
//! * far: plain tensor Gauss rule,
//! * near (closer than `near_factor` panel diameters): subdivided `s` times
//!   toward the closest parameter point,
//! * containing `x`: split into four triangles with apex at the preimage of
//!   `x`, each pulled back to the unit square by the Duffy map
//!   `(u, v) ↦ A + u(B − A) + uv(C − B)`, whose Jacobian `u·2|T|` cancels the
//!   kernel singularity. Triangles degenerate when the apex lies on an edge or
//!   corner and are skipped.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // float methods come from libm when core lacks them
use num_traits::Float;

use crate::atlas::{ParamRect, SurfaceGrid, SurfacePoint};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule1D {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// `q`-point Gauss–Legendre rule on `[0, 1]`, `1 ≤ q ≤ 30`.
///
/// Roots of `P_q` by Newton iteration from the Chebyshev-like initial guess.
pub fn gauss_rule(q: usize) -> Result<QuadRule1D> {
    if !(1..=30).contains(&q) {
        return Err(Error::GaussOrder(q));
    }
    let mut nodes = alloc::vec![0.0; q];
    let mut weights = alloc::vec![0.0; q];
    let qf = q as f64;
    for i in 0..q.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(q, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root; store ascending on [0,1]
        nodes[q - 1 - i] = 0.5 * (1.0 + x);
        nodes[i] = 0.5 * (1.0 - x);
        weights[q - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    Ok(QuadRule1D { nodes, weights })
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Orders and thresholds for surface quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub regular_order: usize,
    pub singular_order: usize,
    /// Order of the polar rule on the panel that contains the target.
    pub duffy_order: usize,
    /// Subdivision depth `s` for near-singular panels.
    pub subdivision: usize,
    /// A panel is near a point closer than this many panel diameters.
    pub near_factor: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            regular_order: 4,
            singular_order: 6,
            duffy_order: 8,
            subdivision: 2,
            near_factor: 2.0,
        }
    }
}

/// The rules of a [`QuadConfig`], built once.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub config: QuadConfig,
    pub regular: QuadRule1D,
    pub singular: QuadRule1D,
    pub duffy: QuadRule1D,
}

impl Quadrature {
    pub fn new(config: QuadConfig) -> Result<Self> {
        if !(config.near_factor >= 0.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "near_factor must be non-negative, got {}",
                config.near_factor
            )));
        }
        Ok(Quadrature {
            config,
            regular: gauss_rule(config.regular_order)?,
            singular: gauss_rule(config.singular_order)?,
            duffy: gauss_rule(config.duffy_order)?,
        })
    }
}

/// One surface quadrature point; `weight` already contains the metric factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub xi: [f64; 2],
    pub y: Vec3,
    pub weight: f64,
}

/// Position of a panel relative to a target point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Proximity {
    Far,
    /// Closest parameter point (approximately) and its distance.
    Near {
        xi: [f64; 2],
        distance: f64,
    },
    /// The target lies on the panel at parameter `xi`.
    On {
        xi: [f64; 2],
    },
}

/// Target of a kernel integration: a point of Γ (with its chart coordinates)
/// or a free point of R³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Surface(SurfacePoint),
    Free(Vec3),
}

impl Target {
    pub fn x(&self) -> Vec3 {
        match self {
            Target::Surface(p) => p.x,
            Target::Free(x) => *x,
        }
    }
}

/// Classify `panel` relative to `target`.
pub fn classify(
    grid: &SurfaceGrid,
    panel: usize,
    target: &Target,
    config: &QuadConfig,
) -> Proximity {
    let geom = grid.panel_geometry(panel);
    let x = target.x();
    let reach = config.near_factor * geom.diameter;
    if x.distance(geom.center) - geom.radius > reach {
        return Proximity::Far;
    }
    let chart_id = grid.panels()[panel].chart;
    let chart = &grid.atlas().charts[chart_id];
    let rect = grid.panel_rect(panel);
    let raw = match target {
        Target::Surface(p) if p.chart == chart_id => Some(p.xi),
        _ => chart.preimage(x),
    };
    let Some(raw) = raw else {
        return Proximity::Far;
    };
    let xi = rect.clamp(raw);
    let distance = chart.map(xi).distance(x);
    let on_tol = 1e-10 * geom.diameter;
    if matches!(target, Target::Surface(_)) && distance <= on_tol {
        Proximity::On { xi }
    } else if distance < reach {
        Proximity::Near { xi, distance }
    } else {
        Proximity::Far
    }
}

/// Tensor Gauss points of `rule` on `rect`.
pub fn regular_points(
    grid: &SurfaceGrid,
    chart: usize,
    rect: &ParamRect,
    rule: &QuadRule1D,
    mut visit: impl FnMut(KernelPoint),
) {
    let c = &grid.atlas().charts[chart];
    let w = rect.width();
    let area = w[0] * w[1];
    for (t2, w2) in rule.nodes.iter().zip(&rule.weights) {
        for (t1, w1) in rule.nodes.iter().zip(&rule.weights) {
            let xi = [rect.lo[0] + t1 * w[0], rect.lo[1] + t2 * w[1]];
            let (y, metric) = c.map_with_metric(xi);
            visit(KernelPoint {
                xi,
                y,
                weight: w1 * w2 * area * metric,
            });
        }
    }
}

/// Duffy rule of the triangles `(apex, corner_s, corner_{s+1})` of `rect`:
/// each is pulled back from the unit square so the `u` factor of the weight
/// cancels a `1/r` singularity at the apex.
fn triangle_duffy(
    rect: &ParamRect,
    apex: [f64; 2],
    rule: &QuadRule1D,
    visit: &mut impl FnMut([f64; 2], f64),
) {
    let corners = rect.corners();
    let degenerate = 1e-14 * rect.area();
    for s in 0..4 {
        let b = corners[s];
        let cc = corners[(s + 1) % 4];
        let ab = [b[0] - apex[0], b[1] - apex[1]];
        let bc = [cc[0] - b[0], cc[1] - b[1]];
        let det = (ab[0] * bc[1] - ab[1] * bc[0]).abs();
        if det <= degenerate {
            continue;
        }
        for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
            for (v, wv) in rule.nodes.iter().zip(&rule.weights) {
                let xi = [
                    apex[0] + u * (ab[0] + v * bc[0]),
                    apex[1] + u * (ab[1] + v * bc[1]),
                ];
                visit(xi, wu * wv * u * det);
            }
        }
    }
}

fn tensor_points(rect: &ParamRect, rule: &QuadRule1D, visit: &mut impl FnMut([f64; 2], f64)) {
    let w = rect.width();
    for (t2, w2) in rule.nodes.iter().zip(&rule.weights) {
        for (t1, w1) in rule.nodes.iter().zip(&rule.weights) {
            visit(
                [rect.lo[0] + t1 * w[0], rect.lo[1] + t2 * w[1]],
                w1 * w2 * w[0] * w[1],
            );
        }
    }
}

fn oriented_rect(apex: [f64; 2], dir: [f64; 2], from: [f64; 2], to: [f64; 2]) -> ParamRect {
    let a = [apex[0] + dir[0] * from[0], apex[1] + dir[1] * from[1]];
    let b = [apex[0] + dir[0] * to[0], apex[1] + dir[1] * to[1]];
    ParamRect {
        lo: [a[0].min(b[0]), a[1].min(b[1])],
        hi: [a[0].max(b[0]), a[1].max(b[1])],
    }
}

/// A rectangle with the singular point at one corner: Duffy on the square
/// at that corner, then pieces of doubling length along the longer side, so
/// every piece is at least as far from the apex as it is long.
fn corner_points(
    rect: &ParamRect,
    apex: [f64; 2],
    rule: &QuadRule1D,
    visit: &mut impl FnMut([f64; 2], f64),
) {
    let w = rect.width();
    let dir = [
        if apex[0] <= rect.lo[0] { 1.0 } else { -1.0 },
        if apex[1] <= rect.lo[1] { 1.0 } else { -1.0 },
    ];
    let side = w[0].min(w[1]);
    triangle_duffy(
        &oriented_rect(apex, dir, [0.0, 0.0], [side, side]),
        apex,
        rule,
        visit,
    );
    let long = if w[0] >= w[1] { 0 } else { 1 };
    let mut from = side;
    while from < w[long] * (1.0 - 1e-12) {
        let to = (1.5 * from).min(w[long]);
        let (mut a, mut b) = ([0.0; 2], [side; 2]);
        a[long] = from;
        b[long] = to;
        tensor_points(&oriented_rect(apex, dir, a, b), rule, visit);
        from = to;
    }
}

/// Duffy points of the parameter rectangle `rect` about `apex ∈ rect`,
/// visited as `(xi, weight)` with flat weights.
///
/// The rectangle is cut at the apex into up to four pieces that each have
/// the apex as a corner. Cutting first keeps the rule accurate when the apex
/// is close to a side, where a direct split into four triangles would leave
/// one of them nearly flat.
pub fn duffy_param_points(
    rect: &ParamRect,
    apex: [f64; 2],
    rule: &QuadRule1D,
    mut visit: impl FnMut([f64; 2], f64),
) {
    let w = rect.width();
    let tiny = 1e-12 * (w[0] + w[1]);
    for (x0, x1) in [(rect.lo[0], apex[0]), (apex[0], rect.hi[0])] {
        for (y0, y1) in [(rect.lo[1], apex[1]), (apex[1], rect.hi[1])] {
            if x1 - x0 <= tiny || y1 - y0 <= tiny {
                continue;
            }
            let piece = ParamRect {
                lo: [x0, y0],
                hi: [x1, y1],
            };
            corner_points(&piece, apex, rule, &mut visit);
        }
    }
}

/// Duffy points on `rect` about the apex `apex ∈ rect`.
pub fn duffy_points(
    grid: &SurfaceGrid,
    chart: usize,
    rect: &ParamRect,
    apex: [f64; 2],
    rule: &QuadRule1D,
    mut visit: impl FnMut(KernelPoint),
) {
    let c = &grid.atlas().charts[chart];
    duffy_param_points(rect, apex, rule, |xi, w| {
        let (y, metric) = c.map_with_metric(xi);
        visit(KernelPoint {
            xi,
            y,
            weight: w * metric,
        });
    });
}

/// Deepest quadrisection used for nearly singular panels.
pub const MAX_NEAR_DEPTH: usize = 12;

/// Gauss points on `rect` after adaptive quadrisection for a kernel
/// singular at `x`, whose closest parameter point is `toward`.
///
/// The piece containing `toward` is split for the first `depth` levels;
/// beyond that any piece closer to `x` than its own diameter is split again,
/// up to [`MAX_NEAR_DEPTH`] levels.
#[allow(clippy::too_many_arguments)]
pub fn subdivided_points(
    grid: &SurfaceGrid,
    chart: usize,
    rect: &ParamRect,
    x: Vec3,
    toward: [f64; 2],
    depth: usize,
    rule: &QuadRule1D,
    visit: &mut impl FnMut(KernelPoint),
) {
    let c = &grid.atlas().charts[chart];
    subdivide(grid, c, chart, rect, x, toward, depth, 0, rule, visit);
}

#[allow(clippy::too_many_arguments)]
fn subdivide(
    grid: &SurfaceGrid,
    c: &crate::atlas::Chart,
    chart: usize,
    rect: &ParamRect,
    x: Vec3,
    toward: [f64; 2],
    depth: usize,
    level: usize,
    rule: &QuadRule1D,
    visit: &mut impl FnMut(KernelPoint),
) {
    let contains = rect.clamp(toward) == toward;
    let split = level < MAX_NEAR_DEPTH.max(depth)
        && ((level < depth && contains) || {
            let size = c.map(rect.lo).distance(c.map(rect.hi));
            c.map(rect.clamp(toward)).distance(x) < size
        });
    if !split {
        regular_points(grid, chart, rect, rule, &mut *visit);
        return;
    }
    for child in rect.split().iter() {
        subdivide(
            grid,
            c,
            chart,
            child,
            x,
            toward,
            depth,
            level + 1,
            rule,
            visit,
        );
    }
}

/// Quadrature points of `panel` adapted to the kernel singularity at `target`.
pub fn panel_points(
    grid: &SurfaceGrid,
    panel: usize,
    target: &Target,
    quad: &Quadrature,
    mut visit: impl FnMut(KernelPoint),
) -> Proximity {
    let prox = classify(grid, panel, target, &quad.config);
    let chart = grid.panels()[panel].chart;
    let rect = grid.panel_rect(panel);
    match prox {
        Proximity::Far => regular_points(grid, chart, &rect, &quad.regular, visit),
        Proximity::Near { xi, .. } => subdivided_points(
            grid,
            chart,
            &rect,
            target.x(),
            xi,
            quad.config.subdivision,
            &quad.singular,
            &mut visit,
        ),
        Proximity::On { xi } => duffy_points(grid, chart, &rect, xi, &quad.duffy, visit),
    }
    prox
}

/// `∫_Γ f dΓ` by tensor Gauss of order `q` on every panel.
pub fn surface_integral(
    grid: &SurfaceGrid,
    f: impl Fn(&SurfacePoint) -> f64,
    q: usize,
) -> Result<f64> {
    let rule = gauss_rule(q)?;
    let mut total = 0.0;
    for panel in 0..grid.len() {
        let chart = grid.panels()[panel].chart;
        let mut acc = 0.0;
        regular_points(grid, chart, &grid.panel_rect(panel), &rule, |kp| {
            acc += kp.weight
                * f(&SurfacePoint {
                    chart,
                    xi: kp.xi,
                    x: kp.y,
                });
        });
        total += acc;
    }
    Ok(total)
}

/// `∫_panel g(y)/|x−y| dΓ_y`, choosing the Duffy, subdivided or regular path
/// from the position of `x`.
pub fn singular_panel_integral(
    grid: &SurfaceGrid,
    panel: usize,
    target: &Target,
    g: impl Fn(&SurfacePoint) -> f64,
    quad: &Quadrature,
) -> f64 {
    let x = target.x();
    let chart = grid.panels()[panel].chart;
    let mut acc = 0.0;
    panel_points(grid, panel, target, quad, |kp| {
        acc += kp.weight
            * g(&SurfacePoint {
                chart,
                xi: kp.xi,
                x: kp.y,
            })
            / x.distance(kp.y);
    });
    acc
}
