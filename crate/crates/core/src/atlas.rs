//! Closed surfaces as finite unions of analytically parameterized rectangles.
//!
//! Every chart maps a closed parameter rectangle `[0,a]×[0,b]` onto a patch
//! of the surface. Charts meet only along edges; edges shared by two charts
//! are discovered geometrically when the atlas is built and recorded as
//! [`EdgePair`]s.
//!
//! Two families are shipped, both built on the six faces of a cube with the
//! equiangular face parameterization `α, β ∈ [−π/4, π/4]`:
//!
//! * the cubed sphere of radius `R` (radial projection of the cube faces),
//! * the cubed triaxial ellipsoid, the sphere image under `diag(a, b, c)`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};
#[allow(unused_imports)] // float methods come from libm when core lacks them
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Relative tolerance used when deciding whether a parameter lies in a rectangle.
const RECT_TOL: f64 = 1e-12;

/// Analytic family of a chart map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// Radial projection of cube face `face` onto a sphere.
    CubedSphere { face: usize },
    /// Cubed sphere composed with the diagonal scaling onto an ellipsoid.
    CubedEllipsoid { face: usize },
}

impl MapKind {
    pub fn face(self) -> usize {
        match self {
            MapKind::CubedSphere { face } | MapKind::CubedEllipsoid { face } => face,
        }
    }
}

/// `(normal, e1, e2)` for the six cube faces, with `e1 × e2 = normal` so that
/// the parameter orientation induces the outward normal.
const FACE_FRAMES: [[[f64; 3]; 3]; 6] = [
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    [[-1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]],
    [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
    [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
    [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
    [[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]],
];

/// One analytic chart `τ⁻¹ : [0,a]×[0,b] → Γ_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub chart_id: usize,
    pub rect_dims: [f64; 2],
    pub map_kind: MapKind,
    /// Semi-axes of the underlying ellipsoid (all equal to the radius for a sphere).
    pub shape_params: Vec3,
    normal: Vec3,
    e1: Vec3,
    e2: Vec3,
}

impl Chart {
    fn cubed(chart_id: usize, face: usize, semi_axes: Vec3, map_kind: MapKind) -> Self {
        let [n, e1, e2] = FACE_FRAMES[face];
        Chart {
            chart_id,
            rect_dims: [FRAC_PI_2, FRAC_PI_2],
            map_kind,
            shape_params: semi_axes,
            normal: Vec3(n),
            e1: Vec3(e1),
            e2: Vec3(e2),
        }
    }

    /// Closed-rectangle membership with a small relative slack.
    pub fn contains(&self, xi: [f64; 2]) -> bool {
        let [a, b] = self.rect_dims;
        xi[0] >= -RECT_TOL * a
            && xi[0] <= a * (1.0 + RECT_TOL)
            && xi[1] >= -RECT_TOL * b
            && xi[1] <= b * (1.0 + RECT_TOL)
    }

    pub fn clamp(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            xi[0].max(0.0).min(self.rect_dims[0]),
            xi[1].max(0.0).min(self.rect_dims[1]),
        ]
    }

    /// Point on the cube face (not normalized) and the face derivatives.
    #[inline]
    fn cube_point(&self, xi: [f64; 2]) -> (Vec3, Vec3, Vec3) {
        let (ta, tb) = ((xi[0] - FRAC_PI_4).tan(), (xi[1] - FRAC_PI_4).tan());
        let p = self.normal + self.e1 * ta + self.e2 * tb;
        (p, self.e1 * (1.0 + ta * ta), self.e2 * (1.0 + tb * tb))
    }

    /// Embedded point `τ⁻¹(ξ)`. No range check.
    #[inline]
    pub fn map(&self, xi: [f64; 2]) -> Vec3 {
        let (p, _, _) = self.cube_point(xi);
        (p * (1.0 / p.norm())).component_mul(self.shape_params)
    }

    /// Analytic partial derivatives `∂τ⁻¹/∂ξ₁`, `∂τ⁻¹/∂ξ₂`.
    pub fn tangents(&self, xi: [f64; 2]) -> [Vec3; 2] {
        let (p, dp1, dp2) = self.cube_point(xi);
        let r = p.norm();
        let u = p * (1.0 / r);
        let d = |dp: Vec3| (dp - u * u.dot(dp)) * (1.0 / r);
        [
            d(dp1).component_mul(self.shape_params),
            d(dp2).component_mul(self.shape_params),
        ]
    }

    /// Surface-measure density `√det G = |∂₁τ⁻¹ × ∂₂τ⁻¹|`.
    #[inline]
    pub fn metric_factor(&self, xi: [f64; 2]) -> f64 {
        let [t1, t2] = self.tangents(xi);
        t1.cross(t2).norm()
    }

    /// Map point and metric factor in one pass.
    #[inline]
    pub fn map_with_metric(&self, xi: [f64; 2]) -> (Vec3, f64) {
        let (p, dp1, dp2) = self.cube_point(xi);
        let r = p.norm();
        let u = p * (1.0 / r);
        let d = |dp: Vec3| ((dp - u * u.dot(dp)) * (1.0 / r)).component_mul(self.shape_params);
        let metric = d(dp1).cross(d(dp2)).norm();
        (u.component_mul(self.shape_params), metric)
    }

    pub fn unit_normal(&self, xi: [f64; 2]) -> Vec3 {
        let [t1, t2] = self.tangents(xi);
        t1.cross(t2).normalized()
    }

    /// Parameter preimage of the ray through `x`, unclamped. `None` when the
    /// ray does not cross this face's cone.
    pub fn preimage(&self, x: Vec3) -> Option<[f64; 2]> {
        let w = x.component_div(self.shape_params);
        let d = w.dot(self.normal);
        if d <= 1e-300 {
            return None;
        }
        let a = (w.dot(self.e1) / d).atan() + FRAC_PI_4;
        let b = (w.dot(self.e2) / d).atan() + FRAC_PI_4;
        Some([a, b])
    }

    /// Parameter coordinates of an edge point, `s ∈ [0,1]` along increasing ξ.
    pub fn edge_param(&self, edge: Edge, s: f64) -> [f64; 2] {
        let [a, b] = self.rect_dims;
        match edge {
            Edge::Left => [0.0, s * b],
            Edge::Right => [a, s * b],
            Edge::Bottom => [s * a, 0.0],
            Edge::Top => [s * a, b],
        }
    }
}

/// Rectangle sides, named in parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// ξ₁ = 0
    Left,
    /// ξ₁ = a
    Right,
    /// ξ₂ = 0
    Bottom,
    /// ξ₂ = b
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];
}

/// Two chart edges that map to the same curve. With `reversed`, edge
/// parameter `s` on the first matches `1 − s` on the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgePair {
    pub first: (usize, Edge),
    pub second: (usize, Edge),
    pub reversed: bool,
}

/// A point of Γ together with the chart coordinates it was produced from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub chart: usize,
    pub xi: [f64; 2],
    pub x: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartAtlas {
    pub charts: Vec<Chart>,
    pub adjacency: Vec<EdgePair>,
    semi_axes: Vec3,
}

fn check_positive(v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveShape(v))
    }
}

/// Six-chart cubed sphere of the given radius.
pub fn unit_sphere_atlas(radius: f64) -> Result<ChartAtlas> {
    check_positive(radius)?;
    let axes = Vec3::new(radius, radius, radius);
    Ok(ChartAtlas::cubed(axes, |face| MapKind::CubedSphere {
        face,
    }))
}

/// Six-chart cubed triaxial ellipsoid with semi-axes `(a, b, c)`.
pub fn ellipsoid_atlas(semi_axes: [f64; 3]) -> Result<ChartAtlas> {
    for &s in &semi_axes {
        check_positive(s)?;
    }
    Ok(ChartAtlas::cubed(Vec3(semi_axes), |face| {
        MapKind::CubedEllipsoid { face }
    }))
}

impl ChartAtlas {
    fn cubed(axes: Vec3, kind: impl Fn(usize) -> MapKind) -> Self {
        let charts: Vec<Chart> = (0..6).map(|f| Chart::cubed(f, f, axes, kind(f))).collect();
        let adjacency = discover_adjacency(&charts, axes.max_abs());
        ChartAtlas {
            charts,
            adjacency,
            semi_axes: axes,
        }
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    /// Characteristic length (largest semi-axis).
    pub fn scale(&self) -> f64 {
        self.semi_axes.max_abs()
    }

    pub fn semi_axes(&self) -> Vec3 {
        self.semi_axes
    }

    pub fn chart(&self, chart_id: usize) -> Result<&Chart> {
        self.charts
            .get(chart_id)
            .ok_or(Error::UnknownChart(chart_id))
    }

    pub fn map_point(&self, chart_id: usize, xi: [f64; 2]) -> Result<SurfacePoint> {
        let chart = self.chart(chart_id)?;
        if !chart.contains(xi) || !xi[0].is_finite() || !xi[1].is_finite() {
            return Err(Error::ParameterOutOfRange {
                chart: chart_id,
                xi0: xi[0],
                xi1: xi[1],
            });
        }
        let xi = chart.clamp(xi);
        Ok(SurfacePoint {
            chart: chart_id,
            xi,
            x: chart.map(xi),
        })
    }

    pub fn metric_factor(&self, chart_id: usize, xi: [f64; 2]) -> Result<f64> {
        let p = self.map_point(chart_id, xi)?;
        Ok(self.charts[chart_id].metric_factor(p.xi))
    }

    /// Surface point on the ray from the origin through `p` (`p ≠ 0`).
    pub fn project_radial(&self, p: Vec3) -> SurfacePoint {
        let w = p.component_div(self.semi_axes);
        let x = p * (1.0 / w.norm());
        self.locate(x)
    }

    /// Jacobian of the radial projection restricted to the plane spanned by
    /// orthonormal `d1, d2` at `p`: `|∂x/∂t₁ × ∂x/∂t₂|` for `x(p + t₁d₁ + t₂d₂)`.
    pub fn radial_projection_jacobian(&self, p: Vec3, d1: Vec3, d2: Vec3) -> f64 {
        let c2 = self.semi_axes.component_mul(self.semi_axes);
        let s = p.component_div(self.semi_axes).norm();
        let g = p.component_div(c2) * (1.0 / s);
        let dx = |d: Vec3| d * (1.0 / s) - p * (g.dot(d) / (s * s));
        dx(d1).cross(dx(d2)).norm()
    }

    /// Chart coordinates of a point lying on Γ.
    ///
    /// The chart is the cube face whose cone contains the direction of `x`;
    /// ties on shared edges resolve to the lowest chart id.
    pub fn locate(&self, x: Vec3) -> SurfacePoint {
        let w = x.component_div(self.semi_axes);
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (l, c) in self.charts.iter().enumerate() {
            let v = w.dot(c.normal);
            if v > best_val * (1.0 + 1e-14) {
                best_val = v;
                best = l;
            }
        }
        let chart = &self.charts[best];
        let xi = chart.clamp(chart.preimage(x).unwrap_or([0.0, 0.0]));
        SurfacePoint {
            chart: best,
            xi,
            x: chart.map(xi),
        }
    }

    /// `Σ (x_i/c_i)² − 1`: negative inside, positive outside.
    pub fn implicit_value(&self, x: Vec3) -> f64 {
        x.component_div(self.semi_axes).norm_squared() - 1.0
    }

    /// Euclidean distance from `x` to Γ and the closest surface point.
    ///
    /// Coarse sampling of every chart followed by damped Gauss–Newton in the
    /// parameters of the best candidates.
    pub fn distance_to_surface(&self, x: Vec3) -> (f64, SurfacePoint) {
        const SAMPLES: usize = 9;
        let mut candidates: Vec<(f64, usize, [f64; 2])> = Vec::new();
        for (l, c) in self.charts.iter().enumerate() {
            for i in 0..SAMPLES {
                for j in 0..SAMPLES {
                    let xi = [
                        c.rect_dims[0] * i as f64 / (SAMPLES - 1) as f64,
                        c.rect_dims[1] * j as f64 / (SAMPLES - 1) as f64,
                    ];
                    candidates.push((c.map(xi).distance(x), l, xi));
                }
            }
        }
        let radial = self.locate(x * (1.0 / x.component_div(self.semi_axes).norm().max(1e-300)));
        candidates.push((radial.x.distance(x), radial.chart, radial.xi));
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut best = (f64::INFINITY, radial);
        for &(_, l, xi0) in candidates.iter().take(4) {
            let chart = &self.charts[l];
            let xi = refine_closest(chart, x, xi0);
            let y = chart.map(xi);
            let d = y.distance(x);
            if d < best.0 {
                best = (d, SurfacePoint { chart: l, xi, x: y });
            }
        }
        best
    }

    /// Edge curve samples, used by consistency checks.
    pub fn edge_point(&self, chart: usize, edge: Edge, s: f64) -> Result<Vec3> {
        let c = self.chart(chart)?;
        Ok(c.map(c.edge_param(edge, s)))
    }
}

fn refine_closest(chart: &Chart, x: Vec3, mut xi: [f64; 2]) -> [f64; 2] {
    let mut f = chart.map(xi).distance(x);
    for _ in 0..60 {
        let y = chart.map(xi);
        let r = y - x;
        let [t1, t2] = chart.tangents(xi);
        let (g11, g12, g22) = (t1.dot(t1), t1.dot(t2), t2.dot(t2));
        let (b1, b2) = (-t1.dot(r), -t2.dot(r));
        let det = g11 * g22 - g12 * g12;
        if det <= 0.0 {
            break;
        }
        let step = [(g22 * b1 - g12 * b2) / det, (g11 * b2 - g12 * b1) / det];
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial = chart.clamp([xi[0] + lambda * step[0], xi[1] + lambda * step[1]]);
            let ft = chart.map(trial).distance(x);
            if ft < f {
                let moved = (trial[0] - xi[0]).abs() + (trial[1] - xi[1]).abs();
                xi = trial;
                f = ft;
                improved = moved > 1e-15;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    xi
}

fn discover_adjacency(charts: &[Chart], scale: f64) -> Vec<EdgePair> {
    let tol = 1e-10 * scale;
    let mut pairs = Vec::new();
    for (la, ca) in charts.iter().enumerate() {
        for ea in Edge::ALL {
            let (a0, a1) = (
                ca.map(ca.edge_param(ea, 0.0)),
                ca.map(ca.edge_param(ea, 1.0)),
            );
            for (lb, cb) in charts.iter().enumerate().skip(la + 1) {
                for eb in Edge::ALL {
                    let (b0, b1) = (
                        cb.map(cb.edge_param(eb, 0.0)),
                        cb.map(cb.edge_param(eb, 1.0)),
                    );
                    let forward = a0.distance(b0) < tol && a1.distance(b1) < tol;
                    let backward = a0.distance(b1) < tol && a1.distance(b0) < tol;
                    if forward || backward {
                        pairs.push(EdgePair {
                            first: (la, ea),
                            second: (lb, eb),
                            reversed: backward,
                        });
                    }
                }
            }
        }
    }
    pairs
}

/// Axis-aligned rectangle in chart parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl ParamRect {
    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
        ]
    }

    pub fn width(&self) -> [f64; 2] {
        [self.hi[0] - self.lo[0], self.hi[1] - self.lo[1]]
    }

    pub fn area(&self) -> f64 {
        let w = self.width();
        w[0] * w[1]
    }

    pub fn clamp(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            xi[0].max(self.lo[0]).min(self.hi[0]),
            xi[1].max(self.lo[1]).min(self.hi[1]),
        ]
    }

    /// Corners in counter-clockwise order starting at `lo`.
    pub fn corners(&self) -> [[f64; 2]; 4] {
        [
            self.lo,
            [self.hi[0], self.lo[1]],
            self.hi,
            [self.lo[0], self.hi[1]],
        ]
    }

    /// Four equal children, ordered (ll, lr, ul, ur).
    pub fn split(&self) -> [ParamRect; 4] {
        let c = self.center();
        [
            ParamRect { lo: self.lo, hi: c },
            ParamRect {
                lo: [c[0], self.lo[1]],
                hi: [self.hi[0], c[1]],
            },
            ParamRect {
                lo: [self.lo[0], c[1]],
                hi: [c[0], self.hi[1]],
            },
            ParamRect { lo: c, hi: self.hi },
        ]
    }
}

/// Grid cell `(i, j)` of a chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Panel {
    pub chart: usize,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PanelGeometry {
    pub center: Vec3,
    /// Bound on the distance from `center` to any point of the panel.
    pub radius: f64,
    pub diameter: f64,
}

/// Uniform rectangular grids on every chart.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    atlas: ChartAtlas,
    subdivisions: Vec<(usize, usize)>,
    degree: usize,
    panels: Vec<Panel>,
    chart_offsets: Vec<usize>,
    geometry: Vec<PanelGeometry>,
    h_edge: f64,
    h_area: f64,
}

/// Grids with `subdivisions[l] = (n_l, k_l)` cells on chart `l`; requires
/// `n_l, k_l ≥ degree + 1`.
pub fn build_grid(
    atlas: &ChartAtlas,
    subdivisions: &[(usize, usize)],
    degree: usize,
) -> Result<SurfaceGrid> {
    if subdivisions.len() != atlas.len() {
        return Err(Error::SubdivisionCount {
            expected: atlas.len(),
            got: subdivisions.len(),
        });
    }
    for &(n, k) in subdivisions {
        if n < degree + 1 || k < degree + 1 {
            return Err(Error::GridTooCoarse { n, k, degree });
        }
    }

    let mut panels = Vec::new();
    let mut chart_offsets = Vec::with_capacity(atlas.len() + 1);
    let (mut h_edge, mut h_area) = (0.0f64, 0.0f64);
    for (l, &(n, k)) in subdivisions.iter().enumerate() {
        chart_offsets.push(panels.len());
        let [a, b] = atlas.charts[l].rect_dims;
        let (h1, h2) = (a / n as f64, b / k as f64);
        h_edge = h_edge.max(h1.max(h2));
        h_area = h_area.max(h1 * h2);
        for j in 0..k {
            for i in 0..n {
                panels.push(Panel { chart: l, i, j });
            }
        }
    }
    chart_offsets.push(panels.len());

    let mut grid = SurfaceGrid {
        atlas: atlas.clone(),
        subdivisions: subdivisions.to_vec(),
        degree,
        panels,
        chart_offsets,
        geometry: Vec::new(),
        h_edge,
        h_area,
    };
    grid.geometry = (0..grid.panels.len())
        .map(|p| grid.compute_geometry(p))
        .collect();
    Ok(grid)
}

impl SurfaceGrid {
    /// Same `n × n` subdivision on every chart.
    pub fn uniform(atlas: &ChartAtlas, n: usize, degree: usize) -> Result<Self> {
        build_grid(atlas, &alloc::vec![(n, n); atlas.len()], degree)
    }

    /// Every cell split into four; nests exactly inside `self`.
    pub fn refined(&self) -> Result<Self> {
        let subs: Vec<(usize, usize)> = self
            .subdivisions
            .iter()
            .map(|&(n, k)| (2 * n, 2 * k))
            .collect();
        build_grid(&self.atlas, &subs, self.degree)
    }

    pub fn atlas(&self) -> &ChartAtlas {
        &self.atlas
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn subdivisions(&self) -> &[(usize, usize)] {
        &self.subdivisions
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    /// Largest parameter step over all charts and both directions.
    pub fn h_edge(&self) -> f64 {
        self.h_edge
    }

    /// Largest parameter cell area.
    pub fn h_area(&self) -> f64 {
        self.h_area
    }

    pub fn steps(&self, chart: usize) -> [f64; 2] {
        let [a, b] = self.atlas.charts[chart].rect_dims;
        let (n, k) = self.subdivisions[chart];
        [a / n as f64, b / k as f64]
    }

    pub fn panel_index(&self, chart: usize, i: usize, j: usize) -> usize {
        let (n, _) = self.subdivisions[chart];
        self.chart_offsets[chart] + j * n + i
    }

    pub fn chart_panels(&self, chart: usize) -> core::ops::Range<usize> {
        self.chart_offsets[chart]..self.chart_offsets[chart + 1]
    }

    pub fn panel_rect(&self, panel: usize) -> ParamRect {
        let Panel { chart, i, j } = self.panels[panel];
        let [h1, h2] = self.steps(chart);
        ParamRect {
            lo: [i as f64 * h1, j as f64 * h2],
            hi: [(i + 1) as f64 * h1, (j + 1) as f64 * h2],
        }
    }

    /// Cell containing `ξ`, using half-open cells except for the last one.
    pub fn panel_at(&self, chart: usize, xi: [f64; 2]) -> usize {
        let [h1, h2] = self.steps(chart);
        let (n, k) = self.subdivisions[chart];
        let i = ((xi[0] / h1).floor().max(0.0) as usize).min(n - 1);
        let j = ((xi[1] / h2).floor().max(0.0) as usize).min(k - 1);
        self.panel_index(chart, i, j)
    }

    pub fn panel_diameter(&self, panel: usize) -> f64 {
        self.geometry[panel].diameter
    }

    pub(crate) fn panel_geometry(&self, panel: usize) -> &PanelGeometry {
        &self.geometry[panel]
    }

    /// Surface point at the parameter center of a panel.
    pub fn panel_center(&self, panel: usize) -> SurfacePoint {
        let chart = self.panels[panel].chart;
        let xi = self.panel_rect(panel).center();
        SurfacePoint {
            chart,
            xi,
            x: self.atlas.charts[chart].map(xi),
        }
    }

    fn compute_geometry(&self, panel: usize) -> PanelGeometry {
        let chart = &self.atlas.charts[self.panels[panel].chart];
        let rect = self.panel_rect(panel);
        let center = chart.map(rect.center());
        let corners = rect.corners().map(|c| chart.map(c));
        let mut radius = 0.0f64;
        for s in 0..4 {
            let (c0, c1) = (rect.corners()[s], rect.corners()[(s + 1) % 4]);
            for t in 0..=4 {
                let f = t as f64 / 4.0;
                let xi = [c0[0] + f * (c1[0] - c0[0]), c0[1] + f * (c1[1] - c0[1])];
                radius = radius.max(chart.map(xi).distance(center));
            }
        }
        let diameter = corners[0]
            .distance(corners[2])
            .max(corners[1].distance(corners[3]));
        PanelGeometry {
            center,
            radius: radius * 1.05,
            diameter,
        }
    }
}

/// Human-readable description used in atlas error messages.
pub(crate) fn describe_node(chart: usize, p: usize, t: usize) -> alloc::string::String {
    format!("chart {chart} node ({p}, {t})")
}
