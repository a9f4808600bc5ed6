//! Uniform B-splines of degree `m` on a chart rectangle and their union over
//! the atlas.
//!
//! On `[0, a]` with `n` cells of width `h = a/n` the system consists of the
//! translates `B_i(t) = B(t/h − i)`, `i = −m … n−1`, of the cardinal spline
//! supported on `[0, m+1]`. Translates overhanging the interval are kept, so
//! the `n + m` functions still sum to one on all of `[0, a]`.

use alloc::vec::Vec;

use num_traits::Float;

use crate::atlas::{SurfaceGrid, SurfacePoint};
use crate::basis::GlobalBasis;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, DenseMatrix};
use crate::quadrature::gauss_rule;

/// Highest supported spline degree.
pub const MAX_DEGREE: usize = 2;

const PARAM_TOL: f64 = 1e-12;

/// The `n + m` uniform B-splines of degree `m` on `[0, a]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BSpline1D {
    degree: usize,
    length: f64,
    n: usize,
    h: f64,
}

impl BSpline1D {
    pub fn new(degree: usize, n: usize, length: f64) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree {
                degree,
                reason: "B-splines are available for degrees 0, 1 and 2",
            });
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::NonPositiveShape(length));
        }
        if n == 0 {
            return Err(Error::GridTooCoarse { n, k: n, degree });
        }
        Ok(BSpline1D {
            degree,
            length,
            n,
            h: length / n as f64,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of functions, `n + m`.
    pub fn len(&self) -> usize {
        self.n + self.degree
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Smallest spline index, `−m`.
    pub fn first_index(&self) -> i64 {
        -(self.degree as i64)
    }

    /// Support `[i·h, (i+m+1)·h] ∩ [0, a]`.
    pub fn support(&self, i: i64) -> (f64, f64) {
        let lo = (i as f64 * self.h).max(0.0);
        let hi = ((i + self.degree as i64 + 1) as f64 * self.h).min(self.length);
        (lo, hi)
    }

    /// Cell holding `t`; the last cell is closed on the right.
    pub fn cell(&self, t: f64) -> usize {
        (Float::floor(t / self.h).max(0.0) as usize).min(self.n - 1)
    }

    /// Values of `B_{c−m}, …, B_c` at `t`, using the polynomial pieces that
    /// belong to cell `c` (also meaningful slightly outside the cell).
    pub fn values_in_cell(&self, c: usize, t: f64, out: &mut [f64]) {
        let m = self.degree;
        let s = t / self.h - c as f64;
        out[0] = 1.0;
        for k in 1..=m {
            let kf = k as f64;
            out[k] = 0.0;
            for o in (0..=k).rev() {
                let left = if o > 0 { out[o - 1] } else { 0.0 };
                let right = out[o];
                out[o] = (s + kf - o as f64) / kf * left + (o as f64 + 1.0 - s) / kf * right;
            }
        }
    }

    /// Values of the `m+1` splines that do not vanish at `t`, and the cell
    /// they belong to: `out[o] = B_{c−m+o}(t)`.
    pub fn nonzero(&self, t: f64, out: &mut [f64]) -> usize {
        let c = self.cell(t);
        self.values_in_cell(c, t, out);
        c
    }

    fn check_index(&self, i: i64) -> Result<()> {
        let hi = self.n as i64 - 1;
        if i < self.first_index() || i > hi {
            return Err(Error::IndexOutOfRange {
                index: i,
                lo: self.first_index(),
                hi,
            });
        }
        Ok(())
    }

    /// `B_i(t)`; exactly zero outside the support.
    pub fn eval(&self, i: i64, t: f64) -> Result<f64> {
        self.check_index(i)?;
        let tol = PARAM_TOL * self.length;
        if !(t >= -tol && t <= self.length + tol) {
            return Err(Error::OutsideInterval(t));
        }
        let t = t.clamp(0.0, self.length);
        let mut vals = [0.0; MAX_DEGREE + 1];
        let c = self.nonzero(t, &mut vals) as i64;
        let o = i - (c - self.degree as i64);
        Ok(if (0..=self.degree as i64).contains(&o) {
            vals[o as usize]
        } else {
            0.0
        })
    }

    /// `∫₀ᵃ B_i B_j dt`, indexed from `−m`.
    pub fn gram(&self) -> DenseMatrix {
        let m = self.degree;
        let rule = gauss_rule(m + 1).expect("order within range");
        let mut g = DenseMatrix::zeros(self.len(), self.len());
        let mut vals = [0.0; MAX_DEGREE + 1];
        for c in 0..self.n {
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let x = (c as f64 + t) * self.h;
                self.values_in_cell(c, x, &mut vals);
                for p in 0..=m {
                    for q in 0..=m {
                        g[(c + p, c + q)] += w * self.h * vals[p] * vals[q];
                    }
                }
            }
        }
        g
    }
}

/// Value of the uniform B-spline `B_i` of degree `m` on `[0, a]` split into
/// `n` cells.
pub fn bspline_1d(m: usize, n: usize, a: f64, i: i64, t: f64) -> Result<f64> {
    BSpline1D::new(m, n, a)?.eval(i, t)
}

/// Local coordinates `(chart, i, j)` of a B-spline dof, indices from `−m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplineDof {
    pub chart: usize,
    pub i: i64,
    pub j: i64,
}

/// Per-chart tensor B-splines `B_i(ξ₁)B_j(ξ₂)` collected over the atlas.
///
/// Global numbering runs chart by chart, then `j`, then `i`.
#[derive(Debug, Clone)]
pub struct GlobalBSplineBasis {
    grid: SurfaceGrid,
    splines: Vec<[BSpline1D; 2]>,
    offsets: Vec<usize>,
    dofs: Vec<usize>,
}

impl GlobalBSplineBasis {
    /// B-splines of the grid's degree.
    pub fn build(grid: &SurfaceGrid) -> Result<Self> {
        Self::new(grid, grid.degree())
    }

    /// B-splines of degree `m`; the grid must have been built for `m`.
    pub fn new(grid: &SurfaceGrid, m: usize) -> Result<Self> {
        if grid.degree() != m {
            return Err(Error::DegreeMismatch {
                grid: grid.degree(),
                basis: m,
            });
        }
        let atlas = grid.atlas();
        let mut splines = Vec::with_capacity(atlas.len());
        let mut offsets = Vec::with_capacity(atlas.len() + 1);
        let mut total = 0;
        for (l, &(n, k)) in grid.subdivisions().iter().enumerate() {
            let [a, b] = atlas.charts[l].rect_dims;
            let pair = [BSpline1D::new(m, n, a)?, BSpline1D::new(m, k, b)?];
            offsets.push(total);
            total += pair[0].len() * pair[1].len();
            splines.push(pair);
        }
        offsets.push(total);

        let local = (m + 1) * (m + 1);
        let mut dofs = Vec::with_capacity(grid.len() * local);
        for panel in grid.panels() {
            let [s1, _] = splines[panel.chart];
            let row = s1.len();
            // local function (p, q) ↔ spline indices (i − m + p, j − m + q),
            // i.e. shifted indices (i + p, j + q)
            for q in 0..=m {
                for p in 0..=m {
                    dofs.push(offsets[panel.chart] + (panel.j + q) * row + panel.i + p);
                }
            }
        }
        Ok(GlobalBSplineBasis {
            grid: grid.clone(),
            splines,
            offsets,
            dofs,
        })
    }

    pub fn splines(&self, chart: usize) -> &[BSpline1D; 2] {
        &self.splines[chart]
    }

    pub fn global_index(&self, dof: SplineDof) -> Result<usize> {
        let pair = self
            .splines
            .get(dof.chart)
            .ok_or(Error::UnknownChart(dof.chart))?;
        pair[0].check_index(dof.i)?;
        pair[1].check_index(dof.j)?;
        let m = self.degree() as i64;
        let row = pair[0].len() as i64;
        Ok(self.offsets[dof.chart] + ((dof.j + m) * row + dof.i + m) as usize)
    }

    pub fn local_index(&self, global: usize) -> Result<SplineDof> {
        if global >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: global as i64,
                lo: 0,
                hi: self.len() as i64 - 1,
            });
        }
        let chart = self.offsets.partition_point(|&o| o <= global) - 1;
        let r = global - self.offsets[chart];
        let row = self.splines[chart][0].len();
        let m = self.degree() as i64;
        Ok(SplineDof {
            chart,
            i: (r % row) as i64 - m,
            j: (r / row) as i64 - m,
        })
    }

    /// `B̃_dof(p)`: the tensor spline if `p` lies in the dof's chart, else 0.
    pub fn eval_global(&self, dof: usize, p: &SurfacePoint) -> Result<f64> {
        let d = self.local_index(dof)?;
        if d.chart != p.chart {
            return Ok(0.0);
        }
        let [s1, s2] = self.splines[d.chart];
        Ok(s1.eval(d.i, p.xi[0])? * s2.eval(d.j, p.xi[1])?)
    }

    fn tensor_moments(
        &self,
        v: &impl Fn(usize, [f64; 2]) -> f64,
        quad_order: usize,
    ) -> Result<Vec<f64>> {
        let rule = gauss_rule(quad_order)?;
        let mut out = alloc::vec![0.0; self.len()];
        let mut local = [0.0; crate::basis::MAX_LOCAL];
        let nl = self.local_len();
        for panel in 0..self.grid.len() {
            let chart = self.grid.panels()[panel].chart;
            let rect = self.grid.panel_rect(panel);
            let [w1, w2] = rect.width();
            let mut acc = [0.0; crate::basis::MAX_LOCAL];
            for (t2, wt2) in rule.nodes.iter().zip(&rule.weights) {
                for (t1, wt1) in rule.nodes.iter().zip(&rule.weights) {
                    let xi = [rect.lo[0] + t1 * w1, rect.lo[1] + t2 * w2];
                    self.eval_local(panel, xi, &mut local[..nl]);
                    let w = wt1 * wt2 * w1 * w2 * v(chart, xi);
                    for (a, b) in acc[..nl].iter_mut().zip(&local[..nl]) {
                        *a += w * b;
                    }
                }
            }
            for (&d, a) in self.panel_dofs(panel).iter().zip(&acc[..nl]) {
                out[d] += a;
            }
        }
        Ok(out)
    }

    /// Parameter-space moments `∫_{S_l} B_ij(ξ) v_l(ξ) dξ` of a function given
    /// chart-wise; `quad_order` points per direction and cell.
    pub fn restrict(
        &self,
        v: impl Fn(usize, [f64; 2]) -> f64,
        quad_order: usize,
    ) -> Result<Vec<f64>> {
        self.tensor_moments(&v, quad_order)
    }

    /// Default order for [`Self::restrict`]: `max(m+1, 3)`.
    pub fn default_restrict_order(&self) -> usize {
        (self.degree() + 1).max(3)
    }

    /// Coefficients of the parameter-space L2 projection of `v` onto the
    /// spline space of each chart, so that `expand` reproduces `v` up to
    /// `O(h^{m+1})`.
    pub fn project(
        &self,
        v: impl Fn(usize, [f64; 2]) -> f64,
        quad_order: usize,
    ) -> Result<Vec<f64>> {
        let mut c = self.tensor_moments(&v, quad_order)?;
        for (l, [s1, s2]) in self.splines.iter().enumerate() {
            let (r1, r2) = (s1.len(), s2.len());
            let g1 = Cholesky::factor(&s1.gram())?;
            let g2 = Cholesky::factor(&s2.gram())?;
            let block = &mut c[self.offsets[l]..self.offsets[l + 1]];
            // block[j*r1 + i]: solve G1 along i, then G2 along j
            for j in 0..r2 {
                let row = &mut block[j * r1..(j + 1) * r1];
                let x = g1.solve(row);
                row.copy_from_slice(&x);
            }
            let mut col = alloc::vec![0.0; r2];
            for i in 0..r1 {
                for j in 0..r2 {
                    col[j] = block[j * r1 + i];
                }
                let x = g2.solve(&col);
                for j in 0..r2 {
                    block[j * r1 + i] = x[j];
                }
            }
        }
        Ok(c)
    }

    /// The block-diagonal parameter-space Gram matrix `∫ B̃_p B̃_q dξ`.
    pub fn parameter_gram(&self) -> DenseMatrix {
        let n = self.len();
        let mut g = DenseMatrix::zeros(n, n);
        for (l, [s1, s2]) in self.splines.iter().enumerate() {
            let (g1, g2) = (s1.gram(), s2.gram());
            let r1 = s1.len();
            let off = self.offsets[l];
            for j in 0..s2.len() {
                for i in 0..r1 {
                    for jj in 0..s2.len() {
                        for ii in 0..r1 {
                            g[(off + j * r1 + i, off + jj * r1 + ii)] = g1[(i, ii)] * g2[(j, jj)];
                        }
                    }
                }
            }
        }
        g
    }
}

impl GlobalBasis for GlobalBSplineBasis {
    fn grid(&self) -> &SurfaceGrid {
        &self.grid
    }

    fn degree(&self) -> usize {
        self.grid.degree()
    }

    fn len(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    fn local_len(&self) -> usize {
        let m = self.degree() + 1;
        m * m
    }

    fn panel_dofs(&self, panel: usize) -> &[usize] {
        let nl = self.local_len();
        &self.dofs[panel * nl..(panel + 1) * nl]
    }

    fn eval_local(&self, panel: usize, xi: [f64; 2], out: &mut [f64]) {
        let p = self.grid.panels()[panel];
        let [s1, s2] = self.splines[p.chart];
        let m = self.degree();
        let mut v1 = [0.0; MAX_DEGREE + 1];
        let mut v2 = [0.0; MAX_DEGREE + 1];
        s1.values_in_cell(p.i, xi[0], &mut v1);
        s2.values_in_cell(p.j, xi[1], &mut v2);
        for q in 0..=m {
            for r in 0..=m {
                out[q * (m + 1) + r] = v1[r] * v2[q];
            }
        }
    }

    /// Greville abscissae `(i + (m+1)/2)·h`, kept a quarter cell away from the
    /// chart boundary so that points of neighbouring charts never coincide.
    fn collocation_points(&self) -> Vec<SurfacePoint> {
        let atlas = self.grid.atlas();
        let m = self.degree() as i64;
        let mut pts = Vec::with_capacity(self.len());
        for (l, [s1, s2]) in self.splines.iter().enumerate() {
            let chart = &atlas.charts[l];
            let greville = |s: &BSpline1D, i: i64| {
                let h = s.step();
                ((i as f64 + (m as f64 + 1.0) / 2.0) * h).clamp(0.25 * h, s.length() - 0.25 * h)
            };
            for j in -m..s2.cells() as i64 {
                for i in -m..s1.cells() as i64 {
                    let xi = [greville(s1, i), greville(s2, j)];
                    pts.push(SurfacePoint {
                        chart: l,
                        xi,
                        x: chart.map(xi),
                    });
                }
            }
        }
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::unit_sphere_atlas;

    #[test]
    fn piecewise_constant_values() {
        assert_eq!(bspline_1d(0, 4, 1.0, 0, 0.1).unwrap(), 1.0);
        assert_eq!(bspline_1d(0, 4, 1.0, 0, 0.3).unwrap(), 0.0);
        assert_eq!(bspline_1d(0, 4, 1.0, 3, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn hat_peak_and_partition() {
        assert!((bspline_1d(1, 4, 1.0, 0, 0.25).unwrap() - 1.0).abs() < 1e-15);
        let s: f64 = (-1..4)
            .map(|i| bspline_1d(1, 4, 1.0, i, 0.37).unwrap())
            .sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_matches_closed_form() {
        // cardinal quadratic: x²/2, (−2x² + 6x − 3)/2, (3 − x)²/2 on [0,1),[1,2),[2,3)
        let card = |x: f64| {
            if (0.0..1.0).contains(&x) {
                x * x / 2.0
            } else if (1.0..2.0).contains(&x) {
                (-2.0 * x * x + 6.0 * x - 3.0) / 2.0
            } else if (2.0..3.0).contains(&x) {
                (3.0 - x) * (3.0 - x) / 2.0
            } else {
                0.0
            }
        };
        let s = BSpline1D::new(2, 5, 2.0).unwrap();
        for i in -2..5 {
            for k in 0..=40 {
                let t = 2.0 * k as f64 / 40.0;
                let want = card(t / s.step() - i as f64);
                assert!((s.eval(i, t).unwrap() - want).abs() < 1e-14, "i={i} t={t}");
            }
        }
    }

    #[test]
    fn index_and_interval_errors() {
        assert!(matches!(
            bspline_1d(1, 4, 1.0, -2, 0.5),
            Err(Error::IndexOutOfRange {
                index: -2,
                lo: -1,
                hi: 3
            })
        ));
        assert!(matches!(
            bspline_1d(1, 4, 1.0, 4, 0.5),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            bspline_1d(1, 4, 1.0, 0, 1.5),
            Err(Error::OutsideInterval(_))
        ));
        assert!(matches!(
            bspline_1d(3, 4, 1.0, 0, 0.5),
            Err(Error::UnsupportedDegree { .. })
        ));
    }

    #[test]
    fn support_is_exact() {
        let s = BSpline1D::new(2, 6, 1.0).unwrap();
        for i in -2..6 {
            let (lo, hi) = s.support(i);
            for k in 0..=600 {
                let t = k as f64 / 600.0;
                let v = s.eval(i, t).unwrap();
                if t < lo || t > hi {
                    assert_eq!(v, 0.0, "i={i} t={t}");
                }
            }
        }
    }

    #[test]
    fn gram_of_constants_is_cell_width() {
        let s = BSpline1D::new(0, 4, 2.0).unwrap();
        let g = s.gram();
        assert_eq!(g, {
            let mut d = DenseMatrix::identity(4);
            for i in 0..4 {
                d[(i, i)] = 0.5;
            }
            d
        });
        // the hat-function Gram on a uniform mesh: interior diagonal 2h/3, off h/6
        let s = BSpline1D::new(1, 4, 1.0).unwrap();
        let g = s.gram();
        let h = 0.25;
        assert!((g[(2, 2)] - 2.0 * h / 3.0).abs() < 1e-15);
        assert!((g[(2, 3)] - h / 6.0).abs() < 1e-15);
        // the boundary hats keep only their inner half
        assert!((g[(0, 0)] - h / 3.0).abs() < 1e-15);
    }

    fn basis(n: usize, m: usize) -> GlobalBSplineBasis {
        let atlas = unit_sphere_atlas(1.0).unwrap();
        GlobalBSplineBasis::build(&SurfaceGrid::uniform(&atlas, n, m).unwrap()).unwrap()
    }

    #[test]
    fn global_sizes() {
        assert_eq!(basis(4, 0).len(), 96);
        assert_eq!(basis(4, 1).len(), 150);
        assert_eq!(basis(4, 2).len(), 6 * 36);
    }

    #[test]
    fn degree_mismatch_rejected() {
        let atlas = unit_sphere_atlas(1.0).unwrap();
        let grid = SurfaceGrid::uniform(&atlas, 4, 1).unwrap();
        assert!(matches!(
            GlobalBSplineBasis::new(&grid, 0),
            Err(Error::DegreeMismatch { grid: 1, basis: 0 })
        ));
    }

    #[test]
    fn dof_map_round_trip() {
        let b = basis(4, 2);
        for g in 0..b.len() {
            assert_eq!(b.global_index(b.local_index(g).unwrap()).unwrap(), g);
        }
        assert!(b.local_index(b.len()).is_err());
    }

    #[test]
    fn panel_dofs_agree_with_global_evaluation() {
        let b = basis(4, 1);
        let grid = b.grid();
        for panel in [0, 7, 40, 95] {
            let c = grid.panel_center(panel);
            let xi = [c.xi[0] + 0.01, c.xi[1] - 0.02];
            let p = grid.atlas().map_point(c.chart, xi).unwrap();
            let mut local = [0.0; 4];
            b.eval_local(panel, xi, &mut local);
            for (r, &d) in b.panel_dofs(panel).iter().enumerate() {
                assert!((b.eval_global(d, &p).unwrap() - local[r]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn other_chart_is_zero_and_partition_holds() {
        let b = basis(4, 1);
        let p = b.grid().atlas().map_point(3, [0.3, 0.4]).unwrap();
        assert_eq!(b.eval_global(0, &p).unwrap(), 0.0);
        let sum: f64 = (0..b.len()).map(|d| b.eval_global(d, &p).unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-14);
    }

    #[test]
    fn restriction_of_constant_and_linear() {
        let atlas = unit_sphere_atlas(1.0).unwrap();
        let a = atlas.charts[0].rect_dims[0];
        let b = GlobalBSplineBasis::build(&SurfaceGrid::uniform(&atlas, 4, 0).unwrap()).unwrap();
        let h = a / 4.0;
        let ones = b.restrict(|_, _| 1.0, 3).unwrap();
        assert!(ones.iter().all(|v| (v - h * h).abs() < 1e-15));
        let zero = b.restrict(|_, _| 0.0, 3).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        let lin = b.restrict(|_, xi| xi[0], 3).unwrap();
        for j in 0..4 {
            for i in 0..4 {
                let d = b.global_index(SplineDof { chart: 2, i, j }).unwrap();
                let want = h * (h * h * ((i + 1) * (i + 1)) as f64 - h * h * (i * i) as f64) / 2.0;
                assert!((lin[d] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn projection_reproduces_splines() {
        // a function in the spline space projects onto itself
        let b = basis(3, 2);
        let coeffs: Vec<f64> = (0..b.len()).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let f = |chart: usize, xi: [f64; 2]| {
            let p = b.grid().atlas().map_point(chart, xi).unwrap();
            b.expand(&coeffs, &p)
        };
        let proj = b.project(f, 4).unwrap();
        for (x, y) in proj.iter().zip(&coeffs) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn greville_points_are_distinct() {
        for m in 0..=2 {
            let b = basis(3, m);
            let pts = b.collocation_points();
            assert_eq!(pts.len(), b.len());
            for (i, p) in pts.iter().enumerate() {
                for q in &pts[i + 1..] {
                    assert!(p.x.distance(q.x) > 1e-3);
                }
            }
        }
    }
}
