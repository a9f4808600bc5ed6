//! Continuous Lagrange elements of degree `m` merged across chart edges.
//!
//! Each cell of a chart grid carries the `(m+1)²` equispaced nodes of the
//! refined lattice `ε = h/m`. Lattice nodes of different charts that map to
//! the same point of Γ are merged into one global function, the sum of the
//! chart-local nodal functions, so the global system is continuous.

use alloc::vec::Vec;

use crate::atlas::{describe_node, SurfaceGrid, SurfacePoint};
use crate::basis::GlobalBasis;
use crate::error::{Error, Result};

/// Highest supported element degree.
pub const MAX_DEGREE: usize = 3;

/// Merge tolerance relative to the surface scale.
const MERGE_TOL: f64 = 1e-10;

/// The `r`-th Lagrange polynomial of degree `m` through the nodes
/// `0, 1/m, …, 1` of the unit cell, evaluated at local coordinate `t`.
pub fn lagrange_shape_1d(m: usize, r: usize, t: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::UnsupportedDegree {
            degree: 0,
            reason: "Lagrange elements need m >= 1; use degree-0 B-splines",
        });
    }
    if m > MAX_DEGREE {
        return Err(Error::UnsupportedDegree {
            degree: m,
            reason: "Lagrange elements are available for degrees 1 to 3",
        });
    }
    if r > m {
        return Err(Error::IndexOutOfRange {
            index: r as i64,
            lo: 0,
            hi: m as i64,
        });
    }
    Ok(shape(m, r, t))
}

#[inline]
fn shape(m: usize, r: usize, t: f64) -> f64 {
    let mf = m as f64;
    let x = t * mf;
    let mut v = 1.0;
    for k in 0..=m {
        if k != r {
            v *= (x - k as f64) / (r as f64 - k as f64);
        }
    }
    v
}

/// A chart-local lattice node `(chart, p, t)`, `ξ = (p·ε₁, t·ε₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LatticeNode {
    pub chart: usize,
    pub p: usize,
    pub t: usize,
}

/// A distinct node of Γ with the chart-local nodes that coincide there.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedNode {
    pub point: SurfacePoint,
    pub members: Vec<LatticeNode>,
}

#[derive(Debug, Clone)]
pub struct GlobalLagrangeBasis {
    grid: SurfaceGrid,
    nodes: Vec<MergedNode>,
    /// Per chart, the merged index of lattice node `(p, t)` at `t·(mn+1) + p`.
    lattice: Vec<Vec<usize>>,
    dofs: Vec<usize>,
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

impl GlobalLagrangeBasis {
    /// Elements of the grid's degree.
    pub fn build(grid: &SurfaceGrid) -> Result<Self> {
        Self::new(grid, grid.degree())
    }

    pub fn new(grid: &SurfaceGrid, m: usize) -> Result<Self> {
        lagrange_shape_1d(m, 0, 0.0)?;
        if grid.degree() != m {
            return Err(Error::DegreeMismatch {
                grid: grid.degree(),
                basis: m,
            });
        }
        let atlas = grid.atlas();

        let mut raw: Vec<(LatticeNode, SurfacePoint)> = Vec::new();
        for (l, &(n, k)) in grid.subdivisions().iter().enumerate() {
            let chart = &atlas.charts[l];
            let [h1, h2] = grid.steps(l);
            let (e1, e2) = (h1 / m as f64, h2 / m as f64);
            for t in 0..=m * k {
                for p in 0..=m * n {
                    let xi = chart.clamp([p as f64 * e1, t as f64 * e2]);
                    raw.push((
                        LatticeNode { chart: l, p, t },
                        SurfacePoint {
                            chart: l,
                            xi,
                            x: chart.map(xi),
                        },
                    ));
                }
            }
        }

        let tol = MERGE_TOL * atlas.scale();
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&a, &b| raw[a].1.x.x().total_cmp(&raw[b].1.x.x()));
        let mut sets = DisjointSets((0..raw.len()).collect());
        for (pos, &a) in order.iter().enumerate() {
            let xa = raw[a].1.x;
            for &b in &order[pos + 1..] {
                let xb = raw[b].1.x;
                if xb.x() - xa.x() > tol {
                    break;
                }
                if xa.distance(xb) <= tol {
                    sets.union(a, b);
                }
            }
        }

        // merged indices in order of first appearance
        let mut index_of_root = alloc::vec![usize::MAX; raw.len()];
        let mut nodes: Vec<MergedNode> = Vec::new();
        let mut lattice: Vec<Vec<usize>> = grid
            .subdivisions()
            .iter()
            .map(|&(n, k)| alloc::vec![0; (m * n + 1) * (m * k + 1)])
            .collect();
        for idx in 0..raw.len() {
            let root = sets.find(idx);
            if index_of_root[root] == usize::MAX {
                index_of_root[root] = nodes.len();
                nodes.push(MergedNode {
                    point: raw[idx].1,
                    members: Vec::new(),
                });
            }
            let g = index_of_root[root];
            let node = raw[idx].0;
            nodes[g].members.push(node);
            let (n, _) = grid.subdivisions()[node.chart];
            lattice[node.chart][node.t * (m * n + 1) + node.p] = g;
        }

        for node in &nodes {
            check_merged(grid, m, node)?;
        }

        let local = (m + 1) * (m + 1);
        let mut dofs = Vec::with_capacity(grid.len() * local);
        for panel in grid.panels() {
            let (n, _) = grid.subdivisions()[panel.chart];
            let row = m * n + 1;
            for b in 0..=m {
                for a in 0..=m {
                    let (p, t) = (panel.i * m + a, panel.j * m + b);
                    dofs.push(lattice[panel.chart][t * row + p]);
                }
            }
        }

        Ok(GlobalLagrangeBasis {
            grid: grid.clone(),
            nodes,
            lattice,
            dofs,
        })
    }

    pub fn nodes(&self) -> &[MergedNode] {
        &self.nodes
    }

    /// Merged index of a chart-local lattice node.
    pub fn node_index(&self, node: LatticeNode) -> Result<usize> {
        let m = self.degree();
        let &(n, k) = self
            .grid
            .subdivisions()
            .get(node.chart)
            .ok_or(Error::UnknownChart(node.chart))?;
        if node.p > m * n || node.t > m * k {
            return Err(Error::IndexOutOfRange {
                index: node.p.max(node.t) as i64,
                lo: 0,
                hi: (m * n.max(k)) as i64,
            });
        }
        Ok(self.lattice[node.chart][node.t * (m * n + 1) + node.p])
    }

    /// `L̃_p(x)`, the sum of the coincident chart-local nodal functions.
    pub fn eval_global(&self, p: usize, x: &SurfacePoint) -> f64 {
        self.eval(p, x)
    }

    /// Nodal values `f(x_p)`.
    pub fn interpolate_nodal(&self, f: impl Fn(&SurfacePoint) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|n| f(&n.point)).collect()
    }

    /// Number of merged nodes with 1, 2, 3 and more members.
    pub fn multiplicity_histogram(&self) -> [usize; 4] {
        let mut h = [0; 4];
        for n in &self.nodes {
            h[(n.members.len() - 1).min(3)] += 1;
        }
        h
    }
}

fn on_chart_boundary(grid: &SurfaceGrid, m: usize, node: &LatticeNode) -> bool {
    let (n, k) = grid.subdivisions()[node.chart];
    node.p == 0 || node.t == 0 || node.p == m * n || node.t == m * k
}

/// Merged nodes must join distinct charts along identified boundaries only.
fn check_merged(grid: &SurfaceGrid, m: usize, node: &MergedNode) -> Result<()> {
    let members = &node.members;
    if members.len() == 1 {
        return Ok(());
    }
    for (i, a) in members.iter().enumerate() {
        if !on_chart_boundary(grid, m, a) {
            return Err(Error::Atlas(alloc::format!(
                "{} coincides with a node of another chart but is not on a chart edge",
                describe_node(a.chart, a.p, a.t)
            )));
        }
        for b in &members[i + 1..] {
            if a.chart == b.chart {
                return Err(Error::Atlas(alloc::format!(
                    "{} and {} map to the same surface point",
                    describe_node(a.chart, a.p, a.t),
                    describe_node(b.chart, b.p, b.t)
                )));
            }
            let adjacent = grid.atlas().adjacency.iter().any(|e| {
                (e.first.0 == a.chart && e.second.0 == b.chart)
                    || (e.first.0 == b.chart && e.second.0 == a.chart)
            });
            if !adjacent {
                return Err(Error::Atlas(alloc::format!(
                    "charts {} and {} share a node but no edge",
                    a.chart,
                    b.chart
                )));
            }
        }
    }
    Ok(())
}

impl GlobalBasis for GlobalLagrangeBasis {
    fn grid(&self) -> &SurfaceGrid {
        &self.grid
    }

    fn degree(&self) -> usize {
        self.grid.degree()
    }

    fn len(&self) -> usize {
        self.nodes.len()
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
        let m = self.degree();
        let rect = self.grid.panel_rect(panel);
        let [w1, w2] = rect.width();
        let s1 = (xi[0] - rect.lo[0]) / w1;
        let s2 = (xi[1] - rect.lo[1]) / w2;
        let mut v1 = [0.0; MAX_DEGREE + 1];
        let mut v2 = [0.0; MAX_DEGREE + 1];
        for r in 0..=m {
            v1[r] = shape(m, r, s1);
            v2[r] = shape(m, r, s2);
        }
        for b in 0..=m {
            for a in 0..=m {
                out[b * (m + 1) + a] = v1[a] * v2[b];
            }
        }
    }

    fn collocation_points(&self) -> Vec<SurfacePoint> {
        self.nodes.iter().map(|n| n.point).collect()
    }
}
