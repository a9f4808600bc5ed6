//! Global finite systems `{φ_i}` on Γ, seen panel by panel.

use alloc::vec::Vec;

use crate::atlas::{SurfaceGrid, SurfacePoint};

/// Upper bound on `local_len()` for the shipped bases (degree ≤ 3).
pub const MAX_LOCAL: usize = 16;

/// A finite function system on a [`SurfaceGrid`].
///
/// Each panel carries `local_len()` shape functions; `panel_dofs(p)[r]` is
/// the global index of local function `r` on panel `p`. Assembly works
/// exclusively through this panel-local view.
pub trait GlobalBasis: Sync {
    fn grid(&self) -> &SurfaceGrid;

    fn degree(&self) -> usize;

    /// Number of global functions `N`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Functions per panel, `(m+1)²`.
    fn local_len(&self) -> usize;

    fn panel_dofs(&self, panel: usize) -> &[usize];

    /// Values of the local functions of `panel` at chart parameter `xi`.
    fn eval_local(&self, panel: usize, xi: [f64; 2], out: &mut [f64]);

    /// Value of global function `dof` at a surface point.
    fn eval(&self, dof: usize, p: &SurfacePoint) -> f64 {
        let panel = self.grid().panel_at(p.chart, p.xi);
        let mut vals = alloc::vec![0.0; self.local_len()];
        self.eval_local(panel, p.xi, &mut vals);
        self.panel_dofs(panel)
            .iter()
            .zip(&vals)
            .filter(|(&d, _)| d == dof)
            .map(|(_, v)| v)
            .sum()
    }

    /// `Σ_i u_i φ_i(p)`.
    fn expand(&self, coeffs: &[f64], p: &SurfacePoint) -> f64 {
        let panel = self.grid().panel_at(p.chart, p.xi);
        self.expand_on_panel(coeffs, panel, p.xi)
    }

    fn expand_on_panel(&self, coeffs: &[f64], panel: usize, xi: [f64; 2]) -> f64 {
        let mut vals = [0.0; MAX_LOCAL];
        let vals = &mut vals[..self.local_len()];
        self.eval_local(panel, xi, vals);
        self.panel_dofs(panel)
            .iter()
            .zip(vals.iter())
            .map(|(&d, v)| coeffs[d] * v)
            .sum()
    }

    /// One natural collocation point per function.
    fn collocation_points(&self) -> Vec<SurfacePoint>;
}
