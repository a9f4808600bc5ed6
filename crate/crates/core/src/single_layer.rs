//! The single-layer operator `(Au)(x) = 1/4π ∫_Γ u(y)/|x−y| dΓ_y`, its
//! potential off Γ, and the a-priori bound on potential errors.

use core::f64::consts::PI;

#[allow(unused_imports)] // float methods come from libm when core lacks them
use num_traits::Float;

use crate::atlas::{SurfaceGrid, SurfacePoint};
use crate::basis::GlobalBasis;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::quadrature::{panel_points, surface_integral, KernelPoint, Quadrature, Target};

const FOUR_PI: f64 = 4.0 * PI;

/// Points closer than this (relative to the surface scale) count as on Γ.
pub const ON_SURFACE_TOL: f64 = 1e-12;

/// A density on Γ: a closed-form function or a discrete expansion `Σ u_i φ_i`.
#[derive(Clone, Copy)]
pub enum DensityFunction<'a> {
    Closed(&'a (dyn Fn(&SurfacePoint) -> f64 + Sync)),
    Discrete {
        basis: &'a dyn GlobalBasis,
        coeffs: &'a [f64],
    },
}

impl core::fmt::Debug for DensityFunction<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DensityFunction::Closed(_) => f.write_str("Closed(..)"),
            DensityFunction::Discrete { coeffs, .. } => {
                write!(f, "Discrete {{ n: {} }}", coeffs.len())
            }
        }
    }
}

impl<'a> DensityFunction<'a> {
    pub fn discrete(basis: &'a dyn GlobalBasis, coeffs: &'a [f64]) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        Ok(DensityFunction::Discrete { basis, coeffs })
    }

    pub fn eval(&self, p: &SurfacePoint) -> f64 {
        match self {
            DensityFunction::Closed(f) => f(p),
            DensityFunction::Discrete { basis, coeffs } => basis.expand(coeffs, p),
        }
    }

    /// Value at a quadrature point known to lie on `panel`.
    #[inline]
    pub fn eval_on_panel(&self, panel: usize, chart: usize, kp: &KernelPoint) -> f64 {
        match self {
            DensityFunction::Closed(f) => f(&SurfacePoint {
                chart,
                xi: kp.xi,
                x: kp.y,
            }),
            DensityFunction::Discrete { basis, coeffs } => {
                basis.expand_on_panel(coeffs, panel, kp.xi)
            }
        }
    }
}

/// `∫_Γ u(y) k(y) dΓ_y` with the panel rules adapted to `target`.
fn integrate_against(
    grid: &SurfaceGrid,
    u: &DensityFunction<'_>,
    target: &Target,
    quad: &Quadrature,
    mut kernel: impl FnMut(&KernelPoint, f64),
) {
    for panel in 0..grid.len() {
        let chart = grid.panels()[panel].chart;
        panel_points(grid, panel, target, quad, |kp| {
            let w = kp.weight * u.eval_on_panel(panel, chart, &kp);
            kernel(&kp, w);
        });
    }
}

/// `(Au)(x)` for `x ∈ Γ`.
pub fn apply_single_layer(
    grid: &SurfaceGrid,
    u: &DensityFunction<'_>,
    x: &SurfacePoint,
    quad: &Quadrature,
) -> f64 {
    let mut acc = 0.0;
    integrate_against(grid, u, &Target::Surface(*x), quad, |kp, w| {
        acc += w / x.x.distance(kp.y);
    });
    acc / FOUR_PI
}

/// Which component of `R³ \ Γ` a point lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Interior,
    Exterior,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Interior => "interior",
            Side::Exterior => "exterior",
        }
    }
}

/// A value of the potential at a point off Γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSample {
    pub x: Vec3,
    pub value: f64,
    pub side: Side,
    /// Distance from `x` to Γ.
    pub delta: f64,
}

/// Solid angle subtended by Γ at `x`: `4π` inside, `0` outside.
pub fn solid_angle(grid: &SurfaceGrid, x: Vec3, quad: &Quadrature) -> f64 {
    let mut omega = 0.0;
    for panel in 0..grid.len() {
        let chart = &grid.atlas().charts[grid.panels()[panel].chart];
        panel_points(grid, panel, &Target::Free(x), quad, |kp| {
            let d = kp.y - x;
            let r = d.norm();
            omega += kp.weight * d.dot(chart.unit_normal(kp.xi)) / (r * r * r);
        });
    }
    omega
}

pub fn side_of(grid: &SurfaceGrid, x: Vec3, quad: &Quadrature) -> Side {
    if solid_angle(grid, x, quad) > 2.0 * PI {
        Side::Interior
    } else {
        Side::Exterior
    }
}

fn check_off_surface(grid: &SurfaceGrid, x: Vec3) -> Result<f64> {
    let (delta, _) = grid.atlas().distance_to_surface(x);
    if delta < ON_SURFACE_TOL * grid.atlas().scale() {
        return Err(Error::PointOnSurface(delta));
    }
    Ok(delta)
}

/// The potential `v(x) = 1/4π ∫_Γ u(y)/|x−y| dΓ_y` at `x ∉ Γ`.
pub fn eval_potential(
    grid: &SurfaceGrid,
    u: &DensityFunction<'_>,
    x: Vec3,
    quad: &Quadrature,
) -> Result<PotentialSample> {
    let delta = check_off_surface(grid, x)?;
    let mut acc = 0.0;
    integrate_against(grid, u, &Target::Free(x), quad, |kp, w| {
        acc += w / x.distance(kp.y);
    });
    Ok(PotentialSample {
        x,
        value: acc / FOUR_PI,
        side: side_of(grid, x, quad),
        delta,
    })
}

/// `∇v(x)` at `x ∉ Γ` from the analytic kernel gradient.
pub fn eval_potential_gradient(
    grid: &SurfaceGrid,
    u: &DensityFunction<'_>,
    x: Vec3,
    quad: &Quadrature,
) -> Result<Vec3> {
    check_off_surface(grid, x)?;
    let mut g = Vec3::ZERO;
    integrate_against(grid, u, &Target::Free(x), quad, |kp, w| {
        let d = x - kp.y;
        let r = d.norm();
        g += d * (-w / (r * r * r));
    });
    Ok(g * (1.0 / FOUR_PI))
}

/// `mesΓ · e / δ^{α+1}`: bound on `|∂^α (v − v_N)|` at distance `δ` from Γ
/// when the densities differ by `e` in `L2(Γ)`.
pub fn potential_error_bound(
    mes: f64,
    delta: f64,
    l2_density_error: f64,
    alpha: u32,
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDistance(delta));
    }
    Ok(mes * l2_density_error / Float::powi(delta, alpha as i32 + 1))
}

/// The Cauchy–Schwarz constant for values: `√mesΓ · e / (4π δ)`.
pub fn sharp_potential_error_bound(mes: f64, delta: f64, l2_density_error: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDistance(delta));
    }
    Ok(Float::sqrt(mes) * l2_density_error / (FOUR_PI * delta))
}

/// `mesΓ` by tensor Gauss of order `q` per panel.
pub fn surface_area(grid: &SurfaceGrid, q: usize) -> Result<f64> {
    surface_integral(grid, |_| 1.0, q)
}
