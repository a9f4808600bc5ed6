#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
// NaN-rejecting `!(x > 0.0)` tests and index loops over several arrays are
// intentional in the numeric kernels.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Boundary elements for the first-kind single-layer equation of the
//! exterior/interior Dirichlet problem for the Laplace equation in R³.
//!
//! The closed surface is described by a [`ChartAtlas`] of analytic
//! rectangular charts. Densities are approximated per chart with uniform
//! tensor B-splines ([`GlobalBSplineBasis`]) or with Lagrange elements merged
//! across chart edges ([`GlobalLagrangeBasis`]). The [`discretization`]
//! module builds Galerkin and collocation systems for
//!
//! ```text
//! (Au)(x) = 1/4π ∫_Γ u(y)/|x−y| dΓ_y = f(x),   x ∈ Γ
//! ```
//!
//! and [`single_layer`] evaluates the resulting potential off the surface.
//!
//! The crate only needs `alloc`. Enable `std` for `std::error::Error`
//! interop and `parallel` for rayon-backed matrix assembly.

extern crate alloc;

pub mod atlas;
pub mod basis;
pub mod bspline;
pub mod discretization;
mod error;
pub mod geometry;
pub mod lagrange;
pub mod linalg;
pub mod quadrature;
pub mod single_layer;
pub mod study;

pub use atlas::{
    build_grid, ellipsoid_atlas, unit_sphere_atlas, Chart, ChartAtlas, Edge, EdgePair, MapKind,
    Panel, ParamRect, SurfaceGrid, SurfacePoint,
};
pub use basis::GlobalBasis;
pub use bspline::{bspline_1d, BSpline1D, GlobalBSplineBasis};
pub use discretization::{
    assemble_collocation, assemble_galerkin, choose_collocation_points, diagnose_system,
    solve_dense, CollocationSet, DenseSystem, Method, NodePlacement, Pairing, Restriction,
    SystemDiagnostics,
};
pub use error::{Error, Result};
pub use geometry::Vec3;
pub use lagrange::{lagrange_shape_1d, GlobalLagrangeBasis};
pub use linalg::{Cholesky, DenseMatrix, Lu};
pub use quadrature::{gauss_rule, QuadConfig, QuadRule1D, Quadrature};
pub use single_layer::{
    apply_single_layer, eval_potential, potential_error_bound, DensityFunction, PotentialSample,
    Side,
};
pub use study::{
    l2_surface_error, run_convergence_study, BasisFamily, ConvergenceReport, ManufacturedProblem,
    ProblemKind, StudyConfig, SurfaceSpec,
};
