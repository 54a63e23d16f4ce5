//! Numerical laboratory for time-harmonic pressure waves scattered by cracks
//! buried in the half-space `x3 < 0` with a traction-free surface at `x3 = 0`.
//!
//! The crate models a crack as an open surface `Γ` (or curve in 2-D) across
//! which the pressure field jumps while its normal derivative stays
//! continuous. Fields are represented as double-layer potentials over `Γ`
//! built on the half-space Green function that satisfies the free-surface
//! condition `∂u/∂x3 = 0` on `x3 = 0` by the method of images.
//!
//! Module map:
//!
//! * [`special`] — wave kernels, spherical/cylindrical Bessel machinery and
//!   the interior eigenfunction of the unit ball used throughout the tests.
//! * [`geometry`] — crack surface meshes, boundary curves, cusped planar
//!   domains, mapped structured meshers and JSON mesh exchange.
//! * [`potential`] — double-layer evaluation in 3-D and 2-D with
//!   near-singular quadrature, jump probes and Helmholtz residual stencils.
//! * [`eigen`] — P1 finite-element generalized eigensolver (plain and
//!   axisymmetric radial-weight forms) plus cusp decay diagnostics.
//! * [`counterexample`] — constructions of distinct crack/density pairs with
//!   numerically indistinguishable surface data, and the Cauchy-gap metric.
//! * [`inversion`] — planar-crack forward map, variable-projection geometry
//!   fits and the frequency sweep that locates indistinguishable wavenumbers.

pub mod counterexample;
pub mod eigen;
pub mod geometry;
pub mod inversion;
pub mod potential;
pub mod special;

/// Library version, as recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
