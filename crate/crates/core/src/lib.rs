//! Exterior-ball resonances and the inverse problem they solve.
//!
//! The crate computes the resonances of the Neumann (and, for contrast,
//! Dirichlet) Laplacian outside a ball in odd dimension `d >= 3`, rebuilds
//! the scattering determinant from those resonances through a genus-`d`
//! canonical product, turns it into a relative heat trace, reads the boundary
//! heat invariants off the small-time expansion, and runs the decision
//! procedure that recognises a disjoint union of equal balls from three
//! boundary integrals.
//!
//! Module map:
//!
//! * [`radial`]: exact radial polynomials, spherical-harmonic multiplicities,
//!   assembled [`radial::ResonanceSet`]s.
//! * [`polyroot`]: Aberth–Ehrlich root finding and argument-principle checks.
//! * [`scattering`]: per-mode scattering eigenvalues, the direct determinant,
//!   the canonical product and the fit of its single free constant.
//! * [`heat`]: relative heat traces (from resonances and from partial waves),
//!   small-time coefficient fits and dimension constants.
//! * [`geometry`]: boundary invariants of spheres, surfaces of revolution and
//!   ellipsoids.
//! * [`rigidity`]: the equal-ball identification and the Alexandrov–Fenchel
//!   defect.
//! * [`wave`]: smoothed resonance wave traces.
//! * [`cache`]: on-disk resonance cache and tabular output used by the CLI.

pub mod cache;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod heat;
pub mod polyroot;
pub mod quadrature;
pub mod radial;
pub mod rigidity;
pub mod scattering;
pub mod special;
pub mod wave;

pub use error::{Error, Result};
pub use geometry::GeometricInvariants;
pub use radial::{BoundaryCondition, RadialPolynomial, Resonance, ResonanceSet};

/// Version string embedded in cache keys; bump when resonance output changes.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+roots.1");
