//! transversal: a numerical laboratory for sphere-submanifold tangency.
//!
//! Given a parametrized C1 submanifold of R^n, a sphere centered at `a`
//! through a point p of the manifold either crosses it cleanly or touches it
//! tangentially. For most centers the tangential contact is confined to a
//! negligible set; the exceptional centers, for which tangency holds on a
//! set of positive induced volume, line up on affine planes of dimension
//! n - d - 1. This crate detects those centers numerically and recovers the
//! planes they lie on.
//!
//! The pipeline:
//!
//! * [`expr`] - a small expression language with exact forward-mode
//!   derivatives via dual numbers, used to define charts.
//! * [`manifold`] - box-domain charts, Jacobians, induced volume.
//! * [`tangency`] - the tangency residual g = J^T (p - a), an independent
//!   rank-based transversality oracle and Newton refinement of tangency
//!   points.
//! * [`measure`] - indicator quadrature deciding whether the tangency locus
//!   of a center carries positive measure.
//! * [`scan`] - center sweeps, clustering of exceptional candidates and
//!   affine plane fitting.
//! * [`strata`] - Grassmannian planes, normal affine planes, the sets
//!   E(a, P) and their finite-instance diagnostics.
//! * [`constructions`] - reference manifolds (circle chains, connected C1
//!   chains with thin necks, sphere chains) with predicted planes.
//! * [`cli`] - manifold/config file formats and the report-producing
//!   entry points behind the `transversal` binary.
//!
//! Start with the runnable examples (`cargo run --example circle_tangencies`)
//! or the README.

pub mod cli;
pub mod constructions;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod manifold;
pub mod measure;
pub mod scan;
pub mod strata;
pub mod tangency;

pub use error::{Error, Result};
pub use expr::{DualValue, Expression};
pub use manifold::{ChartAtlas, DomainBox, Parametrization};
pub use measure::MeasureEstimate;
pub use scan::{AffinePlane, ScanReport};
pub use strata::GrassmannPlane;
