//! Numerical toolkit for f-biharmonic geometry.
//!
//! A map `phi` between Riemannian manifolds is *f-biharmonic* for a positive
//! weight function `f` when its f-bitension field vanishes:
//!
//! ```text
//! f * tau_2(phi) + (lap f) * tau(phi) + 2 * nabla_{grad f} tau(phi) = 0
//! ```
//!
//! For maps into Euclidean space every piece reduces to componentwise
//! Laplacians and bi-Laplacians, which this crate evaluates with controlled
//! finite differences. On top of that engine it provides:
//!
//! - [`maps`]: tension / bitension / f-bitension residuals, the inversion
//!   family `x / |x|^p` with weight `|x|^k` and its algebraic classification,
//!   and a Bochner-type identity check;
//! - [`functions`]: the scalar criterion `lap(f * lap u) = 0`, a 1-D
//!   quadrature solver with its closed forms, and a discrete compactness
//!   analogue on periodic grids;
//! - [`curves`]: Frenet-frame residual systems, the classified planar and
//!   helix curvature families in R^3, curvature/torsion estimation, and
//!   curve reconstruction by Runge-Kutta integration of the Frenet system;
//! - [`hypersurfaces`]: fundamental forms, shape operators, the
//!   codimension-one residual system, and the circular-cylinder weight
//!   family.
//!
//! All operations are pure functions of their inputs and are safe to call
//! from multiple threads.
//!
//! ```
//! use fbiharm_core::maps::{inversion_is_f_biharmonic, InversionFamily};
//! use fbiharm_core::FdConfig;
//!
//! // x / |x|^2 with weight |x|^4 on R^3: f-biharmonic by the algebraic
//! // classification, and the finite-difference residual agrees.
//! let family = InversionFamily::new(3, 2.0, 4.0)?;
//! assert!(inversion_is_f_biharmonic(&family).is_f_biharmonic);
//!
//! let cfg = FdConfig::new(1e-4, 2, true)?;
//! let residual = family.f_bitension_hp(&[1.0, 0.25, -0.5], &cfg)?;
//! assert!(residual.iter().all(|component| component.abs() < 1e-6));
//! # Ok::<(), fbiharm_core::Error>(())
//! ```

// `!(v > 0.0)` deliberately treats NaN as a failed positivity check, which
// `v <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod dd;
pub mod fields;
pub mod functions;
pub mod hp;
pub mod hypersurfaces;
pub mod maps;
pub mod numdiff;
pub mod report;
pub mod spline;

mod error;

pub use error::{Error, Result};
pub use fields::{MapField, ScalarField};
pub use numdiff::FdConfig;
pub use report::ResidualReport;
