//! Chart-based exterior calculus for framed vector bundles.
//!
//! The crate computes Euler characteristics of even-rank oriented vector
//! bundles by integrating the Pfaffian of the curvature of a metric
//! connection, and builds explicit compactly supported Thom forms for
//! two-plane bundles. Everything is verified numerically on a catalog of
//! concrete bundles with independently known Euler numbers.
//!
//! Module map:
//!
//! * [`exprlang`] - symbolic scalar expressions over chart coordinates.
//! * [`quadrature`] - deterministic grid summation and 1-d quadrature.
//! * [`forms`] - differential forms on boxed charts: wedge, `d`, pullback,
//!   midpoint integration.
//! * [`pfaffian`] - Pfaffians of skew matrices over the reals and over the
//!   even-degree form ring.
//! * [`bundles`] - framed bundles, metric connections, curvature, frame
//!   changes, direct sums, pullbacks.
//! * [`euler`] - Euler forms and the curvature integral that recovers the
//!   Euler characteristic.
//! * [`thom`] - bump profile and Thom forms of two-plane bundles.
//! * [`models`] - the built-in bundle catalog and the model definition file
//!   loader.
//! * [`sampling`] - seeded random expressions, forms, and rotations for
//!   randomized verification.
//! * [`verify`] - the property suites and report types the CLI exposes.
//! * [`tolerances`] - every numeric tolerance used by the verification
//!   suites, in one place.

pub mod bundles;
pub mod error;
pub mod euler;
pub mod exprlang;
pub mod forms;
pub mod models;
pub mod pfaffian;
pub mod quadrature;
pub mod sampling;
pub mod thom;
pub mod tolerances;
pub mod verify;

pub use bundles::{FramedBundle, FrameTransition, MetricConnection};
pub use error::{Error, Result};
pub use forms::{ChartDomain, ChartForm, Coefficient, FormError};
pub use models::{load_model_file, ModelBundle};
pub use pfaffian::{pfaffian, PfaffianError, SkewFormMatrix};
pub use quadrature::configure_threads;
