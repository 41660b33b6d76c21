//! Exact-arithmetic Courant algebroids, generalized metrics and connections,
//! and the generalized curvature and Ricci tensors built from them.
//!
//! All chart data lives in [`polyalg::Poly`], multivariate polynomials with
//! rational coefficients, so every identity is decided by exact equality.
//! The [`flow`] module is the only floating-point code: it integrates the
//! total generalized Ricci flow on quadratic Lie algebras.

#![allow(clippy::needless_range_loop)]

pub mod connection;
pub mod construct;
pub mod courant;
pub mod curvature;
mod error;
pub mod flow;
pub mod instance;
pub mod linalg;
pub mod metric;
pub mod polyalg;
pub mod report;

pub use connection::{DivergenceOp, GenConnection};
pub use construct::{catalog, InstanceSpec, CATALOG_NAMES};
pub use courant::{CourantAlgebroid, Covector, Section};
pub use curvature::{RicciKind, RicciTensor};
pub use error::{Error, Result, Side};
pub use metric::{AdaptedFrame, GenMetric};
pub use polyalg::{Poly, PolyVecField, Rational};
pub use report::{CheckReport, Status, Verdict};
