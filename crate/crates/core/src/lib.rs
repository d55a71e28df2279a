//! Distinguished curves of conformal and projective geometry, integrated from
//! metrics given as coordinate expressions.
//!
//! A conformal geodesic is produced two ways: as a geodesic of a Weyl
//! connection whose defining 1-form is carried along by the tractor
//! connection ([`curves::ConformalCoupled`]), and as a solution of the
//! classical third-order equation ([`curves::ConformalOde3`]). The
//! [`verify`] module certifies that the two agree, that the coupled system is
//! conformally invariant, and the remaining numerical claims.

pub mod cli;
pub mod curves;
mod error;
pub mod expr;
pub mod geometry;
pub mod tractor;
pub mod verify;
pub mod weyl;

pub use curves::{integrate, Trajectory};
pub use error::{Error, Result};
pub use expr::{Expr, ExprError, Jet2};
pub use geometry::{MetricAtPoint, MetricField, PointGeometry, Signature};
pub use tractor::Tractor;
