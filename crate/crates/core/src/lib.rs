//! Geometric medians and p-means on Riemannian manifolds, with a Toeplitz
//! covariance toolkit and a radar target detector built on top.

pub mod error;
pub mod estimators;
pub mod io;
pub mod manifold;
pub mod radar;
pub mod robustness;
pub mod toeplitz;

pub use error::{Error, Result};
pub use manifold::{Manifold, ManifoldKind, Point, TangentVector};
