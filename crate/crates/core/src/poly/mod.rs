//! Complex polynomial arithmetic: roots, bihomogeneous forms, resultants.

pub mod bihomogeneous;
pub mod fiber;
pub mod resultant;
pub mod roots;
pub mod text;
pub mod univariate;

pub use bihomogeneous::{AffinePoly2, BihomogeneousPolynomial};
pub use fiber::{strip_fiber_factors, FiberFactor, FiberVariable, StripReport};
pub use resultant::sylvester_resultant;
pub use roots::{roots, roots_of, RootCluster, RootSet};
pub use text::{read_polynomial, write_polynomial, PolynomialFile};
pub use univariate::UnivariatePoly;
