//! Numerical laboratory for holomorphic correspondences on the Riemann sphere.
//!
//! A correspondence is given by its graph, a bihomogeneous form `P(x, y)` on
//! `P1 x P1`. The crate evaluates correspondences, composes and iterates them,
//! estimates their equilibrium measures by orbit trees, pairs normalized graph
//! currents with test (1,1)-forms, and estimates the contraction of the
//! normalized push-forward on square-integrable (1,0)-forms.

pub mod correspondence;
pub mod error;
pub mod measure;
pub mod oneform;
pub mod pairing;
pub mod point;
pub mod poly;
pub mod quadrature;
pub mod spectral;

pub use correspondence::{builtin, Correspondence};
pub use error::{Error, Result};
pub use point::{Chart, Point, C64};
