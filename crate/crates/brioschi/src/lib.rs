//! Exact local analysis of symmetric 2-differentials on complex surface
//! charts.
//!
//! The crate decides, in exact Gaussian-rational arithmetic, whether a
//! symmetric 2-differential on a two-dimensional chart is closed (admits a
//! local decomposition into products of differentials of holomorphic
//! functions), computes the decomposition when one exists, and classifies
//! the ways closedness can fail to extend across the degeneracy locus:
//! failure to split, monodromy of the decomposition factors, and essential
//! singularities of the factors.
//!
//! Modules:
//! - [`coeff`], [`series1`], [`series2`], [`laurent`]: the exact truncated
//!   series engine.
//! - [`surface`]: determinant, discriminant, the curvature-type operator
//!   and its holomorphic numerator, splitting, web flattening, exact
//!   decomposition.
//! - [`expr`]: a small closed-form input language, expansion at a point,
//!   separation of structured densities, and the failure classifier.
//! - [`jets`]: exact Jacobian ranks of the closed-jet parametrization.
//! - [`curves`]: counting and enumeration of degree-`m` splittings of a
//!   canonical-type divisor on a curve.

pub mod coeff;
pub mod curves;
pub mod expr;
pub mod jets;
pub mod laurent;
pub mod series1;
pub mod series2;
pub mod surface;

pub use coeff::Coeff;
pub use laurent::{LaurentLog1, LogCoeff};
pub use series1::Series1;
pub use series2::{Series2, SeriesError};
pub use surface::{
    first_integral, ClosednessReport, DecompositionOptions, ExactDecomposition, OneForm2,
    SurfaceError, SymDiff2, WebChart,
};
