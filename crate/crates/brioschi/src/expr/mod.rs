//! A small closed-form expression language for symmetric 2-differentials,
//! and the three-level classifier for the failure of a closed differential
//! to be of the first kind at a point.
//!
//! Input documents declare exponent parameters (rational-valued or tagged
//! irrational), name the chart variables, and define one differential:
//!
//! ```text
//! param alpha : = 3/4
//! chart z1 z2
//! w = (1+z2)^alpha * d(z1) * d(z1*(1+z2))
//! ```
//!
//! [`parse_document`] builds the AST, [`expand_expr_at`] turns it into exact
//! series data at a point, [`separate_log_density`] splits the log of a
//! structured density over the web of its two `d(·)` factors, and
//! [`classify_point`] runs the verdict pipeline: splitting, residues of the
//! separated density (monodromy), poles (essential singularities or
//! meromorphic factors), and finally first-kind.

mod ast;
mod classify;
mod expand;
mod parse;
mod separate;

pub use ast::{diff_degree, Document, Exponent, Expr, ParamKind};
pub use classify::{classify_point, disc_vanishes_at, Classification, ClassifyError, Evidence, Verdict};
pub use expand::{expand_expr_at, ExpandError};
pub use parse::{parse_document, ParseError};
pub use separate::{separate_log_density, SepError, SeparatedDensity};
