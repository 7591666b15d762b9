//! The verdict pipeline at a point.
//!
//! Levels, in order: splitting of the quadratic form (the exact square root
//! of the discriminant), monodromy of the separated density (residues on
//! the web coordinates), singularities of the separated factors (poles of
//! the Laurent data), and finally first-kind. Structured products are
//! classified through the separation machinery; general expressions expand
//! numerically and are classified up to splitting and closedness, with a
//! full decomposition when the point is nondegenerate.

use super::ast::Document;
use super::expand::{expand_expr_at, ExpandError};
use super::separate::{separate_log_density, structured_parts, SepError, SeparatedDensity};
use crate::coeff::Coeff;
use crate::surface::{ExactDecomposition, OneForm2, SurfaceError};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    FirstKind,
    NonSplit,
    /// Finite monodromy of the decomposition factors; the payload is the
    /// smallest ramified cover order making them single-valued.
    FiniteMonodromy(u64),
    InfiniteMonodromy,
    EssentialSingularity,
    MeromorphicFactors,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::FirstKind => write!(f, "FirstKind"),
            Verdict::NonSplit => write!(f, "NonSplit"),
            Verdict::FiniteMonodromy(q) => write!(f, "FiniteMonodromy({q})"),
            Verdict::InfiniteMonodromy => write!(f, "InfiniteMonodromy"),
            Verdict::EssentialSingularity => write!(f, "EssentialSingularity"),
            Verdict::MeromorphicFactors => write!(f, "MeromorphicFactors"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Evidence {
    /// The separated density over the web of the two factors.
    Separated(SeparatedDensity),
    /// Why the square root of the discriminant failed.
    NonSplitWitness { reason: String },
    /// A verified holomorphic exact decomposition.
    Decomposition(ExactDecomposition),
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("no holomorphic exact decomposition at this point (certified to order {certified_order})")]
    NotClosedHere { certified_order: u32 },
    #[error("structured form g*d(h1)*d(h2) required to classify beyond the splitting level at a degenerate point")]
    StructuredFormRequired,
    #[error(transparent)]
    Expand(#[from] ExpandError),
    #[error(transparent)]
    Sep(SepError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Classify the document's differential at a rational point.
pub fn classify_point(
    doc: &Document,
    point: &(Coeff, Coeff),
    order: u32,
) -> Result<Classification, ClassifyError> {
    if structured_parts(&doc.w).is_some() {
        match separate_log_density(doc, point, order) {
            Ok(sep) => return Ok(verdict_from_separation(sep)),
            Err(SepError::NotSeparable { certified_order }) => {
                return Err(ClassifyError::NotClosedHere { certified_order })
            }
            // A degenerate web (e.g. d(h)^2) is rank 1; fall through to the
            // numeric pipeline.
            Err(SepError::WebDegenerate) => {}
            Err(e) => return Err(ClassifyError::Sep(e)),
        }
    }
    classify_numeric(doc, point, order)
}

fn classify_numeric(
    doc: &Document,
    point: &(Coeff, Coeff),
    order: u32,
) -> Result<Classification, ClassifyError> {
    let w = expand_expr_at(doc, point, order)?;
    match w.split_local() {
        Err(SurfaceError::NonSplitHere(reason)) => {
            return Ok(Classification {
                verdict: Verdict::NonSplit,
                evidence: Evidence::NonSplitWitness {
                    reason: reason.to_string(),
                },
            })
        }
        Err(other) => return Err(other.into()),
        Ok(_) => {}
    }
    let rep = w.is_closed();
    if !rep.closed {
        return Err(ClassifyError::NotClosedHere {
            certified_order: rep.certified_order,
        });
    }
    if w.is_degenerate_at_origin() {
        // Split and closed, but the point sits on the degeneracy divisor:
        // the monodromy and singularity levels need the structured form.
        return Err(ClassifyError::StructuredFormRequired);
    }
    let d = w.exact_decomposition().map_err(|e| match e {
        SurfaceError::NotClosedHere { certified_order } => {
            ClassifyError::NotClosedHere { certified_order }
        }
        other => ClassifyError::Surface(other),
    })?;
    Ok(Classification {
        verdict: Verdict::FirstKind,
        evidence: Evidence::Decomposition(d),
    })
}

fn verdict_from_separation(sep: SeparatedDensity) -> Classification {
    let residues = [&sep.a.log_coeff, &sep.b.log_coeff];
    // Level 2a: a residue scaled by an irrational-tagged parameter winds
    // infinitely.
    if residues.iter().any(|l| l.has_symbolic()) {
        return Classification {
            verdict: Verdict::InfiniteMonodromy,
            evidence: Evidence::Separated(sep),
        };
    }
    // Level 2b: non-real residues also generate an infinite group.
    if residues.iter().any(|l| !l.numeric.is_real() && !l.numeric.is_zero()) {
        return Classification {
            verdict: Verdict::InfiniteMonodromy,
            evidence: Evidence::Separated(sep),
        };
    }
    // Level 2c: fractional rational residues need a ramified cover of order
    // lcm of the denominators.
    let mut cover = BigInt::from(1);
    for l in residues {
        if !l.numeric.is_zero() {
            cover = cover.lcm(l.numeric.re().denom());
        }
    }
    if cover > BigInt::from(1) {
        let q = cover.to_u64().unwrap_or(u64::MAX);
        return Classification {
            verdict: Verdict::FiniteMonodromy(q),
            evidence: Evidence::Separated(sep),
        };
    }
    // Level 3: poles. A pole surviving in the separated exponent means the
    // factor is exp(pole): an essential singularity. Purely integral
    // negative residues are single-valued meromorphic monomial factors.
    if sep.a.has_pole() || sep.b.has_pole() {
        return Classification {
            verdict: Verdict::EssentialSingularity,
            evidence: Evidence::Separated(sep),
        };
    }
    let negative_integer = residues
        .iter()
        .any(|l| !l.numeric.is_zero() && l.numeric.re().is_negative());
    if negative_integer {
        return Classification {
            verdict: Verdict::MeromorphicFactors,
            evidence: Evidence::Separated(sep),
        };
    }
    Classification {
        verdict: Verdict::FirstKind,
        evidence: Evidence::Separated(sep),
    }
}

/// Exact test of discriminant vanishing at a point, usable also for
/// structured inputs with symbolic exponents (there the discriminant is
/// `(g * Jacobian)^2`, and the Jacobian factor is always numeric).
pub fn disc_vanishes_at(
    doc: &Document,
    point: &(Coeff, Coeff),
    order: u32,
) -> Result<bool, ClassifyError> {
    if let Some((gs, h1, h2)) = structured_parts(&doc.w) {
        let h1s = super::expand::eval_scalar(doc, h1, point, order)?;
        let h2s = super::expand::eval_scalar(doc, h2, point, order)?;
        let jac0 = OneForm2::d(&h1s)
            .wedge(&OneForm2::d(&h2s))
            .constant_term();
        if jac0.is_zero() {
            return Ok(true);
        }
        for g in gs {
            match nonzero_at(doc, g, point) {
                Some(true) => {}
                Some(false) => return Ok(true),
                None => return Err(ClassifyError::Expand(ExpandError::NonUnitBase)),
            }
        }
        return Ok(false);
    }
    let w = expand_expr_at(doc, point, order)?;
    Ok(w.is_degenerate_at_origin())
}

/// Whether a degree-0 factor is provably nonzero at the point; `None` when
/// undecidable without a numeric value.
fn nonzero_at(doc: &Document, e: &super::ast::Expr, point: &(Coeff, Coeff)) -> Option<bool> {
    use super::ast::Expr;
    match e {
        Expr::Exp(_) => Some(true),
        Expr::Pow(base, _) => nonzero_at(doc, base, point),
        Expr::Product(fs) => {
            let mut all = true;
            for f in fs {
                match nonzero_at(doc, f, point) {
                    Some(true) => {}
                    Some(false) => return Some(false),
                    None => all = false,
                }
            }
            if all {
                Some(true)
            } else {
                None
            }
        }
        other => super::expand::eval_at_point(doc, other, point)
            .ok()
            .map(|v| !v.is_zero()),
    }
}
