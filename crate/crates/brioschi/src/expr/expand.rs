//! Exact expansion of an expression into series data at a rational point.
//!
//! Recentring happens here: the chart variable `z_k` expands to
//! `p_k + z_k`, so the output series live in point-centered coordinates.
//! Symbolic powers with rational-valued parameters expand through the
//! generalized binomial series in the recentered unit base; irrational
//! parameters have no numeric expansion and are routed to the structured
//! classifier instead.

use super::ast::{Document, Exponent, Expr, ParamKind};
use crate::coeff::Coeff;
use crate::series2::Series2;
use crate::surface::{OneForm2, SymDiff2};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("power base is not a unit at the expansion point")]
    NonUnitBase,
    #[error("parameter '{0}' has no rational value in a numeric context")]
    SymbolicExponentInNumericContext(String),
    #[error("constant root leaves the coefficient field")]
    NonExactConstantRoot,
    #[error("exp argument has a nonzero constant term at the expansion point")]
    TranscendentalConstant,
    #[error("term with differential degree above 2")]
    DegreeOverflow,
    #[error("sum mixes differential degrees")]
    SumDegreeMismatch,
    #[error("{0} of a differential is not defined")]
    NonScalarOperand(&'static str),
    #[error("exponent does not fit a machine integer")]
    ExponentOverflow,
    #[error("expression is not a 2-differential")]
    NotADifferential,
}

/// Expansion value: a function, a 1-form, or a symmetric 2-differential.
pub(crate) enum DiffVal {
    Scalar(Series2),
    Form(OneForm2),
    Two(SymDiff2),
}

/// Expand a document's differential at `point` to the given truncation
/// order, in point-centered coordinates.
pub fn expand_expr_at(
    doc: &Document,
    point: &(Coeff, Coeff),
    order: u32,
) -> Result<SymDiff2, ExpandError> {
    match eval(doc, &doc.w, point, order)? {
        DiffVal::Two(w) => Ok(w),
        _ => Err(ExpandError::NotADifferential),
    }
}

/// Expand a degree-0 subexpression to a series at `point`.
pub(crate) fn eval_scalar(
    doc: &Document,
    e: &Expr,
    point: &(Coeff, Coeff),
    order: u32,
) -> Result<Series2, ExpandError> {
    match eval(doc, e, point, order)? {
        DiffVal::Scalar(s) => Ok(s),
        _ => Err(ExpandError::NonScalarOperand("series expansion")),
    }
}

/// Exact value of a degree-0 subexpression at `point`.
pub(crate) fn eval_at_point(
    doc: &Document,
    e: &Expr,
    point: &(Coeff, Coeff),
) -> Result<Coeff, ExpandError> {
    Ok(eval_scalar(doc, e, point, 2)?.constant_term())
}

fn rational_exponent(doc: &Document, e: &Exponent) -> Result<BigRational, ExpandError> {
    match e {
        Exponent::Rational(r) => Ok(r.clone()),
        Exponent::Param(name) => match doc.params.get(name) {
            Some(ParamKind::Rational(r)) => Ok(r.clone()),
            _ => Err(ExpandError::SymbolicExponentInNumericContext(name.clone())),
        },
    }
}

pub(crate) fn eval(
    doc: &Document,
    e: &Expr,
    point: &(Coeff, Coeff),
    order: u32,
) -> Result<DiffVal, ExpandError> {
    match e {
        Expr::Rational(r) => Ok(DiffVal::Scalar(Series2::constant(
            Coeff::from_rational(r.clone()),
            order,
        ))),
        Expr::Var(k) => {
            let p = if *k == 0 { &point.0 } else { &point.1 };
            Ok(DiffVal::Scalar(
                Series2::var(*k, order).add(&Series2::constant(p.clone(), order)),
            ))
        }
        Expr::Param(name) => match doc.params.get(name) {
            Some(ParamKind::Rational(r)) => Ok(DiffVal::Scalar(Series2::constant(
                Coeff::from_rational(r.clone()),
                order,
            ))),
            _ => Err(ExpandError::SymbolicExponentInNumericContext(name.clone())),
        },
        Expr::Sum(terms) => {
            let mut acc: Option<DiffVal> = None;
            for t in terms {
                let v = eval(doc, t, point, order)?;
                acc = Some(match (acc, v) {
                    (None, v) => v,
                    (Some(DiffVal::Scalar(a)), DiffVal::Scalar(b)) => {
                        DiffVal::Scalar(a.add(&b))
                    }
                    (Some(DiffVal::Form(a)), DiffVal::Form(b)) => DiffVal::Form(OneForm2::new(
                        a.p.add(&b.p),
                        a.q.add(&b.q),
                    )),
                    (Some(DiffVal::Two(a)), DiffVal::Two(b)) => DiffVal::Two(a.add(&b)),
                    _ => return Err(ExpandError::SumDegreeMismatch),
                });
            }
            Ok(acc.unwrap_or(DiffVal::Scalar(Series2::zero(order))))
        }
        Expr::Product(fs) => {
            let mut acc = DiffVal::Scalar(Series2::one(order));
            for f in fs {
                let v = eval(doc, f, point, order)?;
                acc = mul_vals(acc, v)?;
            }
            Ok(acc)
        }
        Expr::Pow(base, exponent) => {
            let r = rational_exponent(doc, exponent)?;
            match eval(doc, base, point, order)? {
                DiffVal::Scalar(s) => scalar_pow(&s, &r).map(DiffVal::Scalar),
                DiffVal::Form(phi) => {
                    if r == BigRational::from_integer(1.into()) {
                        Ok(DiffVal::Form(phi))
                    } else if r == BigRational::from_integer(2.into()) {
                        Ok(DiffVal::Two(SymDiff2::product(&phi, &phi)))
                    } else {
                        Err(ExpandError::DegreeOverflow)
                    }
                }
                DiffVal::Two(w) => {
                    if r == BigRational::from_integer(1.into()) {
                        Ok(DiffVal::Two(w))
                    } else {
                        Err(ExpandError::DegreeOverflow)
                    }
                }
            }
        }
        Expr::Exp(inner) => {
            let s = eval_scalar(doc, inner, point, order)?;
            if !s.constant_term().is_zero() {
                return Err(ExpandError::TranscendentalConstant);
            }
            Ok(DiffVal::Scalar(s.exp().expect("constant term checked")))
        }
        Expr::Diff(inner) => {
            let s = eval_scalar(doc, inner, point, order)?;
            Ok(DiffVal::Form(OneForm2::d(&s)))
        }
    }
}

fn mul_vals(a: DiffVal, b: DiffVal) -> Result<DiffVal, ExpandError> {
    Ok(match (a, b) {
        (DiffVal::Scalar(a), DiffVal::Scalar(b)) => DiffVal::Scalar(a.mul(&b)),
        (DiffVal::Scalar(s), DiffVal::Form(phi)) | (DiffVal::Form(phi), DiffVal::Scalar(s)) => {
            DiffVal::Form(OneForm2::new(phi.p.mul(&s), phi.q.mul(&s)))
        }
        (DiffVal::Scalar(s), DiffVal::Two(w)) | (DiffVal::Two(w), DiffVal::Scalar(s)) => {
            DiffVal::Two(w.scale_series(&s))
        }
        (DiffVal::Form(a), DiffVal::Form(b)) => DiffVal::Two(SymDiff2::product(&a, &b)),
        _ => return Err(ExpandError::DegreeOverflow),
    })
}

/// `s^r` for rational `r`: plain powers for integers, the generalized
/// binomial series on the recentered unit base otherwise.
fn scalar_pow(s: &Series2, r: &BigRational) -> Result<Series2, ExpandError> {
    if r.is_integer() {
        let k: i64 = r.numer().to_i64().ok_or(ExpandError::ExponentOverflow)?;
        return if k >= 0 {
            Ok(s.pow(k as u32))
        } else {
            let inv = s.inv().map_err(|_| ExpandError::NonUnitBase)?;
            Ok(inv.pow((-k) as u32))
        };
    }
    unit_pow_rational(s, r)
}

/// `u^r` for a unit `u` and fractional rational `r`: exact root of the
/// leading constant along the canonical branch, generalized binomial series
/// on the normalized part.
pub(crate) fn unit_pow_rational(s: &Series2, r: &BigRational) -> Result<Series2, ExpandError> {
    let (c, m) = s.unit_parts().map_err(|_| ExpandError::NonUnitBase)?;
    let q: u32 = r
        .denom()
        .to_u32()
        .ok_or(ExpandError::ExponentOverflow)?;
    let p: i64 = r.numer().to_i64().ok_or(ExpandError::ExponentOverflow)?;
    let c_pow = c
        .nth_root(q)
        .ok_or(ExpandError::NonExactConstantRoot)?
        .pow_i64(p);
    // (1+m)^r = sum C(r, k) m^k
    let order = s.order();
    let mut acc = Series2::one(order);
    let mut term = Series2::one(order);
    let mut binom = Coeff::one();
    let r_coeff = Coeff::from_rational(r.clone());
    for k in 1..=order as i64 {
        binom = &(&binom * &(&r_coeff - &Coeff::from_int(k - 1))) / &Coeff::from_int(k);
        term = term.mul(&m);
        if term.is_zero() {
            break;
        }
        acc = acc.add(&term.scale(&binom));
    }
    Ok(acc.scale(&c_pow))
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_document;
    use super::*;

    fn origin() -> (Coeff, Coeff) {
        (Coeff::zero(), Coeff::zero())
    }

    #[test]
    fn coordinate_product_expands_everywhere() {
        let doc = parse_document("chart z1 z2\nw = d(z1)*d(z2)\n").unwrap();
        for pt in [origin(), (Coeff::from_int(2), Coeff::from_ratio(-1, 3))] {
            let w = expand_expr_at(&doc, &pt, 8).unwrap();
            assert!(w.a11.is_zero());
            assert_eq!(w.a12, Series2::one(8));
            assert!(w.a22.is_zero());
        }
    }

    #[test]
    fn nonsplit_example_recentered() {
        // z1 dz1^2 - dz2^2 at (1,0) -> (1+z1, 0, -1)
        let doc = parse_document("chart z1 z2\nw = z1*d(z1)^2 - d(z2)^2\n").unwrap();
        let w = expand_expr_at(&doc, &(Coeff::one(), Coeff::zero()), 8).unwrap();
        assert_eq!(w.a11, Series2::one(8).add(&Series2::var(0, 8)));
        assert!(w.a12.is_zero());
        assert_eq!(w.a22, Series2::constant(Coeff::from_int(-1), 8));
    }

    #[test]
    fn monodromy_example_low_order_terms() {
        // (1+z2)^(3/4) d(z1) d(z1(1+z2)) at the origin. Independent hand
        // expansion: a11 = (1+z2)^{7/4} = 1 + 7/4 z2 + 21/32 z2^2 + ...,
        // a12 = z1 (1+z2)^{3/4} = z1 (1 + 3/4 z2 - 3/32 z2^2 + ...),
        // a22 = 0.
        let doc = parse_document(
            "param alpha : = 3/4\nchart z1 z2\nw = (1+z2)^alpha * d(z1) * d(z1*(1+z2))\n",
        )
        .unwrap();
        let w = expand_expr_at(&doc, &origin(), 8).unwrap();
        assert_eq!(w.a11.coeff(0, 0), Coeff::one());
        assert_eq!(w.a11.coeff(0, 1), Coeff::from_ratio(7, 4));
        assert_eq!(w.a11.coeff(0, 2), Coeff::from_ratio(21, 32));
        assert_eq!(w.a12.coeff(1, 0), Coeff::one());
        assert_eq!(w.a12.coeff(1, 1), Coeff::from_ratio(3, 4));
        assert_eq!(w.a12.coeff(1, 2), Coeff::from_ratio(-3, 32));
        assert!(w.a22.is_zero());
    }

    #[test]
    fn irrational_parameter_has_no_numeric_expansion() {
        let doc = parse_document(
            "param alpha : irrational\nchart z1 z2\nw = (1+z2)^alpha * d(z1) * d(z2)\n",
        )
        .unwrap();
        assert_eq!(
            expand_expr_at(&doc, &origin(), 8).unwrap_err(),
            ExpandError::SymbolicExponentInNumericContext("alpha".into())
        );
    }

    #[test]
    fn fractional_power_needs_exact_root() {
        let doc = parse_document("chart z1 z2\nw = (2+z1)^1/2 * d(z1)*d(z2)\n").unwrap();
        assert_eq!(
            expand_expr_at(&doc, &origin(), 8).unwrap_err(),
            ExpandError::NonExactConstantRoot
        );
        // but (4+...) works and takes the canonical branch
        let doc = parse_document("chart z1 z2\nw = (4+z1)^1/2 * d(z1)*d(z2)\n").unwrap();
        let w = expand_expr_at(&doc, &origin(), 8).unwrap();
        assert_eq!(w.a12.constant_term(), Coeff::from_int(2));
    }

    #[test]
    fn exp_needs_vanishing_argument() {
        let doc = parse_document("chart z1 z2\nw = exp(z1*z2)*d(z1)*d(z2)\n").unwrap();
        assert!(expand_expr_at(&doc, &origin(), 8).is_ok());
        assert_eq!(
            expand_expr_at(&doc, &(Coeff::one(), Coeff::one()), 8).unwrap_err(),
            ExpandError::TranscendentalConstant
        );
    }
}
