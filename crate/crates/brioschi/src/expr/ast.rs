//! AST for the differential expression language.

use num_rational::BigRational;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exponent {
    Rational(BigRational),
    Param(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Rational(BigRational),
    /// Chart variable by axis (0 or 1).
    Var(usize),
    Param(String),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, Exponent),
    Exp(Box<Expr>),
    /// Differential `d(inner)` of a degree-0 expression.
    Diff(Box<Expr>),
}

/// Declared rationality of an exponent parameter. Irrationality is a
/// declaration, never detected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Rational(BigRational),
    Irrational,
}

#[derive(Clone, Debug)]
pub struct Document {
    pub vars: (String, String),
    pub params: BTreeMap<String, ParamKind>,
    pub w: Expr,
}

/// Differential degree of an expression: the number of `d(·)` factors in
/// each term. A well-formed 2-differential has degree exactly 2 in every
/// term; mixed-degree sums and degrees above 2 are rejected.
pub fn diff_degree(e: &Expr) -> Result<u32, String> {
    match e {
        Expr::Rational(_) | Expr::Var(_) | Expr::Param(_) => Ok(0),
        Expr::Sum(terms) => {
            let mut deg = None;
            for t in terms {
                let d = diff_degree(t)?;
                match deg {
                    None => deg = Some(d),
                    Some(prev) if prev != d => {
                        return Err(format!(
                            "sum mixes terms of differential degree {prev} and {d}"
                        ))
                    }
                    _ => {}
                }
            }
            Ok(deg.unwrap_or(0))
        }
        Expr::Product(fs) => {
            let mut total = 0;
            for f in fs {
                total += diff_degree(f)?;
            }
            if total > 2 {
                return Err(format!("term has differential degree {total} (max 2)"));
            }
            Ok(total)
        }
        Expr::Pow(base, e) => {
            let d = diff_degree(base)?;
            if d == 0 {
                return Ok(0);
            }
            match e {
                Exponent::Rational(r) if r.is_integer() => {
                    let k: i64 = r
                        .numer()
                        .try_into()
                        .map_err(|_| "exponent too large".to_string())?;
                    if k < 0 {
                        return Err("negative power of a differential".to_string());
                    }
                    let total = d as i64 * k;
                    if total > 2 {
                        return Err(format!("term has differential degree {total} (max 2)"));
                    }
                    Ok(total as u32)
                }
                _ => Err("non-integer power of a differential".to_string()),
            }
        }
        Expr::Exp(inner) => {
            if diff_degree(inner)? != 0 {
                Err("exp of a differential".to_string())
            } else {
                Ok(0)
            }
        }
        Expr::Diff(inner) => {
            if diff_degree(inner)? != 0 {
                Err("d(...) applied to a differential".to_string())
            } else {
                Ok(1)
            }
        }
    }
}
