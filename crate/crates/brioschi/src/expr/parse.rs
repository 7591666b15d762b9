//! Hand-rolled lexer and recursive-descent parser for the input language.
//!
//! One statement per line, `#` starts a comment, whitespace is free:
//!
//! ```text
//! decl    := "param" IDENT ":" ("irrational" | "=" RATIONAL)
//! chart   := "chart" IDENT IDENT
//! diff    := "w" "=" expr
//! expr    := term (("+"|"-") term)*
//! term    := factor ("*" factor)*
//! factor  := base ("^" (RATIONAL | IDENT))?
//! base    := RATIONAL | IDENT | "exp" "(" expr ")" | "d" "(" expr ")" | "(" expr ")"
//! RATIONAL := integer ("/" positive-integer)?
//! ```
//!
//! `param x = 3/4` is accepted alongside the spelled-out `param x : = 3/4`.

use super::ast::{diff_degree, Document, Exponent, Expr, ParamKind};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Colon,
    Eq,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Int(n) => write!(f, "'{n}'"),
            Tok::Plus => write!(f, "'+'"),
            Tok::Minus => write!(f, "'-'"),
            Tok::Star => write!(f, "'*'"),
            Tok::Slash => write!(f, "'/'"),
            Tok::Caret => write!(f, "'^'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::Colon => write!(f, "':'"),
            Tok::Eq => write!(f, "'='"),
        }
    }
}

fn lex_line(line: &str, lineno: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
            }
            '+' => {
                toks.push((Tok::Plus, col));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, col));
                i += 1;
            }
            '*' => {
                toks.push((Tok::Star, col));
                i += 1;
            }
            '/' => {
                toks.push((Tok::Slash, col));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Caret, col));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, col));
                i += 1;
            }
            ':' => {
                toks.push((Tok::Colon, col));
                i += 1;
            }
            '=' => {
                toks.push((Tok::Eq, col));
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                toks.push((Tok::Int(s.parse().unwrap()), col));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
            }
            other => {
                return Err(ParseError {
                    line: lineno,
                    col,
                    msg: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    line: usize,
    vars: &'a (String, String),
    params: &'a BTreeMap<String, ParamKind>,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        let col = self
            .toks
            .get(self.pos)
            .map(|t| t.1)
            .unwrap_or_else(|| self.toks.last().map(|t| t.1 + 1).unwrap_or(1));
        ParseError {
            line: self.line,
            col,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|t| &t.0);
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: &Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(found) if found == t => {
                self.pos += 1;
                Ok(())
            }
            Some(found) => Err(self.err(format!("expected {t}, found {found}"))),
            None => Err(self.err(format!("expected {t}, found end of line"))),
        }
    }

    /// integer ("/" positive-integer)?, with an optional leading minus.
    fn rational(&mut self) -> Result<BigRational, ParseError> {
        let neg = matches!(self.peek(), Some(Tok::Minus));
        if neg {
            self.pos += 1;
        }
        let n = match self.bump() {
            Some(Tok::Int(n)) => n.clone(),
            other => {
                let found = other.map(|t| t.to_string()).unwrap_or("end of line".into());
                self.pos = self.pos.saturating_sub(1);
                return Err(self.err(format!("expected a number, found {found}")));
            }
        };
        let num = if neg { -n } else { n };
        if matches!(self.peek(), Some(Tok::Slash)) {
            self.pos += 1;
            match self.bump() {
                Some(Tok::Int(d)) if !d.is_zero() => Ok(BigRational::new(num, d.clone())),
                Some(Tok::Int(_)) => {
                    self.pos = self.pos.saturating_sub(1);
                    Err(self.err("zero denominator"))
                }
                other => {
                    let found = other.map(|t| t.to_string()).unwrap_or("end of line".into());
                    self.pos = self.pos.saturating_sub(1);
                    Err(self.err(format!("expected a positive denominator, found {found}")))
                }
            }
        } else {
            Ok(BigRational::from_integer(num))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    terms.push(Expr::Product(vec![
                        Expr::Rational(BigRational::from_integer(BigInt::from(-1))),
                        t,
                    ]));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Sum(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        while matches!(self.peek(), Some(Tok::Star)) {
            self.pos += 1;
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Product(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.pos += 1;
            let exponent = match self.peek() {
                Some(Tok::Ident(name)) => {
                    let name = name.clone();
                    if !self.params.contains_key(&name) {
                        return Err(self.err(format!("undeclared parameter '{name}'")));
                    }
                    self.pos += 1;
                    Exponent::Param(name)
                }
                _ => Exponent::Rational(self.rational()?),
            };
            Ok(Expr::Pow(Box::new(base), exponent))
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(_)) | Some(Tok::Minus) => Ok(Expr::Rational(self.rational()?)),
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if (name == "exp" || name == "d")
                    && matches!(self.toks.get(self.pos + 1).map(|t| &t.0), Some(Tok::LParen))
                {
                    self.pos += 2;
                    let inner = self.expr()?;
                    self.expect(&Tok::RParen)?;
                    return Ok(if name == "exp" {
                        Expr::Exp(Box::new(inner))
                    } else {
                        Expr::Diff(Box::new(inner))
                    });
                }
                if name == self.vars.0 {
                    self.pos += 1;
                    return Ok(Expr::Var(0));
                }
                if name == self.vars.1 {
                    self.pos += 1;
                    return Ok(Expr::Var(1));
                }
                if self.params.contains_key(&name) {
                    self.pos += 1;
                    return Ok(Expr::Param(name));
                }
                Err(self.err(format!("undeclared parameter '{name}'")))
            }
            Some(t) => Err(self.err(format!("unexpected {t}"))),
            None => Err(self.err("unexpected end of line")),
        }
    }
}

/// Parse a whole document: parameter declarations, the chart statement, and
/// exactly one `w = ...` definition. The differential degree of every term
/// of `w` must be exactly 2.
pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let mut params: BTreeMap<String, ParamKind> = BTreeMap::new();
    let mut vars: Option<(String, String)> = None;
    let mut pending_w: Option<(usize, Vec<(Tok, usize)>)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let toks = lex_line(raw, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let head = &toks[0].0;
        let fail = |col: usize, msg: String| ParseError {
            line: lineno,
            col,
            msg,
        };
        match head {
            Tok::Ident(k) if k == "param" => {
                let name = match toks.get(1).map(|t| &t.0) {
                    Some(Tok::Ident(n)) => n.clone(),
                    _ => return Err(fail(toks[0].1, "expected parameter name".into())),
                };
                // "param x : irrational", "param x : = r", or "param x = r"
                let mut pos = 2;
                if matches!(toks.get(pos).map(|t| &t.0), Some(Tok::Colon)) {
                    pos += 1;
                }
                let kind = match toks.get(pos).map(|t| &t.0) {
                    Some(Tok::Ident(tag)) if tag == "irrational" => {
                        pos += 1;
                        ParamKind::Irrational
                    }
                    Some(Tok::Eq) => {
                        let mut p = Parser {
                            toks: &toks,
                            pos: pos + 1,
                            line: lineno,
                            vars: &("".into(), "".into()),
                            params: &params,
                        };
                        let r = p.rational()?;
                        pos = p.pos;
                        ParamKind::Rational(r)
                    }
                    _ => {
                        return Err(fail(
                            toks.get(pos).map(|t| t.1).unwrap_or(1),
                            "expected 'irrational' or '= RATIONAL'".into(),
                        ))
                    }
                };
                if pos != toks.len() {
                    return Err(fail(toks[pos].1, "trailing tokens after declaration".into()));
                }
                if params.insert(name.clone(), kind).is_some() {
                    return Err(fail(toks[1].1, format!("parameter '{name}' redeclared")));
                }
            }
            Tok::Ident(k) if k == "chart" => {
                match (toks.get(1).map(|t| &t.0), toks.get(2).map(|t| &t.0)) {
                    (Some(Tok::Ident(a)), Some(Tok::Ident(b))) if toks.len() == 3 && a != b => {
                        vars = Some((a.clone(), b.clone()));
                    }
                    _ => return Err(fail(toks[0].1, "expected 'chart VAR1 VAR2'".into())),
                }
            }
            Tok::Ident(k) if k == "w" => {
                if pending_w.is_some() {
                    return Err(fail(toks[0].1, "differential 'w' defined twice".into()));
                }
                if !matches!(toks.get(1).map(|t| &t.0), Some(Tok::Eq)) {
                    return Err(fail(toks[0].1, "expected 'w = EXPR'".into()));
                }
                pending_w = Some((lineno, toks));
            }
            _ => {
                return Err(fail(
                    toks[0].1,
                    "expected 'param', 'chart', or 'w' statement".into(),
                ))
            }
        }
    }

    let vars = vars.unwrap_or_else(|| ("z1".to_string(), "z2".to_string()));
    let (lineno, toks) = pending_w.ok_or(ParseError {
        line: text.lines().count().max(1),
        col: 1,
        msg: "missing 'w = EXPR' statement".into(),
    })?;
    let mut p = Parser {
        toks: &toks,
        pos: 2,
        line: lineno,
        vars: &vars,
        params: &params,
    };
    let w = p.expr()?;
    if p.pos != toks.len() {
        return Err(p.err("trailing tokens after expression"));
    }
    match diff_degree(&w) {
        Ok(2) => {}
        Ok(d) => {
            return Err(ParseError {
                line: lineno,
                col: 1,
                msg: format!("'w' must have exactly 2 differential factors per term, found {d}"),
            })
        }
        Err(msg) => {
            return Err(ParseError {
                line: lineno,
                col: 1,
                msg,
            })
        }
    }
    Ok(Document { vars, params, w })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_monodromy_example() {
        let doc = parse_document(
            "# the paper-shaped monodromy input\n\
             param alpha : = 3/4\n\
             chart z1 z2\n\
             w = (1+z2)^alpha * d(z1) * d(z1*(1+z2))\n",
        )
        .unwrap();
        assert_eq!(doc.vars.0, "z1");
        assert!(matches!(doc.params["alpha"], ParamKind::Rational(_)));
        match &doc.w {
            Expr::Product(fs) => assert_eq!(fs.len(), 3),
            other => panic!("unexpected shape {other:?}"),
        }
    }

    #[test]
    fn parses_irrational_declaration() {
        let doc = parse_document(
            "param alpha : irrational\nchart z1 z2\nw = (1+z2)^alpha * d(z1) * d(z2)\n",
        )
        .unwrap();
        assert_eq!(doc.params["alpha"], ParamKind::Irrational);
    }

    #[test]
    fn product_of_exact_differentials() {
        let doc = parse_document("chart z1 z2\nw = d(z1)*d(z2)\n").unwrap();
        assert_eq!(diff_degree(&doc.w).unwrap(), 2);
    }

    #[test]
    fn rejects_degree_one() {
        let err = parse_document("chart z1 z2\nw = d(z1)\n").unwrap_err();
        assert!(err.msg.contains("2 differential factors"), "{err}");
    }

    #[test]
    fn rejects_undeclared_parameter() {
        let err = parse_document("chart z1 z2\nw = (1+z2)^beta * d(z1)*d(z2)\n").unwrap_err();
        assert!(err.msg.contains("undeclared parameter 'beta'"), "{err}");
        assert_eq!(err.line, 2);
    }

    #[test]
    fn position_annotated_syntax_error() {
        let err = parse_document("chart z1 z2\nw = d(z1)*d(z2) +\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.col >= 17, "{err}");
    }

    #[test]
    fn negative_literals_and_powers() {
        let doc = parse_document("chart z1 z2\nw = z1*d(z1)^2 - d(z2)^2\n").unwrap();
        assert_eq!(diff_degree(&doc.w).unwrap(), 2);
        let doc =
            parse_document("chart z1 z2\nw = exp(-1*z2*(1+z1*z2)^-1) * d(z1) * d(z1*(1+z1*z2))\n")
                .unwrap();
        assert_eq!(diff_degree(&doc.w).unwrap(), 2);
    }
}
