//! Additive separation of a structured density over its web.
//!
//! A structured differential is a product `g * d(h1) * d(h2)` with `g` of
//! differential degree 0 and `dh1 ∧ dh2` not identically zero. Writing
//! `u1 = h1 - h1(x)`, `u2 = h2 - h2(x)` for the web coordinates centered at
//! the classification point `x`, the density separates iff
//!
//! ```text
//! log g = A(u1) + B(u2) + const
//! ```
//!
//! with `A`, `B` finite-pole Laurent data plus a log term. The computation
//! never touches multivalued values: it equates the exact 1-form
//! `d(log g)` with `A'(u1) dh1 + B'(u2) dh2` and solves for the Laurent
//! coefficients of `A'`, `B'`.
//!
//! Everything happens at the classification point in straightened
//! coordinates: `y1 = u1` (the first web function becomes a coordinate,
//! through the exact inverse jet) and `u2 = y1^p y2^q * unit`. Series with
//! finite poles along the coordinate axes form a module closed under the
//! arithmetic we need, and in it the linear system is valuation-graded, so
//! exact elimination recovers pole parts, residues, and the low-order
//! Taylor data of `A` and `B` without contamination. Inconsistency of the
//! system is non-separability, which for these densities is
//! non-closedness. Exponents scaled by irrational-tagged parameters ride
//! along as separate right-hand sides and stay symbolic in the output.

use super::ast::{diff_degree, Document, Exponent, Expr, ParamKind};
use super::expand::{eval_at_point, eval_scalar, ExpandError};
use crate::coeff::Coeff;
use crate::laurent::LaurentLog1;
use crate::series1::Series1;
use crate::series2::{Series2, SeriesError};
use crate::surface::OneForm2;
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SepError {
    #[error("expression is not in the structured product class g * d(h1) * d(h2)")]
    NotStructured,
    #[error("the web of the two differential factors is degenerate")]
    WebDegenerate,
    #[error("density is identically zero")]
    ZeroDensity,
    #[error("density is not additively separable over the web (certified to order {certified_order})")]
    NotSeparable { certified_order: u32 },
    #[error("web geometry out of the supported class: {0}")]
    UnsupportedWebGeometry(&'static str),
    #[error("symbolic exponents may not nest")]
    SymbolicNesting,
    #[error(transparent)]
    Expand(#[from] ExpandError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// The separated density `log g = A(u1) + B(u2) + const`, in web
/// coordinates centered at the classification point.
#[derive(Clone, Debug)]
pub struct SeparatedDensity {
    pub a: LaurentLog1,
    pub b: LaurentLog1,
    /// The density value at the classification point when the separation is
    /// holomorphic there; 1 otherwise (a multivalued normalization has no
    /// exact scalar value).
    pub constant: Coeff,
    pub certified_order: u32,
}

/// Highest pole order allowed for the separated derivatives.
const POLE_CAP: u32 = 6;

/// Split a structured product into scalar factors and the two web
/// expressions, in source order.
pub(crate) fn structured_parts(w: &Expr) -> Option<(Vec<&Expr>, &Expr, &Expr)> {
    fn flatten<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
        match e {
            Expr::Product(fs) => {
                for f in fs {
                    flatten(f, out);
                }
            }
            other => out.push(other),
        }
    }
    let mut factors = Vec::new();
    flatten(w, &mut factors);
    let mut gs = Vec::new();
    let mut hs = Vec::new();
    for f in factors {
        match f {
            Expr::Diff(inner) => hs.push(inner.as_ref()),
            Expr::Pow(base, Exponent::Rational(r))
                if matches!(base.as_ref(), Expr::Diff(_))
                    && *r == num_rational::BigRational::from_integer(2.into()) =>
            {
                if let Expr::Diff(inner) = base.as_ref() {
                    hs.push(inner.as_ref());
                    hs.push(inner.as_ref());
                }
            }
            other if diff_degree(other) == Ok(0) => gs.push(other),
            _ => return None,
        }
    }
    if hs.len() == 2 {
        Some((gs, hs[0], hs[1]))
    } else {
        None
    }
}

/// A series divided by a monomial: `num / (y1^p1 y2^p2)`. The module of
/// these is closed under ring operations, inversion of monomial-times-unit
/// values, and derivatives, which is exactly what the separated identity
/// needs along the web leaves.
#[derive(Clone, Debug)]
struct Local {
    num: Series2,
    p1: u32,
    p2: u32,
}

impl Local {
    fn from_series(num: Series2) -> Local {
        Local { num, p1: 0, p2: 0 }
    }

    fn constant(c: Coeff, order: u32) -> Local {
        Local::from_series(Series2::constant(c, order))
    }

    fn order(&self) -> u32 {
        self.num.order()
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Cancel monomial content of the numerator against the poles.
    fn reduce(mut self) -> Local {
        if let Some((a, b)) = self.num.monomial_valuation() {
            let c1 = a.min(self.p1);
            let c2 = b.min(self.p2);
            if c1 > 0 || c2 > 0 {
                self.num = self.num.div_monomial(c1, c2);
                self.p1 -= c1;
                self.p2 -= c2;
            }
        } else {
            self.p1 = 0;
            self.p2 = 0;
        }
        self
    }

    /// Rewrite over the common denominator `y1^q1 y2^q2`; top orders pushed
    /// past the truncation are recorded as lost precision.
    fn lift_to(&self, q1: u32, q2: u32) -> Series2 {
        assert!(q1 >= self.p1 && q2 >= self.p2);
        let (d1, d2) = (q1 - self.p1, q2 - self.p2);
        if d1 == 0 && d2 == 0 {
            return self.num.clone();
        }
        self.num.mul_monomial(d1, d2)
    }

    fn add(&self, rhs: &Local) -> Local {
        let q1 = self.p1.max(rhs.p1);
        let q2 = self.p2.max(rhs.p2);
        Local {
            num: self.lift_to(q1, q2).add(&rhs.lift_to(q1, q2)),
            p1: q1,
            p2: q2,
        }
        .reduce()
    }

    fn neg(&self) -> Local {
        Local {
            num: self.num.neg(),
            p1: self.p1,
            p2: self.p2,
        }
    }

    fn scale(&self, c: &Coeff) -> Local {
        Local {
            num: self.num.scale(c),
            p1: self.p1,
            p2: self.p2,
        }
    }

    fn mul(&self, rhs: &Local) -> Local {
        Local {
            num: self.num.mul(&rhs.num),
            p1: self.p1 + rhs.p1,
            p2: self.p2 + rhs.p2,
        }
        .reduce()
    }

    /// Inverse; defined when the numerator is a monomial times a unit (its
    /// zero divisor lies on the coordinate axes).
    fn inv(&self) -> Result<Local, ()> {
        let red = self.clone().reduce();
        let (a, b) = red.num.monomial_valuation().ok_or(())?;
        let core = red.num.div_monomial(a, b);
        if !core.is_unit() {
            return Err(());
        }
        let inv_core = core.inv().expect("unit checked");
        Ok(Local {
            num: inv_core.mul_monomial(red.p1, red.p2),
            p1: a,
            p2: b,
        }
        .reduce())
    }

    fn pow_i64(&self, k: i64) -> Result<Local, ()> {
        if k < 0 {
            return self.inv()?.pow_i64(-k);
        }
        let mut acc = Local::constant(Coeff::one(), self.order());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    /// d/dy_axis of `num * y^{-p}`.
    fn derivative(&self, axis: usize) -> Local {
        let p = if axis == 0 { self.p1 } else { self.p2 };
        // (num' y - p num) / y^{p+1}
        let dnum = self.num.derivative(axis);
        let num = if p == 0 {
            return Local {
                num: dnum,
                p1: self.p1,
                p2: self.p2,
            }
            .reduce();
        } else {
            dnum.mul_monomial(
                if axis == 0 { 1 } else { 0 },
                if axis == 1 { 1 } else { 0 },
            )
            .sub(&self.num.scale(&Coeff::from_int(p as i64)))
        };
        Local {
            num,
            p1: self.p1 + u32::from(axis == 0),
            p2: self.p2 + u32::from(axis == 1),
        }
        .reduce()
    }

    fn certified_order(&self) -> u32 {
        self.num.certified_order()
    }

    /// Laurent coefficient at bidegree `(i, j)`; bidegrees below the pole
    /// floor are structurally zero. The caller keeps `i + j` within
    /// [`Local::budget`].
    fn laurent_coeff(&self, i: i64, j: i64) -> Coeff {
        let ii = i + self.p1 as i64;
        let jj = j + self.p2 as i64;
        if ii < 0 || jj < 0 || ii + jj > self.num.order() as i64 {
            Coeff::zero()
        } else {
            self.num.coeff(ii as u32, jj as u32)
        }
    }

    /// Largest Laurent total degree whose coefficients are certified.
    fn budget(&self) -> i64 {
        self.num.certified_order() as i64 - self.p1 as i64 - self.p2 as i64
    }
}

/// A 1-form with localized coefficients, `c1 dy1 + c2 dy2`.
#[derive(Clone, Debug)]
struct LocalForm {
    c1: Local,
    c2: Local,
}

impl LocalForm {
    fn zero(order: u32) -> LocalForm {
        LocalForm {
            c1: Local::from_series(Series2::zero(order)),
            c2: Local::from_series(Series2::zero(order)),
        }
    }

    fn add(&self, rhs: &LocalForm) -> LocalForm {
        LocalForm {
            c1: self.c1.add(&rhs.c1),
            c2: self.c2.add(&rhs.c2),
        }
    }

    fn scale(&self, c: &Coeff) -> LocalForm {
        LocalForm {
            c1: self.c1.scale(c),
            c2: self.c2.scale(c),
        }
    }

    fn d_of(v: &Local) -> LocalForm {
        LocalForm {
            c1: v.derivative(0),
            c2: v.derivative(1),
        }
    }
}

/// `d(log g)` split into a numeric part and one part per irrational-tagged
/// parameter in exponent position.
struct SymbolicForm {
    num: LocalForm,
    sym: BTreeMap<String, LocalForm>,
}

impl SymbolicForm {
    fn zero(order: u32) -> Self {
        SymbolicForm {
            num: LocalForm::zero(order),
            sym: BTreeMap::new(),
        }
    }

    fn add_scaled(&mut self, other: &SymbolicForm, scale: &Coeff) {
        self.num = self.num.add(&other.num.scale(scale));
        for (name, f) in &other.sym {
            let order = f.c1.order();
            let e = self
                .sym
                .entry(name.clone())
                .or_insert_with(|| LocalForm::zero(order));
            *e = e.add(&f.scale(scale));
        }
    }
}

/// The straightened chart at the classification point.
struct Frame {
    /// Chart variables as series in the straightened coordinates, with the
    /// point's offset included: evaluating an expression through these
    /// yields its localized expansion in `y`.
    z_of_y: (Series2, Series2),
    /// `u2` in `y`: `y1^p y2^q * unit`.
    u2_val: (u32, u32, Series2),
    order: u32,
}

fn build_frame(
    doc: &Document,
    h1: &Expr,
    h2: &Expr,
    point: &(Coeff, Coeff),
    order: u32,
) -> Result<(Frame, bool), SepError> {
    let u1 = centered_web_fn(doc, h1, point, order)?;
    let u2 = centered_web_fn(doc, h2, point, order)?;
    // Degenerate web: the two foliations coincide identically.
    let jac = OneForm2::d(&u1).wedge(&OneForm2::d(&u2));
    if jac.is_zero_to(jac.certified_order()) {
        return Err(SepError::WebDegenerate);
    }
    let (swapped, front, back) = if u1.linear_part() != (Coeff::zero(), Coeff::zero()) {
        (false, u1, u2)
    } else if u2.linear_part() != (Coeff::zero(), Coeff::zero()) {
        (true, u2, u1)
    } else {
        return Err(SepError::UnsupportedWebGeometry(
            "both web functions have vanishing differential at the point",
        ));
    };
    // Straighten: y1 = front, y2 = a transverse chart variable (or the
    // second web function when the linear parts are independent).
    let (a, b) = front.linear_part();
    let (c, d) = back.linear_part();
    let independent = !(&(&a * &d) - &(&b * &c)).is_zero();
    let second = if independent {
        back.clone()
    } else if !a.is_zero() {
        Series2::var(1, order)
    } else {
        Series2::var(0, order)
    };
    let (v1, v2) = Series2::invert_map(&front, &second).map_err(|_| {
        SepError::UnsupportedWebGeometry("the straightening jet is not invertible")
    })?;
    // The second web function in straightened coordinates must be a
    // monomial times a unit: its zero divisor has to sit on the leaves.
    let back_y = back.subst(&v1, &v2)?;
    let (p, q, unit) = monomial_unit(&back_y).ok_or(SepError::UnsupportedWebGeometry(
        "a web function does not factor as monomial times unit at the point",
    ))?;
    let z_of_y = (
        v1.add(&Series2::constant(point.0.clone(), order)),
        v2.add(&Series2::constant(point.1.clone(), order)),
    );
    Ok((
        Frame {
            z_of_y,
            u2_val: (p, q, unit),
            order,
        },
        swapped,
    ))
}

fn centered_web_fn(
    doc: &Document,
    h: &Expr,
    point: &(Coeff, Coeff),
    order: u32,
) -> Result<Series2, SepError> {
    let s = eval_scalar(doc, h, point, order)?;
    let c = s.constant_term();
    Ok(s.sub(&Series2::constant(c, order)))
}

fn monomial_unit(s: &Series2) -> Option<(u32, u32, Series2)> {
    let (a, b) = s.monomial_valuation()?;
    let core = s.div_monomial(a, b);
    if core.is_unit() {
        Some((a, b, core))
    } else {
        None
    }
}

/// Evaluate a degree-0 expression in the straightened localized module.
fn eval_local(doc: &Document, e: &Expr, frame: &Frame) -> Result<Local, SepError> {
    let order = frame.order;
    match e {
        Expr::Rational(r) => Ok(Local::constant(Coeff::from_rational(r.clone()), order)),
        Expr::Var(k) => Ok(Local::from_series(if *k == 0 {
            frame.z_of_y.0.clone()
        } else {
            frame.z_of_y.1.clone()
        })),
        Expr::Param(name) => match doc.params.get(name) {
            Some(ParamKind::Rational(r)) => {
                Ok(Local::constant(Coeff::from_rational(r.clone()), order))
            }
            _ => Err(ExpandError::SymbolicExponentInNumericContext(name.clone()).into()),
        },
        Expr::Sum(terms) => {
            let mut acc = Local::from_series(Series2::zero(order));
            for t in terms {
                acc = acc.add(&eval_local(doc, t, frame)?);
            }
            Ok(acc)
        }
        Expr::Product(fs) => {
            let mut acc = Local::constant(Coeff::one(), order);
            for f in fs {
                acc = acc.mul(&eval_local(doc, f, frame)?);
            }
            Ok(acc)
        }
        Expr::Pow(base, exponent) => {
            let b = eval_local(doc, base, frame)?;
            let r = match exponent {
                Exponent::Rational(r) => r.clone(),
                Exponent::Param(name) => match doc.params.get(name) {
                    Some(ParamKind::Rational(r)) => r.clone(),
                    _ => {
                        return Err(ExpandError::SymbolicExponentInNumericContext(
                            name.clone(),
                        )
                        .into())
                    }
                },
            };
            if r.is_integer() {
                let k = r.numer().to_i64().ok_or(ExpandError::ExponentOverflow)?;
                return b.pow_i64(k).map_err(|_| {
                    SepError::UnsupportedWebGeometry(
                        "inverse of a value vanishing off the web leaves",
                    )
                });
            }
            // Fractional power: monomial exponents must stay integral.
            let red = b.reduce();
            let (a, bb) = red
                .num
                .monomial_valuation()
                .ok_or(SepError::ZeroDensity)?;
            let e1 = num_rational::BigRational::from_integer((a as i64 - red.p1 as i64).into())
                * &r;
            let e2 = num_rational::BigRational::from_integer((bb as i64 - red.p2 as i64).into())
                * &r;
            if !e1.is_integer() || !e2.is_integer() {
                return Err(SepError::UnsupportedWebGeometry(
                    "fractional power of a vanishing value",
                ));
            }
            let core = red.num.div_monomial(a, bb);
            let powered = super::expand::unit_pow_rational(&core, &r)
                .map_err(SepError::Expand)?;
            let m1 = e1.numer().to_i64().ok_or(ExpandError::ExponentOverflow)?;
            let m2 = e2.numer().to_i64().ok_or(ExpandError::ExponentOverflow)?;
            let mono = Local {
                num: Series2::one(order),
                p1: 0,
                p2: 0,
            };
            let mut acc = mono;
            acc = acc.mul(&Local::from_series(powered));
            let shift = |acc: Local, m: i64, axis: usize| -> Local {
                if m >= 0 {
                    let num = acc.num.mul_monomial(
                        if axis == 0 { m as u32 } else { 0 },
                        if axis == 1 { m as u32 } else { 0 },
                    );
                    Local {
                        num,
                        p1: acc.p1,
                        p2: acc.p2,
                    }
                } else {
                    Local {
                        num: acc.num,
                        p1: acc.p1 + if axis == 0 { (-m) as u32 } else { 0 },
                        p2: acc.p2 + if axis == 1 { (-m) as u32 } else { 0 },
                    }
                }
            };
            acc = shift(acc, m1, 0);
            acc = shift(acc, m2, 1);
            Ok(acc.reduce())
        }
        Expr::Exp(arg) => {
            let a = eval_local(doc, arg, frame)?.reduce();
            if a.p1 > 0 || a.p2 > 0 {
                return Err(SepError::UnsupportedWebGeometry(
                    "exp of a value with poles cannot be expanded",
                ));
            }
            if !a.num.constant_term().is_zero() {
                return Err(ExpandError::TranscendentalConstant.into());
            }
            Ok(Local::from_series(a.num.exp()?))
        }
        Expr::Diff(_) => Err(ExpandError::NonScalarOperand("local evaluation").into()),
    }
}

/// `d log` of one scalar factor, in the straightened coordinates.
fn dlog_factor(doc: &Document, e: &Expr, frame: &Frame) -> Result<SymbolicForm, SepError> {
    let order = frame.order;
    match e {
        Expr::Rational(r) => {
            if r.is_zero() {
                return Err(SepError::ZeroDensity);
            }
            Ok(SymbolicForm::zero(order))
        }
        Expr::Param(name) => match doc.params.get(name) {
            Some(ParamKind::Rational(r)) if !r.is_zero() => Ok(SymbolicForm::zero(order)),
            Some(ParamKind::Rational(_)) => Err(SepError::ZeroDensity),
            _ => Err(ExpandError::SymbolicExponentInNumericContext(name.clone()).into()),
        },
        Expr::Product(fs) => {
            let mut acc = SymbolicForm::zero(order);
            for f in fs {
                let part = dlog_factor(doc, f, frame)?;
                acc.add_scaled(&part, &Coeff::one());
            }
            Ok(acc)
        }
        Expr::Pow(base, exponent) => {
            let inner = dlog_factor(doc, base, frame)?;
            match exponent {
                Exponent::Rational(r) => {
                    let mut acc = SymbolicForm::zero(order);
                    acc.add_scaled(&inner, &Coeff::from_rational(r.clone()));
                    Ok(acc)
                }
                Exponent::Param(name) => match doc.params.get(name) {
                    Some(ParamKind::Rational(r)) => {
                        let mut acc = SymbolicForm::zero(order);
                        acc.add_scaled(&inner, &Coeff::from_rational(r.clone()));
                        Ok(acc)
                    }
                    _ => {
                        if !inner.sym.is_empty() {
                            return Err(SepError::SymbolicNesting);
                        }
                        let mut acc = SymbolicForm::zero(order);
                        acc.sym.insert(name.clone(), inner.num);
                        Ok(acc)
                    }
                },
            }
        }
        Expr::Exp(arg) => {
            let a = eval_local(doc, arg, frame)?;
            let mut acc = SymbolicForm::zero(order);
            acc.num = LocalForm::d_of(&a);
            Ok(acc)
        }
        // Opaque scalar: d(log E) = dE / E; the inverse exists exactly when
        // the zero divisor of E sits on the web leaves, otherwise the
        // density cannot separate over this web.
        other => {
            let v = eval_local(doc, other, frame)?;
            let vinv = v.inv().map_err(|_| SepError::NotSeparable {
                certified_order: v.certified_order(),
            })?;
            let mut acc = SymbolicForm::zero(order);
            acc.num = LocalForm {
                c1: v.derivative(0).mul(&vinv),
                c2: v.derivative(1).mul(&vinv),
            };
            Ok(acc)
        }
    }
}

/// Separate the density of a structured differential over its web at
/// `point`. See the module docs for the method.
pub fn separate_log_density(
    doc: &Document,
    point: &(Coeff, Coeff),
    order: u32,
) -> Result<SeparatedDensity, SepError> {
    let (gs, h1, h2) = structured_parts(&doc.w).ok_or(SepError::NotStructured)?;
    let (frame, swapped) = build_frame(doc, h1, h2, point, order)?;

    let mut dlog = SymbolicForm::zero(order);
    for g in &gs {
        let part = dlog_factor(doc, g, &frame)?;
        dlog.add_scaled(&part, &Coeff::one());
    }

    let sol = solve_separation(&frame, &dlog)?;
    let (mut a, mut b) = (sol.a, sol.b);
    if swapped {
        std::mem::swap(&mut a, &mut b);
    }
    let holomorphic = a.is_holomorphic() && b.is_holomorphic();
    let constant = if holomorphic {
        eval_product_at(doc, &gs, point).unwrap_or_else(Coeff::one)
    } else {
        Coeff::one()
    };
    Ok(SeparatedDensity {
        a,
        b,
        constant,
        certified_order: sol.certified_order,
    })
}

struct Separated {
    a: LaurentLog1,
    b: LaurentLog1,
    certified_order: u32,
}

fn solve_separation(frame: &Frame, dlog: &SymbolicForm) -> Result<Separated, SepError> {
    let order = frame.order;
    let (p, q, unit) = &frame.u2_val;

    // u2 and its differential in localized form.
    let u2 = Local {
        num: unit.clone(),
        p1: 0,
        p2: 0,
    };
    let u2_mono = |k: i64| -> Local {
        // (y1^p y2^q)^k
        if k >= 0 {
            Local {
                num: Series2::one(order).mul_monomial(p * k as u32, q * k as u32),
                p1: 0,
                p2: 0,
            }
        } else {
            Local {
                num: Series2::one(order),
                p1: p * (-k) as u32,
                p2: q * (-k) as u32,
            }
        }
    };
    let du2 = {
        let full = u2.mul(&u2_mono(1));
        LocalForm::d_of(&full)
    };

    // Basis columns: A' side j in [-K, M] as y1^j dy1; B' side k in [-K, M]
    // as u2^k du2. Deep pole windows cost certified order (each negative
    // power of u2 shifts the trusted window by its monomial degree), so the
    // cap adapts to the truncation order.
    let weight = (p + q).max(1);
    let pole_cap = POLE_CAP.min(order / (4 * weight)).max(2);
    let taylor_cap = order;
    let n_side = (pole_cap + taylor_cap + 1) as usize;
    let mut cols: Vec<LocalForm> = Vec::with_capacity(2 * n_side);
    for j in -(pole_cap as i64)..=(taylor_cap as i64) {
        let y1j = if j >= 0 {
            Local {
                num: Series2::one(order).mul_monomial(j as u32, 0),
                p1: 0,
                p2: 0,
            }
        } else {
            Local {
                num: Series2::one(order),
                p1: (-j) as u32,
                p2: 0,
            }
        };
        cols.push(LocalForm {
            c1: y1j,
            c2: Local::from_series(Series2::zero(order)),
        });
    }
    let mut u2_pow_pos = Local::constant(Coeff::one(), order);
    let mut u2_pows: Vec<Local> = Vec::new();
    u2_pows.push(u2_pow_pos.clone());
    let u2_full = u2.mul(&u2_mono(1));
    for _ in 1..=taylor_cap {
        u2_pow_pos = u2_pow_pos.mul(&u2_full);
        u2_pows.push(u2_pow_pos.clone());
    }
    let u2_inv = u2_full.inv().map_err(|_| {
        SepError::UnsupportedWebGeometry("second web function is not invertible off its divisor")
    })?;
    let mut neg_pows: Vec<Local> = Vec::new();
    let mut acc = Local::constant(Coeff::one(), order);
    for _ in 1..=pole_cap {
        acc = acc.mul(&u2_inv);
        neg_pows.push(acc.clone());
    }
    for k in -(pole_cap as i64)..=(taylor_cap as i64) {
        let pw = if k >= 0 {
            u2_pows[k as usize].clone()
        } else {
            neg_pows[(-k) as usize - 1].clone()
        };
        cols.push(LocalForm {
            c1: pw.mul(&du2.c1),
            c2: pw.mul(&du2.c2),
        });
    }

    // Rows are Laurent bidegrees; equations are valid through the smallest
    // certified Laurent degree over all columns and right-hand sides, and
    // pole floors bound the bidegree range below.
    let mut d1: i64 = 0;
    let mut d2: i64 = 0;
    let mut r_bound = i64::MAX;
    let mut scan = |f: &LocalForm| {
        d1 = d1.max(f.c1.p1 as i64).max(f.c2.p1 as i64);
        d2 = d2.max(f.c1.p2 as i64).max(f.c2.p2 as i64);
        r_bound = r_bound.min(f.c1.budget()).min(f.c2.budget());
    };
    for c in &cols {
        scan(c);
    }
    scan(&dlog.num);
    for f in dlog.sym.values() {
        scan(f);
    }
    if r_bound < 1 {
        return Err(SepError::UnsupportedWebGeometry(
            "truncation order too small for the pole window",
        ));
    }
    let r_max = r_bound as u32;

    // Assemble and solve the exact linear system.
    let mut bidegrees: Vec<(i64, i64)> = Vec::new();
    for i in -d1..=r_bound {
        for j in -d2..=(r_bound - i.max(0)) {
            if i + j <= r_bound {
                bidegrees.push((i, j));
            }
        }
    }
    let ncols = cols.len();
    let nrhs = 1 + dlog.sym.len();
    let sym_forms: Vec<&LocalForm> = dlog.sym.values().collect();
    let mut matrix: Vec<Vec<Coeff>> = Vec::with_capacity(bidegrees.len() * 2);
    for &(i, j) in &bidegrees {
        for comp in 0..2usize {
            let pick = |f: &LocalForm| -> Coeff {
                if comp == 0 {
                    f.c1.laurent_coeff(i, j)
                } else {
                    f.c2.laurent_coeff(i, j)
                }
            };
            let mut row = Vec::with_capacity(ncols + nrhs);
            for col in &cols {
                row.push(pick(col));
            }
            row.push(pick(&dlog.num));
            for f in &sym_forms {
                row.push(pick(f));
            }
            matrix.push(row);
        }
    }

    let solutions = solve(matrix, ncols, nrhs).ok_or(SepError::NotSeparable {
        certified_order: r_max,
    })?;

    let mut a = integrate_side(&solutions[0][..n_side], pole_cap, order);
    let mut b = integrate_side(&solutions[0][n_side..], pole_cap, order);
    for (idx, name) in dlog.sym.keys().enumerate() {
        let sa = integrate_side(&solutions[idx + 1][..n_side], pole_cap, order);
        let sb = integrate_side(&solutions[idx + 1][n_side..], pole_cap, order);
        merge_symbolic(&mut a, name, sa);
        merge_symbolic(&mut b, name, sb);
    }
    Ok(Separated {
        a,
        b,
        certified_order: r_max,
    })
}

/// Exact Gauss-Jordan elimination with several augmented right-hand sides.
/// Returns one solution per rhs (free unknowns pinned to zero), or `None`
/// if any system is inconsistent.
fn solve(mut m: Vec<Vec<Coeff>>, ncols: usize, nrhs: usize) -> Option<Vec<Vec<Coeff>>> {
    let nrows = m.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut rank = 0;
    for col in 0..ncols {
        let Some(prow) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, prow);
        let inv = m[rank][col].inv().unwrap();
        for x in m[rank][col..].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, pv) in row[col..].iter_mut().zip(pivot_row[col..].iter()) {
                *x = &*x - &(&factor * pv);
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }
    for row in m.iter().skip(rank) {
        if row[ncols..].iter().any(|c| !c.is_zero()) {
            return None;
        }
    }
    let mut out = Vec::with_capacity(nrhs);
    for k in 0..nrhs {
        let mut sol = vec![Coeff::zero(); ncols];
        for (col, pivot) in pivot_of_col.iter().enumerate() {
            if let Some(r) = pivot {
                sol[col] = m[*r][ncols + k].clone();
            }
        }
        out.push(sol);
    }
    Some(out)
}

/// Integrate a derivative coefficient window `sum a_j t^j`, `j` from
/// `-pole_cap` upward, into pole part, log coefficient, and Taylor tail.
fn integrate_side(coeffs: &[Coeff], pole_cap: u32, order: u32) -> LaurentLog1 {
    let mut out = LaurentLog1::holomorphic(Series1::zero(order));
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let j = k as i64 - pole_cap as i64;
        match j.cmp(&-1) {
            std::cmp::Ordering::Less => {
                let e = (-(j + 1)) as usize;
                if out.pole.len() < e {
                    out.pole.resize(e, Coeff::zero());
                }
                out.pole[e - 1] = c / &Coeff::from_int(j + 1);
            }
            std::cmp::Ordering::Equal => {
                out.log_coeff.numeric = c.clone();
            }
            std::cmp::Ordering::Greater => {
                let e = (j + 1) as u32;
                if e <= order {
                    out.taylor.set_coeff(e, c / &Coeff::from_int(j + 1));
                }
            }
        }
    }
    out
}

fn merge_symbolic(dst: &mut LaurentLog1, name: &str, side: LaurentLog1) {
    if side.pole.iter().any(|c| !c.is_zero()) {
        dst.symbolic_pole.insert(name.to_string(), side.pole);
    }
    if !side.log_coeff.numeric.is_zero() {
        dst.log_coeff
            .add_symbolic(name, side.log_coeff.numeric.clone());
    }
    if !side.taylor.is_zero() {
        dst.symbolic_taylor.insert(name.to_string(), side.taylor);
    }
}

fn eval_product_at(doc: &Document, gs: &[&Expr], point: &(Coeff, Coeff)) -> Option<Coeff> {
    let mut acc = Coeff::one();
    for g in gs {
        acc = &acc * &eval_at_point(doc, g, point).ok()?;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_document;
    use super::*;

    fn origin() -> (Coeff, Coeff) {
        (Coeff::zero(), Coeff::zero())
    }

    #[test]
    fn monodromy_example_separates_with_log_residues() {
        // (1+z2)^alpha over the web (z1, z1(1+z2)):
        //   A = -alpha log u1, B = alpha log u2.
        let doc = parse_document(
            "param alpha : irrational\nchart z1 z2\nw = (1+z2)^alpha * d(z1) * d(z1*(1+z2))\n",
        )
        .unwrap();
        let sep = separate_log_density(&doc, &origin(), 12).unwrap();
        assert!(!sep.a.has_pole());
        assert!(!sep.b.has_pole());
        assert_eq!(sep.a.log_coeff.symbolic["alpha"], Coeff::from_int(-1));
        assert_eq!(sep.b.log_coeff.symbolic["alpha"], Coeff::from_int(1));
        assert!(sep.a.taylor.is_zero());
        assert!(sep.b.taylor.is_zero());
        assert!(sep.a.symbolic_taylor.is_empty());
        assert!(sep.b.symbolic_taylor.is_empty());
        // rational alpha gives numeric residues instead
        let doc = parse_document(
            "param alpha : = 3/4\nchart z1 z2\nw = (1+z2)^alpha * d(z1) * d(z1*(1+z2))\n",
        )
        .unwrap();
        let sep = separate_log_density(&doc, &origin(), 12).unwrap();
        assert_eq!(sep.a.log_coeff.numeric, Coeff::from_ratio(-3, 4));
        assert_eq!(sep.b.log_coeff.numeric, Coeff::from_ratio(3, 4));
    }

    #[test]
    fn essential_example_separates_with_poles() {
        // exp(-z2/(1+z1 z2)) over the web (z1, z1(1+z1 z2)):
        //   A = -1/u1, B = +1/u2.
        let doc = parse_document(
            "chart z1 z2\nw = exp(-1*z2*(1+z1*z2)^-1) * d(z1) * d(z1*(1+z1*z2))\n",
        )
        .unwrap();
        let sep = separate_log_density(&doc, &origin(), 12).unwrap();
        assert_eq!(sep.a.pole, vec![Coeff::from_int(-1)]);
        assert_eq!(sep.b.pole, vec![Coeff::from_int(1)]);
        assert!(sep.a.log_coeff.is_zero());
        assert!(sep.b.log_coeff.is_zero());
        assert!(sep.a.taylor.is_zero());
        assert!(sep.b.taylor.is_zero());
        // the sign-flipped density separates with flipped poles
        let doc = parse_document(
            "chart z1 z2\nw = exp(z2*(1+z1*z2)^-1) * d(z1) * d(z1*(1+z1*z2))\n",
        )
        .unwrap();
        let sep = separate_log_density(&doc, &origin(), 12).unwrap();
        assert_eq!(sep.a.pole, vec![Coeff::from_int(1)]);
        assert_eq!(sep.b.pole, vec![Coeff::from_int(-1)]);
    }

    #[test]
    fn separated_taylor_density() {
        // (1+z1)(1+z2) over the coordinate web: both sides holomorphic
        // logs, constant 1, exact low-order Taylor data.
        let doc =
            parse_document("chart z1 z2\nw = (1+z1)*(1+z2)*d(z1)*d(z2)\n").unwrap();
        let sep = separate_log_density(&doc, &origin(), 12).unwrap();
        assert!(sep.a.is_holomorphic());
        assert!(sep.b.is_holomorphic());
        // A = log(1+u1) = u1 - u1^2/2 + u1^3/3 - ...
        assert_eq!(sep.a.taylor.coeff(1), Coeff::one());
        assert_eq!(sep.a.taylor.coeff(2), Coeff::from_ratio(-1, 2));
        assert_eq!(sep.a.taylor.coeff(3), Coeff::from_ratio(1, 3));
        assert_eq!(sep.b.taylor.coeff(1), Coeff::one());
        assert_eq!(sep.constant, Coeff::one());
    }

    #[test]
    fn non_separable_density_is_rejected() {
        let doc = parse_document("chart z1 z2\nw = exp(z1*z2)*d(z1)*d(z2)\n").unwrap();
        match separate_log_density(&doc, &origin(), 10) {
            Err(SepError::NotSeparable { certified_order }) => {
                assert!(certified_order >= 8);
            }
            other => panic!("expected NotSeparable, got {other:?}"),
        }
    }

    #[test]
    fn away_from_the_divisor_everything_is_holomorphic() {
        // The monodromy example at (1, 0): the residues vanish because the
        // web coordinates are units there.
        let doc = parse_document(
            "param alpha : = 1/2\nchart z1 z2\nw = (1+z2)^alpha * d(z1) * d(z1*(1+z2))\n",
        )
        .unwrap();
        let sep =
            separate_log_density(&doc, &(Coeff::one(), Coeff::zero()), 12).unwrap();
        assert!(sep.a.is_holomorphic());
        assert!(sep.b.is_holomorphic());
        // and with the irrational tag the symbolic parts are holomorphic too
        let doc = parse_document(
            "param alpha : irrational\nchart z1 z2\nw = (1+z2)^alpha * d(z1) * d(z1*(1+z2))\n",
        )
        .unwrap();
        let sep =
            separate_log_density(&doc, &(Coeff::one(), Coeff::zero()), 12).unwrap();
        assert!(sep.a.is_holomorphic());
        assert!(sep.b.is_holomorphic());
    }

    #[test]
    fn sums_are_not_structured() {
        let doc = parse_document("chart z1 z2\nw = z1*d(z1)^2 - d(z2)^2\n").unwrap();
        assert_eq!(
            separate_log_density(&doc, &origin(), 10).unwrap_err(),
            SepError::NotStructured
        );
    }

    #[test]
    fn rational_monomial_factor_gives_integer_residue() {
        let doc =
            parse_document("chart z1 z2\nw = z1^-2 * d(z1) * d(z1*(1+z2))\n").unwrap();
        let sep = separate_log_density(&doc, &origin(), 12).unwrap();
        assert_eq!(sep.a.log_coeff.numeric, Coeff::from_int(-2));
        assert!(!sep.a.has_pole());
    }
}
