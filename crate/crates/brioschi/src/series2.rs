//! Exact truncated power series in two variables.
//!
//! A [`Series2`] of order `N` stores Gaussian-rational coefficients for all
//! monomials `z1^i z2^j` with `i + j <= N`. Operations never round: any
//! coefficient of total degree within the certified order is bit-exact.
//! `precision_loss` tracks the top orders that stopped being trustworthy
//! (derivatives shorten the window by one, monomial-valuation square roots
//! by half the valuation, truncated products by the truncation gap).
//!
//! Binary operations require equal truncation orders and panic otherwise;
//! an order mismatch is a structural bug in the caller, not input data.
//! Partial operations whose failure carries meaning (`inv`, `sqrt`, `exp`,
//! composition) return [`SeriesError`].

use crate::coeff::Coeff;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("series is not a unit (zero constant term)")]
    NotAUnit,
    #[error("series is not a square: {0}")]
    NotASquare(&'static str),
    #[error("nonzero constant term where zero is required")]
    NonzeroConstantTerm,
    #[error("linear parts do not form an invertible jet")]
    DegenerateJacobian,
}

#[derive(Clone)]
pub struct Series2 {
    order: u32,
    coeffs: BTreeMap<(u32, u32), Coeff>,
    precision_loss: u32,
}

/// Value equality: coefficients and truncation order. The precision window
/// is bookkeeping, not part of the value.
impl PartialEq for Series2 {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.coeffs == other.coeffs
    }
}

impl Eq for Series2 {}

fn tri_size(n: u32) -> usize {
    ((n as usize + 1) * (n as usize + 2)) / 2
}

fn tri_idx(i: u32, j: u32, n: u32) -> usize {
    let i = i as usize;
    let n = n as usize;
    i * (n + 1) - (i * (i.saturating_sub(1))) / 2 + j as usize
}

impl Series2 {
    pub fn zero(order: u32) -> Self {
        Series2 {
            order,
            coeffs: BTreeMap::new(),
            precision_loss: 0,
        }
    }

    pub fn one(order: u32) -> Self {
        Series2::constant(Coeff::one(), order)
    }

    pub fn constant(c: Coeff, order: u32) -> Self {
        let mut s = Series2::zero(order);
        if !c.is_zero() {
            s.coeffs.insert((0, 0), c);
        }
        s
    }

    /// The chart variable: axis 0 is `z1`, axis 1 is `z2`.
    pub fn var(axis: usize, order: u32) -> Self {
        Series2::monomial(if axis == 0 { 1 } else { 0 }, if axis == 0 { 0 } else { 1 }, Coeff::one(), order)
    }

    pub fn monomial(i: u32, j: u32, c: Coeff, order: u32) -> Self {
        assert!(i + j <= order, "monomial degree beyond truncation order");
        let mut s = Series2::zero(order);
        if !c.is_zero() {
            s.coeffs.insert((i, j), c);
        }
        s
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn precision_loss(&self) -> u32 {
        self.precision_loss
    }

    pub fn set_precision_loss(&mut self, loss: u32) {
        self.precision_loss = loss;
    }

    /// Total degree up to which the stored coefficients are trustworthy.
    pub fn certified_order(&self) -> u32 {
        self.order.saturating_sub(self.precision_loss)
    }

    pub fn coeff(&self, i: u32, j: u32) -> Coeff {
        self.coeffs
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(Coeff::zero)
    }

    pub fn set_coeff(&mut self, i: u32, j: u32, c: Coeff) {
        assert!(i + j <= self.order, "degree beyond truncation order");
        if c.is_zero() {
            self.coeffs.remove(&(i, j));
        } else {
            self.coeffs.insert((i, j), c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Coeff)> {
        self.coeffs.iter()
    }

    pub fn constant_term(&self) -> Coeff {
        self.coeff(0, 0)
    }

    pub fn is_unit(&self) -> bool {
        !self.constant_term().is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero_to(&self, k: u32) -> bool {
        self.coeffs.keys().all(|&(i, j)| i + j > k)
    }

    /// Equality of all coefficients of total degree `<= k`.
    pub fn eq_to_order(&self, other: &Series2, k: u32) -> bool {
        let ok = |s: &Series2, o: &Series2| {
            s.coeffs
                .iter()
                .filter(|(&(i, j), _)| i + j <= k)
                .all(|(&(i, j), c)| &o.coeff(i, j) == c)
        };
        ok(self, other) && ok(other, self)
    }

    pub fn linear_part(&self) -> (Coeff, Coeff) {
        (self.coeff(1, 0), self.coeff(0, 1))
    }

    /// Smallest total degree with a nonzero coefficient.
    pub fn valuation(&self) -> Option<u32> {
        self.coeffs.keys().map(|&(i, j)| i + j).min()
    }

    /// Componentwise minimum of exponents over the support: the largest
    /// monomial dividing every term.
    pub fn monomial_valuation(&self) -> Option<(u32, u32)> {
        if self.coeffs.is_empty() {
            return None;
        }
        let a = self.coeffs.keys().map(|&(i, _)| i).min().unwrap();
        let b = self.coeffs.keys().map(|&(_, j)| j).min().unwrap();
        Some((a, b))
    }

    pub fn homogeneous_part(&self, d: u32) -> Series2 {
        let mut out = Series2::zero(self.order);
        for (&(i, j), c) in &self.coeffs {
            if i + j == d {
                out.coeffs.insert((i, j), c.clone());
            }
        }
        out.precision_loss = self.precision_loss;
        out
    }

    pub fn add(&self, rhs: &Series2) -> Series2 {
        assert_eq!(self.order, rhs.order, "series order mismatch");
        let mut out = self.clone();
        for (&k, c) in &rhs.coeffs {
            let cur = out.coeffs.remove(&k).unwrap_or_else(Coeff::zero);
            let s = &cur + c;
            if !s.is_zero() {
                out.coeffs.insert(k, s);
            }
        }
        out.precision_loss = self.precision_loss.max(rhs.precision_loss);
        out
    }

    pub fn sub(&self, rhs: &Series2) -> Series2 {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Series2 {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> Series2 {
        if c.is_zero() {
            let mut z = Series2::zero(self.order);
            z.precision_loss = self.precision_loss;
            return z;
        }
        let mut out = self.clone();
        for x in out.coeffs.values_mut() {
            *x = &*x * c;
        }
        out
    }

    pub fn mul(&self, rhs: &Series2) -> Series2 {
        self.mul_to(rhs, self.order)
    }

    /// Product truncated to total degree `cap`. If `cap` is below the
    /// truncation order the missing top degrees are recorded as lost
    /// precision.
    pub fn mul_to(&self, rhs: &Series2, cap: u32) -> Series2 {
        assert_eq!(self.order, rhs.order, "series order mismatch");
        let cap = cap.min(self.order);
        let mut acc = vec![Coeff::zero(); tri_size(cap)];
        for (&(i1, j1), c1) in &self.coeffs {
            if i1 + j1 > cap {
                continue;
            }
            for (&(i2, j2), c2) in &rhs.coeffs {
                let (i, j) = (i1 + i2, j1 + j2);
                if i + j > cap {
                    continue;
                }
                let p = c1 * c2;
                let slot = &mut acc[tri_idx(i, j, cap)];
                *slot = &*slot + &p;
            }
        }
        let mut out = Series2::zero(self.order);
        for i in 0..=cap {
            for j in 0..=(cap - i) {
                let c = std::mem::replace(&mut acc[tri_idx(i, j, cap)], Coeff::zero());
                if !c.is_zero() {
                    out.coeffs.insert((i, j), c);
                }
            }
        }
        out.precision_loss = self
            .precision_loss
            .max(rhs.precision_loss)
            .max(self.order - cap);
        out
    }

    pub fn pow(&self, e: u32) -> Series2 {
        let mut acc = Series2::one(self.order);
        acc.precision_loss = self.precision_loss;
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative along `axis` (0 for z1, 1 for z2). The top order
    /// of the result is no longer certified.
    pub fn derivative(&self, axis: usize) -> Series2 {
        let mut out = Series2::zero(self.order);
        for (&(i, j), c) in &self.coeffs {
            let (e, rest) = if axis == 0 { (i, (i.wrapping_sub(1), j)) } else { (j, (i, j.wrapping_sub(1))) };
            if e == 0 {
                continue;
            }
            out.coeffs
                .insert(rest, c * &Coeff::from_int(e as i64));
        }
        out.precision_loss = self.precision_loss + 1;
        out
    }

    /// Formal antiderivative along `axis`, zero constant term in the
    /// integrated variable; terms pushed beyond the truncation order drop.
    pub fn antiderivative(&self, axis: usize) -> Series2 {
        let mut out = Series2::zero(self.order);
        for (&(i, j), c) in &self.coeffs {
            let (i2, j2, e) = if axis == 0 {
                (i + 1, j, i + 1)
            } else {
                (i, j + 1, j + 1)
            };
            if i2 + j2 > self.order {
                continue;
            }
            out.coeffs
                .insert((i2, j2), c / &Coeff::from_int(e as i64));
        }
        out.precision_loss = self.precision_loss;
        out
    }

    /// Split a unit as `c * (1 + m)` with `m` of zero constant term.
    pub fn unit_parts(&self) -> Result<(Coeff, Series2), SeriesError> {
        let c = self.constant_term();
        let cinv = c.inv().ok_or(SeriesError::NotAUnit)?;
        let mut m = self.scale(&cinv);
        m.coeffs.remove(&(0, 0));
        Ok((c, m))
    }

    /// Multiplicative inverse of a unit.
    pub fn inv(&self) -> Result<Series2, SeriesError> {
        let (c, m) = self.unit_parts()?;
        let neg_m = m.neg();
        let mut acc = Series2::one(self.order);
        let mut term = Series2::one(self.order);
        for _ in 1..=self.order {
            term = term.mul(&neg_m);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        let mut out = acc.scale(&c.inv().unwrap());
        out.precision_loss = self.precision_loss;
        Ok(out)
    }

    /// Square root along the canonical branch.
    ///
    /// The monomial content `z1^a z2^b` is factored out first; both
    /// exponents must be even and the remaining constant term must be a
    /// square in the coefficient field, otherwise the series is not a
    /// square of a series and `NotASquare` reports which step failed.
    pub fn sqrt(&self) -> Result<Series2, SeriesError> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let (a, b) = self.monomial_valuation().unwrap();
        if a % 2 != 0 || b % 2 != 0 {
            return Err(SeriesError::NotASquare("odd monomial valuation"));
        }
        let t = self.div_monomial(a, b);
        let c0 = t.constant_term();
        if c0.is_zero() {
            return Err(SeriesError::NotASquare(
                "constant term vanishes after factoring the monomial content",
            ));
        }
        let r0 = c0
            .sqrt()
            .ok_or(SeriesError::NotASquare("leading coefficient is not a square"))?;
        let (_, m) = t.unit_parts().unwrap();
        // (1+m)^{1/2} by the binomial recurrence.
        let mut acc = Series2::one(self.order);
        let mut term = Series2::one(self.order);
        let mut binom = Coeff::one();
        for k in 1..=self.order as i64 {
            // C(1/2, k) = C(1/2, k-1) * (1/2 - (k-1)) / k
            binom = &(&binom * &(&Coeff::from_ratio(1, 2) - &Coeff::from_int(k - 1))) / &Coeff::from_int(k);
            term = term.mul(&m);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term.scale(&binom));
        }
        let mut out = acc.scale(&r0).mul_monomial(a / 2, b / 2);
        out.precision_loss = self.precision_loss + (a + b) / 2;
        Ok(out)
    }

    /// log of the normalized unit part: for `u = c (1 + m)` returns
    /// `log(1 + m)`, a series with zero constant term. The constant `c` is
    /// the caller's to carry.
    pub fn log_unit(&self) -> Result<Series2, SeriesError> {
        let (_, m) = self.unit_parts()?;
        let mut acc = Series2::zero(self.order);
        let mut term = Series2::one(self.order);
        for k in 1..=self.order as i64 {
            term = term.mul(&m);
            if term.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&term.scale(&Coeff::from_ratio(sign, k)));
        }
        acc.precision_loss = self.precision_loss;
        Ok(acc)
    }

    /// exp of a series with zero constant term.
    pub fn exp(&self) -> Result<Series2, SeriesError> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let mut acc = Series2::one(self.order);
        let mut term = Series2::one(self.order);
        for k in 1..=self.order as i64 {
            term = term.mul(self).scale(&Coeff::from_ratio(1, k));
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        acc.precision_loss = self.precision_loss;
        Ok(acc)
    }

    /// Substitute `t1`, `t2` (both with zero constant term) for the chart
    /// variables.
    pub fn subst(&self, t1: &Series2, t2: &Series2) -> Result<Series2, SeriesError> {
        if !t1.constant_term().is_zero() || !t2.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let n = t1.order();
        assert_eq!(n, t2.order(), "series order mismatch");
        // Powers of t2 once, then Horner over t1.
        let mut t2_pows = Vec::with_capacity(self.order as usize + 1);
        t2_pows.push(Series2::one(n));
        for k in 1..=self.order {
            t2_pows.push(t2_pows[k as usize - 1].mul(t2));
        }
        let mut acc = Series2::zero(n);
        for i in (0..=self.order).rev() {
            acc = acc.mul(t1);
            for j in 0..=(self.order - i) {
                let c = self.coeff(i, j);
                if !c.is_zero() {
                    acc = acc.add(&t2_pows[j as usize].scale(&c));
                }
            }
        }
        acc.precision_loss = self
            .precision_loss
            .max(t1.precision_loss)
            .max(t2.precision_loss);
        Ok(acc)
    }

    /// Recenter: returns `s(z + p)`, exact for these polynomial-supported
    /// truncations.
    pub fn shift(&self, p: &(Coeff, Coeff)) -> Series2 {
        if p.0.is_zero() && p.1.is_zero() {
            return self.clone();
        }
        let n = self.order;
        let binom = binomial_table(n);
        let p1_pows = coeff_pows(&p.0, n);
        let p2_pows = coeff_pows(&p.1, n);
        let mut out = Series2::zero(n);
        for (&(i, j), c) in &self.coeffs {
            for k in 0..=i {
                let bi = &binom[i as usize][k as usize];
                let f1 = &(bi * &p1_pows[(i - k) as usize]) * c;
                if f1.is_zero() {
                    continue;
                }
                for l in 0..=j {
                    let bj = &binom[j as usize][l as usize];
                    let f = &(bj * &p2_pows[(j - l) as usize]) * &f1;
                    if f.is_zero() {
                        continue;
                    }
                    let cur = out.coeffs.remove(&(k, l)).unwrap_or_else(Coeff::zero);
                    let s = &cur + &f;
                    if !s.is_zero() {
                        out.coeffs.insert((k, l), s);
                    }
                }
            }
        }
        out.precision_loss = self.precision_loss;
        out
    }

    /// Exact evaluation at a point (the series is a polynomial).
    pub fn eval(&self, p: &(Coeff, Coeff)) -> Coeff {
        let n = self.order;
        let p1_pows = coeff_pows(&p.0, n);
        let p2_pows = coeff_pows(&p.1, n);
        let mut acc = Coeff::zero();
        for (&(i, j), c) in &self.coeffs {
            acc += &(&(&p1_pows[i as usize] * &p2_pows[j as usize]) * c);
        }
        acc
    }

    /// Exact division by `z1^a z2^b`; panics if a term is not divisible.
    pub fn div_monomial(&self, a: u32, b: u32) -> Series2 {
        let mut out = Series2::zero(self.order);
        for (&(i, j), c) in &self.coeffs {
            assert!(i >= a && j >= b, "term not divisible by the monomial");
            out.coeffs.insert((i - a, j - b), c.clone());
        }
        out.precision_loss = self.precision_loss + a + b;
        out
    }

    /// Multiplication by `z1^a z2^b`, dropping overflow beyond the order.
    /// Shifting degrees up moves the untrusted tail further out, so the
    /// certified window can only grow (capped by the truncation order).
    pub fn mul_monomial(&self, a: u32, b: u32) -> Series2 {
        let mut out = Series2::zero(self.order);
        for (&(i, j), c) in &self.coeffs {
            if i + a + j + b <= self.order {
                out.coeffs.insert((i + a, j + b), c.clone());
            }
        }
        out.precision_loss = self.precision_loss.saturating_sub(a + b);
        out
    }

    /// Invert the 2-jet map `z -> (u1(z), u2(z))` (zero constant terms,
    /// independent linear parts): returns `(v1, v2)` with
    /// `v_i(u1(z), u2(z)) = z_i` to the working order.
    pub fn invert_map(u1: &Series2, u2: &Series2) -> Result<(Series2, Series2), SeriesError> {
        if !u1.constant_term().is_zero() || !u2.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let n = u1.order();
        assert_eq!(n, u2.order(), "series order mismatch");
        let (a, b) = u1.linear_part();
        let (c, d) = u2.linear_part();
        let det = &(&a * &d) - &(&b * &c);
        let det_inv = det.inv().ok_or(SeriesError::DegenerateJacobian)?;
        // Rows of the inverse linear map.
        let l00 = &d * &det_inv;
        let l01 = -(&b * &det_inv);
        let l10 = -(&c * &det_inv);
        let l11 = &a * &det_inv;
        let lin = |x: &Coeff, y: &Coeff| -> Series2 {
            Series2::var(0, n).scale(x).add(&Series2::var(1, n).scale(y))
        };
        let linv1 = lin(&l00, &l01);
        let linv2 = lin(&l10, &l11);
        let mut v1 = linv1.clone();
        let mut v2 = linv2.clone();
        for deg in 2..=n {
            let e1 = v1.subst(u1, u2)?.sub(&Series2::var(0, n));
            let e2 = v2.subst(u1, u2)?.sub(&Series2::var(1, n));
            debug_assert!(e1.valuation().map_or(true, |v| v >= deg));
            debug_assert!(e2.valuation().map_or(true, |v| v >= deg));
            let d1 = e1.homogeneous_part(deg).subst(&linv1, &linv2)?;
            let d2 = e2.homogeneous_part(deg).subst(&linv1, &linv2)?;
            v1 = v1.sub(&d1);
            v2 = v2.sub(&d2);
        }
        let loss = u1.precision_loss.max(u2.precision_loss);
        v1.precision_loss = loss;
        v2.precision_loss = loss;
        Ok((v1, v2))
    }
}

fn coeff_pows(p: &Coeff, n: u32) -> Vec<Coeff> {
    let mut v = Vec::with_capacity(n as usize + 1);
    v.push(Coeff::one());
    for k in 1..=n as usize {
        v.push(&v[k - 1] * p);
    }
    v
}

fn binomial_table(n: u32) -> Vec<Vec<Coeff>> {
    let n = n as usize;
    let mut t = vec![vec![Coeff::zero(); n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = Coeff::one();
        for k in 1..=i {
            t[i][k] = if k == i {
                Coeff::one()
            } else {
                &t[i - 1][k - 1] + &t[i - 1][k]
            };
        }
    }
    t
}

/// Format one monomial term, e.g. `-3/4*z1^2*z2`. Complex coefficients with
/// both parts nonzero are parenthesized.
pub(crate) fn format_term(c: &Coeff, vars: &[(&str, u32)]) -> String {
    let mut var_part = String::new();
    for &(name, e) in vars {
        if e == 0 {
            continue;
        }
        if !var_part.is_empty() {
            var_part.push('*');
        }
        var_part.push_str(name);
        if e > 1 {
            var_part.push('^');
            var_part.push_str(&e.to_string());
        }
    }
    let coeff_str = if !c.is_real() && !c.re().is_zero() {
        format!("({c})")
    } else {
        c.to_string()
    };
    if var_part.is_empty() {
        coeff_str
    } else if c.is_one() {
        var_part
    } else if (-c.clone()).is_one() {
        format!("-{var_part}")
    } else {
        format!("{coeff_str}*{var_part}")
    }
}

pub(crate) fn join_terms(parts: &[String]) -> String {
    let mut out = String::new();
    for (k, p) in parts.iter().enumerate() {
        if k == 0 {
            out.push_str(p);
        } else if let Some(rest) = p.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(p);
        }
    }
    out
}

impl fmt::Display for Series2 {
    /// Canonical rendering: ascending total degree, `z1`-power descending
    /// within a degree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&(u32, u32)> = self.coeffs.keys().collect();
        keys.sort_by_key(|&&(i, j)| (i + j, j));
        let parts: Vec<String> = keys
            .iter()
            .map(|&&(i, j)| format_term(&self.coeff(i, j), &[("z1", i), ("z2", j)]))
            .collect();
        write!(f, "{}", join_terms(&parts))
    }
}

impl fmt::Debug for Series2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O(deg {})", self, self.order + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z1(n: u32) -> Series2 {
        Series2::var(0, n)
    }

    fn z2(n: u32) -> Series2 {
        Series2::var(1, n)
    }

    fn one_plus(v: &Series2) -> Series2 {
        Series2::one(v.order()).add(v)
    }

    #[test]
    fn product_of_binomials() {
        // (1+z1)(1+z2) = 1 + z1 + z2 + z1 z2
        let p = one_plus(&z1(8)).mul(&one_plus(&z2(8)));
        assert_eq!(p.coeff(0, 0), Coeff::one());
        assert_eq!(p.coeff(1, 0), Coeff::one());
        assert_eq!(p.coeff(0, 1), Coeff::one());
        assert_eq!(p.coeff(1, 1), Coeff::one());
        assert_eq!(p.coeff(2, 0), Coeff::zero());
    }

    #[test]
    fn derivative_and_antiderivative() {
        // d/dz1 (z1 z2^2) = z2^2
        let s = z1(8).mul(&z2(8).pow(2));
        let d = s.derivative(0);
        assert_eq!(d, {
            let mut e = z2(8).pow(2);
            e.set_precision_loss(1);
            e
        });
        // ∫ dz1 of z2 = z1 z2
        let i = z2(8).antiderivative(0);
        assert_eq!(i, z1(8).mul(&z2(8)));
        // fundamental theorem on a random-ish polynomial
        let s = z1(8)
            .pow(2)
            .add(&z2(8).scale(&Coeff::from_int(3)))
            .add(&z1(8).mul(&z2(8).pow(3)).scale(&Coeff::from_ratio(-5, 2)));
        let round = s.antiderivative(0).derivative(0);
        assert!(round.eq_to_order(&s, 7));
    }

    #[test]
    fn inverse_of_units() {
        // 1/(1+z1) = 1 - z1 + z1^2 - ...
        let u = one_plus(&z1(8)).inv().unwrap();
        for k in 0..=8 {
            assert_eq!(u.coeff(k, 0), Coeff::from_int(if k % 2 == 0 { 1 } else { -1 }));
        }
        // inv(2) = 1/2
        let half = Series2::constant(Coeff::from_int(2), 4).inv().unwrap();
        assert_eq!(half, Series2::constant(Coeff::from_ratio(1, 2), 4));
        // defining identity
        let u = one_plus(&z1(10).add(&z2(10)));
        assert!(u.inv().unwrap().mul(&u).eq_to_order(&Series2::one(10), 10));
        assert_eq!(
            z1(4).inv().unwrap_err(),
            SeriesError::NotAUnit
        );
    }

    #[test]
    fn sqrt_binomial_series() {
        // sqrt(1+z1) = 1 + z1/2 - z1^2/8 + z1^3/16 - ...
        let r = one_plus(&z1(8)).sqrt().unwrap();
        assert_eq!(r.coeff(0, 0), Coeff::one());
        assert_eq!(r.coeff(1, 0), Coeff::from_ratio(1, 2));
        assert_eq!(r.coeff(2, 0), Coeff::from_ratio(-1, 8));
        assert_eq!(r.coeff(3, 0), Coeff::from_ratio(1, 16));
        assert!(r.mul(&r).eq_to_order(&one_plus(&z1(8)), 8));
        // sqrt(4) = 2 along the canonical branch
        assert_eq!(
            Series2::constant(Coeff::from_int(4), 4).sqrt().unwrap(),
            Series2::constant(Coeff::from_int(2), 4)
        );
    }

    #[test]
    fn sqrt_failure_modes() {
        assert_eq!(
            z1(8).sqrt().unwrap_err(),
            SeriesError::NotASquare("odd monomial valuation")
        );
        let s = z1(8).add(&z2(8)).pow(2);
        assert_eq!(
            s.sqrt().unwrap_err(),
            SeriesError::NotASquare("constant term vanishes after factoring the monomial content")
        );
        assert_eq!(
            Series2::constant(Coeff::from_int(2), 4).sqrt().unwrap_err(),
            SeriesError::NotASquare("leading coefficient is not a square")
        );
        // even monomial content is fine: sqrt(z1^2 (4 + z2)) = z1 * sqrt(4+z2)
        let s = Series2::monomial(2, 0, Coeff::from_int(4), 8)
            .add(&Series2::monomial(2, 1, Coeff::one(), 8));
        let r = s.sqrt().unwrap();
        assert!(r.mul(&r).eq_to_order(&s, r.certified_order()));
        assert_eq!(r.coeff(1, 0), Coeff::from_int(2));
        assert_eq!(r.precision_loss(), 1);
    }

    #[test]
    fn log_of_units() {
        // log(1+z1) = z1 - z1^2/2 + z1^3/3 - ...
        let l = one_plus(&z1(8)).log_unit().unwrap();
        assert_eq!(l.coeff(1, 0), Coeff::one());
        assert_eq!(l.coeff(2, 0), Coeff::from_ratio(-1, 2));
        assert_eq!(l.coeff(3, 0), Coeff::from_ratio(1, 3));
        assert!(Series2::one(6).log_unit().unwrap().is_zero());
        // additivity, checked by direct expansion of the product
        let a = one_plus(&z1(10));
        let b = one_plus(&z2(10));
        let lhs = a.mul(&b).log_unit().unwrap();
        let rhs = a.log_unit().unwrap().add(&b.log_unit().unwrap());
        assert!(lhs.eq_to_order(&rhs, 10));
    }

    #[test]
    fn exp_and_roundtrips() {
        // exp(z1 z2) = 1 + z1 z2 + z1^2 z2^2 / 2 + ...
        let e = z1(8).mul(&z2(8)).exp().unwrap();
        assert_eq!(e.coeff(0, 0), Coeff::one());
        assert_eq!(e.coeff(1, 1), Coeff::one());
        assert_eq!(e.coeff(2, 2), Coeff::from_ratio(1, 2));
        assert!(Series2::zero(6).exp().unwrap().eq_to_order(&Series2::one(6), 6));
        // exp(log(1 + z1 + z2^2)) = 1 + z1 + z2^2
        let u = one_plus(&z1(10).add(&z2(10).pow(2)));
        let back = u.log_unit().unwrap().exp().unwrap();
        assert!(back.eq_to_order(&u, 10));
        assert_eq!(
            Series2::one(4).exp().unwrap_err(),
            SeriesError::NonzeroConstantTerm
        );
    }

    #[test]
    fn composition_examples() {
        use crate::series1::Series1;
        // (t + t^2) ∘ (z1 z2) = z1 z2 + z1^2 z2^2
        let outer = Series1::from_coeffs(
            vec![Coeff::zero(), Coeff::one(), Coeff::one()],
            8,
        );
        let inner = z1(8).mul(&z2(8));
        let c = outer.compose(&inner).unwrap();
        assert_eq!(c, inner.add(&inner.pow(2)));
        // identity composition
        let ident = Series1::var(8);
        let s = z1(8).add(&z2(8).pow(3).scale(&Coeff::from_int(7)));
        assert_eq!(ident.compose(&s).unwrap(), s);
        // geometric series of 1/(1-t) composed with z1+z2 matches ps_inv
        let geom = Series1::from_coeffs(vec![Coeff::one(); 11], 10);
        let lin = z1(10).add(&z2(10));
        let lhs = geom.compose(&lin).unwrap();
        let rhs = Series2::one(10).sub(&lin).inv().unwrap();
        assert!(lhs.eq_to_order(&rhs, 10));
    }

    #[test]
    fn shift_examples() {
        let one = Coeff::one();
        // shift(z1, (1,0)) = 1 + z1
        let s = z1(6).shift(&(one.clone(), Coeff::zero()));
        assert_eq!(s, one_plus(&z1(6)));
        // identity shift
        let s = z1(6).mul(&z2(6)).add(&z2(6).pow(2));
        assert_eq!(s.shift(&(Coeff::zero(), Coeff::zero())), s);
        // shift(z1^2, (1,0)) = 1 + 2 z1 + z1^2
        let s = z1(6).pow(2).shift(&(one, Coeff::zero()));
        assert_eq!(s.coeff(0, 0), Coeff::one());
        assert_eq!(s.coeff(1, 0), Coeff::from_int(2));
        assert_eq!(s.coeff(2, 0), Coeff::one());
        // shift then unshift is exact
        let p = (Coeff::from_ratio(2, 3), Coeff::from_int(-1));
        let q = (-p.0.clone(), -p.1.clone());
        let s = z1(6).pow(2).mul(&z2(6)).add(&z1(6).scale(&Coeff::from_ratio(5, 7)));
        assert_eq!(s.shift(&p).shift(&q), s);
    }

    #[test]
    fn jet_inversion_round_trip() {
        // u = (z1 + z2^2, z2 - z1^2): v ∘ u = id
        let u1 = z1(10).add(&z2(10).pow(2));
        let u2 = z2(10).sub(&z1(10).pow(2));
        let (v1, v2) = Series2::invert_map(&u1, &u2).unwrap();
        assert!(v1.subst(&u1, &u2).unwrap().eq_to_order(&z1(10), 10));
        assert!(v2.subst(&u1, &u2).unwrap().eq_to_order(&z2(10), 10));
        // and the other way around
        assert!(u1.subst(&v1, &v2).unwrap().eq_to_order(&z1(10), 10));
    }

    #[test]
    fn display_is_canonical() {
        let s = one_plus(&z1(6))
            .add(&z2(6).scale(&Coeff::from_ratio(-1, 2)))
            .add(&z1(6).mul(&z2(6).pow(2)).scale(&Coeff::from_int(3)));
        assert_eq!(s.to_string(), "1 + z1 - 1/2*z2 + 3*z1*z2^2");
    }

    #[test]
    #[should_panic(expected = "order mismatch")]
    fn order_mismatch_is_structural() {
        let _ = z1(4).mul(&z1(6));
    }
}
