//! Univariate truncated power series over [`Coeff`].
//!
//! These carry the separated factors `f_i(u_i)` and their potentials. The
//! truncation discipline matches the bivariate ring: a series of order `N`
//! stores coefficients for degrees `0..=N`, and `precision_loss` records how
//! many top orders are no longer trustworthy.

use crate::coeff::Coeff;
use crate::series2::{Series2, SeriesError};
use std::fmt;

#[derive(Clone)]
pub struct Series1 {
    order: u32,
    coeffs: Vec<Coeff>,
    precision_loss: u32,
}

/// Value equality: coefficients and truncation order, not the precision
/// window.
impl PartialEq for Series1 {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.coeffs == other.coeffs
    }
}

impl Eq for Series1 {}

impl Series1 {
    pub fn zero(order: u32) -> Self {
        Series1 {
            order,
            coeffs: vec![Coeff::zero(); order as usize + 1],
            precision_loss: 0,
        }
    }

    pub fn constant(c: Coeff, order: u32) -> Self {
        let mut s = Series1::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The variable `t` itself. Requires `order >= 1`.
    pub fn var(order: u32) -> Self {
        assert!(order >= 1, "order too small for a linear term");
        let mut s = Series1::zero(order);
        s.coeffs[1] = Coeff::one();
        s
    }

    pub fn from_coeffs(coeffs: Vec<Coeff>, order: u32) -> Self {
        let mut s = Series1::zero(order);
        for (k, c) in coeffs.into_iter().enumerate() {
            if k as u32 > order {
                break;
            }
            s.coeffs[k] = c;
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

    pub fn certified_order(&self) -> u32 {
        self.order.saturating_sub(self.precision_loss)
    }

    pub fn coeff(&self, k: u32) -> Coeff {
        self.coeffs
            .get(k as usize)
            .cloned()
            .unwrap_or_else(Coeff::zero)
    }

    pub fn set_coeff(&mut self, k: u32, c: Coeff) {
        assert!(k <= self.order, "degree beyond truncation order");
        self.coeffs[k as usize] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Coeff::is_zero)
    }

    pub fn is_zero_to(&self, k: u32) -> bool {
        self.coeffs
            .iter()
            .take(k.min(self.order) as usize + 1)
            .all(Coeff::is_zero)
    }

    pub fn eq_to_order(&self, other: &Series1, k: u32) -> bool {
        let k = k.min(self.order).min(other.order);
        (0..=k).all(|j| self.coeff(j) == other.coeff(j))
    }

    pub fn add(&self, rhs: &Series1) -> Series1 {
        assert_eq!(self.order, rhs.order, "series order mismatch");
        let mut out = Series1::zero(self.order);
        for k in 0..=self.order as usize {
            out.coeffs[k] = &self.coeffs[k] + &rhs.coeffs[k];
        }
        out.precision_loss = self.precision_loss.max(rhs.precision_loss);
        out
    }

    pub fn sub(&self, rhs: &Series1) -> Series1 {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Series1 {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> Series1 {
        let mut out = self.clone();
        for x in &mut out.coeffs {
            *x = &*x * c;
        }
        out
    }

    pub fn mul(&self, rhs: &Series1) -> Series1 {
        assert_eq!(self.order, rhs.order, "series order mismatch");
        let mut out = Series1::zero(self.order);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j > self.order as usize {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                let p = a * b;
                let slot = &mut out.coeffs[i + j];
                *slot = &*slot + &p;
            }
        }
        out.precision_loss = self.precision_loss.max(rhs.precision_loss);
        out
    }

    /// d/dt. Costs one order of certified precision.
    pub fn derivative(&self) -> Series1 {
        let mut out = Series1::zero(self.order);
        for k in 1..=self.order as usize {
            out.coeffs[k - 1] = &self.coeffs[k] * &Coeff::from_int(k as i64);
        }
        out.precision_loss = self.precision_loss + 1;
        out
    }

    /// Formal antiderivative with zero constant term; top coefficient that
    /// would land beyond the truncation order is dropped.
    pub fn antiderivative(&self) -> Series1 {
        let mut out = Series1::zero(self.order);
        for k in 0..self.order as usize {
            out.coeffs[k + 1] = &self.coeffs[k] / &Coeff::from_int(k as i64 + 1);
        }
        out.precision_loss = self.precision_loss;
        out
    }

    /// exp of a series with zero constant term.
    pub fn exp(&self) -> Result<Series1, SeriesError> {
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let mut acc = Series1::constant(Coeff::one(), self.order);
        let mut term = Series1::constant(Coeff::one(), self.order);
        for k in 1..=self.order {
            term = term.mul(self);
            term = term.scale(&Coeff::from_ratio(1, k as i64));
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        acc.precision_loss = self.precision_loss;
        Ok(acc)
    }

    /// Substitute a bivariate series with zero constant term for the
    /// variable, truncating to the inner order.
    pub fn compose(&self, inner: &Series2) -> Result<Series2, SeriesError> {
        if !inner.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let n = inner.order();
        let mut acc = Series2::zero(n);
        for k in (0..=self.order.min(n)).rev() {
            acc = acc.mul(inner);
            let c = self.coeff(k);
            if !c.is_zero() {
                acc = acc.add(&Series2::constant(c, n));
            }
        }
        acc.set_precision_loss(self.precision_loss.max(inner.precision_loss()));
        Ok(acc)
    }

    pub fn eval(&self, p: &Coeff) -> Coeff {
        let mut acc = Coeff::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * p) + c;
        }
        acc
    }

    /// Render with a chosen variable name; exact, deterministic.
    pub fn display_with_var(&self, var: &str) -> String {
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            parts.push(crate::series2::format_term(c, &[(var, k as u32)]));
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            crate::series2::join_terms(&parts)
        }
    }
}

impl fmt::Display for Series1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with_var("t"))
    }
}

impl fmt::Debug for Series1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O(t^{})", self, self.order + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_antiderivative_roundtrip() {
        // exp(t) = sum t^k/k!, then d/dt exp(t) = exp(t) up to the lost order.
        let t = Series1::var(8);
        let e = t.exp().unwrap();
        assert_eq!(e.coeff(0), Coeff::one());
        assert_eq!(e.coeff(3), Coeff::from_ratio(1, 6));
        let de = e.derivative();
        assert!(de.eq_to_order(&e, 7));
    }

    #[test]
    fn eval_is_horner_exact() {
        // 1 + 2t + 3t^2 at t = 1/2 -> 1 + 1 + 3/4.
        let s = Series1::from_coeffs(
            vec![Coeff::one(), Coeff::from_int(2), Coeff::from_int(3)],
            4,
        );
        assert_eq!(s.eval(&Coeff::from_ratio(1, 2)), Coeff::from_ratio(11, 4));
    }
}
