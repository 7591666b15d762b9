//! Exact Gaussian-rational scalars, the coefficient field for every series
//! in this crate.
//!
//! A [`Coeff`] is `re + im·i` with both parts arbitrary-precision rationals.
//! All arithmetic is exact; equality is decidable. Square roots and n-th
//! roots are partial operations: they succeed only when the result stays in
//! the field, and that failure mode is meaningful (it is the signal behind
//! the split/non-split decision upstream).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// A Gaussian rational `re + im·i`.
#[derive(Clone, PartialEq, Eq)]
pub struct Coeff {
    re: BigRational,
    im: BigRational,
}

impl Coeff {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Coeff { re, im }
    }

    pub fn zero() -> Self {
        Coeff {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Coeff {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Coeff {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Coeff {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    /// `num/den` as a real coefficient. Panics if `den == 0`.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Coeff {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        Coeff {
            re: r,
            im: BigRational::zero(),
        }
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.im.is_zero() && self.re.is_one()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// True for a real rational with denominator 1.
    pub fn is_integer(&self) -> bool {
        self.im.is_zero() && self.re.is_integer()
    }

    pub fn conj(&self) -> Coeff {
        Coeff {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// `re² + im²`, the field norm down to the rationals.
    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Exact multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Coeff> {
        if self.is_zero() {
            return None;
        }
        if self.im.is_zero() {
            return Some(Coeff {
                re: self.re.recip(),
                im: BigRational::zero(),
            });
        }
        let n = self.norm();
        Some(Coeff {
            re: &self.re / &n,
            im: -(&self.im / &n),
        })
    }

    /// Integer power, negative exponents through `inv`. Panics on `0^-k`.
    pub fn pow_i64(&self, e: i64) -> Coeff {
        if e < 0 {
            return self
                .inv()
                .expect("zero base with negative exponent")
                .pow_i64(-e);
        }
        let mut acc = Coeff::one();
        let mut base = self.clone();
        let mut k = e as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Exact square root with the canonical branch: among the two roots the
    /// one with positive real part is chosen, ties broken by positive
    /// imaginary part. `None` when no root exists in the Gaussian rationals.
    pub fn sqrt(&self) -> Option<Coeff> {
        if self.is_zero() {
            return Some(Coeff::zero());
        }
        if self.im.is_zero() {
            return if self.re.is_positive() {
                rational_sqrt(&self.re).map(Coeff::from_rational)
            } else {
                let r = rational_sqrt(&(-self.re.clone()))?;
                Some(Coeff {
                    re: BigRational::zero(),
                    im: r,
                })
            };
        }
        // re + im·i = (x + y i)^2 requires x² = (re + |self|)/2, y = im/(2x).
        let norm_root = rational_sqrt(&self.norm())?;
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let x2 = (&self.re + &norm_root) * &half;
        let x = rational_sqrt(&x2)?;
        if x.is_zero() {
            return None;
        }
        let y = &self.im / (&x * BigRational::from_integer(BigInt::from(2)));
        let cand = Coeff { re: x, im: y };
        debug_assert_eq!(&(&cand * &cand), self);
        Some(cand)
    }

    /// Exact `n`-th root along the canonical branch, for the cases the
    /// expression front end needs: arbitrary `n` on nonnegative rationals,
    /// odd `n` on negative rationals, `n = 2` on anything.
    pub fn nth_root(&self, n: u32) -> Option<Coeff> {
        assert!(n > 0, "zeroth root");
        if n == 1 {
            return Some(self.clone());
        }
        if n == 2 {
            return self.sqrt();
        }
        if self.is_zero() {
            return Some(Coeff::zero());
        }
        if !self.im.is_zero() {
            return None;
        }
        if self.re.is_positive() {
            rational_nth_root(&self.re, n).map(Coeff::from_rational)
        } else if n % 2 == 1 {
            rational_nth_root(&(-self.re.clone()), n).map(|r| Coeff::from_rational(-r))
        } else {
            None
        }
    }

    /// Total ordering used only for deterministic output (factor sorting,
    /// canonical displays): lexicographic on `(re, im)`.
    pub fn canonical_cmp(&self, other: &Coeff) -> Ordering {
        self.re
            .cmp(&other.re)
            .then_with(|| self.im.cmp(&other.im))
    }
}

/// Exact square root of a nonnegative rational, `None` if not a square.
fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    debug_assert!(!r.is_negative());
    let nr = integer_sqrt(r.numer())?;
    let dr = integer_sqrt(r.denom())?;
    Some(BigRational::new(nr, dr))
}

fn integer_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

fn rational_nth_root(r: &BigRational, n: u32) -> Option<BigRational> {
    let nr = integer_nth_root(r.numer(), n)?;
    let dr = integer_nth_root(r.denom(), n)?;
    Some(BigRational::new(nr, dr))
}

fn integer_nth_root(x: &BigInt, n: u32) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let r = x.nth_root(n);
    if &num_traits::pow(r.clone(), n as usize) == x {
        Some(r)
    } else {
        None
    }
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        Coeff {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        Coeff {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        // Real-only operands are the overwhelmingly common case.
        if self.im.is_zero() {
            if rhs.im.is_zero() {
                return Coeff {
                    re: &self.re * &rhs.re,
                    im: BigRational::zero(),
                };
            }
            return Coeff {
                re: &self.re * &rhs.re,
                im: &self.re * &rhs.im,
            };
        }
        if rhs.im.is_zero() {
            return Coeff {
                re: &self.re * &rhs.re,
                im: &self.im * &rhs.re,
            };
        }
        Coeff {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div for &Coeff {
    type Output = Coeff;
    fn div(self, rhs: &Coeff) -> Coeff {
        self * &rhs.inv().expect("division by zero coefficient")
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl AddAssign<&Coeff> for Coeff {
    fn add_assign(&mut self, rhs: &Coeff) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&Coeff> for Coeff {
    fn sub_assign(&mut self, rhs: &Coeff) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return fmt_rational(&self.re, f);
        }
        let write_im = |f: &mut fmt::Formatter<'_>, im: &BigRational| -> fmt::Result {
            if im.is_one() {
                write!(f, "i")
            } else if (-im).is_one() {
                write!(f, "-i")
            } else {
                fmt_rational(im, f)?;
                write!(f, "i")
            }
        };
        if self.re.is_zero() {
            return write_im(f, &self.im);
        }
        fmt_rational(&self.re, f)?;
        if !self.im.is_negative() {
            write!(f, "+")?;
        }
        write_im(f, &self.im)
    }
}

impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Coeff {
        Coeff::from_ratio(n, d)
    }

    #[test]
    fn field_ops_are_exact() {
        let a = Coeff::new(
            BigRational::new(BigInt::from(1), BigInt::from(3)),
            BigRational::new(BigInt::from(-2), BigInt::from(7)),
        );
        let b = a.inv().unwrap();
        assert!((&a * &b).is_one());
        let c = &(&a + &a) - &a;
        assert_eq!(c, a);
    }

    #[test]
    fn sqrt_canonical_branch() {
        // sqrt(4) = 2, not -2.
        assert_eq!(q(4, 1).sqrt().unwrap(), q(2, 1));
        assert_eq!(q(9, 4).sqrt().unwrap(), q(3, 2));
        // Negative reals land on the positive imaginary axis.
        assert_eq!(q(-4, 1).sqrt().unwrap(), &q(2, 1) * &Coeff::i());
        // 3+4i = (2+i)^2, and 2+i has positive real part.
        let z = &q(3, 1) + &(&q(4, 1) * &Coeff::i());
        let r = z.sqrt().unwrap();
        assert_eq!(r, &q(2, 1) + &Coeff::i());
        assert_eq!(&r * &r, z);
    }

    #[test]
    fn sqrt_rejects_non_squares() {
        assert!(q(2, 1).sqrt().is_none());
        assert!(q(1, 3).sqrt().is_none());
        // i is not a square in Q(i): the norm is 1 but x² = 1/2 fails.
        assert!(Coeff::i().sqrt().is_none());
    }

    #[test]
    fn nth_roots() {
        assert_eq!(q(8, 27).nth_root(3).unwrap(), q(2, 3));
        assert_eq!(q(-8, 1).nth_root(3).unwrap(), q(-2, 1));
        assert!(q(-4, 1).nth_root(4).is_none());
        assert_eq!(q(16, 1).nth_root(4).unwrap(), q(2, 1));
    }

    #[test]
    fn display_forms() {
        assert_eq!(q(0, 1).to_string(), "0");
        assert_eq!(q(-3, 4).to_string(), "-3/4");
        assert_eq!(Coeff::i().to_string(), "i");
        let z = &q(1, 2) + &(&q(-5, 3) * &Coeff::i());
        assert_eq!(z.to_string(), "1/2-5/3i");
    }

    #[test]
    fn canonical_order_is_total_on_samples() {
        let mut v = vec![q(1, 2), q(-1, 1), Coeff::i(), Coeff::zero()];
        v.sort_by(|a, b| a.canonical_cmp(b));
        assert_eq!(v[0], q(-1, 1));
        assert_eq!(v[1], Coeff::zero());
        assert_eq!(v[2], Coeff::i());
        assert_eq!(v[3], q(1, 2));
    }
}
