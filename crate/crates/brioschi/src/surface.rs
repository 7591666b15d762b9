//! Symmetric 2-differentials on a two-dimensional chart: determinant and
//! discriminant, the complexified curvature operator and its holomorphic
//! numerator, local splitting into 1-forms, first integrals, web flattening
//! and exact decompositions.
//!
//! Everything is exact. A differential `w = a11 dz1^2 + a12 dz1 dz2 +
//! a22 dz2^2` is closed precisely when the fourth-order expression
//! [`SymDiff2::p2`] vanishes; when it does and `w` is nondegenerate at the
//! origin, [`SymDiff2::exact_decomposition`] produces potentials `F1`, `F2`
//! with `scalar * dF1 * dF2 = w` and verifies the reassembly before
//! returning.

use crate::coeff::Coeff;
use crate::series1::Series1;
use crate::series2::{Series2, SeriesError};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("not split at this point: {0}")]
    NonSplitHere(&'static str),
    #[error("1-form vanishes at the origin")]
    VanishingAtOrigin,
    #[error("first integrals have dependent linear parts")]
    DegenerateJacobian,
    #[error("no holomorphic exact decomposition at this point (certified to order {certified_order})")]
    NotClosedHere { certified_order: u32 },
    #[error("differential is identically degenerate (rank 1)")]
    IdenticallyDegenerate,
    #[error("series error: {0}")]
    Series(#[from] SeriesError),
}

/// A 1-form `p dz1 + q dz2`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OneForm2 {
    pub p: Series2,
    pub q: Series2,
}

impl OneForm2 {
    pub fn new(p: Series2, q: Series2) -> Self {
        assert_eq!(p.order(), q.order(), "series order mismatch");
        OneForm2 { p, q }
    }

    /// Differential of a function.
    pub fn d(f: &Series2) -> Self {
        OneForm2 {
            p: f.derivative(0),
            q: f.derivative(1),
        }
    }

    pub fn order(&self) -> u32 {
        self.p.order()
    }

    pub fn scale(&self, c: &Coeff) -> OneForm2 {
        OneForm2 {
            p: self.p.scale(c),
            q: self.q.scale(c),
        }
    }

    /// Coefficient of `dz1 ∧ dz2` in `self ∧ rhs`.
    pub fn wedge(&self, rhs: &OneForm2) -> Series2 {
        self.p.mul(&rhs.q).sub(&self.q.mul(&rhs.p))
    }

    pub fn vanishes_at_origin(&self) -> bool {
        self.p.constant_term().is_zero() && self.q.constant_term().is_zero()
    }

    /// Deterministic sort key: constant and linear coefficients of `(p, q)`.
    fn sort_key(&self) -> [Coeff; 6] {
        let (p1, p2) = self.p.linear_part();
        let (q1, q2) = self.q.linear_part();
        [
            self.p.constant_term(),
            p1,
            p2,
            self.q.constant_term(),
            q1,
            q2,
        ]
    }
}

/// Flattened presentation `w = f(u) du1 du2` with first integrals `u1, u2`
/// (series in the chart variables) and the density `f` (series in the web
/// coordinates).
#[derive(Clone, Debug)]
pub struct WebChart {
    pub u1: Series2,
    pub u2: Series2,
    pub f: Series2,
}

impl WebChart {
    /// Rebuild the differential `f(u1, u2) * du1 * du2`.
    pub fn reassemble(&self) -> Result<SymDiff2, SeriesError> {
        let fz = self.f.subst(&self.u1, &self.u2)?;
        let b = SymDiff2::product(&OneForm2::d(&self.u1), &OneForm2::d(&self.u2));
        Ok(b.scale_series(&fz))
    }
}

/// An exact decomposition `w = scalar * dF1 * dF2`, potentials with zero
/// constant term, in the chart coordinates.
#[derive(Clone, Debug)]
pub struct ExactDecomposition {
    pub f1: Series2,
    pub f2: Series2,
    pub scalar: Coeff,
    pub certified_order: u32,
}

impl ExactDecomposition {
    pub fn reassemble(&self) -> SymDiff2 {
        SymDiff2::product(&OneForm2::d(&self.f1), &OneForm2::d(&self.f2))
            .scale(&self.scalar)
    }
}

/// Branch perturbations for the uniqueness experiment: swap the split
/// factors and/or rescale the first integrals. Decompositions produced under
/// different options agree up to a single `(c, 1/c)` pair on the potentials.
#[derive(Clone, Debug)]
pub struct DecompositionOptions {
    pub swap_factors: bool,
    pub scale_u1: Coeff,
    pub scale_u2: Coeff,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        DecompositionOptions {
            swap_factors: false,
            scale_u1: Coeff::one(),
            scale_u2: Coeff::one(),
        }
    }
}

/// Closedness verdict at the certified truncation order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosednessReport {
    pub closed: bool,
    pub certified_order: u32,
}

/// `w = a11 dz1^2 + a12 dz1 dz2 + a22 dz2^2` with exact series coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymDiff2 {
    pub a11: Series2,
    pub a12: Series2,
    pub a22: Series2,
}

impl SymDiff2 {
    pub fn new(a11: Series2, a12: Series2, a22: Series2) -> Self {
        assert_eq!(a11.order(), a12.order(), "series order mismatch");
        assert_eq!(a11.order(), a22.order(), "series order mismatch");
        SymDiff2 { a11, a12, a22 }
    }

    pub fn order(&self) -> u32 {
        self.a11.order()
    }

    pub fn precision_loss(&self) -> u32 {
        self.a11
            .precision_loss()
            .max(self.a12.precision_loss())
            .max(self.a22.precision_loss())
    }

    pub fn certified_order(&self) -> u32 {
        self.order().saturating_sub(self.precision_loss())
    }

    pub fn is_zero(&self) -> bool {
        self.a11.is_zero() && self.a12.is_zero() && self.a22.is_zero()
    }

    pub fn eq_to_order(&self, other: &SymDiff2, k: u32) -> bool {
        self.a11.eq_to_order(&other.a11, k)
            && self.a12.eq_to_order(&other.a12, k)
            && self.a22.eq_to_order(&other.a22, k)
    }

    /// Symmetric product of two 1-forms.
    pub fn product(phi1: &OneForm2, phi2: &OneForm2) -> SymDiff2 {
        SymDiff2 {
            a11: phi1.p.mul(&phi2.p),
            a12: phi1.p.mul(&phi2.q).add(&phi1.q.mul(&phi2.p)),
            a22: phi1.q.mul(&phi2.q),
        }
    }

    pub fn scale(&self, c: &Coeff) -> SymDiff2 {
        SymDiff2 {
            a11: self.a11.scale(c),
            a12: self.a12.scale(c),
            a22: self.a22.scale(c),
        }
    }

    pub fn scale_series(&self, s: &Series2) -> SymDiff2 {
        SymDiff2 {
            a11: self.a11.mul(s),
            a12: self.a12.mul(s),
            a22: self.a22.mul(s),
        }
    }

    pub fn add(&self, rhs: &SymDiff2) -> SymDiff2 {
        SymDiff2 {
            a11: self.a11.add(&rhs.a11),
            a12: self.a12.add(&rhs.a12),
            a22: self.a22.add(&rhs.a22),
        }
    }

    pub fn sub(&self, rhs: &SymDiff2) -> SymDiff2 {
        self.add(&rhs.scale(&Coeff::from_int(-1)))
    }

    /// Recenter the chart at `p`.
    pub fn shift(&self, p: &(Coeff, Coeff)) -> SymDiff2 {
        SymDiff2 {
            a11: self.a11.shift(p),
            a12: self.a12.shift(p),
            a22: self.a22.shift(p),
        }
    }

    /// `det(w) = a11 a22 - a12^2 / 4`.
    pub fn det(&self) -> Series2 {
        self.a11
            .mul(&self.a22)
            .sub(&self.a12.mul(&self.a12).scale(&Coeff::from_ratio(1, 4)))
    }

    /// Discriminant `a12^2 - 4 a11 a22 = -4 det(w)`; its vanishing at a
    /// point is degeneracy there.
    pub fn disc(&self) -> Series2 {
        self.a12
            .mul(&self.a12)
            .sub(&self.a11.mul(&self.a22).scale(&Coeff::from_int(4)))
    }

    pub fn is_degenerate_at_origin(&self) -> bool {
        self.disc().constant_term().is_zero()
    }

    /// 2 when the two tangent directions stay distinct generically, 1 for a
    /// perfect square.
    pub fn rank(&self) -> u8 {
        if self.det().is_zero() {
            1
        } else {
            2
        }
    }

    /// Side diagnostic for rank-1 differentials in the normal form
    /// `f (dz1)^2`: such a differential is closed iff `df ∧ dz1 = 0`,
    /// i.e. `f` depends on `z1` alone. `None` when not in normal form.
    pub fn rank1_closedness(&self) -> Option<bool> {
        if self.rank() != 1 || !self.a12.is_zero() || !self.a22.is_zero() {
            return None;
        }
        Some(self.a11.derivative(1).is_zero())
    }

    /// The complexified curvature of the metric-like tensor as a rational
    /// expression: `(numerator, det(w)^2)`. The numerator is the difference
    /// of two 3x3 determinants in the coefficients and their first and
    /// second derivatives.
    pub fn brioschi_r(&self) -> Result<(Series2, Series2), SurfaceError> {
        let det = self.det();
        if det.is_zero() {
            return Err(SurfaceError::IdenticallyDegenerate);
        }
        Ok((self.p2(), det.mul(&det)))
    }

    /// The holomorphic numerator `det(w)^2 * R`: the differential expression
    /// whose vanishing characterizes closedness.
    pub fn p2(&self) -> Series2 {
        let half = Coeff::from_ratio(1, 2);
        let a11 = &self.a11;
        let a12 = &self.a12;
        let a22 = &self.a22;
        let a11_1 = a11.derivative(0);
        let a11_2 = a11.derivative(1);
        let a22_1 = a22.derivative(0);
        let a22_2 = a22.derivative(1);
        let a12_1 = a12.derivative(0);
        let a12_2 = a12.derivative(1);
        let a11_22 = a11_2.derivative(1);
        let a22_11 = a22_1.derivative(0);
        let a12_12 = a12_1.derivative(1);

        // First determinant.
        let m00 = a11_22
            .add(&a22_11)
            .sub(&a12_12)
            .scale(&Coeff::from_ratio(-1, 2));
        let m01 = a11_1.scale(&half);
        let m02 = a12_1.sub(&a11_2).scale(&half);
        let m10 = a12_2.sub(&a22_1).scale(&half);
        let m11 = a11.clone();
        let m12 = a12.scale(&half);
        let m20 = a22_2.scale(&half);
        let m21 = a12.scale(&half);
        let m22 = a22.clone();
        let det1 = det3(&[&m00, &m01, &m02, &m10, &m11, &m12, &m20, &m21, &m22]);

        // Second determinant; its first row carries the cross-derivative
        // entries and a zero corner.
        let n01 = a11_2.scale(&half);
        let n02 = a22_1.scale(&half);
        let zero = Series2::zero(self.order());
        let det2 = det3(&[&zero, &n01, &n02, &n01, &m11, &m12, &n02, &m21, &m22]);

        det1.sub(&det2)
    }

    /// Closedness to the certified order: true iff `p2` vanishes through
    /// that order.
    pub fn is_closed(&self) -> ClosednessReport {
        let p = self.p2();
        let certified_order = p.certified_order();
        ClosednessReport {
            closed: p.is_zero_to(certified_order),
            certified_order,
        }
    }

    /// Split `w = phi1 * phi2` by the quadratic formula, using the exact
    /// square root of the discriminant. Factors are ordered by the canonical
    /// rule (descending lexicographic on constant-and-linear data).
    pub fn split_local(&self) -> Result<(OneForm2, OneForm2), SurfaceError> {
        let disc = self.disc();
        let s = disc.sqrt().map_err(|e| match e {
            SeriesError::NotASquare(r) => SurfaceError::NonSplitHere(r),
            other => SurfaceError::Series(other),
        })?;
        let n = self.order();
        let half = Coeff::from_ratio(1, 2);
        let b_plus = self.a12.add(&s).scale(&half);
        let b_minus = self.a12.sub(&s).scale(&half);

        let (phi1, phi2) = if self.a11.is_unit() {
            // w = (a11 dz1 + (a12-s)/2 dz2)(dz1 + (a12+s)/(2 a11) dz2)
            let q2 = b_plus.mul(&self.a11.inv()?);
            (
                OneForm2::new(self.a11.clone(), b_minus),
                OneForm2::new(Series2::one(n), q2),
            )
        } else if self.a22.is_unit() {
            let p2 = b_plus.mul(&self.a22.inv()?);
            (
                OneForm2::new(b_minus, self.a22.clone()),
                OneForm2::new(p2, Series2::one(n)),
            )
        } else if b_plus.is_unit() || b_minus.is_unit() {
            let a = if b_plus.is_unit() { b_plus } else { b_minus };
            let p2 = self.a11.mul(&a.inv()?);
            (
                OneForm2::new(a, self.a22.clone()),
                OneForm2::new(p2, Series2::one(n)),
            )
        } else {
            return Err(SurfaceError::NonSplitHere(
                "all coefficient candidates vanish at the base point",
            ));
        };
        Ok(order_factors(phi1, phi2))
    }

    /// Flatten to `f(u) du1 du2`: split, integrate both foliations, and
    /// express the density in the web coordinates by inverting the jet of
    /// the coordinate change.
    pub fn flatten_to_web(&self) -> Result<WebChart, SurfaceError> {
        let (phi1, phi2) = self.split_local()?;
        let u1 = first_integral(&phi1)?;
        let u2 = first_integral(&phi2)?;
        let g = self.density_in_chart(&u1, &u2)?;
        let (v1, v2) = Series2::invert_map(&u1, &u2).map_err(|e| match e {
            SeriesError::DegenerateJacobian => SurfaceError::DegenerateJacobian,
            other => SurfaceError::Series(other),
        })?;
        let f = g.subst(&v1, &v2)?;
        Ok(WebChart { u1, u2, f })
    }

    /// The density `g` with `w = g * du1 du2`, as a series in the chart
    /// variables.
    fn density_in_chart(&self, u1: &Series2, u2: &Series2) -> Result<Series2, SurfaceError> {
        let b = SymDiff2::product(&OneForm2::d(u1), &OneForm2::d(u2));
        let (num, den) = if b.a12.is_unit() {
            (&self.a12, &b.a12)
        } else if b.a11.is_unit() {
            (&self.a11, &b.a11)
        } else if b.a22.is_unit() {
            (&self.a22, &b.a22)
        } else {
            return Err(SurfaceError::DegenerateJacobian);
        };
        let g = num.mul(&den.inv()?);
        debug_assert!({
            let r = b.scale_series(&g);
            let k = r.certified_order().min(self.certified_order());
            r.eq_to_order(self, k)
        });
        Ok(g)
    }

    /// Exact decomposition `w = scalar * dF1 * dF2` at a nondegenerate
    /// point, by separation of the flattened density. The separation test
    /// runs in the chart coordinates through exact inverse-Jacobian
    /// derivations, which agrees with testing the mixed second derivative of
    /// `log f` in the web coordinates.
    pub fn exact_decomposition(&self) -> Result<ExactDecomposition, SurfaceError> {
        self.exact_decomposition_with(&DecompositionOptions::default())
    }

    pub fn exact_decomposition_with(
        &self,
        opts: &DecompositionOptions,
    ) -> Result<ExactDecomposition, SurfaceError> {
        let (mut phi1, mut phi2) = self.split_local()?;
        if opts.swap_factors {
            std::mem::swap(&mut phi1, &mut phi2);
        }
        let u1 = first_integral(&phi1)?.scale(&opts.scale_u1);
        let u2 = first_integral(&phi2)?.scale(&opts.scale_u2);
        let g = self.density_in_chart(&u1, &u2)?;

        // Derivations along the web directions: D_i = ∂/∂u_i pulled back to
        // the chart.
        let jac = OneForm2::d(&u1).wedge(&OneForm2::d(&u2));
        let jac_inv = jac.inv()?;
        let log_g = g.log_unit()?;
        let d1 = |s: &Series2| -> Series2 {
            u2.derivative(1)
                .mul(&s.derivative(0))
                .sub(&u2.derivative(0).mul(&s.derivative(1)))
                .mul(&jac_inv)
        };
        let d2 = |s: &Series2| -> Series2 {
            u1.derivative(0)
                .mul(&s.derivative(1))
                .sub(&u1.derivative(1).mul(&s.derivative(0)))
                .mul(&jac_inv)
        };

        let s1 = d1(&log_g);
        let mixed = d2(&s1);
        let certified_order = mixed.certified_order();
        if !mixed.is_zero_to(certified_order) {
            return Err(SurfaceError::NotClosedHere { certified_order });
        }

        let s2 = d2(&log_g);
        let a_prime = extract_univariate(&s1, &u1).ok_or(SurfaceError::NotClosedHere {
            certified_order,
        })?;
        let b_prime = extract_univariate(&s2, &u2).ok_or(SurfaceError::NotClosedHere {
            certified_order,
        })?;

        // log f = A(u1) + B(u2) + const; integrate the factors to
        // potentials and re-express in the chart.
        let scalar = g.constant_term();
        let f1 = a_prime.antiderivative().exp()?;
        let f2 = b_prime.antiderivative().exp()?;
        let pot1 = f1.antiderivative().compose(&u1)?;
        let pot2 = f2.antiderivative().compose(&u2)?;

        let rebuilt = SymDiff2::product(&OneForm2::d(&pot1), &OneForm2::d(&pot2)).scale(&scalar);
        let check_order = rebuilt
            .certified_order()
            .min(self.certified_order())
            .min(certified_order);
        if !rebuilt.eq_to_order(self, check_order) {
            return Err(SurfaceError::NotClosedHere {
                certified_order: check_order,
            });
        }
        Ok(ExactDecomposition {
            f1: pot1,
            f2: pot2,
            scalar,
            certified_order: check_order,
        })
    }
}

fn det3(m: &[&Series2; 9]) -> Series2 {
    let minor = |a: &Series2, b: &Series2, c: &Series2, d: &Series2| a.mul(b).sub(&c.mul(d));
    let c0 = m[0].mul(&minor(m[4], m[8], m[5], m[7]));
    let c1 = m[1].mul(&minor(m[3], m[8], m[5], m[6]));
    let c2 = m[2].mul(&minor(m[3], m[7], m[4], m[6]));
    c0.sub(&c1).add(&c2)
}

fn order_factors(phi1: OneForm2, phi2: OneForm2) -> (OneForm2, OneForm2) {
    let k1 = phi1.sort_key();
    let k2 = phi2.sort_key();
    for (a, b) in k1.iter().zip(k2.iter()) {
        match a.canonical_cmp(b) {
            Ordering::Less => return (phi2, phi1),
            Ordering::Greater => return (phi1, phi2),
            Ordering::Equal => {}
        }
    }
    (phi1, phi2)
}

/// First integral of a nonvanishing 1-form: `u` with zero constant term,
/// `du ∧ mu = 0` to the working order, unit coefficient on the dominant
/// variable, and no pure powers of the dominant variable beyond degree 1
/// (the canonical representative in the `g(u)` reparametrization freedom).
pub fn first_integral(mu: &OneForm2) -> Result<Series2, SurfaceError> {
    let n = mu.order();
    let p0 = mu.p.constant_term();
    let q0 = mu.q.constant_term();
    if p0.is_zero() && q0.is_zero() {
        return Err(SurfaceError::VanishingAtOrigin);
    }
    let dominant_z1 = !p0.is_zero();
    let mut u = Series2::zero(n);
    if dominant_z1 {
        u.set_coeff(1, 0, Coeff::one());
        u.set_coeff(0, 1, &q0 / &p0);
    } else {
        u.set_coeff(0, 1, Coeff::one());
        u.set_coeff(1, 0, &p0 / &q0);
    }
    for d in 1..n {
        // Residual of u_z1 * q - u_z2 * p at total degree d with the partial
        // solution; the next homogeneous slice cancels it.
        let r = u
            .derivative(0)
            .mul_to(&mu.q, d)
            .sub(&u.derivative(1).mul_to(&mu.p, d))
            .homogeneous_part(d);
        if dominant_z1 {
            // march beta upward from the pinned c_{d+1,0} = 0
            let mut prev = Coeff::zero(); // c_{alpha+1, beta}
            for k in 0..=d {
                let (alpha, beta) = (d - k, k);
                // (alpha+1) q0 c_{alpha+1,beta} - (beta+1) p0 c_{alpha,beta+1}
                //   = -r_{alpha,beta}
                let lhs = &(&Coeff::from_int((alpha + 1) as i64) * &q0) * &prev;
                let c = &(&lhs + &r.coeff(alpha, beta))
                    / &(&Coeff::from_int((beta + 1) as i64) * &p0);
                if !c.is_zero() {
                    u.set_coeff(alpha, beta + 1, c.clone());
                }
                prev = c;
            }
        } else {
            let mut prev = Coeff::zero(); // c_{alpha, beta+1}
            for k in 0..=d {
                let (alpha, beta) = (k, d - k);
                let lhs = &(&Coeff::from_int((beta + 1) as i64) * &p0) * &prev;
                let c = &(&lhs - &r.coeff(alpha, beta))
                    / &(&Coeff::from_int((alpha + 1) as i64) * &q0);
                if !c.is_zero() {
                    u.set_coeff(alpha + 1, beta, c.clone());
                }
                prev = c;
            }
        }
    }
    u.set_precision_loss(mu.p.precision_loss().max(mu.q.precision_loss()));
    debug_assert!({
        let w = OneForm2::d(&u).wedge(mu);
        w.is_zero_to(w.certified_order())
    });
    Ok(u)
}

/// Match `s` against a univariate series in `u` (zero constant term,
/// nonzero linear part): returns `a` with `s = a(u)` to the certified
/// order, or `None` if `s` is not a function of `u` alone.
fn extract_univariate(s: &Series2, u: &Series2) -> Option<Series1> {
    let n = s.order();
    let cert = s.certified_order();
    let mut rem = s.clone();
    let mut a = Series1::zero(n);
    a.set_coeff(0, rem.constant_term());
    rem.set_coeff(0, 0, Coeff::zero());
    let lin = u.homogeneous_part(1);
    let mut lin_pow = Series2::one(n);
    let mut u_pow = Series2::one(n);
    for k in 1..=cert {
        lin_pow = lin_pow.mul(&lin);
        u_pow = u_pow.mul(u);
        let slice = rem.homogeneous_part(k);
        // The degree-k slice must be proportional to (linear part of u)^k.
        let mut ratio = Coeff::zero();
        for (&(i, j), c) in lin_pow.homogeneous_part(k).terms() {
            if !c.is_zero() {
                ratio = &slice.coeff(i, j) / c;
                break;
            }
        }
        if !slice.eq_to_order(&lin_pow.scale(&ratio).homogeneous_part(k), k) {
            return None;
        }
        if !ratio.is_zero() {
            rem = rem.sub(&u_pow.scale(&ratio));
            a.set_coeff(k, ratio);
        }
        if !rem.homogeneous_part(k).is_zero() {
            return None;
        }
    }
    a.set_precision_loss(n - cert);
    Some(a)
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

    /// dz1 dz2 scaled by a density.
    fn dz1dz2(f: Series2) -> SymDiff2 {
        let n = f.order();
        SymDiff2::new(Series2::zero(n), f, Series2::zero(n))
    }

    /// The running non-split example `z1 dz1^2 - dz2^2`.
    fn nonsplit(n: u32) -> SymDiff2 {
        SymDiff2::new(
            z1(n),
            Series2::zero(n),
            Series2::constant(Coeff::from_int(-1), n),
        )
    }

    #[test]
    fn det_examples() {
        // w = dz1 dz2 -> det = -1/4
        assert_eq!(
            dz1dz2(Series2::one(8)).det(),
            Series2::constant(Coeff::from_ratio(-1, 4), 8)
        );
        // w = z1 dz1^2 - dz2^2 -> det = -z1
        assert_eq!(nonsplit(8).det(), z1(8).neg());
        // rank-1 square -> det = 0
        let w = SymDiff2::new(Series2::one(8), Series2::zero(8), Series2::zero(8));
        assert!(w.det().is_zero());
    }

    #[test]
    fn disc_examples() {
        let w = nonsplit(8);
        let d = w.disc();
        assert_eq!(d, z1(8).scale(&Coeff::from_int(4)));
        assert!(w.is_degenerate_at_origin());
        assert_eq!(
            dz1dz2(Series2::one(8)).disc(),
            Series2::one(8)
        );
        assert!(!dz1dz2(Series2::one(8)).is_degenerate_at_origin());
        // recentered at (1,0) the discriminant is 4(1+z1): nondegenerate
        let shifted = w.shift(&(Coeff::one(), Coeff::zero()));
        assert_eq!(
            shifted.disc(),
            one_plus(&z1(8)).scale(&Coeff::from_int(4))
        );
        assert!(!shifted.is_degenerate_at_origin());
        // det == -disc/4 identically
        assert_eq!(
            w.det(),
            w.disc().scale(&Coeff::from_ratio(-1, 4))
        );
    }

    #[test]
    fn rank_examples() {
        assert_eq!(dz1dz2(Series2::one(8)).rank(), 2);
        assert_eq!(nonsplit(8).rank(), 2);
        // (dz1 + z2 dz2)^2 has rank 1
        let phi = OneForm2::new(Series2::one(8), z2(8));
        let w = SymDiff2::product(&phi, &phi);
        assert_eq!(w.rank(), 1);
        // rank-1 normal-form diagnostic: f(z1) (dz1)^2 closed, f(z2) not
        let w = SymDiff2::new(one_plus(&z1(8)), Series2::zero(8), Series2::zero(8));
        assert_eq!(w.rank1_closedness(), Some(true));
        let w = SymDiff2::new(one_plus(&z2(8)), Series2::zero(8), Series2::zero(8));
        assert_eq!(w.rank1_closedness(), Some(false));
    }

    #[test]
    fn p2_constant_density_vanishes() {
        let p = dz1dz2(Series2::one(10)).p2();
        assert!(p.is_zero());
    }

    #[test]
    fn p2_of_exponential_density() {
        // w = e^{z1 z2} dz1 dz2: p2 = -e^{3 z1 z2} / 8, checked against the
        // independent construction of the right-hand side.
        let n = 12;
        let f = z1(n).mul(&z2(n)).exp().unwrap();
        let w = dz1dz2(f);
        let p = w.p2();
        let expected = z1(n)
            .mul(&z2(n))
            .scale(&Coeff::from_int(3))
            .exp()
            .unwrap()
            .scale(&Coeff::from_ratio(-1, 8));
        assert!(p.eq_to_order(&expected, p.certified_order()));
        assert!(p.certified_order() >= 10);
        // and through the rational form, R = p2 / det^2 = -2 e^{-z1 z2}
        let (num, den) = w.brioschi_r().unwrap();
        let r_expected = z1(n)
            .mul(&z2(n))
            .neg()
            .exp()
            .unwrap()
            .scale(&Coeff::from_int(-2));
        let lhs = num;
        let rhs = r_expected.mul(&den);
        assert!(lhs.eq_to_order(&rhs, lhs.certified_order().min(rhs.certified_order())));
    }

    #[test]
    fn p2_of_nonsplit_example_vanishes() {
        // z1 dz1^2 - dz2^2 is closed even where it is not split.
        let p = nonsplit(10).p2();
        assert!(p.is_zero());
    }

    #[test]
    fn p2_of_exact_products_vanishes() {
        // dF1 dF2 for fixed polynomial potentials.
        let n = 12;
        let f1 = z1(n).add(&z1(n).pow(2).scale(&Coeff::from_int(3)));
        let f2 = z2(n).sub(&z2(n).pow(3));
        let w = SymDiff2::product(&OneForm2::d(&f1), &OneForm2::d(&f2));
        let p = w.p2();
        assert!(p.is_zero_to(p.certified_order()));
    }

    #[test]
    fn is_closed_examples() {
        let n = 12;
        let sep = one_plus(&z1(n)).mul(&one_plus(&z2(n)));
        assert!(dz1dz2(sep).is_closed().closed);
        let e = z1(n).mul(&z2(n)).exp().unwrap();
        let rep = dz1dz2(e).is_closed();
        assert!(!rep.closed);
        assert!(rep.certified_order >= 10);
    }

    #[test]
    fn split_product_of_coordinates() {
        let (phi1, phi2) = dz1dz2(Series2::one(8)).split_local().unwrap();
        // canonical order puts dz1 first
        assert_eq!(phi1.p, Series2::one(8));
        assert!(phi1.q.is_zero());
        assert!(phi2.p.is_zero());
        assert_eq!(phi2.q, Series2::one(8));
    }

    #[test]
    fn split_nonsplit_example() {
        let err = nonsplit(8).split_local().unwrap_err();
        assert_eq!(err, SurfaceError::NonSplitHere("odd monomial valuation"));
        // recentered at (1,0) it splits, and the product reassembles
        let w = nonsplit(12).shift(&(Coeff::one(), Coeff::zero()));
        let (phi1, phi2) = w.split_local().unwrap();
        let back = SymDiff2::product(&phi1, &phi2);
        let k = back.certified_order().min(w.certified_order());
        assert!(back.eq_to_order(&w, k));
    }

    #[test]
    fn first_integral_examples() {
        let n = 10;
        // mu = dz2 -> u = z2
        let u = first_integral(&OneForm2::new(Series2::zero(n), Series2::one(n))).unwrap();
        assert_eq!(u, z2(n));
        // mu = z2 dz1 + dz2 -> u = z2 e^{z1} exactly under the canonical
        // normalization
        let mu = OneForm2::new(z2(n), Series2::one(n));
        let u = first_integral(&mu).unwrap();
        let expected = z2(n).mul(&z1(n).exp().unwrap());
        assert!(u.eq_to_order(&expected, n));
        assert!(OneForm2::d(&u).wedge(&mu).is_zero_to(n - 1));
        // mu = sqrt(1+z1) dz1 - dz2: the paper-shaped closed form
        // (2/3)(1+z1)^{3/2} - 2/3 - z2 is also a first integral; ours
        // satisfies the same equation.
        let root = one_plus(&z1(n)).sqrt().unwrap();
        let mu = OneForm2::new(root.clone(), Series2::constant(Coeff::from_int(-1), n));
        let u = first_integral(&mu).unwrap();
        assert!(OneForm2::d(&u).wedge(&mu).is_zero_to(u.certified_order().saturating_sub(1)));
        // the closed form, built from series primitives
        let closed_form = root
            .antiderivative(0)
            .sub(&z2(n));
        assert!(OneForm2::d(&closed_form)
            .wedge(&mu)
            .is_zero_to(closed_form.certified_order().saturating_sub(1)));
        // linear normalization: unit z1 coefficient, -1 on z2
        assert_eq!(u.coeff(1, 0), Coeff::one());
        assert_eq!(u.coeff(0, 1), Coeff::from_int(-1));
        let err = first_integral(&OneForm2::new(z1(4), z2(4))).unwrap_err();
        assert_eq!(err, SurfaceError::VanishingAtOrigin);
    }

    #[test]
    fn flatten_separated_density() {
        let n = 10;
        let sep = one_plus(&z1(n)).mul(&one_plus(&z2(n)));
        let web = dz1dz2(sep.clone()).flatten_to_web().unwrap();
        assert_eq!(web.u1, z1(n));
        assert_eq!(web.u2, z2(n));
        let expected_f = one_plus(&z1(n)).mul(&one_plus(&z2(n)));
        assert!(web.f.eq_to_order(&expected_f, n));
        let back = web.reassemble().unwrap();
        assert!(back.eq_to_order(&dz1dz2(sep), back.certified_order()));
    }

    #[test]
    fn flatten_exponential_density() {
        let n = 10;
        let e = z1(n).mul(&z2(n)).exp().unwrap();
        let web = dz1dz2(e.clone()).flatten_to_web().unwrap();
        assert_eq!(web.u1, z1(n));
        assert_eq!(web.u2, z2(n));
        assert!(web.f.eq_to_order(&e, n));
    }

    #[test]
    fn flatten_recentered_monodromy_shape() {
        // w = dz1 d[z1(1+z2)] recentered at (1,0): the web reassembles.
        let n = 10;
        let h2 = z1(n).mul(&one_plus(&z2(n)));
        let w = SymDiff2::product(&OneForm2::d(&z1(n)), &OneForm2::d(&h2))
            .shift(&(Coeff::one(), Coeff::zero()));
        let web = w.flatten_to_web().unwrap();
        assert!(web.f.is_unit());
        let back = web.reassemble().unwrap();
        let k = back.certified_order().min(w.certified_order());
        assert!(back.eq_to_order(&w, k));
    }

    #[test]
    fn decomposition_of_separated_density() {
        let n = 10;
        let sep = one_plus(&z1(n)).mul(&one_plus(&z2(n)));
        let d = dz1dz2(sep).exact_decomposition().unwrap();
        // F1 = z1 + z1^2/2, F2 = z2 + z2^2/2, scalar 1
        let exp1 = z1(n).add(&z1(n).pow(2).scale(&Coeff::from_ratio(1, 2)));
        let exp2 = z2(n).add(&z2(n).pow(2).scale(&Coeff::from_ratio(1, 2)));
        assert!(d.f1.eq_to_order(&exp1, d.certified_order));
        assert!(d.f2.eq_to_order(&exp2, d.certified_order));
        assert_eq!(d.scalar, Coeff::one());
    }

    #[test]
    fn decomposition_rejects_non_closed() {
        let n = 10;
        let e = z1(n).mul(&z2(n)).exp().unwrap();
        match dz1dz2(e).exact_decomposition() {
            Err(SurfaceError::NotClosedHere { certified_order }) => {
                assert!(certified_order >= 7);
            }
            other => panic!("expected NotClosedHere, got {other:?}"),
        }
    }

    #[test]
    fn decomposition_of_recentered_nonsplit_example() {
        // z1 dz1^2 - dz2^2 at (1,0): potentials exist and reassemble; they
        // follow the (2/3) z1^{3/2} ± z2 pattern recentered.
        let n = 16;
        let w = nonsplit(n).shift(&(Coeff::one(), Coeff::zero()));
        let d = w.exact_decomposition().unwrap();
        let back = d.reassemble();
        assert!(back.eq_to_order(&w, d.certified_order));
        assert!(d.certified_order >= 12);
        // both potentials involve z2 with opposite signs after the canonical
        // normalization
        let s1 = d.f1.coeff(0, 1);
        let s2 = d.f2.coeff(0, 1);
        assert!(!s1.is_zero() && !s2.is_zero());
    }

    #[test]
    fn decomposition_uniqueness_up_to_scalar_pair() {
        // Lemma-style rigidity: perturbing the branch rules changes the
        // potentials only by (c, 1/c) on the differentials.
        let n = 12;
        let f1 = z1(n)
            .add(&z1(n).pow(2))
            .add(&z1(n).pow(3).scale(&Coeff::from_ratio(1, 3)));
        let f2 = z2(n).sub(&z2(n).pow(2).scale(&Coeff::from_int(2)));
        let w = SymDiff2::product(&OneForm2::d(&f1), &OneForm2::d(&f2))
            .scale(&Coeff::from_ratio(5, 7));
        let base = w.exact_decomposition().unwrap();
        let perturbed = w
            .exact_decomposition_with(&DecompositionOptions {
                swap_factors: false,
                scale_u1: Coeff::from_int(3),
                scale_u2: Coeff::from_ratio(-1, 2),
            })
            .unwrap();
        let k = base.certified_order.min(perturbed.certified_order);
        let df_base1 = OneForm2::d(&base.f1);
        let df_pert1 = OneForm2::d(&perturbed.f1);
        // dF1' = c dF1
        let c = if df_base1.p.is_unit() {
            &df_pert1.p.constant_term() / &df_base1.p.constant_term()
        } else {
            &df_pert1.q.constant_term() / &df_base1.q.constant_term()
        };
        assert!(df_pert1.p.eq_to_order(&df_base1.p.scale(&c), k - 1));
        assert!(df_pert1.q.eq_to_order(&df_base1.q.scale(&c), k - 1));
        // dF2' = (scalar/scalar') * c^{-1} dF2
        let c2 = &(&base.scalar / &perturbed.scalar) / &c;
        let df_base2 = OneForm2::d(&base.f2);
        let df_pert2 = OneForm2::d(&perturbed.f2);
        assert!(df_pert2.p.eq_to_order(&df_base2.p.scale(&c2), k - 1));
        assert!(df_pert2.q.eq_to_order(&df_base2.q.scale(&c2), k - 1));
    }

    #[test]
    fn brioschi_matches_flat_form_consistency() {
        // For w = f dz1 dz2 the determinant-form numerator equals
        // det(w)^2 * (-2/f) * d2(log f)/dz1 dz2 = -f^3 L / 8 with
        // L the mixed log-derivative. One fixed non-closed density.
        let n = 12;
        let f = one_plus(&z1(n).add(&z2(n)))
            .mul(&one_plus(&z2(n).pow(2)));
        let w = dz1dz2(f.clone());
        let p = w.p2();
        let log_f = f.log_unit().unwrap();
        let mixed = log_f.derivative(0).derivative(1);
        let rhs = f
            .pow(3)
            .mul(&mixed)
            .scale(&Coeff::from_ratio(-1, 8));
        let k = p.certified_order().min(rhs.certified_order());
        assert!(p.eq_to_order(&rhs, k));
    }

    #[test]
    fn rank1_input_rejected_by_brioschi() {
        let phi = OneForm2::new(Series2::one(8), z2(8));
        let w = SymDiff2::product(&phi, &phi);
        assert_eq!(w.brioschi_r().unwrap_err(), SurfaceError::IdenticallyDegenerate);
    }
}
