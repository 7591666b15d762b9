//! Univariate Laurent data with a logarithmic term.
//!
//! [`LaurentLog1`] carries one separated factor of a density: a finite pole
//! part, a coefficient on `log(u)` (numeric plus contributions from declared
//! exponent parameters), and a Taylor tail. The value is holomorphic exactly
//! when the pole part is empty and the log coefficient vanishes.

use crate::coeff::Coeff;
use crate::series1::Series1;
use crate::series2::{format_term, join_terms};
use std::collections::BTreeMap;
use std::fmt;

/// Coefficient of a `log(u)` term: `numeric + sum scale_p * p` over declared
/// exponent parameters `p`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LogCoeff {
    pub numeric: Coeff,
    pub symbolic: BTreeMap<String, Coeff>,
}

impl LogCoeff {
    pub fn zero() -> Self {
        LogCoeff {
            numeric: Coeff::zero(),
            symbolic: BTreeMap::new(),
        }
    }

    pub fn numeric(c: Coeff) -> Self {
        LogCoeff {
            numeric: c,
            symbolic: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.numeric.is_zero() && self.symbolic.values().all(Coeff::is_zero)
    }

    pub fn has_symbolic(&self) -> bool {
        self.symbolic.values().any(|c| !c.is_zero())
    }

    pub fn add_symbolic(&mut self, name: &str, scale: Coeff) {
        if scale.is_zero() {
            return;
        }
        let slot = self
            .symbolic
            .entry(name.to_string())
            .or_insert_with(Coeff::zero);
        *slot = &*slot + &scale;
        if slot.is_zero() {
            self.symbolic.remove(name);
        }
    }

    fn render(&self) -> String {
        let mut parts = Vec::new();
        if !self.numeric.is_zero() {
            parts.push(self.numeric.to_string());
        }
        for (name, scale) in &self.symbolic {
            if scale.is_zero() {
                continue;
            }
            if scale.is_one() {
                parts.push(name.clone());
            } else if (-scale.clone()).is_one() {
                parts.push(format!("-{name}"));
            } else {
                parts.push(format!("{scale}*{name}"));
            }
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            join_terms(&parts)
        }
    }
}

impl fmt::Display for LogCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// A separated density factor: finite pole part, log term, Taylor tail.
///
/// `pole[k]` is the coefficient of `u^-(k+1)`. Symbolic pole and Taylor
/// contributions scaled by declared parameters are kept apart so a verdict
/// can distinguish α-independent structure from α-scaled structure.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentLog1 {
    pub pole: Vec<Coeff>,
    pub log_coeff: LogCoeff,
    pub taylor: Series1,
    pub symbolic_pole: BTreeMap<String, Vec<Coeff>>,
    pub symbolic_taylor: BTreeMap<String, Series1>,
}

impl LaurentLog1 {
    pub fn holomorphic(taylor: Series1) -> Self {
        LaurentLog1 {
            pole: Vec::new(),
            log_coeff: LogCoeff::zero(),
            taylor,
            symbolic_pole: BTreeMap::new(),
            symbolic_taylor: BTreeMap::new(),
        }
    }

    pub fn has_pole(&self) -> bool {
        self.pole.iter().any(|c| !c.is_zero())
            || self
                .symbolic_pole
                .values()
                .any(|v| v.iter().any(|c| !c.is_zero()))
    }

    /// Holomorphic = empty pole part and zero log coefficient.
    pub fn is_holomorphic(&self) -> bool {
        !self.has_pole() && self.log_coeff.is_zero()
    }

    /// Largest pole order present (0 when holomorphic at the origin).
    pub fn pole_order(&self) -> u32 {
        let num = self
            .pole
            .iter()
            .rposition(|c| !c.is_zero())
            .map_or(0, |k| k as u32 + 1);
        let sym = self
            .symbolic_pole
            .values()
            .filter_map(|v| v.iter().rposition(|c| !c.is_zero()))
            .map(|k| k as u32 + 1)
            .max()
            .unwrap_or(0);
        num.max(sym)
    }

    /// Canonical rendering in the variable `var`, e.g.
    /// `-u1^-1 + 2*log(u1) + u1 - 1/2*u1^2`.
    pub fn display_with_var(&self, var: &str) -> String {
        let mut parts = Vec::new();
        for (k, c) in self.pole.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            parts.push(pole_term(c, var, k as u32 + 1));
        }
        for (name, v) in &self.symbolic_pole {
            for (k, c) in v.iter().enumerate().rev() {
                if c.is_zero() {
                    continue;
                }
                parts.push(format!("{}*{}", scaled_param(c, name), pole_monomial(var, k as u32 + 1)));
            }
        }
        if !self.log_coeff.is_zero() {
            let lc = self.log_coeff.render();
            if lc == "1" {
                parts.push(format!("log({var})"));
            } else if lc == "-1" {
                parts.push(format!("-log({var})"));
            } else if self.log_coeff.symbolic.is_empty() && self.log_coeff.numeric.is_real() {
                parts.push(format!("{lc}*log({var})"));
            } else {
                parts.push(format!("({lc})*log({var})"));
            }
        }
        if !self.taylor.is_zero() {
            parts.push(self.taylor.display_with_var(var));
        }
        for (name, s) in &self.symbolic_taylor {
            if !s.is_zero() {
                parts.push(format!("{name}*({})", s.display_with_var(var)));
            }
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            join_terms(&parts)
        }
    }
}

fn pole_monomial(var: &str, k: u32) -> String {
    format!("{var}^-{k}")
}

fn pole_term(c: &Coeff, var: &str, k: u32) -> String {
    if c.is_one() {
        pole_monomial(var, k)
    } else if (-c.clone()).is_one() {
        format!("-{}", pole_monomial(var, k))
    } else {
        format!("{}*{}", format_term(c, &[]), pole_monomial(var, k))
    }
}

fn scaled_param(c: &Coeff, name: &str) -> String {
    if c.is_one() {
        name.to_string()
    } else if (-c.clone()).is_one() {
        format!("-{name}")
    } else {
        format!("{c}*{name}")
    }
}

impl fmt::Display for LaurentLog1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with_var("u"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holomorphy_detection() {
        let mut l = LaurentLog1::holomorphic(Series1::var(4));
        assert!(l.is_holomorphic());
        l.pole = vec![Coeff::from_int(-1)];
        assert!(!l.is_holomorphic());
        assert_eq!(l.pole_order(), 1);
        l.pole = vec![Coeff::zero()];
        assert!(l.is_holomorphic());
        l.log_coeff.add_symbolic("alpha", Coeff::from_int(-1));
        assert!(!l.is_holomorphic());
    }

    #[test]
    fn rendering() {
        let mut l = LaurentLog1::holomorphic(Series1::zero(4));
        l.pole = vec![Coeff::from_int(-1)];
        assert_eq!(l.display_with_var("u1"), "-u1^-1");
        let mut l = LaurentLog1::holomorphic(Series1::zero(4));
        l.log_coeff.add_symbolic("alpha", Coeff::from_int(-1));
        assert_eq!(l.display_with_var("u1"), "(-alpha)*log(u1)");
        let l = LaurentLog1::holomorphic(Series1::var(4));
        assert_eq!(l.display_with_var("u2"), "u2");
    }
}
