//! Linear expressions and variable valuations.

use std::collections::BTreeMap;
use std::fmt;


use crate::num::{Delta, Scalar};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// `Σ coeff·var + constant`. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LinearExpr<T> {
    coeffs: BTreeMap<VarId, T>,
    constant: T,
}

impl<T: Scalar> Default for LinearExpr<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Scalar> LinearExpr<T> {
    pub fn zero() -> Self {
        LinearExpr { coeffs: BTreeMap::new(), constant: T::zero() }
    }

    pub fn constant(c: T) -> Self {
        LinearExpr { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(v: VarId) -> Self {
        Self::term(v, T::one())
    }

    pub fn term(v: VarId, c: T) -> Self {
        let mut e = Self::zero();
        e.add_term(v, c);
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (VarId, T)>, constant: T) -> Self {
        let mut e = Self::constant(constant);
        for (v, c) in terms {
            e.add_term(v, c);
        }
        e
    }

    pub fn add_term(&mut self, v: VarId, c: T) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(&v) {
            Some(old) => {
                *old += &c;
                if old.is_zero() {
                    self.coeffs.remove(&v);
                }
            }
            None => {
                self.coeffs.insert(v, c);
            }
        }
    }

    pub fn add_constant(&mut self, c: &T) {
        self.constant += c;
    }

    pub fn add_scaled(&mut self, other: &Self, k: &T) {
        for (v, c) in &other.coeffs {
            let mut t = c.clone();
            t *= k;
            self.add_term(*v, t);
        }
        let mut t = other.constant.clone();
        t *= k;
        self.constant += &t;
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut e = self.clone();
        e.add_scaled(other, &T::one());
        e
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut e = self.clone();
        e.add_scaled(other, &-T::one());
        e
    }

    pub fn scaled(&self, k: &T) -> Self {
        let mut e = Self::zero();
        e.add_scaled(self, k);
        e
    }

    pub fn negated(&self) -> Self {
        self.scaled(&-T::one())
    }

    pub fn coeffs(&self) -> &BTreeMap<VarId, T> {
        &self.coeffs
    }

    pub fn coeff(&self, v: VarId) -> T {
        self.coeffs.get(&v).cloned().unwrap_or_else(T::zero)
    }

    pub fn constant_part(&self) -> &T {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.coeffs.keys().copied()
    }

    /// The same expression without its constant.
    pub fn homogeneous(&self) -> Self {
        LinearExpr { coeffs: self.coeffs.clone(), constant: T::zero() }
    }

    pub fn eval(&self, model: &Model<T>) -> Result<T, VarId> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            let mut t = model.get(*v).ok_or(*v)?.clone();
            t *= c;
            acc += &t;
        }
        Ok(acc)
    }

    pub fn eval_delta(&self, values: &BTreeMap<VarId, Delta<T>>) -> Result<Delta<T>, VarId> {
        let mut acc = Delta::from_real(self.constant.clone());
        for (v, c) in &self.coeffs {
            acc.add_scaled(values.get(v).ok_or(*v)?, c);
        }
        Ok(acc)
    }

    /// Leading (smallest-variable) coefficient, if any.
    pub fn leading_coeff(&self) -> Option<&T> {
        self.coeffs.values().next()
    }
}

impl<T: Scalar> LinearExpr<T> {
    pub fn display_with<'a>(&'a self, name: &'a dyn Fn(VarId) -> String) -> impl fmt::Display + 'a {
        DisplayExpr { expr: self, name }
    }
}

struct DisplayExpr<'a, T> {
    expr: &'a LinearExpr<T>,
    name: &'a dyn Fn(VarId) -> String,
}

impl<T: Scalar> fmt::Display for DisplayExpr<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.expr.coeffs {
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            if mag.is_one() {
                write!(f, "{}{}", sign, (self.name)(*v))?;
            } else {
                write!(f, "{}{}{}", sign, mag, (self.name)(*v))?;
            }
            first = false;
        }
        let c = &self.expr.constant;
        if first {
            write!(f, "{}", c)
        } else if c.is_negative() {
            write!(f, "-{}", c.abs())
        } else if !c.is_zero() {
            write!(f, "+{}", c)
        } else {
            Ok(())
        }
    }
}

/// Variable valuation.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Model<T> {
    values: BTreeMap<VarId, T>,
}

impl<T: Scalar> Model<T> {
    pub fn new() -> Self {
        Model { values: BTreeMap::new() }
    }

    pub fn set(&mut self, v: VarId, value: T) {
        self.values.insert(v, value);
    }

    pub fn get(&self, v: VarId) -> Option<&T> {
        self.values.get(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &T)> {
        self.values.iter().map(|(v, x)| (*v, x))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<T: Scalar> FromIterator<(VarId, T)> for Model<T> {
    fn from_iter<I: IntoIterator<Item = (VarId, T)>>(iter: I) -> Self {
        Model { values: iter.into_iter().collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_int(n)
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let x = VarId(0);
        let mut e = LinearExpr::term(x, q(2));
        e.add_term(x, q(-2));
        assert!(e.is_constant());
        assert!(e.coeffs().is_empty());
    }

    #[test]
    fn eval_reports_missing_variable() {
        let e = LinearExpr::from_terms([(VarId(0), q(1)), (VarId(1), q(3))], q(-1));
        let m: Model<BigRational> = [(VarId(0), q(2))].into_iter().collect();
        assert_eq!(e.eval(&m), Err(VarId(1)));
        let m: Model<BigRational> = [(VarId(0), q(2)), (VarId(1), q(1))].into_iter().collect();
        assert_eq!(e.eval(&m), Ok(q(4)));
    }
}
