//! Bounded-variable general Simplex over δ-extended values.
//!
//! Rows express basic variables in terms of nonbasic ones. Every bound carries
//! an optional tag naming whatever asserted it; conflict explanations and dual
//! certificates are reported as tag lists. Bounds are backtrackable with
//! `push`/`pop`; the tableau itself is never rolled back, since any basis is
//! valid for any bound set.

use std::collections::BTreeMap;


use crate::num::{choose_delta, Delta, Scalar};

#[derive(Clone, Debug)]
struct Bound<T, K> {
    value: Delta<T>,
    tag: Option<K>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Lower,
    Upper,
}

/// Result of [`Simplex::minimize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Minimum<T, K> {
    /// `duals` lists the tags of the bounds in the optimality certificate with
    /// their (positive) multipliers; untagged bounds are left out.
    Optimum { value: Delta<T>, duals: Vec<(K, T)> },
    Unbounded,
    Infeasible(Vec<K>),
}

/// A bound as it was before being overwritten.
type TrailEntry<T, K> = (usize, Side, Option<Bound<T, K>>);

#[derive(Clone, Debug)]
pub struct Simplex<T, K> {
    values: Vec<Delta<T>>,
    lower: Vec<Option<Bound<T, K>>>,
    upper: Vec<Option<Bound<T, K>>>,
    rows: Vec<BTreeMap<usize, T>>,
    row_basic: Vec<usize>,
    basic_row: Vec<Option<usize>>,
    trail: Vec<TrailEntry<T, K>>,
    frames: Vec<usize>,
    pivots: u64,
}

impl<T: Scalar, K: Copy + Eq> Default for Simplex<T, K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar, K: Copy + Eq> Simplex<T, K> {
    pub fn new() -> Self {
        Simplex {
            values: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
            row_basic: Vec::new(),
            basic_row: Vec::new(),
            trail: Vec::new(),
            frames: Vec::new(),
            pivots: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Total pivots performed over the lifetime of the tableau.
    pub fn pivot_count(&self) -> u64 {
        self.pivots
    }

    /// A fresh unbounded nonbasic variable valued zero.
    pub fn new_var(&mut self) -> usize {
        self.values.push(Delta::zero());
        self.lower.push(None);
        self.upper.push(None);
        self.basic_row.push(None);
        self.values.len() - 1
    }

    /// A fresh basic variable defined as `Σ coeff·var`.
    pub fn add_row(&mut self, coeffs: &[(usize, T)]) -> usize {
        let mut row: BTreeMap<usize, T> = BTreeMap::new();
        for (var, c) in coeffs {
            match self.basic_row[*var] {
                Some(r) => {
                    let src: Vec<(usize, T)> = self.rows[r].iter().map(|(k, v)| (*k, v.clone())).collect();
                    for (k, v) in src {
                        let mut t = v;
                        t *= c;
                        add_entry(&mut row, k, t);
                    }
                }
                None => add_entry(&mut row, *var, c.clone()),
            }
        }
        let mut value = Delta::zero();
        for (k, c) in &row {
            value.add_scaled(&self.values[*k], c);
        }
        let var = self.new_var();
        self.values[var] = value;
        self.basic_row[var] = Some(self.rows.len());
        self.rows.push(row);
        self.row_basic.push(var);
        var
    }

    pub fn value(&self, var: usize) -> &Delta<T> {
        &self.values[var]
    }

    pub fn lower_bound(&self, var: usize) -> Option<&Delta<T>> {
        self.lower[var].as_ref().map(|b| &b.value)
    }

    pub fn upper_bound(&self, var: usize) -> Option<&Delta<T>> {
        self.upper[var].as_ref().map(|b| &b.value)
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    pub fn push(&mut self) {
        self.frames.push(self.trail.len());
    }

    /// Undo the bounds of the last `n` frames. Fails without change when `n`
    /// exceeds the depth.
    pub fn pop(&mut self, n: usize) -> Result<(), usize> {
        if n > self.frames.len() {
            return Err(self.frames.len());
        }
        for _ in 0..n {
            let mark = self.frames.pop().unwrap();
            while self.trail.len() > mark {
                let (var, side, old) = self.trail.pop().unwrap();
                match side {
                    Side::Lower => self.lower[var] = old,
                    Side::Upper => self.upper[var] = old,
                }
            }
        }
        Ok(())
    }

    pub fn assert_upper(&mut self, var: usize, value: Delta<T>, tag: Option<K>) -> Result<(), Vec<K>> {
        if let Some(u) = &self.upper[var] {
            if u.value <= value {
                return Ok(());
            }
        }
        if let Some(l) = &self.lower[var] {
            if value < l.value {
                return Err(l.tag.into_iter().chain(tag).collect());
            }
        }
        let old = self.upper[var].replace(Bound { value: value.clone(), tag });
        self.trail.push((var, Side::Upper, old));
        if self.basic_row[var].is_none() && self.values[var] > value {
            self.update(var, value);
        }
        Ok(())
    }

    pub fn assert_lower(&mut self, var: usize, value: Delta<T>, tag: Option<K>) -> Result<(), Vec<K>> {
        if let Some(l) = &self.lower[var] {
            if l.value >= value {
                return Ok(());
            }
        }
        if let Some(u) = &self.upper[var] {
            if value > u.value {
                return Err(u.tag.into_iter().chain(tag).collect());
            }
        }
        let old = self.lower[var].replace(Bound { value: value.clone(), tag });
        self.trail.push((var, Side::Lower, old));
        if self.basic_row[var].is_none() && self.values[var] < value {
            self.update(var, value);
        }
        Ok(())
    }

    fn below_lower(&self, var: usize) -> bool {
        self.lower[var].as_ref().is_some_and(|l| self.values[var] < l.value)
    }

    fn above_upper(&self, var: usize) -> bool {
        self.upper[var].as_ref().is_some_and(|u| self.values[var] > u.value)
    }

    fn can_increase(&self, var: usize) -> bool {
        self.upper[var].as_ref().is_none_or(|u| self.values[var] < u.value)
    }

    fn can_decrease(&self, var: usize) -> bool {
        self.lower[var].as_ref().is_none_or(|l| self.values[var] > l.value)
    }

    /// Move nonbasic `var` to `target`, keeping every row satisfied.
    fn update(&mut self, var: usize, target: Delta<T>) {
        let diff = target.sub(&self.values[var]);
        for (r, row) in self.rows.iter().enumerate() {
            if let Some(a) = row.get(&var) {
                let b = self.row_basic[r];
                self.values[b].add_scaled(&diff, a);
            }
        }
        self.values[var] = target;
    }

    /// Set basic `basic` to `target` by moving nonbasic `entering`, then swap
    /// their roles.
    fn pivot_and_update(&mut self, basic: usize, entering: usize, target: Delta<T>) {
        let r = self.basic_row[basic].expect("leaving variable must be basic");
        let a = self.rows[r][&entering].clone();
        let theta = target.sub(&self.values[basic]).div_scalar(&a);
        self.values[basic] = target;
        self.values[entering] = self.values[entering].add(&theta);
        for (s, row) in self.rows.iter().enumerate() {
            if s == r {
                continue;
            }
            if let Some(c) = row.get(&entering) {
                let b = self.row_basic[s];
                self.values[b].add_scaled(&theta, c);
            }
        }
        self.pivot(r, entering);
    }

    fn pivot(&mut self, r: usize, entering: usize) {
        self.pivots += 1;
        let leaving = self.row_basic[r];
        let mut row = std::mem::take(&mut self.rows[r]);
        let a = row.remove(&entering).expect("pivot element must be nonzero");
        let mut new_row: BTreeMap<usize, T> = BTreeMap::new();
        let mut inv = T::one();
        inv /= &a;
        new_row.insert(leaving, inv.clone());
        let neg_inv = -inv;
        for (k, v) in row {
            let mut t = v;
            t *= &neg_inv;
            new_row.insert(k, t);
        }
        for s in 0..self.rows.len() {
            if s == r {
                continue;
            }
            if let Some(c) = self.rows[s].remove(&entering) {
                let target = &mut self.rows[s];
                for (k, v) in &new_row {
                    let mut t = v.clone();
                    t *= &c;
                    add_entry(target, *k, t);
                }
            }
        }
        self.rows[r] = new_row;
        self.row_basic[r] = entering;
        self.basic_row[entering] = Some(r);
        self.basic_row[leaving] = None;
    }

    /// Restore feasibility with Bland's rule. On failure returns the tags of
    /// the bounds in the infeasible row.
    pub fn check(&mut self) -> Result<(), Vec<K>> {
        loop {
            let violated = (0..self.values.len())
                .find(|&v| self.basic_row[v].is_some() && (self.below_lower(v) || self.above_upper(v)));
            let Some(basic) = violated else {
                return Ok(());
            };
            let r = self.basic_row[basic].unwrap();
            let raise = self.below_lower(basic);
            let entering = self.rows[r].iter().find_map(|(&j, a)| {
                let ok = if raise == a.is_positive() { self.can_increase(j) } else { self.can_decrease(j) };
                ok.then_some(j)
            });
            match entering {
                Some(j) => {
                    let target = if raise {
                        self.lower[basic].as_ref().unwrap().value.clone()
                    } else {
                        self.upper[basic].as_ref().unwrap().value.clone()
                    };
                    self.pivot_and_update(basic, j, target);
                }
                None => return Err(self.row_explanation(basic, raise)),
            }
        }
    }

    fn row_explanation(&self, basic: usize, raise: bool) -> Vec<K> {
        let r = self.basic_row[basic].unwrap();
        let mut tags = Vec::new();
        let own = if raise { &self.lower[basic] } else { &self.upper[basic] };
        tags.extend(own.as_ref().and_then(|b| b.tag));
        for (&j, a) in &self.rows[r] {
            let use_upper = raise == a.is_positive();
            let b = if use_upper { &self.upper[j] } else { &self.lower[j] };
            if let Some(tag) = b.as_ref().and_then(|b| b.tag) {
                if !tags.contains(&tag) {
                    tags.push(tag);
                }
            }
        }
        tags
    }

    fn reduced_costs(&self, objective: &BTreeMap<usize, T>) -> BTreeMap<usize, T> {
        let mut d: BTreeMap<usize, T> = BTreeMap::new();
        for (&v, c) in objective {
            match self.basic_row[v] {
                Some(r) => {
                    for (&k, a) in &self.rows[r] {
                        let mut t = a.clone();
                        t *= c;
                        add_entry(&mut d, k, t);
                    }
                }
                None => add_entry(&mut d, v, c.clone()),
            }
        }
        d
    }

    /// Minimize `Σ coeff·var` over the current bounds.
    ///
    /// Entering variables are chosen by largest reduced-cost magnitude until
    /// the pivot count reaches twice the row count, then by Bland's rule.
    pub fn minimize(&mut self, objective: &[(usize, T)]) -> Minimum<T, K> {
        if let Err(core) = self.check() {
            return Minimum::Infeasible(core);
        }
        let mut obj: BTreeMap<usize, T> = BTreeMap::new();
        for (v, c) in objective {
            add_entry(&mut obj, *v, c.clone());
        }
        let threshold = 2 * self.rows.len().max(1) as u64;
        let mut steps = 0u64;
        loop {
            let d = self.reduced_costs(&obj);
            let improving = d.iter().filter(|(&j, c)| {
                if c.is_negative() {
                    self.can_increase(j)
                } else {
                    c.is_positive() && self.can_decrease(j)
                }
            });
            let chosen = if steps < threshold {
                improving.fold(None::<(usize, &T)>, |best, (&j, c)| match best {
                    Some((_, bc)) if bc.abs() >= c.abs() => best,
                    _ => Some((j, c)),
                })
            } else {
                improving.map(|(&j, c)| (j, c)).next()
            };
            let Some((entering, dj)) = chosen else {
                return self.optimum(&obj, &d);
            };
            let increase = dj.is_negative();
            steps += 1;

            // ratio test; ties go to the own-bound flip, then to the smallest basic index
            let mut best: Option<(Delta<T>, Option<usize>)> = None;
            let own = if increase { &self.upper[entering] } else { &self.lower[entering] };
            if let Some(b) = own {
                let dist = if increase { b.value.sub(&self.values[entering]) } else { self.values[entering].sub(&b.value) };
                best = Some((dist, None));
            }
            for (r, row) in self.rows.iter().enumerate() {
                let Some(a) = row.get(&entering) else { continue };
                let basic = self.row_basic[r];
                let rising = a.is_positive() == increase;
                let limit = if rising { &self.upper[basic] } else { &self.lower[basic] };
                let Some(b) = limit else { continue };
                let theta = b.value.sub(&self.values[basic]).div_scalar(&a.abs());
                let theta = if rising { theta } else { -theta };
                let better = match &best {
                    None => true,
                    Some((t, leave)) => theta < *t || (theta == *t && leave.is_some_and(|l| basic < l)),
                };
                if better {
                    best = Some((theta, Some(basic)));
                }
            }
            match best {
                None => return Minimum::Unbounded,
                Some((theta, None)) => {
                    let target = if increase {
                        self.values[entering].add(&theta)
                    } else {
                        self.values[entering].sub(&theta)
                    };
                    self.update(entering, target);
                }
                Some((_, Some(leaving))) => {
                    let r = self.basic_row[leaving].unwrap();
                    let rising = self.rows[r][&entering].is_positive() == increase;
                    let target = if rising {
                        self.upper[leaving].as_ref().unwrap().value.clone()
                    } else {
                        self.lower[leaving].as_ref().unwrap().value.clone()
                    };
                    self.pivot_and_update(leaving, entering, target);
                }
            }
        }
    }

    fn optimum(&self, obj: &BTreeMap<usize, T>, d: &BTreeMap<usize, T>) -> Minimum<T, K> {
        let mut value = Delta::zero();
        for (v, c) in obj {
            value.add_scaled(&self.values[*v], c);
        }
        let mut duals = Vec::new();
        for (&j, c) in d {
            if c.is_zero() {
                continue;
            }
            let bound = if c.is_positive() { &self.lower[j] } else { &self.upper[j] };
            if let Some(tag) = bound.as_ref().and_then(|b| b.tag) {
                duals.push((tag, c.abs()));
            }
        }
        Minimum::Optimum { value, duals }
    }

    /// A δ small enough for every current bound.
    pub fn concrete_delta(&self) -> T {
        let mut pairs = Vec::new();
        for v in 0..self.values.len() {
            if let Some(l) = &self.lower[v] {
                pairs.push((&l.value, &self.values[v]));
            }
            if let Some(u) = &self.upper[v] {
                pairs.push((&self.values[v], &u.value));
            }
        }
        choose_delta(pairs.into_iter().filter(|(a, b)| a <= b))
    }

    /// Check every row against the current values (test support).
    pub fn rows_consistent(&self) -> bool {
        self.rows.iter().enumerate().all(|(r, row)| {
            let mut acc = Delta::zero();
            for (k, c) in row {
                acc.add_scaled(&self.values[*k], c);
            }
            acc == self.values[self.row_basic[r]]
        })
    }
}

fn add_entry<T: Scalar>(row: &mut BTreeMap<usize, T>, k: usize, v: T) {
    if v.is_zero() {
        return;
    }
    match row.get_mut(&k) {
        Some(old) => {
            *old += &v;
            if old.is_zero() {
                row.remove(&k);
            }
        }
        None => {
            row.insert(k, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::{BigRational, Rational64};

    fn d(n: i64) -> Delta<BigRational> {
        Delta::from_real(BigRational::from_int(n))
    }

    #[test]
    fn crossing_bounds_report_both_tags() {
        let mut s: Simplex<BigRational, u32> = Simplex::new();
        let x = s.new_var();
        s.assert_upper(x, d(0), Some(1)).unwrap();
        assert_eq!(s.assert_lower(x, d(1), Some(2)), Err(vec![1, 2]));
    }

    #[test]
    fn infeasible_row_explains_itself() {
        let mut s: Simplex<BigRational, u32> = Simplex::new();
        let x = s.new_var();
        let y = s.new_var();
        let sum = s.add_row(&[(x, BigRational::from_int(1)), (y, BigRational::from_int(1))]);
        s.assert_upper(x, d(0), Some(1)).unwrap();
        s.assert_upper(y, d(0), Some(2)).unwrap();
        s.assert_lower(sum, d(1), Some(3)).unwrap();
        let mut core = s.check().unwrap_err();
        core.sort();
        assert_eq!(core, vec![1, 2, 3]);
    }

    #[test]
    fn minimizes_on_fixed_width_rationals() {
        let mut s: Simplex<Rational64, u32> = Simplex::new();
        let x = s.new_var();
        let y = s.new_var();
        let r = s.add_row(&[(x, Rational64::from_int(1)), (y, Rational64::from_int(2))]);
        s.assert_lower(x, Delta::from_real(Rational64::from_int(0)), Some(0)).unwrap();
        s.assert_lower(y, Delta::from_real(Rational64::from_int(0)), Some(1)).unwrap();
        s.assert_upper(r, Delta::from_real(Rational64::from_int(4)), Some(2)).unwrap();
        // maximize x + y  ==  minimize -x - y
        let m = s.minimize(&[(x, Rational64::from_int(-1)), (y, Rational64::from_int(-1))]);
        match m {
            Minimum::Optimum { value, .. } => assert_eq!(value.real, Rational64::from_int(-4)),
            other => panic!("{other:?}"),
        }
        assert!(s.rows_consistent());
    }

    #[test]
    fn pop_restores_unboundedness() {
        let mut s: Simplex<BigRational, u32> = Simplex::new();
        let x = s.new_var();
        s.push();
        s.assert_upper(x, d(1), Some(0)).unwrap();
        assert!(matches!(s.minimize(&[(x, BigRational::from_int(-1))]), Minimum::Optimum { .. }));
        s.pop(1).unwrap();
        assert_eq!(s.minimize(&[(x, BigRational::from_int(-1))]), Minimum::Unbounded);
        assert_eq!(s.pop(1), Err(0));
    }
}
