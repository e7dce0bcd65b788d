//! Sparse multivariate polynomials over `Q` in formal symbols `λ₀, λ₁, …`.
//! Used to carry independent logarithms at several sample points.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::scalar::{Ring, Q};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MPoly {
    terms: BTreeMap<Vec<u16>, Q>,
}

fn trim(mut e: Vec<u16>) -> Vec<u16> {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly::default()
    }

    pub fn constant(c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        MPoly { terms }
    }

    /// The symbol `λ_i`.
    pub fn var(i: usize) -> Self {
        let mut e = vec![0u16; i + 1];
        e[i] = 1;
        MPoly { terms: [(e, Q::one())].into() }
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u16>, Q> {
        &self.terms
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    /// Highest power of `λ_i` present.
    pub fn degree_in(&self, i: usize) -> u16 {
        self.terms.keys().map(|e| e.get(i).copied().unwrap_or(0)).max().unwrap_or(0)
    }

    fn insert(&mut self, e: Vec<u16>, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = trim(e);
        let slot = self.terms.entry(e.clone()).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    /// Substitute rational values for every symbol.
    pub fn eval(&self, vals: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, p) in e.iter().enumerate() {
                t *= vals[i].pow(*p as i32);
            }
            acc += t;
        }
        acc
    }
}

impl Ring for MPoly {
    fn zero_like(&self) -> Self {
        MPoly::zero()
    }
    fn one_like(&self) -> Self {
        MPoly::constant(Q::one())
    }
    fn scalar_like(&self, c: &Q) -> Self {
        MPoly::constant(c.clone())
    }
    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        let mut out = MPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let n = ea.len().max(eb.len());
                let e = (0..n).map(|i| ea.get(i).copied().unwrap_or(0) + eb.get(i).copied().unwrap_or(0)).collect();
                out.insert(e, ca * cb);
            }
        }
        out
    }
    fn neg(&self) -> Self {
        MPoly { terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }
    fn vanishes(&self) -> bool {
        self.terms.is_empty()
    }
    fn inv(&self) -> Option<Self> {
        let c = self.as_constant()?;
        if c.is_zero() {
            None
        } else {
            Some(MPoly::constant(c.recip()))
        }
    }
    fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return MPoly::zero();
        }
        MPoly { terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qi;

    #[test]
    fn arithmetic() {
        let a = MPoly::var(0).add(&MPoly::var(2));
        let b = a.mul(&a).sub(&MPoly::var(0).mul(&MPoly::var(0)));
        // 2 λ0 λ2 + λ2²
        assert_eq!(b.eval(&[qi(3), qi(0), qi(5)]), qi(55));
        assert!(a.sub(&a).vanishes());
        assert!(a.inv().is_none());
    }
}
