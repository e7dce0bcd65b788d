//! Univariate fractions whose denominator is kept as a product of rational
//! linear factors. Sums only raise exponents to a common maximum, so no gcd
//! is taken until [`SplitFrac::to_ratfunc`].

use std::collections::BTreeMap;

use num_traits::Zero;

use super::poly::Poly;
use super::ratfunc::{RatFunc, Var};
use super::scalar::{Ring, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitFrac {
    num: Poly,
    /// root ↦ exponent of `(z − root)` in the denominator
    den: BTreeMap<Q, u32>,
}

fn linear(r: &Q) -> Poly {
    Poly::linear_root(r)
}

/// `c · ∏ (z − r)^e`, or `None` when `p` does not split over `Q`.
fn split(p: &Poly) -> Option<(Q, BTreeMap<Q, u32>)> {
    if p.is_zero() {
        return None;
    }
    let mut rest = p.clone();
    let mut out = BTreeMap::new();
    for r in p.rational_roots() {
        let lin = linear(&r);
        while rest.eval(&r).is_zero() {
            rest = rest.exact_div(&lin);
            *out.entry(r.clone()).or_insert(0) += 1;
        }
    }
    rest.is_constant().then(|| (rest.lead(), out))
}

impl SplitFrac {
    pub fn from_poly(p: Poly) -> Self {
        SplitFrac { num: p, den: BTreeMap::new() }
    }

    pub fn var() -> Self {
        SplitFrac::from_poly(Poly::var())
    }

    pub fn to_ratfunc(&self) -> RatFunc {
        let mut den = Poly::one();
        for (r, e) in &self.den {
            den = den.mul(&linear(r).pow(*e));
        }
        RatFunc::new(self.num.clone(), den, Var::Z).expect("denominator is nonzero")
    }

    fn raise(&self, target: &BTreeMap<Q, u32>) -> Poly {
        let mut num = self.num.clone();
        for (r, e) in target {
            let have = self.den.get(r).copied().unwrap_or(0);
            if *e > have {
                num = num.mul(&linear(r).pow(e - have));
            }
        }
        num
    }
}

impl Ring for SplitFrac {
    fn zero_like(&self) -> Self {
        SplitFrac::from_poly(Poly::zero())
    }
    fn one_like(&self) -> Self {
        SplitFrac::from_poly(Poly::one())
    }
    fn scalar_like(&self, c: &Q) -> Self {
        SplitFrac::from_poly(Poly::constant(c.clone()))
    }
    fn add(&self, o: &Self) -> Self {
        if self.num.is_zero() {
            return o.clone();
        }
        if o.num.is_zero() {
            return self.clone();
        }
        let mut den = self.den.clone();
        for (r, e) in &o.den {
            let slot = den.entry(r.clone()).or_insert(0);
            *slot = (*slot).max(*e);
        }
        SplitFrac { num: self.raise(&den).add(&o.raise(&den)), den }
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.num.is_zero() || o.num.is_zero() {
            return self.zero_like();
        }
        let mut den = self.den.clone();
        for (r, e) in &o.den {
            *den.entry(r.clone()).or_insert(0) += e;
        }
        SplitFrac { num: self.num.mul(&o.num), den }
    }
    fn neg(&self) -> Self {
        SplitFrac { num: self.num.neg(), den: self.den.clone() }
    }
    fn vanishes(&self) -> bool {
        self.num.is_zero()
    }
    fn inv(&self) -> Option<Self> {
        let (c, roots) = split(&self.num)?;
        let mut num = Poly::constant(c.recip());
        for (r, e) in &self.den {
            num = num.mul(&linear(r).pow(*e));
        }
        Some(SplitFrac { num, den: roots })
    }
    fn scale(&self, c: &Q) -> Self {
        SplitFrac { num: self.num.scale(c), den: self.den.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qi;

    #[test]
    fn agrees_with_reduced_arithmetic() {
        let z = SplitFrac::var();
        let a = z.sub(&z.scalar_like(&qi(1))).inv().unwrap();
        let b = z.mul(&z).sub(&z.scalar_like(&qi(1))).inv().unwrap();
        let s = a.add(&b).mul(&z);
        let zr = RatFunc::var_fn(Var::Z);
        let one = RatFunc::one(Var::Z);
        let want = zr.sub(&one).recip().unwrap().add(&zr.mul(&zr).sub(&one).recip().unwrap()).mul(&zr);
        assert_eq!(s.to_ratfunc(), want);
        assert!(z.mul(&z).add(&z.scalar_like(&qi(1))).inv().is_none());
    }
}
