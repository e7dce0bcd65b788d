//! Unreduced fractions over [`MPoly`]: enough for fraction-free identity
//! checks in several variables without a multivariate gcd.

use super::mpoly::MPoly;
use super::ratfunc::RatFunc;
use super::scalar::{Ring, Q};

#[derive(Debug, Clone)]
pub struct Frac {
    pub num: MPoly,
    pub den: MPoly,
}

impl Frac {
    pub fn from_mpoly(p: MPoly) -> Self {
        Frac { num: p, den: MPoly::constant(Q::from_integer(1.into())) }
    }

    /// `f(λ_i)` for a univariate rational function `f`.
    pub fn of_ratfunc(f: &RatFunc, i: usize) -> Self {
        let v = MPoly::var(i);
        Frac { num: f.num().eval_ring(&v), den: f.den().eval_ring(&v) }
    }

    /// Cross-multiplied equality.
    pub fn same(&self, o: &Frac) -> bool {
        self.num.mul(&o.den) == o.num.mul(&self.den)
    }
}

impl Ring for Frac {
    fn zero_like(&self) -> Self {
        Frac::from_mpoly(MPoly::zero())
    }
    fn one_like(&self) -> Self {
        Frac::from_mpoly(MPoly::constant(Q::from_integer(1.into())))
    }
    fn scalar_like(&self, c: &Q) -> Self {
        Frac::from_mpoly(MPoly::constant(c.clone()))
    }
    fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Frac { num: self.num.add(&o.num), den: self.den.clone() };
        }
        Frac { num: self.num.mul(&o.den).add(&o.num.mul(&self.den)), den: self.den.mul(&o.den) }
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        Frac { num: self.num.mul(&o.num), den: self.den.mul(&o.den) }
    }
    fn neg(&self) -> Self {
        Frac { num: self.num.neg(), den: self.den.clone() }
    }
    fn vanishes(&self) -> bool {
        self.num.vanishes()
    }
    fn inv(&self) -> Option<Self> {
        if self.num.vanishes() {
            None
        } else {
            Some(Frac { num: self.den.clone(), den: self.num.clone() })
        }
    }
    fn scale(&self, c: &Q) -> Self {
        Frac { num: self.num.scale(c), den: self.den.clone() }
    }
}
