//! Reduced rational functions over the rationals.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use super::scalar::{fmt_q, parse_q, ParseQError, Ring, Q};

/// Name tag of the single variable a rational function is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    Z,
    X,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::Z => "z",
            Var::X => "x",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RatError {
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("pole at the evaluation point")]
    Pole,
    #[error("malformed rational function: {0}")]
    Malformed(String),
}

impl From<ParseQError> for RatError {
    fn from(e: ParseQError) -> Self {
        RatError::Malformed(e.0)
    }
}

/// `num/den` with `gcd(num, den) = 1` and `den` monic. Zero is `0/1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
    var: Var,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly, var: Var) -> Result<Self, RatError> {
        if den.is_zero() {
            return Err(RatError::DivisionByZero);
        }
        Ok(Self::reduce(num, den, var))
    }

    fn reduce(num: Poly, den: Poly, var: Var) -> Self {
        if num.is_zero() {
            return RatFunc { num, den: Poly::one(), var };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_constant() { (num, den) } else { (num.exact_div(&g), den.exact_div(&g)) };
        let l = den.lead();
        if l.is_one() {
            RatFunc { num, den, var }
        } else {
            let inv = l.recip();
            RatFunc { num: num.scale(&inv), den: den.scale(&inv), var }
        }
    }

    /// Build from parts already known to be coprime; only normalizes the lead.
    fn from_coprime(num: Poly, den: Poly, var: Var) -> Self {
        if num.is_zero() {
            return RatFunc { num, den: Poly::one(), var };
        }
        let l = den.lead();
        if l.is_one() {
            RatFunc { num, den, var }
        } else {
            let inv = l.recip();
            RatFunc { num: num.scale(&inv), den: den.scale(&inv), var }
        }
    }

    pub fn from_poly(p: Poly, var: Var) -> Self {
        RatFunc { num: p, den: Poly::one(), var }
    }

    pub fn constant(c: Q, var: Var) -> Self {
        Self::from_poly(Poly::constant(c), var)
    }

    pub fn zero(var: Var) -> Self {
        Self::from_poly(Poly::zero(), var)
    }

    pub fn one(var: Var) -> Self {
        Self::from_poly(Poly::one(), var)
    }

    /// The variable itself.
    pub fn var_fn(var: Var) -> Self {
        Self::from_poly(Poly::var(), var)
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn as_constant(&self) -> Option<Q> {
        (self.den.is_constant() && self.num.is_constant()).then(|| self.num.coeff(0))
    }

    fn check(&self, o: &RatFunc) {
        assert_eq!(self.var, o.var, "rational functions in different variables");
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        self.check(o);
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return Self::reduce(self.num.add(&o.num), self.den.clone(), self.var);
        }
        let g = self.den.gcd(&o.den);
        if g.is_constant() {
            let num = self.num.mul(&o.den).add(&o.num.mul(&self.den));
            return Self::from_coprime_or_zero(num, self.den.mul(&o.den), self.var);
        }
        let bd = self.den.exact_div(&g);
        let dd = o.den.exact_div(&g);
        let num = self.num.mul(&dd).add(&o.num.mul(&bd));
        let den = bd.mul(&o.den);
        Self::reduce(num, den, self.var)
    }

    fn from_coprime_or_zero(num: Poly, den: Poly, var: Var) -> RatFunc {
        // With coprime denominators, a common factor of num and den is impossible.
        Self::from_coprime(num, den, var)
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone(), var: self.var }
    }

    pub fn scale(&self, c: &Q) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero(self.var);
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone(), var: self.var }
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        self.check(o);
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero(self.var);
        }
        let g1 = self.num.gcd(&o.den);
        let g2 = o.num.gcd(&self.den);
        let (a, d) = if g1.is_constant() { (self.num.clone(), o.den.clone()) } else { (self.num.exact_div(&g1), o.den.exact_div(&g1)) };
        let (c, b) = if g2.is_constant() { (o.num.clone(), self.den.clone()) } else { (o.num.exact_div(&g2), self.den.exact_div(&g2)) };
        Self::from_coprime(a.mul(&c), b.mul(&d), self.var)
    }

    pub fn mul_poly(&self, p: &Poly) -> RatFunc {
        self.mul(&RatFunc::from_poly(p.clone(), self.var))
    }

    pub fn recip(&self) -> Result<RatFunc, RatError> {
        if self.is_zero() {
            return Err(RatError::DivisionByZero);
        }
        Ok(Self::from_coprime(self.den.clone(), self.num.clone(), self.var))
    }

    pub fn div(&self, o: &RatFunc) -> Result<RatFunc, RatError> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn powi(&self, e: i32) -> Result<RatFunc, RatError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let k = e.unsigned_abs();
        Ok(RatFunc::from_coprime(base.num.pow(k), base.den.pow(k), self.var))
    }

    /// Derivative with respect to the tagged variable.
    pub fn deriv(&self) -> RatFunc {
        let num = self.num.deriv().mul(&self.den).sub(&self.num.mul(&self.den.deriv()));
        Self::reduce(num, self.den.mul(&self.den), self.var)
    }

    pub fn eval(&self, x: &Q) -> Result<Q, RatError> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(RatError::Pole);
        }
        Ok(self.num.eval(x) / d)
    }

    /// Evaluate in any ring where the denominator value is invertible.
    pub fn eval_ring<R: Ring>(&self, x: &R) -> Option<R> {
        let d = self.den.eval_ring(x);
        Some(self.num.eval_ring(x).mul(&d.inv()?))
    }

    /// Substitute a rational function for the variable; the result lives in `inner`'s variable.
    pub fn compose(&self, inner: &RatFunc) -> Result<RatFunc, RatError> {
        let n = self.num.eval_ring(inner);
        let d = self.den.eval_ring(inner);
        n.div(&d)
    }

    /// Reinterpret in another variable (same coefficients).
    pub fn retag(&self, var: Var) -> RatFunc {
        RatFunc { num: self.num.clone(), den: self.den.clone(), var }
    }

    /// Order of the pole at `a` (0 when regular, negative for a zero).
    pub fn pole_order_at(&self, a: &Q) -> i64 {
        let lin = Poly::linear_root(a);
        let mut k = 0i64;
        let mut d = self.den.clone();
        while !d.is_zero() && d.eval(a).is_zero() {
            d = d.exact_div(&lin);
            k += 1;
        }
        if k > 0 {
            return k;
        }
        let mut n = self.num.clone();
        while !n.is_zero() && n.eval(a).is_zero() {
            n = n.exact_div(&lin);
            k -= 1;
        }
        k
    }

    /// `deg num - deg den`; `None` for zero.
    pub fn degree_at_infinity(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.num.degree_i() - self.den.degree_i())
        }
    }

    pub fn to_json(&self) -> RatFuncJson {
        RatFuncJson {
            num: self.num.coeffs().iter().map(fmt_q).collect(),
            den: self.den.coeffs().iter().map(fmt_q).collect(),
        }
    }

    pub fn from_json(j: &RatFuncJson, var: Var) -> Result<RatFunc, RatError> {
        let parse = |v: &Vec<String>| -> Result<Poly, RatError> { Ok(Poly::new(v.iter().map(|s| parse_q(s)).collect::<Result<_, _>>()?)) };
        RatFunc::new(parse(&j.num)?, parse(&j.den)?, var)
    }
}

/// JSON shape of a rational function: coefficient lists, lowest power first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatFuncJson {
    pub num: Vec<String>,
    pub den: Vec<String>,
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.var.name();
        if self.den.is_constant() {
            write!(f, "{}", self.num.display_with(v))
        } else {
            write!(f, "({})/({})", self.num.display_with(v), self.den.display_with(v))
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Ring for RatFunc {
    fn zero_like(&self) -> Self {
        RatFunc::zero(self.var)
    }
    fn one_like(&self) -> Self {
        RatFunc::one(self.var)
    }
    fn scalar_like(&self, c: &Q) -> Self {
        RatFunc::constant(c.clone(), self.var)
    }
    fn add(&self, o: &Self) -> Self {
        RatFunc::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        RatFunc::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        RatFunc::mul(self, o)
    }
    fn neg(&self) -> Self {
        RatFunc::neg(self)
    }
    fn vanishes(&self) -> bool {
        RatFunc::is_zero(self)
    }
    fn inv(&self) -> Option<Self> {
        self.recip().ok()
    }
    fn scale(&self, c: &Q) -> Self {
        RatFunc::scale(self, c)
    }
}
