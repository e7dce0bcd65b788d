//! Polynomials in `λ = ln z` with rational-function coefficients in `z`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use super::ratfunc::{RatError, RatFunc, RatFuncJson, Var};
use super::scalar::{Ring, Q};
use super::series::{LaurentSeries, Point, SeriesError};

/// `Σ_j f_j(z) λ^j`. Negative powers of `λ` are allowed algebraically;
/// integration and evaluation reject them.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LogElement {
    parts: BTreeMap<i32, RatFunc>,
}

impl LogElement {
    pub fn zero() -> Self {
        LogElement { parts: BTreeMap::new() }
    }

    pub fn from_rat(f: RatFunc) -> Self {
        Self::term(f, 0)
    }

    pub fn constant(c: Q) -> Self {
        Self::from_rat(RatFunc::constant(c, Var::Z))
    }

    /// `f λ^j`.
    pub fn term(f: RatFunc, j: i32) -> Self {
        assert_eq!(f.var(), Var::Z, "log elements live in z");
        let mut parts = BTreeMap::new();
        if !f.is_zero() {
            parts.insert(j, f);
        }
        LogElement { parts }
    }

    /// `λ` itself.
    pub fn lambda() -> Self {
        Self::term(RatFunc::one(Var::Z), 1)
    }

    pub fn parts(&self) -> &BTreeMap<i32, RatFunc> {
        &self.parts
    }

    pub fn part(&self, j: i32) -> RatFunc {
        self.parts.get(&j).cloned().unwrap_or_else(|| RatFunc::zero(Var::Z))
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Highest power of `λ` present (0 for the zero element).
    pub fn lambda_degree(&self) -> i32 {
        self.parts.keys().next_back().copied().unwrap_or(0)
    }

    pub fn lowest_lambda_power(&self) -> i32 {
        self.parts.keys().next().copied().unwrap_or(0)
    }

    /// The rational function when no `λ` appears.
    pub fn as_rational(&self) -> Option<RatFunc> {
        match self.parts.len() {
            0 => Some(RatFunc::zero(Var::Z)),
            1 => self.parts.get(&0).cloned(),
            _ => None,
        }
    }

    fn insert_add(parts: &mut BTreeMap<i32, RatFunc>, j: i32, f: RatFunc) {
        if f.is_zero() {
            return;
        }
        let sum = match parts.get(&j) {
            Some(g) => g.add(&f),
            None => f,
        };
        if sum.is_zero() {
            parts.remove(&j);
        } else {
            parts.insert(j, sum);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut parts = self.parts.clone();
        for (j, f) in &o.parts {
            Self::insert_add(&mut parts, *j, f.clone());
        }
        LogElement { parts }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        LogElement { parts: self.parts.iter().map(|(j, f)| (*j, f.neg())).collect() }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LogElement { parts: self.parts.iter().map(|(j, f)| (*j, f.scale(c))).collect() }
    }

    pub fn mul_rat(&self, g: &RatFunc) -> Self {
        if g.is_zero() {
            return Self::zero();
        }
        LogElement { parts: self.parts.iter().map(|(j, f)| (*j, f.mul(g))).collect() }
    }

    /// Multiply by `λ^k`.
    pub fn shift_lambda(&self, k: i32) -> Self {
        LogElement { parts: self.parts.iter().map(|(j, f)| (*j + k, f.clone())).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut parts = BTreeMap::new();
        for (i, f) in &self.parts {
            for (j, g) in &o.parts {
                Self::insert_add(&mut parts, i + j, f.mul(g));
            }
        }
        LogElement { parts }
    }

    /// `d/dz`, using `dλ/dz = 1/z`.
    pub fn deriv(&self) -> Self {
        let inv_z = RatFunc::new(Poly::one(), Poly::var(), Var::Z).unwrap();
        let mut parts = BTreeMap::new();
        for (j, f) in &self.parts {
            Self::insert_add(&mut parts, *j, f.deriv());
            if *j != 0 {
                Self::insert_add(&mut parts, j - 1, f.mul(&inv_z).scale(&Q::from_integer((*j).into())));
            }
        }
        LogElement { parts }
    }

    /// Value at a rational point as a polynomial in a formal `λ`.
    pub fn eval(&self, z: &Q) -> Result<Poly, RatError> {
        let mut c = vec![Q::zero(); (self.lambda_degree().max(0) + 1) as usize];
        for (j, f) in &self.parts {
            if *j < 0 {
                return Err(RatError::Malformed("negative power of lambda".into()));
            }
            c[*j as usize] = f.eval(z)?;
        }
        Ok(Poly::new(c))
    }

    /// Expansion at a branchpoint `a = ±1` in `t = z - a`, reading `λ` on the
    /// local branch that vanishes there: `ln(1+t)` at `+1`, `ln(1-t)` at `-1`.
    pub fn expand_at_branchpoint(&self, a: &Q, order: i64) -> Result<LaurentSeries, SeriesError> {
        let point = Point::At(a.clone());
        // Poles of the parts can reach down to this order; pad accordingly.
        let depth: i64 = self.parts.values().map(|f| f.pole_order_at(a).max(0)).max().unwrap_or(0);
        let work = order + depth + 1;
        let ell = LaurentSeries::ln1p(point.clone(), a, work + 1);
        let mut acc = LaurentSeries::big_o(point.clone(), order + 1);
        for (j, f) in &self.parts {
            if *j < 0 {
                return Err(SeriesError::NotInvertible);
            }
            let fs = LaurentSeries::expand(f, point.clone(), work);
            let term = fs.try_mul(&ell.pow(*j as u32)?)?;
            acc = acc.try_add(&term)?;
        }
        Ok(acc.truncate(order + 1))
    }

    pub fn to_json(&self) -> LogElementJson {
        LogElementJson {
            lambda_deg: self.lambda_degree(),
            parts: self.parts.iter().map(|(j, f)| (j.to_string(), f.to_json())).collect(),
        }
    }

    pub fn from_json(j: &LogElementJson) -> Result<Self, RatError> {
        let mut parts = BTreeMap::new();
        for (k, v) in &j.parts {
            let idx: i32 = k.parse().map_err(|_| RatError::Malformed(k.clone()))?;
            let f = RatFunc::from_json(v, Var::Z)?;
            if !f.is_zero() {
                parts.insert(idx, f);
            }
        }
        Ok(LogElement { parts })
    }
}

/// JSON shape: `{"lambda_deg": j, "parts": {"0": rf, ...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogElementJson {
    pub lambda_deg: i32,
    pub parts: BTreeMap<String, RatFuncJson>,
}

impl fmt::Debug for LogElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "0");
        }
        let s: Vec<String> = self
            .parts
            .iter()
            .map(|(j, g)| match j {
                0 => format!("{g}"),
                1 => format!("[{g}]*λ"),
                _ => format!("[{g}]*λ^{j}"),
            })
            .collect();
        write!(f, "{}", s.join(" + "))
    }
}

impl Ring for LogElement {
    fn zero_like(&self) -> Self {
        Self::zero()
    }
    fn one_like(&self) -> Self {
        Self::constant(Q::one())
    }
    fn scalar_like(&self, c: &Q) -> Self {
        Self::constant(c.clone())
    }
    fn add(&self, o: &Self) -> Self {
        LogElement::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        LogElement::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        LogElement::mul(self, o)
    }
    fn neg(&self) -> Self {
        LogElement::neg(self)
    }
    fn vanishes(&self) -> bool {
        LogElement::is_zero(self)
    }
    fn inv(&self) -> Option<Self> {
        if self.parts.len() == 1 {
            let (j, f) = self.parts.iter().next().unwrap();
            return Some(Self::term(f.recip().ok()?, -j));
        }
        None
    }
    fn scale(&self, c: &Q) -> Self {
        LogElement::scale(self, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::scalar::{q, qi};

    fn rz(n: &[i64], d: &[i64]) -> RatFunc {
        RatFunc::new(Poly::from_ints(n), Poly::from_ints(d), Var::Z).unwrap()
    }

    #[test]
    fn derivative_of_lambda_power() {
        // d/dz (z λ^2) = λ^2 + 2λ
        let e = LogElement::term(rz(&[0, 1], &[1]), 2);
        let d = e.deriv();
        assert_eq!(d.part(2), RatFunc::one(Var::Z));
        assert_eq!(d.part(1), RatFunc::constant(qi(2), Var::Z));
    }

    #[test]
    fn branchpoint_expansion_cancels_pole() {
        // λ (z^2+1)/(z^2-1) is regular at both branchpoints, value 1 there.
        let e = LogElement::term(rz(&[1, 0, 1], &[-1, 0, 1]), 1);
        for a in [qi(1), qi(-1)] {
            let s = e.expand_at_branchpoint(&a, 2).unwrap();
            assert!(s.valuation() >= 0);
            assert_eq!(s.coeff(0).unwrap(), qi(1));
        }
    }

    #[test]
    fn eval_formal_lambda() {
        let e = LogElement::lambda().mul(&LogElement::lambda()).add(&LogElement::constant(q(1, 2)));
        let v = e.eval(&qi(3)).unwrap();
        assert_eq!(v, Poly::new(vec![q(1, 2), qi(0), qi(1)]));
    }

    #[test]
    fn json_round_trip() {
        let e = LogElement::term(rz(&[1, 2], &[0, 1]), 3).add(&LogElement::constant(qi(5)));
        let j = e.to_json();
        assert_eq!(j.lambda_deg, 3);
        assert_eq!(LogElement::from_json(&j).unwrap(), e);
    }
}
