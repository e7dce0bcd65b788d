//! Truncated Laurent series in a local parameter at a finite point or at infinity.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::poly::Poly;
use super::ratfunc::RatFunc;
use super::scalar::{Ring, Q};

/// Expansion point. The local parameter is `t = z - a` at a finite point and
/// `u = 1/z` at infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Point {
    At(Q),
    Infinity,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("series expanded at different points")]
    PointMismatch,
    #[error("no nonzero coefficient is known; cannot invert")]
    NotInvertible,
    #[error("coefficient of power {0} lies beyond the truncation order")]
    Truncated(i64),
    #[error("leading coefficient {0} has no rational square root")]
    NoSquareRoot(String),
}

/// `Σ coeffs[i] t^(val+i) + O(t^prec)`; `prec == None` means the stored terms are the whole series.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    point: Point,
    val: i64,
    coeffs: Vec<Q>,
    prec: Option<i64>,
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl LaurentSeries {
    pub fn new(point: Point, val: i64, coeffs: Vec<Q>, prec: Option<i64>) -> Self {
        let mut s = LaurentSeries { point, val, coeffs, prec };
        s.normalize();
        s
    }

    /// A finite sum, exact (no truncation).
    pub fn exact(point: Point, val: i64, coeffs: Vec<Q>) -> Self {
        Self::new(point, val, coeffs, None)
    }

    pub fn zero(point: Point) -> Self {
        Self::exact(point, 0, vec![])
    }

    /// `O(t^prec)`.
    pub fn big_o(point: Point, prec: i64) -> Self {
        Self::new(point, prec, vec![], Some(prec))
    }

    pub fn monomial(point: Point, c: Q, k: i64) -> Self {
        Self::exact(point, k, vec![c])
    }

    pub fn constant(point: Point, c: Q) -> Self {
        Self::monomial(point, c, 0)
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => {
                self.coeffs.clear();
                self.val = self.prec.unwrap_or(0);
            }
            Some(i) => {
                self.coeffs.drain(..i);
                self.val += i as i64;
                while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                    self.coeffs.pop();
                }
            }
        }
        if let Some(p) = self.prec {
            let keep = (p - self.val).max(0) as usize;
            if self.coeffs.len() > keep {
                self.coeffs.truncate(keep);
                if self.coeffs.is_empty() {
                    self.val = p;
                }
            }
        }
    }

    pub fn point(&self) -> &Point {
        &self.point
    }

    /// Lowest stored power (meaningful when some coefficient is nonzero).
    pub fn valuation(&self) -> i64 {
        self.val
    }

    /// `Some(p)` when the series is known only modulo `t^p`.
    pub fn precision(&self) -> Option<i64> {
        self.prec
    }

    /// Highest power whose coefficient is known, if truncated.
    pub fn truncation_order(&self) -> Option<i64> {
        self.prec.map(|p| p - 1)
    }

    /// No nonzero coefficient is known.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// Coefficient of `t^n`, or an error if `n` lies past the truncation.
    pub fn coeff(&self, n: i64) -> Result<Q, SeriesError> {
        if let Some(p) = self.prec {
            if n >= p {
                return Err(SeriesError::Truncated(n));
            }
        }
        if n < self.val {
            return Ok(Q::zero());
        }
        Ok(self.coeffs.get((n - self.val) as usize).cloned().unwrap_or_else(Q::zero))
    }

    /// Highest known power plus one, or `val + len` for exact series.
    fn end(&self) -> i64 {
        self.prec.unwrap_or(self.val + self.coeffs.len() as i64)
    }

    fn same_point(&self, o: &Self) -> Result<(), SeriesError> {
        if self.point == o.point {
            Ok(())
        } else {
            Err(SeriesError::PointMismatch)
        }
    }

    pub fn truncate(&self, prec: i64) -> Self {
        Self::new(self.point.clone(), self.val, self.coeffs.clone(), min_opt(self.prec, Some(prec)))
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, SeriesError> {
        self.same_point(o)?;
        let prec = min_opt(self.prec, o.prec);
        let lo = match (self.is_zero(), o.is_zero()) {
            (true, true) => return Ok(Self::new(self.point.clone(), 0, vec![], prec)),
            (true, false) => o.val,
            (false, true) => self.val,
            _ => self.val.min(o.val),
        };
        let hi = match prec {
            Some(p) => p,
            None => self.end().max(o.end()),
        };
        let mut c = Vec::with_capacity((hi - lo).max(0) as usize);
        for n in lo..hi {
            let a = self.stored(n);
            let b = o.stored(n);
            c.push(a + b);
        }
        Ok(Self::new(self.point.clone(), lo, c, prec))
    }

    fn stored(&self, n: i64) -> Q {
        if n < self.val {
            return Q::zero();
        }
        self.coeffs.get((n - self.val) as usize).cloned().unwrap_or_else(Q::zero)
    }

    pub fn neg(&self) -> Self {
        LaurentSeries { point: self.point.clone(), val: self.val, coeffs: self.coeffs.iter().map(|c| -c).collect(), prec: self.prec }
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self, SeriesError> {
        self.try_add(&o.neg())
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(self.point.clone(), self.val, self.coeffs.iter().map(|x| x * c).collect(), self.prec)
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries { point: self.point.clone(), val: self.val + k, coeffs: self.coeffs.clone(), prec: self.prec.map(|p| p + k) }
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, SeriesError> {
        self.same_point(o)?;
        // A known-zero factor annihilates its partner up to its own precision.
        let pa = self.prec.map(|p| if o.is_zero() { p + o.prec.unwrap_or(i64::MAX / 4) } else { p + o.val });
        let pb = o.prec.map(|p| if self.is_zero() { p + self.prec.unwrap_or(i64::MAX / 4) } else { p + self.val });
        let prec = min_opt(pa, pb);
        if self.is_zero() || o.is_zero() {
            return Ok(Self::new(self.point.clone(), 0, vec![], prec));
        }
        let lo = self.val + o.val;
        let full = self.coeffs.len() + o.coeffs.len() - 1;
        let len = match prec {
            Some(p) => ((p - lo).max(0) as usize).min(full),
            None => full,
        };
        let mut c = vec![Q::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if !b.is_zero() {
                    c[i + j] += a * b;
                }
            }
        }
        Ok(Self::new(self.point.clone(), lo, c, prec))
    }

    /// Inverse with `rel` known terms when the input is an exact non-monomial.
    pub fn inv_rel(&self, rel: usize) -> Result<Self, SeriesError> {
        if self.is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        let known = match self.prec {
            Some(p) => (p - self.val) as usize,
            None if self.coeffs.len() == 1 => {
                return Ok(Self::exact(self.point.clone(), -self.val, vec![self.coeffs[0].recip()]));
            }
            None => rel,
        };
        let b0inv = self.coeffs[0].recip();
        let mut c: Vec<Q> = Vec::with_capacity(known);
        for n in 0..known {
            let mut acc = if n == 0 { Q::one() } else { Q::zero() };
            for j in 1..=n.min(self.coeffs.len().saturating_sub(1)) {
                acc -= &self.coeffs[j] * &c[n - j];
            }
            c.push(acc * &b0inv);
        }
        Ok(Self::new(self.point.clone(), -self.val, c, Some(-self.val + known as i64)))
    }

    pub fn try_inv(&self) -> Result<Self, SeriesError> {
        if self.prec.is_none() && self.coeffs.len() > 1 {
            return Err(SeriesError::NotInvertible);
        }
        self.inv_rel(0)
    }

    pub fn try_div(&self, o: &Self) -> Result<Self, SeriesError> {
        self.try_mul(&o.try_inv()?)
    }

    /// `d/dt`.
    pub fn deriv(&self) -> Self {
        let c = self.coeffs.iter().enumerate().map(|(i, a)| a * Q::from_integer(BigInt::from(self.val + i as i64))).collect();
        Self::new(self.point.clone(), self.val - 1, c, self.prec.map(|p| p - 1))
    }

    pub fn pow(&self, e: u32) -> Result<Self, SeriesError> {
        let mut acc = Self::constant(self.point.clone(), Q::one());
        for _ in 0..e {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    /// Square root for a series with even valuation and a rational square leading coefficient.
    pub fn sqrt(&self) -> Result<Self, SeriesError> {
        if self.is_zero() || self.val % 2 != 0 {
            return Err(SeriesError::NotInvertible);
        }
        let a0 = &self.coeffs[0];
        let r0 = rational_sqrt(a0).ok_or_else(|| SeriesError::NoSquareRoot(a0.to_string()))?;
        let known = match self.prec {
            Some(p) => (p - self.val) as usize,
            None => return Err(SeriesError::NotInvertible),
        };
        let two_r0_inv = (Q::from_integer(2.into()) * &r0).recip();
        let mut c: Vec<Q> = vec![r0];
        for n in 1..known {
            let mut acc = self.coeffs.get(n).cloned().unwrap_or_else(Q::zero);
            for j in 1..n {
                acc -= &c[j] * &c[n - j];
            }
            c.push(acc * &two_r0_inv);
        }
        let v = self.val / 2;
        Ok(Self::new(self.point.clone(), v, c, Some(v + known as i64)))
    }

    /// Residue-style extraction: coefficient of `t^-1`.
    pub fn residue(&self) -> Result<Q, SeriesError> {
        self.coeff(-1)
    }

    /// Polynomial `Σ_{n<0}` part as a list `(power, coeff)`.
    pub fn principal_part(&self) -> Vec<(i64, Q)> {
        (self.val..0.min(self.end())).map(|n| (n, self.stored(n))).filter(|(_, c)| !c.is_zero()).collect()
    }

    /// All stored `(power, coeff)` pairs with nonzero coefficient.
    pub fn terms(&self) -> Vec<(i64, Q)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (self.val + i as i64, c.clone())).collect()
    }

    /// `ln(1 + s t)` through `t^(prec-1)`.
    pub fn ln1p(point: Point, s: &Q, prec: i64) -> Self {
        let mut c = vec![Q::zero()];
        let mut pw = Q::one();
        for n in 1..prec.max(1) {
            pw = &pw * s;
            let term = &pw / Q::from_integer(BigInt::from(n));
            c.push(if n % 2 == 1 { term } else { -term });
        }
        Self::new(point, 0, c, Some(prec.max(0)))
    }

    /// Expansion of a rational function, known through `t^order` inclusive.
    pub fn expand(f: &RatFunc, point: Point, order: i64) -> Self {
        let (n, d, shift) = match &point {
            Point::At(a) => (f.num().taylor_shift(a), f.den().taylor_shift(a), 0i64),
            Point::Infinity => {
                let dn = f.num().degree_i().max(0) as usize;
                let dd = f.den().degree_i() as usize;
                (f.num().reverse(dn), f.den().reverse(dd), dd as i64 - dn as i64)
            }
        };
        if n.is_zero() {
            return Self::exact(point, 0, vec![]);
        }
        let vn = n.valuation().unwrap();
        let vd = d.valuation().unwrap();
        let n = n.shift_down(vn);
        let d = d.shift_down(vd);
        let v = vn as i64 - vd as i64 + shift;
        let len = (order + 1 - v).max(0) as usize;
        let c = power_series_div(&n, &d, len);
        Self::new(point, v, c, Some(order + 1))
    }
}

/// First `len` coefficients of `a/b` with `b(0) != 0`.
pub fn power_series_div(a: &Poly, b: &Poly, len: usize) -> Vec<Q> {
    let b0inv = b.coeff(0).recip();
    let bc = b.coeffs();
    let mut c: Vec<Q> = Vec::with_capacity(len);
    for n in 0..len {
        let mut acc = a.coeff(n);
        for j in 1..=n.min(bc.len().saturating_sub(1)) {
            if !bc[j].is_zero() {
                acc -= &bc[j] * &c[n - j];
            }
        }
        c.push(acc * &b0inv);
    }
    c
}

/// Exact square root of a nonnegative rational, if it is a square.
pub fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| Q::new(n, d))
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = match self.point {
            Point::At(_) => "t",
            Point::Infinity => "u",
        };
        let mut parts: Vec<String> = self.terms().iter().map(|(n, c)| format!("({c})*{t}^{n}")).collect();
        if let Some(p) = self.prec {
            parts.push(format!("O({t}^{p})"));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl Ring for LaurentSeries {
    fn zero_like(&self) -> Self {
        Self::zero(self.point.clone())
    }
    fn one_like(&self) -> Self {
        Self::constant(self.point.clone(), Q::one())
    }
    fn scalar_like(&self, c: &Q) -> Self {
        Self::constant(self.point.clone(), c.clone())
    }
    fn add(&self, o: &Self) -> Self {
        self.try_add(o).expect("series at different points")
    }
    fn sub(&self, o: &Self) -> Self {
        self.try_sub(o).expect("series at different points")
    }
    fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).expect("series at different points")
    }
    fn neg(&self) -> Self {
        LaurentSeries::neg(self)
    }
    fn vanishes(&self) -> bool {
        LaurentSeries::is_zero(self)
    }
    fn inv(&self) -> Option<Self> {
        self.try_inv().ok()
    }
    fn scale(&self, c: &Q) -> Self {
        LaurentSeries::scale(self, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratfunc::Var;
    use crate::exact::scalar::{q, qi};

    #[test]
    fn expand_at_branchpoint() {
        // 1/(z^2-1) at z=1: (1/2)t^-1 - 1/4 + (1/8)t - ...
        let f = RatFunc::new(Poly::one(), Poly::from_ints(&[-1, 0, 1]), Var::Z).unwrap();
        let s = LaurentSeries::expand(&f, Point::At(qi(1)), 2);
        assert_eq!(s.coeff(-1).unwrap(), q(1, 2));
        assert_eq!(s.coeff(0).unwrap(), q(-1, 4));
        assert_eq!(s.coeff(1).unwrap(), q(1, 8));
        assert!(s.coeff(3).is_err());
    }

    #[test]
    fn expand_at_infinity() {
        // z/(z^2-1) = u + u^3 + u^5 + ...
        let f = RatFunc::new(Poly::var(), Poly::from_ints(&[-1, 0, 1]), Var::Z).unwrap();
        let s = LaurentSeries::expand(&f, Point::Infinity, 6);
        assert_eq!(s.terms(), vec![(1, qi(1)), (3, qi(1)), (5, qi(1))]);
    }

    #[test]
    fn inverse_and_precision() {
        let p = Point::At(qi(0));
        let a = LaurentSeries::new(p.clone(), -1, vec![qi(2), qi(1), qi(3)], Some(5));
        let b = a.try_inv().unwrap();
        let one = a.try_mul(&b).unwrap();
        assert_eq!(one.coeff(0).unwrap(), qi(1));
        for n in 1..one.precision().unwrap() {
            assert_eq!(one.coeff(n).unwrap(), qi(0));
        }
    }

    #[test]
    fn ln_and_sqrt() {
        let p = Point::At(qi(0));
        let l = LaurentSeries::ln1p(p.clone(), &qi(-1), 5);
        assert_eq!(l.coeff(2).unwrap(), q(-1, 2));
        let one_minus = LaurentSeries::new(p, 0, vec![qi(1), qi(0), qi(-4)], Some(8));
        let r = one_minus.sqrt().unwrap();
        let back = r.try_mul(&r).unwrap();
        assert_eq!(back.truncate(8), one_minus.truncate(back.precision().unwrap()));
        assert_eq!(r.coeff(2).unwrap(), qi(-2));
    }
}
