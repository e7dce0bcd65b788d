//! Truncated Laurent series in a small parameter `ε` over any [`Ring`].
//! Used to take coincident-point limits, residues and derivatives of
//! functions that are only ever evaluated, never stored symbolically.

use num_traits::Zero;

use super::scalar::{Ring, Q};

/// Precision used for exact elements.
const EXACT: i64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsSeries<R> {
    val: i64,
    coeffs: Vec<R>,
    /// Coefficients of `ε^n` are known for `n < prec`.
    prec: i64,
    zero: R,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("coefficient of eps^{0} is beyond the known precision")]
pub struct BeyondPrecision(pub i64);

impl<R: Ring> EpsSeries<R> {
    pub fn constant(c: R) -> Self {
        let zero = c.zero_like();
        EpsSeries { val: 0, coeffs: vec![c], prec: EXACT, zero }.normalized()
    }

    /// `c + ε`, known to all orders.
    pub fn shifted(c: R) -> Self {
        let one = c.one_like();
        let zero = c.zero_like();
        EpsSeries { val: 0, coeffs: vec![c, one], prec: EXACT, zero }.normalized()
    }

    /// `Σ c_i ε^{val+i}`, known below `prec`.
    pub fn from_coeffs(val: i64, coeffs: Vec<R>, prec: i64, zero: R) -> Self {
        EpsSeries { val, coeffs, prec, zero }.with_precision(prec)
    }

    pub fn with_precision(mut self, prec: i64) -> Self {
        self.prec = self.prec.min(prec);
        let keep = (self.prec - self.val).max(0) as usize;
        self.coeffs.truncate(keep);
        self.normalized()
    }

    fn normalized(mut self) -> Self {
        let lead = self.coeffs.iter().position(|c| !c.vanishes());
        match lead {
            Some(i) => {
                self.coeffs.drain(..i);
                self.val += i as i64;
                while self.coeffs.last().is_some_and(|c| c.vanishes()) {
                    self.coeffs.pop();
                }
            }
            None => {
                self.coeffs.clear();
                self.val = self.prec.min(EXACT);
            }
        }
        self
    }

    pub fn valuation(&self) -> i64 {
        self.val
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn coeff(&self, n: i64) -> Result<R, BeyondPrecision> {
        if n >= self.prec {
            return Err(BeyondPrecision(n));
        }
        if n < self.val {
            return Ok(self.zero.clone());
        }
        Ok(self.coeffs.get((n - self.val) as usize).cloned().unwrap_or_else(|| self.zero.clone()))
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S, zero: S) -> EpsSeries<S> {
        EpsSeries { val: self.val, coeffs: self.coeffs.iter().map(f).collect(), prec: self.prec, zero }.normalized()
    }

    /// Formal derivative in `ε`.
    pub fn deriv(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.scale(&Q::from_integer((self.val + i as i64).into())))
            .collect();
        EpsSeries { val: self.val - 1, coeffs, prec: self.prec - 1, zero: self.zero.clone() }.normalized()
    }
}

impl<R: Ring> Ring for EpsSeries<R> {
    fn zero_like(&self) -> Self {
        EpsSeries { val: EXACT, coeffs: Vec::new(), prec: EXACT, zero: self.zero.clone() }
    }
    fn one_like(&self) -> Self {
        EpsSeries::constant(self.zero.one_like())
    }
    fn scalar_like(&self, c: &Q) -> Self {
        EpsSeries::constant(self.zero.scalar_like(c))
    }
    fn add(&self, o: &Self) -> Self {
        let prec = self.prec.min(o.prec);
        if self.coeffs.is_empty() {
            return o.clone().with_precision(prec);
        }
        if o.coeffs.is_empty() {
            return self.clone().with_precision(prec);
        }
        let val = self.val.min(o.val).min(prec);
        let end = (self.val + self.coeffs.len() as i64).max(o.val + o.coeffs.len() as i64).min(prec);
        let len = (end - val).max(0) as usize;
        let mut coeffs = vec![self.zero.clone(); len];
        for s in [self, o] {
            for (i, c) in s.coeffs.iter().enumerate() {
                let k = (s.val + i as i64 - val) as usize;
                if k < len {
                    coeffs[k] = coeffs[k].add(c);
                }
            }
        }
        EpsSeries { val, coeffs, prec, zero: self.zero.clone() }.normalized()
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            let prec = (self.prec.saturating_add(o.val)).min(o.prec.saturating_add(self.val)).min(EXACT);
            return EpsSeries { val: prec, coeffs: Vec::new(), prec, zero: self.zero.clone() };
        }
        let val = self.val + o.val;
        let prec = (self.prec + o.val).min(o.prec + self.val).min(EXACT);
        let len = ((prec - val).max(0) as usize).min(self.coeffs.len() + o.coeffs.len() - 1);
        let mut coeffs = vec![self.zero.clone(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        EpsSeries { val, coeffs, prec, zero: self.zero.clone() }.normalized()
    }
    fn neg(&self) -> Self {
        EpsSeries { val: self.val, coeffs: self.coeffs.iter().map(|c| c.neg()).collect(), prec: self.prec, zero: self.zero.clone() }
    }
    fn vanishes(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn inv(&self) -> Option<Self> {
        let lead = self.coeffs.first()?;
        let li = lead.inv()?;
        let n = if self.prec >= EXACT {
            if self.coeffs.len() == 1 { 1 } else { INV_TERMS }
        } else {
            (self.prec - self.val).max(0) as usize
        };
        let mut out: Vec<R> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = if k == 0 { self.zero.one_like() } else { self.zero.clone() };
            for j in 1..=k.min(self.coeffs.len() - 1) {
                acc = acc.sub(&self.coeffs[j].mul(&li).mul(&out[k - j]));
            }
            out.push(acc);
        }
        let out: Vec<R> = out.into_iter().map(|c| c.mul(&li)).collect();
        let exact_inverse = self.prec >= EXACT && self.coeffs.len() == 1;
        let prec = if exact_inverse { EXACT } else { -self.val + n as i64 };
        Some(EpsSeries { val: -self.val, coeffs: out, prec, zero: self.zero.clone() }.normalized())
    }
    fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return self.zero_like();
        }
        EpsSeries { val: self.val, coeffs: self.coeffs.iter().map(|x| x.scale(c)).collect(), prec: self.prec, zero: self.zero.clone() }
    }
}

/// Terms kept when inverting an exact non-monomial series.
pub const INV_TERMS: usize = 12;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qi};

    #[test]
    fn inverse_of_one_plus_eps() {
        let s = EpsSeries::shifted(qi(1)).with_precision(6);
        let i = s.inv().unwrap();
        for n in 0..6 {
            let want = if n % 2 == 0 { qi(1) } else { qi(-1) };
            assert_eq!(i.coeff(n).unwrap(), want);
        }
        assert!(i.coeff(6).is_err());
        assert_eq!(s.mul(&i).coeff(3).unwrap(), qi(0));
    }

    #[test]
    fn laurent_inverse() {
        // (ε + ε²)^{-1} = ε^{-1} − 1 + ε − …
        let s = EpsSeries::shifted(qi(0)).mul(&EpsSeries::shifted(qi(1))).with_precision(5);
        let i = s.inv().unwrap();
        assert_eq!(i.valuation(), -1);
        assert_eq!(i.coeff(-1).unwrap(), qi(1));
        assert_eq!(i.coeff(0).unwrap(), qi(-1));
        assert_eq!(i.scale(&q(1, 2)).coeff(1).unwrap(), q(1, 2));
    }
}
