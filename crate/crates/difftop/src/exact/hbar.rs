//! Truncated power series in ℏ with coefficients in any ring.

use super::scalar::{Ring, Q};

/// `Σ_{k=start}^{start+len-1} c_k ℏ^k`, known through the last stored order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HbarSeries<T> {
    start: i32,
    coeffs: Vec<T>,
}

impl<T: Ring> HbarSeries<T> {
    /// Panics on an empty coefficient list (the truncation order would be undefined).
    pub fn new(start: i32, coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "an hbar series needs at least one coefficient");
        HbarSeries { start, coeffs }
    }

    /// `c` known through order `top`.
    pub fn constant(c: T, top: i32) -> Self {
        let z = c.zero_like();
        let mut coeffs = vec![c];
        coeffs.resize((top + 1).max(1) as usize, z);
        HbarSeries { start: 0, coeffs }
    }

    pub fn start(&self) -> i32 {
        self.start
    }

    /// Highest known order.
    pub fn top(&self) -> i32 {
        self.start + self.coeffs.len() as i32 - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `ℏ^k`; zero below the start, `None` above the top.
    pub fn coeff(&self, k: i32) -> Option<T> {
        if k > self.top() {
            return None;
        }
        if k < self.start {
            return Some(self.coeffs[0].zero_like());
        }
        Some(self.coeffs[(k - self.start) as usize].clone())
    }

    pub fn truncate(&self, top: i32) -> Self {
        let keep = ((top - self.start + 1).max(1) as usize).min(self.coeffs.len());
        HbarSeries { start: self.start, coeffs: self.coeffs[..keep].to_vec() }
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> HbarSeries<U> {
        HbarSeries { start: self.start, coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let start = self.start.min(o.start);
        let top = self.top().min(o.top());
        let z = self.coeffs[0].zero_like();
        let coeffs = (start..=top.max(start))
            .map(|k| {
                let a = self.coeff(k).unwrap_or_else(|| z.clone());
                let b = o.coeff(k).unwrap_or_else(|| z.clone());
                a.add(&b)
            })
            .collect();
        HbarSeries { start, coeffs }
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Q) -> Self {
        self.map(|x| x.scale(c))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let start = self.start + o.start;
        let top = (self.top() + o.start).min(o.top() + self.start);
        let z = self.coeffs[0].zero_like();
        let mut coeffs = Vec::new();
        for k in start..=top {
            let mut acc = z.clone();
            for i in self.start..=self.top() {
                let j = k - i;
                if j < o.start || j > o.top() {
                    continue;
                }
                let a = &self.coeffs[(i - self.start) as usize];
                let b = &o.coeffs[(j - o.start) as usize];
                if a.vanishes() || b.vanishes() {
                    continue;
                }
                acc = acc.add(&a.mul(b));
            }
            coeffs.push(acc);
        }
        if coeffs.is_empty() {
            coeffs.push(z);
        }
        HbarSeries { start, coeffs }
    }

    /// Multiply every coefficient by the same ring element.
    pub fn mul_coeff(&self, c: &T) -> Self {
        self.map(|x| x.mul(c))
    }

    /// Multiply by `ℏ^k`.
    pub fn shift(&self, k: i32) -> Self {
        HbarSeries { start: self.start + k, coeffs: self.coeffs.clone() }
    }

    /// True when every known coefficient is zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.vanishes())
    }

    /// Lowest order carrying a nonzero coefficient.
    pub fn leading_order(&self) -> Option<i32> {
        self.coeffs.iter().position(|c| !c.vanishes()).map(|i| self.start + i as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::scalar::qi;

    #[test]
    fn product_truncates_consistently() {
        let a = HbarSeries::new(-1, vec![qi(1), qi(2), qi(3)]);
        let b = HbarSeries::new(0, vec![qi(1), qi(1)]);
        let p = a.mul(&b);
        assert_eq!(p.start(), -1);
        assert_eq!(p.top(), 0);
        assert_eq!(p.coeff(0), Some(qi(3)));
        assert_eq!(p.coeff(1), None);
    }
}
