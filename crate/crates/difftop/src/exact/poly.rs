//! Dense univariate polynomials over the rationals.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::scalar::{Ring, Q};

/// Coefficients stored low degree first, never with a trailing zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    c: Vec<Q>,
}

impl Poly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&n| Q::from_integer(n.into())).collect())
    }

    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Q::one())
    }

    pub fn constant(a: Q) -> Self {
        Poly::new(vec![a])
    }

    /// `a * t^k`.
    pub fn monomial(a: Q, k: usize) -> Self {
        let mut c = vec![Q::zero(); k + 1];
        c[k] = a;
        Poly::new(c)
    }

    /// The variable itself.
    pub fn var() -> Self {
        Poly::monomial(Q::one(), 1)
    }

    /// `t - a`.
    pub fn linear_root(a: &Q) -> Self {
        Poly::new(vec![-a.clone(), Q::one()])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.c.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree with `-1` for the zero polynomial.
    pub fn degree_i(&self) -> i64 {
        self.c.len() as i64 - 1
    }

    pub fn lead(&self) -> Q {
        self.c.last().cloned().unwrap_or_else(Q::zero)
    }

    /// Lowest power with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(match (self.c.get(i), o.c.get(i)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        Poly::new(c)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly { c: self.c.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, a: &Q) -> Poly {
        if a.is_zero() {
            return Poly::zero();
        }
        Poly { c: self.c.iter().map(|x| x * a).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Q::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    c[i + j] += a * b;
                }
            }
        }
        Poly::new(c)
    }

    /// Multiply by `t^k`.
    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Q::zero(); k];
        c.extend(self.c.iter().cloned());
        Poly { c }
    }

    /// Drop the lowest `k` coefficients (exact division by `t^k` when they vanish).
    pub fn shift_down(&self, k: usize) -> Poly {
        Poly::new(self.c.iter().skip(k).cloned().collect())
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Euclidean division. Panics when dividing by zero.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.c.len() - 1;
        if self.c.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let inv_lead = d.lead().recip();
        let mut r = self.c.clone();
        let mut qc = vec![Q::zero(); r.len() - dd];
        for i in (0..qc.len()).rev() {
            let coef = &r[i + dd] * &inv_lead;
            if coef.is_zero() {
                continue;
            }
            for (j, dj) in d.c.iter().enumerate() {
                if !dj.is_zero() {
                    r[i + j] -= &coef * dj;
                }
            }
            qc[i] = coef;
        }
        r.truncate(dd);
        (Poly::new(qc), Poly::new(r))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.divrem(d).1
    }

    /// Exact quotient; debug-asserts a zero remainder.
    pub fn exact_div(&self, d: &Poly) -> Poly {
        let (q, r) = self.divrem(d);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.lead().recip())
    }

    /// Multiply through so the coefficients are coprime integers with a positive lead.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut den = BigInt::one();
        for a in &self.c {
            den = den.lcm(a.denom());
        }
        let ints: Vec<BigInt> = self.c.iter().map(|a| (a * Q::from_integer(den.clone())).to_integer()).collect();
        let mut g = BigInt::zero();
        for a in &ints {
            g = g.gcd(a);
        }
        if self.lead().is_negative() {
            g = -g;
        }
        Poly::new(ints.into_iter().map(|a| Q::from_integer(a / &g)).collect())
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(&self, o: &Poly) -> Poly {
        let mut a = self.primitive();
        let mut b = o.primitive();
        if a.degree_i() < b.degree_i() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = pseudo_rem(&a, &b).primitive();
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Solve `s*a + t*b = c` with `deg s < deg b`, assuming `gcd(a, b) | c`.
    pub fn solve_bezout(a: &Poly, b: &Poly, c: &Poly) -> Option<(Poly, Poly)> {
        let (g, s0, t0) = ext_gcd(a, b);
        let (qc, rc) = c.divrem(&g);
        if !rc.is_zero() {
            return None;
        }
        let s = s0.mul(&qc);
        let t = t0.mul(&qc);
        if b.is_constant() {
            // any s works; take s = 0
            return Some((Poly::zero(), c.divrem(b).0));
        }
        let (qq, s_red) = s.divrem(b);
        let t_new = t.add(&qq.mul(a));
        Some((s_red, t_new))
    }

    pub fn deriv(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * Q::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// Primitive with zero constant term.
    pub fn integral(&self) -> Poly {
        let mut c = vec![Q::zero()];
        for (i, a) in self.c.iter().enumerate() {
            c.push(a / Q::from_integer(BigInt::from(i + 1)));
        }
        Poly::new(c)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for a in self.c.iter().rev() {
            acc = acc * x + a;
        }
        acc
    }

    /// Horner evaluation in an arbitrary ring.
    pub fn eval_ring<R: Ring>(&self, x: &R) -> R {
        let mut acc = x.zero_like();
        for a in self.c.iter().rev() {
            acc = acc.mul(x).add(&x.scalar_like(a));
        }
        acc
    }

    /// Substitute another polynomial for the variable.
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for a in self.c.iter().rev() {
            acc = acc.mul(inner).add(&Poly::constant(a.clone()));
        }
        acc
    }

    /// `p(a + t)` as a polynomial in `t`.
    pub fn taylor_shift(&self, a: &Q) -> Poly {
        let mut c = self.c.clone();
        let n = c.len();
        if a.is_zero() {
            return self.clone();
        }
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = &c[j + 1] * a;
                c[j] += t;
            }
        }
        Poly::new(c)
    }

    /// Coefficient reversal relative to degree `n`: `t^n p(1/t)`.
    pub fn reverse(&self, n: usize) -> Poly {
        let mut c = vec![Q::zero(); n + 1];
        for (i, a) in self.c.iter().enumerate() {
            assert!(i <= n, "reverse degree too small");
            c[n - i] = a.clone();
        }
        Poly::new(c)
    }

    /// Rational roots, by the rational root test on the primitive part.
    pub fn rational_roots(&self) -> Vec<Q> {
        let mut out = Vec::new();
        let p = self.primitive();
        let Some(v) = p.valuation() else { return out };
        if v > 0 {
            out.push(Q::zero());
        }
        let p = p.shift_down(v);
        if p.is_constant() {
            return out;
        }
        let a0 = p.c[0].to_integer().abs();
        let an = p.lead().to_integer().abs();
        let small = |n: &BigInt| -> Option<u64> { u64::try_from(n).ok().filter(|&m| m <= 1_000_000) };
        let (Some(a0), Some(an)) = (small(&a0), small(&an)) else { return out };
        let divs = |n: u64| (1..=n).filter(move |d| n.is_multiple_of(*d));
        for num in divs(a0) {
            for den in divs(an) {
                for sgn in [1i64, -1] {
                    let r = Q::new(BigInt::from(sgn) * BigInt::from(num), BigInt::from(den));
                    if !out.contains(&r) && p.eval(&r).is_zero() {
                        out.push(r);
                    }
                }
            }
        }
        out
    }

    /// Render with the given variable name, highest power first.
    pub fn display_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let neg = a.is_negative();
            let mag = a.abs();
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if mono.is_empty() {
                s.push_str(&mag.to_string());
            } else if mag.is_one() {
                s.push_str(&mono);
            } else {
                s.push_str(&format!("{mag}*{mono}"));
            }
        }
        s
    }
}

fn pseudo_rem(a: &Poly, b: &Poly) -> Poly {
    a.rem(b)
}

/// Extended Euclid: returns monic `g` with `s*a + t*b = g`.
pub fn ext_gcd(a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (Poly::one(), Poly::zero());
    let (mut t0, mut t1) = (Poly::zero(), Poly::one());
    while !r1.is_zero() {
        let (qq, r) = r0.divrem(&r1);
        let s = s0.sub(&qq.mul(&s1));
        let t = t0.sub(&qq.mul(&t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
        t0 = t1;
        t1 = t;
    }
    if r0.is_zero() {
        return (r0, s0, t0);
    }
    let inv = r0.lead().recip();
    (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with("t"))
    }
}

impl Ring for Poly {
    fn zero_like(&self) -> Self {
        Poly::zero()
    }
    fn one_like(&self) -> Self {
        Poly::one()
    }
    fn scalar_like(&self, c: &Q) -> Self {
        Poly::constant(c.clone())
    }
    fn add(&self, o: &Self) -> Self {
        Poly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Poly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Poly::mul(self, o)
    }
    fn neg(&self) -> Self {
        Poly::neg(self)
    }
    fn vanishes(&self) -> bool {
        Poly::is_zero(self)
    }
    fn inv(&self) -> Option<Self> {
        match self.deg() {
            Some(0) => Some(Poly::constant(self.c[0].recip())),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::scalar::{q, qi};

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints(c)
    }

    #[test]
    fn divrem_reconstructs() {
        let a = p(&[1, 2, 3, 4, 5]);
        let b = p(&[-1, 0, 2]);
        let (qq, r) = a.divrem(&b);
        assert_eq!(qq.mul(&b).add(&r), a);
        assert!(r.degree_i() < b.degree_i());
    }

    #[test]
    fn gcd_of_shared_factor() {
        let f = p(&[-1, 0, 1]); // t^2 - 1
        let a = f.mul(&p(&[3, 1]));
        let b = f.mul(&p(&[5, 0, 1]));
        assert_eq!(a.gcd(&b), f);
        assert_eq!(p(&[1, 1]).gcd(&p(&[-1, 1])), Poly::one());
    }

    #[test]
    fn taylor_shift_matches_eval() {
        let a = p(&[2, -3, 0, 1]);
        let s = a.taylor_shift(&q(1, 2));
        for x in [qi(0), qi(3), q(-7, 5)] {
            assert_eq!(s.eval(&x), a.eval(&(&x + q(1, 2))));
        }
    }

    #[test]
    fn bezout_solution() {
        let a = p(&[1, 0, 1]);
        let b = p(&[0, 1, 1]);
        let c = p(&[4, 5, 6, 7]);
        let (s, t) = Poly::solve_bezout(&a, &b, &c).unwrap();
        assert_eq!(s.mul(&a).add(&t.mul(&b)), c);
        assert!(s.degree_i() < b.degree_i());
    }

    #[test]
    fn roots() {
        let a = p(&[0, -2, 1, 2]); // t(2t^2 + t - 2)? -> check rational roots only
        let r = a.rational_roots();
        assert!(r.contains(&qi(0)));
        let b = p(&[-1, 0, 4]);
        let mut rb = b.rational_roots();
        rb.sort();
        assert_eq!(rb, vec![q(-1, 2), q(1, 2)]);
    }
}
