//! Geometry of the spectral curve `x = z + 1/z`, `y = ln z`: the chart, the
//! involution `z ↦ 1/z`, local data at the branchpoints `z = ±1`, and
//! re-expansion at large `x`.

use num_traits::{One, Zero};

use crate::exact::{LaurentSeries, LogElement, Point, Poly, Q, RatFunc, Ring, Var};

/// Branchpoints in their canonical order.
pub fn branchpoints() -> [Q; 2] {
    [Q::one(), -Q::one()]
}

fn rz(num: &[i64], den: &[i64]) -> RatFunc {
    RatFunc::new(Poly::from_ints(num), Poly::from_ints(den), Var::Z).unwrap()
}

/// Chart data: `x(z)`, `√(x²−4) = z − 1/z` (positive for `z > 1`), and the
/// Jacobians.
#[derive(Debug, Clone)]
pub struct CurveChart {
    pub x_of_z: RatFunc,
    pub sqrt_delta: RatFunc,
    pub dx_dz: RatFunc,
    pub dz_dx: RatFunc,
}

impl Default for CurveChart {
    fn default() -> Self {
        CurveChart {
            x_of_z: rz(&[1, 0, 1], &[0, 1]),
            sqrt_delta: rz(&[-1, 0, 1], &[0, 1]),
            dx_dz: rz(&[-1, 0, 1], &[0, 0, 1]),
            dz_dx: rz(&[0, 0, 1], &[-1, 0, 1]),
        }
    }
}

/// `x(z) = z + 1/z`.
pub fn x_of_z() -> RatFunc {
    rz(&[1, 0, 1], &[0, 1])
}

/// `z − 1/z`, the chosen branch of `√(x²−4)`.
pub fn sqrt_delta() -> RatFunc {
    rz(&[-1, 0, 1], &[0, 1])
}

pub fn dx_dz() -> RatFunc {
    rz(&[-1, 0, 1], &[0, 0, 1])
}

pub fn dz_dx() -> RatFunc {
    rz(&[0, 0, 1], &[-1, 0, 1])
}

pub fn x_at(z: &Q) -> Q {
    z + z.recip()
}

/// `f(1/z)`.
pub fn involute(f: &RatFunc) -> RatFunc {
    let n = f.num().degree_i().max(0) as usize;
    let d = f.den().degree_i() as usize;
    let (num, den) = (f.num().reverse(n), f.den().reverse(d));
    // f(1/z) = z^(d-n) rev(num)/rev(den)
    let (num, den) = if d >= n { (num.shift_up(d - n), den) } else { (num, den.shift_up(n - d)) };
    RatFunc::new(num, den, Var::Z).unwrap()
}

/// `d/dx` of a function of `z`.
pub fn d_dx(f: &RatFunc) -> RatFunc {
    f.deriv().mul(&dz_dx())
}

pub fn d_dx_log(e: &LogElement) -> LogElement {
    e.deriv().mul_rat(&dz_dx())
}

/// `j`-th `x`-derivative.
pub fn d_dx_n(f: &RatFunc, j: usize) -> RatFunc {
    (0..j).fold(f.clone(), |g, _| d_dx(&g))
}

pub fn d_dx_log_n(e: &LogElement, j: usize) -> LogElement {
    (0..j).fold(e.clone(), |g, _| d_dx_log(&g))
}

/// Local series of `y(z) − y(1/z)` in `t = z − a`.
#[derive(Debug, Clone)]
pub struct LocalYDifference {
    pub branchpoint: Q,
    pub series: LaurentSeries,
}

/// `2 ln(1+t)` at `+1` and `2 ln(−z) = 2 ln(1−t)` at `−1`, through `t^order`.
pub fn ydiff_local(a: &Q, order: i64) -> LocalYDifference {
    assert!(a.is_one() || (-a).is_one(), "branchpoints are ±1");
    let series = LaurentSeries::ln1p(Point::At(a.clone()), a, order + 1).scale(&Q::from_integer(2.into()));
    LocalYDifference { branchpoint: a.clone(), series }
}

/// `z(x) = (x + √(x²−4))/2` in `u = 1/x`, known through `u^order`.
pub fn z_of_x_series(order: i64) -> LaurentSeries {
    // z = (1 + √(1 − 4u²)) / (2u)
    let p = order + 2;
    let one_minus = LaurentSeries::new(Point::Infinity, 0, vec![Q::one(), Q::zero(), Q::from_integer((-4).into())], Some(p));
    let root = one_minus.sqrt().expect("1 - 4u^2 has a square root");
    let num = root.add(&LaurentSeries::constant(Point::Infinity, Q::one()));
    num.shift(-1).scale(&Q::new(1.into(), 2.into())).truncate(order + 1)
}

/// `(dz/dx) / (z(x) − a)^k` in `u = 1/x`, known through `u^order`.
pub fn form_at_infinity(a: &Q, k: u32, order: i64) -> LaurentSeries {
    assert!(k >= 2, "pole basis starts at k = 2");
    // z − a has valuation −1, its inverse power has valuation k; need z through u^(order − k + 1).
    let zs = z_of_x_series(order + 2);
    let shifted = zs.add(&LaurentSeries::constant(Point::Infinity, -a.clone()));
    let inv = shifted.try_inv().unwrap().pow(k).unwrap();
    // dz/dx = −u² dz/du
    let dzdx = zs.deriv().shift(2).neg();
    inv.try_mul(&dzdx).unwrap().truncate(order + 1)
}

/// `f = R(x) + T(x)·√(x²−4)`, the decomposition of a function of `z` into
/// parts even and odd under the involution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XForm {
    pub rational: RatFunc,
    pub sqrt_coeff: RatFunc,
}

/// Reduce a polynomial in `z` modulo `z² − x z + 1` to `p0(x) + p1(x) z`.
fn reduce_mod_curve(p: &Poly) -> (Poly, Poly) {
    let x = Poly::var();
    let (mut p0, mut p1) = (Poly::zero(), Poly::zero());
    for c in p.coeffs().iter().rev() {
        // (p0 + p1 z) z = -p1 + (p0 + x p1) z
        let n0 = p1.neg();
        let n1 = p0.add(&x.mul(&p1));
        p0 = n0.add(&Poly::constant(c.clone()));
        p1 = n1;
    }
    (p0, p1)
}

pub fn to_x_form(f: &RatFunc) -> XForm {
    let (n0, n1) = reduce_mod_curve(f.num());
    let (d0, d1) = reduce_mod_curve(f.den());
    let x = Poly::var();
    // multiply through by the conjugate d0 + d1 (x − z)
    let den = d0.mul(&d0).add(&d0.mul(&d1).mul(&x)).add(&d1.mul(&d1));
    let a = n0.mul(&d0).add(&n0.mul(&d1).mul(&x)).add(&n1.mul(&d1));
    let b = n1.mul(&d0).sub(&n0.mul(&d1));
    // A + B z with z = (x + s)/2
    let half = Q::new(1.into(), 2.into());
    let rational_num = a.add(&b.mul(&x).scale(&half));
    let rational = RatFunc::new(rational_num, den.clone(), Var::X).unwrap();
    let sqrt_coeff = RatFunc::new(b.scale(&half), den, Var::X).unwrap();
    XForm { rational, sqrt_coeff }
}

pub fn from_x_form(xf: &XForm) -> RatFunc {
    let xz = x_of_z();
    let r = xf.rational.retag(Var::Z).compose(&xz).unwrap();
    let t = xf.sqrt_coeff.retag(Var::Z).compose(&xz).unwrap();
    r.add(&t.mul(&sqrt_delta()))
}

impl XForm {
    /// Write the odd part as `P(x) / (c·(x²−4)^(m/2))` with `m` odd, returning
    /// `(P, c, m)` when the denominator of the odd part is `c·(x²−4)^j`.
    pub fn odd_part_half_power(&self) -> Option<(Poly, Q, i64)> {
        if self.sqrt_coeff.is_zero() {
            return None;
        }
        let delta = Poly::from_ints(&[-4, 0, 1]);
        let mut den = self.sqrt_coeff.den().clone();
        let mut j = 0i64;
        loop {
            let (qq, r) = den.divrem(&delta);
            if !r.is_zero() {
                break;
            }
            den = qq;
            j += 1;
        }
        if !den.is_constant() {
            return None;
        }
        // T = N/(c Δ^j)  so  f_odd = T·Δ^{1/2} = N/(c Δ^{(2j−1)/2})
        Some((self.sqrt_coeff.num().clone(), den.coeff(0), 2 * j - 1))
    }

    pub fn display(&self) -> String {
        let mut parts = Vec::new();
        if !self.rational.is_zero() {
            parts.push(self.rational.to_string());
        }
        match self.odd_part_half_power() {
            Some((p, c, m)) => {
                let cs = if c.is_one() { String::new() } else { format!("{c}*") };
                parts.push(format!("({})/({}(x^2-4)^({}/2))", p.display_with("x"), cs, m));
            }
            None if !self.sqrt_coeff.is_zero() => parts.push(format!("({})*(x^2-4)^(1/2)", self.sqrt_coeff)),
            None => {}
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qi};

    #[test]
    fn chart_identities() {
        let s = sqrt_delta();
        let x = x_of_z();
        assert_eq!(s.mul(&s), x.mul(&x).sub(&RatFunc::constant(qi(4), Var::Z)));
        assert_eq!(dx_dz().mul(&dz_dx()), RatFunc::one(Var::Z));
        assert_eq!(involute(&x), x);
        assert_eq!(involute(&s), s.neg());
        assert_eq!(involute(&involute(&rz(&[1, 2, 3], &[5, 0, 0, 1]))), rz(&[1, 2, 3], &[5, 0, 0, 1]));
    }

    #[test]
    fn ydiff_coefficients() {
        let p = ydiff_local(&qi(1), 3).series;
        assert_eq!(p.terms(), vec![(1, qi(2)), (2, qi(-1)), (3, q(2, 3))]);
        let m = ydiff_local(&qi(-1), 3).series;
        assert_eq!(m.terms(), vec![(1, qi(-2)), (2, qi(-1)), (3, q(-2, 3))]);
    }

    #[test]
    fn z_of_x_catalan() {
        let s = z_of_x_series(7);
        assert_eq!(s.terms(), vec![(-1, qi(1)), (1, qi(-1)), (3, qi(-1)), (5, qi(-2)), (7, qi(-5))]);
    }

    #[test]
    fn x_form_round_trip() {
        let f = rz(&[0, 0, 3, 1], &[-1, 0, 0, 0, 1]);
        let xf = to_x_form(&f);
        assert_eq!(from_x_form(&xf), f);
        let s = to_x_form(&sqrt_delta());
        assert!(s.rational.is_zero());
        assert_eq!(s.sqrt_coeff, RatFunc::one(Var::X));
    }

    #[test]
    fn form_at_infinity_leading() {
        let f = form_at_infinity(&qi(1), 2, 4);
        assert_eq!(f.valuation(), 2);
        assert_eq!(f.coeff(2).unwrap(), qi(1));
    }
}
