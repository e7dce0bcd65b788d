//! Exact antiderivatives of rational functions and of log elements in `z`.
//!
//! Rational parts go through Hermite reduction; whatever survives must be a
//! multiple of `1/z`, which integrates to a multiple of `λ`.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::logelem::LogElement;
use super::poly::Poly;
use super::ratfunc::{RatFunc, Var};
use super::scalar::Q;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IntegrationError {
    /// A logarithm at a finite point other than 0 would be needed.
    #[error("non-integrable residue {residue:?} at {point:?} (squarefree remainder {remainder})")]
    NonIntegrableResidue { point: Option<Q>, residue: Option<Q>, remainder: String },
    #[error("cannot integrate a negative power of lambda")]
    NegativeLambdaPower,
}

/// Hermite reduction of a proper fraction `a/d`: returns `(g, h)` with
/// `a/d = g' + h` and `h` having a squarefree denominator.
pub fn hermite_reduce(a: &Poly, d: &Poly) -> (RatFunc, RatFunc) {
    let mut a = a.clone();
    let mut g = RatFunc::zero(Var::Z);
    let mut dm = d.gcd(&d.deriv());
    let ds = d.exact_div(&dm);
    while dm.degree_i() > 0 {
        let dm2 = dm.gcd(&dm.deriv());
        let dms = dm.exact_div(&dm2);
        let coef = ds.exact_div(&dms).mul(&dm.deriv().exact_div(&dm2)).neg();
        let (b, c) = Poly::solve_bezout(&coef, &dms, &a).expect("Hermite step is always solvable");
        a = c.sub(&b.deriv().mul(&ds.exact_div(&dms)));
        g = g.add(&RatFunc::new(b, dm.clone(), Var::Z).unwrap());
        dm = dm2;
    }
    (g, RatFunc::new(a, ds, Var::Z).unwrap())
}

/// Antiderivative in `z`. The rational part has no constant term in its
/// expansion at infinity; a residue at `z = 0` becomes `c·λ`.
#[allow(clippy::result_large_err)]
pub fn antiderivative(f: &RatFunc) -> Result<LogElement, IntegrationError> {
    assert_eq!(f.var(), Var::Z);
    if f.is_zero() {
        return Ok(LogElement::zero());
    }
    let (poly, rem) = f.num().divrem(f.den());
    let (g, h) = hermite_reduce(&rem, f.den());
    let rational = g.add(&RatFunc::from_poly(poly.integral(), Var::Z));
    let mut out = LogElement::from_rat(rational);
    if h.is_zero() {
        return Ok(out);
    }
    // Split off c/z.
    let (c, rest) = if h.den().coeff(0).is_zero() {
        let e = h.den().shift_down(1);
        let c = h.num().coeff(0) / e.eval(&Q::zero());
        let cz = RatFunc::new(Poly::constant(c.clone()), Poly::var(), Var::Z).unwrap();
        (c, h.sub(&cz))
    } else {
        (Q::zero(), h)
    };
    if !rest.is_zero() {
        let roots = rest.den().rational_roots();
        let (point, residue) = match roots.first() {
            Some(p) => {
                let r = rest.num().eval(p) / rest.den().deriv().eval(p);
                (Some(p.clone()), Some(r))
            }
            None => (None, None),
        };
        return Err(IntegrationError::NonIntegrableResidue { point, residue, remainder: rest.to_string() });
    }
    out = out.add(&LogElement::term(RatFunc::constant(c, Var::Z), 1));
    Ok(out)
}

/// Antiderivative of `Σ f_j λ^j`, by parts from the top power down.
#[allow(clippy::result_large_err)]
pub fn integrate_log(e: &LogElement) -> Result<LogElement, IntegrationError> {
    if e.lowest_lambda_power() < 0 {
        return Err(IntegrationError::NegativeLambdaPower);
    }
    let inv_z = RatFunc::new(Poly::one(), Poly::var(), Var::Z).unwrap();
    let mut pending: BTreeMap<i32, RatFunc> = e.parts().clone();
    let mut out = LogElement::zero();
    while let Some((&j, _)) = pending.iter().next_back() {
        let f = pending.remove(&j).unwrap();
        if f.is_zero() {
            continue;
        }
        let prim = antiderivative(&f)?;
        let g = prim.part(0);
        let c = prim.part(1).as_constant().unwrap_or_else(Q::zero);
        out = out.add(&LogElement::term(g.clone(), j));
        out = out.add(&LogElement::term(RatFunc::constant(c / Q::from_integer((j + 1).into()), Var::Z), j + 1));
        if j > 0 {
            let carry = g.mul(&inv_z).scale(&Q::from_integer((-j).into()));
            let entry = pending.entry(j - 1).or_insert_with(|| RatFunc::zero(Var::Z));
            *entry = entry.add(&carry);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::scalar::{q, qi};

    fn rz(n: &[i64], d: &[i64]) -> RatFunc {
        RatFunc::new(Poly::from_ints(n), Poly::from_ints(d), Var::Z).unwrap()
    }

    #[test]
    fn hermite_identity() {
        // (z^3+1)/((z-1)^3 (z+2)^2 z)
        let d = Poly::from_ints(&[-1, 1]).pow(3).mul(&Poly::from_ints(&[2, 1]).pow(2)).mul(&Poly::var());
        let a = Poly::from_ints(&[1, 0, 0, 1]);
        let (g, h) = hermite_reduce(&a, &d);
        let f = RatFunc::new(a, d, Var::Z).unwrap();
        assert_eq!(g.deriv().add(&h), f);
        assert!(h.den().gcd(&h.den().deriv()).is_constant());
    }

    #[test]
    fn residue_at_zero_becomes_lambda() {
        // 1/z + 1/z^2 -> λ - 1/z
        let f = rz(&[1, 1], &[0, 0, 1]);
        let p = antiderivative(&f).unwrap();
        assert_eq!(p.part(1), RatFunc::one(Var::Z));
        assert_eq!(p.part(0), rz(&[-1], &[0, 1]));
    }

    #[test]
    fn finite_residue_is_reported() {
        let f = rz(&[1], &[-1, 0, 1]);
        match antiderivative(&f) {
            Err(IntegrationError::NonIntegrableResidue { point, residue, .. }) => {
                let p = point.unwrap();
                assert!(p == qi(1) || p == qi(-1));
                assert_eq!(residue.unwrap(), if p == qi(1) { q(1, 2) } else { q(-1, 2) });
            }
            other => panic!("expected residue error, got {other:?}"),
        }
    }

    #[test]
    fn by_parts_round_trip() {
        // integrand: d/dz [ (z/(z^2-1)) λ^2 + λ^3/3 ]
        let target = LogElement::term(rz(&[0, 1], &[-1, 0, 1]), 2).add(&LogElement::term(RatFunc::constant(q(1, 3), Var::Z), 3));
        let back = integrate_log(&target.deriv()).unwrap();
        assert_eq!(back, target);
    }
}
