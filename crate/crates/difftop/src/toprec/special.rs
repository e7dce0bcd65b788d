//! The two unstable differentials, kept outside pole-basis storage.

use num_traits::{One, Zero};

use crate::exact::{LogElement, Poly, Q, RatFunc, RatError, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Special {
    /// `ω₁⁽⁰⁾ = −ln z (1 − 1/z²) dz`, stored as the `dz` density.
    Disk(LogElement),
    /// `ω₂⁽⁰⁾ = dz₁dz₂/(z₁ − z₂)²`.
    Cylinder,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("({0}, {1}) is not an unstable key")]
pub struct NotSpecial(pub u32, pub usize);

pub fn omega_special(g: u32, n: usize) -> Result<Special, NotSpecial> {
    match (g, n) {
        (0, 1) => {
            // 1 − 1/z² = (z² − 1)/z²
            let dx = RatFunc::new(Poly::from_ints(&[-1, 0, 1]), Poly::monomial(Q::one(), 2), Var::Z).unwrap();
            Ok(Special::Disk(LogElement::term(dx.neg(), 1)))
        }
        (0, 2) => Ok(Special::Cylinder),
        _ => Err(NotSpecial(g, n)),
    }
}

impl Special {
    /// Density at the given points; `ω₁⁽⁰⁾` comes back as a polynomial in `λ`.
    pub fn eval(&self, zs: &[Q]) -> Result<Poly, RatError> {
        match self {
            Special::Disk(f) => f.eval(&zs[0]),
            Special::Cylinder => {
                let d = &zs[0] - &zs[1];
                if d.is_zero() {
                    return Err(RatError::Pole);
                }
                Ok(Poly::constant((&d * &d).recip()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qi;

    #[test]
    fn cylinder_value() {
        let c = omega_special(0, 2).unwrap();
        assert_eq!(c.eval(&[qi(2), qi(3)]).unwrap(), Poly::one());
    }

    #[test]
    fn disk_is_minus_lambda_dx() {
        let Special::Disk(f) = omega_special(0, 1).unwrap() else { panic!() };
        assert_eq!(f.lambda_degree(), 1);
        // at z = 2: −λ (1 − 1/4)
        let p = f.eval(&qi(2)).unwrap();
        assert_eq!(p, Poly::new(vec![Q::zero(), Q::new((-3).into(), 4.into())]));
    }

    #[test]
    fn other_keys_rejected() {
        assert!(omega_special(1, 1).is_err());
    }
}
