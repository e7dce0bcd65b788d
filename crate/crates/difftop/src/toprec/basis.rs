//! Forms written in the pole basis `∏ dz_i/(z_i − a_i)^{k_i}` with `a_i = ±1`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::exact::{fmt_q, parse_q, Poly, Q, RatFunc, Var};

/// One slot of a basis monomial: branchpoint sign (`+1` or `-1`) and pole order.
pub type Slot = (i8, u8);

pub fn bp_value(b: i8) -> Q {
    Q::from_integer(b.into())
}

/// A multilinear form in the pole basis, stored over ordered slot tuples.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PoleBasisForm {
    pub arity: usize,
    pub coeffs: BTreeMap<Vec<Slot>, Q>,
}

impl PoleBasisForm {
    pub fn new(arity: usize) -> Self {
        PoleBasisForm { arity, coeffs: BTreeMap::new() }
    }

    pub fn add_term(&mut self, key: Vec<Slot>, c: Q) {
        debug_assert_eq!(key.len(), self.arity);
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(key) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn coeff(&self, key: &[Slot]) -> Q {
        self.coeffs.get(key).cloned().unwrap_or_else(Q::zero)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_pole_order(&self) -> u8 {
        self.coeffs.keys().flat_map(|k| k.iter().map(|s| s.1)).max().unwrap_or(0)
    }

    /// Density (coefficient of `∏ dz_i`) at a point.
    pub fn eval(&self, zs: &[Q]) -> Q {
        assert_eq!(zs.len(), self.arity);
        let mut acc = Q::zero();
        for (key, c) in &self.coeffs {
            let mut term = c.clone();
            for ((b, k), z) in key.iter().zip(zs) {
                let d = z - bp_value(*b);
                term *= d.recip().pow(*k as i32);
            }
            acc += term;
        }
        acc
    }

    /// For arity 1: the density as a single rational function of `z`.
    pub fn to_ratfunc(&self) -> RatFunc {
        assert_eq!(self.arity, 1);
        let mut acc = RatFunc::zero(Var::Z);
        for (key, c) in &self.coeffs {
            let (b, k) = key[0];
            let den = Poly::linear_root(&bp_value(b)).pow(k as u32);
            acc = acc.add(&RatFunc::new(Poly::constant(c.clone()), den, Var::Z).unwrap());
        }
        acc
    }

    /// Apply a permutation of slots: new slot `i` takes old slot `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> PoleBasisForm {
        let mut out = PoleBasisForm::new(self.arity);
        for (key, c) in &self.coeffs {
            let nk: Vec<Slot> = perm.iter().map(|&p| key[p]).collect();
            out.coeffs.insert(nk, c.clone());
        }
        out
    }

    /// Pullback under `z ↦ −z` in every slot: `(a, k) ↦ (−a, k)` with sign `(−1)^{k+1}`.
    pub fn reflect(&self) -> PoleBasisForm {
        let mut out = PoleBasisForm::new(self.arity);
        for (key, c) in &self.coeffs {
            let odd = key.iter().filter(|(_, k)| k % 2 == 0).count() % 2 == 1;
            let nk = key.iter().map(|&(b, k)| (-b, k)).collect();
            out.add_term(nk, if odd { -c.clone() } else { c.clone() });
        }
        out
    }

    pub fn scale(&self, c: &Q) -> PoleBasisForm {
        let mut out = PoleBasisForm::new(self.arity);
        for (key, v) in &self.coeffs {
            out.add_term(key.clone(), v * c);
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.arity;
        if n < 2 {
            return true;
        }
        // adjacent transpositions generate S_n
        (0..n - 1).all(|i| {
            let mut p: Vec<usize> = (0..n).collect();
            p.swap(i, i + 1);
            self.permute(&p) == *self
        })
    }

    pub fn to_json(&self) -> Vec<PoleTermJson> {
        self.coeffs
            .iter()
            .map(|(key, c)| PoleTermJson {
                vars: key.iter().map(|(b, k)| PoleVarJson { bp: if *b > 0 { "+1".into() } else { "-1".into() }, k: *k as u32 }).collect(),
                coeff: fmt_q(c),
            })
            .collect()
    }

    pub fn from_json(terms: &[PoleTermJson]) -> Result<PoleBasisForm, String> {
        let arity = terms.first().map(|t| t.vars.len()).unwrap_or(0);
        let mut out = PoleBasisForm::new(arity);
        for t in terms {
            let key = t
                .vars
                .iter()
                .map(|v| {
                    let b = match v.bp.as_str() {
                        "+1" => 1,
                        "-1" => -1,
                        other => return Err(format!("bad branchpoint {other}")),
                    };
                    Ok((b, v.k as u8))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if key.len() != arity {
                return Err("inconsistent arity".into());
            }
            out.add_term(key, parse_q(&t.coeff).map_err(|e| e.to_string())?);
        }
        Ok(out)
    }

    /// CSV rows `bp1,k1,...,bpn,kn,coeff`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let hdr: Vec<String> = (1..=self.arity).flat_map(|i| [format!("bp{i}"), format!("k{i}")]).chain(["coeff".to_string()]).collect();
        s.push_str(&hdr.join(","));
        s.push('\n');
        for (key, c) in &self.coeffs {
            let mut row: Vec<String> = key.iter().flat_map(|(b, k)| [if *b > 0 { "+1".to_string() } else { "-1".to_string() }, k.to_string()]).collect();
            row.push(fmt_q(c));
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoleVarJson {
    pub bp: String,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoleTermJson {
    pub vars: Vec<PoleVarJson>,
    pub coeff: String,
}

/// Primitive of a pole-basis form from base point 0 in every slot.
/// Slot exponent `k ≥ 1` stands for `(z − a)^{−k}`; `k = 0` for the constant 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Primitive {
    pub arity: usize,
    pub coeffs: BTreeMap<Vec<Slot>, Q>,
}

impl Primitive {
    pub fn from_form(f: &PoleBasisForm) -> Primitive {
        let mut out = Primitive { arity: f.arity, coeffs: BTreeMap::new() };
        for (key, c) in &f.coeffs {
            // ∫_0^z dz/(z−a)^k = −(z−a)^{1−k}/(k−1) + (−a)^{1−k}/(k−1)
            let mut partial: Vec<(Vec<Slot>, Q)> = vec![(Vec::new(), c.clone())];
            for &(b, k) in key {
                let km1 = Q::from_integer((k as i64 - 1).into());
                let a = bp_value(b);
                let pole = -km1.recip();
                let cst = (-a).recip().pow(k as i32 - 1) / &km1;
                let mut next = Vec::with_capacity(partial.len() * 2);
                for (pk, pc) in partial {
                    let mut k1 = pk.clone();
                    k1.push((b, k - 1));
                    next.push((k1, &pc * &pole));
                    let mut k0 = pk;
                    k0.push((b, 0));
                    next.push((k0, &pc * &cst));
                }
                partial = next;
            }
            for (k, v) in partial {
                // normalize constant slots to a fixed sign so like terms merge
                let k: Vec<Slot> = k.into_iter().map(|(b, e)| if e == 0 { (1, 0) } else { (b, e) }).collect();
                let e = out.coeffs.entry(k).or_insert_with(Q::zero);
                *e += v;
            }
        }
        out.coeffs.retain(|_, v| !v.is_zero());
        out
    }

    pub fn eval(&self, zs: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (key, c) in &self.coeffs {
            let mut term = c.clone();
            for ((b, k), z) in key.iter().zip(zs) {
                if *k > 0 {
                    term *= (z - bp_value(*b)).recip().pow(*k as i32);
                }
            }
            acc += term;
        }
        acc
    }

    /// Single-slot primitive as a rational function.
    pub fn to_ratfunc(&self) -> RatFunc {
        assert_eq!(self.arity, 1);
        let mut acc = RatFunc::zero(Var::Z);
        for (key, c) in &self.coeffs {
            let (b, k) = key[0];
            let den = if k == 0 { Poly::one() } else { Poly::linear_root(&bp_value(b)).pow(k as u32) };
            acc = acc.add(&RatFunc::new(Poly::constant(c.clone()), den, Var::Z).unwrap());
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qi};

    #[test]
    fn primitive_of_double_pole() {
        let mut f = PoleBasisForm::new(1);
        f.add_term(vec![(1, 2)], qi(1));
        let p = Primitive::from_form(&f);
        // −1/(z−1) − 1
        let want = RatFunc::new(Poly::from_ints(&[0, -1]), Poly::from_ints(&[-1, 1]), Var::Z).unwrap();
        assert_eq!(p.to_ratfunc(), want);
        assert_eq!(p.eval(&[qi(0)]), qi(0));
    }

    #[test]
    fn json_roundtrip() {
        let mut f = PoleBasisForm::new(2);
        f.add_term(vec![(1, 2), (-1, 3)], q(-7, 3));
        f.add_term(vec![(-1, 2), (-1, 2)], q(1, 2));
        let j = f.to_json();
        assert_eq!(PoleBasisForm::from_json(&j).unwrap(), f);
    }

    #[test]
    fn add_term_cancels() {
        let mut f = PoleBasisForm::new(1);
        f.add_term(vec![(1, 2)], qi(1));
        f.add_term(vec![(1, 2)], qi(-1));
        assert!(f.is_empty());
    }
}
