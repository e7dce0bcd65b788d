//! Stationary Gromov–Witten invariants of ℙ¹ read off the large-x expansion
//! of `ω_n^{(g)}`, and the generating correlators `C_n` by two routes.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::correlators::{wn_eval, CorrError};
use crate::curve::{dx_dz, form_at_infinity, x_at};
use crate::diffsys::MTower;
use crate::exact::{factorial, HbarSeries, Q};
use crate::report::Report;
use crate::toprec::{basis::bp_value, TopRec, TrError};

/// `⟨τ_{k₁}(ω)…τ_{kₙ}(ω)⟩_{g,n}` for all `kᵢ ≤ kmax`, zeros omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GwTable {
    pub g: u32,
    pub n: usize,
    pub kmax: u32,
    pub entries: BTreeMap<Vec<u32>, Q>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GwEntryJson {
    pub k: Vec<u32>,
    pub value: String,
}

impl GwTable {
    pub fn get(&self, k: &[u32]) -> Q {
        self.entries.get(k).cloned().unwrap_or_else(Q::zero)
    }

    /// `Σkᵢ = 2g − 2 + 2d` with `d ≥ 0`.
    pub fn allowed(g: u32, k: &[u32]) -> bool {
        let s: i64 = k.iter().map(|&x| x as i64).sum();
        let e = s - (2 * g as i64 - 2);
        e >= 0 && e % 2 == 0
    }

    /// Nonzero entries that break the degree selection rule.
    pub fn selection_violations(&self) -> Vec<Vec<u32>> {
        self.entries.keys().filter(|k| !Self::allowed(self.g, k)).cloned().collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries.iter().all(|(k, v)| {
            let mut s = k.clone();
            s.sort_unstable();
            self.get(&s) == *v
        })
    }

    pub fn negative_entries(&self) -> Vec<Vec<u32>> {
        self.entries.iter().filter(|(_, v)| v.is_negative()).map(|(k, _)| k.clone()).collect()
    }

    pub fn to_json(&self) -> Vec<GwEntryJson> {
        self.entries.iter().map(|(k, v)| GwEntryJson { k: k.clone(), value: v.to_string() }).collect()
    }

    /// Columns `k1..kn,value`, one row per nonzero entry.
    pub fn to_csv(&self) -> String {
        let mut out: String = (1..=self.n).map(|i| format!("k{i},")).collect();
        out.push_str("value\n");
        for (k, v) in &self.entries {
            for x in k {
                out.push_str(&format!("{x},"));
            }
            out.push_str(&format!("{v}\n"));
        }
        out
    }
}

fn tuples(n: usize, kmax: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|t| (0..=kmax).map(move |k| [t.clone(), vec![k]].concat())).collect();
    }
    out
}

/// Expand `ω_n^{(g)}` at every `xᵢ → ∞` and divide the coefficient of
/// `∏ xᵢ^{−(kᵢ+2)}` by `∏ (kᵢ+1)!`.
pub fn gw_extract(tr: &mut TopRec, g: u32, n: usize, kmax: u32) -> Result<GwTable, TrError> {
    let omega = tr.omega(g, n)?;
    let order = kmax as i64 + 2;
    // per slot, the u-coefficients 2..=kmax+2 of (dz/dx)/(z−a)^k
    let mut slot_series: BTreeMap<(i8, u8), Vec<Q>> = BTreeMap::new();
    for key in omega.coeffs.keys() {
        for &(b, k) in key {
            slot_series.entry((b, k)).or_insert_with(|| {
                let s = form_at_infinity(&bp_value(b), k as u32, order);
                (0..=kmax).map(|j| s.coeff(j as i64 + 2).unwrap()).collect()
            });
        }
    }
    let mut entries = BTreeMap::new();
    for t in tuples(n, kmax) {
        let mut acc = Q::zero();
        for (key, c) in &omega.coeffs {
            let mut term = c.clone();
            for (slot, &k) in key.iter().zip(&t) {
                term *= &slot_series[slot][k as usize];
                if term.is_zero() {
                    break;
                }
            }
            acc += term;
        }
        if acc.is_zero() {
            continue;
        }
        let div: Q = t.iter().map(|&k| factorial(k + 1)).product();
        entries.insert(t, acc / div);
    }
    Ok(GwTable { g, n, kmax, entries })
}

/// `C_n` from the differentials: the coefficient of `ℏ^{n−2+2g}` is
/// `ω_n^{(g)}/∏dxᵢ`, with the double pole `1/(x₁−x₂)²` removed from `ω₂^{(0)}`.
/// Known through `ℏ^top`.
pub fn cn_from_omega(tr: &mut TopRec, zs: &[Q], top: usize) -> Result<HbarSeries<Q>, TrError> {
    let n = zs.len();
    assert!(n >= 2, "C_n starts at n = 2");
    let dxdz = dx_dz();
    let jac: Q = zs.iter().map(|z| dxdz.eval(z).expect("point off the branchpoints")).product();
    let mut coeffs = vec![Q::zero(); top + 1];
    for (k, slot) in coeffs.iter_mut().enumerate() {
        let twice_g = k as i64 - (n as i64 - 2);
        if twice_g < 0 || twice_g % 2 != 0 {
            continue;
        }
        let g = (twice_g / 2) as u32;
        *slot = if (g, n) == (0, 2) {
            let d = &zs[0] - &zs[1];
            let dx = x_at(&zs[0]) - x_at(&zs[1]);
            (&d * &d).recip() / &jac - (&dx * &dx).recip()
        } else {
            tr.omega(g, n)?.eval(zs) / &jac
        };
    }
    Ok(HbarSeries::new(0, coeffs))
}

/// `C_n` from the determinantal formula with the computed `M`.
pub fn cn_from_matrix(tower: &MTower, zs: &[Q], top: usize) -> Result<HbarSeries<Q>, CorrError> {
    let s = wn_eval(tower, zs, top)?;
    Ok(HbarSeries::new(0, (0..=top as i32).map(|k| s.values.coeff(k).unwrap_or_else(Q::zero)).collect()))
}

/// Both routes at one point, order by order.
pub fn cn_series(tower: &MTower, tr: &mut TopRec, zs: &[Q], top: usize) -> Result<Report, CorrError> {
    let a = cn_from_omega(tr, zs, top)?;
    let b = cn_from_matrix(tower, zs, top)?;
    let mut rep = Report::new("cn");
    for k in 0..=top as i32 {
        let (x, y) = (a.coeff(k).unwrap(), b.coeff(k).unwrap());
        let shown: Vec<String> = zs.iter().map(|z| z.to_string()).collect();
        rep.push(&format!("c{}-order-{k}", zs.len()), (x != y).then(|| format!("at ({}): {x} vs {y}", shown.join(","))));
    }
    Ok(rep)
}

/// The `(0,3)` anchor and selection-rule zeros, plus nonnegativity of the
/// one-point tables for `g ≤ gmax`.
pub fn gw_check(tr: &mut TopRec, kmax: u32, gmax: u32, kmax_one: u32) -> Result<Report, TrError> {
    let mut rep = Report::new("gw");
    let t = gw_extract(tr, 0, 3, kmax)?;
    let anchor = t.get(&[0, 0, 0]);
    rep.push("tau0-cubed", (!anchor.is_one()).then(|| format!("got {anchor}")));
    rep.push("selection-rule", t.selection_violations().first().map(|k| format!("{k:?} = {}", t.get(k))));
    rep.push("symmetry", (!t.is_symmetric()).then(|| "(0,3) table not symmetric".to_string()));
    for g in 1..=gmax {
        let t = gw_extract(tr, g, 1, kmax_one)?;
        let bad = t.negative_entries();
        rep.push(&format!("nonnegative-{g}-1"), bad.first().map(|k| format!("{k:?} = {}", t.get(k))));
        rep.push(&format!("selection-rule-{g}-1"), t.selection_violations().first().map(|k| format!("{k:?}")));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffsys::m_p1;
    use crate::exact::{q, qi};

    #[test]
    fn tau_zero_cubed() {
        let mut tr = TopRec::new();
        let t = gw_extract(&mut tr, 0, 3, 3).unwrap();
        assert_eq!(t.get(&[0, 0, 0]), Q::one());
        assert!(t.selection_violations().is_empty());
        assert!(t.is_symmetric());
        // odd total degree vanishes
        assert!(t.get(&[1, 0, 0]).is_zero());
    }

    #[test]
    fn genus_one_one_point() {
        let mut tr = TopRec::new();
        let t = gw_extract(&mut tr, 1, 1, 4).unwrap();
        // degree 0 contributes the one negative entry
        assert_eq!(t.get(&[0]), q(-1, 24));
        assert_eq!(t.get(&[2]), q(1, 24));
        assert_eq!(t.negative_entries(), vec![vec![0]]);
        assert!(t.selection_violations().is_empty());
        assert!(!t.entries.is_empty());
    }

    #[test]
    fn csv_has_header() {
        let mut tr = TopRec::new();
        let t = gw_extract(&mut tr, 0, 3, 1).unwrap();
        assert!(t.to_csv().starts_with("k1,k2,k3,value\n0,0,0,1\n"));
    }

    #[test]
    fn two_routes_two_points() {
        let tower = m_p1(5, &q(1, 2));
        let mut tr = TopRec::new();
        let rep = cn_series(&tower, &mut tr, &[qi(2), qi(3)], 2).unwrap();
        assert!(rep.all_passed(), "{rep:?}");
    }
}
