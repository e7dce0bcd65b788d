//! The recursion itself: residues at `z = ±1` of the kernel against the
//! recursion bracket, assembled in the pole basis.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::basis::{PoleBasisForm, Primitive, Slot};
use crate::curve::ydiff_local;
use crate::exact::{LaurentSeries, Point, Poly, Q, RatFunc, SeriesError, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrError {
    #[error("(g, n) = ({0}, {1}) is outside the stable range 2g - 2 + n > 0")]
    Unstable(u32, usize),
    #[error("working order {0} exhausted: {1}")]
    Order(i64, SeriesError),
}

/// Which sheet a slot is evaluated on near the branchpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Sheet {
    /// `z = a + t`
    Direct,
    /// `z̄ = 1/z = a + u(t)`, carrying the factor `u'(t)`.
    Conjugate,
}

type Local = Vec<(Vec<Slot>, LaurentSeries)>;

/// Series data at one branchpoint, all in `t = z − a`, known through `t^order`.
struct BranchData {
    a: i8,
    order: i64,
    u: RatFunc,
    du: RatFunc,
    du_s: LaurentSeries,
    u_s: LaurentSeries,
    kernel_base: LaurentSeries,
    cache: HashMap<(Sheet, i8, u8), LaurentSeries>,
}

fn tpoly(c: &[Q]) -> Poly {
    Poly::new(c.to_vec())
}

impl BranchData {
    fn new(a: i8, order: i64) -> Result<Self, SeriesError> {
        let aq = Q::from_integer(a.into());
        let p0 = Point::At(Q::zero());
        // u(t) = −a t/(t + a)
        let u = RatFunc::new(tpoly(&[Q::zero(), -aq.clone()]), tpoly(&[aq.clone(), Q::one()]), Var::Z).unwrap();
        let du = u.deriv();
        let work = order + 6;
        let u_s = LaurentSeries::expand(&u, p0.clone(), work);
        let du_s = LaurentSeries::expand(&du, p0.clone(), work);
        // 1 / (2 (ω₁⁰(z) − ω₁⁰(z̄))) with ω₁⁰ = −y dx, so the denominator is −2·ydiff·x'
        let apt = tpoly(&[aq.clone(), Q::one()]);
        let xprime = RatFunc::new(apt.mul(&apt).sub(&Poly::one()), apt.mul(&apt), Var::Z).unwrap();
        let xs = LaurentSeries::expand(&xprime, p0.clone(), work);
        let yd = ydiff_local(&aq, work).series;
        let yd0 = LaurentSeries::new(p0, yd.valuation(), yd.terms_dense(), yd.precision());
        let kernel_base = yd0.try_mul(&xs)?.scale(&Q::from_integer((-2).into())).try_inv()?;
        Ok(BranchData { a, order, u, du, du_s, u_s, kernel_base, cache: HashMap::new() })
    }

    fn p0(&self) -> Point {
        Point::At(Q::zero())
    }

    fn aq(&self) -> Q {
        Q::from_integer(self.a.into())
    }

    /// The slot factor of the basis element `(b, k)` on the given sheet.
    fn slot(&mut self, sheet: Sheet, b: i8, k: u8) -> LaurentSeries {
        if let Some(s) = self.cache.get(&(sheet, b, k)) {
            return s.clone();
        }
        let shift = self.aq() - Q::from_integer(b.into());
        let s = match sheet {
            Sheet::Direct => {
                if b == self.a {
                    LaurentSeries::monomial(self.p0(), Q::one(), -(k as i64))
                } else {
                    let base = RatFunc::new(Poly::one(), tpoly(&[shift, Q::one()]).pow(k as u32), Var::Z).unwrap();
                    LaurentSeries::expand(&base, self.p0(), self.order)
                }
            }
            Sheet::Conjugate => {
                let arg = self.u.add(&RatFunc::constant(shift, Var::Z));
                let f = self.du.mul(&arg.powi(-(k as i32)).unwrap());
                LaurentSeries::expand(&f, self.p0(), self.order)
            }
        };
        self.cache.insert((sheet, b, k), s.clone());
        s
    }

    /// `ω₂^{(0)}(z or z̄, z_j)` re-expanded in the spectator basis at this branchpoint.
    fn bergmann_spectator(&self, sheet: Sheet, mmax: i64) -> Result<Local, SeriesError> {
        let mut out = Vec::new();
        let mut upow = LaurentSeries::constant(self.p0(), Q::one());
        for m in 0..=mmax {
            let c = Q::from_integer((m + 1).into());
            let s = match sheet {
                Sheet::Direct => LaurentSeries::monomial(self.p0(), c, m),
                Sheet::Conjugate => upow.try_mul(&self.du_s)?.scale(&c),
            };
            out.push((vec![(self.a, (m + 2) as u8)], s));
            if sheet == Sheet::Conjugate {
                upow = upow.try_mul(&self.u_s)?;
            }
        }
        Ok(out)
    }

    /// `ω₂^{(0)}(z, z̄)` as a density in `t`.
    fn bergmann_diagonal(&self) -> LaurentSeries {
        let t = RatFunc::var_fn(Var::Z);
        let diff = t.sub(&self.u);
        let f = self.du.mul(&diff.powi(-2).unwrap());
        LaurentSeries::expand(&f, self.p0(), self.order)
    }

    /// Kernel coefficient of `dz₀/(z₀ − a)^{m+1}`.
    fn kernel(&self, m: i64) -> Result<LaurentSeries, SeriesError> {
        let tm = LaurentSeries::monomial(self.p0(), Q::one(), m);
        let um = self.u_s.pow(m as u32)?;
        tm.try_sub(&um)?.try_mul(&self.kernel_base)
    }

    /// Expand slot 0 of a stored form on a sheet; the rest become the key.
    fn expand_slot0(&mut self, form: &PoleBasisForm, sheet: Sheet) -> Result<Local, SeriesError> {
        let mut acc: BTreeMap<Vec<Slot>, LaurentSeries> = BTreeMap::new();
        for (key, c) in &form.coeffs {
            let (b, k) = key[0];
            let s = self.slot(sheet, b, k).scale(c);
            let rest = key[1..].to_vec();
            match acc.get_mut(&rest) {
                Some(e) => *e = e.try_add(&s)?,
                None => {
                    acc.insert(rest, s);
                }
            }
        }
        Ok(acc.into_iter().collect())
    }

    /// Expand slots 0 and 1 on the direct and conjugate sheets.
    fn expand_slot01(&mut self, form: &PoleBasisForm) -> Result<Local, SeriesError> {
        let mut acc: BTreeMap<Vec<Slot>, LaurentSeries> = BTreeMap::new();
        for (key, c) in &form.coeffs {
            let (b0, k0) = key[0];
            let (b1, k1) = key[1];
            let s = self.slot(Sheet::Direct, b0, k0).try_mul(&self.slot(Sheet::Conjugate, b1, k1))?.scale(c);
            let rest = key[2..].to_vec();
            match acc.get_mut(&rest) {
                Some(e) => *e = e.try_add(&s)?,
                None => {
                    acc.insert(rest, s);
                }
            }
        }
        Ok(acc.into_iter().collect())
    }
}

trait DenseTerms {
    fn terms_dense(&self) -> Vec<Q>;
}

impl DenseTerms for LaurentSeries {
    fn terms_dense(&self) -> Vec<Q> {
        let end = self.precision().expect("truncated series");
        (self.valuation()..end).map(|n| self.coeff(n).unwrap()).collect()
    }
}

/// Memoized recursion engine.
#[derive(Default)]
pub struct TopRec {
    memo: BTreeMap<(u32, usize), Arc<PoleBasisForm>>,
    /// Extra working order on top of `6g + 2n + 4`.
    pub order_boost: i64,
}

impl TopRec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn working_order(&self, g: u32, n: usize) -> i64 {
        6 * g as i64 + 2 * n as i64 + 4 + self.order_boost
    }

    /// `ω_n^{(g)}` in the pole basis.
    pub fn omega(&mut self, g: u32, n: usize) -> Result<Arc<PoleBasisForm>, TrError> {
        if 2 * g as i64 - 2 + n as i64 <= 0 {
            return Err(TrError::Unstable(g, n));
        }
        if let Some(f) = self.memo.get(&(g, n)) {
            return Ok(f.clone());
        }
        // make sure every ingredient is memoized first
        let chi = 2 * g as i64 - 2 + n as i64;
        for h in 0..=g {
            for k in 1..=n + 1 {
                let c = 2 * h as i64 - 2 + k as i64;
                if c > 0 && c < chi {
                    self.omega(h, k)?;
                }
            }
        }
        let mut order = self.working_order(g, n);
        let mut attempts = 0;
        let form = loop {
            match self.compute(g, n, order) {
                Ok(f) => break f,
                Err(_) if attempts < 4 => {
                    order += 6;
                    attempts += 1;
                }
                Err(e) => return Err(TrError::Order(order, e)),
            }
        };
        let f = Arc::new(form);
        self.memo.insert((g, n), f.clone());
        Ok(f)
    }

    /// `F_{g,n}`: primitive of `omega(g, n)` from base point 0 in every slot.
    pub fn f_gn(&mut self, g: u32, n: usize) -> Result<Primitive, TrError> {
        let w = self.omega(g, n)?;
        Ok(Primitive::from_form(&w))
    }

    /// Every memoized `(g, n)`.
    pub fn computed(&self) -> Vec<(u32, usize)> {
        self.memo.keys().copied().collect()
    }

    fn stored(&self, g: u32, n: usize) -> Option<Arc<PoleBasisForm>> {
        self.memo.get(&(g, n)).cloned()
    }

    fn compute(&self, g: u32, n: usize, order: i64) -> Result<PoleBasisForm, SeriesError> {
        let spect = n - 1;
        let mut out = PoleBasisForm::new(n);
        for a in [1i8, -1] {
            let mut bd = BranchData::new(a, order)?;
            let mut bracket: BTreeMap<Vec<Slot>, LaurentSeries> = BTreeMap::new();
            let push = |key: Vec<Slot>, s: LaurentSeries, acc: &mut BTreeMap<Vec<Slot>, LaurentSeries>| -> Result<(), SeriesError> {
                match acc.get_mut(&key) {
                    Some(e) => *e = e.try_add(&s)?,
                    None => {
                        acc.insert(key, s);
                    }
                }
                Ok(())
            };
            // ω_{n+1}^{(g−1)}(z, z̄, J)
            if g > 0 {
                if g == 1 && n == 1 {
                    push(Vec::new(), bd.bergmann_diagonal(), &mut bracket)?;
                } else {
                    let f = self.stored(g - 1, n + 1).expect("memoized");
                    for (key, s) in bd.expand_slot01(&f)? {
                        push(key, s, &mut bracket)?;
                    }
                }
            }
            // Σ' ω(z, I₁) ω(z̄, I₂)
            let mmax = order;
            let mut local_cache: HashMap<(u32, usize, Sheet), Local> = HashMap::new();
            for mask in 0u32..(1 << spect) {
                let i1: Vec<usize> = (0..spect).filter(|i| mask >> i & 1 == 1).collect();
                let i2: Vec<usize> = (0..spect).filter(|i| mask >> i & 1 == 0).collect();
                for h in 0..=g {
                    let (h1, n1) = (h, i1.len() + 1);
                    let (h2, n2) = (g - h, i2.len() + 1);
                    if (h1, n1) == (0, 1) || (h2, n2) == (0, 1) {
                        continue;
                    }
                    let mut side = |hh: u32, nn: usize, sheet: Sheet, bd: &mut BranchData| -> Result<Local, SeriesError> {
                        if let Some(l) = local_cache.get(&(hh, nn, sheet)) {
                            return Ok(l.clone());
                        }
                        let l = if (hh, nn) == (0, 2) {
                            bd.bergmann_spectator(sheet, mmax)?
                        } else {
                            let f = self.stored(hh, nn).expect("memoized");
                            bd.expand_slot0(&f, sheet)?
                        };
                        local_cache.insert((hh, nn, sheet), l.clone());
                        Ok(l)
                    };
                    let left = side(h1, n1, Sheet::Direct, &mut bd)?;
                    let right = side(h2, n2, Sheet::Conjugate, &mut bd)?;
                    for (k1, s1) in &left {
                        let v1 = s1.valuation();
                        for (k2, s2) in &right {
                            // only coefficients through t^0 matter
                            if s1.is_zero() || s2.is_zero() || v1 + s2.valuation() > 0 {
                                continue;
                            }
                            let prod = s1.try_mul(s2)?.truncate(1);
                            let mut key = vec![(0i8, 0u8); spect];
                            for (pos, slot) in i1.iter().zip(k1) {
                                key[*pos] = *slot;
                            }
                            for (pos, slot) in i2.iter().zip(k2) {
                                key[*pos] = *slot;
                            }
                            push(key, prod, &mut bracket)?;
                        }
                    }
                }
            }
            // residues against the kernel
            let mut kernels: Vec<LaurentSeries> = Vec::new();
            for (key, f) in bracket {
                if f.is_zero() {
                    continue;
                }
                let mtop = 1 - f.valuation();
                for m in 1..=mtop {
                    while kernels.len() < m as usize {
                        kernels.push(bd.kernel(kernels.len() as i64 + 1)?);
                    }
                    let r = kernels[m as usize - 1].try_mul(&f)?.coeff(-1)?;
                    if !r.is_zero() {
                        let mut full = Vec::with_capacity(n);
                        full.push((a, (m + 1) as u8));
                        full.extend_from_slice(&key);
                        out.add_term(full, r);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Coefficient of `t^{-1}`, failing when it lies beyond the known order.
pub fn residue_at_branchpoint(s: &LaurentSeries) -> Result<Q, SeriesError> {
    s.residue()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qi};

    #[test]
    fn omega_0_3_is_half_on_each_sheet() {
        let mut tr = TopRec::new();
        let w = tr.omega(0, 3).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w.coeff(&[(1, 2), (1, 2), (1, 2)]), q(1, 2));
        assert_eq!(w.coeff(&[(-1, 2), (-1, 2), (-1, 2)]), q(1, 2));
    }

    #[test]
    fn omega_1_1_coefficients() {
        let mut tr = TopRec::new();
        let w = tr.omega(1, 1).unwrap();
        let want = [
            ((1, 2), q(-1, 48)),
            ((1, 3), q(1, 16)),
            ((1, 4), q(1, 16)),
            ((-1, 2), q(-1, 48)),
            ((-1, 3), q(-1, 16)),
            ((-1, 4), q(1, 16)),
        ];
        assert_eq!(w.len(), want.len());
        for (slot, c) in want {
            assert_eq!(w.coeff(&[slot]), c, "{slot:?}");
        }
    }

    #[test]
    fn omega_2_1_closed_form() {
        let mut tr = TopRec::new();
        let w = tr.omega(2, 1).unwrap();
        let z = qi(3);
        let z2 = &z * &z;
        let inner = Poly::from_ints(&[7, 0, -52, 0, 7985, 0, 34520, 0, 7985, 0, -52, 0, 7]).eval(&z);
        let want = &z2 * (&z2 + qi(1)) * inner / (qi(960) * (&z - qi(1)).pow(10) * (&z + qi(1)).pow(10));
        assert_eq!(w.eval(&[z]), want);
    }

    #[test]
    fn symmetric_in_spectators() {
        let mut tr = TopRec::new();
        assert!(tr.omega(0, 4).unwrap().is_symmetric());
        assert!(tr.omega(1, 2).unwrap().is_symmetric());
    }

    #[test]
    fn unstable_rejected() {
        let mut tr = TopRec::new();
        assert_eq!(tr.omega(0, 2).unwrap_err(), TrError::Unstable(0, 2));
    }
}

#[cfg(test)]
mod more_tests {
    use super::*;
    use crate::exact::qi;

    #[test]
    fn f_gn_vanishes_at_base_point() {
        let mut tr = TopRec::new();
        assert_eq!(tr.f_gn(1, 1).unwrap().eval(&[qi(0)]), qi(0));
    }

    #[test]
    fn f_0_3_differentiates_back() {
        let mut tr = TopRec::new();
        let w = tr.omega(0, 3).unwrap();
        let f = tr.f_gn(0, 3).unwrap();
        // slot 1 with the other slots at fixed values
        let (z2, z3) = (qi(5), Q::new(7.into(), 3.into()));
        let mut prim = RatFunc::zero(Var::Z);
        let mut dens = RatFunc::zero(Var::Z);
        for (key, c) in &f.coeffs {
            let rest = Primitive { arity: 2, coeffs: [(key[1..].to_vec(), c.clone())].into() }.eval(&[z2.clone(), z3.clone()]);
            let single = Primitive { arity: 1, coeffs: [(vec![key[0]], rest)].into() };
            prim = prim.add(&single.to_ratfunc());
        }
        for (key, c) in &w.coeffs {
            let mut rest = PoleBasisForm::new(2);
            rest.add_term(key[1..].to_vec(), c.clone());
            let mut single = PoleBasisForm::new(1);
            let v = Primitive::from_form(&rest).eval(&[z2.clone(), z3.clone()]);
            single.add_term(vec![key[0]], v);
            dens = dens.add(&single.to_ratfunc());
        }
        assert_eq!(prim.deriv(), dens);
    }

    #[test]
    fn reflection_parity() {
        let mut tr = TopRec::new();
        for (g, n) in [(0, 3), (1, 1), (0, 4), (1, 2), (2, 1)] {
            let w = tr.omega(g, n).unwrap();
            let sign = if n % 2 == 0 { qi(1) } else { qi(-1) };
            assert_eq!(w.reflect(), w.scale(&sign), "({g},{n})");
        }
    }

    #[test]
    fn memo_is_deterministic() {
        let mut a = TopRec::new();
        let cold = a.omega(2, 1).unwrap();
        let warm = a.omega(2, 1).unwrap();
        let mut b = TopRec::new();
        assert_eq!(*cold, *warm);
        assert_eq!(*cold, *b.omega(2, 1).unwrap());
    }

    #[test]
    fn single_slot_pole_bound() {
        let mut tr = TopRec::new();
        for g in 1..=3u32 {
            assert!(tr.omega(g, 1).unwrap().max_pole_order() as u32 <= 6 * g - 2);
        }
    }
}
