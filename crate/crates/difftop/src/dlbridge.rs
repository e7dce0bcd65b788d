//! Between the difference matrix `L(x;ℏ)` and the differential matrix
//! `D(x;ℏ)` with `ℏ ∂ₓΨ = DΨ`, `Ψ(x+ℏ) = LΨ(x)`.
//!
//! `D` lives in `Q(z)[λ]`, `λ = ln z`. Its parts carry poles at `z = ±1` that
//! cancel against `λ` read on the local branch vanishing there, so regularity
//! is always tested on local expansions rather than on the parts.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::curve::{d_dx_log, d_dx_log_n, sqrt_delta, x_of_z};
use crate::report::Report;
use crate::exact::{
    binomial, factorial, integrate_log, HbarSeries, IntegrationError, LogElement, Mat2, Poly, Q, RatFunc, Ring,
    SeriesError, Var,
};

pub type LMat = Mat2<LogElement>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DlError {
    #[error("quadrature for D_{k}: {source}")]
    NonIntegrableResidue { k: usize, source: Box<IntegrationError> },
    #[error("D_{k} keeps a pole at z = -1 after normalizing at z = +1")]
    ResidualPoleAtMinusOne { k: usize },
    #[error("D_{k} is singular at z = +1 before normalization")]
    IrregularAtPlusOne { k: usize },
    #[error("L0 is not [[x, -1], [1, 0]]")]
    NotP1,
    #[error("series: {0}")]
    Series(#[from] SeriesError),
}

fn lz(f: RatFunc) -> LogElement {
    LogElement::from_rat(f)
}

fn rz(num: &[i64], den: &[i64]) -> RatFunc {
    RatFunc::new(Poly::from_ints(num), Poly::from_ints(den), Var::Z).unwrap()
}

pub fn lift(m: &Mat2<RatFunc>) -> LMat {
    m.map(|f| lz(f.clone()))
}

/// `N = (L₀ − (x/2) I)/√(x²−4)`, with `N² = I/4`.
pub fn n_matrix() -> Mat2<RatFunc> {
    let a = rz(&[1, 0, 1], &[-2, 0, 2]);
    let b = rz(&[0, -1], &[-1, 0, 1]);
    Mat2::new(a.clone(), b.clone(), b.neg(), a.neg())
}

/// `D₀ = ln(z²)·N`, the logarithm of `L₀` with `exp(D₀) = L₀`.
pub fn d0_p1() -> LMat {
    n_matrix().map(|f| LogElement::term(f.scale(&Q::from_integer(2.into())), 1))
}

/// The same matrix with the opposite diagonal signs.
pub fn d0_flipped_diagonal() -> LMat {
    let d = d0_p1();
    Mat2::new(d.e[0][0].neg(), d.e[0][1].clone(), d.e[1][0].clone(), d.e[1][1].neg())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExpError {
    #[error("not of the form ln(z^2) A")]
    NotLogMultiple,
    #[error("A^2 is not I/4")]
    NotHalfInvolution,
}

/// `exp(ln(z²)·A)` for `A² = I/4`: `cosh(ln z) I + 2 sinh(ln z) A`.
pub fn exp_log_multiple(d: &LMat) -> Result<Mat2<RatFunc>, ExpError> {
    let mut a = Vec::with_capacity(4);
    for e in d.entries() {
        if e.parts().keys().any(|&j| j != 1) {
            return Err(ExpError::NotLogMultiple);
        }
        a.push(e.part(1).scale(&Q::new(1.into(), 2.into())));
    }
    let a = Mat2::new(a[0].clone(), a[1].clone(), a[2].clone(), a[3].clone());
    let quarter = Mat2::identity_from(&RatFunc::one(Var::Z)).scale(&Q::new(1.into(), 4.into()));
    if a.mul(&a) != quarter {
        return Err(ExpError::NotHalfInvolution);
    }
    let cosh = rz(&[1, 0, 1], &[0, 2]);
    let sinh2 = sqrt_delta();
    Ok(Mat2::identity_from(&cosh).scale_by(&cosh).add(&a.scale_by(&sinh2)))
}

/// `d^j/dx^j` entrywise.
pub fn dx_lmat(m: &LMat, j: usize) -> LMat {
    if j == 0 {
        return m.clone();
    }
    m.map(|e| d_dx_log_n(e, j))
}

fn l_at(l: &[Mat2<RatFunc>], i: usize) -> Option<LMat> {
    l.get(i).filter(|m| !m.vanishes()).map(lift)
}

/// `O_k` with `[L₀, D_k] = O_k`, assembled from `D₀..D_{k−1}`.
pub fn o_matrix(k: usize, tower: &[LMat], l: &[Mat2<RatFunc>]) -> LMat {
    let mut acc = tower[0].zero_like();
    for (i, di) in tower.iter().enumerate().take(k) {
        for lo in 0..=(k - i) {
            let Some(ll) = l_at(l, lo) else { continue };
            let j = k - i - lo;
            acc = acc.add(&dx_lmat(di, j).scale(&factorial(j as u32).recip()).mul(&ll));
        }
    }
    if let Some(lp) = l_at(l, k - 1) {
        acc = acc.sub(&dx_lmat(&lp, 1));
    }
    for lo in 1..=k {
        if let Some(ll) = l_at(l, lo) {
            acc = acc.sub(&ll.mul(&tower[k - lo]));
        }
    }
    acc
}

/// `R_{k−1}` with `Tr(D_k′ L₀) = Tr R_{k−1}`: the order-`k+1` compatibility
/// data from `D₀..D_{k−1}` (the `D_k L₁ − L₁ D_k` pair is traceless and dropped).
pub fn r_matrix(k: usize, tower: &[LMat], l: &[Mat2<RatFunc>]) -> LMat {
    let mut acc = tower[0].zero_like();
    if let Some(lk) = l_at(l, k) {
        acc = acc.add(&dx_lmat(&lk, 1));
    }
    for lo in 2..=(k + 1) {
        if let Some(ll) = l_at(l, lo) {
            acc = acc.add(&ll.mul(&tower[k + 1 - lo]));
        }
    }
    for (i, di) in tower.iter().enumerate().take(k) {
        for lo in 0..=(k + 1 - i) {
            let Some(ll) = l_at(l, lo) else { continue };
            let j = k + 1 - i - lo;
            acc = acc.sub(&dx_lmat(di, j).scale(&factorial(j as u32).recip()).mul(&ll));
        }
    }
    acc
}

/// Leading coefficient of the ODE for `(D_k)₁₂`: `(L₁₁ − L₂₂)² + 4 L₁₂ L₂₁`.
pub fn ode_coefficient(l0: &Mat2<RatFunc>) -> RatFunc {
    let d = l0.get(0, 0).sub(l0.get(1, 1));
    d.mul(&d).add(&l0.get(0, 1).mul(l0.get(1, 0)).scale(&Q::from_integer(4.into())))
}

fn is_p1(l0: &Mat2<RatFunc>) -> bool {
    *l0.get(0, 0) == x_of_z()
        && l0.get(0, 1).as_constant() == Some(-Q::one())
        && l0.get(1, 0).as_constant() == Some(Q::one())
        && l0.get(1, 1).is_zero()
}

/// Value at `z = a` on the local branch, or `None` when singular there.
pub fn local_value(e: &LogElement, a: &Q) -> Result<Option<Q>, SeriesError> {
    if e.is_zero() {
        return Ok(Some(Q::zero()));
    }
    let s = e.expand_at_branchpoint(a, 0)?;
    if s.valuation() < 0 && (s.valuation()..0).any(|n| !s.coeff(n).map(|c| c.is_zero()).unwrap_or(false)) {
        return Ok(None);
    }
    Ok(Some(s.coeff(0)?))
}

/// True when every entry is regular at `z = a` on the local branch.
pub fn regular_at(m: &LMat, a: &Q) -> Result<bool, SeriesError> {
    for e in m.entries() {
        if local_value(e, a)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `D_k` from `D₀..D_{k−1}` and the `L` coefficients (in the `z` chart).
pub fn d_from_l(k: usize, tower: &[LMat], l: &[Mat2<RatFunc>]) -> Result<LMat, DlError> {
    assert!(k >= 1 && tower.len() == k, "tower must hold D_0..D_(k-1)");
    if !is_p1(&l[0]) {
        return Err(DlError::NotP1);
    }
    let x = lz(x_of_z());
    let o = o_matrix(k, tower, l);
    let r = r_matrix(k, tower, l);
    // (x²−4) b′ + x b = −2 Tr R + x O₁₂′ + 2 O₁₁′
    let f = r
        .trace()
        .scale(&Q::from_integer((-2).into()))
        .add(&x.mul(&d_dx_log(o.get(0, 1))))
        .add(&d_dx_log(o.get(0, 0)).scale(&Q::from_integer(2.into())));
    // b = h/√(x²−4), dh/dz = F/z
    let inv_z = rz(&[1], &[0, 1]);
    let h = integrate_log(&f.mul_rat(&inv_z)).map_err(|source| DlError::NonIntegrableResidue { k, source: Box::new(source) })?;
    let one = Q::one();
    let h1 = local_value(&h, &one)?.ok_or(DlError::IrregularAtPlusOne { k })?;
    let h = h.sub(&LogElement::constant(h1));
    let b = h.mul_rat(&sqrt_delta().recip().unwrap());
    if local_value(&b, &-one.clone())?.is_none() {
        return Err(DlError::ResidualPoleAtMinusOne { k });
    }
    let half = Q::new(1.into(), 2.into());
    let a = x.mul(&b).scale(&-half.clone()).add(&o.get(0, 1).scale(&half));
    let c = b.neg().sub(o.get(0, 0));
    let d = Mat2::new(a.clone(), b, c, a.neg());
    if !regular_at(&d, &-Q::one())? {
        return Err(DlError::ResidualPoleAtMinusOne { k });
    }
    Ok(d)
}

/// `D₀, …, D_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DTower {
    pub orders: Vec<LMat>,
}

impl DTower {
    /// The ℙ¹ tower for `L = [[x + μℏ, −1], [1, 0]]`.
    pub fn p1(k_max: usize, shift: &Q) -> Result<DTower, DlError> {
        let l = crate::diffsys::l_coeffs_z(&crate::diffsys::l_p1(shift), 1);
        let mut orders = vec![d0_p1()];
        for k in 1..=k_max {
            let dk = d_from_l(k, &orders, &l)?;
            orders.push(dk);
        }
        Ok(DTower { orders })
    }

    pub fn get(&self, k: usize) -> &LMat {
        &self.orders[k]
    }

    pub fn top(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn to_hbar(&self) -> HbarSeries<LMat> {
        HbarSeries::new(0, self.orders.clone())
    }

    pub fn to_json(&self) -> Vec<serde_json::Value> {
        self.orders
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let e = |i: usize, j: usize| serde_json::to_value(m.get(i, j).to_json()).unwrap();
                serde_json::json!({"k": k, "entries": [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]})
            })
            .collect()
    }
}

/// Order-`k` residual of `ℏL′ + LD − D(x+ℏ)L`.
pub fn compatibility_residual(k: usize, tower: &[LMat], l: &[Mat2<RatFunc>]) -> LMat {
    let mut acc = tower[0].zero_like();
    if k >= 1 {
        if let Some(lp) = l_at(l, k - 1) {
            acc = acc.add(&dx_lmat(&lp, 1));
        }
    }
    for (i, di) in tower.iter().enumerate().take(k + 1) {
        if let Some(ll) = l_at(l, k - i) {
            acc = acc.add(&ll.mul(di));
        }
        for lo in 0..=(k - i) {
            let Some(ll) = l_at(l, lo) else { continue };
            let j = k - i - lo;
            acc = acc.sub(&dx_lmat(di, j).scale(&factorial(j as u32).recip()).mul(&ll));
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompatReport {
    pub checked_through: usize,
    pub first_nonzero: Option<usize>,
}

pub fn compatibility_check(tower: &[LMat], l: &[Mat2<RatFunc>], k_max: usize) -> CompatReport {
    let top = k_max.min(tower.len() - 1);
    let first_nonzero = (0..=top).find(|&k| !compatibility_residual(k, tower, l).vanishes());
    CompatReport { checked_through: top, first_nonzero }
}

/// `A₀ = I`, `A_k = Σ_i C(k−1, i) ℏ^{k−1−i} ∂^{k−1−i}D · A_i`, truncated at `ℏ^K`.
pub fn a_sequence(tower: &[LMat], count: usize) -> Vec<HbarSeries<LMat>> {
    let top = tower.len() as i32 - 1;
    let d = HbarSeries::new(0, tower.to_vec());
    let id = Mat2::identity_from(&LogElement::zero());
    let mut out = vec![HbarSeries::constant(id, top)];
    let mut derivs = vec![d.clone()];
    for k in 1..count {
        // ℏ^e ∂^e D only contributes through order top − e
        while derivs.len() < k && (derivs.len() as i32) <= top {
            let e = derivs.len() as i32;
            let last = derivs.last().unwrap().truncate(top - e);
            derivs.push(last.map(|m| dx_lmat(m, 1)));
        }
        let mut acc: Option<HbarSeries<LMat>> = None;
        for (i, ai) in out.iter().enumerate() {
            let e = k - 1 - i;
            if e as i32 > top {
                continue;
            }
            let term = derivs[e].shift(e as i32).mul(ai).scale(&binomial(k as i64 - 1, i as i64)).truncate(top);
            acc = Some(match acc {
                Some(a) => a.add(&term),
                None => term,
            });
        }
        out.push(acc.unwrap());
    }
    out
}

/// `Σ_{k<count} A_k/k!`. This converges to `L` only as `count → ∞`.
pub fn l_partial_sum(tower: &[LMat], count: usize) -> HbarSeries<LMat> {
    let a = a_sequence(tower, count);
    let mut acc = a[0].clone();
    for (k, ak) in a.iter().enumerate().skip(1) {
        acc = acc.add(&ak.scale(&factorial(k as u32).recip()));
    }
    acc
}

/// Exponential polynomial in `σ`: `Σ σ^p e^{cλσ} M_{p,c}`.
#[derive(Debug, Clone, Default)]
struct ExpPoly {
    terms: BTreeMap<(u32, i32), LMat>,
}

impl ExpPoly {
    fn add_term(&mut self, p: u32, c: i32, m: LMat) {
        if m.vanishes() {
            return;
        }
        match self.terms.get_mut(&(p, c)) {
            Some(e) => {
                *e = e.add(&m);
                if e.vanishes() {
                    self.terms.remove(&(p, c));
                }
            }
            None => {
                self.terms.insert((p, c), m);
            }
        }
    }

    /// `(Σ σ^j E_j) · self` for a polynomial in `σ`.
    fn left_mul_poly(&self, poly: &[(u32, LMat)], out: &mut ExpPoly) {
        for (j, e) in poly {
            for ((p, c), m) in &self.terms {
                out.add_term(p + j, *c, e.mul(m));
            }
        }
    }

    /// Value at `σ = 1`, where `e^{cλ} = z^c`.
    fn at_one(&self) -> LMat {
        let mut acc = Mat2::zero_from(&LogElement::zero());
        for ((_, c), m) in &self.terms {
            let zc = RatFunc::var_fn(Var::Z).powi(*c).unwrap();
            acc = acc.add(&m.map(|e| e.mul_rat(&zc)));
        }
        acc
    }
}

/// `∫₀^τ σ^p e^{dλσ} dσ` as an exponential polynomial in `τ` with scalar coefficients.
fn integrate_exp(p: u32, d: i32) -> Vec<(u32, i32, LogElement)> {
    if d == 0 {
        return vec![(p + 1, 0, LogElement::constant(Q::new(1.into(), (p as i64 + 1).into())))];
    }
    let dq = Q::from_integer(d.into());
    let mut out = Vec::new();
    let pf = factorial(p);
    for i in 0..=p {
        let sign = if i % 2 == 0 { Q::one() } else { -Q::one() };
        let c = sign * &pf / factorial(p - i) / dq.pow(i as i32 + 1);
        out.push((p - i, d, LogElement::term(RatFunc::constant(c, Var::Z), -(i as i32 + 1))));
    }
    let sign = if p.is_multiple_of(2) { -Q::one() } else { Q::one() };
    out.push((0, 0, LogElement::term(RatFunc::constant(sign * &pf / dq.pow(p as i32 + 1), Var::Z), -(p as i32 + 1))));
    out
}

/// `L(x;ℏ) = Ψ(x+ℏ)Ψ(x)^{-1}` through `ℏ^K`, by solving `dU/dτ = D(x+ℏτ)U`,
/// `U(0) = I` order by order in `ℏ` and evaluating at `τ = 1`. `D₀` must be
/// `ln(z²)·N` with `N² = I/4`, so `exp(τD₀)` is `z^τ P₊ + z^{−τ} P₋`.
pub fn l_from_d(tower: &[LMat], k_max: usize) -> HbarSeries<LMat> {
    let n = lift(&n_matrix());
    let id = Mat2::identity_from(&LogElement::zero());
    let half = Q::new(1.into(), 2.into());
    let p_plus = id.scale(&half).add(&n);
    let p_minus = id.scale(&half).sub(&n);
    let k_max = k_max.min(tower.len() - 1);
    // E_m(σ) = Σ_{i+j=m} σ^j/j! ∂^j D_i
    let e_poly: Vec<Vec<(u32, LMat)>> = (0..=k_max)
        .map(|m| (0..=m).map(|i| (( m - i) as u32, dx_lmat(&tower[i], m - i).scale(&factorial((m - i) as u32).recip()))).collect())
        .collect();
    let mut u: Vec<ExpPoly> = Vec::new();
    let mut u0 = ExpPoly::default();
    u0.add_term(0, 1, p_plus.clone());
    u0.add_term(0, -1, p_minus.clone());
    u.push(u0);
    for order in 1..=k_max {
        let mut r = ExpPoly::default();
        for m in 1..=order {
            u[order - m].left_mul_poly(&e_poly[m], &mut r);
        }
        let mut un = ExpPoly::default();
        for (sgn, proj) in [(1i32, &p_plus), (-1i32, &p_minus)] {
            for ((p, c), mat) in &r.terms {
                let pm = proj.mul(mat);
                for (q, d, coef) in integrate_exp(*p, c - sgn) {
                    un.add_term(q, d + sgn, pm.map(|e| e.mul(&coef)));
                }
            }
        }
        u.push(un);
    }
    HbarSeries::new(0, u.iter().map(ExpPoly::at_one).collect())
}

/// Rational form of a log-element matrix, when all `λ` powers cancelled.
pub fn as_rational(m: &LMat) -> Option<Mat2<RatFunc>> {
    let e: Vec<RatFunc> = m.entries().iter().map(|e| e.as_rational()).collect::<Option<_>>()?;
    Some(Mat2::new(e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone()))
}

/// True when every part's denominator vanishes only at `z ∈ {0, ±1}`.
pub fn poles_in_zero_and_branchpoints(m: &LMat) -> bool {
    let allowed = [Poly::var(), Poly::from_ints(&[-1, 1]), Poly::from_ints(&[1, 1])];
    m.entries().iter().all(|e| {
        e.parts().values().all(|f| {
            let mut d = f.den().clone();
            for a in &allowed {
                loop {
                    let (qq, r) = d.divrem(a);
                    if !r.is_zero() {
                        break;
                    }
                    d = qq;
                }
            }
            d.is_constant()
        })
    })
}

fn first_bad_order(h: &HbarSeries<LMat>, want: &[Mat2<RatFunc>]) -> Option<String> {
    for k in h.start()..=h.top() {
        let got = h.coeff(k).unwrap();
        let target = want.get(k as usize).cloned().unwrap_or_else(|| Mat2::zero_from(&RatFunc::zero(Var::Z)));
        match as_rational(&got) {
            Some(r) if r == target => {}
            Some(_) => return Some(format!("order hbar^{k} differs from L")),
            None => return Some(format!("order hbar^{k} keeps ln z")),
        }
    }
    None
}

/// The bridge between `D` and `L` through `D_K`: `exp(D₀) = L₀`, regularity of
/// each `D_k` at `z = ±1` with poles of the parts only at `0, ±1`,
/// compatibility, the literal sum `Σ_{k<count} A_k/k!` and the resummed `L`.
pub fn bridge_check(tower: &DTower, l: &[Mat2<RatFunc>], count: usize) -> Report {
    let mut rep = Report::new("roundtrip");
    let exp = exp_log_multiple(tower.get(0));
    rep.push(
        "exp-d0",
        match exp {
            Ok(e) if e == l[0] => None,
            Ok(_) => Some("exp(D0) differs from L0".into()),
            Err(e) => Some(e.to_string()),
        },
    );
    let mut fail = None;
    for (k, d) in tower.orders.iter().enumerate() {
        let reg = [Q::one(), -Q::one()].iter().all(|a| regular_at(d, a).unwrap_or(false));
        if !reg || !poles_in_zero_and_branchpoints(d) {
            fail = Some(format!("D{k}"));
            break;
        }
    }
    rep.push("regular", fail);
    let c = compatibility_check(&tower.orders, l, tower.top());
    rep.push("compatibility", c.first_nonzero.map(|k| format!("order {k}")));
    rep.push("a-sum-literal", first_bad_order(&l_partial_sum(&tower.orders, count), l));
    rep.push("a-sum-resummed", first_bad_order(&l_from_d(&tower.orders, tower.top()), l));
    rep
}

/// Candidate `Γ` for `Γ^{-1} D^t Γ = D|_{ℏ→−ℏ}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityProbe {
    pub gamma: [[i64; 2]; 2],
    /// Per order `k`: does `Γ^{-1} D_kᵗ Γ = (−1)^k D_k` hold.
    pub holds: Vec<bool>,
}

pub fn parity_conjugation_probe(tower: &[LMat], k_max: usize) -> Vec<ParityProbe> {
    let candidates = [[[0, 1], [-1, 0]], [[0, -1], [1, 0]], [[1, 0], [0, -1]], [[-1, 0], [0, 1]], [[1, 0], [0, 1]]];
    let top = k_max.min(tower.len() - 1);
    candidates
        .iter()
        .map(|g| {
            let q = |v: i64| LogElement::constant(Q::from_integer(v.into()));
            let gm = Mat2::new(q(g[0][0]), q(g[0][1]), q(g[1][0]), q(g[1][1]));
            let gi = gm.inv().unwrap();
            let holds = (0..=top)
                .map(|k| {
                    let lhs = gi.mul(&tower[k].transpose()).mul(&gm);
                    let rhs = if k % 2 == 0 { tower[k].clone() } else { tower[k].neg() };
                    lhs == rhs
                })
                .collect();
            ParityProbe { gamma: *g, holds }
        })
        .collect()
}

/// Numerical value of a log element at real `z > 0` with `λ = ln z`.
pub fn eval_f64(e: &LogElement, z: f64) -> f64 {
    let lam = z.ln();
    e.parts()
        .iter()
        .map(|(j, f)| {
            let n = eval_poly_f64(f.num(), z);
            let d = eval_poly_f64(f.den(), z);
            n / d * lam.powi(*j)
        })
        .sum()
}

fn eval_poly_f64(p: &Poly, z: f64) -> f64 {
    use num_traits::ToPrimitive;
    p.coeffs().iter().rev().fold(0.0, |acc, c| acc * z + c.to_f64().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffsys::{l_coeffs_z, l_p1, m_p1};
    use crate::exact::{q, qi};

    fn l_half() -> Vec<Mat2<RatFunc>> {
        l_coeffs_z(&l_p1(&q(1, 2)), 1)
    }

    #[test]
    fn exp_of_d0_is_l0() {
        let e = exp_log_multiple(&d0_p1()).unwrap();
        assert_eq!(e, l_half()[0]);
        assert!(d0_p1().trace().is_zero());
    }

    #[test]
    fn flipped_diagonal_exponentiates_elsewhere() {
        let e = exp_log_multiple(&d0_flipped_diagonal()).unwrap();
        let x = x_of_z();
        let want = Mat2::new(RatFunc::zero(Var::Z), RatFunc::constant(-Q::one(), Var::Z), RatFunc::one(Var::Z), x);
        assert_eq!(e, want);
    }

    #[test]
    fn d0_offdiagonal_limit_at_one() {
        assert_eq!(local_value(d0_p1().get(0, 1), &qi(1)).unwrap(), Some(qi(-1)));
        assert!(regular_at(&d0_p1(), &qi(1)).unwrap());
        assert!(regular_at(&d0_p1(), &qi(-1)).unwrap());
    }

    #[test]
    fn first_order_closed_form() {
        let t = DTower::p1(2, &q(1, 2)).unwrap();
        // D1 off-diagonal: λ z²(z²+1)/(z²−1)³ − z²/(z²−1)²
        let lam = LogElement::term(rz(&[0, 0, 1, 0, 1], &[-1, 0, 3, 0, -3, 0, 1]), 1);
        let want = lam.sub(&lz(rz(&[0, 0, 1], &[1, 0, -2, 0, 1])));
        assert_eq!(*t.get(1).get(0, 1), want);
        assert_eq!(*t.get(1).get(1, 0), want);
        assert!(t.get(1).get(0, 0).is_zero());
        // λ-part of D_k is 2 M_k
        let m = m_p1(2, &q(1, 2));
        for k in 1..=2 {
            for (d, mk) in t.get(k).entries().iter().zip(m.get(k).entries()) {
                assert_eq!(d.part(1), mk.scale(&qi(2)));
            }
        }
    }

    #[test]
    fn tower_is_compatible() {
        let t = DTower::p1(3, &q(1, 2)).unwrap();
        let r = compatibility_check(&t.orders, &l_half(), 3);
        assert_eq!(r.first_nonzero, None);
        for d in &t.orders {
            assert!(d.trace().is_zero());
        }
    }

    #[test]
    fn perturbed_tower_fails_at_first_order() {
        let mut t = DTower::p1(2, &q(1, 2)).unwrap();
        t.orders[1].e[0][1] = t.orders[1].e[0][1].add(&LogElement::constant(qi(1)));
        let r = compatibility_check(&t.orders, &l_half(), 2);
        assert_eq!(r.first_nonzero, Some(1));
    }

    #[test]
    fn resummed_round_trip() {
        let t = DTower::p1(3, &q(1, 2)).unwrap();
        let l = l_from_d(&t.orders, 3);
        let want = l_half();
        for k in 0..=3 {
            let got = as_rational(&l.coeff(k).unwrap()).expect("λ cancels");
            let w = want.get(k as usize).cloned().unwrap_or_else(|| Mat2::zero_from(&RatFunc::zero(Var::Z)));
            assert_eq!(got, w, "order {k}");
        }
    }

    #[test]
    fn bridge_report() {
        let t = DTower::p1(2, &q(1, 2)).unwrap();
        let rep = bridge_check(&t, &l_half(), 9);
        for id in ["exp-d0", "regular", "compatibility", "a-sum-resummed"] {
            assert!(rep.clause(id).unwrap().pass, "{id}: {rep:?}");
        }
        // the truncated exponential misses L₀ already at order 0
        assert_eq!(rep.clause("a-sum-literal").unwrap().first_failure.as_deref(), Some("order hbar^0 keeps ln z"));
    }

    #[test]
    fn a_sequence_start() {
        let t = DTower::p1(2, &q(1, 2)).unwrap();
        let a = a_sequence(&t.orders, 3);
        assert_eq!(a[0].coeff(0).unwrap(), Mat2::identity_from(&LogElement::zero()));
        for k in 0..=2 {
            assert_eq!(a[1].coeff(k).unwrap(), t.orders[k as usize]);
        }
    }

    #[test]
    fn ode_coefficient_is_discriminant() {
        let s = sqrt_delta();
        assert_eq!(ode_coefficient(&l_half()[0]), s.mul(&s));
    }

    #[test]
    fn traceless_transpose_identity() {
        let q = |v: i64| LogElement::constant(qi(v));
        let b = Mat2::new(q(3), q(5), q(-7), q(-3));
        let j = Mat2::new(q(0), q(-1), q(1), q(0));
        let jt = Mat2::new(q(0), q(1), q(-1), q(0));
        assert_eq!(j.mul(&b.transpose()).mul(&jt), b.neg());
    }

    #[test]
    fn identity_gamma_fails_at_order_zero() {
        let t = DTower::p1(1, &q(1, 2)).unwrap();
        let probes = parity_conjugation_probe(&t.orders, 1);
        let id = probes.iter().find(|p| p.gamma == [[1, 0], [0, 1]]).unwrap();
        assert!(!id.holds[0]);
    }
}
