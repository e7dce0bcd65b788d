//! Determinantal correlators `W_n` built from the idempotent `M`, the `W₁`
//! recursion, the loop equations and the topological-type audits.
//!
//! `n`-point objects are evaluated, never stored multivariate. The ring picks
//! the mode: `Q` for samples, `RatFunc` for one symbolic point,
//! `EpsSeries<MPoly>` for limits, residues and derivatives with a formal `λ`
//! per point, and `Frac` for the two-variable Bergmann identity.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::{d_dx_log_n, d_dx_n, dx_dz, dz_dx, x_of_z};
use crate::diffsys::MTower;
use crate::dlbridge::{lift, DTower};
use crate::exact::{
    antiderivative, factorial, fmt_q, EpsSeries, Frac, HbarSeries, IntegrationError, LogElement, MPoly, Mat2, Q,
    RatFunc, Ring, SplitFrac,
};
use crate::report::Report;
use crate::toprec::{TopRec, TrError};

pub type Eps = EpsSeries<MPoly>;

#[derive(Debug, thiserror::Error)]
pub enum CorrError {
    #[error("quadrature for W1^({k}): {source}")]
    NonIntegrableResidue { k: usize, source: Box<IntegrationError> },
    #[error("W1^({k}) picked up a logarithm")]
    Logarithmic { k: usize },
    #[error("W1^({k}) grows at z = infinity")]
    GrowsAtInfinity { k: usize },
    #[error("tower holds orders 0..={have}, need {need}")]
    TowerTooShort { need: usize, have: usize },
    #[error("points must be pairwise distinct in x and avoid z = 0, 1, -1")]
    DegeneratePoints,
    #[error("evaluation hit a pole")]
    Pole,
    #[error("a logarithm was needed at a point that carries none")]
    NoLogarithm,
    #[error("eps expansion ran out of precision")]
    Precision,
    #[error("coincident-point limit does not exist")]
    NoLimit,
    #[error(transparent)]
    Tr(#[from] TrError),
}

/// A point with its `x` value and, optionally, the value of `λ = ln z` there.
#[derive(Debug, Clone)]
pub struct Pt<R> {
    pub z: R,
    pub x: R,
    pub lam: Option<R>,
}

impl<R: Ring> Pt<R> {
    pub fn new(z: R, lam: Option<R>) -> Result<Self, CorrError> {
        let x = x_of_z().eval_ring(&z).ok_or(CorrError::Pole)?;
        Ok(Pt { z, x, lam })
    }
}

impl Pt<Q> {
    pub fn rational(z: &Q) -> Result<Self, CorrError> {
        Pt::new(z.clone(), None)
    }
}

/// `z` itself with `λ = λ_i` formal.
pub fn exact_pt(z: &Q, i: usize) -> Result<Pt<Eps>, CorrError> {
    let zz = EpsSeries::constant(MPoly::constant(z.clone()));
    Pt::new(zz, Some(EpsSeries::constant(MPoly::var(i))))
}

/// `z + ε` with `λ = λ_i + ln(1 + ε/z)`, known below `ε^prec`.
pub fn shifted_pt(z: &Q, i: usize, prec: i64) -> Result<Pt<Eps>, CorrError> {
    let zz = EpsSeries::shifted(MPoly::constant(z.clone())).with_precision(prec);
    let r = z.recip();
    let mut c = vec![MPoly::var(i)];
    let mut p = Q::one();
    for k in 1..prec {
        p *= &r;
        let t = &p / Q::from_integer(k.into());
        c.push(MPoly::constant(if k % 2 == 1 { t } else { -t }));
    }
    Pt::new(zz, Some(EpsSeries::from_coeffs(0, c, prec, MPoly::zero())))
}

fn rat_at<R: Ring>(f: &RatFunc, z: &R) -> Result<R, CorrError> {
    f.eval_ring(z).ok_or(CorrError::Pole)
}

fn log_at<R: Ring>(e: &LogElement, pt: &Pt<R>) -> Result<R, CorrError> {
    let mut acc = pt.z.zero_like();
    for (j, f) in e.parts() {
        let v = rat_at(f, &pt.z)?;
        let v = if *j == 0 {
            v
        } else {
            let lam = pt.lam.as_ref().ok_or(CorrError::NoLogarithm)?;
            v.mul(&lam.pow(*j as u32))
        };
        acc = acc.add(&v);
    }
    Ok(acc)
}

/// `Σ_{k≤top} ℏ^k M_k` at a point.
pub fn m_series<R: Ring>(tower: &MTower, pt: &Pt<R>, top: usize) -> Result<HbarSeries<Mat2<R>>, CorrError> {
    if tower.len() <= top {
        return Err(CorrError::TowerTooShort { need: top, have: tower.len().saturating_sub(1) });
    }
    let c = (0..=top).map(|k| tower.get(k).try_map(|f| rat_at(f, &pt.z))).collect::<Result<Vec<_>, _>>()?;
    Ok(HbarSeries::new(0, c))
}

/// `Σ_{k≤top} ℏ^k D_k` at a point.
pub fn d_series<R: Ring>(tower: &DTower, pt: &Pt<R>, top: usize) -> Result<HbarSeries<Mat2<R>>, CorrError> {
    if tower.top() < top {
        return Err(CorrError::TowerTooShort { need: top, have: tower.top() });
    }
    let c = (0..=top).map(|k| tower.get(k).try_map(|e| log_at(e, pt))).collect::<Result<Vec<_>, _>>()?;
    Ok(HbarSeries::new(0, c))
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, first);
            out.push(p);
        }
    }
    out
}

fn trace_series<R: Ring>(h: &HbarSeries<Mat2<R>>) -> HbarSeries<R> {
    h.map(|m| m.trace())
}

/// Determinant of a matrix-valued series (not of each coefficient).
fn det_series<R: Ring>(h: &HbarSeries<Mat2<R>>) -> HbarSeries<R> {
    let e = |i: usize, j: usize| h.map(|m| m.get(i, j).clone());
    e(0, 0).mul(&e(1, 1)).sub(&e(0, 1).mul(&e(1, 0)))
}

/// `W_n` for `n ≥ 2` from the values of `M` and `x` at the points.
/// Cyclic classes are summed once, which absorbs the `1/n`.
pub fn wn_generic<R: Ring>(ms: &[HbarSeries<Mat2<R>>], xs: &[R]) -> Result<HbarSeries<R>, CorrError> {
    let n = ms.len();
    assert!(n >= 2 && xs.len() == n);
    let rest: Vec<usize> = (1..n).collect();
    let mut acc: Option<HbarSeries<R>> = None;
    for p in permutations(&rest) {
        let order: Vec<usize> = std::iter::once(0).chain(p).collect();
        let mut prod = ms[order[0]].clone();
        for &i in &order[1..] {
            prod = prod.mul(&ms[i]);
        }
        let mut tr = trace_series(&prod);
        if n == 2 {
            tr = tr.sub(&HbarSeries::constant(xs[0].one_like(), tr.top()));
        }
        let mut den = xs[0].one_like();
        for a in 0..n {
            den = den.mul(&xs[order[a]].sub(&xs[order[(a + 1) % n]]));
        }
        let term = tr.mul_coeff(&den.inv().ok_or(CorrError::Pole)?);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    let acc = acc.unwrap();
    Ok(if n.is_multiple_of(2) { acc.neg() } else { acc })
}

/// `Q_{n+1}(x; x₁…xₙ) = ℏ⁻¹ Σ_{S_n} Tr(D(x)M(x_σ1)…M(x_σn)) / ((x−x_σ1)…(x_σn−x))`.
pub fn q_generic<R: Ring>(
    d: &HbarSeries<Mat2<R>>,
    x: &R,
    ms: &[HbarSeries<Mat2<R>>],
    xs: &[R],
) -> Result<HbarSeries<R>, CorrError> {
    let n = ms.len();
    assert!(n >= 1 && xs.len() == n);
    let idx: Vec<usize> = (0..n).collect();
    let mut acc: Option<HbarSeries<R>> = None;
    for p in permutations(&idx) {
        let mut prod = d.clone();
        for &i in &p {
            prod = prod.mul(&ms[i]);
        }
        let mut den = x.sub(&xs[p[0]]);
        for a in 0..n - 1 {
            den = den.mul(&xs[p[a]].sub(&xs[p[a + 1]]));
        }
        den = den.mul(&xs[p[n - 1]].sub(x));
        let term = trace_series(&prod).mul_coeff(&den.inv().ok_or(CorrError::Pole)?);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    Ok(acc.unwrap().shift(-1))
}

/// Orders `W₁^{(−1)} = −λ` and rational `W₁^{(k)}`, `k ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct W1Tower {
    pub minus_one: LogElement,
    pub orders: Vec<RatFunc>,
}

/// Solve `Σ_{j≥1} (ℏ^j/j!) ∂^j W₁ = M₁₂` order by order through `W₁^{(k_max)}`.
pub fn w1_tower(tower: &MTower, k_max: usize) -> Result<W1Tower, CorrError> {
    if tower.len() < k_max + 2 {
        return Err(CorrError::TowerTooShort { need: k_max + 1, have: tower.len().saturating_sub(1) });
    }
    let minus_one = LogElement::lambda().neg();
    let dxdz = dx_dz();
    let mut orders: Vec<RatFunc> = Vec::new();
    for k in 0..=k_max {
        let mut f = tower.get(k + 1).get(0, 1).clone();
        for j in 2..=k + 2 {
            let fj = factorial(j as u32).recip();
            let dj = if j == k + 2 {
                d_dx_log_n(&minus_one, j).as_rational().ok_or(CorrError::Logarithmic { k })?
            } else {
                d_dx_n(&orders[k + 1 - j], j)
            };
            f = f.sub(&dj.scale(&fj));
        }
        let w = antiderivative(&f.mul(&dxdz)).map_err(|source| CorrError::NonIntegrableResidue { k, source: Box::new(source) })?;
        let w = w.as_rational().ok_or(CorrError::Logarithmic { k })?;
        if w.degree_at_infinity().is_some_and(|d| d > 0) {
            return Err(CorrError::GrowsAtInfinity { k });
        }
        orders.push(w);
    }
    Ok(W1Tower { minus_one, orders })
}

impl W1Tower {
    pub fn top(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn get(&self, k: usize) -> &RatFunc {
        &self.orders[k]
    }

    /// `Σ_{k≥−1} ℏ^k W₁^{(k)}` at a point.
    pub fn at<R: Ring>(&self, pt: &Pt<R>) -> Result<HbarSeries<R>, CorrError> {
        let mut c = vec![log_at(&self.minus_one, pt)?];
        for w in &self.orders {
            c.push(rat_at(w, &pt.z)?);
        }
        Ok(HbarSeries::new(-1, c))
    }
}

/// `−Tr(D M)/ℏ`, the same `W₁` read off the differential system.
pub fn w1_trace_form(m: &MTower, d: &DTower, top: usize) -> HbarSeries<LogElement> {
    let dm = d.to_hbar().truncate(top as i32).mul(&m.to_hbar().truncate(top as i32).map(lift));
    dm.map(|x| x.trace()).neg().shift(-1)
}

/// `W_n` at rational points, exact in ℏ through order `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelatorSample {
    pub points: Vec<Q>,
    pub order: usize,
    pub values: HbarSeries<Q>,
}

pub fn validate_points(zs: &[Q]) -> Result<(), CorrError> {
    let bad = |z: &Q| z.is_zero() || z.abs() == Q::one();
    if zs.iter().any(bad) {
        return Err(CorrError::DegeneratePoints);
    }
    for i in 0..zs.len() {
        for j in 0..i {
            if zs[i] == zs[j] || &zs[i] * &zs[j] == Q::one() {
                return Err(CorrError::DegeneratePoints);
            }
        }
    }
    Ok(())
}

/// `W_n(x(z₁), …, x(zₙ))` for `n ≥ 2`.
pub fn wn_eval(tower: &MTower, zs: &[Q], k: usize) -> Result<CorrelatorSample, CorrError> {
    assert!(zs.len() >= 2, "use w1_tower for one point");
    validate_points(zs)?;
    let pts = zs.iter().map(Pt::rational).collect::<Result<Vec<_>, _>>()?;
    let ms = pts.iter().map(|p| m_series(tower, p, k)).collect::<Result<Vec<_>, _>>()?;
    let xs: Vec<Q> = pts.iter().map(|p| p.x.clone()).collect();
    Ok(CorrelatorSample { points: zs.to_vec(), order: k, values: wn_generic(&ms, &xs)? })
}

/// `W_n` with the first point a free `z` and the rest fixed.
pub fn wn_symbolic(tower: &MTower, others: &[Q], k: usize) -> Result<HbarSeries<RatFunc>, CorrError> {
    validate_points(others)?;
    let mut pts = vec![Pt::new(SplitFrac::var(), None)?];
    for z in others {
        pts.push(Pt::new(SplitFrac::var().scalar_like(z), None)?);
    }
    let ms = pts.iter().map(|p| m_series(tower, p, k)).collect::<Result<Vec<_>, _>>()?;
    let xs: Vec<SplitFrac> = pts.iter().map(|p| p.x.clone()).collect();
    let w = wn_generic(&ms, &xs)?;
    Ok(HbarSeries::new(w.start(), w.coeffs().iter().map(SplitFrac::to_ratfunc).collect()))
}

/// Coefficient of `ε^m` in every ℏ-order.
pub fn eps_part(h: &HbarSeries<Eps>, m: i64) -> Result<HbarSeries<MPoly>, CorrError> {
    let c = h.coeffs().iter().map(|e| e.coeff(m).map_err(|_| CorrError::Precision)).collect::<Result<Vec<_>, _>>()?;
    Ok(HbarSeries::new(h.start(), c))
}

/// The `ε → 0` value, after checking that no negative power survives.
pub fn eps_limit(h: &HbarSeries<Eps>) -> Result<HbarSeries<MPoly>, CorrError> {
    if h.coeffs().iter().any(|e| e.valuation() < 0) {
        return Err(CorrError::NoLimit);
    }
    eps_part(h, 0)
}

fn rational_series(h: &HbarSeries<MPoly>) -> Option<HbarSeries<Q>> {
    let c = h.coeffs().iter().map(|p| p.as_constant()).collect::<Option<Vec<_>>>()?;
    Some(HbarSeries::new(h.start(), c))
}

const DIAGONAL_PRECISION: i64 = 8;

/// Highest pole order of `Q_{n+1}` at a point `x_j` (reached at `n = 1`).
const PRINCIPAL_ORDER: usize = 2;

/// `W₂(x, x)` as the exact limit `x₂ → x₁`.
pub fn wn_diagonal(tower: &MTower, z: &Q, k: usize) -> Result<HbarSeries<Q>, CorrError> {
    validate_points(std::slice::from_ref(z))?;
    let a = exact_pt(z, 0)?;
    let b = shifted_pt(z, 0, DIAGONAL_PRECISION)?;
    let ms = [m_series(tower, &a, k)?, m_series(tower, &b, k)?];
    let w = wn_generic(&ms, &[a.x.clone(), b.x.clone()])?;
    rational_series(&eps_limit(&w)?).ok_or(CorrError::NoLimit)
}

/// The inputs of the loop equations, with formal `λ_0` at `x` and `λ_j` at `x_j`.
pub struct LoopSystem<'a> {
    pub m: &'a MTower,
    pub d: &'a DTower,
    pub w1: &'a W1Tower,
    /// Highest order of `M` and `D` read.
    pub top: usize,
    pub prec: i64,
    /// Added to `W₂` at order ℏ⁰; zero unless injecting a fault.
    pub w2_shift: Q,
}

impl<'a> LoopSystem<'a> {
    pub fn new(m: &'a MTower, d: &'a DTower, w1: &'a W1Tower, top: usize) -> Self {
        LoopSystem { m, d, w1, top, prec: 8, w2_shift: Q::zero() }
    }

    fn w(&self, pts: &[&Pt<Eps>]) -> Result<HbarSeries<Eps>, CorrError> {
        if pts.len() == 1 {
            return self.w1.at(pts[0]);
        }
        let ms = pts.iter().map(|p| m_series(self.m, p, self.top)).collect::<Result<Vec<_>, _>>()?;
        let xs: Vec<Eps> = pts.iter().map(|p| p.x.clone()).collect();
        let mut w = wn_generic(&ms, &xs)?;
        if pts.len() == 2 && !self.w2_shift.is_zero() {
            let one = xs[0].one_like();
            w = w.add(&HbarSeries::constant(one.scale(&self.w2_shift), w.top()));
        }
        Ok(w)
    }

    fn q(&self, x: &Pt<Eps>, pts: &[&Pt<Eps>]) -> Result<HbarSeries<Eps>, CorrError> {
        let d = d_series(self.d, x, self.top)?;
        let ms = pts.iter().map(|p| m_series(self.m, p, self.top)).collect::<Result<Vec<_>, _>>()?;
        let xs: Vec<Eps> = pts.iter().map(|p| p.x.clone()).collect();
        q_generic(&d, &x.x, &ms, &xs)
    }

    fn others(&self, zs: &[Q]) -> Result<Vec<Pt<Eps>>, CorrError> {
        zs.iter().enumerate().map(|(j, z)| exact_pt(z, j + 1)).collect()
    }

    /// `P₁ = −det D/ℏ²`.
    pub fn p1(&self, z: &Q) -> Result<HbarSeries<MPoly>, CorrError> {
        let d = d_series(self.d, &exact_pt(z, 0)?, self.top)?;
        let det = det_series(&d).neg().shift(-2);
        eps_part(&det, 0)
    }

    /// `P_{n+1}(x; x₁…xₙ) = (−1)ⁿ [Q_{n+1}(x) − principal parts at the x_j]`,
    /// `n = others.len() ≥ 1`. For `n ≥ 2` the poles are simple and the
    /// principal part is the residue term; at `n = 1` the pole is double.
    pub fn p(&self, z: &Q, others: &[Q]) -> Result<HbarSeries<MPoly>, CorrError> {
        self.p_truncated(z, others, PRINCIPAL_ORDER)
    }

    /// The variant that subtracts only `Res Q_{n+1}/(x − x_j)`.
    pub fn p_residue_only(&self, z: &Q, others: &[Q]) -> Result<HbarSeries<MPoly>, CorrError> {
        self.p_truncated(z, others, 1)
    }

    fn p_truncated(&self, z: &Q, others: &[Q], orders: usize) -> Result<HbarSeries<MPoly>, CorrError> {
        let n = others.len();
        let x = exact_pt(z, 0)?;
        let ls = self.others(others)?;
        let refs: Vec<&Pt<Eps>> = ls.iter().collect();
        let mut acc = eps_part(&self.q(&x, &refs)?, 0)?;
        let dxdz = dx_dz();
        let x0 = x_of_z().eval(z).map_err(|_| CorrError::Pole)?;
        for (j, zj) in others.iter().enumerate() {
            let xp = shifted_pt(zj, j + 1, self.prec)?;
            let xj = x_of_z().eval(zj).map_err(|_| CorrError::Pole)?;
            let q = self.q(&xp, &refs)?.mul_coeff(&rat_at(&dxdz, &xp.z)?);
            let gap = xp.x.sub(&EpsSeries::constant(MPoly::constant(xj.clone())));
            let mut weight = gap.one_like();
            for order in 1..=orders {
                // coefficient of (x' − x_j)^{−order}
                let c = eps_part(&q.mul_coeff(&weight), -1)?;
                acc = acc.sub(&c.scale(&(&x0 - &xj).pow(-(order as i32))));
                weight = weight.mul(&gap);
            }
        }
        Ok(if n % 2 == 1 { acc.neg() } else { acc })
    }

    /// `P₂(x; x₂) = ℏ⁻¹ Tr((D(x) − D(x₂) − (x−x₂)D′(x₂))/(x−x₂)² · M(x₂))`.
    pub fn p2_explicit(&self, z: &Q, z2: &Q) -> Result<HbarSeries<MPoly>, CorrError> {
        let x = exact_pt(z, 0)?;
        let b = exact_pt(z2, 1)?;
        let bs = shifted_pt(z2, 1, self.prec)?;
        let dx = d_series(self.d, &x, self.top)?;
        let d2 = d_series(self.d, &b, self.top)?;
        let ds = d_series(self.d, &bs, self.top)?;
        // D′(x₂) = (dz/dx)(z₂) · coefficient of ε in D(z₂ + ε)
        let dzdx = rat_at(&dz_dx(), &b.z)?;
        let dprime = ds.map(|m| {
            m.map(|e| EpsSeries::constant(e.coeff(1).expect("precision covers eps^1")).mul(&dzdx))
        });
        let dxx = x.x.sub(&b.x);
        let num = dx.sub(&d2).sub(&dprime.map(|m| m.scale_by(&dxx)));
        let inv = dxx.mul(&dxx).inv().ok_or(CorrError::Pole)?;
        let m2 = m_series(self.m, &b, self.top)?;
        let tr = trace_series(&num.mul(&m2)).mul_coeff(&inv).shift(-1);
        eps_part(&tr, 0)
    }

    /// `P₁ − W₂(x,x) − W₁(x)²`.
    pub fn first_loop_residual(&self, z: &Q) -> Result<HbarSeries<MPoly>, CorrError> {
        let x = exact_pt(z, 0)?;
        let xs = shifted_pt(z, 0, self.prec)?;
        let w2 = eps_limit(&self.w(&[&x, &xs])?)?;
        let w1 = eps_part(&self.w(&[&x])?, 0)?;
        Ok(self.p1(z)?.sub(&w2).sub(&w1.mul(&w1)))
    }

    /// Right-hand side of the loop equation at `n = others.len() ≥ 1`; zero
    /// when the equation holds.
    pub fn loop_residual(&self, z: &Q, others: &[Q]) -> Result<HbarSeries<MPoly>, CorrError> {
        let n = others.len();
        let x = exact_pt(z, 0)?;
        let xe = shifted_pt(z, 0, self.prec)?;
        let ls = self.others(others)?;
        let lref: Vec<&Pt<Eps>> = ls.iter().collect();
        let mut acc = self.p(z, others)?;

        let mut diag = vec![&x, &xe];
        diag.extend(lref.iter().copied());
        acc = acc.add(&eps_limit(&self.w(&diag)?)?);

        fn with_x<'p>(x: &'p Pt<Eps>, sub: &[&'p Pt<Eps>]) -> Vec<&'p Pt<Eps>> {
            let mut v = vec![x];
            v.extend_from_slice(sub);
            v
        }
        let w1 = self.w(&[&x])?;
        let wn1 = self.w(&with_x(&x, &lref))?;
        acc = acc.add(&eps_part(&w1.mul(&wn1), 0)?.scale(&Q::from_integer(2.into())));

        for mask in 1..(1u32 << n) - 1 {
            let (inside, outside): (Vec<_>, Vec<_>) = (0..n).partition(|j| mask & (1 << j) != 0);
            let a: Vec<&Pt<Eps>> = inside.iter().map(|&j| lref[j]).collect();
            let b: Vec<&Pt<Eps>> = outside.iter().map(|&j| lref[j]).collect();
            let prod = self.w(&with_x(&x, &a))?.mul(&self.w(&with_x(&x, &b))?);
            acc = acc.add(&eps_part(&prod, 0)?);
        }

        let dzdx = dz_dx();
        for (j, zj) in others.iter().enumerate() {
            let moved = shifted_pt(zj, j + 1, self.prec)?;
            let mut swapped = lref.clone();
            swapped[j] = &x;
            let mut shifted = lref.clone();
            shifted[j] = &moved;
            let num = self.w(&swapped)?.sub(&self.w(&shifted)?);
            let inv = x.x.sub(&moved.x).inv().ok_or(CorrError::Pole)?;
            let f = num.mul_coeff(&inv);
            let c = dzdx.eval(zj).map_err(|_| CorrError::Pole)?;
            acc = acc.add(&eps_part(&f, 1)?.scale(&c));
        }
        Ok(acc)
    }
}

fn first_nonzero(h: &HbarSeries<MPoly>) -> Option<i32> {
    h.leading_order()
}

/// Loop-equation suite at the given `z`-samples.
pub fn loop_check(sys: &LoopSystem<'_>, samples: &[Q]) -> Report {
    let mut rep = Report::new("loop");
    let fmt = |z: &Q| fmt_q(z);

    let mut fail = None;
    for z in samples {
        match sys.first_loop_residual(z) {
            Ok(r) => {
                if let Some(k) = first_nonzero(&r) {
                    fail = Some(format!("order hbar^{k} at z = {}", fmt(z)));
                    break;
                }
            }
            Err(e) => {
                fail = Some(format!("z = {}: {e}", fmt(z)));
                break;
            }
        }
    }
    rep.push("first-loop", fail);

    let fixed = [Q::new(5.into(), 3.into()), Q::new(7.into(), 4.into())];
    for n in 1..=2usize {
        let mut fail = None;
        for z in samples.iter().take(3) {
            match sys.loop_residual(z, &fixed[..n]) {
                Ok(r) => {
                    if let Some(k) = first_nonzero(&r) {
                        fail = Some(format!("order hbar^{k} at z = {}", fmt(z)));
                        break;
                    }
                }
                Err(e) => {
                    fail = Some(format!("z = {}: {e}", fmt(z)));
                    break;
                }
            }
        }
        rep.push(&format!("loop-n{n}"), fail);
    }

    let mut fail = None;
    for z in samples.iter().take(3) {
        let same = sys.p(z, &fixed[..1]).and_then(|a| Ok(a.sub(&sys.p2_explicit(z, &fixed[0])?)));
        match same {
            Ok(r) => {
                if let Some(k) = first_nonzero(&r) {
                    fail = Some(format!("order hbar^{k} at z = {}", fmt(z)));
                    break;
                }
            }
            Err(e) => {
                fail = Some(format!("z = {}: {e}", fmt(z)));
                break;
            }
        }
    }
    rep.push("p2-explicit", fail);

    for n in 1..=2usize {
        rep.push(&format!("p{}-constant", n + 1), constancy(sys, samples, &fixed[..n]));
    }
    rep
}

/// `None` when `P_{n+1}(x; fixed)` is the same ℏ-series at every sample and
/// carries no `λ` of the moving point.
fn constancy(sys: &LoopSystem<'_>, samples: &[Q], fixed: &[Q]) -> Option<String> {
    let values = match samples.iter().map(|z| sys.p(z, fixed)).collect::<Result<Vec<_>, _>>() {
        Ok(v) => v,
        Err(e) => return Some(e.to_string()),
    };
    let reference = &values[0];
    for k in reference.start()..=reference.top() {
        for (z, v) in samples.iter().zip(&values) {
            let c = v.coeff(k).unwrap();
            if c.degree_in(0) > 0 {
                return Some(format!("order hbar^{k} depends on ln z at z = {}", fmt_q(z)));
            }
            if c != reference.coeff(k).unwrap() {
                return Some(format!("order hbar^{k} differs between z = {} and z = {}", fmt_q(&samples[0]), fmt_q(z)));
            }
        }
    }
    None
}

/// Rational sample points avoiding `0, ±1` and `x`-collisions.
pub fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Q> {
    let mut out: Vec<Q> = Vec::new();
    while out.len() < n {
        let z = Q::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=5).into());
        let mut trial = out.clone();
        trial.push(z);
        if validate_points(&trial).is_ok() {
            out = trial;
        }
    }
    out
}

/// Poles only at `z = ±1`, and a zero of order `≥ 2` at both `z = 0` and
/// `z = ∞` (that is, `O(1/x²)` on both sheets).
pub fn admissible_poles(f: &RatFunc) -> bool {
    if f.is_zero() {
        return true;
    }
    let mut den = f.den().clone();
    for a in [Q::one(), -Q::one()] {
        let lin = crate::exact::Poly::linear_root(&a);
        while den.eval(&a).is_zero() {
            den = den.exact_div(&lin);
        }
    }
    den.is_constant() && f.degree_at_infinity().unwrap() <= -2 && f.pole_order_at(&Q::zero()) <= -2
}

/// The four topological-type clauses for `n ≤ nmax` through ℏ^k.
pub fn tt_audit(m: &MTower, w1: &W1Tower, k: usize, nmax: usize, seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = Report::new("tt");
    let (mut series, mut parity, mut poles, mut leading) = (None, None, None, None);
    let note = |slot: &mut Option<String>, msg: String| {
        if slot.is_none() {
            *slot = Some(msg);
        }
    };

    for (j, w) in w1.orders.iter().enumerate().take(k) {
        if j % 2 == 0 && !w.is_zero() {
            note(&mut parity, format!("n=1 order hbar^{j}"));
        }
        if j >= 1 && !admissible_poles(w) {
            note(&mut poles, format!("n=1 order hbar^{j}"));
        }
    }
    for n in 2..=nmax {
        for _ in 0..2 {
            let zs = random_points(&mut rng, n);
            match wn_eval(m, &zs, k) {
                Ok(s) => {
                    for j in 0..=k as i32 {
                        let c = s.values.coeff(j).unwrap();
                        if c.is_zero() {
                            continue;
                        }
                        if (j - n as i32) % 2 != 0 {
                            note(&mut parity, format!("n={n} order hbar^{j} at {}", show(&zs)));
                        }
                        if j < n as i32 - 2 {
                            note(&mut leading, format!("n={n} order hbar^{j} at {}", show(&zs)));
                        }
                    }
                }
                Err(e) => note(&mut series, format!("n={n}: {e}")),
            }
        }
        let others = random_points(&mut rng, n - 1);
        match wn_symbolic(m, &others, k) {
            Ok(s) => {
                for j in 0..=k as i32 {
                    if n == 2 && j == 0 {
                        continue;
                    }
                    if !admissible_poles(&s.coeff(j).unwrap()) {
                        note(&mut poles, format!("n={n} order hbar^{j} with others {}", show(&others)));
                    }
                }
            }
            Err(e) => note(&mut series, format!("n={n}: {e}")),
        }
    }
    rep.push("series", series);
    rep.push("parity", parity);
    rep.push("poles", poles);
    rep.push("leading-order", leading);
    rep
}

fn show(zs: &[Q]) -> String {
    let v: Vec<String> = zs.iter().map(fmt_q).collect();
    format!("({})", v.join(", "))
}

/// `(W₂^{(0)} + 1/(x₁−x₂)²) dx₁dx₂ = dz₁dz₂/(z₁−z₂)²` in two free variables.
pub fn bergmann_symbolic(m: &MTower) -> bool {
    let m0 = m.get(0);
    let at = |i: usize| m0.map(|f| Frac::of_ratfunc(f, i));
    let x = x_of_z();
    let (x1, x2) = (Frac::of_ratfunc(&x, 0), Frac::of_ratfunc(&x, 1));
    let (j1, j2) = (Frac::of_ratfunc(&dx_dz(), 0), Frac::of_ratfunc(&dx_dz(), 1));
    let dx = x1.sub(&x2);
    let lhs = at(0).mul(&at(1)).trace().mul(&j1).mul(&j2).mul(&dx.mul(&dx).inv().unwrap());
    let dz = Frac::from_mpoly(MPoly::var(0).sub(&MPoly::var(1)));
    let rhs = dz.mul(&dz).inv().unwrap();
    lhs.same(&rhs)
}

/// `W_n^{(n−2+2g)} ∏ dx/dz` against `ω_{g,n}`: symbolic for `n = 1` and
/// `(0,2)`, sampled at `trials` seeded tuples otherwise.
pub fn tr_compare(
    m: &MTower,
    w1: &W1Tower,
    tr: &mut TopRec,
    g: u32,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Report, CorrError> {
    let mut rep = Report::new("tr");
    let id = format!("tr-{g}-{n}");
    if (g, n) == (0, 2) {
        rep.push(&id, (!bergmann_symbolic(m)).then(|| "Bergmann identity".to_string()));
        return Ok(rep);
    }
    let omega = tr.omega(g, n)?;
    let order = n + 2 * g as usize - 2;
    if n == 1 {
        let w = w1.get(order).mul(&dx_dz());
        rep.push(&id, (w != omega.to_ratfunc()).then(|| format!("W1^({order}) dx differs")));
        return Ok(rep);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dxdz = dx_dz();
    let mut fail = None;
    for _ in 0..trials {
        let zs = random_points(&mut rng, n);
        let s = wn_eval(m, &zs, order)?;
        let mut lhs = s.values.coeff(order as i32).unwrap();
        for z in &zs {
            lhs *= dxdz.eval(z).map_err(|_| CorrError::Pole)?;
        }
        if lhs != omega.eval(&zs) {
            fail = Some(format!("at {}", show(&zs)));
            break;
        }
    }
    rep.push(&id, fail);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffsys::m_p1;
    use crate::exact::{q, qi, Var};

    fn half() -> Q {
        q(1, 2)
    }

    #[test]
    fn w1_low_orders() {
        let m = m_p1(4, &half());
        let w = w1_tower(&m, 2).unwrap();
        // d/dx(−ln z) = (M₀)₁₂
        assert_eq!(crate::curve::d_dx_log(&w.minus_one).as_rational().unwrap(), *m.get(0).get(0, 1));
        assert!(w.get(0).is_zero());
        assert!(w.get(2).is_zero());
        assert!(!w.get(1).is_zero());
    }

    #[test]
    fn w1_matches_trace_form() {
        let m = m_p1(5, &half());
        let d = DTower::p1(4, &half()).unwrap();
        let w = w1_tower(&m, 3).unwrap();
        let t = w1_trace_form(&m, &d, 4);
        assert_eq!(t.coeff(-1).unwrap(), w.minus_one);
        for k in 0..=3 {
            assert_eq!(t.coeff(k).unwrap().as_rational().unwrap(), *w.get(k as usize), "order {k}");
        }
    }

    #[test]
    fn two_point_leading_term_is_bergmann() {
        let m = m_p1(2, &half());
        let (z1, z2) = (qi(2), qi(3));
        let s = wn_eval(&m, &[z1.clone(), z2.clone()], 0).unwrap();
        let (x1, x2) = (x_of_z().eval(&z1).unwrap(), x_of_z().eval(&z2).unwrap());
        let lhs = s.values.coeff(0).unwrap() + (&x1 - &x2).pow(-2);
        let dz = dz_dx();
        let rhs = dz.eval(&z1).unwrap() * dz.eval(&z2).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, q(3, 2));
        assert!(bergmann_symbolic(&m));
    }

    #[test]
    fn rotation_invariance() {
        let m = m_p1(3, &half());
        let a = wn_eval(&m, &[qi(2), qi(3), q(5, 2)], 3).unwrap();
        let b = wn_eval(&m, &[qi(3), q(5, 2), qi(2)], 3).unwrap();
        let c = wn_eval(&m, &[q(5, 2), qi(2), qi(3)], 3).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.values, c.values);
    }

    #[test]
    fn diagonal_limit() {
        let m = m_p1(2, &half());
        let d = wn_diagonal(&m, &qi(2), 2).unwrap();
        // oracle: the two-point formula at z₂ = 2 + δ, extrapolated in δ
        let f = |delta: Q| wn_eval(&m, &[qi(2), qi(2) + delta], 0).unwrap().values.coeff(0).unwrap();
        let (a, b, c) = (f(q(1, 100)), f(q(1, 200)), f(q(1, 400)));
        // quadratic Richardson extrapolation on halving steps
        let lim = (&c * qi(8) - &b * qi(6) + a) / qi(3);
        let err = (lim - d.coeff(0).unwrap()).abs();
        assert!(err < q(1, 1_000_000));
        assert!(d.coeff(1).unwrap().is_zero());
    }

    #[test]
    fn lambda_zero_breaks_parity_at_one_point() {
        let m = m_p1(4, &qi(0));
        let w = w1_tower(&m, 2).unwrap();
        assert!(!w.get(0).is_zero());
    }

    fn loop_fixture(top: usize) -> (MTower, DTower, W1Tower) {
        let m = m_p1(top + 2, &half());
        let w = w1_tower(&m, top + 1).unwrap();
        let d = DTower::p1(top, &half()).unwrap();
        (m, d, w)
    }

    #[test]
    fn first_loop_equation() {
        let (m, d, w) = loop_fixture(2);
        let sys = LoopSystem::new(&m, &d, &w, 2);
        let p1 = sys.p1(&qi(3)).unwrap();
        // −det D₀ = λ² = (W₁^{(−1)})²
        let lam = MPoly::var(0);
        assert_eq!(p1.coeff(-2).unwrap(), lam.mul(&lam));
        for z in [qi(3), q(-5, 2)] {
            assert!(sys.first_loop_residual(&z).unwrap().is_zero());
        }
    }

    #[test]
    fn loop_equation_one_point() {
        let (m, d, w) = loop_fixture(2);
        let sys = LoopSystem::new(&m, &d, &w, 2);
        let r = sys.loop_residual(&qi(2), &[q(5, 3)]).unwrap();
        assert!(r.is_zero());
        // Only the residue subtracted: the double pole leaves W₁(x₁)/(x−x₁)² behind.
        let a = sys.p(&qi(2), &[q(5, 3)]).unwrap();
        let b = sys.p_residue_only(&qi(2), &[q(5, 3)]).unwrap();
        let gap = a.sub(&b).coeff(-1).unwrap();
        assert_eq!(gap, MPoly::var(1).scale(&q(-900, 49)));
        assert_eq!(a.sub(&sys.p2_explicit(&qi(2), &q(5, 3)).unwrap()).leading_order(), None);
    }

    #[test]
    fn injected_fault_is_seen() {
        let (m, d, w) = loop_fixture(2);
        let mut sys = LoopSystem::new(&m, &d, &w, 2);
        sys.w2_shift = q(1, 7);
        assert_eq!(sys.first_loop_residual(&qi(2)).unwrap().leading_order(), Some(0));
        // through 2 W₁ W₂ the shift surfaces one order lower
        let r = sys.loop_residual(&qi(2), &[q(5, 3)]).unwrap();
        assert_eq!(r.leading_order(), Some(-1));
    }

    #[test]
    fn p2_carries_the_logarithm_of_its_argument() {
        let (m, d, w) = loop_fixture(1);
        let sys = LoopSystem::new(&m, &d, &w, 1);
        let p = sys.p(&qi(2), &[q(5, 3)]).unwrap();
        assert!(p.coeff(-1).unwrap().degree_in(0) > 0);
    }

    #[test]
    fn low_order_tr_agreement() {
        let m = m_p1(3, &half());
        let w = w1_tower(&m, 2).unwrap();
        let mut tr = TopRec::new();
        for (g, n) in [(0, 2), (0, 3), (1, 1)] {
            assert!(tr_compare(&m, &w, &mut tr, g, n, 5, 11).unwrap().all_passed(), "({g},{n})");
        }
    }

    #[test]
    fn third_correlator_starts_at_order_one() {
        let m = m_p1(3, &half());
        let s = wn_eval(&m, &[qi(2), qi(3), qi(5)], 3).unwrap();
        assert!(s.values.coeff(0).unwrap().is_zero());
        assert!(s.values.coeff(2).unwrap().is_zero());
        assert!(!s.values.coeff(1).unwrap().is_zero());
    }

    #[test]
    fn admissibility() {
        let z = RatFunc::var_fn(Var::Z);
        let good = z.mul(&z).mul(&z.mul(&z).sub(&RatFunc::one(Var::Z)).powi(-3).unwrap());
        assert!(admissible_poles(&good));
        let bad = z.mul(&z).mul(&z.mul(&z).sub(&RatFunc::constant(qi(4), Var::Z)).powi(-3).unwrap());
        assert!(!admissible_poles(&bad));
    }
}
