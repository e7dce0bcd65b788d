//! The ℏ-difference side: `L(x;ℏ)`, the idempotent `M(x;ℏ)` commuting with
//! the shift, and structural audits of the resulting tower.
//!
//! Everything is carried in the `z` chart, where `√(x²−4) = z − 1/z` is
//! rational. `x`-forms are produced only for display.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::curve::{d_dx_n, dz_dx, sqrt_delta, to_x_form, x_of_z};
use crate::exact::{factorial, HbarSeries, Mat2, Poly, Q, RatFunc, RatFuncJson, Ring, Var};

pub type HbarMatrix = HbarSeries<Mat2<RatFunc>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiffsysError {
    #[error("(L0)12 vanishes identically")]
    VanishingL12,
    #[error("discriminant (Tr L0)^2 - 4 det L0 vanishes identically")]
    DegenerateDiscriminant,
    #[error("recursion system is singular")]
    Singular,
}

fn rf(c: i64, var: Var) -> RatFunc {
    RatFunc::constant(Q::from_integer(c.into()), var)
}

/// `L(x;ℏ) = [[x + λℏ, −1], [1, 0]]` in the `x` variable. The series is exact:
/// every order above ℏ¹ vanishes.
pub fn l_p1(lambda: &Q) -> HbarMatrix {
    let x = RatFunc::var_fn(Var::X);
    let l0 = Mat2::new(x, rf(-1, Var::X), rf(1, Var::X), rf(0, Var::X));
    let l1 = Mat2::new(RatFunc::constant(lambda.clone(), Var::X), rf(0, Var::X), rf(0, Var::X), rf(0, Var::X));
    HbarSeries::new(0, vec![l0, l1])
}

/// Pull an `x`-chart matrix back to the `z` chart.
pub fn to_z_chart(m: &Mat2<RatFunc>) -> Mat2<RatFunc> {
    let xz = x_of_z();
    m.map(|f| if f.var() == Var::Z { f.clone() } else { f.retag(Var::Z).compose(&xz).unwrap() })
}

/// `L_k` in the `z` chart, zero beyond the stored orders.
pub fn l_coeffs_z(l: &HbarMatrix, upto: usize) -> Vec<Mat2<RatFunc>> {
    let zero = Mat2::zero_from(&RatFunc::zero(Var::Z));
    (0..=upto).map(|k| l.coeff(k as i32).map(|m| to_z_chart(&m)).unwrap_or_else(|| zero.clone())).collect()
}

/// `M₀ = I/2 + (L₀ − (Tr L₀/2) I)/s` with `s² = (Tr L₀)² − 4 det L₀`.
pub fn m0_general(l0: &Mat2<RatFunc>, s: &RatFunc) -> Result<Mat2<RatFunc>, DiffsysError> {
    if l0.get(0, 1).is_zero() {
        return Err(DiffsysError::VanishingL12);
    }
    if s.is_zero() {
        return Err(DiffsysError::DegenerateDiscriminant);
    }
    let half = Q::new(1.into(), 2.into());
    let var = s.var();
    let tr2 = l0.trace().scale(&half);
    let inv_s = s.recip().unwrap();
    let traceless = l0.sub(&Mat2::identity_from(&tr2).scale_by(&tr2));
    let id_half = Mat2::identity_from(&rf(1, var)).scale(&half);
    Ok(id_half.add(&traceless.scale_by(&inv_s)))
}

/// Determinant of the 3×3 system for `(X₁₁, X₁₂, X₂₁)`: `L₁₂ · ((Tr L₀)² − 4 det L₀)`.
pub fn general_system_det(l0: &Mat2<RatFunc>) -> RatFunc {
    let [a, b, c, _] = system_rows(l0);
    det3(&[a, b, c])
}

fn system_rows(l0: &Mat2<RatFunc>) -> [[RatFunc; 3]; 4] {
    let (l11, l12, l21, l22) = (l0.get(0, 0), l0.get(0, 1), l0.get(1, 0), l0.get(1, 1));
    let z = l11.zero_like();
    let dl = l22.sub(l11);
    [
        [z.clone(), l21.clone(), l12.neg()],
        [l12.scale(&Q::from_integer(2.into())), dl.clone(), z.clone()],
        [dl, l21.neg(), l12.neg()],
        [z.clone(), z.clone(), z],
    ]
}

fn det3(m: &[[RatFunc; 3]; 3]) -> RatFunc {
    let minor = |r1: usize, r2: usize, c1: usize, c2: usize| m[r1][c1].mul(&m[r2][c2]).sub(&m[r1][c2].mul(&m[r2][c1]));
    m[0][0]
        .mul(&minor(1, 2, 1, 2))
        .sub(&m[0][1].mul(&minor(1, 2, 0, 2)))
        .add(&m[0][2].mul(&minor(1, 2, 0, 1)))
}

fn solve3(m: &[[RatFunc; 3]; 3], rhs: &[RatFunc; 3]) -> Result<[RatFunc; 3], DiffsysError> {
    let d = det3(m);
    if d.is_zero() {
        return Err(DiffsysError::Singular);
    }
    let di = d.recip().unwrap();
    let mut out: [RatFunc; 3] = [d.zero_like(), d.zero_like(), d.zero_like()];
    for (col, o) in out.iter_mut().enumerate() {
        let mut mc = m.clone();
        for r in 0..3 {
            mc[r][col] = rhs[r].clone();
        }
        *o = det3(&mc).mul(&di);
    }
    Ok(out)
}

/// `d^j/dx^j` of a matrix in the `z` chart, with `dz/dx` supplied by the caller.
fn dx_mat(m: &Mat2<RatFunc>, j: usize, dzdx: &RatFunc) -> Mat2<RatFunc> {
    let mut out = m.clone();
    for _ in 0..j {
        out = out.map(|f| f.deriv().mul(dzdx));
    }
    out
}

/// The order-`k+1` shift data with the unknown `M_{k+1}` removed:
/// `Σ (1/j!) ∂ʲM_i L_l − Σ L_l M_i` over `i ≤ k`.
fn shift_remainder(tower: &[Mat2<RatFunc>], l: &[Mat2<RatFunc>], dzdx: &RatFunc) -> Mat2<RatFunc> {
    let k1 = tower.len();
    let mut acc = tower[0].zero_like();
    for (i, mi) in tower.iter().enumerate() {
        for (lo, ll) in l.iter().enumerate() {
            if i + lo > k1 || ll.vanishes() {
                continue;
            }
            let j = k1 - i - lo;
            let dm = dx_mat(mi, j, dzdx).scale(&factorial(j as u32).recip());
            acc = acc.add(&dm.mul(ll));
            if j == 0 {
                acc = acc.sub(&ll.mul(mi));
            }
        }
    }
    acc
}

fn idempotency_rhs(tower: &[Mat2<RatFunc>]) -> RatFunc {
    let k1 = tower.len();
    let mut acc = tower[0].get(0, 0).zero_like();
    for j in 1..k1 {
        acc = acc.add(&tower[j].mul(&tower[k1 - j]).e[0][0]);
    }
    acc
}

/// `M_{k+1}` from `M₀..M_k` by solving the 3×3 linear system directly.
pub fn m_next_general(
    tower: &[Mat2<RatFunc>],
    l: &[Mat2<RatFunc>],
    s: &RatFunc,
    dzdx: &RatFunc,
) -> Result<Mat2<RatFunc>, DiffsysError> {
    let l0 = &l[0];
    if l0.get(0, 1).is_zero() {
        return Err(DiffsysError::VanishingL12);
    }
    let c = shift_remainder(tower, l, dzdx);
    let rows = system_rows(l0);
    let m = [rows[0].clone(), rows[1].clone(), rows[2].clone()];
    let rhs = [c.get(0, 0).neg(), c.get(0, 1).neg(), s.mul(&idempotency_rhs(tower))];
    let [x11, x12, x21] = solve3(&m, &rhs)?;
    let x22 = x11.neg();
    Ok(Mat2::new(x11, x12, x21, x22))
}

/// The coefficients `M₀, …, M_K` in the `z` chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MTower {
    pub orders: Vec<Mat2<RatFunc>>,
    pub lambda: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub k: usize,
    pub entries: [[RatFuncJson; 2]; 2],
}

impl MTower {
    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn get(&self, k: usize) -> &Mat2<RatFunc> {
        &self.orders[k]
    }

    pub fn to_hbar(&self) -> HbarMatrix {
        HbarSeries::new(0, self.orders.clone())
    }

    pub fn to_json(&self) -> Vec<MatrixJson> {
        self.orders
            .iter()
            .enumerate()
            .map(|(k, m)| MatrixJson {
                k,
                entries: [[m.e[0][0].to_json(), m.e[0][1].to_json()], [m.e[1][0].to_json(), m.e[1][1].to_json()]],
            })
            .collect()
    }

    /// Entry `(i, j)` of `M_k` as `R(x) + T(x)√(x²−4)`, rendered.
    pub fn x_display(&self, k: usize, i: usize, j: usize) -> String {
        to_x_form(self.orders[k].get(i, j)).display()
    }
}

pub fn matrix_from_json(j: &MatrixJson) -> Result<Mat2<RatFunc>, crate::exact::RatError> {
    let g = |a: usize, b: usize| RatFunc::from_json(&j.entries[a][b], Var::Z);
    Ok(Mat2::new(g(0, 0)?, g(0, 1)?, g(1, 0)?, g(1, 1)?))
}

/// The ℙ¹ tower through `M_K` via the explicit inverse
/// `(1/(x²−4)) [[x, 2, −x], [−2, −x, 2], [x²−2, x, −2]]`. When `λ = 1/2` only the
/// entries that the parity symmetries leave free are solved for.
pub fn m_p1(k_max: usize, lambda: &Q) -> MTower {
    let x = x_of_z();
    let s = sqrt_delta();
    let inv_delta = s.mul(&s).recip().unwrap();
    let l = l_coeffs_z(&l_p1(lambda), 1);
    let half = Q::new(1.into(), 2.into());
    let symmetric = *lambda == half;
    let mut orders = vec![m0_general(&l[0], &s).unwrap()];
    let inverse: [[RatFunc; 3]; 3] = [
        [x.clone(), rf(2, Var::Z), x.neg()],
        [rf(-2, Var::Z), x.neg(), rf(2, Var::Z)],
        [x.mul(&x).sub(&rf(2, Var::Z)), x.clone(), rf(-2, Var::Z)],
    ];
    for k in 0..k_max {
        // right-hand side of the ℙ¹ recursion
        let mut r1 = RatFunc::zero(Var::Z);
        let mut r2 = orders[k].get(0, 1).scale(lambda);
        for j in 1..=k + 1 {
            let m = &orders[k + 1 - j];
            let fj = factorial(j as u32).recip();
            let d11 = d_dx_n(m.get(0, 0), j);
            let d12 = d_dx_n(m.get(0, 1), j);
            r1 = r1.sub(&x.mul(&d11).add(&d12).scale(&fj));
            r2 = r2.add(&d11.scale(&fj));
        }
        for j in 1..=k {
            let fj = factorial(j as u32).recip();
            r1 = r1.sub(&d_dx_n(orders[k - j].get(0, 0), j).scale(&(&fj * lambda)));
        }
        let r3 = s.mul(&idempotency_rhs(&orders));
        let rhs = [r1, r2, r3];
        let row = |i: usize| -> RatFunc {
            let mut acc = RatFunc::zero(Var::Z);
            for (c, r) in inverse[i].iter().zip(&rhs) {
                acc = acc.add(&c.mul(r));
            }
            acc.mul(&inv_delta)
        };
        let kk = k + 1;
        let next = if symmetric {
            let x11 = if kk % 2 == 1 { RatFunc::zero(Var::Z) } else { row(0) };
            let x12 = row(1);
            let x21 = if kk % 2 == 1 { x12.clone() } else { x12.neg() };
            Mat2::new(x11.clone(), x12, x21, x11.neg())
        } else {
            let (x11, x12, x21) = (row(0), row(1), row(2));
            Mat2::new(x11.clone(), x12, x21, x11.neg())
        };
        orders.push(next);
    }
    MTower { orders, lambda: lambda.clone() }
}

/// The same tower from the general 2×2 construction, for cross-checking.
pub fn m_general_p1(k_max: usize, lambda: &Q) -> Result<MTower, DiffsysError> {
    let s = sqrt_delta();
    let dzdx = dz_dx();
    let l = l_coeffs_z(&l_p1(lambda), 1);
    let mut orders = vec![m0_general(&l[0], &s)?];
    for _ in 0..k_max {
        let next = m_next_general(&orders, &l, &s, &dzdx)?;
        orders.push(next);
    }
    Ok(MTower { orders, lambda: lambda.clone() })
}

/// One identity checked by [`m_audit`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditCheck {
    pub name: String,
    /// First order at which the identity fails, if any.
    pub first_failure: Option<usize>,
}

impl AuditCheck {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(AuditCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&AuditCheck> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }
}

fn first_failing(upto: usize, ok: impl Fn(usize) -> bool) -> Option<usize> {
    (0..=upto).find(|&k| !ok(k))
}

/// Order `k` of `M(x+ℏ) L(x) − L(x) M(x)`.
pub fn shift_defect(tower: &[Mat2<RatFunc>], l: &[Mat2<RatFunc>], k: usize) -> Mat2<RatFunc> {
    let dzdx = dz_dx();
    let mut acc = tower[0].zero_like();
    for (i, mi) in tower.iter().enumerate().take(k + 1) {
        for (lo, ll) in l.iter().enumerate() {
            if i + lo > k {
                continue;
            }
            let j = k - i - lo;
            acc = acc.add(&dx_mat(mi, j, &dzdx).scale(&factorial(j as u32).recip()).mul(ll));
            if j == 0 {
                acc = acc.sub(&ll.mul(mi));
            }
        }
    }
    acc
}

/// `z`-chart entry is `O(x^{-p})` on the sheet `z ~ x`.
fn decays(f: &RatFunc, p: i64) -> bool {
    f.is_zero() || f.degree_at_infinity().is_some_and(|d| d <= -p)
}

/// Every structural identity of the tower through order `k_max`, for the ℙ¹
/// system with the tower's own `λ`.
pub fn m_audit(tower: &MTower, k_max: usize) -> AuditReport {
    let m = &tower.orders;
    let k_max = k_max.min(m.len() - 1);
    let l = l_coeffs_z(&l_p1(&tower.lambda), 1);
    let zero = RatFunc::zero(Var::Z);
    let series_sq = |k: usize| {
        let mut acc = m[0].zero_like();
        for i in 0..=k {
            acc = acc.add(&m[i].mul(&m[k - i]));
        }
        acc
    };
    let mut checks = Vec::new();
    let mut push = |name: &str, f: Option<usize>| checks.push(AuditCheck { name: name.into(), first_failure: f });
    push("idempotent", first_failing(k_max, |k| series_sq(k) == m[k]));
    push("trace", first_failing(k_max, |k| m[k].trace() == if k == 0 { rf(1, Var::Z) } else { zero.clone() }));
    push(
        "det",
        first_failing(k_max, |k| {
            let mut acc = zero.clone();
            for i in 0..=k {
                acc = acc.add(&m[i].get(0, 0).mul(m[k - i].get(1, 1)).sub(&m[i].get(0, 1).mul(m[k - i].get(1, 0))));
            }
            acc.is_zero()
        }),
    );
    push("shift", first_failing(k_max, |k| shift_defect(m, &l, k).vanishes()));
    // at x → ∞: diagonal of M₀ − diag(1, 0) is O(1/x²), its off-diagonal O(1/x);
    // higher orders are O(1/x²)
    push(
        "infinity",
        first_failing(k_max, |k| {
            if k == 0 {
                let d = m[0].sub(&Mat2::new(rf(1, Var::Z), zero.clone(), zero.clone(), zero.clone()));
                decays(d.get(0, 0), 2) && decays(d.get(1, 1), 2) && decays(d.get(0, 1), 1) && decays(d.get(1, 0), 1)
            } else {
                m[k].entries().iter().all(|f| decays(f, 2))
            }
        }),
    );
    push("odd-diagonal", first_failing(k_max, |k| k % 2 == 0 || m[k].get(0, 0).is_zero()));
    push(
        "offdiagonal-sign",
        first_failing(k_max, |k| {
            if k == 0 {
                return true;
            }
            let want = if k % 2 == 1 { m[k].get(0, 1).clone() } else { m[k].get(0, 1).neg() };
            *m[k].get(1, 0) == want
        }),
    );
    AuditReport { checks }
}

/// `P(x) / (c·(x²−4)^{m/2})` with `m` odd, in the `z` chart.
pub fn half_power_form(p: &Poly, c: &Q, m: i64) -> RatFunc {
    let xz = x_of_z();
    let s = sqrt_delta();
    let px = RatFunc::from_poly(p.clone(), Var::Z).compose(&xz).unwrap();
    px.mul(&s.powi(-(m as i32)).unwrap()).scale(&c.recip())
}

/// `Σ` over orders of `ℏ^k M_k`, evaluated at a point `z`.
pub fn eval_tower(tower: &MTower, z: &Q, hbar: &Q) -> Mat2<Q> {
    let mut acc = Mat2::zero_from(&Q::zero());
    let mut h = Q::one();
    for mk in &tower.orders {
        acc = acc.add(&mk.map(|f| f.eval(z).unwrap()).scale(&h));
        h *= hbar;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qi};

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints(c)
    }

    #[test]
    fn l_is_unimodular() {
        for lam in [qi(0), q(1, 2), qi(1)] {
            let l = l_p1(&lam);
            let l0 = l.coeff(0).unwrap();
            let l1 = l.coeff(1).unwrap();
            // det(L0 + ℏ L1) = det L0 + ℏ (L0₁₁ L1₂₂ + L1₁₁ L0₂₂ − …)
            assert_eq!(l0.det(), rf(1, Var::X));
            let cross = l0.get(0, 0).mul(l1.get(1, 1)).add(&l1.get(0, 0).mul(l0.get(1, 1)))
                .sub(&l0.get(0, 1).mul(l1.get(1, 0))).sub(&l1.get(0, 1).mul(l0.get(1, 0)));
            assert!(cross.is_zero());
            assert!(l1.det().is_zero());
        }
    }

    #[test]
    fn m0_matches_closed_form() {
        let t = m_p1(0, &q(1, 2));
        let m0 = t.get(0);
        assert_eq!(m0.trace(), rf(1, Var::Z));
        assert!(m0.det().is_zero());
        assert_eq!(m0.mul(m0), *m0);
        let want12 = half_power_form(&p(&[-1]), &qi(1), 1);
        assert_eq!(*m0.get(0, 1), want12);
        let l0 = to_z_chart(&l_p1(&q(1, 2)).coeff(0).unwrap());
        assert!(m0.commutator(&l0).vanishes());
    }

    #[test]
    fn known_orders() {
        let t = m_p1(5, &q(1, 2));
        assert_eq!(*t.get(1).get(0, 1), half_power_form(&p(&[0, 1]), &qi(2), 3));
        assert!(t.get(1).get(0, 0).is_zero());
        assert_eq!(*t.get(2).get(0, 0), half_power_form(&p(&[0, 16, 0, 1]), &qi(4), 7));
        assert_eq!(*t.get(2).get(0, 1), half_power_form(&p(&[0, 0, -6, 0, -1]), &qi(4), 7));
        assert_eq!(*t.get(3).get(0, 1), half_power_form(&p(&[0, 96, 0, 42, 0, 1]), &qi(8), 9));
        assert_eq!(*t.get(4).get(0, 0), half_power_form(&p(&[0, 3072, 0, 2848, 0, 247, 0, 1]), &qi(16), 13));
        assert_eq!(
            *t.get(4).get(0, 1),
            half_power_form(&p(&[0, 0, -1280, 0, -1350, 0, -156, 0, -1]), &qi(16), 13)
        );
        assert_eq!(
            *t.get(5).get(0, 1),
            half_power_form(&p(&[0, 30720, 0, 52160, 0, 12990, 0, 516, 0, 1]), &qi(32), 15)
        );
    }

    #[test]
    fn first_order_in_z() {
        let t = m_p1(1, &q(1, 2));
        let want = RatFunc::new(p(&[0, 0, 1, 0, 1]), p(&[-1, 0, 1]).pow(3).scale(&qi(2)), Var::Z).unwrap();
        assert_eq!(*t.get(1).get(0, 1), want);
    }

    #[test]
    fn reduced_and_general_agree() {
        for lam in [q(1, 2), qi(0)] {
            let a = m_p1(6, &lam);
            let b = m_general_p1(6, &lam).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn system_determinant() {
        let l0 = to_z_chart(&l_p1(&q(1, 2)).coeff(0).unwrap());
        let s = sqrt_delta();
        assert_eq!(general_system_det(&l0), s.mul(&s).neg());
    }

    #[test]
    fn audit_passes_at_half() {
        let t = m_p1(6, &q(1, 2));
        let r = m_audit(&t, 6);
        assert!(r.all_passed(), "{:?}", r.failures());
    }

    #[test]
    fn audit_sees_injected_fault() {
        let mut t = m_p1(3, &q(1, 2));
        t.orders[1].e[0][1] = t.orders[1].e[0][1].add(&rf(1, Var::Z));
        let r = m_audit(&t, 3);
        assert_eq!(r.check("shift").unwrap().first_failure, Some(1));
    }

    #[test]
    fn zero_shift_keeps_shift_identity_but_breaks_parity() {
        let t = m_p1(4, &qi(0));
        let r = m_audit(&t, 4);
        assert!(r.check("shift").unwrap().passed());
        assert!(r.check("idempotent").unwrap().passed());
        assert!(!r.check("odd-diagonal").unwrap().passed());
    }

    #[test]
    fn vanishing_l12_rejected() {
        let z = RatFunc::zero(Var::Z);
        let l0 = Mat2::new(rf(1, Var::Z), z.clone(), z.clone(), rf(2, Var::Z));
        assert_eq!(m0_general(&l0, &rf(1, Var::Z)), Err(DiffsysError::VanishingL12));
    }
}
