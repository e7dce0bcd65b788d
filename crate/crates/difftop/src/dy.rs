//! The Dubrovin–Yang matrix `M̃(x;ℏ) = diag(1,0) + [[α, Q−P],[Q+P, −α]]` as
//! large-x coefficient grids, its shift formulas, the coefficient identities
//! behind `M̃(x+ℏ)L = LM̃`, and the comparison with the computed `M` tower.
//!
//! A grid cell `(h, n)` holds the coefficient of `ℏ^h x^{−n}`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::curve::{to_x_form, z_of_x_series};
use crate::diffsys::MTower;
use crate::exact::{binomial, factorial, q, LaurentSeries, Point, Q};
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DyKind {
    Alpha,
    P,
    Q,
}

impl FromStr for DyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "alpha" | "α" | "a" => Ok(DyKind::Alpha),
            "P" | "p" => Ok(DyKind::P),
            "Q" | "q" => Ok(DyKind::Q),
            _ => Err(format!("unknown series `{s}` (expected alpha, P or Q)")),
        }
    }
}

impl fmt::Display for DyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DyKind::Alpha => "alpha",
            DyKind::P => "P",
            DyKind::Q => "Q",
        })
    }
}

/// Coefficients `(h, n) ↦ [ℏ^h x^{−n}]`, known for `h ≤ hbar_max`, `n ≤ x_max`.
/// The cell `n` may be zero or negative after multiplying by `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub cells: BTreeMap<(u32, i64), Q>,
    pub hbar_max: u32,
    pub x_max: i64,
}

impl Grid {
    pub fn new(hbar_max: u32, x_max: i64) -> Self {
        Grid { cells: BTreeMap::new(), hbar_max, x_max }
    }

    pub fn get(&self, h: u32, n: i64) -> Q {
        self.cells.get(&(h, n)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_to(&mut self, h: u32, n: i64, c: Q) {
        if h > self.hbar_max || n > self.x_max || c.is_zero() {
            return;
        }
        let e = self.cells.entry((h, n)).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.cells.remove(&(h, n));
        }
    }

    fn lin(&self, o: &Grid, s: &Q) -> Grid {
        let mut r = Grid { cells: self.cells.clone(), hbar_max: self.hbar_max.min(o.hbar_max), x_max: self.x_max.min(o.x_max) };
        r.cells.retain(|&(h, n), _| h <= r.hbar_max && n <= r.x_max);
        for (&(h, n), c) in &o.cells {
            r.add_to(h, n, c * s);
        }
        r
    }

    pub fn add(&self, o: &Grid) -> Grid {
        self.lin(o, &Q::one())
    }

    pub fn sub(&self, o: &Grid) -> Grid {
        self.lin(o, &-Q::one())
    }

    pub fn scale(&self, s: &Q) -> Grid {
        let mut r = Grid::new(self.hbar_max, self.x_max);
        for (&(h, n), c) in &self.cells {
            r.add_to(h, n, c * s);
        }
        r
    }

    /// Multiply by `c·ℏ^a x^b`; the known region shrinks accordingly.
    pub fn times_monomial(&self, c: &Q, a: u32, b: i64) -> Grid {
        let mut r = Grid::new(self.hbar_max, self.x_max - b);
        for (&(h, n), v) in &self.cells {
            r.add_to(h + a, n - b, v * c);
        }
        r
    }

    /// The coefficients of `ℏ^h` as a series in `u = 1/x`.
    pub fn row(&self, h: u32) -> LaurentSeries {
        let lo = self.cells.keys().filter(|k| k.0 == h).map(|k| k.1).min().unwrap_or(self.x_max + 1).min(self.x_max + 1);
        let coeffs = (lo..=self.x_max).map(|n| self.get(h, n)).collect();
        LaurentSeries::new(Point::Infinity, lo, coeffs, Some(self.x_max + 1))
    }

    /// First cell (in `(h, n)` order) where `self` and `o` differ inside the
    /// common known region.
    pub fn first_difference(&self, o: &Grid) -> Option<(u32, i64, Q, Q)> {
        let d = self.sub(o);
        d.cells.iter().next().map(|(&(h, n), _)| (h, n, self.get(h, n), o.get(h, n)))
    }

    /// Rows ℏ-power, columns x⁻-power.
    pub fn to_csv(&self) -> String {
        let lo = self.cells.keys().map(|k| k.1).min().unwrap_or(0).min(0);
        let mut out = String::from("hbar");
        for n in lo..=self.x_max {
            out.push_str(&format!(",x^{}", -n));
        }
        out.push('\n');
        for h in 0..=self.hbar_max {
            out.push_str(&h.to_string());
            for n in lo..=self.x_max {
                out.push(',');
                out.push_str(&self.get(h, n).to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// One of α, P, Q truncated at `ℏ^K`, `x^{−N}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DySeries {
    pub kind: DyKind,
    pub grid: Grid,
}

impl DySeries {
    pub fn coeff(&self, h: u32, n: i64) -> Q {
        self.grid.get(h, n)
    }

    /// The parity pattern of each kind: α even ℏ, even x⁻ ≥ 2; P even ℏ, odd
    /// x⁻ ≥ 1; Q odd ℏ, even x⁻ ≥ 2. Returns the first offending cell.
    pub fn sparsity_violation(&self) -> Option<(u32, i64)> {
        let (h_par, n_par, n_min) = match self.kind {
            DyKind::Alpha => (0, 0, 2),
            DyKind::P => (0, 1, 1),
            DyKind::Q => (1, 0, 2),
        };
        self.grid.cells.keys().find(|&&(h, n)| h % 2 != h_par || n.rem_euclid(2) != n_par || n < n_min).copied()
    }

    pub fn to_csv(&self) -> String {
        self.grid.to_csv()
    }
}

fn ipow(b: i64, e: i64) -> Q {
    let p = Q::from_integer(BigInt::from(b.abs()).pow(e.unsigned_abs() as u32));
    let p = if b < 0 && e % 2 != 0 { -p } else { p };
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

fn sign(l: i64) -> Q {
    if l % 2 == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

fn four_pow(e: i64) -> Q {
    ipow(4, e)
}

/// `Σ_{l=0}^{i} (−1)^l (2i+1−2l)^e [C(2i,l) − C(2i,l−1)]`.
fn bracket_sum(i: i64, e: i64) -> Q {
    (0..=i).map(|l| sign(l) * ipow(2 * i + 1 - 2 * l, e) * (binomial(2 * i, l) - binomial(2 * i, l - 1))).sum()
}

/// `Σ_{l=0}^{s} (−1)^l (2s+1−2l)^e C(2s+1,l)`.
fn a_sum(s: i64, e: i64) -> Q {
    (0..=s).map(|l| sign(l) * ipow(2 * s + 1 - 2 * l, e) * binomial(2 * s + 1, l)).sum()
}

/// `Σ_{l=0}^{s−1} (−1)^l (2s−1−2l)^e C(2s−1,l)`, the same sum one step down.
fn a_sum_lower(s: i64, e: i64) -> Q {
    if s == 0 {
        return Q::zero();
    }
    a_sum(s - 1, e)
}

fn fact(n: i64) -> Q {
    factorial(n as u32)
}

/// The defining triple sums, summed over `j` with `x`-power `≤ N` and
/// ℏ-power `≤ K`.
pub fn dy_generate(kind: DyKind, k: u32, n: i64) -> DySeries {
    let mut grid = Grid::new(k, n);
    let half = Q::new(1.into(), 2.into());
    for j in 0i64.. {
        let xp = match kind {
            DyKind::P => 2 * j + 1,
            _ => 2 * j + 2,
        };
        if xp > n {
            break;
        }
        for i in 0..=j {
            let h = match kind {
                DyKind::Q => 2 * (j - i) + 1,
                _ => 2 * (j - i),
            };
            if h > k as i64 {
                continue;
            }
            let c = match kind {
                DyKind::Alpha => {
                    let s: Q = (0..=i).map(|l| sign(l) * ipow(2 * i + 1 - 2 * l, 2 * j + 1) * binomial(2 * i + 1, l)).sum();
                    s / (fact(i) * fact(i + 1))
                }
                DyKind::P => bracket_sum(i, 2 * j) / (fact(i) * fact(i)),
                DyKind::Q => &half * Q::from_integer((2 * i + 1).into()) * bracket_sum(i, 2 * j) / (fact(i) * fact(i)),
            } / four_pow(j);
            grid.add_to(h as u32, xp, c);
        }
    }
    DySeries { kind, grid }
}

/// The same series from the `(s, m)` regrouping, in which the bracket is
/// replaced by `C(2s+1,l)(2s+1−2l)/(2s+1)`.
pub fn dy_rewritten(kind: DyKind, k: u32, n: i64) -> DySeries {
    let mut grid = Grid::new(k, n);
    let half = Q::new(1.into(), 2.into());
    for s in 0i64..=n {
        for m in 0i64..=(k as i64) / 2 {
            let (h, xp) = match kind {
                DyKind::Alpha => (2 * m, 2 * s + 2 * m + 2),
                DyKind::P => (2 * m, 2 * s + 2 * m + 1),
                DyKind::Q => (2 * m + 1, 2 * s + 2 * m + 2),
            };
            if h > k as i64 || xp > n {
                continue;
            }
            let a = a_sum(s, 2 * s + 2 * m + 1) / four_pow(s + m);
            let c = match kind {
                DyKind::Alpha => a / (fact(s) * fact(s + 1)),
                DyKind::P => a / (fact(s) * fact(s) * Q::from_integer((2 * s + 1).into())),
                DyKind::Q => &half * a / (fact(s) * fact(s)),
            };
            grid.add_to(h as u32, xp, c);
        }
    }
    DySeries { kind, grid }
}

/// `f(x+ℏ) = Σ_j ℏ^j/j! ∂_x^j f`, using `∂^j x^{−n} = (−1)^j (n+j−1)!/(n−1)! x^{−n−j}`.
pub fn taylor_shift(g: &Grid) -> Grid {
    let mut r = Grid::new(g.hbar_max, g.x_max);
    for (&(h, n), c) in &g.cells {
        let mut j = 0u32;
        while h + j <= g.hbar_max && n + j as i64 <= g.x_max {
            // (n+j−1)!/((n−1)! j!) as a falling product; n ≥ 1 here
            let coef = if n >= 1 { binomial(n + j as i64 - 1, j as i64) } else { falling_over_factorial(n, j) };
            r.add_to(h + j, n + j as i64, sign(j as i64) * coef * c);
            j += 1;
        }
    }
    r
}

/// `n(n+1)…(n+j−1)/j!` for any integer `n` (the `x^{−n}` derivative factor).
fn falling_over_factorial(n: i64, j: u32) -> Q {
    let mut acc = Q::one();
    for t in 0..j as i64 {
        acc *= Q::from_integer((n + t).into());
    }
    acc / factorial(j)
}

/// The closed forms for `α(x+ℏ)`, `P(x+ℏ)`, `Q(x+ℏ)` summed over `(s, p, m, l)`.
pub fn dy_shift_closed_form(kind: DyKind, k: u32, n: i64) -> DySeries {
    let mut grid = Grid::new(k, n);
    let half = Q::new(1.into(), 2.into());
    let kk = k as i64;
    for s in 0i64..=n {
        for p in 0i64..=kk / 2 + 1 {
            match kind {
                DyKind::Alpha => {
                    let den = fact(s) * fact(s + 1);
                    let even: Q = (0..=p)
                        .map(|m| a_sum(s, 2 * s + 1 + 2 * p - 2 * m) / four_pow(s + p - m) * binomial(2 * s + 1 + 2 * p, 2 * m))
                        .sum();
                    let odd: Q = (0..=p)
                        .map(|m| a_sum(s, 2 * s + 1 + 2 * p - 2 * m) / four_pow(s + p - m) * binomial(2 * s + 2 + 2 * p, 2 * m + 1))
                        .sum();
                    put(&mut grid, 2 * p, 2 * s + 2 * p + 2, even / &den);
                    put(&mut grid, 2 * p + 1, 2 * s + 2 * p + 3, -odd / &den);
                }
                DyKind::P => {
                    let den = fact(s) * fact(s) * Q::from_integer((2 * s + 1).into());
                    let even: Q = (0..=p)
                        .map(|m| a_sum(s, 2 * s + 1 + 2 * p - 2 * m) / four_pow(s + p - m) * binomial(2 * s + 2 * p, 2 * m))
                        .sum();
                    let odd: Q = (0..=p)
                        .map(|m| a_sum(s, 2 * s + 1 + 2 * p - 2 * m) / four_pow(s + p - m) * binomial(2 * s + 1 + 2 * p, 2 * m + 1))
                        .sum();
                    put(&mut grid, 2 * p, 2 * s + 2 * p + 1, even / &den);
                    put(&mut grid, 2 * p + 1, 2 * s + 2 * p + 2, -odd / &den);
                }
                DyKind::Q => {
                    let den = fact(s) * fact(s);
                    let odd: Q = (0..=p)
                        .map(|m| a_sum(s, 2 * s + 1 + 2 * p - 2 * m) / four_pow(s + p - m) * binomial(2 * s + 2 * p + 1, 2 * m))
                        .sum();
                    let even: Q = (0..p)
                        .map(|m| a_sum(s, 2 * s - 1 + 2 * p - 2 * m) / four_pow(s + p - m - 1) * binomial(2 * s + 2 * p, 2 * m + 1))
                        .sum();
                    put(&mut grid, 2 * p + 1, 2 * s + 2 * p + 2, &half * odd / &den);
                    put(&mut grid, 2 * p, 2 * s + 2 * p + 1, -(&half * even) / &den);
                }
            }
        }
    }
    DySeries { kind, grid }
}

fn put(g: &mut Grid, h: i64, n: i64, c: Q) {
    if h >= 0 {
        g.add_to(h as u32, n, c);
    }
}

/// Closed-form shifts against the Taylor-shift oracle, one clause per kind,
/// plus the regrouped form against the defining sums.
pub fn dy_shift_check(k: u32, n: i64) -> Report {
    let mut rep = Report::new("dy-shift");
    for kind in [DyKind::Alpha, DyKind::P, DyKind::Q] {
        let base = dy_generate(kind, k, n);
        let re = dy_rewritten(kind, k, n);
        rep.push(&format!("rewrite-{kind}"), describe(re.grid.first_difference(&base.grid)));
        let oracle = taylor_shift(&base.grid);
        let closed = dy_shift_closed_form(kind, k, n);
        rep.push(&format!("shift-{kind}"), describe(closed.grid.first_difference(&oracle)));
    }
    rep
}

fn describe(d: Option<(u32, i64, Q, Q)>) -> Option<String> {
    d.map(|(h, n, a, b)| format!("hbar^{h} x^-{n}: {a} vs {b}"))
}

/// `M̃_h` entries as grids; `(i, j)` indexing as for `Mat2`.
pub type GridMatrix = [[Grid; 2]; 2];

/// `diag(1,0) + [[α, Q−P],[Q+P, −α]]` with all ℏ-orders in one grid per entry.
pub fn dy_assemble(k: u32, n: i64) -> GridMatrix {
    let a = dy_generate(DyKind::Alpha, k, n).grid;
    let p = dy_generate(DyKind::P, k, n).grid;
    let q = dy_generate(DyKind::Q, k, n).grid;
    let mut e11 = a.clone();
    e11.add_to(0, 0, Q::one());
    [[e11, q.sub(&p)], [q.add(&p), a.scale(&-Q::one())]]
}

fn mat_mul_l_right(m: &GridMatrix, lambda: &Q) -> GridMatrix {
    // M·L with L = [[x, −1],[1, 0]] + ℏ diag(λ, 0)
    let one = Q::one();
    let col0 = |i: usize| m[i][0].times_monomial(&one, 0, 1).add(&m[i][1]).add(&m[i][0].times_monomial(lambda, 1, 0));
    let col1 = |i: usize| m[i][0].scale(&-one.clone());
    [[col0(0), col1(0)], [col0(1), col1(1)]]
}

fn mat_mul_l_left(m: &GridMatrix, lambda: &Q) -> GridMatrix {
    // L·M
    let one = Q::one();
    let row0 = |j: usize| m[0][j].times_monomial(&one, 0, 1).sub(&m[1][j]).add(&m[0][j].times_monomial(lambda, 1, 0));
    let row1 = |j: usize| m[0][j].clone();
    [[row0(0), row0(1)], [row1(0), row1(1)]]
}

/// `M̃(x+ℏ)L(x) − L(x)M̃(x)` on every known cell, entrywise; at `λ = 1/2`
/// this is the reduced system whose coefficientwise form the six identities
/// express. Also checks `Tr = 1` and `det = 0` cellwise.
pub fn dy_system_check(k: u32, n: i64) -> Report {
    let mut rep = Report::new("dy-system");
    let half = Q::new(1.into(), 2.into());
    let m = dy_assemble(k, n);
    let shifted: GridMatrix = [[taylor_shift(&m[0][0]), taylor_shift(&m[0][1])], [taylor_shift(&m[1][0]), taylor_shift(&m[1][1])]];
    let lhs = mat_mul_l_right(&shifted, &half);
    let rhs = mat_mul_l_left(&m, &half);
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        rep.push(&format!("shift-relation-{}{}", i + 1, j + 1), describe(lhs[i][j].first_difference(&rhs[i][j])));
    }
    let mut one = Grid::new(k, n);
    one.add_to(0, 0, Q::one());
    rep.push("trace", describe(m[0][0].add(&m[1][1]).first_difference(&one)));
    let det = grid_mul(&m[0][0], &m[1][1]).sub(&grid_mul(&m[0][1], &m[1][0]));
    rep.push("det", describe(det.first_difference(&Grid::new(k, n))));
    rep
}

/// Product of two grids whose cells all have `n ≥ 0`.
fn grid_mul(a: &Grid, b: &Grid) -> Grid {
    let mut r = Grid::new(a.hbar_max.min(b.hbar_max), a.x_max.min(b.x_max));
    for (&(h1, n1), c1) in &a.cells {
        for (&(h2, n2), c2) in &b.cells {
            r.add_to(h1 + h2, n1 + n2, c1 * c2);
        }
    }
    r
}

/// One of the six `(s, p)` coefficient identities, returning both sides.
///
/// Two exponents differ from the commonly quoted form: in identity 4 the second exponent is
/// `2s+1+2p−2m`, in identity 5 the third and fourth exponents are
/// `2s−1+2p−2m`. Identity 1 is only meaningful for `s ≥ 1` and identity 5
/// for `(s, p) ≠ (0, 0)`; see [`identity_in_domain`].
pub fn reduced_identity(which: u8, s: i64, p: i64) -> (Q, Q) {
    let t = |x: i64| Q::from_integer(x.into());
    let c = binomial;
    let f = four_pow;
    let two_s1 = t(2 * s + 1);
    match which {
        1 => {
            let lhs = (0..=p).map(|m| f(m + 1) * a_sum_lower(s, 2 * s + 2 * p - 2 * m - 1) * c(2 * s + 2 * p, 2 * m + 1)).sum();
            (lhs, a_sum(s, 2 * s + 2 * p + 1) / &two_s1)
        }
        2 => {
            let lhs = (0..=p).map(|m| f(m) * a_sum(s, 2 * s + 1 + 2 * p - 2 * m) * c(2 * s + 1 + 2 * p, 2 * m)).sum();
            let upper: Q = (0..=s + 1)
                .map(|l| {
                    let b = 2 * s + 3 - 2 * l;
                    sign(l) * ipow(b, 2 * s + 2 * p + 1) / t(4 * (s + 1)) * (ipow(b, 2) / t(2 * s + 3) - Q::one()) * c(2 * s + 3, l)
                })
                .sum();
            (lhs, upper - a_sum(s, 2 * s + 2 * p + 1))
        }
        3 => {
            let first: Q = (0..p).map(|m| f(m) * a_sum(s, 2 * s - 1 + 2 * p - 2 * m) * &two_s1 * c(2 * s + 2 * p, 2 * m + 1)).sum();
            let second: Q = (0..=p).map(|m| f(m) * a_sum(s, 2 * s + 1 + 2 * p - 2 * m) * c(2 * s + 2 * p, 2 * m)).sum();
            (a_sum(s, 2 * s + 2 * p + 1), second - first * t(2))
        }
        4 => {
            let first: Q = (0..=p).map(|m| f(m) * a_sum(s, 2 * s + 1 + 2 * p - 2 * m) * c(2 * s + 2 * p + 1, 2 * m)).sum();
            let second: Q =
                (0..=p).map(|m| f(m) * a_sum(s, 2 * s + 1 + 2 * p - 2 * m) / &two_s1 * c(2 * s + 2 * p + 1, 2 * m + 1)).sum();
            (a_sum(s, 2 * s + 2 * p + 1), second * t(2) - first)
        }
        5 => {
            let lhs = t(4 * s) * a_sum_lower(s, 2 * s + 2 * p - 1);
            let r1: Q = (0..p).map(|m| f(m) * a_sum(s, 2 * s - 1 + 2 * p - 2 * m) * c(2 * s + 2 * p, 2 * m + 1)).sum();
            let r2: Q = (0..=p).map(|m| f(m) * a_sum(s, 2 * s + 1 + 2 * p - 2 * m) / &two_s1 * c(2 * s + 2 * p, 2 * m)).sum();
            let r3: Q = (0..p).map(|m| f(m) * a_sum(s, 2 * s - 1 + 2 * p - 2 * m) * c(2 * s + 2 * p - 1, 2 * m)).sum();
            let r4: Q =
                (0..p).map(|m| f(m) * a_sum(s, 2 * s - 1 + 2 * p - 2 * m) / &two_s1 * c(2 * s + 2 * p - 1, 2 * m + 1)).sum();
            let r5: Q =
                (0..=p).map(|m| f(m) * a_sum_lower(s, 2 * s + 2 * p - 2 * m - 1) * c(2 * s + 2 * p - 1, 2 * m)).sum();
            (lhs, -t(2) * r1 + r2 + r3 - t(2) * r4 - t(4 * s) * r5)
        }
        6 => {
            let half = Q::new(1.into(), 2.into());
            let r1: Q = (0..=p).map(|m| f(m) * a_sum(s, 2 * s + 1 + 2 * p - 2 * m) * c(2 * s + 2 * p + 1, 2 * m)).sum();
            let r2: Q =
                (0..=p).map(|m| f(m) * a_sum(s, 2 * s + 1 + 2 * p - 2 * m) / &two_s1 * c(2 * s + 1 + 2 * p, 2 * m + 1)).sum();
            let r3: Q = (0..p).map(|m| f(m) * a_sum(s, 2 * s - 1 + 2 * p - 2 * m) * c(2 * s + 2 * p, 2 * m + 1)).sum();
            let r4: Q = (0..=p).map(|m| f(m) * a_sum(s, 2 * s + 1 + 2 * p - 2 * m) / &two_s1 * c(2 * s + 2 * p, 2 * m)).sum();
            let r5: Q =
                (0..=p).map(|m| f(m) * a_sum_lower(s, 2 * s - 1 + 2 * p - 2 * m) * c(2 * s + 2 * p, 2 * m + 1)).sum();
            (Q::zero(), &half * r1 - r2 - r3 + &half * r4 + t(4 * s) * r5)
        }
        _ => panic!("identities are numbered 1 to 6"),
    }
}

/// Identity 1 divides its cell equation by `s`; identity 5 leaves out the
/// `diag(1,0)` contribution, which only reaches the constant cell `(0, 0)`.
pub fn identity_in_domain(which: u8, s: i64, p: i64) -> bool {
    match which {
        1 => s >= 1,
        5 => (s, p) != (0, 0),
        _ => true,
    }
}

/// Identities 4 and 5 with the commonly quoted exponents, kept as the
/// record of why they were changed.
pub fn reduced_identity_uncorrected(which: u8, s: i64, p: i64) -> (Q, Q) {
    let t = |x: i64| Q::from_integer(x.into());
    let c = binomial;
    let f = four_pow;
    let two_s1 = t(2 * s + 1);
    match which {
        4 => {
            let first: Q = (0..=p).map(|m| f(m) * a_sum(s, 2 * s + 1 + 2 * p - 2 * m) * c(2 * s + 2 * p + 1, 2 * m)).sum();
            let second: Q =
                (0..=p).map(|m| f(m) * a_sum(s, 2 * s - 1 + 2 * p - 2 * m) / &two_s1 * c(2 * s + 2 * p + 1, 2 * m + 1)).sum();
            (a_sum(s, 2 * s + 2 * p + 1), second * t(2) - first)
        }
        5 => {
            let lhs = t(4 * s) * a_sum_lower(s, 2 * s + 2 * p - 1);
            let r1: Q = (0..p).map(|m| f(m) * a_sum(s, 2 * s - 1 + 2 * p - 2 * m) * c(2 * s + 2 * p, 2 * m + 1)).sum();
            let r2: Q = (0..=p).map(|m| f(m) * a_sum(s, 2 * s + 1 + 2 * p - 2 * m) / &two_s1 * c(2 * s + 2 * p, 2 * m)).sum();
            let r3: Q = (0..p).map(|m| f(m) * a_sum(s, 2 * s - 1 + 2 * p + 2 * m) * c(2 * s + 2 * p - 1, 2 * m)).sum();
            let r4: Q =
                (0..p).map(|m| f(m) * a_sum(s, 2 * s - 1 + 2 * p + 2 * m) / &two_s1 * c(2 * s + 2 * p - 1, 2 * m + 1)).sum();
            let r5: Q =
                (0..=p).map(|m| f(m) * a_sum_lower(s, 2 * s + 2 * p - 2 * m - 1) * c(2 * s + 2 * p - 1, 2 * m)).sum();
            (lhs, -t(2) * r1 + r2 + r3 - t(2) * r4 - t(4 * s) * r5)
        }
        _ => reduced_identity(which, s, p),
    }
}

/// `Σ_{l=0}^{j} (−1)^l (2j+1−2l)^{2j+1} (2j)!/(l!(2j−l+1)!)`.
pub fn p0_identity_lhs(j: i64) -> Q {
    (0..=j).map(|l| sign(l) * ipow(2 * j + 1 - 2 * l, 2 * j + 1) * fact(2 * j) / (fact(l) * fact(2 * j - l + 1))).sum()
}

/// `4^j (2j)!`: divided by `4^j (j!)²` this leaves `(2j)!/(j!)²`, the
/// coefficients of `1/√(x²−4)`.
pub fn p0_identity_rhs(j: i64) -> Q {
    four_pow(j) * fact(2 * j)
}

/// The normalization `4^j (2j)!/(j!)²`, which agrees with [`p0_identity_rhs`]
/// only for `j ≤ 1`.
pub fn p0_identity_rhs_reduced(j: i64) -> Q {
    p0_identity_rhs(j) / (fact(j) * fact(j))
}

/// The six identities on `0 ≤ s ≤ smax, 0 ≤ p ≤ pmax` (inside each one's
/// domain), the `P₀` coefficient identity for `j ≤ jmax`, and the relation
/// `α₀ = (x·P₀ − 1)/2`.
pub fn identity_battery(smax: i64, pmax: i64, jmax: i64) -> Report {
    let mut rep = Report::new("identities");
    for which in 1..=6u8 {
        let mut fail = None;
        'outer: for s in 0..=smax {
            for p in 0..=pmax {
                if !identity_in_domain(which, s, p) {
                    continue;
                }
                let (l, r) = reduced_identity(which, s, p);
                if l != r {
                    fail = Some(format!("(s,p)=({s},{p}): {l} vs {r}"));
                    break 'outer;
                }
            }
        }
        rep.push(&format!("identity-{which}"), fail);
    }
    let fail = (0..=jmax).find_map(|j| {
        let (l, r) = (p0_identity_lhs(j), p0_identity_rhs(j));
        (l != r).then(|| format!("j={j}: {l} vs {r}"))
    });
    rep.push("p0-coefficients", fail);
    // P₀ row against the series of 1/√(x²−4) = Σ (2k)!/(k!)² x^{−2k−1}
    let n = 2 * jmax + 1;
    let p = dy_generate(DyKind::P, 0, n);
    let fail = (0..=jmax).find_map(|k| {
        let want = fact(2 * k) / (fact(k) * fact(k));
        let got = p.coeff(0, 2 * k + 1);
        (got != want).then(|| format!("x^-{}: {got} vs {want}", 2 * k + 1))
    });
    rep.push("p0-series", fail);
    let a = dy_generate(DyKind::Alpha, 0, n + 1);
    let fail = (0..n).find_map(|m| {
        // (x P₀ − 1)/2 at x^{−m} is P₀[m+1]/2; the constant terms cancel
        let want = p.grid.get(0, m + 1) / Q::from_integer(2.into()) - if m == 0 { q(1, 2) } else { Q::zero() };
        let got = a.coeff(0, m);
        (got != want).then(|| format!("x^-{m}: {got} vs {want}"))
    });
    rep.push("alpha0-relation", fail);
    rep
}

/// Large-x expansion of a function of `z` on the sheet `z ~ x`, through `x^{−n}`.
pub fn expand_at_infinity(f: &crate::exact::RatFunc, n: i64) -> LaurentSeries {
    let xf = to_x_form(f);
    let extra = 4 + xf.sqrt_coeff.degree_at_infinity().unwrap_or(0).max(0);
    // √(x²−4) = z − 1/z = 2z − x
    let z = z_of_x_series(n + extra);
    let root = z.scale(&Q::from_integer(2.into())).try_sub(&LaurentSeries::monomial(Point::Infinity, Q::one(), -1)).unwrap();
    let r = LaurentSeries::expand(&xf.rational, Point::Infinity, n + 1);
    let t = LaurentSeries::expand(&xf.sqrt_coeff, Point::Infinity, n + extra);
    r.try_add(&t.try_mul(&root).unwrap()).unwrap().truncate(n + 1)
}

/// `M_k` (computed, `λ = 1/2`) against `M̃_k` cell by cell for `k ≤ kmax`
/// through `x^{−n}`.
pub fn dy_compare(tower: &MTower, kmax: usize, n: i64) -> Report {
    let mut rep = Report::new("dy");
    let dy = dy_assemble(kmax as u32, n);
    for k in 0..=kmax.min(tower.len() - 1) {
        let mut fail = None;
        'entries: for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let s = expand_at_infinity(tower.get(k).get(i, j), n);
            for p in s.valuation().min(0)..=n {
                let got = s.coeff(p).unwrap();
                let want = dy[i][j].get(k as u32, p);
                if got != want {
                    fail = Some(format!("entry ({},{}), x^{}: {got} vs {want}", i + 1, j + 1, -p));
                    break 'entries;
                }
            }
        }
        rep.push(&format!("m{k}"), fail);
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffsys::m_p1;

    #[test]
    fn leading_cells() {
        assert_eq!(dy_generate(DyKind::Alpha, 2, 6).coeff(0, 2), Q::one());
        assert_eq!(dy_generate(DyKind::P, 2, 6).coeff(0, 1), Q::one());
        assert_eq!(dy_generate(DyKind::Q, 3, 6).coeff(1, 2), q(1, 2));
    }

    #[test]
    fn sparsity() {
        for kind in [DyKind::Alpha, DyKind::P, DyKind::Q] {
            assert_eq!(dy_generate(kind, 8, 16).sparsity_violation(), None, "{kind}");
        }
    }

    #[test]
    fn inverse_square_root_coefficients() {
        let p = dy_generate(DyKind::P, 0, 7);
        let got: Vec<Q> = (0..4).map(|k| p.coeff(0, 2 * k + 1)).collect();
        assert_eq!(got, vec![q(1, 1), q(2, 1), q(6, 1), q(20, 1)]);
    }

    #[test]
    fn p0_normalization_at_one() {
        assert_eq!(p0_identity_lhs(1), q(8, 1));
        assert_eq!(p0_identity_rhs(1), q(8, 1));
        // the bare 4^j would give 4
        assert_ne!(p0_identity_lhs(1), four_pow(1));
        assert_eq!(p0_identity_lhs(2), q(384, 1));
        assert_eq!(p0_identity_rhs_reduced(2), q(96, 1));
    }

    #[test]
    fn identity_three_at_origin() {
        assert_eq!(reduced_identity(3, 0, 0), (Q::one(), Q::one()));
    }

    #[test]
    fn uncorrected_exponents_fail() {
        let (l, r) = reduced_identity_uncorrected(4, 1, 0);
        assert_eq!((l, r), (q(24, 1), q(-24, 1)));
        let (l, r) = reduced_identity_uncorrected(5, 1, 2);
        assert_ne!(l, r);
        assert_eq!(reduced_identity(1, 0, 0), (Q::zero(), Q::one()));
    }

    #[test]
    fn battery() {
        let rep = identity_battery(6, 6, 12);
        assert!(rep.all_passed(), "{rep:?}");
    }

    #[test]
    fn shift_formulas() {
        let rep = dy_shift_check(6, 14);
        assert!(rep.all_passed(), "{rep:?}");
    }

    #[test]
    fn shifted_q_gains_even_orders() {
        let q_shift = taylor_shift(&dy_generate(DyKind::Q, 4, 10).grid);
        assert!(q_shift.cells.keys().any(|&(h, _)| h % 2 == 0));
    }

    #[test]
    fn system_relation() {
        let rep = dy_system_check(6, 14);
        assert!(rep.all_passed(), "{rep:?}");
    }

    #[test]
    fn first_order_off_diagonal() {
        let m = dy_assemble(2, 6);
        assert_eq!(m[0][1].get(1, 2), q(1, 2));
    }

    #[test]
    fn matches_tower() {
        let tower = m_p1(3, &q(1, 2));
        let rep = dy_compare(&tower, 3, 12);
        assert!(rep.all_passed(), "{rep:?}");
    }
}
