use num_traits::Zero;
use proptest::prelude::*;

use difftop::curve::x_at;
use difftop::dy::{taylor_shift, Grid};
use difftop::exact::{fmt_q, parse_q, Poly, RatFunc, Var, Q};
use difftop::toprec::TopRec;

fn rational() -> impl Strategy<Value = Q> {
    (-60i64..=60, 1i64..=12).prop_map(|(n, d)| Q::new(n.into(), d.into()))
}

/// Points off the branchpoints and off z = 0.
fn point() -> impl Strategy<Value = Q> {
    rational().prop_filter("generic point", |z| {
        let one = Q::from_integer(1.into());
        *z != Q::from_integer(0.into()) && *z != one && *z != -one
    })
}

fn poly(max_deg: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(rational(), 0..=max_deg + 1).prop_map(Poly::new)
}

fn grid() -> impl Strategy<Value = Grid> {
    prop::collection::vec(((0u32..=3), (-3i64..=6), rational()), 0..8).prop_map(|cells| {
        let mut g = Grid::new(6, 10);
        for (h, n, c) in cells {
            g.add_to(h, n, c);
        }
        g
    })
}

/// ℏ ↦ 2ℏ on a grid (or back, with `inverse`).
fn rescale_hbar(g: &Grid, inverse: bool) -> Grid {
    let mut r = Grid::new(g.hbar_max, g.x_max);
    for (&(h, n), c) in &g.cells {
        let f = Q::from_integer(2.into()).pow(h as i32);
        r.add_to(h, n, if inverse { c / f } else { c * f });
    }
    r
}

proptest! {
    #[test]
    fn rational_text_round_trip(x in rational()) {
        prop_assert_eq!(parse_q(&fmt_q(&x)).unwrap(), x);
    }

    #[test]
    fn taylor_shift_is_linear(a in grid(), b in grid(), c in rational()) {
        let lhs = taylor_shift(&a.add(&b.scale(&c)));
        let rhs = taylor_shift(&a).add(&taylor_shift(&b).scale(&c));
        prop_assert_eq!(lhs.first_difference(&rhs), None);
    }

    // shifting by ℏ twice is shifting by 2ℏ
    #[test]
    fn taylor_shift_composes(g in grid()) {
        let twice = taylor_shift(&taylor_shift(&g));
        let doubled = rescale_hbar(&taylor_shift(&rescale_hbar(&g, true)), false);
        prop_assert_eq!(twice.first_difference(&doubled), None);
    }

    #[test]
    fn poly_shift_matches_evaluation(p in poly(6), a in rational(), x in rational()) {
        prop_assert_eq!(p.taylor_shift(&a).eval(&x), p.eval(&(&x + &a)));
    }

    #[test]
    fn division_undoes_multiplication(p in poly(5), d in poly(4)) {
        prop_assume!(!d.is_zero());
        let (quot, rem) = p.mul(&d).divrem(&d);
        prop_assert_eq!(quot, p);
        prop_assert!(rem.is_zero());
    }

    #[test]
    fn gcd_divides_both(a in poly(4), b in poly(4), c in poly(3)) {
        prop_assume!(!c.is_zero() && !(a.is_zero() && b.is_zero()));
        let g = a.mul(&c).gcd(&b.mul(&c));
        prop_assert!(a.mul(&c).rem(&g).is_zero());
        prop_assert!(b.mul(&c).rem(&g).is_zero());
        prop_assert!(g.rem(&c).is_zero());
    }

    #[test]
    fn ratfunc_eval_is_a_homomorphism(p in poly(4), q in poly(4), r in poly(3), x in rational()) {
        prop_assume!(!q.is_zero() && !r.is_zero() && !q.eval(&x).is_zero() && !r.eval(&x).is_zero());
        let f = RatFunc::new(p.clone(), q.clone(), Var::Z).unwrap();
        let g = RatFunc::new(r.clone(), Poly::one(), Var::Z).unwrap();
        let fx = p.eval(&x) / q.eval(&x);
        let gx = r.eval(&x);
        prop_assert_eq!(f.mul(&g).eval(&x).unwrap(), &fx * &gx);
        prop_assert_eq!(f.add(&g).eval(&x).unwrap(), &fx + &gx);
        prop_assert_eq!(f.div(&g).unwrap().eval(&x).unwrap(), &fx / &gx);
    }

    #[test]
    fn x_is_invariant_under_the_sheet_swap(z in point()) {
        prop_assert_eq!(x_at(&z), x_at(&z.recip()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn omega_is_symmetric_at_points(zs in prop::collection::vec(point(), 4), rot in 1usize..4) {
        let mut tr = TopRec::new();
        let w04 = tr.omega(0, 4).unwrap();
        let w12 = tr.omega(1, 2).unwrap();
        let mut moved = zs.clone();
        moved.rotate_left(rot);
        prop_assert_eq!(w04.eval(&zs), w04.eval(&moved));
        prop_assert_eq!(w12.eval(&zs[..2]), w12.eval(&[zs[1].clone(), zs[0].clone()]));
    }

    // the pullback under z ↦ −z is (−1)^n ω, so the density itself is even
    #[test]
    fn omega_density_is_even(zs in prop::collection::vec(point(), 3)) {
        let mut tr = TopRec::new();
        for (g, n) in [(0u32, 3usize), (1, 1), (1, 2), (2, 1)] {
            let w = tr.omega(g, n).unwrap();
            let at = &zs[..n];
            let neg: Vec<Q> = at.iter().map(|z| -z.clone()).collect();
            prop_assert_eq!(w.eval(&neg), w.eval(at));
        }
    }
}
