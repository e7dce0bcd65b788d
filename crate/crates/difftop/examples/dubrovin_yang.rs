//! The conjectured matrix against the computed one at large x.
use difftop::diffsys::m_p1;
use difftop::dy::{dy_compare, dy_generate, identity_battery, p0_identity_lhs, DyKind};
use difftop::exact::q;

fn main() {
    print!("{}", dy_generate(DyKind::Q, 3, 8).to_csv());
    let t = m_p1(4, &q(1, 2));
    for c in dy_compare(&t, 4, 16).clauses.into_iter().chain(identity_battery(5, 5, 10).clauses) {
        println!("{:<16} {}", c.id, c.first_failure.unwrap_or_else(|| "ok".into()));
    }
    println!("coefficient sum at j = 1: {}", p0_identity_lhs(1));
}
