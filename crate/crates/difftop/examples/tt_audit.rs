//! Topological-type audit for the symmetric system and the λ = 0 control.
use difftop::correlators::{tt_audit, w1_tower};
use difftop::diffsys::m_p1;
use difftop::exact::{q, Q};

fn main() {
    for lam in [q(1, 2), Q::from_integer(0.into())] {
        let m = m_p1(6, &lam);
        let w = w1_tower(&m, 4).unwrap();
        let rep = tt_audit(&m, &w, 4, 3, 7);
        println!("lambda = {lam}");
        for c in rep.clauses {
            println!("  {:<14} {}", c.id, c.first_failure.unwrap_or_else(|| "ok".into()));
        }
    }
}
