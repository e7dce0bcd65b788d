//! Loop equations at a few points, and the x-dependence of P2.
use difftop::correlators::{loop_check, w1_tower, LoopSystem};
use difftop::diffsys::m_p1;
use difftop::dlbridge::DTower;
use difftop::exact::q;

fn main() {
    let half = q(1, 2);
    let top = 2;
    let m = m_p1(top + 2, &half);
    let w = w1_tower(&m, top + 1).unwrap();
    let d = DTower::p1(top, &half).unwrap();
    let sys = LoopSystem::new(&m, &d, &w, top);
    let samples = [q(3, 1), q(-5, 2), q(7, 3), q(9, 2)];
    for c in loop_check(&sys, &samples).clauses {
        println!("{:<12} {}", c.id, c.first_failure.unwrap_or_else(|| "ok".into()));
    }
    let p = sys.p(&q(3, 1), &[q(5, 3)]).unwrap();
    println!("P2(x(3); x(5/3)) at hbar^-1: {:?}", p.coeff(-1));
}
