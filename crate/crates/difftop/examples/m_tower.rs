//! The M tower in x-form, with its structural audit.
use difftop::diffsys::{m_audit, m_p1};
use difftop::exact::q;

fn main() {
    let t = m_p1(3, &q(1, 2));
    for k in 0..t.len() {
        println!("M_{k}:");
        for (i, j) in [(0, 0), (0, 1), (1, 0)] {
            println!("  ({},{}) {}", i + 1, j + 1, t.x_display(k, i, j));
        }
    }
    for c in m_audit(&t, 3).checks {
        println!("{:<16} {}", c.name, if c.passed() { "ok" } else { "FAILED" });
    }
}
