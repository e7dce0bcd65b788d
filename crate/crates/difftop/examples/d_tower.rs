//! D₀, D₁ and the way back to L.
use difftop::diffsys::{l_coeffs_z, l_p1};
use difftop::dlbridge::{bridge_check, DTower};
use difftop::exact::q;

fn main() {
    let lam = q(1, 2);
    let d = DTower::p1(2, &lam).unwrap();
    for k in 0..=1 {
        for (j, f) in d.get(k).get(0, 1).parts() {
            println!("D_{k} (1,2), ln(z)^{j} part: {f}");
        }
    }
    let l = l_coeffs_z(&l_p1(&lam), 1);
    for c in bridge_check(&d, &l, 9).clauses {
        println!("{:<16} {}", c.id, c.first_failure.unwrap_or_else(|| "ok".into()));
    }
}
