//! Determinantal correlators at a rational point against the recursion.
use difftop::correlators::{w1_tower, wn_eval};
use difftop::curve::dx_dz;
use difftop::diffsys::m_p1;
use difftop::exact::{q, qi, Q};
use difftop::toprec::TopRec;

fn main() {
    let m = m_p1(5, &q(1, 2));
    let w1 = w1_tower(&m, 3).unwrap();
    println!("W1^(1) = {}", w1.get(1));
    let zs = [qi(2), qi(3), q(-5, 2)];
    let s = wn_eval(&m, &zs, 3).unwrap();
    let jac: Q = zs.iter().map(|z| dx_dz().eval(z).unwrap()).product();
    let mut tr = TopRec::new();
    for (g, k) in [(0u32, 1i32), (1, 3)] {
        let det = s.values.coeff(k).unwrap() * &jac;
        let rec = tr.omega(g, 3).unwrap().eval(&zs);
        println!("W3^({k}) dx dx dx = {det}, omega({g},3) = {rec}");
    }
}
