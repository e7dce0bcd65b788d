//! Stationary invariants of the projective line from the large-x expansion.
use difftop::gw::gw_extract;
use difftop::toprec::TopRec;

fn main() {
    let mut tr = TopRec::new();
    print!("{}", gw_extract(&mut tr, 0, 3, 2).unwrap().to_csv());
    for g in 1..=2 {
        let t = gw_extract(&mut tr, g, 1, 6).unwrap();
        for (k, v) in &t.entries {
            println!("<tau_{}(omega)>_{g} = {v}", k[0]);
        }
    }
}
