//! Differentials from the recursion, and how long the larger ones take.
use std::time::Instant;

use difftop::toprec::TopRec;

fn main() {
    let mut tr = TopRec::new();
    print!("omega(0,3) in the pole basis:\n{}", tr.omega(0, 3).unwrap().to_csv());
    for g in 1..=2 {
        println!("omega({g},1) = ({}) dz", tr.omega(g, 1).unwrap().to_ratfunc());
    }
    for (g, n) in [(0, 4), (1, 2), (0, 5), (1, 3), (2, 2)] {
        let t = Instant::now();
        let w = tr.omega(g, n).unwrap();
        println!("({g},{n}): {} basis terms in {:?}", w.len(), t.elapsed());
    }
}
