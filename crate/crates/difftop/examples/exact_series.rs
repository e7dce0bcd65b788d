//! Exact arithmetic underneath: rational functions, Laurent series, the chart.
use difftop::curve::{dz_dx, z_of_x_series};
use difftop::exact::{qi, LaurentSeries, Point};

fn main() {
    let z = z_of_x_series(7);
    println!("z(x) = {z:?}");
    let s = LaurentSeries::expand(&dz_dx(), Point::At(qi(2)), 3);
    println!("dz/dx near z = 2: {s:?}");
    println!("dz/dx = {}", dz_dx());
}
