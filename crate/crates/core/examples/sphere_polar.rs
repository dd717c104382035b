//! Geodesic-cap maximal function of a zonal profile on the 2-sphere.

use sunrise_maximal::maxops::{default_grid, evaluate, OperatorSpec};
use sunrise_maximal::verify::check_no_strict_local_max;
use sunrise_maximal::{build_profile, Domain};

fn main() -> sunrise_maximal::Result<()> {
    let pts = [(0.0, 0.2), (0.8, 1.0), (1.9, 0.1), (2.6, 0.7), (std::f64::consts::PI, 0.3)];
    let f = build_profile(&pts, Domain::polar(2)?)?;
    let field = evaluate(&OperatorSpec::uncentered(), &f, &default_grid(&f, 24))?;
    for (i, x) in field.grid.iter().enumerate() {
        println!("theta {x:.3}  f {:.4}  Mf {:.4}  {:?}", f.eval(*x), field.values[i], field.witnesses[i]);
    }
    let p1 = check_no_strict_local_max(&field, None);
    println!("strict local maxima found: {}", p1.violations.len());
    Ok(())
}
