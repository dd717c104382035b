//! Sunrise decomposition of a two-bump profile into right and left lateral
//! maximal functions, and the identity checks on it.

use sunrise_maximal::corpus::two_bumps;
use sunrise_maximal::maxops::{default_grid, evaluate, OperatorSpec};
use sunrise_maximal::sunrise::sunrise_decompose;
use sunrise_maximal::verify::check_sunrise_identities;
use sunrise_maximal::Domain;

fn main() -> sunrise_maximal::Result<()> {
    let f = two_bumps(Domain::line(), -1.0, 1.5, 1.0, 0.4);
    let field = evaluate(&OperatorSpec::uncentered(), &f, &default_grid(&f, 41))?;
    let dec = sunrise_decompose(&f, &field, None)?;

    println!("{} disconnecting components", dec.components.len());
    println!("{:>8} {:>8} {:>8} {:>8} {:>8}  region", "t", "f", "Mf", "M_R", "M_L");
    for k in (0..dec.nodes.len()).step_by(3) {
        println!(
            "{:8.3} {:8.4} {:8.4} {:8.4} {:8.4}  {:?}",
            dec.nodes[k], dec.f_values[k], dec.field_values[k], dec.lateral_r[k], dec.lateral_l[k], dec.regions[k]
        );
    }

    let check = check_sunrise_identities(&dec);
    println!("{} nodes checked, passed: {}", check.nodes, check.passed());
    Ok(())
}
