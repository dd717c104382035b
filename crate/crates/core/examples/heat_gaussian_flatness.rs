//! Heat-flow maximal function of a sampled Gaussian. The vertical version
//! (alpha = 0) leaves sloped segments that are not disconnecting; the cone
//! alpha = 1 is flat on the whole contact set.

use sunrise_maximal::corpus::gaussian_profile;
use sunrise_maximal::maxops::{evaluate, linspace, OperatorKind, OperatorSpec};
use sunrise_maximal::verify::check_flatness;

fn main() -> sunrise_maximal::Result<()> {
    let f = gaussian_profile(1.0, 12.0, 0.01);
    let grid = linspace(-2.995, 2.995, 61);
    for alpha in [0.0, 1.0] {
        let field = evaluate(&OperatorSpec::new(OperatorKind::HeatFlow, alpha), &f, &grid)?;
        let flat = check_flatness(&field, &f)?;
        println!(
            "alpha {alpha}: M(0) = {:.6}, {} nodes checked, list A {}, list B {}",
            field.values[30],
            flat.nodes_checked,
            flat.list_a.len(),
            flat.list_b.len()
        );
        for s in flat.list_b.iter().take(4) {
            println!("  non-flat segment [{:.3}, {:.3}]", s.a, s.b);
        }
    }
    Ok(())
}
