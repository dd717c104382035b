//! Non-tangential cube maximal function of two far-apart bumps. Narrow
//! apertures leave strict local maxima between the bumps; wide ones do not.

use sunrise_maximal::corpus::two_bumps;
use sunrise_maximal::maxops::{evaluate, linspace, OperatorKind, OperatorSpec};
use sunrise_maximal::verify::check_no_strict_local_max;
use sunrise_maximal::Domain;

fn main() -> sunrise_maximal::Result<()> {
    let f = two_bumps(Domain::line(), -5.0, 5.0, 1.0, 0.1);
    let grid = linspace(-4.0, 4.0, 81);
    for alpha in [0.2, 1.0 / 3.0, 1.0] {
        let field = evaluate(&OperatorSpec::new(OperatorKind::NonTangentialCube, alpha), &f, &grid)?;
        let p1 = check_no_strict_local_max(&field, None);
        let worst = p1.violations.iter().max_by(|a, b| a.excess.total_cmp(&b.excess));
        match worst {
            Some(v) => println!("alpha {alpha:.3}: {} violations, worst at t = {:.2} (excess {:.2e})", p1.violations.len(), v.t, v.excess),
            None => println!("alpha {alpha:.3}: no strict local maxima"),
        }
    }
    Ok(())
}
