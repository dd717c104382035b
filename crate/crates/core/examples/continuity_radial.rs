//! Derivative convergence of the maximal field along f + g/j on radial
//! profiles in the plane.

use sunrise_maximal::corpus::corpus;
use sunrise_maximal::maxops::{default_grid, OperatorSpec};
use sunrise_maximal::verify::continuity_experiment;
use sunrise_maximal::{Domain, Profile};

fn main() -> sunrise_maximal::Result<()> {
    let domain = Domain::radial(2)?;
    let f = corpus(domain, 81, 1).remove(0);
    let g = corpus(domain, 82, 1).remove(0);
    let seq: Vec<Profile> = [1.0, 2.0, 4.0, 8.0].iter().map(|j| f.combine(1.0, &g, 1.0 / j)).collect::<Result<_, _>>()?;

    let rep = continuity_experiment(&f, &seq, &OperatorSpec::uncentered(), &default_grid(&f, 40), Some(0.05))?;
    for (j, s) in rep.steps.iter().enumerate() {
        println!("step {j}: derivative distance {:.4e}, branch {:?}", s.deriv_distance, s.branch);
    }
    println!("lambda trend {:.3e} -> {:.3e}, decreasing {}", rep.lambda_trend.first, rep.lambda_trend.last, rep.lambda_trend.decreasing);
    Ok(())
}
