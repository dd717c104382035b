//! Chain of dyadic descendants whose averages stay equal and then rise, for
//! the cube maximal function at the threshold aperture 1/3.

use sunrise_maximal::corpus::tent;
use sunrise_maximal::kernels::CubeSpec;
use sunrise_maximal::verify::{dilates_overlap, dyadic_ancestry_certificate};

fn main() -> sunrise_maximal::Result<()> {
    let f = tent();
    let q0 = CubeSpec::interval(0.0, 1.0);
    let cert = dyadic_ancestry_certificate(&f, &q0, 1.0 / 3.0, 30)?;
    println!("k = {}", cert.k);
    for (q, avg) in cert.chain.iter().zip(&cert.averages) {
        println!("  center {:+.4}  half side {:.4}  average {avg:.6}", q.center[0], q.half_side);
    }
    println!("all consecutive dilates overlap: {}", cert.all_overlap());

    // the dilates of a cube and its children meet exactly when alpha >= 1/3
    let q = CubeSpec::square([0.0, 0.0], 1.0, 0.3);
    for alpha in [0.3, 1.0 / 3.0, 0.4] {
        let all = q.children().iter().all(|c| dilates_overlap(&q, c, alpha));
        println!("alpha {alpha:.4}: children overlap {all}");
    }
    Ok(())
}
