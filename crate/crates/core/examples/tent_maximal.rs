//! Uncentered maximal function of the unit tent, with witnesses.

use sunrise_maximal::corpus::tent;
use sunrise_maximal::maxops::{default_grid, evaluate, maximal_value, OperatorSpec};
use sunrise_maximal::verify::bound_suite;

fn main() -> sunrise_maximal::Result<()> {
    let f = tent();
    let op = OperatorSpec::uncentered();

    // at x = 2 the best interval [a, 2] has f(a) equal to its average: 3 - sqrt 7
    let (v, w) = maximal_value(&op, &f, 2.0)?;
    println!("Mf(2) = {v:.10}  (3 - sqrt7 = {:.10})  witness {w:?}", 3.0 - 7f64.sqrt());

    let field = evaluate(&op, &f, &default_grid(&f, 17))?;
    println!("{:>8} {:>10} {:>10}", "x", "f", "Mf");
    for (x, m) in field.grid.iter().zip(&field.values) {
        println!("{x:8.3} {:10.6} {m:10.6}", f.eval(*x));
    }

    let b = bound_suite(&f, &field)?;
    println!("Var(Mf) = {:.6}, Var(f) = {:.6}, ratio {:.6}", b.deriv_field, b.deriv_f, b.ratio);
    Ok(())
}
