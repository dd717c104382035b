//! Poisson-flow maximal function of a profile whose Poisson extension has a
//! closed form; near the origin the field is attained in the interior of the
//! cone while f is sloped.

use sunrise_maximal::corpus::poisson_example;
use sunrise_maximal::kernels::{angular_kernel_average, Kernel, ParabolicPoint};
use sunrise_maximal::maxops::{evaluate, linspace, maximal_value, OperatorKind, OperatorSpec};
use sunrise_maximal::verify::check_flatness;

fn main() -> sunrise_maximal::Result<()> {
    let f = poisson_example(2e-7);
    for (y, t) in [(0.0, 0.5), (1.0, 1.0), (-2.0, 0.2)] {
        let got = angular_kernel_average(&f, Kernel::Poisson, ParabolicPoint { rho_y: y, t })?;
        let exact = (((t + 2.0) * (t + 2.0) + y * y) / ((t + 1.0) * (t + 1.0) + y * y)).ln();
        println!("P_t f({y}) at t = {t}: {got:.8} (closed form {exact:.8})");
    }

    let op = OperatorSpec::new(OperatorKind::PoissonFlow, 1.0);
    let (m0, w) = maximal_value(&op, &f, 0.0)?;
    println!("M f(0) = {m0:.8}, log 4 = {:.8}, witness {w:?}", 4f64.ln());

    let grid = linspace(-0.3, 0.3, 13);
    let field = evaluate(&op, &f, &grid)?;
    for (i, x) in grid.iter().enumerate() {
        println!("{x:6.2}  f {:.5}  Mf {:.5}  disconnecting {}", f.eval(*x), field.values[i], field.is_disconnecting(i));
    }
    println!("non-flat sloped segments: {}", check_flatness(&field, &f)?.list_b.len());
    Ok(())
}
