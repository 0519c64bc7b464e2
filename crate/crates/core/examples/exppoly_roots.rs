//! Exponential polynomials: the sign-change bound, certified root brackets
//! and exact sign patterns.

use iterfr::exppoly::ExpPoly;

pub fn run_example() -> iterfr::Result<()> {
    let p: ExpPoly = "1*e(-1)+(-1)*e(-2)".parse()?;
    let report = p.isolate_roots(-1.0, 1.0)?;
    println!("{p}: at most {} zero(s), found {:?}", report.sign_change_bound, report.isolated_roots);

    // (e^{-x} - 1)(e^{-x} - 1/2)(e^{-x} - 1/4) e^{-x}: zeros at 0, ln 2 and ln 4.
    let cubic = ExpPoly::new([(-0.125, 1.0), (0.875, 2.0), (-1.75, 3.0), (1.0, 4.0)])?;
    let report = cubic.isolate_roots(-1.0, cubic.root_horizon(0.0))?;
    println!("{cubic}");
    println!("  bound {}, brackets:", report.sign_change_bound);
    for (lo, hi) in report.into_certified()? {
        println!("    [{lo:.12}, {hi:.12}]");
    }
    println!("  expected 0, ln 2 = {:.12}, ln 4 = {:.12}", 2f64.ln(), 4f64.ln());
    println!("  sign pattern on [0.1, inf): {}", cubic.sign_pattern_exact(0.1)?);

    // Calculus stays inside the class.
    let d = cubic.differentiate(1);
    let t = cubic.integrate_tail();
    println!("derivative: {d}");
    println!("tail integral: {t}");
    let h = 1e-6;
    let numeric = (cubic.eval(0.3 + h) - cubic.eval(0.3 - h)) / (2.0 * h);
    println!("d/dx at 0.3: {:.10} (central difference {:.10})", d.eval(0.3), numeric);

    // Affine substitution p(ax + b) is again an exponential polynomial.
    let shifted = p.compose_affine(2.0, 0.5)?;
    println!("p(2x + 0.5) = {shifted}, value at 0.25: {:.12} = {:.12}", shifted.eval(0.25), p.eval(1.0));
    Ok(())
}

#[allow(dead_code)]
fn main() -> iterfr::Result<()> {
    run_example()
}
