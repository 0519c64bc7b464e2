//! Every built-in family, from literals and from constructors.

use iterfr::distributions::DistributionSpec;
use iterfr::exppoly::ExpPoly;

pub fn run_example() -> iterfr::Result<()> {
    let literals = [
        "exp(1.5)",
        "gamma(2, 1)",
        "weibull(0.5, 2)",
        "bpareto(5, 10)",
        "polyexp(1)",
        "maxexp(1, 2)",
        "exppoly(2*e(-1) + (-1)*e(-2))",
    ];
    println!("{:<24} {:>10} {:>12} {:>12} {:>12}", "distribution", "mean", "tail(1)", "density(1)", "tail^-1(.5)");
    for lit in literals {
        let d: DistributionSpec = lit.parse()?;
        // Display writes the canonical literal back.
        assert_eq!(d.to_string().parse::<DistributionSpec>()?.to_string(), d.to_string());
        println!(
            "{:<24} {:>10.6} {:>12.6e} {:>12.6e} {:>12.6}",
            d.to_string(),
            d.mean(),
            d.tail(1.0),
            d.density(1.0),
            d.tail_inverse(0.5)?
        );
    }

    let bp = DistributionSpec::branched_pareto(5.0, 10.0)?;
    for k in 0..3 {
        match bp.raw_moment(k) {
            Ok(m) => println!("E X^{k} of {bp} = {m:.6}"),
            Err(e) => println!("E X^{k} of {bp}: {e}"),
        }
    }

    // Scaling keeps the family when it can.
    let g = DistributionSpec::gamma(2.0, 1.0)?.scaled(3.0)?;
    println!("3 * gamma(2,1) = {g}");

    // A max of exponentials has an exponential-polynomial survival function.
    let m = DistributionSpec::max_exp(&[1.0, 2.0])?;
    let p = m.as_exppoly().expect("maxexp is an exponential polynomial");
    println!("tail of {m}: {p}");
    let same = DistributionSpec::exppoly_tail(ExpPoly::new([(1.0, 1.0), (1.0, 2.0), (-1.0, 3.0)])?)?;
    println!("tail(0.7): {:.15} vs {:.15}", m.tail(0.7), same.tail(0.7));

    for bad in ["gamma(-1,1)", "bpareto(0,2)", "exppoly(1*e(-1)+1*e(-2))", "lognormal(0,1)"] {
        match bad.parse::<DistributionSpec>() {
            Ok(d) => println!("{bad}: unexpectedly accepted as {d}"),
            Err(e) => println!("{bad}: rejected ({e})"),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> iterfr::Result<()> {
    run_example()
}
