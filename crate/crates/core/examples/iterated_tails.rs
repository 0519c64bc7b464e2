//! Iterated survival functions, their normalizers and failure rates.

use iterfr::distributions::DistributionSpec;
use iterfr::iteration::{iterate, iterated_moment, residual_partial_moment};

pub fn run_example() -> iterfr::Result<()> {
    let g = DistributionSpec::gamma(2.0, 1.0)?;
    let xs = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0];
    println!("iterated tails of {g}");
    print!("{:>4}", "s");
    for x in xs {
        print!(" {:>12}", format!("x={x}"));
    }
    println!(" {:>10}", "mean");
    for s in 1..=4 {
        let it = iterate(&g, s)?;
        print!("{s:>4}");
        for x in xs {
            print!(" {:>12.6e}", it.eval(x));
        }
        println!(" {:>10.6}", iterated_moment(&g, s)?);
    }

    // The tail of order s is a normalized residual moment of order s - 1.
    let (s, x) = (3, 1.5);
    let direct = residual_partial_moment(&g, s - 1, x)? / g.raw_moment(s - 1)?;
    println!("order {s} tail at {x}: {:.12} (residual moment {:.12})", iterate(&g, s)?.eval(x), direct);

    // Failure rates r_s for a max of exponentials; the tails stay
    // exponential polynomials, so everything is closed form.
    let m = DistributionSpec::max_exp(&[1.0, 2.0])?;
    for s in 1..=3 {
        let it = iterate(&m, s)?;
        let rates: Vec<String> = [0.0, 0.5, 1.0, 3.0, 10.0]
            .iter()
            .map(|&x| it.failure_rate(x).map(|r| format!("{r:.5}")))
            .collect::<iterfr::Result<_>>()?;
        println!(
            "{m}, s = {s}: tail {}\n    r_s at 0, 0.5, 1, 3, 10: {}",
            it.as_exppoly().expect("closed form"),
            rates.join(", ")
        );
    }

    // The branched Pareto law has an infinite second moment, so only the
    // first two tails exist.
    let bp = DistributionSpec::branched_pareto(5.0, 10.0)?;
    for s in 1..=3 {
        match iterate(&bp, s) {
            Ok(it) => println!("{bp}, s = {s}: tail(5) = {:.12}", it.eval(5.0)),
            Err(e) => println!("{bp}, s = {s}: {e}"),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> iterfr::Result<()> {
    run_example()
}
