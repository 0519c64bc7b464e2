//! Parallel systems of exponential components: tail dominance and orders
//! between systems, and comparison with an exponential lifetime.

use iterfr::ageing::window_for;
use iterfr::distributions::DistributionSpec;
use iterfr::ordering::{compare_ifr, exponential_reference, newcrit, tail_dominance, GridSpec};

pub fn run_example() -> iterfr::Result<()> {
    let homogeneous = DistributionSpec::max_exp(&[1.0, 1.0])?;
    let mixed = DistributionSpec::max_exp(&[1.0, 2.0])?;
    let cfg = window_for(&homogeneous);

    for s in 1..=3 {
        let (min_u, at) = tail_dominance(&homogeneous, &mixed, s, &cfg)?;
        println!("s = {s}: min of T_X,s - T_Y,s = {min_u:+.3e} at x = {at:.3}");
    }

    let grid = GridSpec::default_ifr(&homogeneous, &mixed);
    for s in 1..=2 {
        let v = newcrit(&homogeneous, &mixed, s, &grid)?;
        println!("{homogeneous} vs {mixed}, s = {s}: {} over {} cells", v.label(), v.cells_scanned);
    }

    // Three identical components against two.
    let three = DistributionSpec::max_exp(&[1.0, 1.0, 1.0])?;
    let v = compare_ifr(&three, &homogeneous, 1, &GridSpec::default_ifr(&three, &homogeneous))?;
    println!("{three} vs {homogeneous}, s = 1: {}", v.label());

    // Against Exp(1) the order checks must agree with the ageing classes.
    for s in 1..=2 {
        let r = exponential_reference(&mixed, s, &window_for(&mixed), &GridSpec::default_ifr(&mixed, &mixed))?;
        println!(
            "{mixed}, s = {s}: r_s {}, averaged {}; X <= Exp: {} / {}, Exp <= X: {} / {}; consistent: {}",
            r.ifr_class.label(),
            r.ifra_class.label(),
            r.below_exp_ifr.label(),
            r.below_exp_ifra.label(),
            r.above_exp_ifr.label(),
            r.above_exp_ifra.label(),
            r.agrees()
        );
        for d in &r.discrepancies {
            println!("  {d}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> iterfr::Result<()> {
    run_example()
}
