//! Monotonicity of iterated failure rates and averaged failure rates.

use iterfr::ageing::{classify_ifr, classify_ifra, dfr_onset, dfr_onset_q0_sign, holder_bounds, window_for};
use iterfr::distributions::DistributionSpec;

pub fn run_example() -> iterfr::Result<()> {
    let dists = [
        DistributionSpec::poly_exp_example(1.0)?,
        DistributionSpec::max_exp(&[1.0, 2.0])?,
        DistributionSpec::gamma(0.5, 1.0)?,
        DistributionSpec::gamma(3.0, 1.0)?,
        DistributionSpec::weibull(2.0, 1.0)?,
        DistributionSpec::exponential(2.0)?,
    ];
    println!("{:<16} {:>3} {:>14} {:>14}", "distribution", "s", "r_s", "(1/x)∫r_s");
    for d in &dists {
        let cfg = window_for(d);
        for s in 1..=3 {
            let ifr = classify_ifr(d, s, &cfg)?;
            let ifra = classify_ifra(d, s, &cfg)?;
            println!("{:<16} {:>3} {:>14} {:>14}", d.to_string(), s, ifr.label(), ifra.label());
        }
    }

    // For the max of two exponentials with rate ratio 2, iteration
    // eventually turns the rate decreasing.
    let m = DistributionSpec::max_exp(&[1.0, 2.0])?;
    match dfr_onset(&m, 12)? {
        Some(s) => println!("{m} is s-DFR from s = {s}"),
        None => println!("{m}: no DFR onset up to s = 12"),
    }
    let signs: String = (1..=8).map(|s| dfr_onset_q0_sign(2.0, s).as_char()).collect();
    println!("sign of Q(0) for s = 1..8: {signs}");

    // Moment inequalities that follow from s-IFR / s-DFR.
    let g = DistributionSpec::gamma(3.0, 1.0)?;
    for x in [0.0, 1.0, 4.0] {
        let h = holder_bounds(&g, 4, x)?;
        println!(
            "{g}, s = 4, x = {x}: lower {} ({:+.3e}), upper {} ({:+.3e}), DFR bound {} ({:+.3e})",
            h.ifr_lower_holds, h.ifr_lower_margin, h.ifr_upper_holds, h.ifr_upper_margin, h.dfr_holds, h.dfr_margin
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> iterfr::Result<()> {
    run_example()
}
