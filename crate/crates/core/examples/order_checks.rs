//! Stochastic order checks between two lifetimes, with re-checkable witnesses.

use iterfr::distributions::DistributionSpec;
use iterfr::ordering::{
    compare_dmrl, compare_ifr, compare_ifra, convexity_check, criterion_h, verify_witness, GridSpec, HForm, Shape,
};
use iterfr::report::document;
use iterfr::signscan::ScanConfig;

pub fn run_example() -> iterfr::Result<()> {
    // Branched Pareto pair: DMRL ordered but not 2-IFR ordered.
    let x = DistributionSpec::branched_pareto(5.0, 10.0)?;
    let y = DistributionSpec::branched_pareto(2.0, 6.0)?;
    let v = compare_ifr(&x, &y, 2, &GridSpec::default_ifr(&x, &y))?;
    println!("{x} vs {y}, s = 2: {}", v.label());
    if let Some(w) = v.witness() {
        println!("  witness: {} = {} at a = {:?}, b = {:?}", w.function, w.pattern, w.a, w.b);
        println!("  re-checked independently: {}", verify_witness(&x, &y, 2, w)?);
    }
    let d = compare_dmrl(&x, &y, &ScanConfig::default())?;
    println!("  DMRL: {}", d.label());

    // Gamma shapes: the larger shape is "more IFR".
    let g1 = DistributionSpec::gamma(1.5, 1.0)?;
    let g3 = DistributionSpec::gamma(3.0, 1.0)?;
    let grid = GridSpec::default_ifr(&g3, &g1);
    for s in 1..=2 {
        println!(
            "{g3} <= {g1}, s = {s}: pattern {}, criterion {}, IFRA {}",
            compare_ifr(&g3, &g1, s, &grid)?.label(),
            criterion_h(&g3, &g1, s, &grid, HForm::Ps)?.label(),
            compare_ifra(&g3, &g1, s, &GridSpec::default_ifra())?.label()
        );
    }

    // The same question asked directly of the transform c_s.
    let cfg = ScanConfig::with_x_max(40.0);
    let conv = convexity_check(&g3, &g1, 1, &cfg, Shape::Convex)?;
    let star = convexity_check(&g3, &g1, 1, &cfg, Shape::StarShaped)?;
    println!("c_1 convex: {}, star-shaped: {}", conv.label(), star.label());

    // Verdicts serialize as versioned JSON documents.
    let json = document(&v)?;
    println!("{}", json.lines().take(12).collect::<Vec<_>>().join("\n"));
    Ok(())
}

#[allow(dead_code)]
fn main() -> iterfr::Result<()> {
    run_example()
}
